use alloc::vec::Vec;
use core::fmt;

use ripemd::Ripemd160;
use sha2::{Digest, Sha256};

/// A 32-byte hash output.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HashDigest(pub [u8; 32]);

impl HashDigest {
    pub const ZERO: HashDigest = HashDigest([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.0.to_vec()
    }

    pub fn from_slice(bytes: &[u8]) -> Option<HashDigest> {
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(HashDigest(arr))
    }

    pub fn to_hex(&self) -> alloc::string::String {
        let mut s = alloc::string::String::with_capacity(64);
        for b in self.0 {
            s.push(HEX[(b >> 4) as usize] as char);
            s.push(HEX[(b & 0xf) as usize] as char);
        }
        s
    }

    pub fn from_hex(s: &str) -> Option<HashDigest> {
        let bytes = s.as_bytes();
        if bytes.len() != 64 {
            return None;
        }
        let mut out = [0u8; 32];
        for (i, chunk) in bytes.chunks(2).enumerate() {
            let hi = hex_val(chunk[0])?;
            let lo = hex_val(chunk[1])?;
            out[i] = (hi << 4) | lo;
        }
        Some(HashDigest(out))
    }
}

const HEX: &[u8; 16] = b"0123456789abcdef";

fn hex_val(c: u8) -> Option<u8> {
    match c {
        b'0'..=b'9' => Some(c - b'0'),
        b'a'..=b'f' => Some(c - b'a' + 10),
        b'A'..=b'F' => Some(c - b'A' + 10),
        _ => None,
    }
}

impl fmt::Debug for HashDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashDigest({})", self.to_hex())
    }
}

impl fmt::Display for HashDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for HashDigest {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for HashDigest {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(deserializer)?;
        HashDigest::from_hex(&s).ok_or_else(|| serde::de::Error::custom("bad hash hex"))
    }
}

/// Single SHA-256.
pub fn sha256(data: &[u8]) -> HashDigest {
    let mut h = Sha256::new();
    h.update(data);
    HashDigest(h.finalize().into())
}

/// Double SHA-256, the block and transaction id hash.
pub fn sha256d(data: &[u8]) -> HashDigest {
    sha256(sha256(data).as_bytes())
}

/// RIPEMD160(SHA256(data)), the address payload hash.
pub fn hash160(data: &[u8]) -> [u8; 20] {
    let mut h = Ripemd160::new();
    h.update(sha256(data).as_bytes());
    h.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;

    // FIPS 180-4 test vectors for SHA-256.
    #[test]
    fn sha256_fips_vectors() {
        assert_eq!(
            sha256(b"").to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256(b"abc").to_hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(
            sha256(b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").to_hex(),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1"
        );
    }

    // Double-SHA256 of "" composed from the checked single-hash vectors.
    #[test]
    fn sha256d_composes_two_applications() {
        let expected = sha256(sha256(b"").as_bytes());
        assert_eq!(sha256d(b""), expected);
        assert_eq!(
            sha256d(b"").to_hex(),
            "5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456"
        );
    }

    #[test]
    fn sha256d_deterministic() {
        let d = b"the same input";
        assert_eq!(sha256d(d), sha256d(d));
    }

    // Bit-flip avalanche over 100 random inputs: flipping any single input
    // bit must change the digest.
    #[test]
    fn sha256d_avalanche_on_bit_flips() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xda7a);
        for _ in 0..100 {
            let len = rng.gen_range(1..64usize);
            let mut data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let base = sha256d(&data);
            let byte = rng.gen_range(0..len);
            let bit = rng.gen_range(0..8);
            data[byte] ^= 1 << bit;
            assert_ne!(sha256d(&data), base);
        }
    }

    // Published RIPEMD-160 test vectors (Dobbertin, Bosselaers, Preneel).
    #[test]
    fn ripemd160_known_vectors() {
        let empty: [u8; 20] = Ripemd160::digest(b"").into();
        assert_eq!(hex_of(&empty), "9c1185a5c5e9fc54612808977ee8f548b2258d31");
        let abc: [u8; 20] = Ripemd160::digest(b"abc").into();
        assert_eq!(hex_of(&abc), "8eb208f7e05d987a9b044a8e98c6b087f15a0bfc");
    }

    #[test]
    fn hash160_is_ripemd_of_sha256() {
        let expected: [u8; 20] = Ripemd160::digest(sha256(b"hello").as_bytes()).into();
        assert_eq!(hash160(b"hello"), expected);
    }

    fn hex_of(bytes: &[u8]) -> alloc::string::String {
        let mut s = alloc::string::String::new();
        for b in bytes {
            s.push(HEX[(b >> 4) as usize] as char);
            s.push(HEX[(b & 0xf) as usize] as char);
        }
        s
    }

    #[test]
    fn hex_round_trip() {
        let d = sha256(b"roundtrip");
        assert_eq!(HashDigest::from_hex(&d.to_hex()), Some(d));
        assert_eq!(HashDigest::from_hex("xyz"), None);
    }
}
