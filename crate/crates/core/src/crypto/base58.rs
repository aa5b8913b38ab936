use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::hash::sha256d;

/// The 58-character alphabet: no 0, O, I, or l.
pub const BASE58_ALPHABET: &[u8; 58] =
    b"123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base58Error {
    /// A character outside the 58-character alphabet.
    BadCharacter(char),
    /// The trailing 4 checksum bytes do not match sha256d(version || payload).
    BadChecksum,
    /// Decoded data too short to hold version and checksum.
    TooShort,
}

impl fmt::Display for Base58Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base58Error::BadCharacter(c) => write!(f, "character {c:?} not in base58 alphabet"),
            Base58Error::BadChecksum => write!(f, "base58check checksum mismatch"),
            Base58Error::TooShort => write!(f, "base58check string too short"),
        }
    }
}

/// Encode `version || payload || checksum` where the checksum is the first
/// 4 bytes of sha256d(version || payload).
pub fn base58check_encode(version: u8, payload: &[u8]) -> String {
    let mut data = Vec::with_capacity(payload.len() + 5);
    data.push(version);
    data.extend_from_slice(payload);
    let check = sha256d(&data);
    data.extend_from_slice(&check.as_bytes()[..4]);
    base58_encode(&data)
}

/// Decode a Base58Check string, returning (version, payload) after checksum
/// verification.
pub fn base58check_decode(s: &str) -> Result<(u8, Vec<u8>), Base58Error> {
    let data = base58_decode(s)?;
    if data.len() < 5 {
        return Err(Base58Error::TooShort);
    }
    let (body, check) = data.split_at(data.len() - 4);
    let expect = sha256d(body);
    if check != &expect.as_bytes()[..4] {
        return Err(Base58Error::BadChecksum);
    }
    Ok((body[0], body[1..].to_vec()))
}

fn base58_encode(data: &[u8]) -> String {
    // Leading zero bytes map to leading '1's; the rest is base conversion.
    let zeros = data.iter().take_while(|&&b| b == 0).count();
    let mut digits: Vec<u8> = Vec::new(); // base58 digits, least significant first
    for &byte in &data[zeros..] {
        let mut carry = byte as u32;
        for d in digits.iter_mut() {
            carry += (*d as u32) << 8;
            *d = (carry % 58) as u8;
            carry /= 58;
        }
        while carry > 0 {
            digits.push((carry % 58) as u8);
            carry /= 58;
        }
    }
    let mut out = String::with_capacity(zeros + digits.len());
    for _ in 0..zeros {
        out.push('1');
    }
    for &d in digits.iter().rev() {
        out.push(BASE58_ALPHABET[d as usize] as char);
    }
    out
}

fn base58_decode(s: &str) -> Result<Vec<u8>, Base58Error> {
    let zeros = s.bytes().take_while(|&b| b == b'1').count();
    let mut bytes: Vec<u8> = Vec::new(); // little-endian accumulator
    for c in s.bytes().skip(zeros) {
        let val = BASE58_ALPHABET
            .iter()
            .position(|&a| a == c)
            .ok_or(Base58Error::BadCharacter(c as char))? as u32;
        let mut carry = val;
        for b in bytes.iter_mut() {
            carry += (*b as u32) * 58;
            *b = (carry & 0xff) as u8;
            carry >>= 8;
        }
        while carry > 0 {
            bytes.push((carry & 0xff) as u8);
            carry >>= 8;
        }
    }
    let mut out = alloc::vec![0u8; zeros];
    out.extend(bytes.iter().rev());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn encode_decode_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(58);
        for _ in 0..10_000 {
            let payload: [u8; 20] = rng.gen();
            let s = base58check_encode(0x00, &payload);
            let (v, p) = base58check_decode(&s).unwrap();
            assert_eq!(v, 0x00);
            assert_eq!(p, payload);
        }
    }

    #[test]
    fn version_zero_leads_with_one() {
        let s = base58check_encode(0x00, &[0x42; 20]);
        assert!(s.starts_with('1'));
        assert!(s.bytes().all(|c| BASE58_ALPHABET.contains(&c)));
    }

    #[test]
    fn corrupting_any_character_fails_checksum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
        for _ in 0..200 {
            let payload: [u8; 20] = rng.gen();
            let s = base58check_encode(0x00, &payload);
            let pos = rng.gen_range(0..s.len());
            let orig = s.as_bytes()[pos];
            let replacement = loop {
                let c = BASE58_ALPHABET[rng.gen_range(0..58)];
                if c != orig {
                    break c;
                }
            };
            let mut corrupted = s.into_bytes();
            corrupted[pos] = replacement;
            let corrupted = String::from_utf8(corrupted).unwrap();
            match base58check_decode(&corrupted) {
                Err(Base58Error::BadChecksum) => {}
                Err(Base58Error::TooShort) => {}
                other => panic!("corruption not caught: {other:?}"),
            }
        }
    }

    // A real leading-'1' mainnet-shaped address: decodes to version 0 plus a
    // 20-byte payload with a valid checksum, and re-encodes to itself.
    #[test]
    fn sample_address_round_trips() {
        let s = "1J7mdg5rbQyUHENYdx39WVWK7fsLpEoXZy";
        let (version, payload) = base58check_decode(s).unwrap();
        assert_eq!(version, 0x00);
        assert_eq!(payload.len(), 20);
        assert_eq!(base58check_encode(version, &payload), s);
    }

    #[test]
    fn rejects_ambiguous_characters() {
        assert_eq!(
            base58_decode("0OIl"),
            Err(Base58Error::BadCharacter('0'))
        );
    }

    #[test]
    fn leading_zero_bytes_round_trip() {
        let payload = [0u8, 0, 0, 1, 2, 3];
        let s = base58check_encode(0x00, &payload);
        let (_, p) = base58check_decode(&s).unwrap();
        assert_eq!(p, payload);
    }
}
