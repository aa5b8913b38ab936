use alloc::vec::Vec;
use core::fmt;

use super::hash::{sha256, HashDigest};

/// Default nonce length in bits. Configurable down to 8 bits for the
/// brute-force demonstration of why small nonces are breakable.
pub const DEFAULT_NONCE_BITS: usize = 256;

/// A hash commitment `c = H(r || x)` to message `x` under nonce `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commitment {
    pub c: HashDigest,
    /// Nonce bit length the commitment was made with.
    pub nonce_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommitmentError {
    /// Nonce length must be a whole number of bytes and match `nonce_bits`.
    WrongNonceLength { expected_bits: usize, got_bytes: usize },
}

impl fmt::Display for CommitmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommitmentError::WrongNonceLength {
                expected_bits,
                got_bytes,
            } => write!(
                f,
                "nonce must be {expected_bits} bits, got {got_bytes} bytes"
            ),
        }
    }
}

/// Commit to `x` with nonce `r`: `c = H(r || x)`.
pub fn commit(r: &[u8], x: &[u8], nonce_bits: usize) -> Result<Commitment, CommitmentError> {
    if nonce_bits % 8 != 0 || r.len() * 8 != nonce_bits {
        return Err(CommitmentError::WrongNonceLength {
            expected_bits: nonce_bits,
            got_bytes: r.len(),
        });
    }
    let mut data = Vec::with_capacity(r.len() + x.len());
    data.extend_from_slice(r);
    data.extend_from_slice(x);
    Ok(Commitment {
        c: sha256(&data),
        nonce_bits,
    })
}

/// Open a commitment: true iff `H(r || x)` reproduces `c`.
pub fn verify_commit(c: &Commitment, r: &[u8], x: &[u8]) -> bool {
    match commit(r, x, c.nonce_bits) {
        Ok(recomputed) => recomputed.c == c.c,
        Err(_) => false,
    }
}
