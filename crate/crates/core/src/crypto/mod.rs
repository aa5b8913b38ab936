//! Cryptographic substrate: hashing, addresses, curve arithmetic, signatures,
//! commitments, and Merkle trees.
//!
//! Two curve profiles are provided. The `toy` profiles (`y^2 = x^3 + 7` over
//! small primes) exist so that group laws can be checked exhaustively; the
//! `large` profile is secp256k1. Security claims apply only to `large`.

mod base58;
mod commit;
mod curve;
mod hash;
mod keys;
mod merkle;

pub use base58::{base58check_decode, base58check_encode, Base58Error, BASE58_ALPHABET};
pub use commit::{commit, verify_commit, Commitment, CommitmentError, DEFAULT_NONCE_BITS};
pub use curve::{
    point_add, point_neg, scalar_mul, scalar_mul_u64, CurveError, CurveParams, CurvePoint,
};
pub use hash::{hash160, sha256, sha256d, HashDigest};
pub use keys::{
    derive_address, keygen, keygen_from_seed, sign, verify, Address, KeyPair, Signature,
    SignatureError, ADDRESS_VERSION,
};
pub use merkle::{merkle_prove, merkle_root, merkle_verify, MerkleError, ProofNode, Side};
