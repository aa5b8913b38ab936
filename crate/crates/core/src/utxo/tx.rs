use alloc::vec::Vec;

use crate::crypto::{sha256d, Address, CurveParams, CurvePoint, HashDigest, Signature};

/// 10^-8-coin units per coin.
pub const COIN: u64 = 100_000_000;

/// Reference to a transaction output: (txid, output index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutPoint {
    pub txid: HashDigest,
    pub output_index: u32,
}

impl OutPoint {
    pub fn new(txid: HashDigest, output_index: u32) -> OutPoint {
        OutPoint { txid, output_index }
    }
}

/// An amount destined for an address.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TxOutput {
    pub amount: u64,
    pub recipient: Address,
}

/// A funding reference plus the key material proving the right to spend it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxInput {
    pub outpoint: OutPoint,
    pub pubkey: CurvePoint,
    pub signature: Signature,
}

/// A multi-input multi-output value transfer. Coinbase transactions have no
/// inputs and carry the miner-chosen `coinbase_nonce`; regular transactions
/// keep the nonce at zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UtxoTransaction {
    pub inputs: Vec<TxInput>,
    pub outputs: Vec<TxOutput>,
    pub coinbase_nonce: u32,
}

impl UtxoTransaction {
    pub fn is_coinbase(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Canonical byte layout. All integers little-endian:
    ///
    /// ```text
    /// input_count:  u32
    /// inputs:       txid(32) || output_index(u32) || pubkey_len(u16) ||
    ///               pubkey || sig_len(u16) || sig_bytes
    /// output_count: u32
    /// outputs:      amount(u64) || address(20)
    /// coinbase_nonce: u32
    /// ```
    ///
    /// With `with_signatures = false` the pubkey and signature fields are
    /// emitted with zero length; that form is the signing digest input.
    pub fn serialize(&self, params: &CurveParams, with_signatures: bool) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.inputs.len() as u32).to_le_bytes());
        for input in &self.inputs {
            out.extend_from_slice(input.outpoint.txid.as_bytes());
            out.extend_from_slice(&input.outpoint.output_index.to_le_bytes());
            if with_signatures {
                let pk = params.serialize_point(&input.pubkey);
                out.extend_from_slice(&(pk.len() as u16).to_le_bytes());
                out.extend_from_slice(&pk);
                let sig = input.signature.to_bytes();
                out.extend_from_slice(&(sig.len() as u16).to_le_bytes());
                out.extend_from_slice(&sig);
            } else {
                out.extend_from_slice(&0u16.to_le_bytes());
                out.extend_from_slice(&0u16.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.outputs.len() as u32).to_le_bytes());
        for output in &self.outputs {
            out.extend_from_slice(&output.amount.to_le_bytes());
            out.extend_from_slice(output.recipient.as_bytes());
        }
        out.extend_from_slice(&self.coinbase_nonce.to_le_bytes());
        out
    }

    /// Transaction id: sha256d of the canonical serialization.
    pub fn txid(&self, params: &CurveParams) -> HashDigest {
        sha256d(&self.serialize(params, true))
    }

    /// The digest every input signs: the transaction with all signature
    /// fields zeroed.
    pub fn signing_digest(&self, params: &CurveParams) -> HashDigest {
        sha256d(&self.serialize(params, false))
    }

    pub fn total_output(&self) -> u64 {
        self.outputs.iter().map(|o| o.amount).sum()
    }

    /// Serialized size in bytes; the denominator of the fee-per-byte rate.
    pub fn size(&self, params: &CurveParams) -> usize {
        self.serialize(params, true).len()
    }

    pub fn decode(bytes: &[u8], params: &CurveParams) -> Option<UtxoTransaction> {
        let mut at = 0usize;
        let input_count = read_u32(bytes, &mut at)? as usize;
        let mut inputs = Vec::with_capacity(input_count.min(1024));
        for _ in 0..input_count {
            let txid = HashDigest::from_slice(bytes.get(at..at + 32)?)?;
            at += 32;
            let output_index = read_u32(bytes, &mut at)?;
            let pk_len = read_u16(bytes, &mut at)? as usize;
            let pubkey = if pk_len == 0 {
                CurvePoint::Infinity
            } else {
                params.deserialize_point(bytes.get(at..at + pk_len)?).ok()?
            };
            at += pk_len;
            let sig_len = read_u16(bytes, &mut at)? as usize;
            let sig_bytes = bytes.get(at..at + sig_len)?;
            let (signature, used) = if sig_len == 0 {
                (
                    Signature {
                        r: 0u8.into(),
                        s: 0u8.into(),
                    },
                    0,
                )
            } else {
                Signature::from_bytes(sig_bytes)?
            };
            if used != sig_len {
                return None;
            }
            at += sig_len;
            inputs.push(TxInput {
                outpoint: OutPoint::new(txid, output_index),
                pubkey,
                signature,
            });
        }
        let output_count = read_u32(bytes, &mut at)? as usize;
        let mut outputs = Vec::with_capacity(output_count.min(1024));
        for _ in 0..output_count {
            let amount = read_u64(bytes, &mut at)?;
            let mut addr = [0u8; 20];
            addr.copy_from_slice(bytes.get(at..at + 20)?);
            at += 20;
            outputs.push(TxOutput {
                amount,
                recipient: Address(addr),
            });
        }
        let coinbase_nonce = read_u32(bytes, &mut at)?;
        if at != bytes.len() {
            return None;
        }
        Some(UtxoTransaction {
            inputs,
            outputs,
            coinbase_nonce,
        })
    }
}

fn read_u16(bytes: &[u8], at: &mut usize) -> Option<u16> {
    let v = u16::from_le_bytes(bytes.get(*at..*at + 2)?.try_into().ok()?);
    *at += 2;
    Some(v)
}

fn read_u32(bytes: &[u8], at: &mut usize) -> Option<u32> {
    let v = u32::from_le_bytes(bytes.get(*at..*at + 4)?.try_into().ok()?);
    *at += 4;
    Some(v)
}

fn read_u64(bytes: &[u8], at: &mut usize) -> Option<u64> {
    let v = u64::from_le_bytes(bytes.get(*at..*at + 8)?.try_into().ok()?);
    *at += 8;
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{keygen_from_seed, sign};

    fn sample_tx(params: &CurveParams) -> UtxoTransaction {
        let key = keygen_from_seed(1, params);
        let to = keygen_from_seed(2, params).address(params);
        let mut tx = UtxoTransaction {
            inputs: alloc::vec![TxInput {
                outpoint: OutPoint::new(sha256d(b"prev"), 0),
                pubkey: key.public.clone(),
                signature: Signature { r: 0u8.into(), s: 0u8.into() },
            }],
            outputs: alloc::vec![TxOutput { amount: 17, recipient: to }],
            coinbase_nonce: 0,
        };
        let digest = tx.signing_digest(params);
        tx.inputs[0].signature = sign(&key, digest.as_bytes(), params).unwrap();
        tx
    }

    #[test]
    fn serialization_round_trip() {
        let params = CurveParams::toy9739();
        let tx = sample_tx(&params);
        let bytes = tx.serialize(&params, true);
        let back = UtxoTransaction::decode(&bytes, &params).unwrap();
        assert_eq!(back, tx);
        assert_eq!(back.txid(&params), tx.txid(&params));
    }

    #[test]
    fn signing_digest_ignores_signatures() {
        let params = CurveParams::toy9739();
        let mut tx = sample_tx(&params);
        let before = tx.signing_digest(&params);
        tx.inputs[0].signature = Signature {
            r: 123u32.into(),
            s: 456u32.into(),
        };
        assert_eq!(tx.signing_digest(&params), before);
        assert_ne!(tx.txid(&params), before);
    }

    // The serialized size must equal the sum of the documented field widths.
    #[test]
    fn size_matches_field_arithmetic() {
        let params = CurveParams::toy9739();
        let tx = sample_tx(&params);
        let pk_len = params.serialize_point(&tx.inputs[0].pubkey).len();
        let sig_len = tx.inputs[0].signature.to_bytes().len();
        let expect = 4 + (32 + 4 + 2 + pk_len + 2 + sig_len) + 4 + (8 + 20) + 4;
        assert_eq!(tx.size(&params), expect);
    }
}
