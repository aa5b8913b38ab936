use alloc::vec::Vec;
use core::fmt;

use super::tx::{OutPoint, TxInput, TxOutput, UtxoTransaction};
use super::validate::UtxoSet;
use crate::crypto::{sign, Address, CurveParams, KeyPair, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildError {
    /// Sender balance below amount + fee.
    InsufficientFunds { available: u64, needed: u64 },
    /// Consolidation needs at least two owned outputs.
    NothingToConsolidate,
    /// A joint-payment input without a key that owns it.
    MissingCosigner { input_index: usize },
    /// No recipients given.
    NoRecipients,
    /// Signing failed (toy-group pathology).
    Signing,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::InsufficientFunds { available, needed } => {
                write!(f, "insufficient funds: have {available}, need {needed}")
            }
            BuildError::NothingToConsolidate => write!(f, "fewer than two outputs to consolidate"),
            BuildError::MissingCosigner { input_index } => {
                write!(f, "input {input_index} has no co-signing key")
            }
            BuildError::NoRecipients => write!(f, "no recipients"),
            BuildError::Signing => write!(f, "signing failed"),
        }
    }
}

fn placeholder_sig() -> Signature {
    Signature {
        r: 0u8.into(),
        s: 0u8.into(),
    }
}

/// Sign every input with its owner's key (keys[i] signs inputs[i]).
fn sign_inputs(
    tx: &mut UtxoTransaction,
    keys: &[&KeyPair],
    params: &CurveParams,
) -> Result<(), BuildError> {
    let digest = tx.signing_digest(params);
    for (input, key) in tx.inputs.iter_mut().zip(keys) {
        input.signature = sign(key, digest.as_bytes(), params).map_err(|_| BuildError::Signing)?;
    }
    Ok(())
}

/// Build a transfer from the key's address to one or more recipients.
/// Coins are selected largest-first until amount + fee is covered; any
/// change above zero returns to the sender.
pub fn build_transfer(
    key: &KeyPair,
    recipients: &[(Address, u64)],
    state: &UtxoSet,
    fee: u64,
    params: &CurveParams,
) -> Result<UtxoTransaction, BuildError> {
    if recipients.is_empty() {
        return Err(BuildError::NoRecipients);
    }
    let sender = key.address(params);
    let needed: u64 = recipients.iter().map(|(_, amt)| amt).sum::<u64>() + fee;
    let owned = state.owned_by(&sender);
    let available: u64 = owned.iter().map(|(_, o)| o.amount).sum();
    if available < needed {
        return Err(BuildError::InsufficientFunds { available, needed });
    }
    let mut selected: Vec<(OutPoint, TxOutput)> = Vec::new();
    let mut gathered = 0u64;
    for (op, out) in owned {
        if gathered >= needed {
            break;
        }
        gathered += out.amount;
        selected.push((op, out));
    }
    let mut outputs: Vec<TxOutput> = recipients
        .iter()
        .map(|(recipient, amount)| TxOutput {
            amount: *amount,
            recipient: *recipient,
        })
        .collect();
    let change = gathered - needed;
    if change > 0 {
        outputs.push(TxOutput {
            amount: change,
            recipient: sender,
        });
    }
    let mut tx = UtxoTransaction {
        inputs: selected
            .iter()
            .map(|(op, _)| TxInput {
                outpoint: *op,
                pubkey: key.public.clone(),
                signature: placeholder_sig(),
            })
            .collect(),
        outputs,
        coinbase_nonce: 0,
    };
    let keys: Vec<&KeyPair> = core::iter::repeat(key).take(tx.inputs.len()).collect();
    sign_inputs(&mut tx, &keys, params)?;
    Ok(tx)
}

/// Consume every output the key owns and send the total, minus the fee,
/// back to the owner as a single output.
pub fn build_consolidation(
    key: &KeyPair,
    state: &UtxoSet,
    fee: u64,
    params: &CurveParams,
) -> Result<UtxoTransaction, BuildError> {
    let sender = key.address(params);
    let owned = state.owned_by(&sender);
    if owned.len() < 2 {
        return Err(BuildError::NothingToConsolidate);
    }
    let total: u64 = owned.iter().map(|(_, o)| o.amount).sum();
    if total <= fee {
        return Err(BuildError::InsufficientFunds {
            available: total,
            needed: fee + 1,
        });
    }
    let mut tx = UtxoTransaction {
        inputs: owned
            .iter()
            .map(|(op, _)| TxInput {
                outpoint: *op,
                pubkey: key.public.clone(),
                signature: placeholder_sig(),
            })
            .collect(),
        outputs: alloc::vec![TxOutput {
            amount: total - fee,
            recipient: sender,
        }],
        coinbase_nonce: 0,
    };
    let keys: Vec<&KeyPair> = core::iter::repeat(key).take(tx.inputs.len()).collect();
    sign_inputs(&mut tx, &keys, params)?;
    Ok(tx)
}

/// Multiple payers co-fund one payment: contributions[i] must be owned by
/// keys[i], and each input is signed by its own contributor. Input value
/// beyond the payment amount is left as fee.
pub fn build_joint_payment(
    keys: &[&KeyPair],
    contributions: &[OutPoint],
    recipient: Address,
    amount: u64,
    state: &UtxoSet,
    params: &CurveParams,
) -> Result<UtxoTransaction, BuildError> {
    if keys.len() != contributions.len() {
        return Err(BuildError::MissingCosigner {
            input_index: keys.len().min(contributions.len()),
        });
    }
    let mut total_in = 0u64;
    for (i, (key, op)) in keys.iter().zip(contributions).enumerate() {
        let funded = state
            .get(op)
            .ok_or(BuildError::MissingCosigner { input_index: i })?;
        if funded.recipient != key.address(params) {
            return Err(BuildError::MissingCosigner { input_index: i });
        }
        total_in += funded.amount;
    }
    if total_in < amount {
        return Err(BuildError::InsufficientFunds {
            available: total_in,
            needed: amount,
        });
    }
    let mut tx = UtxoTransaction {
        inputs: keys
            .iter()
            .zip(contributions)
            .map(|(key, op)| TxInput {
                outpoint: *op,
                pubkey: key.public.clone(),
                signature: placeholder_sig(),
            })
            .collect(),
        outputs: alloc::vec![TxOutput { amount, recipient }],
        coinbase_nonce: 0,
    };
    sign_inputs(&mut tx, keys, params)?;
    Ok(tx)
}

/// The inputless minting transaction: one output worth subsidy + fees to the
/// miner, carrying the miner-chosen nonce that the PoW scan varies.
pub fn build_coinbase(
    miner: Address,
    height: u64,
    fees: u64,
    coinbase_nonce: u32,
) -> UtxoTransaction {
    UtxoTransaction {
        inputs: Vec::new(),
        outputs: alloc::vec![TxOutput {
            amount: super::block_subsidy(height) + fees,
            recipient: miner,
        }],
        coinbase_nonce,
    }
}
