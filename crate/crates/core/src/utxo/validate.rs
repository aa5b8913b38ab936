use alloc::collections::{BTreeMap, BTreeSet};
use core::fmt;

use super::tx::{OutPoint, TxOutput, UtxoTransaction};
use crate::crypto::{verify, Address, CurveParams};

/// The ledger state: every currently unspent output, keyed by outpoint.
///
/// A value type; applying a transaction produces a new set. Snapshots can be
/// shared freely across threads.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UtxoSet {
    entries: BTreeMap<OutPoint, TxOutput>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TxError {
    /// Input index referencing an outpoint absent from the state (spent or
    /// never created).
    MissingInput(usize),
    /// The same outpoint used twice within one transaction.
    DuplicateInput(usize),
    /// Signature invalid, or pubkey does not hash to the funded address.
    BadSignature(usize),
    /// Output total exceeds input total.
    InsufficientFunds { total_in: u64, total_out: u64 },
    /// Every transaction must pay someone.
    NoOutputs,
    /// Coinbase transactions are validated in block context, not standalone.
    UnexpectedCoinbase,
}

impl fmt::Display for TxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TxError::MissingInput(i) => write!(f, "input {i}: outpoint not in utxo set"),
            TxError::DuplicateInput(i) => write!(f, "input {i}: duplicate outpoint"),
            TxError::BadSignature(i) => write!(f, "input {i}: bad signature or wrong key"),
            TxError::InsufficientFunds {
                total_in,
                total_out,
            } => write!(f, "outputs {total_out} exceed inputs {total_in}"),
            TxError::NoOutputs => write!(f, "transaction has no outputs"),
            TxError::UnexpectedCoinbase => write!(f, "coinbase not valid outside a block"),
        }
    }
}

impl UtxoSet {
    pub fn new() -> UtxoSet {
        UtxoSet::default()
    }

    pub fn get(&self, outpoint: &OutPoint) -> Option<&TxOutput> {
        self.entries.get(outpoint)
    }

    pub fn contains(&self, outpoint: &OutPoint) -> bool {
        self.entries.contains_key(outpoint)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutPoint, &TxOutput)> {
        self.entries.iter()
    }

    /// Outpoints funding a given address, largest amount first (the coin
    /// selection order), ties broken by outpoint order.
    pub fn owned_by(&self, addr: &Address) -> alloc::vec::Vec<(OutPoint, TxOutput)> {
        let mut owned: alloc::vec::Vec<(OutPoint, TxOutput)> = self
            .entries
            .iter()
            .filter(|(_, out)| out.recipient == *addr)
            .map(|(op, out)| (*op, *out))
            .collect();
        owned.sort_by(|a, b| b.1.amount.cmp(&a.1.amount).then(a.0.cmp(&b.0)));
        owned
    }

    /// Total value in the set.
    pub fn total_value(&self) -> u64 {
        self.entries.values().map(|o| o.amount).sum()
    }

    pub fn insert(&mut self, outpoint: OutPoint, output: TxOutput) {
        self.entries.insert(outpoint, output);
    }
}

/// Check a non-coinbase transaction against the current state: inputs exist,
/// no duplicates, owner keys sign, and value balances. Leaves the state
/// untouched.
pub fn validate_tx(
    tx: &UtxoTransaction,
    state: &UtxoSet,
    params: &CurveParams,
) -> Result<(), TxError> {
    if tx.is_coinbase() {
        return Err(TxError::UnexpectedCoinbase);
    }
    if tx.outputs.is_empty() {
        return Err(TxError::NoOutputs);
    }
    // Existence and duplicates first, then ownership and signatures.
    let mut seen: BTreeSet<OutPoint> = BTreeSet::new();
    let mut total_in: u64 = 0;
    for (i, input) in tx.inputs.iter().enumerate() {
        let funded = state
            .get(&input.outpoint)
            .ok_or(TxError::MissingInput(i))?;
        if !seen.insert(input.outpoint) {
            return Err(TxError::DuplicateInput(i));
        }
        total_in += funded.amount;
    }
    let digest = tx.signing_digest(params);
    for (i, input) in tx.inputs.iter().enumerate() {
        let funded = state.get(&input.outpoint).expect("checked above");
        // The key must hash to the funded address and the signature must
        // verify over the signing digest.
        let addr = Address::from_pubkey(&input.pubkey, params)
            .map_err(|_| TxError::BadSignature(i))?;
        if addr != funded.recipient {
            return Err(TxError::BadSignature(i));
        }
        if !verify(&input.pubkey, digest.as_bytes(), &input.signature, params) {
            return Err(TxError::BadSignature(i));
        }
    }
    let total_out = tx.total_output();
    if total_in < total_out {
        return Err(TxError::InsufficientFunds {
            total_in,
            total_out,
        });
    }
    Ok(())
}

/// Validate then apply: spent inputs leave the set, outputs enter at
/// (txid, index). Coinbase transactions insert outputs and remove nothing
/// (their value rule is enforced by block validation).
pub fn apply_tx(
    tx: &UtxoTransaction,
    state: &UtxoSet,
    params: &CurveParams,
) -> Result<UtxoSet, TxError> {
    if !tx.is_coinbase() {
        validate_tx(tx, state, params)?;
    } else if tx.outputs.is_empty() {
        return Err(TxError::NoOutputs);
    }
    let mut next = state.clone();
    for input in &tx.inputs {
        next.entries.remove(&input.outpoint);
    }
    let txid = tx.txid(params);
    for (index, output) in tx.outputs.iter().enumerate() {
        next.entries.insert(OutPoint::new(txid, index as u32), *output);
    }
    Ok(next)
}

/// Input total minus output total; the miner's cut.
pub fn tx_fee(tx: &UtxoTransaction, state: &UtxoSet) -> Result<u64, TxError> {
    if tx.is_coinbase() {
        return Ok(0);
    }
    let mut total_in: u64 = 0;
    for (i, input) in tx.inputs.iter().enumerate() {
        let funded = state
            .get(&input.outpoint)
            .ok_or(TxError::MissingInput(i))?;
        total_in += funded.amount;
    }
    let total_out = tx.total_output();
    if total_in < total_out {
        return Err(TxError::InsufficientFunds {
            total_in,
            total_out,
        });
    }
    Ok(total_in - total_out)
}

/// Fee rate as the exact pair (fee, size); callers compare by
/// cross-multiplication to stay in integers.
pub fn fee_rate(
    tx: &UtxoTransaction,
    state: &UtxoSet,
    params: &CurveParams,
) -> Result<(u64, usize), TxError> {
    Ok((tx_fee(tx, state)?, tx.size(params)))
}

/// Sum of unspent outputs destined for the address; unknown addresses hold 0.
pub fn balance_of(addr: &Address, state: &UtxoSet) -> u64 {
    state
        .entries
        .values()
        .filter(|o| o.recipient == *addr)
        .map(|o| o.amount)
        .sum()
}
