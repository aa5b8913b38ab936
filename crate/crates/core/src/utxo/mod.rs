//! The UTXO state model: transactions, validation, fees, balances, coinbase,
//! consolidation, and joint payments.
//!
//! Amounts are integers in 10^-8-coin units so that no arithmetic ever
//! rounds. The canonical byte layout (little-endian fixed-width integers,
//! length-prefixed lists) is defined once in [`tx`] and used both for txids
//! and for signing digests.

mod build;
mod tx;
mod validate;

pub use build::{
    build_coinbase, build_consolidation, build_joint_payment, build_transfer, BuildError,
};
pub use tx::{OutPoint, TxInput, TxOutput, UtxoTransaction, COIN};
pub use validate::{apply_tx, balance_of, fee_rate, tx_fee, validate_tx, TxError, UtxoSet};

/// Block subsidy at a given height: 50 coins initially, halved every
/// 210,000 blocks. Era 3 pays 6.25 coins.
pub fn block_subsidy(height: u64) -> u64 {
    let era = height / HALVING_INTERVAL;
    if era >= 64 {
        return 0;
    }
    INITIAL_SUBSIDY >> era
}

/// Blocks per halving era.
pub const HALVING_INTERVAL: u64 = 210_000;
/// Initial era subsidy: 50 coins.
pub const INITIAL_SUBSIDY: u64 = 50 * COIN;
/// Hard cap implied by the halving schedule: 21 million coins.
pub const MAX_SUPPLY: u64 = 21_000_000 * COIN;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsidy_schedule() {
        assert_eq!(block_subsidy(0), 50 * COIN);
        assert_eq!(block_subsidy(HALVING_INTERVAL - 1), 50 * COIN);
        assert_eq!(block_subsidy(HALVING_INTERVAL), 25 * COIN);
        // Era 3: the 6.25-coin era.
        assert_eq!(block_subsidy(3 * HALVING_INTERVAL), 625_000_000);
        assert_eq!(block_subsidy(3 * HALVING_INTERVAL), 25 * COIN / 4);
    }

    // Geometric-series oracle: total issuance over all eras stays within the
    // 21-million-coin cap (strictly below, because integer halving floors).
    #[test]
    fn total_issuance_bounded_by_cap() {
        let mut total: u128 = 0;
        let mut era = 0u64;
        loop {
            let s = block_subsidy(era * HALVING_INTERVAL);
            if s == 0 {
                break;
            }
            total += (s as u128) * (HALVING_INTERVAL as u128);
            era += 1;
        }
        assert!(total <= MAX_SUPPLY as u128);
        // Integer halving floors away a sliver of dust; the cap is reached
        // to within a few coins.
        assert!(total > (MAX_SUPPLY - 3 * COIN) as u128);
    }
}
