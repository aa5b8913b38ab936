use num_bigint::BigUint;

use super::{block_id, Block};
use crate::crypto::CurveParams;

/// Caps on the nonce scan. `max_total_tries` bounds the number of header
/// hashes computed; `max_coinbase_nonce` bounds the outer loop.
#[derive(Clone, Copy, Debug, Default)]
pub struct MineLimits {
    pub max_total_tries: Option<u64>,
    pub max_coinbase_nonce: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinedBlock {
    pub block: Block,
    /// Number of candidate ids hashed, including the winning one.
    pub tries: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MineOutcome {
    Mined(MinedBlock),
    /// Scan budget exhausted without a satisfying id.
    Exhausted { tries: u64 },
}

/// Scan (coinbase_nonce, header_nonce) from (0, 0) until the block id drops
/// below the target. The inner loop walks the 2^32 header-nonce domain; each
/// outer step bumps the coinbase nonce and recomputes the Merkle root, which
/// is what makes the search space effectively unbounded.
pub fn mine_block(
    template: &Block,
    target: &BigUint,
    params: &CurveParams,
    limits: MineLimits,
) -> MineOutcome {
    assert!(
        template
            .transactions
            .first()
            .is_some_and(|tx| tx.is_coinbase()),
        "mining template must carry its coinbase at index 0"
    );
    let mut block = template.clone();
    let mut tries: u64 = 0;
    let mut coinbase_nonce: u32 = 0;
    loop {
        block.transactions[0].coinbase_nonce = coinbase_nonce;
        block.header.merkle_root = block
            .compute_merkle_root(params)
            .expect("template has transactions");
        let mut header_nonce: u32 = 0;
        loop {
            if let Some(cap) = limits.max_total_tries {
                if tries >= cap {
                    return MineOutcome::Exhausted { tries };
                }
            }
            block.header.nonce = header_nonce;
            let id = block_id(&block.header);
            tries += 1;
            if &BigUint::from_bytes_be(id.as_bytes()) < target {
                return MineOutcome::Mined(MinedBlock { block, tries });
            }
            if header_nonce == u32::MAX {
                break;
            }
            header_nonce += 1;
        }
        if coinbase_nonce == u32::MAX
            || limits
                .max_coinbase_nonce
                .is_some_and(|cap| coinbase_nonce >= cap)
        {
            return MineOutcome::Exhausted { tries };
        }
        coinbase_nonce += 1;
    }
}
