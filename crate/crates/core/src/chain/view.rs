use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use super::difficulty::{retarget, target_with_base, Difficulty, DifficultyParams};
use super::{block_id, genesis_block, Block, MAX_BLOCK_BYTES};
use crate::crypto::{Address, CurveParams, HashDigest};
use crate::utxo::{apply_tx, block_subsidy, tx_fee, validate_tx, TxError, UtxoSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockError {
    BadPrevHash { expected: HashDigest, got: HashDigest },
    BadMerkleRoot,
    BadPow,
    BadDifficulty { expected: u32, got: u32 },
    BadTimestamp { tip: u32, got: u32 },
    /// Missing, duplicated, or overpaying coinbase.
    BadCoinbase,
    BadTx { index: usize, cause: TxError },
    TooLarge { bytes: usize },
    /// First block of a foreign chain does not match the hardcoded genesis.
    BadGenesis,
    EmptyChain,
}

impl fmt::Display for BlockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockError::BadPrevHash { expected, got } => {
                write!(f, "prev hash {got} does not match tip id {expected}")
            }
            BlockError::BadMerkleRoot => write!(f, "merkle root does not match transactions"),
            BlockError::BadPow => write!(f, "block id not below target"),
            BlockError::BadDifficulty { expected, got } => {
                write!(f, "difficulty {got:#x} != scheduled {expected:#x}")
            }
            BlockError::BadTimestamp { tip, got } => {
                write!(f, "timestamp {got} behind tip {tip}")
            }
            BlockError::BadCoinbase => write!(f, "coinbase missing, duplicated, or overpaying"),
            BlockError::BadTx { index, cause } => write!(f, "transaction {index}: {cause}"),
            BlockError::TooLarge { bytes } => write!(f, "block of {bytes} bytes exceeds 4 MiB"),
            BlockError::BadGenesis => write!(f, "first block is not the hardcoded genesis"),
            BlockError::EmptyChain => write!(f, "no blocks"),
        }
    }
}

/// A validated chain from genesis: blocks, the derived unspent set, and the
/// difficulty schedule. Every block in a `ChainView` passed validation when
/// appended, which realizes the "previous block is valid" condition
/// inductively; [`ChainView::from_blocks`] re-runs the whole history for
/// auditing foreign chains.
#[derive(Clone, Debug)]
pub struct ChainView {
    curve: CurveParams,
    params: DifficultyParams,
    blocks: Vec<Block>,
    utxo: UtxoSet,
    scheduled: Difficulty,
}

impl ChainView {
    pub fn new(curve: CurveParams, params: DifficultyParams) -> ChainView {
        let genesis = genesis_block(&params);
        let mut utxo = UtxoSet::new();
        let txid = genesis.transactions[0].txid(&curve);
        for (i, out) in genesis.transactions[0].outputs.iter().enumerate() {
            utxo.insert(crate::utxo::OutPoint::new(txid, i as u32), *out);
        }
        ChainView {
            curve,
            scheduled: params.initial,
            params,
            blocks: alloc::vec![genesis],
            utxo,
        }
    }

    pub fn curve(&self) -> &CurveParams {
        &self.curve
    }

    pub fn params(&self) -> &DifficultyParams {
        &self.params
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("never empty")
    }

    /// Height of the tip; genesis is height 0.
    pub fn height(&self) -> u64 {
        (self.blocks.len() - 1) as u64
    }

    pub fn utxo(&self) -> &UtxoSet {
        &self.utxo
    }

    /// Difficulty required of the next appended block.
    pub fn scheduled_difficulty(&self) -> Difficulty {
        self.scheduled
    }

    /// PoW target required of the next appended block.
    pub fn next_target(&self) -> BigUint {
        target_with_base(&self.params.base_target, &self.scheduled)
    }

    /// Assemble an unmined block template on the tip: coinbase first (paying
    /// subsidy plus the fees of `txs`), then the given transactions, all
    /// validated against the current unspent set.
    pub fn build_template(
        &self,
        miner: Address,
        txs: &[crate::utxo::UtxoTransaction],
        timestamp: u32,
    ) -> Result<Block, BlockError> {
        let mut state = self.utxo.clone();
        let mut fees = 0u64;
        for (index, tx) in txs.iter().enumerate() {
            validate_tx(tx, &state, &self.curve).map_err(|cause| BlockError::BadTx {
                index: index + 1,
                cause,
            })?;
            fees += tx_fee(tx, &state).map_err(|cause| BlockError::BadTx {
                index: index + 1,
                cause,
            })?;
            state = apply_tx(tx, &state, &self.curve).expect("validated");
        }
        let height = self.height() + 1;
        let coinbase = crate::utxo::build_coinbase(miner, height, fees, 0);
        let mut transactions = alloc::vec![coinbase];
        transactions.extend_from_slice(txs);
        let mut block = Block {
            header: super::BlockHeader {
                version: 1,
                prev_hash: self.tip().id(),
                merkle_root: HashDigest::ZERO,
                timestamp,
                difficulty: self.scheduled.to_compact(),
                nonce: 0,
            },
            transactions,
        };
        block.header.merkle_root = block.compute_merkle_root(&self.curve).expect("non-empty");
        Ok(block)
    }

    /// Validate a candidate block against the tip. Returns the post-state
    /// unspent set on success; the chain itself is unchanged.
    pub fn validate_block(&self, block: &Block) -> Result<UtxoSet, BlockError> {
        let tip = self.tip();
        let expected_prev = block_id(&tip.header);
        if block.header.prev_hash != expected_prev {
            return Err(BlockError::BadPrevHash {
                expected: expected_prev,
                got: block.header.prev_hash,
            });
        }
        if block.header.timestamp < tip.header.timestamp {
            return Err(BlockError::BadTimestamp {
                tip: tip.header.timestamp,
                got: block.header.timestamp,
            });
        }
        let scheduled_bits = self.scheduled.to_compact();
        if block.header.difficulty != scheduled_bits {
            return Err(BlockError::BadDifficulty {
                expected: scheduled_bits,
                got: block.header.difficulty,
            });
        }
        let target = self.next_target();
        let id = BigUint::from_bytes_be(block.id().as_bytes());
        if id >= target {
            return Err(BlockError::BadPow);
        }
        let bytes = block.serialized_len(&self.curve);
        if bytes > MAX_BLOCK_BYTES {
            return Err(BlockError::TooLarge { bytes });
        }
        let computed_root = block
            .compute_merkle_root(&self.curve)
            .ok_or(BlockError::BadMerkleRoot)?;
        if computed_root != block.header.merkle_root {
            return Err(BlockError::BadMerkleRoot);
        }
        // Exactly one coinbase, at index 0.
        if block.transactions.is_empty() || !block.transactions[0].is_coinbase() {
            return Err(BlockError::BadCoinbase);
        }
        if block.transactions[1..].iter().any(|tx| tx.is_coinbase()) {
            return Err(BlockError::BadCoinbase);
        }
        // Replay the body against the running unspent set.
        let mut state = self.utxo.clone();
        let mut fees = 0u64;
        for (index, tx) in block.transactions.iter().enumerate().skip(1) {
            validate_tx(tx, &state, &self.curve)
                .map_err(|cause| BlockError::BadTx { index, cause })?;
            fees += tx_fee(tx, &state).map_err(|cause| BlockError::BadTx { index, cause })?;
            state = apply_tx(tx, &state, &self.curve).expect("validated");
        }
        // Coinbase may claim at most subsidy + fees (recomputed, not trusted).
        let height = self.height() + 1;
        if block.transactions[0].total_output() > block_subsidy(height) + fees {
            return Err(BlockError::BadCoinbase);
        }
        state = apply_tx(&block.transactions[0], &state, &self.curve)
            .map_err(|cause| BlockError::BadTx { index: 0, cause })?;
        Ok(state)
    }

    /// Validate and append; height grows by exactly one and prior blocks are
    /// untouched.
    pub fn append_block(&mut self, block: Block) -> Result<(), BlockError> {
        let state = self.validate_block(&block)?;
        self.utxo = state;
        self.blocks.push(block);
        // Crossing into a new epoch reschedules difficulty from the elapsed
        // span of the finished epoch (first to last block timestamps).
        let next_height = self.height() + 1;
        let epoch = self.params.epoch_length;
        if epoch > 0 && next_height % epoch == 0 {
            let first = &self.blocks[(next_height - epoch) as usize];
            let last = self.tip();
            let elapsed = last
                .header
                .timestamp
                .saturating_sub(first.header.timestamp)
                .max(1) as u64;
            self.scheduled =
                retarget(&self.params, &self.scheduled, elapsed).unwrap_or(self.scheduled);
        }
        Ok(())
    }

    /// Rebuild and fully revalidate a chain from raw blocks; the audit path
    /// for foreign copies. Reports the height of the first violation.
    pub fn from_blocks(
        curve: CurveParams,
        params: DifficultyParams,
        blocks: &[Block],
    ) -> Result<ChainView, (u64, BlockError)> {
        let mut iter = blocks.iter();
        let first = iter.next().ok_or((0, BlockError::EmptyChain))?;
        let expected_genesis = genesis_block(&params);
        if *first != expected_genesis {
            return Err((0, BlockError::BadGenesis));
        }
        let mut chain = ChainView::new(curve, params);
        for (i, block) in iter.enumerate() {
            chain
                .append_block(block.clone())
                .map_err(|e| ((i + 1) as u64, e))?;
        }
        Ok(chain)
    }
}

/// Longest chain wins; ties keep the first seen. Candidates are assumed
/// individually valid (a `ChainView` cannot hold invalid blocks).
pub fn select_chain<'a>(candidates: &'a [ChainView]) -> Option<&'a ChainView> {
    let mut best: Option<&ChainView> = None;
    for candidate in candidates {
        match best {
            None => best = Some(candidate),
            Some(current) if candidate.height() > current.height() => best = Some(candidate),
            _ => {}
        }
    }
    best
}

/// Audit-then-select over raw block lists: invalid copies are discarded
/// before length comparison, so a longer invalid chain never wins.
pub fn select_from_block_lists(
    curve: &CurveParams,
    params: &DifficultyParams,
    lists: &[Vec<Block>],
) -> Option<ChainView> {
    let mut best: Option<ChainView> = None;
    for list in lists {
        let Ok(view) = ChainView::from_blocks(curve.clone(), params.clone(), list) else {
            continue;
        };
        match &best {
            None => best = Some(view),
            Some(current) if view.height() > current.height() => best = Some(view),
            _ => {}
        }
    }
    best
}

/// Chain snapshot file image: magic, format version, profile, then
/// length-prefixed block records.
///
/// ```text
/// magic "CHBENCH1" (8) || curve_name_len(u8) || curve_name ||
/// initial_difficulty_compact(u32) || epoch_length(u64) ||
/// target_block_interval(u64) || base_target_len(u16) || base_target_be ||
/// block_count(u32) || [len(u32) || block]*
/// ```
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"CHBENCH1";

pub fn encode_snapshot(chain: &ChainView) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(SNAPSHOT_MAGIC);
    let name = chain.curve.name.as_bytes();
    out.push(name.len() as u8);
    out.extend_from_slice(name);
    out.extend_from_slice(&chain.params.initial.to_compact().to_le_bytes());
    out.extend_from_slice(&chain.params.epoch_length.to_le_bytes());
    out.extend_from_slice(&chain.params.target_block_interval.to_le_bytes());
    let base = chain.params.base_target.to_bytes_be();
    out.extend_from_slice(&(base.len() as u16).to_le_bytes());
    out.extend_from_slice(&base);
    out.extend_from_slice(&(chain.blocks.len() as u32).to_le_bytes());
    for block in &chain.blocks {
        let bytes = block.serialize(&chain.curve);
        out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&bytes);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnapshotError {
    BadMagic,
    Truncated,
    UnknownCurve,
    BadDifficulty,
    /// Full revalidation failed at the given height.
    Invalid { height: u64, error: BlockError },
}

impl fmt::Display for SnapshotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotError::BadMagic => write!(f, "not a chain snapshot (bad magic)"),
            SnapshotError::Truncated => write!(f, "snapshot truncated or malformed"),
            SnapshotError::UnknownCurve => write!(f, "unknown curve profile"),
            SnapshotError::BadDifficulty => write!(f, "invalid difficulty field"),
            SnapshotError::Invalid { height, error } => {
                write!(f, "revalidation failed at height {height}: {error}")
            }
        }
    }
}

/// Decode and fully revalidate a snapshot.
pub fn decode_snapshot(bytes: &[u8]) -> Result<ChainView, SnapshotError> {
    let mut at = 0usize;
    let magic = bytes.get(..8).ok_or(SnapshotError::Truncated)?;
    if magic != SNAPSHOT_MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    at += 8;
    let name_len = *bytes.get(at).ok_or(SnapshotError::Truncated)? as usize;
    at += 1;
    let name_bytes = bytes.get(at..at + name_len).ok_or(SnapshotError::Truncated)?;
    at += name_len;
    let name = core::str::from_utf8(name_bytes).map_err(|_| SnapshotError::UnknownCurve)?;
    let curve = CurveParams::by_name(name).ok_or(SnapshotError::UnknownCurve)?;
    let initial_bits = read_u32(bytes, &mut at).ok_or(SnapshotError::Truncated)?;
    let initial =
        Difficulty::from_compact(initial_bits).map_err(|_| SnapshotError::BadDifficulty)?;
    let epoch_length = read_u64(bytes, &mut at).ok_or(SnapshotError::Truncated)?;
    let target_block_interval = read_u64(bytes, &mut at).ok_or(SnapshotError::Truncated)?;
    let base_len = read_u16(bytes, &mut at).ok_or(SnapshotError::Truncated)? as usize;
    let base_bytes = bytes.get(at..at + base_len).ok_or(SnapshotError::Truncated)?;
    at += base_len;
    let params = DifficultyParams {
        initial,
        epoch_length,
        target_block_interval,
        base_target: BigUint::from_bytes_be(base_bytes),
    };
    let count = read_u32(bytes, &mut at).ok_or(SnapshotError::Truncated)? as usize;
    let mut blocks = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let len = read_u32(bytes, &mut at).ok_or(SnapshotError::Truncated)? as usize;
        let body = bytes.get(at..at + len).ok_or(SnapshotError::Truncated)?;
        at += len;
        blocks.push(Block::deserialize(body, &curve).ok_or(SnapshotError::Truncated)?);
    }
    if at != bytes.len() {
        return Err(SnapshotError::Truncated);
    }
    ChainView::from_blocks(curve, params, &blocks)
        .map_err(|(height, error)| SnapshotError::Invalid { height, error })
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
