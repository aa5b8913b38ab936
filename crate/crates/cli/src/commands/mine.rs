use std::path::PathBuf;

use clap::Args;
use num_bigint::BigUint;
use num_traits::One;
use serde::Deserialize;

use chainbench_core::chain::{
    encode_snapshot, mine_block, ChainView, Difficulty, DifficultyParams, MineLimits, MineOutcome,
};
use chainbench_core::crypto::keygen_from_seed;

use crate::{domain, CliError, OutputSink};

#[derive(Args, Debug)]
pub struct MineArgs {
    /// Mining config (JSON); omit for the default desk profile.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Blocks to mine (overrides the config).
    #[arg(long)]
    pub blocks: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MineConfig {
    #[serde(default = "default_curve")]
    curve: String,
    /// Exponent of the difficulty-1 target: target = 2^base_target_bits.
    #[serde(default = "default_base_bits")]
    base_target_bits: u32,
    #[serde(default = "default_epoch")]
    epoch_length: u64,
    #[serde(default = "default_interval")]
    target_block_interval: u64,
    #[serde(default = "default_one")]
    initial_difficulty: u64,
    #[serde(default = "default_blocks")]
    blocks: u32,
    /// Simulated seconds between block timestamps.
    #[serde(default = "default_interval")]
    timestamp_step: u64,
}

fn default_curve() -> String {
    "toy9739".to_string()
}
fn default_base_bits() -> u32 {
    250
}
fn default_epoch() -> u64 {
    8
}
fn default_interval() -> u64 {
    600
}
fn default_one() -> u64 {
    1
}
fn default_blocks() -> u32 {
    4
}

impl Default for MineConfig {
    fn default() -> MineConfig {
        MineConfig {
            curve: default_curve(),
            base_target_bits: default_base_bits(),
            epoch_length: default_epoch(),
            target_block_interval: default_interval(),
            initial_difficulty: default_one(),
            blocks: default_blocks(),
            timestamp_step: default_interval(),
        }
    }
}

pub fn run(args: &MineArgs, seed: u64, sink: &mut OutputSink) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let bytes = sink.read_config(path)?;
            serde_json::from_slice::<MineConfig>(&bytes)
                .map_err(|e| CliError::Domain(format!("bad config: {e}")))?
        }
        None => MineConfig::default(),
    };
    if let Some(blocks) = args.blocks {
        config.blocks = blocks;
    }
    let curve = super::curve_by_name(&config.curve)?;
    if config.base_target_bits >= 256 {
        return Err(CliError::Domain("base_target_bits must be below 256".into()));
    }
    let params = DifficultyParams {
        initial: Difficulty::from_int(config.initial_difficulty).map_err(domain)?,
        epoch_length: config.epoch_length,
        target_block_interval: config.target_block_interval,
        base_target: BigUint::one() << config.base_target_bits,
    };
    let miner = keygen_from_seed(seed, &curve).address(&curve);
    let mut chain = ChainView::new(curve.clone(), params);
    let mut stats = Vec::new();
    for height in 1..=config.blocks as u64 {
        let timestamp = chain.tip().header.timestamp + config.timestamp_step as u32;
        let template = chain.build_template(miner, &[], timestamp).map_err(domain)?;
        let target = chain.next_target();
        match mine_block(&template, &target, &curve, MineLimits::default()) {
            MineOutcome::Mined(mined) => {
                let id = mined.block.id();
                let difficulty = chain.scheduled_difficulty();
                chain.append_block(mined.block).map_err(domain)?;
                stats.push(serde_json::json!({
                    "height": height,
                    "id": id.to_hex(),
                    "tries": mined.tries,
                    "difficulty": format!("{difficulty}"),
                }));
                sink.push_text(format!(
                    "height {height}: id {} after {} tries (difficulty {difficulty})",
                    id.to_hex(),
                    mined.tries
                ));
            }
            MineOutcome::Exhausted { tries } => {
                return Err(CliError::Domain(format!(
                    "nonce space exhausted after {tries} tries at height {height}"
                )));
            }
        }
    }
    let snapshot = encode_snapshot(&chain);
    let written = sink.write_artifact("chain.snap", &snapshot)?;
    if let Some(path) = &written {
        sink.push_text(format!("snapshot: {}", path.display()));
    }
    let result = serde_json::json!({
        "curve": curve.name,
        "blocks_mined": config.blocks,
        "tip": chain.tip().id().to_hex(),
        "height": chain.height(),
        "total_value": chain.utxo().total_value(),
        "per_block": stats,
        "snapshot": written.map(|p| p.display().to_string()),
    });
    sink.set_result(result);
    Ok(())
}
