use std::path::PathBuf;

use clap::{Args, Subcommand};

use chainbench_core::chain::decode_snapshot;

use crate::{domain, CliError, OutputSink};

#[derive(Subcommand, Debug)]
pub enum ChainCommand {
    /// Decode a snapshot and fully revalidate it from genesis.
    Validate(SnapshotArgs),
    /// Revalidate and report every block in detail.
    Audit(SnapshotArgs),
}

#[derive(Args, Debug)]
pub struct SnapshotArgs {
    /// Chain snapshot file.
    #[arg(long)]
    pub file: PathBuf,
}

pub fn run(cmd: &ChainCommand, sink: &mut OutputSink) -> Result<(), CliError> {
    let (args, detailed) = match cmd {
        ChainCommand::Validate(a) => (a, false),
        ChainCommand::Audit(a) => (a, true),
    };
    let bytes = std::fs::read(&args.file)
        .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", args.file.display())))?;
    let chain = decode_snapshot(&bytes).map_err(domain)?;
    let mut blocks = Vec::new();
    if detailed {
        for (height, block) in chain.blocks().iter().enumerate() {
            let entry = serde_json::json!({
                "height": height,
                "id": block.id().to_hex(),
                "prev": block.header.prev_hash.to_hex(),
                "timestamp": block.header.timestamp,
                "difficulty_bits": format!("{:#010x}", block.header.difficulty),
                "transactions": block.tx_count(),
                "coinbase_value": block.transactions.first().map(|tx| tx.total_output()),
            });
            sink.push_text(format!(
                "height {height}: id {} txs {} coinbase {}",
                block.id().to_hex(),
                block.tx_count(),
                block.transactions.first().map(|tx| tx.total_output()).unwrap_or(0),
            ));
            blocks.push(entry);
        }
    }
    let result = serde_json::json!({
        "valid": true,
        "curve": chain.curve().name,
        "height": chain.height(),
        "tip": chain.tip().id().to_hex(),
        "unspent_outputs": chain.utxo().len(),
        "total_value": chain.utxo().total_value(),
        "scheduled_difficulty": format!("{}", chain.scheduled_difficulty()),
        "blocks": blocks,
    });
    sink.push_text(format!(
        "valid chain: height {}, tip {}, {} unspent outputs, total value {}",
        chain.height(),
        chain.tip().id().to_hex(),
        chain.utxo().len(),
        chain.utxo().total_value(),
    ));
    sink.write_artifact("audit.json", serde_json::to_string_pretty(&result)?.as_bytes())?;
    sink.set_result(result);
    Ok(())
}
