use std::path::PathBuf;

use clap::{Args, Subcommand};

use chainbench_core::netsim::{run_traced, SimConfig};

use crate::{domain, CliError, OutputSink};

#[derive(Subcommand, Debug)]
pub enum SimCommand {
    /// Execute a simulation scenario from a config file.
    Run(SimArgs),
}

#[derive(Args, Debug)]
pub struct SimArgs {
    /// Simulation config (JSON): node count, topology, p, delta,
    /// strategies, rounds.
    #[arg(long)]
    pub config: PathBuf,
    /// Record a per-round event trace to the output directory.
    #[arg(long, default_value_t = false)]
    pub trace: bool,
}

pub fn run(cmd: &SimCommand, seed: u64, sink: &mut OutputSink) -> Result<(), CliError> {
    let SimCommand::Run(args) = cmd;
    let bytes = sink.read_config(&args.config)?;
    let mut config: SimConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Domain(format!("bad config: {e}")))?;
    // The CLI seed overrides the config's unless left at the default.
    if seed != 0 {
        config.seed = seed;
    }
    let outcome = run_traced(config.clone(), args.trace).map_err(domain)?;
    let metrics = &outcome.metrics;

    sink.push_text(format!(
        "{} nodes, {} rounds, delta {} (seed {})",
        config.n, config.rounds, config.delta, config.seed
    ));
    sink.push_text(format!(
        "consensus height {} of {} mined; chain quality {:.4}",
        metrics.consensus_height, metrics.total_mined, metrics.chain_quality
    ));
    sink.push_text(format!(
        "efficiency {:.4}; forks {}; consistency depth {}",
        metrics.efficiency_observed, metrics.fork_count, metrics.consistency_depth
    ));
    if metrics.selfish_hashrate_share > 0.0 {
        sink.push_text(format!(
            "selfish hashrate {:.3} vs revenue share {:.3}",
            metrics.selfish_hashrate_share, metrics.selfish_revenue_share
        ));
    }

    // CSV rendering: one row per node with its consensus revenue.
    let mut csv = String::from("node,strategy,revenue\n");
    for (i, revenue) in metrics.revenue.iter().enumerate() {
        csv.push_str(&format!(
            "{i},{:?},{revenue}\n",
            config.strategies[i]
        ));
    }
    sink.set_csv(csv.clone());
    sink.write_artifact("revenue.csv", csv.as_bytes())?;

    if args.trace {
        let mut text = String::new();
        for event in &outcome.trace {
            text.push_str(&format!("round {}: {}\n", event.round, event.what));
        }
        sink.write_artifact("trace.log", text.as_bytes())?;
    }

    let result = serde_json::json!({
        "config": &config,
        "metrics": metrics,
    });
    sink.write_artifact("metrics.json", serde_json::to_string_pretty(&result)?.as_bytes())?;
    sink.set_result(result);
    Ok(())
}
