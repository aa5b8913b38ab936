use std::path::PathBuf;

use clap::{Args, Subcommand};

use chainbench_core::crypto::CurveParams;
use chainbench_core::plasma::{run_paper_example, run_scenario, PlasmaScenario, Transcript};

use crate::{domain, CliError, OutputSink};

#[derive(Subcommand, Debug)]
pub enum PlasmaCommand {
    /// The canned seven-step deposit/transfer/exit/challenge walkthrough.
    Demo,
    /// Run a scripted scenario from a config file.
    Run(PlasmaRunArgs),
}

#[derive(Args, Debug)]
pub struct PlasmaRunArgs {
    /// Scenario config (JSON): parties with layer-1 balances, then actions.
    #[arg(long)]
    pub config: PathBuf,
}

pub fn run(cmd: &PlasmaCommand, sink: &mut OutputSink) -> Result<(), CliError> {
    let transcript = match cmd {
        PlasmaCommand::Demo => run_paper_example(CurveParams::toy9739()),
        PlasmaCommand::Run(args) => {
            let bytes = sink.read_config(&args.config)?;
            let scenario: PlasmaScenario = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Domain(format!("bad config: {e}")))?;
            run_scenario(CurveParams::toy9739(), &scenario).map_err(domain)?
        }
    };
    render(&transcript, sink)?;
    Ok(())
}

fn render(transcript: &Transcript, sink: &mut OutputSink) -> Result<(), CliError> {
    for step in &transcript.steps {
        sink.push_text(format!("step {}: {} — {}", step.step, step.action, step.outcome));
        for line in &step.chain_state {
            sink.push_text(format!("    {line}"));
        }
        let balances: Vec<String> = step
            .plasma_balances
            .iter()
            .map(|(name, amount)| format!("{name} {amount}"))
            .collect();
        sink.push_text(format!("    plasma balances: {}", balances.join(", ")));
    }
    let json = serde_json::to_value(transcript)?;
    let pretty = serde_json::to_string_pretty(&json)?;
    sink.write_artifact("transcript.json", pretty.as_bytes())?;
    sink.set_result(json);
    Ok(())
}
