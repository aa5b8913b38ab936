use clap::{Args, Subcommand};

use chainbench_core::analysis::{
    confirmations_needed, efficiency, finality_prob_beta, finality_prob_sum, max_mining_prob,
    rounds_per_good_block, security_holds, unfairness_bound, SecurityParams,
};

use crate::{domain, CliError, OutputSink};

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// Double-spend success probability after k confirmations.
    Finality(FinalityArgs),
    /// Mining-probability bound from the security margin.
    Difficulty(DifficultyArgs),
    /// Selfish-displacement chain-quality bound.
    Unfairness(UnfairnessArgs),
    /// Block-creation efficiency under propagation delay.
    Efficiency(EfficiencyArgs),
}

#[derive(Args, Debug)]
pub struct FinalityArgs {
    /// Attacker hashrate fraction.
    #[arg(long)]
    pub q: f64,
    /// Confirmations to evaluate.
    #[arg(long)]
    pub k: Option<u64>,
    /// Emit the full k x q table instead of a single value.
    #[arg(long, default_value_t = false)]
    pub grid: bool,
    /// Largest k in the table.
    #[arg(long, default_value_t = 50)]
    pub kmax: u64,
    /// Find the smallest k with P(k) below this risk tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DifficultyArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0.51)]
    pub honest_threshold: f64,
}

#[derive(Args, Debug)]
pub struct UnfairnessArgs {
    #[arg(long)]
    pub q: f64,
}

#[derive(Args, Debug)]
pub struct EfficiencyArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.51)]
    pub honest_threshold: f64,
}

pub fn run(cmd: &AnalyzeCommand, sink: &mut OutputSink) -> Result<(), CliError> {
    match cmd {
        AnalyzeCommand::Finality(args) => finality(args, sink),
        AnalyzeCommand::Difficulty(args) => difficulty(args, sink),
        AnalyzeCommand::Unfairness(args) => unfairness(args, sink),
        AnalyzeCommand::Efficiency(args) => efficiency_cmd(args, sink),
    }
}

fn finality(args: &FinalityArgs, sink: &mut OutputSink) -> Result<(), CliError> {
    if args.grid {
        return finality_grid(args, sink);
    }
    if let Some(tolerance) = args.tolerance {
        let k = confirmations_needed(args.q, tolerance).map_err(domain)?;
        let p = finality_prob_sum(k, args.q).map_err(domain)?;
        sink.push_text(format!(
            "q {}: {k} confirmations reach P({k}) = {p:.7e} <= {tolerance}",
            args.q
        ));
        sink.set_result(serde_json::json!({
            "q": args.q,
            "tolerance": tolerance,
            "confirmations": k,
            "p_at_k": p,
        }));
        return Ok(());
    }
    let k = args
        .k
        .ok_or_else(|| CliError::Domain("pass --k, --tolerance, or --grid".into()))?;
    let p_sum = finality_prob_sum(k, args.q).map_err(domain)?;
    let p_beta = finality_prob_beta(k, args.q).map_err(domain)?;
    sink.push_text(format!("P({k}) = {p_sum:.7} at q = {}", args.q));
    sink.push_text(format!(
        "  sum form {p_sum:.12e}; incomplete-beta form {p_beta:.12e}"
    ));
    sink.set_result(serde_json::json!({
        "q": args.q,
        "k": k,
        "p_sum": p_sum,
        "p_beta": p_beta,
        "forms_agree_within": (p_sum - p_beta).abs(),
    }));
    Ok(())
}

fn finality_grid(args: &FinalityArgs, sink: &mut OutputSink) -> Result<(), CliError> {
    let qs: Vec<f64> = (1..=9).map(|i| 0.05 * i as f64).collect();
    let mut csv = String::from("k");
    for q in &qs {
        csv.push_str(&format!(",q={q:.2}"));
    }
    csv.push('\n');
    let mut rows = Vec::new();
    for k in 1..=args.kmax {
        let mut row = vec![serde_json::json!(k)];
        csv.push_str(&k.to_string());
        for q in &qs {
            let p = finality_prob_sum(k, *q).map_err(domain)?;
            csv.push_str(&format!(",{p:.9e}"));
            row.push(serde_json::json!(p));
        }
        csv.push('\n');
        rows.push(serde_json::Value::Array(row));
    }
    sink.set_csv(csv.clone());
    sink.write_artifact("finality_grid.csv", csv.as_bytes())?;
    let summary = serde_json::json!({
        "q_values": qs,
        "kmax": args.kmax,
        "columns": "k, then one probability column per q",
        "rows": rows,
    });
    sink.write_artifact(
        "finality_summary.json",
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    sink.push_text(format!(
        "finality table for k in [1, {}] over {} q values",
        args.kmax,
        qs.len()
    ));
    sink.set_result(summary);
    Ok(())
}

fn difficulty(args: &DifficultyArgs, sink: &mut OutputSink) -> Result<(), CliError> {
    let p_max = max_mining_prob(args.q, args.epsilon, args.delta, args.n, args.honest_threshold)
        .map_err(domain)?;
    // Echo the boundary behavior so the table is self-attesting.
    let check = |p: f64| -> Result<Option<bool>, CliError> {
        if !(0.0..=1.0).contains(&p) || p == 0.0 {
            return Ok(None);
        }
        let params = SecurityParams {
            n: args.n,
            p,
            q: args.q,
            epsilon: args.epsilon,
            delta: args.delta,
            honest_threshold: args.honest_threshold,
            m_bits: 256,
        };
        Ok(Some(security_holds(&params).map_err(domain)?))
    };
    let below = check(p_max - 1e-9)?;
    let above = check(p_max + 1e-9)?;
    sink.push_text(format!(
        "p_max = {p_max:.9} for q {}, epsilon {}, delta {}, n {}",
        args.q, args.epsilon, args.delta, args.n
    ));
    if let (Some(b), Some(a)) = (below, above) {
        sink.push_text(format!(
            "  security holds just below: {b}; just above: {a}"
        ));
    }
    sink.set_result(serde_json::json!({
        "q": args.q,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "n": args.n,
        "honest_threshold": args.honest_threshold,
        "p_max": p_max,
        "holds_below": below,
        "holds_above": above,
    }));
    Ok(())
}

fn unfairness(args: &UnfairnessArgs, sink: &mut OutputSink) -> Result<(), CliError> {
    let bound = unfairness_bound(args.q).map_err(domain)?;
    sink.push_text(format!(
        "honest chain-quality bound at q {}: {bound:.6} (honest hashrate {:.2})",
        args.q,
        1.0 - args.q
    ));
    sink.set_result(serde_json::json!({
        "q": args.q,
        "bound": bound,
        "honest_hashrate": 1.0 - args.q,
    }));
    Ok(())
}

fn efficiency_cmd(args: &EfficiencyArgs, sink: &mut OutputSink) -> Result<(), CliError> {
    let params = SecurityParams {
        n: args.n,
        p: args.p,
        q: 0.0,
        epsilon: 0.0,
        delta: args.delta,
        honest_threshold: args.honest_threshold,
        m_bits: 256,
    };
    let e = efficiency(&params).map_err(domain)?;
    let lambda = rounds_per_good_block(&params).map_err(domain)?;
    sink.push_text(format!(
        "E = {e:.6} (rounds per good block {lambda:.4}, delta {})",
        args.delta
    ));
    sink.set_result(serde_json::json!({
        "n": args.n,
        "p": args.p,
        "delta": args.delta,
        "honest_threshold": args.honest_threshold,
        "rounds_per_good_block": lambda,
        "efficiency": e,
    }));
    Ok(())
}
