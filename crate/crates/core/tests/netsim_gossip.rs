//! Network simulation scenarios: determinism, consistency with and without
//! delay, message conservation, transaction gossip, and the selfish-mining
//! revenue effect.

use chainbench_core::netsim::{run, SimConfig, SimError, Strategy, Topology};

#[test]
fn identical_seeds_identical_runs() {
    let config = SimConfig::all_honest(20, 0.05, 2, 200, 99).with_selfish_fraction(0.3);
    let a = run(config.clone()).unwrap();
    let b = run(config).unwrap();
    assert_eq!(a.final_chains, b.final_chains);
    assert_eq!(a.metrics.revenue, b.metrics.revenue);
    assert_eq!(a.metrics.chain_quality, b.metrics.chain_quality);
    assert_eq!(a.metrics.messages_sent, b.metrics.messages_sent);
}

#[test]
fn different_seed_changes_outcome() {
    let mut config = SimConfig::all_honest(20, 0.05, 2, 200, 100);
    let a = run(config.clone()).unwrap();
    config.seed = 101;
    let b = run(config).unwrap();
    assert_ne!(a.final_chains, b.final_chains);
}

// All honest, zero delay: every node ends every round with the same chain,
// so the final chains are identical and quality is 1.
#[test]
fn all_honest_zero_delay_full_agreement() {
    let config = SimConfig::all_honest(30, 0.02, 0, 500, 7);
    let result = run(config).unwrap();
    let first = &result.final_chains[0];
    for chain in &result.final_chains {
        assert_eq!(chain, first);
    }
    assert_eq!(result.metrics.chain_quality, 1.0);
    assert_eq!(result.metrics.consistency_depth, 0);
    // With no delay there are still same-round ties (two nodes mining in one
    // round), but adoption settles within the round; efficiency stays high.
    assert!(result.metrics.efficiency_observed > 0.9);
}

#[test]
fn zero_mining_probability_never_grows() {
    let config = SimConfig::all_honest(10, 0.0, 1, 100, 3);
    let result = run(config).unwrap();
    for chain in &result.final_chains {
        assert_eq!(chain.len(), 1); // genesis only
    }
    assert_eq!(result.metrics.total_mined, 0);
}

// Positive delay forces forks, but honest nodes still share a common prefix
// within the max fork depth, and quality stays 1 without adversaries.
#[test]
fn delay_forks_but_prefix_agrees() {
    let config = SimConfig::all_honest(30, 0.03, 2, 500, 11);
    let result = run(config).unwrap();
    assert!(result.metrics.fork_count > 0, "expected forks at delta=2");
    assert_eq!(result.metrics.chain_quality, 1.0);
    // Every honest chain extends the common prefix by at most the
    // consistency depth.
    let prefix_height = result.metrics.consensus_height;
    for chain in &result.final_chains {
        let extra = (chain.len() as u64 - 1) - prefix_height.min(chain.len() as u64 - 1);
        assert!(extra <= result.metrics.consistency_depth);
    }
    assert!(result.metrics.consistency_depth <= 12, "forks run deep");
}

// Every broadcast is delivered exactly once per neighbor after exactly
// delta rounds: at the horizon, sent minus still-queued equals delivered.
// With delta = 0 nothing can remain queued.
#[test]
fn message_conservation_zero_delay() {
    let config = SimConfig::all_honest(16, 0.05, 0, 300, 13);
    let result = run(config).unwrap();
    assert_eq!(result.metrics.messages_sent, result.metrics.messages_delivered);
}

#[test]
fn transactions_flood_and_get_mined() {
    let mut config = SimConfig::all_honest(12, 0.05, 1, 400, 17);
    config.tx_rate = 0.5;
    let result = run(config).unwrap();
    // Consensus blocks collectively carry transactions.
    assert!(result.metrics.consensus_height > 0);
    assert!(result.metrics.messages_sent > result.metrics.messages_delivered);
}

#[test]
fn silent_nodes_do_not_relay() {
    // A line topology 0 - 1 - 2 with a silent middle node: each end can
    // learn the middle's blocks and its own, but never the other end's.
    let neighbors = vec![vec![1], vec![0, 2], vec![1]];
    let mut config = SimConfig::all_honest(3, 0.15, 0, 200, 21);
    config.topology = Topology::Explicit { neighbors };
    config.strategies[1] = Strategy::Silent;
    let result = run(config).unwrap();
    for &b in result.final_chains[0].iter().skip(1) {
        assert_ne!(result.blocks[b].miner, 2, "block crossed the silent node");
    }
    for &b in result.final_chains[2].iter().skip(1) {
        assert_ne!(result.blocks[b].miner, 0, "block crossed the silent node");
    }
}

#[test]
fn invalid_blocks_never_adopted() {
    let mut config = SimConfig::all_honest(20, 0.05, 1, 300, 23);
    // A quarter of the nodes spam invalid blocks alongside honest mining.
    for i in 0..5 {
        config.strategies[i] = Strategy::Silent;
    }
    config.invalid_block_rate = 0.5;
    // run() asserts per round that no honest tip sits on an invalid block.
    let result = run(config).unwrap();
    assert!(result.metrics.consensus_height > 0);
}

#[test]
fn disconnected_topology_rejected() {
    let mut config = SimConfig::all_honest(4, 0.1, 1, 10, 1);
    config.topology = Topology::Explicit {
        neighbors: vec![vec![1], vec![0], vec![3], vec![2]],
    };
    assert!(matches!(run(config), Err(SimError::InvalidTopology)));
}

#[test]
fn odd_degree_rejected() {
    let mut config = SimConfig::all_honest(10, 0.1, 1, 10, 1);
    config.topology = Topology::KRegular { k: 3 };
    assert!(matches!(run(config), Err(SimError::InvalidTopology)));
}

// Selfish coalition with zero hashrate behaves like an all-honest run.
#[test]
fn zero_hashrate_selfish_changes_nothing() {
    let honest = SimConfig::all_honest(20, 0.03, 1, 300, 29);
    let baseline = run(honest.clone()).unwrap();
    // Strategy tags flipped on nodes, but p = 0 for them via... hashrate in
    // this model is uniform, so emulate zero hashrate with zero members.
    let same = run(honest.with_selfish_fraction(0.0)).unwrap();
    assert_eq!(baseline.final_chains, same.final_chains);
    assert_eq!(
        baseline.metrics.chain_quality,
        same.metrics.chain_quality
    );
}

// The directional selfish-mining effect: at 40% hashrate and delta = 1, the
// coalition's consensus-chain share strictly exceeds its hashrate share.
// The denser k = 8 topology keeps the honest-only subgraph connected (the
// coalition never relays honest blocks, so it must not be a vertex cut).
#[test]
fn selfish_revenue_exceeds_hashrate_share() {
    let mut excess = 0usize;
    let mut total_share = 0.0;
    let seeds = [1u64, 2, 3, 4, 5];
    for seed in seeds {
        let mut config =
            SimConfig::all_honest(30, 0.02, 1, 600, seed).with_selfish_fraction(0.4);
        config.topology = Topology::KRegular { k: 8 };
        let result = run(config).unwrap();
        // Guard against degenerate honest partitions: consensus must have
        // kept growing through the run.
        assert!(
            result.metrics.consensus_height > 100,
            "seed {seed}: consensus collapsed to {}",
            result.metrics.consensus_height
        );
        let share = result.metrics.selfish_revenue_share;
        let hashrate = result.metrics.selfish_hashrate_share;
        assert!((hashrate - 0.4).abs() < 1e-9);
        total_share += share;
        if share > hashrate {
            excess += 1;
        }
    }
    let mean_share = total_share / seeds.len() as f64;
    assert!(
        excess == seeds.len(),
        "excess revenue in only {excess}/{} runs (mean share {mean_share:.3})",
        seeds.len()
    );
    assert!(mean_share > 0.4, "mean selfish share {mean_share:.3}");
}

// Withhold-and-release displaces honest work: observed honest fraction falls
// to the neighborhood of the (1-2q)/(1-q) worst-case bound.
#[test]
fn chain_quality_near_unfairness_bound() {
    use chainbench_core::analysis::unfairness_bound;
    let q = 0.4;
    let mut qualities = Vec::new();
    for seed in 11u64..=18 {
        let mut config =
            SimConfig::all_honest(30, 0.02, 0, 500, seed).with_selfish_fraction(q);
        config.topology = Topology::KRegular { k: 8 };
        let result = run(config).unwrap();
        assert!(
            result.metrics.consensus_height > 100,
            "seed {seed}: consensus collapsed to {}",
            result.metrics.consensus_height
        );
        qualities.push(result.metrics.chain_quality);
    }
    let mean = qualities.iter().sum::<f64>() / qualities.len() as f64;
    let bound = unfairness_bound(q).unwrap();
    // Directional: far below the fair share 1-q, and within statistical
    // range of the displacement bound.
    assert!(mean < 1.0 - q, "quality {mean:.3} not below fair share");
    assert!(
        mean <= bound + 0.1,
        "quality {mean:.3} too far above bound {bound:.3}"
    );
}

// Selfish members observe honest blocks but never forward them: with the
// coalition as the only bridge between two honest islands, one island's
// honest blocks can never appear on the other island's chains.
#[test]
fn selfish_members_do_not_forward_honest_blocks() {
    let neighbors = vec![
        vec![1],    // 0 honest (near island)
        vec![0, 2], // 1 honest
        vec![1, 3], // 2 selfish bridge
        vec![2],    // 3 honest (far island)
    ];
    let mut config = SimConfig::all_honest(4, 0.2, 0, 80, 5);
    config.topology = Topology::Explicit { neighbors };
    config.strategies[2] = Strategy::Selfish;
    let result = run(config).unwrap();
    // Far island chains may contain far-island or pool blocks, never blocks
    // mined by nodes 0 or 1.
    for &b in result.final_chains[3].iter().skip(1) {
        let miner = result.blocks[b].miner;
        assert!(
            miner == 2 || miner == 3,
            "honest block {b} (miner {miner}) crossed the selfish bridge"
        );
    }
}
