//! Round-based deterministic simulation of the gossip network: mining races,
//! transaction and block flooding, honest/selfish/silent strategies, and
//! chain-quality metrics.
//!
//! The model matches the analysis variables: per node, each round is one
//! Bernoulli(p) mining trial (the real nonce scan lives in the chain module
//! and is exercised separately), and messages sent in round r arrive at the
//! neighbors in round r + delta. With delta = 0 forwarding cascades inside
//! the round until the flood quiesces.
//!
//! Selfish miners form one coalition sharing a private chain. Withheld
//! blocks are released the instant any member hears a competing honest
//! block, and a release is delivered ahead of the honest block still in
//! flight — the chapter's premise that withheld blocks reach the nodes
//! faster than the honest competitor. Members never forward honest blocks.

mod race;

pub use race::{double_spend_rate, double_spend_trial};

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Per-node behavior tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Strategy {
    /// Follows the protocol: forward on first receipt, adopt longest chain.
    Honest,
    /// Coalition member: withholds blocks, releases on competition, never
    /// forwards honest blocks.
    Selfish,
    /// Mines and publishes its own blocks but never relays anyone else's.
    Silent,
}

/// Network topology: random union of shuffled ring cycles (connected by
/// construction, approximately k-regular), or explicit neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Topology {
    KRegular { k: usize },
    Explicit { neighbors: Vec<Vec<usize>> },
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub n: usize,
    pub topology: Topology,
    /// Per-node per-round block-creation probability.
    pub p: f64,
    /// Propagation delay in rounds.
    pub delta: u32,
    /// Strategy per node; length n.
    pub strategies: Vec<Strategy>,
    pub rounds: u32,
    pub seed: u64,
    /// Expected transactions injected into the network per round.
    #[cfg_attr(feature = "serde", serde(default))]
    pub tx_rate: f64,
    /// Transactions a miner pulls from its mempool per block.
    #[cfg_attr(feature = "serde", serde(default = "default_block_capacity"))]
    pub block_tx_capacity: usize,
    /// Probability that a silent node, upon mining, also spams an invalid
    /// block. Exercises the validation path; 0 by default.
    #[cfg_attr(feature = "serde", serde(default))]
    pub invalid_block_rate: f64,
}

fn default_block_capacity() -> usize {
    16
}

impl SimConfig {
    /// All-honest network with the default topology.
    pub fn all_honest(n: usize, p: f64, delta: u32, rounds: u32, seed: u64) -> SimConfig {
        SimConfig {
            n,
            topology: Topology::KRegular { k: 4 },
            p,
            delta,
            strategies: alloc::vec![Strategy::Honest; n],
            rounds,
            seed,
            tx_rate: 0.0,
            block_tx_capacity: default_block_capacity(),
            invalid_block_rate: 0.0,
        }
    }

    /// Marks the last floor(q * n) nodes as one selfish coalition; the
    /// honest fraction stays above 1 - q.
    pub fn with_selfish_fraction(mut self, q: f64) -> SimConfig {
        let selfish = ((self.n as f64) * q) as usize;
        for slot in self.strategies.iter_mut().rev().take(selfish) {
            *slot = Strategy::Selfish;
        }
        self
    }

    pub fn selfish_fraction(&self) -> f64 {
        let selfish = self
            .strategies
            .iter()
            .filter(|s| **s == Strategy::Selfish)
            .count();
        selfish as f64 / self.n as f64
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 || self.strategies.len() != self.n {
            return Err(SimError::BadConfig);
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(SimError::BadConfig);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimError {
    BadConfig,
    /// Disconnected or malformed neighbor lists.
    InvalidTopology,
}

impl core::fmt::Display for SimError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SimError::BadConfig => write!(f, "invalid simulation config"),
            SimError::InvalidTopology => write!(f, "topology must be connected and well-formed"),
        }
    }
}

/// Simulated block: arena-indexed, lightweight stand-in for a mined block.
#[derive(Clone, Debug)]
pub struct SimBlock {
    pub parent: usize,
    pub height: u64,
    pub miner: usize,
    pub round: u32,
    pub valid: bool,
    pub txs: Vec<u64>,
}

/// End-of-run measurements.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SimMetrics {
    /// Honest-authored fraction of the consensus (common-prefix) chain.
    pub chain_quality: f64,
    /// Consensus growth per honest-success round; 1.0 when no delay forks.
    pub efficiency_observed: f64,
    /// Blocks each node placed on the consensus chain.
    pub revenue: Vec<u64>,
    /// Mined blocks that did not make the consensus chain.
    pub fork_count: u64,
    /// Maximum distance from any honest tip back to the common prefix.
    pub consistency_depth: u64,
    pub consensus_height: u64,
    pub total_mined: u64,
    /// Selfish coalition's share of consensus blocks and of hashrate.
    pub selfish_revenue_share: f64,
    pub selfish_hashrate_share: f64,
    /// Rounds in which at least one honest node mined.
    pub honest_success_rounds: u64,
    /// Messages sent and delivered within the horizon (conservation check).
    pub messages_sent: u64,
    pub messages_delivered: u64,
}

/// Full result: metrics, each node's final chain as block ids from genesis,
/// and the block arena for auditing who mined what.
#[derive(Clone, Debug)]
pub struct SimRun {
    pub metrics: SimMetrics,
    pub final_chains: Vec<Vec<usize>>,
    pub blocks: Vec<SimBlock>,
    pub trace: Vec<TraceEvent>,
}

#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceEvent {
    pub round: u32,
    pub what: alloc::string::String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Msg {
    Block(usize),
    Tx(u64),
}

#[derive(Clone, Copy, Debug)]
struct Delivery {
    to: usize,
    from: usize,
    msg: Msg,
}

struct Node {
    strategy: Strategy,
    neighbors: Vec<usize>,
    tip: usize,
    seen_blocks: BTreeSet<usize>,
    /// Blocks whose full ancestry is known and valid.
    resolved: BTreeSet<usize>,
    /// Orphans waiting for their parent, keyed by parent id.
    pending: BTreeMap<usize, Vec<usize>>,
    seen_txs: BTreeSet<u64>,
    /// (fee, txid) ordered set; highest fee pulled first.
    mempool: BTreeSet<(u64, u64)>,
}

struct SelfishPool {
    members: Vec<usize>,
    private_tip: usize,
    /// Unreleased private blocks in chain order.
    withheld: VecDeque<usize>,
}

const GENESIS: usize = 0;

struct Sim {
    config: SimConfig,
    rng: ChaCha12Rng,
    blocks: Vec<SimBlock>,
    nodes: Vec<Node>,
    pool: Option<SelfishPool>,
    queue: BTreeMap<u32, VecDeque<Delivery>>,
    tx_fees: BTreeMap<u64, u64>,
    next_tx_id: u64,
    sent: u64,
    delivered: u64,
    honest_success_rounds: u64,
    trace_on: bool,
    trace: Vec<TraceEvent>,
}

/// Run the simulation to completion. Identical (config, seed) pairs produce
/// bit-identical results.
pub fn run(config: SimConfig) -> Result<SimRun, SimError> {
    run_traced(config, false)
}

pub fn run_traced(config: SimConfig, trace_on: bool) -> Result<SimRun, SimError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let neighbors = build_topology(&config, &mut rng)?;
    let genesis = SimBlock {
        parent: GENESIS,
        height: 0,
        miner: usize::MAX,
        round: 0,
        valid: true,
        txs: Vec::new(),
    };
    let nodes: Vec<Node> = (0..config.n)
        .map(|i| Node {
            strategy: config.strategies[i],
            neighbors: neighbors[i].clone(),
            tip: GENESIS,
            seen_blocks: BTreeSet::from([GENESIS]),
            resolved: BTreeSet::from([GENESIS]),
            pending: BTreeMap::new(),
            seen_txs: BTreeSet::new(),
            mempool: BTreeSet::new(),
        })
        .collect();
    let members: Vec<usize> = (0..config.n)
        .filter(|i| config.strategies[*i] == Strategy::Selfish)
        .collect();
    let pool = if members.is_empty() {
        None
    } else {
        Some(SelfishPool {
            members,
            private_tip: GENESIS,
            withheld: VecDeque::new(),
        })
    };
    let mut sim = Sim {
        config,
        rng,
        blocks: alloc::vec![genesis],
        nodes,
        pool,
        queue: BTreeMap::new(),
        tx_fees: BTreeMap::new(),
        next_tx_id: 0,
        sent: 0,
        delivered: 0,
        honest_success_rounds: 0,
        trace_on,
        trace: Vec::new(),
    };
    for round in 0..sim.config.rounds {
        sim.step(round);
        sim.assert_safety();
    }
    Ok(sim.finish())
}

fn build_topology(config: &SimConfig, rng: &mut ChaCha12Rng) -> Result<Vec<Vec<usize>>, SimError> {
    match &config.topology {
        Topology::Explicit { neighbors } => {
            if neighbors.len() != config.n {
                return Err(SimError::InvalidTopology);
            }
            // Symmetric closure, no self-loops, then a connectivity check.
            let mut sets: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); config.n];
            for (i, list) in neighbors.iter().enumerate() {
                for &j in list {
                    if j >= config.n || j == i {
                        return Err(SimError::InvalidTopology);
                    }
                    sets[i].insert(j);
                    sets[j].insert(i);
                }
            }
            let adjacency: Vec<Vec<usize>> =
                sets.into_iter().map(|s| s.into_iter().collect()).collect();
            if !connected(&adjacency) {
                return Err(SimError::InvalidTopology);
            }
            Ok(adjacency)
        }
        Topology::KRegular { k } => {
            if config.n == 1 {
                return Ok(alloc::vec![Vec::new()]);
            }
            if *k < 2 || k % 2 != 0 || *k >= config.n {
                return Err(SimError::InvalidTopology);
            }
            // Union of k/2 shuffled ring cycles: connected by construction.
            let mut sets: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); config.n];
            for _ in 0..k / 2 {
                let mut order: Vec<usize> = (0..config.n).collect();
                for i in (1..order.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    order.swap(i, j);
                }
                for w in 0..config.n {
                    let a = order[w];
                    let b = order[(w + 1) % config.n];
                    sets[a].insert(b);
                    sets[b].insert(a);
                }
            }
            Ok(sets.into_iter().map(|s| s.into_iter().collect()).collect())
        }
    }
}

fn connected(adjacency: &[Vec<usize>]) -> bool {
    if adjacency.is_empty() {
        return false;
    }
    let mut seen = BTreeSet::from([0usize]);
    let mut stack = alloc::vec![0usize];
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u] {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == adjacency.len()
}

impl Sim {
    fn trace(&mut self, round: u32, what: alloc::string::String) {
        if self.trace_on {
            self.trace.push(TraceEvent { round, what });
        }
    }

    fn step(&mut self, round: u32) {
        // Phase a: Bernoulli(p) mining trial per node, in id order.
        let mut honest_mined_this_round = false;
        for i in 0..self.config.n {
            let success = self.rng.gen_bool(self.config.p);
            if !success {
                continue;
            }
            match self.nodes[i].strategy {
                Strategy::Honest | Strategy::Silent => {
                    honest_mined_this_round |= self.nodes[i].strategy == Strategy::Honest;
                    let block = self.mint_block(i, self.nodes[i].tip, round, true);
                    self.adopt_own(i, block);
                    self.broadcast(i, Msg::Block(block), round);
                    self.trace(round, alloc::format!("node {i} mined block {block}"));
                    // A spamming silent node can also emit an invalid block.
                    if self.nodes[i].strategy == Strategy::Silent
                        && self.config.invalid_block_rate > 0.0
                        && self.rng.gen_bool(self.config.invalid_block_rate)
                    {
                        let junk = self.mint_block(i, self.nodes[i].tip, round, false);
                        self.broadcast(i, Msg::Block(junk), round);
                        self.trace(round, alloc::format!("node {i} spammed invalid {junk}"));
                    }
                }
                Strategy::Selfish => {
                    let pool = self.pool.as_mut().expect("selfish implies pool");
                    let parent = pool.private_tip;
                    let block_id = self.blocks.len();
                    // Coalition members learn pool blocks instantly.
                    pool.private_tip = block_id;
                    pool.withheld.push_back(block_id);
                    let members = pool.members.clone();
                    let block = self.mint_block(i, parent, round, true);
                    debug_assert_eq!(block, block_id);
                    for &m in &members {
                        self.nodes[m].seen_blocks.insert(block);
                        self.nodes[m].resolved.insert(block);
                        self.nodes[m].tip = block;
                    }
                    self.trace(round, alloc::format!("selfish {i} withheld block {block}"));
                }
            }
        }
        let _ = honest_mined_this_round;
        if honest_mined_this_round {
            self.honest_success_rounds += 1;
        }

        // Phase b: transaction injection at random nodes.
        if self.config.tx_rate > 0.0 {
            let count = poisson_knuth(&mut self.rng, self.config.tx_rate);
            for _ in 0..count {
                let origin = self.rng.gen_range(0..self.config.n);
                let fee = self.rng.gen_range(1..1000u64);
                let tx = self.next_tx_id;
                self.next_tx_id += 1;
                self.tx_fees.insert(tx, fee);
                self.nodes[origin].seen_txs.insert(tx);
                self.nodes[origin].mempool.insert((fee, tx));
                self.broadcast(origin, Msg::Tx(tx), round);
            }
        }

        // Phase c: deliver everything due this round; handlers may enqueue
        // same-round messages when delta = 0, which the loop then drains.
        while let Some(delivery) = self.pop_due(round) {
            self.delivered += 1;
            self.handle(delivery, round);
        }
    }

    fn mint_block(&mut self, miner: usize, parent: usize, round: u32, valid: bool) -> usize {
        let height = self.blocks[parent].height + 1;
        // Winner pulls its highest-fee mempool entries.
        let txs: Vec<u64> = {
            let node = &mut self.nodes[miner];
            let picked: Vec<(u64, u64)> = node
                .mempool
                .iter()
                .rev()
                .take(self.config.block_tx_capacity)
                .copied()
                .collect();
            for entry in &picked {
                node.mempool.remove(entry);
            }
            picked.into_iter().map(|(_, tx)| tx).collect()
        };
        self.blocks.push(SimBlock {
            parent,
            height,
            miner,
            round,
            valid,
            txs,
        });
        self.blocks.len() - 1
    }

    fn adopt_own(&mut self, i: usize, block: usize) {
        self.nodes[i].seen_blocks.insert(block);
        self.nodes[i].resolved.insert(block);
        self.nodes[i].tip = block;
    }

    /// Enqueue a message to every neighbor, arriving delta rounds later.
    fn broadcast(&mut self, from: usize, msg: Msg, round: u32) {
        let due = round + self.config.delta;
        let neighbors = self.nodes[from].neighbors.clone();
        for to in neighbors {
            self.sent += 1;
            self.queue
                .entry(due)
                .or_default()
                .push_back(Delivery { to, from, msg });
        }
    }

    /// Forward to all neighbors except the sender.
    fn forward(&mut self, via: usize, from: usize, msg: Msg, round: u32) {
        let due = round + self.config.delta;
        let neighbors = self.nodes[via].neighbors.clone();
        for to in neighbors {
            if to == from {
                continue;
            }
            self.sent += 1;
            self.queue
                .entry(due)
                .or_default()
                .push_back(Delivery { to, from: via, msg });
        }
    }

    /// Release withheld blocks: broadcast from every coalition member, due
    /// immediately and spliced ahead of the round's in-flight messages.
    fn release(&mut self, blocks: &[usize], round: u32) {
        let pool = self.pool.as_ref().expect("release without pool");
        let members = pool.members.clone();
        let mut deliveries = VecDeque::new();
        for &block in blocks {
            for &m in &members {
                for &to in &self.nodes[m].neighbors {
                    self.sent += 1;
                    deliveries.push_back(Delivery {
                        to,
                        from: m,
                        msg: Msg::Block(block),
                    });
                }
            }
        }
        let entry = self.queue.entry(round).or_default();
        while let Some(d) = deliveries.pop_back() {
            entry.push_front(d);
        }
        self.trace(round, alloc::format!("pool released {blocks:?}"));
    }

    fn pop_due(&mut self, round: u32) -> Option<Delivery> {
        let entry = self.queue.get_mut(&round)?;
        let next = entry.pop_front();
        if entry.is_empty() {
            self.queue.remove(&round);
        }
        next
    }

    fn handle(&mut self, delivery: Delivery, round: u32) {
        match delivery.msg {
            Msg::Tx(tx) => self.handle_tx(delivery.to, delivery.from, tx, round),
            Msg::Block(block) => self.handle_block(delivery.to, delivery.from, block, round),
        }
    }

    fn handle_tx(&mut self, at: usize, from: usize, tx: u64, round: u32) {
        if !self.nodes[at].seen_txs.insert(tx) {
            return;
        }
        // Forward on first receipt, then keep it pending.
        if self.nodes[at].strategy != Strategy::Silent {
            self.forward(at, from, Msg::Tx(tx), round);
        }
        let fee = *self.tx_fees.get(&tx).expect("tx registered at injection");
        self.nodes[at].mempool.insert((fee, tx));
    }

    fn handle_block(&mut self, at: usize, from: usize, block: usize, round: u32) {
        if self.nodes[at].seen_blocks.contains(&block) {
            return;
        }
        self.nodes[at].seen_blocks.insert(block);
        let strategy = self.nodes[at].strategy;
        let mined_by_pool = self
            .pool
            .as_ref()
            .is_some_and(|pool| pool.members.contains(&self.blocks[block].miner));

        // Forwarding comes first, on first receipt. Selfish members never
        // relay honest blocks; silent nodes never relay anything.
        match strategy {
            Strategy::Honest => self.forward(at, from, Msg::Block(block), round),
            Strategy::Selfish if mined_by_pool => {
                self.forward(at, from, Msg::Block(block), round)
            }
            Strategy::Selfish | Strategy::Silent => {}
        }

        if strategy == Strategy::Selfish {
            self.pool_observe(block, round);
            return;
        }
        self.resolve_and_adopt(at, block);
    }

    /// Validation plus longest-chain adoption, with orphan buffering for
    /// out-of-order arrivals. First-received block at a height wins ties
    /// (adoption only on strictly greater height).
    fn resolve_and_adopt(&mut self, at: usize, block: usize) {
        let parent = self.blocks[block].parent;
        if !self.nodes[at].resolved.contains(&parent) {
            self.nodes[at].pending.entry(parent).or_default().push(block);
            return;
        }
        let mut stack = alloc::vec![block];
        while let Some(b) = stack.pop() {
            if !self.blocks[b].valid {
                // Invalid blocks are ignored (and orphans below them never
                // resolve).
                continue;
            }
            self.nodes[at].resolved.insert(b);
            let (height, tip_height) =
                (self.blocks[b].height, self.blocks[self.nodes[at].tip].height);
            if height > tip_height {
                self.nodes[at].tip = b;
                // Remove the adopted block's transactions from the mempool.
                let txs = self.blocks[b].txs.clone();
                for tx in txs {
                    if let Some(fee) = self.tx_fees.get(&tx) {
                        self.nodes[at].mempool.remove(&(*fee, tx));
                    }
                }
            }
            if let Some(children) = self.nodes[at].pending.remove(&b) {
                stack.extend(children);
            }
        }
    }

    /// Coalition reaction to an honest block. Stale blocks are ignored;
    /// a block catching up to the private chain triggers a release; a block
    /// ahead of the private chain makes the pool adopt it.
    fn pool_observe(&mut self, block: usize, round: u32) {
        if !self.blocks[block].valid {
            return;
        }
        let Some(pool) = self.pool.as_mut() else {
            return;
        };
        let h = self.blocks[block].height;
        let private_height = self.blocks[pool.private_tip].height;
        if pool.withheld.is_empty() {
            if h > private_height {
                // Nothing private: follow the longest public chain.
                pool.private_tip = block;
                let members = pool.members.clone();
                for &m in &members {
                    self.nodes[m].resolved.insert(block);
                    self.nodes[m].tip = block;
                }
            }
            return;
        }
        if h > private_height {
            // Public chain overtook the private one: discard and adopt.
            pool.withheld.clear();
            pool.private_tip = block;
            let members = pool.members.clone();
            for &m in &members {
                self.nodes[m].resolved.insert(block);
                self.nodes[m].tip = block;
            }
            return;
        }
        // Release enough to match, or to overtake by one when possible:
        // everything withheld up to height h + 1.
        let release_up_to = (h + 1).min(private_height);
        let mut to_release = Vec::new();
        while let Some(&first) = pool.withheld.front() {
            if self.blocks[first].height <= release_up_to {
                to_release.push(first);
                pool.withheld.pop_front();
            } else {
                break;
            }
        }
        if !to_release.is_empty() {
            self.release(&to_release, round);
        }
    }

    /// Honest nodes must never sit on a chain containing an invalid block.
    fn assert_safety(&self) {
        for node in self.nodes.iter() {
            if node.strategy != Strategy::Honest {
                continue;
            }
            let mut b = node.tip;
            loop {
                assert!(self.blocks[b].valid, "honest node adopted invalid block");
                if b == GENESIS {
                    break;
                }
                b = self.blocks[b].parent;
            }
        }
    }

    fn chain_of(&self, tip: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut b = tip;
        loop {
            path.push(b);
            if b == GENESIS {
                break;
            }
            b = self.blocks[b].parent;
        }
        path.reverse();
        path
    }

    fn finish(mut self) -> SimRun {
        let final_chains: Vec<Vec<usize>> =
            (0..self.config.n).map(|i| self.chain_of(self.nodes[i].tip)).collect();

        // Common prefix over honest nodes only.
        let honest_chains: Vec<&Vec<usize>> = (0..self.config.n)
            .filter(|i| self.nodes[*i].strategy == Strategy::Honest)
            .map(|i| &final_chains[i])
            .collect();
        let prefix_len = if honest_chains.is_empty() {
            1
        } else {
            let mut len = 0usize;
            'outer: loop {
                let Some(first) = honest_chains[0].get(len) else {
                    break;
                };
                for chain in &honest_chains[1..] {
                    if chain.get(len) != Some(first) {
                        break 'outer;
                    }
                }
                len += 1;
            }
            len.max(1)
        };
        let consensus: &[usize] = &honest_chains
            .first()
            .map(|c| &c[..prefix_len])
            .unwrap_or(&[GENESIS]);

        let mut revenue = alloc::vec![0u64; self.config.n];
        let mut honest_blocks = 0u64;
        for &b in consensus.iter().skip(1) {
            let miner = self.blocks[b].miner;
            revenue[miner] += 1;
            if self.nodes[miner].strategy != Strategy::Selfish {
                honest_blocks += 1;
            }
        }
        let consensus_height = (prefix_len - 1) as u64;
        let chain_quality = if consensus_height == 0 {
            1.0
        } else {
            honest_blocks as f64 / consensus_height as f64
        };
        let selfish_revenue: u64 = (0..self.config.n)
            .filter(|i| self.nodes[*i].strategy == Strategy::Selfish)
            .map(|i| revenue[i])
            .sum();
        let selfish_revenue_share = if consensus_height == 0 {
            0.0
        } else {
            selfish_revenue as f64 / consensus_height as f64
        };
        let consistency_depth = honest_chains
            .iter()
            .map(|c| (c.len() - prefix_len) as u64)
            .max()
            .unwrap_or(0);
        let total_mined = (self.blocks.len() - 1) as u64;
        let efficiency_observed = if self.honest_success_rounds == 0 {
            1.0
        } else {
            consensus_height as f64 / self.honest_success_rounds as f64
        };
        let metrics = SimMetrics {
            chain_quality,
            efficiency_observed,
            revenue,
            fork_count: total_mined - consensus_height,
            consistency_depth,
            consensus_height,
            total_mined,
            selfish_revenue_share,
            selfish_hashrate_share: self.config.selfish_fraction(),
            honest_success_rounds: self.honest_success_rounds,
            messages_sent: self.sent,
            messages_delivered: self.delivered,
        };
        SimRun {
            metrics,
            final_chains,
            blocks: core::mem::take(&mut self.blocks),
            trace: core::mem::take(&mut self.trace),
        }
    }
}

/// Small-mean Poisson draw by Knuth's product method.
fn poisson_knuth(rng: &mut ChaCha12Rng, mean: f64) -> u32 {
    let threshold = libm::exp(-mean);
    let mut k = 0u32;
    let mut product = 1.0f64;
    loop {
        product *= rng.gen::<f64>();
        if product <= threshold {
            return k;
        }
        k += 1;
        if k > 10_000 {
            return k;
        }
    }
}
