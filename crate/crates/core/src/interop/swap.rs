use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{hashlock, AssetChain, HtlcState};
use crate::crypto::sha256d;

/// Adversarial variations of the swap protocol run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SwapScenario {
    /// Both parties follow the protocol; assets swap.
    Honest,
    /// Bob never funds his side; Alice refunds after her expiry.
    BobAborts,
    /// Alice never claims; both sides refund.
    AliceNeverClaims,
    /// Alice shows up after Bob's lock expired; her claim bounces and both
    /// sides refund.
    AliceClaimsLate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SwapEvent {
    pub time: u64,
    pub actor: String,
    pub action: String,
    pub outcome: String,
}

/// Complete record of one swap run: the event log, final balances on both
/// chains, and the terminal state of both locks.
#[derive(Clone, Debug)]
pub struct SwapTranscript {
    pub scenario: SwapScenario,
    pub events: Vec<SwapEvent>,
    pub chain_x: AssetChain,
    pub chain_y: AssetChain,
    pub x_leg: Option<HtlcState>,
    pub y_leg: Option<HtlcState>,
}

impl SwapTranscript {
    /// True when both assets changed hands.
    pub fn both_swapped(&self) -> bool {
        matches!(self.x_leg, Some(HtlcState::Claimed { .. }))
            && matches!(self.y_leg, Some(HtlcState::Claimed { .. }))
    }

    /// True when every created lock refunded (or Bob never funded and Alice
    /// refunded).
    pub fn nothing_moved(&self) -> bool {
        let x_back = matches!(self.x_leg, Some(HtlcState::Refunded) | None);
        let y_back = matches!(self.y_leg, Some(HtlcState::Refunded) | None);
        x_back && y_back
    }
}

/// Bob's lock expires strictly before Alice's: after Alice claims on
/// chain Y (revealing the key), Bob keeps a full window to claim on X.
pub const BOB_EXPIRY: u64 = 4;
pub const ALICE_EXPIRY: u64 = 8;
/// One tick of cross-chain latency between observing and acting.
pub const CLAIM_LATENCY: u64 = 1;

/// Run the atomic-swap protocol under a scenario. Alice holds 10 USDX on
/// chain X and wants Bob's 10 USDY on chain Y.
pub fn run_atomic_swap(scenario: SwapScenario) -> SwapTranscript {
    let mut x = AssetChain::new("X", "USDX", &[("Alice", 10), ("Bob", 0)]);
    let mut y = AssetChain::new("Y", "USDY", &[("Alice", 0), ("Bob", 10)]);
    let mut events = Vec::new();
    let mut log = |time: u64, actor: &str, action: &str, outcome: String| {
        events.push(SwapEvent {
            time,
            actor: actor.to_string(),
            action: action.to_string(),
            outcome,
        });
    };

    // Alice step 1-2: a secret key and its hash. Deterministic here so the
    // transcript is reproducible.
    let k_alice = sha256d(b"k-alice").to_vec();
    let m = hashlock(&k_alice);
    log(0, "Alice", "generate secret and hashlock", format!("m = {m}"));

    // Alice step 3: lock 10 USDX on X under m, expiring late.
    let x_id = x
        .htlc_create("Alice", 10, m, ALICE_EXPIRY)
        .expect("funded");
    log(
        0,
        "Alice",
        "create HTLC on X (10 USDX)",
        format!("expiry {ALICE_EXPIRY}"),
    );
    // Alice step 4: send m to Bob (a message, not a chain action).
    log(0, "Alice", "send m to Bob", "delivered".to_string());

    // Bob step 1: lock 10 USDY on Y under the same m, expiring early.
    let y_id = if scenario == SwapScenario::BobAborts {
        log(1, "Bob", "create HTLC on Y", "aborted: never funds".to_string());
        None
    } else {
        x.now = 1;
        y.now = 1;
        let id = y.htlc_create("Bob", 10, m, BOB_EXPIRY).expect("funded");
        log(1, "Bob", "create HTLC on Y (10 USDY)", format!("expiry {BOB_EXPIRY}"));
        Some(id)
    };

    // Alice's claim on Y (if she shows up, and when).
    if let Some(y_id) = y_id {
        let claim_time = match scenario {
            SwapScenario::Honest => Some(2),
            SwapScenario::AliceClaimsLate => Some(BOB_EXPIRY + 1),
            SwapScenario::AliceNeverClaims => None,
            SwapScenario::BobAborts => unreachable!("no y leg"),
        };
        if let Some(t) = claim_time {
            x.now = t;
            y.now = t;
            match y.htlc_claim(y_id, "Alice", &k_alice) {
                Ok(amount) => {
                    log(t, "Alice", "claim HTLC on Y", format!("received {amount} USDY"));
                    // Bob learns k from the public claim and takes his side.
                    let t2 = t + CLAIM_LATENCY;
                    x.now = t2;
                    y.now = t2;
                    let revealed = y.revealed_keys().last().expect("just claimed").0.clone();
                    match x.htlc_claim(x_id, "Bob", &revealed) {
                        Ok(amount) => {
                            log(t2, "Bob", "claim HTLC on X with revealed key",
                                format!("received {amount} USDX"))
                        }
                        Err(e) => log(t2, "Bob", "claim HTLC on X", format!("failed: {e}")),
                    }
                }
                Err(e) => log(t, "Alice", "claim HTLC on Y", format!("failed: {e}")),
            }
        }
    }

    // Expiries pass; any open lock refunds.
    x.now = ALICE_EXPIRY;
    y.now = ALICE_EXPIRY;
    if let Some(y_id) = y_id {
        if let Ok(amount) = y.htlc_refund(y_id) {
            log(ALICE_EXPIRY, "Bob", "refund HTLC on Y", format!("returned {amount} USDY"));
        }
    }
    if let Ok(amount) = x.htlc_refund(x_id) {
        log(ALICE_EXPIRY, "Alice", "refund HTLC on X", format!("returned {amount} USDX"));
    }

    let x_leg = x.htlc(x_id).map(|h| h.state.clone());
    let y_leg = y_id.and_then(|id| y.htlc(id)).map(|h| h.state.clone());
    SwapTranscript {
        scenario,
        events,
        chain_x: x,
        chain_y: y,
        x_leg,
        y_leg,
    }
}

// ---------------------------------------------------------------------------
// Exhaustive interleaving exploration of the two-lock state machine.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LegState {
    Unfunded,
    Open,
    Claimed,
    Refunded,
}

/// Abstract protocol state for the model check: discrete time, the two lock
/// states, whether the key is public, and Alice's claim strategy (the model
/// branches over her choices; Bob claims eagerly once he can).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct ModelState {
    time: u64,
    x: LegState,
    y: LegState,
    key_public: bool,
    bob_funds_at: Option<u64>,
    alice_claims_at: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct ExplorationReport {
    pub interleavings: u64,
    pub terminal_states: Vec<(LegState, LegState)>,
    pub saw_both_swapped: bool,
    pub saw_both_refunded: bool,
    pub saw_alice_refund_after_bob_abort: bool,
}

const HORIZON: u64 = ALICE_EXPIRY + 2;

/// Walk every schedule of the two-HTLC machine: Bob funding at any time or
/// never, Alice claiming at any time or never, refunds taken at any time
/// they are allowed. One rule is not branched: a party never forgoes an
/// enabled claim while the clock advances (an enabled claim is free money).
/// The check: no terminal state has exactly one leg transferred.
pub fn explore_swap_interleavings() -> ExplorationReport {
    let mut report = ExplorationReport {
        interleavings: 0,
        terminal_states: Vec::new(),
        saw_both_swapped: false,
        saw_both_refunded: false,
        saw_alice_refund_after_bob_abort: false,
    };
    let mut seen_terminals: BTreeSet<(LegState, LegState)> = BTreeSet::new();

    // Branch over the adversarial choices up front; the inner walk is then
    // deterministic except for refund timing, which cannot change terminal
    // outcomes (refunds never expire) and is taken eagerly at expiry.
    let mut bob_options: Vec<Option<u64>> = (0..BOB_EXPIRY).map(Some).collect();
    bob_options.push(None);
    for bob_funds_at in bob_options {
        let mut alice_options: Vec<Option<u64>> = (0..HORIZON).map(Some).collect();
        alice_options.push(None);
        for alice_claims_at in alice_options.clone() {
            report.interleavings += 1;
            let mut state = ModelState {
                time: 0,
                x: LegState::Open, // Alice funds at t=0 by protocol
                y: LegState::Unfunded,
                key_public: false,
                bob_funds_at,
                alice_claims_at,
            };
            while state.time <= HORIZON {
                step_model(&mut state);
                state.time += 1;
            }
            // Terminal classification.
            let terminal = (state.x, state.y);
            if seen_terminals.insert(terminal) {
                report.terminal_states.push(terminal);
            }
            let x_claimed = state.x == LegState::Claimed;
            let y_claimed = state.y == LegState::Claimed;
            if x_claimed && y_claimed {
                report.saw_both_swapped = true;
            }
            if state.x == LegState::Refunded
                && (state.y == LegState::Refunded || state.y == LegState::Unfunded)
            {
                report.saw_both_refunded = true;
                if bob_funds_at.is_none() {
                    report.saw_alice_refund_after_bob_abort = true;
                }
            }
            // The atomicity assertion itself.
            assert!(
                !(x_claimed ^ y_claimed),
                "mixed terminal: x {:?} y {:?} (bob {:?}, alice {:?})",
                state.x,
                state.y,
                bob_funds_at,
                alice_claims_at,
            );
        }
    }
    report
}

/// Advance one tick: apply every action enabled at this time in protocol
/// order. Claims fire the moment they are enabled; refunds fire at expiry.
fn step_model(state: &mut ModelState) {
    let t = state.time;
    // Bob funds his lock (only before his own expiry would it make sense).
    if state.y == LegState::Unfunded && state.bob_funds_at == Some(t) {
        state.y = LegState::Open;
    }
    // Alice claims Y at her chosen time, if the lock stands and is live.
    if state.alice_claims_at == Some(t) && state.y == LegState::Open && t < BOB_EXPIRY {
        state.y = LegState::Claimed;
        state.key_public = true;
    }
    // Bob, eager: the key is public and his claim window is open.
    if state.key_public && state.x == LegState::Open && t < ALICE_EXPIRY {
        state.x = LegState::Claimed;
    }
    // Refunds at expiry.
    if state.y == LegState::Open && t >= BOB_EXPIRY {
        state.y = LegState::Refunded;
    }
    if state.x == LegState::Open && t >= ALICE_EXPIRY {
        state.x = LegState::Refunded;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_swap_trades_both_assets() {
        let t = run_atomic_swap(SwapScenario::Honest);
        assert!(t.both_swapped());
        assert_eq!(t.chain_x.balance("Bob"), 10);
        assert_eq!(t.chain_y.balance("Alice"), 10);
        assert_eq!(t.chain_x.balance("Alice"), 0);
        assert_eq!(t.chain_y.balance("Bob"), 0);
    }

    #[test]
    fn bob_abort_costs_nobody() {
        let t = run_atomic_swap(SwapScenario::BobAborts);
        assert!(t.nothing_moved());
        assert_eq!(t.chain_x.balance("Alice"), 10);
        assert_eq!(t.chain_y.balance("Bob"), 10);
    }

    #[test]
    fn alice_silence_costs_nobody() {
        let t = run_atomic_swap(SwapScenario::AliceNeverClaims);
        assert!(t.nothing_moved());
        assert_eq!(t.chain_x.balance("Alice"), 10);
        assert_eq!(t.chain_y.balance("Bob"), 10);
    }

    #[test]
    fn late_claim_bounces_and_both_refund() {
        let t = run_atomic_swap(SwapScenario::AliceClaimsLate);
        assert!(t.nothing_moved());
        let failed_claim = t
            .events
            .iter()
            .find(|e| e.actor == "Alice" && e.action.contains("claim"))
            .expect("claim attempt logged");
        assert!(failed_claim.outcome.contains("failed"));
    }

    #[test]
    fn expiry_gap_invariant() {
        assert!(ALICE_EXPIRY > BOB_EXPIRY + CLAIM_LATENCY);
    }

    #[test]
    fn exploration_finds_no_mixed_terminal() {
        let report = explore_swap_interleavings();
        assert!(report.interleavings <= 10_000);
        assert!(report.saw_both_swapped);
        assert!(report.saw_both_refunded);
        assert!(report.saw_alice_refund_after_bob_abort);
        for (x, y) in &report.terminal_states {
            let x_claimed = *x == LegState::Claimed;
            let y_claimed = *y == LegState::Claimed;
            assert!(!(x_claimed ^ y_claimed), "mixed terminal survived: {x:?} {y:?}");
        }
    }
}
