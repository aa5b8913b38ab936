use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// One double-spend attempt in the confirmation-race model: the merchant
/// ships once the honest chain has k confirmations; the attacker mines a
/// conflicting branch from the payment's parent the whole time and wins by
/// ever reaching the honest length.
///
/// Block production is a Bernoulli sequence: each block is the attacker's
/// with probability q, honest otherwise. When the k-th honest block lands,
/// the attacker holds X ~ NB(k, 1-q) blocks and continues the race from the
/// deficit k - X. The walk is abandoned once the deficit exceeds
/// `max_deficit` (catch-up odds (q/p)^d are astronomically small there).
pub fn double_spend_trial(k: u64, q: f64, rng: &mut ChaCha12Rng, max_deficit: u64) -> bool {
    // Phase 1: race until the merchant sees k confirmations.
    let mut attacker: u64 = 0;
    let mut honest: u64 = 0;
    while honest < k {
        if rng.gen_bool(q) {
            attacker += 1;
        } else {
            honest += 1;
        }
    }
    if attacker >= k {
        return true;
    }
    // Phase 2: gambler's-ruin catch-up from the current deficit; reaching a
    // tie suffices (the attacker then publishes the longer-or-equal branch
    // it extends next).
    let mut deficit = k - attacker;
    loop {
        if rng.gen_bool(q) {
            deficit -= 1;
            if deficit == 0 {
                return true;
            }
        } else {
            deficit += 1;
            if deficit > max_deficit {
                return false;
            }
        }
    }
}

/// Empirical attacker success rate over seeded trials.
pub fn double_spend_rate(k: u64, q: f64, trials: u64, seed: u64) -> f64 {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut wins = 0u64;
    for _ in 0..trials {
        if double_spend_trial(k, q, &mut rng, 128) {
            wins += 1;
        }
    }
    wins as f64 / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::finality_prob_sum;

    #[test]
    fn no_hashrate_never_wins() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for k in [1u64, 3, 6] {
            for _ in 0..200 {
                assert!(!double_spend_trial(k, 0.0, &mut rng, 64));
            }
        }
    }

    #[test]
    fn even_split_always_catches_up() {
        // q = 0.5 makes the catch-up walk recurrent; with a generous horizon
        // nearly every trial succeeds.
        let rate = double_spend_rate(2, 0.5, 2_000, 7);
        assert!(rate > 0.95, "rate {rate}");
    }

    // The race frequencies must match the closed-form probability within
    // Monte-Carlo error.
    #[test]
    fn empirical_rate_matches_formula() {
        for (k, q) in [(1u64, 0.1f64), (2, 0.1), (1, 0.3), (3, 0.3)] {
            let trials = 100_000u64;
            let expect = finality_prob_sum(k, q).unwrap();
            let got = double_spend_rate(k, q, trials, 42 + k);
            let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
            assert!(
                (got - expect).abs() < 3.0 * sigma + 1e-9,
                "k={k} q={q}: got {got}, formula {expect}, sigma {sigma}"
            );
        }
    }
}
