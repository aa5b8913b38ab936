use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigUint;
use num_traits::One;

/// Difficulty is a positive rational >= 1 carried in headers as a 4-byte
/// compact (mantissa/exponent) encoding:
///
/// ```text
/// bits = E << 24 | M        (E: u8 exponent, M: 24-bit mantissa)
/// value = M * 256^(E - 3)
/// ```
///
/// E < 3 yields power-of-256 denominators, so halving stays exactly
/// representable. Doubling, halving, and identity retargets are exact;
/// arbitrary retargets round to the nearest representable value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Difficulty {
    num: u128,
    den: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DifficultyError {
    /// Difficulty must be >= 1.
    BelowOne,
    /// Zero mantissa or zero value.
    Zero,
    /// Value too large for the compact range supported here.
    Overflow,
    /// Retarget over a nonpositive elapsed time.
    NonpositiveElapsed,
}

impl fmt::Display for DifficultyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DifficultyError::BelowOne => write!(f, "difficulty below 1"),
            DifficultyError::Zero => write!(f, "zero difficulty"),
            DifficultyError::Overflow => write!(f, "difficulty out of compact range"),
            DifficultyError::NonpositiveElapsed => write!(f, "elapsed time must be positive"),
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

const MANTISSA_MAX: u128 = (1 << 24) - 1;
/// Largest exponent we admit; 256^(18-3) = 2^120 keeps u128 arithmetic safe.
const EXP_MAX: u32 = 18;

impl Difficulty {
    pub const ONE: Difficulty = Difficulty { num: 1, den: 1 };

    /// Build from a reduced rational; must be >= 1.
    pub fn from_ratio(num: u128, den: u128) -> Result<Difficulty, DifficultyError> {
        if num == 0 || den == 0 {
            return Err(DifficultyError::Zero);
        }
        if num < den {
            return Err(DifficultyError::BelowOne);
        }
        let g = gcd(num, den);
        Ok(Difficulty {
            num: num / g,
            den: den / g,
        })
    }

    pub fn from_int(value: u64) -> Result<Difficulty, DifficultyError> {
        Difficulty::from_ratio(value as u128, 1)
    }

    pub fn numer(&self) -> u128 {
        self.num
    }

    pub fn denom(&self) -> u128 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Encode to compact bits, rounding to the nearest representable value
    /// (then clamping to >= 1). The smallest exponent whose mantissa fits
    /// 24 bits is chosen, maximizing precision.
    pub fn to_compact(&self) -> u32 {
        for exp in 0..=EXP_MAX {
            // scale = 256^(exp-3): M = round(value / scale).
            let (scale_num, scale_den) = pow256_ratio(exp);
            // M = round(num * scale_den / (den * scale_num))
            let denom = self.den.checked_mul(scale_num);
            let numer = self.num.checked_mul(scale_den);
            let (numer, denom) = match (numer, denom) {
                (Some(n), Some(d)) => (n, d),
                _ => continue,
            };
            let m = (numer + denom / 2) / denom;
            if m >= 1 && m <= MANTISSA_MAX {
                return ((exp as u32) << 24) | (m as u32);
            }
        }
        // Out of range: saturate at the maximum representable difficulty.
        (EXP_MAX << 24) | MANTISSA_MAX as u32
    }

    /// Decode compact bits; rejects values below 1 and exponents beyond the
    /// supported range.
    pub fn from_compact(bits: u32) -> Result<Difficulty, DifficultyError> {
        let exp = bits >> 24;
        let mantissa = (bits & 0x00ff_ffff) as u128;
        if mantissa == 0 {
            return Err(DifficultyError::Zero);
        }
        if exp > EXP_MAX {
            return Err(DifficultyError::Overflow);
        }
        let (scale_num, scale_den) = pow256_ratio(exp);
        let num = mantissa
            .checked_mul(scale_num)
            .ok_or(DifficultyError::Overflow)?;
        Difficulty::from_ratio(num, scale_den)
    }

    /// Multiply by the rational num/den, round to compact precision, clamp
    /// to >= 1.
    fn scaled(&self, num: u128, den: u128) -> Result<Difficulty, DifficultyError> {
        let g1 = gcd(self.num, den);
        let g2 = gcd(num, self.den);
        let n = (self.num / g1)
            .checked_mul(num / g2)
            .ok_or(DifficultyError::Overflow)?;
        let d = (self.den / g2)
            .checked_mul(den / g1)
            .ok_or(DifficultyError::Overflow)?;
        let raw = if n < d {
            Difficulty::ONE
        } else {
            Difficulty::from_ratio(n, d)?
        };
        // Round-trip through compact so header encoding is always exact.
        Difficulty::from_compact(raw.to_compact())
    }
}

/// 256^(exp-3) as a (numerator, denominator) pair.
fn pow256_ratio(exp: u32) -> (u128, u128) {
    if exp >= 3 {
        (256u128.pow(exp - 3), 1)
    } else {
        (1, 256u128.pow(3 - exp))
    }
}

impl PartialOrd for Difficulty {
    fn partial_cmp(&self, other: &Difficulty) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Difficulty {
    fn cmp(&self, other: &Difficulty) -> Ordering {
        // Cross-multiply in 256-bit space via BigUint to avoid overflow.
        let left = BigUint::from(self.num) * BigUint::from(other.den);
        let right = BigUint::from(other.num) * BigUint::from(self.den);
        left.cmp(&right)
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Base target for difficulty 1 from the block-id rule: 65535 << 208.
pub fn mainnet_base_target() -> BigUint {
    BigUint::from(65535u32) << 208
}

/// TARGET = floor((65535 << 208) / difficulty).
pub fn target_from_difficulty(difficulty: &Difficulty) -> BigUint {
    target_with_base(&mainnet_base_target(), difficulty)
}

/// TARGET = floor(base * den / num); `base` is the difficulty-1 target of
/// the chain profile (the production profile uses 65535 << 208, desk
/// profiles raise it so blocks are minable in tests).
pub fn target_with_base(base: &BigUint, difficulty: &Difficulty) -> BigUint {
    base * BigUint::from(difficulty.den) / BigUint::from(difficulty.num)
}

/// Epoch schedule and chain profile knobs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifficultyParams {
    pub initial: Difficulty,
    /// Blocks per retarget epoch.
    pub epoch_length: u64,
    /// Intended seconds between blocks.
    pub target_block_interval: u64,
    /// Target at difficulty 1. The production value is 65535 << 208.
    pub base_target: BigUint,
}

impl DifficultyParams {
    /// Production profile: Eq.-style base target, 2016-block epochs, 600 s
    /// blocks (one epoch = 2 weeks).
    pub fn mainnet() -> DifficultyParams {
        DifficultyParams {
            initial: Difficulty::ONE,
            epoch_length: 2016,
            target_block_interval: 600,
            base_target: mainnet_base_target(),
        }
    }

    /// Desk profile: every id below 2^255 passes at difficulty 1, so a block
    /// takes two tries on average. Short epochs keep retarget reachable.
    pub fn regtest() -> DifficultyParams {
        DifficultyParams {
            initial: Difficulty::ONE,
            epoch_length: 8,
            target_block_interval: 600,
            base_target: BigUint::one() << 255,
        }
    }

    /// Expected epoch duration in seconds (the "2 weeks" of the retarget
    /// rule for the production schedule).
    pub fn expected_epoch_seconds(&self) -> u64 {
        self.epoch_length * self.target_block_interval
    }
}

/// The retarget rule D(n+1) = 2 D(n) / T with T in units of the expected
/// epoch duration: new = old * expected_elapsed / actual_elapsed, clamped to
/// >= 1 and rounded to the nearest compact-representable value. For the
/// production schedule, expected_elapsed is two weeks (1,209,600 s), so
/// T = 1 week doubles, T = 2 weeks holds, T = 4 weeks halves.
pub fn retarget(
    params: &DifficultyParams,
    current: &Difficulty,
    epoch_elapsed_seconds: u64,
) -> Result<Difficulty, DifficultyError> {
    if epoch_elapsed_seconds == 0 {
        return Err(DifficultyError::NonpositiveElapsed);
    }
    current.scaled(
        params.expected_epoch_seconds() as u128,
        epoch_elapsed_seconds as u128,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const WEEK: u64 = 7 * 24 * 3600;

    #[test]
    fn target_at_difficulty_one_is_base() {
        let d = Difficulty::ONE;
        assert_eq!(target_from_difficulty(&d), mainnet_base_target());
    }

    #[test]
    fn target_halves_at_difficulty_two() {
        let d = Difficulty::from_int(2).unwrap();
        assert_eq!(target_from_difficulty(&d), mainnet_base_target() / 2u8);
    }

    #[test]
    fn target_monotone_decreasing_in_difficulty() {
        let mut last = target_from_difficulty(&Difficulty::ONE);
        for raw in [
            (3u128, 2u128),
            (2, 1),
            (5, 2),
            (4, 1),
            (11, 2),
            (16, 1),
            (1000, 7),
            (1 << 20, 1),
        ] {
            let d = Difficulty::from_ratio(raw.0, raw.1).unwrap();
            let t = target_from_difficulty(&d);
            assert!(t < last, "target must fall as difficulty rises ({raw:?})");
            last = t;
        }
    }

    #[test]
    fn compact_round_trip_exact_for_representable() {
        for (num, den) in [(1u128, 1u128), (2, 1), (3, 2), (1 << 23, 1), (257, 256)] {
            let d = Difficulty::from_ratio(num, den).unwrap();
            let bits = d.to_compact();
            let back = Difficulty::from_compact(bits).unwrap();
            assert_eq!(back, d, "({num}/{den}) not exact through compact");
        }
    }

    #[test]
    fn compact_rejects_zero_and_overflow() {
        assert_eq!(Difficulty::from_compact(0), Err(DifficultyError::Zero));
        assert_eq!(
            Difficulty::from_compact((EXP_MAX + 1) << 24 | 1),
            Err(DifficultyError::Overflow)
        );
    }

    #[test]
    fn retarget_on_schedule_holds() {
        let params = DifficultyParams::mainnet();
        let d = Difficulty::from_int(4).unwrap();
        // T = 2 weeks: unchanged.
        assert_eq!(retarget(&params, &d, 2 * WEEK).unwrap(), d);
        // T = 1 week: doubles.
        assert_eq!(
            retarget(&params, &d, WEEK).unwrap(),
            Difficulty::from_int(8).unwrap()
        );
        // T = 4 weeks: halves.
        assert_eq!(
            retarget(&params, &d, 4 * WEEK).unwrap(),
            Difficulty::from_int(2).unwrap()
        );
    }

    #[test]
    fn retarget_halving_below_one_clamps() {
        let params = DifficultyParams::mainnet();
        let d = Difficulty::ONE;
        assert_eq!(retarget(&params, &d, 4 * WEEK).unwrap(), Difficulty::ONE);
    }

    #[test]
    fn retarget_zero_elapsed_rejected() {
        let params = DifficultyParams::mainnet();
        assert_eq!(
            retarget(&params, &Difficulty::ONE, 0),
            Err(DifficultyError::NonpositiveElapsed)
        );
    }

    #[test]
    fn fractional_difficulty_keeps_exact_halving_chain() {
        let params = DifficultyParams::mainnet();
        // Start at 8 and halve four times: 8 -> 4 -> 2 -> 1 -> clamp 1.
        let mut d = Difficulty::from_int(8).unwrap();
        let mut seen = alloc::vec![d];
        for _ in 0..4 {
            d = retarget(&params, &d, 4 * WEEK).unwrap();
            seen.push(d);
        }
        let values: alloc::vec::Vec<f64> = seen.iter().map(|d| d.as_f64()).collect();
        assert_eq!(values, alloc::vec![8.0, 4.0, 2.0, 1.0, 1.0]);
    }
}
