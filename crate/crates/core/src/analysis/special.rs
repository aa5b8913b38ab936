//! Log-gamma and the regularized incomplete beta function, the numeric
//! kernels behind the finality probabilities. Continued-fraction evaluation
//! follows the classic Lentz scheme.

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln C(n, k) for nonnegative integers via log-gamma.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

const MAX_ITER: usize = 300;
const EPS: f64 = 1e-15;
const FPMIN: f64 = 1e-300;

/// Regularized incomplete beta function I_x(a, b).
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta parameters must be positive");
    assert!((0.0..=1.0).contains(&x), "x must lie in [0, 1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    // Prefactor x^a (1-x)^b / (a B(a,b)) in log space.
    let ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * libm::log(x)
        + b * libm::log(1.0 - x);
    let bt = libm::exp(ln_bt);
    if x < (a + 1.0) / (a + b + 2.0) {
        bt * beta_cf(x, a, b) / a
    } else {
        1.0 - bt * beta_cf(1.0 - x, b, a) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return h;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        // Gamma(1) = Gamma(2) = 1, Gamma(1/2) = sqrt(pi).
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(2.0)).abs() < 1e-14);
        assert!((ln_gamma(0.5) - 0.5 * core::f64::consts::PI.ln()).abs() < 1e-13);
        // Gamma(6) = 120.
        assert!((ln_gamma(6.0) - 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ln_choose_small_cases() {
        assert!((ln_choose(5, 2) - 10f64.ln()).abs() < 1e-12);
        assert!((ln_choose(10, 0)).abs() < 1e-12);
        assert_eq!(ln_choose(3, 5), f64::NEG_INFINITY);
    }

    // I_x(1, 1) = x (uniform CDF).
    #[test]
    fn beta_uniform_case() {
        for x in [0.0, 0.1, 0.33, 0.5, 0.9, 1.0] {
            assert!((reg_inc_beta(x, 1.0, 1.0) - x).abs() < 1e-12, "x={x}");
        }
    }

    // I_x(a, 1) = x^a exactly.
    #[test]
    fn beta_b_equal_one() {
        for a in [1.0, 2.0, 5.0, 17.0] {
            for x in [0.05, 0.4, 0.77, 0.99] {
                let expect = libm::pow(x, a);
                assert!(
                    (reg_inc_beta(x, a, 1.0) - expect).abs() < 1e-12,
                    "a={a} x={x}"
                );
            }
        }
    }

    // Quadrature oracle: integrate t^(a-1) (1-t)^(b-1) by Simpson's rule and
    // normalize; the continued fraction must agree.
    #[test]
    fn beta_matches_quadrature() {
        fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, steps: usize) -> f64 {
            let h = (hi - lo) / steps as f64;
            let mut acc = 0.0;
            for i in 0..steps {
                let x0 = lo + i as f64 * h;
                acc += (f(x0) + 4.0 * f(x0 + h / 2.0) + f(x0 + h)) * h / 6.0;
            }
            acc
        }
        for (a, b) in [(6.0, 0.5), (3.0, 0.5), (12.0, 0.5), (2.5, 4.0)] {
            for x in [0.2, 0.36, 0.64, 0.9] {
                // Integrand is singular at t=1 for b<1; stop at x<1 only.
                let integrand =
                    |t: f64| libm::pow(t, a - 1.0) * libm::pow(1.0 - t, b - 1.0);
                let partial = simpson(&integrand, 0.0, x, 40_000);
                let whole = libm::exp(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
                let expect = partial / whole;
                let got = reg_inc_beta(x, a, b);
                assert!(
                    (got - expect).abs() < 1e-8,
                    "a={a} b={b} x={x}: got {got}, quadrature {expect}"
                );
            }
        }
    }

    #[test]
    fn beta_complement_symmetry() {
        // I_x(a,b) + I_(1-x)(b,a) = 1.
        for (a, b, x) in [(6.0, 0.5, 0.3), (2.0, 3.0, 0.7), (10.0, 0.5, 0.96)] {
            let s = reg_inc_beta(x, a, b) + reg_inc_beta(1.0 - x, b, a);
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
