//! Closed-form mistake and operation bounds for the reductions.

use serde::Serialize;

use crate::numerics::Scalar;

/// Slack allowed when comparing a measured count with a bound that involves
/// logarithms.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// A bound on a count: either an exact integer or a real closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Limit {
    Exact(u64),
    Real(f64),
}

impl Limit {
    pub fn holds(self, measured: u64) -> bool {
        match self {
            Limit::Exact(b) => measured <= b,
            Limit::Real(b) => measured as f64 <= b + BOUND_TOLERANCE,
        }
    }

    /// The bound rounded up, for display.
    pub fn ceiling(self) -> u64 {
        match self {
            Limit::Exact(b) => b,
            Limit::Real(b) => (b - BOUND_TOLERANCE).ceil() as u64,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Limit::Exact(b) => b as f64,
            Limit::Real(b) => b,
        }
    }
}

fn ln(x: f64) -> f64 {
    x.ln()
}

/// Strong agnostic majority: `(M ln 3 + η ln 3k) / ln(6/5)`.
pub fn agnostic_strong(m: u64, eta: u64, k: u64) -> Limit {
    Limit::Real((m as f64 * ln(3.0) + eta as f64 * ln(3.0 * k as f64)) / ln(6.0 / 5.0))
}

/// Weak agnostic majority: `(M ln 3k + η ln 3) / −ln(1 − 1/3k)`.
pub fn agnostic_weak(m: u64, eta: u64, k: u64) -> Limit {
    let k = k as f64;
    Limit::Real((m as f64 * ln(3.0 * k) + eta as f64 * ln(3.0)) / -ln(1.0 - 1.0 / (3.0 * k)))
}

/// Restarting the base learner after `M + 1` corrections: `(M + 1)(η + 1) − 1`.
pub fn agnostic_restart(m: u64, eta: u64) -> Limit {
    Limit::Exact((m + 1) * (eta + 1) - 1)
}

/// Guaranteed weight decay per mistake for ambiguous voting with delay `r`:
/// `1 − (1 − r(k−1)α) / kʳ`. With `r = 1` this is `(k−1)(1+α)/k`.
pub fn ambiguous_decay(k: u64, r: u32, alpha: &Scalar) -> Scalar {
    let one = Scalar::one();
    let spread = &Scalar::int((u64::from(r) * (k - 1)) as i64) * alpha;
    let kr = Scalar::int(k.pow(r) as i64);
    &one - &(&(&one - &spread) / &kr)
}

/// The looser bandit decay `(k−1)/k + α`.
pub fn bandit_decay_loose(k: u64, alpha: &Scalar) -> Scalar {
    &Scalar::ratio(k as i64 - 1, k as i64) + alpha
}

/// `M ln(1/α) / −ln(decay)` for voting whose correct copy keeps weight at
/// least `α^M`.
pub fn voting_mistakes(m: u64, alpha: &Scalar, decay: &Scalar) -> Limit {
    let d = decay.to_f64();
    if d >= 1.0 {
        return Limit::Real(f64::INFINITY);
    }
    Limit::Real(m as f64 * -ln(alpha.to_f64()) / -ln(d))
}

/// Bandit voting: at most `(k−1)^M` copies, each costing `a + 2`.
pub fn bandit_ops(m: u32, k: u64, a: u64) -> Limit {
    Limit::Exact((k - 1).pow(m) * (a + 2))
}

/// Ambiguous voting with delay `r`: `(r(k−1))^M (ra + r + 1)`.
pub fn ambiguous_ops(m: u32, k: u64, r: u64, a: u64) -> Limit {
    Limit::Exact((r * (k - 1)).pow(m) * (r * a + r + 1))
}

/// Two-phase wrapper: `t(1 + ⌈s/W⌉)`.
pub fn phased(t: u64, s: u64, w: u64) -> Limit {
    Limit::Exact(t * (1 + s.div_ceil(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::default_alpha;

    #[test]
    fn worked_values() {
        assert_eq!(agnostic_strong(2, 1, 4).ceiling(), 26);
        assert_eq!(agnostic_weak(1, 1, 3).ceiling(), 28);
        assert_eq!(agnostic_restart(2, 1), Limit::Exact(5));
        assert_eq!(bandit_ops(2, 3, 5), Limit::Exact(28));
        assert_eq!(ambiguous_ops(1, 2, 2, 0), Limit::Exact(6));
        assert_eq!(phased(3, 12, 5), Limit::Exact(12));
    }

    #[test]
    fn ambiguous_with_delay_one_is_the_bandit_factor() {
        for k in 2..6u64 {
            let a = default_alpha(k as usize, 1);
            let d = ambiguous_decay(k, 1, &a);
            let expected = &Scalar::ratio(k as i64 - 1, k as i64) * &(&Scalar::one() + &a);
            assert_eq!(d, expected);
            assert!(d <= bandit_decay_loose(k, &a));
            assert!(d < Scalar::one());
        }
    }

    #[test]
    fn limits_compare_with_slack() {
        assert!(Limit::Real(3.0 - 1e-12).holds(3));
        assert!(!Limit::Real(2.9).holds(3));
        assert_eq!(Limit::Real(2.9).ceiling(), 3);
        assert_eq!(Limit::Real(3.0 + 1e-12).ceiling(), 3);
    }
}
