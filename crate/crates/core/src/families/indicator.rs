use crate::error::Result;
use crate::numerics::{OpMeter, Scalar};

/// `(1/((1−α)ε))·(R(x−(c+ε)) + R(x+ε) − R(x−c) − R(x))` with `R = ReLU_α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorNetwork {
    pub c: Scalar,
    pub epsilon: Scalar,
    pub alpha: Scalar,
}

impl IndicatorNetwork {
    pub fn new(c: Scalar, epsilon: Scalar, alpha: Scalar) -> Self {
        IndicatorNetwork { c, epsilon, alpha }
    }

    fn leaky(&self, z: Scalar) -> Scalar {
        if z.is_positive() {
            z
        } else {
            &self.alpha * &z
        }
    }

    /// Hidden-unit shifts and the output scaling have one variable operand
    /// each and are free; the three additions combining units are charged.
    pub fn evaluate(&self, x: &Scalar, meter: &mut OpMeter) -> Result<Scalar> {
        let c_eps = &self.c + &self.epsilon;
        let h1 = self.leaky(x - &c_eps);
        let h2 = self.leaky(x + &self.epsilon);
        let h3 = self.leaky(x - &self.c);
        let h4 = self.leaky(x.clone());
        let s = meter.add(&h1, &h2)?;
        let s = meter.sub(&s, &h3)?;
        let s = meter.sub(&s, &h4)?;
        let scale = &(&Scalar::one() - &self.alpha) * &self.epsilon;
        Ok(&s / &scale)
    }

    pub fn value(&self, x: &Scalar) -> Scalar {
        self.evaluate(x, &mut OpMeter::unlimited()).expect("unlimited meter")
    }
}

/// Builds the four-unit network and checks it at `probes`: 1 on `[0, c]`,
/// 0 on `x ≤ −ε` and `x ≥ c + ε`. Returns the network and whether every probe
/// in those regions matched exactly.
pub fn indicator_witness(c: &Scalar, epsilon: &Scalar, alpha: &Scalar, probes: &[Scalar]) -> (IndicatorNetwork, bool) {
    assert!(epsilon.is_positive(), "epsilon must be positive");
    assert!(!alpha.is_negative() && *alpha < Scalar::one(), "slope must lie in [0, 1)");
    let net = IndicatorNetwork::new(c.clone(), epsilon.clone(), alpha.clone());
    let zero = Scalar::zero();
    let c_eps = c + epsilon;
    let neg_eps = -epsilon;
    let ok = probes.iter().all(|x| {
        let v = net.value(x);
        if *x >= zero && x <= c {
            v == Scalar::one()
        } else if *x <= neg_eps || *x >= c_eps {
            v.is_zero()
        } else {
            true
        }
    });
    (net, ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn worked_values() {
        let (net, ok) = indicator_witness(&q(1, 1), &q(1, 4), &q(0, 1), &[q(1, 2), q(2, 1), q(-1, 1), q(0, 1)]);
        assert!(ok);
        assert_eq!(net.value(&q(1, 2)), q(1, 1));
        assert_eq!(net.value(&q(2, 1)), q(0, 1));
        let (leaky, ok) = indicator_witness(&q(1, 1), &q(1, 4), &q(1, 2), &[q(1, 1)]);
        assert!(ok);
        assert_eq!(leaky.value(&q(1, 1)), q(1, 1));
    }

    /// Oracle: the piecewise-linear shape written out directly.
    fn reference(c: &Scalar, e: &Scalar, x: &Scalar) -> Scalar {
        let zero = Scalar::zero();
        if *x <= -e || *x >= c + e {
            zero
        } else if *x < zero {
            &(x + e) / e
        } else if x <= c {
            Scalar::one()
        } else {
            &(&(c + e) - x) / e
        }
    }

    #[test]
    fn matches_reference_shape() {
        for alpha in [q(0, 1), q(1, 3), q(1, 2), q(9, 10)] {
            for (c, e) in [(q(1, 1), q(1, 4)), (q(0, 1), q(1, 2)), (q(3, 2), q(1, 8))] {
                let net = IndicatorNetwork::new(c.clone(), e.clone(), alpha.clone());
                for k in -40..=40 {
                    let x = q(k, 16);
                    assert_eq!(net.value(&x), reference(&c, &e, &x), "alpha={alpha} c={c} e={e} x={x}");
                }
            }
        }
    }
}
