use crate::numerics::Scalar;

/// `coeffs · t ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub coeffs: Vec<Scalar>,
    pub bound: Scalar,
}

impl Inequality {
    pub fn holds(&self, t: &[Scalar]) -> bool {
        let lhs = self.coeffs.iter().zip(t).fold(Scalar::zero(), |acc, (c, v)| &acc + &(c * v));
        lhs <= self.bound
    }

    /// Scales so the last nonzero coefficient has absolute value 1; used to drop duplicates.
    fn normalized(mut self) -> Self {
        if let Some(c) = self.coeffs.iter().rev().find(|c| !c.is_zero()).map(Scalar::abs) {
            for v in &mut self.coeffs {
                *v = &*v / &c;
            }
            self.bound = &self.bound / &c;
        }
        self
    }
}

/// Exact Fourier–Motzkin elimination. Returns a point satisfying every
/// inequality, or `None` when the system is infeasible. Worst-case
/// exponential in the dimension.
pub fn feasible_point(system: &[Inequality], dim: usize) -> Option<Vec<Scalar>> {
    // levels[j] involves only variables 0..j (exclusive of later ones).
    let mut levels: Vec<Vec<Inequality>> = vec![Vec::new(); dim + 1];
    let mut current: Vec<Inequality> = system.iter().cloned().map(Inequality::normalized).collect();
    dedup(&mut current);
    for j in (0..dim).rev() {
        levels[j + 1] = current.clone();
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for q in current {
            if q.coeffs[j].is_positive() {
                pos.push(q);
            } else if q.coeffs[j].is_negative() {
                neg.push(q);
            } else {
                rest.push(q);
            }
        }
        for p in &pos {
            for n in &neg {
                // p/p_j + n/|n_j| cancels variable j.
                let (pj, nj) = (p.coeffs[j].clone(), n.coeffs[j].abs());
                let coeffs = p.coeffs.iter().zip(&n.coeffs).map(|(a, b)| &(a / &pj) + &(b / &nj)).collect();
                let bound = &(&p.bound / &pj) + &(&n.bound / &nj);
                rest.push(Inequality { coeffs, bound }.normalized());
            }
        }
        dedup(&mut rest);
        current = rest;
    }
    if current.iter().any(|q| q.bound.is_negative()) {
        return None;
    }
    let mut point: Vec<Scalar> = Vec::with_capacity(dim);
    for j in 0..dim {
        let (mut lo, mut hi): (Option<Scalar>, Option<Scalar>) = (None, None);
        for q in &levels[j + 1] {
            let c = &q.coeffs[j];
            if c.is_zero() {
                continue;
            }
            let known = q.coeffs[..j].iter().zip(&point).fold(Scalar::zero(), |acc, (a, v)| &acc + &(a * v));
            let limit = &(&q.bound - &known) / c;
            if c.is_positive() {
                hi = Some(hi.map_or(limit.clone(), |h| h.min(limit)));
            } else {
                lo = Some(lo.map_or(limit.clone(), |l| l.max(limit)));
            }
        }
        let zero = Scalar::zero();
        let v = match (lo, hi) {
            (Some(l), Some(h)) => {
                debug_assert!(l <= h, "elimination guarantees a nonempty range");
                if l <= zero && zero <= h {
                    zero
                } else if l > zero {
                    l
                } else {
                    h
                }
            }
            (Some(l), None) => l.max(zero),
            (None, Some(h)) => h.min(zero),
            (None, None) => zero,
        };
        point.push(v);
    }
    debug_assert!(system.iter().all(|q| q.holds(&point)));
    Some(point)
}

fn dedup(v: &mut Vec<Inequality>) {
    v.sort_by(|a, b| a.coeffs.cmp(&b.coeffs).then(a.bound.cmp(&b.bound)));
    // Same direction: keep the tightest bound.
    v.dedup_by(|later, earlier| later.coeffs == earlier.coeffs);
    v.retain(|q| !(q.coeffs.iter().all(Scalar::is_zero) && !q.bound.is_negative()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ineq(c: &[i64], b: i64) -> Inequality {
        Inequality { coeffs: c.iter().map(|&v| Scalar::int(v)).collect(), bound: Scalar::int(b) }
    }

    #[test]
    fn box_and_infeasible() {
        let sys = vec![ineq(&[1, 0], 3), ineq(&[-1, 0], -1), ineq(&[0, 1], 2), ineq(&[1, 1], 4)];
        let p = feasible_point(&sys, 2).unwrap();
        assert!(sys.iter().all(|q| q.holds(&p)));
        let bad = vec![ineq(&[1, 1], 1), ineq(&[-1, 0], -1), ineq(&[0, -1], -1)];
        assert!(feasible_point(&bad, 2).is_none());
    }

    // Brute-force oracle: integer grid search finds a point whenever one exists
    // among small integers; FM must agree whenever the grid finds one.
    proptest! {
        #[test]
        fn agrees_with_grid_search(rows in proptest::collection::vec((proptest::collection::vec(-3i64..=3, 2), -4i64..=4), 1..6)) {
            let sys: Vec<Inequality> = rows.iter().map(|(c, b)| ineq(c, *b)).collect();
            let grid_hit = (-8..=8).any(|x| (-8..=8).any(|y| sys.iter().all(|q| q.holds(&[Scalar::int(x), Scalar::int(y)]))));
            let fm = feasible_point(&sys, 2);
            if grid_hit {
                prop_assert!(fm.is_some());
            }
            if let Some(p) = fm {
                prop_assert!(sys.iter().all(|q| q.holds(&p)));
            }
        }
    }
}
