//! Dense tableau simplex for tiny linear programs of the form
//! `maximize c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The origin is always feasible, so no phase one is needed. Bland's rule
//! (lowest index entering and leaving) rules out cycling on the heavily
//! degenerate homogeneous systems produced by dichotomy feasibility.

const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Unbounded,
    /// Pivot limit hit; should not happen with Bland's rule.
    Stalled,
}

pub(crate) fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let rows = a.len();
    let vars = c.len();
    debug_assert_eq!(b.len(), rows);
    debug_assert!(b.iter().all(|v| *v >= 0.0));
    let width = vars + rows + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0; width]; rows + 1];
    for i in 0..rows {
        t[i][..vars].copy_from_slice(&a[i]);
        t[i][vars + i] = 1.0;
        t[i][rhs] = b[i];
    }
    for j in 0..vars {
        t[rows][j] = -c[j];
    }
    let mut basis: Vec<usize> = (vars..vars + rows).collect();

    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..width - 1).find(|&j| t[rows][j] < -PIVOT_EPS) else {
            let mut x = vec![0.0; vars];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < vars {
                    x[bv] = t[i][rhs];
                }
            }
            return LpOutcome::Optimal {
                value: t[rows][rhs],
                x,
            };
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let coef = t[i][enter];
            if coef > PIVOT_EPS {
                let ratio = t[i][rhs] / coef;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - PIVOT_EPS || (ratio <= lr + PIVOT_EPS && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            return LpOutcome::Unbounded;
        };
        let pv = t[pr][enter];
        t[pr].iter_mut().for_each(|v| *v /= pv);
        let pivot_row = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pr {
                let f = row[enter];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
        basis[pr] = enter;
    }
    LpOutcome::Stalled
}
