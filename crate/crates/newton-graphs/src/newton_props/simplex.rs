//! A small exact simplex solver over arbitrary-precision rationals, used to
//! maximize the minimum sector angle subject to the unit row-sum equalities.
//! Two-phase, Bland's rule, dense tableau; problem sizes here are a few
//! dozen rows and columns.

use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

/// min c^T x subject to A x = b, x >= 0. `b` must be componentwise >= 0.
pub struct StandardLp {
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<BigRational>,
    pub c: Vec<BigRational>,
}

pub enum LpOutcome {
    Infeasible,
    Optimal {
        value: BigRational,
        x: Vec<BigRational>,
    },
}

struct Tableau {
    a: Vec<Vec<BigRational>>,
    b: Vec<BigRational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            *v = &*v / &p;
        }
        self.b[row] = &self.b[row] / &p;
        for r in 0..self.a.len() {
            if r == row || self.a[r][col].is_zero() {
                continue;
            }
            let f = self.a[r][col].clone();
            for j in 0..self.a[r].len() {
                let delta = &f * &self.a[row][j];
                self.a[r][j] = &self.a[r][j] - &delta;
            }
            let delta = &f * &self.b[row];
            self.b[r] = &self.b[r] - &delta;
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column = smallest index with negative reduced
    /// cost, leaving row = smallest basis index among the minimal ratios.
    /// Returns false if optimal, panics on unboundedness (our objectives are
    /// bounded by construction).
    fn simplex(&mut self, cost: &[BigRational], active: &[bool]) {
        loop {
            // Reduced costs via the basic cost multipliers.
            let m = self.a.len();
            let n = cost.len();
            let mut entering = None;
            for j in 0..n {
                if !active[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j].clone();
                for r in 0..m {
                    if !cost[self.basis[r]].is_zero() {
                        let delta = &cost[self.basis[r]] * &self.a[r][j];
                        red = red - delta;
                    }
                }
                if red.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return };
            let mut leave: Option<(usize, BigRational)> = None;
            for r in 0..m {
                if self.a[r][col].is_positive() {
                    let ratio = &self.b[r] / &self.a[r][col];
                    let better = match &leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < *lratio
                                || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let (row, _) = leave.expect("objective is bounded for this problem family");
            self.pivot(row, col);
        }
    }
}

/// Solves the LP exactly. Redundant equality rows are tolerated.
pub fn solve(lp: &StandardLp) -> LpOutcome {
    let m = lp.b.len();
    let n = lp.c.len();
    assert!(lp.b.iter().all(|v| !v.is_negative()));
    let total = n + m;
    let mut a = vec![vec![BigRational::zero(); total]; m];
    for r in 0..m {
        for j in 0..n {
            a[r][j] = lp.a[r][j].clone();
        }
        a[r][n + r] = BigRational::one();
    }
    let mut t = Tableau {
        a,
        b: lp.b.clone(),
        basis: (n..total).collect(),
    };

    // Phase 1: minimize the artificial sum.
    let mut phase1_cost = vec![BigRational::zero(); total];
    for j in n..total {
        phase1_cost[j] = BigRational::one();
    }
    let active = vec![true; total];
    t.simplex(&phase1_cost, &active);
    let residual: BigRational = t
        .basis
        .iter()
        .zip(&t.b)
        .filter(|(&bv, _)| bv >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if !residual.is_zero() {
        return LpOutcome::Infeasible;
    }
    // Pivot lingering zero-level artificials out where possible; rows that
    // cannot be pivoted are redundant and kept inert.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| !t.a[r][j].is_zero()) {
                t.pivot(r, col);
            }
        }
    }

    // Phase 2 over the original columns only.
    let mut phase2_cost = vec![BigRational::zero(); total];
    phase2_cost[..n].clone_from_slice(&lp.c);
    let mut active = vec![false; total];
    for a in active.iter_mut().take(n) {
        *a = true;
    }
    // Keep residual artificial basics (redundant rows) pinned at zero.
    for r in 0..m {
        if t.basis[r] >= n {
            debug_assert!(t.b[r].is_zero());
        }
    }
    t.simplex(&phase2_cost, &active);

    let mut x = vec![BigRational::zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.b[r].clone();
        }
    }
    let value = lp
        .c
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum::<BigRational>();
    LpOutcome::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solves_a_tiny_transportation_system() {
        // x1 + x2 = 1, x2 + x3 = 1, min -x3; optimum x = (1, 0, 1).
        let lp = StandardLp {
            a: vec![
                vec![rat(1, 1), rat(1, 1), rat(0, 1)],
                vec![rat(0, 1), rat(1, 1), rat(1, 1)],
            ],
            b: vec![rat(1, 1), rat(1, 1)],
            c: vec![rat(0, 1), rat(0, 1), rat(-1, 1)],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, rat(-1, 1));
                assert_eq!(x[2], rat(1, 1));
            }
            LpOutcome::Infeasible => panic!("feasible system"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x1 = 1 and x1 = 2 cannot both hold.
        let lp = StandardLp {
            a: vec![vec![rat(1, 1)], vec![rat(1, 1)]],
            b: vec![rat(1, 1), rat(2, 1)],
            c: vec![rat(0, 1)],
        };
        assert!(matches!(solve(&lp), LpOutcome::Infeasible));
    }

    #[test]
    fn tolerates_redundant_rows() {
        // Duplicate constraint x1 + x2 = 1.
        let lp = StandardLp {
            a: vec![
                vec![rat(1, 1), rat(1, 1)],
                vec![rat(1, 1), rat(1, 1)],
            ],
            b: vec![rat(1, 1), rat(1, 1)],
            c: vec![rat(-1, 1), rat(0, 1)],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(-1, 1)),
            LpOutcome::Infeasible => panic!("feasible system"),
        }
    }
}
