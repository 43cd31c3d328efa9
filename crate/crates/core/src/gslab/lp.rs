//! Exact feasibility of `A p <= b, p >= 0`.
//!
//! The system has few unknowns and many rows, so we run the simplex method
//! on the dual `min b.y  s.t.  A^T y >= 0, y >= 0`, whose tableau has one
//! row per unknown. The dual is a cone: its optimum is 0 exactly when the
//! primal is feasible, and otherwise it has a ray that is a Farkas
//! certificate. Bland's rule keeps the (fully degenerate) pivots finite.

use crate::rat::Rat;

/// Rows `(a, b)` meaning `a . p <= b`, over `num_vars` nonnegative unknowns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub rows: Vec<(Vec<Rat>, Rat)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// A solution `p >= 0`.
    Feasible(Vec<Rat>),
    /// Row multipliers `y >= 0` with `y^T A >= 0` and `y . b < 0`.
    Infeasible(Vec<Rat>),
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, a: Vec<Rat>, b: Rat) {
        assert_eq!(a.len(), self.num_vars, "row width");
        self.rows.push((a, b));
    }

    pub fn satisfied_by(&self, p: &[Rat]) -> bool {
        p.len() == self.num_vars
            && p.iter().all(|x| !x.is_negative())
            && self.rows.iter().all(|(a, b)| dot(a, p) <= *b)
    }

    /// Whether `y` certifies infeasibility.
    pub fn refuted_by(&self, y: &[Rat]) -> bool {
        if y.len() != self.rows.len() || y.iter().any(|v| v.is_negative()) {
            return false;
        }
        let rhs: Rat = self.rows.iter().zip(y).map(|((_, b), yr)| b * yr).sum();
        rhs.is_negative()
            && (0..self.num_vars).all(|j| {
                let col: Rat = self.rows.iter().zip(y).map(|((a, _), yr)| &a[j] * yr).sum();
                !col.is_negative()
            })
    }

    pub fn solve(&self) -> Feasibility {
        let r = self.rows.len();
        let n = self.num_vars;
        let cols = r + n;
        // Row j: -sum_r A[r][j] y_r + s_j = 0, slack s_j basic.
        let mut t: Vec<Vec<Rat>> = (0..n)
            .map(|j| {
                let mut row: Vec<Rat> = self.rows.iter().map(|(a, _)| -&a[j]).collect();
                row.extend((0..n).map(|k| if k == j { Rat::one() } else { Rat::zero() }));
                row
            })
            .collect();
        let mut basis: Vec<usize> = (r..cols).collect();
        // Reduced costs; the basis starts at cost 0.
        let mut d: Vec<Rat> = self.rows.iter().map(|(_, b)| b.clone()).collect();
        d.extend((0..n).map(|_| Rat::zero()));

        loop {
            let Some(enter) = (0..cols).find(|&c| d[c].is_negative()) else {
                // Optimal at 0: the slack reduced costs are primal prices.
                return Feasibility::Feasible(d[r..].to_vec());
            };
            let leave = (0..n)
                .filter(|&j| t[j][enter].is_positive())
                .min_by_key(|&j| basis[j]);
            let Some(leave) = leave else {
                // Unbounded ray: the entering column at 1, basics move by -t.
                // The entering column may be a slack; only the y part is kept.
                let mut y = vec![Rat::zero(); r];
                if enter < r {
                    y[enter] = Rat::one();
                }
                for j in 0..n {
                    if basis[j] < r {
                        y[basis[j]] = -&t[j][enter];
                    }
                }
                return Feasibility::Infeasible(y);
            };
            pivot(&mut t, &mut d, leave, enter);
            basis[leave] = enter;
        }
    }
}

fn dot(a: &[Rat], p: &[Rat]) -> Rat {
    a.iter().zip(p).map(|(x, y)| x * y).sum()
}

fn pivot(t: &mut [Vec<Rat>], d: &mut [Rat], row: usize, col: usize) {
    let piv = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v = &*v / &piv;
    }
    let prow = t[row].clone();
    for (j, other) in t.iter_mut().enumerate() {
        if j == row || other[col].is_zero() {
            continue;
        }
        let f = other[col].clone();
        for (v, pv) in other.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
    let f = d[col].clone();
    if !f.is_zero() {
        for (v, pv) in d.iter_mut().zip(&prow) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(n: usize, rows: &[(&[i64], i64)]) -> LinearSystem {
        let mut s = LinearSystem::new(n);
        for (a, b) in rows {
            s.push(a.iter().map(|&x| Rat::from(x)).collect(), Rat::from(*b));
        }
        s
    }

    #[test]
    fn feasible_box() {
        // p0 + p1 <= 3, -p0 <= -1, -p1 <= -1
        let s = sys(2, &[(&[1, 1], 3), (&[-1, 0], -1), (&[0, -1], -1)]);
        match s.solve() {
            Feasibility::Feasible(p) => assert!(s.satisfied_by(&p)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_with_certificate() {
        // p0 <= 1 and p0 >= 2
        let s = sys(1, &[(&[1], 1), (&[-1], -2)]);
        match s.solve() {
            Feasibility::Infeasible(y) => assert!(s.refuted_by(&y)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_bound_on_zero_row() {
        let s = sys(1, &[(&[0], -1)]);
        assert!(matches!(s.solve(), Feasibility::Infeasible(y) if s.refuted_by(&y)));
    }

    #[test]
    fn ray_entering_on_a_slack() {
        // p0 + p1 >= 1 and 2 p0 + p1 <= 0
        let s = sys(2, &[(&[-1, -1], -1), (&[2, 1], 0)]);
        assert!(matches!(s.solve(), Feasibility::Infeasible(y) if s.refuted_by(&y)));
    }

    #[test]
    fn empty_system_is_feasible() {
        assert_eq!(LinearSystem::new(2).solve(), Feasibility::Feasible(vec![Rat::zero(), Rat::zero()]));
    }
}
