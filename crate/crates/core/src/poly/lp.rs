//! Exact two-phase primal simplex over rationals with Bland's rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Infeasible,
    Unbounded,
    Optimal(Q),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Le,
    Eq,
}

/// A dense row `Σ coeffs[j]·x_j op rhs` over free variables.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<Q>,
    pub op: RowOp,
    pub rhs: Q,
}

pub fn q(n: impl Into<BigInt>) -> Q {
    BigRational::from_integer(n.into())
}

struct Tableau {
    /// `rows[i]` has `ncols` entries followed by the right-hand side.
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut Vec<Q>) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x / &p;
            }
        }
        let nz: Vec<usize> = (0..=self.ncols)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] = &row[j] - &f * &prow[j];
            }
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for &j in &nz {
                obj[j] = &obj[j] - &f * &prow[j];
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes with reduced-cost row `obj` (entries `z_j − c_j`, last entry
    /// the objective value). Returns false when unbounded.
    fn optimize(&mut self, obj: &mut Vec<Q>, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.ncols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c, obj),
            }
        }
    }

    fn objective_row(&self, cost: &[Q]) -> Vec<Q> {
        let mut obj: Vec<Q> = cost.iter().map(|c| -c).collect();
        obj.push(Q::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    obj[j] = &obj[j] + cb * x;
                }
            }
        }
        obj
    }
}

/// Maximizes `obj·x` subject to `rows`, all variables free.
pub fn maximize(nvars: usize, obj: &[Q], rows: &[Row]) -> LpResult {
    let m = rows.len();
    let nslack = rows.iter().filter(|r| r.op == RowOp::Le).count();
    // columns: x⁺ (nvars), x⁻ (nvars), slacks, artificials
    let base_cols = 2 * nvars + nslack;
    let mut need_art = Vec::new();
    let mut tab_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack = 2 * nvars;
    for r in rows {
        let flip = r.rhs.is_negative();
        let sgn = |x: &Q| if flip { -x } else { x.clone() };
        let mut row = vec![Q::zero(); base_cols];
        for (j, c) in r.coeffs.iter().enumerate() {
            if !c.is_zero() {
                row[j] = sgn(c);
                row[nvars + j] = -sgn(c);
            }
        }
        let mut basic = None;
        if r.op == RowOp::Le {
            row[slack] = if flip { q(-1) } else { q(1) };
            if !flip {
                basic = Some(slack);
            }
            slack += 1;
        }
        row.push(sgn(&r.rhs));
        need_art.push(basic.is_none());
        basis.push(basic.unwrap_or(usize::MAX));
        tab_rows.push(row);
    }
    let nart = need_art.iter().filter(|&&b| b).count();
    let ncols = base_cols + nart;
    let mut art = base_cols;
    for (i, row) in tab_rows.iter_mut().enumerate() {
        let rhs = row.pop().unwrap_or_default();
        row.resize(ncols, Q::zero());
        if need_art[i] {
            row[art] = q(1);
            basis[i] = art;
            art += 1;
        }
        row.push(rhs);
    }
    let mut t = Tableau {
        rows: tab_rows,
        basis,
        ncols,
    };

    if nart > 0 {
        let mut cost = vec![Q::zero(); ncols];
        for c in cost.iter_mut().skip(base_cols) {
            *c = q(-1);
        }
        let mut obj = t.objective_row(&cost);
        t.optimize(&mut obj, ncols);
        if obj[ncols].is_negative() {
            return LpResult::Infeasible;
        }
        // drive artificial variables out of the basis
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= base_cols {
                match (0..base_cols).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        let mut dummy = vec![Q::zero(); ncols + 1];
                        t.pivot(i, j, &mut dummy);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        for row in t.rows.iter_mut() {
            let rhs = row[ncols].clone();
            row.truncate(base_cols);
            row.push(rhs);
        }
        t.ncols = base_cols;
    }

    let mut cost = vec![Q::zero(); t.ncols];
    for (j, c) in obj.iter().enumerate() {
        cost[j] = c.clone();
        cost[nvars + j] = -c;
    }
    let mut objrow = t.objective_row(&cost);
    if !t.optimize(&mut objrow, t.ncols) {
        return LpResult::Unbounded;
    }
    LpResult::Optimal(objrow[t.ncols].clone())
}

/// Feasibility only.
pub fn feasible(nvars: usize, rows: &[Row]) -> bool {
    maximize(nvars, &vec![Q::zero(); nvars], rows) != LpResult::Infeasible
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: &[i64], op: RowOp, rhs: i64) -> Row {
        Row {
            coeffs: c.iter().map(|&x| q(x)).collect(),
            op,
            rhs: q(rhs),
        }
    }

    #[test]
    fn bounded_box() {
        let rows = [
            row(&[1, 0], RowOp::Le, 3),
            row(&[0, 1], RowOp::Le, 4),
            row(&[-1, 0], RowOp::Le, 0),
            row(&[0, -1], RowOp::Le, 0),
        ];
        assert_eq!(maximize(2, &[q(1), q(1)], &rows), LpResult::Optimal(q(7)));
        assert_eq!(maximize(2, &[q(-1), q(0)], &rows), LpResult::Optimal(q(0)));
    }

    #[test]
    fn unbounded_and_infeasible() {
        let rows = [row(&[1, -1], RowOp::Le, 0)];
        assert_eq!(maximize(2, &[q(1), q(0)], &rows), LpResult::Unbounded);
        let rows = [row(&[1], RowOp::Le, -1), row(&[-1], RowOp::Le, 0)];
        assert_eq!(maximize(1, &[q(1)], &rows), LpResult::Infeasible);
    }

    #[test]
    fn equalities_and_fractions() {
        // x + y = 1, x - y = 0  →  x = 1/2
        let rows = [row(&[1, 1], RowOp::Eq, 1), row(&[1, -1], RowOp::Eq, 0)];
        assert_eq!(
            maximize(2, &[q(1), q(0)], &rows),
            LpResult::Optimal(BigRational::new(1.into(), 2.into()))
        );
    }

    #[test]
    fn negative_rhs_equality() {
        let rows = [row(&[1], RowOp::Eq, -3)];
        assert_eq!(maximize(1, &[q(1)], &rows), LpResult::Optimal(q(-3)));
    }
}
