//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Solves `min cᵀz s.t. Az = b, z ≥ 0`. Redundant equality rows are detected
//! at the end of phase one and dropped.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Smallest magnitude accepted as a pivot element.
    pub pivot_tol: f64,
    /// Reduced costs below `-cost_tol` make a column eligible to enter.
    pub cost_tol: f64,
    /// Phase-one objective above this means infeasible.
    pub feasibility_tol: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tol: 1e-9,
            cost_tol: 1e-10,
            feasibility_tol: 1e-7,
            max_pivots: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    width: usize, // columns incl. rhs
    data: Vec<f64>,
    obj: Vec<f64>, // reduced costs, last entry = -objective
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (a, b) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * b;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (a, b) in self.obj.iter_mut().zip(prow.iter()) {
                *a -= f * b;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on columns `0..eligible`.
    fn optimize(
        &mut self,
        eligible: usize,
        opts: &SimplexOptions,
        pivots: &mut usize,
    ) -> Result<()> {
        loop {
            let Some(c) = (0..eligible).find(|&j| self.obj[j] < -opts.cost_tol) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize, usize)> = None; // ratio, basis var, row
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > opts.pivot_tol {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match best {
                        None => true,
                        Some((br, bv, _)) => {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < bv)
                        }
                    };
                    if better {
                        best = Some((ratio, self.basis[i], i));
                    }
                }
            }
            let Some((_, _, r)) = best else {
                return Err(Error::Solver("LP is unbounded".into()));
            };
            self.pivot(r, c);
            *pivots += 1;
            if *pivots > opts.max_pivots {
                return Err(Error::Solver(format!(
                    "simplex exceeded pivot budget of {}",
                    opts.max_pivots
                )));
            }
        }
    }
}

/// `a` is dense, one inner vector per equality row.
pub fn solve(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    opts: &SimplexOptions,
) -> Result<SimplexSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Solver("inconsistent LP dimensions".into()));
    }
    // phase one: artificials n..n+m, rhs last
    let width = n + m + 1;
    let mut data = vec![0.0; m * width];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut data[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[width - 1] = sign * b[i];
    }
    let mut obj = vec![0.0; width];
    for i in 0..m {
        for j in 0..n {
            obj[j] -= data[i * width + j];
        }
        obj[width - 1] -= data[i * width + width - 1];
    }
    let mut t = Tableau {
        rows: m,
        width,
        data,
        obj,
        basis: (n..n + m).collect(),
    };
    let mut pivots = 0;
    t.optimize(n, opts, &mut pivots)?;
    let infeasibility = -t.obj[width - 1];
    if infeasibility > opts.feasibility_tol {
        return Err(Error::Solver(format!(
            "LP infeasible (phase-one residual {infeasibility:e})"
        )));
    }

    // drive artificials out of the basis; rows that cannot be pivoted are redundant
    let mut keep = vec![true; m];
    for i in 0..m {
        if t.basis[i] >= n {
            let col = (0..n)
                .filter(|&j| t.at(i, j).abs() > opts.pivot_tol)
                .max_by(|&p, &q| t.at(i, p).abs().total_cmp(&t.at(i, q).abs()));
            match col {
                Some(j) => {
                    t.pivot(i, j);
                    pivots += 1;
                }
                None => keep[i] = false,
            }
        }
    }

    // phase two on a compacted tableau without artificial columns
    let rows: Vec<usize> = (0..m).filter(|&i| keep[i]).collect();
    let w2 = n + 1;
    let mut data = Vec::with_capacity(rows.len() * w2);
    let mut basis = Vec::with_capacity(rows.len());
    for &i in &rows {
        data.extend_from_slice(&t.data[i * width..i * width + n]);
        data.push(t.rhs(i));
        basis.push(t.basis[i]);
    }
    let mut obj = vec![0.0; w2];
    obj[..n].copy_from_slice(c);
    let mut t2 = Tableau {
        rows: rows.len(),
        width: w2,
        data,
        obj,
        basis,
    };
    for r in 0..t2.rows {
        let cb = c[t2.basis[r]];
        if cb != 0.0 {
            for j in 0..w2 {
                t2.obj[j] -= cb * t2.data[r * w2 + j];
            }
        }
    }
    t2.optimize(n, opts, &mut pivots)?;

    let mut x = vec![0.0; n];
    for r in 0..t2.rows {
        x[t2.basis[r]] = t2.rhs(r).max(0.0);
    }
    let objective = x.iter().zip(c).map(|(a, b)| a * b).sum();
    Ok(SimplexSolution {
        x,
        objective,
        pivots,
    })
}
