//! Overcomplete marginal representation and the local polytope.
//!
//! Node marginals exist for every node; factor marginals for every factor.
//! Unary factors share their marginal with the node, so the LP only carries
//! variables for node marginals and for factors of arity two or more.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling};

/// Residual tolerance when testing membership in the local polytope.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub nodes: Vec<Vec<f64>>,
    pub factors: Vec<Vec<f64>>,
}

impl Marginals {
    fn check_shape(&self, model: &GraphicalModel) -> Result<()> {
        let ok = self.nodes.len() == model.num_nodes()
            && self.factors.len() == model.num_factors()
            && self
                .nodes
                .iter()
                .enumerate()
                .all(|(v, m)| m.len() == model.label_count(v))
            && self
                .factors
                .iter()
                .zip(model.factors())
                .all(|(m, f)| m.len() == f.table().len());
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("marginals do not match model shape".into()))
        }
    }

    /// Label `l` with `μ_v(l) ≥ 1 - tol`, if the node marginal is integral.
    pub fn integral_label(&self, v: usize, tol: f64) -> Option<usize> {
        let m = &self.nodes[v];
        let l = m.iter().position(|&p| p >= 1.0 - tol)?;
        m.iter()
            .enumerate()
            .all(|(i, &p)| i == l || p.abs() <= tol)
            .then_some(l)
    }
}

/// Indicator marginals `δ(x)`.
pub fn delta(model: &GraphicalModel, x: &Labeling) -> Result<Marginals> {
    model.validate_labeling(x)?;
    let nodes = (0..model.num_nodes())
        .map(|v| {
            let mut m = vec![0.0; model.label_count(v)];
            m[x.0[v]] = 1.0;
            m
        })
        .collect();
    let factors = (0..model.num_factors())
        .map(|f| {
            let mut m = vec![0.0; model.factor(f).table().len()];
            m[model.table_index(f, |v| x.0[v])] = 1.0;
            m
        })
        .collect();
    Ok(Marginals { nodes, factors })
}

/// `⟨θ, μ⟩` summed over all factors (unaries included as arity-1 factors).
pub fn linear_energy(model: &GraphicalModel, mu: &Marginals) -> Result<f64> {
    mu.check_shape(model)?;
    Ok(model
        .factors()
        .iter()
        .zip(&mu.factors)
        .map(|(f, m)| f.table().iter().zip(m).map(|(t, p)| t * p).sum::<f64>())
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    pub normalization: f64,
    pub marginalization: f64,
    pub min_entry: f64,
}

impl Residuals {
    pub fn feasible(&self, tol: f64) -> bool {
        self.normalization <= tol && self.marginalization <= tol && self.min_entry >= -tol
    }
}

/// Maximum violations of the local-polytope constraints. A factor marginal
/// summed over all scope nodes but one must equal that node's marginal.
pub fn constraint_residuals(model: &GraphicalModel, mu: &Marginals) -> Result<Residuals> {
    mu.check_shape(model)?;
    let normalization = mu
        .nodes
        .iter()
        .map(|m| (m.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let mut marginalization: f64 = 0.0;
    for (f, factor) in model.factors().iter().enumerate() {
        for (pos, &v) in factor.scope().iter().enumerate() {
            let mut sums = vec![0.0; model.label_count(v)];
            for (idx, &p) in mu.factors[f].iter().enumerate() {
                let l = (idx / model.strides(f)[pos]) % model.label_count(v);
                sums[l] += p;
            }
            for (s, n) in sums.iter().zip(&mu.nodes[v]) {
                marginalization = marginalization.max((s - n).abs());
            }
        }
    }
    let min_entry = mu
        .nodes
        .iter()
        .chain(&mu.factors)
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(Residuals {
        normalization,
        marginalization,
        min_entry: if min_entry.is_finite() {
            min_entry
        } else {
            0.0
        },
    })
}

/// Standard-form LP `min cᵀz s.t. Az = b, z ≥ 0` whose feasible set is the
/// local polytope of a model.
#[derive(Clone, Debug)]
pub struct PolytopeLp {
    pub num_vars: usize,
    /// Offset of node `v`'s marginal block.
    pub node_offset: Vec<usize>,
    /// Offset of factor `f`'s block; `None` for unary factors, which reuse the node block.
    pub factor_offset: Vec<Option<usize>>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
}

impl PolytopeLp {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Dense copy of the constraint matrix.
    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.num_vars];
                for &(j, a) in r {
                    d[j] += a;
                }
                d
            })
            .collect()
    }

    pub fn flatten(&self, model: &GraphicalModel, mu: &Marginals) -> Result<Vec<f64>> {
        mu.check_shape(model)?;
        let mut z = vec![0.0; self.num_vars];
        for (v, m) in mu.nodes.iter().enumerate() {
            z[self.node_offset[v]..self.node_offset[v] + m.len()].copy_from_slice(m);
        }
        for (f, m) in mu.factors.iter().enumerate() {
            if let Some(off) = self.factor_offset[f] {
                z[off..off + m.len()].copy_from_slice(m);
            }
        }
        Ok(z)
    }

    pub fn unflatten(&self, model: &GraphicalModel, z: &[f64]) -> Marginals {
        let nodes: Vec<Vec<f64>> = (0..model.num_nodes())
            .map(|v| z[self.node_offset[v]..self.node_offset[v] + model.label_count(v)].to_vec())
            .collect();
        let factors = model
            .factors()
            .iter()
            .enumerate()
            .map(|(f, factor)| match self.factor_offset[f] {
                Some(off) => z[off..off + factor.table().len()].to_vec(),
                None => nodes[factor.scope()[0]].clone(),
            })
            .collect();
        Marginals { nodes, factors }
    }

    /// Largest `|Az - b|` and the most negative entry of `z`.
    pub fn residual(&self, z: &[f64]) -> (f64, f64) {
        let r = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().map(|&(j, a)| a * z[j]).sum::<f64>() - b).abs())
            .fold(0.0, f64::max);
        (r, z.iter().copied().fold(0.0, f64::min))
    }
}

/// Builds the local-polytope LP: one normalization row per node and one
/// marginalization row per (factor of arity ≥ 2, scope node, label).
pub fn build_lp(model: &GraphicalModel) -> PolytopeLp {
    let mut num_vars = 0;
    let mut node_offset = Vec::with_capacity(model.num_nodes());
    for v in 0..model.num_nodes() {
        node_offset.push(num_vars);
        num_vars += model.label_count(v);
    }
    let mut factor_offset = Vec::with_capacity(model.num_factors());
    for factor in model.factors() {
        if factor.arity() >= 2 {
            factor_offset.push(Some(num_vars));
            num_vars += factor.table().len();
        } else {
            factor_offset.push(None);
        }
    }
    let mut cost = vec![0.0; num_vars];
    for (f, factor) in model.factors().iter().enumerate() {
        let off = factor_offset[f].unwrap_or(node_offset[factor.scope()[0]]);
        for (i, t) in factor.table().iter().enumerate() {
            cost[off + i] += t;
        }
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for v in 0..model.num_nodes() {
        rows.push(
            (0..model.label_count(v))
                .map(|l| (node_offset[v] + l, 1.0))
                .collect(),
        );
        rhs.push(1.0);
    }
    for (f, factor) in model.factors().iter().enumerate() {
        let Some(off) = factor_offset[f] else {
            continue;
        };
        for (pos, &v) in factor.scope().iter().enumerate() {
            let k = model.label_count(v);
            let stride = model.strides(f)[pos];
            for l in 0..k {
                let mut row: Vec<(usize, f64)> = (0..factor.table().len())
                    .filter(|idx| (idx / stride) % k == l)
                    .map(|idx| (off + idx, 1.0))
                    .collect();
                row.push((node_offset[v] + l, -1.0));
                rows.push(row);
                rhs.push(0.0);
            }
        }
    }
    PolytopeLp {
        num_vars,
        node_offset,
        factor_offset,
        rows,
        rhs,
        cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> GraphicalModel {
        GraphicalModel::new(
            vec![2, 2],
            vec![
                (vec![0], vec![0.0, 1.0]),
                (vec![1], vec![1.0, 0.0]),
                (vec![0, 1], vec![0.0, 2.0, 2.0, 0.0]),
            ],
        )
        .unwrap()
    }

    fn uniform_chain_marginals() -> Marginals {
        Marginals {
            nodes: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            factors: vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.25; 4]],
        }
    }

    #[test]
    fn delta_examples() {
        let one = GraphicalModel::new(vec![2], vec![]).unwrap();
        assert_eq!(
            delta(&one, &Labeling(vec![1])).unwrap().nodes,
            vec![vec![0.0, 1.0]]
        );
        let d = delta(&chain(), &Labeling(vec![0, 1])).unwrap();
        assert_eq!(d.factors[2], vec![0.0, 1.0, 0.0, 0.0]);
        let r = constraint_residuals(&chain(), &d).unwrap();
        assert_eq!(
            (r.normalization, r.marginalization, r.min_entry),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn linear_energy_examples() {
        let m = chain();
        for x in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let x = Labeling(x.to_vec());
            assert_eq!(
                linear_energy(&m, &delta(&m, &x).unwrap()).unwrap(),
                m.energy(&x).unwrap()
            );
        }
        assert_eq!(linear_energy(&m, &uniform_chain_marginals()).unwrap(), 2.0);
        let zero = GraphicalModel::new(vec![2, 2], vec![(vec![0, 1], vec![0.0; 4])]).unwrap();
        let mu = Marginals {
            nodes: vec![vec![0.3, 0.7], vec![0.5, 0.5]],
            factors: vec![vec![0.1, 0.2, 0.4, 0.3]],
        };
        assert_eq!(linear_energy(&zero, &mu).unwrap(), 0.0);
    }

    #[test]
    fn residual_examples() {
        let r = constraint_residuals(&chain(), &uniform_chain_marginals()).unwrap();
        assert_eq!((r.normalization, r.marginalization), (0.0, 0.0));
        assert_eq!(r.min_entry, 0.25);
        assert!(r.feasible(FEASIBILITY_TOL));

        let one = GraphicalModel::new(vec![2], vec![]).unwrap();
        let bad = Marginals {
            nodes: vec![vec![0.7, 0.7]],
            factors: vec![],
        };
        let r = constraint_residuals(&one, &bad).unwrap();
        assert!((r.normalization - 0.4).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let bad = Marginals {
            nodes: vec![vec![1.0]],
            factors: vec![],
        };
        assert!(linear_energy(&chain(), &bad).is_err());
    }

    #[test]
    fn lp_sizes() {
        let one = GraphicalModel::new(vec![5], vec![(vec![0], vec![1.0; 5])]).unwrap();
        let lp = build_lp(&one);
        assert_eq!((lp.num_vars, lp.num_rows()), (5, 1));

        let pair = GraphicalModel::new(vec![2, 2], vec![(vec![0, 1], vec![0.0; 4])]).unwrap();
        let lp = build_lp(&pair);
        assert_eq!((lp.num_vars, lp.num_rows()), (8, 6));
    }

    #[test]
    fn indicator_is_lp_feasible_and_round_trips() {
        let mut t = vec![0.0; 12];
        t[5] = 1.0;
        let m = GraphicalModel::new(
            vec![2, 3, 2],
            vec![
                (vec![0, 1, 2], t),
                (vec![1], vec![1.0, 2.0, 3.0]),
                (vec![0, 2], vec![0.0; 4]),
            ],
        )
        .unwrap();
        let lp = build_lp(&m);
        let d = delta(&m, &Labeling(vec![1, 2, 0])).unwrap();
        let z = lp.flatten(&m, &d).unwrap();
        assert_eq!(lp.residual(&z), (0.0, 0.0));
        assert_eq!(lp.unflatten(&m, &z), d);
        let c: f64 = lp.cost.iter().zip(&z).map(|(a, b)| a * b).sum();
        assert_eq!(c, m.energy(&Labeling(vec![1, 2, 0])).unwrap());
    }

    #[test]
    fn integral_label_detection() {
        let mu = Marginals {
            nodes: vec![vec![0.0, 1.0 - 1e-9, 1e-9], vec![0.5, 0.5]],
            factors: vec![],
        };
        assert_eq!(mu.integral_label(0, 1e-6), Some(1));
        assert_eq!(mu.integral_label(1, 1e-6), None);
    }
}
