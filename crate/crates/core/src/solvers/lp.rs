use super::{simplex, Certificate, SolverConfig, SolverOutput, INTEGRALITY_TOL};
use crate::error::{Error, Result};
use crate::model::GraphicalModel;
use crate::polytope::{build_lp, Marginals, PolytopeLp};

#[derive(Clone, Debug)]
pub struct LpResult {
    pub marginals: Marginals,
    pub value: f64,
    pub output: SolverOutput,
    pub lp: PolytopeLp,
    /// Optimal vertex in LP variable order.
    pub vertex: Vec<f64>,
}

/// Solves the local-polytope relaxation to an optimal vertex. Nodes whose
/// marginal is 0/1 within [`INTEGRALITY_TOL`] are committed, others get `#`.
pub fn solve_lp_exact(model: &GraphicalModel, cfg: &SolverConfig) -> Result<LpResult> {
    let lp = build_lp(model);
    if lp.num_vars > cfg.lp_max_vars {
        return Err(Error::Solver(format!(
            "LP has {} variables, cap is {}",
            lp.num_vars, cfg.lp_max_vars
        )));
    }
    let sol =
        simplex::solve(&lp.dense_matrix(), &lp.rhs, &lp.cost, &cfg.simplex).map_err(
            |e| match e {
                Error::Solver(msg) if msg.contains("infeasible") || msg.contains("unbounded") => {
                    Error::Solver(format!("internal error: local polytope reported {msg}"))
                }
                e => e,
            },
        )?;
    let vertex: Vec<f64> = sol
        .x
        .iter()
        .map(|&z| if z.abs() < 1e-8 { 0.0 } else { z })
        .collect();
    let marginals = lp.unflatten(model, &vertex);
    let labels = (0..model.num_nodes())
        .map(|v| marginals.integral_label(v, INTEGRALITY_TOL))
        .collect();
    Ok(LpResult {
        output: SolverOutput {
            labels,
            bound: sol.objective,
            certificate: Certificate::ExactLp,
            iterations: sol.pivots,
        },
        value: sol.objective,
        marginals,
        lp,
        vertex,
    })
}

/// Maximum of `Σ weights·z` over the optimal face `{z ∈ Λ : cᵀz ≤ value + tol}`.
pub fn max_over_optimal_face(
    lp: &PolytopeLp,
    value: f64,
    weights: &[f64],
    cfg: &SolverConfig,
) -> Result<f64> {
    let n = lp.num_vars;
    let mut a = lp.dense_matrix();
    for row in &mut a {
        row.push(0.0);
    }
    let mut cap_row = lp.cost.clone();
    cap_row.push(1.0);
    a.push(cap_row);
    let mut b = lp.rhs.clone();
    b.push(value + cfg.tol * (1.0 + value.abs()));
    let mut c: Vec<f64> = weights.iter().map(|w| -w).collect();
    c.resize(n + 1, 0.0);
    let sol = simplex::solve(&a, &b, &c, &cfg.simplex)?;
    Ok(-sol.objective)
}

/// Whether the vertex found by [`solve_lp_exact`] is the only optimum.
///
/// A vertex is the unique point of the polytope supported on its support, so
/// it is the unique optimum iff no optimal point puts mass outside it.
pub fn lp_optimum_is_unique(res: &LpResult, cfg: &SolverConfig) -> Result<bool> {
    let weights: Vec<f64> = res
        .vertex
        .iter()
        .map(|&z| if z == 0.0 { 1.0 } else { 0.0 })
        .collect();
    Ok(max_over_optimal_face(&res.lp, res.value, &weights, cfg)? <= 1e-6)
}
