//! Iterative pruning to a persistent partial labeling, and the criterion
//! checks it is built on.

use serde::{Deserialize, Serialize};

use crate::boundary::{
    boundary_sets, build_augmented_model, build_gamma_model, AugmentedModel, Mode,
};
use crate::error::{Error, Result};
use crate::model::{
    apply_reparametrization, optimal_reparametrization, GraphicalModel, Labeling, PartialLabeling,
};
use crate::polytope::{build_lp, Marginals};
use crate::solvers::{
    lp_optimum_is_unique, max_over_optimal_face, solve, solve_bruteforce, solve_lp_exact,
    solve_trws, Certificate, SolverConfig, SolverKind, SolverOutput,
};

/// Relative tolerance when comparing an optimum against a test energy.
pub const CRITERION_TOL: f64 = 1e-7;

/// Largest model accepted by [`strong_persistency_scan`].
pub const SCAN_MAX_NODES: usize = 12;

fn at_least(value: f64, target: f64) -> bool {
    value >= target - CRITERION_TOL * (1.0 + target.abs())
}

/// One solve of the pruning loop. Record 0 is the initial solve over all nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Nodes in the subproblem.
    pub subset_size: usize,
    /// Boundary nodes whose test label was not reproduced.
    pub disagreeing: usize,
    /// Other nodes left uncommitted by the solver.
    pub fractional: usize,
    /// Nodes kept for the next iteration.
    pub kept: usize,
    pub solver_iterations: usize,
    /// Subproblem energy of the test labeling (absent for the initial solve).
    pub test_energy: Option<f64>,
    pub bound: f64,
    pub certificate: Certificate,
    /// Whether the LP optimum was unique, when checked.
    pub unique: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistencyResult {
    pub a_star: Vec<usize>,
    pub x_star: PartialLabeling,
    pub trace: Vec<TraceRecord>,
    pub mode: Mode,
    pub solver: SolverKind,
    /// Loop iterations after the initial solve.
    pub iterations: usize,
}

fn solve_checked(
    model: &GraphicalModel,
    kind: SolverKind,
    cfg: &SolverConfig,
) -> Result<(SolverOutput, Option<bool>)> {
    if kind == SolverKind::ExactLp {
        let res = solve_lp_exact(model, cfg)?;
        let unique = if cfg.check_uniqueness {
            Some(lp_optimum_is_unique(&res, cfg)?)
        } else {
            None
        };
        Ok((res.output, unique))
    } else {
        Ok((solve(model, kind, cfg)?, None))
    }
}

/// Shrinks the committed part of a relaxation solution until it certifies
/// itself on its own boundary.
///
/// With [`Mode::Optimal`] the model is first reparametrized once with the
/// criterion-optimal messages for the initial labeling (extended by label 0).
pub fn prune(
    model: &GraphicalModel,
    solver: SolverKind,
    mode: Mode,
    cfg: &SolverConfig,
) -> Result<PersistencyResult> {
    if mode == Mode::Optimal {
        model.require_pairwise("optimal mode needs a pairwise model")?;
    }
    let n = model.num_nodes();
    let (out0, unique0) = solve_checked(model, solver, cfg)?;
    let mut x = PartialLabeling::from_pairs(
        out0.labels
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.map(|l| (v, l))),
    );
    let mut a: Vec<usize> = x.nodes().to_vec();
    let mut trace = vec![TraceRecord {
        iteration: 0,
        subset_size: n,
        disagreeing: 0,
        fractional: n - a.len(),
        kept: a.len(),
        solver_iterations: out0.iterations,
        test_energy: None,
        bound: out0.bound,
        certificate: out0.certificate,
        unique: unique0,
    }];

    let work = match mode {
        Mode::Original => None,
        Mode::Optimal => {
            let psi = optimal_reparametrization(model, &x.extend(n, 0))?;
            Some(apply_reparametrization(model, &psi)?)
        }
    };
    let work = work.as_ref().unwrap_or(model);

    let mut iteration = 0;
    while !a.is_empty() {
        iteration += 1;
        let aug = build_augmented_model(work, &a, &x, Mode::Original)?;
        let y_local = aug.to_local(&x)?;
        let test_energy = aug.model.energy(&y_local)?;
        let (out, unique) = solve_checked(&aug.model, solver, cfg)?;
        let boundary = boundary_sets(work, &a)?.boundary_nodes;

        let label_of = |v: usize| out.labels[aug.local[v].unwrap()];
        let disagreeing: Vec<usize> = boundary
            .iter()
            .copied()
            .filter(|&v| label_of(v) != x.get(v))
            .collect();
        let keep: Vec<usize> = a
            .iter()
            .copied()
            .filter(|&v| label_of(v).is_some() && disagreeing.binary_search(&v).is_err())
            .collect();
        let fractional = a
            .iter()
            .filter(|&&v| label_of(v).is_none() && disagreeing.binary_search(&v).is_err())
            .count();
        let x_next = PartialLabeling::from_pairs(keep.iter().map(|&v| (v, label_of(v).unwrap())));
        trace.push(TraceRecord {
            iteration,
            subset_size: a.len(),
            disagreeing: disagreeing.len(),
            fractional,
            kept: keep.len(),
            solver_iterations: out.iterations,
            test_energy: Some(test_energy),
            bound: out.bound,
            certificate: out.certificate,
            unique,
        });
        let fixpoint = keep.len() == a.len();
        a = keep;
        x = x_next;
        if fixpoint {
            break;
        }
    }
    Ok(PersistencyResult {
        a_star: a,
        x_star: x,
        trace,
        mode,
        solver,
        iterations: iteration,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// Certifying labeling when the criterion holds, a cheaper one otherwise.
    Labeling(PartialLabeling),
    /// Optimal relaxation solution of the subproblem (local node order).
    Marginals(Marginals),
    /// Neither certified nor refuted; the dual bound reached.
    Bound(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionVerdict {
    pub holds: bool,
    /// Only set by [`improving_mapping_check`]: every relaxed optimum is fixed by the mapping.
    pub strict: Option<bool>,
    pub test_energy: f64,
    /// Optimum (or bound) of the subproblem.
    pub optimum: f64,
    pub witness: Witness,
}

/// Whether `x0` minimizes the subproblem over `A` built for `x0` itself.
///
/// `Bruteforce` decides exactly; `ExactLp` decides the relaxed criterion;
/// `Trws` holds only when its dual bound reaches the test energy.
pub fn check_criterion(
    model: &GraphicalModel,
    a: &[usize],
    x0: &PartialLabeling,
    solver: SolverKind,
    mode: Mode,
    cfg: &SolverConfig,
) -> Result<CriterionVerdict> {
    let aug = build_augmented_model(model, a, x0, mode)?;
    let y = aug.to_local(x0)?;
    let target = aug.model.energy(&y)?;
    let certified = |optimum| CriterionVerdict {
        holds: true,
        strict: None,
        test_energy: target,
        optimum,
        witness: Witness::Labeling(x0.restrict(&aug.nodes)),
    };
    if a.is_empty() {
        return Ok(certified(0.0));
    }
    match solver {
        SolverKind::Bruteforce => {
            let r = solve_bruteforce(&aug.model, cfg.bruteforce_cap, cfg.tol)?;
            if at_least(r.value, target) {
                Ok(certified(r.value))
            } else {
                Ok(CriterionVerdict {
                    holds: false,
                    strict: None,
                    test_energy: target,
                    optimum: r.value,
                    witness: Witness::Labeling(aug.to_global(&r.best.0)),
                })
            }
        }
        SolverKind::ExactLp => {
            let r = solve_lp_exact(&aug.model, cfg)?;
            Ok(CriterionVerdict {
                holds: at_least(r.value, target),
                strict: None,
                test_energy: target,
                optimum: r.value,
                witness: Witness::Marginals(r.marginals),
            })
        }
        SolverKind::Trws => {
            let r = solve_trws(&aug.model, &cfg.stop, cfg.tol)?;
            if at_least(r.output.bound, target) {
                Ok(certified(r.output.bound))
            } else if !at_least(r.best_energy, target) {
                Ok(CriterionVerdict {
                    holds: false,
                    strict: None,
                    test_energy: target,
                    optimum: r.best_energy,
                    witness: Witness::Labeling(aug.to_global(&r.best_labeling)),
                })
            } else {
                Ok(CriterionVerdict {
                    holds: false,
                    strict: None,
                    test_energy: target,
                    optimum: r.output.bound,
                    witness: Witness::Bound(r.output.bound),
                })
            }
        }
    }
}

/// Maximum over LP optima of the subproblem of the mass placed off the test labeling.
fn off_label_mass(
    aug: &AugmentedModel,
    y: &Labeling,
    value: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    let lp = build_lp(&aug.model);
    let mut weights = vec![0.0; lp.num_vars];
    for (v, &yv) in y.0.iter().enumerate() {
        for l in 0..aug.model.label_count(v) {
            if l != yv {
                weights[lp.node_offset[v] + l] = 1.0;
            }
        }
    }
    max_over_optimal_face(&lp, value, &weights, cfg)
}

/// Whether the relaxed criterion holds for `(A, x)` with a unique relaxed minimizer.
fn uniquely_certified(
    model: &GraphicalModel,
    a: &[usize],
    x: &PartialLabeling,
    cfg: &SolverConfig,
) -> Result<bool> {
    if a.is_empty() {
        return Ok(true);
    }
    let aug = build_augmented_model(model, a, x, Mode::Original)?;
    let y = aug.to_local(x)?;
    let target = aug.model.energy(&y)?;
    let r = solve_lp_exact(&aug.model, cfg)?;
    if !at_least(r.value, target) {
        return Ok(false);
    }
    Ok(off_label_mass(&aug, &y, target, cfg)? <= 1e-6)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongScan {
    /// Every accepted pair, in order of increasing subset bitmask.
    pub pairs: Vec<(Vec<usize>, PartialLabeling)>,
    /// The inclusion-largest accepted pair.
    pub maximal: (Vec<usize>, PartialLabeling),
}

/// Enumerates all `(A, x)` for which the relaxed criterion holds with a
/// unique relaxed minimizer.
///
/// Such an `x` agrees with every global optimum, so only nodes on which all
/// optima agree can take part, and `x` is the common optimal labeling there.
pub fn strong_persistency_scan(model: &GraphicalModel, cfg: &SolverConfig) -> Result<StrongScan> {
    let n = model.num_nodes();
    if n > SCAN_MAX_NODES {
        return Err(Error::CapExceeded {
            size: n as f64,
            cap: SCAN_MAX_NODES as f64,
        });
    }
    let gt = solve_bruteforce(model, cfg.bruteforce_cap, cfg.tol)?;
    let best = &gt.best.0;
    let agreed: Vec<usize> = (0..n)
        .filter(|&v| gt.optima.iter().all(|o| o.0[v] == best[v]))
        .collect();
    let mut pairs = Vec::new();
    for mask in 0u32..(1 << agreed.len()) {
        let a: Vec<usize> = agreed
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        let x = gt.best.restrict(&a);
        if uniquely_certified(model, &a, &x, cfg)? {
            pairs.push((a, x));
        }
    }
    let maximal = pairs
        .iter()
        .max_by_key(|(a, _)| a.len())
        .cloned()
        .unwrap_or_default();
    Ok(StrongScan { pairs, maximal })
}

/// Relaxed test of the all-to-one mapping sending every label of each node
/// in `A` to `y`: improving iff the relaxed minimum of the gamma model is 0.
pub fn improving_mapping_check(
    model: &GraphicalModel,
    a: &[usize],
    y: &Labeling,
    cfg: &SolverConfig,
) -> Result<CriterionVerdict> {
    let g = build_gamma_model(model, a, y)?;
    if a.is_empty() {
        return Ok(CriterionVerdict {
            holds: true,
            strict: Some(true),
            test_energy: 0.0,
            optimum: 0.0,
            witness: Witness::Labeling(PartialLabeling::empty()),
        });
    }
    let r = solve_lp_exact(&g.model, cfg)?;
    let holds = at_least(r.value, 0.0);
    let strict = holds && off_label_mass(&g, &g.to_local(&g.y)?, 0.0, cfg)? <= 1e-6;
    Ok(CriterionVerdict {
        holds,
        strict: Some(strict),
        test_energy: 0.0,
        optimum: r.value,
        witness: Witness::Marginals(r.marginals),
    })
}
