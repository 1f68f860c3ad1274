use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling};

pub const DEFAULT_ENUMERATION_CAP: f64 = 2e6;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    /// Lexicographically first optimum.
    pub best: Labeling,
    pub value: f64,
    /// Every labeling within `tie_tol` of the optimum, in lexicographic order.
    pub optima: Vec<Labeling>,
    pub enumerated: usize,
}

/// Exact minimization by enumeration in lexicographic order (last node
/// varies fastest). Energies are updated incrementally and recomputed exactly
/// for every candidate optimum; `tie_tol` is an absolute energy tolerance.
pub fn solve_bruteforce(
    model: &GraphicalModel,
    cap: f64,
    tie_tol: f64,
) -> Result<BruteForceResult> {
    let size = model.state_space_size();
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let n = model.num_nodes();
    let mut x = vec![0usize; n];
    let mut values: Vec<f64> = (0..model.num_factors())
        .map(|f| model.factor_value(f, &x))
        .collect();
    let mut running: f64 = values.iter().sum();
    let mut stamp = vec![0usize; model.num_factors()];
    let mut step = 0usize;

    let mut best = f64::INFINITY;
    let mut candidates: Vec<(Vec<usize>, f64)> = Vec::new();
    let screen =
        |running: f64, best: f64| running <= best + 1e-6 * (1.0 + best.abs().min(running.abs()));
    let mut enumerated = 0usize;
    loop {
        enumerated += 1;
        if screen(running, best) {
            let exact = model.energy_unchecked(&x);
            if exact <= best + tie_tol {
                if exact < best {
                    best = exact;
                    candidates.retain(|(_, e)| *e <= best + tie_tol);
                }
                candidates.push((x.clone(), exact));
            }
        }
        // advance odometer
        let mut i = n;
        loop {
            if i == 0 {
                let optima: Vec<Labeling> = candidates
                    .into_iter()
                    .filter(|(_, e)| *e <= best + tie_tol)
                    .map(|(l, _)| Labeling(l))
                    .collect();
                return Ok(BruteForceResult {
                    best: optima[0].clone(),
                    value: best,
                    optima,
                    enumerated,
                });
            }
            i -= 1;
            if x[i] + 1 < model.label_count(i) {
                x[i] += 1;
                break;
            }
            x[i] = 0;
        }
        step += 1;
        // nodes i..n changed
        for v in i..n {
            for &f in model.node_factors(v) {
                if stamp[f] != step {
                    stamp[f] = step;
                    let nv = model.factor_value(f, &x);
                    running += nv - values[f];
                    values[f] = nv;
                }
            }
        }
        if step.is_multiple_of(4096) {
            running = values.iter().sum();
        }
    }
}
