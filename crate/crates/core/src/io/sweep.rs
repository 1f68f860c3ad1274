//! Batch runs over generated instances with CSV output.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::boundary::Mode;
use crate::error::Result;
use crate::persistency::prune;
use crate::solvers::{SolverConfig, SolverKind};

use super::generate::{generate, InstanceSpec};
use super::metric::persistency_percentage;

pub const CSV_HEADER: &str = "instance,solver,mode,a_star,percentage,iterations";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Instance `i` uses this spec with seed `base.seed + i`.
    pub base: InstanceSpec,
    pub count: usize,
    pub solver: SolverKind,
    pub mode: Mode,
    pub config: SolverConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub instance: String,
    pub solver: SolverKind,
    pub mode: Mode,
    pub a_star: usize,
    pub percentage: f64,
    pub iterations: usize,
    pub time_ms: f64,
}

/// Runs all instances in parallel; rows come back in instance order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let inst = InstanceSpec {
                seed: spec.base.seed.wrapping_add(i as u64),
                ..spec.base.clone()
            };
            let model = generate(&inst)?;
            let start = Instant::now();
            let r = prune(&model, spec.solver, spec.mode, &spec.config)?;
            Ok(SweepRow {
                instance: format!("{}-{}", inst.kind, inst.seed),
                solver: spec.solver,
                mode: spec.mode,
                a_star: r.a_star.len(),
                percentage: persistency_percentage(&model, &r.a_star),
                iterations: r.iterations,
                time_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect()
}

/// CSV with a fixed header. The wall-time column is only written when
/// `timing` is set, so the default output is reproducible byte for byte.
pub fn rows_to_csv(rows: &[SweepRow], timing: bool) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push_str(if timing { ",time_ms\n" } else { "\n" });
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{:.6},{}",
            r.instance, r.solver, r.mode, r.a_star, r.percentage, r.iterations
        );
        if timing {
            let _ = write!(s, ",{:.3}", r.time_ms);
        }
        s.push('\n');
    }
    s
}
