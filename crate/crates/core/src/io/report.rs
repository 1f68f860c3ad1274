use serde::{Deserialize, Serialize};

use crate::boundary::Mode;
use crate::model::{GraphicalModel, PartialLabeling};
use crate::persistency::{PersistencyResult, TraceRecord};
use crate::solvers::SolverKind;

use super::metric::persistency_percentage;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub persistent: bool,
    pub strongly_persistent: bool,
    pub num_optima: usize,
}

/// Self-contained result of one pruning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub solver: SolverKind,
    pub mode: Mode,
    pub num_nodes: usize,
    pub a_star_size: usize,
    pub a_star: Vec<usize>,
    pub x_star: PartialLabeling,
    pub percentage: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

impl RunReport {
    pub fn new(
        instance: &str,
        model: &GraphicalModel,
        result: &PersistencyResult,
        wall_time_ms: f64,
    ) -> Self {
        RunReport {
            instance: instance.to_string(),
            solver: result.solver,
            mode: result.mode,
            num_nodes: model.num_nodes(),
            a_star_size: result.a_star.len(),
            a_star: result.a_star.clone(),
            x_star: result.x_star.clone(),
            percentage: persistency_percentage(model, &result.a_star),
            iterations: result.iterations,
            trace: result.trace.clone(),
            wall_time_ms,
            verification: None,
        }
    }
}
