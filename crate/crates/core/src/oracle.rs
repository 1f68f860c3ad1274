//! Exhaustive ground truth for small models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling, PartialLabeling};
use crate::solvers::solve_bruteforce;

/// Absolute energy tolerance for ties between global optima.
pub const ORACLE_TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    Persistent,
    StronglyPersistent,
    Improving,
    StrictlyImproving,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub claim: Claim,
    pub verdict: bool,
    /// Present iff the verdict is false.
    pub counterexample: Option<Labeling>,
    pub num_optima: usize,
}

/// All global optima of a model, computed once and queried many times.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub value: f64,
    pub optima: Vec<Labeling>,
}

impl GroundTruth {
    pub fn compute(model: &GraphicalModel, cap: f64) -> Result<Self> {
        let r = solve_bruteforce(model, cap, ORACLE_TIE_TOL)?;
        Ok(GroundTruth {
            value: r.value,
            optima: r.optima,
        })
    }

    fn report(&self, claim: Claim, counterexample: Option<&Labeling>) -> OracleReport {
        OracleReport {
            claim,
            verdict: counterexample.is_none(),
            counterexample: counterexample.cloned(),
            num_optima: self.optima.len(),
        }
    }

    /// Some optimum agrees with `x` on its nodes.
    pub fn persistent(&self, x: &PartialLabeling) -> OracleReport {
        let agrees = |o: &Labeling| x.iter().all(|(v, l)| o.0[v] == l);
        if self.optima.iter().any(agrees) {
            self.report(Claim::Persistent, None)
        } else {
            self.report(Claim::Persistent, self.optima.first())
        }
    }

    /// Every optimum agrees with `x` on its nodes.
    pub fn strongly_persistent(&self, x: &PartialLabeling) -> OracleReport {
        let bad = self
            .optima
            .iter()
            .find(|o| x.iter().any(|(v, l)| o.0[v] != l));
        self.report(Claim::StronglyPersistent, bad)
    }
}

pub fn verify_persistent(
    model: &GraphicalModel,
    x: &PartialLabeling,
    cap: f64,
) -> Result<OracleReport> {
    model.validate_partial(x)?;
    Ok(GroundTruth::compute(model, cap)?.persistent(x))
}

pub fn verify_strongly_persistent(
    model: &GraphicalModel,
    x: &PartialLabeling,
    cap: f64,
) -> Result<OracleReport> {
    model.validate_partial(x)?;
    Ok(GroundTruth::compute(model, cap)?.strongly_persistent(x))
}

/// Checks the all-to-one mapping `p` that relabels every node of `y` to its
/// label in `y`: improving iff `E(x) >= E(p(x))` for all `x`; strictly
/// improving iff moreover `E(x) > E(p(x))` whenever `p(x) != x`.
pub fn verify_improving(
    model: &GraphicalModel,
    y: &PartialLabeling,
    strict: bool,
    cap: f64,
) -> Result<OracleReport> {
    model.validate_partial(y)?;
    let size = model.state_space_size();
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let claim = if strict {
        Claim::StrictlyImproving
    } else {
        Claim::Improving
    };
    let n = model.num_nodes();
    let mut x = vec![0usize; n];
    let mut px = vec![0usize; n];
    loop {
        let moved = y.iter().any(|(v, l)| x[v] != l);
        if moved {
            px.copy_from_slice(&x);
            for (v, l) in y.iter() {
                px[v] = l;
            }
            let gain = model.energy_unchecked(&x) - model.energy_unchecked(&px);
            let tol = ORACLE_TIE_TOL * (1.0 + model.energy_unchecked(&px).abs());
            if gain < -tol || (strict && gain <= tol) {
                return Ok(OracleReport {
                    claim,
                    verdict: false,
                    counterexample: Some(Labeling(x)),
                    num_optima: 0,
                });
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(OracleReport {
                    claim,
                    verdict: true,
                    counterexample: None,
                    num_optima: 0,
                });
            }
            i -= 1;
            if x[i] + 1 < model.label_count(i) {
                x[i] += 1;
                break;
            }
            x[i] = 0;
        }
    }
}
