//! Interchangeable MAP / relaxation solvers.
//!
//! Every solver returns a [`SolverOutput`]: per node either a committed label
//! or the fractional marker `#`. The contract shared by all of them is that a
//! fully committed output is a global minimizer of the model's energy.

mod bruteforce;
mod lp;
pub mod simplex;
mod trws;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling};
use crate::polytope::Marginals;

pub use bruteforce::{solve_bruteforce, BruteForceResult, DEFAULT_ENUMERATION_CAP};
pub use lp::{lp_optimum_is_unique, max_over_optimal_face, solve_lp_exact, LpResult};
pub use trws::{solve_trws, Decoded, StopRule, TrwsResult, TrwsState};

/// Tolerance for classifying LP marginal entries as 0 or 1.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Bruteforce,
    ExactLp,
    Trws,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Bruteforce => "bruteforce",
            SolverKind::ExactLp => "lp",
            SolverKind::Trws => "trws",
        })
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bruteforce" | "ilp" => Ok(SolverKind::Bruteforce),
            "lp" | "exact-lp" => Ok(SolverKind::ExactLp),
            "trws" => Ok(SolverKind::Trws),
            _ => Err(Error::Domain(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    ExactIlp,
    ExactLp,
    TreeAgreement,
}

/// Per-node committed label (`Some`) or fractional marker (`None`, shown as `#`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOutput {
    #[serde(serialize_with = "ser_labels", deserialize_with = "de_labels")]
    pub labels: Vec<Option<usize>>,
    /// LP optimum, dual lower bound, or exact minimum depending on the solver.
    pub bound: f64,
    pub certificate: Certificate,
    pub iterations: usize,
}

impl SolverOutput {
    pub fn committed(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    /// The labeling, when every node is committed.
    pub fn labeling(&self) -> Option<Labeling> {
        self.labels
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(Labeling)
    }

    /// `"0 1 # 2"`-style rendering.
    pub fn render(&self) -> String {
        self.labels
            .iter()
            .map(|l| l.map_or_else(|| "#".to_string(), |l| l.to_string()))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LabelOrHash {
    Label(usize),
    Hash(String),
}

fn ser_labels<S: Serializer>(
    labels: &[Option<usize>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<LabelOrHash> = labels
        .iter()
        .map(|l| l.map_or_else(|| LabelOrHash::Hash("#".into()), LabelOrHash::Label))
        .collect();
    v.serialize(s)
}

fn de_labels<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Option<usize>>, D::Error> {
    let v = Vec::<LabelOrHash>::deserialize(d)?;
    v.into_iter()
        .map(|e| match e {
            LabelOrHash::Label(l) => Ok(Some(l)),
            LabelOrHash::Hash(h) if h == "#" => Ok(None),
            LabelOrHash::Hash(h) => Err(serde::de::Error::custom(format!("bad label '{h}'"))),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Energy comparison tolerance.
    pub tol: f64,
    pub bruteforce_cap: f64,
    /// Upper bound on LP variables accepted by the simplex.
    pub lp_max_vars: usize,
    pub simplex: simplex::SimplexOptions,
    pub stop: StopRule,
    /// Also test whether each LP optimum is unique (one extra LP per solve).
    pub check_uniqueness: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: crate::model::DEFAULT_TOL,
            bruteforce_cap: DEFAULT_ENUMERATION_CAP,
            lp_max_vars: 50_000,
            simplex: simplex::SimplexOptions::default(),
            stop: StopRule::default(),
            check_uniqueness: false,
        }
    }
}

/// Runs the chosen solver and returns its per-node output.
pub fn solve(model: &GraphicalModel, kind: SolverKind, cfg: &SolverConfig) -> Result<SolverOutput> {
    match kind {
        SolverKind::Bruteforce => {
            let r = solve_bruteforce(model, cfg.bruteforce_cap, cfg.tol)?;
            Ok(SolverOutput {
                labels: r.best.0.iter().map(|&l| Some(l)).collect(),
                bound: r.value,
                certificate: Certificate::ExactIlp,
                iterations: r.enumerated,
            })
        }
        SolverKind::ExactLp => Ok(solve_lp_exact(model, cfg)?.output),
        SolverKind::Trws => Ok(solve_trws(model, &cfg.stop, cfg.tol)?.output),
    }
}

/// Node marginals implied by a solver output: committed nodes become
/// indicators, `#` nodes uniform. Factor marginals are products of the
/// incident node marginals.
pub fn output_to_marginals(model: &GraphicalModel, out: &SolverOutput) -> Marginals {
    let nodes: Vec<Vec<f64>> = (0..model.num_nodes())
        .map(|v| {
            let k = model.label_count(v);
            match out.labels.get(v).copied().flatten() {
                Some(l) => (0..k).map(|i| if i == l { 1.0 } else { 0.0 }).collect(),
                None => vec![1.0 / k as f64; k],
            }
        })
        .collect();
    let factors = (0..model.num_factors())
        .map(|f| {
            let len = model.factor(f).table().len();
            (0..len)
                .map(|idx| {
                    model
                        .decode_index(f, idx)
                        .iter()
                        .zip(model.factor(f).scope())
                        .map(|(&l, &v)| nodes[v][l])
                        .product()
                })
                .collect()
        })
        .collect();
    Marginals { nodes, factors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::delta;

    #[test]
    fn marginals_from_output() {
        let m = GraphicalModel::new(vec![2, 3], vec![(vec![0, 1], vec![0.0; 6])]).unwrap();
        let full = SolverOutput {
            labels: vec![Some(1), Some(2)],
            bound: 0.0,
            certificate: Certificate::ExactLp,
            iterations: 0,
        };
        assert_eq!(
            output_to_marginals(&m, &full),
            delta(&m, &Labeling(vec![1, 2])).unwrap()
        );
        let frac = SolverOutput {
            labels: vec![None, None],
            ..full
        };
        let mu = output_to_marginals(&m, &frac);
        assert_eq!(mu.nodes[0], vec![0.5, 0.5]);
        assert_eq!(mu.nodes[1], vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn output_serializes_hash_marker() {
        let out = SolverOutput {
            labels: vec![Some(0), None],
            bound: 1.5,
            certificate: Certificate::TreeAgreement,
            iterations: 3,
        };
        let s = serde_json::to_string(&out).unwrap();
        assert!(s.contains(r##"[0,"#"]"##), "{s}");
        assert_eq!(serde_json::from_str::<SolverOutput>(&s).unwrap(), out);
        assert_eq!(out.render(), "0 #");
    }
}
