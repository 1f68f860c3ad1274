//! Seeded synthetic instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GraphicalModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// 4-connected grid with Potts edges `α·[x_u ≠ x_v]`.
    PottsGrid,
    /// Random graph with dense random pairwise tables.
    RandomPairwise,
    /// `RandomPairwise` plus random ternary factors.
    RandomHyper,
    /// Cycle whose edges prefer disagreement: `α·[[1, ½], [½, 1]]`.
    FrustratedCycle,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::PottsGrid => "potts-grid",
            GeneratorKind::RandomPairwise => "random-pairwise",
            GeneratorKind::RandomHyper => "random-hyper",
            GeneratorKind::FrustratedCycle => "frustrated-cycle",
        })
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potts-grid" => Ok(GeneratorKind::PottsGrid),
            "random-pairwise" => Ok(GeneratorKind::RandomPairwise),
            "random-hyper" => Ok(GeneratorKind::RandomHyper),
            "frustrated-cycle" => Ok(GeneratorKind::FrustratedCycle),
            _ => Err(Error::Domain(format!("unknown generator '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: GeneratorKind,
    /// Grid rows (potts-grid).
    pub height: usize,
    /// Grid columns (potts-grid).
    pub width: usize,
    /// Node count for the other generators.
    pub nodes: usize,
    pub labels: usize,
    /// Per-node label counts are drawn from `labels..=labels_max` when set.
    pub labels_max: Option<usize>,
    /// Range of pairwise and higher-order entries (α for Potts and cycles).
    pub coupling: (f64, f64),
    /// Range of unary entries.
    pub noise: (f64, f64),
    /// Edge probability of the random graphs.
    pub edge_prob: f64,
    /// Ternary factors added by random-hyper.
    pub hyperedges: usize,
    /// Round every drawn value to an integer.
    pub integer: bool,
    pub seed: u64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            kind: GeneratorKind::PottsGrid,
            height: 4,
            width: 4,
            nodes: 6,
            labels: 2,
            labels_max: None,
            coupling: (0.0, 1.0),
            noise: (0.0, 1.0),
            edge_prob: 0.5,
            hyperedges: 1,
            integer: false,
            seed: 0,
        }
    }
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(m.to_string()));
        match self.kind {
            GeneratorKind::PottsGrid if self.height == 0 || self.width == 0 => {
                return bad("grid dimensions must be positive")
            }
            GeneratorKind::RandomHyper if self.nodes < 3 && self.hyperedges > 0 => {
                return bad("ternary factors need at least 3 nodes")
            }
            GeneratorKind::FrustratedCycle if self.nodes < 3 => {
                return bad("a cycle needs at least 3 nodes")
            }
            _ if self.kind != GeneratorKind::PottsGrid && self.nodes == 0 => {
                return bad("node count must be positive")
            }
            _ => {}
        }
        if self.labels == 0 || self.labels_max.is_some_and(|m| m < self.labels) {
            return bad("label counts must be positive and labels_max >= labels");
        }
        for (name, (lo, hi)) in [("coupling", self.coupling), ("noise", self.noise)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Domain(format!(
                    "{name} range must be finite with lo <= hi"
                )));
            }
            if self.integer && lo.ceil() > hi.floor() {
                return Err(Error::Domain(format!("{name} range contains no integer")));
            }
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return bad("edge_prob must lie in [0, 1]");
        }
        Ok(())
    }
}

struct Draw {
    rng: ChaCha8Rng,
    integer: bool,
}

impl Draw {
    fn value(&mut self, (lo, hi): (f64, f64)) -> f64 {
        if self.integer {
            self.rng.gen_range(lo.ceil() as i64..=hi.floor() as i64) as f64
        } else if lo == hi {
            lo
        } else {
            self.rng.gen_range(lo..hi)
        }
    }

    fn table(&mut self, len: usize, range: (f64, f64)) -> Vec<f64> {
        (0..len).map(|_| self.value(range)).collect()
    }
}

/// Same spec, same model, bit for bit.
pub fn generate(spec: &InstanceSpec) -> Result<GraphicalModel> {
    spec.validate()?;
    let mut d = Draw {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        integer: spec.integer,
    };
    let n = match spec.kind {
        GeneratorKind::PottsGrid => spec.height * spec.width,
        _ => spec.nodes,
    };
    let labels: Vec<usize> = (0..n)
        .map(|_| match spec.labels_max {
            Some(hi) => d.rng.gen_range(spec.labels..=hi),
            None => spec.labels,
        })
        .collect();
    let mut factors: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .map(|v| (vec![v], d.table(labels[v], spec.noise)))
        .collect();

    match spec.kind {
        GeneratorKind::PottsGrid => {
            let (h, w) = (spec.height, spec.width);
            for r in 0..h {
                for c in 0..w {
                    let v = r * w + c;
                    let mut nbrs = Vec::new();
                    if c + 1 < w {
                        nbrs.push(v + 1);
                    }
                    if r + 1 < h {
                        nbrs.push(v + w);
                    }
                    for u in nbrs {
                        let alpha = d.value(spec.coupling);
                        let (ka, kb) = (labels[v], labels[u]);
                        let table = (0..ka * kb)
                            .map(|i| if i / kb == i % kb { 0.0 } else { alpha })
                            .collect();
                        factors.push((vec![v, u], table));
                    }
                }
            }
        }
        GeneratorKind::RandomPairwise | GeneratorKind::RandomHyper => {
            for u in 0..n {
                for v in u + 1..n {
                    if d.rng.gen_bool(spec.edge_prob) {
                        factors.push((vec![u, v], d.table(labels[u] * labels[v], spec.coupling)));
                    }
                }
            }
            if spec.kind == GeneratorKind::RandomHyper {
                let all: Vec<usize> = (0..n).collect();
                for _ in 0..spec.hyperedges {
                    let mut scope: Vec<usize> =
                        all.choose_multiple(&mut d.rng, 3).copied().collect();
                    scope.sort_unstable();
                    let len = scope.iter().map(|&v| labels[v]).product();
                    factors.push((scope, d.table(len, spec.coupling)));
                }
            }
        }
        GeneratorKind::FrustratedCycle => {
            for u in 0..n {
                let (a, b) = (u.min((u + 1) % n), u.max((u + 1) % n));
                let alpha = d.value(spec.coupling);
                let (ka, kb) = (labels[a], labels[b]);
                let table = (0..ka * kb)
                    .map(|i| if i / kb == i % kb { alpha } else { 0.5 * alpha })
                    .collect();
                factors.push((vec![a, b], table));
            }
        }
    }
    GraphicalModel::new(labels, factors)
}
