//! Boundary of a node subset and the augmented subproblem over it.
//!
//! Every factor straddling `A` is replaced by a table over its `A`-side nodes
//! (a unary for pairwise factors, a clique over `A ∩ e` otherwise), so the
//! subproblem no longer depends on labels outside `A`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GraphicalModel, Labeling, PartialLabeling};

/// Which boundary potentials to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Max over exterior labels at the test label, min elsewhere.
    #[default]
    Original,
    /// Differences to the test label's row, minimized over exterior labels.
    Optimal,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Original => "original",
            Mode::Optimal => "optimal",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Mode::Original),
            "optimal" => Ok(Mode::Optimal),
            _ => Err(Error::Domain(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundarySets {
    /// Nodes of `A` sharing a factor with the exterior, sorted.
    pub boundary_nodes: Vec<usize>,
    /// Factors with scope nodes both in `A` and outside it.
    pub boundary_factors: Vec<usize>,
    pub interior_nodes: Vec<usize>,
}

fn membership(model: &GraphicalModel, a: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; model.num_nodes()];
    for &v in a {
        *inside
            .get_mut(v)
            .ok_or_else(|| Error::Domain(format!("node {v} out of range")))? = true;
    }
    Ok(inside)
}

pub fn boundary_sets(model: &GraphicalModel, a: &[usize]) -> Result<BoundarySets> {
    let inside = membership(model, a)?;
    let mut on_boundary = vec![false; model.num_nodes()];
    let mut boundary_factors = Vec::new();
    for (f, factor) in model.factors().iter().enumerate() {
        let n_in = factor.scope().iter().filter(|&&v| inside[v]).count();
        if n_in > 0 && n_in < factor.arity() {
            boundary_factors.push(f);
            for &v in factor.scope() {
                if inside[v] {
                    on_boundary[v] = true;
                }
            }
        }
    }
    let (boundary_nodes, interior_nodes) = (0..model.num_nodes())
        .filter(|&v| inside[v])
        .partition(|&v| on_boundary[v]);
    Ok(BoundarySets {
        boundary_nodes,
        boundary_factors,
        interior_nodes,
    })
}

/// Boundary potential of factor `f` as a row-major table over the sorted
/// nodes `A ∩ scope(f)`.
pub fn boundary_potential(
    model: &GraphicalModel,
    f: usize,
    a: &[usize],
    y: &PartialLabeling,
    mode: Mode,
) -> Result<Vec<f64>> {
    let inside = membership(model, a)?;
    boundary_potential_with(model, f, &inside, y, mode)
}

fn boundary_potential_with(
    model: &GraphicalModel,
    f: usize,
    inside: &[bool],
    y: &PartialLabeling,
    mode: Mode,
) -> Result<Vec<f64>> {
    if f >= model.num_factors() {
        return Err(Error::Domain(format!("factor {f} out of range")));
    }
    let factor = model.factor(f);
    let scope = factor.scope();
    let in_pos: Vec<usize> = (0..scope.len()).filter(|&i| inside[scope[i]]).collect();
    if in_pos.is_empty() || in_pos.len() == scope.len() {
        return Err(Error::Domain(format!(
            "factor {f} is not a boundary factor"
        )));
    }
    let y_in: Vec<usize> = in_pos
        .iter()
        .map(|&i| {
            y.get(scope[i]).ok_or_else(|| {
                Error::Domain(format!("test labeling misses boundary node {}", scope[i]))
            })
        })
        .collect::<Result<_>>()?;
    let cards: Vec<usize> = in_pos
        .iter()
        .map(|&i| model.label_count(scope[i]))
        .collect();
    let size: usize = cards.iter().product();
    let local_index = |labels: &[usize]| {
        in_pos
            .iter()
            .zip(&cards)
            .fold(0, |acc, (&i, &k)| acc * k + labels[i])
    };
    let y_index = y_in.iter().zip(&cards).fold(0, |acc, (&l, &k)| acc * k + l);
    let table = factor.table();

    match mode {
        Mode::Original => {
            let mut hi = vec![f64::NEG_INFINITY; size];
            let mut lo = vec![f64::INFINITY; size];
            for (idx, &t) in table.iter().enumerate() {
                let j = local_index(&model.decode_index(f, idx));
                hi[j] = hi[j].max(t);
                lo[j] = lo[j].min(t);
            }
            lo[y_index] = hi[y_index];
            Ok(lo)
        }
        Mode::Optimal => {
            if scope.len() != 2 {
                return Err(Error::UnsupportedArity {
                    factor: f,
                    arity: scope.len(),
                    context: "optimal boundary potentials need pairwise factors",
                });
            }
            let (ku, kv) = (model.label_count(scope[0]), model.label_count(scope[1]));
            let at = |i: usize, o: usize| {
                if in_pos[0] == 0 {
                    table[i * kv + o]
                } else {
                    table[o * kv + i]
                }
            };
            let k_out = if in_pos[0] == 0 { kv } else { ku };
            let yu = y_in[0];
            Ok((0..size)
                .map(|xu| {
                    if xu == yu {
                        0.0
                    } else {
                        (0..k_out)
                            .map(|o| at(xu, o) - at(yu, o))
                            .fold(f64::INFINITY, f64::min)
                    }
                })
                .collect())
        }
    }
}

/// A model over a node subset with its index maps.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedModel {
    pub model: GraphicalModel,
    /// Original id of every local node.
    pub nodes: Vec<usize>,
    /// Local id of every original node, if in the subset.
    pub local: Vec<Option<usize>>,
    /// Test labeling the boundary terms were built for.
    pub y: PartialLabeling,
}

impl AugmentedModel {
    /// Local labeling from a partial labeling covering the subset.
    pub fn to_local(&self, x: &PartialLabeling) -> Result<Labeling> {
        self.nodes
            .iter()
            .map(|&v| {
                x.get(v)
                    .ok_or_else(|| Error::Domain(format!("labeling misses node {v}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Labeling)
    }

    pub fn to_global(&self, local: &[usize]) -> PartialLabeling {
        PartialLabeling::from_pairs(self.nodes.iter().copied().zip(local.iter().copied()))
    }
}

fn subset_indexing(model: &GraphicalModel, inside: &[bool]) -> (Vec<usize>, Vec<Option<usize>>) {
    let nodes: Vec<usize> = (0..model.num_nodes()).filter(|&v| inside[v]).collect();
    let mut local = vec![None; model.num_nodes()];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = Some(i);
    }
    (nodes, local)
}

/// Interior energy `E_A` plus the boundary potentials for test labeling `y`.
pub fn build_augmented_model(
    model: &GraphicalModel,
    a: &[usize],
    y: &PartialLabeling,
    mode: Mode,
) -> Result<AugmentedModel> {
    let inside = membership(model, a)?;
    let (nodes, local) = subset_indexing(model, &inside);
    let mut factors = Vec::new();
    for (f, factor) in model.factors().iter().enumerate() {
        let in_scope: Vec<usize> = factor.scope().iter().filter_map(|&v| local[v]).collect();
        if in_scope.is_empty() {
            continue;
        }
        if in_scope.len() == factor.arity() {
            factors.push((in_scope, factor.table().to_vec()));
        } else {
            factors.push((
                in_scope,
                boundary_potential_with(model, f, &inside, y, mode)?,
            ));
        }
    }
    let counts = nodes.iter().map(|&v| model.label_count(v)).collect();
    Ok(AugmentedModel {
        model: GraphicalModel::new(counts, factors)?,
        nodes,
        local,
        y: y.clone(),
    })
}

/// Test energy of the all-to-one mapping onto `y` over `A`: potentials are
/// shifted so that `y` restricted to `A` has energy 0, and each boundary
/// factor contributes `min_{x_v} θ_uv(x_u, x_v) - θ_uv(y_u, x_v)`.
pub fn build_gamma_model(
    model: &GraphicalModel,
    a: &[usize],
    y: &Labeling,
) -> Result<AugmentedModel> {
    model.require_pairwise("the improving-mapping test needs a pairwise model")?;
    model.validate_labeling(y)?;
    let inside = membership(model, a)?;
    let (nodes, local) = subset_indexing(model, &inside);
    let y_part = y.restrict(&nodes);
    let mut factors = Vec::new();
    for (f, factor) in model.factors().iter().enumerate() {
        let in_scope: Vec<usize> = factor.scope().iter().filter_map(|&v| local[v]).collect();
        if in_scope.is_empty() {
            continue;
        }
        if in_scope.len() == factor.arity() {
            let base = model.factor_value(f, &y.0);
            factors.push((in_scope, factor.table().iter().map(|t| t - base).collect()));
        } else {
            factors.push((
                in_scope,
                boundary_potential_with(model, f, &inside, &y_part, Mode::Optimal)?,
            ));
        }
    }
    let counts = nodes.iter().map(|&v| model.label_count(v)).collect();
    Ok(AugmentedModel {
        model: GraphicalModel::new(counts, factors)?,
        nodes,
        local,
        y: y_part,
    })
}
