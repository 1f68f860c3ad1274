//! Factor-graph representation, energy evaluation, labeling algebra and
//! reparametrization of pairwise models.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute+relative tolerance for comparing energies.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `|a - b| <= tol * (1 + max(|a|, |b|))`.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// A cost table over a sorted node scope, stored row-major (last scope node
/// varies fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    scope: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    /// Position of `node` inside the scope.
    pub fn position(&self, node: usize) -> Option<usize> {
        self.scope.binary_search(&node).ok()
    }
}

/// Discrete graphical model: label counts per node plus a list of factors.
///
/// Scopes are strictly sorted, tables finite, and at most one factor exists per
/// scope. Once built the model is immutable.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphicalModel {
    label_counts: Vec<usize>,
    factors: Vec<Factor>,
    strides: Vec<Vec<usize>>,
    node_factors: Vec<Vec<usize>>,
}

impl GraphicalModel {
    /// Validates and builds a model. Unsorted scopes are sorted (permuting the
    /// table accordingly); factors sharing a scope are merged by addition.
    pub fn new(label_counts: Vec<usize>, factors: Vec<(Vec<usize>, Vec<f64>)>) -> Result<Self> {
        let mut b = ModelBuilder::new(label_counts);
        for (scope, table) in factors {
            b.add_factor(scope, table)?;
        }
        b.build()
    }

    pub fn num_nodes(&self) -> usize {
        self.label_counts.len()
    }

    pub fn label_counts(&self) -> &[usize] {
        &self.label_counts
    }

    pub fn label_count(&self, v: usize) -> usize {
        self.label_counts[v]
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, f: usize) -> &Factor {
        &self.factors[f]
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Ids of the factors whose scope contains `v`.
    pub fn node_factors(&self, v: usize) -> &[usize] {
        &self.node_factors[v]
    }

    pub fn strides(&self, f: usize) -> &[usize] {
        &self.strides[f]
    }

    pub fn max_arity(&self) -> usize {
        self.factors.iter().map(Factor::arity).max().unwrap_or(0)
    }

    pub fn is_pairwise(&self) -> bool {
        self.max_arity() <= 2
    }

    /// Fails with [`Error::UnsupportedArity`] on the first factor of arity >= 3.
    pub fn require_pairwise(&self, context: &'static str) -> Result<()> {
        match self.factors.iter().position(|f| f.arity() > 2) {
            Some(f) => Err(Error::UnsupportedArity {
                factor: f,
                arity: self.factors[f].arity(),
                context,
            }),
            None => Ok(()),
        }
    }

    pub fn find_factor(&self, scope: &[usize]) -> Option<usize> {
        let first = *scope.first()?;
        self.node_factors
            .get(first)?
            .iter()
            .copied()
            .find(|&f| self.factors[f].scope == scope)
    }

    /// Neighbours of `v` through pairwise factors, with the connecting factor id.
    pub fn pairwise_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.node_factors[v].iter().filter_map(move |&f| {
            let s = &self.factors[f].scope;
            match s.as_slice() {
                [a, b] if *a == v => Some((*b, f)),
                [a, b] if *b == v => Some((*a, f)),
                _ => None,
            }
        })
    }

    /// Number of joint labelings, as a float to avoid overflow.
    pub fn state_space_size(&self) -> f64 {
        self.label_counts.iter().map(|&k| k as f64).product()
    }

    /// Row-major table index of factor `f` given a label lookup per scope node.
    pub fn table_index(&self, f: usize, mut label_of: impl FnMut(usize) -> usize) -> usize {
        self.factors[f]
            .scope
            .iter()
            .zip(&self.strides[f])
            .map(|(&v, &s)| label_of(v) * s)
            .sum()
    }

    /// Value of factor `f` under a full labeling.
    pub fn factor_value(&self, f: usize, labels: &[usize]) -> f64 {
        self.factors[f].table[self.table_index(f, |v| labels[v])]
    }

    /// Decodes a table index of factor `f` into the per-scope labels.
    pub fn decode_index(&self, f: usize, mut idx: usize) -> Vec<usize> {
        self.strides[f]
            .iter()
            .map(|&s| {
                let l = idx / s;
                idx %= s;
                l
            })
            .collect()
    }

    pub fn validate_labeling(&self, x: &Labeling) -> Result<()> {
        if x.0.len() != self.num_nodes() {
            return Err(Error::InvalidLabeling(format!(
                "labeling has {} entries, model has {} nodes",
                x.0.len(),
                self.num_nodes()
            )));
        }
        for (v, (&l, &k)) in x.0.iter().zip(&self.label_counts).enumerate() {
            if l >= k {
                return Err(Error::InvalidLabeling(format!(
                    "label {l} of node {v} out of range 0..{k}"
                )));
            }
        }
        Ok(())
    }

    pub fn validate_partial(&self, x: &PartialLabeling) -> Result<()> {
        for (v, l) in x.iter() {
            if v >= self.num_nodes() {
                return Err(Error::InvalidLabeling(format!("node {v} out of range")));
            }
            if l >= self.label_counts[v] {
                return Err(Error::InvalidLabeling(format!(
                    "label {l} of node {v} out of range 0..{}",
                    self.label_counts[v]
                )));
            }
        }
        Ok(())
    }

    /// Sum of all factor values, in factor order.
    pub fn energy(&self, x: &Labeling) -> Result<f64> {
        self.validate_labeling(x)?;
        Ok(self.energy_unchecked(&x.0))
    }

    pub(crate) fn energy_unchecked(&self, labels: &[usize]) -> f64 {
        let mut e = 0.0;
        for f in 0..self.factors.len() {
            e += self.factor_value(f, labels);
        }
        e
    }

    /// Energy of the factors whose scope lies inside `subset`, under `x`
    /// (which must cover `subset`).
    pub fn restricted_energy(&self, subset: &[usize], x: &PartialLabeling) -> Result<f64> {
        self.validate_partial(x)?;
        let mut inside = vec![false; self.num_nodes()];
        for &v in subset {
            if v >= self.num_nodes() {
                return Err(Error::Domain(format!("node {v} out of range")));
            }
            if x.get(v).is_none() {
                return Err(Error::Domain(format!("labeling does not cover node {v}")));
            }
            inside[v] = true;
        }
        let mut e = 0.0;
        for (f, factor) in self.factors.iter().enumerate() {
            if factor.scope.iter().all(|&v| inside[v]) {
                e += factor.table[self.table_index(f, |v| x.get(v).unwrap())];
            }
        }
        Ok(e)
    }
}

/// Incremental model construction; duplicate scopes are merged by addition.
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    label_counts: Vec<usize>,
    factors: Vec<Factor>,
    by_scope: HashMap<Vec<usize>, usize>,
}

impl ModelBuilder {
    pub fn new(label_counts: Vec<usize>) -> Self {
        ModelBuilder {
            label_counts,
            factors: Vec::new(),
            by_scope: HashMap::new(),
        }
    }

    pub fn add_unary(&mut self, v: usize, table: Vec<f64>) -> Result<&mut Self> {
        self.add_factor(vec![v], table)
    }

    pub fn add_pairwise(&mut self, u: usize, v: usize, table: Vec<f64>) -> Result<&mut Self> {
        self.add_factor(vec![u, v], table)
    }

    pub fn add_factor(&mut self, scope: Vec<usize>, table: Vec<f64>) -> Result<&mut Self> {
        if scope.is_empty() {
            return Err(Error::InvalidModel("empty factor scope".into()));
        }
        for &v in &scope {
            if v >= self.label_counts.len() {
                return Err(Error::InvalidModel(format!(
                    "scope node {v} out of range (model has {} nodes)",
                    self.label_counts.len()
                )));
            }
        }
        let expected: usize = scope.iter().map(|&v| self.label_counts[v]).product();
        if table.len() != expected {
            return Err(Error::InvalidModel(format!(
                "factor over {scope:?} has {} entries, expected {expected}",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "factor over {scope:?} has non-finite entry {bad}"
            )));
        }
        let (scope, table) = self.sort_scope(scope, table)?;
        match self.by_scope.get(&scope) {
            Some(&f) => {
                for (a, b) in self.factors[f].table.iter_mut().zip(&table) {
                    *a += b;
                }
            }
            None => {
                self.by_scope.insert(scope.clone(), self.factors.len());
                self.factors.push(Factor { scope, table });
            }
        }
        Ok(self)
    }

    fn sort_scope(&self, scope: Vec<usize>, table: Vec<f64>) -> Result<(Vec<usize>, Vec<f64>)> {
        if scope.windows(2).all(|w| w[0] < w[1]) {
            return Ok((scope, table));
        }
        let mut order: Vec<usize> = (0..scope.len()).collect();
        order.sort_by_key(|&i| scope[i]);
        let sorted: Vec<usize> = order.iter().map(|&i| scope[i]).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(format!(
                "duplicate node in scope {scope:?}"
            )));
        }
        let cards: Vec<usize> = scope.iter().map(|&v| self.label_counts[v]).collect();
        let old_strides = row_major_strides(&cards);
        let new_cards: Vec<usize> = order.iter().map(|&i| cards[i]).collect();
        let new_strides = row_major_strides(&new_cards);
        let mut out = vec![0.0; table.len()];
        for (idx, &val) in table.iter().enumerate() {
            let mut rem = idx;
            let mut labels = vec![0; scope.len()];
            for (i, &s) in old_strides.iter().enumerate() {
                labels[i] = rem / s;
                rem %= s;
            }
            let new_idx: usize = order
                .iter()
                .zip(&new_strides)
                .map(|(&i, &s)| labels[i] * s)
                .sum();
            out[new_idx] = val;
        }
        Ok((sorted, out))
    }

    pub fn build(self) -> Result<GraphicalModel> {
        if let Some(v) = self.label_counts.iter().position(|&k| k == 0) {
            return Err(Error::InvalidModel(format!("node {v} has no labels")));
        }
        let mut node_factors = vec![Vec::new(); self.label_counts.len()];
        let mut strides = Vec::with_capacity(self.factors.len());
        for (f, factor) in self.factors.iter().enumerate() {
            for &v in &factor.scope {
                node_factors[v].push(f);
            }
            let cards: Vec<usize> = factor.scope.iter().map(|&v| self.label_counts[v]).collect();
            strides.push(row_major_strides(&cards));
        }
        Ok(GraphicalModel {
            label_counts: self.label_counts,
            factors: self.factors,
            strides,
            node_factors,
        })
    }
}

pub(crate) fn row_major_strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

/// A full labeling: one label index per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Labeling(pub Vec<usize>);

impl Labeling {
    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn restrict(&self, subset: &[usize]) -> PartialLabeling {
        PartialLabeling::from_pairs(subset.iter().map(|&v| (v, self.0[v])))
    }
}

/// An assignment on a node subset; nodes are kept sorted and unique.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialLabeling {
    nodes: Vec<usize>,
    labels: Vec<usize>,
}

impl PartialLabeling {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from `(node, label)` pairs; later duplicates overwrite earlier ones.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut v: Vec<(usize, usize)> = pairs.into_iter().collect();
        v.sort_by_key(|p| p.0);
        let mut out = PartialLabeling::default();
        for (n, l) in v {
            if out.nodes.last() == Some(&n) {
                *out.labels.last_mut().unwrap() = l;
            } else {
                out.nodes.push(n);
                out.labels.push(l);
            }
        }
        out
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.nodes.binary_search(&v).ok().map(|i| self.labels[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().copied().zip(self.labels.iter().copied())
    }

    pub fn restrict(&self, subset: &[usize]) -> PartialLabeling {
        PartialLabeling::from_pairs(subset.iter().filter_map(|&v| self.get(v).map(|l| (v, l))))
    }

    /// Extends to a full labeling, using `fill` on uncovered nodes.
    pub fn extend(&self, num_nodes: usize, fill: usize) -> Labeling {
        let mut x = vec![fill; num_nodes];
        for (v, l) in self.iter() {
            x[v] = l;
        }
        Labeling(x)
    }
}

/// Merges a labeling on `A` with one on `V \ A` into a full labeling.
pub fn concatenate(
    num_nodes: usize,
    inner: &PartialLabeling,
    outer: &PartialLabeling,
) -> Result<Labeling> {
    let mut x: Vec<Option<usize>> = vec![None; num_nodes];
    for (v, l) in inner.iter().chain(outer.iter()) {
        let slot = x
            .get_mut(v)
            .ok_or_else(|| Error::Domain(format!("node {v} out of range")))?;
        if slot.is_some() {
            return Err(Error::Domain(format!("node {v} labeled by both parts")));
        }
        *slot = Some(l);
    }
    x.into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or_else(|| Error::Domain(format!("node {v} not covered"))))
        .collect::<Result<Vec<_>>>()
        .map(Labeling)
}

/// Messages `φ` on the two endpoints of every pairwise factor.
///
/// `message(f, w)` is the vector `φ_{w,·}(x_w)` stored at endpoint `w` of
/// pairwise factor `f`. Applying it subtracts it from `w`'s unary and adds it
/// to the pairwise table, which leaves every labeling's energy unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparametrization {
    // per factor: Some([at scope[0], at scope[1]]) for pairwise factors
    messages: Vec<Option<[Vec<f64>; 2]>>,
}

impl Reparametrization {
    pub fn zero(model: &GraphicalModel) -> Self {
        let messages = model
            .factors()
            .iter()
            .map(|f| match f.scope() {
                [u, v] => Some([
                    vec![0.0; model.label_count(*u)],
                    vec![0.0; model.label_count(*v)],
                ]),
                _ => None,
            })
            .collect();
        Reparametrization { messages }
    }

    pub fn message(&self, f: usize, at: usize, model: &GraphicalModel) -> &[f64] {
        let side = model
            .factor(f)
            .position(at)
            .expect("node not in factor scope");
        &self.messages[f].as_ref().expect("not a pairwise factor")[side]
    }

    pub fn message_mut(&mut self, f: usize, at: usize, model: &GraphicalModel) -> &mut Vec<f64> {
        let side = model
            .factor(f)
            .position(at)
            .expect("node not in factor scope");
        &mut self.messages[f].as_mut().expect("not a pairwise factor")[side]
    }

    /// Message stored at node `at` on the edge towards `to`.
    pub fn between(&self, model: &GraphicalModel, at: usize, to: usize) -> Option<&[f64]> {
        let (a, b) = if at < to { (at, to) } else { (to, at) };
        let f = model.find_factor(&[a, b])?;
        Some(self.message(f, at, model))
    }
}

/// Returns `θ^φ` as a new model. Nodes without a unary factor get one when a
/// message needs to be subtracted there.
pub fn apply_reparametrization(
    model: &GraphicalModel,
    phi: &Reparametrization,
) -> Result<GraphicalModel> {
    model.require_pairwise("reparametrization is defined for pairwise models only")?;
    if phi.messages.len() != model.num_factors() {
        return Err(Error::Domain(
            "reparametrization does not match model".into(),
        ));
    }
    let n = model.num_nodes();
    let mut unary_shift: Vec<Vec<f64>> = (0..n).map(|v| vec![0.0; model.label_count(v)]).collect();
    let mut factors: Vec<(Vec<usize>, Vec<f64>)> = Vec::with_capacity(model.num_factors() + n);
    for (f, factor) in model.factors().iter().enumerate() {
        let mut table = factor.table().to_vec();
        if let [u, v] = factor.scope() {
            let [mu, mv] = phi.messages[f]
                .as_ref()
                .ok_or_else(|| Error::Domain("missing messages for pairwise factor".into()))?;
            if mu.len() != model.label_count(*u) || mv.len() != model.label_count(*v) {
                return Err(Error::Domain(format!(
                    "message length mismatch on factor {f}"
                )));
            }
            let kv = model.label_count(*v);
            for (i, row) in table.chunks_mut(kv).enumerate() {
                for (j, t) in row.iter_mut().enumerate() {
                    *t += mu[i] + mv[j];
                }
            }
            for (s, m) in unary_shift[*u].iter_mut().zip(mu) {
                *s += m;
            }
            for (s, m) in unary_shift[*v].iter_mut().zip(mv) {
                *s += m;
            }
        }
        factors.push((factor.scope().to_vec(), table));
    }
    for (v, shift) in unary_shift.into_iter().enumerate() {
        if shift.iter().any(|&s| s != 0.0) {
            factors.push((vec![v], shift.into_iter().map(|s| -s).collect()));
        }
    }
    GraphicalModel::new(model.label_counts().to_vec(), factors)
}

/// The criterion-optimal reparametrization for test labeling `y`: at endpoint
/// `w` of edge `{w, o}` the message is `x_w ↦ -θ_{wo}(y_o, x_w)`.
pub fn optimal_reparametrization(
    model: &GraphicalModel,
    y: &Labeling,
) -> Result<Reparametrization> {
    model.require_pairwise("optimal reparametrization is defined for pairwise models only")?;
    model.validate_labeling(y)?;
    let mut phi = Reparametrization::zero(model);
    for (f, factor) in model.factors().iter().enumerate() {
        if let [u, v] = *factor.scope() {
            let t = factor.table();
            let kv = model.label_count(v);
            let at_v: Vec<f64> = (0..kv).map(|b| -t[y.0[u] * kv + b]).collect();
            let at_u: Vec<f64> = (0..model.label_count(u))
                .map(|a| -t[a * kv + y.0[v]])
                .collect();
            phi.messages[f] = Some([at_u, at_v]);
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn chain() -> GraphicalModel {
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

    #[test]
    fn energy_examples() {
        assert_eq!(chain().energy(&Labeling(vec![0, 1])).unwrap(), 2.0);
        let empty = GraphicalModel::new(vec![3, 2], vec![]).unwrap();
        assert_eq!(empty.energy(&Labeling(vec![2, 1])).unwrap(), 0.0);
        let mut t = vec![0.0; 8];
        t[7] = 5.0;
        let tern = GraphicalModel::new(vec![2, 2, 2], vec![(vec![0, 1, 2], t)]).unwrap();
        assert_eq!(tern.energy(&Labeling(vec![1, 1, 1])).unwrap(), 5.0);
        assert_eq!(tern.energy(&Labeling(vec![1, 0, 1])).unwrap(), 0.0);
    }

    #[test]
    fn energy_rejects_bad_labels() {
        let m = chain();
        assert!(matches!(
            m.energy(&Labeling(vec![0, 2])),
            Err(Error::InvalidLabeling(_))
        ));
        assert!(matches!(
            m.energy(&Labeling(vec![0])),
            Err(Error::InvalidLabeling(_))
        ));
    }

    #[test]
    fn restricted_energy_examples() {
        let m = chain();
        let x = PartialLabeling::from_pairs([(0, 1), (1, 1)]);
        assert_eq!(m.restricted_energy(&[0], &x).unwrap(), 1.0);
        assert_eq!(
            m.restricted_energy(&[0, 1], &x).unwrap(),
            m.energy(&Labeling(vec![1, 1])).unwrap()
        );
        assert_eq!(
            m.restricted_energy(&[], &PartialLabeling::empty()).unwrap(),
            0.0
        );
    }

    #[test]
    fn concatenate_examples() {
        let a = PartialLabeling::from_pairs([(0, 2)]);
        let b = PartialLabeling::from_pairs([(1, 0)]);
        assert_eq!(concatenate(2, &a, &b).unwrap(), Labeling(vec![2, 0]));
        let all = PartialLabeling::from_pairs([(0, 1), (1, 1)]);
        assert_eq!(
            concatenate(2, &all, &PartialLabeling::empty()).unwrap(),
            Labeling(vec![1, 1])
        );
        assert_eq!(
            concatenate(2, &PartialLabeling::empty(), &all).unwrap(),
            Labeling(vec![1, 1])
        );
        assert!(matches!(concatenate(2, &a, &a), Err(Error::Domain(_))));
        assert!(matches!(
            concatenate(2, &a, &PartialLabeling::empty()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn duplicate_scopes_merge_and_unsorted_scopes_are_permuted() {
        let m = GraphicalModel::new(
            vec![2, 3],
            vec![
                (vec![0, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
                // table over (x1, x0): rows x1
                (vec![1, 0], vec![10.0, 20.0, 30.0, 40.0, 50.0, 60.0]),
            ],
        )
        .unwrap();
        assert_eq!(m.num_factors(), 1);
        // entry (x0=1, x1=2): 6 + table[(x1=2)*2 + 1] = 6 + 60
        assert_eq!(m.energy(&Labeling(vec![1, 2])).unwrap(), 66.0);
        assert_eq!(m.energy(&Labeling(vec![0, 1])).unwrap(), 2.0 + 30.0);
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(GraphicalModel::new(vec![2], vec![(vec![0], vec![1.0])]).is_err());
        assert!(GraphicalModel::new(vec![2], vec![(vec![1], vec![1.0, 2.0])]).is_err());
        assert!(GraphicalModel::new(vec![2], vec![(vec![0], vec![f64::NAN, 2.0])]).is_err());
        assert!(GraphicalModel::new(vec![2, 2], vec![(vec![0, 0], vec![0.0; 4])]).is_err());
        assert!(GraphicalModel::new(vec![0], vec![]).is_err());
    }

    #[test]
    fn reparametrization_examples() {
        let m = chain();
        let zero = apply_reparametrization(&m, &Reparametrization::zero(&m)).unwrap();
        assert_eq!(zero.factors(), m.factors());

        let mut phi = Reparametrization::zero(&m);
        *phi.message_mut(2, 1, &m) = vec![1.0, 1.0];
        let r = apply_reparametrization(&m, &phi).unwrap();
        assert_eq!(r.factor(r.find_factor(&[1]).unwrap()).table(), &[0.0, -1.0]);
        assert_eq!(r.factor(r.find_factor(&[0]).unwrap()).table(), &[0.0, 1.0]);
        assert_eq!(
            r.factor(r.find_factor(&[0, 1]).unwrap()).table(),
            &[1.0, 3.0, 3.0, 1.0]
        );
        // original untouched
        assert_eq!(m.factor(2).table(), &[0.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn optimal_reparametrization_examples() {
        let m =
            GraphicalModel::new(vec![2, 2], vec![(vec![0, 1], vec![5.0, 0.0, 6.0, 1.0])]).unwrap();
        let psi = optimal_reparametrization(&m, &Labeling(vec![0, 0])).unwrap();
        assert_eq!(psi.between(&m, 1, 0).unwrap(), &[-5.0, 0.0]);
        assert_eq!(psi.between(&m, 0, 1).unwrap(), &[-5.0, -6.0]);

        let z = GraphicalModel::new(vec![2, 3], vec![(vec![0, 1], vec![0.0; 6])]).unwrap();
        let psi = optimal_reparametrization(&z, &Labeling(vec![1, 2])).unwrap();
        assert_eq!(psi, Reparametrization::zero(&z));

        let a = 2.5;
        let potts =
            GraphicalModel::new(vec![2, 2], vec![(vec![0, 1], vec![0.0, a, a, 0.0])]).unwrap();
        let psi = optimal_reparametrization(&potts, &Labeling(vec![0, 0])).unwrap();
        assert_eq!(psi.between(&potts, 1, 0).unwrap(), &[0.0, -a]);
    }

    #[test]
    fn higher_order_reparametrization_is_rejected() {
        let m = GraphicalModel::new(vec![2, 2, 2], vec![(vec![0, 1, 2], vec![0.0; 8])]).unwrap();
        assert!(matches!(
            apply_reparametrization(&m, &Reparametrization::zero(&m)),
            Err(Error::UnsupportedArity { arity: 3, .. })
        ));
        assert!(optimal_reparametrization(&m, &Labeling(vec![0, 0, 0])).is_err());
    }
}
