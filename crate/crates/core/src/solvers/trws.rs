//! Sequential tree-reweighted message passing in reparametrization form.
//!
//! The state holds reparametrized unaries and pairwise tables. A node update
//! first *receives* (moves per-label minima of all incident pairwise tables
//! into the unary) and then *sends* a `1/max(n_in, n_out)` share of its unary
//! into the tables towards the nodes that follow in the current sweep
//! direction. Both steps keep every labeling's energy unchanged and never
//! decrease the bound `Σ_v min θ_v + Σ_uv min θ_uv`.

use super::{Certificate, SolverOutput};
use crate::error::Result;
use crate::model::GraphicalModel;

/// When to stop iterating.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    /// Relative gap between best primal energy and bound; only ends the run
    /// once a pass leaves the bound unchanged.
    pub gap: f64,
    /// Passes without growth of the committed-node count.
    pub stall: usize,
    pub max_passes: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            gap: 1e-5,
            stall: 100,
            max_passes: 1500,
        }
    }
}

#[derive(Clone, Debug)]
struct Edge {
    s: usize,
    t: usize,
    table: Vec<f64>, // [x_s][x_t], s < t
}

#[derive(Clone, Debug)]
pub struct TrwsState {
    label_counts: Vec<usize>,
    unary: Vec<Vec<f64>>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    n_in: Vec<usize>,
    n_out: Vec<usize>,
    /// Bound after initialization and after every pass.
    pub bound_history: Vec<f64>,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

impl TrwsState {
    pub fn new(model: &GraphicalModel) -> Result<Self> {
        model.require_pairwise("TRW-S handles pairwise models only")?;
        let n = model.num_nodes();
        let mut unary: Vec<Vec<f64>> = (0..n).map(|v| vec![0.0; model.label_count(v)]).collect();
        let mut edges = Vec::new();
        let mut incident = vec![Vec::new(); n];
        let mut n_in = vec![0; n];
        let mut n_out = vec![0; n];
        for factor in model.factors() {
            match *factor.scope() {
                [v] => {
                    for (u, t) in unary[v].iter_mut().zip(factor.table()) {
                        *u += t;
                    }
                }
                [s, t] => {
                    incident[s].push(edges.len());
                    incident[t].push(edges.len());
                    n_out[s] += 1;
                    n_in[t] += 1;
                    edges.push(Edge {
                        s,
                        t,
                        table: factor.table().to_vec(),
                    });
                }
                _ => unreachable!(),
            }
        }
        let mut st = TrwsState {
            label_counts: model.label_counts().to_vec(),
            unary,
            edges,
            incident,
            n_in,
            n_out,
            bound_history: Vec::new(),
        };
        let b = st.lower_bound();
        st.bound_history.push(b);
        Ok(st)
    }

    pub fn lower_bound(&self) -> f64 {
        self.unary.iter().map(|u| min_of(u)).sum::<f64>()
            + self.edges.iter().map(|e| min_of(&e.table)).sum::<f64>()
    }

    pub fn unaries(&self) -> &[Vec<f64>] {
        &self.unary
    }

    fn receive(&mut self, v: usize) {
        for &e in &self.incident[v] {
            let edge = &mut self.edges[e];
            let ks = self.label_counts[edge.s];
            let kt = self.label_counts[edge.t];
            if edge.s == v {
                for a in 0..ks {
                    let row = &mut edge.table[a * kt..(a + 1) * kt];
                    let m = min_of(row);
                    row.iter_mut().for_each(|x| *x -= m);
                    self.unary[v][a] += m;
                }
            } else {
                for b in 0..kt {
                    let m = (0..ks)
                        .map(|a| edge.table[a * kt + b])
                        .fold(f64::INFINITY, f64::min);
                    for a in 0..ks {
                        edge.table[a * kt + b] -= m;
                    }
                    self.unary[v][b] += m;
                }
            }
        }
    }

    fn send(&mut self, v: usize, forward: bool) {
        let chains = self.n_in[v].max(self.n_out[v]);
        if chains == 0 {
            return;
        }
        let w = 1.0 / chains as f64;
        let mut sent = 0;
        for &e in &self.incident[v] {
            let edge = &mut self.edges[e];
            let towards_later = edge.s == v;
            if towards_later != forward {
                continue;
            }
            let kt = self.label_counts[edge.t];
            let ks = self.label_counts[edge.s];
            for a in 0..ks {
                for b in 0..kt {
                    let share = if edge.s == v {
                        self.unary[v][a]
                    } else {
                        self.unary[v][b]
                    };
                    edge.table[a * kt + b] += w * share;
                }
            }
            sent += 1;
        }
        let keep = 1.0 - sent as f64 * w;
        self.unary[v].iter_mut().for_each(|u| *u *= keep);
    }

    /// One forward and one backward sweep; records the bound.
    pub fn pass(&mut self) {
        let n = self.unary.len();
        for v in 0..n {
            self.receive(v);
            self.send(v, true);
        }
        for v in (0..n).rev() {
            self.receive(v);
            self.send(v, false);
        }
        let b = self.lower_bound();
        self.bound_history.push(b);
    }

    /// Reads the current state out on a normalized copy.
    ///
    /// Every node receives once more, after which all pairwise tables are
    /// nonnegative with minimum 0 and the bound is `Σ_v min θ_v`. A node is
    /// committed when its unary minimum beats the runner-up by more than
    /// `tol` and every incident pairwise table is minimal at the committed
    /// label pair. Other nodes are committed to their sequentially decoded
    /// label when that label and all incident label pairs are minimal, at
    /// the node and at each of its neighbors.
    pub fn decode(&self, tol: f64) -> Decoded {
        let mut st = self.clone();
        for v in 0..st.unary.len() {
            st.receive(v);
        }
        let bound = st.lower_bound();
        let mut argmin = Vec::with_capacity(st.unary.len());
        let mut commits: Vec<Option<usize>> = st
            .unary
            .iter()
            .map(|u| {
                let best = first_argmin(u);
                argmin.push(best);
                let runner_up = u
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != best)
                    .map(|(_, &x)| x)
                    .fold(f64::INFINITY, f64::min);
                (runner_up - u[best] > tol * (1.0 + u[best].abs())).then_some(best)
            })
            .collect();
        let mut broken = Vec::new();
        for e in &st.edges {
            if let (Some(a), Some(b)) = (commits[e.s], commits[e.t]) {
                let kt = st.label_counts[e.t];
                let m = min_of(&e.table);
                if e.table[a * kt + b] - m > tol * (1.0 + m.abs()) {
                    broken.push(e.s);
                    broken.push(e.t);
                }
            }
        }
        for v in broken {
            commits[v] = None;
        }
        let sequential = st.sequential_labeling();
        let mut consistent: Vec<bool> = st
            .unary
            .iter()
            .zip(&sequential)
            .map(|(u, &l)| u[l] - min_of(u) <= tol * (1.0 + u[l].abs()))
            .collect();
        for e in &st.edges {
            let kt = st.label_counts[e.t];
            let m = min_of(&e.table);
            if e.table[sequential[e.s] * kt + sequential[e.t]] - m > tol * (1.0 + m.abs()) {
                consistent[e.s] = false;
                consistent[e.t] = false;
            }
        }
        let mut interior = consistent.clone();
        for e in &st.edges {
            if !consistent[e.s] || !consistent[e.t] {
                interior[e.s] = false;
                interior[e.t] = false;
            }
        }
        for (v, c) in commits.iter_mut().enumerate() {
            if c.is_none() && interior[v] {
                *c = Some(sequential[v]);
            }
        }
        Decoded {
            commits,
            argmin,
            sequential,
            bound,
        }
    }

    /// Labels nodes in order, each minimizing its unary plus the pairwise
    /// tables towards already labeled neighbours and the row minima towards
    /// the others.
    fn sequential_labeling(&self) -> Vec<usize> {
        let n = self.unary.len();
        let mut x = vec![0; n];
        for v in 0..n {
            let mut cost = self.unary[v].clone();
            for &e in &self.incident[v] {
                let edge = &self.edges[e];
                let kt = self.label_counts[edge.t];
                if edge.t == v {
                    let a = x[edge.s];
                    for (b, c) in cost.iter_mut().enumerate() {
                        *c += edge.table[a * kt + b];
                    }
                } else {
                    for (a, c) in cost.iter_mut().enumerate() {
                        *c += min_of(&edge.table[a * kt..(a + 1) * kt]);
                    }
                }
            }
            x[v] = first_argmin(&cost);
        }
        x
    }
}

fn first_argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct Decoded {
    /// Labels locally consistent with the dual.
    pub commits: Vec<Option<usize>>,
    /// Per-node unary argmin, ties to the lowest label.
    pub argmin: Vec<usize>,
    pub sequential: Vec<usize>,
    /// Bound of the normalized state, at least the state's own bound.
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct TrwsResult {
    pub output: SolverOutput,
    pub state: TrwsState,
    /// Lowest-energy decoded labeling seen during the passes.
    pub best_labeling: Vec<usize>,
    pub best_energy: f64,
}

/// Runs passes until a decoded labeling attains the bound, the relative gap
/// is below `stop.gap` with the bound no longer rising, the committed count
/// stalls, or the pass budget is exhausted.
///
/// A labeling whose energy meets the bound within `tol` is a global optimum
/// and is returned with every node committed. Otherwise the output keeps the
/// uniquely minimal labels of the last pass, and a complete set of those is
/// accepted only if it also meets the bound.
pub fn solve_trws(model: &GraphicalModel, stop: &StopRule, tol: f64) -> Result<TrwsResult> {
    let mut state = TrwsState::new(model)?;
    let n = model.num_nodes();
    let mut best_labeling = vec![0; n];
    let mut best_energy = f64::INFINITY;
    let mut best_committed = 0;
    let mut last_growth = 0;
    let mut passes = 0;
    let meets = |e: f64, bound: f64| e - bound <= tol * (1.0 + bound.abs());
    let (labels, bound) = loop {
        state.pass();
        passes += 1;
        let d = state.decode(tol);
        for x in [d.argmin, d.sequential] {
            let e = model.energy_unchecked(&x);
            if e < best_energy {
                best_energy = e;
                best_labeling = x;
            }
        }
        if meets(best_energy, d.bound) {
            break (best_labeling.iter().map(|&l| Some(l)).collect(), d.bound);
        }
        let committed = d.commits.iter().filter(|l| l.is_some()).count();
        if committed > best_committed {
            best_committed = committed;
            last_growth = passes;
        }
        let gap = (best_energy - d.bound) / best_energy.abs().max(1.0);
        let h = &state.bound_history;
        let rising = h[h.len() - 1] - h[h.len() - 2] > tol * (1.0 + d.bound.abs());
        if (gap <= stop.gap && !rising)
            || passes - last_growth >= stop.stall
            || passes >= stop.max_passes
        {
            let mut labels = d.commits;
            if let Some(x) = labels.iter().copied().collect::<Option<Vec<usize>>>() {
                if !meets(model.energy_unchecked(&x), d.bound) {
                    labels.iter_mut().for_each(|l| *l = None);
                }
            }
            break (labels, d.bound);
        }
    };
    Ok(TrwsResult {
        output: SolverOutput {
            labels,
            bound,
            certificate: Certificate::TreeAgreement,
            iterations: passes,
        },
        state,
        best_labeling,
        best_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::solve_bruteforce;

    #[test]
    fn separable_model_commits_in_one_pass() {
        let m = GraphicalModel::new(
            vec![2, 3, 2],
            vec![
                (vec![0], vec![1.0, 0.0]),
                (vec![1], vec![0.5, -1.0, 2.0]),
                (vec![2], vec![0.0, 3.0]),
                (vec![0, 1], vec![0.0; 6]),
                (vec![1, 2], vec![0.0; 6]),
            ],
        )
        .unwrap();
        let r = solve_trws(&m, &StopRule::default(), 1e-9).unwrap();
        assert_eq!(r.output.labels, vec![Some(1), Some(1), Some(0)]);
        assert_eq!(r.output.iterations, 1);
        assert!((r.output.bound - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn frustrated_cycle_has_no_agreement() {
        let t = vec![1.0, 0.5, 0.5, 1.0];
        let m = GraphicalModel::new(
            vec![2, 2, 2],
            vec![
                (vec![0, 1], t.clone()),
                (vec![1, 2], t.clone()),
                (vec![0, 2], t),
            ],
        )
        .unwrap();
        let r = solve_trws(&m, &StopRule::default(), 1e-9).unwrap();
        assert!(
            r.output.labels.iter().all(Option::is_none),
            "{:?}",
            r.output.labels
        );
        assert!(r.output.bound <= 1.5 + 1e-9);
    }

    #[test]
    fn bound_is_monotone_and_valid() {
        // 3x3 grid with mixed couplings
        let mut f = Vec::new();
        for v in 0..9 {
            f.push((
                vec![v],
                vec![(v % 3) as f64, ((v * 7) % 5) as f64 - 2.0, 1.0],
            ));
        }
        let idx = |r: usize, c: usize| r * 3 + c;
        for r in 0..3 {
            for c in 0..3 {
                if c + 1 < 3 {
                    f.push((
                        vec![idx(r, c), idx(r, c + 1)],
                        vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0],
                    ));
                }
                if r + 1 < 3 {
                    f.push((
                        vec![idx(r, c), idx(r + 1, c)],
                        vec![1.0, 0.0, 3.0, 0.0, 2.0, 0.0, 3.0, 0.0, 1.0],
                    ));
                }
            }
        }
        let m = GraphicalModel::new(vec![3; 9], f).unwrap();
        let r = solve_trws(
            &m,
            &StopRule {
                max_passes: 50,
                ..Default::default()
            },
            1e-9,
        )
        .unwrap();
        let h = &r.state.bound_history;
        assert!(h
            .windows(2)
            .all(|w| w[1] >= w[0] - 1e-9 * (1.0 + w[0].abs())));
        let opt = solve_bruteforce(&m, 1e6, 1e-9).unwrap().value;
        assert!(r.output.bound <= opt + 1e-9);
        if let Some(x) = r.output.labeling() {
            assert!((m.energy(&x).unwrap() - opt).abs() < 1e-7);
        }
    }
}
