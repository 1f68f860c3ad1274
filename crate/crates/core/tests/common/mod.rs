#![allow(dead_code)]

use persistency::io::{generate, GeneratorKind, InstanceSpec};
use persistency::GraphicalModel;

/// Small pairwise instance with integer potentials; label counts shrink as
/// the node count grows so the state space stays enumerable.
pub fn small_pairwise(seed: u64, nodes: usize) -> GraphicalModel {
    let labels_max = match nodes {
        0..=8 => 4,
        9..=10 => 3,
        _ => 2,
    };
    generate(&InstanceSpec {
        kind: GeneratorKind::RandomPairwise,
        nodes,
        labels: 2,
        labels_max: Some(labels_max),
        coupling: (-3.0, 3.0),
        noise: (-3.0, 3.0),
        edge_prob: 0.5,
        integer: true,
        seed,
        ..Default::default()
    })
    .unwrap()
}

/// Like [`small_pairwise`] with continuous potentials.
pub fn continuous_pairwise(seed: u64, nodes: usize, labels_max: usize) -> GraphicalModel {
    generate(&InstanceSpec {
        kind: GeneratorKind::RandomPairwise,
        nodes,
        labels: 2,
        labels_max: Some(labels_max),
        coupling: (-1.0, 1.0),
        noise: (-1.0, 1.0),
        edge_prob: 0.5,
        seed,
        ..Default::default()
    })
    .unwrap()
}

/// Random pairwise instance plus one ternary factor.
pub fn small_hyper(seed: u64, nodes: usize) -> GraphicalModel {
    generate(&InstanceSpec {
        kind: GeneratorKind::RandomHyper,
        nodes,
        labels: 2,
        labels_max: Some(3),
        coupling: (-3.0, 3.0),
        noise: (-3.0, 3.0),
        edge_prob: 0.4,
        hyperedges: 1,
        integer: true,
        seed,
        ..Default::default()
    })
    .unwrap()
}

pub fn potts(
    seed: u64,
    height: usize,
    width: usize,
    labels: usize,
    coupling: (f64, f64),
    noise: (f64, f64),
) -> GraphicalModel {
    generate(&InstanceSpec {
        kind: GeneratorKind::PottsGrid,
        height,
        width,
        labels,
        coupling,
        noise,
        seed,
        ..Default::default()
    })
    .unwrap()
}

pub fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|v| big.binary_search(v).is_ok())
}

/// Prints the criterion line and fails the test when `pass` is false.
pub fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "[{}] criterion {id:02} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}
