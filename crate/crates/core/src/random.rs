//! Seeded generators of random market instances and belief DAGs for
//! property sweeps. All randomness flows through the caller's RNG so
//! sweeps are reproducible from a single seed.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::belief::{CausalDag, CognitiveType, DagNode};
use crate::market::{MarketSpec, Variant};
use crate::state::{StateSpace, Variable};

fn binary_space(num_vars: usize) -> StateSpace {
    StateSpace::new(
        (0..num_vars)
            .map(|i| Variable { name: format!("t{}", i + 1), domain: vec!["0".into(), "1".into()] })
            .collect(),
    )
    .unwrap()
}

fn random_mu<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let z: f64 = raw.iter().sum();
    raw.iter().map(|x| x / z).collect()
}

/// Injective S values filling `(lo, hi)` with comfortable pairwise gaps,
/// assigned to states in random order.
fn random_s<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let width = hi - lo;
    let mut s: Vec<f64> =
        (0..n).map(|i| lo + width * (i as f64 + rng.gen_range(0.1..0.9)) / n as f64).collect();
    s.shuffle(rng);
    s
}

/// A coarse type observing everything except one variable. Its belief
/// cells hold two states each, so its pooled estimate lies strictly
/// between the two per-state levels and cannot flatten prices within a
/// cell; larger cells can, which would defeat the revelation checks the
/// sweeps assert.
fn drop_one_type(space: &StateSpace, dropped: usize, name: &str) -> CognitiveType {
    let subset: Vec<usize> = (0..space.num_vars()).filter(|&v| v != dropped).collect();
    CognitiveType::coarse(name, &subset)
}

/// The rational type plus 1..=3 distinct drop-one coarse types.
fn random_type_set<R: Rng>(rng: &mut R, space: &StateSpace) -> Vec<CognitiveType> {
    let num_vars = space.num_vars();
    let mut dropped: Vec<usize> = (0..num_vars).collect();
    dropped.shuffle(rng);
    dropped.truncate(rng.gen_range(1..=3.min(num_vars)));
    let mut types = vec![CognitiveType::rational(space)];
    for d in dropped {
        types.push(drop_one_type(space, d, &format!("skip-t{}", d + 1)));
    }
    types
}

/// A random exploitative market on 2 or 3 binary variables satisfying the
/// interior-existence condition `S^max - S^min < 2 Delta < S^min`, with the
/// rational type always present.
pub fn random_exploitative_spec<R: Rng>(rng: &mut R) -> MarketSpec {
    let num_vars = rng.gen_range(2..=3);
    let space = binary_space(num_vars);
    let n = space.num_states();
    let delta = rng.gen_range(0.8..1.2);
    let lo = 2.0 * delta + rng.gen_range(0.1..0.5);
    let hi = lo + rng.gen_range(0.8..1.7) * delta;
    let mu = random_mu(rng, n);
    let s = random_s(rng, n, lo, hi);
    let types = random_type_set(rng, &space);
    let c = 1.0;
    MarketSpec::new(space, mu, s, c + delta, c, Variant::Exploitative, types).unwrap()
}

/// A random beneficial market on 1 or 2 binary variables satisfying
/// `-2/3 Delta < S^min < S^max < -Delta`, with the rational type present.
pub fn random_beneficial_spec<R: Rng>(rng: &mut R) -> MarketSpec {
    let num_vars = rng.gen_range(1..=2);
    let space = binary_space(num_vars);
    let n = space.num_states();
    let d = rng.gen_range(0.9..1.5); // |Delta|
    let lo = 2.0 * d / 3.0 + 0.05 * d;
    let hi = d - 0.05 * d;
    let mu = random_mu(rng, n);
    let s = random_s(rng, n, lo, hi);
    let types = random_type_set(rng, &space);
    let c = 1.0 + d;
    MarketSpec::new(space, mu, s, c - d, c, Variant::Beneficial, types).unwrap()
}

/// A random drop-one coarse type to feed the add-type experiments.
pub fn random_added_type<R: Rng>(rng: &mut R, space: &StateSpace, tag: usize) -> CognitiveType {
    let dropped = rng.gen_range(0..space.num_vars());
    drop_one_type(space, dropped, &format!("added{tag}"))
}

/// A uniformly perturbed perfect signal-free DAG on `num_vars` state
/// variables: a random variable ordering, a random subset of the edges that
/// ordering admits, retried until every node's parents form a clique.
pub fn random_perfect_dag<R: Rng>(rng: &mut R, num_vars: usize) -> CausalDag {
    loop {
        let mut order: Vec<usize> = (0..num_vars).collect();
        order.shuffle(rng);
        let mut nodes = vec![DagNode::Price, DagNode::Addon];
        nodes.extend(order.iter().map(|&v| DagNode::StateVar(v)));
        let mut edges = Vec::new();
        // Variable-to-variable edges, forward in the sampled order.
        for a in 0..num_vars {
            for b in a + 1..num_vars {
                if rng.gen_bool(0.5) {
                    edges.push((2 + a, 2 + b));
                }
            }
        }
        // Variables feeding the endogenous nodes, and optionally phi -> q.
        for a in 0..num_vars {
            if rng.gen_bool(0.5) {
                edges.push((2 + a, 0));
            }
            if rng.gen_bool(0.5) {
                edges.push((2 + a, 1));
            }
        }
        if rng.gen_bool(0.5) {
            edges.push((0, 1));
        }
        let dag = CausalDag::new(nodes, edges).unwrap();
        if dag.validate(num_vars).is_empty() && dag.is_perfect() {
            return dag;
        }
    }
}
