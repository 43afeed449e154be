//! Built-in market instances used throughout the tests and the CLI.

use crate::belief::{CausalDag, CognitiveType, DagNode, StatePartition};
use crate::error::{Error, Result};
use crate::market::{MarketSpec, Variant};
use crate::state::{StateSpace, Variable};

/// Probability assigned to states the instance treats as off-support, kept
/// strictly positive to satisfy the full-support requirement.
pub const EPS_SUPPORT: f64 = 1e-12;

fn two_binary_vars() -> StateSpace {
    StateSpace::new(vec![
        Variable { name: "t1".into(), domain: vec!["0".into(), "1".into()] },
        Variable { name: "t2".into(), domain: vec!["0".into(), "1".into()] },
    ])
    .unwrap()
}

/// mu uniform over (0,0), (0,1), (1,0); the leftover state (1,1) carries
/// [`EPS_SUPPORT`] and a high potential add-on so it stays out of the way.
fn padded_three_state_market(types: Vec<CognitiveType>) -> MarketSpec {
    let space = two_binary_vars();
    let third = (1.0 - EPS_SUPPORT) / 3.0;
    MarketSpec::new(
        space,
        vec![third, third, third, EPS_SUPPORT],
        vec![3.0, 4.0, 4.01, 8.0],
        2.0,
        1.0,
        Variant::Exploitative,
        types,
    )
    .unwrap()
}

/// Four coarse types (nothing, each single variable, both) on the
/// three-supported-state exploitative market.
pub fn example_3_1() -> MarketSpec {
    let space = two_binary_vars();
    padded_three_state_market(vec![
        CognitiveType::coarse("empty", &[]),
        CognitiveType::coarse("t1", &[0]),
        CognitiveType::coarse("t2", &[1]),
        CognitiveType::rational(&space),
    ])
}

/// The chain DAG: phi <- t1 -> t2 -> q.
pub fn chain_dag_g1() -> CausalDag {
    CausalDag::new(
        vec![DagNode::Price, DagNode::Addon, DagNode::StateVar(0), DagNode::StateVar(1)],
        vec![(2, 0), (2, 3), (3, 1)],
    )
    .unwrap()
}

/// The mirrored chain: phi <- t2 -> t1 -> q.
pub fn chain_dag_g2() -> CausalDag {
    CausalDag::new(
        vec![DagNode::Price, DagNode::Addon, DagNode::StateVar(0), DagNode::StateVar(1)],
        vec![(3, 0), (3, 2), (2, 1)],
    )
    .unwrap()
}

/// A fully connected DAG whose belief matrix is the identity.
pub fn rational_dag_two_vars() -> CausalDag {
    CausalDag::new(
        vec![DagNode::Price, DagNode::Addon, DagNode::StateVar(0), DagNode::StateVar(1)],
        vec![(2, 3), (2, 0), (3, 0), (2, 1), (3, 1), (0, 1)],
    )
    .unwrap()
}

/// The market of [`example_3_1`] perceived through three DAGs: a rational
/// one and the two chains.
pub fn example_5_2() -> MarketSpec {
    padded_three_state_market(vec![
        CognitiveType::dag("g-star", rational_dag_two_vars()),
        CognitiveType::dag("g1", chain_dag_g1()),
        CognitiveType::dag("g2", chain_dag_g2()),
    ])
}

/// Two-state beneficial market with a single fully coarse type. Tests add
/// the rational type to reproduce the non-monotone comparison.
pub fn example_4_beneficial() -> MarketSpec {
    let space =
        StateSpace::new(vec![Variable { name: "t".into(), domain: vec!["0".into(), "1".into()] }])
            .unwrap();
    MarketSpec::new(
        space,
        vec![0.5, 0.5],
        vec![0.9, 1.0],
        0.0,
        1.2,
        Variant::Beneficial,
        vec![CognitiveType::coarse("empty", &[])],
    )
    .unwrap()
}

/// Three binary variables with t3 nearly equal to XOR(t1, t2) and a single
/// chain-of-three DAG type plus the rational benchmark. Illustrates how a
/// spurious t1-to-add-on channel arises; no numeric claim attached.
pub fn comovement_5_3_1() -> MarketSpec {
    let space = StateSpace::new(
        ["t1", "t2", "t3"]
            .iter()
            .map(|n| Variable { name: (*n).into(), domain: vec!["0".into(), "1".into()] })
            .collect(),
    )
    .unwrap();
    let eps = 1e-6;
    let mu: Vec<f64> = (0..8)
        .map(|s| {
            let d = space.digits(s);
            let xor = d[0] ^ d[1];
            if d[2] == xor {
                0.25 - eps
            } else {
                eps
            }
        })
        .collect();
    let s: Vec<f64> = (0..8)
        .map(|st| {
            let d = space.digits(st);
            0.01 * d[0] as f64 + d[1] as f64 + 0.02 * d[2] as f64 + 2.5
        })
        .collect();
    let chain3 = CausalDag::new(
        vec![
            DagNode::Price,
            DagNode::Addon,
            DagNode::StateVar(0),
            DagNode::StateVar(1),
            DagNode::StateVar(2),
        ],
        // phi <- t1 -> t3 -> t2 -> q
        vec![(2, 0), (2, 4), (4, 3), (3, 1)],
    )
    .unwrap();
    MarketSpec::new(
        space.clone(),
        mu,
        s,
        2.0,
        1.0,
        Variant::Exploitative,
        vec![CognitiveType::dag("chain3", chain3), CognitiveType::rational(&space)],
    )
    .unwrap()
}

/// Extended short chain with a private signal w observing both variables:
/// phi <- t1 -> t2 -> q, t1 -> w <- t2.
pub fn extended_short_chain() -> CausalDag {
    CausalDag::new(
        vec![
            DagNode::Price,
            DagNode::Addon,
            DagNode::StateVar(0),
            DagNode::StateVar(1),
            DagNode::Signal("w".into()),
        ],
        vec![(2, 0), (2, 3), (3, 1), (2, 4), (3, 4)],
    )
    .unwrap()
}

/// The variant of [`extended_short_chain`] whose price instead hangs off
/// t2, so the price's parents block every path from the signal to the
/// add-on.
pub fn extended_short_chain_price_on_t2() -> CausalDag {
    CausalDag::new(
        vec![
            DagNode::Price,
            DagNode::Addon,
            DagNode::StateVar(0),
            DagNode::StateVar(1),
            DagNode::Signal("w".into()),
        ],
        vec![(3, 0), (2, 3), (3, 1), (2, 4), (3, 4)],
    )
    .unwrap()
}

/// A market driving the ex-ante expected add-on toward its lower bound
/// S-bar / 2 as `n` grows. One state `base` with potential add-on near
/// 2 Delta and mass `alpha = (4 Delta - s_bar) / (2 Delta)`, and n states
/// `e_i` near 4 Delta sharing the rest; types are the rational one plus,
/// for each i, the type that cannot tell `base` from `e_i`. Small distinct
/// relative perturbations (1e-2 scale) keep S injective and supply interior.
pub fn lower_bound_scenario(n: usize, delta: f64, s_bar: f64) -> Result<MarketSpec> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be at least 2")));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    let alpha = (4.0 * delta - s_bar) / (2.0 * delta);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha = {alpha} outside (0, 1); need 2*delta < s_bar < 4*delta"
        )));
    }
    let mut labels = vec!["base".to_string()];
    labels.extend((1..=n).map(|i| format!("e{i}")));
    let space = StateSpace::new(vec![Variable { name: "u".into(), domain: labels }])?;

    let mut mu = vec![alpha];
    mu.extend(std::iter::repeat_n((1.0 - alpha) / n as f64, n));

    let d0 = 1e-2;
    let mut s = vec![2.0 * delta * (1.0 + d0)];
    s.extend((1..=n).map(|i| 4.0 * delta * (1.0 - d0 * i as f64 / (2.0 * n as f64))));

    let mut types = vec![CognitiveType::rational(&space)];
    for i in 1..=n {
        let groups = vec![vec![0, i], (1..=n).filter(|&j| j != i).collect::<Vec<_>>()];
        let partition = StatePartition::from_groups(&groups, n + 1)?;
        types.push(CognitiveType::partition(&format!("pool-e{i}"), partition));
    }
    MarketSpec::new(space, mu, s, 1.0 + delta, 1.0, Variant::Exploitative, types)
}

/// Names and builders of the parameter-free built-in scenarios.
pub fn builtin(name: &str) -> Option<MarketSpec> {
    match name {
        "example_3_1" => Some(example_3_1()),
        "example_4_beneficial" => Some(example_4_beneficial()),
        "example_5_2" => Some(example_5_2()),
        "comovement_5_3_1" => Some(comovement_5_3_1()),
        _ => None,
    }
}

/// The list of parameter-free built-in scenario names.
pub fn builtin_names() -> &'static [&'static str] {
    &["example_3_1", "example_4_beneficial", "example_5_2", "comovement_5_3_1"]
}
