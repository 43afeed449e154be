//! Converts cognitive types into their belief transition matrices and
//! provides DAG validation, factorization, and path-blocking machinery.

pub mod beta;
pub mod dag;
pub mod joint;

use serde::{Deserialize, Serialize};

pub use beta::{coarse_to_beta, dag_to_beta, partition_to_beta, StatePartition, TransitionMatrix};
pub use dag::{CausalDag, DagNode, DagViolation};
pub use joint::{belief_with_signal, Joint, SignalBelief};

use crate::error::{Error, Result};
use crate::state::StateSpace;

/// A consumer's subjective model of the market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BeliefModel {
    /// The consumer conditions on a subset of the state variables
    /// (indices into the market's variable list).
    Coarse(Vec<usize>),
    /// The consumer perceives the market through a causal DAG.
    Dag(CausalDag),
    /// The consumer conditions on an explicit partition of the states.
    /// Coarse(M) is the special case partitioning by equality on M; the
    /// general form admits grouping patterns no variable subset induces.
    Partition(StatePartition),
}

/// A cognitive type: a display name plus a belief model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CognitiveType {
    pub name: String,
    pub model: BeliefModel,
}

impl CognitiveType {
    pub fn coarse(name: &str, vars: &[usize]) -> Self {
        let mut m = vars.to_vec();
        m.sort_unstable();
        m.dedup();
        CognitiveType { name: name.into(), model: BeliefModel::Coarse(m) }
    }

    pub fn dag(name: &str, dag: CausalDag) -> Self {
        CognitiveType { name: name.into(), model: BeliefModel::Dag(dag) }
    }

    pub fn partition(name: &str, partition: StatePartition) -> Self {
        CognitiveType { name: name.into(), model: BeliefModel::Partition(partition) }
    }

    /// The rational type conditioning on every variable.
    pub fn rational(space: &StateSpace) -> Self {
        Self::coarse("rational", &(0..space.num_vars()).collect::<Vec<_>>())
    }

    pub fn validate(&self, space: &StateSpace) -> Result<()> {
        match &self.model {
            BeliefModel::Coarse(m) => {
                if let Some(&v) = m.iter().find(|&&v| v >= space.num_vars()) {
                    return Err(Error::validation(
                        "types",
                        format!("type `{}` references variable index {v} out of range", self.name),
                    ));
                }
            }
            BeliefModel::Dag(dag) => {
                let violations = dag.validate(space.num_vars());
                if !violations.is_empty() {
                    return Err(Error::validation(
                        "types",
                        format!("type `{}` has an invalid DAG: {}", self.name, violations[0]),
                    ));
                }
            }
            BeliefModel::Partition(p) => {
                if p.num_states() != space.num_states() {
                    return Err(Error::validation(
                        "types",
                        format!(
                            "type `{}` partitions {} states, the space has {}",
                            self.name,
                            p.num_states(),
                            space.num_states()
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Dispatches a cognitive type to its transition matrix.
pub fn type_to_beta(t: &CognitiveType, mu: &[f64], space: &StateSpace) -> Result<TransitionMatrix> {
    match &t.model {
        BeliefModel::Coarse(m) => coarse_to_beta(m, mu, space),
        BeliefModel::Dag(dag) => dag_to_beta(dag, mu, space),
        BeliefModel::Partition(p) => partition_to_beta(p, mu),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Variable;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize) -> StateSpace {
        StateSpace::new(
            (0..n)
                .map(|i| Variable {
                    name: format!("t{}", i + 1),
                    domain: vec!["0".into(), "1".into()],
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rational_type_on_two_variables_is_identity() {
        let sp = space(2);
        let t = CognitiveType::rational(&sp);
        let beta = type_to_beta(&t, &[0.1, 0.2, 0.3, 0.4], &sp).unwrap();
        assert!(beta.is_identity(0.0));
    }

    #[test]
    fn coarse_and_dag_encoding_agree_on_random_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3usize {
            let sp = space(n);
            let count = sp.num_states();
            let subsets = 1usize << n;
            for bits in 0..subsets {
                let m: Vec<usize> = (0..n).filter(|i| bits & (1 << i) != 0).collect();
                for _ in 0..4 {
                    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let z: f64 = raw.iter().sum();
                    let mu: Vec<f64> = raw.iter().map(|x| x / z).collect();
                    let a = coarse_to_beta(&m, &mu, &sp).unwrap();
                    let b = dag_to_beta(&CausalDag::encode_coarse(&m), &mu, &sp).unwrap();
                    for s in 0..count {
                        for t in 0..count {
                            assert_abs_diff_eq!(a.get(s, t), b.get(s, t), epsilon = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn type_validation_rejects_out_of_range_subsets() {
        let sp = space(2);
        let t = CognitiveType::coarse("bad", &[5]);
        assert!(t.validate(&sp).is_err());
    }
}
