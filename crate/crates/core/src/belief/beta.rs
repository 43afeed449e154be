use serde::{Deserialize, Serialize};

use crate::belief::dag::{CausalDag, DagNode};
use crate::belief::joint::Joint;
use crate::error::{Error, Result};
use crate::state::StateSpace;

/// Row tolerance for stochasticity checks.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// A row-stochastic matrix of belief weights over "virtual" states:
/// row theta holds beta(theta' | theta).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    n: usize,
    beta: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates row sums (within 1e-10) and clamps tiny negative entries
    /// (>= -1e-12) to zero.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut beta = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation("beta", format!("row {i} has length {}", row.len())));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::validation(
                    "beta",
                    format!("row {i} sums to {sum}, expected 1"),
                ));
            }
            for &x in row {
                if x < -1e-12 {
                    return Err(Error::validation("beta", format!("row {i} has entry {x}")));
                }
                beta.push(x.max(0.0));
            }
        }
        Ok(TransitionMatrix { n, beta })
    }

    pub fn identity(n: usize) -> Self {
        let mut beta = vec![0.0; n * n];
        for i in 0..n {
            beta[i * n + i] = 1.0;
        }
        TransitionMatrix { n, beta }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.beta[state * self.n..(state + 1) * self.n]
    }

    pub fn get(&self, state: usize, virtual_state: usize) -> f64 {
        self.beta[state * self.n + virtual_state]
    }

    /// The type's add-on estimate in `state`: sum over theta' of
    /// beta(theta' | state) * q_bar(theta').
    pub fn estimate(&self, state: usize, q_bar: &[f64]) -> f64 {
        debug_assert_eq!(q_bar.len(), self.n);
        self.row(state).iter().zip(q_bar).map(|(b, q)| b * q).sum()
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            self.row(i)
                .iter()
                .enumerate()
                .all(|(j, &b)| (b - if i == j { 1.0 } else { 0.0 }).abs() <= tol)
        })
    }

    /// Maximum absolute deviation of mu' * beta from mu'.
    pub fn invariance_defect(&self, mu: &[f64]) -> f64 {
        (0..self.n)
            .map(|j| {
                let pushed: f64 = (0..self.n).map(|i| mu[i] * self.get(i, j)).sum();
                (pushed - mu[j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A partition of the state indices into belief cells: the consumer infers
/// only which cell the price-revealed state lies in. Cells are identified
/// by dense ids `0..num_cells`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatePartition {
    cell_of: Vec<usize>,
}

impl StatePartition {
    pub fn new(cell_of: Vec<usize>) -> Result<Self> {
        let cells = cell_of.iter().copied().max().map_or(0, |m| m + 1);
        for c in 0..cells {
            if !cell_of.contains(&c) {
                return Err(Error::validation("partition", format!("cell {c} is empty")));
            }
        }
        if cell_of.is_empty() {
            return Err(Error::validation("partition", "no states"));
        }
        Ok(StatePartition { cell_of })
    }

    /// Groups given as lists of state indices; must cover every state once.
    pub fn from_groups(groups: &[Vec<usize>], num_states: usize) -> Result<Self> {
        let mut cell_of = vec![usize::MAX; num_states];
        for (c, group) in groups.iter().enumerate() {
            for &s in group {
                if s >= num_states {
                    return Err(Error::validation(
                        "partition",
                        format!("state index {s} out of range"),
                    ));
                }
                if cell_of[s] != usize::MAX {
                    return Err(Error::validation(
                        "partition",
                        format!("state {s} appears in two groups"),
                    ));
                }
                cell_of[s] = c;
            }
        }
        if let Some(s) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::validation("partition", format!("state {s} is in no group")));
        }
        Ok(StatePartition { cell_of })
    }

    /// The partition induced by equality on the variables of `m`.
    pub fn from_coarse(m: &[usize], space: &StateSpace) -> Self {
        let mut keys: Vec<Vec<usize>> = Vec::new();
        let mut cell_of = Vec::with_capacity(space.num_states());
        for s in space.states() {
            let key: Vec<usize> = m.iter().map(|&v| space.component(s, v)).collect();
            let cell = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
                keys.push(key.clone());
                keys.len() - 1
            });
            cell_of.push(cell);
        }
        StatePartition { cell_of }
    }

    pub fn cell_of(&self, state: usize) -> usize {
        self.cell_of[state]
    }

    pub fn num_states(&self) -> usize {
        self.cell_of.len()
    }
}

/// beta for a partition-based (coarse) belief: conditioning mu on the cell
/// of the revealed state. Rows whose cell carries zero mass fall back to a
/// point mass on the state itself; such states are never reachable under a
/// full-support mu.
pub fn partition_to_beta(partition: &StatePartition, mu: &[f64]) -> Result<TransitionMatrix> {
    let n = mu.len();
    if partition.num_states() != n {
        return Err(Error::validation(
            "partition",
            format!("partition covers {} states, mu has {}", partition.num_states(), n),
        ));
    }
    let cells = partition.cell_of.iter().copied().max().unwrap() + 1;
    let mut mass = vec![0.0; cells];
    for (s, &c) in partition.cell_of.iter().enumerate() {
        mass[c] += mu[s];
    }
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        let c = partition.cell_of(s);
        let mut row = vec![0.0; n];
        if mass[c] > 0.0 {
            for t in 0..n {
                if partition.cell_of(t) == c {
                    row[t] = mu[t] / mass[c];
                }
            }
        } else {
            row[s] = 1.0;
        }
        rows.push(row);
    }
    TransitionMatrix::from_rows(rows)
}

/// beta for the coarse type M: beta(theta'|theta) = mu(theta'|theta'_M = theta_M).
pub fn coarse_to_beta(m: &[usize], mu: &[f64], space: &StateSpace) -> Result<TransitionMatrix> {
    if let Some(&v) = m.iter().find(|&&v| v >= space.num_vars()) {
        return Err(Error::validation("type", format!("variable index {v} out of range")));
    }
    partition_to_beta(&StatePartition::from_coarse(m, space), mu)
}

/// beta for a perfect DAG, extracted by the indicator-basis method: build
/// the fully revealing joint in which the price names the state and the
/// add-on carries a distinct label per state, factorize it through the DAG,
/// and read off beta(theta'|theta) = p_G(q = label(theta') | phi = phi(theta)).
/// The result is independent of the chosen labels.
pub fn dag_to_beta(dag: &CausalDag, mu: &[f64], space: &StateSpace) -> Result<TransitionMatrix> {
    let violations = dag.validate(space.num_vars());
    if !violations.is_empty() {
        return Err(Error::UnsupportedDag(format!("invalid DAG: {}", violations[0])));
    }
    if dag.signal_node().is_some() {
        return Err(Error::UnsupportedDag(
            "belief matrices are defined for signal-free DAGs".into(),
        ));
    }
    if !dag.is_perfect() {
        return Err(Error::UnsupportedDag(
            "the DAG is not perfect: some node's parents are not a clique".into(),
        ));
    }
    let identity: Vec<usize> = (0..mu.len()).collect();
    dag_to_beta_with_labels(dag, mu, space, &identity)
}

/// Extraction with an explicit injective add-on labeling; label independence
/// is a consequence of the representation's uniqueness and is exercised in
/// tests.
fn dag_to_beta_with_labels(
    dag: &CausalDag,
    mu: &[f64],
    space: &StateSpace,
    labels: &[usize],
) -> Result<TransitionMatrix> {
    let n = space.num_states();
    if mu.len() != n {
        return Err(Error::validation("mu", format!("expected {n} entries, got {}", mu.len())));
    }
    let mut vars = Vec::new();
    for (i, node) in dag.nodes().iter().enumerate() {
        let card = match node {
            DagNode::StateVar(v) => space.variables()[*v].domain.len(),
            DagNode::Price | DagNode::Addon => n,
            DagNode::Signal(_) => unreachable!("signal DAGs rejected above"),
        };
        vars.push((dag.node_name(i, space), card));
    }
    let mut joint = Joint::zeros(vars);
    for s in space.states() {
        let assignment: Vec<usize> = dag
            .nodes()
            .iter()
            .map(|node| match node {
                DagNode::StateVar(v) => space.component(s, *v),
                DagNode::Price => s,
                DagNode::Addon => labels[s],
                DagNode::Signal(_) => unreachable!(),
            })
            .collect();
        joint.add_mass(&assignment, mu[s]);
    }
    let distorted = joint.factorize(dag, space)?;
    let phi_v = distorted.var_index("phi").unwrap();
    let q_v = distorted.var_index("q").unwrap();
    let marg = distorted.marginal(&[phi_v, q_v]);

    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        let cell = &marg[s * n..(s + 1) * n];
        let z: f64 = cell.iter().sum();
        let mut row = vec![0.0; n];
        if z > 0.0 {
            for t in 0..n {
                row[t] = cell[labels[t]] / z;
            }
        } else {
            // Zero-mass state: the price phi(s) is never observed.
            row[s] = 1.0;
        }
        rows.push(row);
    }
    TransitionMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Variable;
    use approx::assert_abs_diff_eq;

    fn two_binary_vars() -> StateSpace {
        StateSpace::new(vec![
            Variable { name: "t1".into(), domain: vec!["0".into(), "1".into()] },
            Variable { name: "t2".into(), domain: vec!["0".into(), "1".into()] },
        ])
        .unwrap()
    }

    /// mu = U{(0,0),(0,1),(1,0)} on the 4-state product; (1,1) has zero mass.
    fn three_state_mu() -> Vec<f64> {
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]
    }

    fn chain() -> CausalDag {
        CausalDag::new(
            vec![DagNode::Price, DagNode::Addon, DagNode::StateVar(0), DagNode::StateVar(1)],
            vec![(2, 0), (2, 3), (3, 1)],
        )
        .unwrap()
    }

    #[test]
    fn rational_coarse_type_is_identity() {
        let space = two_binary_vars();
        let mu = vec![0.1, 0.2, 0.3, 0.4];
        let beta = coarse_to_beta(&[0, 1], &mu, &space).unwrap();
        assert!(beta.is_identity(0.0));
    }

    #[test]
    fn fully_coarse_rows_equal_mu() {
        let space = two_binary_vars();
        let mu = vec![0.1, 0.2, 0.3, 0.4];
        let beta = coarse_to_beta(&[], &mu, &space).unwrap();
        for s in 0..4 {
            assert_eq!(beta.row(s), mu.as_slice());
        }
    }

    #[test]
    fn partially_coarse_conditions_on_observed_variable() {
        // Type {1} at state (0,1): belief uniform over (0,0) and (0,1).
        let space = two_binary_vars();
        let beta = coarse_to_beta(&[0], &three_state_mu(), &space).unwrap();
        assert_abs_diff_eq!(beta.get(1, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(beta.get(1, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(beta.get(1, 2), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn chain_dag_beta_matches_displayed_values() {
        let space = two_binary_vars();
        let beta = dag_to_beta(&chain(), &three_state_mu(), &space).unwrap();
        // Rows for theta_1 = 0, i.e. states (0,0) and (0,1).
        for s in [0, 1] {
            assert_abs_diff_eq!(beta.get(s, 0), 0.25, epsilon = 1e-12);
            assert_abs_diff_eq!(beta.get(s, 2), 0.25, epsilon = 1e-12);
            assert_abs_diff_eq!(beta.get(s, 1), 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(beta.get(s, 3), 0.0, epsilon = 1e-12);
        }
        // Row for (1,0).
        assert_abs_diff_eq!(beta.get(2, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(beta.get(2, 2), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(beta.get(2, 1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn chain_dag_beta_matches_closed_form_on_random_mu() {
        // Oracle: beta(t1',t2' | t1,t2) = mu(t2'|t1) mu(t1'|t2').
        let space = two_binary_vars();
        let raw = [0.31, 0.17, 0.29, 0.23];
        let z: f64 = raw.iter().sum();
        let mu: Vec<f64> = raw.iter().map(|x| x / z).collect();
        let beta = dag_to_beta(&chain(), &mu, &space).unwrap();
        let marg_t1 = [mu[0] + mu[1], mu[2] + mu[3]];
        let marg_t2 = [mu[0] + mu[2], mu[1] + mu[3]];
        for s in 0..4 {
            let t1 = s / 2;
            for t in 0..4 {
                let (t1p, t2p) = (t / 2, t % 2);
                let expect = (mu[t1 * 2 + t2p] / marg_t1[t1]) * (mu[t1p * 2 + t2p] / marg_t2[t2p]);
                assert_abs_diff_eq!(beta.get(s, t), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn direct_price_addon_link_induces_rational_expectations() {
        let space = two_binary_vars();
        let dag = CausalDag::new(
            vec![DagNode::Price, DagNode::Addon, DagNode::StateVar(0), DagNode::StateVar(1)],
            vec![(2, 3), (2, 0), (3, 0), (2, 1), (3, 1), (0, 1)],
        )
        .unwrap();
        assert!(dag.is_perfect());
        let beta = dag_to_beta(&dag, &[0.1, 0.2, 0.3, 0.4], &space).unwrap();
        assert!(beta.is_identity(1e-12));
    }

    #[test]
    fn addon_disconnected_from_price_gives_mu_rows() {
        // phi <- t1, q has no parents: no path from the price side to q.
        let space = two_binary_vars();
        let dag = CausalDag::new(
            vec![DagNode::Price, DagNode::Addon, DagNode::StateVar(0)],
            vec![(2, 0)],
        )
        .unwrap();
        let mu = vec![0.1, 0.2, 0.3, 0.4];
        let beta = dag_to_beta(&dag, &mu, &space).unwrap();
        for s in 0..4 {
            for (t, &m) in mu.iter().enumerate() {
                assert_abs_diff_eq!(beta.get(s, t), m, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn non_perfect_dag_is_rejected() {
        let space = two_binary_vars();
        let dag = CausalDag::new(
            vec![DagNode::Price, DagNode::Addon, DagNode::StateVar(0), DagNode::StateVar(1)],
            vec![(2, 0), (2, 1), (3, 1)],
        )
        .unwrap();
        assert!(matches!(dag_to_beta(&dag, &[0.25; 4], &space), Err(Error::UnsupportedDag(_))));
    }

    #[test]
    fn beta_extraction_is_label_independent() {
        let space = two_binary_vars();
        let raw = [0.4, 0.15, 0.2, 0.25];
        let mu: Vec<f64> = raw.to_vec();
        let identity: Vec<usize> = (0..4).collect();
        let permuted = vec![2, 0, 3, 1];
        let a = dag_to_beta_with_labels(&chain(), &mu, &space, &identity).unwrap();
        let b = dag_to_beta_with_labels(&chain(), &mu, &space, &permuted).unwrap();
        for s in 0..4 {
            for t in 0..4 {
                assert_abs_diff_eq!(a.get(s, t), b.get(s, t), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn addon_estimate_examples() {
        let q = vec![1.0, 2.0, 3.0, 4.0];
        let id = TransitionMatrix::identity(4);
        assert_eq!(id.estimate(2, &q), 3.0);
        let mu = vec![0.1, 0.2, 0.3, 0.4];
        let space = two_binary_vars();
        let coarse = coarse_to_beta(&[], &mu, &space).unwrap();
        let expect: f64 = mu.iter().zip(&q).map(|(m, q)| m * q).sum();
        for s in 0..4 {
            assert_abs_diff_eq!(coarse.estimate(s, &q), expect, epsilon = 1e-15);
        }
    }
}
