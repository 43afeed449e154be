use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateSpace;

/// A node of a subjective causal model. `StateVar(i)` refers to the i-th
/// variable of the market's state space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DagNode {
    /// The observed headline price.
    Price,
    /// The latent add-on.
    Addon,
    /// An exogenous state variable, by index into the market's variable list.
    StateVar(usize),
    /// A private signal node, with a display name. At most one per DAG.
    Signal(String),
}

/// A structural problem found by [`CausalDag::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DagViolation {
    Cycle,
    MissingPriceNode,
    MissingAddonNode,
    DuplicatePriceNode,
    DuplicateAddonNode,
    /// Edge from an endogenous node (price/add-on) into a state variable
    /// or signal, by (parent, child) node index.
    EndogenousIntoExogenous(usize, usize),
    /// The signal node sends a link somewhere, by edge (parent, child).
    SignalHasChild(usize, usize),
    /// A signal node has a non-state-variable parent, by (parent, child).
    SignalParentNotStateVar(usize, usize),
    MultipleSignalNodes,
    /// A state-variable index outside the market's variable list.
    UnknownStateVar(usize),
    DuplicateStateVar(usize),
}

impl std::fmt::Display for DagViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DagViolation::Cycle => write!(f, "the graph contains a directed cycle"),
            DagViolation::MissingPriceNode => write!(f, "no price node"),
            DagViolation::MissingAddonNode => write!(f, "no add-on node"),
            DagViolation::DuplicatePriceNode => write!(f, "more than one price node"),
            DagViolation::DuplicateAddonNode => write!(f, "more than one add-on node"),
            DagViolation::EndogenousIntoExogenous(p, c) => {
                write!(f, "edge {p}->{c} points from an endogenous node into an exogenous one")
            }
            DagViolation::SignalHasChild(p, c) => write!(f, "signal node {p} has child {c}"),
            DagViolation::SignalParentNotStateVar(p, c) => {
                write!(f, "signal node {c} has non-state-variable parent {p}")
            }
            DagViolation::MultipleSignalNodes => write!(f, "more than one signal node"),
            DagViolation::UnknownStateVar(i) => write!(f, "state variable index {i} out of range"),
            DagViolation::DuplicateStateVar(i) => write!(f, "state variable {i} appears twice"),
        }
    }
}

/// A subjective causal model: a directed acyclic graph over the price node,
/// the add-on node, a subset of the state variables, and optionally one
/// signal node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalDag {
    nodes: Vec<DagNode>,
    /// Directed edges as (parent, child) node indices.
    edges: Vec<(usize, usize)>,
}

impl CausalDag {
    /// Builds the graph. Only index bounds are checked here; call
    /// [`validate`](Self::validate) for the structural requirements.
    pub fn new(nodes: Vec<DagNode>, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(p, c) in &edges {
            if p >= nodes.len() || c >= nodes.len() {
                return Err(Error::validation("dag", format!("edge ({p},{c}) out of range")));
            }
            if p == c {
                return Err(Error::validation("dag", format!("self-loop at node {p}")));
            }
        }
        Ok(CausalDag { nodes, edges })
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Parent set R(i).
    pub fn parents(&self, node: usize) -> Vec<usize> {
        self.edges.iter().filter(|&&(_, c)| c == node).map(|&(p, _)| p).collect()
    }

    pub fn price_node(&self) -> Option<usize> {
        self.nodes.iter().position(|n| matches!(n, DagNode::Price))
    }

    pub fn addon_node(&self) -> Option<usize> {
        self.nodes.iter().position(|n| matches!(n, DagNode::Addon))
    }

    pub fn signal_node(&self) -> Option<usize> {
        self.nodes.iter().position(|n| matches!(n, DagNode::Signal(_)))
    }

    pub fn state_var_nodes(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| match n {
                DagNode::StateVar(v) => Some((i, *v)),
                _ => None,
            })
            .collect()
    }

    fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b)) || self.edges.contains(&(b, a))
    }

    /// Topological order, or `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, c) in &self.edges {
            indeg[c] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            for &(p, c) in &self.edges {
                if p == i {
                    indeg[c] -= 1;
                    if indeg[c] == 0 {
                        queue.push(c);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Checks all structural invariants: acyclicity, exactly one price and
    /// one add-on node, no endogenous-to-exogenous links, and signal-node
    /// restrictions. `num_vars` is the market's variable count.
    pub fn validate(&self, num_vars: usize) -> Vec<DagViolation> {
        let mut out = Vec::new();
        if self.topological_order().is_none() {
            out.push(DagViolation::Cycle);
        }
        match self.nodes.iter().filter(|n| matches!(n, DagNode::Price)).count() {
            0 => out.push(DagViolation::MissingPriceNode),
            1 => {}
            _ => out.push(DagViolation::DuplicatePriceNode),
        }
        match self.nodes.iter().filter(|n| matches!(n, DagNode::Addon)).count() {
            0 => out.push(DagViolation::MissingAddonNode),
            1 => {}
            _ => out.push(DagViolation::DuplicateAddonNode),
        }
        if self.nodes.iter().filter(|n| matches!(n, DagNode::Signal(_))).count() > 1 {
            out.push(DagViolation::MultipleSignalNodes);
        }
        let mut seen_vars = Vec::new();
        for node in &self.nodes {
            if let DagNode::StateVar(v) = node {
                if *v >= num_vars {
                    out.push(DagViolation::UnknownStateVar(*v));
                }
                if seen_vars.contains(v) {
                    out.push(DagViolation::DuplicateStateVar(*v));
                }
                seen_vars.push(*v);
            }
        }
        for &(p, c) in &self.edges {
            let p_endo = matches!(self.nodes[p], DagNode::Price | DagNode::Addon);
            let c_exo = matches!(self.nodes[c], DagNode::StateVar(_) | DagNode::Signal(_));
            if p_endo && c_exo {
                out.push(DagViolation::EndogenousIntoExogenous(p, c));
            }
            if matches!(self.nodes[p], DagNode::Signal(_)) {
                out.push(DagViolation::SignalHasChild(p, c));
            }
            if matches!(self.nodes[c], DagNode::Signal(_))
                && !matches!(self.nodes[p], DagNode::StateVar(_))
            {
                out.push(DagViolation::SignalParentNotStateVar(p, c));
            }
        }
        out
    }

    /// True iff the parents of every node form a clique.
    pub fn is_perfect(&self) -> bool {
        (0..self.nodes.len()).all(|k| {
            let pa = self.parents(k);
            pa.iter().enumerate().all(|(a, &i)| pa[a + 1..].iter().all(|&j| self.is_adjacent(i, j)))
        })
    }

    /// True iff every path between `i` and `j` in the undirected skeleton
    /// passes through some node of `m`.
    pub fn blocks(&self, m: &[usize], i: usize, j: usize) -> Result<bool> {
        if m.contains(&i) || m.contains(&j) {
            return Err(Error::Domain(
                "blocking endpoints must lie outside the blocking set".into(),
            ));
        }
        if i >= self.nodes.len() || j >= self.nodes.len() {
            return Err(Error::Domain("blocking endpoint out of range".into()));
        }
        // Connectivity in the skeleton after deleting m.
        let mut visited = vec![false; self.nodes.len()];
        for &k in m {
            visited[k] = true;
        }
        let mut stack = vec![i];
        visited[i] = true;
        while let Some(v) = stack.pop() {
            if v == j {
                return Ok(false);
            }
            for &(p, c) in &self.edges {
                let next = if p == v {
                    c
                } else if c == v {
                    p
                } else {
                    continue;
                };
                if !visited[next] {
                    visited[next] = true;
                    stack.push(next);
                }
            }
        }
        Ok(true)
    }

    /// The name each node carries in a joint distribution over the DAG's
    /// variables: `phi`, `q`, the market variable's name, or the signal name.
    pub fn node_name(&self, node: usize, space: &StateSpace) -> String {
        match &self.nodes[node] {
            DagNode::Price => "phi".into(),
            DagNode::Addon => "q".into(),
            DagNode::StateVar(v) => space.variables()[*v].name.clone(),
            DagNode::Signal(name) => name.clone(),
        }
    }

    /// The coarse type M encoded as a DAG: a clique over the variables of M
    /// (in index order) with R(phi) = R(q) = M.
    pub fn encode_coarse(m: &[usize]) -> CausalDag {
        let mut nodes = vec![DagNode::Price, DagNode::Addon];
        let mut edges = Vec::new();
        for (a, &v) in m.iter().enumerate() {
            let node = nodes.len();
            nodes.push(DagNode::StateVar(v));
            for b in 0..a {
                edges.push((2 + b, node));
            }
            edges.push((node, 0));
            edges.push((node, 1));
        }
        CausalDag { nodes, edges }
    }
}
