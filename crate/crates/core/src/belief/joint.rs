use crate::belief::dag::CausalDag;
use crate::error::{Error, Result};
use crate::state::StateSpace;

/// A dense joint probability table over named finite variables. Cells are
/// laid out lexicographically with the first variable most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    vars: Vec<(String, usize)>,
    probs: Vec<f64>,
}

impl Joint {
    pub fn new(vars: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self> {
        let cells: usize = vars.iter().map(|(_, k)| *k).product();
        if vars.iter().any(|(_, k)| *k == 0) {
            return Err(Error::validation("joint", "every variable needs a nonempty domain"));
        }
        if probs.len() != cells {
            return Err(Error::validation(
                "joint",
                format!("expected {} cells, got {}", cells, probs.len()),
            ));
        }
        if probs.iter().any(|p| *p < -1e-12 || !p.is_finite()) {
            return Err(Error::validation("joint", "negative or non-finite probability"));
        }
        Ok(Joint { vars, probs })
    }

    /// An all-zero table with the given variables; fill with `add_mass`.
    pub fn zeros(vars: Vec<(String, usize)>) -> Self {
        let cells = vars.iter().map(|(_, k)| *k).product();
        Joint { vars, probs: vec![0.0; cells] }
    }

    pub fn add_mass(&mut self, assignment: &[usize], mass: f64) {
        let idx = self.cell_index(assignment);
        self.probs[idx] += mass;
    }

    pub fn vars(&self) -> &[(String, usize)] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|(n, _)| n == name)
    }

    fn card(&self, var: usize) -> usize {
        self.vars[var].1
    }

    fn cell_index(&self, assignment: &[usize]) -> usize {
        debug_assert_eq!(assignment.len(), self.vars.len());
        let mut idx = 0;
        for (a, (_, k)) in assignment.iter().zip(&self.vars) {
            debug_assert!(a < k);
            idx = idx * k + a;
        }
        idx
    }

    fn cell_assignment(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.vars.len()];
        for (i, (_, k)) in self.vars.iter().enumerate().rev() {
            out[i] = idx % k;
            idx /= k;
        }
        out
    }

    /// Marginal mass table over a subset of variables (in the given order).
    pub fn marginal(&self, subset: &[usize]) -> Vec<f64> {
        let cells: usize = subset.iter().map(|&v| self.card(v)).product();
        let mut out = vec![0.0; cells];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = self.cell_assignment(idx);
            let mut sub = 0;
            for &v in subset {
                sub = sub * self.card(v) + a[v];
            }
            out[sub] += p;
        }
        out
    }

    /// Bayesian-network factorization: the distorted joint
    /// p_G(x) = prod_i p(x_i | x_{R(i)}), over the DAG's nodes in DAG order.
    /// Any factor whose conditioning event has zero marginal probability
    /// makes the whole product zero, so the result can be a subdistribution;
    /// conditional queries renormalize per conditioning cell.
    pub fn factorize(&self, dag: &CausalDag, space: &StateSpace) -> Result<Joint> {
        // Map each DAG node to a variable of this joint.
        let node_vars: Vec<usize> = (0..dag.nodes().len())
            .map(|n| {
                let name = dag.node_name(n, space);
                self.var_index(&name).ok_or_else(|| {
                    Error::validation(
                        "joint",
                        format!("the joint has no variable `{name}` required by the DAG"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;

        // Conditional tables p(x_i | x_{R(i)}), one per node, indexed over
        // (parents..., node).
        struct Factor {
            scope: Vec<usize>, // joint-variable indices: parents then node
            table: Vec<f64>,
        }
        let mut factors = Vec::with_capacity(node_vars.len());
        for (node, &var) in node_vars.iter().enumerate() {
            let mut scope: Vec<usize> = dag.parents(node).iter().map(|&p| node_vars[p]).collect();
            scope.sort_unstable();
            scope.push(var);
            let full = self.marginal(&scope);
            let par = self.marginal(&scope[..scope.len() - 1]);
            let k = self.card(var);
            let table = full
                .iter()
                .enumerate()
                .map(|(i, &num)| {
                    let den = par[i / k];
                    if den > 0.0 {
                        num / den
                    } else {
                        0.0
                    }
                })
                .collect();
            factors.push(Factor { scope, table });
        }

        let out_vars: Vec<(String, usize)> =
            node_vars.iter().map(|&v| self.vars[v].clone()).collect();
        let mut out = Joint::zeros(out_vars);
        let cells = out.probs.len();
        for idx in 0..cells {
            let a = out.cell_assignment(idx);
            // a is indexed by DAG node; translate joint-variable scopes.
            let value_of = |var: usize| {
                let node = node_vars.iter().position(|&v| v == var).unwrap();
                a[node]
            };
            let mut p = 1.0;
            for f in &factors {
                let mut t = 0;
                for &v in &f.scope {
                    t = t * self.card(v) + value_of(v);
                }
                p *= f.table[t];
                if p == 0.0 {
                    break;
                }
            }
            out.probs[idx] = p;
        }
        Ok(out)
    }
}

/// The conditional table p_G(q | phi, w) produced by
/// [`belief_with_signal`]. Rows for (phi, w) pairs with zero distorted
/// probability are `None`.
#[derive(Debug, Clone)]
pub struct SignalBelief {
    pub phi_card: usize,
    pub signal_card: usize,
    pub addon_card: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl SignalBelief {
    /// Belief over the add-on given (price, signal), or `None` where the
    /// conditioning event has zero distorted mass.
    pub fn row(&self, phi: usize, w: usize) -> Option<&[f64]> {
        self.rows[phi * self.signal_card + w].as_deref()
    }
}

/// Factorizes `joint` through a DAG containing a signal node and conditions
/// the distorted belief on (price, signal).
pub fn belief_with_signal(
    dag: &CausalDag,
    space: &StateSpace,
    joint: &Joint,
) -> Result<SignalBelief> {
    let signal =
        dag.signal_node().ok_or_else(|| Error::Domain("the DAG has no signal node".into()))?;
    let phi = dag.price_node().ok_or_else(|| Error::Domain("the DAG has no price node".into()))?;
    let q = dag.addon_node().ok_or_else(|| Error::Domain("the DAG has no add-on node".into()))?;
    let distorted = joint.factorize(dag, space)?;
    let pv = |node: usize| distorted.var_index(&dag.node_name(node, space)).unwrap();
    let (phi_v, w_v, q_v) = (pv(phi), pv(signal), pv(q));
    let marg = distorted.marginal(&[phi_v, w_v, q_v]);
    let (pk, wk, qk) = (distorted.card(phi_v), distorted.card(w_v), distorted.card(q_v));
    let mut rows = Vec::with_capacity(pk * wk);
    for cell in marg.chunks(qk) {
        let z: f64 = cell.iter().sum();
        if z > 0.0 {
            rows.push(Some(cell.iter().map(|p| p / z).collect()));
        } else {
            rows.push(None);
        }
    }
    Ok(SignalBelief { phi_card: pk, signal_card: wk, addon_card: qk, rows })
}
