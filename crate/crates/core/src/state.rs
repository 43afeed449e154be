use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One exogenous state variable: a name and a finite ordered domain of
/// discrete labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
}

/// The finite state space Theta, the cartesian product of the variables'
/// domains. States are indexed densely `0..num_states()` in lexicographic
/// order over the variables in declaration order (the first variable is the
/// most significant digit).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpace {
    variables: Vec<Variable>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    count: usize,
}

impl StateSpace {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::validation("variables", "at least one variable required"));
        }
        for v in &variables {
            if v.domain.is_empty() {
                return Err(Error::validation(
                    "variables",
                    format!("variable `{}` has an empty domain", v.name),
                ));
            }
            let mut labels = v.domain.clone();
            labels.sort();
            labels.dedup();
            if labels.len() != v.domain.len() {
                return Err(Error::validation(
                    "variables",
                    format!("variable `{}` has duplicate domain labels", v.name),
                ));
            }
        }
        let mut names: Vec<&str> = variables.iter().map(|v| v.name.as_str()).collect();
        names.sort();
        names.dedup();
        if names.len() != variables.len() {
            return Err(Error::validation("variables", "duplicate variable names"));
        }
        let (strides, count) = Self::layout(&variables);
        if count < 2 {
            return Err(Error::validation(
                "variables",
                "the state space must contain at least 2 states",
            ));
        }
        Ok(StateSpace { variables, strides, count })
    }

    fn layout(variables: &[Variable]) -> (Vec<usize>, usize) {
        let mut strides = vec![0usize; variables.len()];
        let mut count = 1usize;
        for (i, v) in variables.iter().enumerate().rev() {
            strides[i] = count;
            count *= v.domain.len();
        }
        (strides, count)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_states(&self) -> usize {
        self.count
    }

    /// Dense index of the state with the given per-variable digit values.
    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.variables.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Per-variable digit values of the state with the given index.
    pub fn digits(&self, index: usize) -> Vec<usize> {
        let mut rest = index;
        self.strides
            .iter()
            .zip(&self.variables)
            .map(|(s, v)| {
                let d = (rest / s) % v.domain.len();
                rest %= s;
                d
            })
            .collect()
    }

    /// Value of variable `var` in state `index`.
    pub fn component(&self, index: usize, var: usize) -> usize {
        (index / self.strides[var]) % self.variables[var].domain.len()
    }

    /// Index of a state given per-variable domain labels.
    pub fn index_of_labels(&self, labels: &[&str]) -> Result<usize> {
        if labels.len() != self.variables.len() {
            return Err(Error::validation(
                "state",
                format!("expected {} components, got {}", self.variables.len(), labels.len()),
            ));
        }
        let mut digits = Vec::with_capacity(labels.len());
        for (v, l) in self.variables.iter().zip(labels) {
            let d = v.domain.iter().position(|x| x == l).ok_or_else(|| {
                Error::validation(
                    "state",
                    format!("label `{l}` is not in the domain of `{}`", v.name),
                )
            })?;
            digits.push(d);
        }
        Ok(self.index_of(&digits))
    }

    /// Human-readable label such as `(0,1)`.
    pub fn label(&self, index: usize) -> String {
        let parts: Vec<&str> = self
            .digits(index)
            .iter()
            .zip(&self.variables)
            .map(|(&d, v)| v.domain[d].as_str())
            .collect();
        format!("({})", parts.join(","))
    }

    pub fn states(&self) -> impl Iterator<Item = usize> {
        0..self.count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binary(names: &[&str]) -> StateSpace {
        StateSpace::new(
            names
                .iter()
                .map(|n| Variable { name: n.to_string(), domain: vec!["0".into(), "1".into()] })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lexicographic_indexing() {
        let space = binary(&["t1", "t2"]);
        assert_eq!(space.num_states(), 4);
        assert_eq!(space.index_of(&[0, 0]), 0);
        assert_eq!(space.index_of(&[0, 1]), 1);
        assert_eq!(space.index_of(&[1, 0]), 2);
        assert_eq!(space.index_of(&[1, 1]), 3);
        assert_eq!(space.label(2), "(1,0)");
    }

    #[test]
    fn rejects_degenerate_spaces() {
        assert!(StateSpace::new(vec![]).is_err());
        assert!(
            StateSpace::new(vec![Variable { name: "t".into(), domain: vec!["a".into()] }]).is_err()
        );
        assert!(StateSpace::new(vec![Variable {
            name: "t".into(),
            domain: vec!["a".into(), "a".into()],
        }])
        .is_err());
    }

    proptest! {
        #[test]
        fn index_round_trip(sizes in proptest::collection::vec(1usize..4, 1..4), pick in any::<usize>()) {
            prop_assume!(sizes.iter().product::<usize>() >= 2);
            let vars = sizes.iter().enumerate().map(|(i, &k)| Variable {
                name: format!("v{i}"),
                domain: (0..k).map(|d| d.to_string()).collect(),
            }).collect();
            let space = StateSpace::new(vars).unwrap();
            let idx = pick % space.num_states();
            prop_assert_eq!(space.index_of(&space.digits(idx)), idx);
        }
    }
}
