//! The TOML scenario-config surface: parsing into a [`MarketSpec`] with
//! field-annotated errors, and lossless serialization back out.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use discern_core::{
    BeliefModel, CausalDag, CognitiveType, DagNode, MarketSpec, StatePartition, StateSpace,
    Variable, Variant,
};

/// Version of the config grammar; bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_TOL: f64 = discern_core::solver::DEFAULT_TOL;
pub const DEFAULT_MAX_ITER: usize = discern_core::solver::DEFAULT_MAX_ITER;

/// Solver options attached to a config; CLI flags override these.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

/// The document shape of a scenario config. See docs/config-grammar.md.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub market: MarketSection,
    pub variables: Vec<VariableConfig>,
    pub states: Vec<StateRow>,
    pub types: Vec<TypeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketSection {
    pub v_star: f64,
    pub c: f64,
    pub variant: Variant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableConfig {
    pub name: String,
    pub domain: Vec<String>,
}

/// One state's row of the mu and S tables, keyed by per-variable labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRow {
    pub state: Vec<String>,
    pub mu: f64,
    pub s: f64,
}

/// One cognitive type; exactly one of `coarse`, `dag`, `groups` must be set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypeConfig {
    pub name: String,
    /// Conditioning set, as variable names.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dag: Option<DagConfig>,
    /// Explicit partition: each group lists state labels such as `(0,1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<String>>>,
}

/// A causal model as node names plus directed edges between them. The
/// names `price` and `addon` are reserved; a name matching a declared
/// variable refers to that variable; any other name declares a signal node.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DagConfig {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

/// Parses a config document into a market and solver options. Errors carry
/// the position (from the TOML parser) or the offending field path.
pub fn parse_config(document: &str) -> Result<(MarketSpec, SolverOptions)> {
    let config: ScenarioConfig =
        toml::from_str(document).context("the config document is not valid TOML")?;
    build(&config)
}

/// Builds the market from an already-deserialized config.
pub fn build(config: &ScenarioConfig) -> Result<(MarketSpec, SolverOptions)> {
    if config.schema != SCHEMA_VERSION {
        bail!("schema: version {} is not supported (expected {SCHEMA_VERSION})", config.schema);
    }
    let space = StateSpace::new(
        config
            .variables
            .iter()
            .map(|v| Variable { name: v.name.clone(), domain: v.domain.clone() })
            .collect(),
    )?;
    let n = space.num_states();
    if config.states.len() != n {
        bail!("states: the space has {n} states but {} rows were given", config.states.len());
    }
    let mut mu = vec![f64::NAN; n];
    let mut s = vec![f64::NAN; n];
    for (row_no, row) in config.states.iter().enumerate() {
        let labels: Vec<&str> = row.state.iter().map(String::as_str).collect();
        let idx =
            space.index_of_labels(&labels).with_context(|| format!("states[{row_no}].state"))?;
        if !mu[idx].is_nan() {
            bail!("states[{row_no}].state: state {} appears twice", space.label(idx));
        }
        mu[idx] = row.mu;
        s[idx] = row.s;
    }
    let types = config
        .types
        .iter()
        .enumerate()
        .map(|(i, t)| build_type(t, &space).with_context(|| format!("types[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let spec = MarketSpec::new(
        space,
        mu,
        s,
        config.market.v_star,
        config.market.c,
        config.market.variant,
        types,
    )?;
    let mut options = SolverOptions::default();
    if let Some(section) = &config.solver {
        if let Some(tol) = section.tol {
            options.tol = tol;
        }
        if let Some(max_iter) = section.max_iter {
            options.max_iter = max_iter;
        }
    }
    Ok((spec, options))
}

/// Builds one cognitive type from its config entry.
pub fn build_type(t: &TypeConfig, space: &StateSpace) -> Result<CognitiveType> {
    let given = t.coarse.is_some() as u8 + t.dag.is_some() as u8 + t.groups.is_some() as u8;
    if given != 1 {
        bail!("type `{}` must set exactly one of `coarse`, `dag`, `groups`", t.name);
    }
    if let Some(vars) = &t.coarse {
        let subset = vars
            .iter()
            .map(|name| {
                variable_index(space, name)
                    .ok_or_else(|| anyhow!("coarse: `{name}` is not a declared variable"))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(CognitiveType::coarse(&t.name, &subset));
    }
    if let Some(dag) = &t.dag {
        return Ok(CognitiveType::dag(&t.name, build_dag(dag, space)?));
    }
    let groups = t.groups.as_ref().unwrap();
    let resolved = groups
        .iter()
        .map(|group| group.iter().map(|label| state_index(space, label)).collect())
        .collect::<Result<Vec<Vec<usize>>>>()?;
    let partition = StatePartition::from_groups(&resolved, space.num_states())?;
    Ok(CognitiveType::partition(&t.name, partition))
}

fn variable_index(space: &StateSpace, name: &str) -> Option<usize> {
    space.variables().iter().position(|v| v.name == name)
}

/// Resolves a state label of the form `(l1,l2,...)` to its dense index.
fn state_index(space: &StateSpace, label: &str) -> Result<usize> {
    let inner = label
        .strip_prefix('(')
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| anyhow!("groups: state label `{label}` must look like `(a,b)`"))?;
    let parts: Vec<&str> = inner.split(',').collect();
    space.index_of_labels(&parts).with_context(|| format!("groups: state label `{label}`"))
}

fn build_dag(config: &DagConfig, space: &StateSpace) -> Result<CausalDag> {
    let nodes: Vec<DagNode> = config
        .nodes
        .iter()
        .map(|name| match name.as_str() {
            "price" => DagNode::Price,
            "addon" => DagNode::Addon,
            other => match variable_index(space, other) {
                Some(v) => DagNode::StateVar(v),
                None => DagNode::Signal(other.to_string()),
            },
        })
        .collect();
    let node_index = |name: &str| {
        config
            .nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| anyhow!("dag.edges: `{name}` is not a declared node"))
    };
    let edges = config
        .edges
        .iter()
        .map(|(from, to)| Ok((node_index(from)?, node_index(to)?)))
        .collect::<Result<Vec<_>>>()?;
    let dag = CausalDag::new(nodes, edges)?;
    let violations = dag.validate(space.num_vars());
    if !violations.is_empty() {
        bail!("dag: {violations:?}");
    }
    Ok(dag)
}

/// Renders a market (plus optional solver section) as a config document
/// that parses back to an identical spec.
pub fn config_from_spec(spec: &MarketSpec, solver: Option<SolverOptions>) -> ScenarioConfig {
    let space = spec.space();
    let states = space
        .states()
        .map(|idx| StateRow {
            state: space
                .digits(idx)
                .iter()
                .zip(space.variables())
                .map(|(&d, v)| v.domain[d].clone())
                .collect(),
            mu: spec.mu()[idx],
            s: spec.s_of(idx),
        })
        .collect();
    let types = spec.types().iter().map(|t| type_config(t, space)).collect();
    ScenarioConfig {
        schema: SCHEMA_VERSION,
        market: MarketSection { v_star: spec.v_star(), c: spec.c(), variant: spec.variant() },
        variables: space
            .variables()
            .iter()
            .map(|v| VariableConfig { name: v.name.clone(), domain: v.domain.clone() })
            .collect(),
        states,
        types,
        solver: solver.map(|o| SolverSection { tol: Some(o.tol), max_iter: Some(o.max_iter) }),
    }
}

fn type_config(t: &CognitiveType, space: &StateSpace) -> TypeConfig {
    let mut out = TypeConfig { name: t.name.clone(), coarse: None, dag: None, groups: None };
    match &t.model {
        BeliefModel::Coarse(m) => {
            out.coarse = Some(m.iter().map(|&v| space.variables()[v].name.clone()).collect());
        }
        BeliefModel::Dag(dag) => {
            let node_label = |i: usize| match &dag.nodes()[i] {
                DagNode::Price => "price".to_string(),
                DagNode::Addon => "addon".to_string(),
                DagNode::StateVar(v) => space.variables()[*v].name.clone(),
                DagNode::Signal(name) => name.clone(),
            };
            out.dag = Some(DagConfig {
                nodes: (0..dag.nodes().len()).map(node_label).collect(),
                edges: dag
                    .edges()
                    .iter()
                    .map(|&(from, to)| (node_label(from), node_label(to)))
                    .collect(),
            });
        }
        BeliefModel::Partition(partition) => {
            let cells = 1 + space.states().map(|s| partition.cell_of(s)).max().unwrap_or(0);
            let mut groups = vec![Vec::new(); cells];
            for state in space.states() {
                groups[partition.cell_of(state)].push(space.label(state));
            }
            out.groups = Some(groups);
        }
    }
    out
}

/// Serializes a config to its canonical TOML document.
pub fn to_toml(config: &ScenarioConfig) -> Result<String> {
    Ok(toml::to_string_pretty(config)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use discern_core::scenario;

    #[test]
    fn builtin_scenarios_round_trip() {
        for name in scenario::builtin_names() {
            let spec = scenario::builtin(name).unwrap();
            let document = to_toml(&config_from_spec(&spec, None)).unwrap();
            let (reparsed, options) = parse_config(&document).unwrap();
            assert_eq!(reparsed, spec, "{name}");
            assert_eq!(options.tol, DEFAULT_TOL);
            assert_eq!(options.max_iter, DEFAULT_MAX_ITER);
        }
    }

    #[test]
    fn partition_types_round_trip() {
        let spec = scenario::lower_bound_scenario(4, 1.0, 3.0).unwrap();
        let document = to_toml(&config_from_spec(&spec, None)).unwrap();
        let (reparsed, _) = parse_config(&document).unwrap();
        assert_eq!(reparsed, spec);
    }

    #[test]
    fn bad_probability_mass_names_the_field() {
        let spec = scenario::example_4_beneficial();
        let mut config = config_from_spec(&spec, None);
        config.states[0].mu = 0.49;
        let document = to_toml(&config).unwrap();
        let err = format!("{:#}", parse_config(&document).unwrap_err());
        assert!(err.contains("mu"), "{err}");
        assert!(err.contains("0.99"), "{err}");
    }

    #[test]
    fn unknown_variable_in_coarse_subset_is_rejected() {
        let spec = scenario::example_3_1();
        let mut config = config_from_spec(&spec, None);
        config.types[1].coarse = Some(vec!["t9".into()]);
        let document = to_toml(&config).unwrap();
        let err = format!("{:#}", parse_config(&document).unwrap_err());
        assert!(err.contains("types[1]"), "{err}");
        assert!(err.contains("t9"), "{err}");
    }

    #[test]
    fn solver_section_overrides_defaults() {
        let spec = scenario::example_4_beneficial();
        let config = config_from_spec(&spec, Some(SolverOptions { tol: 1e-10, max_iter: 77 }));
        let (_, options) = parse_config(&to_toml(&config).unwrap()).unwrap();
        assert_eq!(options.tol, 1e-10);
        assert_eq!(options.max_iter, 77);
    }

    #[test]
    fn toml_syntax_errors_carry_position() {
        let err = format!("{:#}", parse_config("[market\n").unwrap_err());
        assert!(err.contains("TOML"), "{err}");
    }
}
