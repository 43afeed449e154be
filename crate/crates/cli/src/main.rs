//! `discern` — solves for the competitive equilibrium of a market whose
//! hidden add-on is anticipated by consumers with heterogeneous models of
//! how prices relate to fundamentals.

mod config;
mod report;

use std::fs;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use discern_core::{
    analysis, brute_force_oracle, check_conditions, compute_betas, random, ree_solution, scenario,
    solve, type_to_beta, BeliefModel, MarketSpec,
};

use config::SolverOptions;
use report::Format;

#[derive(Parser)]
#[command(
    name = "discern",
    version,
    about = "Equilibrium solver for add-on markets with diversely discerning consumers",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Fixed-point tolerance (overrides the config's solver section).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Iteration cap (overrides the config's solver section).
    #[arg(long, global = true)]
    max_iter: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the market in a config file and print the equilibrium.
    Solve { config: String },
    /// Print the rational-expectations benchmark for a config file.
    Ree { config: String },
    /// Solve before and after adding the type in TYPEFILE and report the
    /// per-state movements.
    CompareTypes {
        config: String,
        /// TOML file with `name` plus one of `coarse`, `dag`, `groups`.
        #[arg(long)]
        add: String,
    },
    /// Print a type's belief transition matrix.
    Beta {
        config: String,
        /// Name of the type, as declared in the config.
        #[arg(long = "type")]
        type_name: String,
    },
    /// Report the interior-existence conditions and causal-model health.
    Check { config: String },
    /// Cross-check the solver against exhaustive policy enumeration.
    Oracle {
        config: Option<String>,
        /// Also check this many randomly drawn markets.
        #[arg(long)]
        sweep: Option<usize>,
        /// Seed for the random sweep.
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// Write a built-in scenario's config to standard output.
    Scenario { name: String },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let no_interior = err.chain().any(|cause| {
                matches!(
                    cause.downcast_ref::<discern_core::Error>(),
                    Some(discern_core::Error::NoInteriorEquilibrium(_))
                )
            });
            ExitCode::from(if no_interior { 2 } else { 1 })
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve { config } => {
            let (spec, options) = load(config, &cli)?;
            let solution = solve(&spec, options.tol, options.max_iter)?;
            print_solution(&spec, &solution, cli.format)
        }
        Command::Ree { config } => {
            let (spec, _) = load(config, &cli)?;
            let solution = ree_solution(&spec)?;
            print_solution(&spec, &solution, cli.format)
        }
        Command::CompareTypes { config, add } => {
            let (spec, _) = load(config, &cli)?;
            let document = fs::read_to_string(add)
                .with_context(|| format!("cannot read type file `{add}`"))?;
            let entry: config::TypeConfig = toml::from_str(&document)
                .with_context(|| format!("`{add}` is not a valid type file"))?;
            let new_type = config::build_type(&entry, spec.space())?;
            let report = analysis::add_type_experiment(&spec, new_type)?;
            print_compare(&spec, &report, cli.format)
        }
        Command::Beta { config, type_name } => {
            let (spec, _) = load(config, &cli)?;
            let t = spec
                .types()
                .iter()
                .find(|t| &t.name == type_name)
                .ok_or_else(|| anyhow!("no type named `{type_name}` in the config"))?;
            let beta = type_to_beta(t, spec.mu(), spec.space())?;
            match cli.format {
                Format::Human => print!("{}", report::matrix_table(&spec, &beta)),
                Format::Json => {
                    let rows: Vec<&[f64]> = spec.space().states().map(|s| beta.row(s)).collect();
                    println!("{}", report::to_json(&rows)?);
                }
                Format::Csv => bail!("csv output is only available for solve and ree"),
            }
            Ok(())
        }
        Command::Check { config } => {
            let (spec, _) = load(config, &cli)?;
            print_check(&spec, cli.format)
        }
        Command::Oracle { config, sweep, seed } => {
            run_oracle(config.as_deref(), *sweep, *seed, &cli)
        }
        Command::Scenario { name } => {
            let spec = scenario::builtin(name).ok_or_else(|| {
                anyhow!(
                    "unknown scenario `{name}`; available: {}",
                    scenario::builtin_names().join(", ")
                )
            })?;
            print!("{}", config::to_toml(&config::config_from_spec(&spec, None))?);
            Ok(())
        }
    }
}

/// Reads and parses a config file, applying CLI solver overrides.
fn load(path: &str, cli: &Cli) -> Result<(MarketSpec, SolverOptions)> {
    let document =
        fs::read_to_string(path).with_context(|| format!("cannot read config `{path}`"))?;
    let (spec, mut options) =
        config::parse_config(&document).with_context(|| format!("in `{path}`"))?;
    if let Some(tol) = cli.tol {
        options.tol = tol;
    }
    if let Some(max_iter) = cli.max_iter {
        options.max_iter = max_iter;
    }
    Ok((spec, options))
}

fn print_solution(
    spec: &MarketSpec,
    solution: &discern_core::EquilibriumSolution,
    format: Format,
) -> Result<()> {
    match format {
        Format::Human => print!("{}", report::solution_table(spec, solution)),
        Format::Csv => print!("{}", report::solution_csv(spec, solution)?),
        Format::Json => println!("{}", report::to_json(solution)?),
    }
    Ok(())
}

fn print_compare(
    spec: &MarketSpec,
    report: &analysis::AddTypeReport,
    format: Format,
) -> Result<()> {
    match format {
        Format::Json => println!("{}", report::to_json(report)?),
        Format::Human => {
            println!("added type: {}", report.added_type);
            println!(
                "q weakly decreases: {}   h weakly increases: {}   rational present: {}",
                report.q_weakly_decreases, report.h_weakly_increases, report.rational_present
            );
            if let Some(delta) = report.delta_exante_loss {
                println!("exante consumer loss change: {}", report::sig12(delta));
            }
            println!();
            let space = spec.space();
            println!("state  dq_bar  dh  dsurplus  dnet_payoff");
            for s in space.states() {
                println!(
                    "{}  {}  {}  {}  {}",
                    space.label(s),
                    report::sig12(report.delta_q_bar[s]),
                    report::sig12(report.delta_h[s]),
                    report::sig12(report.delta_social_surplus[s]),
                    report::sig12(report.delta_net_payoff[s]),
                );
            }
        }
        Format::Csv => bail!("csv output is only available for solve and ree"),
    }
    Ok(())
}

#[derive(Serialize)]
struct DagHealth {
    name: String,
    valid: bool,
    perfect: bool,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct CheckReport {
    condition9: bool,
    condition16: bool,
    ree_condition: bool,
    dags: Vec<DagHealth>,
}

fn print_check(spec: &MarketSpec, format: Format) -> Result<()> {
    let conditions = check_conditions(spec);
    let dags: Vec<DagHealth> = spec
        .types()
        .iter()
        .filter_map(|t| match &t.model {
            BeliefModel::Dag(dag) => {
                let violations = dag.validate(spec.space().num_vars());
                Some(DagHealth {
                    name: t.name.clone(),
                    valid: violations.is_empty(),
                    perfect: dag.is_perfect(),
                    violations: violations.iter().map(|v| format!("{v:?}")).collect(),
                })
            }
            _ => None,
        })
        .collect();
    let report = CheckReport {
        condition9: conditions.condition9,
        condition16: conditions.condition16,
        ree_condition: conditions.ree_condition,
        dags,
    };
    match format {
        Format::Json => println!("{}", report::to_json(&report)?),
        Format::Human => {
            println!("condition (9)  S^max - S^min < 2*Delta < S^min : {}", report.condition9);
            println!(
                "condition (16) -2/3*Delta < S^min <= S^max < -Delta : {}",
                report.condition16
            );
            println!("interior REE condition 2*Delta < S^min : {}", report.ree_condition);
            for dag in &report.dags {
                println!(
                    "dag `{}`: valid {}  perfect {}{}",
                    dag.name,
                    dag.valid,
                    dag.perfect,
                    if dag.violations.is_empty() {
                        String::new()
                    } else {
                        format!("  violations {:?}", dag.violations)
                    }
                );
            }
        }
        Format::Csv => bail!("csv output is only available for solve and ree"),
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleOutcome {
    label: String,
    max_abs_diff: f64,
}

fn oracle_diff(spec: &MarketSpec, options: SolverOptions) -> Result<f64> {
    let solution = solve(spec, options.tol, options.max_iter)?;
    let betas = compute_betas(spec)?;
    let reference = brute_force_oracle(spec, &betas, discern_core::solver::ORACLE_BUDGET)?;
    Ok(solution.q_bar.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

fn run_oracle(config: Option<&str>, sweep: Option<usize>, seed: u64, cli: &Cli) -> Result<()> {
    let mut outcomes = Vec::new();
    if let Some(path) = config {
        let (spec, options) = load(path, cli)?;
        outcomes.push(OracleOutcome {
            label: path.to_string(),
            max_abs_diff: oracle_diff(&spec, options)?,
        });
    }
    if let Some(count) = sweep {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..count {
            let spec = random::random_exploitative_spec(&mut rng);
            outcomes.push(OracleOutcome {
                label: format!("sweep[{i}]"),
                max_abs_diff: oracle_diff(&spec, SolverOptions::default())?,
            });
        }
    }
    if outcomes.is_empty() {
        bail!("nothing to check: give a config file, --sweep, or both");
    }
    match cli.format {
        Format::Json => println!("{}", report::to_json(&outcomes)?),
        Format::Human => {
            for outcome in &outcomes {
                println!(
                    "{}: max |q_bar - oracle| = {}",
                    outcome.label,
                    report::sig12(outcome.max_abs_diff)
                );
            }
        }
        Format::Csv => bail!("csv output is only available for solve and ree"),
    }
    Ok(())
}
