//! Output formatting: every number is printed with 12 significant digits,
//! in a human table, CSV (fixed column order), or JSON mirroring the
//! solution struct field-for-field.

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;

use discern_core::{EquilibriumSolution, MarketSpec, TransitionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned table for reading at the terminal.
    Human,
    /// One row per state: state-label,S,mu,q_bar,h,pi_star,argmin_types,interior.
    Csv,
    /// The solution struct, field for field.
    Json,
}

/// Rounds to 12 significant digits and prints the shortest decimal that
/// round-trips, so output is byte-stable across runs and platforms.
pub fn sig12(x: f64) -> String {
    round12(x).to_string()
}

fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    // Formatting with 11 fractional digits in scientific notation keeps
    // exactly 12 significant digits; parsing back yields the nearest double.
    format!("{x:.11e}").parse().unwrap()
}

/// Serializes any report as JSON with every number rounded to 12
/// significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut tree = serde_json::to_value(value)?;
    round_tree(&mut tree);
    Ok(serde_json::to_string_pretty(&tree)?)
}

fn round_tree(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                if n.is_f64() {
                    if let Some(rounded) = serde_json::Number::from_f64(round12(x)) {
                        *n = rounded;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_tree),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_tree),
        _ => {}
    }
}

fn argmin_names(spec: &MarketSpec, indices: &[usize]) -> String {
    indices.iter().map(|&t| spec.types()[t].name.as_str()).collect::<Vec<_>>().join("+")
}

/// The per-state rows shared by the CSV and human formats.
fn rows(spec: &MarketSpec, solution: &EquilibriumSolution) -> Vec<[String; 8]> {
    let space = spec.space();
    space
        .states()
        .map(|state| {
            [
                space.label(state),
                sig12(spec.s_of(state)),
                sig12(spec.mu()[state]),
                sig12(solution.q_bar[state]),
                sig12(solution.h[state]),
                sig12(solution.pi_star[state]),
                argmin_names(spec, &solution.argmin_types[state]),
                solution.interior[state].to_string(),
            ]
        })
        .collect()
}

pub fn solution_csv(spec: &MarketSpec, solution: &EquilibriumSolution) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "state-label",
        "S",
        "mu",
        "q_bar",
        "h",
        "pi_star",
        "argmin_types",
        "interior",
    ])?;
    for row in rows(spec, solution) {
        writer.write_record(&row)?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}

fn aligned(header: &[&str], body: &[Vec<String>]) -> String {
    let columns = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: &[String]| {
        for (i, cell) in cells.iter().enumerate() {
            out.push_str(cell);
            if i + 1 < columns {
                out.extend(std::iter::repeat_n(' ', widths[i] - cell.len() + 2));
            }
        }
        out.push('\n');
    };
    push_row(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    for row in body {
        push_row(row);
    }
    out
}

pub fn solution_table(spec: &MarketSpec, solution: &EquilibriumSolution) -> String {
    let body: Vec<Vec<String>> = rows(spec, solution).into_iter().map(|r| r.to_vec()).collect();
    let mut out =
        aligned(&["state", "S", "mu", "q_bar", "h", "pi_star", "argmin", "interior"], &body);
    out.push('\n');
    let welfare_body: Vec<Vec<String>> = spec
        .space()
        .states()
        .map(|s| {
            vec![
                spec.space().label(s),
                sig12(solution.welfare.social_surplus[s]),
                sig12(solution.welfare.trading_net_payoff[s]),
            ]
        })
        .collect();
    out.push_str(&aligned(&["state", "social_surplus", "trading_net_payoff"], &welfare_body));
    out.push_str(&format!(
        "\nexante_consumer_loss  {}\n",
        sig12(solution.welfare.exante_consumer_loss)
    ));
    let d = &solution.diagnostics;
    out.push_str(&format!(
        "iterations {}  residual {}  policy_check {}  price_collisions {}\n",
        d.iterations,
        sig12(d.residual),
        d.policy_check.map_or_else(|| "-".to_string(), sig12),
        d.price_collisions,
    ));
    out
}

pub fn matrix_table(spec: &MarketSpec, beta: &TransitionMatrix) -> String {
    let space = spec.space();
    let mut header = vec!["state".to_string()];
    header.extend(space.states().map(|s| space.label(s)));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let body: Vec<Vec<String>> = space
        .states()
        .map(|s| {
            let mut row = vec![space.label(s)];
            row.extend(beta.row(s).iter().map(|&x| sig12(x)));
            row
        })
        .collect();
    aligned(&header_refs, &body)
}
