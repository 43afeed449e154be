use serde::{Deserialize, Serialize};

use crate::belief::CognitiveType;
use crate::error::{Error, Result};
use crate::solver::{self, EquilibriumSolution, SolveDiagnostics};
use crate::state::StateSpace;

/// Minimum per-state probability for the full-support requirement.
pub const MU_FLOOR: f64 = 1e-12;
/// Minimum pairwise gap enforcing injectivity of S.
pub const S_GAP: f64 = 1e-9;

/// Whether the latent add-on is a pure transfer to the firm or a surplus
/// both sides enjoy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Exploitative,
    Beneficial,
}

/// The full primitive tuple of the market: state space, state distribution,
/// potential add-on schedule, consumer valuation and firm cost, variant,
/// and the set of cognitive types. Immutable after construction; all
/// operations are pure functions of their inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSpec {
    space: StateSpace,
    mu: Vec<f64>,
    s: Vec<f64>,
    v_star: f64,
    c: f64,
    variant: Variant,
    types: Vec<CognitiveType>,
}

impl MarketSpec {
    pub fn new(
        space: StateSpace,
        mu: Vec<f64>,
        s: Vec<f64>,
        v_star: f64,
        c: f64,
        variant: Variant,
        types: Vec<CognitiveType>,
    ) -> Result<Self> {
        let n = space.num_states();
        if mu.len() != n {
            return Err(Error::validation("mu", format!("expected {n} entries, got {}", mu.len())));
        }
        if s.len() != n {
            return Err(Error::validation("s", format!("expected {n} entries, got {}", s.len())));
        }
        for (i, &m) in mu.iter().enumerate() {
            if m.is_nan() || m < MU_FLOOR {
                return Err(Error::validation(
                    "mu",
                    format!(
                        "state {} has probability {m:e}; full support requires >= {MU_FLOOR:e}",
                        space.label(i)
                    ),
                ));
            }
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(
                "mu",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        for (i, &x) in s.iter().enumerate() {
            if x.is_nan() || x <= 0.0 {
                return Err(Error::validation(
                    "s",
                    format!("S({}) = {x} must be positive", space.label(i)),
                ));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if (s[i] - s[j]).abs() <= S_GAP {
                    return Err(Error::validation(
                        "s",
                        format!(
                            "S must be one-to-one: S({}) and S({}) differ by {:e}",
                            space.label(i),
                            space.label(j),
                            (s[i] - s[j]).abs()
                        ),
                    ));
                }
            }
        }
        let delta = v_star - c;
        match variant {
            Variant::Exploitative if delta <= 0.0 => {
                return Err(Error::validation(
                    "v_star",
                    format!("the exploitative variant requires v* - c > 0, got {delta}"),
                ));
            }
            Variant::Beneficial if delta >= 0.0 => {
                return Err(Error::validation(
                    "v_star",
                    format!("the beneficial variant requires v* - c < 0, got {delta}"),
                ));
            }
            _ => {}
        }
        if types.is_empty() {
            return Err(Error::validation("types", "at least one cognitive type required"));
        }
        let mut names: Vec<&str> = types.iter().map(|t| t.name.as_str()).collect();
        names.sort();
        names.dedup();
        if names.len() != types.len() {
            return Err(Error::validation("types", "duplicate type names"));
        }
        for t in &types {
            t.validate(&space)?;
        }
        Ok(MarketSpec { space, mu, s, v_star, c, variant, types })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn s_of(&self, state: usize) -> f64 {
        self.s[state]
    }

    pub fn v_star(&self) -> f64 {
        self.v_star
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn types(&self) -> &[CognitiveType] {
        &self.types
    }

    /// The per-trade surplus Delta = v* - c.
    pub fn delta(&self) -> f64 {
        self.v_star - self.c
    }

    pub fn s_max(&self) -> f64 {
        self.s.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn s_min(&self) -> f64 {
        self.s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The mu-expected potential add-on S-bar.
    pub fn s_bar(&self) -> f64 {
        self.mu.iter().zip(&self.s).map(|(m, s)| m * s).sum()
    }

    /// A new spec with one more cognitive type appended.
    pub fn with_added_type(&self, t: CognitiveType) -> Result<MarketSpec> {
        let mut types = self.types.clone();
        types.push(t);
        MarketSpec::new(
            self.space.clone(),
            self.mu.clone(),
            self.s.clone(),
            self.v_star,
            self.c,
            self.variant,
            types,
        )
    }
}

/// The firm type indifferent to entry at the given price: the pi solving
/// `price - c + pi S(state) = 0`. Not clamped; values outside [0,1] are
/// corner supply (below 0: every firm enters; above 1: none does).
pub fn pi_star(spec: &MarketSpec, state: usize, price: f64) -> f64 {
    (spec.c - price) / spec.s[state]
}

/// Expected add-on among active firms, the mean of U[pi* S, S].
pub fn mean_addon(spec: &MarketSpec, state: usize, pi_star: f64) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&pi_star) {
        return Err(Error::Domain(format!("pi_star = {pi_star} outside [0, 1]")));
    }
    let pi = pi_star.clamp(0.0, 1.0);
    Ok((1.0 + pi) / 2.0 * spec.s[state])
}

/// Endpoints of the conditional add-on law U[pi* S, S] among active firms.
pub fn addon_support(spec: &MarketSpec, state: usize, pi_star: f64) -> (f64, f64) {
    (pi_star * spec.s[state], spec.s[state])
}

/// The price consistent with an expected add-on level: h = S + c - 2 q_bar.
pub fn price_from_addon(spec: &MarketSpec, state: usize, q_bar: f64) -> f64 {
    spec.s[state] + spec.c - 2.0 * q_bar
}

/// The rational-expectations benchmark. Exploitative: h = v* + Delta - S,
/// q_bar = S - Delta, requiring 2 Delta < S^min. Beneficial: the
/// singleton-rational-type solve, q_bar = (S - Delta) / 3.
pub fn ree_solution(spec: &MarketSpec) -> Result<EquilibriumSolution> {
    let delta = spec.delta();
    let q_bar: Vec<f64> = match spec.variant {
        Variant::Exploitative => {
            if 2.0 * delta >= spec.s_min() {
                return Err(Error::NoInteriorEquilibrium(format!(
                    "REE existence requires 2*Delta < S^min, but 2*{delta} >= {}",
                    spec.s_min()
                )));
            }
            spec.s.iter().map(|s| s - delta).collect()
        }
        Variant::Beneficial => spec.s.iter().map(|s| (s - delta) / 3.0).collect(),
    };
    let argmin = vec![Vec::new(); spec.space.num_states()];
    solver::finish_solution(spec, q_bar, argmin, SolveDiagnostics::closed_form())
}

/// Which interior-existence guarantees the primitives satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    /// S^max - S^min < 2 Delta < S^min (exploitative guarantee).
    pub condition9: bool,
    /// -2/3 Delta < S^min < S^max < -Delta (beneficial guarantee).
    pub condition16: bool,
    /// 2 Delta < S^min (existence of interior REE).
    pub ree_condition: bool,
}

/// Evaluates each primitive inequality strictly.
pub fn check_conditions(spec: &MarketSpec) -> ConditionReport {
    let delta = spec.delta();
    let (s_min, s_max) = (spec.s_min(), spec.s_max());
    ConditionReport {
        condition9: s_max - s_min < 2.0 * delta && 2.0 * delta < s_min,
        condition16: -2.0 / 3.0 * delta < s_min && s_min < s_max && s_max < -delta,
        ree_condition: 2.0 * delta < s_min,
    }
}
