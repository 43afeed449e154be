//! Fixed-point computation of the interior equilibrium add-on profile and
//! the derived prices, supply thresholds, and welfare accounts.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::belief::{type_to_beta, TransitionMatrix};
use crate::error::{Error, Result};
use crate::market::{self, MarketSpec, Variant};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Distance from 0 and 1 required of every supply threshold.
pub const INTERIOR_MARGIN: f64 = 1e-9;
/// Estimates within this distance of the best one count as tied.
pub const TIE_TOL: f64 = 1e-9;
/// Two equilibrium prices closer than this count as colliding.
pub const PRICE_COLLISION_TOL: f64 = 1e-9;
/// Enumeration budget for the brute-force cross-check.
pub const ORACLE_BUDGET: u128 = 1_000_000;

/// Per-state welfare accounts plus the ex-ante consumer loss.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Welfare {
    /// Realized total surplus per state.
    pub social_surplus: Vec<f64>,
    /// Expected net payoff of a consumer who trades, per state.
    pub trading_net_payoff: Vec<f64>,
    /// mu-expected loss of trading consumers, counting only states where
    /// their net payoff is negative.
    pub exante_consumer_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub residual: f64,
    /// Sup-norm gap between the iterative and policy-iteration solutions,
    /// when the cross-check ran.
    pub policy_check: Option<f64>,
    /// Number of state pairs whose equilibrium prices coincide; zero means
    /// the price fully reveals the state.
    pub price_collisions: usize,
}

impl SolveDiagnostics {
    /// Diagnostics for solutions obtained in closed form.
    pub fn closed_form() -> Self {
        SolveDiagnostics { iterations: 0, residual: 0.0, policy_check: None, price_collisions: 0 }
    }
}

/// An interior equilibrium: the add-on profile together with everything the
/// market derives from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSolution {
    pub variant: Variant,
    /// Expected add-on among active firms, per state.
    pub q_bar: Vec<f64>,
    /// Equilibrium price per state.
    pub h: Vec<f64>,
    /// Marginal entering firm type per state.
    pub pi_star: Vec<f64>,
    /// Type indices attaining the decisive (lowest, or highest in the
    /// beneficial variant) add-on estimate, per state.
    pub argmin_types: Vec<Vec<usize>>,
    pub interior: Vec<bool>,
    pub welfare: Welfare,
    pub diagnostics: SolveDiagnostics,
}

/// Belief matrices of every cognitive type in declaration order.
pub fn compute_betas(spec: &MarketSpec) -> Result<Vec<TransitionMatrix>> {
    spec.types().iter().map(|t| type_to_beta(t, spec.mu(), spec.space())).collect()
}

/// One application of the equilibrium operator. In the exploitative variant
/// the firm prices against the most pessimistic estimate:
/// `T q (theta) = (S - Delta + min_k est_k) / 2`. In the beneficial variant
/// the sign flips and the decisive estimate is the largest:
/// `T q (theta) = (S - Delta - max_k est_k) / 2`.
pub fn bellman_operator(spec: &MarketSpec, betas: &[TransitionMatrix], q: &[f64]) -> Vec<f64> {
    let delta = spec.delta();
    spec.space()
        .states()
        .map(|s| {
            let decisive = decisive_estimate(spec.variant(), betas, s, q).0;
            match spec.variant() {
                Variant::Exploitative => 0.5 * (spec.s_of(s) - delta + decisive),
                Variant::Beneficial => 0.5 * (spec.s_of(s) - delta - decisive),
            }
        })
        .collect()
}

fn decisive_estimate(
    variant: Variant,
    betas: &[TransitionMatrix],
    state: usize,
    q: &[f64],
) -> (f64, usize) {
    let mut best = f64::NAN;
    let mut arg = 0;
    for (k, beta) in betas.iter().enumerate() {
        let e = beta.estimate(state, q);
        let better = match variant {
            Variant::Exploitative => e < best,
            Variant::Beneficial => e > best,
        };
        if best.is_nan() || better {
            best = e;
            arg = k;
        }
    }
    (best, arg)
}

/// Iterates the operator from `q0 = S / 2` until the sup-norm step falls
/// within `tol`. The operator contracts at rate 1/2, so the residual is an
/// upper bound on the remaining distance to the fixed point.
pub fn value_iteration(
    spec: &MarketSpec,
    betas: &[TransitionMatrix],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let q0: Vec<f64> = spec.s().iter().map(|s| s / 2.0).collect();
    value_iteration_from(spec, betas, q0, tol, max_iter)
}

/// [`value_iteration`] from an arbitrary starting profile. Contraction makes
/// the limit independent of the start; callers use this to probe uniqueness.
pub fn value_iteration_from(
    spec: &MarketSpec,
    betas: &[TransitionMatrix],
    q0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let mut q = q0;
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let next = bellman_operator(spec, betas, &q);
        residual = q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        q = next;
        if residual <= tol {
            return Ok((q, iter, residual));
        }
    }
    Err(Error::ConvergenceFailure { iterations: max_iter, residual })
}

/// The add-on profile induced by a fixed assignment of a decisive type to
/// each state, from the linear system `(I -/+ B_sigma / 2) q = (S - Delta) / 2`
/// (minus in the exploitative variant, plus in the beneficial one).
pub fn policy_value(
    spec: &MarketSpec,
    betas: &[TransitionMatrix],
    policy: &[usize],
) -> Result<Vec<f64>> {
    let n = spec.space().num_states();
    if policy.len() != n {
        return Err(Error::Domain(format!("policy has {} entries, expected {n}", policy.len())));
    }
    if let Some(&k) = policy.iter().find(|&&k| k >= betas.len()) {
        return Err(Error::Domain(format!("policy references type index {k} out of range")));
    }
    let sign = match spec.variant() {
        Variant::Exploitative => -0.5,
        Variant::Beneficial => 0.5,
    };
    let mut a = DMatrix::<f64>::identity(n, n);
    for s in 0..n {
        let row = betas[policy[s]].row(s);
        for t in 0..n {
            a[(s, t)] += sign * row[t];
        }
    }
    let delta = spec.delta();
    let b = DVector::from_iterator(n, spec.s().iter().map(|s| (s - delta) / 2.0));
    let q = a.lu().solve(&b).ok_or_else(|| Error::Domain("singular policy system".into()))?;
    Ok(q.iter().copied().collect())
}

/// Howard-style policy iteration; exploitative variant only, where the
/// operator is monotone. Ties break toward the lowest type index.
pub fn policy_iteration(
    spec: &MarketSpec,
    betas: &[TransitionMatrix],
) -> Result<(Vec<f64>, Vec<usize>, usize)> {
    if spec.variant() != Variant::Exploitative {
        return Err(Error::Unsupported(
            "policy iteration relies on operator monotonicity, absent in the beneficial variant"
                .into(),
        ));
    }
    let n = spec.space().num_states();
    let mut policy = vec![0usize; n];
    for round in 1..=1000 {
        let q = policy_value(spec, betas, &policy)?;
        let improved: Vec<usize> = (0..n)
            .map(|s| {
                let (best, _) = decisive_estimate(Variant::Exploitative, betas, s, &q);
                (0..betas.len()).find(|&k| betas[k].estimate(s, &q) <= best).unwrap()
            })
            .collect();
        if improved == policy {
            return Ok((q, policy, round));
        }
        policy = improved;
    }
    Err(Error::Domain("policy iteration cycled".into()))
}

/// Independent check by exhaustive policy enumeration. Exploitative: the
/// equilibrium profile is the pointwise minimum over all policy values.
/// Beneficial: returns the value of a policy that is decisive against its
/// own value. Errors if the policy count exceeds `budget`.
pub fn brute_force_oracle(
    spec: &MarketSpec,
    betas: &[TransitionMatrix],
    budget: u128,
) -> Result<Vec<f64>> {
    let n = spec.space().num_states();
    let k = betas.len();
    let total = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::EnumerationBudget { policies: total, budget });
    }
    let mut policy = vec![0usize; n];
    let mut best: Option<Vec<f64>> = None;
    loop {
        let q = policy_value(spec, betas, &policy)?;
        match spec.variant() {
            Variant::Exploitative => {
                best = Some(match best {
                    None => q,
                    Some(b) => b.iter().zip(&q).map(|(x, y)| x.min(*y)).collect(),
                });
            }
            Variant::Beneficial => {
                let consistent = (0..n).all(|s| {
                    let (top, _) = decisive_estimate(Variant::Beneficial, betas, s, &q);
                    betas[policy[s]].estimate(s, &q) >= top - 1e-9
                });
                if consistent {
                    return Ok(q);
                }
            }
        }
        // Next policy in odometer order.
        let mut pos = 0;
        loop {
            if pos == n {
                return match best {
                    Some(b) => Ok(b),
                    None => Err(Error::Domain("no self-consistent policy found".into())),
                };
            }
            policy[pos] += 1;
            if policy[pos] < k {
                break;
            }
            policy[pos] = 0;
            pos += 1;
        }
    }
}

/// Derives prices, thresholds, interiority, welfare, and the revelation
/// check from a fixed add-on profile.
pub(crate) fn finish_solution(
    spec: &MarketSpec,
    q_bar: Vec<f64>,
    argmin_types: Vec<Vec<usize>>,
    mut diagnostics: SolveDiagnostics,
) -> Result<EquilibriumSolution> {
    let n = spec.space().num_states();
    let h: Vec<f64> = (0..n).map(|s| market::price_from_addon(spec, s, q_bar[s])).collect();
    let pi: Vec<f64> = (0..n).map(|s| market::pi_star(spec, s, h[s])).collect();

    let mut corner = Vec::new();
    let interior: Vec<bool> = (0..n)
        .map(|s| {
            let ok = pi[s] > INTERIOR_MARGIN && pi[s] < 1.0 - INTERIOR_MARGIN;
            if !ok {
                corner.push(format!("{} (pi* = {})", spec.space().label(s), pi[s]));
            }
            ok
        })
        .collect();
    if !corner.is_empty() {
        return Err(Error::NoInteriorEquilibrium(format!(
            "supply is at a corner in state(s) {}",
            corner.join(", ")
        )));
    }

    diagnostics.price_collisions = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| (h[i] - h[j]).abs() <= PRICE_COLLISION_TOL)
        .count();

    let delta = spec.delta();
    let (surplus, net): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|s| match spec.variant() {
            Variant::Exploitative => ((1.0 - pi[s]) * delta, spec.v_star() - h[s] - q_bar[s]),
            Variant::Beneficial => (
                (1.0 - pi[s]) * delta + spec.s_of(s) * (1.0 - pi[s] * pi[s]) / 2.0,
                spec.v_star() + q_bar[s] - h[s],
            ),
        })
        .unzip();
    let loss: f64 = (0..n).map(|s| spec.mu()[s] * (1.0 - pi[s]) * (-net[s]).max(0.0)).sum();

    Ok(EquilibriumSolution {
        variant: spec.variant(),
        q_bar,
        h,
        pi_star: pi,
        argmin_types,
        interior,
        welfare: Welfare {
            social_surplus: surplus,
            trading_net_payoff: net,
            exante_consumer_loss: loss,
        },
        diagnostics,
    })
}

/// Solves for the unique interior equilibrium by value iteration, with a
/// policy-iteration cross-check in the exploitative variant. Errors when
/// iteration stalls or when the resulting supply is at a corner somewhere.
pub fn solve(spec: &MarketSpec, tol: f64, max_iter: usize) -> Result<EquilibriumSolution> {
    let betas = compute_betas(spec)?;
    let (q, iterations, residual) = value_iteration(spec, &betas, tol, max_iter)?;

    let policy_check = match spec.variant() {
        Variant::Exploitative => {
            let (pq, _, _) = policy_iteration(spec, &betas)?;
            Some(q.iter().zip(&pq).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        }
        Variant::Beneficial => None,
    };

    let argmin: Vec<Vec<usize>> = spec
        .space()
        .states()
        .map(|s| {
            let (best, _) = decisive_estimate(spec.variant(), &betas, s, &q);
            (0..betas.len())
                .filter(|&k| (betas[k].estimate(s, &q) - best).abs() <= TIE_TOL)
                .collect()
        })
        .collect();

    finish_solution(
        spec,
        q,
        argmin,
        SolveDiagnostics { iterations, residual, policy_check, price_collisions: 0 },
    )
}

/// [`solve`] with the default tolerance and iteration cap.
pub fn solve_default(spec: &MarketSpec) -> Result<EquilibriumSolution> {
    solve(spec, DEFAULT_TOL, DEFAULT_MAX_ITER)
}
