//! Comparative statics, bound audits, and structural checks layered on top
//! of the solver.

use serde::Serialize;

use crate::belief::{BeliefModel, CognitiveType};
use crate::error::{Error, Result};
use crate::market::{self, MarketSpec, Variant};
use crate::solver::{self, EquilibriumSolution};

/// Slack used when classifying a signed change as monotone.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Whether some type's belief matrix is the identity (within 1e-12). The
/// detection is semantic rather than syntactic because many different
/// models induce fully correct expectations.
pub fn has_rational_type(spec: &MarketSpec) -> Result<bool> {
    Ok(solver::compute_betas(spec)?.iter().any(|b| b.is_identity(1e-12)))
}

/// Before/after comparison of the equilibrium when one more type enters.
#[derive(Debug, Clone, Serialize)]
pub struct AddTypeReport {
    pub added_type: String,
    pub delta_q_bar: Vec<f64>,
    pub delta_h: Vec<f64>,
    pub delta_social_surplus: Vec<f64>,
    pub delta_net_payoff: Vec<f64>,
    /// Change in the ex-ante consumer loss; reported only when a rational
    /// type is present, matching the qualifier of the welfare claim.
    pub delta_exante_loss: Option<f64>,
    pub rational_present: bool,
    /// Every per-state add-on level weakly fell.
    pub q_weakly_decreases: bool,
    /// Every per-state price weakly rose.
    pub h_weakly_increases: bool,
    pub before: EquilibriumSolution,
    pub after: EquilibriumSolution,
}

/// Solves the market before and after appending `new_type` and reports the
/// per-state movements. Errors if either side lacks an interior solution.
pub fn add_type_experiment(spec: &MarketSpec, new_type: CognitiveType) -> Result<AddTypeReport> {
    let before = solver::solve_default(spec)?;
    let bigger = spec.with_added_type(new_type.clone())?;
    let after = solver::solve_default(&bigger)?;
    let n = spec.space().num_states();
    let delta_q_bar: Vec<f64> = (0..n).map(|s| after.q_bar[s] - before.q_bar[s]).collect();
    let delta_h: Vec<f64> = (0..n).map(|s| after.h[s] - before.h[s]).collect();
    let delta_social_surplus: Vec<f64> = (0..n)
        .map(|s| after.welfare.social_surplus[s] - before.welfare.social_surplus[s])
        .collect();
    let delta_net_payoff: Vec<f64> = (0..n)
        .map(|s| after.welfare.trading_net_payoff[s] - before.welfare.trading_net_payoff[s])
        .collect();
    let rational_present = has_rational_type(spec)?;
    let delta_exante_loss = rational_present
        .then_some(after.welfare.exante_consumer_loss - before.welfare.exante_consumer_loss);
    Ok(AddTypeReport {
        added_type: new_type.name,
        q_weakly_decreases: delta_q_bar.iter().all(|d| *d <= MONOTONE_SLACK),
        h_weakly_increases: delta_h.iter().all(|d| *d >= -MONOTONE_SLACK),
        delta_q_bar,
        delta_h,
        delta_social_surplus,
        delta_net_payoff,
        delta_exante_loss,
        rational_present,
        before,
        after,
    })
}

/// Position of the ex-ante expected add-on within its theoretical range.
#[derive(Debug, Clone, Serialize)]
pub struct AddonAudit {
    /// Sum over states of mu(theta) q_bar(theta).
    pub exante_addon: f64,
    /// The benchmark ex-ante level S-bar - Delta.
    pub ree_level: f64,
    /// The floor S-bar / 2.
    pub lower_bound: f64,
    pub expected_price: f64,
    /// The benchmark expected price v* + Delta - S-bar.
    pub ree_price: f64,
    pub within_bounds: bool,
    /// With a single type the ex-ante add-on collapses to the benchmark
    /// level exactly; `None` when more types are present.
    pub singleton_equality: Option<bool>,
}

/// Audits `sum mu q_bar` against its `[S-bar / 2, S-bar - Delta]` range and
/// the expected price against its benchmark floor. Exploitative only.
pub fn expected_addon_audit(spec: &MarketSpec) -> Result<AddonAudit> {
    if spec.variant() != Variant::Exploitative {
        return Err(Error::Unsupported(
            "the add-on range audit applies to the exploitative variant".into(),
        ));
    }
    let sol = solver::solve_default(spec)?;
    let exante_addon: f64 = spec.mu().iter().zip(&sol.q_bar).map(|(m, q)| m * q).sum();
    let expected_price: f64 = spec.mu().iter().zip(&sol.h).map(|(m, h)| m * h).sum();
    let s_bar = spec.s_bar();
    let ree_level = s_bar - spec.delta();
    let lower_bound = s_bar / 2.0;
    Ok(AddonAudit {
        exante_addon,
        ree_level,
        lower_bound,
        expected_price,
        ree_price: spec.v_star() + spec.delta() - s_bar,
        within_bounds: exante_addon >= lower_bound - MONOTONE_SLACK
            && exante_addon <= ree_level + MONOTONE_SLACK,
        singleton_equality: (spec.types().len() == 1)
            .then(|| (exante_addon - ree_level).abs() <= MONOTONE_SLACK),
    })
}

/// Per-state price bounds relative to the extremes of S.
#[derive(Debug, Clone, Serialize)]
pub struct PriceRangeReport {
    /// True when the market has no rational type, in which case the bounds
    /// are not guaranteed and nothing is asserted.
    pub skipped: bool,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub h: Vec<f64>,
    pub bounds_hold: bool,
    /// The upper bound is attained (within 1e-9) at the state minimizing S.
    pub upper_binds_at_s_min: bool,
}

/// Checks `2v* - c - S^max <= h(theta) <= 2v* - c - S^min` per state; the
/// guarantee requires a rational type, so its absence yields a skipped
/// report instead of assertions.
pub fn price_range_check(spec: &MarketSpec) -> Result<PriceRangeReport> {
    if spec.variant() != Variant::Exploitative {
        return Err(Error::Unsupported(
            "the price range check applies to the exploitative variant".into(),
        ));
    }
    let sol = solver::solve_default(spec)?;
    let lower = 2.0 * spec.v_star() - spec.c() - spec.s_max();
    let upper = 2.0 * spec.v_star() - spec.c() - spec.s_min();
    if !has_rational_type(spec)? {
        return Ok(PriceRangeReport {
            skipped: true,
            lower_bound: lower,
            upper_bound: upper,
            h: sol.h,
            bounds_hold: false,
            upper_binds_at_s_min: false,
        });
    }
    let argmin_s = (0..spec.space().num_states())
        .min_by(|&a, &b| spec.s_of(a).total_cmp(&spec.s_of(b)))
        .unwrap();
    Ok(PriceRangeReport {
        skipped: false,
        lower_bound: lower,
        upper_bound: upper,
        bounds_hold: sol
            .h
            .iter()
            .all(|&h| h >= lower - MONOTONE_SLACK && h <= upper + MONOTONE_SLACK),
        upper_binds_at_s_min: (sol.h[argmin_s] - upper).abs() <= MONOTONE_SLACK,
        h: sol.h,
    })
}

/// Per-state comparison of a beneficial equilibrium with its benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct BeneficialReeReport {
    pub q_bar: Vec<f64>,
    pub ree_q_bar: Vec<f64>,
    pub h: Vec<f64>,
    pub ree_h: Vec<f64>,
    /// q_bar(theta) <= (S(theta) - Delta) / 3 everywhere.
    pub q_weakly_below: bool,
    /// h(theta) weakly above its benchmark everywhere.
    pub h_weakly_above: bool,
}

/// Asserts that in the beneficial variant with a rational type present the
/// add-on sits weakly below its benchmark level and the price weakly above.
pub fn beneficial_ree_compare(spec: &MarketSpec) -> Result<BeneficialReeReport> {
    if spec.variant() != Variant::Beneficial {
        return Err(Error::Unsupported(
            "the benchmark comparison applies to the beneficial variant".into(),
        ));
    }
    if !has_rational_type(spec)? {
        return Err(Error::Domain(
            "the beneficial benchmark comparison requires a rational type".into(),
        ));
    }
    let sol = solver::solve_default(spec)?;
    let ree = market::ree_solution(spec)?;
    let q_weakly_below = sol.q_bar.iter().zip(&ree.q_bar).all(|(q, r)| *q <= r + MONOTONE_SLACK);
    let h_weakly_above = sol.h.iter().zip(&ree.h).all(|(h, r)| *h >= r - MONOTONE_SLACK);
    Ok(BeneficialReeReport {
        q_bar: sol.q_bar,
        ree_q_bar: ree.q_bar,
        h: sol.h,
        ree_h: ree.h,
        q_weakly_below,
        h_weakly_above,
    })
}

/// Supply and surplus movement when a type enters a beneficial market.
#[derive(Debug, Clone, Serialize)]
pub struct BeneficialWelfareReport {
    pub added_type: String,
    pub delta_pi_star: Vec<f64>,
    pub delta_total_surplus: f64,
    /// Whether the entry cutoff fell weakly in every state. Usually true,
    /// but not guaranteed: entry can push individual add-on levels in
    /// opposite directions, so this is reported rather than asserted.
    pub pi_weakly_decreases: bool,
    pub surplus_weakly_decreases: bool,
}

/// Solves a beneficial market with a rational type before and after adding
/// `new_type`; total surplus must weakly fall, and the per-state cutoff
/// movements are reported alongside.
pub fn beneficial_welfare_compare(
    spec: &MarketSpec,
    new_type: CognitiveType,
) -> Result<BeneficialWelfareReport> {
    if spec.variant() != Variant::Beneficial {
        return Err(Error::Unsupported(
            "the welfare comparison applies to the beneficial variant".into(),
        ));
    }
    if !has_rational_type(spec)? {
        return Err(Error::Domain(
            "the beneficial welfare comparison requires a rational type".into(),
        ));
    }
    let before = solver::solve_default(spec)?;
    let after = solver::solve_default(&spec.with_added_type(new_type.clone())?)?;
    let total = |sol: &EquilibriumSolution| -> f64 {
        spec.mu().iter().zip(&sol.welfare.social_surplus).map(|(m, w)| m * w).sum()
    };
    let delta_pi_star: Vec<f64> =
        before.pi_star.iter().zip(&after.pi_star).map(|(b, a)| a - b).collect();
    let delta_total_surplus = total(&after) - total(&before);
    Ok(BeneficialWelfareReport {
        added_type: new_type.name,
        pi_weakly_decreases: delta_pi_star.iter().all(|d| *d <= MONOTONE_SLACK),
        surplus_weakly_decreases: delta_total_surplus <= MONOTONE_SLACK,
        delta_pi_star,
        delta_total_surplus,
    })
}

/// Signal-reachability verdict for one type's DAG.
#[derive(Debug, Clone, Serialize)]
pub struct SignalReachability {
    pub type_name: String,
    /// A direct price-to-add-on edge induces correct expectations, which
    /// exempts the type from the premise.
    pub exempt: bool,
    /// Whether the price's parents block every skeleton path from the
    /// signal to the add-on; `None` for exempt types.
    pub blocked: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop8Report {
    pub per_type: Vec<SignalReachability>,
    /// True when no non-exempt DAG has its signal blocked from the add-on
    /// by the price's parents: prices must then respond to signals.
    pub premise_holds: bool,
}

/// For each DAG-based type carrying a signal node, checks whether the
/// price's parents block the signal from the add-on. Types with a direct
/// price-to-add-on edge are exempt; every other type must carry a signal.
pub fn prop8_premise_check(types: &[CognitiveType]) -> Result<Prop8Report> {
    let mut per_type = Vec::with_capacity(types.len());
    for t in types {
        let dag = match &t.model {
            BeliefModel::Dag(dag) => dag,
            _ => return Err(Error::Domain(format!("type `{}` is not DAG-based", t.name))),
        };
        let phi = dag
            .price_node()
            .ok_or_else(|| Error::Domain(format!("type `{}` has no price node", t.name)))?;
        let q = dag
            .addon_node()
            .ok_or_else(|| Error::Domain(format!("type `{}` has no add-on node", t.name)))?;
        if dag.edges().iter().any(|&(p, c)| p == phi && c == q) {
            per_type.push(SignalReachability {
                type_name: t.name.clone(),
                exempt: true,
                blocked: None,
            });
            continue;
        }
        let w = dag
            .signal_node()
            .ok_or_else(|| Error::Domain(format!("type `{}` has no signal node", t.name)))?;
        let r_phi = dag.parents(phi).to_vec();
        let blocked = dag.blocks(&r_phi, w, q)?;
        per_type.push(SignalReachability {
            type_name: t.name.clone(),
            exempt: false,
            blocked: Some(blocked),
        });
    }
    let premise_holds = per_type.iter().all(|r| r.exempt || r.blocked == Some(false));
    Ok(Prop8Report { per_type, premise_holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario;
    use crate::state::{StateSpace, Variable};
    use approx::assert_abs_diff_eq;

    fn rational_only_padded() -> MarketSpec {
        let spec = scenario::example_3_1();
        MarketSpec::new(
            spec.space().clone(),
            spec.mu().to_vec(),
            spec.s().to_vec(),
            spec.v_star(),
            spec.c(),
            spec.variant(),
            vec![CognitiveType::rational(spec.space())],
        )
        .unwrap()
    }

    #[test]
    fn adding_a_coarse_type_moves_addons_down_and_prices_up() {
        let spec = rational_only_padded();
        let report = add_type_experiment(&spec, CognitiveType::coarse("t1", &[0])).unwrap();
        assert!(report.q_weakly_decreases);
        assert!(report.h_weakly_increases);
        assert!(report.rational_present);
        assert!(report.delta_exante_loss.unwrap() >= -MONOTONE_SLACK);
    }

    #[test]
    fn adding_a_duplicate_type_changes_nothing() {
        let spec = scenario::example_3_1();
        let report = add_type_experiment(&spec, CognitiveType::coarse("t1-again", &[0])).unwrap();
        for s in 0..4 {
            assert_abs_diff_eq!(report.delta_q_bar[s], 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(report.delta_h[s], 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn beneficial_addition_breaks_the_monotone_pattern() {
        let spec = scenario::example_4_beneficial();
        let report = add_type_experiment(&spec, CognitiveType::rational(spec.space())).unwrap();
        assert!(report.delta_q_bar[0] > 0.0);
        assert!(report.delta_q_bar[1] < 0.0);
        assert!(!report.q_weakly_decreases);
    }

    #[test]
    fn singleton_audit_matches_the_benchmark_exactly() {
        for t in [CognitiveType::coarse("empty", &[]), CognitiveType::coarse("t1", &[0])] {
            let base = scenario::example_3_1();
            let spec = MarketSpec::new(
                base.space().clone(),
                base.mu().to_vec(),
                base.s().to_vec(),
                base.v_star(),
                base.c(),
                base.variant(),
                vec![t],
            )
            .unwrap();
            let audit = expected_addon_audit(&spec).unwrap();
            assert!(audit.singleton_equality.unwrap());
            assert_abs_diff_eq!(audit.exante_addon, audit.ree_level, epsilon = 1e-9);
            assert_abs_diff_eq!(audit.expected_price, audit.ree_price, epsilon = 1e-9);
        }
    }

    #[test]
    fn four_type_audit_sits_strictly_inside_the_range() {
        let audit = expected_addon_audit(&scenario::example_3_1()).unwrap();
        assert!(audit.within_bounds);
        assert!(audit.exante_addon > audit.lower_bound + 0.1);
        assert!(audit.exante_addon < audit.ree_level - 0.1);
        assert!(audit.expected_price > audit.ree_price);
        assert!(audit.singleton_equality.is_none());
    }

    #[test]
    fn price_range_holds_and_binds_at_the_cheapest_state() {
        let report = price_range_check(&scenario::example_3_1()).unwrap();
        assert!(!report.skipped);
        assert!(report.bounds_hold);
        assert!(report.upper_binds_at_s_min);
        assert_abs_diff_eq!(report.upper_bound, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.h[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn price_range_without_rational_type_is_skipped() {
        let base = scenario::example_3_1();
        let spec = MarketSpec::new(
            base.space().clone(),
            base.mu().to_vec(),
            base.s().to_vec(),
            base.v_star(),
            base.c(),
            base.variant(),
            vec![CognitiveType::coarse("empty", &[])],
        )
        .unwrap();
        let report = price_range_check(&spec).unwrap();
        assert!(report.skipped);
        // A single fully coarse type flattens the price across states.
        for h in &report.h {
            assert_abs_diff_eq!(*h, report.h[0], epsilon = 1e-10);
        }
    }

    #[test]
    fn beneficial_benchmark_comparison_on_the_two_state_example() {
        let spec = scenario::example_4_beneficial()
            .with_added_type(CognitiveType::rational(scenario::example_4_beneficial().space()))
            .unwrap();
        let report = beneficial_ree_compare(&spec).unwrap();
        assert!(report.q_weakly_below);
        assert!(report.h_weakly_above);
        assert_abs_diff_eq!(report.ree_q_bar[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(report.ree_q_bar[1], 2.2 / 3.0, epsilon = 1e-12);
        // The bound binds at the state where the rational type trades.
        assert_abs_diff_eq!(report.q_bar[1], report.ree_q_bar[1], epsilon = 1e-9);
    }

    #[test]
    fn beneficial_rational_only_attains_equality() {
        let space = StateSpace::new(vec![Variable {
            name: "t".into(),
            domain: vec!["0".into(), "1".into()],
        }])
        .unwrap();
        let spec = MarketSpec::new(
            space.clone(),
            vec![0.5, 0.5],
            vec![0.9, 1.0],
            0.0,
            1.2,
            Variant::Beneficial,
            vec![CognitiveType::rational(&space)],
        )
        .unwrap();
        let report = beneficial_ree_compare(&spec).unwrap();
        for s in 0..2 {
            assert_abs_diff_eq!(report.q_bar[s], report.ree_q_bar[s], epsilon = 1e-9);
        }
    }

    #[test]
    fn beneficial_entry_shrinks_supply_and_surplus() {
        let base = scenario::example_4_beneficial();
        let spec = MarketSpec::new(
            base.space().clone(),
            base.mu().to_vec(),
            base.s().to_vec(),
            base.v_star(),
            base.c(),
            base.variant(),
            vec![CognitiveType::rational(base.space())],
        )
        .unwrap();
        let report =
            beneficial_welfare_compare(&spec, CognitiveType::coarse("empty", &[])).unwrap();
        assert!(report.pi_weakly_decreases);
        assert!(report.surplus_weakly_decreases);

        let noop =
            beneficial_welfare_compare(&spec, CognitiveType::coarse("rational2", &[0])).unwrap();
        assert_abs_diff_eq!(noop.delta_total_surplus, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn signal_premise_example_and_its_blocked_variant() {
        let open = CognitiveType::dag("chain", scenario::extended_short_chain());
        let report = prop8_premise_check(std::slice::from_ref(&open)).unwrap();
        assert!(report.premise_holds);
        assert_eq!(report.per_type[0].blocked, Some(false));

        let closed = CognitiveType::dag("chain-t2", scenario::extended_short_chain_price_on_t2());
        let report = prop8_premise_check(&[closed]).unwrap();
        assert!(!report.premise_holds);
        assert_eq!(report.per_type[0].blocked, Some(true));

        let exempt = CognitiveType::dag("direct", scenario::rational_dag_two_vars());
        let report = prop8_premise_check(&[exempt, open]).unwrap();
        assert!(report.per_type[0].exempt);
        assert!(report.premise_holds);
    }

    #[test]
    fn signal_premise_requires_signals_on_non_exempt_dags() {
        let t = CognitiveType::dag("g1", scenario::chain_dag_g1());
        assert!(prop8_premise_check(&[t]).is_err());
        let t = CognitiveType::coarse("coarse", &[0]);
        assert!(prop8_premise_check(&[t]).is_err());
    }
}
