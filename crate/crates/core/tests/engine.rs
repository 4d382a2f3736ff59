use std::f64::consts::PI;

use statrs::function::erf::erfc;

use voi_core::{
    evii, evii_with_table, evpi, net_benefit, outcome_distribution, sensitivity_sweep, solve_prior, Action,
    ActionSpace, Backend, DecisionProblem, DistributionSpec, EstimatorConfig, EviiMethod, MeasurementModel,
    Parameter, ParameterSchema, ProblemMetadata, Role, ScenarioSample, SweepAnalysis, TimeBasis, VoiError, VoiKind,
};

fn meta() -> ProblemMetadata {
    ProblemMetadata {
        name: "toy".into(),
        currency: "gbp".into(),
        time_basis: TimeBasis::PerYear,
    }
}

/// Do nothing (utility 0) or take a bet paying `theta`.
fn bet(prior: DistributionSpec) -> DecisionProblem {
    DecisionProblem::new(
        meta(),
        ActionSpace::new("bet", [("skip", 0.0), ("take", 1.0)]),
        ParameterSchema::new(vec![Parameter::new("theta", "gbp", prior, Role::Measured)]),
        |a: usize, s: &ScenarioSample| Ok(if a == 0 { 0.0 } else { s[0] }),
    )
}

/// Bet with an extra nuisance noise term that does not change the optimum.
fn noisy_bet() -> DecisionProblem {
    DecisionProblem::new(
        meta(),
        ActionSpace::new("bet", [("skip", 0.0), ("take", 1.0)]),
        ParameterSchema::new(vec![
            Parameter::new("noise", "gbp", DistributionSpec::gaussian(0.0, 1.0), Role::Nuisance),
            Parameter::new("theta", "gbp", DistributionSpec::gaussian(0.2, 1.0), Role::Measured),
        ]),
        |a: usize, s: &ScenarioSample| Ok(if a == 0 { 0.0 } else { s[1] + s[0] }),
    )
}

fn noisy(sigma: f64) -> MeasurementModel {
    MeasurementModel::new("probe", "theta", 10.0, move |t| DistributionSpec::gaussian(t, sigma))
}

fn perfect() -> MeasurementModel {
    MeasurementModel::new("oracle", "theta", 0.0, |t| DistributionSpec::degenerate(t))
}

fn cfg(n: u64) -> EstimatorConfig {
    EstimatorConfig {
        n_samples: n,
        ..Default::default()
    }
}

fn coin() -> DistributionSpec {
    DistributionSpec::Categorical {
        values: vec![-1.0, 1.0],
        probs: vec![0.5, 0.5],
    }
}

#[test]
fn exact_evpi_of_a_fair_coin_is_one_half() {
    let r = evpi(&bet(coin()), &cfg(10)).unwrap();
    assert_eq!(r.prior.backend, Backend::Exact);
    assert_eq!(r.prior.n_samples, 2);
    assert!((r.value - 0.5).abs() < 1e-12);
    assert_eq!(r.standard_error, 0.0);
    // Equal expected utilities: the tie goes to the first action.
    assert_eq!(r.prior.best_action, 0);
    assert_eq!(r.kind, VoiKind::Evpi);
}

#[test]
fn monte_carlo_evpi_matches_closed_form() {
    let r = evpi(&bet(DistributionSpec::gaussian(0.0, 1.0)), &cfg(100_000)).unwrap();
    let exact = 1.0 / (2.0 * PI).sqrt();
    assert_eq!(r.prior.backend, Backend::MonteCarlo);
    assert!((r.value - exact).abs() < 3.0 * r.standard_error, "{} vs {exact}", r.value);
}

#[test]
fn forced_backends() {
    let mut c = cfg(5000);
    c.backend = Backend::MonteCarlo;
    let r = evpi(&bet(coin()), &c).unwrap();
    assert_eq!(r.prior.backend, Backend::MonteCarlo);
    assert!((r.value - 0.5).abs() < 4.0 * r.standard_error);
    c.backend = Backend::Exact;
    let err = evpi(&bet(DistributionSpec::gaussian(0.0, 1.0)), &c).unwrap_err();
    assert!(matches!(err, VoiError::InvalidConfig(_)));
}

#[test]
fn utility_independent_of_theta_has_zero_evpi() {
    let p = DecisionProblem::new(
        meta(),
        ActionSpace::new("x", [("a", 0.0), ("b", 1.0)]),
        ParameterSchema::new(vec![Parameter::new(
            "theta",
            "-",
            DistributionSpec::gaussian(0.0, 1.0),
            Role::Measured,
        )]),
        |a: usize, _: &ScenarioSample| Ok(a as f64),
    );
    let r = evpi(&p, &cfg(5000)).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(r.prior.best_action, 1);
    assert_eq!(r.frequency_of(1), 1.0);
}

#[test]
fn results_are_bit_identical_across_worker_counts() {
    let p = noisy_bet();
    let reports: Vec<_> = [1, 2, 3, 8]
        .iter()
        .map(|&w| {
            let c = EstimatorConfig {
                n_samples: 20_000,
                workers: w,
                ..Default::default()
            };
            (evpi(&p, &c).unwrap(), evii(&p, &noisy(0.5), &c).unwrap())
        })
        .collect();
    for r in &reports[1..] {
        assert_eq!(r.0.value.to_bits(), reports[0].0.value.to_bits());
        assert_eq!(r.1.value.to_bits(), reports[0].1.value.to_bits());
        assert_eq!(r, &reports[0]);
    }
}

#[test]
fn different_seeds_give_different_estimates() {
    let p = bet(DistributionSpec::gaussian(0.0, 1.0));
    let a = evpi(&p, &cfg(1000)).unwrap();
    let b = evpi(&p, &EstimatorConfig { seed: 7, ..cfg(1000) }).unwrap();
    assert_ne!(a.value, b.value);
}

#[test]
fn evii_matches_closed_form_for_gaussian_noise() {
    // Prior N(0,1), noise sd s: posterior mean ~ N(0, 1/(1+s^2)), so the
    // value of the measurement is sd(posterior mean) / sqrt(2 pi).
    let p = bet(DistributionSpec::gaussian(0.0, 1.0));
    for s in [0.3, 1.0, 2.0] {
        let r = evii(&p, &noisy(s), &cfg(100_000)).unwrap();
        let exact = (1.0 / (1.0 + s * s)).sqrt() / (2.0 * PI).sqrt();
        assert!(
            (r.value - exact).abs() < 3.0 * r.standard_error + 1e-4,
            "s={s}: {} vs {exact} (se {})",
            r.value,
            r.standard_error
        );
        assert_eq!(r.kind, VoiKind::Evii);
        assert_eq!(r.prior.backend, Backend::Preposterior);
    }
}

#[test]
fn perfect_measurement_recovers_evpi() {
    let p = noisy_bet();
    let c = cfg(20_000);
    let full = evpi(&p, &c).unwrap();
    let r = evii(&p, &perfect(), &c).unwrap();
    // Perfect knowledge of theta alone leaves the nuisance term unresolved,
    // so the value is that of a bet on theta + E[noise] = theta.
    assert!(r.value <= full.value + 3.0 * full.standard_error);
    let p = bet(DistributionSpec::gaussian(0.2, 1.0));
    let full = evpi(&p, &c).unwrap();
    let r = evii(&p, &perfect(), &c).unwrap();
    assert!((r.value - full.value).abs() < 1e-12, "{} vs {}", r.value, full.value);
}

#[test]
fn uninformative_measurement_is_worth_nothing() {
    let p = bet(DistributionSpec::gaussian(0.2, 1.0));
    let r = evii(&p, &noisy(1e4), &cfg(20_000)).unwrap();
    assert!(r.value.abs() < 1e-3, "{}", r.value);
    assert!(r.value >= 0.0);
}

#[test]
fn evii_is_monotone_in_precision_under_common_numbers() {
    let p = bet(DistributionSpec::gaussian(0.2, 1.0));
    let c = cfg(50_000);
    let values: Vec<f64> = [2.0, 1.0, 0.5, 0.1]
        .iter()
        .map(|&s| evii(&p, &noisy(s), &c).unwrap().value)
        .collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
    assert!(values[3] <= evpi(&p, &c).unwrap().value + 0.01);
}

#[test]
fn table_and_direct_methods_agree_without_nuisance() {
    let p = bet(DistributionSpec::gaussian(0.2, 1.0));
    let c = EstimatorConfig {
        n_samples: 2000,
        ..Default::default()
    };
    let (t, table) = evii_with_table(&p, &noisy(0.5), &c).unwrap();
    let d = evii(&p, &noisy(0.5), &EstimatorConfig { evii_method: EviiMethod::Direct, ..c }).unwrap();
    assert!((t.value - d.value).abs() < 1e-12);
    let table = table.unwrap();
    assert_eq!(table.values.len(), 2);
    assert_eq!(table.points.len(), c.posterior_grid.n_points);
    assert!(table.values[1].iter().zip(&table.points).all(|(u, x)| u == x));
}

#[test]
fn nuisance_is_averaged_in_the_table() {
    let p = noisy_bet();
    let c = EstimatorConfig {
        n_samples: 4000,
        nuisance_draws: 256,
        ..Default::default()
    };
    let (r, table) = evii_with_table(&p, &noisy(0.5), &c).unwrap();
    let table = table.unwrap();
    // take(theta) = theta + mean of 256 standard normal draws
    for (u, x) in table.values[1].iter().zip(&table.points) {
        assert!((u - x).abs() < 5.0 / 16.0);
    }
    // Posterior mean of theta ~ N(0.2, 0.8); the value is E[max(0, m)] - 0.2.
    let sd = 0.8f64.sqrt();
    let z = 0.2 / sd;
    let pdf = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
    let cdf = 0.5 * erfc(-z / 2f64.sqrt());
    let exact = 0.2 * cdf + sd * pdf - 0.2;
    assert!((r.value - exact).abs() < 0.02, "{} vs {exact}", r.value);
}

#[test]
fn evii_rejects_bad_targets() {
    let p = noisy_bet();
    let m = MeasurementModel::new("x", "missing", 1.0, |t| DistributionSpec::gaussian(t, 1.0));
    assert!(matches!(evii(&p, &m, &cfg(100)), Err(VoiError::UnknownTarget(_))));
    let m = MeasurementModel::new("x", "noise", 1.0, |t| DistributionSpec::gaussian(t, 1.0));
    assert!(matches!(evii(&p, &m, &cfg(100)), Err(VoiError::NotMeasured(_))));
}

#[test]
fn net_benefit_subtracts_cost() {
    let p = bet(DistributionSpec::gaussian(0.2, 1.0));
    let r = evii(&p, &noisy(0.5), &cfg(2000)).unwrap();
    assert_eq!(r.measurement_cost, Some(10.0));
    assert_eq!(r.net_benefit, Some(r.value - 10.0));
    assert_eq!(net_benefit(&r, &noisy(0.5)).unwrap(), r.value - 10.0);
    let e = evpi(&p, &cfg(2000)).unwrap();
    assert!(net_benefit(&e, &noisy(0.5)).is_err());
}

#[test]
fn prior_solution_reports_every_action() {
    let p = bet(DistributionSpec::gaussian(0.2, 1.0));
    let s = solve_prior(&p, &cfg(50_000)).unwrap();
    assert_eq!(s.best_action, 1);
    assert_eq!(s.per_action.len(), 2);
    assert_eq!(s.per_action[0].mean, 0.0);
    assert!((s.expected_utility - 0.2).abs() < 3.0 * s.standard_error);
}

#[test]
fn histogram_of_a_coin() {
    let h = outcome_distribution(&bet(coin()), 1, &cfg(10)).unwrap();
    assert_eq!(h.backend, Backend::Exact);
    assert_eq!(h.edges.first(), Some(&-1.0));
    assert_eq!(h.edges.last(), Some(&1.0));
    assert_eq!(h.counts.iter().sum::<u64>(), 2);
    assert!((h.mass[0] - 0.5).abs() < 1e-12 && (h.mass[49] - 0.5).abs() < 1e-12);
    assert_eq!(h.mean, 0.0);
}

#[test]
fn histogram_of_constant_outcome_has_one_bin() {
    let h = outcome_distribution(&bet(DistributionSpec::gaussian(0.0, 1.0)), 0, &cfg(3000)).unwrap();
    assert_eq!(h.counts, vec![3000]);
    assert_eq!(h.mass, vec![1.0]);
    assert_eq!(h.edges, vec![0.0, 0.0]);
}

#[test]
fn histogram_mass_sums_to_one() {
    let h = outcome_distribution(&bet(DistributionSpec::gaussian(0.0, 1.0)), 1, &cfg(10_000)).unwrap();
    assert_eq!(h.counts.len(), 50);
    assert!((h.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
    assert!(matches!(
        outcome_distribution(&bet(coin()), 5, &cfg(10)),
        Err(VoiError::UnknownAction { index: 5, count: 2 })
    ));
}

#[test]
fn sweep_rows_follow_input_order() {
    let rows = sensitivity_sweep(
        |m| Ok(bet(DistributionSpec::gaussian(m, 1.0))),
        &[-1.0, 1.0],
        SweepAnalysis::Evpi,
        &cfg(5000),
    )
    .unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].best_action, Some(0));
    assert_eq!(rows[1].best_action, Some(1));
    assert!(rows.iter().all(|r| r.is_ok() && r.evpi.unwrap() > 0.0));
    assert_ne!(rows[0].seed, rows[1].seed);
}

#[test]
fn sweep_of_one_value_and_failing_rows() {
    let rows = sensitivity_sweep(
        |m| {
            if m < 0.0 {
                Err(VoiError::Model("negative".into()))
            } else {
                Ok(bet(DistributionSpec::gaussian(m, 1.0)))
            }
        },
        &[-1.0, 0.5],
        SweepAnalysis::Prior,
        &cfg(1000),
    )
    .unwrap();
    assert!(!rows[0].is_ok());
    assert!(rows[0].status.contains("negative"));
    assert!(rows[1].is_ok() && rows[1].evpi.is_none());
    assert!(matches!(
        sensitivity_sweep(|_| Ok(bet(coin())), &[], SweepAnalysis::Prior, &cfg(10)),
        Err(VoiError::EmptySweep)
    ));
}

#[test]
fn actions_can_be_built_explicitly() {
    let a = ActionSpace::from_actions(vec![Action {
        index: 0,
        label: "only".into(),
        payload: 3.0,
        unit: "m".into(),
    }]);
    assert_eq!(a.find("only").unwrap().payload, 3.0);
}
