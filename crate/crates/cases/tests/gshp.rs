use voi_cases::gshp::*;
use voi_core::{evii, evii_with_table, EstimatorConfig, EviiMethod, GridSpec};

fn reduced() -> EstimatorConfig {
    EstimatorConfig {
        n_samples: 1000,
        posterior_grid: GridSpec {
            n_points: 64,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn cost_is_non_increasing_in_conductivity_at_every_length() {
    let cfg = GshpConfig::default();
    let m = GshpModel::new(&cfg).unwrap();
    let lambdas: Vec<f64> = (0..25).map(|i| 0.5 + 0.125 * f64::from(i)).collect();
    for &l in &cfg.lengths {
        let costs: Vec<f64> = lambdas.iter().map(|&k| m.lifetime_cost(l, k).unwrap()).collect();
        assert!(costs.windows(2).all(|w| w[1] <= w[0]), "length {l}: {costs:?}");
    }
}

#[test]
fn free_function_matches_model() {
    let cfg = GshpConfig::default();
    let m = GshpModel::new(&cfg).unwrap();
    assert_eq!(gshp_lifetime_cost(155.0, 1.94, &cfg).unwrap(), m.lifetime_cost(155.0, 1.94).unwrap());
}

#[test]
fn table_and_direct_evii_agree() {
    let cfg = GshpConfig::default();
    let p = build_gshp_problem(&cfg).unwrap();
    let trt = &ground_test_measurements(&cfg)[2];
    let (t, table) = evii_with_table(&p, trt, &reduced()).unwrap();
    let d = evii(
        &p,
        trt,
        &EstimatorConfig {
            evii_method: EviiMethod::Direct,
            ..reduced()
        },
    )
    .unwrap();
    assert!((t.value - d.value).abs() <= 3.0 * t.standard_error.max(d.standard_error));
    let table = table.unwrap();
    assert_eq!(table.values.len(), 17);
    assert_eq!(table.points.len(), 64);
}

#[test]
fn evii_ordering_on_reduced_grid() {
    let cfg = GshpConfig::default();
    let p = build_gshp_problem(&cfg).unwrap();
    let values: Vec<f64> = ground_test_measurements(&cfg)
        .iter()
        .map(|m| evii(&p, m, &reduced()).unwrap().value)
        .collect();
    assert!(values.iter().all(|&v| v >= 0.0));
    assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
}
