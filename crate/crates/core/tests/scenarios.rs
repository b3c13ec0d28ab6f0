use std::sync::Arc;

use hmorph::manifold::{Chart, Domain};
use hmorph::maps::MapSpec;
use hmorph::scenarios::{check_riemannian_submersion, run_scenario, scenario_info, scenarios, MAX_EXCLUDED_FRACTION};
use hmorph::{DiffConfig, GeoError, SamplePlan};
use nalgebra::DVector;
use proptest::prelude::*;

fn defaults() -> (SamplePlan, DiffConfig) {
    let cfg = DiffConfig::default();
    (SamplePlan::for_config(42, 20, &cfg), cfg)
}

#[test]
fn every_scenario_matches_its_expected_verdict() {
    let (plan, cfg) = defaults();
    for s in scenarios() {
        let r = run_scenario(s.id, &plan, &cfg).unwrap_or_else(|e| panic!("{}: {e}", s.id));
        assert_eq!(r.overall, s.expected, "{}: {:#?}", s.id, r.checks);
        assert_eq!(r.scenario_id, s.id);
        assert!(!r.checks.is_empty(), "{}", s.id);
    }
}

#[test]
fn reports_are_sound() {
    let (plan, cfg) = defaults();
    for s in scenarios() {
        let r = run_scenario(s.id, &plan, &cfg).unwrap();
        assert!(r.is_sound(), "{}", s.id);
        assert_eq!(r.overall, r.checks.iter().all(|c| c.verdict));
        for c in &r.checks {
            assert!(c.residual >= 0.0, "{}: {} = {}", s.id, c.name, c.residual);
            assert_eq!(c.verdict, c.residual <= c.tolerance);
            assert!(c.excluded_samples as f64 <= MAX_EXCLUDED_FRACTION * plan.count as f64);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let (plan, cfg) = defaults();
    for id in ["product-hopf-1-1-two-of-three", "punctured-hopf-1-lift-minus", "ce-1-1-classify"] {
        let a = serde_json::to_string(&run_scenario(id, &plan, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_scenario(id, &plan, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn harmonic_morphism_verdict_is_conformality_and_tension() {
    let (plan, cfg) = defaults();
    for s in scenarios().iter().filter(|s| s.id.ends_with("-harmonic") || s.id.starts_with("hopf-mobius")) {
        let r = run_scenario(s.id, &plan, &cfg).unwrap();
        let conf = r.check("horizontal_conformality").expect("conformality check");
        let tens = r.check("tension").expect("tension check");
        let others = r
            .checks
            .iter()
            .filter(|c| c.name != "horizontal_conformality" && c.name != "tension")
            .all(|c| c.verdict);
        assert_eq!(r.overall, conf.verdict && tens.verdict && others, "{}", s.id);
        assert_eq!(conf.verdict, conf.residual <= conf.tolerance);
    }
}

#[test]
fn unknown_scenarios_and_bad_configs_are_errors() {
    let (plan, cfg) = defaults();
    assert!(matches!(run_scenario("no-such-thing", &plan, &cfg), Err(GeoError::UnknownScenario(_))));
    assert!(scenario_info("hopf-s3").is_some());
    let bad = DiffConfig {
        step: -1.0,
        ..cfg
    };
    assert!(matches!(run_scenario("hopf-s3", &plan, &bad), Err(GeoError::InvalidConfig(_))));
}

#[test]
fn near_critical_samples_are_capped() {
    let cfg = DiffConfig::default();
    let plan = SamplePlan::for_config(1, 20, &cfg);
    let src = Arc::new(Chart::euclidean("R3", Domain::unbounded(3), vec![(-1.0, 1.0); 3]));
    let tgt = Arc::new(Chart::euclidean("R2", Domain::unbounded(2), vec![(-1.0, 1.0); 2]));
    // second singular value sits just above the rank threshold everywhere
    let map = MapSpec::new("squashed", src, tgt, |x| Ok(DVector::from_vec(vec![x[0], 5e-6 * x[1]])));
    assert!(matches!(
        check_riemannian_submersion(&map, &plan),
        Err(GeoError::TooManyExcluded { .. })
    ));
}

const MONOTONE_SAMPLE: &[&str] = &[
    "hopf-s3",
    "ce-1-0-classify",
    "product-hopf-1-1-two-of-three",
    "product-hopf-1-1-cosymplectic-image",
    "punctured-hopf-1-lift-plus",
    "hopf-surface-gauduchon",
    "torus-quadratic-harmonic",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn loosening_tolerance_never_fails_a_passing_scenario(
        abs_factor in 1.0f64..100.0,
        rel_factor in 1.0f64..100.0,
    ) {
        let (plan, cfg) = defaults();
        let loose = DiffConfig {
            tolerance_abs: cfg.tolerance_abs * abs_factor,
            tolerance_factor: cfg.tolerance_factor * rel_factor,
            ..cfg
        };
        for id in MONOTONE_SAMPLE {
            let tight = run_scenario(id, &plan, &cfg).unwrap();
            let relaxed = run_scenario(id, &plan, &loose).unwrap();
            prop_assert!(!tight.overall || relaxed.overall, "{id} flipped");
        }
    }
}
