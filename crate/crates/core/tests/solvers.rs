mod common;

use common::*;
use pgist::harness::{run_experiment, ExperimentKind, ExperimentSpec, SolverChoice};
use pgist::metrics::{mse, relative_change};
use pgist::operators::{
    make_radial_mask, make_random_pattern, LinearOperator, RadialFourier, SamplingPattern1D,
    Selection1D,
};
use pgist::signals::{gen_bandlimited, gen_heavisine, gen_shepp_logan};
use pgist::solvers::{
    pg_extrapolate_with_reference, recover_ista, recover_pg_ist,
    recover_pg_ist_with_reference, SolverConfig, StopReason, ThresholdStrategy,
};
use pgist::thresholding::Rule;
use pgist::{Error, Field};

fn traced(max_iter: usize) -> SolverConfig {
    SolverConfig {
        max_iter,
        delta: 1e-300,
        record_trace: true,
        ..SolverConfig::default()
    }
}

#[test]
fn every_pg_iterate_is_data_consistent_in_2d() {
    let truth = gen_shepp_logan(64).unwrap();
    let op = RadialFourier::new(make_radial_mask(64, 15).unwrap()).unwrap();
    let g = op.forward(&truth).unwrap();
    let res = recover_pg_ist(&op, &g, &traced(60)).unwrap();
    let trace = res.trace.unwrap();
    assert_eq!(trace.records.len(), 60);
    for rec in &trace.records {
        assert!(rec.residual <= 1e-9 * g.norm(), "iteration {}", rec.iteration);
    }
}

#[test]
fn every_pg_iterate_is_data_consistent_in_1d() {
    let truth = gen_heavisine(256).unwrap();
    let op = Selection1D::new(make_random_pattern(256, 60, 3).unwrap());
    let g = op.forward(&truth).unwrap();
    let res = recover_pg_ist(&op, &g, &traced(40)).unwrap();
    for rec in &res.trace.unwrap().records {
        assert!(rec.residual <= 1e-12 * g.norm());
    }
}

#[test]
fn trace_relative_change_matches_recomputation() {
    let truth = gen_heavisine(128).unwrap();
    let op = Selection1D::new(make_random_pattern(128, 50, 5).unwrap());
    let g = op.forward(&truth).unwrap();
    let trace = recover_pg_ist(&op, &g, &traced(6)).unwrap().trace.unwrap();
    let run = |k| recover_pg_ist(&op, &g, &traced(k)).unwrap().estimate;
    let mut prev = op.adjoint(&g).unwrap();
    for k in 1..=6 {
        let cur = run(k);
        let expected = relative_change(&prev, &cur).unwrap();
        assert!((trace.records[k - 1].rel_change - expected).abs() <= 1e-12 * expected.max(1.0));
        prev = cur;
    }
}

#[test]
fn stops_when_relative_change_drops_below_delta() {
    let truth = gen_heavisine(256).unwrap();
    let op = Selection1D::new(make_random_pattern(256, 120, 8).unwrap());
    let g = op.forward(&truth).unwrap();
    let cfg = SolverConfig {
        delta: 1e-3,
        record_trace: true,
        ..SolverConfig::default()
    };
    let res = recover_pg_ist(&op, &g, &cfg).unwrap();
    let recs = res.trace.unwrap().records;
    assert_eq!(res.stop, StopReason::Converged);
    assert!(recs.last().unwrap().rel_change < 1e-3);
    assert!(recs[..recs.len() - 1].iter().all(|r| r.rel_change >= 1e-3));
}

#[test]
fn recovery_is_deterministic() {
    let truth = gen_shepp_logan(32).unwrap();
    let op = RadialFourier::new(make_radial_mask(32, 9).unwrap()).unwrap();
    let g = op.forward(&truth).unwrap();
    let a = recover_pg_ist(&op, &g, &SolverConfig::default()).unwrap();
    let b = recover_pg_ist(&op, &g, &SolverConfig::default()).unwrap();
    assert_eq!(a.estimate, b.estimate);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn ista_and_pg_differ_after_one_step() {
    let truth = gen_heavisine(256).unwrap();
    let op = Selection1D::new(make_random_pattern(256, 80, 2).unwrap());
    let g = op.forward(&truth).unwrap();
    let cfg = SolverConfig {
        max_iter: 1,
        threshold: ThresholdStrategy::Fixed(0.3),
        ..SolverConfig::default()
    };
    let pg = recover_pg_ist(&op, &g, &cfg).unwrap().estimate;
    let ista = recover_ista(&op, &g, 0.3, &cfg).unwrap().estimate;
    assert!(max_abs_diff(pg.samples(), ista.samples()) > 1e-3);
    // Only the restored iterate reproduces the data exactly.
    assert!(op.forward(&pg).unwrap().residual(&g).unwrap().norm() <= 1e-12);
    assert!(op.forward(&ista).unwrap().residual(&g).unwrap().norm() > 1e-6);
}

#[test]
fn pg_recovery_beats_zero_fill_1d() {
    let truth = gen_heavisine(1024).unwrap();
    let op = Selection1D::new(make_random_pattern(1024, 200, 1).unwrap());
    let g = op.forward(&truth).unwrap();
    let zero_fill = mse(&op.adjoint(&g).unwrap(), &truth).unwrap();
    let rec = recover_pg_ist(&op, &g, &SolverConfig::default()).unwrap();
    assert!(mse(&rec.estimate, &truth).unwrap() < zero_fill);
}

#[test]
fn frozen_plan_is_reported() {
    let truth = gen_heavisine(128).unwrap();
    let op = Selection1D::new(make_random_pattern(128, 40, 4).unwrap());
    let g = op.forward(&truth).unwrap();
    let cfg = SolverConfig {
        freeze_plan: true,
        max_iter: 10,
        ..SolverConfig::default()
    };
    let res = recover_pg_ist(&op, &g, &cfg).unwrap();
    let plan = res.final_plan.unwrap();
    assert_eq!(plan.gammas().len(), 1);
}

#[test]
fn hard_rule_runs_and_stays_consistent() {
    let truth = gen_shepp_logan(32).unwrap();
    let op = RadialFourier::new(make_radial_mask(32, 11).unwrap()).unwrap();
    let g = op.forward(&truth).unwrap();
    let cfg = SolverConfig {
        rule: Rule::Hard,
        max_iter: 50,
        ..SolverConfig::default()
    };
    let res = recover_pg_ist(&op, &g, &cfg).unwrap();
    assert!(op.forward(&res.estimate).unwrap().residual(&g).unwrap().norm() <= 1e-9 * g.norm());
}

#[test]
fn pg_extrapolation_error_is_monotone() {
    let truth = gen_bandlimited(64, 3, 7).unwrap();
    for known_count in [24, 32, 48] {
        let start = (64 - known_count) / 2;
        let known = SamplingPattern1D::new(64, (start..start + known_count).collect()).unwrap();
        let mut g = vec![0.0; 64];
        for &i in known.indices() {
            g[i] = truth.samples()[i];
        }
        let g = truth.with_values(g).unwrap();
        let res = pg_extrapolate_with_reference(&g, &known, 3, &traced(200), Some(&truth)).unwrap();
        let errs: Vec<f64> = res.trace.unwrap().records.iter().map(|r| r.mse.unwrap()).collect();
        assert!(
            errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-30),
            "known={known_count}"
        );
    }
}

#[test]
fn trace_mse_matches_reference() {
    let truth = gen_heavisine(128).unwrap();
    let op = Selection1D::new(make_random_pattern(128, 64, 6).unwrap());
    let g = op.forward(&truth).unwrap();
    let res = recover_pg_ist_with_reference(&op, &g, &traced(5), Some(&truth)).unwrap();
    let last = res.trace.as_ref().unwrap().records.last().unwrap().mse.unwrap();
    assert!((last - mse(&res.estimate, &truth).unwrap()).abs() <= 1e-15);
}

#[test]
fn harness_reports_unwritable_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let mut spec = ExperimentSpec::new(ExperimentKind::Heavisine1D);
    spec.n = 64;
    spec.grid = vec![20];
    spec.out_dir = Some(blocker.join("out"));
    assert!(matches!(run_experiment(&spec), Err(Error::Io { .. })));
}

#[test]
fn harness_rows_follow_grid_order() {
    let mut spec = ExperimentSpec::new(ExperimentKind::PhantomRadialNoisy);
    spec.n = 32;
    spec.grid = vec![9, 5];
    spec.noise_db = vec![30.0, 20.0];
    spec.solvers = vec![SolverChoice::Pg];
    spec.config.max_iter = 20;
    let rows = run_experiment(&spec).unwrap();
    let keys: Vec<_> = rows.iter().map(|r| (r.param, r.noise_db.unwrap(), r.solver.clone())).collect();
    let expected: Vec<_> = [(9, 30.0), (9, 20.0), (5, 30.0), (5, 20.0)]
        .iter()
        .flat_map(|&(k, d)| [(k, d, "noisy".to_string()), (k, d, "pg".to_string())])
        .collect();
    assert_eq!(keys, expected);
}
