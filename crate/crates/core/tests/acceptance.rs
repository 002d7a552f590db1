//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use pgist::harness::{run_experiment, ExperimentKind, ExperimentSpec, ResultRow};
use pgist::metrics::{mse, nonzero_gradient_count, psnr};
use pgist::operators::{
    make_radial_mask, make_random_pattern, LinearOperator, Observation, RadialFourier,
    SamplingPattern1D, Selection1D,
};
use pgist::signals::{gen_bandlimited, gen_heavisine, gen_shepp_logan};
use pgist::solvers::{
    pg_extrapolate_with_reference, recover_ista, recover_pg_ist, recover_pg_ist_with_reference,
    RecoveryResult, SolverConfig,
};
use pgist::thresholding::{hard, soft};
use pgist::transforms::{
    dft2, swt1_forward, swt1_inverse, swt2_forward, swt2_inverse, ComplexGrid, Fft1,
    Fft2,
};
use pgist::{Field, Image2D, Signal1D};

const GRADIENT_TARGET: usize = 2184;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn operator_correctness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let op1 = Selection1D::new(make_random_pattern(1024, 200, 1).unwrap());
    let op2 = RadialFourier::new(make_radial_mask(128, 15).unwrap()).unwrap();
    let mut worst1: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for _ in 0..100 {
        let f = Signal1D::new(random_reals(&mut r, 1024)).unwrap();
        let g = Observation::new(random_reals(&mut r, 200));
        let lhs = dot(op1.forward(&f).unwrap().values(), g.values());
        let rhs = dot(f.samples(), op1.adjoint(&g).unwrap().samples());
        worst1 = worst1.max(rel(lhs, rhs));

        let f = Image2D::new(128, 128, random_reals(&mut r, 128 * 128)).unwrap();
        let g = Observation::new(random_complex(&mut r, op2.measurement_len()));
        let lhs = re_dot(op2.forward(&f).unwrap().values(), g.values());
        let rhs = dot(f.pixels(), op2.adjoint(&g).unwrap().pixels());
        worst2 = worst2.max(rel(lhs, rhs));
    }
    let g1 = Observation::new(random_reals(&mut r, 200));
    let exact_1d = op1.forward(&op1.adjoint(&g1).unwrap()).unwrap().values() == g1.values();
    let img = Image2D::new(128, 128, random_reals(&mut r, 128 * 128)).unwrap();
    let g2 = op2.forward(&img).unwrap();
    let back = op2.forward(&op2.adjoint(&g2).unwrap()).unwrap();
    let kk2 = max_abs_diff_c(back.values(), g2.values()) / g2.norm();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst1 <= 1e-9 && worst2 <= 1e-9 && exact_1d && kk2 <= 1e-10 && secs < 5.0,
        format!(
            "adjoint rel err 1d {worst1:.1e}, 2d {worst2:.1e}; KK* 1d exact={exact_1d}, 2d {kk2:.1e}; {secs:.2} s"
        ),
    )
}

fn transform_correctness() -> Outcome {
    let mut r = rng(102);
    let mut worst_rt: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    for n in [8, 16, 32, 64, 128, 256, 512] {
        let plan = Fft1::new(n).unwrap();
        let x = random_complex(&mut r, n);
        let mut y = x.clone();
        plan.process(&mut y, false).unwrap();
        worst_parseval = worst_parseval.max(rel(energy_c(&y), energy_c(&x)));
        plan.process(&mut y, true).unwrap();
        worst_rt = worst_rt.max(max_abs_diff_c(&x, &y));

        let plan = Fft2::new(n, n).unwrap();
        let x = random_complex(&mut r, n * n);
        let mut y = x.clone();
        plan.process(&mut y, false).unwrap();
        worst_parseval = worst_parseval.max(rel(energy_c(&y), energy_c(&x)));
        plan.process(&mut y, true).unwrap();
        worst_rt = worst_rt.max(max_abs_diff_c(&x, &y));
    }
    let mut worst_swt: f64 = 0.0;
    for n in [8, 64, 512] {
        let x = random_reals(&mut r, n);
        let back = swt1_inverse(&swt1_forward(&Signal1D::new(x.clone()).unwrap())).unwrap();
        worst_swt = worst_swt.max(max_abs_diff(back.samples(), &x));
        let x = random_reals(&mut r, n * n);
        let back = swt2_inverse(&swt2_forward(&Image2D::new(n, n, x.clone()).unwrap())).unwrap();
        worst_swt = worst_swt.max(max_abs_diff(back.pixels(), &x));
    }
    let x = random_complex(&mut r, 64);
    let got = dft2(&ComplexGrid::new(8, 8, x.clone()).unwrap(), false).unwrap();
    let oracle = max_abs_diff_c(got.entries(), &direct_dft2(&x, 8, 8, false));
    outcome(
        worst_rt <= 1e-12 && worst_parseval <= 1e-12 && worst_swt <= 1e-12 && oracle <= 1e-12,
        format!(
            "DFT round trip {worst_rt:.1e}, Parseval {worst_parseval:.1e}, SWT reconstruction {worst_swt:.1e}, 8x8 oracle {oracle:.1e}"
        ),
    )
}

fn shrinkage() -> Outcome {
    let branches = soft(3.0, 2.0) == 2.0
        && soft(-3.0, 2.0) == -2.0
        && soft(0.5, 2.0) == 0.0
        && soft(-0.5, 2.0) == 0.0
        && soft(1.0, 2.0) == 0.0
        && soft(-1.0, 2.0) == 0.0
        && soft(1.7, 0.0) == 1.7
        && hard(3.0, 2.0) == 3.0
        && hard(0.5, 2.0) == 0.0
        && hard(-0.999, 2.0) == 0.0
        && hard(-1.0, 2.0) == -1.0;
    let mut r = rng(103);
    let mut expansive = 0;
    let mut worst_excess: f64 = 0.0;
    let mut not_odd = 0;
    for _ in 0..10_000 {
        let v = random_reals(&mut r, 3);
        let (x, y, gamma) = (10.0 * v[0], 10.0 * v[1], 5.0 * (v[2] + 1.0));
        // Rounding of the two shifted differences: a few ulps of the
        // operands' magnitude.
        let excess = (soft(x, gamma) - soft(y, gamma)).abs() - (x - y).abs();
        let ulps = 4.0 * f64::EPSILON * (x.abs() + y.abs() + gamma);
        worst_excess = worst_excess.max(excess / (f64::EPSILON * (x.abs() + y.abs() + gamma)));
        if excess > ulps {
            expansive += 1;
        }
        if soft(-x, gamma) != -soft(x, gamma) {
            not_odd += 1;
        }
    }
    outcome(
        branches && expansive == 0 && not_odd == 0,
        format!(
            "branch examples exact={branches}; 10000 pairs: {expansive} expansive beyond rounding (worst excess {worst_excess:.2} ulp-units), {not_odd} not odd"
        ),
    )
}

fn phantom_sparsity() -> Outcome {
    let img = gen_shepp_logan(256).unwrap();
    let in_range = img.pixels().iter().all(|&v| (0.0..=1.0).contains(&v));
    let count = nonzero_gradient_count(&img, 1e-12);
    let dev = (count as f64 - GRADIENT_TARGET as f64) / GRADIENT_TARGET as f64;
    outcome(
        in_range && dev.abs() <= 0.02,
        format!(
            "range [0,1]={in_range}; measured {count} nonzero gradients vs {GRADIENT_TARGET} ({:+.2}%)",
            100.0 * dev
        ),
    )
}

struct PhantomRuns {
    lines: Vec<usize>,
    results: Vec<RecoveryResult<Image2D>>,
    g_norms: Vec<f64>,
    psnrs: Vec<f64>,
    seconds: f64,
}

fn phantom_runs() -> PhantomRuns {
    let start = Instant::now();
    let truth = gen_shepp_logan(256).unwrap();
    let lines = vec![9, 11, 15, 21];
    let cfg = SolverConfig {
        record_trace: true,
        ..SolverConfig::default()
    };
    let mut results = Vec::new();
    let mut g_norms = Vec::new();
    let mut psnrs = Vec::new();
    for &k in &lines {
        let op = RadialFourier::new(make_radial_mask(256, k).unwrap()).unwrap();
        let g = op.forward(&truth).unwrap();
        let res = recover_pg_ist_with_reference(&op, &g, &cfg, Some(&truth)).unwrap();
        psnrs.push(psnr(&res.estimate, &truth, 1.0).unwrap());
        g_norms.push(g.norm());
        results.push(res);
    }
    PhantomRuns {
        lines,
        results,
        g_norms,
        psnrs,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// `max_n (Phi_n - Phi_{n-1})` over an ISTA run.
fn ista_worst_rise<K>(op: &K, g: &Observation<K::Scalar>, gamma: f64) -> f64
where
    K: LinearOperator,
    K::Domain: pgist::transforms::SwtDomain,
{
    let cfg = SolverConfig {
        record_trace: true,
        ..SolverConfig::default()
    };
    let res = recover_ista(op, g, gamma, &cfg).unwrap();
    let phi: Vec<f64> = res.trace.unwrap().records.iter().map(|r| r.objective.unwrap()).collect();
    phi.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn solver_invariants(runs: &PhantomRuns) -> Outcome {
    let mut worst_consistency: f64 = 0.0;
    for (res, gn) in runs.results.iter().zip(&runs.g_norms) {
        for rec in &res.trace.as_ref().unwrap().records {
            worst_consistency = worst_consistency.max(rec.residual / gn);
        }
    }

    let truth = gen_heavisine(1024).unwrap();
    let full = Selection1D::new(SamplingPattern1D::full(1024).unwrap());
    let g = full.forward(&truth).unwrap();
    let res = recover_pg_ist(&full, &g, &SolverConfig::default()).unwrap();
    let identity_err = max_abs_diff(res.estimate.samples(), g.values());
    let identity = res.iterations == 1 && identity_err <= 1e-12;

    let mut worst_rise = f64::NEG_INFINITY;
    for (m, gamma) in [(200, 0.1), (70, 0.01), (70, 0.1), (70, 0.5), (200, 0.5)] {
        let op = Selection1D::new(make_random_pattern(1024, m, 1).unwrap());
        let g = op.forward(&truth).unwrap();
        worst_rise = worst_rise.max(ista_worst_rise(&op, &g, gamma));
    }
    let phantom = gen_shepp_logan(128).unwrap();
    for (k, gamma) in [(9, 0.01), (9, 0.05), (21, 0.01), (21, 0.05)] {
        let op = RadialFourier::new(make_radial_mask(128, k).unwrap()).unwrap();
        let g = op.forward(&phantom).unwrap();
        worst_rise = worst_rise.max(ista_worst_rise(&op, &g, gamma));
    }
    outcome(
        worst_consistency <= 1e-9 && identity && worst_rise <= 1e-10,
        format!(
            "max ||Kf-g||/||g|| over phantom iterates {worst_consistency:.1e}; full observation: {} iteration(s), err {identity_err:.1e}; ISTA objective max rise {worst_rise:.1e}",
            res.iterations
        ),
    )
}

fn rows_for<'a>(rows: &'a [ResultRow], param: usize, solver: &str) -> Vec<&'a ResultRow> {
    rows.iter().filter(|r| r.param == param && r.solver == solver).collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn heavisine_table() -> Outcome {
    let start = Instant::now();
    let mut spec = ExperimentSpec::new(ExperimentKind::Heavisine1D);
    spec.repeats = 5;
    spec.baseline = true;
    let rows = run_experiment(&spec).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut beats_zero_fill = true;
    let mut summary = Vec::new();
    for &m in &spec.grid {
        let rec = rows_for(&rows, m, "pg");
        let zf = rows_for(&rows, m, "zero-fill");
        for (a, b) in rec.iter().zip(&zf) {
            beats_zero_fill &= a.repeat == b.repeat && a.mse < b.mse;
        }
        summary.push(format!(
            "M={m}: {:.3} vs zero-fill {:.3}",
            mean(rec.iter().map(|r| r.mse)),
            mean(zf.iter().map(|r| r.mse))
        ));
    }
    let m70 = mean(rows_for(&rows, 70, "pg").iter().map(|r| r.mse));
    let m200 = mean(rows_for(&rows, 200, "pg").iter().map(|r| r.mse));
    outcome(
        m200 < m70 && beats_zero_fill && secs < 30.0,
        format!(
            "mean MSE over 5 seeds {}; every run beats zero-fill={beats_zero_fill}; {secs:.1} s",
            summary.join(", ")
        ),
    )
}

fn phantom_table(runs: &PhantomRuns) -> Outcome {
    let increasing = runs.psnrs.windows(2).all(|w| w[1] > w[0]);
    let last = *runs.psnrs.last().unwrap();
    let iters_ok = runs.results.iter().all(|r| r.iterations <= 500);
    let listing: Vec<String> = runs
        .lines
        .iter()
        .zip(&runs.psnrs)
        .map(|(k, p)| format!("K={k}: {p:.2} dB"))
        .collect();
    outcome(
        increasing && last >= 25.0 && iters_ok && runs.seconds < 300.0,
        format!("{}; strictly increasing={increasing}; {:.1} s", listing.join(", "), runs.seconds),
    )
}

fn noisy_phantom() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::PhantomRadialNoisy);
    spec.noise_db = vec![20.0];
    spec.repeats = 3;
    let rows = run_experiment(&spec).unwrap();
    let rec = rows_for(&rows, 31, "pg");
    let noisy = rows_for(&rows, 31, "noisy");
    let gains: Vec<f64> = rec.iter().zip(&noisy).map(|(a, b)| a.psnr_db - b.psnr_db).collect();
    let gain = mean(gains.iter().copied());
    outcome(
        gain >= 2.0,
        format!(
            "K=31, 20 dB: reconstruction {:.2} dB vs noisy {:.2} dB, mean gain {gain:+.2} dB over 3 seeds",
            mean(rec.iter().map(|r| r.psnr_db)),
            mean(noisy.iter().map(|r| r.psnr_db))
        ),
    )
}

fn extrapolation() -> Outcome {
    let (n, band, known_count) = (64, 3, 48);
    let start = (n - known_count) / 2;
    let known = SamplingPattern1D::new(n, (start..start + known_count).collect()).unwrap();
    let cfg = SolverConfig {
        delta: 1e-300,
        max_iter: 500,
        record_trace: true,
        ..SolverConfig::default()
    };
    let mut monotone = true;
    let mut worst_final: f64 = 0.0;
    for seed in 0..5 {
        let truth = gen_bandlimited(n, band, seed).unwrap();
        let mut g = vec![0.0; n];
        for &i in known.indices() {
            g[i] = truth.samples()[i];
        }
        let g = truth.with_values(g).unwrap();
        let res = pg_extrapolate_with_reference(&g, &known, band, &cfg, Some(&truth)).unwrap();
        let errs: Vec<f64> = res.trace.unwrap().records.iter().map(|r| r.mse.unwrap()).collect();
        monotone &= errs[..50].windows(2).all(|w| w[1] <= w[0]);
        worst_final = worst_final.max(mse(&res.estimate, &truth).unwrap());
    }
    outcome(
        monotone && worst_final < 1e-4,
        format!("5 signals: MSE non-increasing over first 50 iterations={monotone}; worst MSE after 500 {worst_final:.1e}"),
    )
}

fn bench_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |kind: &str, extra: &[&str], out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_pgist"))
            .args(["bench", "--kind", kind, "--seed", "7", "--out"])
            .arg(out)
            .args(extra)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out.join("table.csv")).unwrap()
    };
    let cases: [(&str, &[&str]); 3] = [
        ("heavisine-1d", &["--solver", "pg,ista", "--baseline", "--repeats", "2"]),
        ("phantom-radial", &["--n", "64", "--lines", "9,11,15,21"]),
        ("phantom-radial-noisy", &["--n", "64", "--noise-db", "20,30"]),
    ];
    let mut identical = true;
    for (i, (kind, extra)) in cases.iter().enumerate() {
        let a = run(kind, extra, &dir.path().join(format!("a{i}")));
        let b = run(kind, extra, &dir.path().join(format!("b{i}")));
        identical &= a == b;
    }
    outcome(identical, format!("{} bench configurations run twice, tables byte-identical={identical}", cases.len()))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    let runs = catch_unwind(phantom_runs).ok();
    let needs_runs = |f: fn(&PhantomRuns) -> Outcome| match &runs {
        Some(r) => guarded(|| f(r)),
        None => outcome(false, "phantom recovery runs panicked".into()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("operator correctness", guarded(operator_correctness)),
        ("transform correctness", guarded(transform_correctness)),
        ("shrinkage", guarded(shrinkage)),
        ("phantom sparsity", guarded(phantom_sparsity)),
        ("solver invariants", needs_runs(solver_invariants)),
        ("HeaviSine sample-count sweep", guarded(heavisine_table)),
        ("phantom radial-line sweep", needs_runs(phantom_table)),
        ("noisy phantom", guarded(noisy_phantom)),
        ("band-limited extrapolation", guarded(extrapolation)),
        ("bench determinism", guarded(bench_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {name}: {verdict} ({})", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
