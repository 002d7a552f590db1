//! Iterative recovery: the threshold-then-restore solver, the thresholded
//! Landweber (ISTA) baseline and discrete Papoulis-Gerchberg extrapolation.
//!
//! All three share the same stopping rule: stop once
//! `||f_n - f_{n-1}|| / ||f_{n-1}|| < delta`, or after `max_iter` iterations.

use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metrics::{mse_slices, relative_change_slices};
use crate::operators::{LinearOperator, Observation, SamplingPattern1D, Selection1D};
use crate::signals::{Field, Signal1D};
use crate::thresholding::{
    birge_massart_plan, detail_l1_norm, shrink_details, Rule, ThresholdPlan,
};
use crate::transforms::{Fft1, SubbandSet, SwtDomain};

pub const DEFAULT_DELTA: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_ALPHA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdStrategy {
    /// The same `gamma` on every detail subband.
    Fixed(f64),
    /// Birgé-Massart selection; `budget` defaults to the signal length.
    BirgeMassart { alpha: f64, budget: Option<usize> },
}

impl Default for ThresholdStrategy {
    fn default() -> Self {
        ThresholdStrategy::BirgeMassart {
            alpha: DEFAULT_ALPHA,
            budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub delta: f64,
    pub max_iter: usize,
    pub rule: Rule,
    pub threshold: ThresholdStrategy,
    /// Compute the threshold plan once from `f0` instead of every iteration.
    pub freeze_plan: bool,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            max_iter: DEFAULT_MAX_ITER,
            rule: Rule::Soft,
            threshold: ThresholdStrategy::default(),
            freeze_plan: false,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        match self.threshold {
            ThresholdStrategy::Fixed(g) if !(g >= 0.0 && g.is_finite()) => Err(
                Error::InvalidParameter(format!("gamma must be finite and >= 0, got {g}")),
            ),
            ThresholdStrategy::BirgeMassart { alpha, budget } => {
                if !(alpha > 1.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be > 1, got {alpha}"
                    )));
                }
                if budget == Some(0) {
                    return Err(Error::InvalidParameter(
                        "Birge-Massart M must be positive".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIter,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIter => "max-iter",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub rel_change: f64,
    /// `||K f_n - g||`.
    pub residual: f64,
    /// MSE against a reference signal, when one was supplied.
    pub mse: Option<f64>,
    /// `||K f_n - g||^2 + gamma * ||details(f_n)||_1`; ISTA only.
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    /// CSV with header `iter,rel_change,residual,mse`; missing MSE is empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "iter,rel_change,residual,mse")?;
        for r in &self.records {
            let mse = r.mse.map(|m| m.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", r.iteration, r.rel_change, r.residual, mse)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult<S> {
    pub estimate: S,
    pub iterations: usize,
    pub stop: StopReason,
    pub trace: Option<IterationTrace>,
    /// Thresholds used in the last iteration, if the solver thresholds.
    pub final_plan: Option<ThresholdPlan>,
}

fn plan_from_coeffs<C: SubbandSet>(coeffs: &C, strategy: ThresholdStrategy) -> Result<ThresholdPlan> {
    match strategy {
        ThresholdStrategy::Fixed(g) => ThresholdPlan::fixed(coeffs.detail_subbands(), g),
        ThresholdStrategy::BirgeMassart { alpha, budget } => {
            birge_massart_plan(coeffs, alpha, budget.unwrap_or_else(|| coeffs.source_len()))
        }
    }
}

/// Threshold plan the solver would use for `f` under `strategy`.
pub fn plan_for<S: SwtDomain>(f: &S, strategy: ThresholdStrategy) -> Result<ThresholdPlan> {
    plan_from_coeffs(&f.swt_forward(), strategy)
}

/// `S(f)`, with the plan either supplied or derived from `f`'s own
/// coefficients.
/// Fails with `Divergence { iteration }` when twice a detail coefficient
/// (the largest threshold a selection rule can produce) is non-finite.
fn constrain<S: SwtDomain>(
    f: &S,
    strategy: ThresholdStrategy,
    rule: Rule,
    frozen: Option<&ThresholdPlan>,
    iteration: usize,
) -> Result<(S, ThresholdPlan)> {
    let mut coeffs = f.swt_forward();
    let finite = coeffs.detail_subbands().iter().all(|&sb| {
        coeffs
            .subband(sb)
            .is_some_and(|band| band.iter().all(|v| (2.0 * v).is_finite()))
    });
    if !finite {
        return Err(Error::Divergence { iteration });
    }
    let plan = match frozen {
        Some(p) => p.clone(),
        None => plan_from_coeffs(&coeffs, strategy)?,
    };
    shrink_details(&mut coeffs, &plan, rule)?;
    Ok((S::swt_inverse(&coeffs)?, plan))
}

fn axpy<S: Field>(base: &S, delta: &S) -> Result<S> {
    if base.dims() != delta.dims() {
        return Err(Error::Shape(format!(
            "cannot add {:?} to {:?}",
            delta.dims(),
            base.dims()
        )));
    }
    base.with_values(
        base.values()
            .iter()
            .zip(delta.values())
            .map(|(a, b)| a + b)
            .collect(),
    )
}

/// `f + K*(g - K f)`.
fn restore<K: LinearOperator>(op: &K, g: &Observation<K::Scalar>, f: &K::Domain) -> Result<K::Domain> {
    let r = g.residual(&op.forward(f)?)?;
    axpy(f, &op.adjoint(&r)?)
}

fn check_observation<K: LinearOperator>(op: &K, g: &Observation<K::Scalar>) -> Result<()> {
    if g.len() != op.measurement_len() {
        return Err(Error::Shape(format!(
            "operator produces {} measurements, observation has {}",
            op.measurement_len(),
            g.len()
        )));
    }
    Ok(())
}

fn check_reference<S: Field>(estimate: &S, reference: Option<&S>) -> Result<()> {
    match reference {
        Some(r) if r.dims() != estimate.dims() => Err(Error::Shape(format!(
            "reference is {:?}, estimate is {:?}",
            r.dims(),
            estimate.dims()
        ))),
        _ => Ok(()),
    }
}

/// What a step produced beyond the next iterate.
struct StepOutput<S> {
    next: S,
    plan: Option<ThresholdPlan>,
}

/// Shared loop: step, divergence guard, trace, stopping rule.
fn iterate<S, Step, Monitor>(
    f0: S,
    cfg: &SolverConfig,
    reference: Option<&S>,
    mut step: Step,
    mut monitor: Monitor,
) -> Result<RecoveryResult<S>>
where
    S: Field,
    Step: FnMut(usize, &S) -> Result<StepOutput<S>>,
    Monitor: FnMut(&S) -> Result<(f64, Option<f64>)>,
{
    cfg.validate()?;
    check_reference(&f0, reference)?;
    let mut trace = cfg.record_trace.then(IterationTrace::default);
    let mut current = f0;
    let mut last_plan = None;
    for iteration in 1..=cfg.max_iter {
        let StepOutput { next, plan } = step(iteration, &current)?;
        if next.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration });
        }
        let rel_change = relative_change_slices(current.values(), next.values());
        if let Some(trace) = trace.as_mut() {
            let (residual, objective) = monitor(&next)?;
            trace.records.push(TraceRecord {
                iteration,
                rel_change,
                residual,
                mse: reference.map(|r| mse_slices(next.values(), r.values())),
                objective,
            });
        }
        current = next;
        last_plan = plan.or(last_plan);
        if rel_change < cfg.delta {
            return Ok(RecoveryResult {
                estimate: current,
                iterations: iteration,
                stop: StopReason::Converged,
                trace,
                final_plan: last_plan,
            });
        }
    }
    Ok(RecoveryResult {
        estimate: current,
        iterations: cfg.max_iter,
        stop: StopReason::MaxIter,
        trace,
        final_plan: last_plan,
    })
}

/// Threshold-then-restore recovery.
///
/// `f0 = K* g`, then each iteration computes `h = S(f_{n-1})` and
/// `f_n = h + K*(g - K h)`. Because `K K* = I` on admissible data, every
/// iterate reproduces the observations exactly (up to rounding).
pub fn recover_pg_ist<K>(
    op: &K,
    g: &Observation<K::Scalar>,
    cfg: &SolverConfig,
) -> Result<RecoveryResult<K::Domain>>
where
    K: LinearOperator,
    K::Domain: SwtDomain,
{
    recover_pg_ist_with_reference(op, g, cfg, None)
}

/// [`recover_pg_ist`], logging per-iteration MSE against `reference` when
/// tracing.
pub fn recover_pg_ist_with_reference<K>(
    op: &K,
    g: &Observation<K::Scalar>,
    cfg: &SolverConfig,
    reference: Option<&K::Domain>,
) -> Result<RecoveryResult<K::Domain>>
where
    K: LinearOperator,
    K::Domain: SwtDomain,
{
    cfg.validate()?;
    check_observation(op, g)?;
    let f0 = op.adjoint(g)?;
    let frozen = if cfg.freeze_plan {
        Some(plan_for(&f0, cfg.threshold)?)
    } else {
        None
    };
    iterate(
        f0,
        cfg,
        reference,
        |iteration, f| {
            let (h, plan) = constrain(f, cfg.threshold, cfg.rule, frozen.as_ref(), iteration)?;
            Ok(StepOutput {
                next: restore(op, g, &h)?,
                plan: Some(plan),
            })
        },
        |f| Ok((op.forward(f)?.residual(g)?.norm(), None)),
    )
}

/// Thresholded Landweber iteration `f_n = S_gamma(f_{n-1} + K*(g - K f_{n-1}))`
/// at a fixed `gamma`; `cfg.threshold` is ignored.
///
/// When tracing, also records `||K f - g||^2 + gamma * ||details(f)||_1`.
pub fn recover_ista<K>(
    op: &K,
    g: &Observation<K::Scalar>,
    gamma: f64,
    cfg: &SolverConfig,
) -> Result<RecoveryResult<K::Domain>>
where
    K: LinearOperator,
    K::Domain: SwtDomain,
{
    recover_ista_with_reference(op, g, gamma, cfg, None)
}

pub fn recover_ista_with_reference<K>(
    op: &K,
    g: &Observation<K::Scalar>,
    gamma: f64,
    cfg: &SolverConfig,
    reference: Option<&K::Domain>,
) -> Result<RecoveryResult<K::Domain>>
where
    K: LinearOperator,
    K::Domain: SwtDomain,
{
    let cfg = SolverConfig {
        threshold: ThresholdStrategy::Fixed(gamma),
        ..cfg.clone()
    };
    cfg.validate()?;
    check_observation(op, g)?;
    let f0 = op.adjoint(g)?;
    let plan = plan_for(&f0, cfg.threshold)?;
    iterate(
        f0,
        &cfg,
        reference,
        |iteration, f| {
            let x = restore(op, g, f)?;
            let (next, _) = constrain(&x, cfg.threshold, cfg.rule, Some(&plan), iteration)?;
            Ok(StepOutput {
                next,
                plan: Some(plan.clone()),
            })
        },
        |f| {
            let residual = op.forward(f)?.residual(g)?.norm();
            let objective = residual * residual + gamma * detail_l1_norm(f);
            Ok((residual, Some(objective)))
        },
    )
}

/// Zero every unitary-DFT bin whose centered frequency exceeds `band` in
/// magnitude.
fn lowpass(fft: &Fft1, x: &[f64], band: usize) -> Result<Vec<f64>> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut buf, false)?;
    for (k, v) in buf.iter_mut().enumerate() {
        let freq = if k < n / 2 { k } else { n - k };
        if freq > band {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    fft.process(&mut buf, true)?;
    Ok(buf.iter().map(|z| z.re).collect())
}

/// Discrete Papoulis-Gerchberg extrapolation of a band-limited signal from a
/// known subset of its samples.
///
/// `f0 = g`; each iteration low-passes the current estimate to `|k| <= band`
/// and then writes the known samples back.
pub fn pg_extrapolate(
    g: &Signal1D,
    known: &SamplingPattern1D,
    band: usize,
    cfg: &SolverConfig,
) -> Result<RecoveryResult<Signal1D>> {
    pg_extrapolate_with_reference(g, known, band, cfg, None)
}

pub fn pg_extrapolate_with_reference(
    g: &Signal1D,
    known: &SamplingPattern1D,
    band: usize,
    cfg: &SolverConfig,
    reference: Option<&Signal1D>,
) -> Result<RecoveryResult<Signal1D>> {
    let n = g.len();
    if known.n() != n {
        return Err(Error::Shape(format!(
            "pattern is for length {}, signal has {n}",
            known.n()
        )));
    }
    if band < 1 || 2 * band >= n {
        return Err(Error::InvalidParameter(format!(
            "band must satisfy 1 <= band < n/2, got band={band}, n={n}"
        )));
    }
    let mut is_known = vec![false; n];
    for &i in known.indices() {
        is_known[i] = true;
    }
    if let Some(i) = (0..n).find(|&i| !is_known[i] && g.samples()[i] != 0.0) {
        return Err(Error::InvalidParameter(format!(
            "input must be zero outside the known samples (index {i})"
        )));
    }
    let fft = Fft1::new(n)?;
    let op = Selection1D::new(known.clone());
    let observed = op.forward(g)?;
    iterate(
        g.clone(),
        cfg,
        reference,
        |_, f| {
            let mut next = lowpass(&fft, f.samples(), band)?;
            for &i in known.indices() {
                next[i] = g.samples()[i];
            }
            Ok(StepOutput {
                next: f.with_values(next)?,
                plan: None,
            })
        },
        |f| Ok((op.forward(f)?.residual(&observed)?.norm(), None)),
    )
}
