//! C ABI over the `pgist` recovery library.
//!
//! Every fallible function returns a [`PgistStatus`]; on failure the message
//! is available from [`pgist_last_error_message`] on the same thread.
//! Sampling patterns and masks are opaque handles owned by the caller and
//! released with their `_free` function. Buffers are caller-allocated with
//! the documented lengths.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use pgist::harness::ista_gamma;
use pgist::metrics::psnr_from_mse;
use pgist::operators::{
    make_radial_mask, make_random_pattern, LinearOperator, Observation, RadialFourier,
    SamplingPattern1D, Selection1D,
};
use pgist::signals::{add_awgn, gen_heavisine, gen_shepp_logan};
use pgist::solvers::{
    recover_ista, recover_pg_ist, RecoveryResult, SolverConfig, StopReason, ThresholdStrategy,
    DEFAULT_ALPHA, DEFAULT_DELTA, DEFAULT_MAX_ITER,
};
use pgist::thresholding::{hard, soft, Rule};
use pgist::transforms::{Complex64, SwtDomain};
use pgist::{Error, Image2D, Signal1D};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgistStatus {
    Ok = 0,
    InvalidSize = 1,
    InvalidCount = 2,
    InvalidParameter = 3,
    Shape = 4,
    Divergence = 5,
    Io = 6,
    Parse = 7,
    NullPointer = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgistRule {
    Soft = 0,
    Hard = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgistSolver {
    /// Threshold-then-restore iteration.
    Pg = 0,
    /// Thresholded Landweber baseline.
    Ista = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PgistSolverConfig {
    pub solver: PgistSolver,
    pub delta: f64,
    pub max_iter: usize,
    pub rule: PgistRule,
    /// Birgé-Massart exponent, used when `fixed_gamma < 0`.
    pub alpha: f64,
    /// Birgé-Massart budget; 0 means the signal length.
    pub bm_budget: usize,
    /// Fixed threshold on every detail subband; negative selects
    /// Birgé-Massart (for ISTA: its mean level on the zero-filled estimate).
    pub fixed_gamma: f64,
    pub freeze_plan: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PgistRecoveryInfo {
    pub iterations: usize,
    /// False when the iteration cap was reached first.
    pub converged: bool,
}

/// Opaque random-sample selection operator.
pub struct PgistPattern1D {
    op: Selection1D,
}

/// Opaque masked-Fourier operator on a radial mask.
pub struct PgistRadialMask {
    op: RadialFourier,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PgistStatus {
    match e.root() {
        Error::InvalidSize(_) => PgistStatus::InvalidSize,
        Error::InvalidCount(_) => PgistStatus::InvalidCount,
        Error::InvalidParameter(_) => PgistStatus::InvalidParameter,
        Error::Shape(_) => PgistStatus::Shape,
        Error::Divergence { .. } => PgistStatus::Divergence,
        Error::Io { .. } => PgistStatus::Io,
        Error::Parse(_) => PgistStatus::Parse,
        // `root` looks through experiment tags.
        Error::Experiment { .. } => PgistStatus::InvalidParameter,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PgistStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PgistStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            PgistStatus::NullPointer
        }
        Err(_) => {
            set_last_error("internal panic");
            PgistStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pgist_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn pgist_solver_config_default() -> PgistSolverConfig {
    PgistSolverConfig {
        solver: PgistSolver::Pg,
        delta: DEFAULT_DELTA,
        max_iter: DEFAULT_MAX_ITER,
        rule: PgistRule::Soft,
        alpha: DEFAULT_ALPHA,
        bm_budget: 0,
        fixed_gamma: -1.0,
        freeze_plan: false,
    }
}

impl PgistSolverConfig {
    fn to_config(self) -> SolverConfig {
        let threshold = if self.fixed_gamma >= 0.0 {
            ThresholdStrategy::Fixed(self.fixed_gamma)
        } else {
            ThresholdStrategy::BirgeMassart {
                alpha: self.alpha,
                budget: (self.bm_budget > 0).then_some(self.bm_budget),
            }
        };
        SolverConfig {
            delta: self.delta,
            max_iter: self.max_iter,
            rule: match self.rule {
                PgistRule::Soft => Rule::Soft,
                PgistRule::Hard => Rule::Hard,
            },
            threshold,
            freeze_plan: self.freeze_plan,
            record_trace: false,
        }
    }
}

#[no_mangle]
pub extern "C" fn pgist_soft(x: f64, gamma: f64) -> f64 {
    soft(x, gamma)
}

#[no_mangle]
pub extern "C" fn pgist_hard(x: f64, gamma: f64) -> f64 {
    hard(x, gamma)
}

/// Write the HeaviSine test signal into `out[0..n]`.
///
/// # Safety
/// `out` must be valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn pgist_heavisine(n: usize, out: *mut f64) -> PgistStatus {
    guard(|| {
        let s = gen_heavisine(n)?;
        slice_mut(out, n, "out")?.copy_from_slice(s.samples());
        Ok(())
    })
}

/// Write the `n x n` Shepp-Logan phantom, row-major, into `out[0..n*n]`.
///
/// # Safety
/// `out` must be valid for `n * n` writes.
#[no_mangle]
pub unsafe extern "C" fn pgist_shepp_logan(n: usize, out: *mut f64) -> PgistStatus {
    guard(|| {
        let img = gen_shepp_logan(n)?;
        slice_mut(out, n * n, "out")?.copy_from_slice(img.pixels());
        Ok(())
    })
}

/// Add seeded Gaussian noise of the given PSNR (dB, peak 1) in place.
///
/// # Safety
/// `values` must be valid for `len` reads and writes.
#[no_mangle]
pub unsafe extern "C" fn pgist_add_awgn(values: *mut f64, len: usize, noise_db: f64, seed: u64) -> PgistStatus {
    guard(|| {
        let v = slice_mut(values, len, "values")?;
        let noisy = add_awgn(&Signal1D::new(v.to_vec())?, noise_db, seed)?;
        v.copy_from_slice(noisy.samples());
        Ok(())
    })
}

/// Random set of `m` distinct sample positions out of `n`.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pgist_pattern1d_random(
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut PgistPattern1D,
) -> PgistStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let op = Selection1D::new(make_random_pattern(n, m, seed)?);
        *out = Box::into_raw(Box::new(PgistPattern1D { op }));
        Ok(())
    })
}

/// Pattern from explicit strictly increasing indices below `n`.
///
/// # Safety
/// `indices` must be valid for `len` reads, `out` for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pgist_pattern1d_from_indices(
    n: usize,
    indices: *const usize,
    len: usize,
    out: *mut *mut PgistPattern1D,
) -> PgistStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let idx = slice(indices, len, "indices")?.to_vec();
        let op = Selection1D::new(SamplingPattern1D::new(n, idx)?);
        *out = Box::into_raw(Box::new(PgistPattern1D { op }));
        Ok(())
    })
}

/// # Safety
/// `p` must come from a `pgist_pattern1d_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn pgist_pattern1d_free(p: *mut PgistPattern1D) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of selected samples; 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pgist_pattern1d_len(p: *const PgistPattern1D) -> usize {
    p.as_ref().map_or(0, |h| h.op.pattern().len())
}

/// Signal length the pattern applies to; 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pgist_pattern1d_n(p: *const PgistPattern1D) -> usize {
    p.as_ref().map_or(0, |h| h.op.pattern().n())
}

/// Copy the sorted indices into `out[0..len]`, where `len` is
/// [`pgist_pattern1d_len`].
///
/// # Safety
/// `p` must be a live handle; `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn pgist_pattern1d_indices(p: *const PgistPattern1D, out: *mut usize, cap: usize) -> PgistStatus {
    guard(|| {
        let idx = handle(p, "pattern")?.op.pattern().indices();
        if cap < idx.len() {
            return Err(Error::Shape(format!("buffer holds {cap}, need {}", idx.len())).into());
        }
        slice_mut(out, idx.len(), "out")?.copy_from_slice(idx);
        Ok(())
    })
}

/// Radial-line mask on an `n x n` frequency grid.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pgist_radial_mask_create(n: usize, lines: usize, out: *mut *mut PgistRadialMask) -> PgistStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let op = RadialFourier::new(make_radial_mask(n, lines)?)?;
        *out = Box::into_raw(Box::new(PgistRadialMask { op }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`pgist_radial_mask_create`], or be null.
#[no_mangle]
pub unsafe extern "C" fn pgist_radial_mask_free(m: *mut PgistRadialMask) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of sampled frequencies; 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pgist_radial_mask_count(m: *const PgistRadialMask) -> usize {
    m.as_ref().map_or(0, |h| h.op.mask().count())
}

/// Grid side; 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pgist_radial_mask_n(m: *const PgistRadialMask) -> usize {
    m.as_ref().map_or(0, |h| h.op.mask().n())
}

/// Write the `n x n` cell grid (1 = sampled) in DFT index order.
///
/// # Safety
/// `m` must be a live handle; `out` valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn pgist_radial_mask_cells(m: *const PgistRadialMask, out: *mut u8, cap: usize) -> PgistStatus {
    guard(|| {
        let cells = handle(m, "mask")?.op.mask().cells();
        if cap < cells.len() {
            return Err(Error::Shape(format!("buffer holds {cap}, need {}", cells.len())).into());
        }
        for (o, &c) in slice_mut(out, cells.len(), "out")?.iter_mut().zip(cells) {
            *o = u8::from(c);
        }
        Ok(())
    })
}

/// Measure `signal[0..n]` into `out[0..len]`.
///
/// # Safety
/// `p` must be a live handle; buffers sized per the pattern.
#[no_mangle]
pub unsafe extern "C" fn pgist_sample_1d(p: *const PgistPattern1D, signal: *const f64, out: *mut f64) -> PgistStatus {
    guard(|| {
        let op = &handle(p, "pattern")?.op;
        let x = Signal1D::new(slice(signal, op.pattern().n(), "signal")?.to_vec())?;
        let g = op.forward(&x)?;
        slice_mut(out, g.len(), "out")?.copy_from_slice(g.values());
        Ok(())
    })
}

/// Measure a row-major `n x n` image into `out` as interleaved
/// `(re, im)` pairs, `2 * count` values.
///
/// # Safety
/// `m` must be a live handle; buffers sized per the mask.
#[no_mangle]
pub unsafe extern "C" fn pgist_sample_2d(m: *const PgistRadialMask, image: *const f64, out: *mut f64) -> PgistStatus {
    guard(|| {
        let op = &handle(m, "mask")?.op;
        let n = op.mask().n();
        let img = Image2D::new(n, n, slice(image, n * n, "image")?.to_vec())?;
        let g = op.forward(&img)?;
        let dst = slice_mut(out, 2 * g.len(), "out")?;
        for (pair, z) in dst.chunks_exact_mut(2).zip(g.values()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

fn run<K>(op: &K, g: &Observation<K::Scalar>, cfg: Option<&PgistSolverConfig>) -> pgist::Result<RecoveryResult<K::Domain>>
where
    K: LinearOperator,
    K::Domain: SwtDomain,
{
    let c = cfg.copied().unwrap_or_else(|| pgist_solver_config_default());
    let config = c.to_config();
    match c.solver {
        PgistSolver::Pg => recover_pg_ist(op, g, &config),
        PgistSolver::Ista => {
            let gamma = ista_gamma(&op.adjoint(g)?, &config)?;
            recover_ista(op, g, gamma, &config)
        }
    }
}

unsafe fn write_info(info: *mut PgistRecoveryInfo, iterations: usize, stop: StopReason) {
    if let Some(i) = info.as_mut() {
        *i = PgistRecoveryInfo {
            iterations,
            converged: stop == StopReason::Converged,
        };
    }
}

/// Recover a length-`n` signal from `g[0..len]`. `cfg` and `info` may be
/// null (defaults / not reported).
///
/// # Safety
/// `p` must be a live handle; buffers sized per the pattern.
#[no_mangle]
pub unsafe extern "C" fn pgist_recover_1d(
    p: *const PgistPattern1D,
    g: *const f64,
    cfg: *const PgistSolverConfig,
    out: *mut f64,
    info: *mut PgistRecoveryInfo,
) -> PgistStatus {
    guard(|| {
        let op = &handle(p, "pattern")?.op;
        let obs = Observation::new(slice(g, op.pattern().len(), "g")?.to_vec());
        let res = run(op, &obs, cfg.as_ref())?;
        slice_mut(out, op.pattern().n(), "out")?.copy_from_slice(res.estimate.samples());
        write_info(info, res.iterations, res.stop);
        Ok(())
    })
}

/// Recover a row-major `n x n` image from interleaved `(re, im)` pairs.
/// `cfg` and `info` may be null.
///
/// # Safety
/// `m` must be a live handle; buffers sized per the mask.
#[no_mangle]
pub unsafe extern "C" fn pgist_recover_2d(
    m: *const PgistRadialMask,
    g: *const f64,
    cfg: *const PgistSolverConfig,
    out: *mut f64,
    info: *mut PgistRecoveryInfo,
) -> PgistStatus {
    guard(|| {
        let op = &handle(m, "mask")?.op;
        let raw = slice(g, 2 * op.mask().count(), "g")?;
        let obs = Observation::new(raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect());
        let res = run(op, &obs, cfg.as_ref())?;
        let n = op.mask().n();
        slice_mut(out, n * n, "out")?.copy_from_slice(res.estimate.pixels());
        write_info(info, res.iterations, res.stop);
        Ok(())
    })
}

/// Mean squared error of two length-`len` arrays; NaN on null input or
/// `len == 0`.
///
/// # Safety
/// `a` and `b` must be valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn pgist_mse(a: *const f64, b: *const f64, len: usize) -> f64 {
    if a.is_null() || b.is_null() || len == 0 {
        return f64::NAN;
    }
    let (a, b) = (std::slice::from_raw_parts(a, len), std::slice::from_raw_parts(b, len));
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / len as f64
}

/// `10 log10(peak^2 / mse)`; infinite for identical inputs, NaN on null
/// input, `len == 0` or `peak <= 0`.
///
/// # Safety
/// `a` and `b` must be valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn pgist_psnr(a: *const f64, b: *const f64, len: usize, peak: f64) -> f64 {
    if peak.is_nan() || peak <= 0.0 {
        return f64::NAN;
    }
    psnr_from_mse(pgist_mse(a, b, len), peak)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pgist_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
