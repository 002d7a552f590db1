//! Experiment runner: generate -> sample (optionally noisy) -> recover ->
//! score, over a parameter grid, writing a CSV table, a run log and the
//! reconstructions.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{mse, psnr_from_mse};
use crate::operators::{
    make_radial_mask, make_random_pattern, LinearOperator, RadialFourier, SamplingPattern1D,
    Selection1D,
};
use crate::signals::{add_awgn, gen_bandlimited, gen_heavisine, gen_shepp_logan, Field, Image2D, Signal1D};
use crate::solvers::{
    pg_extrapolate, plan_for, recover_ista, recover_pg_ist, RecoveryResult, SolverConfig,
    ThresholdStrategy,
};
use crate::transforms::SwtDomain;

pub const TABLE_HEADER: &str = "kind,n,param,noise_db,solver,iters,stop,mse,psnr_db,seconds";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Heavisine1D,
    PhantomRadial,
    PhantomRadialNoisy,
    PgExtrapolate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Heavisine1D => "heavisine-1d",
            ExperimentKind::PhantomRadial => "phantom-radial",
            ExperimentKind::PhantomRadialNoisy => "phantom-radial-noisy",
            ExperimentKind::PgExtrapolate => "pg-extrapolate",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::Heavisine1D,
            ExperimentKind::PhantomRadial,
            ExperimentKind::PhantomRadialNoisy,
            ExperimentKind::PgExtrapolate,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Parse(format!("unknown experiment kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    /// Threshold-then-restore.
    Pg,
    /// Thresholded Landweber baseline.
    Ista,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Pg => "pg",
            SolverChoice::Ista => "ista",
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pg" => Ok(SolverChoice::Pg),
            "ista" => Ok(SolverChoice::Ista),
            other => Err(Error::Parse(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n: usize,
    /// Sample counts (1D), radial line counts (2D) or known-sample counts
    /// (extrapolation).
    pub grid: Vec<usize>,
    /// AWGN levels as PSNR in dB; empty means noiseless.
    pub noise_db: Vec<f64>,
    pub solvers: Vec<SolverChoice>,
    pub config: SolverConfig,
    pub seed: u64,
    pub repeats: usize,
    /// Half-bandwidth for `pg-extrapolate`.
    pub band: usize,
    pub peak: f64,
    pub out_dir: Option<PathBuf>,
    pub dump_raw: bool,
    /// Fill the `seconds` column. Off by default so tables are reproducible
    /// byte for byte.
    pub timing: bool,
    /// Also emit a `zero-fill` row (`f0 = K* g`) per grid point.
    pub baseline: bool,
}

impl ExperimentSpec {
    /// Defaults shaped like the reference experiments for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        let (n, grid, noise_db) = match kind {
            ExperimentKind::Heavisine1D => (1024, vec![70, 100, 150, 200], vec![]),
            ExperimentKind::PhantomRadial => (256, vec![9, 11, 15, 21], vec![]),
            ExperimentKind::PhantomRadialNoisy => (256, vec![31], vec![20.0, 30.0, 40.0, 50.0]),
            ExperimentKind::PgExtrapolate => (64, vec![48], vec![]),
        };
        Self {
            kind,
            n,
            grid,
            noise_db,
            solvers: vec![SolverChoice::Pg],
            config: SolverConfig::default(),
            seed: 0,
            repeats: 1,
            band: 3,
            peak: 1.0,
            out_dir: None,
            dump_raw: false,
            timing: false,
            baseline: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("parameter grid is empty".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidParameter("no solver selected".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be >= 1".into()));
        }
        if !(self.peak > 0.0 && self.peak.is_finite()) {
            return Err(Error::InvalidParameter(format!("peak must be positive, got {}", self.peak)));
        }
        if let Some(db) = self.noise_db.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise level {db} is not finite")));
        }
        match self.kind {
            ExperimentKind::PhantomRadialNoisy if self.noise_db.is_empty() => {
                return Err(Error::InvalidParameter(
                    "phantom-radial-noisy needs at least one noise level".into(),
                ))
            }
            ExperimentKind::PgExtrapolate if !self.noise_db.is_empty() => {
                return Err(Error::InvalidParameter(
                    "pg-extrapolate does not take noise levels".into(),
                ))
            }
            _ => {}
        }
        let n = self.n;
        match self.kind {
            ExperimentKind::Heavisine1D => {
                if n < 2 {
                    return Err(Error::InvalidSize(format!("n must be >= 2, got {n}")));
                }
                if let Some(m) = self.grid.iter().find(|&&m| m < 1 || m > n) {
                    return Err(Error::InvalidCount(format!("sample count {m} outside 1..={n}")));
                }
            }
            ExperimentKind::PhantomRadial | ExperimentKind::PhantomRadialNoisy => {
                if n < 16 || !n.is_power_of_two() {
                    return Err(Error::InvalidSize(format!(
                        "phantom size must be a power of two >= 16, got {n}"
                    )));
                }
                if self.grid.contains(&0) {
                    return Err(Error::InvalidCount("line count must be >= 1".into()));
                }
            }
            ExperimentKind::PgExtrapolate => {
                if n < 4 || !n.is_power_of_two() {
                    return Err(Error::InvalidSize(format!(
                        "extrapolation length must be a power of two >= 4, got {n}"
                    )));
                }
                if self.band < 1 || 2 * self.band >= n {
                    return Err(Error::InvalidParameter(format!(
                        "band must satisfy 1 <= band < n/2, got {}",
                        self.band
                    )));
                }
                if let Some(m) = self.grid.iter().find(|&&m| m < 1 || m > n) {
                    return Err(Error::InvalidCount(format!("known count {m} outside 1..={n}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub kind: ExperimentKind,
    pub n: usize,
    pub param: usize,
    pub noise_db: Option<f64>,
    /// `pg`, `ista`, `pg-extrap`, or the reference rows `zero-fill` / `noisy`.
    pub solver: String,
    pub iters: usize,
    /// `converged`, `max-iter`, or `-` for reference rows.
    pub stop: String,
    pub mse: f64,
    pub psnr_db: f64,
    pub seconds: f64,
    pub repeat: usize,
    /// Seed used for every random draw at this grid point.
    pub seed: u64,
}

impl ResultRow {
    pub fn to_csv_line(&self, timing: bool) -> String {
        let noise = self.noise_db.map(|d| d.to_string()).unwrap_or_default();
        let psnr = if self.psnr_db.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:.4}", self.psnr_db)
        };
        let secs = if timing {
            format!("{:.3}", self.seconds)
        } else {
            String::new()
        };
        format!(
            "{},{},{},{},{},{},{},{:.6e},{},{}",
            self.kind, self.n, self.param, noise, self.solver, self.iters, self.stop, self.mse, psnr, secs
        )
    }
}

pub fn write_table<W: Write>(mut w: W, rows: &[ResultRow], timing: bool) -> Result<()> {
    let werr = |e| Error::io("writing table", e);
    writeln!(w, "{TABLE_HEADER}").map_err(werr)?;
    for r in rows {
        writeln!(w, "{}", r.to_csv_line(timing)).map_err(werr)?;
    }
    w.flush().map_err(werr)
}

/// 64-bit FNV-1a; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed for one grid point: base seed plus a stable hash of the point.
pub fn point_seed(base: u64, kind: ExperimentKind, n: usize, param: usize, noise_db: Option<f64>, repeat: usize) -> u64 {
    let noise = noise_db.map(|d| d.to_string()).unwrap_or_else(|| "none".into());
    let key = format!("{kind}|{n}|{param}|{noise}|{repeat}");
    base.wrapping_add(fnv1a(key.as_bytes()))
}

/// Seed for noise draws, distinct from the sampling-pattern stream that uses
/// `seed` itself.
pub fn noise_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

#[derive(Debug, Clone, Copy)]
struct Point {
    param: usize,
    noise_db: Option<f64>,
    repeat: usize,
    seed: u64,
}

impl Point {
    fn describe(&self, kind: ExperimentKind) -> String {
        let noise = self.noise_db.map(|d| d.to_string()).unwrap_or_else(|| "none".into());
        format!(
            "kind={kind} param={} noise_db={noise} repeat={} seed={}",
            self.param, self.repeat, self.seed
        )
    }

    fn file_stem(&self, kind: ExperimentKind) -> String {
        let tag = match kind {
            ExperimentKind::Heavisine1D => "m",
            ExperimentKind::PgExtrapolate => "known",
            _ => "k",
        };
        let mut stem = format!("recon_{tag}{}", self.param);
        if let Some(db) = self.noise_db {
            stem.push_str(&format!("_db{db}"));
        }
        if self.repeat > 0 {
            stem.push_str(&format!("_r{}", self.repeat));
        }
        stem
    }
}

struct PointOutput {
    rows: Vec<ResultRow>,
    log: String,
}

/// Resolve the threshold used by the ISTA baseline: `--gamma` when given,
/// otherwise the mean Birgé-Massart level of the zero-filled estimate.
pub fn ista_gamma<S: SwtDomain>(f0: &S, cfg: &SolverConfig) -> Result<f64> {
    match cfg.threshold {
        ThresholdStrategy::Fixed(g) => Ok(g),
        strategy => {
            let plan = plan_for(f0, strategy)?;
            let gammas = plan.gammas();
            Ok(gammas.iter().map(|(_, g)| g).sum::<f64>() / gammas.len() as f64)
        }
    }
}

struct Scored<S> {
    result: RecoveryResult<S>,
    seconds: f64,
}

fn run_solver<K>(op: &K, g: &crate::operators::Observation<K::Scalar>, choice: SolverChoice, cfg: &SolverConfig) -> Result<Scored<K::Domain>>
where
    K: LinearOperator,
    K::Domain: SwtDomain,
{
    let start = Instant::now();
    let result = match choice {
        SolverChoice::Pg => recover_pg_ist(op, g, cfg)?,
        SolverChoice::Ista => {
            let gamma = ista_gamma(&op.adjoint(g)?, cfg)?;
            recover_ista(op, g, gamma, cfg)?
        }
    };
    Ok(Scored {
        result,
        seconds: start.elapsed().as_secs_f64(),
    })
}

enum Artifact<'a> {
    Signal(&'a Signal1D),
    Image(&'a Image2D),
}

fn write_artifact(dir: &Path, stem: &str, artifact: Artifact<'_>, dump_raw: bool, comment: &str) -> Result<()> {
    match artifact {
        Artifact::Signal(s) => io::write_signal_csv(io::create(&dir.join(format!("{stem}.csv")))?, s),
        Artifact::Image(img) => {
            io::write_pgm(io::create(&dir.join(format!("{stem}.pgm")))?, img, Some(comment))?;
            if dump_raw {
                io::write_image_csv(io::create(&dir.join(format!("{stem}.csv")))?, img)?;
            }
            Ok(())
        }
    }
}

impl ExperimentSpec {
    fn points(&self) -> Vec<Point> {
        let noises: Vec<Option<f64>> = if self.noise_db.is_empty() {
            vec![None]
        } else {
            self.noise_db.iter().map(|&d| Some(d)).collect()
        };
        let mut points = Vec::new();
        for &param in &self.grid {
            for &noise_db in &noises {
                for repeat in 0..self.repeats {
                    let seed = point_seed(self.seed, self.kind, self.n, param, noise_db, repeat);
                    points.push(Point {
                        param,
                        noise_db,
                        repeat,
                        seed,
                    });
                }
            }
        }
        points
    }

    fn row(&self, p: &Point, solver: &str, iters: usize, stop: &str, mse: f64, seconds: f64) -> ResultRow {
        ResultRow {
            kind: self.kind,
            n: self.n,
            param: p.param,
            noise_db: p.noise_db,
            solver: solver.to_string(),
            iters,
            stop: stop.to_string(),
            mse,
            psnr_db: psnr_from_mse(mse, self.peak),
            seconds,
            repeat: p.repeat,
            seed: p.seed,
        }
    }

    /// Reference rows, solver rows and artifacts for one operator instance.
    fn score<K>(
        &self,
        p: &Point,
        op: &K,
        truth: &K::Domain,
        observed_source: &K::Domain,
        wrap: impl Fn(&K::Domain) -> Artifact<'_>,
    ) -> Result<PointOutput>
    where
        K: LinearOperator,
        K::Domain: SwtDomain,
    {
        let mut rows = Vec::new();
        let mut log = format!("[point {}]\n", p.describe(self.kind));
        let g = op.forward(observed_source)?;
        if p.noise_db.is_some() {
            rows.push(self.row(p, "noisy", 0, "-", mse(observed_source, truth)?, 0.0));
        }
        if self.baseline {
            rows.push(self.row(p, "zero-fill", 0, "-", mse(&op.adjoint(&g)?, truth)?, 0.0));
        }
        for &choice in &self.solvers {
            let Scored { result, seconds } = run_solver(op, &g, choice, &self.config)?;
            let err = mse(&result.estimate, truth)?;
            rows.push(self.row(p, choice.name(), result.iterations, &result.stop.to_string(), err, seconds));
            log.push_str(&format!(
                "solver={}\niterations={}\nstop={}\nmse={err:e}\n",
                choice.name(),
                result.iterations,
                result.stop
            ));
            if let Some(plan) = &result.final_plan {
                log.push_str(&plan.to_key_values());
            }
            if let Some(dir) = &self.out_dir {
                let stem = format!("{}_{}", p.file_stem(self.kind), choice.name());
                let comment = format!("{} solver={}", p.describe(self.kind), choice.name());
                write_artifact(dir, &stem, wrap(&result.estimate), self.dump_raw, &comment)?;
            }
        }
        Ok(PointOutput { rows, log })
    }

    fn run_point(&self, p: &Point) -> Result<PointOutput> {
        match self.kind {
            ExperimentKind::Heavisine1D => {
                let truth = gen_heavisine(self.n)?;
                let source = match p.noise_db {
                    Some(db) => add_awgn(&truth, db, noise_seed(p.seed))?,
                    None => truth.clone(),
                };
                let op = Selection1D::new(make_random_pattern(self.n, p.param, p.seed)?);
                self.score(p, &op, &truth, &source, |s| Artifact::Signal(s))
            }
            ExperimentKind::PhantomRadial | ExperimentKind::PhantomRadialNoisy => {
                let truth = gen_shepp_logan(self.n)?;
                let source = match p.noise_db {
                    Some(db) => add_awgn(&truth, db, noise_seed(p.seed))?,
                    None => truth.clone(),
                };
                let op = RadialFourier::new(make_radial_mask(self.n, p.param)?)?;
                self.score(p, &op, &truth, &source, |img| Artifact::Image(img))
            }
            ExperimentKind::PgExtrapolate => self.run_extrapolation(p),
        }
    }

    fn run_extrapolation(&self, p: &Point) -> Result<PointOutput> {
        let n = self.n;
        let truth = gen_bandlimited(n, self.band, p.seed)?;
        let start = (n - p.param) / 2;
        let known = SamplingPattern1D::new(n, (start..start + p.param).collect())?;
        let mut g = vec![0.0; n];
        for &i in known.indices() {
            g[i] = truth.samples()[i];
        }
        let g = truth.with_values(g)?;
        let t0 = Instant::now();
        let result = pg_extrapolate(&g, &known, self.band, &self.config)?;
        let seconds = t0.elapsed().as_secs_f64();
        let mut rows = Vec::new();
        if self.baseline {
            rows.push(self.row(p, "zero-fill", 0, "-", mse(&g, &truth)?, 0.0));
        }
        let err = mse(&result.estimate, &truth)?;
        rows.push(self.row(p, "pg-extrap", result.iterations, &result.stop.to_string(), err, seconds));
        let log = format!(
            "[point {}]\nsolver=pg-extrap\nband={}\niterations={}\nstop={}\nmse={err:e}\n",
            p.describe(self.kind),
            self.band,
            result.iterations,
            result.stop
        );
        if let Some(dir) = &self.out_dir {
            let stem = format!("{}_pg-extrap", p.file_stem(self.kind));
            write_artifact(dir, &stem, Artifact::Signal(&result.estimate), false, "")?;
        }
        Ok(PointOutput { rows, log })
    }
}

/// Run every grid point (in parallel), merge rows in grid order and, when an
/// output directory is set, write `table.csv` and `run.log` into it.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::io(format!("creating output directory {}", dir.display()), e))?;
    }
    let points = spec.points();
    let outputs: Vec<PointOutput> = points
        .par_iter()
        .map(|p| {
            spec.run_point(p).map_err(|e| Error::Experiment {
                params: p.describe(spec.kind),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<ResultRow> = outputs.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    if let Some(dir) = &spec.out_dir {
        write_table(io::create(&dir.join("table.csv"))?, &rows, spec.timing)?;
        let mut log = io::create(&dir.join("run.log"))?;
        let werr = |e| Error::io("writing run.log", e);
        writeln!(
            log,
            "kind={}\nn={}\nbase_seed={}\ndelta={}\nmax_iter={}\nrule={}\nfreeze_plan={}\n",
            spec.kind,
            spec.n,
            spec.seed,
            spec.config.delta,
            spec.config.max_iter,
            spec.config.rule,
            spec.config.freeze_plan
        )
        .map_err(werr)?;
        for o in &outputs {
            writeln!(log, "{}", o.log).map_err(werr)?;
        }
        log.flush().map_err(werr)?;
    }
    Ok(rows)
}
