//! Command-line front end: `pgist <subcommand> [flags]`.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a usage error.
//! Every failure prints one `error: ...` line on stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{ista_gamma, noise_seed, run_experiment, ExperimentKind, ExperimentSpec, SolverChoice};
use crate::io::{self, Metadata, ObservationFile};
use crate::metrics::{nonzero_gradient_count, MetricReport};
use crate::operators::{
    make_radial_mask, make_random_pattern, LinearOperator, RadialFourier, RadialMask, Selection1D,
};
use crate::signals::{add_awgn, gen_bandlimited, gen_heavisine, gen_shepp_logan, Image2D, Signal1D};
use crate::solvers::{
    recover_ista_with_reference, recover_pg_ist_with_reference, RecoveryResult, SolverConfig,
    ThresholdStrategy, DEFAULT_ALPHA, DEFAULT_DELTA, DEFAULT_MAX_ITER,
};
use crate::thresholding::Rule;
use crate::transforms::SwtDomain;

/// Nonzero-gradient count of the 256x256 phantom used as the sparsity target.
pub const REFERENCE_GRADIENT_COUNT: usize = 2184;

const BOOL_FLAGS: &[&str] = &["freeze-plan", "dump-raw", "timing", "baseline"];

#[derive(Parser, Debug)]
#[command(
    name = "pgist",
    version,
    about = "Sparse recovery by iterative wavelet thresholding",
    args_override_self = true
)]
struct Cli {
    /// Plain `key = value` file with the same keys as the flags; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a test signal as one value per line.
    GenSignal(GenSignalArgs),
    /// Write the Shepp-Logan phantom and report its gradient sparsity.
    GenPhantom(GenPhantomArgs),
    /// Write a radial Fourier sampling mask.
    MakeMask(MakeMaskArgs),
    /// Measure a signal or image and write the observation file.
    Sample(SampleArgs),
    /// Reconstruct from an observation file.
    Recover(RecoverArgs),
    /// Run an experiment grid and write a results table.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Relative-change stopping tolerance.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = Rule::Soft)]
    rule: Rule,
    /// Birgé-Massart sparsity exponent.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Birgé-Massart budget M; defaults to the signal length.
    #[arg(long)]
    bm_m: Option<usize>,
    /// Use this fixed threshold on every detail subband.
    #[arg(long)]
    gamma: Option<f64>,
    /// Compute thresholds once from the zero-filled estimate.
    #[arg(long)]
    freeze_plan: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let threshold = match self.gamma {
            Some(g) => ThresholdStrategy::Fixed(g),
            None => ThresholdStrategy::BirgeMassart {
                alpha: self.alpha,
                budget: self.bm_m,
            },
        };
        SolverConfig {
            delta: self.delta,
            max_iter: self.max_iter,
            rule: self.rule,
            threshold,
            freeze_plan: self.freeze_plan,
            record_trace: false,
        }
    }
}

#[derive(Args, Debug)]
struct GenSignalArgs {
    /// `heavisine` or `bandlimited`.
    #[arg(long, default_value = "heavisine")]
    kind: String,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// Half-bandwidth for `bandlimited`.
    #[arg(long, default_value_t = 3)]
    band: usize,
    #[arg(long)]
    noise_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenPhantomArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long)]
    noise_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `.csv` writes raw values, anything else a PGM.
    #[arg(long)]
    out: PathBuf,
    /// Also write raw values next to a PGM.
    #[arg(long)]
    dump_raw: bool,
}

#[derive(Args, Debug)]
struct MakeMaskArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long)]
    lines: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Signal length or image side for generated inputs.
    #[arg(long)]
    n: Option<usize>,
    /// Random sample count (1D).
    #[arg(long)]
    m: Option<usize>,
    /// Radial line count (2D).
    #[arg(long)]
    lines: Option<usize>,
    /// Mask PGM (2D).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Signal CSV (1D) or image PGM/CSV (2D); HeaviSine or the phantom when
    /// omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    noise_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RecoverArgs {
    #[arg(long)]
    obs: PathBuf,
    /// Mask PGM the observation must match (2D).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Regenerate the radial mask with this many lines (2D).
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long, default_value_t = SolverChoice::Pg)]
    solver: SolverChoice,
    #[command(flatten)]
    solver_args: SolverArgs,
    /// 1D: CSV. 2D: `.csv` for raw values, anything else a PGM.
    #[arg(long)]
    out: PathBuf,
    /// Also write raw values next to a PGM.
    #[arg(long)]
    dump_raw: bool,
    /// Ground truth for MSE/PSNR reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Per-iteration CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    peak: f64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    kind: ExperimentKind,
    #[arg(long)]
    n: Option<usize>,
    /// Sample counts (heavisine-1d) or known counts (pg-extrapolate).
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Radial line counts (phantom kinds).
    #[arg(long, value_delimiter = ',')]
    lines: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    noise_db: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "pg")]
    solver: Vec<SolverChoice>,
    #[command(flatten)]
    solver_args: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 3)]
    band: usize,
    #[arg(long, default_value_t = 1.0)]
    peak: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dump_raw: bool,
    /// Fill the `seconds` column with wall time.
    #[arg(long)]
    timing: bool,
    /// Add zero-filled reference rows.
    #[arg(long)]
    baseline: bool,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Parse `argv` (program name first), run the subcommand, return the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return 2;
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn parse_config(text: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", no + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key '{}'", no + 1, k.trim()));
        }
        pairs.push((key, v.trim().to_string()));
    }
    Ok(pairs)
}

/// Append config-file settings for every key not already given as a flag.
fn merge_config(mut args: Vec<String>) -> std::result::Result<Vec<String>, Failure> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Runtime(Error::io(format!("reading config {path}"), e)))?;
    let pairs = parse_config(&text).map_err(Failure::Usage)?;
    let given = |key: &str| {
        let flag = format!("--{key}");
        let prefix = format!("--{key}=");
        args.iter().any(|a| *a == flag || a.starts_with(&prefix))
    };
    let mut extra = Vec::new();
    for (key, value) in pairs {
        if given(&key) {
            continue;
        }
        if BOOL_FLAGS.contains(&key.as_str()) {
            match value.as_str() {
                "true" | "1" | "yes" => extra.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                other => {
                    return Err(Failure::Usage(format!(
                        "config key '{key}' expects true or false, got '{other}'"
                    )))
                }
            }
        } else {
            extra.push(format!("--{key}={value}"));
        }
    }
    args.extend(extra);
    Ok(args)
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::GenSignal(a) => gen_signal(a),
        Command::GenPhantom(a) => gen_phantom(a),
        Command::MakeMask(a) => make_mask(a),
        Command::Sample(a) => sample(a),
        Command::Recover(a) => recover(a),
        Command::Bench(a) => bench(a),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_image(path: &Path) -> Result<Image2D> {
    if is_csv(path) {
        io::read_image_csv(io::open(path)?)
    } else {
        Ok(io::read_pgm(io::open(path)?)?.0)
    }
}

fn write_image(path: &Path, img: &Image2D, dump_raw: bool, comment: &str) -> Result<()> {
    if is_csv(path) {
        return io::write_image_csv(io::create(path)?, img);
    }
    io::write_pgm(io::create(path)?, img, Some(comment))?;
    if dump_raw {
        io::write_image_csv(io::create(&path.with_extension("csv"))?, img)?;
    }
    Ok(())
}

fn gen_signal(a: GenSignalArgs) -> CliResult {
    let clean = match a.kind.as_str() {
        "heavisine" => gen_heavisine(a.n)?,
        "bandlimited" => gen_bandlimited(a.n, a.band, a.seed)?,
        other => {
            return Err(Failure::Usage(format!(
                "unknown signal kind '{other}' (expected heavisine or bandlimited)"
            )))
        }
    };
    let signal = match a.noise_db {
        Some(db) => add_awgn(&clean, db, noise_seed(a.seed))?,
        None => clean,
    };
    match &a.out {
        Some(path) => io::write_signal_csv(io::create(path)?, &signal)?,
        None => io::write_signal_csv(std::io::stdout().lock(), &signal)?,
    }
    Ok(())
}

fn gen_phantom(a: GenPhantomArgs) -> CliResult {
    let clean = gen_shepp_logan(a.n)?;
    let count = nonzero_gradient_count(&clean, 1e-12);
    let img = match a.noise_db {
        Some(db) => add_awgn(&clean, db, noise_seed(a.seed))?,
        None => clean,
    };
    let mut comment = format!("shepp-logan n={}", a.n);
    if let Some(db) = a.noise_db {
        comment.push_str(&format!(" noise_db={db} seed={}", a.seed));
    }
    write_image(&a.out, &img, a.dump_raw, &comment)?;
    eprintln!(
        "nonzero gradients: {count} (reference {REFERENCE_GRADIENT_COUNT} at n=256)"
    );
    Ok(())
}

fn make_mask(a: MakeMaskArgs) -> CliResult {
    let mask = make_radial_mask(a.n, a.lines)?;
    let comment = format!("radial-mask n={} lines={} count={}", a.n, a.lines, mask.count());
    io::write_mask_pgm(io::create(&a.out)?, &mask, Some(&comment))?;
    eprintln!("{} of {} frequencies sampled", mask.count(), a.n * a.n);
    Ok(())
}

fn sample(a: SampleArgs) -> CliResult {
    let sources = [a.m.is_some(), a.lines.is_some(), a.mask.is_some()];
    if sources.iter().filter(|&&x| x).count() != 1 {
        return Err(Failure::Usage(
            "sample needs exactly one of --m, --lines or --mask".into(),
        ));
    }
    let mut meta = Metadata::new();
    meta.insert("seed".into(), a.seed.to_string());
    if let Some(db) = a.noise_db {
        meta.insert("noise_db".into(), db.to_string());
    }
    if let Some(m) = a.m {
        let clean = match &a.input {
            Some(p) => io::read_signal_csv(io::open(p)?)?,
            None => gen_heavisine(a.n.unwrap_or(1024))?,
        };
        let signal = match a.noise_db {
            Some(db) => add_awgn(&clean, db, noise_seed(a.seed))?,
            None => clean,
        };
        let op = Selection1D::new(make_random_pattern(signal.len(), m, a.seed)?);
        let g = op.forward(&signal)?;
        meta.insert("m".into(), m.to_string());
        io::write_observation_1d(io::create(&a.out)?, op.pattern(), &g, &meta)?;
        return Ok(());
    }
    let clean = match &a.input {
        Some(p) => read_image(p)?,
        None => gen_shepp_logan(a.n.unwrap_or(256))?,
    };
    if clean.rows() != clean.cols() {
        return Err(Error::Shape(format!(
            "image must be square, got {}x{}",
            clean.rows(),
            clean.cols()
        ))
        .into());
    }
    let image = match a.noise_db {
        Some(db) => add_awgn(&clean, db, noise_seed(a.seed))?,
        None => clean,
    };
    let mask = match (&a.mask, a.lines) {
        (Some(p), _) => io::read_mask_pgm(io::open(p)?)?.0,
        (None, Some(k)) => {
            meta.insert("lines".into(), k.to_string());
            make_radial_mask(image.rows(), k)?
        }
        (None, None) => unreachable!("sampling source checked above"),
    };
    let op = RadialFourier::new(mask)?;
    let g = op.forward(&image)?;
    io::write_observation_2d(io::create(&a.out)?, op.mask(), &g, &meta)?;
    Ok(())
}

/// Mask for a 2D observation: from a file or line count when given (and
/// checked against the file's coordinates), otherwise rebuilt from them.
fn mask_for(a: &RecoverArgs, n: usize, coords: &[(i64, i64)]) -> Result<RadialMask> {
    let mask = match (&a.mask, a.lines) {
        (Some(p), _) => io::read_mask_pgm(io::open(p)?)?.0,
        (None, Some(k)) => make_radial_mask(n, k)?,
        (None, None) => {
            let mut cells = vec![false; n * n];
            let probe = RadialMask::from_cells(n, {
                let mut c = vec![false; n * n];
                c[0] = true;
                c
            })?;
            for &(u, v) in coords {
                cells[probe.flat_index(u, v)] = true;
            }
            RadialMask::from_cells(n, cells)?
        }
    };
    io::check_coords_match(&mask, n, coords)?;
    Ok(mask)
}

fn solve<K>(
    op: &K,
    g: &crate::operators::Observation<K::Scalar>,
    a: &RecoverArgs,
    truth: Option<&K::Domain>,
) -> Result<RecoveryResult<K::Domain>>
where
    K: LinearOperator,
    K::Domain: SwtDomain,
{
    let mut cfg = a.solver_args.config();
    cfg.record_trace = a.trace.is_some();
    match a.solver {
        SolverChoice::Pg => recover_pg_ist_with_reference(op, g, &cfg, truth),
        SolverChoice::Ista => {
            let gamma = ista_gamma(&op.adjoint(g)?, &cfg)?;
            recover_ista_with_reference(op, g, gamma, &cfg, truth)
        }
    }
}

fn report<S: crate::signals::Field>(a: &RecoverArgs, res: &RecoveryResult<S>, truth: Option<&S>) -> Result<()> {
    if let (Some(path), Some(trace)) = (&a.trace, &res.trace) {
        let mut w = io::create(path)?;
        trace
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    eprintln!(
        "solver={} iterations={} stop={}",
        a.solver.name(),
        res.iterations,
        res.stop
    );
    if let Some(t) = truth {
        let m = MetricReport::compare(&res.estimate, t, a.peak)?;
        eprintln!("mse={:.6e} psnr_db={:.4}", m.mse, m.psnr_db);
    }
    Ok(())
}

fn recover(a: RecoverArgs) -> CliResult {
    if a.mask.is_some() && a.lines.is_some() {
        return Err(Failure::Usage("--mask and --lines are mutually exclusive".into()));
    }
    match io::read_observation(io::open(&a.obs)?)? {
        ObservationFile::OneD { pattern, values, .. } => {
            if a.mask.is_some() || a.lines.is_some() {
                return Err(Failure::Usage(
                    "--mask/--lines apply to 2D observations only".into(),
                ));
            }
            let truth: Option<Signal1D> = a
                .truth
                .as_ref()
                .map(|p| io::read_signal_csv(io::open(p)?))
                .transpose()?;
            let op = Selection1D::new(pattern);
            let res = solve(&op, &values, &a, truth.as_ref())?;
            io::write_signal_csv(io::create(&a.out)?, &res.estimate)?;
            report(&a, &res, truth.as_ref())?;
        }
        ObservationFile::TwoD {
            n, coords, values, meta,
        } => {
            let mask = mask_for(&a, n, &coords)?;
            let truth = a.truth.as_ref().map(|p| read_image(p)).transpose()?;
            let op = RadialFourier::new(mask)?;
            let res = solve(&op, &values, &a, truth.as_ref())?;
            let mut comment = format!("recovered solver={} iterations={}", a.solver.name(), res.iterations);
            if let Some(seed) = meta.get("seed") {
                comment.push_str(&format!(" seed={seed}"));
            }
            write_image(&a.out, &res.estimate, a.dump_raw, &comment)?;
            report(&a, &res, truth.as_ref())?;
        }
    }
    Ok(())
}

fn bench(a: BenchArgs) -> CliResult {
    let mut spec = ExperimentSpec::new(a.kind);
    let (grid, unused, flag) = match a.kind {
        ExperimentKind::Heavisine1D | ExperimentKind::PgExtrapolate => (&a.m, &a.lines, "--lines"),
        _ => (&a.lines, &a.m, "--m"),
    };
    if !unused.is_empty() {
        return Err(Failure::Usage(format!("{flag} does not apply to --kind {}", a.kind)));
    }
    if !grid.is_empty() {
        spec.grid = grid.clone();
    }
    if let Some(n) = a.n {
        spec.n = n;
    }
    if !a.noise_db.is_empty() {
        spec.noise_db = a.noise_db.clone();
    }
    spec.solvers = a.solver.clone();
    spec.config = a.solver_args.config();
    spec.seed = a.seed;
    spec.repeats = a.repeats;
    spec.band = a.band;
    spec.peak = a.peak;
    spec.out_dir = Some(a.out.clone());
    spec.dump_raw = a.dump_raw;
    spec.timing = a.timing;
    spec.baseline = a.baseline;
    let rows = run_experiment(&spec)?;
    eprintln!(
        "{} rows written to {}",
        rows.len(),
        a.out.join("table.csv").display()
    );
    Ok(())
}
