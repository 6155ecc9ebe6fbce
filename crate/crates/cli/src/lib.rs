//! Batch front end for `smile-moments`: reads a smile or quote file, runs one
//! analytics operation and writes CSV or JSON to `--out` or stdout.
//!
//! Exit codes: 0 success, 1 usage or I/O failure, 2 invalid or arbitrageable
//! input, 3 order outside the convergence strip, 4 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use smile_moments::analytics::{
    bergomi_moment, implied_cdf, implied_density, implied_survival, log_payoff, moment_bounds, MomentBounds,
    MomentReport, Representation, SmileNodes,
};
use smile_moments::calibrate::{fit_ssvi, read_quotes_csv, CalibrationResult};
use smile_moments::fourier::{bs_put_reference, FourierPricer, InversionSpec};
use smile_moments::quadrature::DEFAULT_ORDER;
use smile_moments::smiles::{
    validate_ssvi, verify_assumptions, wing_slopes, ValidationReport, WingSlopes, DEFAULT_K_PROBE,
};
use smile_moments::transforms::{monotonicity_scan, surjectivity_thresholds, KGrid, SurjectivityThresholds};
use smile_moments::{ComplexValue, ErrorClass, GaussianRule, SmileConfig, SmileSlice, SsviParams};

#[derive(Debug, Parser)]
#[command(name = "smile-moments", version, about = "Model-free moments and prices from an implied-volatility smile")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the no-arbitrage conditions and tail assumptions (JSON).
    Validate {
        #[arg(long, value_name = "FILE")]
        smile: PathBuf,
        /// Log-strike used as a finite proxy for the left-wing limit.
        #[arg(long, default_value_t = DEFAULT_K_PROBE)]
        k_probe: f64,
    },
    /// Moments E[(S/F)^p] along a line of constant Im p (CSV).
    Moments {
        #[command(flatten)]
        smile: SmileArgs,
        #[command(flatten)]
        range: PRange,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        im: f64,
        #[arg(long, value_enum, default_value_t = Repr::Base)]
        repr: Repr,
    },
    /// Characteristic function E[exp(i eta X)] of the log-return (CSV).
    Charfn {
        #[command(flatten)]
        smile: SmileArgs,
        #[arg(long, allow_negative_numbers = true)]
        eta_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        eta_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = CharfnRepr::Matytsin)]
        repr: CharfnRepr,
    },
    /// Real-line representation at p = re + i im, re in [0, 1] (CSV).
    Bergomi {
        #[command(flatten)]
        smile: SmileArgs,
        #[arg(long, default_value_t = 0.5)]
        re: f64,
        #[arg(long, allow_negative_numbers = true)]
        im_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        im_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Variance-swap and gamma-swap strikes (JSON).
    Swap {
        #[command(flatten)]
        smile: SmileArgs,
    },
    /// Monotonicity and surjectivity scan of f(p, .) on a log-strike grid (JSON).
    Scan {
        #[arg(long, value_name = "FILE")]
        smile: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, allow_negative_numbers = true)]
        k_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        k_max: f64,
        #[arg(long)]
        n: usize,
    },
    /// Put prices by Fourier inversion against the closed form (CSV).
    Put {
        #[command(flatten)]
        smile: SmileArgs,
        #[command(flatten)]
        fourier: FourierArgs,
        /// Forward; strikes are F exp(k) and prices scale with F.
        #[arg(long, default_value_t = 1.0)]
        forward: f64,
    },
    /// Implied distribution and survival functions on a log-strike grid (CSV).
    Cdf {
        #[arg(long, value_name = "FILE")]
        smile: PathBuf,
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        k_grid: KGrid,
    },
    /// Implied density of the log-return on a log-strike grid (CSV).
    Density {
        #[arg(long, value_name = "FILE")]
        smile: PathBuf,
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        k_grid: KGrid,
    },
    /// Fit an SSVI slice to `k,v` quotes (JSON).
    Calibrate {
        #[arg(long, value_name = "FILE")]
        quotes: PathBuf,
        /// Also write the fitted slice as a smile file.
        #[arg(long, value_name = "FILE")]
        smile_out: Option<PathBuf>,
    },
    /// Largest Fourier-versus-closed-form put discrepancy on a grid (JSON).
    Bscheck {
        #[command(flatten)]
        smile: SmileArgs,
        #[command(flatten)]
        fourier: FourierArgs,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct SmileArgs {
    /// Smile file, e.g. {"model":"ssvi","theta":0.0625,"rho":-0.8,"phi":1.4}.
    #[arg(long, value_name = "FILE")]
    pub smile: PathBuf,
    /// Gauss-Hermite order in [1, 512].
    #[arg(long, env = "SMILE_MOMENTS_ORDER", default_value_t = DEFAULT_ORDER)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct PRange {
    #[arg(long, allow_negative_numbers = true)]
    pub p_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub p_max: f64,
    #[arg(long)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    /// Log-strike grid `k_lo:k_hi:n`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub k_grid: KGrid,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 200.0)]
    pub u_max: f64,
    #[arg(long, default_value_t = 4001)]
    pub n_u: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub tail_tol: f64,
}

impl FourierArgs {
    fn spec(&self) -> InversionSpec {
        InversionSpec { alpha: self.alpha, u_max: self.u_max, n_u: self.n_u, tail_tol: self.tail_tol }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Repr {
    Base,
    Matytsin,
    Dual,
    Bergomi,
}

impl From<Repr> for Representation {
    fn from(r: Repr) -> Self {
        match r {
            Repr::Base => Self::Base,
            Repr::Matytsin => Self::Matytsin,
            Repr::Dual => Self::Dual,
            Repr::Bergomi => Self::Bergomi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CharfnRepr {
    Matytsin,
    Dual,
}

fn parse_grid(s: &str) -> Result<KGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected k_lo:k_hi:n, got {s:?}"));
    };
    let lo: f64 = lo.trim().parse().map_err(|e| format!("k_lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("k_hi: {e}"))?;
    let n: usize = n.trim().parse().map_err(|e| format!("n: {e}"))?;
    KGrid::new(lo, hi, n).map_err(|e| e.to_string())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] smile_moments::Error),
    #[error("largest put discrepancy {max:e} exceeds tolerance {tol:e}")]
    CheckFailed { max: f64, tol: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Io { .. } => 1,
            Self::Core(e) => match e.class() {
                ErrorClass::InvalidInput => 2,
                ErrorClass::OutsideStrip => 3,
                ErrorClass::Numerical => 4,
            },
            Self::CheckFailed { .. } => 4,
        }
    }
}

/// Report text plus an optional failure raised after the report was built.
pub struct Outcome {
    pub data: String,
    pub failure: Option<CliError>,
}

impl From<String> for Outcome {
    fn from(data: String) -> Self {
        Self { data, failure: None }
    }
}

/// Parses `args` (program name first), executes and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = execute(&cli.command).and_then(|outcome| {
        emit(cli.out.as_deref(), &outcome.data)?;
        Ok(outcome.failure)
    });
    match result {
        Ok(None) => 0,
        Ok(Some(e)) | Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, data: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, data),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(data.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn write_file(path: &Path, data: &str) -> Result<(), CliError> {
    fs::write(path, data).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn load_config(path: &Path) -> Result<SmileConfig, CliError> {
    Ok(SmileConfig::from_json(&read_file(path)?)?)
}

pub fn load_smile(path: &Path) -> Result<SmileSlice, CliError> {
    Ok(load_config(path)?.into_slice()?)
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 || lo > hi || !lo.is_finite() || !hi.is_finite() {
        return Err(CliError::Usage(format!("empty range [{lo}, {hi}] with {steps} steps")));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            lo * (1.0 - t) + hi * t
        })
        .collect())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io { path: "<csv>".into(), source: e.into() };
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), source: e.into_error() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn nodes(args: &SmileArgs) -> Result<SmileNodes, CliError> {
    let slice = load_smile(&args.smile)?;
    let rule = GaussianRule::new(args.order)?;
    Ok(SmileNodes::new(&slice, &rule)?)
}

#[derive(Debug, Serialize)]
pub struct ValidateReport {
    pub smile: SmileConfig,
    pub ok: bool,
    /// No-arbitrage conditions; absent for a constant smile.
    pub conditions: Option<ValidationReport>,
    pub assumptions: ValidationReport,
    pub wing_slopes: WingSlopes,
    pub moment_bounds: MomentBounds,
    pub surjectivity_thresholds: SurjectivityThresholds,
}

#[derive(Debug, Serialize)]
pub struct SwapReport {
    pub varswap_strike: f64,
    pub gammaswap_strike: f64,
    /// Price of the payoff `log(S/F)`.
    pub log_contract: f64,
    pub order: usize,
}

#[derive(Debug, Serialize)]
pub struct BsCheckReport {
    pub smile: SmileConfig,
    pub spec: InversionSpec,
    pub k_grid: KGrid,
    pub max_abs_diff: f64,
    /// Log-strike of the largest discrepancy.
    pub worst_k: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Runs one subcommand and renders its report.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate { smile, k_probe } => validate(smile, *k_probe),
        Command::Moments { smile, range, im, repr } => {
            let nodes = nodes(smile)?;
            let reports = linspace(range.p_min, range.p_max, range.steps)?
                .into_iter()
                .map(|p| nodes.mgf(ComplexValue::new(p, *im), (*repr).into()))
                .collect::<smile_moments::Result<Vec<_>>>()?;
            Ok(csv_table(&MomentReport::CSV_HEADER, reports.iter().map(|r| r.csv_record().to_vec()))?.into())
        }
        Command::Charfn { smile, eta_min, eta_max, steps, repr } => {
            let nodes = nodes(smile)?;
            let repr = match repr {
                CharfnRepr::Matytsin => Representation::Matytsin,
                CharfnRepr::Dual => Representation::Dual,
            };
            let mut rows = Vec::with_capacity(*steps);
            for eta in linspace(*eta_min, *eta_max, *steps)? {
                let v = nodes.mgf(ComplexValue::imag(eta), repr)?.value;
                rows.push(vec![num(eta), num(v.re), num(v.im)]);
            }
            Ok(csv_table(&["eta", "value_re", "value_im"], rows)?.into())
        }
        Command::Bergomi { smile, re, im_min, im_max, steps } => {
            let slice = load_smile(&smile.smile)?;
            let rule = GaussianRule::new(smile.order)?;
            let mut rows = Vec::with_capacity(*steps);
            for im in linspace(*im_min, *im_max, *steps)? {
                let v = bergomi_moment(&slice, ComplexValue::new(*re, im), &rule)?;
                rows.push(vec![num(*re), num(im), num(v.re), num(v.im)]);
            }
            Ok(csv_table(&["p_re", "p_im", "value_re", "value_im"], rows)?.into())
        }
        Command::Swap { smile } => {
            let nodes = nodes(smile)?;
            let report = SwapReport {
                varswap_strike: nodes.varswap_strike()?,
                gammaswap_strike: nodes.gammaswap_strike()?,
                log_contract: nodes.price_psi(&log_payoff())?,
                order: nodes.order(),
            };
            Ok(json(&report).into())
        }
        Command::Scan { smile, p, k_min, k_max, n } => {
            let slice = load_smile(smile)?;
            Ok(json(&monotonicity_scan(&slice, *p, *k_min, *k_max, *n)?).into())
        }
        Command::Put { smile, fourier, forward } => {
            if !(*forward > 0.0 && forward.is_finite()) {
                return Err(CliError::Usage(format!("forward must be positive, got {forward}")));
            }
            let nodes = nodes(smile)?;
            let pricer = FourierPricer::from_nodes(&nodes, fourier.spec())?;
            let mut rows = Vec::with_capacity(fourier.k_grid.n);
            for k in fourier.k_grid.points() {
                let strike = k.exp();
                let price = forward * pricer.put(strike)?;
                let reference = forward * bs_put_reference(nodes.slice(), strike)?;
                rows.push(vec![num(forward * strike), num(price), num(reference), num((price - reference).abs())]);
            }
            Ok(csv_table(&["K", "fourier_price", "bs_reference", "abs_diff"], rows)?.into())
        }
        Command::Cdf { smile, k_grid } => {
            let slice = load_smile(smile)?;
            let mut rows = Vec::with_capacity(k_grid.n);
            for k in k_grid.points() {
                rows.push(vec![num(k), num(implied_cdf(&slice, k)?), num(implied_survival(&slice, k)?)]);
            }
            Ok(csv_table(&["k", "cdf", "survival"], rows)?.into())
        }
        Command::Density { smile, k_grid } => {
            let slice = load_smile(smile)?;
            let mut rows = Vec::with_capacity(k_grid.n);
            for k in k_grid.points() {
                rows.push(vec![num(k), num(implied_density(&slice, k)?)]);
            }
            Ok(csv_table(&["k", "density"], rows)?.into())
        }
        Command::Calibrate { quotes, smile_out } => {
            let file =
                fs::File::open(quotes).map_err(|source| CliError::Io { path: quotes.display().to_string(), source })?;
            let result: CalibrationResult = fit_ssvi(&read_quotes_csv(file)?, None)?;
            if let Some(path) = smile_out {
                let p = result.params;
                let config = SmileConfig::Ssvi { theta: p.theta, rho: p.rho, phi: p.phi };
                write_file(path, &json(&config))?;
            }
            Ok(json(&result).into())
        }
        Command::Bscheck { smile, fourier, tol } => {
            let nodes = nodes(smile)?;
            let pricer = FourierPricer::from_nodes(&nodes, fourier.spec())?;
            let (mut max_abs_diff, mut worst_k) = (0.0f64, fourier.k_grid.k_lo);
            for k in fourier.k_grid.points() {
                let diff = (pricer.put(k.exp())? - bs_put_reference(nodes.slice(), k.exp())?).abs();
                if diff > max_abs_diff {
                    (max_abs_diff, worst_k) = (diff, k);
                }
            }
            let passed = max_abs_diff < *tol;
            let report = BsCheckReport {
                smile: nodes.slice().into(),
                spec: fourier.spec(),
                k_grid: fourier.k_grid,
                max_abs_diff,
                worst_k,
                tol: *tol,
                passed,
            };
            let failure = (!passed).then_some(CliError::CheckFailed { max: max_abs_diff, tol: *tol });
            Ok(Outcome { data: json(&report), failure })
        }
    }
}

fn validate(path: &Path, k_probe: f64) -> Result<Outcome, CliError> {
    let config = load_config(path)?;
    let (slice, conditions) = match config {
        SmileConfig::Ssvi { theta, rho, phi } => {
            let params = SsviParams::new(theta, rho, phi)?;
            (SmileSlice::Ssvi(params), Some(validate_ssvi(&params)))
        }
        SmileConfig::Bs { total_vol } => (SmileSlice::constant(total_vol)?, None),
    };
    let assumptions = verify_assumptions(&slice, k_probe);
    let ok = assumptions.ok && conditions.as_ref().is_none_or(|c| c.ok);
    let report = ValidateReport {
        smile: config,
        ok,
        conditions: conditions.clone(),
        assumptions: assumptions.clone(),
        wing_slopes: wing_slopes(&slice),
        moment_bounds: moment_bounds(&slice),
        surjectivity_thresholds: surjectivity_thresholds(&slice),
    };
    let failure = (!ok).then(|| {
        let failed = match conditions {
            Some(c) if !c.ok => c,
            _ => assumptions,
        };
        CliError::Core(smile_moments::Error::Arbitrageable(failed))
    });
    Ok(Outcome { data: json(&report), failure })
}
