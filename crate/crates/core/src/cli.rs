//! Command-line front end: run configuration, subcommands and their outputs.
//!
//! Every subcommand produces its machine-readable output as a string, so the
//! binary only has to route it to stdout or `--out`. Human-readable progress
//! and summaries go to stderr.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_eta, gather_evidence, Branch, ClassifierConfig, Evidence, SetClassification, Verdict,
};
use crate::error::Error;
use crate::model::{validate_w, ModelParams, PepsTensors, Sector, Sign};
use crate::oracle::{
    brute_transfer_spectrum, compare_spectra, stabilizer_check, SpectrumMismatch, StabilizerReport,
    MAX_ORACLE_LY,
};
use crate::spectra::{analyze, Epsilon, Kx, SclCurve, SpectrumSet, Tolerances};
use crate::transfer::MAX_LY;

/// Relative tolerance of the reduced-versus-unreduced spectrum comparison.
pub const VERIFY_REL_TOL: f64 = 1e-9;
/// Torus sizes checked by `verify` for the stabilizer equations.
pub const VERIFY_TORI: [(usize, usize); 2] = [(2, 2), (4, 4)];

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Model(Error),
    Config(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) => e.exit_code(),
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "invalid-parameter: {m}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DetectChoice {
    E,
    M,
    Both,
}

impl DetectChoice {
    pub fn sectors(self) -> Vec<Sector> {
        match self {
            DetectChoice::E => vec![Sector::E],
            DetectChoice::M => vec![Sector::M],
            DetectChoice::Both => vec![Sector::E, Sector::M],
        }
    }
}

impl FromStr for DetectChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Which k_x branch `classify` reads the periodicity from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchChoice {
    /// π when available at every perimeter, else 0.
    Auto,
    #[value(name = "0")]
    #[serde(rename = "0")]
    Zero,
    Pi,
}

impl FromStr for BranchChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Scl,
    Classify,
    Sweep,
    Verify,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sign_km: Sign,
    pub sign_ke: Sign,
    pub w: Vec<f64>,
    pub detect: DetectChoice,
    pub ly: Vec<usize>,
    pub branch: BranchChoice,
    pub tolerances: Tolerances,
    pub classifier: ClassifierConfig,
    pub out: Option<PathBuf>,
    /// Not part of the echo: results do not depend on it.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Plaquette sign K_m: +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub km: Option<Sign>,
    /// Star sign K_e: +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub ke: Option<Sign>,
    /// Deformation parameter(s) in (0, 1], comma separated.
    #[arg(long, value_delimiter = ',')]
    pub w: Option<Vec<f64>>,
    /// Perimeter(s) L_y, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ly: Option<Vec<usize>>,
    /// Anyon sector to detect: e, m, or both.
    #[arg(long)]
    pub detect: Option<DetectChoice>,
    /// k_x branch used by classify: auto, 0 or pi.
    #[arg(long)]
    pub branch: Option<BranchChoice>,
    /// Relative window around λ0 defining the ground set.
    #[arg(long)]
    pub deg_tol: Option<f64>,
    /// Relative bound on |Im λ| for an eigenvalue to count as real.
    #[arg(long)]
    pub real_tol: Option<f64>,
    /// Relative bound on |λ| for an eigenvalue to count as zero.
    #[arg(long)]
    pub zero_tol: Option<f64>,
    /// Residual below which the k_y → k_y+π periodicity counts as present.
    #[arg(long)]
    pub period_threshold: Option<f64>,
    /// Minimum fit quality for the splitting decay.
    #[arg(long)]
    pub min_fit_quality: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to SETSCOPE_JOBS, then to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "setscope",
    version,
    about = "Spectrum of correlation lengths and symmetry fractionalization for signed toric-code PEPS"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SCL minima per (L_y, k_y) as CSV.
    Scl(RunArgs),
    /// η_e / η_m verdicts as JSON.
    Classify(RunArgs),
    /// γ(0,0) and γ(π,π) over a w grid as CSV.
    Sweep(RunArgs),
    /// Cross-check against brute-force oracles.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        /// Corrupt one site tensor entry in the fast pipeline.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Config(format!("{key}: cannot parse '{value}': {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> CliResult<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl RunArgs {
    /// Parse a flat `key = value` file; `#` starts a comment.
    pub fn from_config_text(text: &str) -> CliResult<RunArgs> {
        let mut a = RunArgs::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key=value", n + 1))
            })?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            match key.as_str() {
                "km" | "sign_km" => a.km = Some(parse_value(&key, value)?),
                "ke" | "sign_ke" => a.ke = Some(parse_value(&key, value)?),
                "w" => a.w = Some(parse_list(&key, value)?),
                "ly" | "l_y" => a.ly = Some(parse_list(&key, value)?),
                "detect" => a.detect = Some(parse_value(&key, value)?),
                "branch" => a.branch = Some(parse_value(&key, value)?),
                "deg_tol" => a.deg_tol = Some(parse_value(&key, value)?),
                "real_tol" => a.real_tol = Some(parse_value(&key, value)?),
                "zero_tol" => a.zero_tol = Some(parse_value(&key, value)?),
                "period_threshold" => a.period_threshold = Some(parse_value(&key, value)?),
                "min_fit_quality" => a.min_fit_quality = Some(parse_value(&key, value)?),
                "out" => a.out = Some(PathBuf::from(value)),
                "jobs" => a.jobs = Some(parse_value(&key, value)?),
                other => {
                    return Err(CliError::Config(format!(
                        "config line {}: unknown key '{other}'",
                        n + 1
                    )))
                }
            }
        }
        Ok(a)
    }

    /// Fill unset fields from `base`.
    fn or(self, base: RunArgs) -> RunArgs {
        RunArgs {
            km: self.km.or(base.km),
            ke: self.ke.or(base.ke),
            w: self.w.or(base.w),
            ly: self.ly.or(base.ly),
            detect: self.detect.or(base.detect),
            branch: self.branch.or(base.branch),
            deg_tol: self.deg_tol.or(base.deg_tol),
            real_tol: self.real_tol.or(base.real_tol),
            zero_tol: self.zero_tol.or(base.zero_tol),
            period_threshold: self.period_threshold.or(base.period_threshold),
            min_fit_quality: self.min_fit_quality.or(base.min_fit_quality),
            out: self.out.or(base.out),
            jobs: self.jobs.or(base.jobs),
            config: self.config,
        }
    }

    /// Merge flags over the config file over per-command defaults, then validate.
    pub fn resolve(self, kind: CommandKind) -> CliResult<RunConfig> {
        let merged = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("config file {}: {e}", path.display()))
                })?;
                let file = RunArgs::from_config_text(&text)?;
                self.or(file)
            }
            None => self,
        };
        let env_jobs = match std::env::var("SETSCOPE_JOBS") {
            Ok(v) if !v.trim().is_empty() => Some(parse_value::<usize>("SETSCOPE_JOBS", &v)?),
            _ => None,
        };
        let default_ly = match kind {
            CommandKind::Scl | CommandKind::Sweep => vec![8],
            CommandKind::Classify => vec![6, 8, 10, 12],
            CommandKind::Verify => (2..=MAX_ORACLE_LY).collect(),
        };
        let default_w = match kind {
            CommandKind::Verify => vec![1.0, 0.9, 0.5],
            _ => vec![0.9],
        };
        let tol_default = Tolerances::default();
        let cls_default = ClassifierConfig::default();
        let cfg = RunConfig {
            sign_km: merged.km.unwrap_or(Sign::Plus),
            sign_ke: merged.ke.unwrap_or(Sign::Plus),
            w: merged.w.unwrap_or(default_w),
            detect: merged.detect.unwrap_or(match kind {
                CommandKind::Classify => DetectChoice::Both,
                _ => DetectChoice::E,
            }),
            ly: merged.ly.unwrap_or(default_ly),
            branch: merged.branch.unwrap_or(BranchChoice::Auto),
            tolerances: Tolerances {
                degeneracy: merged.deg_tol.unwrap_or(tol_default.degeneracy),
                real: merged.real_tol.unwrap_or(tol_default.real),
                zero: merged.zero_tol.unwrap_or(tol_default.zero),
            },
            classifier: ClassifierConfig {
                period_threshold: merged
                    .period_threshold
                    .unwrap_or(cls_default.period_threshold),
                min_fit_quality: merged
                    .min_fit_quality
                    .unwrap_or(cls_default.min_fit_quality),
            },
            out: merged.out,
            jobs: merged.jobs.or(env_jobs),
        };
        cfg.validate(kind)?;
        Ok(cfg)
    }
}

fn positive_tol(name: &'static str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in (0, 1), got {v}"),
        }
        .into())
    }
}

impl RunConfig {
    /// Check every precondition before any computation starts.
    pub fn validate(&self, kind: CommandKind) -> CliResult<()> {
        if self.w.is_empty() {
            return Err(CliError::Config("w: at least one value is required".into()));
        }
        for &w in &self.w {
            validate_w(w)?;
        }
        if self.ly.is_empty() {
            return Err(CliError::Config(
                "ly: at least one value is required".into(),
            ));
        }
        for &ly in &self.ly {
            if ly < 2 {
                return Err(Error::InvalidParameter {
                    name: "L_y",
                    reason: format!("must be at least 2, got {ly}"),
                }
                .into());
            }
            if ly > MAX_LY {
                return Err(Error::Capacity {
                    ly,
                    limit: MAX_LY,
                    what: "transfer operator",
                }
                .into());
            }
        }
        positive_tol("deg_tol", self.tolerances.degeneracy)?;
        positive_tol("real_tol", self.tolerances.real)?;
        positive_tol("zero_tol", self.tolerances.zero)?;
        if !(self.classifier.period_threshold.is_finite() && self.classifier.period_threshold > 0.0)
        {
            return Err(Error::InvalidParameter {
                name: "period_threshold",
                reason: format!("must be positive, got {}", self.classifier.period_threshold),
            }
            .into());
        }
        if !(0.0..=1.0).contains(&self.classifier.min_fit_quality) {
            return Err(Error::InvalidParameter {
                name: "min_fit_quality",
                reason: format!(
                    "must lie in [0, 1], got {}",
                    self.classifier.min_fit_quality
                ),
            }
            .into());
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidParameter {
                name: "jobs",
                reason: "must be at least 1".into(),
            }
            .into());
        }
        let single_w = matches!(kind, CommandKind::Scl | CommandKind::Classify);
        if single_w && self.w.len() != 1 {
            return Err(Error::InvalidParameter {
                name: "w",
                reason: format!("this command takes a single value, got {}", self.w.len()),
            }
            .into());
        }
        if kind != CommandKind::Classify && self.detect == DetectChoice::Both {
            return Err(Error::InvalidParameter {
                name: "detect",
                reason: "'both' is only meaningful for classify".into(),
            }
            .into());
        }
        match kind {
            CommandKind::Classify => {
                if let Some(&ly) = self.ly.iter().find(|&&ly| ly % 2 != 0) {
                    return Err(Error::UndefinedForOdd(ly).into());
                }
                let distinct = self.distinct_ly().len();
                if distinct < 3 {
                    return Err(Error::InsufficientSamples {
                        needed: 3,
                        got: distinct,
                    }
                    .into());
                }
            }
            CommandKind::Sweep => {
                if let Some(&ly) = self.ly.iter().find(|&&ly| ly % 2 != 0) {
                    return Err(Error::UndefinedForOdd(ly).into());
                }
            }
            CommandKind::Verify => {
                if let Some(&ly) = self.ly.iter().find(|&&ly| ly > MAX_ORACLE_LY) {
                    return Err(Error::OracleSizeCap(format!(
                        "L_y={ly} exceeds the oracle limit of {MAX_ORACLE_LY}"
                    ))
                    .into());
                }
            }
            CommandKind::Scl => {}
        }
        Ok(())
    }

    pub fn distinct_ly(&self) -> Vec<usize> {
        let mut ly = self.ly.clone();
        ly.sort_unstable();
        ly.dedup();
        ly
    }

    pub fn distinct_w(&self) -> Vec<f64> {
        let mut w = self.w.clone();
        w.sort_by(f64::total_cmp);
        w.dedup();
        w
    }

    fn params(&self, w: f64, detect: Sector) -> CliResult<ModelParams> {
        Ok(ModelParams::new(self.sign_km, self.sign_ke, w, detect)?)
    }

    fn sector(&self) -> Sector {
        self.detect.sectors()[0]
    }

    /// Thread count: explicit jobs, else all cores, capped by the `(L_y, k_y)` block count.
    pub fn threads(&self) -> usize {
        let blocks: usize = self.distinct_ly().iter().sum::<usize>() * self.w.len().max(1);
        let want = self.jobs.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
        want.clamp(1, blocks.max(1))
    }

    /// The resolved configuration as a config file that re-parses to the same run.
    pub fn to_config_text(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        s += &format!("km = {}\n", self.sign_km);
        s += &format!("ke = {}\n", self.sign_ke);
        s += &format!(
            "w = {}\n",
            join(self.w.iter().map(f64::to_string).collect())
        );
        s += &format!(
            "ly = {}\n",
            join(self.ly.iter().map(usize::to_string).collect())
        );
        s += &format!(
            "detect = {}\n",
            self.detect
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
        );
        s += &format!(
            "branch = {}\n",
            self.branch
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
        );
        s += &format!("deg_tol = {}\n", self.tolerances.degeneracy);
        s += &format!("real_tol = {}\n", self.tolerances.real);
        s += &format!("zero_tol = {}\n", self.tolerances.zero);
        s += &format!("period_threshold = {}\n", self.classifier.period_threshold);
        s += &format!("min_fit_quality = {}\n", self.classifier.min_fit_quality);
        if let Some(out) = &self.out {
            s += &format!("out = {}\n", out.display());
        }
        s
    }
}

/// Run `f` on a pool sized for `cfg`.
pub fn with_pool<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads())
        .build()
        .map_err(|e| CliError::Config(format!("jobs: cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(io::Error::other(e))
}

/// SCL minima for every configured perimeter.
pub fn cmd_scl(cfg: &RunConfig) -> CliResult<String> {
    let w = cfg.w[0];
    let params = cfg.params(w, cfg.sector())?;
    let lys = cfg.distinct_ly();
    let curves = lys
        .par_iter()
        .map(|&ly| analyze(&params, ly, &cfg.tolerances).map(|a| a.curve))
        .collect::<Result<Vec<_>, _>>()?;
    for c in &curves {
        eprintln!(
            "L_y={}: lambda0={} ({} points)",
            c.ly,
            c.lambda0,
            c.points.len()
        );
    }
    scl_csv(&curves)
}

/// Serialize SCL curves as CSV, rows in `(L_y, k_y_index, k_x)` order.
pub fn scl_csv(curves: &[SclCurve]) -> CliResult<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "L_y",
        "k_y_index",
        "k_y",
        "k_x",
        "epsilon",
        "lambda_re",
        "lambda_im",
        "is_ground",
    ])
    .map_err(csv_error)?;
    for c in curves {
        for p in &c.points {
            let k_y = 2.0 * std::f64::consts::PI * p.k_index as f64 / c.ly as f64;
            let (eps, re, im) = match p.epsilon {
                Epsilon::Finite(e) => (fmt_f64(e), fmt_f64(p.lambda.re), fmt_f64(p.lambda.im)),
                Epsilon::Infinite => (String::new(), "0".to_string(), "0".to_string()),
            };
            wtr.write_record([
                c.ly.to_string(),
                p.k_index.to_string(),
                fmt_f64(k_y),
                p.kx.to_string(),
                eps,
                re,
                im,
                p.is_ground.to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    let bytes = wtr.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    #[serde(rename = "L_y")]
    pub ly: usize,
    pub residual: f64,
    pub splitting: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub slope: f64,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorReport {
    pub branch: Option<Branch>,
    pub residuals: Vec<ResidualEntry>,
    pub decay_fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thresholds {
    pub period_threshold: f64,
    pub min_fit_quality: f64,
    pub degeneracy: f64,
    pub real: f64,
    pub zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_e: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_m: Option<Verdict>,
    /// Per-sector evidence keyed `e` / `m`.
    pub residuals: std::collections::BTreeMap<String, Vec<ResidualEntry>>,
    pub decay_fit: std::collections::BTreeMap<String, Option<FitSummary>>,
    pub sectors: std::collections::BTreeMap<String, SectorReport>,
    pub thresholds: Thresholds,
    pub config: RunConfig,
}

fn sector_evidence(cfg: &RunConfig, sector: Sector) -> CliResult<crate::Result<Evidence>> {
    let params = cfg.params(cfg.w[0], sector)?;
    let analyses = cfg
        .distinct_ly()
        .par_iter()
        .map(|&ly| analyze(&params, ly, &cfg.tolerances).map(|a| a.curve))
        .collect::<Vec<_>>();
    let mut curves = Vec::with_capacity(analyses.len());
    for a in analyses {
        match a {
            Ok(c) => curves.push(c),
            // a numerical failure aborts the run; anything else leaves the verdict open
            Err(e @ Error::NumericalFailure { .. }) => return Err(e.into()),
            Err(e) => return Ok(Err(e)),
        }
    }
    Ok(match cfg.branch {
        BranchChoice::Auto => gather_evidence(&curves),
        BranchChoice::Zero => forced_branch(&curves, Branch::Zero),
        BranchChoice::Pi => forced_branch(&curves, Branch::Pi),
    })
}

fn forced_branch(curves: &[SclCurve], branch: Branch) -> crate::Result<Evidence> {
    let kx = branch.kx();
    if let Some(c) = curves.iter().find(|c| !c.has_branch(kx)) {
        return Err(Error::BranchUnavailable {
            branch: kx.label(),
            ly: c.ly,
        });
    }
    // with the branch present everywhere, the automatic choice is π whenever it exists
    let mut ev = gather_evidence(curves)?;
    if ev.branch != branch {
        let residuals = curves
            .iter()
            .map(|c| crate::classify::periodicity_residual(c, branch))
            .collect::<crate::Result<Vec<_>>>()?;
        let splittings = curves
            .iter()
            .map(|c| Ok((c.ly, crate::classify::splitting(c, branch)?)))
            .collect::<crate::Result<Vec<_>>>()?;
        let fit = crate::classify::fit_splitting_decay(&splittings);
        ev = Evidence {
            branch,
            residuals,
            splittings,
            fit_error: fit.as_ref().err().map(|e| e.to_string()),
            decay_fit: fit.ok(),
        };
    }
    Ok(ev)
}

fn sector_report(run: &crate::Result<Evidence>) -> SectorReport {
    match run {
        Ok(ev) => SectorReport {
            branch: Some(ev.branch),
            residuals: ev
                .residuals
                .iter()
                .zip(&ev.splittings)
                .map(|(r, &(_, d))| ResidualEntry {
                    ly: r.ly,
                    residual: r.residual,
                    splitting: d,
                })
                .collect(),
            decay_fit: ev.decay_fit.as_ref().map(|f| FitSummary {
                slope: f.slope,
                quality: f.quality,
            }),
            note: ev.fit_error.clone(),
        },
        Err(e) => SectorReport {
            branch: None,
            residuals: Vec::new(),
            decay_fit: None,
            note: Some(e.to_string()),
        },
    }
}

/// Verdicts and evidence for the configured sectors.
pub fn classify_report(cfg: &RunConfig) -> CliResult<ClassifyReport> {
    let sectors = cfg.detect.sectors();
    let mut e_run = None;
    let mut m_run = None;
    for s in sectors {
        let ev = sector_evidence(cfg, s)?;
        match s {
            Sector::E => e_run = Some(ev),
            Sector::M => m_run = Some(ev),
        }
    }
    let cls: SetClassification = classify_eta(e_run.as_ref(), m_run.as_ref(), &cfg.classifier);
    let mut residuals = std::collections::BTreeMap::new();
    let mut decay_fit = std::collections::BTreeMap::new();
    let mut sectors = std::collections::BTreeMap::new();
    for (name, run) in [("e", &e_run), ("m", &m_run)] {
        if let Some(run) = run {
            let rep = sector_report(run);
            residuals.insert(name.to_string(), rep.residuals.clone());
            decay_fit.insert(name.to_string(), rep.decay_fit.clone());
            sectors.insert(name.to_string(), rep);
        }
    }
    Ok(ClassifyReport {
        eta_e: cls.eta_e,
        eta_m: cls.eta_m,
        residuals,
        decay_fit,
        sectors,
        thresholds: Thresholds {
            period_threshold: cfg.classifier.period_threshold,
            min_fit_quality: cfg.classifier.min_fit_quality,
            degeneracy: cfg.tolerances.degeneracy,
            real: cfg.tolerances.real,
            zero: cfg.tolerances.zero,
        },
        config: cfg.clone(),
    })
}

pub fn cmd_classify(cfg: &RunConfig) -> CliResult<String> {
    let report = classify_report(cfg)?;
    if let Some(v) = report.eta_e {
        eprintln!("eta_e = {v}");
    }
    if let Some(v) = report.eta_m {
        eprintln!("eta_m = {v}");
    }
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    Ok(s)
}

/// γ(0,0) and γ(π,π) over the `(w, L_y)` grid, rows sorted ascending in `w` then `L_y`.
pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<String> {
    let sector = cfg.sector();
    let items: Vec<(f64, usize)> = cfg
        .distinct_w()
        .into_iter()
        .flat_map(|w| cfg.distinct_ly().into_iter().map(move |ly| (w, ly)))
        .collect();
    let rows = items
        .par_iter()
        .map(|&(w, ly)| -> CliResult<[String; 4]> {
            let params = cfg.params(w, sector)?;
            let a = analyze(&params, ly, &cfg.tolerances)?;
            let find = |k: usize, kx: Kx| {
                a.gaps
                    .iter()
                    .find(|g| g.k_index == k && g.kx == kx)
                    .map(|g| g.gamma)
            };
            let field = |g: Option<Epsilon>| match g {
                Some(Epsilon::Finite(v)) => fmt_f64(v),
                _ => String::new(),
            };
            Ok([
                fmt_f64(w),
                ly.to_string(),
                field(find(0, Kx::Zero)),
                field(find(ly / 2, Kx::Pi)),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["w", "L_y", "gamma_00", "gamma_pipi"])
        .map_err(csv_error)?;
    for r in rows {
        wtr.write_record(r).map_err(csv_error)?;
    }
    let bytes = wtr.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCheck {
    pub sign_km: i8,
    pub sign_ke: i8,
    pub detect: Sector,
    pub w: f64,
    #[serde(rename = "L_y")]
    pub ly: usize,
    pub support_coincident: bool,
    pub compared: usize,
    pub mismatches: Vec<SpectrumMismatch>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub fault_injected: bool,
    pub spectra: Vec<SpectrumCheck>,
    pub stabilizers: Vec<StabilizerReport>,
    pub config: RunConfig,
}

/// Compare the fast pipeline with the oracles for every configured point.
pub fn verify_report(cfg: &RunConfig, inject_fault: bool) -> CliResult<VerifyReport> {
    let sector = cfg.sector();
    let items: Vec<(f64, usize)> = cfg
        .distinct_w()
        .into_iter()
        .flat_map(|w| cfg.distinct_ly().into_iter().map(move |ly| (w, ly)))
        .collect();
    let spectra = items
        .par_iter()
        .map(|&(w, ly)| -> CliResult<SpectrumCheck> {
            let params = cfg.params(w, sector)?;
            let mut tensors = PepsTensors::build(&params)?;
            if inject_fault {
                let old = tensors.site.get(0, 0, 0, 0);
                tensors.site = tensors.site.clone().with_entry(0, 0, 0, 0, old + 0.5);
            }
            let fast = SpectrumSet::compute_with_tensors(&params, &tensors, ly)?;
            let fast: Vec<_> = fast.all_eigenvalues().collect();
            let oracle = brute_transfer_spectrum(&params, ly)?;
            let cmp = compare_spectra(&oracle.eigenvalues, &fast, VERIFY_REL_TOL);
            let passed = cmp.passed() && oracle.support_coincident;
            Ok(SpectrumCheck {
                sign_km: cfg.sign_km.value(),
                sign_ke: cfg.sign_ke.value(),
                detect: sector,
                w,
                ly,
                support_coincident: oracle.support_coincident,
                compared: cmp.compared,
                mismatches: cmp.mismatches,
                passed,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let stab_params = ModelParams::new(cfg.sign_km, cfg.sign_ke, 1.0, Sector::E)?;
    let stabilizers = VERIFY_TORI
        .par_iter()
        .map(|&(lx, ly)| stabilizer_check(&stab_params, lx, ly))
        .collect::<crate::Result<Vec<_>>>()?;
    let passed = spectra.iter().all(|s| s.passed) && stabilizers.iter().all(|s| s.passed());
    Ok(VerifyReport {
        passed,
        fault_injected: inject_fault,
        spectra,
        stabilizers,
        config: cfg.clone(),
    })
}

/// Returns the JSON report and whether everything passed.
pub fn cmd_verify(cfg: &RunConfig, inject_fault: bool) -> CliResult<(String, bool)> {
    let report = verify_report(cfg, inject_fault)?;
    for s in &report.spectra {
        if s.passed {
            continue;
        }
        for m in &s.mismatches {
            eprintln!(
                "FAIL spectrum km={} ke={} detect={} w={} L_y={} eigenvalue index {}: expected {}{:+}i, nearest {}",
                s.sign_km,
                s.sign_ke,
                s.detect,
                s.w,
                s.ly,
                m.index,
                m.expected.0,
                m.expected.1,
                m.nearest
                    .map_or("none".to_string(), |(re, im)| format!("{re}{im:+}i")),
            );
        }
        if !s.support_coincident {
            eprintln!(
                "FAIL support km={} ke={} w={} L_y={}: outside the label-coincident subspace",
                s.sign_km, s.sign_ke, s.w, s.ly
            );
        }
    }
    for st in &report.stabilizers {
        if !st.passed() {
            eprintln!(
                "FAIL stabilizers {}x{} km={} ke={}: {} violations, support {} of {}",
                st.lx,
                st.ly,
                st.sign_km,
                st.sign_ke,
                st.violation_count,
                st.support_size,
                st.expected_support_size
            );
        }
    }
    eprintln!(
        "verify: {} ({} spectrum checks, {} stabilizer checks)",
        if report.passed { "pass" } else { "FAIL" },
        report.spectra.len(),
        report.stabilizers.len()
    );
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    Ok((s, report.passed))
}

/// Write `text` to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Execute a parsed command line; returns the process exit code on success.
pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Scl(args) => {
            let cfg = args.resolve(CommandKind::Scl)?;
            let out = with_pool(&cfg, || cmd_scl(&cfg))??;
            emit(cfg.out.as_deref(), &out)?;
            Ok(0)
        }
        Command::Classify(args) => {
            let cfg = args.resolve(CommandKind::Classify)?;
            let out = with_pool(&cfg, || cmd_classify(&cfg))??;
            emit(cfg.out.as_deref(), &out)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let cfg = args.resolve(CommandKind::Sweep)?;
            let out = with_pool(&cfg, || cmd_sweep(&cfg))??;
            emit(cfg.out.as_deref(), &out)?;
            Ok(0)
        }
        Command::Verify { run, inject_fault } => {
            let cfg = run.resolve(CommandKind::Verify)?;
            let (out, passed) = with_pool(&cfg, || cmd_verify(&cfg, inject_fault))??;
            emit(cfg.out.as_deref(), &out)?;
            Ok(if passed { 0 } else { 1 })
        }
    }
}
