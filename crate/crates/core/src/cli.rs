//! Config-driven experiment runner behind the `fbmerg` binary.
//!
//! A config is a TOML file with a `kind`, a `[params]` table typed by the kind
//! and an optional `[run]` table:
//!
//! ```toml
//! kind = "solve"
//!
//! [params]
//! model = "planar"
//! x0 = [1.0, 0.0]
//! horizon = 4.0
//! dt = 1e-3
//! jacobian = true
//!
//! [run]
//! seed = 3
//! out_dir = "runs/solve"
//! ```
//!
//! Unknown keys are rejected. Every artifact is a deterministic function of
//! the config, so reruns produce byte-identical CSV files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ergodics::{
    bel_gradient, lyapunov_check, stationary_estimate, steer_control, strong_feller_diagnostic, subcoupling_build,
    uniqueness_diagnostic, Ball, BelOptions, ChainOptions, Cutoff, FellerOptions, LyapunovOptions, NoiseOptions,
    Observable, SubcouplingOptions,
};
use crate::fbm::{conditional_continue, sample_fbm_with, stationary_window, FbmMethod};
use crate::frac::HurstContext;
use crate::paths::{read_csv, write_bin, write_csv, Grid, NoiseWindow, PathFormat, SampledPath};
use crate::rng::RngSeed;
use crate::sde::{solve_sde_with, ModelSpec, SolveOptions};
use crate::verify::{self, CheckResult, Suite};

fn default_hurst() -> f64 {
    0.7
}
fn default_dim() -> usize {
    1
}
fn default_dt() -> f64 {
    1.0 / 64.0
}
fn default_past() -> f64 {
    16.0
}
fn default_one() -> f64 {
    1.0
}
fn default_two() -> f64 {
    2.0
}

/// Operation and its parameters; the `kind` names the operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum Experiment {
    #[serde(rename_all = "snake_case")]
    SampleFbm {
        #[serde(default = "default_hurst")]
        hurst: f64,
        /// Number of grid points, `t = 0` included.
        n: usize,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_method")]
        method: FbmMethod,
    },
    Continue {
        #[serde(default = "default_hurst")]
        hurst: f64,
        /// CSV path; a window ending at `t = 0` is used as is, a forward path is
        /// re-anchored at its last time. A stationary window is drawn when absent.
        #[serde(default)]
        past: Option<PathBuf>,
        #[serde(default = "default_past")]
        past_horizon: f64,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_one")]
        horizon: f64,
    },
    Solve {
        model: String,
        #[serde(default)]
        dim: Option<usize>,
        x0: Vec<f64>,
        #[serde(default = "default_hurst")]
        hurst: f64,
        #[serde(default = "default_one")]
        horizon: f64,
        #[serde(default = "default_solve_dt")]
        dt: f64,
        #[serde(default)]
        jacobian: bool,
        #[serde(default)]
        inverse: bool,
    },
    Lyapunov {
        model: String,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default = "default_hurst")]
        hurst: f64,
        #[serde(default = "default_two")]
        p: f64,
        #[serde(default = "default_one")]
        t: f64,
        x0s: Vec<Vec<f64>>,
        n: usize,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_past")]
        past_horizon: f64,
    },
    Stationary {
        model: String,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default = "default_hurst")]
        hurst: f64,
        x0: Vec<f64>,
        burn_in: f64,
        sample_horizon: f64,
        #[serde(default = "default_chain_dt")]
        dt: f64,
        #[serde(default = "default_past")]
        past_horizon: f64,
        #[serde(default = "default_one")]
        step: f64,
        /// Second start: runs the uniqueness diagnostic instead of one chain.
        #[serde(default)]
        compare_with: Option<Vec<f64>>,
        #[serde(default = "default_replicas")]
        replicas: usize,
    },
    StrongFeller {
        model: String,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default = "default_hurst")]
        hurst: f64,
        x: Vec<f64>,
        y: Vec<f64>,
        #[serde(default = "default_one")]
        horizon: f64,
        n: usize,
        #[serde(default = "default_fine_dt")]
        dt: f64,
        #[serde(default = "default_past")]
        past_horizon: f64,
    },
    Bel {
        model: String,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default = "default_hurst")]
        hurst: f64,
        phi: String,
        x: Vec<f64>,
        xi: Vec<f64>,
        n: usize,
        #[serde(default = "default_two")]
        horizon: f64,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "default_past")]
        past_horizon: f64,
        /// Cutoff level `R` applied to both seminorms.
        #[serde(default)]
        cutoff: Option<f64>,
    },
    Steer {
        model: String,
        #[serde(default)]
        dim: Option<usize>,
        x0: Vec<f64>,
        x1: Vec<f64>,
        #[serde(default = "default_one")]
        horizon: f64,
        #[serde(default = "default_steer_dt")]
        dt: f64,
    },
    Subcoupling {
        #[serde(default = "default_hurst")]
        hurst: f64,
        #[serde(default = "default_one")]
        s: f64,
        u_center: Vec<f64>,
        u_radius: f64,
        v_center: Vec<f64>,
        v_radius: f64,
        #[serde(default = "default_nodes")]
        nodes: usize,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default = "default_coupling_past")]
        past_horizon: f64,
        #[serde(default = "default_dt")]
        dt: f64,
    },
    Verify {
        suite: Suite,
    },
}

fn default_method() -> FbmMethod {
    FbmMethod::Circulant
}
fn default_solve_dt() -> f64 {
    1e-3
}
fn default_chain_dt() -> f64 {
    1.0 / 16.0
}
fn default_fine_dt() -> f64 {
    1.0 / 128.0
}
fn default_steer_dt() -> f64 {
    1e-4
}
fn default_replicas() -> usize {
    300
}
fn default_nodes() -> usize {
    4096
}
fn default_coupling_past() -> f64 {
    8.0
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::SampleFbm { .. } => "sample-fbm",
            Experiment::Continue { .. } => "continue",
            Experiment::Solve { .. } => "solve",
            Experiment::Lyapunov { .. } => "lyapunov",
            Experiment::Stationary { .. } => "stationary",
            Experiment::StrongFeller { .. } => "strong-feller",
            Experiment::Bel { .. } => "bel",
            Experiment::Steer { .. } => "steer",
            Experiment::Subcoupling { .. } => "subcoupling",
            Experiment::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub format: PathFormat,
    /// File name of the main artifact inside `out_dir`.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 0, out_dir: default_out_dir(), format: PathFormat::Csv, out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default)]
    pub run: RunOptions,
}

/// Command-line overrides; set fields win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<PathFormat>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self { experiment, run: RunOptions::default() }
    }

    /// Parses a TOML config, reporting the offending key on failure.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_error("<file>", e.message()))?;
        for key in table.keys() {
            if !matches!(key.as_str(), "kind" | "params" | "run") {
                return Err(config_error(key, "unknown top-level key (expected kind, params, run)"));
            }
        }
        let kind = table.get("kind").ok_or_else(|| config_error("kind", "missing"))?;
        let mut exp = toml::Table::new();
        exp.insert("kind".into(), kind.clone());
        exp.insert("params".into(), table.get("params").cloned().unwrap_or(toml::Value::Table(toml::Table::new())));
        let experiment = Experiment::deserialize(toml::Value::Table(exp)).map_err(|e| {
            let msg = e.message().to_string();
            let key = offending_key(&msg).map(|k| format!("params.{k}")).unwrap_or_else(|| "params".into());
            config_error(&key, msg)
        })?;
        reject_unknown_params(&experiment, table.get("params"))?;
        let run = match table.get("run") {
            Some(v) => RunOptions::deserialize(v.clone()).map_err(|e| {
                let msg = e.message().to_string();
                let key = offending_key(&msg).map(|k| format!("run.{k}")).unwrap_or_else(|| "run".into());
                config_error(&key, msg)
            })?,
            None => RunOptions::default(),
        };
        let cfg = Self { experiment, run };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_error("<config>", e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(d) = &o.out_dir {
            self.run.out_dir = d.clone();
        }
        if let Some(f) = o.format {
            self.run.format = f;
        }
    }

    /// Parameter checks that need no computation.
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_error(&format!("params.{key}"), format!("must be positive, got {v}")))
            }
        };
        let hurst_ok = |h: f64| {
            if h > 0.5 && h < 1.0 {
                Ok(())
            } else {
                Err(config_error("params.hurst", format!("must lie in (1/2, 1), got {h}")))
            }
        };
        let model_ok = |name: &str, dim: Option<usize>| {
            ModelSpec::by_name(name, dim).map(|_| ()).map_err(|e| config_error("params.model", e.to_string()))
        };
        match &self.experiment {
            Experiment::SampleFbm { hurst, n, dt, dim, .. } => {
                hurst_ok(*hurst)?;
                positive("dt", *dt)?;
                if *n < 2 {
                    return Err(config_error("params.n", "need at least two grid points"));
                }
                if *dim == 0 {
                    return Err(config_error("params.dim", "must be at least 1"));
                }
            }
            Experiment::Continue { hurst, past_horizon, dt, horizon, .. } => {
                hurst_ok(*hurst)?;
                positive("past_horizon", *past_horizon)?;
                positive("dt", *dt)?;
                positive("horizon", *horizon)?;
            }
            Experiment::Solve { model, dim, hurst, horizon, dt, .. } => {
                model_ok(model, *dim)?;
                hurst_ok(*hurst)?;
                positive("horizon", *horizon)?;
                positive("dt", *dt)?;
            }
            Experiment::Lyapunov { model, dim, hurst, p, t, n, dt, past_horizon, .. } => {
                model_ok(model, *dim)?;
                hurst_ok(*hurst)?;
                positive("p", *p)?;
                positive("t", *t)?;
                positive("dt", *dt)?;
                positive("past_horizon", *past_horizon)?;
                if *n < 2 {
                    return Err(config_error("params.n", "need at least two samples"));
                }
            }
            Experiment::Stationary { model, dim, hurst, burn_in, sample_horizon, dt, past_horizon, step, .. } => {
                model_ok(model, *dim)?;
                hurst_ok(*hurst)?;
                positive("sample_horizon", *sample_horizon)?;
                positive("dt", *dt)?;
                positive("past_horizon", *past_horizon)?;
                positive("step", *step)?;
                if *burn_in < 0.0 {
                    return Err(config_error("params.burn_in", "must be non-negative"));
                }
            }
            Experiment::StrongFeller { model, dim, hurst, horizon, dt, past_horizon, .. } => {
                model_ok(model, *dim)?;
                hurst_ok(*hurst)?;
                positive("horizon", *horizon)?;
                positive("dt", *dt)?;
                positive("past_horizon", *past_horizon)?;
            }
            Experiment::Bel { model, dim, hurst, phi, horizon, dt, past_horizon, cutoff, .. } => {
                model_ok(model, *dim)?;
                hurst_ok(*hurst)?;
                phi.parse::<Observable>().map_err(|e| config_error("params.phi", e.to_string()))?;
                positive("horizon", *horizon)?;
                positive("dt", *dt)?;
                positive("past_horizon", *past_horizon)?;
                if let Some(r) = cutoff {
                    positive("cutoff", *r)?;
                }
            }
            Experiment::Steer { model, dim, horizon, dt, .. } => {
                model_ok(model, *dim)?;
                positive("horizon", *horizon)?;
                positive("dt", *dt)?;
            }
            Experiment::Subcoupling { hurst, s, u_radius, v_radius, past_horizon, dt, .. } => {
                hurst_ok(*hurst)?;
                positive("s", *s)?;
                positive("u_radius", *u_radius)?;
                positive("v_radius", *v_radius)?;
                positive("past_horizon", *past_horizon)?;
                positive("dt", *dt)?;
            }
            Experiment::Verify { .. } => {}
        }
        Ok(())
    }
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), message: message.into() }
}

fn offending_key(msg: &str) -> Option<String> {
    for marker in ["unknown field `", "missing field `"] {
        if let Some(i) = msg.find(marker) {
            let rest = &msg[i + marker.len()..];
            return rest.find('`').map(|j| rest[..j].to_string());
        }
    }
    None
}

/// Adjacently tagged variants ignore unknown keys; compare against the
/// serialized field set instead.
fn reject_unknown_params(experiment: &Experiment, given: Option<&toml::Value>) -> Result<()> {
    let Some(toml::Value::Table(given)) = given else {
        return Ok(());
    };
    let known = serde_json::to_value(experiment)?;
    let known = known.get("params").and_then(|p| p.as_object()).cloned().unwrap_or_default();
    for key in given.keys() {
        if !known.contains_key(key) {
            let mut expected: Vec<&String> = known.keys().collect();
            expected.sort();
            let list = expected.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ");
            return Err(config_error(
                &format!("params.{key}"),
                format!("unknown key for kind `{}` (expected one of: {list})", experiment.kind()),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub versions: BTreeMap<String, String>,
    pub timing: Timing,
    pub checks: Vec<CheckResult>,
    pub seeds: BTreeMap<String, RngSeed>,
    /// Operation-specific numbers.
    pub results: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

/// Named seeds of one run, all derived from the run seed.
struct SeedRegistry {
    root: RngSeed,
    named: BTreeMap<String, RngSeed>,
}

impl SeedRegistry {
    fn new(seed: u64) -> Self {
        Self { root: RngSeed::new(seed), named: BTreeMap::new() }
    }

    fn get(&mut self, name: &str) -> RngSeed {
        let index = self.named.len() as u64;
        *self.named.entry(name.to_string()).or_insert_with(|| self.root.substream(index))
    }
}

struct Artifacts {
    dir: PathBuf,
    format: PathFormat,
    main: Option<PathBuf>,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn path(&self, default: &str, main: bool) -> PathBuf {
        match (&self.main, main) {
            (Some(m), true) => self.dir.join(m),
            _ => self.dir.join(default),
        }
    }

    fn sampled(&mut self, stem: &str, path: &SampledPath, main: bool) -> Result<()> {
        let file = self.path(&format!("{stem}.{}", self.format.extension()), main);
        let out = BufWriter::new(fs::File::create(&file)?);
        match self.format {
            PathFormat::Csv => write_csv(path, out)?,
            PathFormat::Bin => write_bin(path, out)?,
        }
        self.written.push(file);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str, main: bool) -> Result<()> {
        let file = self.path(name, main);
        fs::write(&file, body)?;
        self.written.push(file);
        Ok(())
    }

    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>], main: bool) -> Result<()> {
        let mut s = header.join(",");
        s.push('\n');
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        self.text(name, &s, main)
    }
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        (env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("report-schema".to_string(), "1".to_string()),
    ])
}

/// Runs one experiment, writing its artifacts and `report.json` into `out_dir`.
///
/// Artifacts written before a runtime failure are kept.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    fs::create_dir_all(&config.run.out_dir)?;
    let mut seeds = SeedRegistry::new(config.run.seed);
    let mut art = Artifacts {
        dir: config.run.out_dir.clone(),
        format: config.run.format,
        main: config.run.out.clone(),
        written: Vec::new(),
    };
    let (checks, results) = dispatch(&config.experiment, &mut seeds, &mut art)?;
    let mut report = RunReport {
        config: config.clone(),
        versions: versions(),
        timing: Timing { wall_seconds: start.elapsed().as_secs_f64() },
        checks,
        seeds: seeds.named,
        results,
        artifacts: Vec::new(),
    };
    let report_file = config.run.out_dir.join("report.json");
    art.written.push(report_file.clone());
    report.artifacts = art.written;
    let mut out = BufWriter::new(fs::File::create(&report_file)?);
    serde_json::to_writer_pretty(&mut out, &report)?;
    out.write_all(b"\n")?;
    Ok(report)
}

fn model(name: &str, dim: Option<usize>) -> Result<ModelSpec> {
    ModelSpec::by_name(name, dim)
}

fn json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

fn dispatch(
    exp: &Experiment,
    seeds: &mut SeedRegistry,
    art: &mut Artifacts,
) -> Result<(Vec<CheckResult>, serde_json::Value)> {
    match exp {
        Experiment::SampleFbm { hurst, n, dt, dim, method } => {
            let grid = Grid::new(0.0, *dt, *n)?;
            let sample = sample_fbm_with(&grid, *hurst, *dim, seeds.get("fbm"), *method)?;
            art.sampled("fbm", &sample.path, true)?;
            let anchored = sample.path.row(0).iter().all(|&v| v == 0.0);
            Ok((
                vec![CheckResult::holds("path vanishes at t = 0", anchored)],
                serde_json::json!({ "rows": sample.path.len(), "method": method }),
            ))
        }
        Experiment::Continue { hurst, past, past_horizon, dt, dim, horizon } => {
            let ctx = HurstContext::new(*hurst)?;
            let window = match past {
                Some(file) => {
                    let path = read_csv(fs::File::open(file)?)?;
                    if path.grid().end().abs() < 1e-9 * path.grid().dt() {
                        NoiseWindow::from_path(&path)?
                    } else {
                        NoiseWindow::from_forward_path(&path)?
                    }
                }
                None => stationary_window(*past_horizon, *dt, *hurst, *dim, &mut seeds.get("past").rng())?,
            };
            let future = Grid::forward(*horizon, window.dt())?;
            let c = conditional_continue(&window, &future, &ctx, seeds.get("continuation"))?;
            art.sampled("past", &window.to_path(), false)?;
            art.sampled("continuation", &c.path, true)?;
            art.sampled("mean", &c.mean, false)?;
            let starts = c.path.row(0).iter().all(|&v| v == 0.0);
            Ok((
                vec![CheckResult::holds("continuation starts at the window's last value", starts)],
                serde_json::json!({ "past_horizon": window.horizon(), "rows": c.path.len() }),
            ))
        }
        Experiment::Solve { model: name, dim, x0, hurst, horizon, dt, jacobian, inverse } => {
            let m = model(name, *dim)?;
            let grid = Grid::forward(*horizon, *dt)?;
            let driver = sample_fbm_with(&grid, *hurst, m.dim(), seeds.get("driver"), FbmMethod::Circulant)?.path;
            let opts = SolveOptions { jacobian: *jacobian || *inverse, inverse: *inverse, error_estimate: true };
            let tr = solve_sde_with(&m, x0, &driver, opts)?;
            let file = art.path("trajectory.csv", true);
            match art.format {
                PathFormat::Csv => tr.write_csv(BufWriter::new(fs::File::create(&file)?))?,
                PathFormat::Bin => {
                    let file = art.path("trajectory.bin", true);
                    write_bin(&tr.state, BufWriter::new(fs::File::create(&file)?))?;
                    art.written.push(file);
                }
            }
            if art.format == PathFormat::Csv {
                art.written.push(file);
            }
            art.sampled("driver", &driver, false)?;
            Ok((
                Vec::new(),
                serde_json::json!({
                    "endpoint": tr.endpoint(),
                    "error_estimate": tr.error_estimate,
                    "inverse_defect": tr.inverse_defect(),
                }),
            ))
        }
        Experiment::Lyapunov { model: name, dim, hurst, p, t, x0s, n, dt, past_horizon } => {
            let m = model(name, *dim)?;
            let ctx = HurstContext::new(*hurst)?;
            let opts = LyapunovOptions {
                noise: NoiseOptions { dt: *dt, past_horizon: *past_horizon },
                ..Default::default()
            };
            let r = lyapunov_check(&m, *p, *t, x0s, *n, &ctx, seeds.get("ensemble"), &opts)?;
            let rows: Vec<Vec<f64>> =
                r.per_x0.iter().map(|row| vec![row.x0_norm_p, row.moment, row.stderr, row.diverged as f64]).collect();
            art.table("lyapunov.csv", &["x0_norm_p", "moment", "stderr", "diverged"], &rows, true)?;
            let upper = r.xi_ci95().1;
            Ok((vec![CheckResult::at_most("upper 95% limit of xi below 1", upper, 1.0 - 1e-12)], json(&r)?))
        }
        Experiment::Stationary {
            model: name,
            dim,
            hurst,
            x0,
            burn_in,
            sample_horizon,
            dt,
            past_horizon,
            step,
            compare_with,
            replicas,
        } => {
            let m = model(name, *dim)?;
            let ctx = HurstContext::new(*hurst)?;
            let opts = ChainOptions { dt: *dt, past_horizon: *past_horizon, step: *step, ..Default::default() };
            match compare_with {
                None => {
                    let r = stationary_estimate(&m, x0, *burn_in, *sample_horizon, &ctx, seeds.get("chain"), &opts)?;
                    let rows: Vec<Vec<f64>> = r
                        .times
                        .iter()
                        .zip(r.measure.samples())
                        .map(|(t, x)| std::iter::once(*t).chain(x.iter().copied()).collect())
                        .collect();
                    let mut header = vec!["time".to_string()];
                    header.extend((1..=m.dim()).map(|i| format!("x_{i}")));
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    art.table("samples.csv", &header, &rows, true)?;
                    let moments: Vec<Vec<f64>> = r.moments.iter().map(|m| vec![m.p, m.value, m.stderr]).collect();
                    art.table("moments.csv", &["p", "moment", "stderr"], &moments, false)?;
                    Ok((Vec::new(), serde_json::json!({ "moments": r.moments, "samples": r.times.len() })))
                }
                Some(xb) => {
                    let r = uniqueness_diagnostic(
                        &m,
                        x0,
                        xb,
                        *burn_in,
                        *sample_horizon,
                        *replicas,
                        &ctx,
                        seeds.get("replicas"),
                        &opts,
                    )?;
                    let rows: Vec<Vec<f64>> = r
                        .samples_a
                        .iter()
                        .zip(&r.samples_b)
                        .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
                        .collect();
                    let mut header: Vec<String> = (1..=m.dim()).map(|i| format!("a_{i}")).collect();
                    header.extend((1..=m.dim()).map(|i| format!("b_{i}")));
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    art.table("final_states.csv", &header, &rows, true)?;
                    let checks = r
                        .ks
                        .iter()
                        .enumerate()
                        .map(|(j, &ks)| CheckResult::at_most(format!("KS distance of x_{}", j + 1), ks, r.critical))
                        .collect();
                    Ok((
                        checks,
                        serde_json::json!({ "ks": r.ks, "critical": r.critical, "replicas": r.replicas }),
                    ))
                }
            }
        }
        Experiment::StrongFeller { model: name, dim, hurst, x, y, horizon, n, dt, past_horizon } => {
            let m = model(name, *dim)?;
            let ctx = HurstContext::new(*hurst)?;
            let w = stationary_window(*past_horizon, *dt, *hurst, m.dim(), &mut seeds.get("past").rng())?;
            let opts = FellerOptions { dt: *dt, obs_times: None };
            let r = strong_feller_diagnostic(&m, x, y, &w, *horizon, *n, &ctx, seeds.get("ensemble"), &opts)?;
            let rows: Vec<Vec<f64>> =
                r.observables.iter().map(|o| vec![o.time, o.component as f64, o.bin_width, o.tv]).collect();
            art.table("observables.csv", &["time", "component", "bin_width", "tv"], &rows, true)?;
            Ok((Vec::new(), json(&r)?))
        }
        Experiment::Bel { model: name, dim, hurst, phi, x, xi, n, horizon, dt, past_horizon, cutoff } => {
            let m = model(name, *dim)?;
            let ctx = HurstContext::new(*hurst)?;
            let phi: Observable = phi.parse()?;
            let w = stationary_window(*past_horizon, *dt, *hurst, m.dim(), &mut seeds.get("past").rng())?;
            let opts = BelOptions {
                dt: *dt,
                horizon: *horizon,
                cutoff: cutoff.map(|r| Cutoff { r1: r, rt: r }),
                ..Default::default()
            };
            let r = bel_gradient(&m, &phi, x, xi, &w, *n, &ctx, seeds.get("ensemble"), &opts)?;
            let rows = vec![vec![r.summary.estimate[0], r.summary.stderr[0], r.rejected as f64, r.mean_cutoff]];
            art.table("bel.csv", &["estimate", "stderr", "rejected", "mean_cutoff"], &rows, true)?;
            Ok((Vec::new(), json(&r)?))
        }
        Experiment::Steer { model: name, dim, x0, x1, horizon, dt } => {
            let m = model(name, *dim)?;
            let r = steer_control(&m, x0, x1, *horizon, *dt)?;
            art.sampled("desired", &r.desired, true)?;
            art.sampled("control", &r.control, false)?;
            art.sampled("replay", &r.replay, false)?;
            Ok((vec![CheckResult::at_most("replay residual", r.residual, 1e-4)], json(&r.summary())?))
        }
        Experiment::Subcoupling {
            hurst,
            s,
            u_center,
            u_radius,
            v_center,
            v_radius,
            nodes,
            epsilon,
            past_horizon,
            dt,
        } => {
            let ctx = HurstContext::new(*hurst)?;
            let w = stationary_window(*past_horizon, *dt, *hurst, 1, &mut seeds.get("past").rng())?;
            let u = Ball { center: u_center.clone(), radius: *u_radius };
            let v = Ball { center: v_center.clone(), radius: *v_radius };
            let opts = SubcouplingOptions { k: u_center.len(), nodes: *nodes, epsilon: *epsilon };
            let r = subcoupling_build(&w, &u, &v, *s, &ctx, &opts)?;
            let reference = r.coupling.reference();
            let rows: Vec<Vec<f64>> = (0..reference.len())
                .map(|i| reference.point(i).iter().copied().chain([r.coupling.density()[i]]).collect())
                .collect();
            let mut header: Vec<String> = (1..=opts.k).map(|j| format!("z_{j}")).collect();
            header.push("density".into());
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            art.table("coupling.csv", &header, &rows, true)?;
            let mut checks = vec![
                CheckResult::holds("first marginal dominated", r.first_marginal_dominated),
                CheckResult::holds("second marginal dominated", r.second_marginal_dominated),
            ];
            if !r.empty {
                checks.push(CheckResult::holds("positive mass when both balls carry mass", r.positive()));
            }
            Ok((checks, json(&r)?))
        }
        Experiment::Verify { suite } => {
            let r = verify::verify(*suite)?;
            for c in &r.criteria {
                seeds.named.insert(format!("criterion-{}", c.id), c.seed);
            }
            let mut body = String::from("criterion,check,value,bound,pass\n");
            for c in &r.criteria {
                for k in &c.checks {
                    writeln!(body, "{},\"{}\",{},{},{}", c.id, k.name.replace('"', "'"), k.value, k.bound, k.pass)
                        .unwrap();
                }
            }
            art.text("checks.csv", &body, true)?;
            let summary: Vec<serde_json::Value> = r
                .criteria
                .iter()
                .map(|c| serde_json::json!({ "id": c.id, "title": c.title, "pass": c.pass(), "seconds": c.seconds }))
                .collect();
            Ok((r.checks(), serde_json::json!({ "suite": suite.name(), "criteria": summary })))
        }
    }
}
