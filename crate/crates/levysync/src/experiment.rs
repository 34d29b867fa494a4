//! JSON-configured experiments with reproducible file outputs.
//!
//! One configuration describes a model, the analytics grids, the run size
//! and the output location. [`run_experiment`] executes one mode against
//! it and writes CSV/JSON/binary files, each stamped with the tool
//! version, the configuration digest and the base seed.
//!
//! Exit codes used by the `levysync` binary: 0 success, 1 a configured
//! check failed, 2 invalid configuration, 3 numerical or I/O failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{chi_markov_inf, chi_markov_t, GeneralModel};
use crate::levy::LevySpec;
use crate::limits_stats::{
    cf_distance, default_lambda_grid, default_magnitudes, empirical_cf, fit_linnik_scale, ks_test_laplace,
    lambda_grid_from_magnitudes, rescale, CfTable, RescaleRule,
};
use crate::me_dist::MeDistribution;
use crate::simulator::{
    chi_mc, sample_differences, v_statistic, v_trajectory, DifferenceSample, InitialState, Routing, SenderRule,
    SyncSystemConfig,
};
use crate::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Finite-horizon analytics are validation-grade up to this time.
pub const MAX_FINITE_T: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Analytic,
    Compare,
    DistInfo,
    Convergence,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| Error::config("mode", format!("unknown mode {s:?}")))
    }
}

/// Inter-event law as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterEventSpec {
    Exponential { mean: f64 },
    Erlang { stages: usize, mean: f64 },
    HyperExponential { weights: Vec<f64>, means: Vec<f64> },
    Coxian { rates: Vec<f64>, exit_probs: Vec<f64> },
    /// Raw `p*` coefficients, lowest degree first; analytics only.
    Rational { num: Vec<f64>, den: Vec<f64> },
}

impl InterEventSpec {
    pub fn build(&self) -> Result<MeDistribution> {
        match self {
            InterEventSpec::Exponential { mean } => MeDistribution::exponential(*mean),
            InterEventSpec::Erlang { stages, mean } => MeDistribution::erlang(*stages, *mean),
            InterEventSpec::HyperExponential { weights, means } => {
                MeDistribution::hyper_exponential(weights.clone(), means.clone())
            }
            InterEventSpec::Coxian { rates, exit_probs } => MeDistribution::coxian(rates.clone(), exit_probs.clone()),
            InterEventSpec::Rational { num, den } => MeDistribution::from_coefficients(num, den),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub levy: LevySpec,
    pub inter_event: InterEventSpec,
    #[serde(default)]
    pub routing: Routing,
    #[serde(default)]
    pub initial: InitialState,
    pub horizon: f64,
    #[serde(default)]
    pub sender: SenderRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaGridSpec {
    /// 20 log-spaced magnitudes in `[0.05, 5]`; see [`default_lambda_grid`].
    Default,
    /// Magnitudes expanded by [`lambda_grid_from_magnitudes`].
    Magnitudes { values: Vec<f64> },
    /// Explicit probe vectors.
    Points { points: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticsConfig {
    #[serde(default)]
    pub lambda_grid: Option<LambdaGridSpec>,
    /// Component counts for `dist-info`, `analytic` and `convergence`;
    /// defaults to `model.n`.
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Values of `eta` for `convergence`; defaults to 21 log-spaced values in `[0.1, 10]`.
    #[serde(default)]
    pub eta_grid: Vec<f64>,
    /// Horizons for the finite-t tables of `convergence`.
    #[serde(default)]
    pub t_list: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub replicas: usize,
    pub base_seed: u64,
    /// Times for the V-statistic table in `simulate`.
    #[serde(default)]
    pub time_points: Vec<f64>,
    #[serde(default = "default_pair")]
    pub pair: (usize, usize),
}

fn default_pair() -> (usize, usize) {
    (0, 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Bin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: default_formats() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RescaleSpec {
    Scalar { b: f64 },
    Matrix { exponent: Vec<Vec<f64>> },
    /// `b_N` from the Levy law's attraction target.
    Attraction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LaplaceScale {
    Value(f64),
    /// `"auto"`: `c0 = sigma sqrt(theta_1)` for one-dimensional Brownian motion.
    Auto(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KsConfig {
    pub c0: LaplaceScale,
    /// Critical value; defaults to the 5% level `1.36 / sqrt(n)`.
    #[serde(default)]
    pub critical: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinnikFitConfig {
    pub alpha: f64,
    /// Probe magnitudes `[lo, hi]` used by the fit.
    pub magnitudes: (f64, f64),
    /// Largest acceptable sup residual; no check when absent.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default)]
    pub rescale: Option<RescaleSpec>,
    #[serde(default)]
    pub ks: Option<KsConfig>,
    #[serde(default)]
    pub linnik_fit: Option<LinnikFitConfig>,
    /// Largest acceptable sup-distance to the theoretical CF.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub mode: Option<Mode>,
    pub model: ModelConfig,
    #[serde(default)]
    pub analytics: AnalyticsConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

fn in_path(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { path, msg } => Error::Config { path: format!("{prefix}.{path}"), msg },
        other => Error::config(prefix, other.to_string()),
    }
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config { path: if path == "." { "(root)".into() } else { path }, msg: e.into_inner().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("(file)", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn distribution(&self) -> Result<MeDistribution> {
        self.model.inter_event.build().map_err(|e| in_path("model", Error::config("inter_event", e.to_string())))
    }

    pub fn system(&self) -> Result<SyncSystemConfig> {
        let m = &self.model;
        let sys = SyncSystemConfig::new(m.n, m.levy.clone(), self.distribution()?, m.horizon)
            .with_routing(m.routing.clone())
            .with_initial(m.initial.clone())
            .with_sender(m.sender);
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        let dist = self.distribution()?;
        let m = &self.model;
        let sys = SyncSystemConfig::new(m.n, m.levy.clone(), dist.clone(), m.horizon)
            .with_routing(m.routing.clone())
            .with_initial(m.initial.clone());
        // analytics-only laws are fine until a mode needs to sample them
        let check = sys.validate();
        match check {
            Err(Error::Config { ref path, .. }) if path == "inter_event" => {}
            other => other.map_err(|e| in_path("model", e))?,
        }
        let d = m.levy.dim();
        if let Some(LambdaGridSpec::Points { points }) = &self.analytics.lambda_grid {
            for (i, p) in points.iter().enumerate() {
                if p.len() != d {
                    return Err(Error::config(
                        format!("analytics.lambda_grid.points[{i}]"),
                        format!("expected {d} components"),
                    ));
                }
            }
        }
        if let Some(LambdaGridSpec::Magnitudes { values }) = &self.analytics.lambda_grid {
            for (i, v) in values.iter().enumerate() {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(Error::config(format!("analytics.lambda_grid.values[{i}]"), "must be positive"));
                }
            }
        }
        for (i, &n) in self.analytics.n_list.iter().enumerate() {
            if n < 2 {
                return Err(Error::config(format!("analytics.n_list[{i}]"), "need at least 2 components"));
            }
        }
        for (i, &e) in self.analytics.eta_grid.iter().enumerate() {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::config(format!("analytics.eta_grid[{i}]"), "must be finite and nonnegative"));
            }
        }
        for (i, &t) in self.analytics.t_list.iter().enumerate() {
            if !(t >= 0.0 && t <= MAX_FINITE_T) {
                return Err(Error::config(format!("analytics.t_list[{i}]"), format!("must lie in [0, {MAX_FINITE_T}]")));
            }
        }
        if self.run.replicas == 0 {
            return Err(Error::config("run.replicas", "must be at least 1"));
        }
        let (a, b) = self.run.pair;
        if a >= m.n || b >= m.n || a == b {
            return Err(Error::config("run.pair", format!("need two distinct indices below {}", m.n)));
        }
        let tp = &self.run.time_points;
        for (i, &t) in tp.iter().enumerate() {
            if !(t >= 0.0 && t.is_finite()) || (i > 0 && t < tp[i - 1]) {
                return Err(Error::config(format!("run.time_points[{i}]"), "must be nonnegative and sorted"));
            }
        }
        if let Some(t) = self.compare.tolerance {
            if !(t > 0.0) {
                return Err(Error::config("compare.tolerance", "must be positive"));
            }
        }
        match &self.compare.rescale {
            Some(RescaleSpec::Scalar { b }) if !(*b > 0.0 && b.is_finite()) => {
                return Err(Error::config("compare.rescale.b", "must be positive"));
            }
            Some(RescaleSpec::Matrix { exponent }) => {
                let rule = RescaleRule::Matrix { exponent: exponent.clone() };
                rule.matrix(m.n, d).map_err(|e| Error::config("compare.rescale.exponent", e.to_string()))?;
            }
            Some(RescaleSpec::Attraction) => {
                m.levy.attraction_target().map_err(|e| Error::config("compare.rescale", e.to_string()))?;
            }
            _ => {}
        }
        if let Some(ks) = &self.compare.ks {
            match &ks.c0 {
                LaplaceScale::Auto(s) if s != "auto" => {
                    return Err(Error::config("compare.ks.c0", "expected a positive number or \"auto\""));
                }
                LaplaceScale::Value(c) if !(*c > 0.0) => {
                    return Err(Error::config("compare.ks.c0", "Laplace scale must be positive"));
                }
                _ => {}
            }
            if ks.critical.is_some_and(|c| !(c > 0.0)) {
                return Err(Error::config("compare.ks.critical", "must be positive"));
            }
            if d != 1 {
                return Err(Error::config("compare.ks", "KS test needs a one-dimensional model"));
            }
        }
        if let Some(f) = &self.compare.linnik_fit {
            if !(f.alpha > 0.0 && f.alpha <= 2.0) {
                return Err(Error::config("compare.linnik_fit.alpha", "must lie in (0, 2]"));
            }
            if !(f.magnitudes.0 >= 0.0 && f.magnitudes.1 > f.magnitudes.0) {
                return Err(Error::config("compare.linnik_fit.magnitudes", "need 0 <= lo < hi"));
            }
            if d != 1 {
                return Err(Error::config("compare.linnik_fit", "Linnik fit needs a one-dimensional model"));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding the output block so
    /// that moving the output directory keeps the digest.
    pub fn digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut v {
            map.remove("output");
        }
        crate::sha256_hex(v.to_string().as_bytes())
    }

    pub fn lambda_grid(&self) -> Vec<Vec<f64>> {
        let d = self.model.levy.dim();
        match &self.analytics.lambda_grid {
            None | Some(LambdaGridSpec::Default) => default_lambda_grid(d),
            Some(LambdaGridSpec::Magnitudes { values }) => lambda_grid_from_magnitudes(d, values),
            Some(LambdaGridSpec::Points { points }) => points.clone(),
        }
    }

    fn n_list(&self) -> Vec<usize> {
        if self.analytics.n_list.is_empty() {
            vec![self.model.n]
        } else {
            self.analytics.n_list.clone()
        }
    }

    fn eta_grid(&self) -> Vec<f64> {
        if self.analytics.eta_grid.is_empty() {
            (0..21).map(|i| 0.1 * 100f64.powf(i as f64 / 20.0)).collect()
        } else {
            self.analytics.eta_grid.clone()
        }
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// One pass/fail check a mode performed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
    #[serde(skip)]
    pub summary: Value,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, name: &str, value: f64, threshold: f64, pass: bool) {
        self.lines.push(format!(
            "check {name}: {value:.6} vs {threshold:.6} {}",
            if pass { "PASS" } else { "FAIL" }
        ));
        self.checks.push(Check { name: name.into(), value, threshold, pass });
    }
}

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Writer {
    dir: PathBuf,
    formats: Vec<Format>,
    stamp: Vec<(String, String)>,
    files: Vec<PathBuf>,
}

impl Writer {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn csv(&mut self, file: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let mut s = String::new();
        for (k, v) in &self.stamp {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let _ = writeln!(s, "{}", header.join(","));
        for r in rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        self.put(file, s.as_bytes())
    }

    fn json(&mut self, file: &str, body: Value) -> Result<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let mut obj = serde_json::Map::new();
        for (k, v) in &self.stamp {
            obj.insert(k.clone(), Value::String(v.clone()));
        }
        obj.insert("result".into(), body);
        let text = serde_json::to_string_pretty(&Value::Object(obj))? + "\n";
        self.put(file, text.as_bytes())
    }

    fn bin(&mut self, file: &str, sample: &DifferenceSample) -> Result<()> {
        if !self.wants(Format::Bin) {
            return Ok(());
        }
        let mut buf = Vec::new();
        sample.write_binary(&mut buf)?;
        // metadata trailer after the data block; readers stop at the data
        let trailer: serde_json::Map<String, Value> =
            self.stamp.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        buf.extend_from_slice(Value::Object(trailer).to_string().as_bytes());
        self.put(file, &buf)
    }

    fn put(&mut self, file: &str, bytes: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let p = self.dir.join(file);
        fs::write(&p, bytes)?;
        self.files.push(p);
        Ok(())
    }
}

fn lambda_header(d: usize) -> Vec<String> {
    if d == 1 {
        vec!["lambda".into()]
    } else {
        (1..=d).map(|i| format!("lambda_{i}")).collect()
    }
}

fn cf_rows(table: &CfTable) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = lambda_header(table.dim());
    header.extend(["ecf_re", "ecf_im", "se_re", "se_im", "theory", "abs_err"].map(String::from));
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let rows = table
        .points
        .iter()
        .map(|p| {
            let mut r: Vec<String> = p.lambda.iter().map(|&v| fmt_f64(v)).collect();
            r.extend([fmt_f64(p.re), fmt_f64(p.im), fmt_f64(p.se_re), fmt_f64(p.se_im), opt(p.theory), opt(p.abs_err())]);
            r
        })
        .collect();
    (header, rows)
}

fn sample_rows(s: &DifferenceSample) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["replica".to_string()];
    header.extend(if s.dim == 1 { vec!["d".to_string()] } else { (1..=s.dim).map(|i| format!("d_{i}")).collect() });
    let rows = (0..s.len())
        .map(|i| std::iter::once(i.to_string()).chain(s.row(i).iter().map(|&v| fmt_f64(v))).collect())
        .collect();
    (header, rows)
}

/// Runs one mode. Output files go to `opts.out` or `output.directory`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.run.base_seed = seed;
    }
    let mode = opts.mode.or(cfg.mode).ok_or_else(|| Error::config("mode", "no mode given"))?;
    cfg.mode = Some(mode);
    let dir = opts.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let mut w = Writer {
        dir,
        formats: cfg.output.formats.clone(),
        stamp: vec![
            ("tool".into(), "levysync".into()),
            ("tool_version".into(), TOOL_VERSION.into()),
            ("name".into(), cfg.name.clone()),
            ("mode".into(), serde_json::to_value(mode)?.as_str().unwrap_or_default().into()),
            ("config_digest".into(), cfg.digest()),
            ("base_seed".into(), cfg.run.base_seed.to_string()),
        ],
        files: Vec::new(),
    };
    let mut body = || -> Result<Report> {
        match mode {
            Mode::Simulate => simulate(&cfg, &mut w),
            Mode::Analytic => analytic(&cfg, &mut w),
            Mode::Compare => compare(&cfg, &mut w),
            Mode::DistInfo => dist_info(&cfg, &mut w),
            Mode::Convergence => convergence(&cfg, &mut w),
        }
    };
    let mut report = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::arg(format!("thread pool: {e}")))?
            .install(body)?,
        None => body()?,
    };
    let summary = json!({ "checks": report.checks, "summary": report.summary.clone() });
    w.json("summary.json", summary)?;
    report.files = w.files;
    Ok(report)
}

fn sampling_system(cfg: &ExperimentConfig) -> Result<SyncSystemConfig> {
    let sys = cfg.system()?;
    sys.validate().map_err(|e| in_path("model", e))?;
    Ok(sys)
}

fn simulate(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Report> {
    let sys = sampling_system(cfg)?;
    let mut rep = Report::default();
    let sample = sample_differences(&sys, cfg.run.pair, cfg.run.replicas, cfg.run.base_seed)?;
    let (h, r) = sample_rows(&sample);
    w.csv("samples.csv", &h, &r)?;
    w.bin("samples.bin", &sample)?;
    let table = empirical_cf(&sample, &cfg.lambda_grid())?;
    let (h, r) = cf_rows(&table);
    w.csv("cf_empirical.csv", &h, &r)?;
    rep.lines.push(format!("{} replicas of d_{}{} at T = {}", sample.len(), cfg.run.pair.0, cfg.run.pair.1, sys.horizon));
    let mut chi_json = Value::Null;
    if !cfg.run.time_points.is_empty() {
        let grid = cfg.lambda_grid();
        let (n, d) = (sys.n, sys.dim());
        let symmetric = sys.is_symmetric();
        let (reps, seed, times) = (cfg.run.replicas, cfg.run.base_seed, &cfg.run.time_points);
        // E V equals the difference CF only in the symmetric model
        let rows = if symmetric { chi_mc(&sys, &grid, reps, seed, times)? } else { v_trajectory(&sys, &grid, times, reps, seed)? };
        let v0 = |lam: &[f64]| match &sys.initial {
            InitialState::Zero => Some(1.0),
            InitialState::Fixed { x } => Some(v_statistic(&x.concat(), n, d, lam)),
            InitialState::Iid { .. } => None,
        };
        let general = match (&sys.routing, &sys.initial, sys.inter_event.is_exponential()) {
            (Routing::Symmetric, InitialState::Zero, false) => Some(GeneralModel::new(&sys.inter_event, n)?),
            _ => None,
        };
        let m = sys.inter_event.mean();
        let mut header = vec!["t".to_string()];
        header.extend(lambda_header(d));
        header.extend(["estimate", "se", "theory"].map(String::from));
        let mut out = Vec::with_capacity(rows.len());
        for row in &rows {
            let eta = sys.levy.eta(&row.lambda);
            let theory = match (&sys.routing, &sys.initial, &general) {
                (Routing::Disabled, _, _) => v0(&row.lambda).map(|v| v * (-row.t * eta).exp()),
                (Routing::Symmetric, InitialState::Zero, None) => Some(chi_markov_t(n, m, eta, row.t, 1.0)),
                (Routing::Symmetric, InitialState::Zero, Some(g)) if row.t <= MAX_FINITE_T => Some(g.chi_t(eta, row.t, 1.0)?),
                _ => None,
            };
            let mut r = vec![fmt_f64(row.t)];
            r.extend(row.lambda.iter().map(|&v| fmt_f64(v)));
            r.extend([fmt_f64(row.estimate), fmt_f64(row.se), theory.map(fmt_f64).unwrap_or_default()]);
            out.push(r);
        }
        w.csv(if symmetric { "chi_mc.csv" } else { "v_mean.csv" }, &header, &out)?;
        chi_json = serde_json::to_value(&rows)?;
    }
    rep.summary = json!({ "replicas": sample.len(), "dim": sample.dim, "cf": table, "chi_mc": chi_json });
    Ok(rep)
}

fn compare(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Report> {
    let sys = sampling_system(cfg)?;
    let mut rep = Report::default();
    let (n, d) = (sys.n, sys.dim());
    let raw = sample_differences(&sys, cfg.run.pair, cfg.run.replicas, cfg.run.base_seed)?;
    let rule = match &cfg.compare.rescale {
        None => None,
        Some(RescaleSpec::Scalar { b }) => Some(RescaleRule::Scalar { b: *b }),
        Some(RescaleSpec::Matrix { exponent }) => Some(RescaleRule::Matrix { exponent: exponent.clone() }),
        Some(RescaleSpec::Attraction) => Some(RescaleRule::Scalar { b: sys.levy.attraction_target()?.b_rule.b(n)? }),
    };
    let (sample, map) = match &rule {
        Some(r) => (rescale(&raw, r, n)?, Some(r.matrix(n, d)?)),
        None => (raw, None),
    };
    let (h, r) = sample_rows(&sample);
    w.csv("samples.csv", &h, &r)?;
    w.bin("samples.bin", &sample)?;

    // E exp(i <lambda, A x>) = chi(A^T lambda)
    let model = GeneralModel::new(&sys.inter_event, n)?;
    let table = empirical_cf(&sample, &cfg.lambda_grid())?.with_theory(|lam| {
        let probe: Vec<f64> = match &map {
            Some(a) => (0..d).map(|j| (0..d).map(|i| a[(i, j)] * lam[i]).sum()).collect(),
            None => lam.to_vec(),
        };
        model.chi_inf(sys.levy.eta(&probe))
    })?;
    let (h, r) = cf_rows(&table);
    w.csv("cf_compare.csv", &h, &r)?;
    let dist = cf_distance(&table)?;
    rep.lines.push(format!(
        "sup |Re ecf - l_N J_N| = {:.6}, sup |Im ecf| = {:.6} (max {:.2} SE)",
        dist.sup_re, dist.sup_im, dist.max_im_z
    ));
    if let Some(tol) = cfg.compare.tolerance {
        rep.check("cf_distance", dist.sup_re, tol, dist.sup_re < tol);
        rep.check("imaginary_within_4se", dist.max_im_z, 4.0, dist.max_im_z < 4.0);
    }

    let mut ks_json = Value::Null;
    if let Some(ks) = &cfg.compare.ks {
        let c0 = match &ks.c0 {
            LaplaceScale::Value(c) => *c,
            LaplaceScale::Auto(_) => match &sys.levy {
                LevySpec::BrownianDrift { sigma, .. } if d == 1 => {
                    let b = match &rule {
                        Some(RescaleRule::Scalar { b }) => *b,
                        Some(RescaleRule::Matrix { .. }) => {
                            return Err(Error::config("compare.ks.c0", "\"auto\" is not defined after a matrix rescale"))
                        }
                        None => 1.0,
                    };
                    sigma[0][0].abs() * model.constants().theta1_n.sqrt() / b
                }
                _ => return Err(Error::config("compare.ks.c0", "\"auto\" needs one-dimensional Brownian motion")),
            },
        };
        let rep_ks = ks_test_laplace(&sample, c0, ks.critical)?;
        rep.lines.push(format!("KS vs Laplace(c0 = {c0:.6}): {:.6} (critical {:.6})", rep_ks.statistic, rep_ks.critical));
        rep.check("ks_laplace", rep_ks.statistic, rep_ks.critical, rep_ks.pass);
        ks_json = json!({ "n": rep_ks.n, "statistic": rep_ks.statistic, "critical": rep_ks.critical, "pass": rep_ks.pass, "c0": c0 });
        w.json("ks.json", ks_json.clone())?;
    }

    let mut fit_json = Value::Null;
    if let Some(f) = &cfg.compare.linnik_fit {
        let fit = fit_linnik_scale(&table, f.alpha, f.magnitudes.0, f.magnitudes.1)?;
        rep.lines.push(format!(
            "Linnik fit alpha = {}: c = {:.6}, sup residual {:.6} over {} probes",
            fit.alpha, fit.c, fit.sup_residual, fit.probes
        ));
        if let Some(tol) = f.tolerance {
            rep.check("linnik_residual", fit.sup_residual, tol, fit.sup_residual < tol);
        }
        fit_json = serde_json::to_value(fit)?;
    }
    rep.summary = json!({ "distance": dist, "ks": ks_json, "linnik_fit": fit_json, "cf": table });
    Ok(rep)
}

fn analytic(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Report> {
    let dist = cfg.distribution()?;
    let m = dist.mean();
    let grid = cfg.lambda_grid();
    let d = cfg.model.levy.dim();
    let mut rep = Report::default();
    let mut header = vec!["n".to_string()];
    header.extend(lambda_header(d));
    header.extend(["eta", "chi_markov", "chi_quadrature", "chi_asymptotic", "remainder"].map(String::from));
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    for n in cfg.n_list() {
        let model = GeneralModel::new(&dist, n)?;
        let mut sup = 0.0f64;
        for lam in &grid {
            let eta = cfg.model.levy.eta(lam);
            let quad = model.chi_inf(eta)?;
            let asym = model.chi_asymptotic(eta);
            let rem = (quad - asym).abs();
            sup = sup.max(rem);
            let mut r = vec![n.to_string()];
            r.extend(lam.iter().map(|&v| fmt_f64(v)));
            r.extend([eta, chi_markov_inf(n, m, eta), quad, asym, rem].map(fmt_f64));
            rows.push(r);
        }
        let c = model.constants();
        rep.lines.push(format!("N = {n}: theta_1 = {:.9}, sup remainder {:.3e}", c.theta1_n, sup));
        per_n.push(json!({ "n": n, "kappa_n": model.roots().kappa_n, "theta1": c.theta1_n, "theta3": c.theta3_n, "sup_remainder": sup }));
    }
    w.csv("theory_cf.csv", &header, &rows)?;
    rep.summary = json!({ "per_n": per_n });
    Ok(rep)
}

fn complex_json(z: &crate::Complex64) -> Value {
    json!([z.re, z.im])
}

fn dist_info(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Report> {
    let dist = cfg.distribution()?;
    let mut rep = Report::default();
    let moments: Vec<f64> = (1..=3).map(|r| dist.moment(r)).collect::<Result<_>>()?;
    rep.lines.push(format!("moments m1 = {:.9}, m2 = {:.9}, m3 = {:.9}", moments[0], moments[1], moments[2]));
    let coeffs = |p: &crate::polyrat::Polynomial| p.coeffs().iter().map(|c| c.re).collect::<Vec<_>>();
    let roots: Vec<Value> = dist.renewal_roots().iter().map(complex_json).collect();
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for n in cfg.n_list() {
        let r = dist.solve_perturbed_roots(n)?;
        rep.lines.push(format!("N = {n}: kappa_N = {:.9}, theta_1 = {:.7}", r.kappa_n, r.theta1()));
        rows.push(vec![
            n.to_string(),
            fmt_f64(r.kappa_n),
            fmt_f64(r.seed),
            fmt_f64(r.theta1()),
            fmt_f64(r.theta3()),
            fmt_f64(r.c0),
            fmt_f64(r.d0),
        ]);
        table.push(json!({
            "n": n, "kappa_n": r.kappa_n, "seed": r.seed, "theta1": r.theta1(), "theta3": r.theta3(),
            "c0": r.c0, "d0": r.d0, "other_roots": r.other_roots.iter().map(complex_json).collect::<Vec<_>>(),
        }));
    }
    let header = ["n", "kappa_n", "seed", "theta1", "theta3", "c0", "d0"].map(String::from);
    w.csv("kappa.csv", &header, &rows)?;
    rep.summary = json!({
        "p_star": { "num": coeffs(&dist.p_star().num), "den": coeffs(&dist.p_star().den) },
        "moments": moments,
        "renewal_roots": roots,
        "kappa_table": table,
    });
    Ok(rep)
}

fn convergence(cfg: &ExperimentConfig, w: &mut Writer) -> Result<Report> {
    let dist = cfg.distribution()?;
    let etas = cfg.eta_grid();
    let mut rep = Report::default();
    let mut rem_rows = Vec::new();
    let mut fin_rows = Vec::new();
    let mut rem_json = Vec::new();
    for n in cfg.n_list() {
        let model = GeneralModel::new(&dist, n)?;
        let rem = model.theta2_remainder(&etas)?;
        rep.lines.push(format!("N = {n}: sup theta_2 remainder {rem:.6e}"));
        rem_rows.push(vec![n.to_string(), fmt_f64(model.constants().theta1_n), fmt_f64(rem)]);
        rem_json.push(json!({ "n": n, "theta1": model.constants().theta1_n, "remainder": rem }));
        for &t in &cfg.analytics.t_list {
            for &eta in &etas {
                let i = model.i_finite_t(eta, t)?;
                let j = model.j_finite_t(eta, t)?;
                fin_rows.push(vec![n.to_string(), fmt_f64(t), fmt_f64(eta), fmt_f64(i), fmt_f64(j), fmt_f64((i - j).abs())]);
            }
        }
    }
    w.csv("remainder.csv", &["n", "theta1", "remainder"].map(String::from), &rem_rows)?;
    if !fin_rows.is_empty() {
        w.csv("finite_t.csv", &["n", "t", "eta", "i_n", "j_n", "abs_diff"].map(String::from), &fin_rows)?;
    }
    rep.summary = json!({ "remainder": rem_json, "default_magnitudes": default_magnitudes() });
    Ok(rep)
}
