//! Command-line front end.
//!
//! Six batch subcommands: gen, whiten, factor, learn, eval, bench. Every
//! run resolves its configuration from defaults, then an optional flat
//! KEY=VALUE config file, then command-line flags (flags win), and emits a
//! JSON report to stdout carrying the fully resolved configuration so the
//! run can be reproduced exactly. Primary artifacts (data, models,
//! whitened files) go to --out; --report saves the JSON alongside the
//! stdout copy.
//!
//! Exit codes: 0 success, 1 errors, 2 desk-scale guard violations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand_chacha::ChaCha8Rng;

use crate::basis::BasisRunConfig;
use crate::dataset::{
    self, load_samples, save_samples, subspace_report, ComponentDist, ComponentSpec, Concept,
    Format, GroundTruth, DEFAULT_EIGEN_FLOOR,
};
use crate::error::{Error, Result};
use crate::factor::{factor_general, factor_under_gaussian, FactorConfig};
use crate::learner::{
    evaluate, learn_under_gaussian, InnerLearner, LearnConfig, SubspaceClassifier,
};
use crate::report::{BenchEntry, GenSummary, LearnSummary, RunReport, WhitenSummary};
use crate::rng::SeedSplitter;
use crate::suites::{standard_suites, suite};

/// Every tunable the pipelines accept, with CLI defaults.
///
/// The same keys are accepted in config files and (for the common ones) as
/// flags, and are echoed verbatim into the report's resolved_config.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub threads: usize,
    pub m_max: u32,
    pub k_cap: Option<usize>,
    pub delta: u32,
    pub k: usize,
    pub n: usize,
    pub samples: Option<usize>,
    pub v_dist: String,
    pub w_dist: String,
    pub concept: Option<String>,
    pub mode: String,
    pub inner: String,
    pub eps: f64,
    pub holdout: f64,
    pub sz_repeats: usize,
    pub sz_z: f64,
    pub sz_epsilon: f64,
    pub sz_lattice_factor: u32,
    pub eps1_cap: Option<f64>,
    pub denom: f64,
    pub exact_moments: bool,
    pub max_iters: usize,
    pub curvature_tol: f64,
    pub moment_probes: usize,
    pub reprobe_attempts: usize,
    pub eta_log_eps1: f64,
    pub extension_cap: u64,
    pub restarts: usize,
    pub reassembly_z: f64,
    pub tie_rel_tol: f64,
    pub calib_factor: f64,
    pub hull_max_points: usize,
    pub min_positives: usize,
    pub alternate_rounds: usize,
    pub whiten: bool,
    pub whiten_floor: f64,
}

impl Default for Settings {
    fn default() -> Self {
        let b = BasisRunConfig::default();
        let f = FactorConfig::default();
        let l = LearnConfig::default();
        Settings {
            seed: 0,
            threads: 1,
            m_max: b.m_max,
            k_cap: b.k_cap,
            delta: f.delta_m_max,
            k: 1,
            n: 10,
            samples: None,
            v_dist: "box".into(),
            w_dist: "gaussian".into(),
            concept: None,
            mode: "gaussian".into(),
            inner: "box".into(),
            eps: l.eps,
            holdout: l.holdout_fraction,
            sz_repeats: b.sz_repeats,
            sz_z: b.sz_z,
            sz_epsilon: b.sz_epsilon,
            sz_lattice_factor: b.sz_lattice_factor,
            eps1_cap: b.eps1_cap,
            denom: b.denom,
            exact_moments: b.exact_moments,
            max_iters: b.max_iters,
            curvature_tol: b.curvature_tol,
            moment_probes: b.moment_probes,
            reprobe_attempts: b.reprobe_attempts,
            eta_log_eps1: b.eta_log_eps1,
            extension_cap: b.extension_cap,
            restarts: f.restarts,
            reassembly_z: f.reassembly_z,
            tie_rel_tol: f.tie_rel_tol,
            calib_factor: f.calib_factor,
            hull_max_points: l.hull_max_points,
            min_positives: l.min_positives,
            alternate_rounds: l.alternate_rounds,
            whiten: true,
            whiten_floor: DEFAULT_EIGEN_FLOOR,
        }
    }
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::Config(format!(
            "key '{key}': cannot parse '{value}' as {}",
            std::any::type_name::<T>()
        ))
    })
}

fn parse_opt<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        parse_as(key, value).map(Some)
    }
}

impl Settings {
    /// Applies one KEY=VALUE pair; unknown keys are errors by contract.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse_as(key, value)?,
            "threads" => {
                self.threads = parse_as(key, value)?;
                if self.threads == 0 {
                    return Err(Error::Config("key 'threads': must be at least 1".into()));
                }
            }
            "m_max" => self.m_max = parse_as(key, value)?,
            "k_cap" => self.k_cap = parse_opt(key, value)?,
            "delta" => self.delta = parse_as(key, value)?,
            "k" => self.k = parse_as(key, value)?,
            "n" => self.n = parse_as(key, value)?,
            "samples" => self.samples = parse_opt(key, value)?,
            "v" => self.v_dist = value.to_string(),
            "w" => self.w_dist = value.to_string(),
            "concept" => self.concept = Some(value.to_string()),
            "mode" => self.mode = value.to_string(),
            "inner" => self.inner = value.to_string(),
            "eps" => self.eps = parse_as(key, value)?,
            "holdout" => self.holdout = parse_as(key, value)?,
            "sz_repeats" => self.sz_repeats = parse_as(key, value)?,
            "sz_z" => self.sz_z = parse_as(key, value)?,
            "sz_epsilon" => self.sz_epsilon = parse_as(key, value)?,
            "sz_lattice_factor" => self.sz_lattice_factor = parse_as(key, value)?,
            "eps1_cap" => self.eps1_cap = parse_opt(key, value)?,
            "denom" => self.denom = parse_as(key, value)?,
            "exact_moments" => self.exact_moments = parse_as(key, value)?,
            "max_iters" => self.max_iters = parse_as(key, value)?,
            "curvature_tol" => self.curvature_tol = parse_as(key, value)?,
            "moment_probes" => self.moment_probes = parse_as(key, value)?,
            "reprobe_attempts" => self.reprobe_attempts = parse_as(key, value)?,
            "eta_log_eps1" => self.eta_log_eps1 = parse_as(key, value)?,
            "extension_cap" => self.extension_cap = parse_as(key, value)?,
            "restarts" => self.restarts = parse_as(key, value)?,
            "reassembly_z" => self.reassembly_z = parse_as(key, value)?,
            "tie_rel_tol" => self.tie_rel_tol = parse_as(key, value)?,
            "calib_factor" => self.calib_factor = parse_as(key, value)?,
            "hull_max_points" => self.hull_max_points = parse_as(key, value)?,
            "min_positives" => self.min_positives = parse_as(key, value)?,
            "alternate_rounds" => self.alternate_rounds = parse_as(key, value)?,
            "whiten" => self.whiten = parse_as(key, value)?,
            "whiten_floor" => self.whiten_floor = parse_as(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// Loads a flat KEY=VALUE file (# comments and blank lines allowed).
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "config line {}: expected KEY=VALUE, got '{line}'",
                    lineno + 1
                ))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Every setting as strings, for the report's config echo.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let opt_u = |o: &Option<usize>| o.map_or("none".to_string(), |v| v.to_string());
        let opt_f = |o: &Option<f64>| o.map_or("none".to_string(), |v| v.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("threads".into(), self.threads.to_string());
        m.insert("m_max".into(), self.m_max.to_string());
        m.insert("k_cap".into(), opt_u(&self.k_cap));
        m.insert("delta".into(), self.delta.to_string());
        m.insert("k".into(), self.k.to_string());
        m.insert("n".into(), self.n.to_string());
        m.insert("samples".into(), opt_u(&self.samples));
        m.insert("v".into(), self.v_dist.clone());
        m.insert("w".into(), self.w_dist.clone());
        m.insert(
            "concept".into(),
            self.concept.clone().unwrap_or_else(|| "none".into()),
        );
        m.insert("mode".into(), self.mode.clone());
        m.insert("inner".into(), self.inner.clone());
        m.insert("eps".into(), self.eps.to_string());
        m.insert("holdout".into(), self.holdout.to_string());
        m.insert("sz_repeats".into(), self.sz_repeats.to_string());
        m.insert("sz_z".into(), self.sz_z.to_string());
        m.insert("sz_epsilon".into(), self.sz_epsilon.to_string());
        m.insert(
            "sz_lattice_factor".into(),
            self.sz_lattice_factor.to_string(),
        );
        m.insert("eps1_cap".into(), opt_f(&self.eps1_cap));
        m.insert("denom".into(), self.denom.to_string());
        m.insert("exact_moments".into(), self.exact_moments.to_string());
        m.insert("max_iters".into(), self.max_iters.to_string());
        m.insert("curvature_tol".into(), self.curvature_tol.to_string());
        m.insert("moment_probes".into(), self.moment_probes.to_string());
        m.insert("reprobe_attempts".into(), self.reprobe_attempts.to_string());
        m.insert("eta_log_eps1".into(), self.eta_log_eps1.to_string());
        m.insert("extension_cap".into(), self.extension_cap.to_string());
        m.insert("restarts".into(), self.restarts.to_string());
        m.insert("reassembly_z".into(), self.reassembly_z.to_string());
        m.insert("tie_rel_tol".into(), self.tie_rel_tol.to_string());
        m.insert("calib_factor".into(), self.calib_factor.to_string());
        m.insert("hull_max_points".into(), self.hull_max_points.to_string());
        m.insert("min_positives".into(), self.min_positives.to_string());
        m.insert("alternate_rounds".into(), self.alternate_rounds.to_string());
        m.insert("whiten".into(), self.whiten.to_string());
        m.insert("whiten_floor".into(), self.whiten_floor.to_string());
        m
    }

    pub fn basis_config(&self) -> BasisRunConfig {
        BasisRunConfig {
            m_max: self.m_max,
            k_cap: self.k_cap,
            sz_repeats: self.sz_repeats,
            sz_z: self.sz_z,
            sz_epsilon: self.sz_epsilon,
            sz_lattice_factor: self.sz_lattice_factor,
            eps1_cap: self.eps1_cap,
            denom: self.denom,
            exact_moments: self.exact_moments,
            max_iters: self.max_iters,
            curvature_tol: self.curvature_tol,
            moment_probes: self.moment_probes,
            reprobe_attempts: self.reprobe_attempts,
            eta_log_eps1: self.eta_log_eps1,
            extension_cap: self.extension_cap,
        }
    }

    pub fn factor_config(&self) -> FactorConfig {
        FactorConfig {
            basis: self.basis_config(),
            restarts: self.restarts,
            reassembly_z: self.reassembly_z,
            delta_m_max: self.delta,
            tie_rel_tol: self.tie_rel_tol,
            calib_factor: self.calib_factor,
        }
    }

    pub fn learn_config(&self) -> Result<LearnConfig> {
        Ok(LearnConfig {
            basis: self.basis_config(),
            inner: parse_inner(&self.inner)?,
            k: self.k,
            eps: self.eps,
            holdout_fraction: self.holdout,
            hull_max_points: self.hull_max_points,
            min_positives: self.min_positives,
            alternate_rounds: self.alternate_rounds,
        })
    }
}

fn parse_inner(s: &str) -> Result<InnerLearner> {
    match s {
        "box" => Ok(InnerLearner::Box),
        "hull" => Ok(InnerLearner::Hull),
        other => Err(Error::Config(format!(
            "key 'inner': expected box or hull, got '{other}'"
        ))),
    }
}

fn parse_component(name: &str, dim: usize) -> Result<ComponentDist> {
    match name {
        "gaussian" => Ok(ComponentDist::Gaussian),
        "box" => Ok(ComponentDist::isotropic_box(dim)),
        "ball" => Ok(ComponentDist::isotropic_ball(dim)),
        "mix" => Ok(ComponentDist::Mixture {
            weights: vec![0.5, 0.5],
            components: vec![
                ComponentDist::isotropic_box(dim),
                ComponentDist::isotropic_ball(dim),
            ],
        }),
        other => Err(Error::Config(format!(
            "component distribution must be gaussian, box, ball, or mix; got '{other}'"
        ))),
    }
}

/// Parses "lo:hi,lo:hi,..." into concept intervals.
fn parse_concept(s: &str) -> Result<Concept> {
    let mut intervals = Vec::new();
    for part in s.split(',') {
        let (lo, hi) = part.split_once(':').ok_or_else(|| {
            Error::Config(format!("key 'concept': expected lo:hi, got '{part}'"))
        })?;
        let lo: f64 = parse_as("concept", lo.trim())?;
        let hi: f64 = parse_as("concept", hi.trim())?;
        if lo > hi {
            return Err(Error::Config(format!(
                "key 'concept': interval {lo}:{hi} is empty"
            )));
        }
        intervals.push((lo, hi));
    }
    Ok(Concept::Box { intervals })
}

/// Sample count guaranteeing stable moment estimates at the probing order:
/// 200 n^(m/2) ln n observations, floored at 200k.
pub fn default_samples(n: usize, m_max: u32) -> usize {
    let nf = n as f64;
    let theory = (200.0 * nf.powf(m_max as f64 / 2.0) * nf.ln()).ceil();
    (theory as usize).max(200_000)
}

#[derive(Debug, Parser)]
#[command(
    name = "mfac",
    version,
    about = "Recovers hidden orthogonal factorizations of sample distributions and learns concepts on the recovered subspace"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Only flags the user actually passed
/// override the config file.
#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Root seed; all randomness derives from it through named streams
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat KEY=VALUE config file applied before flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Primary artifact path (data for gen/whiten, model for learn)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Save the JSON report here as well as printing it
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Upper bound on worker threads (results are thread-count independent)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Highest moment order probed
    #[arg(long)]
    pub m_max: Option<u32>,
    /// Stop recovery after this many directions
    #[arg(long)]
    pub k_cap: Option<usize>,
    /// Highest defect order used to rank general-mode candidates
    #[arg(long)]
    pub delta: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic factorizable samples (plus ground truth JSON)
    Gen(GenArgs),
    /// Whiten a dataset and save the transform
    Whiten(WhitenArgs),
    /// Recover the hidden factorization of a dataset
    Factor(FactorArgs),
    /// Learn a labeled concept on the recovered subspace
    Learn(LearnArgs),
    /// Evaluate a model on labeled data, or a factor report against truth
    Eval(EvalArgs),
    /// Run named benchmark instances end to end
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Ambient dimension
    #[arg(long)]
    pub n: Option<usize>,
    /// Hidden subspace dimension
    #[arg(long)]
    pub k: Option<usize>,
    /// Sample count (default: 200 n^(m_max/2) ln n, at least 200000)
    #[arg(long)]
    pub samples: Option<usize>,
    /// V component: gaussian, box, ball, or mix
    #[arg(long)]
    pub v: Option<String>,
    /// W component: gaussian, box, ball, or mix
    #[arg(long)]
    pub w: Option<String>,
    /// Label samples by a box concept "lo:hi,lo:hi" in latent V coordinates
    #[arg(long, allow_hyphen_values = true)]
    pub concept: Option<String>,
}

#[derive(Debug, Args)]
pub struct WhitenArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input dataset (.csv or binary)
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input dataset (.csv or binary)
    #[arg(long)]
    pub input: PathBuf,
    /// gaussian: complement assumed gaussian; general: no assumption
    #[arg(long)]
    pub mode: Option<String>,
    /// Factor dimension for general mode
    #[arg(long)]
    pub k: Option<usize>,
    /// Ground-truth JSON; adds an alignment section to the report
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Skip the whitening preprocessing step
    #[arg(long)]
    pub no_whiten: bool,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Labeled input dataset
    #[arg(long)]
    pub input: PathBuf,
    /// Inner learner: box or hull
    #[arg(long)]
    pub inner: Option<String>,
    /// Junta arity (directions the concept may depend on)
    #[arg(long)]
    pub k: Option<usize>,
    /// Error budget
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Labeled dataset to score a model on
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model JSON produced by learn
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Factor report JSON to compare against truth
    #[arg(long, name = "report-in")]
    pub report_in: Option<PathBuf>,
    /// Ground-truth JSON
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Instance name, or "all"
    #[arg(long)]
    pub instance: String,
    /// Scale every instance's sample count by this factor
    #[arg(long)]
    pub scale: Option<f64>,
}

fn apply_common(s: &mut Settings, c: &CommonArgs) -> Result<()> {
    if let Some(path) = &c.config {
        s.apply_file(path)?;
    }
    if let Some(v) = c.seed {
        s.apply("seed", &v.to_string())?;
    }
    if let Some(v) = c.threads {
        s.apply("threads", &v.to_string())?;
    }
    if let Some(v) = c.m_max {
        s.apply("m_max", &v.to_string())?;
    }
    if let Some(v) = c.k_cap {
        s.apply("k_cap", &v.to_string())?;
    }
    if let Some(v) = c.delta {
        s.apply("delta", &v.to_string())?;
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Other(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path.display().to_string(), e))
}

fn emit(report: &mut RunReport, started: Instant, path: Option<&Path>) -> Result<()> {
    report.elapsed_ms = started.elapsed().as_millis() as u64;
    println!("{}", report.to_json()?);
    if let Some(p) = path {
        report.save(p)?;
    }
    Ok(())
}

fn require_out(c: &CommonArgs, what: &str) -> Result<PathBuf> {
    c.out
        .clone()
        .ok_or_else(|| Error::Config(format!("--out is required for {what}")))
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let started = Instant::now();
    let mut s = Settings::default();
    apply_common(&mut s, &args.common)?;
    if let Some(v) = args.n {
        s.apply("n", &v.to_string())?;
    }
    if let Some(v) = args.k {
        s.apply("k", &v.to_string())?;
    }
    if let Some(v) = args.samples {
        s.apply("samples", &v.to_string())?;
    }
    if let Some(v) = &args.v {
        s.apply("v", v)?;
    }
    if let Some(v) = &args.w {
        s.apply("w", v)?;
    }
    if let Some(v) = &args.concept {
        s.apply("concept", v)?;
    }
    let out = require_out(&args.common, "gen")?;
    if s.k == 0 || s.k >= s.n {
        return Err(Error::Config(format!(
            "need 1 <= k < n, got k={}, n={}",
            s.k, s.n
        )));
    }
    let count = s.samples.unwrap_or_else(|| default_samples(s.n, s.m_max));
    let spec = ComponentSpec {
        v: parse_component(&s.v_dist, s.k)?,
        w: parse_component(&s.w_dist, s.n - s.k)?,
    };
    let (data, truth) = match &s.concept {
        Some(c) => {
            let concept = parse_concept(c)?;
            dataset::gen_labeled(&spec, s.n, s.k, &concept, count, s.seed)?
        }
        None => dataset::gen_factorizable(&spec, s.n, s.k, count, s.seed)?,
    };
    save_samples(&out, &data, Format::from_path(&out))?;
    let truth_path = out.with_extension("truth.json");
    write_json(&truth_path, &truth)?;

    let mut resolved = s.resolved();
    resolved.insert("out".into(), out.display().to_string());
    resolved.insert("truth_out".into(), truth_path.display().to_string());
    let mut report = RunReport::new("gen", s.seed, resolved);
    report.gen = Some(GenSummary {
        rows: data.len(),
        cols: data.dim(),
        labeled: data.labels().is_some(),
        output: out.display().to_string(),
    });
    emit(&mut report, started, args.common.report.as_deref())
}

fn cmd_whiten(args: &WhitenArgs) -> Result<()> {
    let started = Instant::now();
    let mut s = Settings::default();
    apply_common(&mut s, &args.common)?;
    let out = require_out(&args.common, "whiten")?;
    let data = load_samples(&args.input, Format::from_path(&args.input))?;
    let (white, transform) = dataset::whiten_with_floor(&data, s.whiten_floor)?;
    save_samples(&out, &white, Format::from_path(&out))?;
    let tpath = out.with_extension("transform.json");
    write_json(&tpath, &transform)?;

    let mut resolved = s.resolved();
    resolved.insert("input".into(), args.input.display().to_string());
    resolved.insert("out".into(), out.display().to_string());
    resolved.insert("transform_out".into(), tpath.display().to_string());
    let mut report = RunReport::new("whiten", s.seed, resolved);
    report.whiten = Some(WhitenSummary {
        rows: white.len(),
        cols: white.dim(),
        eigenvalues: transform.eigenvalues.clone(),
        output: out.display().to_string(),
    });
    emit(&mut report, started, args.common.report.as_deref())
}

fn cmd_factor(args: &FactorArgs) -> Result<()> {
    let started = Instant::now();
    let mut s = Settings::default();
    apply_common(&mut s, &args.common)?;
    if let Some(v) = &args.mode {
        s.apply("mode", v)?;
    }
    if let Some(v) = args.k {
        s.apply("k", &v.to_string())?;
    }
    if args.no_whiten {
        s.apply("whiten", "false")?;
    }
    let data = load_samples(&args.input, Format::from_path(&args.input))?;
    let prepared = if s.whiten {
        dataset::whiten_with_floor(&data, s.whiten_floor)?.0
    } else {
        data
    };
    let cfg = s.factor_config();
    let mut rng = SeedSplitter::new(s.seed).stream("factor");

    let mut resolved = s.resolved();
    resolved.insert("input".into(), args.input.display().to_string());
    let mut report = RunReport::new("factor", s.seed, resolved);
    let recovered = match s.mode.as_str() {
        "gaussian" => {
            let out = factor_under_gaussian(&prepared, &cfg, &mut rng)?;
            let v = out.v.clone();
            report.factor_gaussian = Some(out);
            v
        }
        "general" => {
            let out = factor_general(&prepared, s.k, &cfg, &mut rng)?;
            let v = out.v.clone();
            report.factor_general = Some(out);
            v
        }
        other => {
            return Err(Error::Config(format!(
                "key 'mode': expected gaussian or general, got '{other}'"
            )));
        }
    };
    if let Some(tp) = &args.truth {
        let truth: GroundTruth = read_json(tp)?;
        report.subspace = Some(subspace_report(&recovered, &truth)?);
    }
    emit(&mut report, started, args.common.report.as_deref())
}

fn cmd_learn(args: &LearnArgs) -> Result<()> {
    let started = Instant::now();
    let mut s = Settings::default();
    apply_common(&mut s, &args.common)?;
    if let Some(v) = &args.inner {
        s.apply("inner", v)?;
    }
    if let Some(v) = args.k {
        s.apply("k", &v.to_string())?;
    }
    if let Some(v) = args.eps {
        s.apply("eps", &v.to_string())?;
    }
    let data = load_samples(&args.input, Format::from_path(&args.input))?;
    let cfg = s.learn_config()?;
    let mut rng = SeedSplitter::new(s.seed).stream("learn");
    let outcome = learn_under_gaussian(&data, &cfg, &mut rng)?;

    let mut resolved = s.resolved();
    resolved.insert("input".into(), args.input.display().to_string());
    if let Some(out) = &args.common.out {
        write_json(out, &outcome.classifier)?;
        resolved.insert("out".into(), out.display().to_string());
    }
    let mut report = RunReport::new("learn", s.seed, resolved);
    report.learn = Some(LearnSummary::from(&outcome));
    emit(&mut report, started, args.common.report.as_deref())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let started = Instant::now();
    let mut s = Settings::default();
    apply_common(&mut s, &args.common)?;
    let mut resolved = s.resolved();
    let mut report = RunReport::new("eval", s.seed, BTreeMap::new());
    match (&args.data, &args.model, &args.report_in, &args.truth) {
        (Some(data_path), Some(model_path), _, _) => {
            let data = load_samples(data_path, Format::from_path(data_path))?;
            let model: SubspaceClassifier = read_json(model_path)?;
            report.eval = Some(evaluate(&model, &data)?);
            resolved.insert("data".into(), data_path.display().to_string());
            resolved.insert("model".into(), model_path.display().to_string());
        }
        (_, _, Some(rp), Some(tp)) => {
            let prior: RunReport = read_json(rp)?;
            let truth: GroundTruth = read_json(tp)?;
            let recovered = prior
                .factor_gaussian
                .as_ref()
                .map(|f| f.v.clone())
                .or_else(|| prior.factor_general.as_ref().map(|f| f.v.clone()))
                .ok_or_else(|| {
                    Error::Data(format!("{}: no factorization section", rp.display()))
                })?;
            report.subspace = Some(subspace_report(&recovered, &truth)?);
            resolved.insert("report_in".into(), rp.display().to_string());
            resolved.insert("truth".into(), tp.display().to_string());
        }
        _ => {
            return Err(Error::Config(
                "eval needs either --data with --model, or --report-in with --truth".into(),
            ));
        }
    }
    report.resolved_config = resolved;
    emit(&mut report, started, args.common.report.as_deref())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let started = Instant::now();
    let mut s = Settings::default();
    apply_common(&mut s, &args.common)?;
    let instances = if args.instance == "all" {
        standard_suites()
    } else {
        vec![suite(&args.instance).ok_or_else(|| {
            Error::Config(format!(
                "unknown bench instance '{}'; known: {}",
                args.instance,
                standard_suites()
                    .iter()
                    .map(|i| i.name)
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?]
    };
    let mut entries = Vec::new();
    for inst in &instances {
        let mut inst = inst.clone();
        if let Some(f) = args.scale {
            inst.samples = ((inst.samples as f64 * f).ceil() as usize).max(100);
        }
        let t0 = Instant::now();
        let (data, truth) = inst.materialize()?;
        entries.push(BenchEntry {
            instance: inst.name.to_string(),
            stage: "gen".into(),
            rows: data.len(),
            cols: data.dim(),
            elapsed_ms: t0.elapsed().as_millis() as u64,
            detail: String::new(),
        });
        let mut rng = bench_rng(&inst.name, s.seed);
        if data.labels().is_some() {
            let t0 = Instant::now();
            let mut cfg = s.learn_config()?;
            cfg.k = inst.k;
            cfg.inner = InnerLearner::Hull;
            let outcome = learn_under_gaussian(&data, &cfg, &mut rng)?;
            entries.push(BenchEntry {
                instance: inst.name.to_string(),
                stage: "learn".into(),
                rows: data.len(),
                cols: data.dim(),
                elapsed_ms: t0.elapsed().as_millis() as u64,
                detail: format!("holdout error {:.4}", outcome.holdout.error_rate),
            });
        } else {
            let t0 = Instant::now();
            let (white, _) = dataset::whiten_with_floor(&data, s.whiten_floor)?;
            entries.push(BenchEntry {
                instance: inst.name.to_string(),
                stage: "whiten".into(),
                rows: white.len(),
                cols: white.dim(),
                elapsed_ms: t0.elapsed().as_millis() as u64,
                detail: String::new(),
            });
            let gaussian_w = matches!(inst.spec.w, ComponentDist::Gaussian);
            let t0 = Instant::now();
            let cfg = s.factor_config();
            let (recovered, detail) = if gaussian_w {
                let out = factor_under_gaussian(&white, &cfg, &mut rng)?;
                (out.v.clone(), format!("verified {}", out.verified))
            } else {
                let out = factor_general(&white, inst.k, &cfg, &mut rng)?;
                (out.v.clone(), format!("unique {}", out.unique))
            };
            let angle = subspace_report(&recovered, &truth)
                .map(|r| r.largest_angle_deg)
                .unwrap_or(f64::NAN);
            entries.push(BenchEntry {
                instance: inst.name.to_string(),
                stage: "factor".into(),
                rows: white.len(),
                cols: white.dim(),
                elapsed_ms: t0.elapsed().as_millis() as u64,
                detail: format!("{detail}, largest angle {angle:.2} deg"),
            });
        }
    }
    for e in &entries {
        eprintln!(
            "{:<16} {:<8} {:>8} x {:<3} {:>8} ms  {}",
            e.instance, e.stage, e.rows, e.cols, e.elapsed_ms, e.detail
        );
    }
    let mut resolved = s.resolved();
    resolved.insert("instance".into(), args.instance.clone());
    let mut report = RunReport::new("bench", s.seed, resolved);
    report.bench = Some(entries);
    emit(&mut report, started, args.common.report.as_deref())
}

fn bench_rng(name: &str, seed: u64) -> ChaCha8Rng {
    SeedSplitter::new(seed).stream(name)
}

/// Parses argv and runs the selected command.
pub fn run() -> Result<()> {
    // clap models --help and --version as errors; they are successful exits.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            let trimmed = text.strip_prefix("error: ").unwrap_or(&text);
            return Err(Error::Config(trimmed.to_string()));
        }
        Err(e) => {
            let _ = e.print();
            return Ok(());
        }
    };
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Whiten(a) => cmd_whiten(a),
        Command::Factor(a) => cmd_factor(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    }
}
