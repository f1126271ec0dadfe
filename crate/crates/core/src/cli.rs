//! Batch front end: resolve the configuration, run the pipeline stages and
//! write branch data, anchors, certificates and a summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, RunConfig};
use crate::continuation::{
    hopf_seed_on, read_run_json, step_branch, steady_branch, write_anchor_json, write_branch_csv, write_run_json, BranchRun, ContinuationError,
    ExportError, HopfSeed, SteadyBranch, STEADY_MODE,
};
use crate::interval::ScalarInterval;
use crate::par::with_threads;
use crate::system::{q_parameter_in_a, AnchorPoint, ContinuationMode};
use crate::validator::spot::spot_check;
use crate::validator::{longest_validated_chain, validate_run, validate_single, Certificate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "parameter_in_a", alias = "parameter-in-a")]
    ParameterInA,
    #[value(name = "pseudo_arclength", alias = "pseudo-arclength")]
    PseudoArclength,
}

impl From<ModeArg> for ContinuationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::ParameterInA => ContinuationMode::ParameterInA,
            ModeArg::PseudoArclength => ContinuationMode::PseudoArclength,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kshopf", version, about = "Validated Kuramoto-Sivashinsky periodic orbits near a Hopf bifurcation")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Compute the steady branch carrying the Hopf point.
    Steady,
    /// Locate the Hopf point and refine the first periodic orbit at a = 0.
    HopfSeed,
    /// Continue the periodic branch across the configured a-range.
    Continue,
    /// Validate a branch run (computed, or loaded with --run).
    Validate {
        /// A run.json written by `continue`.
        #[arg(long)]
        run: Option<PathBuf>,
    },
    /// Steady branch, seed, continuation and validation.
    All,
}

#[derive(Debug, Default, clap::Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub nu1: Option<f64>,
    #[arg(long, global = true)]
    pub nu2: Option<f64>,
    #[arg(long = "R", global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a_from: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a_to: Option<f64>,
    #[arg(long, global = true)]
    pub a_step: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Disable the fallback configuration search.
    #[arg(long, global = true)]
    pub no_search: bool,
    /// Run all kernels on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Print the resolved configuration and planned work, then exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v.into();
                }
            };
        }
        set!(self.m, c.truncation.m);
        set!(self.n, c.truncation.n);
        set!(self.nu1, c.weights.nu1);
        set!(self.nu2, c.weights.nu2);
        set!(self.r, c.validation.r_max);
        set!(self.mode, c.continuation.mode);
        set!(self.a_from, c.continuation.a_from);
        set!(self.a_to, c.continuation.a_to);
        set!(self.a_step, c.continuation.a_step);
        set!(self.out.clone(), c.run.out);
        set!(self.threads, c.run.threads);
        set!(self.seed, c.run.seed);
        if self.no_search {
            c.search.enabled = false;
        }
        if self.sequential {
            c.run.sequential = true;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Input(String),
}

/// Sign change of the amplitude inside a segment, with the enclosing
/// s-interval of a_s = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub segment: usize,
    pub a_interval: [f64; 2],
    pub s_interval: [f64; 2],
}

/// Screening and full-run outcome of one candidate configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub nu1: f64,
    pub nu2: f64,
    pub a_step: f64,
    pub screen: Option<Certificate>,
    pub segments: usize,
    pub validated: usize,
    pub accepted: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub verb: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub nu1: f64,
    pub nu2: f64,
    pub mode: ContinuationMode,
    pub segments: usize,
    pub validated: usize,
    pub failed: usize,
    pub longest_chain: [usize; 2],
    pub hopf_crossings: Vec<Crossing>,
    pub spot_checks_failed: usize,
    pub attempts: Vec<Attempt>,
    pub success: bool,
}

fn log(msg: impl AsRef<str>) {
    eprintln!("[kshopf] {}", msg.as_ref());
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), RunError> {
    fs::write(path, serde_json::to_string_pretty(v)?)?;
    Ok(())
}

/// Enclosure of the root of a_s = (1 − s)a₀ + s·a₁ when a₀a₁ < 0.
pub fn crossing_interval(a0: f64, a1: f64) -> Option<[f64; 2]> {
    let (p0, p1) = (ScalarInterval::point(a0), ScalarInterval::point(a1));
    if !(p0 * p1).is_negative() {
        return None;
    }
    let s = p0.div(&(p0 - p1)).ok()?;
    Some([s.lo().max(0.0), s.hi().min(1.0)])
}

pub fn crossings(certs: &[Certificate]) -> Vec<Crossing> {
    certs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.hopf_crossing)
        .filter_map(|(i, c)| {
            let a = &c.diagnostics.amplitudes;
            let (a0, a1) = (*a.first()?, *a.get(1)?);
            Some(Crossing { segment: c.diagnostics.segment.unwrap_or(i), a_interval: [a0, a1], s_interval: crossing_interval(a0, a1)? })
        })
        .collect()
}

fn compute_steady(cfg: &RunConfig) -> Result<SteadyBranch, RunError> {
    let t0 = Instant::now();
    let b = steady_branch(cfg.truncation.n, STEADY_MODE, cfg.steady.lambda2_min, cfg.steady.max_step, cfg.newton())?;
    log(format!("steady branch N={}: {} points in {:.1?}", cfg.truncation.n, b.points.len(), t0.elapsed()));
    Ok(b)
}

#[derive(Serialize)]
struct SteadyRow {
    s: f64,
    amplitude: f64,
    lambda2: f64,
}

fn write_steady(b: &SteadyBranch, out: &Path) -> Result<(), RunError> {
    let mut wr = csv::Writer::from_path(out.join("steady.csv")).map_err(ExportError::from)?;
    for (p, s) in b.points.iter().zip(&b.s) {
        wr.serialize(SteadyRow { s: *s, amplitude: p.amplitude, lambda2: p.lambda2 }).map_err(ExportError::from)?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SeedJson {
    lambda2: f64,
    omega: f64,
    steady_amplitude: f64,
    residual: f64,
}

fn write_seed(cfg: &RunConfig, seed: &HopfSeed, out: &Path) -> Result<(), RunError> {
    let h = &seed.hopf;
    write_json(&out.join("hopf.json"), &SeedJson { lambda2: h.steady.lambda2, omega: h.omega, steady_amplitude: h.steady.amplitude, residual: seed.residual })?;
    fs::create_dir_all(out.join("anchors"))?;
    write_anchor_json(&seed.x0, &cfg.weights(), &out.join("anchors").join("seed.json"))?;
    Ok(())
}

fn write_branch(cfg: &RunConfig, run: &BranchRun, out: &Path) -> Result<(), RunError> {
    let w = cfg.weights();
    write_branch_csv(run, &w, &out.join("branch.csv"))?;
    write_run_json(run, &w, &out.join("run.json"))?;
    let dir = out.join("anchors");
    fs::create_dir_all(&dir)?;
    for (i, seg) in run.segments.iter().enumerate() {
        write_anchor_json(&seg.xhat0, &w, &dir.join(format!("anchor_{i:03}.json")))?;
    }
    if let Some(last) = run.segments.last() {
        write_anchor_json(&last.xhat1, &w, &dir.join(format!("anchor_{:03}.json", run.segments.len())))?;
    }
    Ok(())
}

fn validate(cfg: &RunConfig, run: &BranchRun) -> Vec<Certificate> {
    let vc = cfg.validation_config();
    let t0 = Instant::now();
    validate_run(run, &vc, |i, c| {
        let r = c.r_star.map_or("-".to_string(), |r| format!("{r:.3e}"));
        log(format!(
            "segment {i}: Y={:.3e} Z0={:.3e} Z1={:.3e} Z2={:.3e} r*={r} validated={} hopf={} ({:.1?})",
            c.y,
            c.z0,
            c.z1,
            c.z2,
            c.validated,
            c.hopf_crossing,
            t0.elapsed()
        ))
    })
}

/// A run is accepted when every segment validates.
fn accepted(certs: &[Certificate]) -> bool {
    !certs.is_empty() && certs.iter().all(|c| c.validated)
}

struct Outcome {
    cfg: RunConfig,
    seed: Option<HopfSeed>,
    steady: Option<SteadyBranch>,
    run: BranchRun,
    certs: Vec<Certificate>,
}

/// Try each candidate configuration, with step refinement, until one
/// validates fully. Returns the accepted run, or the one with the most
/// validated segments.
fn search(cfg: &RunConfig, attempts: &mut Vec<Attempt>) -> Result<Outcome, RunError> {
    let cands = cfg.candidates();
    let screen = cands.len() > 1;
    let refine = if cfg.search.enabled { cfg.search.refine } else { 0 };
    let mut best: Option<Outcome> = None;
    let mut steady_cache: Vec<(usize, SteadyBranch)> = Vec::new();
    let count = |o: &Outcome| o.certs.iter().filter(|x| x.validated).count();
    'cands: for c in cands {
        let t = c.truncation();
        log(format!("candidate M={} N={} nu=({}, {})", t.m, t.n, c.weights.nu1, c.weights.nu2));
        let mut att = Attempt {
            m: t.m,
            n: t.n,
            nu1: c.weights.nu1,
            nu2: c.weights.nu2,
            a_step: c.continuation.a_step,
            screen: None,
            segments: 0,
            validated: 0,
            accepted: false,
            error: None,
            seconds: 0.0,
        };
        let t0 = Instant::now();
        let prepared = (|| -> Result<(SteadyBranch, HopfSeed), RunError> {
            let steady = match steady_cache.iter().find(|(n, _)| *n == t.n) {
                Some((_, b)) => b.clone(),
                None => {
                    let b = compute_steady(&c)?;
                    steady_cache.push((t.n, b.clone()));
                    b
                }
            };
            let seed = hopf_seed_on(&steady, t, c.newton())?;
            Ok((steady, seed))
        })();
        let (steady, seed) = match prepared {
            Ok(p) => p,
            Err(e) => {
                log(format!("candidate failed: {e}"));
                att.error = Some(e.to_string());
                att.seconds = t0.elapsed().as_secs_f64();
                attempts.push(att);
                continue;
            }
        };
        if screen {
            let anc = AnchorPoint { xhat: seed.x0.clone(), q: q_parameter_in_a::<Complex64>(t), c: Complex64::new(0.0, 0.0) };
            let cert = validate_single(&anc, c.continuation.mode, t, &c.validation_config());
            log(format!("screen: Y={:.3e} Z0={:.3e} Z1={:.3e} Z2={:.3e} validated={}", cert.y, cert.z0, cert.z1, cert.z2, cert.validated));
            let ok = cert.validated;
            att.screen = Some(cert);
            if !ok {
                att.seconds = t0.elapsed().as_secs_f64();
                attempts.push(att);
                continue;
            }
        }
        for h in 0..=refine {
            let rc = c.refined(h);
            let mut a = Attempt { a_step: rc.continuation.a_step, screen: if h == 0 { att.screen.take() } else { None }, ..att.clone() };
            let t1 = Instant::now();
            log(format!("run: a in [{}, {}], step {}", rc.continuation.a_from, rc.continuation.a_to, rc.continuation.a_step));
            match step_branch(&seed.x0, t, &rc.step_config(), &rc.weights()) {
                Ok(run) => {
                    let certs = validate(&rc, &run);
                    a.segments = certs.len();
                    a.validated = certs.iter().filter(|x| x.validated).count();
                    a.accepted = accepted(&certs);
                    a.seconds = t1.elapsed().as_secs_f64();
                    let done = a.accepted;
                    attempts.push(a);
                    let o = Outcome { cfg: rc, seed: Some(seed.clone()), steady: Some(steady.clone()), run, certs };
                    if done || best.as_ref().is_none_or(|b| count(b) < count(&o)) {
                        best = Some(o);
                    }
                    if done {
                        break 'cands;
                    }
                }
                Err(e) => {
                    log(format!("continuation failed: {e}"));
                    a.error = Some(e.to_string());
                    a.seconds = t1.elapsed().as_secs_f64();
                    attempts.push(a);
                }
            }
        }
    }
    best.ok_or_else(|| RunError::Input("no candidate configuration produced a branch".into()))
}

fn summarize(verb: &str, cfg: &RunConfig, run: &BranchRun, certs: &[Certificate], spot_failed: usize, attempts: Vec<Attempt>) -> Summary {
    let chain = longest_validated_chain(certs);
    let validated = certs.iter().filter(|c| c.validated).count();
    Summary {
        verb: verb.into(),
        m: run.truncation.m,
        n: run.truncation.n,
        nu1: cfg.weights.nu1,
        nu2: cfg.weights.nu2,
        mode: run.mode,
        segments: certs.len(),
        validated,
        failed: certs.len() - validated,
        longest_chain: [chain.start, chain.end],
        hopf_crossings: crossings(certs),
        spot_checks_failed: spot_failed,
        attempts,
        success: accepted(certs) && spot_failed == 0,
    }
}

fn write_certificates(cfg: &RunConfig, run: &BranchRun, certs: &[Certificate], out: &Path) -> Result<usize, RunError> {
    let dir = out.join("certificates");
    fs::create_dir_all(&dir)?;
    for (i, c) in certs.iter().enumerate() {
        write_json(&dir.join(format!("segment_{i:03}.json")), c)?;
    }
    let samples = cfg.validation.spot_samples;
    let mut failed = 0;
    if samples > 0 {
        let vc = cfg.validation_config();
        for (i, (seg, c)) in run.segments.iter().zip(certs).enumerate().filter(|(_, (_, c))| c.validated) {
            match spot_check(&seg.anchors(run.mode), run.truncation, c, &vc, samples, cfg.run.seed.wrapping_add(i as u64)) {
                Ok(rep) => {
                    log(format!("spot check {i}: max ratio {:.4} vs bound {:.4}", rep.max_ratio, rep.bound));
                    failed += usize::from(!rep.passed);
                    write_json(&dir.join(format!("spot_{i:03}.json")), &rep)?;
                }
                Err(e) => {
                    log(format!("spot check {i} failed: {e}"));
                    failed += 1;
                }
            }
        }
    }
    Ok(failed)
}

fn finish(verb: &str, cfg: &RunConfig, run: &BranchRun, certs: &[Certificate], attempts: Vec<Attempt>, out: &Path) -> Result<i32, RunError> {
    let spot_failed = write_certificates(cfg, run, certs, out)?;
    let s = summarize(verb, cfg, run, certs, spot_failed, attempts);
    write_json(&out.join("summary.json"), &s)?;
    log(format!(
        "{} of {} segments validated, longest chain {:?}, {} Hopf crossing(s)",
        s.validated,
        s.segments,
        s.longest_chain,
        s.hopf_crossings.len()
    ));
    Ok(if s.success { EXIT_OK } else { EXIT_FAILED })
}

fn execute(verb: &Verb, cfg: &RunConfig) -> Result<i32, RunError> {
    let out = cfg.run.out.clone();
    fs::create_dir_all(&out)?;
    match verb {
        Verb::Steady => {
            let b = compute_steady(cfg)?;
            write_steady(&b, &out)?;
            Ok(EXIT_OK)
        }
        Verb::HopfSeed => {
            let seed = hopf_seed_on(&compute_steady(cfg)?, cfg.truncation(), cfg.newton())?;
            log(format!("Hopf point lambda2={:.10} omega={:.10}, seed residual {:.3e}", seed.hopf.steady.lambda2, seed.hopf.omega, seed.residual));
            write_seed(cfg, &seed, &out)?;
            Ok(EXIT_OK)
        }
        Verb::Continue => {
            let seed = hopf_seed_on(&compute_steady(cfg)?, cfg.truncation(), cfg.newton())?;
            let run = step_branch(&seed.x0, cfg.truncation(), &cfg.step_config(), &cfg.weights())?;
            log(format!("{} segments, amplitude sign changes in {:?}", run.segments.len(), run.hopf_crossings()));
            write_seed(cfg, &seed, &out)?;
            write_branch(cfg, &run, &out)?;
            Ok(EXIT_OK)
        }
        Verb::Validate { run: Some(path) } => {
            let rj = read_run_json(path)?;
            let run = rj.to_run().map_err(ExportError::from)?;
            let mut c = cfg.clone();
            c.truncation.m = run.truncation.m;
            c.truncation.n = run.truncation.n;
            c.weights.nu1 = rj.nu1;
            c.weights.nu2 = rj.nu2;
            c.continuation.mode = run.mode;
            let certs = validate(&c, &run);
            finish("validate", &c, &run, &certs, Vec::new(), &out)
        }
        Verb::Validate { run: None } | Verb::All => {
            let mut attempts = Vec::new();
            let o = search(cfg, &mut attempts)?;
            let name = if matches!(verb, Verb::All) { "all" } else { "validate" };
            if matches!(verb, Verb::All) {
                if let Some(b) = &o.steady {
                    write_steady(b, &out)?;
                }
            }
            if let Some(seed) = &o.seed {
                write_seed(&o.cfg, seed, &out)?;
            }
            write_branch(&o.cfg, &o.run, &out)?;
            fs::write(out.join("resolved.toml"), o.cfg.to_toml())?;
            finish(name, &o.cfg, &o.run, &o.certs, attempts, &out)
        }
    }
}

/// Parse, resolve and run. Config errors exit with 2 before anything is
/// written.
pub fn run(cli: Cli) -> i32 {
    let cfg = match cli.overrides.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kshopf: {e}");
            return EXIT_CONFIG;
        }
    };
    if cli.overrides.dry_run {
        println!("{}", cfg.to_toml());
        println!("# planned segments: {}", cfg.segment_count());
        println!("# candidate configurations: {}", cfg.candidates().len());
        return EXIT_OK;
    }
    let threads = cfg.run.threads;
    with_threads(threads, || match execute(&cli.verb, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kshopf: {e}");
            EXIT_FAILED
        }
    })
}

pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let cli = Cli::try_parse_from(["kshopf", "continue", "--M", "12", "--nu1", "1.1", "--a-from", "-0.02", "--mode", "pseudo_arclength", "--no-search"]).unwrap();
        let c = cli.overrides.resolve().unwrap();
        assert_eq!(c.truncation.m, 12);
        assert_eq!(c.weights.nu1, 1.1);
        assert_eq!(c.continuation.a_from, -0.02);
        assert_eq!(c.continuation.mode, ContinuationMode::PseudoArclength);
        assert!(!c.search.enabled);
    }

    #[test]
    fn invalid_override_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let code = main_from(["kshopf", "all", "--R", "-1", "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(!out.exists());
    }

    #[test]
    fn crossing_interval_encloses_root() {
        let s = crossing_interval(-0.0025, 0.0025).unwrap();
        assert!(s[0] <= 0.5 && 0.5 <= s[1] && s[1] - s[0] < 1e-15);
        assert!(crossing_interval(0.001, 0.002).is_none());
        assert!(crossing_interval(0.0, 0.002).is_none());
    }
}
