//! Command-line front end: configuration, dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant as Clock;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::energy::{theta_scaling_integrals, u_app_energy};
use crate::error::{Error, Result};
use crate::evolver::{
    estimate_blowup_time, fit_type2_rate, init, run, EvolutionGrid, EvolverConfig, InitialData,
    RateModel, RunStatus, RunSummary,
};
use crate::grid::{GridSpec, RadialFunction};
use crate::profile::{rates, BlowupProfile, Instant, ResidualSpec};
use crate::spectral::{
    estimate_mu1_infinity, gap_scaling_check, solve_dirichlet_eigen, solve_pm, EigenResult,
};
use crate::verify::{run_suite, VerifySettings};

pub const SCHEMA_VERSION: u32 = 1;
/// Fewest Γ/T₁ grid nodes accepted from a config.
pub const MIN_GRID_NODES: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "blowup-lab",
    version,
    about = "Type II blowup laboratory for u_t = Δu + |u|u in six dimensions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// τ values, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Ball radii, comma separated.
    #[arg(long = "R", global = true, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Cutoff radii for p_M, comma separated.
    #[arg(long = "M", global = true, value_delimiter = ',')]
    pub m_values: Option<Vec<f64>>,
    /// Initial data: constant:A, uapp:τ0 or file:path.csv.
    #[arg(long, global = true)]
    pub data: Option<String>,
    /// Check tolerance (verify) or Richardson tolerance (residual).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Run the identity suite and write verify.json.
    Verify,
    /// Write profile.csv.
    Profile,
    /// Write residual.csv and residual_summary.json.
    Residual,
    /// Write spectrum.csv and spectrum.json.
    Spectrum,
    /// Write evolve.csv and evolve_summary.json.
    Evolve,
    /// Write energy.csv.
    Energy,
}

/// Evolution settings; unset fields are chosen from the data.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSettings {
    pub radius: Option<f64>,
    pub h0: Option<f64>,
    pub ratio: Option<f64>,
    pub h_max: Option<f64>,
    pub t_end: Option<f64>,
    pub max_steps: Option<u64>,
    pub reaction_factor: Option<f64>,
    pub record_every: Option<u64>,
    pub auto_regrid: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(rename = "T")]
    pub t_blow: f64,
    pub tau: Option<Vec<f64>>,
    pub profile_points: usize,
    pub residual_y: Vec<f64>,
    pub residual_z: Vec<f64>,
    pub matching_tau: Vec<f64>,
    #[serde(rename = "R")]
    pub radii: Vec<f64>,
    pub indices: Vec<usize>,
    #[serde(rename = "M")]
    pub m_values: Vec<f64>,
    pub pm_r_max: f64,
    pub data: String,
    pub evolve: EvolveSettings,
    pub scaling_tau: Vec<f64>,
    pub tol: f64,
    pub alpha_scale: f64,
    pub seed: u64,
    pub samples: usize,
    pub gamma_grid: GridSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let res = ResidualSpec::default();
        Self {
            schema: SCHEMA_VERSION,
            t_blow: 1.0,
            tau: None,
            profile_points: 200,
            residual_y: res.y_values,
            residual_z: res.z_values,
            matching_tau: vec![15.0, 25.0, 35.0, 45.0],
            radii: vec![10.0, 20.0, 40.0],
            indices: vec![1],
            m_values: vec![20.0],
            pm_r_max: 400.0,
            data: "constant:1.0".into(),
            evolve: EvolveSettings::default(),
            scaling_tau: vec![50.0, 100.0, 200.0],
            tol: 1e-6,
            alpha_scale: 1.0,
            seed: 7,
            samples: 100,
            gamma_grid: GridSpec::default(),
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl RunConfig {
    pub fn taus(&self, cmd: Command) -> Vec<f64> {
        let mut t = self.tau.clone().unwrap_or_else(|| match cmd {
            Command::Energy => vec![15.0, 20.0, 25.0, 30.0, 35.0],
            _ => vec![15.0, 25.0, 35.0],
        });
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    /// Checks every field the command will use before anything runs.
    pub fn validate(&self, cmd: Command) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(bad(format!(
                "schema {} is not supported (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if !(self.t_blow > 0.0 && self.t_blow.is_finite()) {
            return Err(bad("T must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(bad("tol must be positive"));
        }
        if !(self.alpha_scale > 0.0) {
            return Err(bad("alpha_scale must be positive"));
        }
        if self.samples == 0 {
            return Err(bad("samples must be positive"));
        }
        let g = &self.gamma_grid;
        g.validate()?;
        if g.nodes < MIN_GRID_NODES || g.r_min > 0.05 || g.r_max < 50.0 {
            return Err(bad(format!(
                "gamma_grid must have at least {MIN_GRID_NODES} nodes on a range covering [0.05, 50], got {g:?}"
            )));
        }
        let taus = self.taus(cmd);
        if matches!(cmd, Command::Profile | Command::Residual | Command::Energy)
            && (taus.is_empty() || taus.iter().any(|t| !(10.0..=45.0).contains(t))) {
                return Err(bad(format!("τ values must lie in [10, 45], got {taus:?}")));
            }
        if self.profile_points < 2 {
            return Err(bad("profile_points must be at least 2"));
        }
        if self.matching_tau.iter().any(|t| !(10.0..=45.0).contains(t)) {
            return Err(bad("matching_tau values must lie in [10, 45]"));
        }
        if self
            .residual_y
            .iter()
            .chain(&self.residual_z)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(bad("residual radii must be finite and non-negative"));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r >= 5.0 && r.is_finite())) {
            return Err(bad(format!(
                "R values must be at least 5, got {:?}",
                self.radii
            )));
        }
        if self.indices.is_empty() || self.indices.iter().any(|i| !(1..=3).contains(i)) {
            return Err(bad("indices must be 1, 2 or 3"));
        }
        if self.m_values.iter().any(|m| !(*m > 0.0)) {
            return Err(bad("M values must be positive"));
        }
        let m_max = self.m_values.iter().cloned().fold(0.0, f64::max);
        if !(self.pm_r_max >= 10.0 * m_max) {
            return Err(bad(format!(
                "pm_r_max must be at least 10·max M = {}",
                10.0 * m_max
            )));
        }
        if self
            .scaling_tau
            .iter()
            .any(|t| !(*t >= 10.0 && t.is_finite()))
        {
            return Err(bad("scaling_tau values must be at least 10"));
        }
        if cmd == Command::Evolve {
            parse_data(&self.data)?;
            let e = &self.evolve;
            for (name, v) in [
                ("radius", e.radius),
                ("h0", e.h0),
                ("h_max", e.h_max),
                ("t_end", e.t_end),
                ("reaction_factor", e.reaction_factor),
            ] {
                if let Some(v) = v {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(bad(format!("evolve.{name} must be positive")));
                    }
                }
            }
            if e.ratio.is_some_and(|r| !(r >= 1.0)) {
                return Err(bad("evolve.ratio must be at least 1"));
            }
            if e.record_every == Some(0) || e.max_steps == Some(0) {
                return Err(bad(
                    "evolve.record_every and evolve.max_steps must be positive",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Constant(f64),
    Uapp(f64),
    File(PathBuf),
}

pub fn parse_data(s: &str) -> Result<DataSpec> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let num = |a: &str, default: f64| -> Result<f64> {
        if a.is_empty() {
            Ok(default)
        } else {
            a.parse::<f64>()
                .map_err(|_| bad(format!("cannot parse '{a}' in data spec '{s}'")))
        }
    };
    match kind {
        "constant" => {
            let a = num(arg, 1.0)?;
            if !a.is_finite() {
                return Err(bad("constant data must be finite"));
            }
            Ok(DataSpec::Constant(a))
        }
        "zero" => Ok(DataSpec::Constant(0.0)),
        "uapp" => {
            let t = num(arg, 12.0)?;
            if !(10.0..=45.0).contains(&t) {
                return Err(bad("uapp:τ0 needs τ0 in [10, 45]"));
            }
            Ok(DataSpec::Uapp(t))
        }
        "file" if !arg.is_empty() => Ok(DataSpec::File(PathBuf::from(arg))),
        _ => Err(bad(format!(
            "unknown data spec '{s}' (use constant:A, uapp:τ0 or file:path)"
        ))),
    }
}

fn read_sampled(path: &Path) -> Result<RadialFunction> {
    #[derive(Deserialize)]
    struct Row {
        r: f64,
        u: f64,
    }
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let (mut g, mut v) = (Vec::new(), Vec::new());
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| bad(format!("{}: {e}", path.display())))?;
        g.push(row.r);
        v.push(row.u);
    }
    RadialFunction::new(g, v)
}

/// Outcome of one command.
#[derive(Debug)]
pub enum Failure {
    Check(String),
    Config(Error),
    Numerical(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Check(s) => write!(f, "check failed: {s}"),
            Failure::Config(e) => write!(f, "invalid configuration: {e}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

/// Files written so far; removed again if the command fails.
struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).map_err(|e| io_err(&p, e))?;
        for r in rows {
            w.serialize(r).map_err(|e| io_err(&p, e))?;
        }
        w.flush().map_err(|e| io_err(&p, e))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        let s = serde_json::to_string_pretty(value).map_err(|e| io_err(&p, e))?;
        fs::write(&p, s + "\n").map_err(|e| io_err(&p, e))
    }

    fn discard(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

fn io_err(p: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("writing {}: {e}", p.display()))
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| bad(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(t) = &cli.tau {
        cfg.tau = Some(t.clone());
    }
    if let Some(r) = &cli.radii {
        cfg.radii = r.clone();
    }
    if let Some(m) = &cli.m_values {
        cfg.m_values = m.clone();
    }
    if let Some(d) = &cli.data {
        cfg.data = d.clone();
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    Ok(cfg)
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: Command,
    version: String,
    config: &'a RunConfig,
    outputs: Vec<String>,
    wall_time_s: f64,
}

/// Parses the configuration, runs the command and writes its outputs.
pub fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    let cfg = load_config(cli).map_err(Failure::Config)?;
    cfg.validate(cli.command).map_err(Failure::Config)?;
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Failure::Config(bad("--jobs must be positive")));
        }
        // A pool that was already configured is kept.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    fs::create_dir_all(&cli.out).map_err(|e| Failure::Config(io_err(&cli.out, e)))?;
    let mut out = Outputs {
        dir: cli.out.clone(),
        written: Vec::new(),
    };
    let clock = Clock::now();
    let result = dispatch(cli.command, &cfg, &mut out).and_then(|check| {
        let outputs = out
            .written
            .iter()
            .filter_map(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .collect();
        let manifest = Manifest {
            command: cli.command,
            version: format!("{} ({})", env!("CARGO_PKG_VERSION"), git_describe()),
            config: &cfg,
            outputs,
            wall_time_s: clock.elapsed().as_secs_f64(),
        };
        out.json("manifest.json", &manifest)?;
        Ok(check)
    });
    match result {
        Ok(None) => Ok(()),
        Ok(Some(failed)) => Err(Failure::Check(failed)),
        Err(e) => {
            out.discard();
            Err(match e {
                Error::InvalidInput(_) => Failure::Config(e),
                _ => Failure::Numerical(e),
            })
        }
    }
}

/// Returns the names of failed checks, if any.
fn dispatch(cmd: Command, cfg: &RunConfig, out: &mut Outputs) -> Result<Option<String>> {
    match cmd {
        Command::Verify => cmd_verify(cfg, out),
        Command::Profile => cmd_profile(cfg, out).map(|_| None),
        Command::Residual => cmd_residual(cfg, out).map(|_| None),
        Command::Spectrum => cmd_spectrum(cfg, out).map(|_| None),
        Command::Evolve => cmd_evolve(cfg, out).map(|_| None),
        Command::Energy => cmd_energy(cfg, out).map(|_| None),
    }
}

fn cmd_verify(cfg: &RunConfig, out: &mut Outputs) -> Result<Option<String>> {
    let settings = VerifySettings {
        gamma_grid: cfg.gamma_grid,
        alpha_scale: cfg.alpha_scale,
        tol: cfg.tol,
        samples: cfg.samples,
        seed: cfg.seed,
        radii: cfg.radii.clone(),
    };
    let report = run_suite(&settings)?;
    out.json("verify.json", &report)?;
    Ok((!report.all_pass).then(|| report.failing().join(", ")))
}

fn standard_profile(cfg: &RunConfig) -> Result<BlowupProfile> {
    let p = BlowupProfile::standard(cfg.t_blow)?;
    let a = p.alpha * cfg.alpha_scale;
    p.with_alpha(a)
}

#[derive(Serialize)]
struct ProfileRow {
    t: f64,
    tau: f64,
    x: f64,
    z: f64,
    y: f64,
    u_app: f64,
    theta: f64,
    #[serde(rename = "Q_term")]
    q_term: f64,
    #[serde(rename = "T1_term")]
    t1_term: f64,
    chi1: f64,
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
}

fn cmd_profile(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let p = standard_profile(cfg)?;
    let mut rows = Vec::new();
    for tau in cfg.taus(Command::Profile) {
        let at = Instant::from_tau(tau)?;
        let lam = rates(&at).lambda0;
        let rs = at.s.sqrt();
        let mut xs: Vec<f64> = std::iter::once(0.0)
            .chain(log_space(1e-2 * lam, 1e4 * lam, cfg.profile_points))
            .chain(log_space(1e-3 * rs, 10.0 * rs, cfg.profile_points))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for x in xs {
            let parts = p.u_app_parts(x, &at)?;
            rows.push(ProfileRow {
                t: p.t_blow - at.s,
                tau,
                x,
                z: x / rs,
                y: x / lam,
                u_app: parts.u,
                theta: parts.theta,
                q_term: parts.q_term,
                t1_term: parts.t1_term,
                chi1: parts.chi1,
            });
        }
    }
    out.csv("profile.csv", &rows)
}

#[derive(Serialize)]
struct ResidualRow {
    t: f64,
    tau: f64,
    x: f64,
    region: &'static str,
    residual: f64,
    normalized_residual: f64,
}

fn cmd_residual(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let p = standard_profile(cfg)?;
    let spec = ResidualSpec {
        taus: cfg.taus(Command::Residual),
        y_values: cfg.residual_y.clone(),
        z_values: cfg.residual_z.clone(),
        richardson_tolerance: if cfg.tol == RunConfig::default().tol {
            1e-4
        } else {
            cfg.tol
        },
        ..ResidualSpec::default()
    };
    let field = p.pde_residual(&spec)?;
    let rows: Vec<ResidualRow> = field
        .samples
        .iter()
        .map(|s| ResidualRow {
            t: s.t,
            tau: s.tau,
            x: s.x,
            region: s.region.as_str(),
            residual: s.residual,
            normalized_residual: s.normalized,
        })
        .collect();
    out.csv("residual.csv", &rows)?;
    let matching = p.matching_residual(&cfg.matching_tau, &[0.1, 0.2])?;
    #[derive(Serialize)]
    struct Summary<'a> {
        inner_max: f64,
        selfsimilar_max: f64,
        richardson_flagged: usize,
        matching: &'a crate::profile::MatchingReport,
    }
    out.json(
        "residual_summary.json",
        &Summary {
            inner_max: field.inner_max,
            selfsimilar_max: field.selfsimilar_max,
            richardson_flagged: field.flagged,
            matching: &matching,
        },
    )
}

fn cmd_spectrum(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    use rayon::prelude::*;
    let mut radii = cfg.radii.clone();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let jobs: Vec<(f64, usize)> = radii
        .iter()
        .flat_map(|&r| cfg.indices.iter().map(move |&i| (r, i)))
        .collect();
    let rows: Vec<EigenResult> = jobs
        .par_iter()
        .map(|&(r, i)| solve_dirichlet_eigen(r, i))
        .collect::<Result<_>>()?;
    out.csv("spectrum.csv", &rows)?;
    let mu1 = if radii.len() >= 3 {
        Some(estimate_mu1_infinity(&radii)?)
    } else {
        None
    };
    let gap = gap_scaling_check(&radii)?;
    let pm = cfg
        .m_values
        .iter()
        .map(|&m| solve_pm(m, cfg.pm_r_max))
        .collect::<Result<Vec<_>>>()?;
    #[derive(Serialize)]
    struct Summary<'a> {
        eigen: &'a [EigenResult],
        mu1: Option<crate::spectral::Mu1Estimate>,
        gap: crate::spectral::GapReport,
        pm: Vec<crate::spectral::PerturbedSolution>,
    }
    out.json(
        "spectrum.json",
        &Summary {
            eigen: &rows,
            mu1,
            gap,
            pm,
        },
    )
}

#[derive(Serialize)]
struct EvolveRow {
    step: u64,
    t: f64,
    dt: f64,
    u_center: f64,
    sup_abs: f64,
    min_u: f64,
    lambda_est: Option<f64>,
}

fn cmd_evolve(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let e = &cfg.evolve;
    let mut config = EvolverConfig::default();
    if let Some(v) = e.max_steps {
        config.max_steps = v;
    }
    if let Some(v) = e.reaction_factor {
        config.reaction_factor = v;
    }
    if let Some(v) = e.record_every {
        config.record_every = v;
    }
    config.auto_regrid = e.auto_regrid;
    let (data, grid, t_end) = match parse_data(&cfg.data)? {
        DataSpec::Constant(a) => {
            let scale = if a.abs() > 0.0 {
                1.0 / a.abs().sqrt()
            } else {
                1.0
            };
            let radius = e.radius.unwrap_or(12.0 * scale);
            let h = e.h0.unwrap_or(radius / 600.0);
            let grid = EvolutionGrid {
                radius,
                h0: h,
                ratio: e.ratio.unwrap_or(1.0),
                h_max: e.h_max.unwrap_or(h),
            };
            let t_end = e.t_end.unwrap_or(if a > 0.0 { 2.0 / a } else { 1.0 });
            (InitialData::Constant(a), grid, t_end)
        }
        DataSpec::Uapp(tau0) => {
            let profile = standard_profile(cfg)?;
            let at = Instant::from_tau(tau0)?;
            let lam = rates(&at).lambda0;
            let rs = at.s.sqrt();
            let grid = EvolutionGrid {
                radius: e.radius.unwrap_or(4.0 * rs),
                h0: e.h0.unwrap_or(lam / 20.0),
                ratio: e.ratio.unwrap_or(1.03),
                h_max: e.h_max.unwrap_or(rs / 20.0),
            };
            let t_end = e.t_end.unwrap_or(profile.t_blow - 0.5 * at.s);
            config.blowup_threshold = config.blowup_threshold.max(1e3 / (lam * lam));
            if e.max_steps.is_none() {
                config.max_steps = 2_000_000;
                config.record_every = e.record_every.unwrap_or(1000);
            }
            (
                InitialData::Profile {
                    profile: Box::new(profile),
                    tau0,
                },
                grid,
                t_end,
            )
        }
        DataSpec::File(path) => {
            let f = read_sampled(&path)?;
            let radius = e.radius.unwrap_or(f.r_max());
            let h = e.h0.unwrap_or(radius / 600.0);
            let grid = EvolutionGrid {
                radius,
                h0: h,
                ratio: e.ratio.unwrap_or(1.0),
                h_max: e.h_max.unwrap_or(h),
            };
            (InitialData::Sampled(f), grid, e.t_end.unwrap_or(1.0))
        }
    };
    let mut state = init(&data, &grid, &config)?;
    let outcome = run(&mut state, &config, t_end);
    let history = state.history.make_contiguous().to_vec();
    let rows: Vec<EvolveRow> = history
        .iter()
        .map(|h| EvolveRow {
            step: h.step,
            t: h.t,
            dt: h.dt,
            u_center: h.u_center,
            sup_abs: h.sup_abs,
            min_u: h.min_u,
            lambda_est: h.lambda_est(),
        })
        .collect();
    out.csv("evolve.csv", &rows)?;
    let blowup = match outcome {
        RunStatus::BlownUp { .. } => estimate_blowup_time(&history),
        _ => Err(Error::InvalidInput("the run ended before blowup".into())),
    };
    let (rate_fit, rate_fit_error) = match &blowup {
        Ok(b) => {
            let traj: Vec<(f64, f64)> = history
                .iter()
                .filter_map(|h| h.lambda_est().map(|l| (h.t, l)))
                .filter(|(t, _)| (0.0..1.0).contains(&(b.t_est - t)))
                .collect();
            match fit_type2_rate(&traj, b.t_est, RateModel::Free) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        Err(_) => (None, Some("no blowup time estimate".into())),
    };
    let summary = RunSummary {
        outcome,
        steps: state.step_count,
        nodes: state.grid.len(),
        blowup: blowup.as_ref().ok().copied(),
        blowup_error: blowup.err().map(|e| e.to_string()),
        rate_fit,
        rate_fit_error,
    };
    out.json("evolve_summary.json", &summary)
}

#[derive(Serialize)]
struct EnergyRow {
    tau: f64,
    t: Option<f64>,
    grad_term: Option<f64>,
    cubic_term: Option<f64>,
    e_loc: Option<f64>,
    #[serde(rename = "I3")]
    i3: f64,
    #[serde(rename = "Igrad")]
    igrad: f64,
    #[serde(rename = "I3_over_tau3logtau")]
    i3_ratio: f64,
    #[serde(rename = "Igrad_over_tau2logtau")]
    igrad_ratio: f64,
}

fn cmd_energy(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    use rayon::prelude::*;
    let p = standard_profile(cfg)?;
    let ac1 = p.alpha * p.basis.c[1];
    let e_taus = cfg.taus(Command::Energy);
    let mut all: Vec<f64> = e_taus.iter().chain(&cfg.scaling_tau).cloned().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let rows: Vec<EnergyRow> = all
        .par_iter()
        .map(|&tau| {
            let sc = theta_scaling_integrals(ac1, tau)?;
            let e = if e_taus.contains(&tau) {
                Some(u_app_energy(&p, tau)?)
            } else {
                None
            };
            Ok(EnergyRow {
                tau,
                t: e.map(|e| e.t),
                grad_term: e.map(|e| e.grad_term),
                cubic_term: e.map(|e| e.cubic_term),
                e_loc: e.map(|e| e.e_loc),
                i3: sc.i3,
                igrad: sc.i_grad,
                i3_ratio: sc.i3_over_tau3logtau,
                igrad_ratio: sc.igrad_over_tau2logtau,
            })
        })
        .collect::<Result<_>>()?;
    out.csv("energy.csv", &rows)
}
