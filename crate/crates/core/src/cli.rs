//! Configuration-driven command-line front end.
//!
//! A run is described by a [`RunConfig`] (JSON, `schema_version` 1, unknown
//! keys rejected), optionally loaded with `--config` and then overridden by
//! flags. Every command writes CSV files plus a plain-text report into the
//! output directory. Numbers are printed with 17 significant digits.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::caputo::UniformGrid;
use crate::delay_series::Delay;
use crate::error::{Error, Result};
use crate::history::HistorySpec;
use crate::oracle::{compatible_step, solve_fdde_with, AbmOptions, OracleSystem};
use crate::pde_verify::{
    convergence_study, default_params, linspace, named_solution, AssembledSolution, Coefficient, SolutionName,
    SolutionParams,
};
use crate::subspace::catalog::{catalog, CatalogParams};
use crate::subspace::{
    check_invariance_with, reduce_to_fdde, InvarianceOptions, OperatorSpec, ReducedSystem, Subspace, DEFAULT_SEED,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Solve,
    Verify,
    Invariance,
    OracleCompare,
}

/// An operator and space given directly instead of a named solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub alpha: f64,
    pub operator: OperatorSpec,
    pub subspace: Subspace,
    /// One `tau_i` per entry of `operator.delta`.
    pub taus: Vec<f64>,
    pub histories: Vec<HistorySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceConfig {
    pub trials: usize,
    pub tol: f64,
    /// Catalog ids to run; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<String>>,
    /// Random parameter points per entry in addition to the default point.
    #[serde(default)]
    pub random_points: usize,
    /// Also run each entry with its constraint broken by 10%.
    #[serde(default)]
    pub perturbed: bool,
    pub interval: (f64, f64),
    pub points_per_dim: usize,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        let o = InvarianceOptions::default();
        Self {
            trials: 10,
            tol: 1e-9,
            entries: None,
            random_points: 0,
            perturbed: false,
            interval: o.interval,
            points_per_dim: o.points_per_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Requested step; reduced to the largest delay-compatible step.
    pub h: f64,
    pub corrector_sweeps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 512.0,
            corrector_sweeps: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SolutionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomProblem>,
    /// `[x0, x1, nx]`.
    #[serde(default = "default_x_grid")]
    pub x_grid: (f64, f64, usize),
    /// `[0, T, nt]`; defaults to `[0, 2 tau*, 513]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<(f64, f64, usize)>,
    /// Number of step sizes in the `verify` study (each half the previous).
    #[serde(default = "default_refinements")]
    pub refinements: usize,
    /// Start of the residual window; defaults to `4 h` of the coarsest grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default)]
    pub invariance: InvarianceConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_x_grid() -> (f64, f64, usize) {
    (0.0, 1.0, 11)
}

fn default_refinements() -> usize {
    3
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: None,
            solution: None,
            params: None,
            custom: None,
            x_grid: default_x_grid(),
            t_grid: None,
            refinements: default_refinements(),
            t_min: None,
            invariance: InvarianceConfig::default(),
            oracle: OracleConfig::default(),
            seed: default_seed(),
            out: default_out(),
        }
    }
}

impl RunConfig {
    /// Parse JSON, reporting the path of the offending key on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>".to_string() } else { path }, e.inner().to_string())
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Fill in everything that has a default, so the config can be echoed
    /// and re-run unchanged.
    pub fn materialize(&mut self) -> Result<()> {
        if self.params.is_none() {
            if let Some(name) = self.solution {
                self.params = Some(default_params(name));
            }
        }
        if self.t_grid.is_none() && self.command != Some(CommandKind::Invariance) {
            if let Some(tau) = self.tau_star() {
                self.t_grid = Some((0.0, 2.0 * tau, 513));
            }
        }
        if self.t_min.is_none() && self.command == Some(CommandKind::Verify) {
            if let Some((t0, t1, nt)) = self.t_grid {
                if nt >= 2 {
                    self.t_min = Some(4.0 * (t1 - t0) / (nt - 1) as f64);
                }
            }
        }
        Ok(())
    }

    fn tau_star(&self) -> Option<f64> {
        if let Some(c) = &self.custom {
            return c.taus.iter().copied().reduce(f64::max);
        }
        self.params
            .as_ref()
            .and_then(|p| p.delays.iter().map(|d| d.tau).reduce(f64::max))
    }

    /// Check everything that can be checked before computing.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let command = self.command.ok_or_else(|| Error::config("command", "no command given"))?;
        let (x0, x1, nx) = self.x_grid;
        if !(x0.is_finite() && x1.is_finite() && x1 >= x0) || nx == 0 {
            return Err(Error::config("x_grid", "need x0 <= x1 and nx >= 1"));
        }
        if let Some((t0, t1, nt)) = self.t_grid {
            if t0 != 0.0 {
                return Err(Error::config("t_grid[0]", "time grids start at 0"));
            }
            if !(t1 > 0.0 && t1.is_finite()) || nt < 2 {
                return Err(Error::config("t_grid", "need T > 0 and nt >= 2"));
            }
        }
        if self.refinements == 0 {
            return Err(Error::config("refinements", "must be at least 1"));
        }
        if let Some(t) = self.t_min {
            if !(t >= 0.0) {
                return Err(Error::config("t_min", "must be non-negative"));
            }
        }
        if !(self.oracle.h > 0.0) {
            return Err(Error::config("oracle.h", "must be positive"));
        }
        if self.oracle.corrector_sweeps == 0 {
            return Err(Error::config("oracle.corrector_sweeps", "must be at least 1"));
        }
        let inv = &self.invariance;
        if inv.trials < 10 {
            return Err(Error::config("invariance.trials", "must be at least 10"));
        }
        if !(inv.tol > 0.0) {
            return Err(Error::config("invariance.tol", "must be positive"));
        }
        if !(inv.interval.1 > inv.interval.0) {
            return Err(Error::config("invariance.interval", "must be a non-empty interval"));
        }
        if inv.points_per_dim == 0 {
            return Err(Error::config("invariance.points_per_dim", "must be positive"));
        }
        if let Some(ids) = &inv.entries {
            for (i, id) in ids.iter().enumerate() {
                if !catalog().iter().any(|e| e.id == id) {
                    return Err(Error::config(format!("invariance.entries[{i}]"), format!("unknown entry `{id}`")));
                }
            }
        }
        if let Some(p) = &self.params {
            check_params(p)?;
        }
        if let Some(c) = &self.custom {
            check_custom(c)?;
        }
        if self.solution.is_some() && self.custom.is_some() {
            return Err(Error::config("custom", "give either `solution` or `custom`, not both"));
        }
        if command != CommandKind::Invariance && self.solution.is_none() && self.custom.is_none() {
            return Err(Error::config("solution", "no solution or custom problem given"));
        }
        Ok(())
    }
}

fn check_alpha(field: &str, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::config(field, format!("{alpha} is not in (0, 1]")));
    }
    Ok(())
}

fn check_params(p: &SolutionParams) -> Result<()> {
    check_alpha("params.alpha", p.alpha)?;
    for (i, d) in p.delays.iter().enumerate() {
        if !(d.tau > 0.0) || !d.tau.is_finite() {
            return Err(Error::config(format!("params.delays[{i}].tau"), format!("{} must be positive", d.tau)));
        }
        if !d.delta.is_finite() {
            return Err(Error::config(format!("params.delays[{i}].delta"), "must be finite"));
        }
    }
    Ok(())
}

fn check_custom(c: &CustomProblem) -> Result<()> {
    check_alpha("custom.alpha", c.alpha)?;
    c.operator
        .validate()
        .map_err(|e| Error::config("custom.operator", e.to_string()))?;
    if c.taus.len() != c.operator.delta.len() {
        return Err(Error::config(
            "custom.taus",
            format!("{} delays but {} delta values", c.taus.len(), c.operator.delta.len()),
        ));
    }
    for (i, &tau) in c.taus.iter().enumerate() {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::config(format!("custom.taus[{i}]"), format!("{tau} must be positive")));
        }
    }
    if c.histories.len() != c.subspace.dim() {
        return Err(Error::config(
            "custom.histories",
            format!("{} histories for a {}-dimensional space", c.histories.len(), c.subspace.dim()),
        ));
    }
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "fdrd", version, about = "Exact solutions of fractional reaction-diffusion equations with delay")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write u(x, t) on the configured grid.
    Solve(CommonArgs),
    /// Caputo residual study of a solution.
    Verify(CommonArgs),
    /// Run the invariance check over the catalog.
    Invariance {
        #[command(flatten)]
        common: CommonArgs,
        /// Run every catalog entry (the default when no --entry is given).
        #[arg(long)]
        all: bool,
        /// Catalog id to run; repeatable.
        #[arg(long = "entry", value_name = "ID")]
        entries: Vec<String>,
    },
    /// Compare closed-form coefficients with the numerical oracle.
    OracleCompare(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    pub solution: Option<SolutionName>,
    #[arg(long, value_name = "F")]
    pub alpha: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub dump_config: bool,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

impl Command {
    fn parts(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Solve(c) => (CommandKind::Solve, c),
            Command::Verify(c) => (CommandKind::Verify, c),
            Command::Invariance { common, .. } => (CommandKind::Invariance, common),
            Command::OracleCompare(c) => (CommandKind::OracleCompare, c),
        }
    }
}

/// Build the effective configuration from the arguments.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let (kind, args) = cli.command.parts();
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != kind {
            return Err(Error::config("command", format!("config is for {c:?} but {kind:?} was requested")));
        }
    }
    cfg.command = Some(kind);
    if let Some(name) = args.solution {
        if cfg.solution != Some(name) {
            cfg.params = None;
        }
        cfg.solution = Some(name);
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Command::Invariance { entries, .. } = &cli.command {
        if !entries.is_empty() {
            cfg.invariance.entries = Some(entries.clone());
        }
    }
    cfg.materialize()?;
    if let Some(alpha) = args.alpha {
        if let Some(p) = cfg.params.as_mut() {
            p.alpha = alpha;
        }
        if let Some(c) = cfg.custom.as_mut() {
            c.alpha = alpha;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Files produced by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    fn push(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        for (name, content) in &self.files {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn assemble(cfg: &RunConfig) -> Result<AssembledSolution> {
    if let Some(name) = cfg.solution {
        let params = cfg.params.clone().unwrap_or_else(|| default_params(name));
        return named_solution(name, &params).map_err(|e| match e {
            Error::Config { field, message } => Error::config(format!("params.{field}"), message),
            other => other,
        });
    }
    let c = cfg
        .custom
        .as_ref()
        .ok_or_else(|| Error::config("solution", "no solution or custom problem given"))?;
    let tau_star = c.taus.iter().copied().fold(0.0, f64::max);
    let histories = c
        .histories
        .iter()
        .map(|h| h.build(tau_star))
        .collect::<Result<Vec<_>>>()?;
    let delays: Vec<Delay> = c
        .taus
        .iter()
        .zip(&c.operator.delta)
        .map(|(&tau, &delta)| Delay { tau, delta })
        .collect();
    let reduction = reduce_to_fdde(&c.operator, &c.subspace)?;
    match reduction.bind(c.alpha, &c.taus, histories.clone())? {
        ReducedSystem::Series(problems) => AssembledSolution::new(
            c.alpha,
            c.subspace.clone(),
            c.operator.clone(),
            delays,
            problems.into_iter().map(Coefficient::Series).collect(),
        ),
        ReducedSystem::Oracle(system) => {
            let t_end = cfg.t_grid.map_or(2.0 * tau_star, |g| g.1);
            let h = compatible_step(cfg.oracle.h, system.delays())?;
            let traj = solve_fdde_with(
                &system,
                t_end,
                h,
                AbmOptions {
                    corrector_sweeps: cfg.oracle.corrector_sweeps,
                },
            )?;
            AssembledSolution::from_trajectory(c.alpha, c.subspace.clone(), c.operator.clone(), delays, &traj, histories)
        }
    }
}

fn time_grid(cfg: &RunConfig) -> Result<UniformGrid> {
    let (_, t1, nt) = cfg.t_grid.ok_or_else(|| Error::config("t_grid", "no time grid"))?;
    UniformGrid::new(0.0, t1 / (nt - 1) as f64, nt)
}

fn x_points(cfg: &RunConfig) -> Vec<f64> {
    let (x0, x1, nx) = cfg.x_grid;
    linspace(x0, x1, nx)
}

fn label(cfg: &RunConfig) -> String {
    cfg.solution.map_or_else(|| "custom".to_string(), |n| n.to_string())
}

fn run_solve(cfg: &RunConfig) -> Result<Artifacts> {
    let sol = assemble(cfg)?;
    let grid = time_grid(cfg)?;
    let times = grid.points();
    let xs = x_points(cfg);
    let coeffs: Vec<Vec<f64>> = times.iter().map(|&t| sol.coefficients_at(t)).collect::<Result<_>>()?;
    let mut field = String::from("x");
    for t in &times {
        let _ = write!(field, ",{t:.16e}");
    }
    field.push('\n');
    for &x in &xs {
        let _ = write!(field, "{x:.16e}");
        for a in &coeffs {
            let _ = write!(field, ",{:.16e}", sol.subspace.value(a, x)?);
        }
        field.push('\n');
    }
    let mut coef_csv = String::from("t");
    for j in 1..=sol.subspace.dim() {
        let _ = write!(coef_csv, ",A{j}");
    }
    coef_csv.push('\n');
    for (t, a) in times.iter().zip(&coeffs) {
        let _ = write!(coef_csv, "{t:.16e}");
        for v in a {
            let _ = write!(coef_csv, ",{v:.16e}");
        }
        coef_csv.push('\n');
    }
    let mut report = String::new();
    let _ = writeln!(report, "command: solve");
    let _ = writeln!(report, "solution: {}", label(cfg));
    let _ = writeln!(report, "basis: {}", sol.subspace.labels());
    for (j, m) in sol.modes().iter().enumerate() {
        match m {
            Some((l, c0)) => {
                let _ = writeln!(report, "mode {}: lambda = {l:.16e}, c0 = {c0:.16e}", j + 1);
            }
            None => {
                let _ = writeln!(report, "mode {}: numerical", j + 1);
            }
        }
    }
    let _ = writeln!(report, "grid: nx = {}, nt = {}, h = {:.16e}", xs.len(), times.len(), grid.h);
    let mut out = Artifacts { files: Vec::new() };
    out.push("solution.csv", field);
    out.push("coefficients.csv", coef_csv);
    out.push("report.txt", report);
    Ok(out)
}

fn run_verify(cfg: &RunConfig) -> Result<Artifacts> {
    let sol = assemble(cfg)?;
    let grid = time_grid(cfg)?;
    let steps: Vec<f64> = (0..cfg.refinements).map(|k| grid.h / f64::from(1u32 << k)).collect();
    let t_min = cfg.t_min.unwrap_or(4.0 * grid.h);
    let study = convergence_study(&sol, &x_points(cfg), grid.t_end(), &steps, t_min)?;
    let mut report = String::from("command: verify\n");
    report.push_str(&study.summary());
    let _ = writeln!(
        report,
        "monotone: {}",
        if study.monotone() { "yes" } else { "no" }
    );
    let mut out = Artifacts { files: Vec::new() };
    out.push("residual_field.csv", study.finest().field_csv());
    out.push("report.txt", report);
    Ok(out)
}

fn run_invariance(cfg: &RunConfig) -> Result<Artifacts> {
    let inv = &cfg.invariance;
    let opts = InvarianceOptions {
        seed: cfg.seed,
        interval: inv.interval,
        points_per_dim: inv.points_per_dim,
        ..InvarianceOptions::default()
    };
    let mut csv = String::from("id,point,variant,form,dim,max_residual,condition,verdict\n");
    let (mut total, mut invariant) = (0usize, 0usize);
    let mut row = |csv: &mut String, id: &str, point: usize, variant: &str, op: &OperatorSpec, w: &Subspace| -> Result<()> {
        let r = check_invariance_with(op, w, inv.trials, inv.tol, &opts)?;
        total += 1;
        invariant += usize::from(r.invariant);
        let _ = writeln!(
            csv,
            "{id},{point},{variant},{:?},{},{:.16e},{:.16e},{}",
            op.form,
            w.dim(),
            r.max_residual,
            r.condition,
            r.verdict()
        );
        Ok(())
    };
    if let Some(c) = &cfg.custom {
        row(&mut csv, "custom", 0, "exact", &c.operator, &c.subspace)?;
    } else {
        let mut points = vec![CatalogParams::default()];
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
        for _ in 0..inv.random_points {
            points.push(CatalogParams::random(&mut rng));
        }
        for e in catalog() {
            if let Some(ids) = &inv.entries {
                if !ids.iter().any(|id| id == e.id) {
                    continue;
                }
            }
            for (k, p) in points.iter().enumerate() {
                let (op, w) = e.instantiate(p)?;
                row(&mut csv, e.id, k, "exact", &op, &w)?;
                if inv.perturbed {
                    let (op, w) = e.perturbed(p)?;
                    row(&mut csv, e.id, k, "perturbed", &op, &w)?;
                }
            }
        }
    }
    let mut report = String::from("command: invariance\n");
    let _ = writeln!(report, "trials: {}, tol: {:.16e}, seed: {}", inv.trials, inv.tol, cfg.seed);
    let _ = writeln!(report, "rows: {total}, invariant: {invariant}, not invariant: {}", total - invariant);
    let mut out = Artifacts { files: Vec::new() };
    out.push("invariance.csv", csv);
    out.push("report.txt", report);
    Ok(out)
}

fn run_oracle_compare(cfg: &RunConfig) -> Result<Artifacts> {
    let sol = assemble(cfg)?;
    let problems: Vec<_> = sol
        .coefficients
        .iter()
        .map(|c| c.problem().cloned())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::config("custom", "oracle-compare needs a closed-form (affine) reduction"))?;
    let histories: Vec<_> = problems.iter().map(|p| p.history.clone()).collect();
    let lambdas: Vec<f64> = problems.iter().map(|p| p.lambda).collect();
    let forcing: Vec<f64> = problems.iter().map(|p| p.c0).collect();
    let dim = problems.len();
    let m: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { lambdas[i] } else { 0.0 }).collect())
        .collect();
    let system = OracleSystem::affine(sol.alpha, m, forcing, sol.delays.clone(), histories)?;
    let t_end = time_grid(cfg)?.t_end();
    let h = compatible_step(cfg.oracle.h, system.delays())?;
    let traj = solve_fdde_with(
        &system,
        t_end,
        h,
        AbmOptions {
            corrector_sweeps: cfg.oracle.corrector_sweeps,
        },
    )?;
    let mut csv = String::from("t");
    for j in 1..=dim {
        let _ = write!(csv, ",A{j}_closed,A{j}_oracle,A{j}_relerr");
    }
    csv.push('\n');
    let mut worst = vec![0.0_f64; dim];
    for (t, v) in traj.t.iter().zip(&traj.values) {
        let _ = write!(csv, "{t:.16e}");
        for j in 0..dim {
            let exact = problems[j].eval(*t)?;
            let err = relative_error(exact, v[j]);
            worst[j] = worst[j].max(err);
            let _ = write!(csv, ",{exact:.16e},{:.16e},{err:.16e}", v[j]);
        }
        csv.push('\n');
    }
    let mut report = String::from("command: oracle-compare\n");
    let _ = writeln!(report, "solution: {}", label(cfg));
    let _ = writeln!(report, "alpha: {:.16e}, oracle h: {h:.16e}, T: {t_end:.16e}", sol.alpha);
    for (j, w) in worst.iter().enumerate() {
        let _ = writeln!(report, "A{}: max relative error {w:.16e}", j + 1);
    }
    let mut out = Artifacts { files: Vec::new() };
    out.push("oracle_compare.csv", csv);
    out.push("report.txt", report);
    Ok(out)
}

/// `|a - b| / |a|`, falling back to the absolute error when `|a| < 1e-12`.
pub fn relative_error(exact: f64, approx: f64) -> f64 {
    let d = (exact - approx).abs();
    if exact.abs() < 1e-12 {
        d
    } else {
        d / exact.abs()
    }
}

/// Run a validated configuration and return its artifacts without writing
/// them.
pub fn execute(cfg: &RunConfig) -> Result<Artifacts> {
    match cfg.command {
        Some(CommandKind::Solve) => run_solve(cfg),
        Some(CommandKind::Verify) => run_verify(cfg),
        Some(CommandKind::Invariance) => run_invariance(cfg),
        Some(CommandKind::OracleCompare) => run_oracle_compare(cfg),
        None => Err(Error::config("command", "no command given")),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() || matches!(e, Error::Io(_)) {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

/// Entry point used by the binary. Returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let (_, args) = cli.command.parts();
    let result = resolve_config(cli).and_then(|cfg| {
        if args.dump_config {
            print!("{}", cfg.to_json());
            return Ok(());
        }
        let artifacts = execute(&cfg)?;
        artifacts.write_to(&cfg.out)?;
        if let Some(report) = artifacts.get("report.txt") {
            print!("{report}");
        }
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
