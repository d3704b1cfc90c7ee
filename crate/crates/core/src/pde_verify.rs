//! Assembled solutions `u(x,t) = sum_i A_i(t) phi_i(x)` and their check
//! against the governing equation by Caputo residual.
//!
//! The residual at `(x, t_j)` is
//!
//! ```text
//! r = sum_i L1[A_i](t_j) phi_i(x) - H[u, u(., t_j - tau_1), ...](x)
//! ```
//!
//! with the time derivative from the L1 scheme and the spatial operator in
//! closed form. Delayed fields use the same coefficient functions at
//! `t - tau_i`, dipping into the history for `t < tau_i`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caputo::{caputo_l1, UniformGrid};
use crate::delay_series::{Delay, DelaySeriesProblem};
use crate::error::{Error, Result};
use crate::history::{HistoryFunction, HistorySpec};
use crate::oracle::Trajectory;
use crate::subspace::{apply_operator, BasisFunction, Form, OperatorSpec, Subspace};

/// Version of the defaults table below. Bump when any default changes.
pub const DEFAULTS_VERSION: u32 = 1;

/// Coarsest step of the standard refinement study.
pub const DEFAULT_H: f64 = 1.0 / 256.0;

/// Start of the residual window. Fixed across refinements: the first few L1
/// nodes carry an O(1) start-up error for `t^alpha`-type coefficients.
pub const DEFAULT_T_MIN: f64 = 4.0 * DEFAULT_H;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionName {
    #[serde(rename = "exp1d_H1")]
    Exp1dH1,
    #[serde(rename = "poly2d_H1")]
    Poly2dH1,
    #[serde(rename = "trig3d_H1")]
    Trig3dH1,
    #[serde(rename = "exp1d_H2")]
    Exp1dH2,
    #[serde(rename = "poly2d_H2")]
    Poly2dH2,
    #[serde(rename = "trig2d_H2")]
    Trig2dH2,
    #[serde(rename = "twodelay_trig_H2")]
    TwoDelayTrigH2,
}

impl SolutionName {
    pub const ALL: [SolutionName; 7] = [
        SolutionName::Exp1dH1,
        SolutionName::Poly2dH1,
        SolutionName::Trig3dH1,
        SolutionName::Exp1dH2,
        SolutionName::Poly2dH2,
        SolutionName::Trig2dH2,
        SolutionName::TwoDelayTrigH2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolutionName::Exp1dH1 => "exp1d_H1",
            SolutionName::Poly2dH1 => "poly2d_H1",
            SolutionName::Trig3dH1 => "trig3d_H1",
            SolutionName::Exp1dH2 => "exp1d_H2",
            SolutionName::Poly2dH2 => "poly2d_H2",
            SolutionName::Trig2dH2 => "trig2d_H2",
            SolutionName::TwoDelayTrigH2 => "twodelay_trig_H2",
        }
    }

    fn delay_count(self) -> usize {
        if self == SolutionName::TwoDelayTrigH2 {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for SolutionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolutionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::config("solution", format!("unknown solution `{s}`")))
    }
}

/// Parameters of a named solution. `a` is `a0` or `a1` depending on the
/// space; `b` are the coefficients of `D(u)`. The constrained reaction
/// coefficients are derived; `reaction`, when given, must agree with them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionParams {
    pub alpha: f64,
    #[serde(default)]
    pub a: f64,
    pub b: Vec<f64>,
    pub c1: f64,
    #[serde(default)]
    pub c0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction: Option<Vec<f64>>,
    pub delays: Vec<Delay>,
    /// One history per basis function.
    pub histories: Vec<HistorySpec>,
}

fn poly(c: &[f64]) -> HistorySpec {
    HistorySpec::Polynomial(c.to_vec())
}

fn one_delay(tau: f64, delta: f64) -> Vec<Delay> {
    vec![Delay { tau, delta }]
}

/// The versioned defaults table.
pub fn default_params(name: SolutionName) -> SolutionParams {
    let base = SolutionParams {
        alpha: 0.6,
        a: 1.0,
        b: vec![0.5, 0.25],
        c1: -1.0,
        c0: 0.0,
        reaction: None,
        delays: one_delay(1.0, 0.2),
        histories: vec![poly(&[1.0, 0.5])],
    };
    match name {
        SolutionName::Exp1dH1 => SolutionParams { a: -1.0, ..base },
        SolutionName::Exp1dH2 => SolutionParams {
            histories: vec![poly(&[1.0, 0.3])],
            ..base
        },
        SolutionName::Poly2dH1 => SolutionParams {
            b: vec![1.0],
            c0: 0.5,
            delays: one_delay(1.0, 0.3),
            histories: vec![poly(&[1.0, 0.5]), poly(&[-0.2])],
            ..base
        },
        SolutionName::Poly2dH2 => SolutionParams {
            b: vec![1.0, 0.5, 0.25],
            c1: -0.5,
            c0: 0.3,
            delays: one_delay(1.0, 0.4),
            histories: vec![poly(&[1.0]), poly(&[0.5, 0.5])],
            ..base
        },
        SolutionName::Trig3dH1 => SolutionParams {
            b: vec![1.0],
            c1: 0.5,
            c0: -0.4,
            delays: one_delay(1.0, 0.2),
            histories: vec![poly(&[1.0]), poly(&[0.5, 0.2]), poly(&[-0.3])],
            ..base
        },
        SolutionName::Trig2dH2 => SolutionParams {
            b: vec![1.0, 0.5, 0.25],
            c1: 0.5,
            delays: one_delay(1.0, 0.3),
            histories: vec![poly(&[1.0]), poly(&[0.5])],
            ..base
        },
        SolutionName::TwoDelayTrigH2 => SolutionParams {
            b: vec![1.0, 0.5, 0.25],
            c1: 0.2,
            delays: vec![Delay { tau: 0.7, delta: 0.3 }, Delay { tau: 1.0, delta: 0.2 }],
            histories: vec![poly(&[1.0, 0.5]), poly(&[0.5, -0.3])],
            ..base
        },
    }
}

/// Source of one coefficient `A_i(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    /// Closed form.
    Series(DelaySeriesProblem),
    /// Linear interpolation of a numerical trajectory, history for `t < 0`.
    Sampled {
        t: Vec<f64>,
        values: Vec<f64>,
        history: HistoryFunction,
    },
}

impl Coefficient {
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Coefficient::Series(p) => p.eval(t),
            Coefficient::Sampled { t: ts, values, history } => {
                if t < 0.0 {
                    return Ok(history.value(t));
                }
                let last = ts.len() - 1;
                if t > ts[last] * (1.0 + 1e-12) {
                    return Err(Error::domain("Coefficient", format!("t = {t} beyond sampled range")));
                }
                let i = ts.partition_point(|&s| s <= t).clamp(1, last) - 1;
                let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
                Ok(values[i] + w * (values[i + 1] - values[i]))
            }
        }
    }

    pub fn problem(&self) -> Option<&DelaySeriesProblem> {
        match self {
            Coefficient::Series(p) => Some(p),
            Coefficient::Sampled { .. } => None,
        }
    }

    pub fn history(&self) -> &HistoryFunction {
        match self {
            Coefficient::Series(p) => &p.history,
            Coefficient::Sampled { history, .. } => history,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSolution {
    pub name: Option<SolutionName>,
    pub alpha: f64,
    pub subspace: Subspace,
    pub operator: OperatorSpec,
    pub delays: Vec<Delay>,
    pub coefficients: Vec<Coefficient>,
}

impl AssembledSolution {
    pub fn new(
        alpha: f64,
        subspace: Subspace,
        operator: OperatorSpec,
        delays: Vec<Delay>,
        coefficients: Vec<Coefficient>,
    ) -> Result<Self> {
        if coefficients.len() != subspace.dim() {
            return Err(Error::DimensionMismatch {
                context: "AssembledSolution (coefficients)",
                expected: subspace.dim(),
                got: coefficients.len(),
            });
        }
        if operator.delta.len() != delays.len() {
            return Err(Error::DimensionMismatch {
                context: "AssembledSolution (delays)",
                expected: operator.delta.len(),
                got: delays.len(),
            });
        }
        if delays.iter().zip(&operator.delta).any(|(d, &od)| d.delta != od) {
            return Err(Error::domain("AssembledSolution", "delay weights differ from the operator's"));
        }
        Ok(Self {
            name: None,
            alpha,
            subspace,
            operator,
            delays,
            coefficients,
        })
    }

    /// Wrap a numerical trajectory, e.g. for a reduction that is not affine.
    pub fn from_trajectory(
        alpha: f64,
        subspace: Subspace,
        operator: OperatorSpec,
        delays: Vec<Delay>,
        trajectory: &Trajectory,
        histories: Vec<HistoryFunction>,
    ) -> Result<Self> {
        if histories.len() != subspace.dim() {
            return Err(Error::DimensionMismatch {
                context: "AssembledSolution::from_trajectory",
                expected: subspace.dim(),
                got: histories.len(),
            });
        }
        if trajectory.t.len() < 2 {
            return Err(Error::domain("AssembledSolution", "trajectory needs at least two samples"));
        }
        let coefficients = histories
            .into_iter()
            .enumerate()
            .map(|(j, history)| Coefficient::Sampled {
                t: trajectory.t.clone(),
                values: trajectory.component(j),
                history,
            })
            .collect();
        Self::new(alpha, subspace, operator, delays, coefficients)
    }

    pub fn tau_star(&self) -> f64 {
        self.delays.iter().map(|d| d.tau).fold(0.0, f64::max)
    }

    pub fn coefficients_at(&self, t: f64) -> Result<Vec<f64>> {
        self.coefficients.iter().map(|c| c.eval(t)).collect()
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        self.subspace.value(&self.coefficients_at(t)?, x)
    }

    /// `(lambda, c0)` per mode, for closed-form coefficients.
    pub fn modes(&self) -> Vec<Option<(f64, f64)>> {
        self.coefficients
            .iter()
            .map(|c| c.problem().map(|p| (p.lambda, p.c0)))
            .collect()
    }

    /// Same solution with every mode's `lambda` shifted by `shift` while the
    /// operator is kept. Used as a negative control.
    pub fn with_lambda_shift(&self, shift: f64) -> Result<Self> {
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| match c {
                Coefficient::Series(p) => Ok(Coefficient::Series(DelaySeriesProblem {
                    lambda: p.lambda + shift,
                    ..p.clone()
                })),
                Coefficient::Sampled { .. } => Err(Error::domain(
                    "with_lambda_shift",
                    "only closed-form coefficients can be shifted",
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            coefficients,
            ..self.clone()
        })
    }
}

fn violation(name: SolutionName, what: impl fmt::Display) -> Error {
    Error::ConstraintViolation(format!("{name}: {what}"))
}

fn require_constant_d(name: SolutionName, b: &[f64]) -> Result<()> {
    if b.iter().skip(1).any(|&v| v != 0.0) {
        return Err(violation(name, "D(u) must be the constant b0"));
    }
    Ok(())
}

fn require_no_source(name: SolutionName, c0: f64) -> Result<()> {
    if c0 != 0.0 {
        return Err(violation(name, "the space has no constant mode, so c0 must be 0"));
    }
    Ok(())
}

/// Build one of the named solutions, wiring each mode's rate to the closed
/// form coefficient.
pub fn named_solution(name: SolutionName, p: &SolutionParams) -> Result<AssembledSolution> {
    if !(p.alpha > 0.0 && p.alpha <= 1.0) {
        return Err(Error::config("alpha", format!("{} is not in (0, 1]", p.alpha)));
    }
    if p.b.is_empty() {
        return Err(Error::config("b", "D(u) needs at least b0"));
    }
    if p.delays.len() != name.delay_count() {
        return Err(violation(name, format!("expects {} delay(s), got {}", name.delay_count(), p.delays.len())));
    }
    for (i, d) in p.delays.iter().enumerate() {
        if !(d.tau > 0.0) || !d.tau.is_finite() {
            return Err(Error::config(format!("delays[{i}].tau"), format!("{} must be positive", d.tau)));
        }
    }
    match name {
        SolutionName::Poly2dH1 | SolutionName::Poly2dH2 => {}
        // e^(a0 x) with any real a0 != 0
        SolutionName::Exp1dH1 => {
            if p.a == 0.0 || !p.a.is_finite() {
                return Err(violation(name, format!("a = {} must be a non-zero real", p.a)));
            }
        }
        _ => {
            if !(p.a > 0.0) || !p.a.is_finite() {
                return Err(violation(name, format!("a = {} must be positive", p.a)));
            }
        }
    }
    let (a, b, c1, c0) = (p.a, &p.b, p.c1, p.c0);
    let root = a.sqrt();
    let trig = || vec![BasisFunction::Cosine(root), BasisFunction::Sine(root)];
    // (form, basis, D, R, per-mode (lambda, c0))
    let (form, basis, d, r, modes) = match name {
        SolutionName::Exp1dH1 | SolutionName::Exp1dH2 => {
            require_no_source(name, c0)?;
            let h1 = name == SolutionName::Exp1dH1;
            let mut r = vec![0.0, c1];
            for (k, bk) in b.iter().enumerate().skip(1) {
                let factor = if h1 { (k + 1) as f64 } else { 1.0 };
                r.push(-factor * a * a * bk);
            }
            let (form, basis) = if h1 {
                (Form::H1, BasisFunction::Exponential(a))
            } else {
                (Form::H2, BasisFunction::Exponential(-a))
            };
            (form, vec![basis], b.clone(), r, vec![(a * a * b[0] + c1, 0.0)])
        }
        SolutionName::Poly2dH1 | SolutionName::Poly2dH2 => {
            let form = if name == SolutionName::Poly2dH1 {
                // D_u (u_x)^2 would couple the modes
                require_constant_d(name, b)?;
                Form::H1
            } else {
                Form::H2
            };
            let basis = vec![BasisFunction::Monomial(0), BasisFunction::Monomial(1)];
            (form, basis, b.clone(), vec![c0, c1], vec![(c1, c0), (c1, 0.0)])
        }
        SolutionName::Trig3dH1 => {
            require_constant_d(name, b)?;
            let mut basis = vec![BasisFunction::Monomial(0)];
            basis.extend(trig());
            let g = c1 - a * b[0];
            (Form::H1, basis, vec![b[0]], vec![c0, c1], vec![(c1, c0), (g, 0.0), (g, 0.0)])
        }
        SolutionName::Trig2dH2 | SolutionName::TwoDelayTrigH2 => {
            require_no_source(name, c0)?;
            if b.len() > 3 {
                return Err(violation(name, "D(u) is at most quadratic"));
            }
            let coef = |k: usize| b.get(k).copied().unwrap_or(0.0);
            let r = vec![0.0, c1, a * coef(1), a * coef(2)];
            let l = c1 - a * b[0];
            (Form::H2, trig(), b.clone(), r, vec![(l, 0.0), (l, 0.0)])
        }
    };
    if let Some(given) = &p.reaction {
        let n = given.len().max(r.len());
        let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        let scale = r.iter().chain(given).fold(1.0_f64, |m, v| m.max(v.abs()));
        if let Some(k) = (0..n).find(|&k| (at(given, k) - at(&r, k)).abs() > 1e-12 * scale) {
            return Err(violation(
                name,
                format!("reaction coefficient c{k} = {} but the space requires {}", at(given, k), at(&r, k)),
            ));
        }
    }
    let subspace = Subspace::new(basis)?;
    if p.histories.len() != subspace.dim() {
        return Err(Error::config(
            "histories",
            format!("{name} has {} modes, got {} histories", subspace.dim(), p.histories.len()),
        ));
    }
    let delta: Vec<f64> = p.delays.iter().map(|d| d.delta).collect();
    let operator = OperatorSpec::new(form, d, r, delta)?;
    let tau_star = p.delays.iter().map(|d| d.tau).fold(0.0, f64::max);
    let coefficients = p
        .histories
        .iter()
        .zip(modes)
        .map(|(h, (lambda, c0))| {
            let history = h.build(tau_star)?;
            DelaySeriesProblem::new(p.alpha, lambda, c0, p.delays.clone(), history).map(Coefficient::Series)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sol = AssembledSolution::new(p.alpha, subspace, operator, p.delays.clone(), coefficients)?;
    sol.name = Some(name);
    Ok(sol)
}

/// `n` equispaced points on `[x0, x1]`.
pub fn linspace(x0: f64, x1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![x0],
        _ => (0..n).map(|i| x0 + (x1 - x0) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Default spatial window `[0, 1]` with 11 points.
pub fn default_xgrid() -> Vec<f64> {
    linspace(0.0, 1.0, 11)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub h: f64,
    pub t_min: f64,
    pub t_end: f64,
    pub nx: usize,
    /// Time nodes inside the window.
    pub nt: usize,
    pub max_norm: f64,
    pub rms: f64,
    /// `(x, t, r)` over the window.
    pub field: Vec<(f64, f64, f64)>,
}

impl ResidualReport {
    /// CSV dump `x,t,residual`.
    pub fn field_csv(&self) -> String {
        let mut s = String::from("x,t,residual\n");
        for (x, t, r) in &self.field {
            let _ = writeln!(s, "{x:.16e},{t:.16e},{r:.16e}");
        }
        s
    }
}

fn node_values(c: &Coefficient, times: &[f64]) -> Result<Vec<f64>> {
    times.par_iter().map(|&t| c.eval(t)).collect()
}

/// Caputo residual of `sol` on `xs x grid`, reported for `t >= t_min`.
pub fn pde_residual(sol: &AssembledSolution, xs: &[f64], grid: &UniformGrid, t_min: f64) -> Result<ResidualReport> {
    if grid.t0 != 0.0 {
        return Err(Error::domain("pde_residual", "the time grid must start at 0"));
    }
    if xs.is_empty() {
        return Err(Error::domain("pde_residual", "empty x grid"));
    }
    let times = grid.points();
    let now: Vec<Vec<f64>> = sol
        .coefficients
        .iter()
        .map(|c| node_values(c, &times))
        .collect::<Result<_>>()?;
    // delayed[i][k][j] = A_k(t_j - tau_i)
    let mut delayed = Vec::with_capacity(sol.delays.len());
    for d in &sol.delays {
        let steps = d.tau / grid.h;
        let aligned = (steps - steps.round()).abs() < 1e-9;
        let m = steps.round() as usize;
        let per_mode = sol
            .coefficients
            .iter()
            .zip(&now)
            .map(|(c, vals)| {
                if aligned {
                    Ok(times
                        .iter()
                        .enumerate()
                        .map(|(j, &t)| if j >= m { vals[j - m] } else { c.history().value(t - d.tau) })
                        .collect())
                } else {
                    let shifted: Vec<f64> = times.iter().map(|t| t - d.tau).collect();
                    node_values(c, &shifted)
                }
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        delayed.push(per_mode);
    }
    let derivs: Vec<Vec<f64>> = now
        .iter()
        .map(|v| caputo_l1(v, sol.alpha, grid))
        .collect::<Result<_>>()?;
    let first = times.partition_point(|&t| t < t_min - 1e-12 * t_min.abs().max(1.0));
    let dim = sol.subspace.dim();
    let rows: Vec<Vec<(f64, f64, f64)>> = (first..times.len())
        .into_par_iter()
        .map(|j| {
            let a: Vec<f64> = (0..dim).map(|k| now[k][j]).collect();
            let da: Vec<f64> = (0..dim).map(|k| derivs[k][j]).collect();
            let abar: Vec<Vec<f64>> = delayed
                .iter()
                .map(|per_mode| (0..dim).map(|k| per_mode[k][j]).collect())
                .collect();
            xs.iter()
                .map(|&x| {
                    let lhs = sol.subspace.value(&da, x)?;
                    let rhs = apply_operator(&sol.operator, &a, &abar, &sol.subspace, x)?;
                    Ok((x, times[j], lhs - rhs))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let field: Vec<(f64, f64, f64)> = rows.into_iter().flatten().collect();
    let max_norm = field.iter().fold(0.0_f64, |m, f| m.max(f.2.abs()));
    let rms = if field.is_empty() {
        0.0
    } else {
        (field.iter().map(|f| f.2 * f.2).sum::<f64>() / field.len() as f64).sqrt()
    };
    Ok(ResidualReport {
        h: grid.h,
        t_min,
        t_end: grid.t_end(),
        nx: xs.len(),
        nt: times.len() - first,
        max_norm,
        rms,
        field,
    })
}

/// Residual norms over a sequence of step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub label: String,
    pub rows: Vec<ResidualReport>,
}

impl ConvergenceReport {
    /// Observed order between consecutive rows, from the max norms.
    pub fn rates(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].max_norm / w[1].max_norm).ln() / (w[0].h / w[1].h).ln())
            .collect()
    }

    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_norm < w[0].max_norm)
    }

    pub fn finest(&self) -> &ResidualReport {
        self.rows.last().expect("convergence report has rows")
    }

    /// Plain-text summary block.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "solution: {}", self.label);
        if let Some(r) = self.rows.first() {
            let _ = writeln!(s, "window: t in [{:.16e}, {:.16e}], nx = {}", r.t_min, r.t_end, r.nx);
        }
        let _ = writeln!(s, "h,nt,max_norm,rms,rate");
        let rates = self.rates();
        for (i, r) in self.rows.iter().enumerate() {
            let rate = if i == 0 {
                String::from("-")
            } else {
                format!("{:.16e}", rates[i - 1])
            };
            let _ = writeln!(s, "{:.16e},{},{:.16e},{:.16e},{rate}", r.h, r.nt, r.max_norm, r.rms);
        }
        s
    }
}

/// Residuals at each `h` in `steps` on `[0, t_end]`.
pub fn convergence_study(
    sol: &AssembledSolution,
    xs: &[f64],
    t_end: f64,
    steps: &[f64],
    t_min: f64,
) -> Result<ConvergenceReport> {
    let rows = steps
        .iter()
        .map(|&h| pde_residual(sol, xs, &UniformGrid::covering(t_end, h)?, t_min))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport {
        label: sol.name.map_or_else(|| "custom".to_string(), |n| n.to_string()),
        rows,
    })
}

/// The standard study: `h = 1/256, 1/512, 1/1024` on `[0, 2 tau*]`.
pub fn standard_study(sol: &AssembledSolution) -> Result<ConvergenceReport> {
    let steps = [DEFAULT_H, DEFAULT_H / 2.0, DEFAULT_H / 4.0];
    convergence_study(sol, &default_xgrid(), 2.0 * sol.tau_star(), &steps, DEFAULT_T_MIN)
}
