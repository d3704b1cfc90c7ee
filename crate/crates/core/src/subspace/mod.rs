//! Finite-dimensional function spaces `W = Span{phi_1, ..., phi_n}` and the
//! reaction-diffusion operators
//!
//! ```text
//! H1[u, ubar] = D(u) u_xx + D'(u) u_x^2 + R(u, ubar)
//! H2[u, ubar] = D(u) u_xx + R(u, ubar)
//! R(u, ubar)  = sum_k c_k u^k + sum_i delta_i ubar_i
//! ```
//!
//! A space is invariant when `H` maps `u, ubar in W` back into `W`. This is
//! checked numerically: `H` is sampled on a Chebyshev grid and projected onto
//! the basis by least squares, and the relative residual of the fit measures
//! the part of `H` outside `W`.

pub mod catalog;

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::delay_series::{Delay, DelaySeriesProblem};
use crate::error::{Error, Result};
use crate::history::HistoryFunction;
use crate::oracle::{OracleSystem, Theta};

/// Seed used for random coefficient draws unless another is given.
pub const DEFAULT_SEED: u64 = 0x5EED_2024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFunction {
    /// `x^k`
    Monomial(u32),
    /// `e^(nu x)`
    Exponential(f64),
    /// `cos(kappa x)`
    Cosine(f64),
    /// `sin(omega x)`
    Sine(f64),
    /// `e^(mu x) cos(kappa x)`
    ExpCosine { mu: f64, kappa: f64 },
    /// `e^(mu x) sin(omega x)`
    ExpSine { mu: f64, omega: f64 },
}

impl BasisFunction {
    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            BasisFunction::Monomial(k) => {
                let kf = f64::from(k);
                let v = x.powi(k as i32);
                let d1 = if k >= 1 { kf * x.powi(k as i32 - 1) } else { 0.0 };
                let d2 = if k >= 2 { kf * (kf - 1.0) * x.powi(k as i32 - 2) } else { 0.0 };
                (v, d1, d2)
            }
            BasisFunction::Exponential(nu) => {
                let e = (nu * x).exp();
                (e, nu * e, nu * nu * e)
            }
            BasisFunction::Cosine(k) => {
                let (s, c) = (k * x).sin_cos();
                (c, -k * s, -k * k * c)
            }
            BasisFunction::Sine(w) => {
                let (s, c) = (w * x).sin_cos();
                (s, w * c, -w * w * s)
            }
            BasisFunction::ExpCosine { mu, kappa } => {
                let e = (mu * x).exp();
                let (s, c) = (kappa * x).sin_cos();
                let v = e * c;
                let d1 = e * (mu * c - kappa * s);
                let d2 = e * ((mu * mu - kappa * kappa) * c - 2.0 * mu * kappa * s);
                (v, d1, d2)
            }
            BasisFunction::ExpSine { mu, omega } => {
                let e = (mu * x).exp();
                let (s, c) = (omega * x).sin_cos();
                let v = e * s;
                let d1 = e * (mu * s + omega * c);
                let d2 = e * ((mu * mu - omega * omega) * s + 2.0 * mu * omega * c);
                (v, d1, d2)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn label(&self) -> String {
        match *self {
            BasisFunction::Monomial(0) => "1".into(),
            BasisFunction::Monomial(1) => "x".into(),
            BasisFunction::Monomial(k) => format!("x^{k}"),
            BasisFunction::Exponential(nu) => format!("exp({nu}x)"),
            BasisFunction::Cosine(k) => format!("cos({k}x)"),
            BasisFunction::Sine(w) => format!("sin({w}x)"),
            BasisFunction::ExpCosine { mu, kappa } => format!("exp({mu}x)cos({kappa}x)"),
            BasisFunction::ExpSine { mu, omega } => format!("exp({mu}x)sin({omega}x)"),
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            BasisFunction::Monomial(_) => true,
            BasisFunction::Exponential(a) | BasisFunction::Cosine(a) | BasisFunction::Sine(a) => a.is_finite(),
            BasisFunction::ExpCosine { mu, kappa: b } | BasisFunction::ExpSine { mu, omega: b } => {
                mu.is_finite() && b.is_finite()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subspace {
    basis: Vec<BasisFunction>,
}

impl Subspace {
    pub fn new(basis: Vec<BasisFunction>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::domain("Subspace", "basis must not be empty"));
        }
        if basis.iter().any(|b| !b.is_finite()) {
            return Err(Error::domain("Subspace", "basis parameters must be finite"));
        }
        Ok(Self { basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisFunction] {
        &self.basis
    }

    /// `u, u_x, u_xx` at `x` for `u = sum_i coeffs_i phi_i`.
    pub fn eval(&self, coeffs: &[f64], x: f64) -> Result<(f64, f64, f64)> {
        self.check_len(coeffs.len(), "Subspace::eval")?;
        let mut out = (0.0, 0.0, 0.0);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            let (v, d1, d2) = b.eval(x);
            out.0 += c * v;
            out.1 += c * d1;
            out.2 += c * d2;
        }
        Ok(out)
    }

    pub fn value(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        Ok(self.eval(coeffs, x)?.0)
    }

    pub fn labels(&self) -> String {
        self.basis.iter().map(BasisFunction::label).collect::<Vec<_>>().join(", ")
    }

    fn check_len(&self, got: usize, context: &'static str) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    /// With the `D'(u) u_x^2` term (divergence form).
    H1,
    /// Without it.
    H2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub form: Form,
    /// `b_0, b_1, ...` of `D(u) = sum_k b_k u^k`.
    pub d_coeffs: Vec<f64>,
    /// `c_0, c_1, ...` of the undelayed part of `R`.
    pub r_coeffs: Vec<f64>,
    /// `delta_i`, one per delay.
    pub delta: Vec<f64>,
}

fn poly(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck)
}

fn poly_deriv(c: &[f64], u: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &ck)| acc * u + k as f64 * ck)
}

impl OperatorSpec {
    pub fn new(form: Form, d_coeffs: Vec<f64>, r_coeffs: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let op = Self {
            form,
            d_coeffs,
            r_coeffs,
            delta,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_coeffs.is_empty() {
            return Err(Error::domain("OperatorSpec", "d_coeffs must not be empty"));
        }
        let all = self.d_coeffs.iter().chain(&self.r_coeffs).chain(&self.delta);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::domain("OperatorSpec", "coefficients must be finite"));
        }
        Ok(())
    }

    /// `H[u, ubar]` at a point given `u, u_x, u_xx` and the delayed values.
    pub fn apply_pointwise(&self, u: f64, ux: f64, uxx: f64, delayed: &[f64]) -> f64 {
        let mut h = poly(&self.d_coeffs, u) * uxx + poly(&self.r_coeffs, u);
        if self.form == Form::H1 {
            h += poly_deriv(&self.d_coeffs, u) * ux * ux;
        }
        for (d, ub) in self.delta.iter().zip(delayed) {
            h += d * ub;
        }
        h
    }
}

/// `H[u, ubar_1, ..., ubar_m](x)` with `u = sum coeffs_i phi_i` and
/// `ubar_j = sum delayed_coeffs[j]_i phi_i`.
pub fn apply_operator(
    op: &OperatorSpec,
    coeffs: &[f64],
    delayed_coeffs: &[Vec<f64>],
    subspace: &Subspace,
    x: f64,
) -> Result<f64> {
    if delayed_coeffs.len() != op.delta.len() {
        return Err(Error::DimensionMismatch {
            context: "apply_operator (delayed states)",
            expected: op.delta.len(),
            got: delayed_coeffs.len(),
        });
    }
    let (u, ux, uxx) = subspace.eval(coeffs, x)?;
    let mut delayed = Vec::with_capacity(delayed_coeffs.len());
    for row in delayed_coeffs {
        delayed.push(subspace.value(row, x)?);
    }
    Ok(op.apply_pointwise(u, ux, uxx, &delayed))
}

/// Settings of the sampled projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceOptions {
    pub seed: u64,
    /// Preferred sampling interval; others are tried if it is ill-conditioned.
    pub interval: (f64, f64),
    pub points_per_dim: usize,
    pub condition_limit: f64,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            interval: (0.1, 2.1),
            points_per_dim: 8,
            condition_limit: 1e8,
        }
    }
}

/// Least-squares projector onto a subspace sampled at Chebyshev points.
#[derive(Debug, Clone)]
pub struct Projector {
    xs: Vec<f64>,
    mat: DMatrix<f64>,
    scales: Vec<f64>,
    svd: SVD<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
    interval: (f64, f64),
}

fn chebyshev(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    (0..n)
        .map(|i| c - r * (std::f64::consts::PI * (2 * i + 1) as f64 / (2 * n) as f64).cos())
        .collect()
}

impl Projector {
    pub fn new(subspace: &Subspace, opts: &InvarianceOptions) -> Result<Self> {
        let (a, b) = opts.interval;
        let w = b - a;
        let candidates = [
            (a, b),
            (a + 0.37 * w, b + 0.37 * w),
            (a - 0.5 * w, b - 0.5 * w),
            (a, a + 2.0 * w),
            (a - w, b + w),
        ];
        let mut best = f64::INFINITY;
        for (lo, hi) in candidates {
            let p = Self::on_interval(subspace, lo, hi, opts.points_per_dim)?;
            if p.condition <= opts.condition_limit {
                return Ok(p);
            }
            best = best.min(p.condition);
        }
        Err(Error::IllConditioned { condition: best })
    }

    fn on_interval(subspace: &Subspace, a: f64, b: f64, per_dim: usize) -> Result<Self> {
        let n = subspace.dim();
        let m = (per_dim * n).max(n + 1);
        let xs = chebyshev(a, b, m);
        let mut mat = DMatrix::<f64>::zeros(m, n);
        for (i, &x) in xs.iter().enumerate() {
            for (j, f) in subspace.basis().iter().enumerate() {
                mat[(i, j)] = f.value(x);
            }
        }
        // column scaling
        let scales: Vec<f64> = (0..n)
            .map(|j| {
                let s = mat.column(j).norm();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        for (j, s) in scales.iter().enumerate() {
            mat.column_mut(j).scale_mut(1.0 / s);
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllConditioned {
                condition: f64::INFINITY,
            });
        }
        let svd = SVD::new(mat.clone(), true, true);
        let sv = &svd.singular_values;
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        Ok(Self {
            xs,
            mat,
            scales,
            svd,
            condition,
            interval: (a, b),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.xs
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Least-squares coefficients of `values` (sampled at [`points`]) and the
    /// relative residual `||v - P v|| / ||v||`.
    ///
    /// [`points`]: Projector::points
    pub fn project(&self, values: &[f64]) -> Result<(Vec<f64>, f64)> {
        let rhs = DVector::from_column_slice(values);
        let sol = self
            .svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::domain("Projector", e.to_string()))?;
        let coeffs: Vec<f64> = sol.iter().zip(&self.scales).map(|(c, s)| c / s).collect();
        let fitted = &self.mat * sol;
        let norm = rhs.norm();
        let resid = (rhs - fitted).norm();
        let rel = if norm > 0.0 { resid / norm } else { resid };
        Ok((coeffs, rel))
    }
}

/// One random trial of [`check_invariance`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceTrial {
    pub a: Vec<f64>,
    pub a_bar: Vec<Vec<f64>>,
    /// Fitted expansion coefficients `Theta_i(A) + sum_j delta_j Abar_j,i`.
    pub fitted: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub max_residual: f64,
    pub tolerance: f64,
    pub invariant: bool,
    pub condition: f64,
    pub interval: (f64, f64),
    pub trials: Vec<InvarianceTrial>,
}

impl InvarianceReport {
    pub fn verdict(&self) -> &'static str {
        if self.invariant {
            "invariant"
        } else {
            "not-invariant"
        }
    }

    /// `id,max_residual,verdict` line without a trailing newline.
    pub fn csv_row(&self, id: &str) -> String {
        format!("{id},{:.16e},{}", self.max_residual, self.verdict())
    }

    /// Per-trial table: trial index, residual, fitted coefficients.
    pub fn trials_csv(&self) -> String {
        let n = self.trials.first().map_or(0, |t| t.fitted.len());
        let mut s = String::from("trial,residual");
        for i in 1..=n {
            let _ = write!(s, ",theta{i}");
        }
        s.push('\n');
        for (k, t) in self.trials.iter().enumerate() {
            let _ = write!(s, "{k},{:.16e}", t.residual);
            for v in &t.fitted {
                let _ = write!(s, ",{v:.16e}");
            }
            s.push('\n');
        }
        s
    }
}

fn sample_operator(
    op: &OperatorSpec,
    subspace: &Subspace,
    xs: &[f64],
    a: &[f64],
    a_bar: &[Vec<f64>],
) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| apply_operator(op, a, a_bar, subspace, x))
        .collect()
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Randomised invariance test with the default options.
pub fn check_invariance(op: &OperatorSpec, subspace: &Subspace, trials: usize, tol: f64) -> Result<InvarianceReport> {
    check_invariance_with(op, subspace, trials, tol, &InvarianceOptions::default())
}

pub fn check_invariance_with(
    op: &OperatorSpec,
    subspace: &Subspace,
    trials: usize,
    tol: f64,
    opts: &InvarianceOptions,
) -> Result<InvarianceReport> {
    if trials < 10 {
        return Err(Error::domain("check_invariance", format!("trials = {trials} must be at least 10")));
    }
    op.validate()?;
    let proj = Projector::new(subspace, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = subspace.dim();
    let mut out = Vec::with_capacity(trials);
    let mut max_residual = 0.0_f64;
    for _ in 0..trials {
        let a = uniform_vec(&mut rng, n);
        let a_bar: Vec<Vec<f64>> = op.delta.iter().map(|_| uniform_vec(&mut rng, n)).collect();
        let h = sample_operator(op, subspace, proj.points(), &a, &a_bar)?;
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow {
                context: "check_invariance",
                argument: f64::NAN,
            });
        }
        let (fitted, residual) = proj.project(&h)?;
        max_residual = max_residual.max(residual);
        out.push(InvarianceTrial {
            a,
            a_bar,
            fitted,
            residual,
        });
    }
    Ok(InvarianceReport {
        max_residual,
        tolerance: tol,
        invariant: max_residual < tol,
        condition: proj.condition(),
        interval: proj.interval(),
        trials: out,
    })
}

/// Projected expansion coefficients `Theta(A)` of `H[u, 0]`.
pub fn theta(op: &OperatorSpec, subspace: &Subspace, a: &[f64]) -> Result<Vec<f64>> {
    let proj = Projector::new(subspace, &InvarianceOptions::default())?;
    theta_with(op, subspace, &proj, a)
}

fn theta_with(op: &OperatorSpec, subspace: &Subspace, proj: &Projector, a: &[f64]) -> Result<Vec<f64>> {
    let zeros = vec![vec![0.0; subspace.dim()]; op.delta.len()];
    let h = sample_operator(op, subspace, proj.points(), a, &zeros)?;
    Ok(proj.project(&h)?.0)
}

/// Decoupled mode `D^alpha A = lambda A + sum_i delta_i A(t - tau_i) + forcing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub lambda: f64,
    pub forcing: f64,
}

#[derive(Clone)]
pub enum ReductionKind {
    /// Diagonal affine `Theta`: one scalar equation per coefficient.
    Decoupled(Vec<Mode>),
    /// Affine `Theta(A) = M A + b` with coupling between modes.
    Coupled { matrix: Vec<Vec<f64>>, forcing: Vec<f64> },
    /// `Theta` is not affine; evaluated by projection.
    Nonlinear(Theta),
}

impl std::fmt::Debug for ReductionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReductionKind::Decoupled(m) => f.debug_tuple("Decoupled").field(m).finish(),
            ReductionKind::Coupled { matrix, forcing } => f
                .debug_struct("Coupled")
                .field("matrix", matrix)
                .field("forcing", forcing)
                .finish(),
            ReductionKind::Nonlinear(_) => f.write_str("Nonlinear(..)"),
        }
    }
}

/// The system of fractional delay equations for the coefficients `A_i(t)`.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub kind: ReductionKind,
    pub delta: Vec<f64>,
}

/// Either closed-form scalar problems or a system for the numerical oracle.
#[derive(Debug, Clone)]
pub enum ReducedSystem {
    Series(Vec<DelaySeriesProblem>),
    Oracle(OracleSystem),
}

impl Reduction {
    /// Attach order, delays and per-coefficient histories.
    pub fn bind(&self, alpha: f64, taus: &[f64], histories: Vec<HistoryFunction>) -> Result<ReducedSystem> {
        if taus.len() != self.delta.len() {
            return Err(Error::DimensionMismatch {
                context: "Reduction::bind (delays)",
                expected: self.delta.len(),
                got: taus.len(),
            });
        }
        let delays: Vec<Delay> = taus
            .iter()
            .zip(&self.delta)
            .map(|(&tau, &delta)| Delay { tau, delta })
            .collect();
        let dim = match &self.kind {
            ReductionKind::Decoupled(m) => m.len(),
            ReductionKind::Coupled { forcing, .. } => forcing.len(),
            ReductionKind::Nonlinear(_) => histories.len(),
        };
        if histories.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "Reduction::bind (histories)",
                expected: dim,
                got: histories.len(),
            });
        }
        match &self.kind {
            ReductionKind::Decoupled(modes) => modes
                .iter()
                .zip(histories)
                .map(|(m, h)| DelaySeriesProblem::new(alpha, m.lambda, m.forcing, delays.clone(), h))
                .collect::<Result<Vec<_>>>()
                .map(ReducedSystem::Series),
            ReductionKind::Coupled { matrix, forcing } => {
                OracleSystem::affine(alpha, matrix.clone(), forcing.clone(), delays, histories).map(ReducedSystem::Oracle)
            }
            ReductionKind::Nonlinear(theta) => {
                OracleSystem::new(alpha, theta.clone(), delays, histories).map(ReducedSystem::Oracle)
            }
        }
    }
}

/// Tolerance of the affinity and diagonality tests, relative to `|Theta|`.
const AFFINE_TOL: f64 = 1e-9;

/// Reduces the PDE on an invariant space to delay equations for the
/// coefficients. Non-affine `Theta` is never linearised: it comes back as
/// [`ReductionKind::Nonlinear`].
pub fn reduce_to_fdde(op: &OperatorSpec, subspace: &Subspace) -> Result<Reduction> {
    let report = check_invariance(op, subspace, 10, AFFINE_TOL)?;
    if !report.invariant {
        return Err(Error::ConstraintViolation(format!(
            "space {{{}}} is not invariant (residual {:.3e})",
            subspace.labels(),
            report.max_residual
        )));
    }
    let proj = Projector::new(subspace, &InvarianceOptions::default())?;
    let n = subspace.dim();
    let th = |a: &[f64]| theta_with(op, subspace, &proj, a);
    let zero = vec![0.0; n];
    let b = th(&zero)?;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = zero.clone();
        e[j] = 1.0;
        let tj = th(&e)?;
        cols.push(tj.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<f64>>());
    }
    // second differences on random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 0xAFF1);
    let mut affine = true;
    'outer: for _ in 0..4 {
        let x = uniform_vec(&mut rng, n);
        let y = uniform_vec(&mut rng, n);
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        let (tx, ty, txy) = (th(&x)?, th(&y)?, th(&xy)?);
        for i in 0..n {
            let d2 = txy[i] - tx[i] - ty[i] + b[i];
            let scale = txy[i].abs() + tx[i].abs() + ty[i].abs() + b[i].abs() + 1.0;
            if d2.abs() > AFFINE_TOL * scale {
                affine = false;
                break 'outer;
            }
        }
    }
    let delta = op.delta.clone();
    if !affine {
        let op = op.clone();
        let subspace = subspace.clone();
        let theta: Theta = Arc::new(move |a: &[f64]| {
            theta_with(&op, &subspace, &proj, a).unwrap_or_else(|_| vec![f64::NAN; a.len()])
        });
        return Ok(Reduction {
            kind: ReductionKind::Nonlinear(theta),
            delta,
        });
    }
    // matrix[i][j] = d Theta_i / d A_j
    let matrix: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    let scale = matrix.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || matrix[i][j].abs() <= AFFINE_TOL * scale));
    let kind = if diagonal {
        ReductionKind::Decoupled(
            (0..n)
                .map(|i| Mode {
                    lambda: matrix[i][i],
                    forcing: b[i],
                })
                .collect(),
        )
    } else {
        ReductionKind::Coupled { matrix, forcing: b }
    };
    Ok(Reduction { kind, delta })
}
