//! Numerical reference solvers for systems
//!
//! ```text
//! D^alpha A_j(t) = Theta_j(A(t)) + sum_i delta_i A_j(t - tau_i),   A_j = psi_j on [-tau*, 0]
//! ```
//!
//! [`solve_fdde`] is a fractional Adams-Bashforth-Moulton predictor-corrector
//! on a grid that contains every delay as a whole number of steps, so delayed
//! states are read straight off the computed trajectory. [`method_of_steps`]
//! handles `alpha = 1` with an adaptive Dormand-Prince pair restarted at every
//! delay breakpoint.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::delay_series::{series_terms, Delay, DelaySeriesProblem};
use crate::error::{Error, Result};
use crate::history::HistoryFunction;
use crate::special::gamma_fn;

/// States beyond this magnitude are reported as a divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Right-hand side `Theta(A)` without the delay terms.
pub type Theta = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct OracleSystem {
    dim: usize,
    theta: Theta,
    delays: Vec<Delay>,
    histories: Vec<HistoryFunction>,
    alpha: f64,
}

impl std::fmt::Debug for OracleSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleSystem")
            .field("dim", &self.dim)
            .field("delays", &self.delays)
            .field("histories", &self.histories)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl OracleSystem {
    pub fn new(
        alpha: f64,
        theta: Theta,
        delays: Vec<Delay>,
        histories: Vec<HistoryFunction>,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain("OracleSystem", format!("alpha = {alpha} not in (0, 1]")));
        }
        if histories.is_empty() {
            return Err(Error::domain("OracleSystem", "need at least one component"));
        }
        for d in &delays {
            if !(d.tau > 0.0) || !d.tau.is_finite() || !d.delta.is_finite() {
                return Err(Error::domain(
                    "OracleSystem",
                    format!("invalid delay (tau = {}, delta = {})", d.tau, d.delta),
                ));
            }
        }
        let dim = histories.len();
        let probe: Vec<f64> = histories.iter().map(HistoryFunction::at_zero).collect();
        let out = theta(&probe);
        if out.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "OracleSystem theta",
                expected: dim,
                got: out.len(),
            });
        }
        Ok(Self {
            dim,
            theta,
            delays,
            histories,
            alpha,
        })
    }

    /// `Theta(A) = M A + b`.
    pub fn affine(
        alpha: f64,
        m: Vec<Vec<f64>>,
        b: Vec<f64>,
        delays: Vec<Delay>,
        histories: Vec<HistoryFunction>,
    ) -> Result<Self> {
        let n = histories.len();
        if m.len() != n || m.iter().any(|row| row.len() != n) || b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "OracleSystem::affine",
                expected: n,
                got: m.len(),
            });
        }
        let theta: Theta = Arc::new(move |a: &[f64]| {
            m.iter()
                .zip(&b)
                .map(|(row, bi)| row.iter().zip(a).map(|(mij, aj)| mij * aj).sum::<f64>() + bi)
                .collect()
        });
        Self::new(alpha, theta, delays, histories)
    }

    /// The scalar equation of a closed-form problem.
    pub fn from_problem(p: &DelaySeriesProblem) -> Result<Self> {
        Self::affine(
            p.alpha,
            vec![vec![p.lambda]],
            vec![p.c0],
            p.delays.clone(),
            vec![p.history.clone()],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delays(&self) -> &[Delay] {
        &self.delays
    }

    pub fn histories(&self) -> &[HistoryFunction] {
        &self.histories
    }

    pub fn theta(&self, a: &[f64]) -> Vec<f64> {
        (self.theta)(a)
    }

    /// Copy with a different order `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.theta.clone(), self.delays.clone(), self.histories.clone())
    }

    fn active_delays(&self) -> impl Iterator<Item = &Delay> {
        self.delays.iter().filter(|d| d.delta != 0.0)
    }
}

/// Sampled solution `A_j(t_k)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// `values[k][j] = A_j(t_k)`.
    pub values: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[j]).collect()
    }

    /// CSV with header `t,A1,...,An`.
    pub fn to_csv(&self) -> String {
        let dim = self.values.first().map_or(0, Vec::len);
        let mut s = String::from("t");
        for j in 1..=dim {
            let _ = write!(s, ",A{j}");
        }
        s.push('\n');
        for (t, v) in self.t.iter().zip(&self.values) {
            let _ = write!(s, "{t:.16e}");
            for x in v {
                let _ = write!(s, ",{x:.16e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Largest step `h <= requested` for which every active delay is a whole
/// number of steps (to within `1e-12`).
pub fn compatible_step(requested: f64, delays: &[Delay]) -> Result<f64> {
    if !(requested > 0.0) || !requested.is_finite() {
        return Err(Error::domain("compatible_step", format!("h = {requested} must be positive")));
    }
    let taus: Vec<f64> = delays.iter().filter(|d| d.delta != 0.0).map(|d| d.tau).collect();
    let Some(tau_min) = taus.iter().copied().reduce(f64::min) else {
        return Ok(requested);
    };
    let first = (tau_min / requested * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    for m in first..first + 1_000_000 {
        let h = tau_min / m as f64;
        if taus.iter().all(|&tau| divides(h, tau)) {
            return Ok(h);
        }
    }
    Err(Error::StepIncompatible {
        step: requested,
        delay: tau_min,
    })
}

fn divides(h: f64, tau: f64) -> bool {
    let m = (tau / h).round();
    m >= 1.0 && (tau - m * h).abs() <= 1e-12 * tau.max(1.0)
}

/// Options for [`solve_fdde_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbmOptions {
    /// Number of corrector evaluations per step (1 is PECE).
    pub corrector_sweeps: usize,
}

impl Default for AbmOptions {
    fn default() -> Self {
        Self { corrector_sweeps: 1 }
    }
}

/// Fractional ABM trajectory on `[0, T]` with step `h`; `h` must divide every
/// active delay.
pub fn solve_fdde(system: &OracleSystem, t_end: f64, h: f64) -> Result<Trajectory> {
    solve_fdde_with(system, t_end, h, AbmOptions::default())
}

pub fn solve_fdde_with(
    system: &OracleSystem,
    t_end: f64,
    h: f64,
    opts: AbmOptions,
) -> Result<Trajectory> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain("solve_fdde", format!("h = {h} must be positive")));
    }
    if !(t_end >= h) {
        return Err(Error::domain("solve_fdde", format!("T = {t_end} must be at least h = {h}")));
    }
    if opts.corrector_sweeps == 0 {
        return Err(Error::domain("solve_fdde", "at least one corrector sweep is required"));
    }
    let mut lags = Vec::new();
    for d in system.active_delays() {
        if !divides(h, d.tau) {
            return Err(Error::StepIncompatible { step: h, delay: d.tau });
        }
        lags.push(((d.tau / h).round() as usize, d.tau, d.delta));
    }

    let alpha = system.alpha;
    let dim = system.dim;
    let n = (t_end / h).round() as usize;
    let ha = h.powf(alpha);
    let c_pred = ha / gamma_fn(alpha + 1.0)?;
    let c_corr = ha / gamma_fn(alpha + 2.0)?;
    // predictor weights b[m] = (m+1)^a - m^a, corrector a[m] with m = k - j
    let bw: Vec<f64> = (0..n).map(|m| pw(m + 1, alpha) - pw(m, alpha)).collect();
    let ap = alpha + 1.0;
    let aw: Vec<f64> = (0..n)
        .map(|m| pw(m + 2, ap) + pw(m, ap) - 2.0 * pw(m + 1, ap))
        .collect();

    let y0: Vec<f64> = system.histories.iter().map(HistoryFunction::at_zero).collect();
    let mut y: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut f: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    y.push(y0.clone());

    let rhs = |k: usize, yk: &[f64], y: &[Vec<f64>]| -> Vec<f64> {
        let mut out = (system.theta)(yk);
        let tk = k as f64 * h;
        for &(lag, tau, delta) in &lags {
            for j in 0..dim {
                let delayed = if k >= lag {
                    y[k - lag][j]
                } else {
                    system.histories[j].value(tk - tau)
                };
                out[j] += delta * delayed;
            }
        }
        out
    };
    f.push(rhs(0, &y0, &y));

    for k in 0..n {
        let kf = k as f64;
        let mut pred = y0.clone();
        for j in 0..dim {
            let mut acc = 0.0;
            for (i, fi) in f.iter().enumerate() {
                acc += bw[k - i] * fi[j];
            }
            pred[j] += c_pred * acc;
        }
        // history part of the corrector, fixed across sweeps
        let a0 = pw(k, ap) - (kf - alpha) * (kf + 1.0).powf(alpha);
        let mut hist = vec![0.0; dim];
        for j in 0..dim {
            let mut acc = a0 * f[0][j];
            for i in 1..=k {
                acc += aw[k - i] * f[i][j];
            }
            hist[j] = acc;
        }
        let mut cur = pred;
        for _ in 0..opts.corrector_sweeps {
            let fp = rhs(k + 1, &cur, &y);
            cur = (0..dim).map(|j| y0[j] + c_corr * (hist[j] + fp[j])).collect();
        }
        if let Some(bad) = cur.iter().find(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Divergence {
                t: (k + 1) as f64 * h,
                magnitude: bad.abs(),
            });
        }
        let fk = rhs(k + 1, &cur, &y);
        y.push(cur);
        f.push(fk);
    }
    Ok(Trajectory {
        t: (0..=n).map(|k| k as f64 * h).collect(),
        values: y,
    })
}

#[inline]
fn pw(m: usize, e: f64) -> f64 {
    if m == 0 {
        0.0
    } else {
        (m as f64).powf(e)
    }
}

/// One accepted step with the Dormand-Prince continuous extension.
#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    t1: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    fn eval(&self, t: f64, j: usize) -> f64 {
        let th = (t - self.t0) / (self.t1 - self.t0);
        let th1 = 1.0 - th;
        let r = &self.rcont;
        r[0][j] + th * (r[1][j] + th1 * (r[2][j] + th * (r[3][j] + th1 * r[4][j])))
    }
}

/// Continuous solution produced by [`method_of_steps`], using the
/// fourth-order continuous extension of each step.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    steps: Vec<DenseStep>,
    histories: Vec<HistoryFunction>,
}

impl DenseSolution {
    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t1)
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let dim = self.histories.len();
        (0..dim).map(|j| self.eval_component(t, j)).collect()
    }

    pub fn eval_component(&self, t: f64, j: usize) -> Result<f64> {
        if t < 0.0 {
            return Ok(self.histories[j].value(t));
        }
        if t > self.t_end() * (1.0 + 1e-14) {
            return Err(Error::domain(
                "DenseSolution::eval",
                format!("t = {t} beyond the end of the solution {}", self.t_end()),
            ));
        }
        let i = self.steps.partition_point(|s| s.t1 < t).min(self.steps.len() - 1);
        Ok(self.steps[i].eval(t, j))
    }

    pub fn number_of_steps(&self) -> usize {
        self.steps.len()
    }
}

/// Options for [`method_of_steps_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step as a fraction of the smallest active delay.
    pub max_step_fraction: f64,
}

impl Default for StepsOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-13,
            max_step_fraction: 1.0 / 64.0,
        }
    }
}

pub fn method_of_steps(system: &OracleSystem, t_end: f64) -> Result<DenseSolution> {
    method_of_steps_with(system, t_end, StepsOptions::default())
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DENSE: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Classical integration of the `alpha = 1` system, restarting at every
/// breakpoint `sum_i n_i tau_i`.
pub fn method_of_steps_with(
    system: &OracleSystem,
    t_end: f64,
    opts: StepsOptions,
) -> Result<DenseSolution> {
    if system.alpha != 1.0 {
        return Err(Error::domain(
            "method_of_steps",
            format!("requires alpha = 1, got {}", system.alpha),
        ));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::domain("method_of_steps", format!("T = {t_end} must be positive")));
    }
    let active: Vec<Delay> = system.active_delays().copied().collect();
    let tau_min = active.iter().map(|d| d.tau).fold(f64::INFINITY, f64::min);
    let h_max = if tau_min.is_finite() {
        tau_min * opts.max_step_fraction
    } else {
        t_end * opts.max_step_fraction
    };
    let mut breaks: Vec<f64> = series_terms(&active, t_end)
        .into_iter()
        .map(|s| s.shift)
        .filter(|&s| s > 0.0 && s < t_end)
        .collect();
    breaks.push(t_end);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * t_end);

    let dim = system.dim;
    let mut sol = DenseSolution {
        steps: Vec::new(),
        histories: system.histories.clone(),
    };
    let rhs = |t: f64, y: &[f64], sol: &DenseSolution| -> Result<Vec<f64>> {
        let mut out = (system.theta)(y);
        for d in &active {
            for (j, o) in out.iter_mut().enumerate() {
                *o += d.delta * sol.eval_component(t - d.tau, j)?;
            }
        }
        Ok(out)
    };

    let mut t = 0.0;
    let mut y: Vec<f64> = system.histories.iter().map(HistoryFunction::at_zero).collect();
    let mut h = h_max.min(1e-3);
    for &stop in &breaks {
        // restart: derivative re-evaluated from the right of the breakpoint
        let mut f0 = rhs(t, &y, &sol)?;
        while t < stop {
            let last = stop - t <= h * (1.0 + 1e-12);
            let step = if last { stop - t } else { h };
            let mut k = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
            k[0] = f0.clone();
            for s in 1..7 {
                let ys: Vec<f64> = (0..dim)
                    .map(|j| y[j] + step * (0..s).map(|q| A[s][q] * k[q][j]).sum::<f64>())
                    .collect();
                k[s] = rhs(t + C[s] * step, &ys, &sol)?;
            }
            let y5: Vec<f64> = (0..dim)
                .map(|j| y[j] + step * (0..7).map(|q| B5[q] * k[q][j]).sum::<f64>())
                .collect();
            let mut err = 0.0_f64;
            for j in 0..dim {
                let y4 = y[j] + step * (0..7).map(|q| B4[q] * k[q][j]).sum::<f64>();
                let sc = opts.atol + opts.rtol * y[j].abs().max(y5[j].abs());
                err = err.max(((y5[j] - y4) / sc).abs());
            }
            if err <= 1.0 || step <= 1e-14 * t_end {
                if let Some(bad) = y5.iter().find(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
                    return Err(Error::Divergence {
                        t: t + step,
                        magnitude: bad.abs(),
                    });
                }
                // FSAL: k[6] is f(t + step, y5)
                let f1 = k[6].clone();
                let mut rcont: [Vec<f64>; 5] = Default::default();
                for j in 0..dim {
                    let ydiff = y5[j] - y[j];
                    let bspl = step * k[0][j] - ydiff;
                    rcont[0].push(y[j]);
                    rcont[1].push(ydiff);
                    rcont[2].push(bspl);
                    rcont[3].push(ydiff - step * k[6][j] - bspl);
                    rcont[4].push(step * (0..7).map(|q| DENSE[q] * k[q][j]).sum::<f64>());
                }
                sol.steps.push(DenseStep {
                    t0: t,
                    t1: if last { stop } else { t + step },
                    rcont,
                });
                t = if last { stop } else { t + step };
                y = y5;
                f0 = f1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last || err > 1.0 {
                h = (step * factor).min(h_max);
            }
        }
    }
    Ok(sol)
}
