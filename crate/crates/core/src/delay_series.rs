//! Closed-form coefficients of the linear fractional delay equation
//!
//! ```text
//! D^alpha A(t) = lambda A(t) + sum_i delta_i A(t - tau_i) + c0,   A = psi on [-tau*, 0]
//! ```
//!
//! as floor-truncated series of delayed Prabhakar functions. Expanding
//! `1 / (s^alpha - lambda - sum_i delta_i e^{-s tau_i})` in powers of the delay
//! terms gives one term per multi-index `k` with weight
//! `multinomial(n; k) prod_i delta_i^{k_i}`, order `n = |k|` and shift
//! `sum_i k_i tau_i`. Terms whose shift exceeds `t` are switched off by their
//! Heaviside factor, so every sum below is finite.
//!
//! Each coefficient is the sum of a homogeneous part driven by `psi(0)`, one
//! history convolution per delay, and the constant forcing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{HistoryFunction, HistoryKind};
use crate::quadrature;
use crate::special::{prabhakar, PrabhakarParams};

/// Absolute accuracy aimed at for each convolution integral.
pub const QUAD_TOL: f64 = 1e-11;

/// Delayed unit step, `H(0) = 1`.
#[inline]
pub fn heaviside(t: f64) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// One constant delay `tau` entering with coefficient `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Delay {
    pub tau: f64,
    pub delta: f64,
}

/// One term of the expanded series: order `n`, shift and scalar weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub n: u32,
    pub shift: f64,
    pub weight: f64,
}

/// All terms with `shift <= t_max`, in order of increasing `n`.
///
/// Terms whose weight vanishes (some `delta_i = 0`) are dropped, except the
/// leading `n = 0` term.
pub fn series_terms(delays: &[Delay], t_max: f64) -> Vec<SeriesTerm> {
    let mut out = vec![SeriesTerm {
        n: 0,
        shift: 0.0,
        weight: 1.0,
    }];
    if t_max < 0.0 {
        return out;
    }
    // multi-indices enumerated with their running shift and weight;
    // weight = n! / prod k_i! * prod delta_i^k_i, accumulated incrementally
    let m = delays.len();
    let mut stack: Vec<(Vec<u32>, f64)> = vec![(vec![0; m], 0.0)];
    let mut seen = std::collections::HashSet::new();
    while let Some((k, shift)) = stack.pop() {
        for i in 0..m {
            let Delay { tau, delta } = delays[i];
            if delta == 0.0 {
                continue;
            }
            let s = shift + tau;
            if t_max - s < 0.0 {
                continue;
            }
            let mut next = k.clone();
            next[i] += 1;
            if !seen.insert(next.clone()) {
                continue;
            }
            let n: u32 = next.iter().sum();
            let mut weight = 1.0;
            let mut count = 0u32;
            for (j, &kj) in next.iter().enumerate() {
                for q in 1..=kj {
                    count += 1;
                    weight *= f64::from(count) / f64::from(q) * delays[j].delta;
                }
            }
            out.push(SeriesTerm { n, shift: s, weight });
            stack.push((next, s));
        }
    }
    out.sort_by(|a, b| a.n.cmp(&b.n).then(a.shift.total_cmp(&b.shift)));
    out
}

fn check_alpha(alpha: f64, context: &'static str) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(context, format!("alpha = {alpha} not in (0, 1]")));
    }
    Ok(())
}

/// `x^p E^{n+1}_{alpha, beta}(lambda x^alpha)` with `x >= 0`.
fn shifted_prabhakar(x: f64, p: f64, alpha: f64, beta: f64, n: u32, lambda: f64) -> Result<f64> {
    let e = prabhakar(PrabhakarParams::new(alpha, beta, f64::from(n) + 1.0)?, lambda * x.powf(alpha))?;
    Ok(x.powf(p) * e.value)
}

fn homogeneous_sum(t: f64, alpha: f64, lambda: f64, terms: &[SeriesTerm]) -> Result<f64> {
    let mut acc = 0.0;
    for term in terms {
        let x = t - term.shift;
        if heaviside(x) == 0.0 {
            continue;
        }
        let nf = f64::from(term.n);
        acc += term.weight * shifted_prabhakar(x, alpha * nf, alpha, alpha * nf + 1.0, term.n, lambda)?;
    }
    Ok(acc)
}

fn forced_sum(t: f64, alpha: f64, lambda: f64, c0: f64, terms: &[SeriesTerm]) -> Result<f64> {
    if c0 == 0.0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for term in terms {
        let x = t - term.shift;
        if heaviside(x) == 0.0 {
            continue;
        }
        let nf = f64::from(term.n);
        acc += term.weight
            * shifted_prabhakar(x, alpha * (nf + 1.0), alpha, alpha * nf + alpha + 1.0, term.n, lambda)?;
    }
    Ok(c0 * acc)
}

fn single_delay_terms(delta: f64, tau: f64, t: f64) -> Result<Vec<SeriesTerm>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain("delay_series", format!("tau = {tau} must be positive")));
    }
    Ok(series_terms(&[Delay { tau, delta }], t))
}

/// `sum_n delta^n H(t - n tau) (t - n tau)^(alpha n) E^{n+1}_{alpha, alpha n + 1}(lambda (t - n tau)^alpha)`.
pub fn homogeneous_kernel(t: f64, alpha: f64, lambda: f64, delta: f64, tau: f64) -> Result<f64> {
    check_alpha(alpha, "homogeneous_kernel")?;
    if t < 0.0 {
        return Err(Error::domain("homogeneous_kernel", format!("t = {t} must be non-negative")));
    }
    homogeneous_sum(t, alpha, lambda, &single_delay_terms(delta, tau, t)?)
}

/// The homogeneous kernel summed over `n = 0..=n_max` regardless of `t`,
/// with every Heaviside factor honoured.
pub fn homogeneous_kernel_truncated(
    t: f64,
    alpha: f64,
    lambda: f64,
    delta: f64,
    tau: f64,
    n_max: u32,
) -> Result<f64> {
    check_alpha(alpha, "homogeneous_kernel")?;
    let terms: Vec<SeriesTerm> = (0..=n_max)
        .map(|n| SeriesTerm {
            n,
            shift: f64::from(n) * tau,
            weight: delta.powi(n as i32),
        })
        .collect();
    homogeneous_sum(t, alpha, lambda, &terms)
}

/// `sum_n delta^n H(t - n tau) (t - n tau)^(alpha n + alpha - 1) E^{n+1}_{alpha, alpha n + alpha}(lambda (t - n tau)^alpha)`.
///
/// Fails with [`Error::Singular`] when `t` sits exactly on a breakpoint whose
/// term has a negative exponent.
pub fn impulse_kernel(t: f64, alpha: f64, lambda: f64, delta: f64, tau: f64) -> Result<f64> {
    check_alpha(alpha, "impulse_kernel")?;
    if t < 0.0 {
        return Err(Error::domain("impulse_kernel", format!("t = {t} must be non-negative")));
    }
    ImpulseKernel::new(alpha, lambda, single_delay_terms(delta, tau, t)?)?.eval(t)
}

/// `sum_n c0 delta^n H(t - n tau) (t - n tau)^(alpha (n+1)) E^{n+1}_{alpha, alpha n + alpha + 1}(c1 (t - n tau)^alpha)`.
pub fn forced_term(t: f64, alpha: f64, c1: f64, c0: f64, delta: f64, tau: f64) -> Result<f64> {
    check_alpha(alpha, "forced_term")?;
    if t < 0.0 {
        return Err(Error::domain("forced_term", format!("t = {t} must be non-negative")));
    }
    forced_sum(t, alpha, c1, c0, &single_delay_terms(delta, tau, t)?)
}

/// The impulse response of `D^alpha - lambda - sum delta_i e^{-s tau_i}` as a
/// list of weighted, shifted Prabhakar terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseKernel {
    alpha: f64,
    lambda: f64,
    terms: Vec<SeriesTerm>,
}

impl ImpulseKernel {
    pub fn new(alpha: f64, lambda: f64, terms: Vec<SeriesTerm>) -> Result<Self> {
        check_alpha(alpha, "ImpulseKernel")?;
        Ok(Self { alpha, lambda, terms })
    }

    /// Kernel for the given delays, with every term needed up to `t_max`.
    pub fn for_delays(alpha: f64, lambda: f64, delays: &[Delay], t_max: f64) -> Result<Self> {
        Self::new(alpha, lambda, series_terms(delays, t_max))
    }

    /// The same kernel multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut k = self.clone();
        for term in &mut k.terms {
            term.weight *= c;
        }
        k
    }

    pub fn terms(&self) -> &[SeriesTerm] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let a = self.alpha;
        let mut acc = 0.0;
        for (idx, term) in self.terms.iter().enumerate() {
            let x = t - term.shift;
            if heaviside(x) == 0.0 {
                continue;
            }
            let nf = f64::from(term.n);
            let p = a * nf + a - 1.0;
            if x == 0.0 && p < 0.0 {
                return Err(Error::Singular { t, term: idx });
            }
            acc += term.weight * shifted_prabhakar(x, p, a, a * (nf + 1.0), term.n, self.lambda)?;
        }
        Ok(acc)
    }
}

/// `int_0^t K(r) psi(t - tau - r) g(t - tau - r) dr`.
///
/// The gate limits the range to `r in (max(0, t - tau), t]`. Polynomial
/// histories are integrated exactly, term by term, with
///
/// ```text
/// int_0^U u^(beta-1) E^g_{a,beta}(lambda u^a) (U - u)^m du = m! U^(beta+m) E^g_{a,beta+m+1}(lambda U^a)
/// ```
///
/// Sampled histories go through [`convolve_history_quadrature`].
pub fn convolve_history(
    kernel: &ImpulseKernel,
    history: &HistoryFunction,
    t: f64,
    tau: f64,
) -> Result<f64> {
    match history.kind() {
        HistoryKind::Polynomial(c) => convolve_polynomial(kernel, c, t, tau),
        HistoryKind::Samples { .. } => convolve_history_quadrature(kernel, history, t, tau),
    }
}

fn convolve_polynomial(kernel: &ImpulseKernel, c: &[f64], t: f64, tau: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let a = kernel.alpha;
    let lower = (t - tau).max(0.0);
    // psi(y - tau) = sum_m e_m y^m
    let e: Vec<f64> = (0..c.len())
        .map(|m| {
            let mut binom = 1.0;
            let mut acc = 0.0;
            for (k, &ck) in c.iter().enumerate().skip(m) {
                if k > m {
                    binom *= k as f64 / (k - m) as f64;
                }
                acc += ck * binom * (-tau).powi((k - m) as i32);
            }
            acc
        })
        .collect();
    // sum_m coef_m m! x^(beta+m) E^{n+1}_{a, beta+m+1}(lambda x^a)
    let moments = |coef: &[f64], x: f64, n: u32| -> Result<f64> {
        let beta = a * (f64::from(n) + 1.0);
        let mut fact = 1.0;
        let mut acc = 0.0;
        for (m, &cm) in coef.iter().enumerate() {
            if m > 0 {
                fact *= m as f64;
            }
            if cm != 0.0 {
                let bm = beta + m as f64;
                acc += cm * fact * shifted_prabhakar(x, bm, a, bm + 1.0, n, kernel.lambda)?;
            }
        }
        Ok(acc)
    };
    let mut acc = 0.0;
    for term in &kernel.terms {
        if term.weight == 0.0 {
            continue;
        }
        let s = term.shift;
        if lower.max(s) >= t {
            continue;
        }
        let mut v = moments(&e, t - s, term.n)?;
        if lower > s {
            v -= moments(c, lower - s, term.n)?;
        }
        acc += term.weight * v;
    }
    Ok(acc)
}

/// [`convolve_history`] by adaptive quadrature, for any history. Each kernel
/// term is integrated after the substitution `v = (r - shift)^alpha`, which
/// turns `(r - shift)^(alpha n + alpha - 1) dr` into `v^n dv / alpha` and
/// removes the endpoint singularity.
pub fn convolve_history_quadrature(
    kernel: &ImpulseKernel,
    history: &HistoryFunction,
    t: f64,
    tau: f64,
) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let a = kernel.alpha;
    let lower = (t - tau).max(0.0);
    let mut acc = 0.0;
    for term in &kernel.terms {
        if term.weight == 0.0 {
            continue;
        }
        let s = term.shift;
        let r0 = lower.max(s);
        if r0 >= t {
            continue;
        }
        let v0 = (r0 - s).powf(a);
        let v1 = (t - s).powf(a);
        let n = term.n;
        let params = PrabhakarParams::new(a, a * (f64::from(n) + 1.0), f64::from(n) + 1.0)?;
        let lambda = kernel.lambda;
        let base = t - tau - s;
        let integrand = |v: f64| -> Result<f64> {
            let e = prabhakar(params, lambda * v)?.value;
            let psi = history.value((base - v.powf(1.0 / a)).min(0.0));
            Ok(v.powi(n as i32) * e * psi)
        };
        let tol = QUAD_TOL * a / term.weight.abs().max(1.0);
        acc += term.weight / a * quadrature::integrate(integrand, v0, v1, tol)?;
    }
    Ok(acc)
}

/// One scalar fractional delay equation with its history.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySeriesProblem {
    pub alpha: f64,
    pub lambda: f64,
    pub c0: f64,
    pub delays: Vec<Delay>,
    pub history: HistoryFunction,
}

impl DelaySeriesProblem {
    pub fn new(
        alpha: f64,
        lambda: f64,
        c0: f64,
        delays: Vec<Delay>,
        history: HistoryFunction,
    ) -> Result<Self> {
        check_alpha(alpha, "DelaySeriesProblem")?;
        if !lambda.is_finite() || !c0.is_finite() {
            return Err(Error::domain("DelaySeriesProblem", "lambda and c0 must be finite"));
        }
        if delays.is_empty() {
            return Err(Error::domain("DelaySeriesProblem", "at least one delay is required"));
        }
        for d in &delays {
            if !(d.tau > 0.0) || !d.tau.is_finite() || !d.delta.is_finite() {
                return Err(Error::domain(
                    "DelaySeriesProblem",
                    format!("invalid delay (tau = {}, delta = {})", d.tau, d.delta),
                ));
            }
        }
        let tau_max = delays.iter().map(|d| d.tau).fold(0.0, f64::max);
        if history.tau_star() < tau_max * (1.0 - 1e-12) {
            return Err(Error::domain(
                "DelaySeriesProblem",
                format!("history covers [-{}, 0] but the largest delay is {tau_max}", history.tau_star()),
            ));
        }
        Ok(Self {
            alpha,
            lambda,
            c0,
            delays,
            history,
        })
    }

    /// Single-delay problem with a history on exactly `[-tau, 0]`.
    pub fn single(alpha: f64, lambda: f64, c0: f64, tau: f64, delta: f64, history: HistoryFunction) -> Result<Self> {
        Self::new(alpha, lambda, c0, vec![Delay { tau, delta }], history)
    }

    pub fn tau_star(&self) -> f64 {
        self.delays.iter().map(|d| d.tau).fold(0.0, f64::max)
    }

    pub fn tau_min(&self) -> f64 {
        self.delays.iter().map(|d| d.tau).fold(f64::INFINITY, f64::min)
    }

    /// `A(t)` for `t >= -tau*`; the history itself for `t < 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            if t < -self.history.tau_star() * (1.0 + 1e-12) {
                return Err(Error::domain("coefficient", format!("t = {t} precedes the history")));
            }
            return Ok(self.history.value(t));
        }
        let terms = series_terms(&self.delays, t);
        let (a, l) = (self.alpha, self.lambda);
        let mut acc = self.history.at_zero() * homogeneous_sum(t, a, l, &terms)?;
        let kernel = ImpulseKernel::new(a, l, terms.clone())?;
        for d in &self.delays {
            if d.delta != 0.0 {
                acc += d.delta * convolve_history(&kernel, &self.history, t, d.tau)?;
            }
        }
        acc += forced_sum(t, a, l, self.c0, &terms)?;
        Ok(acc)
    }
}

/// Closed-form `A(t)` for a problem with exactly one delay.
pub fn coefficient(t: f64, problem: &DelaySeriesProblem) -> Result<f64> {
    if problem.delays.len() != 1 {
        return Err(Error::DimensionMismatch {
            context: "coefficient (number of delays)",
            expected: 1,
            got: problem.delays.len(),
        });
    }
    problem.eval(t)
}

/// Closed-form `A(t)` for any number of delays; the two-delay case is the
/// double binomial series.
pub fn coefficient_multi_delay(t: f64, problem: &DelaySeriesProblem) -> Result<f64> {
    problem.eval(t)
}
