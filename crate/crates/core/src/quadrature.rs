//! Composite Gauss-Legendre quadrature with adaptive bisection.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 15;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the `ORDER`-point rule on `[-1, 1]`.
fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Gauss-Legendre rule by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let nf = n as f64;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn panel<F>(f: &mut F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in rule() {
        acc += w * f(c + r * x)?;
    }
    Ok(acc * r)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each panel is compared against the sum of its two halves; panels that
/// disagree by more than their share of the tolerance are bisected.
pub(crate) fn integrate<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(&mut f, a, b)?;
    let mut worst = 0.0_f64;
    let v = refine(&mut f, a, b, whole, tol, 0, &mut worst)?;
    if worst > tol {
        return Err(Error::Quadrature {
            requested: tol,
            achieved: worst,
        });
    }
    Ok(v)
}

fn refine<F>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let left = panel(f, a, m)?;
    let right = panel(f, m, b)?;
    let split = left + right;
    let err = (split - whole).abs();
    if err <= tol || depth >= MAX_DEPTH || m <= a || m >= b {
        if err > tol {
            *worst = worst.max(err);
        }
        return Ok(split);
    }
    let half = 0.5 * tol;
    Ok(refine(f, a, m, left, half, depth + 1, worst)?
        + refine(f, m, b, right, half, depth + 1, worst)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials() {
        let r = gauss_legendre(ORDER);
        let s: f64 = r.iter().map(|&(_, w)| w).sum();
        assert!((s - 2.0).abs() < 1e-14);
        // exact through degree 29
        let v: f64 = r.iter().map(|&(x, w)| w * x.powi(28)).sum();
        assert!((v - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_steep_integrand() {
        let v = integrate(|x| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0 / 1e-2_f64) * (1.0 / 1e-2_f64).atan();
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn reports_failure_on_nonintegrable() {
        let r = integrate(|x: f64| Ok(1.0 / x.abs().max(1e-300)), 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
