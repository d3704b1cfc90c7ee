//! L1 discretisation of the Caputo derivative of order `0 < alpha <= 1` on a
//! uniform grid starting at the lower terminal `t = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::gamma_fn;

/// Uniform time grid `t_j = t0 + j h`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub t0: f64,
    pub h: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(t0: f64, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain("UniformGrid", format!("h = {h} must be positive")));
        }
        if n < 2 {
            return Err(Error::domain("UniformGrid", format!("n = {n} must be at least 2")));
        }
        if !t0.is_finite() {
            return Err(Error::domain("UniformGrid", "t0 must be finite"));
        }
        Ok(Self { t0, h, n })
    }

    /// Grid on `[0, t_end]` with step `h`; `t_end / h` is rounded to the
    /// nearest integer.
    pub fn covering(t_end: f64, h: f64) -> Result<Self> {
        let steps = (t_end / h).round();
        if !(steps >= 1.0) {
            return Err(Error::domain(
                "UniformGrid",
                format!("t_end = {t_end} shorter than one step h = {h}"),
            ));
        }
        Self::new(0.0, h, steps as usize + 1)
    }

    #[inline]
    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.h
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.t(j)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n - 1)
    }
}

/// L1 weights `b_k = (k+1)^(1-alpha) - k^(1-alpha)`, `k = 0..m`.
fn l1_weights(alpha: f64, m: usize) -> Vec<f64> {
    let e = 1.0 - alpha;
    (0..m)
        .map(|k| {
            let k = k as f64;
            (k + 1.0).powf(e) - k.powf(e)
        })
        .collect()
}

/// Approximates the Caputo derivative of `samples` at each grid node.
///
/// `d[0]` is 0 by convention. For `alpha < 1` the L1 scheme is used, accurate
/// to `O(h^(2-alpha))` for `C^2` data. For `alpha == 1` centred differences
/// are used in the interior and a second-order one-sided difference at the
/// last node.
pub fn caputo_l1(samples: &[f64], alpha: f64, grid: &UniformGrid) -> Result<Vec<f64>> {
    if samples.len() != grid.n {
        return Err(Error::DimensionMismatch {
            context: "caputo_l1",
            expected: grid.n,
            got: samples.len(),
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("caputo_l1", format!("alpha = {alpha} not in (0, 1]")));
    }
    if grid.t0 != 0.0 {
        return Err(Error::domain(
            "caputo_l1",
            format!("grid must start at the lower terminal 0, got t0 = {}", grid.t0),
        ));
    }
    let n = grid.n;
    let h = grid.h;
    let mut d = vec![0.0; n];
    if alpha == 1.0 {
        for j in 1..n - 1 {
            d[j] = (samples[j + 1] - samples[j - 1]) / (2.0 * h);
        }
        let j = n - 1;
        d[j] = if j >= 2 {
            (3.0 * samples[j] - 4.0 * samples[j - 1] + samples[j - 2]) / (2.0 * h)
        } else {
            (samples[j] - samples[j - 1]) / h
        };
        return Ok(d);
    }
    let b = l1_weights(alpha, n - 1);
    let scale = 1.0 / (gamma_fn(2.0 - alpha)? * h.powf(alpha));
    let diffs: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
    for j in 1..n {
        // sum_{k=0}^{j-1} b_k (f_{j-k} - f_{j-k-1})
        let mut acc = 0.0;
        for k in 0..j {
            acc += b[k] * diffs[j - k - 1];
        }
        d[j] = scale * acc;
    }
    Ok(d)
}
