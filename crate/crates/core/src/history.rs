//! Initial histories `psi` on `[-tau*, 0]`.
//!
//! For `t >= 0` a history evaluates to `psi(0)`, and the gate `g(t)` is 1 on
//! `t < 0` and 0 otherwise, so `psi(t) g(t)` is the history with compact
//! support.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryKind {
    /// `psi(t) = sum_k c_k t^k`.
    Polynomial(Vec<f64>),
    /// Piecewise-linear interpolation through `(t_i, v_i)`, `t_i` increasing.
    Samples { t: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFunction {
    kind: HistoryKind,
    tau_star: f64,
}

impl HistoryFunction {
    pub fn polynomial(coeffs: Vec<f64>, tau_star: f64) -> Result<Self> {
        check_tau(tau_star)?;
        if coeffs.is_empty() {
            return Err(Error::domain("HistoryFunction", "polynomial needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("HistoryFunction", "non-finite polynomial coefficient"));
        }
        Ok(Self {
            kind: HistoryKind::Polynomial(coeffs),
            tau_star,
        })
    }

    pub fn constant(value: f64, tau_star: f64) -> Result<Self> {
        Self::polynomial(vec![value], tau_star)
    }

    /// Sampled history. The samples must cover `[-tau_star, 0]`.
    pub fn samples(t: Vec<f64>, values: Vec<f64>, tau_star: f64) -> Result<Self> {
        check_tau(tau_star)?;
        if t.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "HistoryFunction::samples",
                expected: t.len(),
                got: values.len(),
            });
        }
        if t.len() < 2 {
            return Err(Error::domain("HistoryFunction", "need at least two samples"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("HistoryFunction", "sample times must be strictly increasing"));
        }
        if values.iter().chain(t.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("HistoryFunction", "non-finite sample"));
        }
        let tol = 1e-12 * tau_star;
        if t[0] > -tau_star + tol || t[t.len() - 1] < -tol {
            return Err(Error::domain(
                "HistoryFunction",
                format!("samples span [{}, {}], need [-{tau_star}, 0]", t[0], t[t.len() - 1]),
            ));
        }
        Ok(Self {
            kind: HistoryKind::Samples { t, values },
            tau_star,
        })
    }

    pub fn kind(&self) -> &HistoryKind {
        &self.kind
    }

    pub fn tau_star(&self) -> f64 {
        self.tau_star
    }

    /// Same history with its domain widened or narrowed to `[-tau_star, 0]`.
    pub fn with_tau_star(&self, tau_star: f64) -> Result<Self> {
        match &self.kind {
            HistoryKind::Polynomial(c) => Self::polynomial(c.clone(), tau_star),
            HistoryKind::Samples { t, values } => Self::samples(t.clone(), values.clone(), tau_star),
        }
    }

    /// `psi(t)`, extended by `psi(0)` for `t >= 0`. Below `-tau*` a polynomial
    /// is evaluated as is and samples are held constant.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.min(0.0);
        match &self.kind {
            HistoryKind::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
            HistoryKind::Samples { t: ts, values } => {
                let last = ts.len() - 1;
                if t <= ts[0] {
                    return values[0];
                }
                if t >= ts[last] {
                    return values[last];
                }
                let i = ts.partition_point(|&s| s <= t).max(1) - 1;
                let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }

    pub fn at_zero(&self) -> f64 {
        self.value(0.0)
    }

    /// `psi(t) g(t)`: the history, cut off at `t >= 0`.
    pub fn gated(&self, t: f64) -> f64 {
        gate(t) * self.value(t)
    }
}

fn check_tau(tau_star: f64) -> Result<()> {
    if !(tau_star > 0.0) || !tau_star.is_finite() {
        return Err(Error::domain("HistoryFunction", format!("tau* = {tau_star} must be positive")));
    }
    Ok(())
}

/// `g(t) = 1` for `t < 0`, `0` for `t >= 0`.
#[inline]
pub fn gate(t: f64) -> f64 {
    if t < 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Serializable description of a history, as written in a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HistorySpec {
    /// Coefficients `c_0, c_1, ...` of `sum_k c_k t^k`.
    Polynomial(Vec<f64>),
    Samples { t: Vec<f64>, values: Vec<f64> },
    /// CSV file with header `t,value`.
    File(PathBuf),
}

#[derive(Deserialize)]
struct SampleRow {
    t: f64,
    value: f64,
}

impl HistorySpec {
    pub fn build(&self, tau_star: f64) -> Result<HistoryFunction> {
        match self {
            HistorySpec::Polynomial(c) => HistoryFunction::polynomial(c.clone(), tau_star),
            HistorySpec::Samples { t, values } => HistoryFunction::samples(t.clone(), values.clone(), tau_star),
            HistorySpec::File(path) => {
                let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let (mut t, mut values) = (Vec::new(), Vec::new());
                for row in rdr.deserialize::<SampleRow>() {
                    let row = row.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    t.push(row.t);
                    values.push(row.value);
                }
                HistoryFunction::samples(t, values, tau_star)
            }
        }
    }
}
