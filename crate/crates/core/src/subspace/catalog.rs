//! Table of operator / space pairs known to be invariant.
//!
//! Each entry is a template: it is instantiated from a [`CatalogParams`]
//! point, with every constrained reaction coefficient computed from the free
//! parameters. [`CatalogEntry::perturbed`] builds the same instance with its
//! constraint broken by 10%:
//!
//! - a tied coefficient (e.g. the `u^2` term of the exponential spaces) is
//!   scaled by 1.1;
//! - where the constraint is "R is linear", a term `0.1 |c1| u^2` is added;
//! - where the constraint is "no constant source", `c0 = 0.1 |c1|` is added.
//!
//! In the linear families with `e^(mu x) cos(kappa x), e^(mu x) sin(omega x)`
//! pairs the space is only closed under `d^2/dx^2` when `kappa = omega`, so
//! those entries use `kappa_i` for both.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{BasisFunction, Form, OperatorSpec, Subspace};
use crate::error::{Error, Result};

/// Free parameters shared by all templates. Each entry reads what it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogParams {
    /// Rate or squared frequency of the space (`a0` or `a1`), positive.
    pub a: f64,
    /// `b_0..b_5` of the diffusion coefficient.
    pub b: Vec<f64>,
    pub c1: f64,
    pub c0: f64,
    pub delta: f64,
    /// Polynomial degree of `D` (exponential entries) or of the polynomial
    /// part of a linear family; also the number of exponentials there.
    pub degree: usize,
    /// Number of trigonometric pairs in the linear families.
    pub pairs: usize,
    pub nu: Vec<f64>,
    pub kappa: Vec<f64>,
    pub omega: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Default for CatalogParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125],
            c1: -1.0,
            c0: 0.5,
            delta: 0.3,
            degree: 2,
            pairs: 1,
            nu: vec![1.0, -1.5, 2.0],
            kappa: vec![1.0, 2.0],
            omega: vec![1.0, 2.0],
            mu: vec![0.5, -0.5],
        }
    }
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

impl CatalogParams {
    /// A random admissible point. Magnitudes stay in `[0.5, 1.5]` and the
    /// rates / frequencies are kept apart so the sampled bases stay well
    /// conditioned.
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let a = rng.random_range(1.0..3.0);
        let b = (0..6).map(|_| signed(rng, 0.5, 1.5)).collect();
        let c1 = signed(rng, 0.5, 1.5);
        let c0 = signed(rng, 0.5, 1.5);
        let delta = signed(rng, 0.5, 1.5);
        let degree: usize = rng.random_range(1..=2);
        let pairs = degree.div_ceil(2);
        let nu = [1.0, -1.5, 2.0]
            .iter()
            .map(|v| v + rng.random_range(-0.2..0.2))
            .collect();
        let kappa: Vec<f64> = [1.0, 2.2].iter().map(|v| v + rng.random_range(-0.2..0.2)).collect();
        let omega = kappa.iter().map(|v| v + rng.random_range(-0.3..0.3)).collect();
        let mu = [0.5, -0.5].iter().map(|v| v + rng.random_range(-0.2..0.2)).collect();
        Self {
            a,
            b,
            c1,
            c0,
            delta,
            degree,
            pairs,
            nu,
            kappa,
            omega,
            mu,
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::ConstraintViolation(m.to_string()));
        if !(self.a > 0.0) {
            return fail("a must be positive");
        }
        if self.b.len() < 6 {
            return fail("need b_0..b_5");
        }
        if self.degree == 0 || self.degree > 3 {
            return fail("degree must be 1, 2 or 3");
        }
        if self.pairs == 0 || self.pairs > self.kappa.len().min(self.omega.len()).min(self.mu.len()) {
            return fail("not enough frequencies for the requested pairs");
        }
        if self.nu.len() < self.degree {
            return fail("not enough exponential rates for the requested degree");
        }
        Ok(())
    }
}

/// Which structural family a template belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Template {
    H1Exp1d,
    H1Exp2d,
    H1Poly2d { d_degree: usize },
    H1Poly3d,
    H1Trig2d,
    H1Trig3d,
    H2Exp1d,
    H2Exp2d,
    /// `d_degree = None` stands for an arbitrary diffusion coefficient,
    /// represented by a quintic.
    H2Poly2d { d_degree: Option<usize> },
    H2Poly3d,
    H2Trig2dI,
    H2Trig2dII,
    H2Trig3d,
    /// Linear operator `b0 u_xx + c1 u + delta ubar (+ c0)`.
    Linear { with_constant: bool, family: u8 },
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub form: Form,
    pub constraint: &'static str,
    template: Template,
}

macro_rules! entry {
    ($id:expr, $form:ident, $c:expr, $t:expr) => {
        CatalogEntry {
            id: $id,
            form: Form::$form,
            constraint: $c,
            template: $t,
        }
    };
}

const LINEAR_I: &str = "D = b0, R = c1 u + delta ubar + c0";
const LINEAR_II: &str = "D = b0, R = c1 u + delta ubar (no constant source)";

static CATALOG: &[CatalogEntry] = &[
    entry!("H1/exp-1d", H1, "W = {e^(-a0 x)}, c_(k+1) = -(k+1) a0^2 b_k, k = 1..n", Template::H1Exp1d),
    entry!("H1/exp-2d", H1, "W = {1, e^(-a1 x)}, D = b1 u + b0, R = -2 a1^2 b1 u^2 + c1 u + delta ubar + c0", Template::H1Exp2d),
    entry!("H1/poly-2d-i", H1, "W = {1, x}, D = b1 u + b0, R = c1 u + delta ubar + c0", Template::H1Poly2d { d_degree: 1 }),
    entry!("H1/poly-2d-ii", H1, "W = {1, x}, D = b2 u^2 + b1 u + b0, R = c1 u + delta ubar + c0", Template::H1Poly2d { d_degree: 2 }),
    entry!("H1/poly-3d", H1, "W = {1, x, x^2}, D = b1 u + b0, R = c1 u + delta ubar + c0", Template::H1Poly3d),
    entry!("H1/trig-2d", H1, "W = {cos(sqrt(a0) x), sin(sqrt(a0) x)}, D = b2 u^2 + b0, R = 3 a0 b2 u^3 + c1 u + delta ubar", Template::H1Trig2d),
    entry!("H1/trig-3d", H1, "W = {1, cos(sqrt(a1) x), sin(sqrt(a1) x)}, D = b1 u + b0, R = 2 a1 b1 u^2 + c1 u + delta ubar + c0", Template::H1Trig3d),
    entry!("H2/exp-1d", H2, "W = {e^(-a0 x)}, c_(k+1) = -a0^2 b_k, k = 1..n", Template::H2Exp1d),
    entry!("H2/exp-2d", H2, "W = {1, e^(-a1 x)}, D = b1 u + b0, R = -a1^2 b1 u^2 + c1 u + delta ubar + c0", Template::H2Exp2d),
    entry!("H2/poly-2d-i", H2, "W = {1, x}, D = b1 u + b0, R = c1 u + delta ubar + c0", Template::H2Poly2d { d_degree: Some(1) }),
    entry!("H2/poly-2d-ii", H2, "W = {1, x}, D = b2 u^2 + b1 u + b0, R = c1 u + delta ubar + c0", Template::H2Poly2d { d_degree: Some(2) }),
    entry!("H2/poly-2d-iii", H2, "W = {1, x}, D cubic, R = c1 u + delta ubar + c0", Template::H2Poly2d { d_degree: Some(3) }),
    entry!("H2/poly-2d-iv", H2, "W = {1, x}, D arbitrary, R = c1 u + delta ubar + c0", Template::H2Poly2d { d_degree: None }),
    entry!("H2/poly-3d", H2, "W = {1, x, x^2}, D = b1 u + b0, R = c1 u + delta ubar + c0", Template::H2Poly3d),
    entry!("H2/trig-2d-i", H2, "W = {cos(sqrt(a0) x), sin(sqrt(a0) x)}, D = b2 u^2 + b1 u + b0, R = a0 b2 u^3 + a0 b1 u^2 + c1 u + delta ubar", Template::H2Trig2dI),
    entry!("H2/trig-2d-ii", H2, "W = {cos(sqrt(a0) x), sin(sqrt(a0) x)}, D = b1 u + b0, R = a0 b1 u^2 + c1 u + delta ubar", Template::H2Trig2dII),
    entry!("H2/trig-3d", H2, "W = {1, cos(sqrt(a1) x), sin(sqrt(a1) x)}, D = b1 u + b0, R = a1 b1 u^2 + c1 u + delta ubar + c0", Template::H2Trig3d),
    entry!("linear-i/1", H1, LINEAR_I, Template::Linear { with_constant: true, family: 1 }),
    entry!("linear-i/2", H1, LINEAR_I, Template::Linear { with_constant: true, family: 2 }),
    entry!("linear-i/3", H1, LINEAR_I, Template::Linear { with_constant: true, family: 3 }),
    entry!("linear-i/4", H1, LINEAR_I, Template::Linear { with_constant: true, family: 4 }),
    entry!("linear-i/5", H1, LINEAR_I, Template::Linear { with_constant: true, family: 5 }),
    entry!("linear-i/6", H1, LINEAR_I, Template::Linear { with_constant: true, family: 6 }),
    entry!("linear-i/7", H1, LINEAR_I, Template::Linear { with_constant: true, family: 7 }),
    entry!("linear-i/8", H1, LINEAR_I, Template::Linear { with_constant: true, family: 8 }),
    entry!("linear-i/9", H1, LINEAR_I, Template::Linear { with_constant: true, family: 9 }),
    entry!("linear-i/10", H1, LINEAR_I, Template::Linear { with_constant: true, family: 10 }),
    entry!("linear-ii/1", H1, LINEAR_II, Template::Linear { with_constant: false, family: 1 }),
    entry!("linear-ii/2", H1, LINEAR_II, Template::Linear { with_constant: false, family: 2 }),
    entry!("linear-ii/3", H1, LINEAR_II, Template::Linear { with_constant: false, family: 3 }),
    entry!("linear-ii/4", H1, LINEAR_II, Template::Linear { with_constant: false, family: 4 }),
    entry!("linear-ii/5", H1, LINEAR_II, Template::Linear { with_constant: false, family: 5 }),
    entry!("linear-ii/6", H1, LINEAR_II, Template::Linear { with_constant: false, family: 6 }),
    entry!("linear-ii/7", H1, LINEAR_II, Template::Linear { with_constant: false, family: 7 }),
    entry!("linear-ii/8", H1, LINEAR_II, Template::Linear { with_constant: false, family: 8 }),
    entry!("linear-ii/9", H1, LINEAR_II, Template::Linear { with_constant: false, family: 9 }),
    entry!("linear-ii/10", H1, LINEAR_II, Template::Linear { with_constant: false, family: 10 }),
];

/// Every catalog entry.
pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}

pub fn find(id: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.id == id)
}

fn monomials(from: u32, to: u32) -> Vec<BasisFunction> {
    (from..=to).map(BasisFunction::Monomial).collect()
}

fn trig_pair(a: f64) -> Vec<BasisFunction> {
    let k = a.sqrt();
    vec![BasisFunction::Cosine(k), BasisFunction::Sine(k)]
}

impl CatalogEntry {
    /// True when some reaction coefficient is tied to the diffusion
    /// coefficients or the space parameters. The remaining entries only
    /// restrict the form of `D` and `R`.
    pub fn has_tied_coefficients(&self) -> bool {
        matches!(
            self.template,
            Template::H1Exp1d
                | Template::H1Exp2d
                | Template::H1Trig2d
                | Template::H1Trig3d
                | Template::H2Exp1d
                | Template::H2Exp2d
                | Template::H2Trig2dI
                | Template::H2Trig2dII
                | Template::H2Trig3d
        )
    }

    /// The operator and space at parameter point `p`.
    pub fn instantiate(&self, p: &CatalogParams) -> Result<(OperatorSpec, Subspace)> {
        self.build(p, false)
    }

    /// The same instance with its constraint violated by 10%.
    pub fn perturbed(&self, p: &CatalogParams) -> Result<(OperatorSpec, Subspace)> {
        self.build(p, true)
    }

    fn build(&self, p: &CatalogParams, perturb: bool) -> Result<(OperatorSpec, Subspace)> {
        use BasisFunction::*;
        p.validate()?;
        let b = &p.b;
        let a = p.a;
        let tie = if perturb { 1.1 } else { 1.0 };
        let delta = vec![p.delta];
        // R = c1 u + delta ubar + c0 with a 0.1 |c1| u^2 term when perturbed
        let linear_r = |c0: f64| {
            if perturb {
                vec![c0, p.c1, 0.1 * p.c1.abs()]
            } else {
                vec![c0, p.c1]
            }
        };
        let (form, d, r, basis) = match self.template {
            Template::H1Exp1d | Template::H2Exp1d => {
                let n = p.degree;
                let h1 = self.template == Template::H1Exp1d;
                let mut r = vec![0.0; n + 2];
                r[1] = p.c1;
                for k in 1..=n {
                    let factor = if h1 { (k + 1) as f64 } else { 1.0 };
                    r[k + 1] = -factor * a * a * b[k];
                }
                r[n + 1] *= tie;
                (self.form, b[..=n].to_vec(), r, vec![Exponential(-a)])
            }
            Template::H1Exp2d | Template::H2Exp2d => {
                let factor = if self.template == Template::H1Exp2d { 2.0 } else { 1.0 };
                let r = vec![p.c0, p.c1, -factor * a * a * b[1] * tie];
                (self.form, b[..2].to_vec(), r, vec![Monomial(0), Exponential(-a)])
            }
            Template::H1Poly2d { d_degree } => (self.form, b[..=d_degree].to_vec(), linear_r(p.c0), monomials(0, 1)),
            Template::H2Poly2d { d_degree } => {
                let deg = d_degree.unwrap_or(5);
                (self.form, b[..=deg].to_vec(), linear_r(p.c0), monomials(0, 1))
            }
            Template::H1Poly3d | Template::H2Poly3d => (self.form, b[..2].to_vec(), linear_r(p.c0), monomials(0, 2)),
            Template::H1Trig2d => {
                let d = vec![b[0], 0.0, b[2]];
                let r = vec![0.0, p.c1, 0.0, 3.0 * a * b[2] * tie];
                (self.form, d, r, trig_pair(a))
            }
            Template::H1Trig3d => {
                let r = vec![p.c0, p.c1, 2.0 * a * b[1] * tie];
                let mut basis = vec![Monomial(0)];
                basis.extend(trig_pair(a));
                (self.form, b[..2].to_vec(), r, basis)
            }
            Template::H2Trig2dI => {
                let r = vec![0.0, p.c1, a * b[1], a * b[2] * tie];
                (self.form, b[..3].to_vec(), r, trig_pair(a))
            }
            Template::H2Trig2dII => {
                let r = vec![0.0, p.c1, a * b[1] * tie];
                (self.form, b[..2].to_vec(), r, trig_pair(a))
            }
            Template::H2Trig3d => {
                let r = vec![p.c0, p.c1, a * b[1] * tie];
                let mut basis = vec![Monomial(0)];
                basis.extend(trig_pair(a));
                (self.form, b[..2].to_vec(), r, basis)
            }
            Template::Linear { with_constant, family } => {
                let basis = linear_family(p, with_constant, family)?;
                let r = if with_constant {
                    linear_r(p.c0)
                } else if perturb {
                    vec![0.1 * p.c1.abs(), p.c1]
                } else {
                    vec![0.0, p.c1]
                };
                (self.form, vec![b[0]], r, basis)
            }
        };
        Ok((OperatorSpec::new(form, d, r, delta)?, Subspace::new(basis)?))
    }
}

/// Spaces closed under `d^2/dx^2`. Without a constant (`with_constant =
/// false`) the polynomial part is `{x}` only, since `x^2` maps to a constant.
fn linear_family(p: &CatalogParams, with_constant: bool, family: u8) -> Result<Vec<BasisFunction>> {
    use BasisFunction::*;
    let n = p.degree;
    let (first, last) = if with_constant { (0, n as u32) } else { (1, 1) };
    let polys = || monomials(first, last);
    let constant = || if with_constant { vec![Monomial(0)] } else { vec![] };
    let exps = || p.nu[..n].iter().map(|&v| Exponential(v)).collect::<Vec<_>>();
    let trig = || {
        (0..p.pairs)
            .flat_map(|i| [Cosine(p.kappa[i]), Sine(p.omega[i])])
            .collect::<Vec<_>>()
    };
    let exp_trig = || {
        (0..p.pairs)
            .flat_map(|i| {
                [
                    ExpCosine { mu: p.mu[i], kappa: p.kappa[i] },
                    ExpSine { mu: p.mu[i], omega: p.kappa[i] },
                ]
            })
            .collect::<Vec<_>>()
    };
    let parts: Vec<Vec<BasisFunction>> = match family {
        1 => vec![polys()],
        2 => vec![constant(), exps()],
        3 => vec![constant(), trig()],
        4 => vec![polys(), exps()],
        5 => vec![polys(), trig()],
        6 => vec![constant(), exps(), trig()],
        7 => vec![polys(), exps(), trig()],
        8 => vec![constant(), exp_trig()],
        9 => vec![polys(), exp_trig()],
        10 => vec![polys(), exps(), exp_trig()],
        _ => return Err(Error::domain("catalog", format!("no linear family {family}"))),
    };
    Ok(parts.concat())
}
