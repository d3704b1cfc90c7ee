//! Error-free transformations and compensated accumulation.
//!
//! `Dd` is an unevaluated sum `hi + lo` carrying roughly 106 bits. It is only
//! used where a series suffers cancellation, so just the handful of operations
//! needed there are provided.

#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd {
            hi: s,
            lo: lo - (s - hi),
        }
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        Dd::renorm(s, e)
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        Dd::renorm(p, e)
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        // remainder self - q1*b, exactly up to the low word
        let (p, pe) = two_prod(q1, b);
        let (s, se) = two_sum(self.hi, -p);
        let r = s + (se - pe + self.lo);
        let q2 = r / b;
        Dd::renorm(q1, q2)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_is_exact() {
        let (s, e) = two_sum(1.0, 1e-17);
        assert_eq!(s, 1.0);
        assert_eq!(e, 1e-17);
    }

    #[test]
    fn dd_division_recovers_third() {
        let third = Dd::from_f64(1.0).div_f64(3.0);
        let back = third.mul_f64(3.0);
        assert!((back.hi - 1.0).abs() + back.lo.abs() < 1e-30);
    }
}
