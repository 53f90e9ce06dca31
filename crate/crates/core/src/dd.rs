//! Double-double arithmetic: an unevaluated sum `hi + lo` of two f64s,
//! carrying roughly 32 significant digits.
//!
//! Fractional parts of large smooth quantities are the reason this exists:
//! reducing m·φ(n) mod 1 or taking second differences of φ loses up to
//! log₁₀(n) digits in plain f64, while the quantities downstream (phases,
//! Toeplitz weights) need the surviving digits.
//!
//! Algorithms follow Dekker (1971) and the QD library of Hida, Li and
//! Bailey. Products use the Dekker split rather than a fused multiply-add,
//! so results are bitwise identical across targets.

/// `a + b` as an exact (sum, error) pair. No magnitude precondition.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

/// `a + b` as an exact (sum, error) pair, valid when `|a| >= |b|`.
#[inline]
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Dekker split of a f64 into high and low halves with 26-bit mantissas.
#[inline]
fn split(a: f64) -> (f64, f64) {
    const C: f64 = 134217729.0; // 2^27 + 1
    let t = C * a;
    let hi = t - (t - a);
    let lo = a - hi;
    (hi, lo)
}

/// `a * b` as an exact (product, error) pair.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

/// A double-double number. Invariant: `|lo| <= ulp(hi)/2` after any
/// constructor or arithmetic operation (the pair is normalized).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn from_i64(n: i64) -> Dd {
        // exact for |n| < 2^53, which covers every index in this crate
        debug_assert!(n.abs() < (1i64 << 53));
        Dd {
            hi: n as f64,
            lo: 0.0,
        }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (s1, s2) = quick_two_sum(s1, s2 + t2);
        Dd { hi: s1, lo: s2 }
    }

    #[inline]
    pub fn add_f64(self, rhs: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs);
        let (s1, s2) = quick_two_sum(s1, s2 + self.lo);
        Dd { hi: s1, lo: s2 }
    }

    #[inline]
    pub fn sub(self, rhs: Dd) -> Dd {
        self.add(-rhs)
    }

    #[inline]
    pub fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (s1, s2) = quick_two_sum(p, e);
        Dd { hi: s1, lo: s2 }
    }

    #[inline]
    pub fn mul_f64(self, rhs: f64) -> Dd {
        let (p, e) = two_prod(self.hi, rhs);
        let e = e + self.lo * rhs;
        let (s1, s2) = quick_two_sum(p, e);
        Dd { hi: s1, lo: s2 }
    }

    #[inline]
    pub fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self.sub(rhs.mul_f64(q1));
        let q2 = r.hi / rhs.hi;
        let r = r.sub(rhs.mul_f64(q2));
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::new(s, e + q3)
    }

    #[inline]
    pub fn div_f64(self, rhs: f64) -> Dd {
        self.div(Dd::from_f64(rhs))
    }

    #[inline]
    pub fn recip(self) -> Dd {
        Dd::ONE.div(self)
    }

    /// Multiply by 2^k exactly.
    #[inline]
    pub fn ldexp(self, k: i32) -> Dd {
        let s = (2.0f64).powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    /// Largest integer <= self, exact.
    pub fn floor(self) -> f64 {
        let f = self.hi.floor();
        let d = self.hi - f; // exact, d in [0, 1)
        let r = d + self.lo;
        if r < 0.0 {
            f - 1.0
        } else if r >= 1.0 {
            f + 1.0
        } else {
            f
        }
    }

    /// Floor that treats values within `eps` of an integer as that integer.
    ///
    /// φ(n) can land exactly on an integer (h(m) integral); the root finder
    /// then returns the integer up to ~1e-28, and an unsnapped floor would
    /// flip membership indicators.
    pub fn floor_snapped(self, eps: f64) -> f64 {
        let (k, r) = self.reduce_nearest();
        if r.hi.abs() <= eps {
            k
        } else {
            self.floor()
        }
    }

    /// Nearest integer k and exact remainder r = self - k with r in [-1/2, 1/2).
    pub fn reduce_nearest(self) -> (f64, Dd) {
        let mut k = self.hi.round();
        let d = self.hi - k; // exact for |self.hi| < 2^52
        let mut r = Dd::new(d, 0.0).add_f64(self.lo);
        if r.hi >= 0.5 {
            k += 1.0;
            r = r.add_f64(-1.0);
        } else if r.hi < -0.5 {
            k -= 1.0;
            r = r.add_f64(1.0);
        }
        (k, r)
    }

    /// Fractional part in [0, 1), computed through the nearest-integer
    /// reduction so the high component carries no integer bits.
    pub fn frac_mod1(self) -> f64 {
        let (_, r) = self.reduce_nearest();
        let mut f = r.to_f64();
        if f < 0.0 {
            f += 1.0;
        }
        if f >= 1.0 {
            f = 0.0;
        }
        f
    }

    /// Distance to the nearest integer.
    pub fn norm_dist(self) -> f64 {
        let (_, r) = self.reduce_nearest();
        r.to_f64().abs()
    }

    /// exp(self). Argument reduction by ln 2, then a scaled Taylor series
    /// squared back up (QD-style).
    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        let k = (self.to_f64() / LN2.hi).round();
        let r = self.sub(LN2.mul_f64(k)).ldexp(-9);
        // Taylor sum of exp(r), |r| <= ln2 / 1024
        let mut sum = Dd::ONE.add(r);
        let mut term = r;
        let mut fact = 1.0f64;
        for j in 2..20 {
            fact *= j as f64;
            term = term.mul(r);
            let t = term.div_f64(fact);
            sum = sum.add(t);
            if t.hi.abs() < 1e-35 {
                break;
            }
        }
        for _ in 0..9 {
            sum = sum.mul(sum);
        }
        sum.ldexp(k as i32)
    }

    /// Natural log for positive values, via Newton iteration on exp.
    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        let mut x = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            // x <- x + self * exp(-x) - 1
            x = x.add(self.mul((-x).exp())).add_f64(-1.0);
        }
        x
    }

    /// self^p for positive self.
    pub fn powf(self, p: f64) -> Dd {
        self.ln().mul_f64(p).exp()
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        Dd::add(self, rhs)
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        Dd::sub(self, rhs)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        Dd::mul(self, rhs)
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // (hi, lo) references generated by scripts/make_refs.py
    const DD_EXP_1_25: (f64, f64) = (3.4903429574618414, -4.604261945372796e-17);
    const DD_LN_7_3: (f64, f64) = (1.9878743481543455, -7.33258575199512e-17);
    const DD_TWO_POW_2_3: (f64, f64) = (1.5874010519681994, 7.263514831134263e-17);
    const DD_H_POW102_AT_1000: (f64, f64) = (1148.1536214968828, 8.619095639527428e-14);

    fn rel_err(x: Dd, reference: (f64, f64)) -> f64 {
        let r = Dd::new(reference.0, reference.1);
        (x.sub(r).to_f64() / r.hi).abs()
    }

    #[test]
    fn add_mul_exact_small_cases() {
        let a = Dd::from_f64(0.1).add(Dd::from_f64(0.2));
        assert!((a.to_f64() - 0.3).abs() < 1e-16);
        // lo captures what f64 0.1 + 0.2 loses
        assert!(a.lo != 0.0);
        let b = Dd::from_i64(1 << 40).add_f64(1e-20);
        assert_eq!(b.hi, (1u64 << 40) as f64);
        assert_eq!(b.lo, 1e-20);
    }

    #[test]
    fn exp_matches_reference() {
        let e = Dd::from_f64(1.25).exp();
        assert!(rel_err(e, DD_EXP_1_25) < 1e-29);
    }

    #[test]
    fn ln_matches_reference() {
        let l = Dd::from_f64(7.3).ln();
        assert!(rel_err(l, DD_LN_7_3) < 1e-29);
    }

    #[test]
    fn powf_matches_reference() {
        let p = Dd::from_f64(2.0).powf(2.0 / 3.0);
        assert!(rel_err(p, DD_TWO_POW_2_3) < 1e-28);
        let h = Dd::from_f64(1000.0).powf(1.02);
        assert!(rel_err(h, DD_H_POW102_AT_1000) < 1e-28);
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[0.37, 1.0, 12.5, 300.0, 1e-3] {
            let d = Dd::from_f64(x);
            let back = d.ln().exp();
            assert!((back.sub(d).to_f64() / x).abs() < 1e-28, "x = {x}");
        }
    }

    #[test]
    fn floor_and_reduction_edges() {
        assert_eq!(Dd::new(4.0, -1e-25).floor(), 3.0);
        assert_eq!(Dd::new(4.0, 1e-25).floor(), 4.0);
        assert_eq!(Dd::new(4.0, -1e-25).floor_snapped(1e-18), 4.0);
        assert_eq!(Dd::new(-4.0, -1e-25).floor_snapped(1e-18), -4.0);
        assert_eq!(Dd::new(3.5, 0.0).floor(), 3.0);

        let (k, r) = Dd::new(7.5, 0.0).reduce_nearest();
        assert_eq!(k, 8.0); // half-open interval [-1/2, 1/2)
        assert_eq!(r.to_f64(), -0.5);

        let f = Dd::new(1e15, 0.25).frac_mod1();
        assert_eq!(f, 0.25);
        assert_eq!(Dd::new(-0.25, 0.0).frac_mod1(), 0.75);
        assert_eq!(Dd::new(2.75, 0.0).norm_dist(), 0.25);
    }

    #[test]
    fn div_recovers_product() {
        let a = Dd::from_f64(3.7).powf(1.3);
        let b = Dd::from_f64(0.9182736455463728);
        let q = a.mul(b).div(b);
        assert!((q.sub(a).to_f64() / a.hi).abs() < 1e-30);
    }
}
