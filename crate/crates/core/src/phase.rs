//! Phase evaluation e(t) = exp(2πit) and compensated summation.
//!
//! `e_unit` reduces to the nearest quarter turn before calling sin/cos, so
//! t = 0, ±1/4, ±1/2 produce exactly 0 and ±1 components. Several identities
//! downstream (alternating sums cancelling to 0, resonant averages equal to
//! a fixed phase) hold exactly only because of this.

use crate::dd::Dd;
use num_complex::Complex64;

/// e(t) = exp(2πi t) with quadrant-exact reduction.
pub fn e_unit(t: f64) -> Complex64 {
    // reduce t to [-1/2, 1/2], then u = 2t to [-1, 1]
    let u = 2.0 * (t - t.round());
    let q = (2.0 * u).round(); // nearest quarter turn, in {-2,...,2}
    let r = u - 0.5 * q; // exact; r in [-1/4, 1/4]
    let (s, c) = (std::f64::consts::PI * r).sin_cos();
    match q as i32 {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        -1 => Complex64::new(s, -c),
        _ => Complex64::new(-c, -s),
    }
}

/// e(x) for a double-double phase: reduce mod 1 in extended precision first.
pub fn e_unit_dd(x: Dd) -> Complex64 {
    let (_, r) = x.reduce_nearest();
    e_unit(r.to_f64())
}

/// Exact product of two f64s as a double-double.
pub fn two_prod_dd(a: f64, b: f64) -> Dd {
    let (p, e) = crate::dd::two_prod(a, b);
    Dd::new(p, e)
}

/// Neumaier-compensated scalar sum with a fixed accumulation order.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> KahanSum {
        KahanSum::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Merge another compensated sum; order of merges must be fixed by the
    /// caller for bitwise reproducibility.
    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

/// Compensated complex sum (independent real and imaginary accumulators).
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn new() -> KahanComplex {
        KahanComplex::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn merge(&mut self, other: &KahanComplex) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }
}

/// Smallest power of two >= n.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(e_unit(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(e_unit(0.25), Complex64::new(0.0, 1.0));
        assert_eq!(e_unit(0.5), Complex64::new(-1.0, 0.0));
        assert_eq!(e_unit(-0.25), Complex64::new(0.0, -1.0));
        assert_eq!(e_unit(1.0), Complex64::new(1.0, 0.0));
        assert_eq!(e_unit(-1.5), Complex64::new(-1.0, 0.0));
        assert_eq!(e_unit(3.25), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn matches_naive_evaluation() {
        for k in 0..1000 {
            let t = (k as f64) * 0.00137 - 0.5;
            let z = e_unit(t);
            let w = Complex64::new(
                (2.0 * std::f64::consts::PI * t).cos(),
                (2.0 * std::f64::consts::PI * t).sin(),
            );
            assert!((z - w).norm() < 1e-14);
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn alternating_sum_cancels_exactly() {
        let mut acc = KahanComplex::new();
        for n in 1..=1000 {
            acc.add(e_unit(n as f64 * 0.5));
        }
        assert_eq!(acc.value(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn kahan_beats_naive_on_cancelling_series() {
        let mut k = KahanSum::new();
        let mut naive = 0.0f64;
        let up = 1.0f64 + 1e-12; // representable value actually summed
        for i in 0..100_000 {
            let x = if i % 2 == 0 { up } else { -1.0 };
            k.add(x);
            naive += x;
        }
        let exact = 50_000.0 * (up - 1.0);
        assert!((k.value() - exact).abs() <= (naive - exact).abs());
        assert!((k.value() - exact).abs() < 1e-12);
    }
}
