//! Gowers uniformity norms, difference functions, the weighted triple sums
//! controlling the kernel, and the U²-inverse modulation search.
//!
//! ‖f‖_{U²}⁴ equals Σ_h |r_f(h)|² for the autocorrelation r_f, which by
//! Parseval is Σ_j |f̂_j|⁴/L on a zero-padded grid: one FFT instead of the
//! definitional quadruple sum. The U³ eighth power is the h₃-average of
//! U²-fourths of difference functions, an O(len²·log len) cascade; the
//! O(len⁴) definitional sums survive only as test oracles.

use std::cell::RefCell;

use num_complex::Complex64;
use rand::RngExt;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSeries;
use crate::phase::{e_unit, next_pow2, two_prod_dd, KahanComplex, KahanSum};
use crate::regvar::{InverseFunction, SigmaFunction};

/// Hard cap on U³ input length (the cascade is O(len²·log len)).
pub const U3_LEN_LIMIT: usize = 1 << 16;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(buf);
    });
}

/// A finitely supported f: Z → C with values on [offset, offset + len).
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSequence {
    offset: i64,
    values: Vec<Complex64>,
}

impl FiniteSequence {
    pub fn new(offset: i64, values: Vec<Complex64>) -> FiniteSequence {
        FiniteSequence { offset, values }
    }

    /// Indicator of the integer interval [offset, offset + len).
    pub fn indicator(offset: i64, len: usize) -> FiniteSequence {
        FiniteSequence {
            offset,
            values: vec![Complex64::new(1.0, 0.0); len],
        }
    }

    /// A single unit spike at `position`.
    pub fn spike(position: i64) -> FiniteSequence {
        FiniteSequence {
            offset: position,
            values: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// e(θx)·1_{[offset, offset+len)}(x), phases reduced per point.
    pub fn modulated(theta: f64, offset: i64, len: usize) -> FiniteSequence {
        let values = (0..len)
            .map(|j| {
                let x = offset + j as i64;
                let (_, r) = two_prod_dd(x as f64, theta).reduce_nearest();
                e_unit(r.to_f64())
            })
            .collect();
        FiniteSequence { offset, values }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// f(x), zero off the support.
    pub fn at(&self, x: i64) -> Complex64 {
        let rel = x - self.offset;
        if rel < 0 || rel as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[rel as usize]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_one_bounded(&self, tol: f64) -> bool {
        self.max_abs() <= 1.0 + tol
    }

    /// Pointwise multiplication by e(θx).
    pub fn modulate(&self, theta: f64) -> FiniteSequence {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let x = self.offset + j as i64;
                let (_, r) = two_prod_dd(x as f64, theta).reduce_nearest();
                v * e_unit(r.to_f64())
            })
            .collect();
        FiniteSequence {
            offset: self.offset,
            values,
        }
    }

    /// Δ_h f(x) = f(x)·conj(f(x+h)); support shrinks by |h|.
    pub fn difference(&self, h: i64) -> FiniteSequence {
        let lo = self.offset.max(self.offset - h);
        let hi = (self.offset + self.len() as i64).min(self.offset + self.len() as i64 - h);
        if lo >= hi {
            return FiniteSequence {
                offset: 0,
                values: Vec::new(),
            };
        }
        let values = (lo..hi)
            .map(|x| self.at(x) * self.at(x + h).conj())
            .collect();
        FiniteSequence { offset: lo, values }
    }

    /// Random ±1 entries.
    pub fn random_pm1<R: RngExt>(offset: i64, len: usize, rng: &mut R) -> FiniteSequence {
        let values = (0..len)
            .map(|_| {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(s, 0.0)
            })
            .collect();
        FiniteSequence { offset, values }
    }

    /// Random complex values in the closed unit disc.
    pub fn random_unit<R: RngExt>(offset: i64, len: usize, rng: &mut R) -> FiniteSequence {
        let values = (0..len)
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                let t = rng.random::<f64>();
                r * e_unit(t)
            })
            .collect();
        FiniteSequence { offset, values }
    }
}

/// μ_N(n) = (N − |n|)/N² on |n| < N: the normalized count of
/// representations n = h₁ − h₂ with h₁, h₂ in [N].
#[derive(Clone, Copy, Debug)]
pub struct TriangleWeight {
    pub n: u64,
}

impl TriangleWeight {
    pub fn eval(&self, h: i64) -> f64 {
        let n = self.n as i64;
        if h.abs() >= n {
            0.0
        } else {
            (n - h.abs()) as f64 / (n as f64 * n as f64)
        }
    }
}

/// ‖f‖_{U²}⁴ = Σ_h |Σ_x f(x) conj f(x+h)|², via one zero-padded FFT.
pub fn u2_fourth(f: &FiniteSequence) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    let l = next_pow2(2 * f.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    buf[..f.len()].copy_from_slice(f.values());
    fft_forward(&mut buf);
    let mut acc = KahanSum::new();
    for v in &buf {
        let p = v.norm_sqr();
        acc.add(p * p);
    }
    acc.value() / l as f64
}

/// ‖f‖_{U³}⁸ = Σ_{h₃} ‖Δ_{h₃}f‖_{U²}⁴.
pub fn u3_eighth(f: &FiniteSequence) -> Result<f64> {
    if f.len() > U3_LEN_LIMIT {
        return Err(Error::SizeLimit(format!(
            "U³ input length {} exceeds {}",
            f.len(),
            U3_LEN_LIMIT
        )));
    }
    if f.is_empty() {
        return Ok(0.0);
    }
    // Δ_{−h}f is a translate of conj(Δ_h f), so only h ≥ 0 is computed
    let positive: Vec<f64> = (1..f.len() as i64)
        .into_par_iter()
        .map(|h| u2_fourth(&f.difference(h)))
        .collect();
    let mut acc = KahanSum::new();
    acc.add(u2_fourth(&f.difference(0)));
    for v in positive {
        acc.add(2.0 * v);
    }
    Ok(acc.value())
}

/// Σ_{h₃} μ_N(h₃) ‖Δ_{h₃}f‖_{U²}⁴ without any support restriction; valid
/// as the discarded-restriction form whenever the support fits in a window
/// of length N+1.
fn mu_weighted_u2_sum(f: &FiniteSequence, n: u64) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    let mu = TriangleWeight { n };
    let h_max = (f.len() as i64 - 1).min(n as i64 - 1);
    let positive: Vec<f64> = (1..=h_max)
        .into_par_iter()
        .map(|h| mu.eval(h) * u2_fourth(&f.difference(h)))
        .collect();
    let mut acc = KahanSum::new();
    acc.add(mu.eval(0) * u2_fourth(&f.difference(0)));
    for v in positive {
        acc.add(2.0 * v);
    }
    acc.value()
}

/// The weighted triple sum of the small-gain estimate:
/// Σ_{h₃} μ_N(h₃) Σ_{h₁,h₂} Σ_x Δ_{h₁,h₂,h₃}f(x). Requires support inside
/// [1, N+1] so the [−N, N] restriction on h₁, h₂ is vacuous.
pub fn weighted_triple_sum(f: &FiniteSequence, n: u64) -> Result<f64> {
    if !f.is_empty() {
        let lo = f.offset;
        let hi = f.offset + f.len() as i64 - 1;
        if lo < 1 || hi > n as i64 + 1 {
            return Err(Error::Support(format!(
                "support [{lo}, {hi}] not inside [1, {}]",
                n + 1
            )));
        }
    }
    Ok(mu_weighted_u2_sum(f, n))
}

/// Σ_m Σ_n f0(m) f1(m−n) f2(m+n) K(n): the 3-AP bilinear form with kernel
/// weight, blocked direct loops parallel over n.
pub fn triple_form(
    f0: &FiniteSequence,
    f1: &FiniteSequence,
    f2: &FiniteSequence,
    kern: &FiniteSequence,
) -> Complex64 {
    if f0.is_empty() || f1.is_empty() || f2.is_empty() || kern.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let terms: Vec<Complex64> = (0..kern.len() as i64)
        .into_par_iter()
        .map(|j| {
            let n = kern.offset + j;
            let w = kern.values()[j as usize];
            if w == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let lo = f0
                .offset
                .max(f1.offset + n)
                .max(f2.offset - n);
            let hi = (f0.offset + f0.len() as i64)
                .min(f1.offset + f1.len() as i64 + n)
                .min(f2.offset + f2.len() as i64 - n);
            let mut acc = KahanComplex::new();
            for x in lo..hi {
                acc.add(f0.at(x) * f1.at(x - n) * f2.at(x + n));
            }
            w * acc.value()
        })
        .collect();
    let mut total = KahanComplex::new();
    for t in terms {
        total.add(t);
    }
    total.value()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct U3ControlReport {
    pub lhs_eighth: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// |Σ f0(x)f1(x−n)f2(x+n)f3(n)|⁸ against N¹³ Σ_{h₃} μ_N(h₃) ‖Δ_{h₃}f3‖_{U²}⁴.
pub fn u3control_check(
    f0: &FiniteSequence,
    f1: &FiniteSequence,
    f2: &FiniteSequence,
    f3: &FiniteSequence,
    n: u64,
    s: f64,
) -> Result<U3ControlReport> {
    let bound = (s * n as f64).ceil() as i64;
    for (name, f) in [("f0", f0), ("f1", f1), ("f2", f2), ("f3", f3)] {
        if f.is_empty() {
            continue;
        }
        let lo = f.offset;
        let hi = f.offset + f.len() as i64 - 1;
        if lo < -bound || hi > bound {
            return Err(Error::Support(format!(
                "{name} support [{lo}, {hi}] outside [-SN, SN] = [{}, {}]",
                -bound, bound
            )));
        }
    }
    if f3.len() as u64 > n + 1 {
        return Err(Error::Support(format!(
            "f3 window {} wider than N+1 = {}; the h₁,h₂ restriction would bite",
            f3.len(),
            n + 1
        )));
    }
    let lhs = triple_form(f0, f1, f2, f3).norm().powi(8);
    let rhs = (n as f64).powi(13) * mu_weighted_u2_sum(f3, n);
    Ok(U3ControlReport {
        lhs_eighth: lhs,
        rhs,
        ratio: if rhs == 0.0 { f64::INFINITY } else { lhs / rhs },
    })
}

/// Maximizer of |f̂(ξ)| = |Σ_x f(x) e(xξ)| over the circle: oversampled FFT
/// grid, then golden-section refinement around the best grid point. Ties
/// resolve to the smallest ξ.
pub fn modulation_max(f: &FiniteSequence, oversample: usize) -> (f64, f64) {
    assert!(oversample >= 4, "oversample must be at least 4");
    if f.is_empty() {
        return (0.0, 0.0);
    }
    let l = next_pow2(oversample * f.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for (j, v) in f.values().iter().enumerate() {
        buf[j] = v.conj();
    }
    fft_forward(&mut buf);
    let mut best_k = 0usize;
    let mut best_v = -1.0f64;
    for (k, v) in buf.iter().enumerate() {
        let m = v.norm();
        if m > best_v {
            best_v = m;
            best_k = k;
        }
    }
    // |Σ_x f(x) e(xξ)| is offset-invariant in modulus
    let eval = |xi: f64| -> f64 {
        let mut acc = KahanComplex::new();
        for (j, v) in f.values().iter().enumerate() {
            acc.add(v * e_unit(j as f64 * xi));
        }
        acc.value().norm()
    };
    let grid_xi = best_k as f64 / l as f64;
    let (mut a, mut b) = (grid_xi - 1.0 / l as f64, grid_xi + 1.0 / l as f64);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    while (b - a) > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d);
        }
    }
    let refined_xi = 0.5 * (a + b);
    let refined_v = eval(refined_xi);
    let (xi, value) = if refined_v > best_v {
        (refined_xi, refined_v)
    } else {
        (grid_xi, best_v)
    };
    (xi.rem_euclid(1.0), value)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmallGainReport {
    pub l: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Weighted triple sum of the dyadic kernel slice K_{N,l} against the
/// small-gain bound N²φ(N)^{κ−8} + Nφ(N)^{-8} 2^{-4l/3} σ(2^l)^{-2/3}
/// φ(2^l)^{(10−2κ)/3} M^{16/3}.
pub fn smallgain_check(
    inv: &InverseFunction,
    ks: &KernelSeries,
    l: u32,
    kappa: f64,
    sigma: &SigmaFunction,
) -> Result<SmallGainReport> {
    if !(0.0..=1.0).contains(&kappa) || kappa == 0.0 {
        return Err(Error::Domain(format!("kappa = {kappa} outside (0, 1]")));
    }
    let slice = ks.dyadic_slice(l)?;
    let f = FiniteSequence::new(slice.offset as i64, slice.k_values.clone());
    let n = ks.n();
    let lhs = weighted_triple_sum(&f, n)?;
    let two_l = (1u64 << l) as f64;
    let phi_n = ks.phi_n();
    let phi_2l = inv.phi(two_l.max(inv.y_min()))?;
    let m = ks.m_used() as f64;
    let rhs = (n as f64).powi(2) * phi_n.powf(kappa - 8.0)
        + n as f64
            * phi_n.powi(-8)
            * two_l.powf(-4.0 / 3.0)
            * sigma.eval(two_l).powf(-2.0 / 3.0)
            * phi_2l.powf((10.0 - 2.0 * kappa) / 3.0)
            * m.powf(16.0 / 3.0);
    Ok(SmallGainReport {
        l,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModulationPeak {
    pub h3: i64,
    pub xi_star: f64,
    pub value: f64,
}

/// U²/U³ values and per-h₃ modulation maxima for one sequence.
#[derive(Clone, Debug, Serialize)]
pub struct GowersProfile {
    pub u2_fourth: f64,
    pub u3_eighth: f64,
    pub per_h3: Vec<ModulationPeak>,
}

impl GowersProfile {
    pub fn compute(f: &FiniteSequence, oversample: usize) -> Result<GowersProfile> {
        let u2 = u2_fourth(f);
        let u3 = u3_eighth(f)?;
        let peaks: Vec<ModulationPeak> = (-(f.len() as i64 - 1)..f.len() as i64)
            .into_par_iter()
            .map(|h3| {
                let d = f.difference(h3);
                let (xi_star, value) = modulation_max(&d, oversample);
                ModulationPeak { h3, xi_star, value }
            })
            .collect();
        Ok(GowersProfile {
            u2_fourth: u2,
            u3_eighth: u3,
            per_h3: peaks,
        })
    }
}
