//! The sawtooth Φ(x) = {x} − 1/2, its truncated Fourier series, and the
//! tail kernel min{1, 1/(M‖x‖)} with Fourier-coefficient bounds.
//!
//! The split Φ = series + tail is definitional, so it holds to rounding for
//! every truncation level; the interesting content is quantitative: the
//! tail is dominated by the kernel (up to a calibrated constant K_cal) and
//! the kernel's coefficients b_m obey min{log M/M, 1/|m|, M/m²} up to a
//! calibrated constant R_cal.

use crate::error::Result;
use crate::phase::KahanSum;
use crate::quad;

/// Fractional part in [0, 1).
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance to the nearest integer.
pub fn norm_dist(x: f64) -> f64 {
    let f = frac(x);
    f.min(1.0 - f)
}

/// Φ(x) = {x} − 1/2, in [−1/2, 1/2).
pub fn phi_sawtooth(x: f64) -> f64 {
    frac(x) - 0.5
}

/// Truncated Fourier series Σ_{0<|m|<=M} e(−mx)/(2πim). The ±m pairs
/// combine to −sin(2πmx)/(πm), so the value is exactly real, and the
/// quadrant-exact phase evaluation makes it exactly zero at half-integers.
pub fn truncated_series(m_trunc: u32, x: f64) -> f64 {
    let t = frac(x);
    let mut acc = KahanSum::new();
    for m in 1..=m_trunc {
        let s = crate::phase::e_unit(m as f64 * t).im;
        acc.add(-s / (std::f64::consts::PI * m as f64));
    }
    acc.value()
}

/// Tail g_M(x) = Φ(x) − truncated series.
pub fn tail_value(m_trunc: u32, x: f64) -> f64 {
    phi_sawtooth(x) - truncated_series(m_trunc, x)
}

/// Kernel min{1, 1/(M‖x‖)}; equals 1 at integers.
pub fn tail_kernel(m_trunc: u32, x: f64) -> f64 {
    debug_assert!(m_trunc >= 2, "tail kernel is stated for M >= 2");
    let d = norm_dist(x);
    if d == 0.0 {
        1.0
    } else {
        (1.0 / (m_trunc as f64 * d)).min(1.0)
    }
}

/// One Fourier coefficient of the tail kernel with its stated bound.
#[derive(Clone, Copy, Debug)]
pub struct TailCoeff {
    pub m: i64,
    /// real part of ∫₀¹ min{1, 1/(M‖x‖)} e(−mx) dx
    pub value: f64,
    /// imaginary residue of the quadrature (the kernel is even, so ~0)
    pub imag: f64,
    /// min{log M/M, 1/|m|, M/m²}
    pub bound: f64,
    pub ratio: f64,
}

/// A truncation level together with the lemma-facing operations.
#[derive(Clone, Copy, Debug)]
pub struct SawtoothExpansion {
    m_trunc: u32,
}

impl SawtoothExpansion {
    pub fn new(m_trunc: u32) -> Result<SawtoothExpansion> {
        if m_trunc < 2 {
            return Err(crate::error::Error::Domain(format!(
                "truncation level {m_trunc} < 2"
            )));
        }
        Ok(SawtoothExpansion { m_trunc })
    }

    pub fn truncation(&self) -> u32 {
        self.m_trunc
    }

    pub fn series(&self, x: f64) -> f64 {
        truncated_series(self.m_trunc, x)
    }

    pub fn tail(&self, x: f64) -> f64 {
        tail_value(self.m_trunc, x)
    }

    pub fn kernel(&self, x: f64) -> f64 {
        tail_kernel(self.m_trunc, x)
    }

    /// b_m for |m| <= m_max by piecewise adaptive quadrature (the kernel has
    /// kinks at ±1/M). Per-coefficient failures surface as errors in the
    /// returned entries.
    pub fn kernel_coeffs(&self, m_max: u32) -> Vec<Result<TailCoeff>> {
        (-(m_max as i64)..=m_max as i64)
            .map(|m| self.kernel_coeff(m))
            .collect()
    }

    pub fn kernel_coeff(&self, m: i64) -> Result<TailCoeff> {
        let mm = self.m_trunc as f64;
        let u = 1.0 / mm;
        let pts: Vec<f64> = if u < 0.5 {
            vec![0.0, u, 0.5, 1.0 - u, 1.0]
        } else {
            vec![0.0, 0.5, 1.0]
        };
        let k = |x: f64| tail_kernel(self.m_trunc, x);
        let tau = 2.0 * std::f64::consts::PI * m as f64;
        // force enough subdivision to resolve |m| oscillations per unit
        let depth = ((m.unsigned_abs().max(1) as f64).log2().ceil() as u32 + 3).clamp(5, 22);
        let re = quad::integrate_pieces_forced(&|x| k(x) * (tau * x).cos(), &pts, 1e-10, depth)?;
        let im = quad::integrate_pieces_forced(&|x| -k(x) * (tau * x).sin(), &pts, 1e-10, depth)?;
        let bound = if m == 0 {
            mm.ln() / mm
        } else {
            let am = m.unsigned_abs() as f64;
            (mm.ln() / mm).min(1.0 / am).min(mm / (am * am))
        };
        let value = re;
        Ok(TailCoeff {
            m,
            value,
            imag: im,
            bound,
            ratio: (value * value + im * im).sqrt() / bound,
        })
    }
}

/// Verification grid for sup-norm estimates: uniform points plus points
/// clustered within 1/M of the integers, where the kernel peaks.
pub fn sup_grid(m_trunc: u32, uniform: usize, clustered: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(uniform + 2 * clustered);
    for i in 0..uniform {
        g.push((i as f64 + 0.5) / uniform as f64);
    }
    let w = 1.0 / m_trunc as f64;
    for i in 0..clustered {
        let t = w * (i as f64 + 0.5) / clustered as f64;
        g.push(t);
        g.push(1.0 - t);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    // values from scripts/make_refs.py (mpmath quadrature, M = 8)
    const TAIL_COEFF_M8_B0: f64 = 0.5965735902799727;
    const TAIL_COEFF_M8_B1: f64 = 0.19715897671343385;
    const TAIL_COEFF_M8_B7: f64 = 0.003941075868494085;
    const TAIL_COEFF_M8_B50: f64 = -1.9363036586111456e-06;

    #[test]
    fn sawtooth_hand_values() {
        assert_eq!(phi_sawtooth(0.5), 0.0);
        assert_eq!(phi_sawtooth(0.25), -0.25);
        assert_eq!(phi_sawtooth(-0.25), 0.25);
        assert_eq!(phi_sawtooth(0.0), -0.5);
    }

    #[test]
    fn series_hand_values() {
        // M = 2, x = 1/4: the m = 2 term vanishes, leaving -1/π
        let v = truncated_series(2, 0.25);
        assert!((v - (-1.0 / std::f64::consts::PI)).abs() < 1e-15);
        assert_eq!(truncated_series(64, 0.0), 0.0);
        assert_eq!(truncated_series(64, 0.5), 0.0);
    }

    #[test]
    fn tail_hand_value() {
        // g_2(1/4) = -1/4 + 1/π ≈ 0.0683099
        let v = tail_value(2, 0.25);
        assert!((v - (-0.25 + 1.0 / std::f64::consts::PI)).abs() < 1e-6);
        // at the discontinuity the kernel bound 1 still covers Φ(0) = -1/2
        assert_eq!(tail_value(512, 0.0), -0.5);
        assert!(tail_value(512, 0.0).abs() <= tail_kernel(512, 0.0));
    }

    #[test]
    fn kernel_hand_values() {
        assert_eq!(tail_kernel(4, 0.5), 0.5);
        assert_eq!(tail_kernel(4, 0.05), 1.0);
        assert!((tail_kernel(10, 1.25) - 0.4).abs() < 1e-15);
        assert_eq!(tail_kernel(4, 0.0), 1.0);
    }

    #[test]
    fn split_is_exact_on_grid() {
        for &m in &[2u32, 8, 64, 512] {
            for i in 0..2000 {
                let x = i as f64 / 2000.0 * 3.0 - 1.0;
                let lhs = phi_sawtooth(x);
                let rhs = truncated_series(m, x) + tail_value(m, x);
                assert!((lhs - rhs).abs() <= 1e-14, "M = {m}, x = {x}");
            }
        }
    }

    #[test]
    fn periodicity_and_oddness() {
        for i in 1..500 {
            let x = i as f64 / 500.0;
            for &m in &[2u32, 64] {
                assert!((truncated_series(m, x + 1.0) - truncated_series(m, x)).abs() < 1e-14);
                assert!((tail_value(m, x + 1.0) - tail_value(m, x)).abs() < 1e-14);
                assert!((tail_kernel(m, x + 1.0) - tail_kernel(m, x)).abs() < 1e-14);
                if x != 0.5 {
                    assert!(
                        (truncated_series(m, -x) + truncated_series(m, x)).abs() < 1e-14,
                        "odd symmetry at x = {x}"
                    );
                }
            }
        }
    }

    #[test]
    fn coefficient_quadrature_matches_references() {
        let e = SawtoothExpansion::new(8).unwrap();
        for (m, want) in [
            (0i64, TAIL_COEFF_M8_B0),
            (1, TAIL_COEFF_M8_B1),
            (7, TAIL_COEFF_M8_B7),
            (50, TAIL_COEFF_M8_B50),
        ] {
            let c = e.kernel_coeff(m).unwrap();
            assert!((c.value - want).abs() < 1e-9, "b_{m}: {} vs {want}", c.value);
            assert!(c.imag.abs() < 1e-9);
        }
    }

    #[test]
    fn coefficient_closed_form_b0() {
        // b_0 = (2/M)(1 + log(M/2)) by direct integration of the kernel
        for &m in &[2u32, 8, 64] {
            let e = SawtoothExpansion::new(m).unwrap();
            let b0 = e.kernel_coeff(0).unwrap().value;
            let closed = 2.0 / m as f64 * (1.0 + (m as f64 / 2.0).ln());
            assert!((b0 - closed).abs() < 1e-9, "M = {m}");
        }
    }

    #[test]
    fn coefficient_symmetry() {
        let e = SawtoothExpansion::new(64).unwrap();
        for m in [1i64, 3, 17] {
            let p = e.kernel_coeff(m).unwrap();
            let q = e.kernel_coeff(-m).unwrap();
            assert!((p.value - q.value).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation_below_two_rejected() {
        assert!(SawtoothExpansion::new(1).is_err());
        assert!(SawtoothExpansion::new(2).is_ok());
    }
}
