//! The truncated-series kernel K_N, its dyadic slices, the phase factors
//! ψ_m, and the parameter block (ε₀, σ₀, M, κ) tying truncation level to N.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::phase::{e_unit_dd, KahanSum};
use crate::regvar::{InverseFunction, MembershipTable, PhiTable};

/// Largest admissible exponent: ε₀ = (23−22c)/(40c) must stay positive.
pub const C_MAX: f64 = 23.0 / 22.0;

#[derive(Clone, Copy, Debug)]
pub struct ParamBlock {
    pub c: f64,
    pub eps0: f64,
    pub sigma0: f64,
    pub kappa: f64,
    /// set when σ₀ was overridden away from the derived value
    pub exploratory: bool,
}

/// Derive the parameter block for an exponent. The default σ₀ is tiny at
/// desk scale (M = ⌊N^σ₀⌋ is 1 or 2 below N ≈ 2³⁰), so an explicit σ₀
/// override is allowed for experiments that need the truncation stressed;
/// such blocks are flagged exploratory.
pub fn param_block(c: f64, sigma0_override: Option<f64>) -> Result<ParamBlock> {
    if !(1.0..C_MAX).contains(&c) {
        return Err(Error::Config(format!(
            "exponent c = {c} outside [1, 23/22); ε₀ would not be positive"
        )));
    }
    let eps0 = (23.0 - 22.0 * c) / (40.0 * c);
    let derived = 1.0 - 1.0 / c + eps0;
    let kappa = (9.0 * c - 6.0) / 5.0;
    debug_assert!(kappa > 0.0 && kappa <= 1.0);
    let (sigma0, exploratory) = match sigma0_override {
        Some(s) => {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::Config(format!("sigma0 override {s} outside (0, 1)")));
            }
            (s, (s - derived).abs() > 1e-15)
        }
        None => (derived, false),
    };
    Ok(ParamBlock {
        c,
        eps0,
        sigma0,
        kappa,
        exploratory,
    })
}

impl ParamBlock {
    /// M = ⌊N^σ₀⌋, snapped so that exact powers do not round down.
    pub fn m_of(&self, n: u64) -> u32 {
        let x = (n as f64).powf(self.sigma0);
        let r = x.round();
        let snapped = if (x - r).abs() < 1e-9 * x.max(1.0) { r } else { x.floor() };
        snapped as u32
    }

    /// The admissible σ₀ window (1 − 1/c, 3/c − 2) for the tail bound.
    pub fn admissible_window(&self) -> (f64, f64) {
        (1.0 - 1.0 / self.c, 3.0 / self.c - 2.0)
    }
}

/// ψ_m(n) = e(m(φ(n+1) − φ(n))) − 1, the difference taken in double-double.
pub fn psi(inv: &InverseFunction, m: i64, n: u64) -> Result<Complex64> {
    debug_assert!(m != 0 && n >= 1);
    let delta = inv.phi_dd((n + 1) as f64)?.sub(inv.phi_dd(n as f64)?);
    Ok(e_unit_dd(delta.mul_f64(m as f64)) - Complex64::new(1.0, 0.0))
}

/// K_N on [1, N]: K_N(n) = (1/|N_h∩[N]|) Σ_{0<|m|<=M} (e(mφ(n+1)) − e(mφ(n)))/(2πim).
///
/// The ±m pairs combine to (sin(2πmφ(n+1)) − sin(2πmφ(n)))/(πm), so values
/// are stored with an exactly zero imaginary part. Entries with n below
/// h(x0) (no φ) are zero; they contribute the O(φ(N)^{-1}) residual the
/// decomposition already carries.
#[derive(Clone, Debug)]
pub struct KernelSeries {
    n: u64,
    params: ParamBlock,
    values: Vec<Complex64>,
    /// ⌊φ(N)⌋, the unnormalized-kernel scale
    normalization: i64,
    /// |N_h ∩ [N]| by exact enumeration
    orbit_count: u64,
    m_used: u32,
    phi_n: f64,
}

pub fn build_kernel(inv: &InverseFunction, params: &ParamBlock, n: u64) -> Result<KernelSeries> {
    if n < 2 {
        return Err(Error::Domain(format!("kernel needs N >= 2, got {n}")));
    }
    let table = PhiTable::build(inv, n + 1)?;
    let count = MembershipTable::build(inv.source(), n).count_upto(n);
    build_kernel_with(&table, count, params, n)
}

/// Sweep-friendly variant reusing a shared φ table and orbit count. Unlike
/// [`build_kernel`] it tolerates N = 1, which lacunary grids always contain.
pub fn build_kernel_with(
    table: &PhiTable,
    orbit_count: u64,
    params: &ParamBlock,
    n: u64,
) -> Result<KernelSeries> {
    if n < 1 {
        return Err(Error::Domain("kernel needs N >= 1".into()));
    }
    if table.n_hi() < n + 1 {
        return Err(Error::Domain(format!(
            "phi table covers up to {}, kernel needs {}",
            table.n_hi(),
            n + 1
        )));
    }
    if orbit_count == 0 {
        return Err(Error::Domain("empty orbit in [1, N]".into()));
    }
    let m_used = params.m_of(n).max(1);
    let inv_count = 1.0 / orbit_count as f64;
    let values: Vec<Complex64> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let inner = match (table.phi(k), table.phi(k + 1)) {
                (Some(a), Some(b)) => pair_sum(a, b, m_used),
                _ => 0.0,
            };
            Complex64::new(inner * inv_count, 0.0)
        })
        .collect();
    let phi_n_dd = table.phi(n).expect("range checked");
    Ok(KernelSeries {
        n,
        params: *params,
        values,
        normalization: phi_n_dd.floor_snapped(crate::regvar::SNAP_EPS) as i64,
        orbit_count,
        m_used,
        phi_n: phi_n_dd.to_f64(),
    })
}

/// Σ_{m=1}^{M} (sin(2πm b) − sin(2πm a))/(πm), the conjugate-paired inner sum.
fn pair_sum(a: Dd, b: Dd, m_max: u32) -> f64 {
    let (_, fa) = a.reduce_nearest();
    let (_, fb) = b.reduce_nearest();
    let mut acc = KahanSum::new();
    for m in 1..=m_max {
        let sa = e_unit_dd(fa.mul_f64(m as f64)).im;
        let sb = e_unit_dd(fb.mul_f64(m as f64)).im;
        acc.add((sb - sa) / (std::f64::consts::PI * m as f64));
    }
    acc.value()
}

impl KernelSeries {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn params(&self) -> &ParamBlock {
        &self.params
    }

    pub fn m_used(&self) -> u32 {
        self.m_used
    }

    pub fn orbit_count(&self) -> u64 {
        self.orbit_count
    }

    /// ⌊φ(N)⌋.
    pub fn normalization(&self) -> i64 {
        self.normalization
    }

    pub fn phi_n(&self) -> f64 {
        self.phi_n
    }

    /// K_N(n); zero outside [1, N].
    pub fn value(&self, n: i64) -> Complex64 {
        if n < 1 || n > self.n as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(n - 1) as usize]
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// L_N(n) = ⌊φ(N)⌋·K_N(n).
    pub fn l_value(&self, n: i64) -> Complex64 {
        self.value(n) * self.normalization as f64
    }

    pub fn max_abs_l(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm() * self.normalization.unsigned_abs() as f64)
            .fold(0.0, f64::max)
    }

    /// Σ_n K_N(n), Kahan-compensated (telescopes in exact arithmetic).
    pub fn sum(&self) -> Complex64 {
        let mut re = KahanSum::new();
        for v in &self.values {
            re.add(v.re);
        }
        Complex64::new(re.value(), 0.0)
    }

    /// K_{N,l} and L_{N,l} restricted to [2^l, min(2^{l+1}, N+1)).
    pub fn dyadic_slice(&self, l: u32) -> Result<DyadicSlice> {
        let lo = 1u64 << l;
        if lo > self.n + 1 {
            return Err(Error::Domain(format!(
                "dyadic level {l} outside [0, log2(N+1)] for N = {}",
                self.n
            )));
        }
        let hi = (1u64 << (l + 1)).min(self.n + 1); // exclusive
        let k_values: Vec<Complex64> = (lo..hi).map(|n| self.value(n as i64)).collect();
        let scale = self.normalization as f64;
        let l_values: Vec<Complex64> = k_values.iter().map(|v| v * scale).collect();
        Ok(DyadicSlice {
            l,
            offset: lo,
            k_values,
            l_values,
        })
    }

    /// Number of dyadic levels: l ranges over [0, log2(N+1)].
    pub fn dyadic_levels(&self) -> u32 {
        ((self.n + 1) as f64).log2().floor() as u32
    }
}

/// One dyadic block of the kernel, in both normalizations.
#[derive(Clone, Debug)]
pub struct DyadicSlice {
    pub l: u32,
    /// support starts here (2^l)
    pub offset: u64,
    pub k_values: Vec<Complex64>,
    pub l_values: Vec<Complex64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regvar::{Family, RegVarFunction};

    // values from scripts/make_refs.py
    const PSI_POW15_M1_N1_RE: f64 = -1.8529648415170452;
    const PSI_POW15_M1_N1_IM: f64 = -0.5219683698614334;

    fn inv(c: f64) -> InverseFunction {
        InverseFunction::new(RegVarFunction::new(Family::PurePower, c, 1.0).unwrap())
    }

    #[test]
    fn param_block_paper_values() {
        let p = param_block(1.02, None).unwrap();
        assert!((p.eps0 - 0.56 / 40.8).abs() < 1e-15);
        assert!((p.sigma0 - (1.0 - 1.0 / 1.02 + 0.56 / 40.8)).abs() < 1e-15);
        assert!((p.sigma0 - 1.0 / 30.0).abs() < 1e-12);
        assert!((p.kappa - 0.636).abs() < 1e-12);
        assert_eq!(p.m_of(1_000_000), 1);
        assert!(!p.exploratory);

        assert!(param_block(23.0 / 22.0, None).is_err());
        assert!(param_block(0.99, None).is_err());
        let e = param_block(1.02, Some(0.2)).unwrap();
        assert!(e.exploratory);
        assert_eq!(e.m_of(4096), 5); // 4096^0.2 = 2^2.4 ≈ 5.27
        assert!(param_block(1.02, Some(1.5)).is_err());
        // the derived σ₀ always lies in the admissible window
        let (lo, hi) = p.admissible_window();
        assert!(p.sigma0 > lo && p.sigma0 < hi);
    }

    #[test]
    fn m_of_snaps_exact_powers() {
        let p = param_block(1.02, Some(0.5)).unwrap();
        assert_eq!(p.m_of(1 << 20), 1 << 10);
    }

    #[test]
    fn psi_reference_and_bounds() {
        let i = inv(1.5);
        let v = psi(&i, 1, 1).unwrap();
        assert!((v.re - PSI_POW15_M1_N1_RE).abs() < 1e-12);
        assert!((v.im - PSI_POW15_M1_N1_IM).abs() < 1e-12);
        for n in 1..200u64 {
            for m in [1i64, -3, 7] {
                let p = psi(&i, m, n).unwrap();
                assert!(p.norm() <= 2.0 + 1e-12);
                let delta = i.phi(n as f64 + 1.0).unwrap() - i.phi(n as f64).unwrap();
                assert!(
                    p.norm() <= 2.0 * std::f64::consts::PI * m.unsigned_abs() as f64 * delta
                        + 1e-9
                );
            }
        }
    }

    #[test]
    fn kernel_is_real_and_telescopes() {
        let i = inv(1.02);
        let p = param_block(1.02, Some(0.25)).unwrap();
        let ks = build_kernel(&i, &p, 1024).unwrap();
        assert!(ks.values().iter().all(|v| v.im == 0.0));

        // telescoped oracle: count·ΣK = Σ_m [sin(2πmφ(N+1)) − sin(2πmφ(1))]/(πm)
        let m_used = ks.m_used();
        let mut oracle = 0.0;
        let table = PhiTable::build(&i, 1025).unwrap();
        let f_a = table.phi(1).unwrap();
        let f_b = table.phi(1025).unwrap();
        for m in 1..=m_used {
            let sa = crate::phase::e_unit_dd(f_a.mul_f64(m as f64)).im;
            let sb = crate::phase::e_unit_dd(f_b.mul_f64(m as f64)).im;
            oracle += (sb - sa) / (std::f64::consts::PI * m as f64);
        }
        let total = ks.sum().re * ks.orbit_count() as f64;
        assert!((total - oracle).abs() < 1e-11, "{total} vs {oracle}");
    }

    #[test]
    fn count_crosschecks_floor_phi() {
        let i = inv(1.02);
        let p = param_block(1.02, None).unwrap();
        let ks = build_kernel(&i, &p, 4096).unwrap();
        assert!((ks.orbit_count() as i64 - ks.normalization()).abs() <= 1);
    }

    #[test]
    fn dyadic_slices_partition() {
        let i = inv(1.02);
        let p = param_block(1.02, Some(0.2)).unwrap();
        let n = 1000u64;
        let ks = build_kernel(&i, &p, n).unwrap();
        let mut rebuilt = vec![Complex64::new(0.0, 0.0); n as usize];
        let mut support = 0usize;
        for l in 0..=ks.dyadic_levels() {
            let s = ks.dyadic_slice(l).unwrap();
            support += s.k_values.len();
            for (j, v) in s.k_values.iter().enumerate() {
                rebuilt[(s.offset - 1) as usize + j] = *v;
            }
            for (kv, lv) in s.k_values.iter().zip(&s.l_values) {
                assert_eq!(lv, &(kv * ks.normalization() as f64));
            }
        }
        assert_eq!(support, n as usize);
        for (a, b) in rebuilt.iter().zip(ks.values()) {
            assert_eq!(a, b); // exact: disjoint indicator supports
        }
        let l0 = ks.dyadic_slice(0).unwrap();
        assert_eq!(l0.k_values.len(), 1);
        assert!(ks.dyadic_slice(12).is_err());
    }
}
