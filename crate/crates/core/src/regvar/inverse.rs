//! The compositional inverse φ of h, by safeguarded Newton iteration, and
//! a precomputed table of double-double φ values for sweep workloads.

use rayon::prelude::*;

use super::{HDerivs, RegVarFunction, SNAP_EPS};
use crate::dd::Dd;
use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// φ with h(φ(y)) = y, for y >= h(x0).
#[derive(Clone, Debug)]
pub struct InverseFunction {
    source: RegVarFunction,
    tol_rel: f64,
    gamma: f64,
    y_min: f64,
}

impl InverseFunction {
    pub fn new(source: RegVarFunction) -> InverseFunction {
        let y_min = source.eval(source.x0()).expect("h defined at x0");
        let gamma = 1.0 / source.c();
        InverseFunction {
            source,
            tol_rel: 1e-13,
            gamma,
            y_min,
        }
    }

    pub fn with_tolerance(mut self, tol_rel: f64) -> InverseFunction {
        self.tol_rel = tol_rel;
        self
    }

    pub fn source(&self) -> &RegVarFunction {
        &self.source
    }

    /// γ = 1/c, the growth exponent of φ.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Smallest invertible value h(x0).
    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn tol_rel(&self) -> f64 {
        self.tol_rel
    }

    fn check_domain(&self, y: f64) -> Result<()> {
        if y < self.y_min * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "y = {y} below h(x0) = {}",
                self.y_min
            )));
        }
        Ok(())
    }

    /// φ(y) in f64. Newton steps stay inside a maintained bracket; steps
    /// that would leave it fall back to bisection. Iterates to machine
    /// precision, then verifies the round-trip tolerance.
    pub fn phi(&self, y: f64) -> Result<f64> {
        self.check_domain(y)?;
        let y = y.max(self.y_min);
        let f = &self.source;
        let x0 = f.x0();

        let mut lo = x0;
        let mut hi = (y / f.big_c()).powf(self.gamma).max(x0);
        let mut guard = 0;
        while f.eval(hi)? < y {
            lo = hi;
            hi *= 2.0;
            guard += 1;
            if guard > 128 {
                return Err(Error::Convergence(format!(
                    "could not bracket phi({y}); pathological perturbation?"
                )));
            }
        }

        let mut x = 0.5 * (lo + hi);
        let mut best = x;
        let mut best_err = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let d = f.derivs(x)?;
            let err = d.h - y;
            if err.abs() < best_err {
                best_err = err.abs();
                best = x;
            }
            if err > 0.0 {
                hi = hi.min(x);
            } else {
                lo = lo.max(x);
            }
            let step = err / d.d1;
            let mut next = x - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - x).abs() <= f64::EPSILON * x.abs();
            x = next;
            if done {
                break;
            }
        }
        let final_err = (f.eval(best)? - y).abs();
        if final_err <= self.tol_rel * y.abs().max(1.0) {
            Ok(best)
        } else {
            Err(Error::Convergence(format!(
                "phi({y}) stalled with residual {final_err:e} (tol {:e})",
                self.tol_rel * y
            )))
        }
    }

    /// φ(y) in double-double: f64 solve plus Newton refinement against the
    /// double-double evaluation of h. Custom families fall back to f64.
    pub fn phi_dd(&self, y: f64) -> Result<Dd> {
        let x = self.phi(y)?;
        if !self.source.supports_dd() {
            return Ok(Dd::from_f64(x));
        }
        let mut xd = Dd::from_f64(x);
        for _ in 0..3 {
            let hx = self.source.eval_dd(xd)?;
            let err = hx.add_f64(-y);
            let slope = self.source.derivs(xd.hi)?.d1;
            xd = xd.sub(err.div_f64(slope));
        }
        Ok(xd)
    }

    /// φ', φ'' or φ''' at y, from the inverse-function differentiation
    /// formulas applied to the derivatives of h at φ(y).
    pub fn derivative(&self, y: f64, order: u8) -> Result<f64> {
        self.check_domain(y)?;
        let x = self.phi(y)?;
        let HDerivs { d1, d2, d3, .. } = self.source.derivs(x)?;
        match order {
            1 => Ok(1.0 / d1),
            2 => Ok(-d2 / d1.powi(3)),
            3 => Ok((3.0 * d2 * d2 - d1 * d3) / d1.powi(5)),
            _ => Err(Error::Domain(format!("derivative order {order} not in 1..=3"))),
        }
    }
}

/// Precomputed φ(n) in double-double for n in [n_lo, n_hi]. Immutable after
/// construction; entries are independent, so the build parallelizes with a
/// deterministic layout.
#[derive(Clone, Debug)]
pub struct PhiTable {
    n_lo: u64,
    values: Vec<Dd>,
}

impl PhiTable {
    pub fn build(inv: &InverseFunction, n_hi: u64) -> Result<PhiTable> {
        let n_lo = (inv.y_min().ceil().max(1.0)) as u64;
        if n_hi < n_lo {
            return Err(Error::Domain(format!(
                "table range empty: n_hi = {n_hi} < h(x0) = {}",
                inv.y_min()
            )));
        }
        let values: Vec<Dd> = (n_lo..=n_hi)
            .into_par_iter()
            .map(|n| inv.phi_dd(n as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhiTable { n_lo, values })
    }

    pub fn n_lo(&self) -> u64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> u64 {
        self.n_lo + self.values.len() as u64 - 1
    }

    pub fn phi(&self, n: u64) -> Option<Dd> {
        if n < self.n_lo || n > self.n_hi() {
            None
        } else {
            Some(self.values[(n - self.n_lo) as usize])
        }
    }

    /// φ(n+1) − φ(n), fully in double-double.
    pub fn delta(&self, n: u64) -> Option<Dd> {
        Some(self.phi(n + 1)?.sub(self.phi(n)?))
    }

    /// Second difference (φ(n+1)−φ(n)) − (φ(n+2)−φ(n+1)).
    pub fn second_diff(&self, n: u64) -> Option<Dd> {
        let a = self.phi(n)?;
        let b = self.phi(n + 1)?;
        let c = self.phi(n + 2)?;
        Some(b.mul_f64(2.0).sub(a).sub(c))
    }

    /// ⌊−φ(n)⌋ − ⌊−φ(n+1)⌋, the membership indicator formula.
    pub fn membership_value(&self, n: u64) -> Option<i64> {
        let a = (-self.phi(n)?).floor_snapped(SNAP_EPS);
        let b = (-self.phi(n + 1)?).floor_snapped(SNAP_EPS);
        Some(a as i64 - b as i64)
    }

    /// φ(n) mod 1 in [0, 1).
    pub fn frac(&self, n: u64) -> Option<f64> {
        Some(self.phi(n)?.frac_mod1())
    }

    /// Distance of φ(n) to the nearest integer.
    pub fn norm_dist(&self, n: u64) -> Option<f64> {
        Some(self.phi(n)?.norm_dist())
    }

    pub fn floor_phi(&self, n: u64) -> Option<i64> {
        Some(self.phi(n)?.floor_snapped(SNAP_EPS) as i64)
    }
}
