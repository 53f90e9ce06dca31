//! Regularly varying functions h, their inverses φ, the orbit set
//! N_h = {⌊h(n)⌋}, and the Toeplitz weight machinery built from second
//! differences of φ.

mod family;
mod inverse;
mod jet;
mod membership;
mod toeplitz;

pub use family::{CustomTheta, Family};
pub use inverse::{InverseFunction, PhiTable};
pub use jet::Jet;
pub use membership::{
    calibrate_c_threshold, membership_indicator, orbit, MembershipTable, MembershipValue,
    OrbitMembership,
};
pub use toeplitz::{
    phiresults_ratio, toeplitz_check, toeplitz_weights, toeplitz_weights_from_table,
    SigmaFunction, ToeplitzCheckOptions, ToeplitzCheckReport, ToeplitzWeights, WeightRow,
};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::quad;

/// Values of h or φ within this distance of an integer are treated as that
/// integer when flooring. h(m) can be exactly integral (x^{3/2} at squares);
/// the root solvers land within ~1e-28 of such points and an unsnapped
/// floor would flip membership indicators.
pub const SNAP_EPS: f64 = 1e-18;

/// First three derivatives of h at a point, together with the value.
#[derive(Clone, Copy, Debug)]
pub struct HDerivs {
    pub h: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// A concrete regularly varying function
/// h(x) = C·x^c·exp(∫_{x0}^x ϑ(t)/t dt) on [x0, ∞), extended linearly
/// below x0 so orbit generation never faults.
#[derive(Clone, Debug)]
pub struct RegVarFunction {
    c: f64,
    big_c: f64,
    x0: f64,
    family: Family,
    /// value and slope at x0 for the linear extension
    h_x0: f64,
    dh_x0: f64,
    warnings: Vec<String>,
}

impl RegVarFunction {
    pub fn new(family: Family, c: f64, big_c: f64) -> Result<RegVarFunction> {
        let x0 = family.default_x0();
        RegVarFunction::with_x0(family, c, big_c, x0)
    }

    pub fn with_x0(family: Family, c: f64, big_c: f64, x0: f64) -> Result<RegVarFunction> {
        if !(1.0..2.0).contains(&c) {
            return Err(Error::InvalidFamily(format!(
                "exponent c = {c} outside [1, 2)"
            )));
        }
        if big_c <= 0.0 || !big_c.is_finite() {
            return Err(Error::InvalidFamily(format!("scale constant {big_c} <= 0")));
        }
        if x0 < 1.0 {
            return Err(Error::InvalidFamily(format!("domain start {x0} < 1")));
        }
        let mut f = RegVarFunction {
            c,
            big_c,
            x0,
            family,
            h_x0: 0.0,
            dh_x0: 0.0,
            warnings: Vec::new(),
        };
        let d0 = f.derivs(x0)?;
        f.h_x0 = d0.h;
        f.dh_x0 = d0.d1;
        f.validate()?;
        Ok(f)
    }

    /// Parse a family spec: "power:c", "powerlog:c:a", "powerexplog:c:a:b",
    /// "poweriterlog:c:k".
    pub fn parse(spec: &str) -> Result<RegVarFunction> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::Config(format!("unrecognized family spec \"{spec}\""));
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["power", c] => RegVarFunction::new(Family::PurePower, num(c)?, 1.0),
            ["powerlog", c, a] => {
                RegVarFunction::new(Family::PowerLog { a: num(a)? }, num(c)?, 1.0)
            }
            ["powerexplog", c, a, b] => RegVarFunction::new(
                Family::PowerExpLog {
                    a: num(a)?,
                    b: num(b)?,
                },
                num(c)?,
                1.0,
            ),
            ["poweriterlog", c, k] => {
                let k = k.parse::<u32>().map_err(|_| bad())?;
                RegVarFunction::new(Family::PowerIterLog { k }, num(c)?, 1.0)
            }
            _ => Err(bad()),
        }
    }

    /// Sampled class checks: h' > 0 and h'' > 0 on a log grid, ϑ → 0
    /// monotonically for builtins, and the extra c = 1 conditions.
    fn validate(&mut self) -> Result<()> {
        if let Family::PowerExpLog { b, .. } = self.family {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidFamily(format!("exponent b = {b} outside (0,1)")));
            }
        }
        if let Family::PowerIterLog { k } = self.family {
            if k == 0 {
                return Err(Error::InvalidFamily("iterated log needs k >= 1".into()));
            }
        }
        let grid: Vec<f64> = (0..=64)
            .map(|i| self.x0 * 10f64.powf(6.0 * i as f64 / 64.0))
            .collect();
        let mut prev_abs_theta = f64::INFINITY;
        let mut prev_theta = f64::INFINITY;
        for &x in &grid {
            let d = self.derivs(x)?;
            if !(d.d1 > 0.0) {
                return Err(Error::InvalidFamily(format!("h' = {} <= 0 at x = {x}", d.d1)));
            }
            // h'' has natural scale h'/x; below that it is rounding noise
            let convexity_floor = 1e-10 * d.d1 / x;
            if d.d2 < -convexity_floor {
                return Err(Error::InvalidFamily(format!("h'' = {} < 0 at x = {x}", d.d2)));
            }
            if d.d2 <= convexity_floor && self.warnings.is_empty() {
                self.warnings
                    .push(format!("h'' vanishes at x = {x}: degenerate linear stub"));
            }
            let th = self.theta(x);
            if !self.family.is_custom() {
                if th.abs() > prev_abs_theta + 1e-12 {
                    return Err(Error::InvalidFamily(format!(
                        "|theta| not decreasing near x = {x}"
                    )));
                }
                prev_abs_theta = th.abs();
            }
            if self.c == 1.0 && !matches!(self.family, Family::PurePower) {
                if th <= 0.0 || th > prev_theta + 1e-12 {
                    return Err(Error::InvalidFamily(format!(
                        "c = 1 requires theta positive decreasing; theta({x}) = {th}"
                    )));
                }
                prev_theta = th;
            }
        }
        // c = 1: x h(x)^{-1} -> 0 is checked on the grid tail, warn only
        if self.c == 1.0 {
            let a = grid[grid.len() - 2];
            let b = grid[grid.len() - 1];
            let ra = a / self.eval(a)?;
            let rb = b / self.eval(b)?;
            if rb >= ra {
                self.warnings
                    .push("x/h(x) not visibly decreasing on the sampled grid".into());
            }
        }
        Ok(())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn big_c(&self) -> f64 {
        self.big_c
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Canonical id, e.g. "power:1.5".
    pub fn id(&self) -> String {
        self.family.id_string(self.c)
    }

    pub fn supports_dd(&self) -> bool {
        !self.family.is_custom()
    }

    /// h(x) for x >= x0.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x < self.x0 {
            return Err(Error::Domain(format!(
                "x = {x} below domain start x0 = {}",
                self.x0
            )));
        }
        match self.family.gamma_jet(x) {
            // powf keeps pure powers exact at integral values (4^1.5 = 8)
            Some(g) => Ok(self.big_c * x.powf(self.c) * g.v.exp()),
            None => {
                let th = &self.family;
                let integral = match th {
                    Family::Custom(t) => {
                        let f = |u: f64| (t.theta)(u)[0] / u;
                        let tol = 1e-13 * (1.0 + (x / self.x0).ln().abs());
                        quad::integrate(&f, self.x0, x, tol)?
                    }
                    _ => unreachable!(),
                };
                Ok(self.big_c * x.powf(self.c) * integral.exp())
            }
        }
    }

    /// h extended linearly below x0; total on x >= 0.
    pub fn eval_extended(&self, x: f64) -> f64 {
        if x >= self.x0 {
            self.eval(x).unwrap_or(f64::NAN)
        } else {
            self.h_x0 + self.dh_x0 * (x - self.x0)
        }
    }

    /// h(x) in double-double precision (builtin families only).
    pub fn eval_dd(&self, x: Dd) -> Result<Dd> {
        if x.hi < self.x0 * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "x = {} below domain start x0 = {}",
                x.hi, self.x0
            )));
        }
        match self.family.gamma_dd(x) {
            Some(g) => Ok(x.ln().mul_f64(self.c).add(g).exp().mul_f64(self.big_c)),
            None => Ok(Dd::from_f64(self.eval(x.to_f64())?)),
        }
    }

    /// h, h', h'', h''' at x >= x0.
    pub fn derivs(&self, x: f64) -> Result<HDerivs> {
        if x < self.x0 {
            return Err(Error::Domain(format!(
                "x = {x} below domain start x0 = {}",
                self.x0
            )));
        }
        match self.family.gamma_jet(x) {
            Some(g) => {
                let lnh = Jet::var(x)
                    .ln()
                    .scale(self.c)
                    .add(g)
                    .add_const(self.big_c.ln());
                let h = lnh.exp();
                Ok(HDerivs {
                    h: h.v,
                    d1: h.d1,
                    d2: h.d2,
                    d3: h.d3,
                })
            }
            None => {
                // u = (c + ϑ)/x; h' = h u, h'' = h (u² + u'), h''' = h (u³ + 3uu' + u'')
                let h = self.eval(x)?;
                let th = self.family.theta_jet(x);
                let u = (self.c + th.v) / x;
                let du = th.d1 / x - (self.c + th.v) / (x * x);
                let ddu = th.d2 / x - 2.0 * th.d1 / (x * x) + 2.0 * (self.c + th.v) / (x * x * x);
                Ok(HDerivs {
                    h,
                    d1: h * u,
                    d2: h * (u * u + du),
                    d3: h * (u * u * u + 3.0 * u * du + ddu),
                })
            }
        }
    }

    /// Perturbation ϑ(x).
    pub fn theta(&self, x: f64) -> f64 {
        self.family.theta_jet(x).v
    }

    /// ϑ and its first three derivatives.
    pub fn theta_derivs(&self, x: f64) -> [f64; 4] {
        let j = self.family.theta_jet(x);
        [j.v, j.d1, j.d2, j.d3]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // values from scripts/make_refs.py (mpmath, 60 digits)
    const H_POW102_AT_1000: f64 = 1148.1536214968828;
    const H_ITERLOG2_AT_100: f64 = 167.4519161292472;
    const H_EXPLOG_AT_50: f64 = 88.1645714945707;

    fn pure(c: f64) -> RegVarFunction {
        RegVarFunction::new(Family::PurePower, c, 1.0).unwrap()
    }

    #[test]
    fn pure_power_closed_forms() {
        let f = pure(1.5);
        assert_eq!(f.eval(4.0).unwrap(), 8.0);
        let v = f.eval(1000.0).unwrap();
        assert!((v - 1000.0f64.powf(1.5)).abs() < 1e-9);
    }

    #[test]
    fn high_precision_oracle_power102() {
        let f = pure(1.02);
        let v = f.eval(1000.0).unwrap();
        assert!((v - H_POW102_AT_1000).abs() / H_POW102_AT_1000 < 1e-12);
        let dd = f.eval_dd(Dd::from_f64(1000.0)).unwrap();
        assert!((dd.to_f64() - H_POW102_AT_1000).abs() / H_POW102_AT_1000 < 1e-15);
    }

    #[test]
    fn powerlog_matches_x_log_x_at_e() {
        // x·log x evaluated at e is exactly e; x0 lowered to e for the check
        let f = RegVarFunction::with_x0(
            Family::PowerLog { a: 1.0 },
            1.0,
            1.0,
            std::f64::consts::E,
        )
        .unwrap();
        let v = f.eval(std::f64::consts::E).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn iterlog_and_explog_oracles() {
        let f = RegVarFunction::new(Family::PowerIterLog { k: 2 }, 1.02, 1.0).unwrap();
        let v = f.eval(100.0).unwrap();
        assert!((v - H_ITERLOG2_AT_100).abs() / H_ITERLOG2_AT_100 < 1e-13);

        let g = RegVarFunction::new(Family::PowerExpLog { a: 0.5, b: 0.5 }, 1.02, 1.0).unwrap();
        let w = g.eval(50.0).unwrap();
        assert!((w - H_EXPLOG_AT_50).abs() / H_EXPLOG_AT_50 < 1e-13);
    }

    #[test]
    fn domain_error_below_x0() {
        let f = RegVarFunction::new(Family::PowerLog { a: 1.0 }, 1.02, 1.0).unwrap();
        assert!(f.eval(2.0).is_err());
        assert!(f.eval_extended(2.0).is_finite());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = RegVarFunction::new(Family::PowerLog { a: 1.0 }, 1.02, 1.0).unwrap();
        let x = 50.0;
        let d = f.derivs(x).unwrap();
        // h large enough that the stencil is not cancellation-limited
        let h = 1e-3;
        let fd1 = (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
        let fd2 =
            (f.eval(x + h).unwrap() - 2.0 * d.h + f.eval(x - h).unwrap()) / (h * h);
        assert!((d.d1 - fd1).abs() / fd1 < 1e-8);
        assert!((d.d2 - fd2).abs() / fd2.abs() < 1e-4);
    }

    #[test]
    fn custom_family_quadrature_matches_builtin() {
        // custom ϑ(t) = 1/log t reproduces the powerlog family up to scale
        let theta = CustomTheta {
            theta: std::sync::Arc::new(|t: f64| {
                let j = Jet::var(t).ln().recip();
                [j.v, j.d1, j.d2, j.d3]
            }),
            label: "invlog".into(),
        };
        let x0 = (2.0f64).exp();
        let custom =
            RegVarFunction::with_x0(Family::Custom(theta), 1.02, 1.0, x0).unwrap();
        let builtin =
            RegVarFunction::with_x0(Family::PowerLog { a: 1.0 }, 1.02, 1.0, x0).unwrap();
        for &x in &[10.0, 100.0, 5000.0] {
            // builtin h = x^c ln x; custom h = x^c (ln x / ln x0): ratio ln x0 = 2
            let r = builtin.eval(x).unwrap() / custom.eval(x).unwrap();
            assert!((r - 2.0).abs() < 1e-10, "x = {x}, ratio = {r}");
        }
    }

    #[test]
    fn theta_decay_and_c1_conditions() {
        let f = RegVarFunction::new(Family::PowerLog { a: 1.0 }, 1.0, 1.0).unwrap();
        assert!(f.theta(1e4) > 0.0);
        assert!(f.theta(1e4) < f.theta(1e2));
        // negative a with c = 1 violates positivity
        assert!(RegVarFunction::new(Family::PowerLog { a: -1.0 }, 1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RegVarFunction::new(Family::PurePower, 2.0, 1.0).is_err());
        assert!(RegVarFunction::new(Family::PurePower, 0.9, 1.0).is_err());
        assert!(RegVarFunction::new(Family::PowerExpLog { a: 1.0, b: 1.5 }, 1.02, 1.0).is_err());
        assert!(RegVarFunction::parse("power:1.5").is_ok());
        assert!(RegVarFunction::parse("frobnicate:2").is_err());
    }

    #[test]
    fn identity_stub_allowed_with_warning() {
        let f = pure(1.0);
        assert!(!f.warnings().is_empty());
        assert_eq!(f.eval(7.0).unwrap(), 7.0);
    }
}
