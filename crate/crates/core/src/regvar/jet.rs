//! Forward-mode derivatives to third order.
//!
//! A `Jet` carries (f, f', f'', f''') at a point; composing jets through
//! ln/exp/powers yields exact derivatives of every builtin family without
//! hand-derived formulas.

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet {
    pub fn var(x: f64) -> Jet {
        Jet {
            v: x,
            d1: 1.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    pub fn cnst(k: f64) -> Jet {
        Jet {
            v: k,
            ..Jet::default()
        }
    }

    pub fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
        }
    }

    pub fn add_const(self, k: f64) -> Jet {
        Jet {
            v: self.v + k,
            ..self
        }
    }

    pub fn scale(self, k: f64) -> Jet {
        Jet {
            v: k * self.v,
            d1: k * self.d1,
            d2: k * self.d2,
            d3: k * self.d3,
        }
    }

    pub fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
            d3: self.d3 * o.v + 3.0 * self.d2 * o.d1 + 3.0 * self.d1 * o.d2 + self.v * o.d3,
        }
    }

    pub fn recip(self) -> Jet {
        let g0 = self.v;
        let (g1, g2, g3) = (self.d1, self.d2, self.d3);
        Jet {
            v: 1.0 / g0,
            d1: -g1 / (g0 * g0),
            d2: (2.0 * g1 * g1 - g0 * g2) / g0.powi(3),
            d3: (6.0 * g0 * g1 * g2 - g0 * g0 * g3 - 6.0 * g1.powi(3)) / g0.powi(4),
        }
    }

    pub fn ln(self) -> Jet {
        let g0 = self.v;
        let (g1, g2, g3) = (self.d1, self.d2, self.d3);
        Jet {
            v: g0.ln(),
            d1: g1 / g0,
            d2: (g2 * g0 - g1 * g1) / (g0 * g0),
            d3: (g3 * g0 * g0 - 3.0 * g0 * g1 * g2 + 2.0 * g1.powi(3)) / g0.powi(3),
        }
    }

    pub fn exp(self) -> Jet {
        let e = self.v.exp();
        let (g1, g2, g3) = (self.d1, self.d2, self.d3);
        Jet {
            v: e,
            d1: e * g1,
            d2: e * (g1 * g1 + g2),
            d3: e * (g1.powi(3) + 3.0 * g1 * g2 + g3),
        }
    }

    /// self^p for positive values, via exp(p ln self).
    pub fn pow_const(self, p: f64) -> Jet {
        self.ln().scale(p).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn power_rule() {
        // x^2.5 at x = 4: derivatives 2.5 x^1.5, 3.75 x^0.5, 1.875 x^-0.5
        let j = Jet::var(4.0).pow_const(2.5);
        assert!(close(j.v, 32.0, 1e-14));
        assert!(close(j.d1, 2.5 * 8.0, 1e-14));
        assert!(close(j.d2, 3.75 * 2.0, 1e-14));
        assert!(close(j.d3, 1.875 * 0.5, 1e-14));
    }

    #[test]
    fn log_of_product() {
        // d/dx of ln(x) + ln(x) = 2/x etc, via mul then ln
        let x = 3.0;
        let j = Jet::var(x).mul(Jet::var(x)).ln();
        assert!(close(j.v, 2.0 * x.ln(), 1e-14));
        assert!(close(j.d1, 2.0 / x, 1e-14));
        assert!(close(j.d2, -2.0 / (x * x), 1e-14));
        assert!(close(j.d3, 4.0 / (x * x * x), 1e-14));
    }

    #[test]
    fn recip_matches_pow() {
        let a = Jet::var(1.7).add_const(2.0).recip();
        let b = Jet::var(1.7).add_const(2.0).pow_const(-1.0);
        assert!(close(a.d3, b.d3, 1e-12));
    }

    #[test]
    fn third_derivative_against_finite_differences() {
        // f(x) = exp(x ln x) = x^x; compare d3 with a 5-point stencil
        let f = |x: f64| Jet::var(x).ln().mul(Jet::var(x)).exp();
        let x = 2.3;
        let h = 1e-2;
        let fd3 = (f(x + 2.0 * h).v - 2.0 * f(x + h).v + 2.0 * f(x - h).v - f(x - 2.0 * h).v)
            / (2.0 * h * h * h);
        assert!(close(f(x).d3, fd3, 1e-3));
    }
}
