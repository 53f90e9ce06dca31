//! The builtin families of regularly varying functions and their closed
//! forms.
//!
//! Every builtin is h(x) = C·x^c·G(x) with G a product of logarithmic
//! factors; the canonical-form scale mismatch (G(x₀) ≠ 1) is absorbed into
//! the constant, which leaves the perturbation ϑ(t) = t·G'(t)/G(t)
//! unchanged.

use std::fmt;
use std::sync::Arc;

use super::jet::Jet;
use crate::dd::Dd;

/// User-pluggable perturbation for custom families: returns
/// [ϑ, ϑ', ϑ'', ϑ'''] at the given point.
#[derive(Clone)]
pub struct CustomTheta {
    pub theta: Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>,
    pub label: String,
}

impl fmt::Debug for CustomTheta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomTheta({})", self.label)
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    /// h = C x^c
    PurePower,
    /// h = C x^c (log x)^a
    PowerLog { a: f64 },
    /// h = C x^c exp(a ((log x)^b - 1)), b in (0,1)
    PowerExpLog { a: f64, b: f64 },
    /// h = C x^c log∘⋯∘log x (k iterations)
    PowerIterLog { k: u32 },
    /// h = C x^c exp(∫ ϑ/t dt) with user-supplied ϑ
    Custom(CustomTheta),
}

impl Family {
    /// Default domain start. Chosen so every log factor is >= 1 on the
    /// domain (iterated logs need iterated-exponential starts).
    pub fn default_x0(&self) -> f64 {
        match self {
            Family::PurePower => 1.0,
            Family::PowerLog { .. } => (2.0f64).exp(), // e^2
            Family::PowerExpLog { .. } => std::f64::consts::E,
            Family::PowerIterLog { k } => {
                let mut x = 1.0f64;
                for _ in 0..*k {
                    x = x.exp();
                }
                x
            }
            Family::Custom(_) => 1.0,
        }
    }

    /// Log-correction γ(x) with γ'(x) = ϑ(x)/x, so that
    /// h = C exp(c ln x + γ). `None` for custom families (quadrature path).
    pub fn gamma_jet(&self, x: f64) -> Option<Jet> {
        let lx = Jet::var(x).ln();
        match self {
            Family::PurePower => Some(Jet::cnst(0.0)),
            Family::PowerLog { a } => Some(lx.ln().scale(*a)),
            Family::PowerExpLog { a, b } => Some(lx.pow_const(*b).add_const(-1.0).scale(*a)),
            Family::PowerIterLog { k } => {
                let mut j = lx;
                for _ in 0..*k {
                    j = j.ln();
                }
                Some(j)
            }
            Family::Custom(_) => None,
        }
    }

    /// Same correction evaluated in double-double arithmetic.
    pub fn gamma_dd(&self, x: Dd) -> Option<Dd> {
        let lx = x.ln();
        match self {
            Family::PurePower => Some(Dd::ZERO),
            Family::PowerLog { a } => Some(lx.ln().mul_f64(*a)),
            Family::PowerExpLog { a, b } => {
                Some(lx.ln().mul_f64(*b).exp().add_f64(-1.0).mul_f64(*a))
            }
            Family::PowerIterLog { k } => {
                let mut v = lx;
                for _ in 0..*k {
                    v = v.ln();
                }
                Some(v)
            }
            Family::Custom(_) => None,
        }
    }

    /// ϑ and its first three derivatives.
    pub fn theta_jet(&self, x: f64) -> Jet {
        let lx = Jet::var(x).ln();
        match self {
            Family::PurePower => Jet::cnst(0.0),
            Family::PowerLog { a } => lx.recip().scale(*a),
            Family::PowerExpLog { a, b } => lx.pow_const(b - 1.0).scale(a * b),
            Family::PowerIterLog { k } => {
                // ϑ = 1 / (L_1 L_2 ⋯ L_k)
                let mut prod = lx;
                let mut lj = lx;
                for _ in 1..*k {
                    lj = lj.ln();
                    prod = prod.mul(lj);
                }
                prod.recip()
            }
            Family::Custom(t) => {
                let d = (t.theta)(x);
                Jet {
                    v: d[0],
                    d1: d[1],
                    d2: d[2],
                    d3: d[3],
                }
            }
        }
    }

    pub fn is_custom(&self) -> bool {
        matches!(self, Family::Custom(_))
    }

    /// Canonical id used in CLI specs and the constants table.
    pub fn id_string(&self, c: f64) -> String {
        match self {
            Family::PurePower => format!("power:{c}"),
            Family::PowerLog { a } => format!("powerlog:{c}:{a}"),
            Family::PowerExpLog { a, b } => format!("powerexplog:{c}:{a}:{b}"),
            Family::PowerIterLog { k } => format!("poweriterlog:{c}:{k}"),
            Family::Custom(t) => format!("custom:{c}:{}", t.label),
        }
    }
}
