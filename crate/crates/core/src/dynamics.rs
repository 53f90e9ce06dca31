//! Measure-preserving system simulators and the averaging operators along
//! the orbit set: the plain bilinear average A_N, the orbit-restricted B_N,
//! the main/error split M_N + E_N, and the truncation split E⁽¹⁾ + E⁽²⁾.
//!
//! Circle orbits accumulate in double-double and renormalize every step, so
//! drift stays far below the 1e-13-per-10⁶-steps budget. Observables are
//! trigonometric polynomials (or sample arrays on the integer shift): every
//! averaged quantity then has a closed-form or telescoping oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::kernel::{build_kernel_with, KernelSeries, ParamBlock};
use crate::phase::{e_unit, e_unit_dd, two_prod_dd, KahanComplex};
use crate::regvar::{InverseFunction, OrbitMembership};
use crate::sawtooth;

/// 1/φ_golden, the canonical irrational rotation number of the test battery.
pub const GOLDEN_FRAC: f64 = 0.6180339887498949;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DynamicalSystem {
    /// x ↦ x + α mod 1 on the circle, Lebesgue-preserving.
    CircleRotation { alpha: f64 },
    /// r ↦ r + 1 mod p, uniform-measure-preserving.
    CyclicShift { modulus: u64 },
    /// j ↦ j + 1 on Z; observables are finitely supported arrays.
    IntegerShift { window: i64 },
}

#[derive(Clone, Copy, Debug)]
pub enum State {
    Circle(Dd),
    Residue(u64),
    Integer(i64),
}

impl DynamicalSystem {
    /// "rotation:golden", "rotation:0.37", "cyclic:97", "shift:1024".
    pub fn parse(spec: &str) -> Result<DynamicalSystem> {
        let bad = || Error::Config(format!("unrecognized system spec \"{spec}\""));
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            ["rotation", "golden"] => Ok(DynamicalSystem::CircleRotation { alpha: GOLDEN_FRAC }),
            ["rotation", a] => {
                let alpha: f64 = a.parse().map_err(|_| bad())?;
                if !(0.0..1.0).contains(&alpha) {
                    return Err(Error::Config(format!("rotation number {alpha} outside [0,1)")));
                }
                Ok(DynamicalSystem::CircleRotation { alpha })
            }
            ["cyclic", p] => {
                let modulus: u64 = p.parse().map_err(|_| bad())?;
                if modulus == 0 {
                    return Err(bad());
                }
                Ok(DynamicalSystem::CyclicShift { modulus })
            }
            ["shift", w] => {
                let window: i64 = w.parse().map_err(|_| bad())?;
                Ok(DynamicalSystem::IntegerShift { window })
            }
            _ => Err(bad()),
        }
    }

    /// Starting state from a fraction t in [0, 1).
    pub fn initial(&self, t: f64) -> State {
        match self {
            DynamicalSystem::CircleRotation { .. } => State::Circle(Dd::from_f64(t - t.floor())),
            DynamicalSystem::CyclicShift { modulus } => {
                State::Residue(((t - t.floor()) * *modulus as f64).floor() as u64 % modulus)
            }
            DynamicalSystem::IntegerShift { window } => {
                State::Integer((t * *window as f64).floor() as i64)
            }
        }
    }

    pub fn step(&self, s: &State, forward: bool) -> State {
        match (self, s) {
            (DynamicalSystem::CircleRotation { alpha }, State::Circle(x)) => {
                let mut y = x.add_f64(if forward { *alpha } else { -*alpha });
                if y.hi >= 1.0 {
                    y = y.add_f64(-1.0);
                } else if y.hi < 0.0 {
                    y = y.add_f64(1.0);
                }
                State::Circle(y)
            }
            (DynamicalSystem::CyclicShift { modulus }, State::Residue(r)) => {
                State::Residue(if forward {
                    (r + 1) % modulus
                } else {
                    (r + modulus - 1) % modulus
                })
            }
            (DynamicalSystem::IntegerShift { .. }, State::Integer(j)) => {
                State::Integer(if forward { j + 1 } else { j - 1 })
            }
            _ => unreachable!("state kind does not match system kind"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Observable {
    Constant(Complex64),
    /// state ↦ e(k·x) on the circle, e(k·r/p) on residues.
    Character { k: i64 },
    /// Σ c_j e(j·x) with Σ|c_j| <= 1.
    TrigPoly { terms: Vec<(i64, Complex64)> },
    /// Sample array on the integer shift.
    Samples(crate::gowers::FiniteSequence),
}

impl Observable {
    pub fn one() -> Observable {
        Observable::Constant(Complex64::new(1.0, 0.0))
    }

    pub fn character(k: i64) -> Observable {
        Observable::Character { k }
    }

    pub fn trig_poly(terms: Vec<(i64, Complex64)>) -> Result<Observable> {
        let total: f64 = terms.iter().map(|(_, c)| c.norm()).sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "trig poly coefficient mass {total} exceeds 1 (not 1-bounded)"
            )));
        }
        Ok(Observable::TrigPoly { terms })
    }

    pub fn eval(&self, sys: &DynamicalSystem, s: &State) -> Complex64 {
        match (self, s) {
            (Observable::Constant(c), _) => *c,
            (Observable::Character { k }, State::Circle(x)) => e_unit_dd(x.mul_f64(*k as f64)),
            (Observable::TrigPoly { terms }, State::Circle(x)) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, c) in terms {
                    acc += c * e_unit_dd(x.mul_f64(*j as f64));
                }
                acc
            }
            (Observable::Character { k }, State::Residue(r)) =>

                match sys {
                    DynamicalSystem::CyclicShift { modulus } => {
                        let p = *modulus as i128;
                        let kr = (*k as i128).rem_euclid(p) * (*r as i128) % p;
                        e_unit(kr as f64 / p as f64)
                    }
                    _ => unreachable!(),
                },
            (Observable::TrigPoly { terms }, State::Residue(_)) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, c) in terms {
                    acc += c * Observable::Character { k: *j }.eval(sys, s);
                }
                acc
            }
            (Observable::Samples(seq), State::Integer(j)) => seq.at(*j),
            _ => unreachable!("observable kind does not match state kind"),
        }
    }

    fn compatible(&self, sys: &DynamicalSystem) -> bool {
        match (self, sys) {
            (Observable::Constant(_), _) => true,
            (Observable::Character { .. }, DynamicalSystem::CircleRotation { .. })
            | (Observable::Character { .. }, DynamicalSystem::CyclicShift { .. })
            | (Observable::TrigPoly { .. }, DynamicalSystem::CircleRotation { .. })
            | (Observable::TrigPoly { .. }, DynamicalSystem::CyclicShift { .. })
            | (Observable::Samples(_), DynamicalSystem::IntegerShift { .. }) => true,
            _ => false,
        }
    }
}

/// A pair of declared-1-bounded observables, validated against the system.
#[derive(Clone, Debug)]
pub struct ObservablePair {
    pub f: Observable,
    pub g: Observable,
}

impl ObservablePair {
    pub fn new(f: Observable, g: Observable, sys: &DynamicalSystem) -> Result<ObservablePair> {
        for (name, o) in [("f", &f), ("g", &g)] {
            if !o.compatible(sys) {
                return Err(Error::Config(format!(
                    "observable {name} incompatible with system {sys:?}"
                )));
            }
            // sampled 1-boundedness
            let mut max = 0.0f64;
            for i in 0..97 {
                let s = sys.initial(i as f64 / 97.0);
                max = max.max(o.eval(sys, &s).norm());
            }
            if max > 1.0 + 1e-12 {
                return Err(Error::Config(format!(
                    "observable {name} exceeds the 1-bound on sampled states ({max})"
                )));
            }
        }
        Ok(ObservablePair { f, g })
    }

    /// f(Tⁿx)·g(T⁻ⁿx). Character pairs combine into a single phase before
    /// the circle evaluation, so the resonant configuration (frequencies
    /// cancelling n) yields a bitwise-constant summand and the identity
    /// B_N = A_N holds exactly, not just to rounding.
    pub fn product(&self, sys: &DynamicalSystem, fwd: &State, bwd: &State) -> Complex64 {
        match (&self.f, &self.g, fwd, bwd) {
            (
                Observable::Character { k: kf },
                Observable::Character { k: kg },
                State::Circle(xf),
                State::Circle(xb),
            ) => e_unit_dd(xf.mul_f64(*kf as f64).add(xb.mul_f64(*kg as f64))),
            (
                Observable::Character { k: kf },
                Observable::Character { k: kg },
                State::Residue(rf),
                State::Residue(rb),
            ) => match sys {
                DynamicalSystem::CyclicShift { modulus } => {
                    let p = *modulus as i128;
                    let num = ((*kf as i128).rem_euclid(p) * (*rf as i128)
                        + (*kg as i128).rem_euclid(p) * (*rb as i128))
                        .rem_euclid(p);
                    e_unit(num as f64 / p as f64)
                }
                _ => unreachable!(),
            },
            _ => self.f.eval(sys, fwd) * self.g.eval(sys, bwd),
        }
    }

    /// f = g = e(·): the modulation-invariant configuration where
    /// f(Tⁿx)g(T⁻ⁿx) = e(2x) for every n.
    pub fn resonant(sys: &DynamicalSystem) -> Result<ObservablePair> {
        ObservablePair::new(Observable::character(1), Observable::character(1), sys)
    }

    /// f = e(·), g = e(−·): products e(2nα) average to a geometric sum.
    pub fn decaying(sys: &DynamicalSystem) -> Result<ObservablePair> {
        ObservablePair::new(Observable::character(1), Observable::character(-1), sys)
    }
}

/// Compensated mean that recognizes a bitwise-constant summand and returns
/// it exactly. Resonant pairs produce constant products; their averages
/// must not pick up spurious rounding from the division.
#[derive(Clone, Copy, Debug, Default)]
struct MeanAccumulator {
    acc: KahanComplex,
    first: Option<Complex64>,
    constant: bool,
    count: u64,
}

impl MeanAccumulator {
    fn new() -> MeanAccumulator {
        MeanAccumulator {
            constant: true,
            ..Default::default()
        }
    }

    #[inline]
    fn add(&mut self, z: Complex64) {
        match self.first {
            None => self.first = Some(z),
            Some(f) => {
                if z != f {
                    self.constant = false;
                }
            }
        }
        self.acc.add(z);
        self.count += 1;
    }

    /// Mean over `denom` terms (callers may renormalize by a different
    /// count than was added; constancy only short-circuits the plain case).
    fn mean_over(&self, denom: u64) -> Complex64 {
        if self.constant && self.count == denom {
            if let Some(f) = self.first {
                return f;
            }
        }
        self.acc.value() / denom as f64
    }
}

/// f(Tⁿx)·g(T⁻ⁿx) for n = 1..=n_max, one forward and one backward orbit.
pub fn bilinear_products(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    n_max: u64,
) -> Vec<Complex64> {
    let mut fwd = *start;
    let mut bwd = *start;
    let mut out = Vec::with_capacity(n_max as usize);
    for _ in 0..n_max {
        fwd = sys.step(&fwd, true);
        bwd = sys.step(&bwd, false);
        out.push(pair.product(sys, &fwd, &bwd));
    }
    out
}

/// A_N(f,g)(x) = (1/N) Σ_{n<=N} f(Tⁿx)g(T⁻ⁿx).
pub fn orbit_average_a(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    n: u64,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Domain("average needs N >= 1".into()));
    }
    let mut fwd = *start;
    let mut bwd = *start;
    let mut acc = MeanAccumulator::new();
    for _ in 0..n {
        fwd = sys.step(&fwd, true);
        bwd = sys.step(&bwd, false);
        acc.add(pair.product(sys, &fwd, &bwd));
    }
    Ok(acc.mean_over(n))
}

/// B_N: the same average restricted to the orbit set and renormalized by
/// the exact count |N_h ∩ [N]|.
pub fn orbit_average_b(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    membership: &OrbitMembership,
    n: u64,
) -> Result<Complex64> {
    let count = membership.count_upto(n);
    if count == 0 {
        return Err(Error::Domain(format!("empty orbit: N_h ∩ [1, {n}] = ∅")));
    }
    let mut fwd = *start;
    let mut bwd = *start;
    let mut acc = MeanAccumulator::new();
    for k in 1..=n {
        fwd = sys.step(&fwd, true);
        bwd = sys.step(&bwd, false);
        if membership.indicator(k) == 1 {
            acc.add(pair.product(sys, &fwd, &bwd));
        }
    }
    Ok(acc.mean_over(count))
}

/// B_N, M_N, E_N and the residual |B − M − E| (which the decomposition
/// bounds by O(φ(N)^{-1})).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MainErrorSplit {
    pub b: Complex64,
    pub m: Complex64,
    pub e: Complex64,
    pub residual: f64,
}

pub fn orbit_average_m_e(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    membership: &OrbitMembership,
    n: u64,
) -> Result<MainErrorSplit> {
    let table = membership.phi_table();
    if table.n_hi() < n + 1 {
        return Err(Error::Domain(format!(
            "membership table covers up to {}, need {}",
            table.n_hi(),
            n + 1
        )));
    }
    let count = membership.count_upto(n);
    if count == 0 {
        return Err(Error::Domain(format!("empty orbit: N_h ∩ [1, {n}] = ∅")));
    }
    let mut fwd = *start;
    let mut bwd = *start;
    let mut acc_b = KahanComplex::new();
    let mut acc_m = KahanComplex::new();
    let mut acc_e = KahanComplex::new();
    for k in 1..=n {
        fwd = sys.step(&fwd, true);
        bwd = sys.step(&bwd, false);
        let prod = pair.product(sys, &fwd, &bwd);
        if membership.indicator(k) == 1 {
            acc_b.add(prod);
        }
        if let (Some(delta), Some(pk), Some(pk1)) =
            (table.delta(k), table.phi(k), table.phi(k + 1))
        {
            acc_m.add(prod * delta.to_f64());
            let w = sawtooth::phi_sawtooth((-pk1).frac_mod1()) - sawtooth::phi_sawtooth((-pk).frac_mod1());
            acc_e.add(prod * w);
        }
    }
    let scale = 1.0 / count as f64;
    let b = acc_b.value() * scale;
    let m = acc_m.value() * scale;
    let e = acc_e.value() * scale;
    Ok(MainErrorSplit {
        b,
        m,
        e,
        residual: (b - m - e).norm(),
    })
}

/// One run of all six averages along a time grid; trajectories reuse a
/// single forward pass of orbit products, while the E⁽¹⁾/E⁽²⁾ weights are
/// re-evaluated per time because the truncation level M depends on N.
#[derive(Clone, Debug, Serialize)]
pub struct AverageTrajectory {
    pub times: Vec<u64>,
    pub a_vals: Vec<Complex64>,
    pub b_vals: Vec<Complex64>,
    pub m_vals: Vec<Complex64>,
    pub e_vals: Vec<Complex64>,
    pub e1_vals: Vec<Complex64>,
    pub e2_vals: Vec<Complex64>,
    pub lambda: Option<f64>,
}

impl AverageTrajectory {
    /// CSV rows: k, N, re/im of each average, |B − A|.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "k,N,a_re,a_im,b_re,b_im,m_re,m_im,e_re,e_im,e1_re,e1_im,e2_re,e2_im,b_minus_a\n",
        );
        for (i, t) in self.times.iter().enumerate() {
            let row = [
                self.a_vals[i],
                self.b_vals[i],
                self.m_vals[i],
                self.e_vals[i],
                self.e1_vals[i],
                self.e2_vals[i],
            ];
            s.push_str(&format!("{i},{t}"));
            for v in row {
                s.push_str(&format!(",{},{}", v.re, v.im));
            }
            s.push_str(&format!(",{}\n", (self.b_vals[i] - self.a_vals[i]).norm()));
        }
        s
    }
}

pub fn trajectory(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    inv: &InverseFunction,
    params: &ParamBlock,
    threshold: u64,
    times: &[u64],
) -> Result<AverageTrajectory> {
    let n_max = *times.last().ok_or_else(|| Error::Config("empty time grid".into()))?;
    let membership = OrbitMembership::build(inv, threshold, n_max)?;
    trajectory_with(sys, pair, start, params, &membership, times)
}

/// Trajectory over a shared membership/φ table (batteries sweep many
/// observable pairs over the same h).
pub fn trajectory_with(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    params: &ParamBlock,
    membership: &OrbitMembership,
    times: &[u64],
) -> Result<AverageTrajectory> {
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("times must be nonempty and strictly increasing".into()));
    }
    let n_max = *times.last().unwrap();
    if membership.n_max() < n_max {
        return Err(Error::Config(format!(
            "membership covers up to {}, need {n_max}",
            membership.n_max()
        )));
    }
    let table = membership.phi_table();
    let prods = bilinear_products(sys, pair, start, n_max);

    let mut a_vals = Vec::with_capacity(times.len());
    let mut b_vals = Vec::with_capacity(times.len());
    let mut m_vals = Vec::with_capacity(times.len());
    let mut e_vals = Vec::with_capacity(times.len());

    let mut acc_a = MeanAccumulator::new();
    let mut acc_b = MeanAccumulator::new();
    let mut acc_m = KahanComplex::new();
    let mut acc_e = KahanComplex::new();
    let mut next = 0usize;
    for k in 1..=n_max {
        let prod = prods[(k - 1) as usize];
        acc_a.add(prod);
        if membership.indicator(k) == 1 {
            acc_b.add(prod);
        }
        if let (Some(delta), Some(pk), Some(pk1)) =
            (table.delta(k), table.phi(k), table.phi(k + 1))
        {
            acc_m.add(prod * delta.to_f64());
            let w = sawtooth::phi_sawtooth((-pk1).frac_mod1())
                - sawtooth::phi_sawtooth((-pk).frac_mod1());
            acc_e.add(prod * w);
        }
        while next < times.len() && times[next] == k {
            let count = membership.count_upto(k);
            if count == 0 {
                return Err(Error::Domain(format!("empty orbit: N_h ∩ [1, {k}] = ∅")));
            }
            let scale = 1.0 / count as f64;
            a_vals.push(acc_a.mean_over(k));
            b_vals.push(acc_b.mean_over(count));
            m_vals.push(acc_m.value() * scale);
            e_vals.push(acc_e.value() * scale);
            next += 1;
        }
    }

    // E⁽¹⁾/E⁽²⁾ per checkpoint: M = M(N) changes with N, so no prefix reuse
    let mut e1_vals = Vec::with_capacity(times.len());
    let mut e2_vals = Vec::with_capacity(times.len());
    for &t in times {
        let count = membership.count_upto(t);
        let ks = build_kernel_with(table, count, params, t)?;
        let m_trunc = ks.m_used();
        let mut acc1 = KahanComplex::new();
        let mut acc2 = KahanComplex::new();
        for k in 1..=t {
            let prod = prods[(k - 1) as usize];
            acc1.add(prod * ks.value(k as i64));
            if let (Some(pk), Some(pk1)) = (table.phi(k), table.phi(k + 1)) {
                let w2 = tail_at(m_trunc, pk1) - tail_at(m_trunc, pk);
                acc2.add(prod * w2);
            }
        }
        e1_vals.push(acc1.value());
        e2_vals.push(acc2.value() / count as f64);
    }

    Ok(AverageTrajectory {
        times: times.to_vec(),
        a_vals,
        b_vals,
        m_vals,
        e_vals,
        e1_vals,
        e2_vals,
        lambda: None,
    })
}

/// g_M(−φ) from the double-double φ, with the fractional part reduced
/// before the series is evaluated.
fn tail_at(m_trunc: u32, phi: Dd) -> f64 {
    let x = (-phi).frac_mod1();
    sawtooth::tail_value(m_trunc, x)
}

/// The six averages at lacunary times ⌊λ^k⌋, k <= k_max (deduplicated).
pub fn lacunary_trajectory(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    inv: &InverseFunction,
    params: &ParamBlock,
    threshold: u64,
    lambda: f64,
    k_max: u32,
) -> Result<AverageTrajectory> {
    if !(lambda > 1.0 && lambda <= 2.0) {
        return Err(Error::Config(format!("lambda = {lambda} outside (1, 2]")));
    }
    let mut times = Vec::new();
    for k in 0..=k_max {
        let t = (lambda.powi(k as i32)).floor() as u64;
        if t >= 1 && times.last() != Some(&t) {
            times.push(t);
        }
    }
    let mut traj = trajectory(sys, pair, start, inv, params, threshold, &times)?;
    traj.lambda = Some(lambda);
    Ok(traj)
}

/// E⁽¹⁾ and E⁽²⁾ at a single time.
pub fn orbit_average_e1_e2(
    sys: &DynamicalSystem,
    pair: &ObservablePair,
    start: &State,
    inv: &InverseFunction,
    params: &ParamBlock,
    threshold: u64,
    n: u64,
) -> Result<(Complex64, Complex64)> {
    let traj = trajectory(sys, pair, start, inv, params, threshold, &[n])?;
    Ok((traj.e1_vals[0], traj.e2_vals[0]))
}

/// The Calderón-transferred bilinear form on the integer shift:
/// (1/N)|Σ_m Σ_n l(m)1_{[N]}(m) g(m−n) f(m+n) K_N(n)|. Its decay in N is
/// what gives the L¹ bound on E⁽¹⁾.
pub fn transference_form(
    l_arr: &crate::gowers::FiniteSequence,
    f_arr: &crate::gowers::FiniteSequence,
    g_arr: &crate::gowers::FiniteSequence,
    ks: &KernelSeries,
) -> Result<f64> {
    let n = ks.n();
    let bound = 2 * n as i64;
    for (name, f) in [("l", l_arr), ("f", f_arr), ("g", g_arr)] {
        if f.is_empty() {
            continue;
        }
        if !f.is_one_bounded(1e-12) {
            return Err(Error::Support(format!("array {name} is not 1-bounded")));
        }
        let lo = f.offset();
        let hi = f.offset() + f.len() as i64 - 1;
        if lo < -bound || hi > bound {
            return Err(Error::Support(format!(
                "array {name} support [{lo}, {hi}] outside [-2N, 2N]"
            )));
        }
    }
    // mask l to [1, N]
    let masked: Vec<Complex64> = (1..=n as i64).map(|m| l_arr.at(m)).collect();
    let l_masked = crate::gowers::FiniteSequence::new(1, masked);
    let kern = crate::gowers::FiniteSequence::new(1, ks.values().to_vec());
    let v = crate::gowers::triple_form(&l_masked, g_arr, f_arr, &kern);
    Ok(v.norm() / n as f64)
}

/// Multiply n·ξ with exact reduction; shared by tests and batteries.
pub fn phase_times(n: i64, xi: f64) -> Complex64 {
    let (_, r) = two_prod_dd(n as f64, xi).reduce_nearest();
    e_unit(r.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::param_block;
    use crate::regvar::{Family, RegVarFunction};

    fn rotation() -> DynamicalSystem {
        DynamicalSystem::CircleRotation { alpha: GOLDEN_FRAC }
    }

    fn inv(c: f64) -> InverseFunction {
        InverseFunction::new(RegVarFunction::new(Family::PurePower, c, 1.0).unwrap())
    }

    /// (1/N) Σ_{n<=N} e(nβ) in closed form.
    fn geometric_average(beta: f64, n: u64) -> Complex64 {
        let w = e_unit(beta);
        let num = e_unit(beta * n as f64) - Complex64::new(1.0, 0.0);
        let den = w - Complex64::new(1.0, 0.0);
        if den.norm() < 1e-15 {
            return Complex64::new(1.0, 0.0);
        }
        w * num / den / n as f64
    }

    #[test]
    fn constant_pair_averages_to_one() {
        let sys = rotation();
        let pair =
            ObservablePair::new(Observable::one(), Observable::one(), &sys).unwrap();
        let x = sys.initial(0.3);
        assert_eq!(
            orbit_average_a(&sys, &pair, &x, 1000).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        let i = inv(1.5);
        let om = OrbitMembership::build(&i, 1, 1000).unwrap();
        assert_eq!(
            orbit_average_b(&sys, &pair, &x, &om, 1000).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn resonant_pair_is_exactly_constant() {
        let sys = rotation();
        let pair = ObservablePair::resonant(&sys).unwrap();
        let x = sys.initial(0.3);
        let expect = e_unit(0.6); // e(2x) at x = 0.3
        for n in [1u64, 7, 500] {
            let a = orbit_average_a(&sys, &pair, &x, n).unwrap();
            assert!((a - expect).norm() < 1e-13, "n = {n}");
        }
        let i = inv(1.5);
        let om = OrbitMembership::build(&i, 1, 500).unwrap();
        let b = orbit_average_b(&sys, &pair, &x, &om, 500).unwrap();
        assert!((b - expect).norm() < 1e-13);
        // |B − A| vanishes identically for the resonant configuration
        let a = orbit_average_a(&sys, &pair, &x, 500).unwrap();
        assert!((b - a).norm() < 1e-13);
    }

    #[test]
    fn decaying_pair_matches_geometric_oracle() {
        let sys = rotation();
        let pair = ObservablePair::decaying(&sys).unwrap();
        let x = sys.initial(0.0);
        for n in [10u64, 1000, 30_000] {
            let a = orbit_average_a(&sys, &pair, &x, n).unwrap();
            let oracle = geometric_average(2.0 * GOLDEN_FRAC, n);
            assert!((a - oracle).norm() < 1e-11, "n = {n}: {a} vs {oracle}");
            // |A_N| <= 1/(2N‖2α‖)
            let dist = sawtooth::norm_dist(2.0 * GOLDEN_FRAC);
            assert!(a.norm() <= 1.0 / (2.0 * n as f64 * dist) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn circle_orbit_drift_is_negligible() {
        let sys = rotation();
        let mut s = sys.initial(0.0);
        for _ in 0..1_000_000 {
            s = sys.step(&s, true);
        }
        if let State::Circle(x) = s {
            // exact value of 10⁶·α mod 1 via double-double product
            let (_, want) = two_prod_dd(1_000_000.0, GOLDEN_FRAC).reduce_nearest();
            let diff = (x.to_f64() - want.to_f64().rem_euclid(1.0)).abs();
            let diff = diff.min((1.0 - diff).abs());
            assert!(diff < 1e-13, "drift {diff}");
        } else {
            unreachable!();
        }
    }

    #[test]
    fn cyclic_shift_state_average_closed_form() {
        let p = 23u64;
        let sys = DynamicalSystem::CyclicShift { modulus: p };
        let n = 100u64;
        // f = e(3·/p), g = e(-3·/p): sum over all starting residues of A_N
        let pair = ObservablePair::new(
            Observable::character(3),
            Observable::character(-3),
            &sys,
        )
        .unwrap();
        let mut total = Complex64::new(0.0, 0.0);
        for r in 0..p {
            let s = State::Residue(r);
            total += orbit_average_a(&sys, &pair, &s, n).unwrap();
        }
        total /= p as f64;
        // (1/p)Σ_r e((k+k')r/p) vanishes unless k+k' ≡ 0; here k+k' = 0, so
        // the state average equals (1/N)Σ_n e((k−k')n/p) = (1/N)Σ e(6n/23)
        let oracle = geometric_average(6.0 / 23.0, n);
        assert!((total - oracle).norm() < 1e-12);
    }

    #[test]
    fn main_error_split_residual_small() {
        let sys = rotation();
        let pair = ObservablePair::decaying(&sys).unwrap();
        let x = sys.initial(GOLDEN_FRAC);
        let i = inv(1.5);
        let om = OrbitMembership::build(&i, 1, 20_000).unwrap();
        let split = orbit_average_m_e(&sys, &pair, &x, &om, 20_000).unwrap();
        // residual is O(1/φ(N)) = O(1/⌊20000^{2/3}⌋)
        let phi_n = 20_000f64.powf(2.0 / 3.0);
        assert!(split.residual <= 4.0 / phi_n, "residual {}", split.residual);
    }

    #[test]
    fn constant_pair_m_e_telescope() {
        let sys = rotation();
        let pair =
            ObservablePair::new(Observable::one(), Observable::one(), &sys).unwrap();
        let x = sys.initial(0.0);
        let i = inv(1.5);
        let n = 5_000u64;
        let om = OrbitMembership::build(&i, 1, n).unwrap();
        let split = orbit_average_m_e(&sys, &pair, &x, &om, n).unwrap();
        let table = om.phi_table();
        let count = om.count_upto(n) as f64;
        // M telescopes to (φ(N+1) − φ(1))/count
        let m_oracle =
            (table.phi(n + 1).unwrap().to_f64() - table.phi(1).unwrap().to_f64()) / count;
        assert!((split.m.re - m_oracle).abs() < 1e-9);
        assert!(split.m.im == 0.0);
        // E telescopes to (Φ(−φ(N+1)) − Φ(−φ(1)))/count, hence |E| <= 1/count
        assert!(split.e.norm() <= 1.0 / count + 1e-12);
    }

    #[test]
    fn e1_e2_split_is_exact() {
        let sys = rotation();
        let i = inv(1.02);
        let p = param_block(1.02, None).unwrap();
        let x = sys.initial(0.3);
        for pair in [
            ObservablePair::decaying(&sys).unwrap(),
            ObservablePair::new(
                Observable::trig_poly(vec![
                    (2, Complex64::new(0.5, 0.0)),
                    (-3, Complex64::new(0.0, 0.5)),
                ])
                .unwrap(),
                Observable::character(1),
                &sys,
            )
            .unwrap(),
        ] {
            let n = 4_000u64;
            let traj = trajectory(&sys, &pair, &x, &i, &p, 1, &[n]).unwrap();
            let e = traj.e_vals[0];
            let e1 = traj.e1_vals[0];
            let e2 = traj.e2_vals[0];
            assert!((e1 + e2 - e).norm() <= 1e-12, "split residual {}", (e1 + e2 - e).norm());
        }
    }

    #[test]
    fn lacunary_trajectory_shape() {
        let sys = rotation();
        let pair =
            ObservablePair::new(Observable::one(), Observable::one(), &sys).unwrap();
        let x = sys.initial(0.0);
        let i = inv(1.5);
        let p = param_block(1.02, None).unwrap();
        let traj =
            lacunary_trajectory(&sys, &pair, &x, &i, &p, 1, 1.5, 20).unwrap();
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*traj.times.last().unwrap(), (1.5f64.powi(20)).floor() as u64);
        for (a, b) in traj.a_vals.iter().zip(&traj.b_vals) {
            assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-13);
            assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        }
        let csv = traj.to_csv();
        assert!(csv.lines().count() == traj.times.len() + 1);
        assert!(lacunary_trajectory(&sys, &pair, &x, &i, &p, 1, 2.5, 5).is_err());
    }

    #[test]
    fn transference_all_ones_telescopes() {
        use crate::gowers::FiniteSequence;
        let i = inv(1.02);
        let p = param_block(1.02, Some(0.2)).unwrap();
        let n = 512u64;
        let ks = crate::kernel::build_kernel(&i, &p, n).unwrap();
        let wide = FiniteSequence::indicator(-(2 * n as i64), 4 * n as usize + 1);
        let v = transference_form(&wide, &wide, &wide, &ks).unwrap();
        // all-ones reduces to |Σ_n K_N(n)|
        let oracle = ks.sum().norm();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        // zero kernel gives zero: scale values to zero via empty arrays
        let zero = FiniteSequence::new(0, vec![]);
        assert_eq!(transference_form(&zero, &wide, &wide, &ks).unwrap(), 0.0);
        // support violation
        let far = FiniteSequence::indicator(3 * n as i64, 4);
        assert!(transference_form(&wide, &far, &wide, &ks).is_err());
    }

    #[test]
    fn parse_and_validation() {
        assert!(DynamicalSystem::parse("rotation:golden").is_ok());
        assert!(DynamicalSystem::parse("cyclic:97").is_ok());
        assert!(DynamicalSystem::parse("shift:100").is_ok());
        assert!(DynamicalSystem::parse("rotation:1.5").is_err());
        assert!(DynamicalSystem::parse("torus:2").is_err());
        let sys = rotation();
        // 1.2-bounded observable rejected
        assert!(ObservablePair::new(
            Observable::Constant(Complex64::new(1.2, 0.0)),
            Observable::one(),
            &sys
        )
        .is_err());
        // incompatible kinds rejected
        let shift = DynamicalSystem::parse("shift:8").unwrap();
        assert!(ObservablePair::new(Observable::character(1), Observable::one(), &shift).is_err());
        assert!(Observable::trig_poly(vec![
            (1, Complex64::new(0.9, 0.0)),
            (2, Complex64::new(0.2, 0.0))
        ])
        .is_err());
    }
}
