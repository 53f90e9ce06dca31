//! Orbit generation and membership in N_h = {⌊h(n)⌋ : n ∈ ℕ}.
//!
//! Membership has two routes: brute enumeration of orbit values, and the
//! floor identity 1_{N_h}(n) = ⌊−φ(n)⌋ − ⌊−φ(n+1)⌋ which is only valid
//! beyond a function-dependent threshold. The threshold is not computable
//! analytically, so it is calibrated: smallest n past which the two routes
//! agree on a long scan, persisted per family in the constants table.

use super::{InverseFunction, PhiTable, RegVarFunction, SNAP_EPS};
use crate::dd::Dd;
use crate::error::{Error, Result};

/// (⌊h(n)⌋)_{n <= n_max}, nondecreasing. Values below x0 come from the
/// linear extension.
pub fn orbit(f: &RegVarFunction, n_max: u64) -> Vec<i64> {
    (1..=n_max)
        .map(|n| {
            let x = n as f64;
            if x >= f.x0() {
                f.eval_dd(Dd::from_i64(n as i64))
                    .map(|v| v.floor_snapped(SNAP_EPS) as i64)
                    .unwrap_or(i64::MIN)
            } else {
                f.eval_extended(x).floor() as i64
            }
        })
        .collect()
}

/// Bitset of N_h ∩ [1, n_max] with rank acceleration for prefix counts.
#[derive(Clone, Debug)]
pub struct MembershipTable {
    n_max: u64,
    bits: Vec<u64>,
    ranks: Vec<u64>,
}

impl MembershipTable {
    /// Enumerate orbit values into the set.
    pub fn build(f: &RegVarFunction, n_max: u64) -> MembershipTable {
        let mut bits = vec![0u64; (n_max as usize + 1) / 64 + 1];
        let mut m = 1u64;
        loop {
            let x = m as f64;
            let v = if x >= f.x0() {
                match f.eval_dd(Dd::from_i64(m as i64)) {
                    Ok(d) => d.floor_snapped(SNAP_EPS) as i64,
                    Err(_) => break,
                }
            } else {
                f.eval_extended(x).floor() as i64
            };
            if v > n_max as i64 {
                break;
            }
            if v >= 1 {
                let idx = v as usize;
                bits[idx / 64] |= 1u64 << (idx % 64);
            }
            m += 1;
        }
        MembershipTable::from_bits(bits, n_max)
    }

    pub fn from_bits(bits: Vec<u64>, n_max: u64) -> MembershipTable {
        let mut ranks = Vec::with_capacity(bits.len() + 1);
        let mut acc = 0u64;
        ranks.push(0);
        for w in &bits {
            acc += w.count_ones() as u64;
            ranks.push(acc);
        }
        MembershipTable { n_max, bits, ranks }
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn contains(&self, n: u64) -> bool {
        if n == 0 || n > self.n_max {
            return false;
        }
        let idx = n as usize;
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    /// |N_h ∩ [1, n]|.
    pub fn count_upto(&self, n: u64) -> u64 {
        let n = n.min(self.n_max);
        let idx = n as usize;
        let word = idx / 64;
        let off = idx % 64;
        let mask = if off == 63 {
            u64::MAX
        } else {
            (1u64 << (off + 1)) - 1
        };
        self.ranks[word] + (self.bits[word] & mask).count_ones() as u64
    }
}

/// Result of the membership indicator; `from_enumeration` marks values
/// below the calibrated threshold where the floor identity is not trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MembershipValue {
    pub value: i64,
    pub from_enumeration: bool,
}

/// 1_{N_h}(n): floor identity for n >= threshold, enumeration below.
pub fn membership_indicator(
    inv: &InverseFunction,
    n: u64,
    threshold: u64,
    small: &MembershipTable,
) -> Result<MembershipValue> {
    if n < threshold.max(inv.y_min().ceil() as u64) {
        if n > small.n_max() {
            return Err(Error::Domain(format!(
                "n = {n} below threshold but beyond the enumeration table"
            )));
        }
        return Ok(MembershipValue {
            value: small.contains(n) as i64,
            from_enumeration: true,
        });
    }
    let a = (-inv.phi_dd(n as f64)?).floor_snapped(SNAP_EPS);
    let b = (-inv.phi_dd((n + 1) as f64)?).floor_snapped(SNAP_EPS);
    Ok(MembershipValue {
        value: (a - b) as i64,
        from_enumeration: false,
    })
}

/// Smallest n such that the floor identity agrees with enumeration for all
/// n' in [n, scan_max].
pub fn calibrate_c_threshold(inv: &InverseFunction, scan_max: u64) -> Result<u64> {
    let f = inv.source();
    let table = MembershipTable::build(f, scan_max + 1);
    let n_lo = inv.y_min().ceil().max(1.0) as u64;
    let phi = PhiTable::build(inv, scan_max + 1)?;
    let mut last_mismatch = 0u64;
    for n in n_lo..=scan_max {
        let formula = phi.membership_value(n).unwrap_or(i64::MIN);
        if formula != table.contains(n) as i64 {
            last_mismatch = n;
        }
    }
    Ok((last_mismatch + 1).max(n_lo))
}

/// Membership resolved over a full range [1, n_max]: enumeration below the
/// threshold, the floor identity above, with prefix counts and the φ table
/// shared for downstream sweeps.
#[derive(Clone, Debug)]
pub struct OrbitMembership {
    threshold: u64,
    combined: MembershipTable,
    table: PhiTable,
}

impl OrbitMembership {
    pub fn build(inv: &InverseFunction, threshold: u64, n_max: u64) -> Result<OrbitMembership> {
        let table = PhiTable::build(inv, n_max + 1)?;
        let threshold = threshold.max(table.n_lo());
        let small = MembershipTable::build(inv.source(), threshold.min(n_max));
        let mut bits = vec![0u64; (n_max as usize + 1) / 64 + 1];
        for n in 1..=n_max {
            let member = if n < threshold {
                small.contains(n)
            } else {
                table.membership_value(n) == Some(1)
            };
            if member {
                let idx = n as usize;
                bits[idx / 64] |= 1u64 << (idx % 64);
            }
        }
        Ok(OrbitMembership {
            threshold,
            combined: MembershipTable::from_bits(bits, n_max),
            table,
        })
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn n_max(&self) -> u64 {
        self.combined.n_max()
    }

    pub fn indicator(&self, n: u64) -> i64 {
        self.combined.contains(n) as i64
    }

    /// |N_h ∩ [1, n]|, exact.
    pub fn count_upto(&self, n: u64) -> u64 {
        self.combined.count_upto(n)
    }

    pub fn phi_table(&self) -> &PhiTable {
        &self.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regvar::Family;

    fn pow15() -> InverseFunction {
        InverseFunction::new(RegVarFunction::new(Family::PurePower, 1.5, 1.0).unwrap())
    }

    #[test]
    fn orbit_small_values() {
        let f = RegVarFunction::new(Family::PurePower, 1.5, 1.0).unwrap();
        assert_eq!(orbit(&f, 5), vec![1, 2, 5, 8, 11]);
        let id = RegVarFunction::new(Family::PurePower, 1.0, 1.0).unwrap();
        assert_eq!(orbit(&id, 5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn orbit_monotone_for_builtins() {
        for spec in ["power:1.02", "power:1.5", "powerlog:1.02:1", "poweriterlog:1.3:2"] {
            let f = RegVarFunction::parse(spec).unwrap();
            let o = orbit(&f, 20_000);
            assert!(o.windows(2).all(|w| w[0] <= w[1]), "{spec} orbit not monotone");
        }
    }

    #[test]
    fn indicator_hand_values() {
        let inv = pow15();
        let small = MembershipTable::build(inv.source(), 16);
        // ⌊-φ(5)⌋ - ⌊-φ(6)⌋ = -3 - (-4) = 1, and 5 = ⌊h(3)⌋ is in the orbit
        let m5 = membership_indicator(&inv, 5, 1, &small).unwrap();
        assert_eq!(m5.value, 1);
        assert!(!m5.from_enumeration);
        // ⌊-φ(3)⌋ - ⌊-φ(4)⌋ = -3 - (-3) = 0
        let m3 = membership_indicator(&inv, 3, 1, &small).unwrap();
        assert_eq!(m3.value, 0);
        // below threshold: flagged, read from the table
        let m2 = membership_indicator(&inv, 2, 4, &small).unwrap();
        assert_eq!(m2.value, 1);
        assert!(m2.from_enumeration);
    }

    #[test]
    fn formula_matches_enumeration_on_long_scan() {
        for spec in ["power:1.02", "power:1.04", "power:1.5", "powerlog:1.02:1"] {
            let inv = InverseFunction::new(RegVarFunction::parse(spec).unwrap());
            let threshold = calibrate_c_threshold(&inv, 10_000).unwrap();
            let n_max = 30_000u64;
            let table = MembershipTable::build(inv.source(), n_max);
            let phi = PhiTable::build(&inv, n_max + 1).unwrap();
            for n in threshold..=n_max {
                assert_eq!(
                    phi.membership_value(n).unwrap(),
                    table.contains(n) as i64,
                    "{spec}: mismatch at n = {n} (threshold {threshold})"
                );
            }
        }
    }

    #[test]
    fn exact_square_cube_boundary() {
        // h(m) = m^{3/2} is integral at squares; snapping keeps the
        // indicator consistent there
        let inv = pow15();
        let phi = PhiTable::build(&inv, 1_030).unwrap();
        for m in [2u64, 3, 4, 5, 10] {
            let v = m * m * m; // h(m²) = m³
            if v < 1_025 {
                assert_eq!(phi.membership_value(v).unwrap(), 1, "m³ = {v}");
            }
        }
    }

    #[test]
    fn combined_membership_counts() {
        let inv = pow15();
        let om = OrbitMembership::build(&inv, 4, 5_000).unwrap();
        let brute = MembershipTable::build(inv.source(), 5_000);
        for n in [1u64, 10, 100, 4_321, 5_000] {
            assert_eq!(om.count_upto(n), brute.count_upto(n));
        }
        // |N_h ∩ [N]| within O(1) of ⌊φ(N)⌋
        let cnt = om.count_upto(5_000) as i64;
        let fphi = om.phi_table().floor_phi(5_000).unwrap();
        assert!((cnt - fphi).abs() <= 1);
    }
}
