//! Exhaustive scans of the finite combinatorial facts behind the seven-color
//! argument: the arc-shift identities for unit multipliers, the anchored
//! difference invariant, and the two cover-length lemmas over Z_7 with their
//! exact failure class. Every scan walks its full domain; nothing is sampled.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modular::{
    ap_cover_length, leading_residue, padic_valuation, sym_residue, ResidueContext,
};

/// Arc positions of the three residue classes, as subsets of Z_7. The class
/// carrying arcs S2 doubles the reference class, S4 quadruples it, so a
/// rim-avoiding shift acts as k on S1, 2k on S2 and 4k on S4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcConfiguration {
    s1: u8,
    s2: u8,
    s4: u8,
}

const RIM: u8 = 0b100_0001; // arcs 0 and 6

fn rot7(mask: u8, s: u64) -> u8 {
    let s = (s % 7) as u32;
    ((mask << s) | (mask >> (7 - s))) & 0x7f
}

fn mask_of(arcs: impl IntoIterator<Item = u64>) -> Result<u8> {
    let mut mask = 0u8;
    for a in arcs {
        if a >= 7 {
            return Err(Error::ArcOutOfRange { arc: a, p: 7 });
        }
        mask |= 1 << a;
    }
    Ok(mask)
}

fn arcs_of(mask: u8) -> Vec<u64> {
    (0..7).filter(|&i| mask >> i & 1 == 1).collect()
}

impl ArcConfiguration {
    pub fn new(
        s1: impl IntoIterator<Item = u64>,
        s2: impl IntoIterator<Item = u64>,
        s4: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        Ok(ArcConfiguration {
            s1: mask_of(s1)?,
            s2: mask_of(s2)?,
            s4: mask_of(s4)?,
        })
    }

    fn from_masks(s1: u8, s2: u8, s4: u8) -> Self {
        ArcConfiguration { s1, s2, s4 }
    }

    pub fn arcs(&self) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
        (arcs_of(self.s1), arcs_of(self.s2), arcs_of(self.s4))
    }

    /// Cover lengths of the three arc sets in Z_7.
    pub fn lengths(&self) -> (u64, u64, u64) {
        let len = |mask: u8| {
            let set: BTreeSet<u64> = arcs_of(mask).into_iter().collect();
            ap_cover_length(7, &set).expect("7 is prime")
        };
        (len(self.s1), len(self.s2), len(self.s4))
    }

    /// Shifts k for which no class touches the rim arcs {0, 6}.
    pub fn clear_shifts(&self) -> Vec<u64> {
        (0..7)
            .filter(|&k| {
                (rot7(self.s1, k) | rot7(self.s2, 2 * k) | rot7(self.s4, 4 * k)) & RIM == 0
            })
            .collect()
    }

    pub fn has_clear_shift(&self) -> bool {
        !self.clear_shifts().is_empty()
    }

    fn key(&self) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
        self.arcs()
    }
}

impl PartialOrd for ArcConfiguration {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ArcConfiguration {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl std::fmt::Display for ArcConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let render = |mask: u8| {
            let parts: Vec<String> = arcs_of(mask).iter().map(u64::to_string).collect();
            format!("{{{}}}", parts.join(","))
        };
        write!(
            f,
            "S1={} S2={} S4={}",
            render(self.s1),
            render(self.s2),
            render(self.s4)
        )
    }
}

/// Outcome of one exhaustive scan. `exception_match` records whether the
/// failure list equals the expected exception class of that scan (empty for
/// the scans that admit no exceptions).
#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub id: String,
    pub domain_size: u64,
    pub failures: Vec<String>,
    pub exception_match: bool,
}

/// Verifies, over every x in [1, N), every level j and every member of the
/// level-j multiplier family: valuations are preserved, arcs of elements
/// above level j are fixed, arcs of level-j elements shift by k times the
/// leading residue (by the full unit at the top level).
pub fn check_shift_identity(p: u64, m: u32) -> Result<LemmaReport> {
    let ctx = ResidueContext::new(p, m)?;
    let n = ctx.modulus();
    let mut failures = Vec::new();
    let mut domain = 0u64;
    for x in 1..n {
        let vx = padic_valuation(x, p)?;
        let rx = leading_residue(x, p)?;
        let qx = ctx.arc_index(x);
        for j in 0..=m {
            let members: Vec<(u64, u64)> = if j == m {
                (1..p).map(|l| (l, l)).collect()
            } else {
                (0..p).map(|k| (k, 1 + p.pow(m - j) * k)).collect()
            };
            for (k, lambda) in members {
                domain += 1;
                let lx = lambda * x % n;
                if padic_valuation(lx, p)? != vx {
                    failures.push(format!("valuation moved: x={x} j={j} lambda={lambda}"));
                    continue;
                }
                let qlx = ctx.arc_index(lx);
                if j == m {
                    if vx == m && qlx != lambda * rx % p {
                        failures.push(format!("top-level arc wrong: x={x} lambda={lambda}"));
                    }
                } else if vx > j {
                    if qlx != qx {
                        failures.push(format!("arc moved above level: x={x} j={j} k={k}"));
                    }
                } else if vx == j && qlx != (qx + k * rx) % p {
                    failures.push(format!("arc shift wrong: x={x} j={j} k={k}"));
                }
            }
        }
    }
    failures.sort();
    Ok(LemmaReport {
        id: format!("shift-identity p={p} m={m}"),
        domain_size: domain,
        exception_match: failures.is_empty(),
        failures,
    })
}

/// The anchored difference of a pair x, y with equal valuation j < m and
/// comparable leading residues: e is x-y when residues agree, 2x-y when
/// r(y) = 2r(x); the arc-level counterpart substitutes arcs for values.
fn anchored_pair(ctx: &ResidueContext, x: u64, y: u64, doubled: bool) -> (i64, u64) {
    let (qx, qy) = (ctx.arc_index(x) as i64, ctx.arc_index(y) as i64);
    if doubled {
        (2 * x as i64 - y as i64, (2 * qx - qy).rem_euclid(7) as u64)
    } else {
        (x as i64 - y as i64, (qx - qy).rem_euclid(7) as u64)
    }
}

/// Over all pairs below 7^(m+1) with equal valuation j < m and r(y) in
/// {r(x), 2r(x)}: the arc-level difference is invariant under every family
/// member of level at most j, and it tracks the arc of the value-level
/// difference within one arc; with equal residues the arc of e never
/// overshoots (difference in {0, 6}).
pub fn check_tilde_e(m: u32) -> Result<LemmaReport> {
    let ctx = ResidueContext::new(7, m)?;
    let n = ctx.modulus();
    let mut failures = Vec::new();
    let mut domain = 0u64;
    for x in 1..n {
        let vx = padic_valuation(x, 7)?;
        if vx >= m {
            continue;
        }
        let rx = leading_residue(x, 7)?;
        for y in 1..n {
            if padic_valuation(y, 7)? != vx {
                continue;
            }
            let ry = leading_residue(y, 7)?;
            let doubled = if ry == rx {
                false
            } else if ry == 2 * rx % 7 {
                true
            } else {
                continue;
            };
            domain += 1;
            let (e, et) = anchored_pair(&ctx, x, y, doubled);
            let qe = ctx.arc_index(e.rem_euclid(n as i64) as u64);
            if sym_residue(et as i64 - qe as i64, 7) > 1 {
                failures.push(format!("distance bound: x={x} y={y}"));
            }
            if !doubled && !matches!((qe + 7 - et) % 7, 0 | 6) {
                failures.push(format!("equal-residue overshoot: x={x} y={y}"));
            }
            for i in 0..=vx {
                for k in 0..7u64 {
                    let lambda = 1 + 7u64.pow(m - i) * k;
                    let (_, et2) = anchored_pair(&ctx, lambda * x % n, lambda * y % n, doubled);
                    if et2 != et {
                        failures.push(format!("not invariant: x={x} y={y} lambda={lambda}"));
                    }
                }
            }
        }
    }
    failures.sort();
    Ok(LemmaReport {
        id: format!("anchored-difference m={m}"),
        domain_size: domain,
        exception_match: failures.is_empty(),
        failures,
    })
}

/// The exact failure class of the length-5 scan, built constructively: for
/// each anchor a, S1 covers [a, a+2] (with or without the midpoint), S2 is
/// the singleton {2a+2} or {2a+3}, S4 is {4a+2}; relabeling the reference
/// class cycles the three roles, so the class is closed under rotating
/// (S1,S2,S4) to (S2,S4,S1). 28 configurations per role, 84 in total.
pub fn length5_exception_class() -> Vec<ArcConfiguration> {
    let mut class = BTreeSet::new();
    for a in 0..7u64 {
        let full = mask_of([a % 7, (a + 1) % 7, (a + 2) % 7]).unwrap();
        let gapped = mask_of([a % 7, (a + 2) % 7]).unwrap();
        for s1 in [full, gapped] {
            for s2 in [(2 * a + 2) % 7, (2 * a + 3) % 7] {
                let base =
                    ArcConfiguration::from_masks(s1, 1 << s2, 1 << ((4 * a + 2) % 7));
                let rot1 = ArcConfiguration::from_masks(base.s2, base.s4, base.s1);
                let rot2 = ArcConfiguration::from_masks(base.s4, base.s1, base.s2);
                class.extend([base, rot1, rot2]);
            }
        }
    }
    class.into_iter().collect()
}

/// All configurations with cover-length sum at most 5 admitting no clear
/// shift, in configuration order.
pub fn length5_failures() -> Vec<ArcConfiguration> {
    let lengths: Vec<u64> = (0u8..128)
        .map(|mask| {
            let set: BTreeSet<u64> = arcs_of(mask).into_iter().collect();
            ap_cover_length(7, &set).expect("7 is prime")
        })
        .collect();
    let mut failures = Vec::new();
    for s1 in 0u8..128 {
        let l1 = lengths[s1 as usize];
        if l1 > 5 {
            continue;
        }
        for s2 in 0u8..128 {
            let l2 = l1 + lengths[s2 as usize];
            if l2 > 5 {
                continue;
            }
            for s4 in 0u8..128 {
                if l2 + lengths[s4 as usize] > 5 {
                    continue;
                }
                let config = ArcConfiguration::from_masks(s1, s2, s4);
                if !config.has_clear_shift() {
                    failures.push(config);
                }
            }
        }
    }
    failures.sort();
    failures
}

/// Exhaustive length-5 scan; the failure list must be exactly the
/// constructive exception class.
pub fn check_length5() -> LemmaReport {
    let failures = length5_failures();
    let expected = length5_exception_class();
    let domain: u64 = {
        let lengths: Vec<u64> = (0u8..128)
            .map(|mask| {
                let set: BTreeSet<u64> = arcs_of(mask).into_iter().collect();
                ap_cover_length(7, &set).expect("7 is prime")
            })
            .collect();
        let mut count = 0;
        for a in 0..128usize {
            for b in 0..128usize {
                for c in 0..128usize {
                    if lengths[a] + lengths[b] + lengths[c] <= 5 {
                        count += 1;
                    }
                }
            }
        }
        count
    };
    LemmaReport {
        id: "length5".into(),
        domain_size: domain,
        exception_match: failures == expected,
        failures: failures.iter().map(ArcConfiguration::to_string).collect(),
    }
}

/// Masks supported on [lo, lo+len-1] containing both endpoints and having
/// cover length exactly len.
fn interval_masks(lo: u64, len: u64) -> Vec<u8> {
    (0u8..128)
        .filter(|&mask| {
            let arcs = arcs_of(mask);
            if arcs.is_empty() || !arcs.contains(&lo) || !arcs.contains(&(lo + len - 1)) {
                return false;
            }
            if arcs.iter().any(|&a| a < lo || a > lo + len - 1) {
                return false;
            }
            let set: BTreeSet<u64> = arcs.into_iter().collect();
            ap_cover_length(7, &set).unwrap() == len
        })
        .collect()
}

/// The five normalized length-6 hypotheses, each scanned exhaustively. S1 is
/// anchored on [1, l1] so the anchor element sits at arc 1; the anchored
/// differences against a singleton S4 arc i and a leading S2 arc i are
/// 2i-1 and 2-i. No failures are expected in any case.
pub fn check_length6() -> Vec<LemmaReport> {
    let singleton_cases = [
        ("length6 (5,0,1)", 5, false, [4u64, 6].as_slice()),
        ("length6 (5,1,0)", 5, true, [2u64, 3].as_slice()),
    ];
    let mut reports = Vec::new();
    for (id, l1, is_s2, excluded) in singleton_cases {
        let mut failures = Vec::new();
        let mut domain = 0;
        for s1 in interval_masks(1, l1) {
            for i in 0..7u64 {
                let anchored = if is_s2 {
                    (2 + 7 - i) % 7
                } else {
                    (2 * i + 6) % 7
                };
                if excluded.contains(&anchored) {
                    continue;
                }
                domain += 1;
                let config = if is_s2 {
                    ArcConfiguration::from_masks(s1, 1 << i, 0)
                } else {
                    ArcConfiguration::from_masks(s1, 0, 1 << i)
                };
                if !config.has_clear_shift() {
                    failures.push(config);
                }
            }
        }
        reports.push(finish(id, domain, failures));
    }

    // (4,0,2): a two-arc S4, no anchored restriction.
    let mut failures = Vec::new();
    let mut domain = 0;
    for s1 in interval_masks(1, 4) {
        for j in 0..7u64 {
            domain += 1;
            let s4 = (1 << j) | rot7(1 << j, 1);
            let config = ArcConfiguration::from_masks(s1, 0, s4);
            if !config.has_clear_shift() {
                failures.push(config);
            }
        }
    }
    reports.push(finish("length6 (4,0,2)", domain, failures));

    // (4,2,0): S2 = {i, i+1}; the anchored difference against arc i is 2-i,
    // excluded value 4 removes exactly i = 5.
    let mut failures = Vec::new();
    let mut domain = 0;
    for s1 in interval_masks(1, 4) {
        for i in 0..7u64 {
            if (2 + 7 - i) % 7 == 4 {
                continue;
            }
            domain += 1;
            let s2 = (1 << i) | rot7(1 << i, 1);
            let config = ArcConfiguration::from_masks(s1, s2, 0);
            if !config.has_clear_shift() {
                failures.push(config);
            }
        }
    }
    reports.push(finish("length6 (4,2,0)", domain, failures));

    // (3,3,0): any cover-length-3 S2.
    let mut failures = Vec::new();
    let mut domain = 0;
    let length3: Vec<u8> = (0u8..128)
        .filter(|&mask| {
            let set: BTreeSet<u64> = arcs_of(mask).into_iter().collect();
            ap_cover_length(7, &set).unwrap() == 3
        })
        .collect();
    for s1 in interval_masks(1, 3) {
        for &s2 in &length3 {
            domain += 1;
            let config = ArcConfiguration::from_masks(s1, s2, 0);
            if !config.has_clear_shift() {
                failures.push(config);
            }
        }
    }
    reports.push(finish("length6 (3,3,0)", domain, failures));
    reports
}

fn finish(id: &str, domain: u64, mut failures: Vec<ArcConfiguration>) -> LemmaReport {
    failures.sort();
    LemmaReport {
        id: id.into(),
        domain_size: domain,
        exception_match: failures.is_empty(),
        failures: failures.iter().map(ArcConfiguration::to_string).collect(),
    }
}

/// Runs every scan at its standard parameters.
pub fn full_suite() -> Result<Vec<LemmaReport>> {
    let mut reports = Vec::new();
    for p in [3, 5, 7] {
        for m in 0..=2 {
            reports.push(check_shift_identity(p, m)?);
        }
    }
    reports.push(check_tilde_e(2)?);
    reports.push(check_length5());
    reports.extend(check_length6());
    Ok(reports)
}
