//! The k = 6 endgame over Z_49 and Z_98: enumerate dilation orbits of
//! five-element unit-class sets mod 49, search each for a unit multiplier
//! pushing all classes into [7, 42], lift the sets that have none to Z_98
//! with a sixth element divisible by 7, search again with threshold 14, and
//! discharge the surviving combinations by their common factor.

use std::collections::BTreeSet;
use std::path::Path;

use num_integer::gcd;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modular::{sym_residue, units, SymClassSet};

/// Symmetric unit classes of Z_49: [1, 24] minus the multiples of 7.
pub fn unit_classes_49() -> Vec<u64> {
    (1..=24).filter(|c| c % 7 != 0).collect()
}

/// The three sets known to admit no unit multiplier into [7, 42], as raw
/// residue lists. All comparisons go through canonical forms.
pub const KNOWN_EXCEPTIONAL_49: [[u64; 5]; 3] =
    [[1, 4, 11, 39, 43], [1, 4, 18, 22, 29], [1, 4, 18, 44, 46]];

/// The exceptional six-element combinations in Z_98: each known set's
/// all-even lift joined with d6 in {14, 28, 42}.
pub const KNOWN_EXCEPTIONAL_98: [([u64; 5], u64); 9] = [
    ([4, 50, 60, 88, 92], 14),
    ([4, 50, 60, 88, 92], 28),
    ([4, 50, 60, 88, 92], 42),
    ([4, 18, 22, 50, 78], 14),
    ([4, 18, 22, 50, 78], 28),
    ([4, 18, 22, 50, 78], 42),
    ([4, 18, 44, 46, 50], 14),
    ([4, 18, 44, 46, 50], 28),
    ([4, 18, 44, 46, 50], 42),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Covered,
    Exceptional,
}

/// One dilation orbit of five unit classes mod 49, keyed by its canonical
/// form. A witness, when present, is the smallest unit multiplier whose
/// images all lie in [7, 42].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRecord {
    pub canonical: SymClassSet,
    pub witness: Option<u64>,
    pub verdict: Verdict,
}

impl OrbitRecord {
    /// Rechecks the stored witness against the stored classes.
    pub fn revalidate(&self) -> bool {
        match (self.verdict, self.witness) {
            (Verdict::Covered, Some(lambda)) => clears_49(&self.canonical, lambda),
            (Verdict::Exceptional, None) => search_interval_49(&self.canonical).is_none(),
            _ => false,
        }
    }
}

fn clears_49(s: &SymClassSet, lambda: u64) -> bool {
    s.classes()
        .iter()
        .all(|&c| sym_residue((lambda * c) as i64, 49) >= 7)
}

/// Smallest unit multiplier mod 49 sending every class of S into [7, 42].
pub fn search_interval_49(s: &SymClassSet) -> Option<u64> {
    debug_assert_eq!(s.modulus(), 49);
    units(49).find(|&lambda| clears_49(s, lambda))
}

/// Orbit count by the counting theorem: average, over the 21 dilations of
/// the class set (units mod 49 up to sign), the number of five-element
/// subsets fixed by each, i.e. unions of permutation cycles of total size 5.
pub fn burnside_orbit_count() -> u64 {
    let classes = unit_classes_49();
    let mut total = 0u64;
    for u in &classes {
        let image = |c: u64| sym_residue((u * c) as i64, 49);
        let mut seen = BTreeSet::new();
        let mut cycles = Vec::new();
        for &start in &classes {
            if !seen.insert(start) {
                continue;
            }
            let mut len = 1u64;
            let mut c = image(start);
            while c != start {
                seen.insert(c);
                c = image(c);
                len += 1;
            }
            cycles.push(len);
        }
        let mut ways = [0u64; 6];
        ways[0] = 1;
        for len in cycles {
            if len > 5 {
                continue;
            }
            for k in (len as usize..=5).rev() {
                ways[k] += ways[k - len as usize];
            }
        }
        total += ways[5];
    }
    assert_eq!(total % 21, 0, "orbit totals must average evenly");
    total / 21
}

/// All dilation orbits of five-element subsets of the 21 unit classes,
/// canonicalized, deduplicated, sorted, and searched.
pub fn enumerate_orbits_49() -> Vec<OrbitRecord> {
    let classes = unit_classes_49();
    let n = classes.len();
    let mut subsets = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    for e in d + 1..n {
                        subsets.push([
                            classes[a], classes[b], classes[c], classes[d], classes[e],
                        ]);
                    }
                }
            }
        }
    }
    let mut canonicals: Vec<SymClassSet> = subsets
        .into_par_iter()
        .map(|subset| {
            SymClassSet::new(49, subset)
                .expect("unit classes are valid")
                .canonical_orbit_rep(7)
                .expect("unit classes are coprime to 7")
        })
        .collect();
    canonicals.sort_unstable();
    canonicals.dedup();
    canonicals
        .into_par_iter()
        .map(|canonical| {
            let witness = search_interval_49(&canonical);
            OrbitRecord {
                verdict: if witness.is_some() {
                    Verdict::Covered
                } else {
                    Verdict::Exceptional
                },
                witness,
                canonical,
            }
        })
        .collect()
}

/// The canonical forms carried by records with no witness.
pub fn exceptional_49(records: &[OrbitRecord]) -> Vec<SymClassSet> {
    records
        .iter()
        .filter(|r| r.verdict == Verdict::Exceptional)
        .map(|r| r.canonical.clone())
        .collect()
}

/// Canonical forms of the three known exceptional sets.
pub fn known_exceptional_49() -> Vec<SymClassSet> {
    let mut out: Vec<SymClassSet> = KNOWN_EXCEPTIONAL_49
        .iter()
        .map(|raw| {
            SymClassSet::from_residues(49, raw.iter().copied())
                .expect("known sets are nonzero mod 49")
                .canonical_orbit_rep(7)
                .expect("known sets are units mod 49")
        })
        .collect();
    out.sort_unstable();
    out
}

/// One six-element combination in Z_98: a residue-wise lift of an
/// exceptional base (each element is the base class or the class plus 49)
/// together with a sixth element d6 divisible by 7.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftCase {
    pub base: SymClassSet,
    pub lift: Vec<u64>,
    pub d6: u64,
    pub witness: Option<u64>,
    pub verdict: Verdict,
}

fn clears_98(lift: &[u64], d6: u64, lambda: u64) -> bool {
    lift.iter()
        .chain(std::iter::once(&d6))
        .all(|&d| sym_residue((lambda % 98 * (d % 98)) as i64, 98) >= 14)
}

/// Smallest multiplier in [1, 97] keeping all six symmetric residues at or
/// above 14. Non-invertible multipliers are allowed: collapsing the set onto
/// a coarser cyclic grid is a legitimate way to clear the threshold, and the
/// multiples of 7 are exactly what covers the d6 = 7 combinations.
pub fn search_98(case: &LiftCase) -> Option<u64> {
    (1..98).find(|&lambda| clears_98(&case.lift, case.d6, lambda))
}

/// Every residue-wise lift of the base crossed with the six values of d6,
/// each searched. 2^5 * 6 = 192 cases per base, no deduplication: duplicates
/// collapse later under canonical forms.
pub fn lift_98(base: &SymClassSet) -> Result<Vec<LiftCase>> {
    assert_eq!(base.modulus(), 49, "lifting is defined on Z_49 sets");
    assert_eq!(base.classes().len(), 5, "lifting is defined on 5-sets");
    for &c in base.classes() {
        if c % 7 == 0 {
            return Err(Error::ClassNotCoprime { class: c, p: 7 });
        }
    }
    let mut cases = Vec::with_capacity(192);
    for choice in 0..32u32 {
        let mut lift: Vec<u64> = base
            .classes()
            .iter()
            .enumerate()
            .map(|(i, &c)| if choice >> i & 1 == 1 { c + 49 } else { c })
            .collect();
        lift.sort_unstable();
        for k in 1..=6 {
            cases.push(LiftCase {
                base: base.clone(),
                lift: lift.clone(),
                d6: 7 * k,
                witness: None,
                verdict: Verdict::Exceptional,
            });
        }
    }
    let mut cases: Vec<LiftCase> = cases
        .into_par_iter()
        .map(|mut case| {
            case.witness = search_98(&case);
            case.verdict = if case.witness.is_some() {
                Verdict::Covered
            } else {
                Verdict::Exceptional
            };
            case
        })
        .collect();
    cases.sort_by(|a, b| (&a.lift, a.d6).cmp(&(&b.lift, b.d6)));
    Ok(cases)
}

/// Canonical form of a six-element combination under joint unit dilation
/// mod 98: the lexicographically least (lift classes, d6 class) pair.
pub fn canonical_pair_98(lift: &[u64], d6: u64) -> (Vec<u64>, u64) {
    units(98)
        .map(|u| {
            let mut classes: Vec<u64> = lift
                .iter()
                .map(|&d| sym_residue((u * (d % 98)) as i64, 98))
                .collect();
            classes.sort_unstable();
            (classes, sym_residue((u * (d6 % 98)) as i64, 98))
        })
        .min()
        .expect("Z_98 has units")
}

/// Canonical pairs of the nine known exceptional combinations.
pub fn known_exceptional_pairs_98() -> BTreeSet<(Vec<u64>, u64)> {
    KNOWN_EXCEPTIONAL_98
        .iter()
        .map(|(lift, d6)| canonical_pair_98(lift, *d6))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GcdCheck {
    pub case: Vec<u64>,
    pub gcd: u64,
    pub pass: bool,
}

/// For each exceptional combination, the gcd of all six elements; the
/// discharge argument needs it to be at least 2.
pub fn gcd_audit(exceptions: &[LiftCase]) -> Vec<GcdCheck> {
    exceptions
        .iter()
        .map(|case| {
            let mut elements = case.lift.clone();
            elements.push(case.d6);
            elements.sort_unstable();
            let g = elements.iter().fold(0, |acc, &d| gcd(acc, d));
            GcdCheck {
                case: elements,
                gcd: g,
                pass: g >= 2,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftSummary {
    pub lift: Vec<u64>,
    pub d6: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SevenReport {
    pub orbit_count: u64,
    pub exceptional_49: Vec<Vec<u64>>,
    pub exceptional_98: Vec<LiftSummary>,
    pub gcd_audit: Vec<GcdCheck>,
}

/// Full pipeline from an orbit listing: pull out the exceptional bases, lift
/// each, collect the combinations that survive the Z_98 search, and audit
/// their common factors.
pub fn seven_report(records: &[OrbitRecord]) -> Result<SevenReport> {
    let bases = exceptional_49(records);
    let mut exceptions = Vec::new();
    for base in &bases {
        exceptions.extend(
            lift_98(base)?
                .into_iter()
                .filter(|case| case.verdict == Verdict::Exceptional),
        );
    }
    let audit = gcd_audit(&exceptions);
    Ok(SevenReport {
        orbit_count: records.len() as u64,
        exceptional_49: bases.iter().map(|s| s.classes().to_vec()).collect(),
        exceptional_98: exceptions
            .iter()
            .map(|case| LiftSummary {
                lift: case.lift.clone(),
                d6: case.d6,
            })
            .collect(),
        gcd_audit: audit,
    })
}

pub const CACHE_HEADER: &str = "lrl-orbits-v1";

/// Writes the orbit listing as sorted `49:c1,c2,c3,c4,c5:verdict[:lambda]`
/// lines under a version header.
pub fn write_orbit_cache(path: &Path, records: &[OrbitRecord]) -> std::io::Result<()> {
    let mut out = String::from(CACHE_HEADER);
    out.push('\n');
    for r in records {
        let classes: Vec<String> = r.canonical.classes().iter().map(u64::to_string).collect();
        out.push_str(&format!("49:{}", classes.join(",")));
        match (r.verdict, r.witness) {
            (Verdict::Covered, Some(lambda)) => out.push_str(&format!(":covered:{lambda}")),
            (Verdict::Exceptional, None) => out.push_str(":exceptional"),
            _ => unreachable!("verdict and witness always agree"),
        }
        out.push('\n');
    }
    std::fs::write(path, out)
}

fn bad(line: usize, what: &str) -> Error {
    Error::BadCache(format!("line {line}: {what}"))
}

/// Parses a cache file back into records. Any structural anomaly (missing
/// header, malformed line, out-of-order records, witness out of range) is
/// reported as a cache error so callers can regenerate.
pub fn read_orbit_cache(path: &Path) -> Result<Vec<OrbitRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::BadCache(format!("unreadable: {e}")))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, CACHE_HEADER)) => {}
        _ => return Err(Error::BadCache("missing header".into())),
    }
    let mut records: Vec<OrbitRecord> = Vec::new();
    for (idx, line) in lines {
        let no = idx + 1;
        let parts: Vec<&str> = line.split(':').collect();
        if parts.len() < 3 || parts[0] != "49" {
            return Err(bad(no, "expected 49:classes:verdict"));
        }
        let classes: Vec<u64> = parts[1]
            .split(',')
            .map(|t| t.parse().map_err(|_| bad(no, "bad class")))
            .collect::<Result<_>>()?;
        if classes.len() != 5 || classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad(no, "classes must be 5 strictly increasing values"));
        }
        let canonical = SymClassSet::new(49, classes).map_err(|_| bad(no, "class range"))?;
        let record = match (parts[2], parts.len()) {
            ("exceptional", 3) => OrbitRecord {
                canonical,
                witness: None,
                verdict: Verdict::Exceptional,
            },
            ("covered", 4) => {
                let lambda: u64 = parts[3].parse().map_err(|_| bad(no, "bad witness"))?;
                if !(1..49).contains(&lambda) || gcd(lambda, 49) != 1 {
                    return Err(bad(no, "witness must be a unit mod 49"));
                }
                OrbitRecord {
                    canonical,
                    witness: Some(lambda),
                    verdict: Verdict::Covered,
                }
            }
            _ => return Err(bad(no, "unknown verdict shape")),
        };
        if let Some(prev) = records.last() {
            if prev.canonical >= record.canonical {
                return Err(bad(no, "records out of order"));
            }
        }
        records.push(record);
    }
    Ok(records)
}
