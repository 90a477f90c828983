//! Residue arithmetic over Z_N for prime-power N = p^(m+1): symmetric
//! residues, p-adic levels, arc indices, multiplier families, and dilation
//! orbits of symmetric classes.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Symmetric residue |x|_N = min(x mod N, N - x mod N), always in [0, N/2].
pub fn sym_residue(x: i64, n: u64) -> u64 {
    assert!(n > 0, "modulus must be positive");
    let r = x.rem_euclid(n as i64) as u64;
    r.min(n - r)
}

/// Largest k with p^k dividing x. Undefined at x = 0.
pub fn padic_valuation(x: u64, p: u64) -> Result<u32> {
    assert!(p >= 2);
    if x == 0 {
        return Err(Error::ZeroArgument);
    }
    let mut x = x;
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    Ok(v)
}

/// Leading residue r_p(x) = (x / p^(nu_p(x))) mod p, always in [1, p-1].
pub fn leading_residue(x: u64, p: u64) -> Result<u64> {
    let v = padic_valuation(x, p)?;
    Ok((x / p.pow(v)) % p)
}

fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Working modulus N = p^(m+1) for an odd prime p. The arc map splits Z_N
/// into p half-open arcs of width p^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueContext {
    p: u64,
    m: u32,
    modulus: u64,
}

impl ResidueContext {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        let modulus = p
            .checked_pow(m + 1)
            .ok_or(Error::ModulusOverflow { p, m })?;
        Ok(ResidueContext { p, m, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Width p^m of one arc.
    pub fn arc_width(&self) -> u64 {
        self.modulus / self.p
    }

    /// Arc index q(x) = floor((x mod N) / p^m) mod p, in [0, p-1].
    pub fn arc_index(&self, x: u64) -> u64 {
        ((x % self.modulus) / self.arc_width()) % self.p
    }
}

/// Strictly increasing positive speeds together with their gcd.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceSet {
    elements: Vec<u64>,
    gcd: u64,
}

impl DistanceSet {
    /// Accepts the elements in any order; zeros and duplicates are rejected,
    /// never silently dropped.
    pub fn new(elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut elements: Vec<u64> = elements.into_iter().collect();
        if elements.is_empty() {
            return Err(Error::EmptyDistanceSet);
        }
        if elements.contains(&0) {
            return Err(Error::ZeroDistance);
        }
        elements.sort_unstable();
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateDistance(w[0]));
            }
        }
        let gcd = elements
            .iter()
            .copied()
            .fold(0, num_integer::gcd);
        Ok(DistanceSet { elements, gcd })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn gcd(&self) -> u64 {
        self.gcd
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Partition of a distance set by p-adic valuation. Level m is the top level
/// and is nonempty by construction; intermediate levels may be empty.
#[derive(Debug, Clone)]
pub struct LevelDecomposition {
    context: ResidueContext,
    levels: Vec<Vec<u64>>,
}

/// Splits D by nu_p and builds the context with m = max nu_p(D).
pub fn decompose_levels(d: &DistanceSet, p: u64) -> Result<LevelDecomposition> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    let m = d
        .elements()
        .iter()
        .map(|&x| padic_valuation(x, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .expect("distance sets are nonempty");
    let context = ResidueContext::new(p, m)?;
    let mut levels = vec![Vec::new(); m as usize + 1];
    for &x in d.elements() {
        let v = padic_valuation(x, p)?;
        levels[v as usize].push(x);
    }
    debug_assert!(!levels[m as usize].is_empty());
    Ok(LevelDecomposition { context, levels })
}

impl LevelDecomposition {
    pub fn context(&self) -> &ResidueContext {
        &self.context
    }

    pub fn level(&self, j: u32) -> Result<&[u64]> {
        self.levels
            .get(j as usize)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange {
                level: j,
                max: self.context.m,
            })
    }

    /// All elements with their levels, ascending by level.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(j, xs)| xs.iter().map(move |&x| (j as u32, x)))
    }
}

/// The family Lambda_{j,p}: the arithmetic progression 1 + p^(m-j) k
/// (0 <= k <= p-1) below the top level, and {1, ..., p-1} at level m.
/// Every member is invertible mod N.
#[derive(Debug, Clone)]
pub struct MultiplierFamily {
    level: u32,
    members: Vec<u64>,
}

impl MultiplierFamily {
    pub fn new(ctx: &ResidueContext, j: u32) -> Result<Self> {
        if j > ctx.m {
            return Err(Error::LevelOutOfRange {
                level: j,
                max: ctx.m,
            });
        }
        let members: Vec<u64> = if j < ctx.m {
            let step = ctx.p.pow(ctx.m - j);
            (0..ctx.p).map(|k| 1 + step * k).collect()
        } else {
            (1..ctx.p).collect()
        };
        for &l in &members {
            debug_assert_eq!(num_integer::gcd(l, ctx.modulus), 1);
        }
        Ok(MultiplierFamily { level: j, members })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }
}

/// Minimal length of a cyclic interval {a, a+1, ..., a+L-1} mod p containing
/// S. Empty sets need length 0 and the full Z_p needs length p.
pub fn ap_cover_length(p: u64, s: &BTreeSet<u64>) -> Result<u64> {
    for &x in s {
        if x >= p {
            return Err(Error::ArcOutOfRange { arc: x, p });
        }
    }
    if s.is_empty() {
        return Ok(0);
    }
    // The shortest covering interval is the complement of the longest run of
    // consecutive absent positions.
    let mut longest_gap = 0;
    let sorted: Vec<u64> = s.iter().copied().collect();
    for (i, &x) in sorted.iter().enumerate() {
        let next = sorted[(i + 1) % sorted.len()];
        let gap = (next + p - x) % p;
        let gap = if gap == 0 { p } else { gap };
        longest_gap = longest_gap.max(gap - 1);
    }
    Ok(p - longest_gap)
}

/// Units of Z_n in increasing order.
pub fn units(n: u64) -> impl Iterator<Item = u64> {
    (1..n).filter(move |&u| num_integer::gcd(u, n) == 1)
}

/// A set of symmetric classes {x, -x} mod N, stored as sorted representatives
/// in [1, N/2].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymClassSet {
    modulus: u64,
    classes: Vec<u64>,
}

impl SymClassSet {
    pub fn new(modulus: u64, classes: impl IntoIterator<Item = u64>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        let mut classes: Vec<u64> = classes.into_iter().collect();
        classes.sort_unstable();
        classes.dedup();
        for &c in &classes {
            if c == 0 || c > modulus / 2 {
                return Err(Error::ClassOutOfRange { class: c, modulus });
            }
        }
        Ok(SymClassSet { modulus, classes })
    }

    /// Reduces arbitrary residues to their symmetric classes first.
    pub fn from_residues(modulus: u64, residues: impl IntoIterator<Item = u64>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        let classes: Vec<u64> = residues
            .into_iter()
            .map(|r| sym_residue(r as i64, modulus))
            .collect();
        if classes.contains(&0) {
            return Err(Error::ClassOutOfRange {
                class: 0,
                modulus,
            });
        }
        Self::new(modulus, classes)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn classes(&self) -> &[u64] {
        &self.classes
    }

    /// Image under dilation by u: every class c maps to |u c|_N.
    pub fn dilated(&self, u: u64) -> SymClassSet {
        let mut classes: Vec<u64> = self
            .classes
            .iter()
            .map(|&c| sym_residue((u % self.modulus * c) as i64, self.modulus))
            .collect();
        classes.sort_unstable();
        classes.dedup();
        SymClassSet {
            modulus: self.modulus,
            classes,
        }
    }

    /// Lexicographically least dilation image over all units of Z_N: a
    /// canonical representative of the dilation orbit. Constant on orbits and
    /// idempotent. Classes sharing a factor with the context prime are
    /// rejected, since dilation orbits are only used on unit classes.
    pub fn canonical_orbit_rep(&self, p: u64) -> Result<SymClassSet> {
        for &c in &self.classes {
            if c % p == 0 {
                return Err(Error::ClassNotCoprime { class: c, p });
            }
        }
        let best = units(self.modulus)
            .map(|u| self.dilated(u).classes)
            .min()
            .expect("every modulus >= 2 has the unit 1");
        Ok(SymClassSet {
            modulus: self.modulus,
            classes: best,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_residue_examples() {
        assert_eq!(sym_residue(5, 7), 2);
        assert_eq!(sym_residue(49, 98), 49);
        assert_eq!(sym_residue(92, 98), 6);
        assert_eq!(sym_residue(0, 9), 0);
        assert_eq!(sym_residue(24, 49), 24);
        assert_eq!(sym_residue(25, 49), 24);
    }

    #[test]
    fn sym_residue_negation_and_range() {
        for n in 2..60u64 {
            for x in -150..150i64 {
                let r = sym_residue(x, n);
                assert_eq!(r, sym_residue(-x, n));
                assert!(r <= n / 2);
            }
        }
    }

    #[test]
    fn sym_residue_scaling() {
        for n in 2..40u64 {
            for c in 1..8u64 {
                for x in 0..(n as i64) {
                    assert_eq!(
                        sym_residue(c as i64 * x, c * n),
                        c * sym_residue(x, n)
                    );
                }
            }
        }
    }

    #[test]
    fn valuation_and_leading_residue() {
        assert_eq!(padic_valuation(63, 3).unwrap(), 2);
        assert_eq!(leading_residue(63, 3).unwrap(), 1);
        assert_eq!(padic_valuation(14, 7).unwrap(), 1);
        assert_eq!(leading_residue(14, 7).unwrap(), 2);
        assert_eq!(padic_valuation(5, 7).unwrap(), 0);
        assert_eq!(leading_residue(5, 7).unwrap(), 5);
        assert_eq!(padic_valuation(0, 3), Err(Error::ZeroArgument));
        assert_eq!(leading_residue(0, 5), Err(Error::ZeroArgument));
    }

    #[test]
    fn leading_residue_never_zero() {
        for p in [3u64, 5, 7] {
            for x in 1..2000u64 {
                let r = leading_residue(x, p).unwrap();
                assert!((1..p).contains(&r), "x={x} p={p} r={r}");
            }
        }
    }

    #[test]
    fn context_rejects_bad_primes() {
        assert!(ResidueContext::new(2, 1).is_err());
        assert!(ResidueContext::new(9, 1).is_err());
        assert!(ResidueContext::new(1, 0).is_err());
        assert!(ResidueContext::new(7, 40).is_err());
        let ctx = ResidueContext::new(7, 1).unwrap();
        assert_eq!(ctx.modulus(), 49);
        assert_eq!(ctx.arc_width(), 7);
    }

    #[test]
    fn arc_index_examples() {
        let ctx = ResidueContext::new(7, 1).unwrap();
        assert_eq!(ctx.arc_index(30), 4);
        assert_eq!(ctx.arc_index(6), 0);
        assert_eq!(ctx.arc_index(48), 6);
        assert_eq!(ctx.arc_index(49), 0);
        let ctx = ResidueContext::new(3, 1).unwrap();
        assert_eq!(ctx.arc_index(4), 1);
        assert_eq!(ctx.arc_index(12), 1);
    }

    #[test]
    fn arc_index_counts_positions_evenly() {
        // Every arc holds exactly p^m residues.
        for (p, m) in [(3u64, 2u32), (5, 1), (7, 1)] {
            let ctx = ResidueContext::new(p, m).unwrap();
            let mut counts = vec![0u64; p as usize];
            for x in 0..ctx.modulus() {
                counts[ctx.arc_index(x) as usize] += 1;
            }
            assert!(counts.iter().all(|&c| c == ctx.arc_width()));
        }
    }

    #[test]
    fn distance_set_validation() {
        let d = DistanceSet::new([4, 1, 2]).unwrap();
        assert_eq!(d.elements(), &[1, 2, 4]);
        assert_eq!(d.gcd(), 1);
        assert_eq!(DistanceSet::new([2, 4, 6]).unwrap().gcd(), 2);
        assert_eq!(DistanceSet::new([]), Err(Error::EmptyDistanceSet));
        assert_eq!(DistanceSet::new([1, 0]), Err(Error::ZeroDistance));
        assert_eq!(DistanceSet::new([3, 3]), Err(Error::DuplicateDistance(3)));
    }

    #[test]
    fn decompose_examples() {
        let d = DistanceSet::new([1, 3]).unwrap();
        let dec = decompose_levels(&d, 3).unwrap();
        assert_eq!(dec.context().m(), 1);
        assert_eq!(dec.context().modulus(), 9);
        assert_eq!(dec.level(0).unwrap(), &[1]);
        assert_eq!(dec.level(1).unwrap(), &[3]);

        let d = DistanceSet::new([1, 2, 3, 4, 5, 7]).unwrap();
        let dec = decompose_levels(&d, 7).unwrap();
        assert_eq!(dec.context().modulus(), 49);
        assert_eq!(dec.level(0).unwrap(), &[1, 2, 3, 4, 5]);
        assert_eq!(dec.level(1).unwrap(), &[7]);

        let d = DistanceSet::new([4, 50, 60, 88, 92, 14]).unwrap();
        let dec = decompose_levels(&d, 7).unwrap();
        assert_eq!(dec.context().m(), 1);
        assert_eq!(dec.level(0).unwrap(), &[4, 50, 60, 88, 92]);
        assert_eq!(dec.level(1).unwrap(), &[14]);
    }

    #[test]
    fn decompose_allows_intermediate_empty_levels() {
        let d = DistanceSet::new([1, 9]).unwrap();
        let dec = decompose_levels(&d, 3).unwrap();
        assert_eq!(dec.context().m(), 2);
        assert_eq!(dec.level(1).unwrap(), &[] as &[u64]);
        let collected: Vec<(u32, u64)> = dec.iter().collect();
        assert_eq!(collected, vec![(0, 1), (2, 9)]);
    }

    #[test]
    fn multiplier_families() {
        let ctx = ResidueContext::new(7, 1).unwrap();
        let top = MultiplierFamily::new(&ctx, 1).unwrap();
        assert_eq!(top.members(), &[1, 2, 3, 4, 5, 6]);
        let low = MultiplierFamily::new(&ctx, 0).unwrap();
        assert_eq!(low.members(), &[1, 8, 15, 22, 29, 36, 43]);
        assert!(MultiplierFamily::new(&ctx, 2).is_err());

        let ctx = ResidueContext::new(3, 2).unwrap();
        let mid = MultiplierFamily::new(&ctx, 1).unwrap();
        assert_eq!(mid.members(), &[1, 4, 7]);
        for j in 0..=2 {
            for &l in MultiplierFamily::new(&ctx, j).unwrap().members() {
                assert_eq!(num_integer::gcd(l, ctx.modulus()), 1);
            }
        }
    }

    fn cover_by_scan(p: u64, s: &BTreeSet<u64>) -> u64 {
        // Independent route: try every (start, length) pair directly.
        for len in 0..=p {
            for a in 0..p {
                let covered = s.iter().all(|&x| (x + p - a) % p < len);
                if covered {
                    return len;
                }
            }
        }
        unreachable!("length p always covers");
    }

    #[test]
    fn ap_cover_length_examples() {
        let set = |xs: &[u64]| xs.iter().copied().collect::<BTreeSet<u64>>();
        assert_eq!(ap_cover_length(7, &set(&[1, 2, 3])).unwrap(), 3);
        assert_eq!(ap_cover_length(7, &set(&[0, 6])).unwrap(), 2);
        assert_eq!(ap_cover_length(7, &set(&[0, 2, 4])).unwrap(), 5);
        assert_eq!(ap_cover_length(7, &set(&[])).unwrap(), 0);
        assert_eq!(ap_cover_length(7, &set(&[0, 1, 2, 3, 4, 5, 6])).unwrap(), 7);
        assert!(ap_cover_length(7, &set(&[7])).is_err());
    }

    #[test]
    fn ap_cover_length_matches_interval_scan_exhaustively() {
        for p in [3u64, 5, 7] {
            for mask in 0u32..(1 << p) {
                let s: BTreeSet<u64> = (0..p).filter(|&i| mask >> i & 1 == 1).collect();
                assert_eq!(
                    ap_cover_length(p, &s).unwrap(),
                    cover_by_scan(p, &s),
                    "p={p} mask={mask:b}"
                );
            }
        }
    }

    #[test]
    fn ap_cover_length_shift_and_negation_invariant() {
        let p = 7u64;
        for mask in 0u32..(1 << p) {
            let s: BTreeSet<u64> = (0..p).filter(|&i| mask >> i & 1 == 1).collect();
            let l = ap_cover_length(p, &s).unwrap();
            for t in 0..p {
                let shifted: BTreeSet<u64> = s.iter().map(|&x| (x + t) % p).collect();
                assert_eq!(ap_cover_length(p, &shifted).unwrap(), l);
            }
            let negated: BTreeSet<u64> = s.iter().map(|&x| (p - x) % p).collect();
            assert_eq!(ap_cover_length(p, &negated).unwrap(), l);
        }
    }

    #[test]
    fn sym_class_set_validation() {
        let s = SymClassSet::new(49, [11, 1, 4]).unwrap();
        assert_eq!(s.classes(), &[1, 4, 11]);
        assert!(SymClassSet::new(49, [25]).is_err());
        assert!(SymClassSet::new(49, [0]).is_err());
        let s = SymClassSet::from_residues(49, [43, 39, 11, 4, 1]).unwrap();
        assert_eq!(s.classes(), &[1, 4, 6, 10, 11]);
    }

    #[test]
    fn canonical_rep_is_constant_on_orbits() {
        let s = SymClassSet::from_residues(49, [1, 4, 11, 39, 43]).unwrap();
        let canon = s.canonical_orbit_rep(7).unwrap();
        // Dilating by 2 gives {2, 8, 22, 78, 86} mod 49.
        let t = SymClassSet::from_residues(49, [2, 8, 22, 78 % 49, 86 % 49]).unwrap();
        assert_eq!(t, s.dilated(2));
        assert_eq!(t.canonical_orbit_rep(7).unwrap(), canon);
        for u in units(49) {
            assert_eq!(s.dilated(u).canonical_orbit_rep(7).unwrap(), canon);
        }
    }

    #[test]
    fn canonical_rep_idempotent_and_minimal() {
        let s = SymClassSet::new(49, [1, 2, 3, 4, 5]).unwrap();
        let canon = s.canonical_orbit_rep(7).unwrap();
        assert_eq!(canon.canonical_orbit_rep(7).unwrap(), canon);
        assert!(canon.classes() <= s.classes());
        let single = SymClassSet::new(49, [1]).unwrap();
        assert_eq!(single.canonical_orbit_rep(7).unwrap().classes(), &[1]);
    }

    #[test]
    fn canonical_rep_rejects_non_unit_classes() {
        let s = SymClassSet::new(49, [7, 1]).unwrap();
        assert_eq!(
            s.canonical_orbit_rep(7),
            Err(Error::ClassNotCoprime { class: 7, p: 7 })
        );
    }

    #[test]
    fn canonical_rep_separates_orbits() {
        // Two sets are unit-dilation related iff their canonical forms agree.
        let a = SymClassSet::new(49, [1, 2, 3]).unwrap();
        let b = SymClassSet::new(49, [1, 2, 4]).unwrap();
        let in_orbit = units(49).any(|u| a.dilated(u) == b);
        assert_eq!(
            in_orbit,
            a.canonical_orbit_rep(7).unwrap() == b.canonical_orbit_rep(7).unwrap()
        );
        assert!(!in_orbit);
    }
}
