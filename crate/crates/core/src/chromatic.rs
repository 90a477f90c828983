//! Exact regular chromatic numbers over Z_N and witness machinery for the
//! k+1 bound. A witness is a multiplier pushing every dilated element at
//! least N/k away from 0; scaling a witness by c scales modulus and all
//! distances by c, so one witness bounds every multiple of its modulus.
//!
//! The continuous oracle maximizes min_d ||t*d|| over t in [0,1). That
//! function is piecewise linear: the minimum peaks either at a kink of a
//! single branch (t*d crossing a half-integer, denominator 2d) or where a
//! rising branch meets a falling one (t*(d_i + d_j) crossing an integer).
//! Candidates a/q with q ranging over pairwise sums d_i + d_j (i <= j,
//! covering 2d as the diagonal) therefore contain every local maximum.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::modular::DistanceSet;

fn sym(x: u64, n: u64) -> u64 {
    let r = x % n;
    r.min(n - r)
}

/// A multiplier together with the distances it certifies at a modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplierWitness {
    pub modulus: u64,
    pub lambda: u64,
    pub distances: Vec<u64>,
    pub min_distance: u64,
}

impl MultiplierWitness {
    /// Evaluates one multiplier; distances follow the sorted element order.
    pub fn compute(d: &DistanceSet, n: u64, lambda: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::ModulusTooSmall(n));
        }
        let distances: Vec<u64> = d.elements().iter().map(|&x| sym(lambda * (x % n), n)).collect();
        let min_distance = distances.iter().copied().min().expect("set is nonempty");
        Ok(MultiplierWitness {
            modulus: n,
            lambda,
            distances,
            min_distance,
        })
    }
}

/// Scans every lambda in [1, N) and keeps the first one attaining the
/// maximal minimum distance. The minimum may be 0 when some element is
/// divisible by N.
pub fn max_min_distance(d: &DistanceSet, n: u64) -> Result<MultiplierWitness> {
    if n < 2 {
        return Err(Error::ModulusTooSmall(n));
    }
    let reduced: Vec<u64> = d.elements().iter().map(|&x| x % n).collect();
    let mut best_lambda = 1;
    let mut best_min = 0;
    for lambda in 1..n {
        let mut m = u64::MAX;
        for &x in &reduced {
            m = m.min(sym(lambda * x, n));
            if m <= best_min {
                break;
            }
        }
        if m > best_min {
            best_min = m;
            best_lambda = lambda;
        }
    }
    MultiplierWitness::compute(d, n, best_lambda)
}

/// Chromatic value at a single modulus; infinite exactly when every
/// multiplier leaves some element at distance 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiR {
    Finite(u64),
    Infinite,
}

impl std::fmt::Display for ChiR {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChiR::Finite(k) => write!(f, "{k}"),
            ChiR::Infinite => write!(f, "infinity"),
        }
    }
}

impl Serialize for ChiR {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ChiR::Finite(k) => s.serialize_u64(*k),
            ChiR::Infinite => s.serialize_str("infinity"),
        }
    }
}

/// Least k such that some multiplier keeps all elements at distance >= N/k,
/// computed as ceil(N / M) from the maximal minimum M; the comparison
/// N/k <= M is k*M >= N in integers throughout.
pub fn chi_r_at(d: &DistanceSet, n: u64) -> Result<ChiR> {
    let w = max_min_distance(d, n)?;
    Ok(match w.min_distance {
        0 => ChiR::Infinite,
        m => ChiR::Finite(n.div_ceil(m)),
    })
}

/// Scales a witness to modulus c*N; every distance scales by exactly c.
pub fn lift_witness(w: &MultiplierWitness, c: u64) -> Result<MultiplierWitness> {
    if c == 0 {
        return Err(Error::ZeroScale);
    }
    Ok(MultiplierWitness {
        modulus: c * w.modulus,
        lambda: c * w.lambda,
        distances: w.distances.iter().map(|&x| c * x).collect(),
        min_distance: c * w.min_distance,
    })
}

/// Smallest modulus N <= n_max (then smallest lambda) at which |D|+1 colors
/// suffice: (|D|+1) * |lambda d|_N >= N for every d. One hit certifies the
/// bound for all multiples of N via lift_witness.
pub fn conjecture_witness(d: &DistanceSet, n_max: u64) -> Result<Option<MultiplierWitness>> {
    if d.gcd() != 1 {
        return Err(Error::GcdNotOne(d.gcd()));
    }
    let k1 = d.elements().len() as u64 + 1;
    for n in 2..=n_max {
        let reduced: Vec<u64> = d.elements().iter().map(|&x| x % n).collect();
        if reduced.contains(&0) {
            continue;
        }
        for lambda in 1..n {
            if reduced.iter().all(|&x| k1 * sym(lambda * x, n) >= n) {
                return Ok(Some(MultiplierWitness::compute(d, n, lambda)?));
            }
        }
    }
    Ok(None)
}

/// Runs conjecture_witness over every gcd-1 set of size k inside [1, max_d],
/// in parallel; output order is the lexicographic set order regardless of
/// the schedule.
pub fn verify_family(
    k: usize,
    max_d: u64,
    n_max: u64,
) -> Vec<(Vec<u64>, Option<MultiplierWitness>)> {
    let mut sets = Vec::new();
    let mut current = Vec::with_capacity(k);
    collect_sets(1, max_d, k, &mut current, &mut sets);
    sets.into_par_iter()
        .map(|set| {
            let d = DistanceSet::new(set.iter().copied()).expect("generated sets are valid");
            let w = conjecture_witness(&d, n_max).expect("generated sets have gcd 1");
            (set, w)
        })
        .collect()
}

fn collect_sets(from: u64, max_d: u64, k: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if current.len() == k {
        if gcd_of(current) == 1 {
            out.push(current.clone());
        }
        return;
    }
    for v in from..=max_d {
        current.push(v);
        collect_sets(v + 1, max_d, k, current, out);
        current.pop();
    }
}

fn gcd_of(xs: &[u64]) -> u64 {
    xs.iter().copied().fold(0, num_integer::gcd)
}

/// Exact maximum of min_d ||t*d|| together with an achieving time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapValue {
    pub value: Ratio<u64>,
    pub achieving_time: Ratio<u64>,
}

pub fn continuous_gap(d: &DistanceSet) -> GapValue {
    let elems = d.elements();
    let mut denoms: Vec<u64> = Vec::new();
    for (i, &a) in elems.iter().enumerate() {
        for &b in &elems[i..] {
            denoms.push(a + b);
        }
    }
    denoms.sort_unstable();
    denoms.dedup();
    let mut best = GapValue {
        value: Ratio::new(0, 1),
        achieving_time: Ratio::new(0, 1),
    };
    for q in denoms {
        for a in 0..q {
            let min_sym = elems.iter().map(|&x| sym(a * (x % q), q)).min().unwrap();
            let value = Ratio::new(min_sym, q);
            if value > best.value {
                best = GapValue {
                    value,
                    achieving_time: Ratio::new(a, q),
                };
            }
        }
    }
    debug_assert!(best.value <= Ratio::new(1, 2));
    best
}
