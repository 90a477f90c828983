use thiserror::Error;

/// Errors shared across the library. Every variant corresponds to a rejected
/// precondition; operations never panic on bad input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("{0} is not an odd prime >= 3")]
    NotOddPrime(u64),
    #[error("p^(m+1) overflows 64 bits for p={p}, m={m}")]
    ModulusOverflow { p: u64, m: u32 },
    #[error("valuation and leading residue are undefined at 0")]
    ZeroArgument,
    #[error("distance set must be nonempty")]
    EmptyDistanceSet,
    #[error("distance set elements must be positive")]
    ZeroDistance,
    #[error("duplicate distance {0}")]
    DuplicateDistance(u64),
    #[error("class {class} out of range for modulus {modulus}")]
    ClassOutOfRange { class: u64, modulus: u64 },
    #[error("class {class} is divisible by the context prime {p}")]
    ClassNotCoprime { class: u64, p: u64 },
    #[error("level {level} exceeds the decomposition height {max}")]
    LevelOutOfRange { level: u32, max: u32 },
    #[error("forbidden-family keys do not match the level decomposition")]
    KeyMismatch,
    #[error("arc value {arc} out of range for prime {p}")]
    ArcOutOfRange { arc: u64, p: u64 },
    #[error("counting condition violated at levels {0:?} (level, sum, bound)")]
    CountingViolated(Vec<(u32, u64, u64)>),
    #[error("element {element} has symmetric residue {residue} < {modulus}/{p}")]
    ResidueTooSmall {
        element: u64,
        residue: u64,
        modulus: u64,
        p: u64,
    },
    #[error("level {level} holds {size} elements, more than (p-1)/2 = {bound}")]
    LevelTooLarge { level: u32, size: u64, bound: u64 },
    #[error("cutoff level must lie in 1..={max}, got {given}")]
    BadCutoff { given: u32, max: u32 },
    #[error("witness scale factor must be positive")]
    ZeroScale,
    #[error("distance set has gcd {0} != 1")]
    GcdNotOne(u64),
    #[error("cache file is malformed: {0}")]
    BadCache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
