//! Exact arithmetic behind regular chromatic numbers of integer distance
//! sets. Everything here works over Z_N with integer comparisons only; no
//! floating point is involved anywhere.

pub mod chromatic;
pub mod error;
pub mod lemmas;
pub mod modular;
pub mod prime_filter;
pub mod seven_search;

pub use error::{Error, Result};
