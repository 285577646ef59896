//! Small shared utilities: bit strings, seeded randomness, statistics.

pub mod bits;
pub mod encode;
pub mod rng;
pub mod stats;

pub use bits::BitString;
