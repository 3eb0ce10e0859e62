//! Approximate encoded permutations for cheap reversible arithmetic.
//!
//! A register can hold a value in many equivalent encodings, spread over a
//! *coset value* that a quantum circuit would keep in superposition. A cheap
//! permutation of the encoded space then approximates an expensive
//! permutation of the values, failing only on a small fraction of the coset
//! values. This crate provides:
//!
//! - [`aep`]: the encoded-permutation abstraction, exact deviation
//!   computation by enumeration, and the composition / concatenation /
//!   first-piece-concatenation combinators.
//! - [`rep`]: the coset representation of modular integers and carry
//!   runways, including multi-runway layouts and runways nested inside the
//!   coset representation.
//! - [`circuit`]: a NOT/CNOT/Toffoli circuit simulator with ripple-carry,
//!   constant, runway-attachment, and piecewise adders — an independent
//!   gate-level oracle for the representations.
//! - [`quantum`]: pure-state verification that deviation bounds trace
//!   distance, plus the subvector dot-product inequality it rests on.
//! - [`cost`]: closed-form Toffoli/depth/space/volume estimates for large
//!   adders, with CSV sweeps across register sizes and adder kinds.
//!
//! ```
//! use aep_core::rep::{make_coset_aep, CosetParams};
//!
//! let aep = make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 1 }).unwrap();
//! let report = aep.deviation().unwrap();
//! assert!(report.within_bound());
//! ```

pub mod aep;
pub mod circuit;
pub mod cost;
pub mod error;
pub mod perm;
pub mod quantum;
pub mod rep;

pub use aep::{Decoded, DeviationReport, EncodedPermutation, Rational};
pub use error::{Error, Result};
pub use perm::{Permutation, DENSE_LIMIT};
