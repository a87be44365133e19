//! Screening toolkit for molecular single-photon emitters embedded in
//! organic host crystals.

// negated comparisons are used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chem;
pub mod elements;
pub mod embedding;
pub mod ml;
pub mod potential;
pub mod spectro;
pub mod structure;
pub mod vibronic;
pub mod units;

pub use elements::Element;
pub use structure::AtomicStructure;

/// Library version, recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
