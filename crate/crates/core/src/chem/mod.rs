//! Molecular graphs from SMILES, canonical strings, circular fingerprints
//! and similarity measures.

pub mod aromaticity;
pub mod canon;
pub mod fingerprint;
pub mod graph;
pub mod similarity;
pub mod smiles;
pub mod table;

pub use canon::canonicalize;
pub use fingerprint::{morgan_fingerprint, Fingerprint, FingerprintError};
pub use graph::{Atom, Bond, BondOrder, MolecularGraph};
pub use similarity::{
    linear_kernel_similarity, rank_by_similarity, tanimoto, DescriptorVector, RankedEntry,
    Ranking, SimilarityError, SimilaritySummary,
};
pub use smiles::{parse_smiles, SmilesError};
pub use table::{detect_delimiter, load_smiles_table, parse_smiles_table, SkippedRow, SmilesEntry, SmilesTable, TableError, TableStatus};
