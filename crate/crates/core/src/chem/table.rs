use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::MolecularGraph;
use super::smiles::parse_smiles;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed table: {0}")]
    Csv(#[from] csv::Error),
    #[error("table header lacks required column `{0}`")]
    MissingColumn(&'static str),
}

#[derive(Debug, Clone)]
pub struct SmilesEntry {
    pub id: String,
    pub smiles: String,
    pub graph: MolecularGraph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRow {
    /// 1-based line number in the file.
    pub line: u64,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableStatus {
    Loaded,
    Empty,
}

#[derive(Debug, Clone)]
pub struct SmilesTable {
    pub entries: Vec<SmilesEntry>,
    pub skipped: Vec<SkippedRow>,
    pub status: TableStatus,
}

impl SmilesTable {
    pub fn skipped_count(&self) -> usize {
        self.skipped.len()
    }
}

/// Tab for .tsv/.tab, comma for .csv, otherwise tab if the first line has one.
pub fn detect_delimiter(path: &Path, text: &str) -> u8 {
    let first = text.lines().next().unwrap_or("");
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => b'\t',
        Some("csv") => b',',
        _ if first.contains('\t') => b'\t',
        _ => b',',
    }
}

/// Reads a CSV or TSV file with `id` and `smiles` columns (header names are
/// case-insensitive). Rows whose SMILES fail to parse are skipped and
/// recorded.
pub fn load_smiles_table(path: impl AsRef<Path>) -> Result<SmilesTable, TableError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_smiles_table(&text, detect_delimiter(path, &text))
}

pub fn parse_smiles_table(text: &str, delimiter: u8) -> Result<SmilesTable, TableError> {
    if text.trim().is_empty() {
        return Ok(SmilesTable {
            entries: Vec::new(),
            skipped: Vec::new(),
            status: TableStatus::Empty,
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let find = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(TableError::MissingColumn(name))
    };
    let id_col = find("id")?;
    let smiles_col = find("smiles")?;

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record.get(id_col).unwrap_or("").to_string();
        let Some(smiles) = record.get(smiles_col) else {
            skipped.push(SkippedRow {
                line,
                id,
                reason: "missing smiles field".into(),
            });
            continue;
        };
        match parse_smiles(smiles) {
            Ok(graph) => entries.push(SmilesEntry {
                id,
                smiles: smiles.to_string(),
                graph,
            }),
            Err(e) => {
                log::warn!("skipping line {line} ({id}): {e}");
                skipped.push(SkippedRow {
                    line,
                    id,
                    reason: e.to_string(),
                });
            }
        }
    }
    let status = if entries.is_empty() {
        TableStatus::Empty
    } else {
        TableStatus::Loaded
    };
    Ok(SmilesTable {
        entries,
        skipped,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(ext: &str, body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn valid_tsv() {
        let f = write_tmp(".tsv", "id\tsmiles\na\tC\nb\tCCO\nc\tc1ccccc1\n");
        let t = load_smiles_table(f.path()).unwrap();
        assert_eq!(t.entries.len(), 3);
        assert_eq!(t.skipped_count(), 0);
        assert_eq!(t.status, TableStatus::Loaded);
    }

    #[test]
    fn malformed_row_skipped() {
        let f = write_tmp(".csv", "ID,SMILES\na,C\nb,C1CC\nc,CC\n");
        let t = load_smiles_table(f.path()).unwrap();
        assert_eq!(t.entries.len(), 2);
        assert_eq!(t.skipped_count(), 1);
        assert_eq!(t.skipped[0].id, "b");
        assert_eq!(t.skipped[0].line, 3);
    }

    #[test]
    fn empty_file() {
        let f = write_tmp(".csv", "");
        let t = load_smiles_table(f.path()).unwrap();
        assert!(t.entries.is_empty());
        assert_eq!(t.status, TableStatus::Empty);
    }

    #[test]
    fn missing_column_and_missing_file() {
        let f = write_tmp(".csv", "name,smiles\na,C\n");
        assert!(matches!(load_smiles_table(f.path()), Err(TableError::MissingColumn("id"))));
        assert!(matches!(load_smiles_table("/nonexistent/x.csv"), Err(TableError::Io { .. })));
    }
}
