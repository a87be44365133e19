//! XYZ reading and writing, with the extended-XYZ `Lattice="..."` and
//! `pbc="..."` comment keys.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::{AtomicStructure, StructureError};
use crate::elements::Element;

fn xyz_err(line: usize, message: impl Into<String>) -> StructureError {
    StructureError::Xyz {
        line,
        message: message.into(),
    }
}

fn quoted_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let lower = comment.to_ascii_lowercase();
    let start = lower.find(&format!("{}=\"", key.to_ascii_lowercase()))? + key.len() + 2;
    let len = comment[start..].find('"')?;
    Some(&comment[start..start + len])
}

/// Parses XYZ text. Only the first frame is read.
pub fn parse_xyz(text: &str) -> Result<AtomicStructure, StructureError> {
    let mut lines = text.lines();
    let count_line = lines.next().ok_or_else(|| xyz_err(1, "missing atom count"))?;
    let count: usize = count_line
        .trim()
        .parse()
        .map_err(|_| xyz_err(1, format!("invalid atom count `{}`", count_line.trim())))?;
    let comment = lines.next().unwrap_or("");

    let mut elements = Vec::with_capacity(count);
    let mut positions = Vec::with_capacity(count);
    for i in 0..count {
        let line_no = i + 3;
        let line = lines
            .next()
            .ok_or_else(|| xyz_err(line_no, format!("expected {count} atoms, found {i}")))?;
        let mut fields = line.split_whitespace();
        let sym = fields
            .next()
            .ok_or_else(|| xyz_err(line_no, format!("expected {count} atoms, found {i}")))?;
        let element = Element::from_symbol(sym)
            .ok_or_else(|| xyz_err(line_no, format!("unknown element `{sym}`")))?;
        let mut xyz = [0.0; 3];
        for v in &mut xyz {
            let tok = fields
                .next()
                .ok_or_else(|| xyz_err(line_no, "missing coordinate"))?;
            *v = tok
                .parse()
                .map_err(|_| xyz_err(line_no, format!("non-numeric coordinate `{tok}`")))?;
        }
        elements.push(element);
        positions.push(Vector3::from(xyz));
    }
    if let Some((k, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        // a second frame starts with another count line; anything else is an error
        if extra.trim().parse::<usize>().is_err() {
            return Err(xyz_err(
                count + 3 + k,
                format!("count line says {count} atoms but more rows follow"),
            ));
        }
    }

    let structure = AtomicStructure::new(elements, positions)?;
    match quoted_value(comment, "Lattice") {
        None => Ok(structure),
        Some(lattice) => {
            let vals: Vec<f64> = lattice
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| xyz_err(2, "non-numeric Lattice entry"))?;
            if vals.len() != 9 {
                return Err(xyz_err(2, format!("Lattice needs 9 numbers, got {}", vals.len())));
            }
            let cell = Matrix3::from_row_slice(&vals);
            let pbc = match quoted_value(comment, "pbc") {
                None => [true; 3],
                Some(flags) => {
                    let f: Vec<bool> = flags
                        .split_whitespace()
                        .map(|t| matches!(t, "T" | "t" | "True" | "true" | "1"))
                        .collect();
                    if f.len() != 3 {
                        return Err(xyz_err(2, "pbc needs 3 flags"));
                    }
                    [f[0], f[1], f[2]]
                }
            };
            structure.with_cell(cell, pbc)
        }
    }
}

pub fn read_xyz(path: impl AsRef<Path>) -> Result<AtomicStructure, StructureError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| StructureError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_xyz(&text)
}

/// XYZ text with 8 decimal places. `comment` must not contain newlines.
pub fn xyz_string(structure: &AtomicStructure, comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", structure.len());
    let mut header = String::new();
    if let Some(cell) = structure.cell {
        let vals: Vec<String> = cell.transpose().iter().map(|v| format!("{v:.8}")).collect();
        let flags: Vec<&str> = structure.pbc.iter().map(|&p| if p { "T" } else { "F" }).collect();
        let _ = write!(
            header,
            "Lattice=\"{}\" Properties=species:S:1:pos:R:3 pbc=\"{}\"",
            vals.join(" "),
            flags.join(" ")
        );
    }
    if !comment.is_empty() {
        if !header.is_empty() {
            header.push(' ');
        }
        header.push_str(&comment.replace(['\n', '\r'], " "));
    }
    let _ = writeln!(out, "{header}");
    for (e, p) in structure.elements.iter().zip(&structure.positions) {
        let _ = writeln!(out, "{:<2} {:>16.8} {:>16.8} {:>16.8}", e.symbol(), p.x, p.y, p.z);
    }
    out
}

pub fn write_xyz(
    structure: &AtomicStructure,
    path: impl AsRef<Path>,
    comment: &str,
) -> Result<(), StructureError> {
    let path = path.as_ref();
    fs::write(path, xyz_string(structure, comment)).map_err(|source| StructureError::Io {
        path: path.display().to_string(),
        source,
    })
}
