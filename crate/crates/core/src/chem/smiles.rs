//! SMILES reader.
//!
//! Supported: organic-subset atoms (`B C N O P S F Cl Br I` and aromatic
//! `b c n o p s`), bracket atoms with isotope, chirality, hydrogen count,
//! charge and atom class, the bond symbols `- = # : / \`, branches, ring
//! closures (single digits and `%nn`) and `.` disconnections. Chirality and
//! directional bonds are recorded on the graph but carry no geometry.

use std::collections::BTreeMap;

use thiserror::Error;

use super::aromaticity::perceive_aromaticity;
use super::graph::{Atom, Bond, BondOrder, BondStereo, MolecularGraph};
use crate::elements::Element;

/// Parse failure; every variant carries the 0-based character position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    Empty,
    #[error("non-ASCII character at position {pos}")]
    NonAscii { pos: usize },
    #[error("unbalanced parentheses at position {pos}")]
    UnbalancedParentheses { pos: usize },
    #[error("unmatched ring closure {label} opened at position {pos}")]
    UnmatchedRingClosure { pos: usize, label: u32 },
    #[error("unknown element `{token}` at position {pos}")]
    UnknownElement { pos: usize, token: String },
    #[error("valence overflow on {element} at position {pos} (bond order sum {bond_sum})")]
    ValenceOverflow {
        pos: usize,
        element: String,
        bond_sum: u32,
    },
    #[error("unexpected character `{ch}` at position {pos}")]
    UnexpectedCharacter { pos: usize, ch: char },
    #[error("bond symbol at position {pos} is not followed by an atom")]
    DanglingBond { pos: usize },
    #[error("ring closure at position {pos} bonds an atom to itself")]
    SelfLoop { pos: usize },
    #[error("ring closure at position {pos} duplicates an existing bond")]
    DuplicateBond { pos: usize },
    #[error("conflicting bond symbols on ring closure at position {pos}")]
    ConflictingRingBond { pos: usize },
    #[error("aromatic bond at position {pos} joins a non-aromatic atom")]
    AromaticBondMismatch { pos: usize },
}

impl SmilesError {
    pub fn position(&self) -> Option<usize> {
        use SmilesError::*;
        match *self {
            Empty => None,
            NonAscii { pos }
            | UnbalancedParentheses { pos }
            | UnmatchedRingClosure { pos, .. }
            | UnknownElement { pos, .. }
            | ValenceOverflow { pos, .. }
            | UnexpectedCharacter { pos, .. }
            | DanglingBond { pos }
            | SelfLoop { pos }
            | DuplicateBond { pos }
            | ConflictingRingBond { pos }
            | AromaticBondMismatch { pos } => Some(pos),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PendingBond {
    order: BondOrder,
    stereo: Option<BondStereo>,
    pos: usize,
}

struct OpenRing {
    atom: usize,
    bond: Option<PendingBond>,
    pos: usize,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    atom_pos: Vec<usize>,
    bracket: Vec<bool>,
    bonds: Vec<Bond>,
}

/// Parses a SMILES string, completes implicit hydrogens and perceives
/// aromaticity so that Kekulé and aromatic spellings give the same graph.
pub fn parse_smiles(text: &str) -> Result<MolecularGraph, SmilesError> {
    let mut graph = parse_smiles_raw(text)?;
    perceive_aromaticity(&mut graph);
    Ok(graph)
}

/// Parses without aromaticity perception (hydrogens are still completed).
pub fn parse_smiles_raw(text: &str) -> Result<MolecularGraph, SmilesError> {
    if text.is_empty() {
        return Err(SmilesError::Empty);
    }
    if let Some(pos) = text.bytes().position(|b| !b.is_ascii()) {
        return Err(SmilesError::NonAscii { pos });
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        atom_pos: Vec::new(),
        bracket: Vec::new(),
        bonds: Vec::new(),
    };
    p.run()?;
    p.complete_hydrogens()?;
    Ok(MolecularGraph::new(p.atoms, p.bonds, text))
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<PendingBond> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, OpenRing> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(SmilesError::UnexpectedCharacter { pos: start, ch: '(' });
                    };
                    if let Some(b) = pending {
                        return Err(SmilesError::DanglingBond { pos: b.pos });
                    }
                    branches.push((p, start));
                    self.pos += 1;
                }
                b')' => {
                    let Some((p, _)) = branches.pop() else {
                        return Err(SmilesError::UnbalancedParentheses { pos: start });
                    };
                    if let Some(b) = pending {
                        return Err(SmilesError::DanglingBond { pos: b.pos });
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if let Some(b) = pending {
                        return Err(SmilesError::DanglingBond { pos: b.pos });
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(SmilesError::UnexpectedCharacter { pos: start, ch: c as char });
                    }
                    let (order, stereo) = match c {
                        b'-' => (BondOrder::Single, None),
                        b'=' => (BondOrder::Double, None),
                        b'#' => (BondOrder::Triple, None),
                        b':' => (BondOrder::Aromatic, None),
                        b'/' => (BondOrder::Single, Some(BondStereo::Up)),
                        _ => (BondOrder::Single, Some(BondStereo::Down)),
                    };
                    pending = Some(PendingBond { order, stereo, pos: start });
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(atom) = prev else {
                        return Err(SmilesError::UnexpectedCharacter { pos: start, ch: c as char });
                    };
                    let label = self.ring_label()?;
                    let bond = pending.take();
                    if let Some(open) = rings.remove(&label) {
                        self.close_ring(open, atom, bond, start)?;
                    } else {
                        rings.insert(label, OpenRing { atom, bond, pos: start });
                    }
                }
                b'[' => {
                    let idx = self.bracket_atom()?;
                    self.attach(prev, idx, pending.take())?;
                    prev = Some(idx);
                }
                _ if c.is_ascii_alphabetic() => {
                    let idx = self.organic_atom()?;
                    self.attach(prev, idx, pending.take())?;
                    prev = Some(idx);
                }
                _ => return Err(SmilesError::UnexpectedCharacter { pos: start, ch: c as char }),
            }
        }
        if let Some(b) = pending {
            return Err(SmilesError::DanglingBond { pos: b.pos });
        }
        if let Some(&(_, pos)) = branches.last() {
            return Err(SmilesError::UnbalancedParentheses { pos });
        }
        if let Some((&label, open)) = rings.iter().next() {
            return Err(SmilesError::UnmatchedRingClosure { pos: open.pos, label });
        }
        Ok(())
    }

    fn ring_label(&mut self) -> Result<u32, SmilesError> {
        let start = self.pos;
        if self.peek() == Some(b'%') {
            self.pos += 1;
            let digits = self.text.get(self.pos..self.pos + 2).unwrap_or(&[]);
            if digits.len() != 2 || !digits.iter().all(u8::is_ascii_digit) {
                return Err(SmilesError::UnexpectedCharacter { pos: start, ch: '%' });
            }
            self.pos += 2;
            Ok(((digits[0] - b'0') * 10 + (digits[1] - b'0')) as u32)
        } else {
            let d = self.text[self.pos] - b'0';
            self.pos += 1;
            Ok(d as u32)
        }
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn push_bond(
        &mut self,
        a: usize,
        b: usize,
        bond: Option<PendingBond>,
        pos: usize,
    ) -> Result<(), SmilesError> {
        if a == b {
            return Err(SmilesError::SelfLoop { pos });
        }
        if self
            .bonds
            .iter()
            .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
        {
            return Err(SmilesError::DuplicateBond { pos });
        }
        let order = bond.map(|p| p.order).unwrap_or_else(|| self.default_order(a, b));
        if order == BondOrder::Aromatic && !(self.atoms[a].aromatic && self.atoms[b].aromatic) {
            return Err(SmilesError::AromaticBondMismatch { pos: bond.map_or(pos, |p| p.pos) });
        }
        self.bonds.push(Bond {
            a,
            b,
            order,
            stereo: bond.and_then(|p| p.stereo),
        });
        Ok(())
    }

    fn attach(
        &mut self,
        prev: Option<usize>,
        atom: usize,
        bond: Option<PendingBond>,
    ) -> Result<(), SmilesError> {
        match prev {
            Some(p) => self.push_bond(p, atom, bond, self.atom_pos[atom]),
            None => match bond {
                Some(b) => Err(SmilesError::DanglingBond { pos: b.pos }),
                None => Ok(()),
            },
        }
    }

    fn close_ring(
        &mut self,
        open: OpenRing,
        atom: usize,
        bond: Option<PendingBond>,
        pos: usize,
    ) -> Result<(), SmilesError> {
        let merged = match (open.bond, bond) {
            (Some(x), Some(y)) if x.order != y.order => {
                return Err(SmilesError::ConflictingRingBond { pos })
            }
            (Some(x), _) => Some(x),
            (None, y) => y,
        };
        self.push_bond(open.atom, atom, merged, pos)
    }

    fn add_atom(&mut self, atom: Atom, pos: usize, bracket: bool) -> usize {
        self.atoms.push(atom);
        self.atom_pos.push(pos);
        self.bracket.push(bracket);
        self.atoms.len() - 1
    }

    fn organic_atom(&mut self) -> Result<usize, SmilesError> {
        let start = self.pos;
        let c = self.text[self.pos];
        let two = self.text.get(self.pos..self.pos + 2);
        let (symbol, aromatic, len) = match (c, two) {
            (b'C', Some(b"Cl")) => ("Cl", false, 2),
            (b'B', Some(b"Br")) => ("Br", false, 2),
            (b'B', _) => ("B", false, 1),
            (b'C', _) => ("C", false, 1),
            (b'N', _) => ("N", false, 1),
            (b'O', _) => ("O", false, 1),
            (b'P', _) => ("P", false, 1),
            (b'S', _) => ("S", false, 1),
            (b'F', _) => ("F", false, 1),
            (b'I', _) => ("I", false, 1),
            (b'b', _) => ("B", true, 1),
            (b'c', _) => ("C", true, 1),
            (b'n', _) => ("N", true, 1),
            (b'o', _) => ("O", true, 1),
            (b'p', _) => ("P", true, 1),
            (b's', _) => ("S", true, 1),
            _ => {
                return Err(SmilesError::UnknownElement {
                    pos: start,
                    token: (c as char).to_string(),
                })
            }
        };
        self.pos += len;
        let mut atom = Atom::new(Element::from_symbol(symbol).expect("organic subset"));
        atom.aromatic = aromatic;
        Ok(self.add_atom(atom, start, false))
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| {
            std::str::from_utf8(&self.text[start..self.pos])
                .unwrap()
                .parse()
                .unwrap_or(u32::MAX)
        })
    }

    fn bracket_atom(&mut self) -> Result<usize, SmilesError> {
        let start = self.pos;
        self.pos += 1; // '['
        let isotope = self.number().map(|n| n.min(u16::MAX as u32) as u16);

        let sym_start = self.pos;
        let Some(c) = self.peek() else {
            return Err(SmilesError::UnbalancedParentheses { pos: start });
        };
        let (symbol, aromatic) = if c.is_ascii_uppercase() {
            let two = self
                .text
                .get(self.pos..self.pos + 2)
                .and_then(|s| std::str::from_utf8(s).ok())
                .filter(|s| s.as_bytes()[1].is_ascii_lowercase() && Element::from_symbol(s).is_some());
            match two {
                Some(s) => {
                    self.pos += 2;
                    (s.to_string(), false)
                }
                None => {
                    self.pos += 1;
                    ((c as char).to_string(), false)
                }
            }
        } else if c.is_ascii_lowercase() {
            let two = self.text.get(self.pos..self.pos + 2);
            match two {
                Some(b"se") => {
                    self.pos += 2;
                    ("Se".to_string(), true)
                }
                Some(b"as") => {
                    self.pos += 2;
                    ("As".to_string(), true)
                }
                _ if matches!(c, b'b' | b'c' | b'n' | b'o' | b'p' | b's') => {
                    self.pos += 1;
                    ((c as char).to_ascii_uppercase().to_string(), true)
                }
                _ => {
                    return Err(SmilesError::UnknownElement {
                        pos: sym_start,
                        token: (c as char).to_string(),
                    })
                }
            }
        } else {
            return Err(SmilesError::UnexpectedCharacter { pos: sym_start, ch: c as char });
        };
        let element = Element::from_symbol(&symbol).ok_or(SmilesError::UnknownElement {
            pos: sym_start,
            token: symbol.clone(),
        })?;

        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        atom.isotope = isotope;

        if self.peek() == Some(b'@') {
            let cs = self.pos;
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
            } else {
                // @TH1, @AL2, @SP3, @TB12, @OH25
                while self.peek().is_some_and(|c| c.is_ascii_uppercase()) {
                    self.pos += 1;
                }
                self.number();
            }
            atom.chirality =
                Some(String::from_utf8_lossy(&self.text[cs..self.pos]).into_owned());
        }

        if self.peek() == Some(b'H') {
            self.pos += 1;
            atom.explicit_h = self.number().map_or(1, |n| n.min(u8::MAX as u32) as u8);
        }

        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let unit: i32 = if sign == b'+' { 1 } else { -1 };
            let mut magnitude = 1i32;
            if let Some(n) = self.number() {
                magnitude = n.min(15) as i32;
            } else {
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    magnitude += 1;
                }
            }
            atom.charge = (unit * magnitude) as i8;
        }

        if self.peek() == Some(b':') {
            self.pos += 1;
            if self.number().is_none() {
                return Err(SmilesError::UnexpectedCharacter { pos: self.pos - 1, ch: ':' });
            }
        }

        match self.peek() {
            Some(b']') => self.pos += 1,
            Some(ch) => {
                return Err(SmilesError::UnexpectedCharacter { pos: self.pos, ch: ch as char })
            }
            None => return Err(SmilesError::UnbalancedParentheses { pos: start }),
        }
        Ok(self.add_atom(atom, start, true))
    }

    fn complete_hydrogens(&mut self) -> Result<(), SmilesError> {
        let mut sums = vec![0u32; self.atoms.len()];
        let mut multiple = vec![false; self.atoms.len()];
        for b in &self.bonds {
            sums[b.a] += b.order.valence();
            sums[b.b] += b.order.valence();
            if matches!(b.order, BondOrder::Double | BondOrder::Triple) {
                multiple[b.a] = true;
                multiple[b.b] = true;
            }
        }
        for i in 0..self.atoms.len() {
            if self.bracket[i] {
                continue;
            }
            let atom = &self.atoms[i];
            match default_hydrogens(atom.element, atom.aromatic, sums[i], multiple[i]) {
                Some(h) => self.atoms[i].implicit_h = h,
                None => {
                    return Err(SmilesError::ValenceOverflow {
                        pos: self.atom_pos[i],
                        element: atom.element.symbol().to_string(),
                        bond_sum: sums[i],
                    })
                }
            }
        }
        Ok(())
    }
}

fn standard_valences(element: Element) -> &'static [u32] {
    match element.symbol() {
        "B" => &[3],
        "C" => &[4],
        "N" => &[3, 5],
        "O" => &[2],
        "P" => &[3, 5],
        "S" => &[2, 4, 6],
        "F" | "Cl" | "Br" | "I" => &[1],
        _ => &[],
    }
}

/// Implicit hydrogen count of an organic-subset atom under the standard
/// valence model, or `None` if the bonds exceed every allowed valence.
///
/// Aromatic `b c n p` donate one electron to the ring, so one extra valence
/// unit is consumed unless the atom already carries an exocyclic multiple
/// bond; aromatic `o` and `s` donate a lone pair and consume none.
pub(crate) fn default_hydrogens(
    element: Element,
    aromatic: bool,
    bond_sum: u32,
    has_multiple_bond: bool,
) -> Option<u8> {
    let valences = standard_valences(element);
    if valences.is_empty() {
        return Some(0);
    }
    let extra = u32::from(
        aromatic && !has_multiple_bond && matches!(element.symbol(), "B" | "C" | "N" | "P"),
    );
    let need = bond_sum + extra;
    valences
        .iter()
        .find(|&&v| v >= need)
        .map(|&v| (v - need) as u8)
}

pub(crate) fn is_organic_subset(element: Element) -> bool {
    !standard_valences(element).is_empty()
}
