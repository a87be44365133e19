//! Periodic-table data shared by the SMILES parser and the structure code.
//!
//! Masses are IUPAC standard atomic weights (amu); covalent radii are the
//! Cordero et al. single-bond values (Å) used as "natural" neighbor cutoffs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

struct ElementData {
    symbol: &'static str,
    mass: f64,
    covalent_radius: f64,
}

macro_rules! elements {
    ($(($sym:literal, $mass:literal, $rad:literal)),* $(,)?) => {
        &[$(ElementData { symbol: $sym, mass: $mass, covalent_radius: $rad }),*]
    };
}

static TABLE: &[ElementData] = elements![
    ("H", 1.008, 0.31),
    ("He", 4.002602, 0.28),
    ("Li", 6.94, 1.28),
    ("Be", 9.0121831, 0.96),
    ("B", 10.81, 0.84),
    ("C", 12.011, 0.76),
    ("N", 14.007, 0.71),
    ("O", 15.999, 0.66),
    ("F", 18.998403163, 0.57),
    ("Ne", 20.1797, 0.58),
    ("Na", 22.98976928, 1.66),
    ("Mg", 24.305, 1.41),
    ("Al", 26.9815385, 1.21),
    ("Si", 28.085, 1.11),
    ("P", 30.973761998, 1.07),
    ("S", 32.06, 1.05),
    ("Cl", 35.45, 1.02),
    ("Ar", 39.948, 1.06),
    ("K", 39.0983, 2.03),
    ("Ca", 40.078, 1.76),
    ("Sc", 44.955908, 1.70),
    ("Ti", 47.867, 1.60),
    ("V", 50.9415, 1.53),
    ("Cr", 51.9961, 1.39),
    ("Mn", 54.938044, 1.39),
    ("Fe", 55.845, 1.32),
    ("Co", 58.933194, 1.26),
    ("Ni", 58.6934, 1.24),
    ("Cu", 63.546, 1.32),
    ("Zn", 65.38, 1.22),
    ("Ga", 69.723, 1.22),
    ("Ge", 72.630, 1.20),
    ("As", 74.921595, 1.19),
    ("Se", 78.971, 1.20),
    ("Br", 79.904, 1.20),
    ("Kr", 83.798, 1.16),
    ("Rb", 85.4678, 2.20),
    ("Sr", 87.62, 1.95),
    ("Y", 88.90584, 1.90),
    ("Zr", 91.224, 1.75),
    ("Nb", 92.90637, 1.64),
    ("Mo", 95.95, 1.54),
    ("Tc", 97.90721, 1.47),
    ("Ru", 101.07, 1.46),
    ("Rh", 102.90550, 1.42),
    ("Pd", 106.42, 1.39),
    ("Ag", 107.8682, 1.45),
    ("Cd", 112.414, 1.44),
    ("In", 114.818, 1.42),
    ("Sn", 118.710, 1.39),
    ("Sb", 121.760, 1.39),
    ("Te", 127.60, 1.38),
    ("I", 126.90447, 1.39),
    ("Xe", 131.293, 1.40),
];

/// A chemical element, stored as its atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Element(u8);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown element symbol `{0}`")]
pub struct UnknownElement(pub String);

impl Element {
    pub const H: Element = Element(1);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const S: Element = Element(16);

    /// Looks up an element by its exact (case-sensitive) symbol.
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE
            .iter()
            .position(|e| e.symbol == symbol)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        (z >= 1 && (z as usize) <= TABLE.len()).then_some(Element(z))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    fn data(self) -> &'static ElementData {
        &TABLE[self.0 as usize - 1]
    }

    pub fn symbol(self) -> &'static str {
        self.data().symbol
    }

    /// Standard atomic weight in amu.
    pub fn mass(self) -> f64 {
        self.data().mass
    }

    /// Single-bond covalent radius in Å.
    pub fn covalent_radius(self) -> f64 {
        self.data().covalent_radius
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Element {
    type Err = UnknownElement;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Element::from_symbol(s).ok_or_else(|| UnknownElement(s.to_string()))
    }
}

impl TryFrom<String> for Element {
    type Error = UnknownElement;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Element> for String {
    fn from(e: Element) -> String {
        e.symbol().to_string()
    }
}
