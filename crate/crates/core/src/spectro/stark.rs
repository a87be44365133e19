use serde::{Deserialize, Serialize};

use crate::units::{stark_linear_mhz_per_au, stark_quadratic_mhz_per_au};

/// Ground/excited-state differences in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkInput {
    /// |δμ| (e·a₀).
    pub dipole_au: f64,
    /// δα (e²a₀²/E_h); may be negative.
    pub polarizability_au: f64,
}

/// Δν(E) = a|E| + b|E|² with E in kV/cm and Δν in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkCoefficients {
    /// MHz·kV⁻¹·cm
    pub a: f64,
    /// MHz·kV⁻²·cm²
    pub b: f64,
}

impl StarkCoefficients {
    pub fn shift_mhz(&self, field_kv_per_cm: f64) -> f64 {
        let e = field_kv_per_cm.abs();
        self.a * e + self.b * e * e
    }
}

/// a = |δμ|·e·a₀/h and b = −½·δα·(e²a₀²/E_h)/h, both scaled to MHz and kV/cm.
pub fn stark_coefficients(input: &StarkInput) -> StarkCoefficients {
    StarkCoefficients {
        a: input.dipole_au.abs() * stark_linear_mhz_per_au(),
        b: -0.5 * input.polarizability_au * stark_quadratic_mhz_per_au(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rows() {
        for (mu, alpha, a, b) in [(0.0616, 612.15, 78.84, -0.0761), (0.0668, 617.43, 85.44, -0.0768), (0.0458, 644.28, 58.58, -0.0801)] {
            let c = stark_coefficients(&StarkInput { dipole_au: mu, polarizability_au: alpha });
            assert!((c.a / a - 1.0).abs() < 0.01, "{} vs {a}", c.a);
            assert!((c.b / b - 1.0).abs() < 0.01, "{} vs {b}", c.b);
        }
        let zero = stark_coefficients(&StarkInput { dipole_au: 0.0, polarizability_au: 600.0 });
        assert_eq!(zero.a, 0.0);
    }

    #[test]
    fn shift_is_quadratic() {
        let c = stark_coefficients(&StarkInput { dipole_au: 0.05, polarizability_au: 600.0 });
        let h = 0.5;
        for e in [1.0, 3.0, 10.0] {
            let second = c.shift_mhz(e + h) - 2.0 * c.shift_mhz(e) + c.shift_mhz(e - h);
            assert!((second / (h * h) - 2.0 * c.b).abs() < 1e-9);
        }
    }
}
