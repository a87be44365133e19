//! Cartesian Hessians from central differences of analytic forces.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{Potential, PotentialError};
use crate::structure::AtomicStructure;

/// Displacement used when no step is given (Å).
pub const DEFAULT_FD_STEP: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct FdHessian {
    /// Symmetrized 3N×3N Hessian (eV/Å²), index 3·atom + axis.
    pub matrix: DMatrix<f64>,
    /// Largest |H_ij − H_ji| before symmetrization.
    pub asymmetry: f64,
}

/// Central-difference Hessian from forces on the five-point stencil
/// x ± h, x ± 2h along each coordinate (error O(h⁴)). Columns are evaluated
/// in parallel.
pub fn hessian_finite_difference(
    structure: &AtomicStructure,
    potential: &dyn Potential,
    h: f64,
) -> Result<FdHessian, PotentialError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(PotentialError::InvalidParameter(format!("finite-difference step {h}")));
    }
    let m = 3 * structure.len();
    let columns: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|col| {
            let (atom, axis) = (col / 3, col % 3);
            let displaced = |t: f64| {
                let mut s = structure.clone();
                s.positions[atom][axis] += t;
                potential.forces(&s)
            };
            let (p1, m1) = (displaced(h)?, displaced(-h)?);
            let (p2, m2) = (displaced(2.0 * h)?, displaced(-2.0 * h)?);
            Ok((0..m)
                .map(|r| {
                    let (a, k) = (r / 3, r % 3);
                    -(8.0 * (p1[a][k] - m1[a][k]) - (p2[a][k] - m2[a][k])) / (12.0 * h)
                })
                .collect())
        })
        .collect::<Result<_, PotentialError>>()?;
    let raw = DMatrix::from_fn(m, m, |i, j| columns[j][i]);
    let asymmetry = (0..m)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (raw[(i, j)] - raw[(j, i)]).abs())
        .fold(0.0, f64::max);
    let matrix = (&raw + raw.transpose()) * 0.5;
    Ok(FdHessian { matrix, asymmetry })
}
