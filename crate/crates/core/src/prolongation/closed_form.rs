//! Closed-form prolongation families.

use nalgebra::DMatrix;

use crate::linalg::kron_product;
use crate::{Error, Result};

/// Pair-aggregation stencil between `C_n1` and `C_2n1` (or paths): coarse
/// vertex `j` spreads equally over fine vertices `2j` and `2j + 1`,
/// `P[2j][j] = P[2j+1][j] = 1/√2`.
pub fn closed_form_local_1d(n1: usize) -> Result<DMatrix<f64>> {
    if n1 == 0 {
        return Err(Error::InvalidSize("closed-form stencil needs n1 >= 1".into()));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut p = DMatrix::zeros(2 * n1, n1);
    for j in 0..n1 {
        p[(2 * j, j)] = r;
        p[(2 * j + 1, j)] = r;
    }
    Ok(p)
}

/// `local_1d(n1) ⊗ local_1d(n1)`: the `(2n1)² × n1²` map between periodic
/// `n1 × n1` and `2n1 × 2n1` grids, each coarse cell spread over a 2×2 block.
pub fn closed_form_2d(n1: usize) -> Result<DMatrix<f64>> {
    let p = closed_form_local_1d(n1)?;
    Ok(kron_product(&p, &p))
}
