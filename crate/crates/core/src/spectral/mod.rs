//! Laplacian spectra and the eigenvalue-matching view of the diffusion term.
//!
//! For symmetric `L_i = U_i Λ_i U_iᵀ` and `P̃ = U_2ᵀ P U_1`,
//!
//! ```text
//! ‖(1/√α) P L_1 − √α L_2 P‖_F = ‖(1/√α) P̃ Λ_1 − √α Λ_2 P̃‖_F
//! ```
//!
//! so a {0,1} matching between the two spectra maps back to an orthonormal
//! `P = U_2 M U_1ᵀ` with the same diffusion cost.

mod hungarian;
mod matching;

pub use matching::{
    box_spectrum, kron_matching, match_bruteforce, match_munkres, BruteForceMatcher, EigenMatcher, EigenMatching,
    MatcherRegistry, MunkresMatcher, BRUTEFORCE_LIMIT,
};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::linalg::{asymmetry, shape_str};
use crate::{Error, Result};

/// Tolerance below which an input counts as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues within this distance are treated as equal.
pub const EIGEN_EQ_TOL: f64 = 1e-9;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn diag(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues))
    }

    /// `U Λ Uᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.eigenvectors * self.diag() * self.eigenvectors.transpose()
    }
}

/// Symmetric eigendecomposition with descending eigenvalues and a fixed
/// sign convention: the first component of each eigenvector with magnitude
/// above `1e-10` is positive. Deterministic for identical input.
pub fn eigendecompose(m: &DMatrix<f64>) -> Result<Spectrum> {
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).clone_owned();
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-10) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(k, &col);
    }
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// `‖(1/√α) P̃ Λ_1 − √α Λ_2 P̃‖_F` with `P̃` of shape `n2 × n1`.
pub fn spectral_diffusion_cost(ptilde: &DMatrix<f64>, lam1: &[f64], lam2: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if ptilde.nrows() != lam2.len() || ptilde.ncols() != lam1.len() {
        return Err(Error::Shape(format!(
            "P̃ is {} but spectra have lengths n1 = {}, n2 = {}",
            shape_str(ptilde),
            lam1.len(),
            lam2.len()
        )));
    }
    let (a, c) = (1.0 / alpha.sqrt(), alpha.sqrt());
    let mut acc = 0.0;
    for j in 0..lam1.len() {
        for i in 0..lam2.len() {
            let r = ptilde[(i, j)] * (a * lam1[j] - c * lam2[i]);
            acc += r * r;
        }
    }
    Ok(acc.sqrt())
}

/// `P = U_2 M U_1ᵀ`, the graph-space map with the same diffusion cost as `m`.
pub fn matching_to_graph_space(m: &EigenMatching, spec1: &Spectrum, spec2: &Spectrum) -> Result<DMatrix<f64>> {
    spectral_to_graph_space(&m.matrix(), spec1, spec2)
}

/// `P = U_2 P̃ U_1ᵀ` for an arbitrary spectral-space matrix.
pub fn spectral_to_graph_space(ptilde: &DMatrix<f64>, spec1: &Spectrum, spec2: &Spectrum) -> Result<DMatrix<f64>> {
    if ptilde.nrows() != spec2.len() || ptilde.ncols() != spec1.len() {
        return Err(Error::Shape(format!(
            "matching is {} but spectra have sizes {} and {}",
            shape_str(ptilde),
            spec1.len(),
            spec2.len()
        )));
    }
    Ok(&spec2.eigenvectors * ptilde * spec1.eigenvectors.transpose())
}

/// `P̃ = U_2ᵀ P U_1`.
pub fn graph_to_spectral_space(p: &DMatrix<f64>, spec1: &Spectrum, spec2: &Spectrum) -> Result<DMatrix<f64>> {
    if p.nrows() != spec2.len() || p.ncols() != spec1.len() {
        return Err(Error::Shape(format!(
            "P is {} but spectra have sizes {} and {}",
            shape_str(p),
            spec1.len(),
            spec2.len()
        )));
    }
    Ok(spec2.eigenvectors.tr_mul(p) * &spec1.eigenvectors)
}

/// Laplacian eigenvalues of `C_n` in analytic index order,
/// `λ_j = 2 cos(2πj/n) − 2` for `j = 0..n`.
pub fn cycle_laplacian_spectrum(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos() - 2.0)
        .collect()
}

/// The `2n × n` index-doubling subpermutation with `P[2j][j] = 1`. In the
/// analytic index order of [`cycle_laplacian_spectrum`] it matches every
/// eigenvalue of `C_n` to an equal eigenvalue of `C_2n`.
pub fn zero_cost_cycle_map(n: usize) -> Result<DMatrix<f64>> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("cycle map needs n >= 3, got {n}")));
    }
    let mut p = DMatrix::zeros(2 * n, n);
    for j in 0..n {
        p[(2 * j, j)] = 1.0;
    }
    Ok(p)
}
