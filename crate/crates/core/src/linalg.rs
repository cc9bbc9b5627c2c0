//! Dense matrix helpers shared by every module.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Block Kronecker product `a ⊗ b`.
pub fn kron_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Kronecker sum `a ⊗ I_b + I_a ⊗ b` of two square matrices.
pub fn kron_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::Shape(format!(
            "kron_sum needs square inputs, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let ia = DMatrix::<f64>::identity(a.nrows(), a.nrows());
    let ib = DMatrix::<f64>::identity(b.nrows(), b.nrows());
    Ok(a.kronecker(&ib) + ia.kronecker(b))
}

/// `‖PᵀP − I‖_F`.
pub fn orthogonality_defect(p: &DMatrix<f64>) -> f64 {
    let gram = p.tr_mul(p);
    let n = gram.nrows();
    (gram - DMatrix::<f64>::identity(n, n)).norm()
}

/// Largest `|m[i][j] - m[j][i]|`; infinite for non-square input.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Q factor of a thin QR decomposition, with column signs chosen so that
/// the R factor has a nonnegative diagonal. This is the retraction used on
/// the Stiefel manifold.
pub fn qr_orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Seeded random `rows × cols` matrix with orthonormal columns
/// (orthonormalized Gaussian).
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if cols > rows || cols == 0 {
        return Err(Error::Shape(format!(
            "cannot build a {rows}x{cols} matrix with orthonormal columns"
        )));
    }
    let g = DMatrix::<f64>::from_fn(rows, cols, |_, _| rng.sample(StandardNormal));
    Ok(qr_orthonormalize(&g))
}

pub(crate) fn shape_str(m: &DMatrix<f64>) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kron_identities() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(kron_product(&i2, &i3), DMatrix::<f64>::identity(6, 6));

        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let two = DMatrix::from_element(1, 1, 2.0);
        assert_eq!(
            kron_product(&swap, &two),
            DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0])
        );
    }

    #[test]
    fn kron_sum_rejects_rectangular() {
        let a = DMatrix::<f64>::zeros(2, 3);
        let b = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(kron_sum(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(kron_sum(&b, &a), Err(Error::Shape(_))));
    }

    #[test]
    fn random_orthonormal_is_orthonormal_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_orthonormal(9, 4, &mut rng).unwrap();
        assert!(orthogonality_defect(&p) < 1e-12);
        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(p, random_orthonormal(9, 4, &mut rng2).unwrap());
        assert!(random_orthonormal(3, 4, &mut rng).is_err());
    }

    #[test]
    fn qr_has_positive_r_diagonal() {
        let m = DMatrix::from_row_slice(3, 2, &[-2.0, 1.0, 0.0, -3.0, 1.0, 1.0]);
        let q = qr_orthonormalize(&m);
        let r = q.tr_mul(&m);
        assert!(r[(0, 0)] > 0.0 && r[(1, 1)] > 0.0);
        assert!(orthogonality_defect(&q) < 1e-14);
    }
}
