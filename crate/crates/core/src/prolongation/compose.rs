//! Box-product composition of factor prolongations.
//!
//! For `P = P1 ⊗ P2` between `G1¹ □ G2¹` and `G1² □ G2²`,
//!
//! ```text
//! D_{P,α}(box) ≤ √(n₂⁽¹⁾) D_{P1,α} + √(n₁⁽¹⁾) D_{P2,α}
//! ```
//!
//! where `n₁⁽¹⁾`, `n₂⁽¹⁾` are the coarse sizes of the two factors (so that
//! `√n` is the Frobenius norm of the opposite factor map).

use super::{diffusion_distance, ProlongationMap, Provenance, ORTHO_TOL};
use crate::graph::{box_product, laplacian, Graph};
use crate::linalg::{kron_product, orthogonality_defect};
use crate::{Error, Result};

/// Slack allowed when checking the bound numerically.
pub const BOUND_SLACK: f64 = 1e-9;

/// A factor prolongation together with the graphs it maps between.
#[derive(Clone, Copy, Debug)]
pub struct FactorMap<'a> {
    pub map: &'a ProlongationMap,
    pub coarse: &'a Graph,
    pub fine: &'a Graph,
}

#[derive(Clone, Debug)]
pub struct BoxComposition {
    pub map: ProlongationMap,
    pub coarse: Graph,
    pub fine: Graph,
    /// `D_{P1⊗P2,α}` on the product graphs.
    pub distance: f64,
    /// `√(n₂⁽¹⁾) D_{P1,α} + √(n₁⁽¹⁾) D_{P2,α}`.
    pub bound: f64,
    pub factor_distances: (f64, f64),
}

pub fn compose_box(first: FactorMap<'_>, second: FactorMap<'_>) -> Result<BoxComposition> {
    for f in [&first, &second] {
        let defect = orthogonality_defect(&f.map.p);
        if defect >= ORTHO_TOL {
            return Err(Error::Constraint(defect));
        }
    }
    let alpha = first.map.alpha;
    if (alpha - second.map.alpha).abs() > 1e-12 * alpha.abs().max(second.map.alpha.abs()) {
        return Err(Error::Composition(format!(
            "factor maps use different alpha ({} vs {})",
            first.map.alpha, second.map.alpha
        )));
    }
    let d1 = diffusion_distance(&first.map.p, first.coarse, first.fine, alpha)?;
    let d2 = diffusion_distance(&second.map.p, second.coarse, second.fine, alpha)?;
    let bound = (second.coarse.n() as f64).sqrt() * d1 + (first.coarse.n() as f64).sqrt() * d2;

    let coarse = box_product(first.coarse, second.coarse);
    let fine = box_product(first.fine, second.fine);
    let p = kron_product(&first.map.p, &second.map.p);
    let distance = diffusion_distance(&p, &coarse, &fine, alpha)?;
    if distance > bound + BOUND_SLACK {
        return Err(Error::Numerical(format!(
            "product distance {distance:e} exceeds factor bound {bound:e}"
        )));
    }
    let sqrt_a = alpha.sqrt();
    let objective_value = {
        let r = (&p * laplacian(&coarse).data) / sqrt_a - (laplacian(&fine).data * &p) * sqrt_a;
        r.norm_squared()
    };
    Ok(BoxComposition {
        map: ProlongationMap {
            p,
            provenance: Provenance::KroneckerComposed,
            objective_value,
            alpha,
            beta: (coarse.n() as f64) / (fine.n() as f64),
        },
        coarse,
        fine,
        distance,
        bound,
        factor_distances: (d1, d2),
    })
}
