//! Multiscale autoencoder training.
//!
//! A hierarchy holds one parameter set per level. Level `l` is a copy of the
//! finest network with every layer coarsened `l` times by a prolongation
//! strategy. The network actually evaluated is the composite
//!
//! ```text
//! Θ_j = Σ_l Pro_{l→0} θ⁽ˡ⁾_j
//! ```
//!
//! and coarse levels are trained with gradients restricted from `dE/dΘ_j`.

mod chain;
mod ledger;
mod network;
mod train;

pub use chain::{restrict_gradient, MsannHierarchy, ProResChain};
pub use ledger::{CostLedger, LedgerEntry};
pub use network::{backprop_fine, forward, loss_mse, LayerSpec, Network, ParamRole};
pub use train::{cost_of_schedule, visit_sequence, MsannRun, RmsProp, TrainConfig};

use nalgebra::{DMatrix, DVector};

use crate::linalg::shape_str;
use crate::{Error, Result};

fn check_weight_maps(w: &DMatrix<f64>, pin: &DMatrix<f64>, pout: &DMatrix<f64>, fine_side: bool) -> Result<()> {
    let (r, c) = if fine_side {
        (pin.nrows(), pout.nrows())
    } else {
        (pin.ncols(), pout.ncols())
    };
    if w.shape() != (r, c) {
        return Err(Error::Shape(format!(
            "W is {} but P_in is {} and P_out is {}",
            shape_str(w),
            shape_str(pin),
            shape_str(pout)
        )));
    }
    Ok(())
}

/// `P_in W P_outᵀ`.
pub fn pro_weight(w: &DMatrix<f64>, pin: &DMatrix<f64>, pout: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_weight_maps(w, pin, pout, false)?;
    Ok(pin * w * pout.transpose())
}

/// `P_inᵀ W P_out`.
pub fn res_weight(w: &DMatrix<f64>, pin: &DMatrix<f64>, pout: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_weight_maps(w, pin, pout, true)?;
    Ok(pin.tr_mul(w) * pout)
}

/// `P b`.
pub fn pro_bias(b: &DVector<f64>, p: &DMatrix<f64>) -> Result<DVector<f64>> {
    if b.len() != p.ncols() {
        return Err(Error::Shape(format!("bias has {} entries, P is {}", b.len(), shape_str(p))));
    }
    Ok(p * b)
}

/// `Pᵀ b`.
pub fn res_bias(b: &DVector<f64>, p: &DMatrix<f64>) -> Result<DVector<f64>> {
    if b.len() != p.nrows() {
        return Err(Error::Shape(format!("bias has {} entries, P is {}", b.len(), shape_str(p))));
    }
    Ok(p.tr_mul(b))
}
