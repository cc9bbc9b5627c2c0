//! Riemannian gradient descent on the Stiefel manifold `{P : PᵀP = I}`.
//!
//! Each iteration projects the Euclidean gradient onto the tangent space,
//! `ξ = G − P sym(PᵀG)`, steps against it, and retracts with a sign-fixed
//! thin QR. Step lengths come from Armijo backtracking (halving).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{gradient_at, terms_at, ProlongationMap, ProlongationProblem, Provenance, ORTHO_TOL};
use crate::linalg::{orthogonality_defect, qr_orthonormalize};
use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Inputs this close to orthonormal are used verbatim.
const INIT_EXACT_TOL: f64 = 1e-12;
/// Inputs further than this from orthonormal are rejected.
const INIT_REJECT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaUpdate {
    /// Keep the problem's `α`, `β`.
    Fixed,
    /// After every accepted step, reset `α` (and `β` when `s > 0`) to their
    /// closed-form minimizers for the current `P`.
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub step_size: f64,
    pub tolerance: f64,
    pub alpha_update: AlphaUpdate,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step_size: 1.0,
            tolerance: 1e-7,
            alpha_update: AlphaUpdate::Fixed,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::Config("step_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub map: ProlongationMap,
    pub initial_objective: f64,
    pub iters: usize,
    /// Objective after each accepted step (first entry: the initial value).
    pub history: Vec<f64>,
    pub riemannian_grad_norm: f64,
    pub converged: bool,
}

fn riemannian_gradient(p: &DMatrix<f64>, euclid: &DMatrix<f64>) -> DMatrix<f64> {
    let ptg = p.tr_mul(euclid);
    let sym = (&ptg + ptg.transpose()) * 0.5;
    euclid - p * sym
}

fn finite_or_fail(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{what} is not finite")))
    }
}

/// Minimizes the problem objective starting from `init`.
pub fn optimize(prob: &ProlongationProblem, init: &DMatrix<f64>, cfg: &OptimizerConfig) -> Result<OptimizeOutcome> {
    cfg.validate()?;
    prob.check_shape(init)?;
    let defect = orthogonality_defect(init);
    if defect > INIT_REJECT_TOL {
        return Err(Error::Constraint(defect));
    }
    let mut p = if defect > INIT_EXACT_TOL {
        qr_orthonormalize(init)
    } else {
        init.clone()
    };

    let (mut alpha, mut beta) = (prob.alpha, prob.beta);
    let initial_objective = finite_or_fail(terms_at(&p, prob, alpha, beta).total, "initial objective")?;
    if cfg.alpha_update == AlphaUpdate::ClosedForm {
        rescale(&p, prob, &mut alpha, &mut beta);
    }
    let mut f = finite_or_fail(terms_at(&p, prob, alpha, beta).total, "objective")?;
    let mut history = vec![f];
    let mut step = cfg.step_size;
    let mut iters = 0;
    let mut converged = false;
    let mut rgrad_norm;

    loop {
        let rgrad = riemannian_gradient(&p, &gradient_at(&p, prob, alpha, beta));
        rgrad_norm = finite_or_fail(rgrad.norm(), "gradient norm")?;
        if rgrad_norm < cfg.tolerance {
            converged = true;
            break;
        }
        if iters >= cfg.max_iters {
            break;
        }
        iters += 1;

        let slope = rgrad_norm * rgrad_norm;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = qr_orthonormalize(&(&p - &rgrad * step));
            let fc = terms_at(&candidate, prob, alpha, beta).total;
            if !fc.is_finite() {
                return Err(Error::Numerical("objective became non-finite during line search".into()));
            }
            if fc <= f - ARMIJO * step * slope {
                accepted = Some((candidate, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fc)) = accepted else {
            // No decrease representable at this precision; treat as stationary.
            break;
        };
        debug_assert!(orthogonality_defect(&next) < ORTHO_TOL);
        p = next;
        f = fc;
        if cfg.alpha_update == AlphaUpdate::ClosedForm {
            rescale(&p, prob, &mut alpha, &mut beta);
            f = terms_at(&p, prob, alpha, beta).total;
        }
        history.push(f);
        step = (step * 2.0).min(cfg.step_size);
    }

    let defect = orthogonality_defect(&p);
    if defect >= ORTHO_TOL {
        return Err(Error::Constraint(defect));
    }
    let provenance = if iters == 0 {
        Provenance::MatchingInit
    } else {
        Provenance::Optimized
    };
    Ok(OptimizeOutcome {
        map: ProlongationMap {
            p,
            provenance,
            objective_value: f,
            alpha,
            beta,
        },
        initial_objective,
        iters,
        history,
        riemannian_grad_norm: rgrad_norm,
        converged,
    })
}

fn rescale(p: &DMatrix<f64>, prob: &ProlongationProblem, alpha: &mut f64, beta: &mut f64) {
    let ratio = |x1: &DMatrix<f64>, x2: &DMatrix<f64>| {
        let (num, den) = ((p * x1).norm(), (x2 * p).norm());
        (num > 0.0 && den > 0.0).then(|| num / den)
    };
    if prob.s < 1.0 {
        let (l1, l2) = prob.laplacians();
        if let Some(a) = ratio(l1, l2) {
            *alpha = a;
        }
    }
    if let (true, Some((t1, t2))) = (prob.s > 0.0, prob.distances()) {
        if let Some(b) = ratio(t1, t2) {
            *beta = b;
        }
    }
}
