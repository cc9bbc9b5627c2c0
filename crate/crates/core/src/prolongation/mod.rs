//! Prolongation maps between graphs.
//!
//! A prolongation map from `G1` (n1 vertices) to `G2` (n2 ≥ n1 vertices) is
//! an `n2 × n1` matrix `P` with orthonormal columns minimizing
//!
//! ```text
//! E(P) = (1 − s) ‖(1/√α) P L1 − √α L2 P‖²_F      diffusion term
//!      +      s  ‖(1/√β) P T1 − √β T2 P‖²_F      locality term
//! ```
//!
//! where `L` are Laplacians and `T` shortest-path distance matrices.

mod closed_form;
mod compose;
mod optimize;
mod pipeline;
mod strategy;

pub use closed_form::{closed_form_2d, closed_form_local_1d};
pub use compose::{compose_box, BoxComposition, FactorMap};
pub use optimize::{optimize, AlphaUpdate, OptimizeOutcome, OptimizerConfig};
pub use pipeline::{solve_prolongation, SolveReport};
pub use strategy::{
    GridStrategy, LocalStrategy, OptimizedLocalStrategy, ProlongationStrategy, RandomOrthogonalStrategy,
    ShuffledStrategy, StrategyRegistry,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::graph::{laplacian, manhattan, Graph};
use crate::linalg::shape_str;
use crate::{Error, Result};

/// Orthogonality tolerance every returned map satisfies.
pub const ORTHO_TOL: f64 = 1e-8;

/// Graph pair, locality weight and scales for one prolongation problem.
///
/// Process matrices are computed once at construction. Distance matrices are
/// only built when `s > 0`, so disconnected graphs are fine for pure
/// diffusion problems.
#[derive(Clone, Debug)]
pub struct ProlongationProblem {
    pub g1: Graph,
    pub g2: Graph,
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    l1: DMatrix<f64>,
    l2: DMatrix<f64>,
    distances: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl ProlongationProblem {
    /// Defaults to `α = 1` and `β = n1/n2`.
    pub fn new(g1: Graph, g2: Graph, s: f64) -> Result<Self> {
        if g1.n() > g2.n() {
            return Err(Error::Config(format!(
                "coarse graph ({} vertices) larger than fine graph ({})",
                g1.n(),
                g2.n()
            )));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Config(format!("s must lie in [0, 1], got {s}")));
        }
        let beta = g1.n() as f64 / g2.n() as f64;
        let l1 = laplacian(&g1).data;
        let l2 = laplacian(&g2).data;
        let distances = if s > 0.0 {
            Some((manhattan(&g1)?.data, manhattan(&g2)?.data))
        } else {
            None
        };
        Ok(Self {
            g1,
            g2,
            s,
            alpha: 1.0,
            beta,
            l1,
            l2,
            distances,
        })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        check_scale("alpha", alpha)?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        check_scale("beta", beta)?;
        self.beta = beta;
        Ok(self)
    }

    pub fn n1(&self) -> usize {
        self.g1.n()
    }

    pub fn n2(&self) -> usize {
        self.g2.n()
    }

    pub fn laplacians(&self) -> (&DMatrix<f64>, &DMatrix<f64>) {
        (&self.l1, &self.l2)
    }

    pub fn distances(&self) -> Option<(&DMatrix<f64>, &DMatrix<f64>)> {
        self.distances.as_ref().map(|(a, b)| (a, b))
    }

    fn check_shape(&self, p: &DMatrix<f64>) -> Result<()> {
        if p.shape() != (self.n2(), self.n1()) {
            return Err(Error::Shape(format!(
                "P is {} but problem needs {}x{}",
                shape_str(p),
                self.n2(),
                self.n1()
            )));
        }
        Ok(())
    }
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Optimized,
    MatchingInit,
    ClosedFormLocal,
    ClosedFormDiffuse,
    KroneckerComposed,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Optimized => "optimized",
            Provenance::MatchingInit => "matching-init",
            Provenance::ClosedFormLocal => "closed-form-local",
            Provenance::ClosedFormDiffuse => "closed-form-diffuse",
            Provenance::KroneckerComposed => "kronecker-composed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProlongationMap {
    pub p: DMatrix<f64>,
    pub provenance: Provenance,
    pub objective_value: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ProlongationMap {
    /// Wraps `p` after checking orthogonality and evaluating the objective
    /// of `prob` at it.
    pub fn evaluate(p: DMatrix<f64>, prob: &ProlongationProblem, provenance: Provenance) -> Result<Self> {
        let defect = crate::linalg::orthogonality_defect(&p);
        if defect >= ORTHO_TOL {
            return Err(Error::Constraint(defect));
        }
        let objective_value = objective(&p, prob)?;
        Ok(Self {
            p,
            provenance,
            objective_value,
            alpha: prob.alpha,
            beta: prob.beta,
        })
    }
}

/// The two squared residual norms of the objective, unweighted by `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObjectiveTerms {
    pub diffusion: f64,
    pub locality: f64,
    pub total: f64,
}

fn residual(p: &DMatrix<f64>, x1: &DMatrix<f64>, x2: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    (p * x1) / scale.sqrt() - (x2 * p) * scale.sqrt()
}

pub(crate) fn terms_at(p: &DMatrix<f64>, prob: &ProlongationProblem, alpha: f64, beta: f64) -> ObjectiveTerms {
    let diffusion = residual(p, &prob.l1, &prob.l2, alpha).norm_squared();
    let locality = match &prob.distances {
        Some((t1, t2)) => residual(p, t1, t2, beta).norm_squared(),
        None => 0.0,
    };
    let total = if prob.s == 0.0 {
        diffusion
    } else if prob.s == 1.0 {
        locality
    } else {
        (1.0 - prob.s) * diffusion + prob.s * locality
    };
    ObjectiveTerms {
        diffusion,
        locality,
        total,
    }
}

/// Both terms at the problem's own `α`, `β`.
pub fn objective_terms(p: &DMatrix<f64>, prob: &ProlongationProblem) -> Result<ObjectiveTerms> {
    prob.check_shape(p)?;
    Ok(terms_at(p, prob, prob.alpha, prob.beta))
}

/// `E(P)`.
pub fn objective(p: &DMatrix<f64>, prob: &ProlongationProblem) -> Result<f64> {
    Ok(objective_terms(p, prob)?.total)
}

/// Unsquared diffusion distance `‖(1/√α) P L1 − √α L2 P‖_F`.
pub fn diffusion_distance(p: &DMatrix<f64>, g1: &Graph, g2: &Graph, alpha: f64) -> Result<f64> {
    check_scale("alpha", alpha)?;
    if p.shape() != (g2.n(), g1.n()) {
        return Err(Error::Shape(format!(
            "P is {} but graphs have {} and {} vertices",
            shape_str(p),
            g1.n(),
            g2.n()
        )));
    }
    Ok(residual(p, &laplacian(g1).data, &laplacian(g2).data, alpha).norm())
}

pub(crate) fn gradient_at(p: &DMatrix<f64>, prob: &ProlongationProblem, alpha: f64, beta: f64) -> DMatrix<f64> {
    let term = |x1: &DMatrix<f64>, x2: &DMatrix<f64>, scale: f64| {
        let r = residual(p, x1, x2, scale);
        ((&r * x1.transpose()) / scale.sqrt() - (x2.transpose() * &r) * scale.sqrt()) * 2.0
    };
    let mut g = DMatrix::zeros(p.nrows(), p.ncols());
    if prob.s < 1.0 {
        g += term(&prob.l1, &prob.l2, alpha) * (1.0 - prob.s);
    }
    if let (true, Some((t1, t2))) = (prob.s > 0.0, &prob.distances) {
        g += term(t1, t2, beta) * prob.s;
    }
    g
}

/// Euclidean gradient `dE/dP`.
pub fn objective_gradient(p: &DMatrix<f64>, prob: &ProlongationProblem) -> Result<DMatrix<f64>> {
    prob.check_shape(p)?;
    Ok(gradient_at(p, prob, prob.alpha, prob.beta))
}

fn optimal_scale(p: &DMatrix<f64>, x1: &DMatrix<f64>, x2: &DMatrix<f64>, what: &str) -> Result<f64> {
    let num = (p * x1).norm();
    let den = (x2 * p).norm();
    if den == 0.0 {
        return Err(Error::DegenerateScale(format!("‖{what}₂ P‖_F = 0")));
    }
    if num == 0.0 {
        return Err(Error::DegenerateScale(format!("‖P {what}₁‖_F = 0")));
    }
    Ok(num / den)
}

/// `‖P L1‖_F / ‖L2 P‖_F`, the minimizer of the diffusion distance over `α`.
pub fn optimal_alpha(p: &DMatrix<f64>, g1: &Graph, g2: &Graph) -> Result<f64> {
    if p.shape() != (g2.n(), g1.n()) {
        return Err(Error::Shape(format!("P is {}", shape_str(p))));
    }
    optimal_scale(p, &laplacian(g1).data, &laplacian(g2).data, "L")
}

/// The locality-term analogue of [`optimal_alpha`].
pub fn optimal_beta(p: &DMatrix<f64>, g1: &Graph, g2: &Graph) -> Result<f64> {
    if p.shape() != (g2.n(), g1.n()) {
        return Err(Error::Shape(format!("P is {}", shape_str(p))));
    }
    optimal_scale(p, &manhattan(g1)?.data, &manhattan(g2)?.data, "T")
}
