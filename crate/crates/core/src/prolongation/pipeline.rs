//! Eigendecompose → match → map to graph space → optimize.

use serde::Serialize;

use super::{optimize, terms_at, OptimizerConfig, ProlongationMap, ProlongationProblem, Provenance};
use crate::spectral::{eigendecompose, matching_to_graph_space, EigenMatcher};
use crate::Result;

/// Summary of one [`solve_prolongation`] run.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub matcher: String,
    /// `Σ (λ1_j − λ2_i)²` over the chosen matching.
    pub matching_cost: f64,
    pub initial_objective: f64,
    pub objective: f64,
    pub diffusion_term: f64,
    pub locality_term: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub iters: usize,
    pub converged: bool,
    pub riemannian_grad_norm: f64,
    pub provenance: Provenance,
}

/// Solves `prob` from the matching initialization `U2 M U1ᵀ`.
pub fn solve_prolongation(
    prob: &ProlongationProblem,
    matcher: &dyn EigenMatcher,
    cfg: &OptimizerConfig,
) -> Result<(ProlongationMap, SolveReport)> {
    cfg.validate()?;
    let (l1, l2) = prob.laplacians();
    let spec1 = eigendecompose(l1)?;
    let spec2 = eigendecompose(l2)?;
    let matching = matcher.solve(&spec1.eigenvalues, &spec2.eigenvalues)?;
    let init = matching_to_graph_space(&matching, &spec1, &spec2)?;
    let out = optimize(prob, &init, cfg)?;
    let terms = terms_at(&out.map.p, prob, out.map.alpha, out.map.beta);
    let report = SolveReport {
        matcher: matcher.name().to_string(),
        matching_cost: matching.cost,
        initial_objective: out.initial_objective,
        objective: out.map.objective_value,
        diffusion_term: terms.diffusion,
        locality_term: terms.locality,
        alpha: out.map.alpha,
        beta: out.map.beta,
        s: prob.s,
        iters: out.iters,
        converged: out.converged,
        riemannian_grad_norm: out.riemannian_grad_norm,
        provenance: out.map.provenance,
    };
    Ok((out.map, report))
}
