//! Named generators of layer prolongations for multiscale networks.
//!
//! A strategy turns a fine layer width into a `fine × coarse` orthonormal
//! map, where `coarse = fine / coarsening_factor()`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::RngCore;

use super::{closed_form_2d, closed_form_local_1d, optimize, OptimizerConfig, ProlongationProblem};
use crate::graph::make_cycle;
use crate::linalg::random_orthonormal;
use crate::{Error, Result};

pub trait ProlongationStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Ratio of fine to coarse width (2 for 1D layers, 4 for square grids).
    fn coarsening_factor(&self) -> usize;

    fn build(&self, fine: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>>;
}

fn coarse_1d(fine: usize) -> Result<usize> {
    if fine < 2 || fine % 2 != 0 {
        return Err(Error::Config(format!("1D prolongation needs an even width >= 2, got {fine}")));
    }
    Ok(fine / 2)
}

/// Side of the coarse grid for a square fine grid with `fine` cells.
fn coarse_side_2d(fine: usize) -> Result<usize> {
    let side = (fine as f64).sqrt().round() as usize;
    if side * side != fine || side < 2 || side % 2 != 0 {
        return Err(Error::Config(format!(
            "2D prolongation needs a square width with even side, got {fine}"
        )));
    }
    Ok(side / 2)
}

/// Pair-aggregation stencil.
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalStrategy;

impl ProlongationStrategy for LocalStrategy {
    fn name(&self) -> &'static str {
        "local-1d"
    }

    fn coarsening_factor(&self) -> usize {
        2
    }

    fn build(&self, fine: usize, _rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        closed_form_local_1d(coarse_1d(fine)?)
    }
}

/// 2×2 block aggregation on a row-major square grid.
#[derive(Clone, Copy, Debug, Default)]
pub struct GridStrategy;

impl ProlongationStrategy for GridStrategy {
    fn name(&self) -> &'static str {
        "grid-2d"
    }

    fn coarsening_factor(&self) -> usize {
        4
    }

    fn build(&self, fine: usize, _rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        closed_form_2d(coarse_side_2d(fine)?)
    }
}

/// Another strategy's map with its rows (fine indices) permuted at random.
/// Keeps the fan-out of every coarse variable but discards spatial order.
pub struct ShuffledStrategy {
    name: &'static str,
    inner: Box<dyn ProlongationStrategy>,
}

impl ShuffledStrategy {
    pub fn new(name: &'static str, inner: Box<dyn ProlongationStrategy>) -> Self {
        Self { name, inner }
    }
}

impl ProlongationStrategy for ShuffledStrategy {
    fn name(&self) -> &'static str {
        self.name
    }

    fn coarsening_factor(&self) -> usize {
        self.inner.coarsening_factor()
    }

    fn build(&self, fine: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let p = self.inner.build(fine, rng)?;
        let mut perm: Vec<usize> = (0..p.nrows()).collect();
        perm.shuffle(rng);
        Ok(DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| p[(perm[i], j)]))
    }
}

/// Orthonormalized Gaussian matrix with 2:1 coarsening.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomOrthogonalStrategy;

impl ProlongationStrategy for RandomOrthogonalStrategy {
    fn name(&self) -> &'static str {
        "random-orthogonal"
    }

    fn coarsening_factor(&self) -> usize {
        2
    }

    fn build(&self, fine: usize, rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        random_orthonormal(fine, coarse_1d(fine)?, rng)
    }
}

/// Local optimum of the `C_{n/2} → C_n` problem reached from the pair stencil.
#[derive(Clone, Debug)]
pub struct OptimizedLocalStrategy {
    pub s: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for OptimizedLocalStrategy {
    fn default() -> Self {
        Self {
            s: 0.5,
            optimizer: OptimizerConfig {
                max_iters: 500,
                ..Default::default()
            },
        }
    }
}

impl ProlongationStrategy for OptimizedLocalStrategy {
    fn name(&self) -> &'static str {
        "optimized-1d"
    }

    fn coarsening_factor(&self) -> usize {
        2
    }

    fn build(&self, fine: usize, _rng: &mut dyn RngCore) -> Result<DMatrix<f64>> {
        let coarse = coarse_1d(fine)?;
        if coarse < 3 {
            // cycles need three vertices; the stencil is all there is here
            return closed_form_local_1d(coarse);
        }
        let prob = ProlongationProblem::new(make_cycle(coarse)?, make_cycle(fine)?, self.s)?;
        let init = closed_form_local_1d(coarse)?;
        Ok(optimize(&prob, &init, &self.optimizer)?.map.p)
    }
}

/// Strategies keyed by name.
pub struct StrategyRegistry {
    entries: BTreeMap<String, Box<dyn ProlongationStrategy>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, strategy: Box<dyn ProlongationStrategy>) {
        self.entries.insert(strategy.name().to_string(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ProlongationStrategy> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "prolongation strategy",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(LocalStrategy));
        r.register(Box::new(GridStrategy));
        r.register(Box::new(ShuffledStrategy::new("shuffled-1d", Box::new(LocalStrategy))));
        r.register(Box::new(ShuffledStrategy::new("shuffled-2d", Box::new(GridStrategy))));
        r.register(Box::new(RandomOrthogonalStrategy));
        r.register(Box::new(OptimizedLocalStrategy::default()));
        r
    }
}
