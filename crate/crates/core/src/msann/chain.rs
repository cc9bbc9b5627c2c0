use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::RngCore;

use super::network::{LayerSpec, Network};
use crate::linalg::{orthogonality_defect, shape_str};
use crate::prolongation::{ProlongationStrategy, ORTHO_TOL};
use crate::{Error, Result};

/// Per-level, per-width prolongations plus their products down to level 0.
///
/// Width index `i` refers to layer `i` of the network, so weight `W_i` uses
/// `(P_i, P_{i+1})` and bias `b_i` uses `P_{i+1}`.
#[derive(Clone, Debug)]
pub struct ProResChain {
    specs: Vec<LayerSpec>,
    /// `maps[l - 1][i]`: level `l` → level `l − 1` for width index `i`.
    maps: Vec<Vec<DMatrix<f64>>>,
    /// `composite[l][i] = P⁽¹⁾_i ⋯ P⁽ˡ⁾_i`, level `l` → level 0.
    composite: Vec<Vec<DMatrix<f64>>>,
}

impl ProResChain {
    /// Coarsens `spec` `depth` times with `strategy`. Layers of equal width
    /// on the same level share one map.
    pub fn build(spec: &LayerSpec, depth: usize, strategy: &dyn ProlongationStrategy, rng: &mut dyn RngCore) -> Result<Self> {
        let factor = strategy.coarsening_factor();
        let mut maps = Vec::with_capacity(depth);
        let mut fine = spec.clone();
        for _ in 0..depth {
            let coarse = fine.coarsened(factor)?;
            let mut by_width: BTreeMap<usize, DMatrix<f64>> = BTreeMap::new();
            for &w in fine.sizes() {
                if !by_width.contains_key(&w) {
                    by_width.insert(w, strategy.build(w, rng)?);
                }
            }
            maps.push(fine.sizes().iter().map(|w| by_width[w].clone()).collect());
            fine = coarse;
        }
        Self::from_maps(spec.clone(), maps)
    }

    /// Chain from explicit maps; `maps[l - 1][i]` must be
    /// `width_{l−1}[i] × width_l[i]` with orthonormal columns.
    pub fn from_maps(spec: LayerSpec, maps: Vec<Vec<DMatrix<f64>>>) -> Result<Self> {
        let mut specs = vec![spec];
        for (l, level_maps) in maps.iter().enumerate() {
            let fine = &specs[l];
            if level_maps.len() != fine.sizes().len() {
                return Err(Error::Config(format!(
                    "level {} has {} maps for {} layer widths",
                    l + 1,
                    level_maps.len(),
                    fine.sizes().len()
                )));
            }
            for (i, p) in level_maps.iter().enumerate() {
                if p.nrows() != fine.sizes()[i] || p.ncols() == 0 {
                    return Err(Error::Config(format!(
                        "map for level {} width index {i} is {}, fine width is {}",
                        l + 1,
                        shape_str(p),
                        fine.sizes()[i]
                    )));
                }
                let defect = orthogonality_defect(p);
                if defect >= ORTHO_TOL {
                    return Err(Error::Constraint(defect));
                }
            }
            specs.push(LayerSpec::new(level_maps.iter().map(|p| p.ncols()).collect())?);
        }

        let widths0 = specs[0].sizes().len();
        let mut composite = vec![specs[0].sizes().iter().map(|&w| DMatrix::identity(w, w)).collect::<Vec<_>>()];
        for level_maps in &maps {
            let prev = composite.last().expect("level 0 present");
            let next = (0..widths0).map(|i| &prev[i] * &level_maps[i]).collect();
            composite.push(next);
        }
        Ok(Self {
            specs,
            maps,
            composite,
        })
    }

    /// Deepest level `L`.
    pub fn depth(&self) -> usize {
        self.maps.len()
    }

    pub fn spec(&self, level: usize) -> &LayerSpec {
        &self.specs[level]
    }

    /// Level `level` → `level − 1` map for width index `i` (`level ≥ 1`).
    pub fn map(&self, level: usize, i: usize) -> &DMatrix<f64> {
        &self.maps[level - 1][i]
    }

    /// Level `level` → level 0 product for width index `i`.
    pub fn composite_map(&self, level: usize, i: usize) -> &DMatrix<f64> {
        &self.composite[level][i]
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth() {
            return Err(Error::Config(format!("level {level} exceeds depth {}", self.depth())));
        }
        Ok(())
    }

    fn check_widths(&self, net: &Network, level: usize) -> Result<()> {
        if net.widths() != self.specs[level].sizes() {
            return Err(Error::Shape(format!(
                "parameters have widths {:?}, level {level} expects {:?}",
                net.widths(),
                self.specs[level].sizes()
            )));
        }
        Ok(())
    }

    /// `Pro_{level→0}` applied to a whole parameter set.
    pub fn prolong(&self, level: usize, params: &Network) -> Result<Network> {
        self.check_level(level)?;
        self.check_widths(params, level)?;
        let c = &self.composite[level];
        Ok(Network {
            weights: params
                .weights
                .iter()
                .enumerate()
                .map(|(i, w)| &c[i] * w * c[i + 1].transpose())
                .collect(),
            biases: params.biases.iter().enumerate().map(|(i, b)| &c[i + 1] * b).collect(),
        })
    }

    /// `Res_{0→level}` applied to a whole level-0 tensor set.
    pub fn restrict(&self, level: usize, fine: &Network) -> Result<Network> {
        self.check_level(level)?;
        self.check_widths(fine, 0)?;
        let c = &self.composite[level];
        Ok(Network {
            weights: fine
                .weights
                .iter()
                .enumerate()
                .map(|(i, w)| c[i].tr_mul(w) * &c[i + 1])
                .collect(),
            biases: fine.biases.iter().enumerate().map(|(i, b)| c[i + 1].tr_mul(b)).collect(),
        })
    }
}

/// `dE/dθ⁽ᵏ⁾ = Res_{0→k}(dE/dΘ)` for every tensor at once.
pub fn restrict_gradient(grad: &Network, chain: &ProResChain, level: usize) -> Result<Network> {
    chain.restrict(level, grad)
}

/// Leveled parameters with a cached composite network.
#[derive(Clone, Debug)]
pub struct MsannHierarchy {
    chain: ProResChain,
    levels: Vec<Network>,
    /// `Pro_{l→0} θ⁽ˡ⁾` for `l ≥ 1`; index 0 unused.
    prolonged: Vec<Network>,
    composite: Network,
}

impl MsannHierarchy {
    /// Level 0 Glorot-initialized from `rng`, every coarser level zero.
    pub fn new(chain: ProResChain, rng: &mut dyn RngCore) -> Result<Self> {
        let mut levels = vec![Network::glorot(chain.spec(0), rng)];
        levels.extend((1..=chain.depth()).map(|l| Network::zeros(chain.spec(l))));
        Self::with_levels(chain, levels)
    }

    pub fn with_levels(chain: ProResChain, levels: Vec<Network>) -> Result<Self> {
        if levels.len() != chain.depth() + 1 {
            return Err(Error::Config(format!(
                "{} parameter levels for a chain of depth {}",
                levels.len(),
                chain.depth()
            )));
        }
        for (l, net) in levels.iter().enumerate() {
            chain.check_widths(net, l)?;
        }
        let prolonged = levels
            .iter()
            .enumerate()
            .map(|(l, net)| if l == 0 { Network::zeros(chain.spec(0)) } else { chain.prolong(l, net).expect("widths checked") })
            .collect();
        let mut h = Self {
            composite: levels[0].clone(),
            chain,
            levels,
            prolonged,
        };
        h.resum();
        Ok(h)
    }

    pub fn chain(&self) -> &ProResChain {
        &self.chain
    }

    pub fn depth(&self) -> usize {
        self.chain.depth()
    }

    pub fn levels(&self) -> &[Network] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &Network {
        &self.levels[l]
    }

    /// `|M_l|`.
    pub fn n_trainable(&self, l: usize) -> usize {
        self.chain.spec(l).n_params()
    }

    /// Cached `Θ`.
    pub fn composite(&self) -> &Network {
        &self.composite
    }

    /// `Θ_j` recomputed from the levels.
    pub fn assemble_composite(&self, j: usize) -> DMatrix<f64> {
        let i = j / 2;
        let mut acc: DMatrix<f64> = DMatrix::zeros(self.composite.tensor_shape(j).0, self.composite.tensor_shape(j).1);
        for (l, net) in self.levels.iter().enumerate() {
            let c = &self.chain.composite[l];
            if j % 2 == 0 {
                acc += &c[i] * &net.weights[i] * c[i + 1].transpose();
            } else {
                acc += &c[i + 1] * &net.biases[i];
            }
        }
        acc
    }

    /// All of `Θ` recomputed from the levels.
    pub fn assemble(&self) -> Network {
        let mut theta = self.levels[0].clone();
        for l in 1..self.levels.len() {
            let up = self.chain.prolong(l, &self.levels[l]).expect("level shapes checked on construction");
            for (a, b) in theta.weights.iter_mut().zip(&up.weights) {
                *a += b;
            }
            for (a, b) in theta.biases.iter_mut().zip(&up.biases) {
                *a += b;
            }
        }
        theta
    }

    fn resum(&mut self) {
        let mut theta = self.levels[0].clone();
        for up in &self.prolonged[1..] {
            for (a, b) in theta.weights.iter_mut().zip(&up.weights) {
                *a += b;
            }
            for (a, b) in theta.biases.iter_mut().zip(&up.biases) {
                *a += b;
            }
        }
        self.composite = theta;
    }

    /// Mutates level `l` and refreshes the composite. Only level `l` is
    /// prolonged again; the other levels' contributions are cached.
    pub fn update_level<F: FnOnce(&mut Network)>(&mut self, l: usize, f: F) {
        f(&mut self.levels[l]);
        if l > 0 {
            self.prolonged[l] = self.chain.prolong(l, &self.levels[l]).expect("widths checked on construction");
        }
        self.resum();
    }
}
