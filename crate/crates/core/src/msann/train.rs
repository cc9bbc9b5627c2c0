use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::chain::{MsannHierarchy, ProResChain};
use super::ledger::CostLedger;
use super::network::{backprop_fine, forward, loss_mse, LayerSpec, Network};
use crate::data::{Batch, DataSource};
use crate::prolongation::StrategyRegistry;
use crate::{Error, Result};

/// RNG stream ids derived from one seed.
pub(crate) const INIT_STREAM: u64 = 0;
pub(crate) const STRATEGY_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Level-0 layer widths.
    pub layers: Vec<usize>,
    /// Deepest level `L`.
    #[serde(alias = "L")]
    pub depth: usize,
    /// Recursion count `γ` (1: V-cycle, 2: W-cycle).
    pub gamma: usize,
    /// Batches per level visit.
    pub k: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    /// Starting value of every RMSProp mean-square accumulator.
    pub rms_initial: f64,
    pub cycles: usize,
    pub seed: u64,
    /// Prolongation strategy name.
    pub strategy: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            layers: vec![256, 64, 32, 64, 256],
            depth: 3,
            gamma: 2,
            k: 4,
            batch_size: 32,
            learning_rate: 0.0005,
            rms_decay: 0.9,
            rms_epsilon: 1e-8,
            rms_initial: 1.0,
            cycles: 1,
            seed: 0,
            strategy: "local-1d".into(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        LayerSpec::new(self.layers.clone())?;
        let checks = [
            (self.gamma >= 1, "gamma must be >= 1"),
            (self.k >= 1, "k must be >= 1"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (self.cycles >= 1, "cycles must be >= 1"),
            (
                self.learning_rate > 0.0 && self.learning_rate.is_finite(),
                "learning_rate must be positive",
            ),
            ((0.0..1.0).contains(&self.rms_decay), "rms_decay must lie in [0, 1)"),
            (self.rms_epsilon > 0.0, "rms_epsilon must be positive"),
            (
                self.rms_initial >= 0.0 && self.rms_initial.is_finite(),
                "rms_initial must be nonnegative",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(msg.into()));
            }
        }
        Ok(())
    }
}

/// RMSProp with one moving average per tensor per level:
/// `m ← ρ m + (1 − ρ) g²`, `θ ← θ − η g / √(m + ε)`, every `m` starting at
/// `initial`.
#[derive(Clone, Debug)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
    mean_square: Vec<Network>,
}

impl RmsProp {
    pub fn new(hierarchy: &MsannHierarchy, learning_rate: f64, decay: f64, epsilon: f64, initial: f64) -> Self {
        let fill = |l: usize| {
            let mut n = Network::zeros(hierarchy.chain().spec(l));
            for j in 0..n.n_tensors() {
                n.tensor_mut(j).fill(initial);
            }
            n
        };
        Self {
            learning_rate,
            decay,
            epsilon,
            mean_square: (0..=hierarchy.depth()).map(fill).collect(),
        }
    }

    pub fn step(&mut self, level: usize, params: &mut Network, grad: &Network) {
        let ms = &mut self.mean_square[level];
        for j in 0..params.n_tensors() {
            let (p, g, m) = (params.tensor_mut(j), grad.tensor(j), ms.tensor_mut(j));
            for ((p, &g), m) in p.iter_mut().zip(g).zip(m.iter_mut()) {
                *m = self.decay * *m + (1.0 - self.decay) * g * g;
                *p -= self.learning_rate * g / (*m + self.epsilon).sqrt();
            }
        }
    }
}

/// Levels visited by one cycle started at level 0.
pub fn visit_sequence(depth: usize, gamma: usize) -> Vec<usize> {
    fn rec(l: usize, depth: usize, gamma: usize, out: &mut Vec<usize>) {
        out.push(l);
        if l < depth {
            for _ in 0..gamma {
                rec(l + 1, depth, gamma, out);
                out.push(l);
            }
        }
    }
    let mut out = Vec::new();
    rec(0, depth, gamma, &mut out);
    out
}

/// Cost of one cycle, `Σ_visits k · (|M_l|/|M_0|) · b`, accumulated batch by
/// batch in the same order a run's ledger uses.
pub fn cost_of_schedule(depth: usize, gamma: usize, k: usize, batch_size: usize, sizes: &[usize]) -> Result<f64> {
    if sizes.len() < depth + 1 || sizes[0] == 0 {
        return Err(Error::Config(format!(
            "need {} positive level sizes, got {sizes:?}",
            depth + 1
        )));
    }
    let mut total = 0.0;
    for l in visit_sequence(depth, gamma) {
        let inc = batch_increment(sizes[l], sizes[0], batch_size);
        for _ in 0..k {
            total += inc;
        }
    }
    Ok(total)
}

fn batch_increment(level_size: usize, fine_size: usize, batch_size: usize) -> f64 {
    level_size as f64 / fine_size as f64 * batch_size as f64
}

/// A hierarchy, its optimizer state and its cost ledger.
#[derive(Clone, Debug)]
pub struct MsannRun {
    pub cfg: TrainConfig,
    pub hierarchy: MsannHierarchy,
    pub optimizer: RmsProp,
    pub ledger: CostLedger,
    increments: Vec<f64>,
}

impl MsannRun {
    /// Builds the chain with the named strategy and initializes level 0.
    /// Initialization and map randomness use separate streams of `cfg.seed`,
    /// so runs of any depth start from the same level-0 network.
    pub fn new(cfg: TrainConfig, strategies: &StrategyRegistry) -> Result<Self> {
        cfg.validate()?;
        let spec = LayerSpec::new(cfg.layers.clone())?;
        let strategy = strategies.get(&cfg.strategy)?;
        let mut map_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        map_rng.set_stream(STRATEGY_STREAM);
        let chain = ProResChain::build(&spec, cfg.depth, strategy, &mut map_rng)?;
        let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        init_rng.set_stream(INIT_STREAM);
        let hierarchy = MsannHierarchy::new(chain, &mut init_rng)?;
        Self::from_hierarchy(cfg, hierarchy)
    }

    pub fn from_hierarchy(cfg: TrainConfig, hierarchy: MsannHierarchy) -> Result<Self> {
        cfg.validate()?;
        if cfg.depth != hierarchy.depth() {
            return Err(Error::Config(format!(
                "config depth {} but hierarchy depth {}",
                cfg.depth,
                hierarchy.depth()
            )));
        }
        let fine = hierarchy.n_trainable(0);
        let increments = (0..=hierarchy.depth())
            .map(|l| batch_increment(hierarchy.n_trainable(l), fine, cfg.batch_size))
            .collect();
        let optimizer = RmsProp::new(&hierarchy, cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon, cfg.rms_initial);
        Ok(Self {
            cfg,
            hierarchy,
            optimizer,
            ledger: CostLedger::new(),
            increments,
        })
    }

    /// `|M_l|` for every level.
    pub fn level_sizes(&self) -> Vec<usize> {
        (0..=self.hierarchy.depth()).map(|l| self.hierarchy.n_trainable(l)).collect()
    }

    /// Cost of one cycle of this run.
    pub fn cycle_cost(&self) -> f64 {
        cost_of_schedule(self.cfg.depth, self.cfg.gamma, self.cfg.k, self.cfg.batch_size, &self.level_sizes())
            .expect("sizes come from the hierarchy")
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        let w = self.hierarchy.chain().spec(0).width();
        if batch.inputs.ncols() != w || batch.targets.shape() != batch.inputs.shape() {
            return Err(Error::Config(format!(
                "data width {} does not match network width {w}",
                batch.inputs.ncols()
            )));
        }
        Ok(())
    }

    /// One update of level `l` on one batch; returns the pre-update MSE.
    pub fn train_batch(&mut self, l: usize, batch: &Batch) -> Result<f64> {
        self.check_batch(batch)?;
        let (loss, grad) = backprop_fine(self.hierarchy.composite(), &batch.inputs, &batch.targets)?;
        if !loss.is_finite() {
            return Err(Error::Numerical("training loss is not finite".into()));
        }
        let g = if l == 0 {
            grad
        } else {
            self.hierarchy.chain().restrict(l, &grad)?
        };
        let opt = &mut self.optimizer;
        self.hierarchy.update_level(l, |params| opt.step(l, params, &g));
        self.ledger.push(l, self.increments[l], loss);
        Ok(loss)
    }

    /// `k` batches at level `l`.
    pub fn train_level(&mut self, l: usize, data: &mut dyn DataSource) -> Result<()> {
        if l > self.hierarchy.depth() {
            return Err(Error::Config(format!("level {l} exceeds depth {}", self.hierarchy.depth())));
        }
        for _ in 0..self.cfg.k {
            let batch = data.next_batch(self.cfg.batch_size)?;
            self.train_batch(l, &batch)?;
        }
        Ok(())
    }

    /// Train at `l`, then `γ` times recurse to `l + 1` and train at `l` again.
    pub fn cycle(&mut self, l: usize, data: &mut dyn DataSource) -> Result<()> {
        self.train_level(l, data)?;
        if l < self.hierarchy.depth() {
            for _ in 0..self.cfg.gamma {
                self.cycle(l + 1, data)?;
                self.train_level(l, data)?;
            }
        }
        Ok(())
    }

    /// `cfg.cycles` cycles from level 0.
    pub fn run(&mut self, data: &mut dyn DataSource) -> Result<()> {
        for _ in 0..self.cfg.cycles {
            self.cycle(0, data)?;
        }
        Ok(())
    }

    /// Whole cycles until the ledger cost reaches `budget`.
    pub fn run_until_cost(&mut self, budget: f64, data: &mut dyn DataSource) -> Result<()> {
        while self.ledger.total_cost() < budget {
            self.cycle(0, data)?;
        }
        Ok(())
    }

    /// MSE of the composite network on `batch`, without training.
    pub fn evaluate(&self, batch: &Batch) -> Result<f64> {
        self.check_batch(batch)?;
        let acts = forward(self.hierarchy.composite(), &batch.inputs)?;
        loss_mse(acts.last().expect("nonempty"), &batch.targets)
    }
}
