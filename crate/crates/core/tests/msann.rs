mod common;

use msgprol::data::{Batch, DataSource, SyntheticSource, SyntheticTaskSpec};
use msgprol::msann::{
    backprop_fine, cost_of_schedule, forward, pro_bias, restrict_gradient, CostLedger, LayerSpec, MsannHierarchy,
    MsannRun, Network, ProResChain, TrainConfig,
};
use msgprol::prolongation::{closed_form_local_1d, StrategyRegistry};
use msgprol::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn flat(net: &Network) -> Vec<f64> {
    (0..net.n_tensors()).flat_map(|j| net.tensor(j).to_vec()).collect()
}

fn unflat(shape: &Network, v: &[f64]) -> Network {
    let mut net = shape.clone();
    let mut pos = 0;
    for j in 0..net.n_tensors() {
        let t = net.tensor_mut(j);
        t.copy_from_slice(&v[pos..pos + t.len()]);
        pos += t.len();
    }
    net
}

fn random_net(spec: &LayerSpec, rng: &mut ChaCha8Rng) -> Network {
    let mut net = Network::zeros(spec);
    for j in 0..net.n_tensors() {
        for x in net.tensor_mut(j) {
            *x = rng.random_range(-1.0..1.0);
        }
    }
    net
}

fn random_chain(spec: &LayerSpec, depth: usize, rng: &mut ChaCha8Rng) -> ProResChain {
    let mut maps = Vec::new();
    let mut cur = spec.clone();
    for _ in 0..depth {
        let next = cur.coarsened(2).unwrap();
        maps.push(
            cur.sizes()
                .iter()
                .zip(next.sizes())
                .map(|(&a, &b)| common::random_orthonormal(a, b, rng))
                .collect(),
        );
        cur = next;
    }
    ProResChain::from_maps(spec.clone(), maps).unwrap()
}

fn batch(rows: usize, width: usize, rng: &mut ChaCha8Rng) -> Batch {
    Batch {
        inputs: DMatrix::from_fn(rows, width, |_, _| rng.random_range(0.0..1.0)),
        targets: DMatrix::from_fn(rows, width, |_, _| rng.random_range(0.0..1.0)),
    }
}

fn loss(theta: &Network, b: &Batch) -> f64 {
    let y = forward(theta, &b.inputs).unwrap().pop().unwrap();
    (&y - &b.targets).norm_squared() / y.len() as f64
}

/// Finite-difference check of the restricted gradient at every coarse level.
fn check_restricted_gradients(spec: LayerSpec, depth: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = random_chain(&spec, depth, &mut rng);
    let levels: Vec<Network> = (0..=depth).map(|l| random_net(chain.spec(l), &mut rng)).collect();
    let b = batch(4, spec.width(), &mut rng);
    let h = MsannHierarchy::with_levels(chain.clone(), levels.clone()).unwrap();
    let (_, grad) = backprop_fine(h.composite(), &b.inputs, &b.targets).unwrap();
    for l in 1..=depth {
        let an = restrict_gradient(&grad, &chain, l).unwrap();
        let fd = common::central_diff(&flat(&levels[l]), 1e-6, |v| {
            let mut lv = levels.clone();
            lv[l] = unflat(&levels[l], v);
            loss(MsannHierarchy::with_levels(chain.clone(), lv).unwrap().composite(), &b)
        });
        let e = common::rel_err(&flat(&an), &fd);
        assert!(e < 1e-5, "level {l}: rel err {e:e}");
    }
}

#[test]
fn restricted_gradient_matches_finite_differences() {
    check_restricted_gradients(LayerSpec::new(vec![4, 2, 4]).unwrap(), 1, 1);
    check_restricted_gradients(LayerSpec::new(vec![8, 4, 8]).unwrap(), 2, 2);
    check_restricted_gradients(LayerSpec::new(vec![16, 8, 4, 8, 16]).unwrap(), 2, 3);
}

#[test]
fn restriction_is_linear_and_identity_chain_is_neutral() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = LayerSpec::new(vec![8, 4, 8]).unwrap();
    let chain = random_chain(&spec, 2, &mut rng);
    let (g1, g2) = (random_net(&spec, &mut rng), random_net(&spec, &mut rng));
    let (a, c) = (0.7, -1.3);
    let mixed = unflat(&g1, &flat(&g1).iter().zip(flat(&g2)).map(|(x, y)| a * x + c * y).collect::<Vec<_>>());
    let lhs = flat(&restrict_gradient(&mixed, &chain, 2).unwrap());
    let (r1, r2) = (
        flat(&restrict_gradient(&g1, &chain, 2).unwrap()),
        flat(&restrict_gradient(&g2, &chain, 2).unwrap()),
    );
    for (i, v) in lhs.iter().enumerate() {
        assert!((v - (a * r1[i] + c * r2[i])).abs() < 1e-12);
    }

    let eye: Vec<DMatrix<f64>> = spec.sizes().iter().map(|&w| DMatrix::identity(w, w)).collect();
    let same = LayerSpec::new(vec![8, 4, 8]).unwrap();
    // a square "coarsening" of equal widths
    let id_chain = ProResChain::from_maps(same, vec![eye]).unwrap();
    assert_eq!(restrict_gradient(&g1, &id_chain, 1).unwrap(), g1);
}

#[test]
fn composite_assembly_orders_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = LayerSpec::new(vec![16, 8, 16]).unwrap();
    let chain = random_chain(&spec, 2, &mut rng);
    let levels: Vec<Network> = (0..=2).map(|l| random_net(chain.spec(l), &mut rng)).collect();
    let h = MsannHierarchy::with_levels(chain.clone(), levels.clone()).unwrap();
    // direct telescoped sum with the per-level maps multiplied out on the spot
    for i in 0..spec.layers() {
        let mut w = levels[0].weights[i].clone();
        let mut b = levels[0].biases[i].clone();
        for l in 1..=2 {
            let (mut pin, mut pout) = (DMatrix::identity(spec.sizes()[i], spec.sizes()[i]), DMatrix::identity(spec.sizes()[i + 1], spec.sizes()[i + 1]));
            for m in 1..=l {
                pin *= chain.map(m, i);
                pout *= chain.map(m, i + 1);
            }
            w += &pin * &levels[l].weights[i] * pout.transpose();
            b += &pout * &levels[l].biases[i];
        }
        assert!((&w - &h.composite().weights[i]).amax() < 1e-12);
        assert!((&b - &h.composite().biases[i]).amax() < 1e-12);
        assert!((h.assemble_composite(2 * i) - &w).amax() < 1e-12);
    }
}

fn small_config(depth: usize, gamma: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        layers: vec![32, 16, 8, 16, 32],
        depth,
        gamma,
        k: 3,
        batch_size: 8,
        learning_rate: 0.01,
        seed,
        ..Default::default()
    }
}

fn source(seed: u64) -> SyntheticSource {
    SyntheticSource::with_stream(SyntheticTaskSpec::new(32, 1, seed), 2).unwrap()
}

#[test]
fn composite_stays_consistent_during_training() {
    let mut run = MsannRun::new(small_config(2, 2, 6), &StrategyRegistry::default()).unwrap();
    let mut data = source(6);
    for _ in 0..3 {
        run.cycle(0, &mut data).unwrap();
        let fresh = run.hierarchy.assemble();
        let d = common::rel_err(&flat(&fresh), &flat(run.hierarchy.composite()));
        let max = flat(&fresh).iter().zip(flat(run.hierarchy.composite())).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(max < 1e-12, "cached composite drifted by {max:e} (rel {d:e})");
    }
}

#[test]
fn training_a_level_leaves_the_others_untouched() {
    let mut run = MsannRun::new(small_config(2, 1, 7), &StrategyRegistry::default()).unwrap();
    let mut data = source(7);
    run.run(&mut data).unwrap();
    for l in 0..=2 {
        let before: Vec<Network> = run.hierarchy.levels().to_vec();
        run.train_level(l, &mut data).unwrap();
        for (m, net) in run.hierarchy.levels().iter().enumerate() {
            if m == l {
                assert_ne!(net, &before[m]);
            } else {
                assert_eq!(net, &before[m], "level {m} changed while training level {l}");
            }
        }
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let go = || {
        let mut run = MsannRun::new(small_config(2, 2, 8), &StrategyRegistry::default()).unwrap();
        run.run_until_cost(2000.0, &mut source(8)).unwrap();
        run
    };
    let (a, b) = (go(), go());
    assert_eq!(a.hierarchy.levels(), b.hierarchy.levels());
    assert_eq!(a.ledger, b.ledger);
}

#[test]
fn ledger_totals_are_exact_multiples_of_the_schedule() {
    for (depth, gamma) in [(0, 1), (1, 3), (2, 2), (3, 1)] {
        let mut cfg = small_config(depth, gamma, 9);
        cfg.layers = vec![32, 16, 32];
        cfg.cycles = 3;
        let mut run = MsannRun::new(cfg, &StrategyRegistry::default()).unwrap();
        run.run(&mut source(9)).unwrap();
        let one = cost_of_schedule(depth, gamma, 3, 8, &run.level_sizes()).unwrap();
        // three cycles accumulate in the same order as three schedule sums
        let mut ledger = CostLedger::new();
        for _ in 0..3 {
            for l in common::visits(depth, gamma) {
                for _ in 0..3 {
                    ledger.push(l, run.level_sizes()[l] as f64 / run.level_sizes()[0] as f64 * 8.0, 0.0);
                }
            }
        }
        assert_eq!(run.ledger.total_cost(), ledger.total_cost());
        assert!((run.ledger.total_cost() - 3.0 * one).abs() <= 1e-9 * one);
        assert!(run.ledger.is_consistent());
        assert_eq!(run.cycle_cost(), one);
    }
}

#[test]
fn level_cost_increment_example() {
    // |M_1| / |M_0| = 1/4 with b = 10 costs 2.5 per batch
    let mut l = CostLedger::new();
    l.push(1, 0.25 * 10.0, 0.0);
    assert_eq!(l.total_cost(), 2.5);
    let spec = LayerSpec::new(vec![16, 8, 16]).unwrap();
    let coarse = spec.coarsened(2).unwrap();
    assert_eq!(spec.n_params(), 16 * 8 + 8 + 8 * 16 + 16);
    assert_eq!(coarse.n_params(), 8 * 4 + 4 + 4 * 8 + 8);
}

#[test]
fn plain_and_multiscale_runs_share_their_first_visit() {
    let reg = StrategyRegistry::default();
    let mut plain = MsannRun::new(small_config(0, 1, 10), &reg).unwrap();
    let mut multi = MsannRun::new(small_config(2, 1, 10), &reg).unwrap();
    plain.cycle(0, &mut source(10)).unwrap();
    multi.cycle(0, &mut source(10)).unwrap();
    assert_eq!(plain.ledger.entries[..], multi.ledger.entries[..3]);
}

#[test]
fn plain_training_reduces_loss() {
    let mut drops = Vec::new();
    for seed in 0..3 {
        let mut cfg = small_config(0, 1, seed);
        cfg.k = 200;
        let mut run = MsannRun::new(cfg, &StrategyRegistry::default()).unwrap();
        let mut data = source(seed);
        let eval = SyntheticSource::with_stream(SyntheticTaskSpec::new(32, 1, seed), 3).unwrap().next_batch(500).unwrap();
        let before = run.evaluate(&eval).unwrap();
        run.run(&mut data).unwrap();
        assert_eq!(run.ledger.len(), 200);
        drops.push(before - run.evaluate(&eval).unwrap());
    }
    assert!(common::median(drops) > 0.0);
}

#[test]
fn perfect_reconstruction_has_tiny_gradient() {
    // a 2-2 identity-like net with saturated sigmoids on binary data
    let spec = LayerSpec::new(vec![2, 2]).unwrap();
    let mut net = Network::zeros(&spec);
    net.weights[0] = DMatrix::from_row_slice(2, 2, &[40.0, 0.0, 0.0, 40.0]);
    net.biases[0] = DVector::from_element(2, -20.0);
    let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
    let (l, grad) = backprop_fine(&net, &x, &x).unwrap();
    assert!(l < 1e-15);
    assert!(grad.norm() < 1e-8);
}

#[test]
fn bias_prolongation_example() {
    let p = closed_form_local_1d(4).unwrap();
    let b = pro_bias(&DVector::from_element(4, 1.0), &p).unwrap();
    for v in b.iter() {
        assert!((v - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn strategies_build_valid_chains() {
    let reg = StrategyRegistry::default();
    let spec = LayerSpec::new(vec![64, 16, 64]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["local-1d", "shuffled-1d", "random-orthogonal", "optimized-1d"] {
        let chain = ProResChain::build(&spec, 2, reg.get(name).unwrap(), &mut rng).unwrap();
        assert_eq!(chain.spec(2).sizes(), &[16, 4, 16]);
        for i in 0..3 {
            let p = chain.composite_map(2, i);
            assert!((p.tr_mul(p) - DMatrix::identity(p.ncols(), p.ncols())).amax() < 1e-10);
        }
    }
    let grid = ProResChain::build(&spec, 1, reg.get("grid-2d").unwrap(), &mut rng).unwrap();
    assert_eq!(grid.spec(1).sizes(), &[16, 4, 16]);
    assert!(reg.get("nope").is_err());
}

#[test]
fn mismatched_data_width_is_a_config_error() {
    let mut run = MsannRun::new(small_config(1, 1, 0), &StrategyRegistry::default()).unwrap();
    let mut wrong = SyntheticSource::new(SyntheticTaskSpec::new(16, 1, 0)).unwrap();
    assert!(matches!(run.train_level(0, &mut wrong), Err(msgprol::Error::Config(_))));
}
