use std::collections::HashSet;

use msgprol::data::{
    load_idx, parse_idx, read_checkpoint, read_ledger_csv, read_matrix_csv, write_checkpoint, write_idx,
    write_ledger_csv, write_matrix_csv, DataSource, IdxTensor, MatrixSource, SyntheticSource, SyntheticTaskSpec,
};
use msgprol::msann::{MsannRun, TrainConfig};
use msgprol::prolongation::StrategyRegistry;
use msgprol::{DMatrix, Error};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn spec(width: usize, objects: usize, len: usize, noise_p: f64, seed: u64) -> SyntheticTaskSpec {
    SyntheticTaskSpec {
        width,
        objects,
        object_length: len,
        noise_p,
        seed,
    }
}

fn ones(row: nalgebra::DMatrixView<'_, f64>) -> Vec<usize> {
    row.iter().enumerate().filter(|(_, &v)| v == 1.0).map(|(i, _)| i).collect()
}

#[test]
fn one_object_positions_are_uniform() {
    let mut src = SyntheticSource::new(spec(8, 1, 1, 0.0, 11)).unwrap();
    let b = src.sample_one_object(10_000).unwrap();
    let mut counts = [0f64; 8];
    for r in 0..b.targets.nrows() {
        let on = ones(b.targets.rows(r, 1));
        assert_eq!(on.len(), 1);
        counts[on[0]] += 1.0;
    }
    assert_eq!(b.inputs, b.targets);
    let expected = 10_000.0 / 8.0;
    let stat: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    let p = ChiSquared::new(7.0).unwrap().sf(stat);
    assert!(p > 0.01, "chi-square {stat:.2}, p = {p:.4}");
}

#[test]
fn two_object_placements_are_all_reached() {
    let mut src = SyntheticSource::new(spec(8, 2, 1, 0.0, 12)).unwrap();
    let b = src.sample_two_object(10_000).unwrap();
    let mut seen = HashSet::new();
    let mut counts = std::collections::HashMap::new();
    for r in 0..b.targets.nrows() {
        let on = ones(b.targets.rows(r, 1));
        assert_eq!(on.len(), 2);
        seen.insert((on[0], on[1]));
        *counts.entry((on[0], on[1])).or_insert(0.0) += 1.0;
    }
    assert_eq!(seen.len(), 8 * 7 / 2);
    let expected = 10_000.0 / 28.0;
    let stat: f64 = counts.values().map(|c: &f64| (c - expected).powi(2) / expected).sum();
    assert!(ChiSquared::new(27.0).unwrap().sf(stat) > 0.01);
}

#[test]
fn two_objects_never_overlap() {
    let mut src = SyntheticSource::new(spec(64, 2, 8, 0.0, 13)).unwrap();
    let b = src.next_batch(2000).unwrap();
    for r in 0..b.targets.nrows() {
        let on = ones(b.targets.rows(r, 1));
        assert_eq!(on.len(), 16);
        // exactly two maximal runs, each of length 8
        let runs = on.windows(2).filter(|w| w[1] != w[0] + 1).count() + 1;
        assert!(runs <= 2);
    }
}

#[test]
fn noise_rate_within_three_sigma() {
    let s = spec(64, 1, 8, 0.05, 14);
    let mut src = SyntheticSource::new(s.clone()).unwrap();
    let b = src.next_batch(10_000).unwrap();
    let extra: f64 = (&b.inputs - &b.targets).sum();
    let n: f64 = 10_000.0 * (64.0 - 8.0);
    let (mean, sd) = (n * 0.05, (n * 0.05 * 0.95).sqrt());
    assert!((extra - mean).abs() <= 3.0 * sd, "{extra} vs {mean}");
    assert!(b.inputs.iter().zip(b.targets.iter()).all(|(x, t)| x >= t));
}

#[test]
fn full_width_task_has_contiguous_placement_count() {
    // 1024 − 128 + 1 start positions for a 128-pixel run
    let s = SyntheticTaskSpec::new(1024, 1, 0);
    assert_eq!(s.object_length, 128);
    assert_eq!(s.placements(), 897);
}

#[test]
fn generators_are_reproducible() {
    let s = SyntheticTaskSpec::new(32, 2, 5);
    let a = SyntheticSource::new(s.clone()).unwrap().next_batch(50).unwrap();
    let b = SyntheticSource::new(s.clone()).unwrap().next_batch(50).unwrap();
    assert_eq!(a, b);
    let c = SyntheticSource::with_stream(s, 1).unwrap().next_batch(50).unwrap();
    assert_ne!(a, c);
}

#[test]
fn wrong_object_count_is_rejected() {
    let mut one = SyntheticSource::new(spec(8, 1, 1, 0.0, 0)).unwrap();
    assert!(matches!(one.sample_two_object(1), Err(Error::Config(_))));
    assert!(SyntheticSource::new(spec(8, 2, 5, 0.0, 0)).is_err());
}

#[test]
fn idx_magic_numbers() {
    let images = IdxTensor {
        dims: vec![2, 3, 3],
        data: (0..18).collect(),
    };
    assert_eq!(images.magic(), 0x0000_0803);
    let labels = IdxTensor {
        dims: vec![4],
        data: vec![1, 2, 3, 4],
    };
    assert_eq!(labels.magic(), 0x0000_0801);
    let dir = tempfile::tempdir().unwrap();
    for t in [images, labels] {
        let path = dir.path().join("t.idx");
        write_idx(&path, &t).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]), t.magic());
        assert_eq!(load_idx(&path).unwrap(), t);
    }
}

#[test]
fn idx_rejects_corruption() {
    let good = [0u8, 0, 8, 1, 0, 0, 0, 2, 7, 9];
    assert!(parse_idx(&good).is_ok());
    for bad_magic in [[1u8, 0], [0, 1]] {
        let mut b = good;
        b[..2].copy_from_slice(&bad_magic);
        assert!(matches!(parse_idx(&b), Err(Error::Format(_))));
    }
    for cut in 0..good.len() {
        assert!(parse_idx(&good[..cut]).is_err(), "prefix of length {cut} accepted");
    }
    assert!(load_idx("/nonexistent/file.idx").is_err());
}

#[test]
fn csv_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    let id = DMatrix::<f64>::identity(3, 3);
    write_matrix_csv(&id, &p).unwrap();
    assert_eq!(read_matrix_csv(&p).unwrap(), id);
    let pi = DMatrix::from_element(1, 1, std::f64::consts::PI);
    write_matrix_csv(&pi, &p).unwrap();
    assert_eq!(read_matrix_csv(&p).unwrap()[(0, 0)], 3.141592653589793);
    assert!(write_matrix_csv(&id, "").is_err());
    assert!(read_matrix_csv("").is_err());
    std::fs::write(&p, "1,2\n3\n").unwrap();
    assert!(read_matrix_csv(&p).is_err());
}

#[test]
fn matrix_source_covers_each_epoch() {
    let data = DMatrix::from_fn(5, 2, |r, c| (r * 2 + c) as f64);
    let mut src = MatrixSource::new(data.clone(), 3).unwrap();
    let b = src.next_batch(5).unwrap();
    assert_eq!(b.inputs, b.targets);
    let mut rows: Vec<f64> = b.inputs.column(0).iter().copied().collect();
    rows.sort_by(f64::total_cmp);
    assert_eq!(rows, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
}

#[test]
fn ledger_and_checkpoint_round_trip() {
    let cfg = TrainConfig {
        layers: vec![16, 8, 16],
        depth: 2,
        gamma: 1,
        k: 2,
        batch_size: 4,
        ..Default::default()
    };
    let mut run = MsannRun::new(cfg, &StrategyRegistry::default()).unwrap();
    let mut data = SyntheticSource::new(SyntheticTaskSpec::new(16, 1, 0)).unwrap();
    run.run(&mut data).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("ledger.csv");
    write_ledger_csv(&run.ledger, &lp).unwrap();
    assert_eq!(read_ledger_csv(&lp).unwrap(), run.ledger);
    assert!(std::fs::read_to_string(&lp).unwrap().starts_with("t,level,cost,mse\n"));

    let ck = dir.path().join("ck");
    let entries = write_checkpoint(&run.hierarchy, &ck).unwrap();
    let back = read_checkpoint(&ck).unwrap();
    assert_eq!(entries.len(), 3 * 4);
    for (entry, m) in back {
        let net = run.hierarchy.level(entry.level);
        assert_eq!(m.shape(), (entry.shape[0], entry.shape[1]));
        assert_eq!(m.as_slice(), net.tensor(entry.index));
    }
}
