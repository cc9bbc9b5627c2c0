use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use msgprol::data::{
    load_idx, pad_images, write_checkpoint, write_json, write_ledger_csv, write_matrix_csv, DataSource, MatrixSource,
    SyntheticSource, SyntheticTaskSpec, DATA_DIR_ENV,
};
use msgprol::graph::{laplacian, make_lineage, manhattan, LineageFamily};
use msgprol::msann::{CostLedger, MsannRun};
use msgprol::prolongation::{solve_prolongation, ProlongationProblem, StrategyRegistry};
use msgprol::spectral::MatcherRegistry;
use msgprol::{DMatrix, Error, Result};
use serde::Serialize;

use crate::config::{RunConfig, TaskConfig, TrainingConfig};

/// Stream ids for the synthetic training and validation data.
const TRAIN_DATA_STREAM: u64 = 2;
const EVAL_DATA_STREAM: u64 = 3;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

#[derive(Serialize)]
struct LineageMember {
    level: usize,
    n: usize,
    edges: usize,
    laplacian: String,
    distance: String,
}

#[derive(Serialize)]
struct LineageManifest {
    family: LineageFamily,
    depth: usize,
    base: usize,
    sizes: Vec<usize>,
    members: Vec<LineageMember>,
}

pub fn lineage(family: LineageFamily, depth: usize, base: usize, out: &Path) -> Result<String> {
    let lin = make_lineage(family, depth, base)?;
    ensure_dir(out)?;
    let mut members = Vec::new();
    for (level, g) in lin.members.iter().enumerate() {
        let lap = format!("laplacian_{level}.csv");
        let dist = format!("distance_{level}.csv");
        write_matrix_csv(&laplacian(g).data, out.join(&lap))?;
        write_matrix_csv(&manhattan(g)?.data, out.join(&dist))?;
        members.push(LineageMember {
            level,
            n: g.n(),
            edges: g.edge_count(),
            laplacian: lap,
            distance: dist,
        });
    }
    let manifest = LineageManifest {
        family,
        depth,
        base,
        sizes: lin.sizes(),
        members,
    };
    write_json(&manifest, out.join("manifest.json"))?;
    Ok(format!("{family} lineage sizes {:?} written to {}", manifest.sizes, out.display()))
}

pub fn solve(run: &RunConfig, seed: Option<u64>, out: &Path) -> Result<String> {
    let cfg = run
        .problem
        .as_ref()
        .ok_or_else(|| Error::Config("config has no `problem` section".into()))?;
    let mut opt = cfg.optimizer.clone();
    if let Some(s) = seed.or(run.seed) {
        opt.seed = s;
    }
    opt.validate()?;
    let matchers = MatcherRegistry::default();
    let matcher = matchers.get(&cfg.matcher)?;
    let mut prob = ProlongationProblem::new(cfg.coarse.build()?, cfg.fine.build()?, cfg.s)?;
    if let Some(a) = cfg.alpha {
        prob = prob.with_alpha(a)?;
    }
    if let Some(b) = cfg.beta {
        prob = prob.with_beta(b)?;
    }

    let (map, report) = solve_prolongation(&prob, matcher, &opt)?;
    ensure_dir(out)?;
    write_matrix_csv(&map.p, out.join("P.csv"))?;
    write_json(&report, out.join("report.json"))?;
    Ok(format!(
        "{} -> {} vertices: objective {:.6e} (initial {:.6e}) after {} iterations",
        prob.n1(),
        prob.n2(),
        report.objective,
        report.initial_objective,
        report.iters
    ))
}

#[derive(Serialize)]
struct TrainSummary {
    final_mse: f64,
    final_batch_mse: Option<f64>,
    initial_batch_mse: Option<f64>,
    cost_to_tenth_initial_mse: Option<f64>,
    total_cost: f64,
    batches: usize,
    cycle_cost: f64,
    level_sizes: Vec<usize>,
    depth: usize,
    gamma: usize,
    k: usize,
    strategy: String,
    seed: u64,
}

fn resolve_data_path(path: &Path) -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(root) if path.is_relative() => PathBuf::from(root).join(path),
        _ => path.to_path_buf(),
    }
}

/// Training source plus a fixed evaluation batch.
fn build_data(cfg: &TrainingConfig, seed: u64) -> Result<(Box<dyn DataSource>, msgprol::data::Batch)> {
    match &cfg.task {
        TaskConfig::Synthetic {
            width,
            objects,
            object_length,
            noise_p,
        } => {
            let mut spec = SyntheticTaskSpec::new(*width, *objects, seed);
            if let Some(len) = object_length {
                spec.object_length = *len;
            }
            if let Some(p) = noise_p {
                spec.noise_p = *p;
            }
            let train = SyntheticSource::with_stream(spec.clone(), TRAIN_DATA_STREAM)?;
            let eval = SyntheticSource::with_stream(spec, EVAL_DATA_STREAM)?.next_batch(cfg.eval_samples)?;
            Ok((Box::new(train), eval))
        }
        TaskConfig::Idx { path, pad_to, limit } => {
            let t = load_idx(resolve_data_path(path))?;
            let mut m = t.to_matrix();
            if let Some(target) = pad_to {
                if t.dims.len() != 3 || t.dims[1] != t.dims[2] {
                    return Err(Error::Config("padding needs a stack of square images".into()));
                }
                m = pad_images(&m, t.dims[1], *target)?;
            }
            if let Some(n) = limit {
                let n = (*n).min(m.nrows());
                m = m.rows(0, n).into_owned();
            }
            let n_eval = cfg.eval_samples.min(m.nrows());
            let eval_rows: DMatrix<f64> = m.rows(0, n_eval).into_owned();
            let eval = msgprol::data::Batch {
                targets: eval_rows.clone(),
                inputs: eval_rows,
            };
            Ok((Box::new(MatrixSource::new(m, seed)?), eval))
        }
    }
}

pub fn train(run: &RunConfig, seed: Option<u64>, depth: Option<usize>, gamma: Option<usize>, out: &Path) -> Result<String> {
    let section = run
        .training
        .as_ref()
        .ok_or_else(|| Error::Config("config has no `training` section".into()))?;
    let mut net = section.network.clone();
    if let Some(s) = seed.or(run.seed) {
        net.seed = s;
    }
    if let Some(d) = depth {
        net.depth = d;
    }
    if let Some(g) = gamma {
        net.gamma = g;
    }
    if let Some(b) = section.cost_budget {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Config("cost_budget must be positive".into()));
        }
    }
    if section.eval_samples == 0 {
        return Err(Error::Config("eval_samples must be >= 1".into()));
    }
    let mut run_state = MsannRun::new(net.clone(), &StrategyRegistry::default())?;
    let (mut data, eval) = build_data(section, net.seed)?;
    if data.width() != net.layers[0] {
        return Err(Error::Config(format!(
            "data width {} does not match input layer width {}",
            data.width(),
            net.layers[0]
        )));
    }

    match section.cost_budget {
        Some(b) => run_state.run_until_cost(b, data.as_mut())?,
        None => run_state.run(data.as_mut())?,
    }

    ensure_dir(out)?;
    write_ledger_csv(&run_state.ledger, out.join("ledger.csv"))?;
    write_checkpoint(&run_state.hierarchy, out.join("checkpoint"))?;
    let ledger = &run_state.ledger;
    let summary = TrainSummary {
        final_mse: run_state.evaluate(&eval)?,
        final_batch_mse: ledger.final_mse(),
        initial_batch_mse: ledger.initial_mse(),
        cost_to_tenth_initial_mse: ledger.cost_to_tenth(),
        total_cost: ledger.total_cost(),
        batches: ledger.len(),
        cycle_cost: run_state.cycle_cost(),
        level_sizes: run_state.level_sizes(),
        depth: net.depth,
        gamma: net.gamma,
        k: net.k,
        strategy: net.strategy.clone(),
        seed: net.seed,
    };
    write_json(&summary, out.join("summary.json"))?;
    Ok(format!(
        "{} batches, total cost {:.1}, final validation MSE {:.4e}",
        ledger.len(),
        ledger.total_cost(),
        summary.final_mse
    ))
}

struct RunRow {
    name: String,
    final_mse: Option<f64>,
    cost: Option<f64>,
    is_default: bool,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.4e}"))
}

fn ratio(default: Option<f64>, run: Option<f64>) -> Option<f64> {
    match (default, run) {
        (Some(d), Some(r)) if r > 0.0 => Some(d / r),
        _ => None,
    }
}

/// Runs whose ledger never leaves level 0 count as default training.
pub fn report(ledgers: &[PathBuf], out: Option<&Path>) -> Result<String> {
    let mut rows = Vec::new();
    for path in ledgers {
        let ledger: CostLedger = msgprol::data::read_ledger_csv(path)?;
        let name = path
            .parent()
            .and_then(|p| p.file_name())
            .filter(|_| path.file_name().is_some_and(|f| f == "ledger.csv"))
            .or_else(|| path.file_stem())
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        rows.push(RunRow {
            name,
            final_mse: ledger.final_mse(),
            cost: ledger.cost_to_tenth(),
            is_default: ledger.max_level() == 0,
        });
    }
    let default_cost = rows.iter().find(|r| r.is_default).and_then(|r| r.cost);

    let mut table: Vec<[String; 4]> = vec![[
        "run".into(),
        "final_mse".into(),
        "cost_to_1/10_mse".into(),
        "default_cost/msann_cost".into(),
    ]];
    for r in &rows {
        let rat = if r.is_default { None } else { ratio(default_cost, r.cost) };
        table.push([r.name.clone(), fmt_opt(r.final_mse), fmt_opt(r.cost), fmt_opt(rat)]);
    }

    let msann: Vec<&RunRow> = rows.iter().filter(|r| !r.is_default).collect();
    if !msann.is_empty() {
        let key = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
        let best_mse = msann.iter().map(|r| key(r.final_mse)).fold(f64::INFINITY, f64::min);
        let worst_mse = msann.iter().map(|r| key(r.final_mse)).fold(f64::NEG_INFINITY, f64::max);
        let best_cost = msann.iter().map(|r| key(r.cost)).fold(f64::INFINITY, f64::min);
        let worst_cost = msann.iter().map(|r| key(r.cost)).fold(f64::NEG_INFINITY, f64::max);
        let finite = |x: f64| x.is_finite().then_some(x);
        table.push([
            "best-msann".into(),
            fmt_opt(finite(best_mse)),
            fmt_opt(finite(best_cost)),
            fmt_opt(ratio(default_cost, finite(best_cost))),
        ]);
        table.push([
            "worst-msann".into(),
            fmt_opt(finite(worst_mse)),
            fmt_opt(finite(worst_cost)),
            fmt_opt(ratio(default_cost, finite(worst_cost))),
        ]);
        if let Some(d) = rows.iter().find(|r| r.is_default) {
            table.push(["default".into(), fmt_opt(d.final_mse), fmt_opt(d.cost), "N/A".into()]);
        }
    }

    let widths: Vec<usize> = (0..4).map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut text = String::new();
    for r in &table {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        writeln!(text, "{}", cells.join("  ").trim_end()).expect("writing to a String");
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let csv: String = table.iter().map(|r| r.join(",") + "\n").collect();
        fs::write(dir.join("report.csv"), csv).map_err(|e| Error::Io {
            path: dir.join("report.csv"),
            source: e,
        })?;
    }
    Ok(text)
}
