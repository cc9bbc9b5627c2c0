use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::msann::{CostLedger, LedgerEntry, MsannHierarchy, Network, ParamRole};
use crate::{Error, Result};

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// One row per line, comma-separated, 17 significant digits.
pub fn write_matrix_csv(m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path.as_ref(), &out)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| parse_err(path, i + 1, format!("`{c}`: {e}"))))
            .collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(parse_err(path, i + 1, format!("expected {c} columns, found {}", row.len())));
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, cols.unwrap_or(0), &values))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path.as_ref(), &text)
}

const LEDGER_HEADER: &str = "t,level,cost,mse";

pub fn write_ledger_csv(ledger: &CostLedger, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from(LEDGER_HEADER);
    out.push('\n');
    for e in &ledger.entries {
        writeln!(out, "{},{},{:?},{:?}", e.t, e.level, e.cost, e.mse).expect("writing to a String");
    }
    write_text(path.as_ref(), &out)
}

pub fn read_ledger_csv(path: impl AsRef<Path>) -> Result<CostLedger> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == LEDGER_HEADER => {}
        _ => return Err(parse_err(path, 1, format!("expected header `{LEDGER_HEADER}`"))),
    }
    let mut ledger = CostLedger::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(parse_err(path, i + 1, format!("expected 4 fields, found {}", f.len())));
        }
        let bad = |what: &str| parse_err(path, i + 1, format!("bad {what} `{line}`"));
        let entry = LedgerEntry {
            t: f[0].parse().map_err(|_| bad("step"))?,
            level: f[1].parse().map_err(|_| bad("level"))?,
            cost: f[2].parse().map_err(|_| bad("cost"))?,
            mse: f[3].parse().map_err(|_| bad("mse"))?,
        };
        ledger.entries.push(entry);
    }
    if !ledger.is_consistent() {
        return Err(parse_err(path, 0, "steps must count from 1 and costs must not decrease"));
    }
    Ok(ledger)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub level: usize,
    pub index: usize,
    pub shape: [usize; 2],
    pub role: ParamRole,
    pub file: String,
}

/// One CSV per tensor of every level plus `manifest.json`.
pub fn write_checkpoint(h: &MsannHierarchy, dir: impl AsRef<Path>) -> Result<Vec<CheckpointEntry>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Vec::new();
    for (level, net) in h.levels().iter().enumerate() {
        for index in 0..net.n_tensors() {
            let (r, c) = net.tensor_shape(index);
            let file = format!("level{level}_param{index}.csv");
            write_matrix_csv(&DMatrix::from_column_slice(r, c, net.tensor(index)), dir.join(&file))?;
            manifest.push(CheckpointEntry {
                level,
                index,
                shape: [r, c],
                role: Network::role(index),
                file,
            });
        }
    }
    write_json(&manifest, dir.join("manifest.json"))?;
    Ok(manifest)
}

pub fn read_checkpoint(dir: impl AsRef<Path>) -> Result<Vec<(CheckpointEntry, DMatrix<f64>)>> {
    let dir = dir.as_ref();
    let manifest_path: PathBuf = dir.join("manifest.json");
    let manifest: Vec<CheckpointEntry> = serde_json::from_str(&read_text(&manifest_path)?)?;
    manifest
        .into_iter()
        .map(|e| {
            let m = read_matrix_csv(dir.join(&e.file))?;
            if m.shape() != (e.shape[0], e.shape[1]) {
                return Err(Error::Shape(format!("{} does not match its manifest shape", e.file)));
            }
            Ok((e, m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let id = DMatrix::<f64>::identity(3, 3);
        write_matrix_csv(&id, &p).unwrap();
        assert_eq!(read_matrix_csv(&p).unwrap(), id);
        let pi = DMatrix::from_element(1, 1, std::f64::consts::PI);
        write_matrix_csv(&pi, &p).unwrap();
        assert_eq!(read_matrix_csv(&p).unwrap(), pi);
        assert!(matches!(write_matrix_csv(&pi, ""), Err(Error::Io { .. })));
        fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(read_matrix_csv(&p), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn ledger_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ledger.csv");
        let mut l = CostLedger::new();
        l.push(0, 32.0, 0.25);
        l.push(1, 8.123, 0.1 + 0.2);
        write_ledger_csv(&l, &p).unwrap();
        assert_eq!(read_ledger_csv(&p).unwrap(), l);
        fs::write(&p, "t,level,cost\n1,0,1\n").unwrap();
        assert!(matches!(read_ledger_csv(&p), Err(Error::Parse { .. })));
        fs::write(&p, "t,level,cost,mse\n1,0,x,1\n").unwrap();
        assert!(matches!(read_ledger_csv(&p), Err(Error::Parse { line: 2, .. })));
    }
}
