//! Datasets and file formats.

mod idx;
mod io;
mod synthetic;

pub use idx::{load_idx, pad_images, parse_idx, write_idx, IdxTensor};
pub use io::{
    read_checkpoint, read_ledger_csv, read_matrix_csv, write_checkpoint, write_json, write_ledger_csv,
    write_matrix_csv, CheckpointEntry,
};
pub use synthetic::{SyntheticSource, SyntheticTaskSpec};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Environment variable naming the dataset root directory.
pub const DATA_DIR_ENV: &str = "MSGPROL_DATA_DIR";

/// Rows are samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub inputs: DMatrix<f64>,
    pub targets: DMatrix<f64>,
}

pub trait DataSource {
    fn width(&self) -> usize;

    fn next_batch(&mut self, b: usize) -> Result<Batch>;
}

/// Autoencoding over a fixed sample matrix in shuffled-epoch order.
#[derive(Clone, Debug)]
pub struct MatrixSource {
    data: DMatrix<f64>,
    order: Vec<usize>,
    pos: usize,
    rng: ChaCha8Rng,
}

impl MatrixSource {
    pub fn new(data: DMatrix<f64>, seed: u64) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::Config("dataset is empty".into()));
        }
        let mut s = Self {
            order: (0..data.nrows()).collect(),
            data,
            pos: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        s.order.shuffle(&mut s.rng);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }
}

impl DataSource for MatrixSource {
    fn width(&self) -> usize {
        self.data.ncols()
    }

    fn next_batch(&mut self, b: usize) -> Result<Batch> {
        let mut rows = Vec::with_capacity(b);
        while rows.len() < b {
            if self.pos == self.order.len() {
                self.order.shuffle(&mut self.rng);
                self.pos = 0;
            }
            rows.push(self.order[self.pos]);
            self.pos += 1;
        }
        let inputs = self.data.select_rows(&rows);
        Ok(Batch {
            targets: inputs.clone(),
            inputs,
        })
    }
}
