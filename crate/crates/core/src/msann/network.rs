use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::shape_str;
use crate::{Error, Result};

/// Layer widths of a fully connected sigmoid autoencoder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LayerSpec {
    sizes: Vec<usize>,
}

impl LayerSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Config("an autoencoder needs at least two layers".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::Config(format!("layer widths must be positive: {sizes:?}")));
        }
        if sizes.first() != sizes.last() {
            return Err(Error::Config(format!(
                "autoencoder input and output widths differ: {sizes:?}"
            )));
        }
        Ok(Self { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn width(&self) -> usize {
        self.sizes[0]
    }

    /// Number of weight matrices (and of bias vectors).
    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Trainable parameter count `|M|`.
    pub fn n_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Every width divided by `factor`; errors unless all divide exactly.
    pub fn coarsened(&self, factor: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(self.sizes.len());
        for &w in &self.sizes {
            if factor == 0 || w % factor != 0 || w / factor == 0 {
                return Err(Error::Config(format!(
                    "layer width {w} cannot be coarsened by a factor of {factor}"
                )));
            }
            out.push(w / factor);
        }
        Self::new(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamRole {
    Weight,
    Bias,
}

/// One full parameter set in canonical order `W_0, b_0, W_1, b_1, …`.
///
/// `W_i` is `n_i × n_{i+1}` and acts on row-vector activations.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl Network {
    pub fn zeros(spec: &LayerSpec) -> Self {
        let s = spec.sizes();
        Self {
            weights: s.windows(2).map(|w| DMatrix::zeros(w[0], w[1])).collect(),
            biases: s[1..].iter().map(|&n| DVector::zeros(n)).collect(),
        }
    }

    /// Weights uniform on `±√(6/(fan_in + fan_out))`, biases zero.
    pub fn glorot<R: Rng + ?Sized>(spec: &LayerSpec, rng: &mut R) -> Self {
        let mut net = Self::zeros(spec);
        for w in &mut net.weights {
            let r = (6.0 / (w.nrows() + w.ncols()) as f64).sqrt();
            for x in w.iter_mut() {
                *x = rng.random_range(-r..r);
            }
        }
        net
    }

    pub fn n_tensors(&self) -> usize {
        self.weights.len() * 2
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn role(j: usize) -> ParamRole {
        if j % 2 == 0 {
            ParamRole::Weight
        } else {
            ParamRole::Bias
        }
    }

    pub fn tensor(&self, j: usize) -> &[f64] {
        if j % 2 == 0 {
            self.weights[j / 2].as_slice()
        } else {
            self.biases[j / 2].as_slice()
        }
    }

    pub fn tensor_mut(&mut self, j: usize) -> &mut [f64] {
        if j % 2 == 0 {
            self.weights[j / 2].as_mut_slice()
        } else {
            self.biases[j / 2].as_mut_slice()
        }
    }

    /// `(rows, cols)`; biases are column vectors.
    pub fn tensor_shape(&self, j: usize) -> (usize, usize) {
        if j % 2 == 0 {
            self.weights[j / 2].shape()
        } else {
            (self.biases[j / 2].len(), 1)
        }
    }

    /// Layer widths implied by the weight shapes.
    pub fn widths(&self) -> Vec<usize> {
        let mut out = vec![self.weights[0].nrows()];
        out.extend(self.weights.iter().map(|w| w.ncols()));
        out
    }

    /// Frobenius norm over all tensors.
    pub fn norm(&self) -> f64 {
        (0..self.n_tensors())
            .flat_map(|j| self.tensor(j).iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activations of every layer, input first. Rows of `x` are samples.
pub fn forward(theta: &Network, x: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    if x.ncols() != theta.weights[0].nrows() {
        return Err(Error::Shape(format!(
            "batch is {} but the first layer takes width {}",
            shape_str(x),
            theta.weights[0].nrows()
        )));
    }
    let mut acts = Vec::with_capacity(theta.weights.len() + 1);
    acts.push(x.clone());
    for (w, b) in theta.weights.iter().zip(&theta.biases) {
        let mut z = acts.last().expect("input pushed above") * w;
        for mut row in z.row_iter_mut() {
            row += b.transpose();
        }
        z.apply(|v| *v = sigmoid(*v));
        acts.push(z);
    }
    Ok(acts)
}

/// Mean of squared differences over every batch entry.
pub fn loss_mse(output: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<f64> {
    if output.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "output is {}, target is {}",
            shape_str(output),
            shape_str(target)
        )));
    }
    if output.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    Ok((output - target).norm_squared() / output.len() as f64)
}

/// MSE loss at `theta` and its exact gradient with respect to every tensor.
pub fn backprop_fine(theta: &Network, x: &DMatrix<f64>, target: &DMatrix<f64>) -> Result<(f64, Network)> {
    let acts = forward(theta, x)?;
    let out = acts.last().expect("at least one layer");
    let loss = loss_mse(out, target)?;

    let mut grad = Network {
        weights: Vec::with_capacity(theta.weights.len()),
        biases: Vec::with_capacity(theta.biases.len()),
    };
    let scale = 2.0 / out.len() as f64;
    // δ = dE/dz for the current layer's pre-activation
    let mut delta = (out - target) * scale;
    delta.component_mul_assign(&out.map(|y| y * (1.0 - y)));
    for i in (0..theta.weights.len()).rev() {
        let a = &acts[i];
        grad.weights.push(a.tr_mul(&delta));
        grad.biases.push(delta.row_sum().transpose());
        if i > 0 {
            let mut next = &delta * theta.weights[i].transpose();
            next.component_mul_assign(&a.map(|y| y * (1.0 - y)));
            delta = next;
        }
    }
    grad.weights.reverse();
    grad.biases.reverse();
    Ok((loss, grad))
}
