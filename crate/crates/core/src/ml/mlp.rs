//! One-hidden-layer perceptron with sigmoid hidden units and a two-unit
//! softmax output, trained online with momentum on cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::check_trainable;
use crate::error::{Error, Result};
use crate::model::{EffectivenessLabel, FeatureMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    /// `None` means `ceil((d + 2) / 2)`.
    pub hidden: Option<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Initial weights are drawn from `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: None,
            learning_rate: 0.3,
            momentum: 0.2,
            epochs: 500,
            init_scale: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    /// Training-split column means and standard deviations.
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// `hidden x (inputs + 1)`, bias last in each row.
    pub w1: Vec<f64>,
    /// `2 x (hidden + 1)`, bias last in each row.
    pub w2: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct Pass {
    hidden: Vec<f64>,
    /// Softmax output; `[1]` is the probability of Effective.
    out: [f64; 2],
}

impl Mlp {
    fn new(inputs: usize, hidden: usize, mean: Vec<f64>, scale: Vec<f64>, init: f64, rng: &mut impl Rng) -> Self {
        let mut draw = |n: usize| (0..n).map(|_| rng.gen_range(-init..=init)).collect::<Vec<_>>();
        let w1 = draw(hidden * (inputs + 1));
        let w2 = draw(2 * (hidden + 1));
        Mlp {
            inputs,
            hidden,
            mean,
            scale,
            w1,
            w2,
        }
    }

    pub fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    fn forward(&self, x: &[f64]) -> Pass {
        let stride = self.inputs + 1;
        let hidden: Vec<f64> = (0..self.hidden)
            .map(|h| {
                let w = &self.w1[h * stride..(h + 1) * stride];
                sigmoid(w[..self.inputs].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[self.inputs])
            })
            .collect();
        let stride = self.hidden + 1;
        let z: Vec<f64> = (0..2)
            .map(|o| {
                let w = &self.w2[o * stride..(o + 1) * stride];
                w[..self.hidden].iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>() + w[self.hidden]
            })
            .collect();
        let m = z[0].max(z[1]);
        let (e0, e1) = ((z[0] - m).exp(), (z[1] - m).exp());
        Pass {
            hidden,
            out: [e0 / (e0 + e1), e1 / (e0 + e1)],
        }
    }

    /// Cross-entropy of one standardized row and its gradient, accumulated into `g1`/`g2`.
    fn backprop(&self, x: &[f64], target: usize, g1: &mut [f64], g2: &mut [f64]) -> f64 {
        let pass = self.forward(x);
        let d_out = [
            pass.out[0] - f64::from(u8::from(target == 0)),
            pass.out[1] - f64::from(u8::from(target == 1)),
        ];
        let s2 = self.hidden + 1;
        for o in 0..2 {
            for h in 0..self.hidden {
                g2[o * s2 + h] += d_out[o] * pass.hidden[h];
            }
            g2[o * s2 + self.hidden] += d_out[o];
        }
        let s1 = self.inputs + 1;
        for h in 0..self.hidden {
            let back = d_out[0] * self.w2[h] + d_out[1] * self.w2[s2 + h];
            let dz = back * pass.hidden[h] * (1.0 - pass.hidden[h]);
            for i in 0..self.inputs {
                g1[h * s1 + i] += dz * x[i];
            }
            g1[h * s1 + self.inputs] += dz;
        }
        -pass.out[target].max(f64::MIN_POSITIVE).ln()
    }

    /// Probability of Effective for a raw (unstandardized) row.
    pub fn score(&self, row: &[f64]) -> f64 {
        self.forward(&self.standardize(row)).out[1]
    }

    /// All weights, `w1` then `w2`.
    pub fn parameters(&self) -> Vec<f64> {
        self.w1.iter().chain(&self.w2).copied().collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        let n1 = self.w1.len();
        self.w1.copy_from_slice(&params[..n1]);
        self.w2.copy_from_slice(&params[n1..]);
    }

    /// Summed cross-entropy over raw rows and its analytic gradient, laid
    /// out like [`Mlp::parameters`].
    pub fn loss_and_gradient(&self, rows: &[Vec<f64>], targets: &[EffectivenessLabel]) -> (f64, Vec<f64>) {
        let mut g1 = vec![0.0; self.w1.len()];
        let mut g2 = vec![0.0; self.w2.len()];
        let mut loss = 0.0;
        for (row, t) in rows.iter().zip(targets) {
            loss += self.backprop(&self.standardize(row), t.index(), &mut g1, &mut g2);
        }
        g1.extend(g2);
        (loss, g1)
    }
}

/// Column means and population standard deviations; constant columns get scale 1.
fn standardization(matrix: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = matrix.n_rows() as f64;
    (0..matrix.n_features())
        .map(|j| {
            let col = matrix.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            (mean, if sd > 0.0 && sd.is_finite() { sd } else { 1.0 })
        })
        .unzip()
}

/// Fresh network with standardization fitted to `matrix` and no training.
pub fn init_mlp(matrix: &FeatureMatrix, params: &MlpParams, seed: u64) -> Mlp {
    let d = matrix.n_features();
    let hidden = params.hidden.unwrap_or((d + 2).div_ceil(2)).max(1);
    let (mean, scale) = standardization(matrix);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Mlp::new(d, hidden, mean, scale, params.init_scale, &mut rng)
}

pub fn train_mlp(matrix: &FeatureMatrix, params: &MlpParams, seed: u64) -> Result<Mlp> {
    check_trainable(matrix)?;
    let mut net = init_mlp(matrix, params, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let xs: Vec<Vec<f64>> = matrix.rows().iter().map(|r| net.standardize(r)).collect();
    let ys: Vec<usize> = matrix.targets().iter().map(|t| t.index()).collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut v1 = vec![0.0; net.w1.len()];
    let mut v2 = vec![0.0; net.w2.len()];
    let mut g1 = vec![0.0; net.w1.len()];
    let mut g2 = vec![0.0; net.w2.len()];
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for &i in &order {
            g1.iter_mut().for_each(|g| *g = 0.0);
            g2.iter_mut().for_each(|g| *g = 0.0);
            loss += net.backprop(&xs[i], ys[i], &mut g1, &mut g2);
            for (w, (v, g)) in net.w1.iter_mut().zip(v1.iter_mut().zip(&g1)) {
                *v = params.momentum * *v - params.learning_rate * g;
                *w += *v;
            }
            for (w, (v, g)) in net.w2.iter_mut().zip(v2.iter_mut().zip(&g2)) {
                *v = params.momentum * *v - params.learning_rate * g;
                *w += *v;
            }
        }
        if !loss.is_finite() || net.w1.iter().chain(&net.w2).any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }
    Ok(net)
}
