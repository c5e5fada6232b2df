//! Per-channel batch normalization over (batch x time).
//!
//! Train mode normalizes with statistics pooled over every sample and time
//! step in the batch; inference mode is a deterministic affine map using the
//! running statistics. Running stats are returned to the caller rather than
//! updated in place, so the forward pass stays a pure function.

use crate::math::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub bias: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub epsilon: f64,
    pub momentum: f64,
}

/// Batch statistics captured by a train-mode forward pass.
#[derive(Clone, Debug, Default)]
pub struct BnBatchStats {
    pub mean: Vec<f64>,
    /// Biased (population) variance, used for normalization.
    pub var: Vec<f64>,
    pub inv_std: Vec<f64>,
    /// Number of pooled observations per channel (batch x time).
    pub count: usize,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; channels],
            bias: vec![0.0; channels],
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            epsilon: 1e-5,
            momentum: 0.1,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    /// Train-mode forward over a batch of `[T x C]` matrices.
    ///
    /// Returns `(out, xhat, stats)` where `xhat` is the normalized value
    /// before scale and shift (cached for the backward pass).
    pub fn forward_train(&self, z: &[Matrix]) -> (Vec<Matrix>, Vec<Matrix>, BnBatchStats) {
        let c = self.channels();
        let count: usize = z.iter().map(|m| m.rows()).sum();
        let mut mean = vec![0.0; c];
        for m in z {
            debug_assert_eq!(m.cols(), c);
            for t in 0..m.rows() {
                let row = m.row(t);
                for j in 0..c {
                    mean[j] += row[j];
                }
            }
        }
        let n = count.max(1) as f64;
        for v in &mut mean {
            *v /= n;
        }
        let mut var = vec![0.0; c];
        for m in z {
            for t in 0..m.rows() {
                let row = m.row(t);
                for j in 0..c {
                    let d = row[j] - mean[j];
                    var[j] += d * d;
                }
            }
        }
        for v in &mut var {
            *v /= n;
        }
        let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + self.epsilon).sqrt()).collect();

        let mut xhat = Vec::with_capacity(z.len());
        let mut out = Vec::with_capacity(z.len());
        for m in z {
            let mut xh = Matrix::zeros(m.rows(), c);
            let mut o = Matrix::zeros(m.rows(), c);
            for t in 0..m.rows() {
                let row = m.row(t);
                let xh_row = xh.row_mut(t);
                for j in 0..c {
                    xh_row[j] = (row[j] - mean[j]) * inv_std[j];
                }
                let o_row = o.row_mut(t);
                for j in 0..c {
                    o_row[j] = self.gamma[j] * xh.get(t, j) + self.bias[j];
                }
            }
            xhat.push(xh);
            out.push(o);
        }
        (
            out,
            xhat,
            BnBatchStats {
                mean,
                var,
                inv_std,
                count,
            },
        )
    }

    /// Inference-mode forward: affine map from running statistics.
    pub fn forward_eval(&self, z: &[Matrix]) -> Vec<Matrix> {
        let c = self.channels();
        let scale: Vec<f64> = (0..c)
            .map(|j| self.gamma[j] / (self.running_var[j] + self.epsilon).sqrt())
            .collect();
        let shift: Vec<f64> = (0..c)
            .map(|j| self.bias[j] - scale[j] * self.running_mean[j])
            .collect();
        z.iter()
            .map(|m| {
                let mut o = Matrix::zeros(m.rows(), c);
                for t in 0..m.rows() {
                    let row = m.row(t);
                    let o_row = o.row_mut(t);
                    for j in 0..c {
                        o_row[j] = scale[j] * row[j] + shift[j];
                    }
                }
                o
            })
            .collect()
    }

    /// Folds batch statistics into the running estimates. The running
    /// variance uses the unbiased estimate when more than one observation
    /// was pooled.
    pub fn update_running(&mut self, stats: &BnBatchStats) {
        let m = self.momentum;
        let unbias = if stats.count > 1 {
            stats.count as f64 / (stats.count as f64 - 1.0)
        } else {
            1.0
        };
        for j in 0..self.channels() {
            self.running_mean[j] = (1.0 - m) * self.running_mean[j] + m * stats.mean[j];
            self.running_var[j] = (1.0 - m) * self.running_var[j] + m * stats.var[j] * unbias;
        }
    }

    /// Backward through the train-mode normalization.
    ///
    /// `dy` is the adjoint of the output; returns the adjoint of the raw
    /// input plus parameter gradients. The mean/variance dependence on every
    /// pooled observation is differentiated exactly:
    ///
    /// ```text
    /// dz = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
    /// ```
    pub fn backward_train(
        &self,
        xhat: &[Matrix],
        stats: &BnBatchStats,
        dy: &[Matrix],
    ) -> (Vec<Matrix>, Vec<f64>, Vec<f64>) {
        let c = self.channels();
        let n = stats.count.max(1) as f64;
        let mut dgamma = vec![0.0; c];
        let mut dbias = vec![0.0; c];
        let mut sum_dxhat = vec![0.0; c];
        let mut sum_dxhat_xhat = vec![0.0; c];
        for (xh, d) in xhat.iter().zip(dy) {
            for t in 0..xh.rows() {
                let xh_row = xh.row(t);
                let dy_row = d.row(t);
                for j in 0..c {
                    let dxh = dy_row[j] * self.gamma[j];
                    dgamma[j] += dy_row[j] * xh_row[j];
                    dbias[j] += dy_row[j];
                    sum_dxhat[j] += dxh;
                    sum_dxhat_xhat[j] += dxh * xh_row[j];
                }
            }
        }
        let mean_dxhat: Vec<f64> = sum_dxhat.iter().map(|v| v / n).collect();
        let mean_dxhat_xhat: Vec<f64> = sum_dxhat_xhat.iter().map(|v| v / n).collect();
        let dz: Vec<Matrix> = xhat
            .iter()
            .zip(dy)
            .map(|(xh, d)| {
                let mut dm = Matrix::zeros(xh.rows(), c);
                for t in 0..xh.rows() {
                    let xh_row = xh.row(t);
                    let dy_row = d.row(t);
                    let dz_row = dm.row_mut(t);
                    for j in 0..c {
                        let dxh = dy_row[j] * self.gamma[j];
                        dz_row[j] = stats.inv_std[j]
                            * (dxh - mean_dxhat[j] - xh_row[j] * mean_dxhat_xhat[j]);
                    }
                }
                dm
            })
            .collect();
        (dz, dgamma, dbias)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn random_batch(rng: &mut RngStream, b: usize, t: usize, c: usize, scale: f64) -> Vec<Matrix> {
        (0..b)
            .map(|_| {
                let mut m = Matrix::zeros(t, c);
                m.fill_uniform(rng, -scale, scale);
                m
            })
            .collect()
    }

    #[test]
    fn train_mode_normalizes_to_zero_mean_unit_var() {
        let mut rng = RngStream::new(3);
        // Input variance ~ 100 so the epsilon bias stays below 1e-6.
        let z = random_batch(&mut rng, 4, 25, 3, 17.5);
        let bn = BatchNorm::new(3);
        let (_, xhat, stats) = bn.forward_train(&z);
        let n = stats.count as f64;
        for j in 0..3 {
            let mut mean = 0.0;
            let mut var = 0.0;
            for m in &xhat {
                for t in 0..m.rows() {
                    mean += m.get(t, j);
                }
            }
            mean /= n;
            for m in &xhat {
                for t in 0..m.rows() {
                    let d = m.get(t, j) - mean;
                    var += d * d;
                }
            }
            var /= n;
            assert!(mean.abs() < 1e-6, "mean {mean}");
            assert!((var - 1.0).abs() < 1e-6, "var {var}");
        }
    }

    #[test]
    fn eval_mode_is_affine() {
        let mut bn = BatchNorm::new(2);
        bn.running_mean = vec![1.0, -2.0];
        bn.running_var = vec![4.0, 9.0];
        bn.gamma = vec![2.0, 1.0];
        bn.bias = vec![0.5, 0.0];
        let z = vec![Matrix::from_vec(1, 2, vec![3.0, 1.0]).unwrap()];
        let out = bn.forward_eval(&z);
        let s0 = 2.0 / (4.0f64 + 1e-5).sqrt();
        let s1 = 1.0 / (9.0f64 + 1e-5).sqrt();
        assert!((out[0].get(0, 0) - (s0 * (3.0 - 1.0) + 0.5)).abs() < 1e-12);
        assert!((out[0].get(0, 1) - (s1 * (1.0 + 2.0))).abs() < 1e-12);
    }

    #[test]
    fn running_stats_accumulate() {
        let mut bn = BatchNorm::new(1);
        let z = vec![Matrix::from_vec(4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap()];
        let (_, _, stats) = bn.forward_train(&z);
        bn.update_running(&stats);
        // mean 2.5, biased var 1.25, unbiased 1.25*4/3
        assert!((bn.running_mean[0] - 0.25).abs() < 1e-12);
        assert!((bn.running_var[0] - (0.9 + 0.1 * 1.25 * 4.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn backward_matches_finite_differences() {
        use crate::math::finite_diff_grad;
        let mut rng = RngStream::new(9);
        let z = random_batch(&mut rng, 2, 5, 2, 2.0);
        let bn = BatchNorm::new(2);
        // Scalar objective: weighted sum of outputs.
        let mut wts = Vec::new();
        for m in &z {
            let mut w = Matrix::zeros(m.rows(), m.cols());
            w.fill_uniform(&mut rng, -1.0, 1.0);
            wts.push(w);
        }

        let flat: Vec<f64> = z.iter().flat_map(|m| m.as_slice().to_vec()).collect();
        let shape: Vec<(usize, usize)> = z.iter().map(|m| (m.rows(), m.cols())).collect();
        let objective = |x: &[f64]| {
            let mut offset = 0;
            let mats: Vec<Matrix> = shape
                .iter()
                .map(|&(r, c)| {
                    let m = Matrix::from_vec(r, c, x[offset..offset + r * c].to_vec()).unwrap();
                    offset += r * c;
                    m
                })
                .collect();
            let (out, _, _) = bn.forward_train(&mats);
            out.iter()
                .zip(&wts)
                .map(|(o, w)| {
                    o.as_slice()
                        .iter()
                        .zip(w.as_slice())
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                })
                .sum()
        };
        let fd = finite_diff_grad(objective, &flat, 1e-6).unwrap();

        let (_, xhat, stats) = bn.forward_train(&z);
        let (dz, _, _) = bn.backward_train(&xhat, &stats, &wts);
        let got: Vec<f64> = dz.iter().flat_map(|m| m.as_slice().to_vec()).collect();
        for (g, f) in got.iter().zip(&fd) {
            assert!((g - f).abs() < 1e-6, "bn backward {g} vs fd {f}");
        }
    }
}
