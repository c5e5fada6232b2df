//! Batched forward simulation with the caches needed for reverse-mode
//! differentiation.
//!
//! Per layer and time step: the feedforward drive is batch-normalized, the
//! recurrent contribution (raw same-layer spikes through `V`) is added on
//! top, and each neuron advances its membrane, adaptation, and delay buffer.
//! The delay buffer is kept as a per-layer ring so advancing it costs O(1)
//! per neuron regardless of the delay order; only the mixing dot scales with
//! `n_d`. Dropout masks hidden-layer spikes on their way to the next layer
//! (inverted scaling, inference untouched); the readout sees raw spikes.

use crate::error::{Result, SnnError};
use crate::math::{matmul_nt, Matrix};
use crate::network::batchnorm::BnBatchStats;
use crate::network::{HiddenLayer, Network};
use crate::neuron::SpikeFn;
use crate::rng::RngStream;

/// Per-layer forward caches for one batch.
pub struct LayerTape {
    /// BN-normalized feedforward values before scale/shift, per sample.
    pub xhat: Vec<Matrix>,
    pub stats: BnBatchStats,
    /// Post-BN feedforward drive; also the delay-buffer input.
    pub ff: Vec<Matrix>,
    /// Recurrent drive `V s[t]`, recurrent layers only.
    pub rec: Option<Vec<Matrix>>,
    /// Membrane value at each step, before the update.
    pub u: Vec<Matrix>,
    /// Adaptation value at each step, adaptive layers only.
    pub w_state: Option<Vec<Matrix>>,
    /// Raw spike outputs.
    pub spikes: Vec<Matrix>,
    /// Dropout keep-mask on the layer's outgoing spikes (`1` = kept), absent
    /// for the last hidden layer and when dropout is off.
    pub mask: Option<Vec<Vec<u8>>>,
}

pub struct ReadoutTape {
    pub xhat: Vec<Matrix>,
    pub stats: BnBatchStats,
}

/// Everything the backward pass needs to replay one batch exactly.
pub struct Tape {
    pub spike: SpikeFn,
    pub dropout_rate: f64,
    pub layers: Vec<LayerTape>,
    pub readout: ReadoutTape,
}

/// Ring-buffered delay state for a whole layer: `h` rows of `n_d` slots
/// sharing one head index.
struct DelayRing {
    buf: Vec<f64>,
    n_d: usize,
    head: usize,
}

impl DelayRing {
    fn new(h: usize, n_d: usize) -> Self {
        DelayRing {
            buf: vec![0.0; h * n_d],
            n_d,
            head: 0,
        }
    }

    /// Advances the shared head; slot `head` now holds age-0 entries.
    #[inline]
    fn advance(&mut self) {
        self.head = (self.head + self.n_d - 1) % self.n_d;
    }

    #[inline]
    fn store(&mut self, neuron: usize, value: f64) {
        self.buf[neuron * self.n_d + self.head] = value;
    }

    /// Age-ordered weighted readout for one neuron, accumulated strictly in
    /// age order so the result is bit-identical to mixing a materialized
    /// buffer.
    #[inline]
    fn mix(&self, neuron: usize, weights: &[f64]) -> f64 {
        let row = &self.buf[neuron * self.n_d..(neuron + 1) * self.n_d];
        let split = self.n_d - self.head;
        let mut acc = 0.0;
        for (w, v) in weights[..split].iter().zip(&row[self.head..]) {
            acc += w * v;
        }
        for (w, v) in weights[split..].iter().zip(&row[..self.head]) {
            acc += w * v;
        }
        acc
    }
}

/// Per-sample dynamics caches written during simulation.
struct SampleRecord {
    u: Matrix,
    w_state: Option<Matrix>,
    rec: Option<Matrix>,
}

/// Runs one layer over one sample's drive `ff` (`T x h`), returning the raw
/// spike train. When `record` is given, per-step membrane/adaptation values
/// and the recurrent drive are cached for the backward pass.
fn simulate_layer_sequence(
    layer: &HiddenLayer,
    ff: &Matrix,
    spike: SpikeFn,
    mut record: Option<&mut SampleRecord>,
) -> Result<Matrix> {
    let h = layer.spec.h;
    let n_d = layer.spec.n_d;
    let t_len = ff.rows();
    let adaptive = layer.spec.model.adaptive();
    let theta = crate::neuron::THRESHOLD;

    let mut spikes = Matrix::zeros(t_len, h);
    let mut u = vec![0.0; h];
    let mut w = vec![0.0; h];
    let mut s_now = vec![0.0; h];
    let mut rec_drive = vec![0.0; h];
    let mut ring = DelayRing::new(h, n_d.max(1));

    for t in 0..t_len {
        for j in 0..h {
            let (s, _) = spike.apply(u[j], theta);
            s_now[j] = s;
        }
        if let Some(v) = &layer.v {
            v.matvec_into(&s_now, &mut rec_drive);
        }
        if let Some(rec) = record.as_deref_mut() {
            rec.u.row_mut(t).copy_from_slice(&u);
            if let Some(ws) = &mut rec.w_state {
                ws.row_mut(t).copy_from_slice(&w);
            }
            if let Some(rm) = &mut rec.rec {
                rm.row_mut(t).copy_from_slice(&rec_drive);
            }
        }
        spikes.row_mut(t).copy_from_slice(&s_now);

        let ff_row = ff.row(t);
        let has_rec = layer.v.is_some();
        if adaptive {
            // Delay buffer advances first; the current input mixes in
            // immediately.
            if n_d > 0 {
                ring.advance();
                for j in 0..h {
                    ring.store(j, ff_row[j]);
                }
            }
            let adapt = layer.adapt.as_ref().expect("adaptive layer has params");
            for j in 0..h {
                let alpha = layer.alpha[j];
                let mut i_s = ff_row[j];
                if has_rec {
                    i_s += rec_drive[j];
                }
                let mut u_next = alpha * u[j] + (1.0 - alpha) * (i_s - w[j])
                    - alpha * theta * s_now[j];
                if n_d > 0 {
                    u_next += ring.mix(j, layer.delay_w.row(j));
                }
                w[j] = adapt.a[j] * u[j] + adapt.beta[j] * w[j] + adapt.b[j] * s_now[j];
                u[j] = u_next;
            }
        } else {
            for j in 0..h {
                let alpha = layer.alpha[j];
                let mut i_s = ff_row[j];
                if has_rec {
                    i_s += rec_drive[j];
                }
                let mut u_next =
                    alpha * u[j] + (1.0 - alpha) * i_s - alpha * theta * s_now[j];
                if n_d > 0 {
                    u_next += ring.mix(j, layer.delay_w.row(j));
                }
                u[j] = u_next;
            }
            if n_d > 0 {
                ring.advance();
                for j in 0..h {
                    ring.store(j, ff_row[j]);
                }
            }
        }
    }
    if u.iter().any(|v| !v.is_finite()) || w.iter().any(|v| !v.is_finite()) {
        return Err(SnnError::NonFinite(
            "membrane state diverged during layer simulation".into(),
        ));
    }
    Ok(spikes)
}

impl Network {
    /// Train-mode forward pass over a batch of `[T x c_in]` frame tensors.
    ///
    /// Batch normalization uses statistics pooled over (batch x time); the
    /// observed statistics are recorded on the tape and folded into the
    /// running estimates only by [`Network::update_running_stats`], keeping
    /// this a pure function. Dropout masks are drawn from `dropout_rng` when
    /// given; pass `None` (or set rate 0) to disable.
    pub fn forward_train(
        &self,
        batch: &[&Matrix],
        spike: SpikeFn,
        mut dropout_rng: Option<&mut RngStream>,
    ) -> Result<(Vec<Vec<f64>>, Tape)> {
        self.check_batch(batch)?;
        let b_len = batch.len();
        let rate = self.spec.dropout_rate;

        let mut layer_tapes = Vec::with_capacity(self.layers.len());
        let mut x_cur: Vec<Matrix> = Vec::new(); // owned outputs of previous layer

        for (k, layer) in self.layers.iter().enumerate() {
            let h = layer.spec.h;
            let z: Vec<Matrix> = (0..b_len)
                .map(|b| {
                    let x: &Matrix = if k == 0 { batch[b] } else { &x_cur[b] };
                    matmul_nt(x, &layer.w)
                })
                .collect();
            let (ff, xhat, stats) = layer.bn.forward_train(&z);
            drop(z);

            let mut u_cache = Vec::with_capacity(b_len);
            let mut w_cache = layer.spec.model.adaptive().then(Vec::new);
            let mut rec_cache = layer.v.is_some().then(Vec::new);
            let mut spikes = Vec::with_capacity(b_len);
            for b in 0..b_len {
                let t_len = ff[b].rows();
                let mut record = SampleRecord {
                    u: Matrix::zeros(t_len, h),
                    w_state: layer.spec.model.adaptive().then(|| Matrix::zeros(t_len, h)),
                    rec: layer.v.is_some().then(|| Matrix::zeros(t_len, h)),
                };
                let s = simulate_layer_sequence(layer, &ff[b], spike, Some(&mut record))?;
                spikes.push(s);
                u_cache.push(record.u);
                if let Some(wc) = &mut w_cache {
                    wc.push(record.w_state.unwrap());
                }
                if let Some(rc) = &mut rec_cache {
                    rc.push(record.rec.unwrap());
                }
            }

            // Dropout between hidden layers only; the readout sees raw
            // spikes.
            let last_layer = k + 1 == self.layers.len();
            let mut mask: Option<Vec<Vec<u8>>> = None;
            if !last_layer {
                match (&mut dropout_rng, rate > 0.0) {
                    (Some(rng), true) => {
                        let scale = 1.0 / (1.0 - rate);
                        let mut masks = Vec::with_capacity(b_len);
                        let mut next = Vec::with_capacity(b_len);
                        for s in &spikes {
                            let mut m = vec![0u8; s.rows() * h];
                            let mut out = Matrix::zeros(s.rows(), h);
                            for t in 0..s.rows() {
                                for j in 0..h {
                                    if !rng.bernoulli(rate) {
                                        m[t * h + j] = 1;
                                        out.set(t, j, s.get(t, j) * scale);
                                    }
                                }
                            }
                            masks.push(m);
                            next.push(out);
                        }
                        mask = Some(masks);
                        x_cur = next;
                    }
                    _ => x_cur = spikes.clone(),
                }
            }

            layer_tapes.push(LayerTape {
                xhat,
                stats,
                ff,
                rec: rec_cache,
                u: u_cache,
                w_state: w_cache,
                spikes,
                mask,
            });
        }

        // Accumulative readout over raw last-layer spikes.
        let last_spikes: Vec<&Matrix> = layer_tapes.last().unwrap().spikes.iter().collect();
        let z_out: Vec<Matrix> = last_spikes
            .iter()
            .map(|s| matmul_nt(s, &self.w_out))
            .collect();
        let (y_out, xhat_out, stats_out) = self.bn_out.forward_train(&z_out);
        let logits = average_over_time(&y_out)?;

        Ok((
            logits,
            Tape {
                spike,
                dropout_rate: rate,
                layers: layer_tapes,
                readout: ReadoutTape {
                    xhat: xhat_out,
                    stats: stats_out,
                },
            },
        ))
    }

    /// Inference-mode forward pass: hard threshold, BN running statistics,
    /// no dropout.
    pub fn forward_eval(&self, batch: &[&Matrix]) -> Result<Vec<Vec<f64>>> {
        self.check_batch(batch)?;
        let b_len = batch.len();
        let mut x_cur: Vec<Matrix> = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let z: Vec<Matrix> = (0..b_len)
                .map(|b| {
                    let x: &Matrix = if k == 0 { batch[b] } else { &x_cur[b] };
                    matmul_nt(x, &layer.w)
                })
                .collect();
            let ff = layer.bn.forward_eval(&z);
            let mut spikes = Vec::with_capacity(b_len);
            for f in &ff {
                spikes.push(simulate_layer_sequence(layer, f, SpikeFn::Boxcar, None)?);
            }
            x_cur = spikes;
        }
        let z_out: Vec<Matrix> = x_cur.iter().map(|s| matmul_nt(s, &self.w_out)).collect();
        let y_out = self.bn_out.forward_eval(&z_out);
        average_over_time(&y_out)
    }

    /// Folds the batch statistics recorded on `tape` into the BN running
    /// estimates.
    pub fn update_running_stats(&mut self, tape: &Tape) {
        for (layer, lt) in self.layers.iter_mut().zip(&tape.layers) {
            layer.bn.update_running(&lt.stats);
        }
        self.bn_out.update_running(&tape.readout.stats);
    }

    fn check_batch(&self, batch: &[&Matrix]) -> Result<()> {
        if batch.is_empty() {
            return Err(SnnError::InvalidArg("empty batch".into()));
        }
        for (b, m) in batch.iter().enumerate() {
            if m.cols() != self.spec.c_in {
                return Err(SnnError::dim(
                    "forward",
                    format!("sample {b} has {} channels, expected {}", m.cols(), self.spec.c_in),
                ));
            }
            if m.rows() == 0 {
                return Err(SnnError::InvalidArg(format!("sample {b} has zero frames")));
            }
        }
        // Self-connections are structurally excluded; reject tampered nets.
        for (k, layer) in self.layers.iter().enumerate() {
            if let Some(v) = &layer.v {
                if (0..layer.spec.h).any(|i| v.get(i, i) != 0.0) {
                    return Err(SnnError::InvalidArg(format!(
                        "layer {k}: recurrent matrix has a nonzero diagonal"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn average_over_time(y: &[Matrix]) -> Result<Vec<Vec<f64>>> {
    y.iter()
        .map(|m| {
            if m.rows() == 0 {
                return Err(SnnError::InvalidArg("readout over zero time steps".into()));
            }
            let c = m.cols();
            let mut acc = vec![0.0; c];
            for t in 0..m.rows() {
                for (a, v) in acc.iter_mut().zip(m.row(t)) {
                    *a += v;
                }
            }
            let scale = 1.0 / m.rows() as f64;
            for a in &mut acc {
                *a *= scale;
            }
            if acc.iter().any(|v| !v.is_finite()) {
                return Err(SnnError::NonFinite("logits".into()));
            }
            Ok(acc)
        })
        .collect()
}
