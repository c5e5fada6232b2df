//! Reverse-mode differentiation through the unrolled spiking dynamics.
//!
//! Walks the tape backwards: readout BN, then per layer a reverse time loop
//! that carries adjoints for the membrane, the adaptation variable, and the
//! delay buffer. The delay-buffer adjoint propagates by the transpose shift
//! (slot `j` at `t+1` feeds slot `j-1` at `t`, slot `0` feeds the buffer
//! input), realized on a ring so each step costs O(1) per neuron plus the
//! mixing dots. The spike nonlinearity differentiates through the recorded
//! surrogate; the reset term is treated as differentiable through the spike
//! like every other use of it.

use crate::error::{Result, SnnError};
use crate::math::Matrix;
use crate::network::forward::Tape;
use crate::network::{NetGrads, Network};
use crate::neuron::THRESHOLD;

/// Adjoint ring for a layer's delay buffers: `h` rows of `n_d` age slots
/// with one shared head.
struct AdjointRing {
    buf: Vec<f64>,
    n_d: usize,
    head: usize,
}

impl AdjointRing {
    fn new(h: usize, n_d: usize) -> Self {
        AdjointRing {
            buf: vec![0.0; h * n_d],
            n_d,
            head: 0,
        }
    }

    #[inline]
    fn slot(&self, neuron: usize, age: usize) -> usize {
        neuron * self.n_d + (self.head + age) % self.n_d
    }

    /// Adds `coeffs[m] * g` into every age slot of one neuron.
    #[inline]
    fn add_weighted(&mut self, neuron: usize, coeffs: &[f64], g: f64) {
        let base = neuron * self.n_d;
        let row = &mut self.buf[base..base + self.n_d];
        let split = self.n_d - self.head;
        for (slot, c) in row[self.head..].iter_mut().zip(&coeffs[..split]) {
            *slot += c * g;
        }
        for (slot, c) in row[..self.head].iter_mut().zip(&coeffs[split..]) {
            *slot += c * g;
        }
    }

    /// Transpose shift: returns each neuron's age-0 adjoint (the buffer-input
    /// gradient) into `out`, then retires that slot so ages move down by one.
    fn pop_inputs(&mut self, out: &mut [f64]) {
        let h = out.len();
        for (j, o) in out.iter_mut().enumerate() {
            let idx = self.slot(j, 0);
            *o = self.buf[idx];
            self.buf[idx] = 0.0;
        }
        debug_assert_eq!(h * self.n_d, self.buf.len());
        self.head = (self.head + 1) % self.n_d;
    }
}

/// Gradients of every trainable tensor for one forward tape.
///
/// `inputs` must be the same batch the tape was recorded from; `dlogits` is
/// the loss gradient at the accumulated readout (already scaled by any batch
/// averaging).
pub fn backward(
    net: &Network,
    tape: &Tape,
    inputs: &[&Matrix],
    dlogits: &[Vec<f64>],
) -> Result<NetGrads> {
    let b_len = inputs.len();
    if tape.layers.is_empty() || tape.layers[0].ff.len() != b_len || dlogits.len() != b_len {
        return Err(SnnError::dim(
            "backward",
            format!(
                "tape batch {}, inputs {}, dlogits {}",
                tape.layers.first().map_or(0, |l| l.ff.len()),
                b_len,
                dlogits.len()
            ),
        ));
    }
    let mut grads = NetGrads::zeros_like(net);

    // Readout: logits are the time average of BN(W_out s[t]).
    let last = tape.layers.len() - 1;
    let dy_out: Vec<Matrix> = (0..b_len)
        .map(|b| {
            let t_len = tape.readout.xhat[b].rows();
            let mut m = Matrix::zeros(t_len, net.spec.c_out);
            let scale = 1.0 / t_len as f64;
            for t in 0..t_len {
                for (c, v) in m.row_mut(t).iter_mut().enumerate() {
                    *v = dlogits[b][c] * scale;
                }
            }
            m
        })
        .collect();
    let (dz_out, dgamma_out, dbias_out) =
        net.bn_out
            .backward_train(&tape.readout.xhat, &tape.readout.stats, &dy_out);
    grads.gamma_out = dgamma_out;
    grads.bias_out = dbias_out;

    // ds_raw: adjoint of the current layer's raw spike outputs.
    let mut ds_raw: Vec<Matrix> = Vec::with_capacity(b_len);
    for b in 0..b_len {
        let spikes = &tape.layers[last].spikes[b];
        let t_len = spikes.rows();
        let mut ds = Matrix::zeros(t_len, spikes.cols());
        for t in 0..t_len {
            grads.w_out.add_outer(dz_out[b].row(t), spikes.row(t));
            net.w_out.tr_matvec_into(dz_out[b].row(t), ds.row_mut(t));
        }
        ds_raw.push(ds);
    }

    for k in (0..net.layers.len()).rev() {
        let layer = &net.layers[k];
        let lt = &tape.layers[k];
        let lg = &mut grads.layers[k];
        let h = layer.spec.h;
        let n_d = layer.spec.n_d;
        let adaptive = layer.spec.model.adaptive();
        let recurrent = layer.v.is_some();
        let dropout_scale = 1.0 / (1.0 - tape.dropout_rate);

        // Reverse time loop per sample, filling the adjoint of the post-BN
        // feedforward drive.
        let mut gff: Vec<Matrix> = Vec::with_capacity(b_len);
        for b in 0..b_len {
            let ff = &lt.ff[b];
            let u = &lt.u[b];
            let spikes = &lt.spikes[b];
            let w_state = lt.w_state.as_ref().map(|w| &w[b]);
            let rec = lt.rec.as_ref().map(|r| &r[b]);
            let t_len = ff.rows();

            let mut gff_b = Matrix::zeros(t_len, h);
            let mut gu_next = vec![0.0; h];
            let mut gw_next = vec![0.0; h];
            let mut gu_cur = vec![0.0; h];
            let mut gw_cur = vec![0.0; h];
            let mut gis = vec![0.0; h];
            let mut gs = vec![0.0; h];
            let mut gid = vec![0.0; h];
            let mut rec_back = vec![0.0; h];
            let mut ring = AdjointRing::new(h, n_d.max(1));

            for t in (0..t_len).rev() {
                // Delay-buffer adjoint. The adaptive family reads the buffer
                // after its shift, the LIF family before it, so the order of
                // "mix in" versus "transpose shift" flips between them.
                if n_d > 0 {
                    if adaptive {
                        for j in 0..h {
                            let g = gu_next[j];
                            if g != 0.0 {
                                ring.add_weighted(j, layer.delay_w.row(j), g);
                                if let Some(dw) = &mut lg.delay_w {
                                    // Buffer after the shift at t holds the
                                    // drive rows t, t-1, ...
                                    let row = dw.row_mut(j);
                                    for (m, slot) in row.iter_mut().enumerate().take(t + 1) {
                                        *slot += g * ff.get(t - m, j);
                                    }
                                }
                            }
                        }
                        ring.pop_inputs(&mut gid);
                    } else {
                        ring.pop_inputs(&mut gid);
                        for j in 0..h {
                            let g = gu_next[j];
                            if g != 0.0 {
                                ring.add_weighted(j, layer.delay_w.row(j), g);
                                if let Some(dw) = &mut lg.delay_w {
                                    // Buffer before the shift at t holds the
                                    // drive rows t-1, t-2, ...
                                    let row = dw.row_mut(j);
                                    for (m, slot) in row.iter_mut().enumerate().take(t) {
                                        *slot += g * ff.get(t - 1 - m, j);
                                    }
                                }
                            }
                        }
                    }
                } else {
                    gid.iter_mut().for_each(|v| *v = 0.0);
                }

                for j in 0..h {
                    gis[j] = (1.0 - layer.alpha[j]) * gu_next[j];
                }
                if recurrent {
                    let v = layer.v.as_ref().unwrap();
                    v.tr_matvec_into(&gis, &mut rec_back);
                }
                for j in 0..h {
                    let mut g = ds_raw[b].get(t, j)
                        - layer.alpha[j] * THRESHOLD * gu_next[j];
                    if adaptive {
                        g += layer.adapt.as_ref().unwrap().b[j] * gw_next[j];
                    }
                    if recurrent {
                        g += rec_back[j];
                    }
                    gs[j] = g;
                }

                // Parameter gradients at this step.
                for j in 0..h {
                    let i_s = ff.get(t, j) + rec.map_or(0.0, |r| r.get(t, j));
                    let du_dalpha = if adaptive {
                        let w = w_state.unwrap().get(t, j);
                        u.get(t, j) - (i_s - w) - THRESHOLD * spikes.get(t, j)
                    } else {
                        u.get(t, j) - i_s - THRESHOLD * spikes.get(t, j)
                    };
                    lg.alpha[j] += du_dalpha * gu_next[j];
                }
                if adaptive {
                    let w = w_state.unwrap();
                    let beta_g = lg.beta.as_mut().unwrap();
                    let a_g = lg.adapt_a.as_mut().unwrap();
                    let b_g = lg.adapt_b.as_mut().unwrap();
                    for j in 0..h {
                        beta_g[j] += w.get(t, j) * gw_next[j];
                        a_g[j] += u.get(t, j) * gw_next[j];
                        b_g[j] += spikes.get(t, j) * gw_next[j];
                    }
                }
                if recurrent {
                    lg.v.as_mut().unwrap().add_outer(&gis, spikes.row(t));
                }

                // Drive adjoint: the feedforward path feeds both the
                // membrane input and the delay buffer.
                for j in 0..h {
                    gff_b.set(t, j, gis[j] + gid[j]);
                }

                // Roll the state adjoints one step back.
                if adaptive {
                    let adapt = layer.adapt.as_ref().unwrap();
                    for j in 0..h {
                        let dspike = tape.spike.apply(u.get(t, j), THRESHOLD).1;
                        gu_cur[j] = layer.alpha[j] * gu_next[j]
                            + adapt.a[j] * gw_next[j]
                            + dspike * gs[j];
                        gw_cur[j] =
                            adapt.beta[j] * gw_next[j] - (1.0 - layer.alpha[j]) * gu_next[j];
                    }
                } else {
                    for j in 0..h {
                        let dspike = tape.spike.apply(u.get(t, j), THRESHOLD).1;
                        gu_cur[j] = layer.alpha[j] * gu_next[j] + dspike * gs[j];
                    }
                }
                std::mem::swap(&mut gu_next, &mut gu_cur);
                if adaptive {
                    std::mem::swap(&mut gw_next, &mut gw_cur);
                }
            }
            gff.push(gff_b);
        }

        // Through batch normalization (pooled over batch x time), then into
        // the feedforward weights and the previous layer's spikes.
        let (dz, dgamma, dbias) = layer.bn.backward_train(&lt.xhat, &lt.stats, &gff);
        lg.gamma = dgamma;
        lg.bias = dbias;

        let prev_mask = if k > 0 { tape.layers[k - 1].mask.as_ref() } else { None };
        let mut ds_prev: Vec<Matrix> = Vec::with_capacity(if k > 0 { b_len } else { 0 });
        for b in 0..b_len {
            let t_len = dz[b].rows();
            // Reconstruct the layer's actual input rows (dropped spikes for
            // hidden inputs) for the weight gradient.
            if k == 0 {
                for t in 0..t_len {
                    lg.w.add_outer(dz[b].row(t), inputs[b].row(t));
                }
            } else {
                let prev_spikes = &tape.layers[k - 1].spikes[b];
                let hp = prev_spikes.cols();
                let mut dropped_row = vec![0.0; hp];
                let mut ds = Matrix::zeros(t_len, hp);
                for t in 0..t_len {
                    match prev_mask {
                        Some(masks) => {
                            let mrow = &masks[b][t * hp..(t + 1) * hp];
                            for j in 0..hp {
                                dropped_row[j] = if mrow[j] == 1 {
                                    prev_spikes.get(t, j) * dropout_scale
                                } else {
                                    0.0
                                };
                            }
                        }
                        None => dropped_row.copy_from_slice(prev_spikes.row(t)),
                    }
                    lg.w.add_outer(dz[b].row(t), &dropped_row);
                    layer.w.tr_matvec_into(dz[b].row(t), ds.row_mut(t));
                    if let Some(masks) = prev_mask {
                        let mrow = &masks[b][t * hp..(t + 1) * hp];
                        for j in 0..hp {
                            let v = if mrow[j] == 1 {
                                ds.get(t, j) * dropout_scale
                            } else {
                                0.0
                            };
                            ds.set(t, j, v);
                        }
                    }
                }
                ds_prev.push(ds);
            }
        }
        if k > 0 {
            ds_raw = ds_prev;
        }
    }

    Ok(grads)
}
