//! Training loop: shuffling, augmentation, loss, reverse-mode gradients,
//! optimizer step, parameter clipping, and evaluation.

pub mod augment;
pub mod backward;
pub mod loss;
pub mod optim;

use std::time::Instant;

use crate::data::{Dataset, SpikeFrameTensor};
use crate::error::{Result, SnnError};
use crate::math::{finite_diff_grad, rel_err, Matrix};
use crate::network::Network;
use crate::neuron::SpikeFn;
use crate::rng::RngStream;
use augment::{augment_cutmix, augment_mask, MaskAugConfig};
use optim::{cosine_lr, AdamW};

/// Augmentation toggles applied during training epochs.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct AugmentConfig {
    pub mask: MaskAugConfig,
    /// Per-sample probability of splicing a time segment from a random batch
    /// partner (labels mixed accordingly).
    pub cutmix_prob: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            mask: MaskAugConfig::default(),
            cutmix_prob: 0.5,
        }
    }
}

/// Optimization settings; defaults are the reference recipe (base LR 1e-2,
/// weight decay 1e-5, batch 128, 50 epochs).
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub base_lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub augment: Option<AugmentConfig>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            base_lr: 1e-2,
            weight_decay: 1e-5,
            batch_size: 128,
            epochs: 50,
            seed: 0,
            augment: None,
        }
    }
}

/// One metrics line per epoch.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
    pub seconds: f64,
}

impl EpochMetrics {
    pub fn csv_header() -> &'static str {
        "epoch,lr,train_loss,train_acc,test_acc,seconds"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.epoch, self.lr, self.train_loss, self.train_acc, self.test_acc, self.seconds
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics serialize")
    }
}

fn onehot(label: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[label] = 1.0;
    v
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// One pass over the training set. Returns `(mean loss, accuracy, seconds)`.
///
/// `observer` runs after every optimizer step (post-clip); used for
/// invariant checks.
pub fn train_epoch(
    net: &mut Network,
    opt: &mut AdamW,
    data: &Dataset,
    cfg: &TrainConfig,
    epoch: usize,
    rng: &mut RngStream,
    observer: &mut dyn FnMut(&Network),
) -> Result<(f64, f64, f64)> {
    if data.is_empty() {
        return Err(SnnError::Data("training set is empty".into()));
    }
    let start = Instant::now();
    let lr = cosine_lr(epoch, cfg.epochs, cfg.base_lr);
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);

    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for (batch_idx, chunk) in order.chunks(cfg.batch_size.max(1)).enumerate() {
        // Assemble (possibly augmented) batch.
        let originals: Vec<&SpikeFrameTensor> =
            chunk.iter().map(|&i| &data.samples[i].tensor).collect();
        let mut frames: Vec<Matrix> = Vec::with_capacity(chunk.len());
        let mut targets: Vec<Vec<f64>> = Vec::with_capacity(chunk.len());
        for (pos, &i) in chunk.iter().enumerate() {
            let label = data.samples[i].label;
            let (mut tensor, mut target) = (originals[pos].clone(), onehot(label, data.n_classes));
            if let Some(aug) = &cfg.augment {
                if aug.cutmix_prob > 0.0 && rng.bernoulli(aug.cutmix_prob) {
                    let partner = chunk[rng.next_below(chunk.len())];
                    let (mixed, soft) = augment_cutmix(
                        &tensor,
                        label,
                        &data.samples[partner].tensor,
                        data.samples[partner].label,
                        data.n_classes,
                        rng,
                    )?;
                    tensor = mixed;
                    target = soft;
                }
                tensor = augment_mask(&tensor, &aug.mask, rng);
            }
            frames.push(tensor.frames);
            targets.push(target);
        }
        let refs: Vec<&Matrix> = frames.iter().collect();

        let (logits, tape) = net.forward_train(&refs, SpikeFn::Boxcar, Some(rng))?;
        let b = refs.len() as f64;
        let mut dlogits = Vec::with_capacity(refs.len());
        let mut batch_loss = 0.0;
        for (lg, tg) in logits.iter().zip(&targets) {
            let (l, mut d) = loss::cross_entropy_soft(lg, tg)?;
            batch_loss += l;
            d.iter_mut().for_each(|v| *v /= b);
            dlogits.push(d);
        }
        batch_loss /= b;
        if !batch_loss.is_finite() {
            return Err(SnnError::Diverged(format!(
                "non-finite loss at epoch {epoch}, batch {batch_idx} (lr {lr})"
            )));
        }
        loss_sum += batch_loss * b;
        correct += logits
            .iter()
            .zip(&targets)
            .filter(|(lg, tg)| argmax(lg) == argmax(tg))
            .count();

        net.update_running_stats(&tape);
        let grads = backward::backward(net, &tape, &refs, &dlogits)?;
        let mut params = net.collect_params();
        opt.step(&mut params, &grads.flatten(), lr)?;
        net.assign_params(&params);
        net.clip_neuron_params();
        debug_assert!(net.check_invariants());
        observer(net);
    }
    Ok((
        loss_sum / n as f64,
        correct as f64 / n as f64,
        start.elapsed().as_secs_f64(),
    ))
}

/// Inference over a dataset: hard spikes, BN running statistics, no dropout
/// or augmentation. Returns `(mean loss, top-1 accuracy)`.
pub fn evaluate(net: &Network, data: &Dataset, batch_size: usize) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(SnnError::Data("evaluation set is empty".into()));
    }
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    let samples = &data.samples;
    for chunk in samples.chunks(batch_size.max(1)) {
        let refs: Vec<&Matrix> = chunk.iter().map(|s| &s.tensor.frames).collect();
        let logits = net.forward_eval(&refs)?;
        for (lg, sample) in logits.iter().zip(chunk) {
            let (l, _) = loss::cross_entropy(lg, sample.label)?;
            loss_sum += l;
            if argmax(lg) == sample.label {
                correct += 1;
            }
        }
    }
    Ok((
        loss_sum / samples.len() as f64,
        correct as f64 / samples.len() as f64,
    ))
}

/// Full training run: per-epoch train + test evaluation.
pub fn fit(
    net: &mut Network,
    train_data: &Dataset,
    test_data: &Dataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
    step_observer: Option<&mut dyn FnMut(&Network)>,
) -> Result<Vec<EpochMetrics>> {
    let mut opt = AdamW::new(net.collect_params().len(), cfg.weight_decay);
    let mut rng = RngStream::new(cfg.seed);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut noop = |_: &Network| {};
    let observer: &mut dyn FnMut(&Network) = match step_observer {
        Some(obs) => obs,
        None => &mut noop,
    };
    for epoch in 0..cfg.epochs {
        let (train_loss, train_acc, seconds) = train_epoch(
            net,
            &mut opt,
            train_data,
            cfg,
            epoch,
            &mut rng,
            observer,
        )?;
        let (_, test_acc) = evaluate(net, test_data, cfg.batch_size)?;
        let m = EpochMetrics {
            epoch,
            lr: cosine_lr(epoch, cfg.epochs, cfg.base_lr),
            train_loss,
            train_acc,
            test_acc,
            seconds,
        };
        on_epoch(&m);
        history.push(m);
    }
    Ok(history)
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

/// Gradient-check temperature for the relaxed spike.
pub const GRADCHECK_TEMPERATURE: f64 = 0.2;

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub n_params: usize,
    pub max_rel_err: f64,
    /// Worst relative error per parameter tensor, in layout order.
    pub per_slot: Vec<(String, f64)>,
}

/// Compares reverse-mode gradients against central finite differences on the
/// relaxed twin model (sigmoid spike with a smooth forward pass). The hard
/// threshold is not differentiable, so this is the model under which the
/// engine's gradients admit an independent oracle; the backward machinery
/// being checked is identical.
pub fn grad_check(
    net: &Network,
    batch: &[&Matrix],
    labels: &[usize],
    eps: f64,
) -> Result<GradCheckReport> {
    let spike = SpikeFn::Sigmoid {
        temperature: GRADCHECK_TEMPERATURE,
    };
    let b = batch.len() as f64;

    // Reverse-mode gradient.
    let (logits, tape) = net.forward_train(batch, spike, None)?;
    let mut dlogits = Vec::with_capacity(batch.len());
    for (lg, &label) in logits.iter().zip(labels) {
        let (_, mut d) = loss::cross_entropy(lg, label)?;
        d.iter_mut().for_each(|v| *v /= b);
        dlogits.push(d);
    }
    let analytic = backward::backward(net, &tape, batch, &dlogits)?.flatten();

    // Finite-difference oracle over the flattened parameters.
    let x0 = net.collect_params();
    let mut probe_net = net.clone();
    let numeric = finite_diff_grad(
        |x| {
            probe_net.assign_params(x);
            let (lg, _) = probe_net
                .forward_train(batch, spike, None)
                .expect("probe forward");
            let mut total = 0.0;
            for (l, &label) in lg.iter().zip(labels) {
                total += loss::cross_entropy(l, label).expect("probe loss").0;
            }
            total / b
        },
        &x0,
        eps,
    )?;

    let mut per_slot = Vec::new();
    let mut max_err = 0.0f64;
    for slot in net.param_layout() {
        let mut worst = 0.0f64;
        for i in slot.offset..slot.offset + slot.len {
            worst = worst.max(rel_err(analytic[i], numeric[i]));
        }
        max_err = max_err.max(worst);
        per_slot.push((slot.name, worst));
    }
    Ok(GradCheckReport {
        n_params: x0.len(),
        max_rel_err: max_err,
        per_slot,
    })
}
