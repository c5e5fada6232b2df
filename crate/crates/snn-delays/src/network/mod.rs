//! Network assembly: layered architecture, parameter registry, and
//! closed-form parameter/state accounting.

pub mod batchnorm;
pub mod checkpoint;
pub mod forward;

use crate::error::{Result, SnnError};
use crate::math::Matrix;
use crate::neuron::{
    DelayScheme, ADAPT_A_RANGE, ADAPT_B_RANGE, ALPHA_RANGE, BETA_RANGE,
};
use crate::rng::RngStream;
use batchnorm::BatchNorm;

/// Neuron model of a hidden layer. The `R`-variants add a trained recurrent
/// weight matrix with zero diagonal; the adaptive variants add a second
/// intrinsic state variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NeuronModel {
    Lif,
    Rlif,
    AdLif,
    RadLif,
}

impl NeuronModel {
    pub fn recurrent(&self) -> bool {
        matches!(self, NeuronModel::Rlif | NeuronModel::RadLif)
    }

    pub fn adaptive(&self) -> bool {
        matches!(self, NeuronModel::AdLif | NeuronModel::RadLif)
    }

    /// Intrinsic state variables per neuron.
    pub fn state_dim(&self) -> usize {
        if self.adaptive() {
            2
        } else {
            1
        }
    }

    /// Trainable dynamics parameters per neuron.
    pub fn params_per_neuron(&self) -> usize {
        if self.adaptive() {
            4
        } else {
            1
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NeuronModel::Lif => "lif",
            NeuronModel::Rlif => "rlif",
            NeuronModel::AdLif => "adlif",
            NeuronModel::RadLif => "radlif",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lif" => Ok(NeuronModel::Lif),
            "rlif" => Ok(NeuronModel::Rlif),
            "adlif" => Ok(NeuronModel::AdLif),
            "radlif" => Ok(NeuronModel::RadLif),
            other => Err(SnnError::InvalidArg(format!(
                "unknown neuron model '{other}' (expected lif|rlif|adlif|radlif)"
            ))),
        }
    }
}

/// One hidden layer's architecture.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LayerSpec {
    pub h: usize,
    pub model: NeuronModel,
    pub n_d: usize,
    pub scheme: DelayScheme,
}

impl LayerSpec {
    pub fn recurrent(&self) -> bool {
        self.model.recurrent()
    }
}

/// Whole-network architecture.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetworkSpec {
    pub c_in: usize,
    pub c_out: usize,
    pub layers: Vec<LayerSpec>,
    pub dropout_rate: f64,
}

impl NetworkSpec {
    /// Homogeneous architecture: `l` identical hidden layers.
    pub fn uniform(
        c_in: usize,
        c_out: usize,
        l: usize,
        h: usize,
        model: NeuronModel,
        n_d: usize,
        scheme: DelayScheme,
        dropout_rate: f64,
    ) -> Self {
        NetworkSpec {
            c_in,
            c_out,
            layers: vec![
                LayerSpec {
                    h,
                    model,
                    n_d,
                    scheme,
                };
                l
            ],
            dropout_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(SnnError::InvalidArg("network needs at least one hidden layer".into()));
        }
        if self.c_in == 0 || self.c_out == 0 {
            return Err(SnnError::InvalidArg("c_in and c_out must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(SnnError::InvalidArg(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if self.layers.iter().any(|l| l.h == 0) {
            return Err(SnnError::InvalidArg("layer width must be positive".into()));
        }
        Ok(())
    }
}

/// Trainable-parameter breakdown.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ParamCount {
    pub feedforward: usize,
    pub recurrent: usize,
    pub neuron: usize,
    pub norm: usize,
    pub delay: usize,
}

impl ParamCount {
    pub fn total(&self) -> usize {
        self.feedforward + self.recurrent + self.neuron + self.norm + self.delay
    }
}

/// Closed-form trainable-parameter count:
///
/// - feedforward: `c_in*h1 + sum h_{k-1}*h_k + h_last*c_out`
/// - recurrent:   `h^2 - h` per recurrent layer (no self-connections)
/// - neuron:      `h` per LIF-family layer, `4h` per adaptive layer
/// - norm:        `2*(sum h + c_out)`
/// - delay:       `n_d*h` per layer whose delay row is trainable
pub fn count_params(spec: &NetworkSpec) -> ParamCount {
    let mut count = ParamCount::default();
    let mut fan_in = spec.c_in;
    for layer in &spec.layers {
        count.feedforward += fan_in * layer.h;
        if layer.recurrent() {
            count.recurrent += layer.h * layer.h - layer.h;
        }
        count.neuron += layer.model.params_per_neuron() * layer.h;
        count.norm += 2 * layer.h;
        if layer.scheme.trainable {
            count.delay += layer.n_d * layer.h;
        }
        fan_in = layer.h;
    }
    count.feedforward += fan_in * spec.c_out;
    count.norm += 2 * spec.c_out;
    count
}

/// Stored state variables per sequence: `(n_s + n_d) * h` summed over layers.
pub fn count_state_memory(spec: &NetworkSpec) -> usize {
    spec.layers
        .iter()
        .map(|l| (l.model.state_dim() + l.n_d) * l.h)
        .sum()
}

// ---------------------------------------------------------------------------
// Concrete network
// ---------------------------------------------------------------------------

/// Adaptation parameters of one adaptive layer, one value per neuron.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptParams {
    pub beta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HiddenLayer {
    pub spec: LayerSpec,
    /// Feedforward weights, `h x fan_in`.
    pub w: Matrix,
    /// Recurrent weights with zero diagonal, present for R-variants.
    pub v: Option<Matrix>,
    pub bn: BatchNorm,
    /// Membrane leak per neuron.
    pub alpha: Vec<f64>,
    pub adapt: Option<AdaptParams>,
    /// Delay-mixing rows, `h x n_d`.
    pub delay_w: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub spec: NetworkSpec,
    pub layers: Vec<HiddenLayer>,
    pub w_out: Matrix,
    pub bn_out: BatchNorm,
}

impl Network {
    /// Initializes a network from `rng`:
    /// weights uniform in `+/- 1/sqrt(fan_in)` (recurrent diagonal zeroed),
    /// neuron parameters uniform inside their clip ranges, and delay rows
    /// from each layer's scheme.
    pub fn init(spec: &NetworkSpec, rng: &mut RngStream) -> Result<Network> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.layers.len());
        let mut fan_in = spec.c_in;
        for lspec in &spec.layers {
            let h = lspec.h;
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut w = Matrix::zeros(h, fan_in);
            w.fill_uniform(rng, -bound, bound);
            let v = if lspec.recurrent() {
                let rbound = 1.0 / (h as f64).sqrt();
                let mut v = Matrix::zeros(h, h);
                v.fill_uniform(rng, -rbound, rbound);
                for i in 0..h {
                    v.set(i, i, 0.0);
                }
                Some(v)
            } else {
                None
            };
            let alpha: Vec<f64> = (0..h)
                .map(|_| rng.uniform_unchecked(ALPHA_RANGE.0, ALPHA_RANGE.1))
                .collect();
            let adapt = if lspec.model.adaptive() {
                Some(AdaptParams {
                    beta: (0..h)
                        .map(|_| rng.uniform_unchecked(BETA_RANGE.0, BETA_RANGE.1))
                        .collect(),
                    a: (0..h)
                        .map(|_| rng.uniform_unchecked(ADAPT_A_RANGE.0, ADAPT_A_RANGE.1))
                        .collect(),
                    b: (0..h)
                        .map(|_| rng.uniform_unchecked(ADAPT_B_RANGE.0, ADAPT_B_RANGE.1))
                        .collect(),
                })
            } else {
                None
            };
            let mut delay_w = Matrix::zeros(h, lspec.n_d);
            for j in 0..h {
                let row = lspec.scheme.kind.build_row(lspec.n_d, rng);
                delay_w.row_mut(j).copy_from_slice(&row);
            }
            layers.push(HiddenLayer {
                spec: lspec.clone(),
                w,
                v,
                bn: BatchNorm::new(h),
                alpha,
                adapt,
                delay_w,
            });
            fan_in = h;
        }
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut w_out = Matrix::zeros(spec.c_out, fan_in);
        w_out.fill_uniform(rng, -bound, bound);
        Ok(Network {
            spec: spec.clone(),
            layers,
            w_out,
            bn_out: BatchNorm::new(spec.c_out),
        })
    }

    /// Clamps every neuron parameter into its clip range. Applied after each
    /// optimizer step.
    pub fn clip_neuron_params(&mut self) {
        for layer in &mut self.layers {
            for a in &mut layer.alpha {
                *a = a.clamp(ALPHA_RANGE.0, ALPHA_RANGE.1);
            }
            if let Some(adapt) = &mut layer.adapt {
                for b in &mut adapt.beta {
                    *b = b.clamp(BETA_RANGE.0, BETA_RANGE.1);
                }
                for a in &mut adapt.a {
                    *a = a.clamp(ADAPT_A_RANGE.0, ADAPT_A_RANGE.1);
                }
                for b in &mut adapt.b {
                    *b = b.clamp(ADAPT_B_RANGE.0, ADAPT_B_RANGE.1);
                }
            }
        }
    }

    /// True when every neuron parameter lies inside its clip range and every
    /// recurrent diagonal is exactly zero.
    pub fn check_invariants(&self) -> bool {
        for layer in &self.layers {
            if !layer
                .alpha
                .iter()
                .all(|&a| (ALPHA_RANGE.0..=ALPHA_RANGE.1).contains(&a))
            {
                return false;
            }
            if let Some(adapt) = &layer.adapt {
                let ok = adapt
                    .beta
                    .iter()
                    .all(|&v| (BETA_RANGE.0..=BETA_RANGE.1).contains(&v))
                    && adapt
                        .a
                        .iter()
                        .all(|&v| (ADAPT_A_RANGE.0..=ADAPT_A_RANGE.1).contains(&v))
                    && adapt
                        .b
                        .iter()
                        .all(|&v| (ADAPT_B_RANGE.0..=ADAPT_B_RANGE.1).contains(&v));
                if !ok {
                    return false;
                }
            }
            if let Some(v) = &layer.v {
                if (0..layer.spec.h).any(|i| v.get(i, i) != 0.0) {
                    return false;
                }
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Flat parameter registry
// ---------------------------------------------------------------------------

/// Which accounting bucket a parameter slot belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamGroup {
    Feedforward,
    Recurrent,
    NeuronAlpha,
    NeuronBeta,
    NeuronAdaptA,
    NeuronAdaptB,
    Norm,
    Delay,
}

/// One contiguous span in the flattened trainable-parameter vector.
#[derive(Clone, Debug)]
pub struct ParamSlot {
    pub name: String,
    pub group: ParamGroup,
    pub offset: usize,
    pub len: usize,
}

impl Network {
    /// Canonical ordering of every trainable value. The recurrent matrix
    /// contributes only its off-diagonal entries; frozen delay rows are
    /// excluded entirely.
    pub fn param_layout(&self) -> Vec<ParamSlot> {
        let mut slots = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, group: ParamGroup, len: usize| {
            slots.push(ParamSlot {
                name,
                group,
                offset,
                len,
            });
            offset += len;
        };
        for (k, layer) in self.layers.iter().enumerate() {
            let h = layer.spec.h;
            push(format!("layer{k}.w"), ParamGroup::Feedforward, h * layer.w.cols());
            if layer.v.is_some() {
                push(format!("layer{k}.v"), ParamGroup::Recurrent, h * h - h);
            }
            push(format!("layer{k}.bn.gamma"), ParamGroup::Norm, h);
            push(format!("layer{k}.bn.bias"), ParamGroup::Norm, h);
            push(format!("layer{k}.alpha"), ParamGroup::NeuronAlpha, h);
            if layer.adapt.is_some() {
                push(format!("layer{k}.beta"), ParamGroup::NeuronBeta, h);
                push(format!("layer{k}.adapt_a"), ParamGroup::NeuronAdaptA, h);
                push(format!("layer{k}.adapt_b"), ParamGroup::NeuronAdaptB, h);
            }
            if layer.spec.scheme.trainable && layer.spec.n_d > 0 {
                push(format!("layer{k}.delay_w"), ParamGroup::Delay, h * layer.spec.n_d);
            }
        }
        push("readout.w".into(), ParamGroup::Feedforward, self.w_out.rows() * self.w_out.cols());
        push("readout.bn.gamma".into(), ParamGroup::Norm, self.spec.c_out);
        push("readout.bn.bias".into(), ParamGroup::Norm, self.spec.c_out);
        slots
    }

    /// Number of trainable values registered at runtime, with per-group
    /// breakdown. Reconciles exactly against [`count_params`].
    pub fn runtime_param_count(&self) -> ParamCount {
        let mut count = ParamCount::default();
        for slot in self.param_layout() {
            match slot.group {
                ParamGroup::Feedforward => count.feedforward += slot.len,
                ParamGroup::Recurrent => count.recurrent += slot.len,
                ParamGroup::NeuronAlpha
                | ParamGroup::NeuronBeta
                | ParamGroup::NeuronAdaptA
                | ParamGroup::NeuronAdaptB => count.neuron += slot.len,
                ParamGroup::Norm => count.norm += slot.len,
                ParamGroup::Delay => count.delay += slot.len,
            }
        }
        count
    }

    /// Flattens every trainable value in canonical order.
    pub fn collect_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend_from_slice(layer.w.as_slice());
            if let Some(v) = &layer.v {
                for i in 0..v.rows() {
                    for j in 0..v.cols() {
                        if i != j {
                            out.push(v.get(i, j));
                        }
                    }
                }
            }
            out.extend_from_slice(&layer.bn.gamma);
            out.extend_from_slice(&layer.bn.bias);
            out.extend_from_slice(&layer.alpha);
            if let Some(adapt) = &layer.adapt {
                out.extend_from_slice(&adapt.beta);
                out.extend_from_slice(&adapt.a);
                out.extend_from_slice(&adapt.b);
            }
            if layer.spec.scheme.trainable && layer.spec.n_d > 0 {
                out.extend_from_slice(layer.delay_w.as_slice());
            }
        }
        out.extend_from_slice(self.w_out.as_slice());
        out.extend_from_slice(&self.bn_out.gamma);
        out.extend_from_slice(&self.bn_out.bias);
        out
    }

    /// Writes a flattened parameter vector back; inverse of
    /// [`Network::collect_params`].
    pub fn assign_params(&mut self, flat: &[f64]) {
        let mut pos = 0;
        let mut take = |n: usize| {
            let span = pos..pos + n;
            pos += n;
            span
        };
        for layer in &mut self.layers {
            let n = layer.w.as_slice().len();
            layer.w.as_mut_slice().copy_from_slice(&flat[take(n)]);
            if let Some(v) = &mut layer.v {
                for i in 0..v.rows() {
                    for j in 0..v.cols() {
                        if i != j {
                            v.set(i, j, flat[take(1).start]);
                        }
                    }
                }
            }
            let h = layer.spec.h;
            layer.bn.gamma.copy_from_slice(&flat[take(h)]);
            layer.bn.bias.copy_from_slice(&flat[take(h)]);
            layer.alpha.copy_from_slice(&flat[take(h)]);
            if let Some(adapt) = &mut layer.adapt {
                adapt.beta.copy_from_slice(&flat[take(h)]);
                adapt.a.copy_from_slice(&flat[take(h)]);
                adapt.b.copy_from_slice(&flat[take(h)]);
            }
            if layer.spec.scheme.trainable && layer.spec.n_d > 0 {
                let n = layer.delay_w.as_slice().len();
                layer.delay_w.as_mut_slice().copy_from_slice(&flat[take(n)]);
            }
        }
        let n = self.w_out.as_slice().len();
        self.w_out.as_mut_slice().copy_from_slice(&flat[take(n)]);
        let c = self.spec.c_out;
        self.bn_out.gamma.copy_from_slice(&flat[take(c)]);
        self.bn_out.bias.copy_from_slice(&flat[take(c)]);
        assert_eq!(pos, flat.len(), "assign_params: length mismatch");
    }
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

/// Gradient of one hidden layer, shaped like the layer's parameters. The
/// recurrent gradient is stored as a full matrix whose diagonal stays zero;
/// delay gradients exist only for trainable schemes.
#[derive(Clone, Debug)]
pub struct LayerGrads {
    pub w: Matrix,
    pub v: Option<Matrix>,
    pub gamma: Vec<f64>,
    pub bias: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Option<Vec<f64>>,
    pub adapt_a: Option<Vec<f64>>,
    pub adapt_b: Option<Vec<f64>>,
    pub delay_w: Option<Matrix>,
}

#[derive(Clone, Debug)]
pub struct NetGrads {
    pub layers: Vec<LayerGrads>,
    pub w_out: Matrix,
    pub gamma_out: Vec<f64>,
    pub bias_out: Vec<f64>,
}

impl NetGrads {
    pub fn zeros_like(net: &Network) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|layer| {
                let h = layer.spec.h;
                LayerGrads {
                    w: Matrix::zeros(h, layer.w.cols()),
                    v: layer.v.as_ref().map(|_| Matrix::zeros(h, h)),
                    gamma: vec![0.0; h],
                    bias: vec![0.0; h],
                    alpha: vec![0.0; h],
                    beta: layer.adapt.as_ref().map(|_| vec![0.0; h]),
                    adapt_a: layer.adapt.as_ref().map(|_| vec![0.0; h]),
                    adapt_b: layer.adapt.as_ref().map(|_| vec![0.0; h]),
                    delay_w: if layer.spec.scheme.trainable && layer.spec.n_d > 0 {
                        Some(Matrix::zeros(h, layer.spec.n_d))
                    } else {
                        None
                    },
                }
            })
            .collect();
        NetGrads {
            layers,
            w_out: Matrix::zeros(net.w_out.rows(), net.w_out.cols()),
            gamma_out: vec![0.0; net.spec.c_out],
            bias_out: vec![0.0; net.spec.c_out],
        }
    }

    /// Flattens in the same canonical order as [`Network::collect_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for lg in &self.layers {
            out.extend_from_slice(lg.w.as_slice());
            if let Some(v) = &lg.v {
                for i in 0..v.rows() {
                    for j in 0..v.cols() {
                        if i != j {
                            out.push(v.get(i, j));
                        }
                    }
                }
            }
            out.extend_from_slice(&lg.gamma);
            out.extend_from_slice(&lg.bias);
            out.extend_from_slice(&lg.alpha);
            if let Some(beta) = &lg.beta {
                out.extend_from_slice(beta);
                out.extend_from_slice(lg.adapt_a.as_ref().unwrap());
                out.extend_from_slice(lg.adapt_b.as_ref().unwrap());
            }
            if let Some(dw) = &lg.delay_w {
                out.extend_from_slice(dw.as_slice());
            }
        }
        out.extend_from_slice(self.w_out.as_slice());
        out.extend_from_slice(&self.gamma_out);
        out.extend_from_slice(&self.bias_out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuron::DelayKind;

    fn scheme(trainable: bool) -> DelayScheme {
        DelayScheme {
            kind: DelayKind::Uniform,
            trainable,
        }
    }

    #[test]
    fn delay_count_matches_quoted_figure() {
        let spec = NetworkSpec::uniform(140, 20, 2, 128, NeuronModel::AdLif, 10, scheme(true), 0.0);
        assert_eq!(count_params(&spec).delay, 2560);
    }

    #[test]
    fn adlif_nontrainable_total() {
        let spec =
            NetworkSpec::uniform(140, 20, 2, 128, NeuronModel::AdLif, 5, scheme(false), 0.0);
        let c = count_params(&spec);
        assert_eq!(c.feedforward, 36864);
        assert_eq!(c.recurrent, 0);
        assert_eq!(c.neuron, 1024);
        assert_eq!(c.norm, 552);
        assert_eq!(c.delay, 0);
        assert_eq!(c.total(), 38440);
    }

    #[test]
    fn no_delay_counts_zero_even_if_trainable() {
        let spec = NetworkSpec::uniform(140, 20, 2, 128, NeuronModel::Lif, 0, scheme(true), 0.0);
        assert_eq!(count_params(&spec).delay, 0);
    }

    #[test]
    fn state_memory_examples() {
        let lif = NetworkSpec::uniform(140, 20, 2, 128, NeuronModel::Lif, 0, scheme(false), 0.0);
        assert_eq!(count_state_memory(&lif), 256);
        let adlif = NetworkSpec::uniform(140, 20, 2, 128, NeuronModel::AdLif, 5, scheme(false), 0.0);
        assert_eq!(count_state_memory(&adlif), 1792);
        let wide = NetworkSpec::uniform(140, 20, 2, 8, NeuronModel::AdLif, 100, scheme(false), 0.0);
        assert_eq!(count_state_memory(&wide), 1632);
    }

    #[test]
    fn runtime_count_reconciles_with_closed_form() {
        for model in [
            NeuronModel::Lif,
            NeuronModel::Rlif,
            NeuronModel::AdLif,
            NeuronModel::RadLif,
        ] {
            for n_d in [0usize, 5, 10] {
                for trainable in [false, true] {
                    let spec = NetworkSpec::uniform(
                        17,
                        6,
                        2,
                        23,
                        model,
                        n_d,
                        scheme(trainable),
                        0.1,
                    );
                    let net = Network::init(&spec, &mut RngStream::new(0)).unwrap();
                    let closed = count_params(&spec);
                    let runtime = net.runtime_param_count();
                    assert_eq!(closed, runtime, "model {model:?} n_d {n_d} trainable {trainable}");
                    assert_eq!(net.collect_params().len(), closed.total());
                }
            }
        }
    }

    #[test]
    fn collect_assign_roundtrip() {
        let spec = NetworkSpec::uniform(
            5,
            3,
            2,
            7,
            NeuronModel::RadLif,
            4,
            scheme(true),
            0.2,
        );
        let mut net = Network::init(&spec, &mut RngStream::new(1)).unwrap();
        let flat = net.collect_params();
        let mut shifted = flat.clone();
        for (i, v) in shifted.iter_mut().enumerate() {
            *v += (i as f64 + 1.0) * 1e-3;
        }
        net.assign_params(&shifted);
        assert_eq!(net.collect_params(), shifted);
        // Diagonal of V untouched by assignment.
        let v = net.layers[0].v.as_ref().unwrap();
        for i in 0..7 {
            assert_eq!(v.get(i, i), 0.0);
        }
    }

    #[test]
    fn layout_spans_cover_flat_vector() {
        let spec = NetworkSpec::uniform(4, 2, 1, 5, NeuronModel::AdLif, 3, scheme(true), 0.0);
        let net = Network::init(&spec, &mut RngStream::new(2)).unwrap();
        let layout = net.param_layout();
        let total: usize = layout.iter().map(|s| s.len).sum();
        assert_eq!(total, net.collect_params().len());
        let mut expected_offset = 0;
        for slot in &layout {
            assert_eq!(slot.offset, expected_offset);
            expected_offset += slot.len;
        }
    }

    #[test]
    fn grads_flatten_matches_param_layout() {
        let spec = NetworkSpec::uniform(4, 2, 2, 5, NeuronModel::RadLif, 3, scheme(true), 0.0);
        let net = Network::init(&spec, &mut RngStream::new(3)).unwrap();
        let grads = NetGrads::zeros_like(&net);
        assert_eq!(grads.flatten().len(), net.collect_params().len());
    }

    #[test]
    fn init_respects_clip_ranges_and_zero_diag() {
        let spec = NetworkSpec::uniform(6, 3, 2, 9, NeuronModel::RadLif, 5, scheme(false), 0.3);
        let net = Network::init(&spec, &mut RngStream::new(4)).unwrap();
        assert!(net.check_invariants());
    }
}
