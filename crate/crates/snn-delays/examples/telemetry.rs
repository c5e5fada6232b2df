//! Per-epoch training-time cost of the delay mechanism: real but bounded
//! overhead, nearly flat in the delay order (the ring shift is O(1) per
//! neuron per step; only the mixing dot scales with the order).
//!
//!     cargo run --release --example telemetry

use snn_delays::data::synthetic::{gen_synthetic, SyntheticSpec};
use snn_delays::network::{Network, NetworkSpec, NeuronModel};
use snn_delays::neuron::{DelayKind, DelayScheme};
use snn_delays::rng::RngStream;
use snn_delays::train::optim::AdamW;
use snn_delays::train::{train_epoch, TrainConfig};

fn median_epoch_seconds(n_d: usize, data: &snn_delays::data::Dataset) -> f64 {
    let spec = NetworkSpec::uniform(
        32,
        2,
        2,
        20,
        NeuronModel::Lif,
        n_d,
        DelayScheme::fixed(DelayKind::Uniform),
        0.0,
    );
    let mut net = Network::init(&spec, &mut RngStream::new(0)).unwrap();
    let cfg = TrainConfig {
        batch_size: 32,
        epochs: 8,
        seed: 0,
        augment: None,
        ..Default::default()
    };
    let mut opt = AdamW::new(net.collect_params().len(), cfg.weight_decay);
    let mut rng = RngStream::new(0);
    let mut noop = |_: &Network| {};
    let mut times = Vec::new();
    for epoch in 0..6 {
        let (_, _, secs) =
            train_epoch(&mut net, &mut opt, data, &cfg, epoch, &mut rng, &mut noop).unwrap();
        if epoch > 0 {
            times.push(secs);
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times[times.len() / 2]
}

fn main() {
    let data = gen_synthetic(
        &SyntheticSpec {
            n_classes: 2,
            channels: 32,
            seq_len: 100,
            lags: vec![2, 6],
            noise_rate: 0.10,
            seed: 0,
        },
        512,
    )
    .unwrap();

    let t0 = median_epoch_seconds(0, &data);
    println!("no delay:       {t0:.3}s per epoch");
    for n_d in [5usize, 10, 50] {
        let t = median_epoch_seconds(n_d, &data);
        println!("delay order {n_d:>2}: {t:.3}s per epoch ({:.2}x)", t / t0);
    }
}
