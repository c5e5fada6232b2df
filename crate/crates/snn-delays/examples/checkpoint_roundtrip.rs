//! Trains briefly, saves a checkpoint, reloads it, and verifies the loaded
//! network evaluates identically (the container round-trips every tensor
//! bit-exactly, including batch-norm running statistics).
//!
//!     cargo run --release --example checkpoint_roundtrip

use snn_delays::data::synthetic::{gen_synthetic, SyntheticSpec};
use snn_delays::network::{checkpoint, Network, NetworkSpec, NeuronModel};
use snn_delays::neuron::{DelayKind, DelayScheme};
use snn_delays::rng::RngStream;
use snn_delays::train::{evaluate, fit, TrainConfig};

fn main() {
    let data_spec = SyntheticSpec {
        n_classes: 2,
        channels: 6,
        seq_len: 30,
        lags: vec![2, 6],
        noise_rate: 0.05,
        seed: 0,
    };
    let train = gen_synthetic(&data_spec, 512).unwrap();
    let test = gen_synthetic(&SyntheticSpec { seed: 1, ..data_spec }, 128).unwrap();

    let spec = NetworkSpec::uniform(
        6,
        2,
        1,
        8,
        NeuronModel::AdLif,
        10,
        DelayScheme::trainable(DelayKind::Uniform),
        0.0,
    );
    let mut net = Network::init(&spec, &mut RngStream::new(3)).unwrap();
    let cfg = TrainConfig {
        epochs: 12,
        batch_size: 32,
        seed: 3,
        ..Default::default()
    };
    fit(&mut net, &train, &test, &cfg, |_| {}, None).unwrap();
    let (loss, acc) = evaluate(&net, &test, 64).unwrap();
    println!("trained delay-equipped net: test loss {loss:.4}, acc {acc:.3}");

    let path = std::env::temp_dir().join("snn-delays-example.snnc");
    checkpoint::save(&net, &path).unwrap();
    let size = std::fs::metadata(&path).unwrap().len();
    println!("saved {} ({size} bytes)", path.display());

    let restored = checkpoint::load(&path).unwrap();
    assert_eq!(net, restored);
    let (loss2, acc2) = evaluate(&restored, &test, 64).unwrap();
    println!("restored net: test loss {loss2:.4}, acc {acc2:.3}");
    assert_eq!(loss.to_bits(), loss2.to_bits());
    assert_eq!(acc.to_bits(), acc2.to_bits());
    println!("round trip is bit-exact");
}
