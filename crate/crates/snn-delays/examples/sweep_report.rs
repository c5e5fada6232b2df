//! A small model x delay-order sweep with multi-seed aggregation, producing
//! the same CSV + JSON report files as the `sweep` subcommand.
//!
//!     cargo run --release --example sweep_report

use snn_delays::config::RunConfig;
use snn_delays::data::synthetic::{gen_synthetic, SyntheticSpec};
use snn_delays::network::{count_params, count_state_memory, Network, NetworkSpec, NeuronModel};
use snn_delays::neuron::{DelayKind, DelayScheme};
use snn_delays::report::{write_reports, Report, SeedResult};
use snn_delays::rng::RngStream;
use snn_delays::train::{fit, TrainConfig};

fn main() {
    let data_spec = SyntheticSpec {
        n_classes: 2,
        channels: 8,
        seq_len: 40,
        lags: vec![2, 6],
        noise_rate: 0.18,
        seed: 0,
    };
    let train = gen_synthetic(&data_spec, 2048).unwrap();
    let test = gen_synthetic(&SyntheticSpec { seed: 1, ..data_spec }, 256).unwrap();

    let seeds = [0u64, 1, 2];
    let mut reports = Vec::new();
    for model in [NeuronModel::Lif, NeuronModel::AdLif] {
        for n_d in [0usize, 10] {
            let spec = NetworkSpec::uniform(
                8,
                2,
                1,
                8,
                model,
                n_d,
                DelayScheme::trainable(DelayKind::Uniform),
                0.0,
            );
            let mut per_seed = Vec::new();
            for &seed in &seeds {
                let mut net = Network::init(&spec, &mut RngStream::new(seed)).unwrap();
                let cfg = TrainConfig {
                    base_lr: 1e-2,
                    weight_decay: 1e-5,
                    batch_size: 32,
                    epochs: 20,
                    seed,
                    augment: None,
                };
                let history = fit(&mut net, &train, &test, &cfg, |_| {}, None).unwrap();
                let last = history.last().unwrap();
                per_seed.push(SeedResult {
                    seed,
                    test_acc: last.test_acc,
                    train_loss: last.train_loss,
                    seconds: history.iter().map(|m| m.seconds).sum(),
                    epochs: history,
                });
            }
            // Reports embed the full run configuration and its hash.
            let cfg = RunConfig {
                model,
                nd: n_d,
                h: 8,
                l: 1,
                c_in: 8,
                c_out: 2,
                epochs: 20,
                seeds: seeds.to_vec(),
                ..RunConfig::default()
            };
            let report = Report::from_seeds(
                &cfg,
                format!("{}/nd{}", model.name(), n_d),
                count_params(&spec),
                count_state_memory(&spec),
                per_seed,
            );
            println!("{}", report.summary_line());
            reports.push(report);
        }
    }

    let out = std::env::temp_dir().join("snn-delays-sweep");
    write_reports(&out, "sweep", &reports).unwrap();
    println!("\nwrote {}/sweep.csv and sweep.json", out.display());
}
