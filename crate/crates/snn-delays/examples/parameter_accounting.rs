//! Closed-form trainable-parameter and state-memory accounting across the
//! model grid, reconciled against the runtime registry.
//!
//!     cargo run --release --example parameter_accounting

use snn_delays::network::{count_params, count_state_memory, Network, NetworkSpec, NeuronModel};
use snn_delays::neuron::{DelayKind, DelayScheme};
use snn_delays::rng::RngStream;

fn main() {
    println!(
        "{:<8} {:>4} {:>6} {:>12} {:>10} {:>8} {:>6} {:>7} {:>8} {:>7}",
        "model", "n_d", "train", "feedforward", "recurrent", "neuron", "norm", "delay", "total", "state"
    );
    for model in [
        NeuronModel::Lif,
        NeuronModel::Rlif,
        NeuronModel::AdLif,
        NeuronModel::RadLif,
    ] {
        for (n_d, trainable) in [(0usize, false), (5, false), (5, true), (10, true)] {
            let spec = NetworkSpec::uniform(
                140,
                20,
                2,
                128,
                model,
                n_d,
                DelayScheme {
                    kind: DelayKind::Uniform,
                    trainable,
                },
                0.4,
            );
            let c = count_params(&spec);
            let mem = count_state_memory(&spec);

            // The closed form must match what the network actually registers.
            let net = Network::init(&spec, &mut RngStream::new(0)).unwrap();
            assert_eq!(c, net.runtime_param_count());
            assert_eq!(c.total(), net.collect_params().len());

            println!(
                "{:<8} {:>4} {:>6} {:>12} {:>10} {:>8} {:>6} {:>7} {:>8} {:>7}",
                model.name(),
                n_d,
                trainable,
                c.feedforward,
                c.recurrent,
                c.neuron,
                c.norm,
                c.delay,
                c.total(),
                mem
            );
        }
    }
    println!("\nevery row reconciled exactly against the runtime parameter registry");
}
