//! Validates reverse-mode gradients against central finite differences on
//! the relaxed twin model (smooth sigmoid spike), per parameter tensor.
//!
//!     cargo run --release --example gradient_check

use snn_delays::math::Matrix;
use snn_delays::network::{Network, NetworkSpec, NeuronModel};
use snn_delays::neuron::{DelayKind, DelayScheme};
use snn_delays::rng::RngStream;
use snn_delays::train::grad_check;

fn main() {
    let spec = NetworkSpec::uniform(
        5,
        3,
        2,
        6,
        NeuronModel::RadLif,
        4,
        DelayScheme::trainable(DelayKind::Uniform),
        0.0,
    );
    let mut rng = RngStream::new(0);
    let net = Network::init(&spec, &mut rng).unwrap();

    let mut batch = Vec::new();
    for _ in 0..3 {
        let mut m = Matrix::zeros(12, 5);
        m.fill_uniform(&mut rng, 0.0, 1.5);
        batch.push(m);
    }
    let refs: Vec<&Matrix> = batch.iter().collect();

    let report = grad_check(&net, &refs, &[0, 1, 2], 1e-5).unwrap();
    println!("recurrent adaptive model, h=6, two layers, delay order 4 (trainable)");
    println!("{} trainable parameters checked\n", report.n_params);
    for (name, err) in &report.per_slot {
        println!("  {name:<22} worst relative error {err:.3e}");
    }
    println!("\nmax relative error: {:.3e}", report.max_rel_err);
    assert!(report.max_rel_err <= 1e-4);
    println!("within the 1e-4 gate");
}
