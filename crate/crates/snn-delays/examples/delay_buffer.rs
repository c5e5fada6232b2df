//! The shift-register delay state: how inputs enter, age, and mix back into
//! a neuron through the per-neuron coefficient row.
//!
//!     cargo run --release --example delay_buffer

use snn_delays::neuron::{delay_step, DelayKind, DelayState, ShiftCoeffs};
use snn_delays::rng::RngStream;

fn main() {
    // With unit shift coefficients the buffer is a sliding window over the
    // input stream: slot 0 is the newest value.
    let mut state = DelayState::zeros(5);
    let ones = ShiftCoeffs::ones(5);
    println!("feeding 1, 2, 3, 4, 5, 6 into an order-5 buffer:");
    for x in 1..=6 {
        state = delay_step(&state, &ones, x as f64);
        println!("  after {x}: {:?}", state.as_slice());
    }

    // Non-unit coefficients scale entries as they age; an impulse picks up
    // the running product of the coefficients it passed.
    let coeffs = ShiftCoeffs::new(vec![0.5, 0.5, 0.5]);
    let mut state = DelayState::zeros(4);
    state = delay_step(&state, &coeffs, 8.0);
    for _ in 0..3 {
        state = delay_step(&state, &coeffs, 0.0);
    }
    println!("\nimpulse of 8 through coefficients 0.5 each, after 3 idle steps:");
    println!("  {:?}  (8 * 0.5^3 = 1 in the oldest slot)", state.as_slice());

    // The four initialization families for the mixing row.
    let mut rng = RngStream::new(42);
    println!("\ncoefficient rows for order 5:");
    for kind in [
        DelayKind::Ones,
        DelayKind::LinearDecay,
        DelayKind::ExpDecay,
        DelayKind::Uniform,
    ] {
        let row = kind.build_row(5, &mut rng);
        let pretty: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        println!("  {:>9}: [{}]", kind.name(), pretty.join(", "));
    }

    // Mixing a ones row over the buffer yields the running sum of the last
    // n_d inputs.
    let mut state = DelayState::zeros(3);
    let ones3 = ShiftCoeffs::ones(3);
    let row = DelayKind::Ones.build_row(3, &mut rng);
    let inputs = [1.0, 2.0, 4.0, 8.0];
    println!("\nones-row mixing = running sum of the last 3 inputs:");
    for x in inputs {
        state = delay_step(&state, &ones3, x);
        println!("  input {x}: mix = {}", state.mix(&row));
    }
}
