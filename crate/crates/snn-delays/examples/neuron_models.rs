//! Single-neuron dynamics: LIF and adLIF steps with and without a delay
//! buffer, and the generic state-space form reproducing both.
//!
//!     cargo run --release --example neuron_models

use snn_delays::neuron::{
    adlif_step, generic_step, lif_step, DelayState, GenericNeuronSpec, NeuronParams, NeuronState,
};

fn main() {
    let params = NeuronParams::new(0.5, 0.97, 0.3, 1.2);

    // A constant drive of 1 saturates a LIF membrane (alpha = 0.5) just
    // below the unit threshold: no spike, ever.
    let mut st = NeuronState::lif();
    let dl = DelayState::zeros(0);
    print!("plain LIF,  constant drive 1.0: u =");
    for _ in 0..8 {
        let (next, _, s) = lif_step(&st, &dl, &params, &[], 1.0, 1.0).unwrap();
        print!(" {:.3}{}", st.u, if s > 0.0 { "*" } else { "" });
        st = next;
    }
    println!("   (saturates below threshold)");

    // The same neuron with a 5-deep ones buffer adds the running input sum
    // and crosses the threshold at t = 2.
    let mut st = NeuronState::lif();
    let mut dl = DelayState::zeros(5);
    let row = [1.0; 5];
    print!("delayed LIF, constant drive 1.0: u =");
    for _ in 0..8 {
        let (next_st, next_dl, s) = lif_step(&st, &dl, &params, &row, 1.0, 1.0).unwrap();
        print!(" {:.3}{}", st.u, if s > 0.0 { "*" } else { "" });
        st = next_st;
        dl = next_dl;
    }
    println!("   (* = spike, soft reset by alpha*theta)");

    // Adaptation: each spike raises w, which pushes back on the membrane.
    let mut st = NeuronState::adlif();
    let mut dl = DelayState::zeros(0);
    println!("\nadLIF under drive 2.0 (spikes raise the adaptation variable):");
    for t in 0..10 {
        let (next_st, next_dl, s) = adlif_step(&st, &dl, &params, &[], 2.0, 2.0).unwrap();
        println!(
            "  t={t}: u = {:+.3}, w = {:+.3}{}",
            st.u,
            st.w.unwrap(),
            if s > 0.0 { "  spike" } else { "" }
        );
        st = next_st;
        dl = next_dl;
    }

    // The generic linear state-space neuron subsumes both: configure its
    // matrices to the LIF instantiation and co-simulate.
    let delay_row = [0.8, 0.4, 0.2];
    let spec = GenericNeuronSpec::lif(0.5, 1.0, &delay_row);
    let mut st = NeuronState::lif();
    let mut dl = DelayState::zeros(3);
    let mut v_s = vec![0.0];
    let mut v_d = vec![0.0; 3];
    let drive = [0.9, 0.1, 1.4, 0.7, 1.2, 0.3, 1.1, 0.8];
    let mut agree = true;
    for &x in &drive {
        let (st2, dl2, s_ref) = lif_step(&st, &dl, &params, &delay_row, x, x).unwrap();
        let (vs2, vd2, s_gen) = generic_step(&spec, &v_s, &v_d, x, x).unwrap();
        agree &= s_ref == s_gen && (st2.u - vs2[0]).abs() < 1e-12;
        st = st2;
        dl = dl2;
        v_s = vs2;
        v_d = vd2;
    }
    println!(
        "\ngeneric state-space form vs dedicated LIF step over {} steps: {}",
        drive.len(),
        if agree { "identical" } else { "MISMATCH" }
    );
}
