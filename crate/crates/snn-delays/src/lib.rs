//! Spiking neural networks with shift-register delay states.
//!
//! Each neuron carries a small state-space buffer of its last `n_d` inputs,
//! advanced by a lower-shift transition and mixed back into the membrane
//! update through a per-neuron coefficient row. The crate provides the
//! neuron dynamics (LIF/RLIF/adLIF/RadLIF plus a fully generic state-space
//! form), layered networks with batch norm and an accumulative readout,
//! reverse-mode training with surrogate gradients, event-stream data
//! pipelines, and exact parameter/state accounting.
//!
//! Start with the runnable programs in `examples/`; the `snn-delays` binary
//! wraps the same library behind train/eval/sweep/gradcheck/params/convert/
//! gen-synth subcommands.

#![allow(clippy::needless_range_loop)]
#![allow(clippy::too_many_arguments)]

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod math;
pub mod network;
pub mod neuron;
pub mod report;
pub mod rng;
pub mod train;

pub use error::{Result, SnnError};
pub use math::{finite_diff_grad, Matrix};
pub use network::{
    count_params, count_state_memory, LayerSpec, Network, NetworkSpec, NeuronModel, ParamCount,
};
pub use neuron::{
    adlif_step, delay_step, generic_step, lif_step, surrogate_spike, DelayKind, DelayScheme,
    DelayState, DelayTiming, GenericNeuronSpec, NeuronParams, NeuronState, ShiftCoeffs, SpikeFn,
};
pub use rng::RngStream;
pub use train::{evaluate, fit, grad_check, train_epoch, EpochMetrics, TrainConfig};
