//! Synthetic delayed-pattern classification task.
//!
//! Every sample carries a marker event on the reference channel 0 at a
//! random onset and a second event on channel 1 delayed by a class-specific
//! lag. Background noise falls on every channel except channel 1, so the
//! sample holds exactly one pattern event: deciding the class means reading
//! the reference-channel history at the pattern event, at a precision plain
//! leaky traces blur but delay taps index directly. Total event counts are
//! class-independent by construction (one event per pattern channel plus
//! label-blind noise), so counting classifiers sit at chance.

use crate::data::interchange::RawEventFile;
use crate::data::{to_frames, Dataset, EventRecord, Sample};
use crate::error::{Result, SnnError};
use crate::rng::RngStream;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub channels: usize,
    pub seq_len: usize,
    /// Class-specific lag (frames) between the marker and the second event.
    pub lags: Vec<usize>,
    /// Probability that a (frame, channel) bin carries a noise event, for
    /// every channel except the clean pattern channel 1.
    pub noise_rate: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lags.len() != self.n_classes {
            return Err(SnnError::InvalidArg(format!(
                "{} lags for {} classes",
                self.lags.len(),
                self.n_classes
            )));
        }
        let mut sorted = self.lags.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.lags.len() {
            return Err(SnnError::InvalidArg("class lags must be distinct".into()));
        }
        if self.lags.iter().any(|&lag| lag == 0 || lag >= self.seq_len) {
            return Err(SnnError::InvalidArg(
                "lags must be in 1..seq_len".into(),
            ));
        }
        if self.channels < 2 {
            return Err(SnnError::InvalidArg("need at least 2 channels".into()));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(SnnError::InvalidArg("noise rate must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Generates `n_samples` labeled event streams (classes balanced round-robin).
/// Event times are frame indices in microseconds-as-frame-units: load with
/// `window_us = 1` to reproduce the frames exactly.
pub fn gen_synthetic_events(spec: &SyntheticSpec, n_samples: usize) -> Result<RawEventFile> {
    spec.validate()?;
    let mut rng = RngStream::new(spec.seed);
    let max_lag = *spec.lags.iter().max().unwrap();
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let class = i % spec.n_classes;
        let lag = spec.lags[class];
        // The pattern-event time is drawn class-independently (uniform over
        // {max_lag..seq_len-1}) and the marker placed `lag` frames before
        // it; otherwise the event-time margins would leak the class.
        let second = max_lag + rng.next_below(spec.seq_len - max_lag);
        let onset = second - lag;
        let mut events = vec![
            EventRecord {
                time_us: onset as u32,
                channel: 0,
            },
            EventRecord {
                time_us: second as u32,
                channel: 1,
            },
        ];
        if spec.noise_rate > 0.0 {
            for t in 0..spec.seq_len {
                for c in (0..spec.channels).filter(|&c| c != 1) {
                    if rng.bernoulli(spec.noise_rate) {
                        events.push(EventRecord {
                            time_us: t as u32,
                            channel: c as u16,
                        });
                    }
                }
            }
        }
        samples.push((class as u16, events));
    }
    Ok(RawEventFile {
        c_raw: spec.channels as u32,
        n_classes: spec.n_classes as u32,
        samples,
    })
}

/// Generates a framed in-memory dataset through the standard pipeline.
pub fn gen_synthetic(spec: &SyntheticSpec, n_samples: usize) -> Result<Dataset> {
    let raw = gen_synthetic_events(spec, n_samples)?;
    let samples = raw
        .samples
        .iter()
        .map(|(label, events)| {
            Ok(Sample {
                tensor: to_frames(events, 1, spec.seq_len, spec.channels)?,
                label: *label as usize,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        samples,
        n_classes: spec.n_classes,
    })
}
