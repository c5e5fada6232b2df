//! Event-stream ingestion: channel binning, temporal framing, the flat
//! interchange file format, and a synthetic delayed-pattern task.

pub mod interchange;
#[cfg(feature = "hdf5")]
pub mod shd;
pub mod synthetic;

use crate::error::{Result, SnnError};
use crate::math::Matrix;

/// One input event: a timestamp in microseconds and a channel index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventRecord {
    pub time_us: u32,
    pub channel: u16,
}

/// Framed event counts, `[T x C]`, non-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeFrameTensor {
    pub frames: Matrix,
}

impl SpikeFrameTensor {
    pub fn new(frames: Matrix) -> Result<Self> {
        if frames.as_slice().iter().any(|&v| v < 0.0) {
            return Err(SnnError::Data("frame counts must be non-negative".into()));
        }
        Ok(SpikeFrameTensor { frames })
    }

    pub fn t_len(&self) -> usize {
        self.frames.rows()
    }

    pub fn channels(&self) -> usize {
        self.frames.cols()
    }

    pub fn total_count(&self) -> f64 {
        self.frames.as_slice().iter().sum()
    }
}

/// Split-level metadata validated on load.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DatasetMeta {
    pub split: String,
    pub n_samples: usize,
    pub c_raw: usize,
    pub c_binned: usize,
    pub n_classes: usize,
    pub window_us: u32,
    pub bin_factor: usize,
}

/// One labeled sample.
#[derive(Clone, Debug)]
pub struct Sample {
    pub tensor: SpikeFrameTensor,
    pub label: usize,
}

/// In-memory dataset; immutable after load.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Reduces channel resolution by merging `factor` consecutive channels.
/// Event count and timestamps are untouched.
pub fn bin_channels(events: &[EventRecord], factor: usize, c_raw: usize) -> Result<Vec<EventRecord>> {
    if factor == 0 || !c_raw.is_multiple_of(factor) {
        return Err(SnnError::InvalidArg(format!(
            "bin factor {factor} must divide channel count {c_raw}"
        )));
    }
    events
        .iter()
        .map(|e| {
            if (e.channel as usize) >= c_raw {
                return Err(SnnError::Data(format!(
                    "event channel {} >= c_raw {c_raw}",
                    e.channel
                )));
            }
            Ok(EventRecord {
                time_us: e.time_us,
                channel: (e.channel as usize / factor) as u16,
            })
        })
        .collect()
}

/// Accumulates events into `[T_max x channels]` count frames with a fixed
/// time window. Events at or beyond `t_max * window_us` are truncated;
/// shorter samples are implicitly zero-padded.
pub fn to_frames(
    events: &[EventRecord],
    window_us: u32,
    t_max: usize,
    channels: usize,
) -> Result<SpikeFrameTensor> {
    if window_us == 0 {
        return Err(SnnError::InvalidArg("window_us must be positive".into()));
    }
    let mut frames = Matrix::zeros(t_max, channels);
    for e in events {
        let t = (e.time_us / window_us) as usize;
        if t >= t_max {
            continue;
        }
        let c = e.channel as usize;
        if c >= channels {
            return Err(SnnError::Data(format!(
                "event channel {c} >= binned channel count {channels}"
            )));
        }
        frames.set(t, c, frames.get(t, c) + 1.0);
    }
    SpikeFrameTensor::new(frames)
}

/// Preprocessing settings applied when loading raw events.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct LoadOptions {
    pub bin_factor: usize,
    pub window_us: u32,
    pub t_max: usize,
    /// Expected sample count, validated when given.
    pub expect_samples: Option<usize>,
    /// Expected class count, validated when given.
    pub expect_classes: Option<usize>,
}

impl LoadOptions {
    /// Defaults for the 700-channel spoken-digit corpus: bin 5 consecutive
    /// channels (700 -> 140), 10 ms windows, 100 frames.
    pub fn shd(split: &str) -> Self {
        LoadOptions {
            bin_factor: 5,
            window_us: 10_000,
            t_max: 100,
            expect_samples: match split {
                "train" => Some(8156),
                "test" => Some(2264),
                _ => None,
            },
            expect_classes: Some(20),
        }
    }
}

/// Reads a flat interchange file and preprocesses every sample.
pub fn load_dataset(path: &std::path::Path, opts: &LoadOptions) -> Result<(Dataset, DatasetMeta)> {
    let raw = interchange::read_events(path)?;
    if let Some(expected) = opts.expect_samples {
        if raw.samples.len() != expected {
            return Err(SnnError::Data(format!(
                "expected {expected} samples, file has {}",
                raw.samples.len()
            )));
        }
    }
    if let Some(expected) = opts.expect_classes {
        if raw.n_classes as usize != expected {
            return Err(SnnError::Data(format!(
                "expected {expected} classes, file declares {}",
                raw.n_classes
            )));
        }
    }
    let c_binned = raw.c_raw as usize / opts.bin_factor.max(1);
    let mut samples = Vec::with_capacity(raw.samples.len());
    for (label, events) in &raw.samples {
        let binned = bin_channels(events, opts.bin_factor, raw.c_raw as usize)?;
        let tensor = to_frames(&binned, opts.window_us, opts.t_max, c_binned)?;
        if *label as usize >= raw.n_classes as usize {
            return Err(SnnError::Data(format!(
                "label {label} out of range for {} classes",
                raw.n_classes
            )));
        }
        samples.push(Sample {
            tensor,
            label: *label as usize,
        });
    }
    let meta = DatasetMeta {
        split: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        n_samples: samples.len(),
        c_raw: raw.c_raw as usize,
        c_binned,
        n_classes: raw.n_classes as usize,
        window_us: opts.window_us,
        bin_factor: opts.bin_factor,
    };
    Ok((
        Dataset {
            samples,
            n_classes: raw.n_classes as usize,
        },
        meta,
    ))
}
