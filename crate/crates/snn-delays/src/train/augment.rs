//! Training-time data augmentation for framed event tensors.

use crate::data::SpikeFrameTensor;
use crate::error::{Result, SnnError};
use crate::rng::RngStream;

/// Random time-row / channel-column masking.
///
/// Each of the two sub-masks fires independently with its own probability
/// and zeroes a fixed fraction of rows (time steps) or columns (channels).
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct MaskAugConfig {
    pub p_time: f64,
    pub p_chan: f64,
    pub time_frac: f64,
    pub chan_frac: f64,
}

impl Default for MaskAugConfig {
    fn default() -> Self {
        MaskAugConfig {
            p_time: 0.5,
            p_chan: 0.5,
            time_frac: 0.1,
            chan_frac: 0.1,
        }
    }
}

/// Zeroes randomly chosen time rows and channel columns.
pub fn augment_mask(
    frames: &SpikeFrameTensor,
    cfg: &MaskAugConfig,
    rng: &mut RngStream,
) -> SpikeFrameTensor {
    let mut out = frames.clone();
    let t_len = out.t_len();
    let c_len = out.channels();
    if rng.bernoulli(cfg.p_time) {
        let k = (cfg.time_frac * t_len as f64).round() as usize;
        for t in rng.sample_distinct(t_len, k) {
            out.frames.row_mut(t).iter_mut().for_each(|v| *v = 0.0);
        }
    }
    if rng.bernoulli(cfg.p_chan) {
        let k = (cfg.chan_frac * c_len as f64).round() as usize;
        for c in rng.sample_distinct(c_len, k) {
            for t in 0..t_len {
                out.frames.set(t, c, 0.0);
            }
        }
    }
    out
}

/// Replaces a contiguous time segment of `a` with the same segment of `b`
/// and mixes the labels by the realized segment fraction.
///
/// Returns `(frames, soft_label)` where the label weight on `b`'s class is
/// `seg_len / T` for a segment length of `round(lambda * T)`, `lambda`
/// uniform in [0, 1).
pub fn augment_cutmix(
    a: &SpikeFrameTensor,
    label_a: usize,
    b: &SpikeFrameTensor,
    label_b: usize,
    n_classes: usize,
    rng: &mut RngStream,
) -> Result<(SpikeFrameTensor, Vec<f64>)> {
    if a.t_len() != b.t_len() || a.channels() != b.channels() {
        return Err(SnnError::dim(
            "augment_cutmix",
            format!(
                "{}x{} vs {}x{}",
                a.t_len(),
                a.channels(),
                b.t_len(),
                b.channels()
            ),
        ));
    }
    let t_len = a.t_len();
    let lambda = 1.0 - rng.uniform_unchecked(0.0, 1.0); // [0, 1)
    let seg_len = (lambda * t_len as f64).round() as usize;
    let mut out = a.clone();
    let mut label = vec![0.0; n_classes];
    if seg_len == 0 {
        label[label_a] = 1.0;
        return Ok((out, label));
    }
    let start = rng.next_below(t_len - seg_len + 1);
    for t in start..start + seg_len {
        out.frames
            .row_mut(t)
            .copy_from_slice(b.frames.row(t));
    }
    let mixed = seg_len as f64 / t_len as f64;
    label[label_a] += 1.0 - mixed;
    label[label_b] += mixed;
    Ok((out, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Matrix;

    fn filled(t: usize, c: usize, v: f64) -> SpikeFrameTensor {
        SpikeFrameTensor::new(Matrix::from_vec(t, c, vec![v; t * c]).unwrap()).unwrap()
    }

    #[test]
    fn mask_is_deterministic_under_seed() {
        let frames = filled(30, 10, 1.0);
        let cfg = MaskAugConfig::default();
        let a = augment_mask(&frames, &cfg, &mut RngStream::new(4));
        let b = augment_mask(&frames, &cfg, &mut RngStream::new(4));
        assert_eq!(a.frames, b.frames);
    }

    #[test]
    fn mask_probability_zero_is_identity() {
        let frames = filled(20, 5, 2.0);
        let cfg = MaskAugConfig {
            p_time: 0.0,
            p_chan: 0.0,
            ..MaskAugConfig::default()
        };
        let out = augment_mask(&frames, &cfg, &mut RngStream::new(8));
        assert_eq!(out.frames, frames.frames);
    }

    #[test]
    fn mask_zeroes_expected_fraction_on_average() {
        let frames = filled(50, 40, 1.0);
        let cfg = MaskAugConfig {
            p_time: 1.0,
            p_chan: 1.0,
            time_frac: 0.1,
            chan_frac: 0.1,
        };
        let mut rng = RngStream::new(17);
        let mut zeroed = 0usize;
        let trials = 200;
        for _ in 0..trials {
            let out = augment_mask(&frames, &cfg, &mut rng);
            zeroed += out.frames.as_slice().iter().filter(|&&v| v == 0.0).count();
        }
        let frac = zeroed as f64 / (trials * 50 * 40) as f64;
        // 5 rows of 40 + 4 cols of 50 - 20 overlap = 380 of 2000 = 0.19.
        assert!((frac - 0.19).abs() < 0.01, "zeroed fraction {frac}");
    }

    #[test]
    fn cutmix_extremes() {
        let a = filled(10, 3, 1.0);
        let b = filled(10, 3, 5.0);
        // Search seeds for lambda rounding to segment 0 and segment 10.
        let mut seen_zero = false;
        let mut seen_full = false;
        for seed in 0..500 {
            let (out, label) = augment_cutmix(&a, 0, &b, 1, 2, &mut RngStream::new(seed)).unwrap();
            let from_b = out
                .frames
                .as_slice()
                .iter()
                .filter(|&&v| v == 5.0)
                .count()
                / 3;
            assert!((label[1] - from_b as f64 / 10.0).abs() < 1e-12);
            if from_b == 0 {
                assert_eq!(label, vec![1.0, 0.0]);
                seen_zero = true;
            }
            if from_b == 10 {
                assert_eq!(label, vec![0.0, 1.0]);
                seen_full = true;
            }
        }
        assert!(seen_zero && seen_full);
    }

    #[test]
    fn cutmix_segment_is_contiguous_and_label_consistent() {
        let a = filled(100, 2, 1.0);
        let b = filled(100, 2, 9.0);
        let (out, label) = augment_cutmix(&a, 0, &b, 1, 2, &mut RngStream::new(21)).unwrap();
        let rows_from_b: Vec<usize> = (0..100)
            .filter(|&t| out.frames.get(t, 0) == 9.0)
            .collect();
        if !rows_from_b.is_empty() {
            let first = rows_from_b[0];
            let last = *rows_from_b.last().unwrap();
            assert_eq!(last - first + 1, rows_from_b.len(), "segment not contiguous");
        }
        assert!((label[0] + label[1] - 1.0).abs() < 1e-12);
        assert!((label[1] - rows_from_b.len() as f64 / 100.0).abs() < 1e-12);
    }

    #[test]
    fn cutmix_shape_mismatch_is_error() {
        let a = filled(10, 3, 1.0);
        let b = filled(11, 3, 1.0);
        assert!(augment_cutmix(&a, 0, &b, 1, 2, &mut RngStream::new(0)).is_err());
    }
}
