//! Converter from the published HDF5 container layout to the flat
//! interchange format (enabled with the `hdf5` cargo feature).
//!
//! Expected container layout: vlen datasets `spikes/times` (seconds, f64)
//! and `spikes/units` (channel indices), plus a `labels` dataset, one row
//! per sample.

use std::path::Path;

use hdf5::types::VarLenArray;

use crate::data::interchange::{write_events, RawEventFile};
use crate::data::EventRecord;
use crate::error::{Result, SnnError};

#[derive(Clone, Copy, Debug)]
pub struct ConvertSummary {
    pub n_samples: usize,
    pub n_events: usize,
    pub c_raw: u32,
    pub n_classes: u32,
}

fn read_labels(file: &hdf5::File) -> Result<Vec<u16>> {
    let ds = file
        .dataset("labels")
        .map_err(|e| SnnError::Data(format!("labels dataset: {e}")))?;
    // Containers in the wild store labels as various integer widths.
    if let Ok(v) = ds.read_raw::<u16>() {
        return Ok(v);
    }
    if let Ok(v) = ds.read_raw::<u32>() {
        return Ok(v.into_iter().map(|x| x as u16).collect());
    }
    if let Ok(v) = ds.read_raw::<u64>() {
        return Ok(v.into_iter().map(|x| x as u16).collect());
    }
    if let Ok(v) = ds.read_raw::<i64>() {
        return Ok(v.into_iter().map(|x| x as u16).collect());
    }
    let v = ds
        .read_raw::<f64>()
        .map_err(|e| SnnError::Data(format!("labels dtype unsupported: {e}")))?;
    Ok(v.into_iter().map(|x| x as u16).collect())
}

fn read_units(file: &hdf5::File) -> Result<Vec<Vec<u16>>> {
    let ds = file
        .dataset("spikes/units")
        .map_err(|e| SnnError::Data(format!("spikes/units dataset: {e}")))?;
    if let Ok(v) = ds.read_raw::<VarLenArray<u16>>() {
        return Ok(v.into_iter().map(|r| r.as_slice().to_vec()).collect());
    }
    if let Ok(v) = ds.read_raw::<VarLenArray<u32>>() {
        return Ok(v
            .into_iter()
            .map(|r| r.as_slice().iter().map(|&x| x as u16).collect())
            .collect());
    }
    if let Ok(v) = ds.read_raw::<VarLenArray<u64>>() {
        return Ok(v
            .into_iter()
            .map(|r| r.as_slice().iter().map(|&x| x as u16).collect())
            .collect());
    }
    let v = ds
        .read_raw::<VarLenArray<i64>>()
        .map_err(|e| SnnError::Data(format!("spikes/units dtype unsupported: {e}")))?;
    Ok(v
        .into_iter()
        .map(|r| r.as_slice().iter().map(|&x| x as u16).collect())
        .collect())
}

fn read_times(file: &hdf5::File) -> Result<Vec<Vec<f64>>> {
    let ds = file
        .dataset("spikes/times")
        .map_err(|e| SnnError::Data(format!("spikes/times dataset: {e}")))?;
    let v = ds
        .read_raw::<VarLenArray<f64>>()
        .map_err(|e| SnnError::Data(format!("spikes/times dtype unsupported: {e}")))?;
    Ok(v.into_iter().map(|r| r.as_slice().to_vec()).collect())
}

/// Converts one container file to the flat format. `c_raw`/`n_classes`
/// describe the corpus (700/20 for the spoken-digit set).
pub fn convert_container(
    input: &Path,
    output: &Path,
    c_raw: u32,
    n_classes: u32,
) -> Result<ConvertSummary> {
    let file =
        hdf5::File::open(input).map_err(|e| SnnError::Data(format!("{}: {e}", input.display())))?;
    let labels = read_labels(&file)?;
    let times = read_times(&file)?;
    let units = read_units(&file)?;
    if labels.len() != times.len() || labels.len() != units.len() {
        return Err(SnnError::Data(format!(
            "ragged container: {} labels, {} time rows, {} unit rows",
            labels.len(),
            times.len(),
            units.len()
        )));
    }
    let mut samples = Vec::with_capacity(labels.len());
    let mut n_events = 0usize;
    for ((label, ts), us) in labels.into_iter().zip(times).zip(units) {
        if label as u32 >= n_classes {
            return Err(SnnError::Data(format!(
                "label {label} >= n_classes {n_classes}"
            )));
        }
        if ts.len() != us.len() {
            return Err(SnnError::Data("ragged sample: times vs units".into()));
        }
        let events: Vec<EventRecord> = ts
            .iter()
            .zip(&us)
            .map(|(&t, &u)| {
                if u as u32 >= c_raw {
                    return Err(SnnError::Data(format!("channel {u} >= c_raw {c_raw}")));
                }
                Ok(EventRecord {
                    time_us: (t * 1e6).round().max(0.0) as u32,
                    channel: u,
                })
            })
            .collect::<Result<_>>()?;
        n_events += events.len();
        samples.push((label, events));
    }
    let raw = RawEventFile {
        c_raw,
        n_classes,
        samples,
    };
    write_events(output, &raw)?;
    Ok(ConvertSummary {
        n_samples: raw.samples.len(),
        n_events,
        c_raw,
        n_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::interchange::read_events;

    #[test]
    fn converts_a_synthetic_container() {
        let dir = tempfile::tempdir().unwrap();
        let h5_path = dir.path().join("toy.h5");
        let flat_path = dir.path().join("toy.snne");

        let file = hdf5::File::create(&h5_path).unwrap();
        let g = file.create_group("spikes").unwrap();
        let times: Vec<VarLenArray<f64>> = vec![
            VarLenArray::from_slice(&[0.001, 0.5004, 0.9]),
            VarLenArray::from_slice(&[0.25]),
        ];
        g.new_dataset::<VarLenArray<f64>>()
            .shape(2)
            .create("times")
            .unwrap()
            .write(&times)
            .unwrap();
        let units: Vec<VarLenArray<u64>> = vec![
            VarLenArray::from_slice(&[3u64, 699, 0]),
            VarLenArray::from_slice(&[14u64]),
        ];
        g.new_dataset::<VarLenArray<u64>>()
            .shape(2)
            .create("units")
            .unwrap()
            .write(&units)
            .unwrap();
        file.new_dataset::<u32>()
            .shape(2)
            .create("labels")
            .unwrap()
            .write(&[7u32, 19])
            .unwrap();
        drop(file);

        let summary = convert_container(&h5_path, &flat_path, 700, 20).unwrap();
        assert_eq!(summary.n_samples, 2);
        assert_eq!(summary.n_events, 4);

        let raw = read_events(&flat_path).unwrap();
        assert_eq!(raw.samples[0].0, 7);
        assert_eq!(
            raw.samples[0].1[1],
            EventRecord {
                time_us: 500_400,
                channel: 699
            }
        );
        assert_eq!(raw.samples[1].1[0].time_us, 250_000);
    }
}
