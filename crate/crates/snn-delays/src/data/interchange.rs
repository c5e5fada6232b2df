//! Flat binary event-file format.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic  b"SNNE"
//! u32    version (currently 1)
//! u32    n_samples
//! u32    c_raw        (raw channel count)
//! u32    n_classes
//! per sample:
//!   u16  label
//!   u32  n_events
//!   n_events x { u32 time_us, u16 channel }
//! ```
//!
//! The format stores raw (un-binned, un-framed) events so that loading and
//! re-exporting is lossless.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::data::EventRecord;
use crate::error::{Result, SnnError};

const MAGIC: &[u8; 4] = b"SNNE";
const VERSION: u32 = 1;

/// Raw contents of an interchange file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawEventFile {
    pub c_raw: u32,
    pub n_classes: u32,
    pub samples: Vec<(u16, Vec<EventRecord>)>,
}

pub fn write_events(path: &Path, file: &RawEventFile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(file.samples.len() as u32).to_le_bytes())?;
    w.write_all(&file.c_raw.to_le_bytes())?;
    w.write_all(&file.n_classes.to_le_bytes())?;
    for (label, events) in &file.samples {
        w.write_all(&label.to_le_bytes())?;
        w.write_all(&(events.len() as u32).to_le_bytes())?;
        for e in events {
            w.write_all(&e.time_us.to_le_bytes())?;
            w.write_all(&e.channel.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_events(path: &Path) -> Result<RawEventFile> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| SnnError::Data(format!("{}: {e}", path.display())))?;
    if &magic != MAGIC {
        return Err(SnnError::Data(format!(
            "{}: bad magic {magic:?}",
            path.display()
        )));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(SnnError::Data(format!("unsupported version {version}")));
    }
    let n_samples = read_u32(&mut r)? as usize;
    let c_raw = read_u32(&mut r)?;
    let n_classes = read_u32(&mut r)?;
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let label = read_u16(&mut r)
            .map_err(|_| SnnError::Data(format!("truncated file at sample {i}")))?;
        if label as u32 >= n_classes {
            return Err(SnnError::Data(format!(
                "sample {i}: label {label} >= n_classes {n_classes}"
            )));
        }
        let n_events = read_u32(&mut r)? as usize;
        let mut events = Vec::with_capacity(n_events);
        for _ in 0..n_events {
            let time_us = read_u32(&mut r)
                .map_err(|_| SnnError::Data(format!("truncated events in sample {i}")))?;
            let channel = read_u16(&mut r)?;
            if channel as u32 >= c_raw {
                return Err(SnnError::Data(format!(
                    "sample {i}: channel {channel} >= c_raw {c_raw}"
                )));
            }
            events.push(EventRecord { time_us, channel });
        }
        samples.push((label, events));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(SnnError::Data("trailing bytes after last sample".into()));
    }
    Ok(RawEventFile {
        c_raw,
        n_classes,
        samples,
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn random_file(seed: u64, n_samples: usize) -> RawEventFile {
        let mut rng = RngStream::new(seed);
        let samples = (0..n_samples)
            .map(|_| {
                let label = rng.next_below(10) as u16;
                let n = rng.next_below(50);
                let events = (0..n)
                    .map(|_| EventRecord {
                        time_us: rng.next_below(1_000_000) as u32,
                        channel: rng.next_below(700) as u16,
                    })
                    .collect();
                (label, events)
            })
            .collect();
        RawEventFile {
            c_raw: 700,
            n_classes: 10,
            samples,
        }
    }

    #[test]
    fn roundtrip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.snne");
        let file = random_file(3, 20);
        write_events(&path, &file).unwrap();
        let back = read_events(&path).unwrap();
        assert_eq!(file, back);

        // Second write of the loaded data is byte-identical.
        let path2 = dir.path().join("events2.snne");
        write_events(&path2, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.snne");
        write_events(&path, &random_file(5, 4)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(read_events(&path).is_err());
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.snne");
        let mut file = random_file(7, 3);
        file.samples[1].0 = 10; // n_classes is 10
        write_events(&path, &file).unwrap();
        assert!(read_events(&path).is_err());
    }
}
