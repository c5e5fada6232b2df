//! Event-stream preprocessing: channel binning, temporal framing, and a
//! lossless round trip through the flat interchange file format.
//!
//!     cargo run --release --example data_pipeline

use snn_delays::data::interchange::{read_events, write_events, RawEventFile};
use snn_delays::data::{bin_channels, load_dataset, to_frames, EventRecord, LoadOptions};
use snn_delays::rng::RngStream;

fn main() {
    // A handful of raw events on a 700-channel sensor.
    let events = vec![
        EventRecord { time_us: 1_000, channel: 12 },
        EventRecord { time_us: 25_000, channel: 12 },
        EventRecord { time_us: 25_500, channel: 14 },
        EventRecord { time_us: 999_999, channel: 699 },
        EventRecord { time_us: 1_200_000, channel: 3 }, // past the frame span
    ];

    // Merge every 5 consecutive channels: 700 -> 140.
    let binned = bin_channels(&events, 5, 700).unwrap();
    println!("binned channels: {:?}", binned.iter().map(|e| e.channel).collect::<Vec<_>>());

    // Accumulate into 10 ms count frames, 100 frames total.
    let frames = to_frames(&binned, 10_000, 100, 140).unwrap();
    println!(
        "frame tensor {}x{}, total count {} (events past 1 s truncated)",
        frames.t_len(),
        frames.channels(),
        frames.total_count()
    );
    println!("frame[2] channel 2 holds both 25 ms events: {}", frames.frames.get(2, 2));

    // Interchange round trip: write, read, write again; bytes must match.
    let mut rng = RngStream::new(9);
    let samples: Vec<(u16, Vec<EventRecord>)> = (0..50)
        .map(|i| {
            let events = (0..rng.next_below(200))
                .map(|_| EventRecord {
                    time_us: rng.next_below(1_000_000) as u32,
                    channel: rng.next_below(700) as u16,
                })
                .collect();
            ((i % 20) as u16, events)
        })
        .collect();
    let file = RawEventFile {
        c_raw: 700,
        n_classes: 20,
        samples,
    };
    let dir = std::env::temp_dir().join("snn-delays-example");
    std::fs::create_dir_all(&dir).unwrap();
    let p1 = dir.join("a.snne");
    let p2 = dir.join("b.snne");
    write_events(&p1, &file).unwrap();
    let back = read_events(&p1).unwrap();
    write_events(&p2, &back).unwrap();
    let identical = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap();
    println!("\ninterchange write -> read -> write: byte-identical = {identical}");

    // The loader applies binning + framing in one step.
    let (ds, meta) = load_dataset(
        &p1,
        &LoadOptions {
            bin_factor: 5,
            window_us: 10_000,
            t_max: 100,
            expect_samples: Some(50),
            expect_classes: Some(20),
        },
    )
    .unwrap();
    println!(
        "loaded {} samples, {} -> {} channels, T = {}",
        ds.len(),
        meta.c_raw,
        meta.c_binned,
        ds.samples[0].tensor.t_len()
    );
}
