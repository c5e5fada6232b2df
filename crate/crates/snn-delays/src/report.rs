//! Table-shaped run reports: CSV rows per (cell, seed) and a JSON summary,
//! both carrying the exact configuration and its hash.

use std::io::Write;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::Result;
use crate::network::ParamCount;
use crate::train::EpochMetrics;

/// Metrics of one seed within a cell.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub test_acc: f64,
    pub train_loss: f64,
    pub seconds: f64,
    pub epochs: Vec<EpochMetrics>,
}

/// One sweep cell (or a single training run) aggregated over its seeds.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Report {
    pub config_hash: String,
    /// Full config this cell is reproducible from.
    pub config: RunConfig,
    pub cell: String,
    pub params: ParamCount,
    pub param_total: usize,
    pub state_memory: usize,
    pub per_seed: Vec<SeedResult>,
    pub mean_acc: f64,
    /// Sample standard deviation over seeds (0 for a single seed).
    pub std_acc: f64,
    pub wall_seconds: f64,
}

impl Report {
    pub fn from_seeds(
        config: &RunConfig,
        cell: String,
        params: ParamCount,
        state_memory: usize,
        per_seed: Vec<SeedResult>,
    ) -> Report {
        let accs: Vec<f64> = per_seed.iter().map(|s| s.test_acc).collect();
        let mean = accs.iter().sum::<f64>() / accs.len().max(1) as f64;
        let std = if accs.len() > 1 {
            (accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (accs.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        let wall = per_seed.iter().map(|s| s.seconds).sum();
        Report {
            config_hash: config.hash(),
            config: config.clone(),
            cell,
            params,
            param_total: params.total(),
            state_memory,
            per_seed,
            mean_acc: mean,
            std_acc: std,
            wall_seconds: wall,
        }
    }

    pub fn csv_header() -> &'static str {
        "config_hash,cell,seed,test_acc,train_loss,seconds,params_total,state_memory"
    }

    /// One CSV row per seed.
    pub fn csv_rows(&self) -> Vec<String> {
        self.per_seed
            .iter()
            .map(|s| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    self.config_hash,
                    self.cell,
                    s.seed,
                    s.test_acc,
                    s.train_loss,
                    s.seconds,
                    self.param_total,
                    self.state_memory
                )
            })
            .collect()
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{}: acc {:.4} +/- {:.4} ({} seeds, {} params, {:.1}s)",
            self.cell,
            self.mean_acc,
            self.std_acc,
            self.per_seed.len(),
            self.param_total,
            self.wall_seconds
        )
    }
}

/// Writes the CSV table and JSON summary for a set of reports.
pub fn write_reports(dir: &Path, name: &str, reports: &[Report]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{name}.csv"));
    let mut csv = std::fs::File::create(&csv_path)?;
    writeln!(csv, "{}", Report::csv_header())?;
    for r in reports {
        for row in r.csv_rows() {
            writeln!(csv, "{row}")?;
        }
    }
    let json_path = dir.join(format!("{name}.json"));
    let json = serde_json::to_string_pretty(reports)
        .map_err(|e| crate::error::SnnError::Data(format!("report serialize: {e}")))?;
    std::fs::write(&json_path, json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed_result(seed: u64, acc: f64) -> SeedResult {
        SeedResult {
            seed,
            test_acc: acc,
            train_loss: 0.5,
            seconds: 1.0,
            epochs: vec![],
        }
    }

    #[test]
    fn aggregate_mean_and_sample_std() {
        let cfg = RunConfig::default();
        let r = Report::from_seeds(
            &cfg,
            "cell".into(),
            ParamCount::default(),
            0,
            vec![seed_result(0, 0.9), seed_result(1, 0.8), seed_result(2, 1.0)],
        );
        assert!((r.mean_acc - 0.9).abs() < 1e-12);
        assert!((r.std_acc - 0.1).abs() < 1e-12);
        assert_eq!(r.csv_rows().len(), 3);
    }

    #[test]
    fn single_seed_has_zero_std() {
        let cfg = RunConfig::default();
        let r = Report::from_seeds(
            &cfg,
            "c".into(),
            ParamCount::default(),
            0,
            vec![seed_result(7, 0.77)],
        );
        assert_eq!(r.std_acc, 0.0);
    }

    #[test]
    fn reports_roundtrip_through_json() {
        let cfg = RunConfig::default();
        let r = Report::from_seeds(
            &cfg,
            "cell".into(),
            ParamCount::default(),
            12,
            vec![seed_result(0, 0.5)],
        );
        let dir = tempfile::tempdir().unwrap();
        write_reports(dir.path(), "sweep", std::slice::from_ref(&r)).unwrap();
        let text = std::fs::read_to_string(dir.path().join("sweep.json")).unwrap();
        let back: Vec<Report> = serde_json::from_str(&text).unwrap();
        assert_eq!(back[0].config_hash, r.config_hash);
        assert_eq!(back[0].config, cfg);
    }
}
