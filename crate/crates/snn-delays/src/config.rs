//! Flat `key = value` run configuration with defaults, file parsing, and
//! command-line overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::data::LoadOptions;
use crate::error::{Result, SnnError};
use crate::network::{NetworkSpec, NeuronModel};
use crate::neuron::{DelayKind, DelayScheme};
use crate::train::{AugmentConfig, TrainConfig};

/// Environment variable overriding `data_dir`.
pub const DATA_DIR_ENV: &str = "SNN_DATA_DIR";

/// Complete description of a run. Every field has a default; a config file
/// and command-line flags override in that order.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunConfig {
    // architecture
    pub model: NeuronModel,
    pub h: usize,
    pub l: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub nd: usize,
    pub scheme: DelayKind,
    pub trainable_asd: bool,
    pub dropout: f64,
    // optimization
    pub lr: f64,
    pub wd: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Seed list for multi-seed reports.
    pub seeds: Vec<u64>,
    // augmentation
    pub augment: bool,
    pub cutmix_prob: f64,
    pub mask_prob: f64,
    pub mask_time_frac: f64,
    pub mask_chan_frac: f64,
    // data
    pub data_dir: String,
    pub train_file: String,
    pub test_file: String,
    pub window_us: u32,
    pub bin_factor: usize,
    pub t_max: usize,
    /// Validate sample counts for the named split ("shd" or "none").
    pub expect_split: String,
    // sweep grid
    pub sweep_models: Vec<NeuronModel>,
    pub sweep_nd: Vec<usize>,
    pub sweep_schemes: Vec<DelayKind>,
    pub sweep_h: Vec<usize>,
    // output
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: NeuronModel::AdLif,
            h: 128,
            l: 2,
            c_in: 140,
            c_out: 20,
            nd: 5,
            scheme: DelayKind::Uniform,
            trainable_asd: false,
            dropout: 0.4,
            lr: 1e-2,
            wd: 1e-5,
            batch_size: 128,
            epochs: 50,
            seed: 0,
            seeds: vec![0, 1, 2, 3, 4],
            augment: true,
            cutmix_prob: 0.5,
            mask_prob: 0.5,
            mask_time_frac: 0.1,
            mask_chan_frac: 0.1,
            data_dir: String::new(),
            train_file: "shd_train.snne".into(),
            test_file: "shd_test.snne".into(),
            window_us: 10_000,
            bin_factor: 5,
            t_max: 100,
            expect_split: "shd".into(),
            sweep_models: vec![
                NeuronModel::Lif,
                NeuronModel::Rlif,
                NeuronModel::AdLif,
                NeuronModel::RadLif,
            ],
            sweep_nd: vec![0, 5, 10],
            sweep_schemes: vec![DelayKind::Uniform],
            sweep_h: vec![128],
            out_dir: "runs".into(),
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

fn parse_list<T, F>(v: &str, f: F) -> Result<Vec<T>>
where
    F: Fn(&str) -> Result<T>,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect()
}

macro_rules! parse_num {
    ($v:expr, $line:expr, $key:expr, $ty:ty) => {
        $v.parse::<$ty>().map_err(|_| {
            SnnError::Config(format!(
                "line {}: cannot parse '{}' as {} for key '{}'",
                $line,
                $v,
                stringify!($ty),
                $key
            ))
        })?
    };
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let v = value.trim();
        match key {
            "model" => self.model = NeuronModel::parse(v)?,
            "h" => self.h = parse_num!(v, line, key, usize),
            "l" => self.l = parse_num!(v, line, key, usize),
            "c_in" | "cin" => self.c_in = parse_num!(v, line, key, usize),
            "c_out" | "cout" => self.c_out = parse_num!(v, line, key, usize),
            "nd" | "n_d" => self.nd = parse_num!(v, line, key, usize),
            "scheme" => self.scheme = DelayKind::parse(v)?,
            "trainable_asd" => {
                self.trainable_asd = parse_bool(v).ok_or_else(|| {
                    SnnError::Config(format!("line {line}: bad bool '{v}' for trainable_asd"))
                })?
            }
            "dropout" => self.dropout = parse_num!(v, line, key, f64),
            "lr" | "base_lr" => self.lr = parse_num!(v, line, key, f64),
            "wd" | "weight_decay" => self.wd = parse_num!(v, line, key, f64),
            "batch_size" | "batch" => self.batch_size = parse_num!(v, line, key, usize),
            "epochs" => self.epochs = parse_num!(v, line, key, usize),
            "seed" => self.seed = parse_num!(v, line, key, u64),
            "seeds" => self.seeds = parse_list(v, |s| Ok(parse_num!(s, line, key, u64)))?,
            "augment" => {
                self.augment = parse_bool(v).ok_or_else(|| {
                    SnnError::Config(format!("line {line}: bad bool '{v}' for augment"))
                })?
            }
            "cutmix_prob" => self.cutmix_prob = parse_num!(v, line, key, f64),
            "mask_prob" => self.mask_prob = parse_num!(v, line, key, f64),
            "mask_time_frac" => self.mask_time_frac = parse_num!(v, line, key, f64),
            "mask_chan_frac" => self.mask_chan_frac = parse_num!(v, line, key, f64),
            "data_dir" => self.data_dir = v.to_string(),
            "train_file" => self.train_file = v.to_string(),
            "test_file" => self.test_file = v.to_string(),
            "window_us" => self.window_us = parse_num!(v, line, key, u32),
            "bin_factor" => self.bin_factor = parse_num!(v, line, key, usize),
            "t_max" => self.t_max = parse_num!(v, line, key, usize),
            "expect_split" => self.expect_split = v.to_string(),
            "sweep_models" => self.sweep_models = parse_list(v, NeuronModel::parse)?,
            "sweep_nd" => self.sweep_nd = parse_list(v, |s| Ok(parse_num!(s, line, key, usize)))?,
            "sweep_schemes" => self.sweep_schemes = parse_list(v, DelayKind::parse)?,
            "sweep_h" => self.sweep_h = parse_list(v, |s| Ok(parse_num!(s, line, key, usize)))?,
            "out_dir" => self.out_dir = v.to_string(),
            other => {
                return Err(SnnError::Config(format!(
                    "line {line}: unknown key '{other}'"
                )))
            }
        }
        Ok(())
    }

    /// Parses flat `key = value` text (`#` comments, blank lines allowed).
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SnnError::Config(format!("line {line_no}: expected 'key = value', got '{line}'"))
            })?;
            cfg.set(key.trim(), value, line_no)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SnnError::Config(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn scheme(&self) -> DelayScheme {
        DelayScheme {
            kind: self.scheme,
            trainable: self.trainable_asd,
        }
    }

    pub fn network_spec(&self) -> NetworkSpec {
        NetworkSpec::uniform(
            self.c_in,
            self.c_out,
            self.l,
            self.h,
            self.model,
            self.nd,
            self.scheme(),
            self.dropout,
        )
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            base_lr: self.lr,
            weight_decay: self.wd,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            augment: if self.augment {
                Some(AugmentConfig {
                    mask: crate::train::augment::MaskAugConfig {
                        p_time: self.mask_prob,
                        p_chan: self.mask_prob,
                        time_frac: self.mask_time_frac,
                        chan_frac: self.mask_chan_frac,
                    },
                    cutmix_prob: self.cutmix_prob,
                })
            } else {
                None
            },
        }
    }

    pub fn load_options(&self, split: &str) -> LoadOptions {
        let mut opts = LoadOptions {
            bin_factor: self.bin_factor,
            window_us: self.window_us,
            t_max: self.t_max,
            expect_samples: None,
            expect_classes: None,
        };
        if self.expect_split == "shd" {
            let shd = LoadOptions::shd(split);
            opts.expect_samples = shd.expect_samples;
            opts.expect_classes = shd.expect_classes;
        }
        opts
    }

    /// Resolves a dataset file against `data_dir` (environment override
    /// first).
    pub fn data_path(&self, file: &str) -> PathBuf {
        let dir = std::env::var(DATA_DIR_ENV).unwrap_or_else(|_| self.data_dir.clone());
        if dir.is_empty() {
            PathBuf::from(file)
        } else {
            PathBuf::from(dir).join(file)
        }
    }

    /// Canonical key/value view (serialized into reports).
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let json = serde_json::to_value(self).expect("config serialize");
        let mut map = BTreeMap::new();
        if let serde_json::Value::Object(obj) = json {
            for (k, v) in obj {
                let rendered = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Array(items) => items
                        .into_iter()
                        .map(|x| match x {
                            serde_json::Value::String(s) => s,
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                map.insert(k, rendered);
            }
        }
        map
    }

    /// Stable 64-bit FNV-1a hash of the canonical key/value view.
    pub fn hash(&self) -> String {
        let mut acc: u64 = 0xcbf2_9ce4_8422_2325;
        for (k, v) in self.to_map() {
            for byte in k.bytes().chain(std::iter::once(b'=')).chain(v.bytes()).chain(std::iter::once(b'\n')) {
                acc ^= byte as u64;
                acc = acc.wrapping_mul(0x0000_0100_0000_01B3);
            }
        }
        format!("{acc:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.lr, 1e-2);
        assert_eq!(cfg.wd, 1e-5);
        assert_eq!(cfg.dropout, 0.4);
        assert_eq!(cfg.batch_size, 128);
        assert_eq!(cfg.epochs, 50);
        assert_eq!(cfg.seeds.len(), 5);
    }

    #[test]
    fn file_values_and_comments() {
        let cfg = RunConfig::parse(
            "# comment\nnd = 5\nscheme = expdecay # trailing\ntrainable_asd = false\n",
        )
        .unwrap();
        assert_eq!(cfg.nd, 5);
        assert_eq!(cfg.scheme, DelayKind::ExpDecay);
        assert!(!cfg.trainable_asd);
    }

    #[test]
    fn cli_override_wins() {
        let mut cfg = RunConfig::parse("nd = 5\n").unwrap();
        cfg.set("nd", "10", 0).unwrap();
        assert_eq!(cfg.nd, 10);
    }

    #[test]
    fn unknown_key_names_line() {
        let err = RunConfig::parse("\n\nwat = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(err.to_string().contains("wat"));
    }

    #[test]
    fn bad_value_names_line() {
        let err = RunConfig::parse("h = banana\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.nd = 10;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn sweep_lists_parse() {
        let cfg = RunConfig::parse(
            "sweep_models = lif, adlif\nsweep_nd = 0,5,10\nsweep_schemes = ones,uniform\n",
        )
        .unwrap();
        assert_eq!(cfg.sweep_models.len(), 2);
        assert_eq!(cfg.sweep_nd, vec![0, 5, 10]);
        assert_eq!(cfg.sweep_schemes.len(), 2);
    }
}
