//! Command-line interface: train / eval / sweep / gradcheck / params /
//! convert / gen-synth, driven by a flat config file with flag overrides.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::data::synthetic::{gen_synthetic_events, SyntheticSpec};
use crate::data::{interchange, load_dataset, Dataset};
use crate::error::{Result, SnnError};
use crate::network::{checkpoint, count_params, count_state_memory, Network, NeuronModel};
use crate::neuron::DelayKind;
use crate::report::{write_reports, Report, SeedResult};
use crate::rng::RngStream;
use crate::train::{evaluate, fit, grad_check, EpochMetrics};

#[derive(Parser)]
#[command(
    name = "snn-delays",
    version,
    about = "Spiking networks with shift-register delay states: training, sweeps, and data tooling"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

/// Folds argument-level failures into the usage-error class (exit code 2).
fn usage(e: SnnError) -> SnnError {
    SnnError::Config(e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write metrics, a checkpoint, and a report.
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test split.
    Eval(EvalArgs),
    /// Run the configured (models x nd x schemes x h) grid, one report row
    /// per cell and seed.
    Sweep(SweepArgs),
    /// Check reverse-mode gradients against finite differences on a small
    /// relaxed model.
    Gradcheck(GradcheckArgs),
    /// Print the trainable-parameter breakdown and state-memory count.
    Params(ParamsArgs),
    /// Convert a published HDF5 container to the flat interchange format.
    Convert(ConvertArgs),
    /// Generate the synthetic delayed-pattern dataset.
    GenSynth(GenSynthArgs),
}

/// Config-file plus per-key overrides shared by most commands.
#[derive(Args, Clone)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    cin: Option<usize>,
    #[arg(long)]
    cout: Option<usize>,
    #[arg(long)]
    nd: Option<usize>,
    #[arg(long)]
    scheme: Option<String>,
    /// Train the delay coefficients.
    #[arg(long = "train-asd", action = ArgAction::SetTrue)]
    train_asd: bool,
    /// Freeze the delay coefficients (overrides config).
    #[arg(long = "no-train-asd", action = ArgAction::SetTrue)]
    no_train_asd: bool,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    data_dir: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    augment: Option<bool>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.model {
            cfg.model = NeuronModel::parse(v).map_err(usage)?;
        }
        if let Some(v) = self.h {
            cfg.h = v;
        }
        if let Some(v) = self.l {
            cfg.l = v;
        }
        if let Some(v) = self.cin {
            cfg.c_in = v;
        }
        if let Some(v) = self.cout {
            cfg.c_out = v;
        }
        if let Some(v) = self.nd {
            cfg.nd = v;
        }
        if let Some(v) = &self.scheme {
            cfg.scheme = DelayKind::parse(v).map_err(usage)?;
        }
        if self.train_asd {
            cfg.trainable_asd = true;
        }
        if self.no_train_asd {
            cfg.trainable_asd = false;
        }
        if let Some(v) = self.dropout {
            cfg.dropout = v;
        }
        if let Some(v) = self.lr {
            cfg.lr = v;
        }
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.data_dir {
            cfg.data_dir = v.clone();
        }
        if let Some(v) = &self.out_dir {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.augment {
            cfg.augment = v;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Checkpoint produced by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 4)]
    h: usize,
    #[arg(long = "T", default_value_t = 10)]
    t_len: usize,
    #[arg(long, default_value_t = 3)]
    nd: usize,
    #[arg(long, default_value = "radlif")]
    model: String,
    #[arg(long, default_value = "uniform")]
    scheme: String,
    /// Freeze the delay coefficients instead of training them.
    #[arg(long, action = ArgAction::SetTrue)]
    frozen_asd: bool,
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long, default_value_t = 5)]
    cin: usize,
    #[arg(long, default_value_t = 3)]
    cout: usize,
    #[arg(long, default_value_t = 3)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args)]
struct ParamsArgs {
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input HDF5 container.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output flat interchange file.
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 700)]
    c_raw: u32,
    #[arg(long, default_value_t = 20)]
    classes: u32,
}

#[derive(Args)]
struct GenSynthArgs {
    /// Output directory for train/test interchange files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 4)]
    channels: usize,
    #[arg(long = "seq-len", default_value_t = 40)]
    seq_len: usize,
    /// Comma-separated class lags, e.g. "2,6".
    #[arg(long, default_value = "2,6")]
    lags: String,
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "train-samples", default_value_t = 512)]
    train_samples: usize,
    #[arg(long = "test-samples", default_value_t = 256)]
    test_samples: usize,
}

fn load_split(cfg: &RunConfig, which: &str) -> Result<Dataset> {
    let file = if which == "train" {
        &cfg.train_file
    } else {
        &cfg.test_file
    };
    let path = cfg.data_path(file);
    let (ds, meta) = load_dataset(&path, &cfg.load_options(which))?;
    eprintln!(
        "loaded {}: {} samples, {} classes, {} -> {} channels, T = {}",
        path.display(),
        meta.n_samples,
        meta.n_classes,
        meta.c_raw,
        meta.c_binned,
        cfg.t_max
    );
    Ok(ds)
}

fn cell_name(model: NeuronModel, scheme: DelayKind, nd: usize, h: usize, trainable: bool) -> String {
    format!(
        "{}/{}{}/nd{}/h{}",
        model.name(),
        scheme.name(),
        if trainable { "-train" } else { "-fixed" },
        nd,
        h
    )
}

fn run_cell(cfg: &RunConfig, seeds: &[u64]) -> Result<Report> {
    let spec = cfg.network_spec();
    let mut per_seed = Vec::with_capacity(seeds.len());
    let train_ds = load_split(cfg, "train")?;
    let test_ds = load_split(cfg, "test")?;
    for &seed in seeds {
        let mut net = Network::init(&spec, &mut RngStream::new(seed))?;
        let tcfg = cfg.train_config(seed);
        let history = fit(
            &mut net,
            &train_ds,
            &test_ds,
            &tcfg,
            |m| println!("{}", m.to_json()),
            None,
        )?;
        let last = history.last().expect("at least one epoch");
        per_seed.push(SeedResult {
            seed,
            test_acc: last.test_acc,
            train_loss: last.train_loss,
            seconds: history.iter().map(|m| m.seconds).sum(),
            epochs: history,
        });
    }
    Ok(Report::from_seeds(
        cfg,
        cell_name(cfg.model, cfg.scheme, cfg.nd, cfg.h, cfg.trainable_asd),
        count_params(&spec),
        count_state_memory(&spec),
        per_seed,
    ))
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = args.overrides.resolve()?;
    let spec = cfg.network_spec();
    let train_ds = load_split(&cfg, "train")?;
    let test_ds = load_split(&cfg, "test")?;
    let mut net = Network::init(&spec, &mut RngStream::new(cfg.seed))?;
    let tcfg = cfg.train_config(cfg.seed);

    println!("{}", EpochMetrics::csv_header());
    let history = fit(
        &mut net,
        &train_ds,
        &test_ds,
        &tcfg,
        |m| println!("{}", m.to_csv()),
        None,
    )?;

    let out_dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    let ckpt = out_dir.join(format!("net-{}-seed{}.snnc", cfg.hash(), cfg.seed));
    checkpoint::save(&net, &ckpt)?;
    let last = history.last().expect("at least one epoch");
    let report = Report::from_seeds(
        &cfg,
        cell_name(cfg.model, cfg.scheme, cfg.nd, cfg.h, cfg.trainable_asd),
        count_params(&spec),
        count_state_memory(&spec),
        vec![SeedResult {
            seed: cfg.seed,
            test_acc: last.test_acc,
            train_loss: last.train_loss,
            seconds: history.iter().map(|m| m.seconds).sum(),
            epochs: history,
        }],
    );
    write_reports(&out_dir, "train", std::slice::from_ref(&report))?;
    eprintln!("checkpoint: {}", ckpt.display());
    eprintln!("{}", report.summary_line());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cfg = args.overrides.resolve()?;
    let net = checkpoint::load(&args.checkpoint)?;
    let test_ds = load_split(&cfg, "test")?;
    let (loss, acc) = evaluate(&net, &test_ds, cfg.batch_size)?;
    println!("test_loss = {loss:.6}");
    println!("test_acc = {acc:.6}");
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let base = args.overrides.resolve()?;
    let mut reports = Vec::new();
    for &model in &base.sweep_models {
        for &nd in &base.sweep_nd {
            for &scheme in &base.sweep_schemes {
                for &h in &base.sweep_h {
                    let mut cfg = base.clone();
                    cfg.model = model;
                    cfg.nd = nd;
                    cfg.scheme = scheme;
                    cfg.h = h;
                    let report = run_cell(&cfg, &base.seeds)?;
                    eprintln!("{}", report.summary_line());
                    reports.push(report);
                }
            }
        }
    }
    let out_dir = PathBuf::from(&base.out_dir);
    write_reports(&out_dir, "sweep", &reports)?;
    eprintln!(
        "sweep: {} cells x {} seeds -> {}/sweep.csv",
        reports.len(),
        base.seeds.len(),
        out_dir.display()
    );
    Ok(())
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Result<()> {
    use crate::network::NetworkSpec;
    use crate::neuron::DelayScheme;

    let model = NeuronModel::parse(&args.model)?;
    let kind = DelayKind::parse(&args.scheme)?;
    let spec = NetworkSpec::uniform(
        args.cin,
        args.cout,
        args.l,
        args.h,
        model,
        args.nd,
        DelayScheme {
            kind,
            trainable: !args.frozen_asd,
        },
        0.0,
    );
    let mut rng = RngStream::new(args.seed);
    let net = Network::init(&spec, &mut rng)?;
    let mut batch = Vec::with_capacity(args.batch);
    for _ in 0..args.batch {
        let mut m = crate::math::Matrix::zeros(args.t_len, args.cin);
        m.fill_uniform(&mut rng, 0.0, 1.5);
        batch.push(m);
    }
    let refs: Vec<&crate::math::Matrix> = batch.iter().collect();
    let labels: Vec<usize> = (0..args.batch).map(|i| i % args.cout).collect();
    let report = grad_check(&net, &refs, &labels, args.eps)?;
    for (name, err) in &report.per_slot {
        println!("{name}: rel_err {err:.3e}");
    }
    println!(
        "max relative error over {} parameters: {:.3e}",
        report.n_params, report.max_rel_err
    );
    if report.max_rel_err > args.tolerance {
        return Err(SnnError::InvalidArg(format!(
            "gradient check failed: {:.3e} > {:.0e}",
            report.max_rel_err, args.tolerance
        )));
    }
    println!("gradient check passed (tolerance {:.0e})", args.tolerance);
    Ok(())
}

fn cmd_params(args: &ParamsArgs) -> Result<()> {
    let cfg = args.overrides.resolve()?;
    let spec = cfg.network_spec();
    let count = count_params(&spec);
    println!("model = {}", cfg.model.name());
    println!(
        "h = {}, l = {}, c_in = {}, c_out = {}, n_d = {}, scheme = {}, trainable_asd = {}",
        cfg.h,
        cfg.l,
        cfg.c_in,
        cfg.c_out,
        cfg.nd,
        cfg.scheme.name(),
        cfg.trainable_asd
    );
    println!("feedforward = {}", count.feedforward);
    println!("recurrent = {}", count.recurrent);
    println!("neuron = {}", count.neuron);
    println!("norm = {}", count.norm);
    println!("delay = {}", count.delay);
    println!("total = {}", count.total());
    println!("state_memory = {}", count_state_memory(&spec));
    Ok(())
}

#[cfg(feature = "hdf5")]
fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    let summary =
        crate::data::shd::convert_container(&args.input, &args.output, args.c_raw, args.classes)?;
    println!(
        "converted {} samples ({} events, {} channels, {} classes) -> {}",
        summary.n_samples,
        summary.n_events,
        summary.c_raw,
        summary.n_classes,
        args.output.display()
    );
    Ok(())
}

#[cfg(not(feature = "hdf5"))]
fn cmd_convert(_args: &ConvertArgs) -> Result<()> {
    Err(SnnError::InvalidArg(
        "convert requires the 'hdf5' feature: rebuild with --features hdf5".into(),
    ))
}

fn cmd_gen_synth(args: &GenSynthArgs) -> Result<()> {
    let lags: Vec<usize> = args
        .lags
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| SnnError::Config(format!("bad lag '{s}'")))
        })
        .collect::<Result<_>>()?;
    let spec = SyntheticSpec {
        n_classes: args.classes,
        channels: args.channels,
        seq_len: args.seq_len,
        lags,
        noise_rate: args.noise,
        seed: args.seed,
    };
    std::fs::create_dir_all(&args.out)?;
    let train = gen_synthetic_events(&spec, args.train_samples)?;
    let test = gen_synthetic_events(
        &SyntheticSpec {
            seed: spec.seed.wrapping_add(1),
            ..spec.clone()
        },
        args.test_samples,
    )?;
    let train_path = args.out.join("synth_train.snne");
    let test_path = args.out.join("synth_test.snne");
    interchange::write_events(&train_path, &train)?;
    interchange::write_events(&test_path, &test)?;
    println!("wrote {} and {}", train_path.display(), test_path.display());
    println!("matching config keys:");
    println!(
        "  c_in = {}\n  c_out = {}\n  window_us = 1\n  bin_factor = 1\n  t_max = {}\n  expect_split = none\n  train_file = synth_train.snne\n  test_file = synth_test.snne\n  data_dir = {}",
        args.channels,
        args.classes,
        args.seq_len,
        args.out.display()
    );
    Ok(())
}

/// Parses `argv` and runs the selected command; returns the process exit
/// code. Usage errors exit with code 2 via clap.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Params(args) => cmd_params(args),
        Command::Convert(args) => cmd_convert(args),
        Command::GenSynth(args) => cmd_gen_synth(args),
    };
    match result {
        Ok(()) => 0,
        Err(e @ SnnError::Config(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
