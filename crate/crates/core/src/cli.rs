//! Experiment command line: configuration parsing, run orchestration and
//! CSV output.
//!
//! Flags can also be given in a configuration file of `key = value` lines,
//! where `key` is a flag name without the leading dashes and `value` holds
//! the flag's arguments separated by whitespace. Lines starting with `#` are
//! comments. Flags given on the command line override the file.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{
    generate_synthetic_binary, generate_synthetic_multiclass, parse_libsvm, train_test_split,
    Dataset, Seeds,
};
use crate::diagnostics::RunRecord;
use crate::error::{Error, Result};
use crate::objective::{BinaryLogistic, MulticlassLogistic, NoisyQuadratic, Objective, Ridge};
use crate::optim::{
    run, OlbfgsParams, OptimizerConfig, RunOptions, RunOutput, SgdParams, SqnParams, Stop,
};

/// Exact CSV header.
pub const CSV_HEADER: &str = "k,adp,work,train_fx,test_fx,test_acc,grad_error,hv_error,grad_norm";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Sgd,
    Sqn,
    Olbfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveKind {
    Binary,
    Multiclass,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Libsvm(PathBuf),
    Synthetic { n: usize, num_examples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    Binary,
    /// `classes` is required for synthetic data and taken from the file otherwise.
    Multiclass { classes: Option<usize> },
    Quadratic { n: usize, lo: f64, hi: f64, noise: f64 },
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub optimizer: OptimizerKind,
    /// `None` only for the quadratic objective.
    pub dataset: Option<DatasetSpec>,
    pub objective: ObjectiveSpec,
    pub sigma: f64,
    pub b: usize,
    pub b_h: usize,
    pub l: usize,
    pub m: usize,
    pub beta: f64,
    pub stop: Stop,
    pub seeds: Seeds,
    pub checkpoint_every: u64,
    /// Fraction of examples kept for training; the rest forms the test set.
    pub split_fraction: Option<f64>,
    pub monitor_errors: bool,
    /// Report work divided by the number of variables.
    pub scale_work: bool,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn optimizer_config(&self) -> OptimizerConfig {
        match self.optimizer {
            OptimizerKind::Sgd => OptimizerConfig::Sgd(SgdParams {
                b: self.b,
                beta: self.beta,
            }),
            OptimizerKind::Sqn => {
                OptimizerConfig::Sqn(SqnParams::new(self.b, self.b_h, self.l, self.m, self.beta))
            }
            OptimizerKind::Olbfgs => OptimizerConfig::Olbfgs(OlbfgsParams::new(self.b, self.m, self.beta)),
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            stop: self.stop,
            checkpoint_every: self.checkpoint_every,
            monitor_errors: self.monitor_errors,
            seeds: self.seeds,
            w0: None,
        }
    }

    /// Training-set size when it is known without loading a file.
    pub fn known_num_examples(&self) -> Option<usize> {
        let total = match (&self.dataset, &self.objective) {
            (_, ObjectiveSpec::Quadratic { .. }) => crate::objective::DEFAULT_VIRTUAL_EXAMPLES,
            (Some(DatasetSpec::Synthetic { num_examples, .. }), _) => *num_examples,
            _ => return None,
        };
        Some(match self.split_fraction {
            Some(f) => (f * total as f64).ceil() as usize,
            None => total,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "sqn", version, about = "Stochastic quasi-Newton experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one optimizer and write its CSV trace.
    Run(RunArgs),
    /// Run two configuration files side by side on the same data.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct CompareArgs {
    config_a: PathBuf,
    config_b: PathBuf,
    /// CSV path for the first run; defaults to its `output` key or `compare_a.csv`.
    #[arg(long)]
    out_a: Option<PathBuf>,
    #[arg(long)]
    out_b: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, allow_negative_numbers = true)]
struct RunArgs {
    /// key = value file with default flag values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "sqn")]
    opt: OptimizerKind,
    /// LIBSVM-format dataset.
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Synthetic data with n features and N examples.
    #[arg(long, num_args = 2, value_names = ["n", "N"])]
    synthetic: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    objective: Option<ObjectiveKind>,
    /// Number of classes for synthetic multiclass data.
    #[arg(long)]
    classes: Option<usize>,
    /// Quadratic with n curvatures spaced on [lo, hi] and per-example noise level.
    #[arg(long, num_args = 4, value_names = ["n", "lo", "hi", "noise"])]
    quadratic: Option<Vec<f64>>,
    /// Ridge weight.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 50)]
    b: usize,
    #[arg(long = "bH", default_value_t = 1000)]
    b_h: i64,
    #[arg(long = "L", default_value_t = 20)]
    l: i64,
    #[arg(long = "M", default_value_t = 5)]
    m: i64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, conflicts_with_all = ["max_iters", "max_adp"])]
    epochs: Option<u64>,
    #[arg(long, conflicts_with = "max_adp")]
    max_iters: Option<u64>,
    /// Stop once this many data points have been accessed.
    #[arg(long)]
    max_adp: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed_data: u64,
    #[arg(long, default_value_t = 2)]
    seed_grad: u64,
    #[arg(long, default_value_t = 3)]
    seed_hess: u64,
    #[arg(long, default_value_t = 20)]
    checkpoint_every: u64,
    /// Training fraction of a seeded train/test split.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
    monitor_errors: bool,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = clap::ArgAction::Set)]
    scale_work: bool,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "sqn run", args_override_self = true, allow_negative_numbers = true)]
struct RunOnly {
    #[command(flatten)]
    args: RunArgs,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_run_args<I, S>(tokens: I) -> Result<RunArgs>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv = std::iter::once("sqn-run".to_string()).chain(tokens.into_iter().map(Into::into));
    RunOnly::try_parse_from(argv)
        .map(|r| r.args)
        .map_err(|e| config_error(e.render().to_string().trim_end()))
}

/// Turns `key = value` lines into flag tokens.
pub fn parse_config_file_str(text: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            });
        };
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("invalid key {key:?}"),
            });
        }
        if key == "config" {
            return Err(Error::Parse {
                line: i + 1,
                message: "configuration files cannot include other files".into(),
            });
        }
        tokens.push(format!("--{key}"));
        tokens.extend(value.split_whitespace().map(str::to_string));
    }
    Ok(tokens)
}

/// Parses a configuration file's text.
pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    resolve(parse_run_args(parse_config_file_str(text)?)?)
}

pub fn parse_config_file(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Parses `run` flags, merging a `--config` file underneath them.
pub fn parse_config<S: AsRef<str>>(argv: &[S]) -> Result<RunConfig> {
    let argv: Vec<String> = argv.iter().map(|s| s.as_ref().to_string()).collect();
    let first = parse_run_args(argv.clone())?;
    let Some(path) = first.config else {
        return resolve(first);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let mut tokens = parse_config_file_str(&text)?;
    // The stopping rules are mutually exclusive, so one given on the command
    // line replaces whichever rule the file sets.
    if first.epochs.is_some() || first.max_iters.is_some() || first.max_adp.is_some() {
        tokens = drop_flags(tokens, &["--epochs", "--max-iters", "--max-adp"]);
    }
    tokens.extend(argv);
    resolve(parse_run_args(tokens)?)
}

/// Removes each listed flag and the values that follow it.
fn drop_flags(tokens: Vec<String>, flags: &[&str]) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut skipping = false;
    for t in tokens {
        if t.starts_with("--") {
            skipping = flags.contains(&t.as_str());
        }
        if !skipping {
            out.push(t);
        }
    }
    out
}

fn resolve(a: RunArgs) -> Result<RunConfig> {
    let objective_kind = match (a.objective, &a.quadratic) {
        (Some(k), _) => k,
        (None, Some(_)) => ObjectiveKind::Quadratic,
        (None, None) => ObjectiveKind::Binary,
    };
    let dataset = match (&a.data, &a.synthetic) {
        (Some(p), _) => Some(DatasetSpec::Libsvm(p.clone())),
        (None, Some(v)) => Some(DatasetSpec::Synthetic {
            n: v[0],
            num_examples: v[1],
        }),
        (None, None) => None,
    };
    let objective = match objective_kind {
        ObjectiveKind::Quadratic => {
            let q = a
                .quadratic
                .as_ref()
                .ok_or_else(|| config_error("quadratic objective needs --quadratic n lo hi noise"))?;
            if dataset.is_some() {
                return Err(config_error("the quadratic objective takes no dataset"));
            }
            if q[0] < 1.0 || q[0].fract() != 0.0 {
                return Err(config_error("quadratic dimension must be a positive integer"));
            }
            if a.split.is_some() {
                return Err(config_error("--split does not apply to the quadratic objective"));
            }
            ObjectiveSpec::Quadratic {
                n: q[0] as usize,
                lo: q[1],
                hi: q[2],
                noise: q[3],
            }
        }
        _ if a.quadratic.is_some() => {
            return Err(config_error("--quadratic requires the quadratic objective"));
        }
        _ if dataset.is_none() => {
            return Err(config_error("missing dataset: give --data PATH or --synthetic n N"));
        }
        ObjectiveKind::Binary => ObjectiveSpec::Binary,
        ObjectiveKind::Multiclass => ObjectiveSpec::Multiclass { classes: a.classes },
    };
    if a.classes.is_some() && !matches!(objective, ObjectiveSpec::Multiclass { .. }) {
        return Err(config_error("--classes requires the multiclass objective"));
    }
    match (&objective, &dataset) {
        (ObjectiveSpec::Multiclass { classes: None }, Some(DatasetSpec::Synthetic { .. })) => {
            return Err(config_error("synthetic multiclass data needs --classes"));
        }
        (ObjectiveSpec::Multiclass { classes: Some(_) }, Some(DatasetSpec::Libsvm(_))) => {
            return Err(config_error("--classes applies to synthetic data only"));
        }
        _ => {}
    }

    if a.m < 0 {
        return Err(config_error(format!("memory M must be ≥ 0, got {}", a.m)));
    }
    if a.optimizer_is(OptimizerKind::Sqn) {
        if a.l < 1 {
            return Err(config_error(format!("update spacing L must be ≥ 1, got {}", a.l)));
        }
        if a.b_h < 1 {
            return Err(config_error(format!("Hessian batch size bH must be ≥ 1, got {}", a.b_h)));
        }
    }
    if a.optimizer_is(OptimizerKind::Olbfgs) && a.m < 1 {
        return Err(config_error("oLBFGS needs memory M ≥ 1"));
    }
    if let Some(f) = a.split {
        if !(f > 0.0 && f < 1.0) {
            return Err(config_error(format!("--split must lie in (0, 1), got {f}")));
        }
    }
    let stop = match (a.epochs, a.max_iters, a.max_adp) {
        (_, Some(k), _) => Stop::Iterations(k),
        (_, _, Some(adp)) => Stop::AccessedPoints(adp),
        (Some(e), _, _) => Stop::Epochs(e),
        (None, None, None) => Stop::Epochs(4),
    };

    let cfg = RunConfig {
        optimizer: a.opt,
        dataset,
        objective,
        sigma: a.sigma,
        b: a.b,
        b_h: a.b_h.max(0) as usize,
        l: a.l.max(0) as usize,
        m: a.m as usize,
        beta: a.beta,
        stop,
        seeds: Seeds {
            data: a.seed_data,
            grad: a.seed_grad,
            hess: a.seed_hess,
        },
        checkpoint_every: a.checkpoint_every,
        split_fraction: a.split,
        monitor_errors: a.monitor_errors,
        scale_work: a.scale_work,
        output: a.output,
    };
    if let Some(n) = cfg.known_num_examples() {
        cfg.optimizer_config()
            .validate(n)
            .map_err(|e| config_error(e.to_string()))?;
    }
    Ok(cfg)
}

impl RunArgs {
    fn optimizer_is(&self, kind: OptimizerKind) -> bool {
        self.opt == kind
    }
}

/// Training and optional test oracles built from a configuration.
pub struct Experiment {
    pub train: Box<dyn Objective>,
    pub test: Option<Box<dyn Objective>>,
}

impl Experiment {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        if let ObjectiveSpec::Quadratic { n, lo, hi, noise } = cfg.objective {
            let q = NoisyQuadratic::linspace(n, lo, hi, noise, cfg.seeds.data)?;
            return Ok(Experiment {
                train: ridge(q, cfg.sigma)?,
                test: None,
            });
        }
        let data = match cfg.dataset.as_ref().expect("validated configs carry a dataset") {
            DatasetSpec::Libsvm(path) => {
                let file = File::open(path)
                    .map_err(|e| config_error(format!("cannot open {}: {e}", path.display())))?;
                parse_libsvm(BufReader::new(file), None)?
            }
            DatasetSpec::Synthetic { n, num_examples } => match cfg.objective {
                ObjectiveSpec::Multiclass { classes: Some(c) } => {
                    generate_synthetic_multiclass(*n, c, *num_examples, cfg.seeds.data)?.0
                }
                _ => generate_synthetic_binary(*n, *num_examples, cfg.seeds.data)?.0,
            },
        };
        let (train, test) = match cfg.split_fraction {
            Some(f) => {
                let (tr, te) = train_test_split(&data, f, cfg.seeds.data)?;
                (tr, Some(te))
            }
            None => (data, None),
        };
        Ok(Experiment {
            train: logistic_oracle(train, &cfg.objective, cfg.sigma)?,
            test: test
                .map(|t| logistic_oracle(t, &cfg.objective, cfg.sigma))
                .transpose()?,
        })
    }
}

fn ridge<O: Objective + 'static>(inner: O, sigma: f64) -> Result<Box<dyn Objective>> {
    Ok(if sigma == 0.0 {
        Box::new(inner)
    } else {
        Box::new(Ridge::new(inner, sigma)?)
    })
}

fn logistic_oracle(data: Dataset, objective: &ObjectiveSpec, sigma: f64) -> Result<Box<dyn Objective>> {
    let data = Arc::new(data);
    match objective {
        ObjectiveSpec::Multiclass { .. } => ridge(MulticlassLogistic::new(data)?, sigma),
        _ => ridge(BinaryLogistic::new(data)?, sigma),
    }
}

/// Builds the experiment and runs it.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let exp = Experiment::build(cfg)?;
    run(
        &cfg.optimizer_config(),
        exp.train.as_ref(),
        exp.test.as_deref(),
        &cfg.run_options(),
    )
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Writes the CSV header and one row per record; `work` is multiplied by
/// `work_scale`.
pub fn write_csv<W: Write>(records: &[RunRecord], work_scale: f64, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            r.adp,
            fmt_real(r.work * work_scale),
            fmt_real(r.train_fx),
            fmt_opt(r.test_fx),
            fmt_opt(r.test_accuracy),
            fmt_opt(r.grad_error),
            fmt_opt(r.hv_error),
            fmt_opt(r.grad_norm),
        )?;
    }
    out.flush()
}

pub fn emit_csv(records: &[RunRecord], work_scale: f64, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(config_error("no records to write"));
    }
    let file = File::create(path)
        .map_err(|e| config_error(format!("cannot write {}: {e}", path.display())))?;
    write_csv(records, work_scale, BufWriter::new(file))?;
    Ok(())
}

fn work_scale(cfg: &RunConfig, dim: usize) -> f64 {
    if cfg.scale_work {
        1.0 / dim as f64
    } else {
        1.0
    }
}

/// Runs `cfg` and writes its CSV to `cfg.output` or `fallback`.
fn run_to_csv(cfg: &RunConfig, fallback: Option<&Path>) -> Result<RunOutput> {
    let out = execute(cfg)?;
    let scale = work_scale(cfg, out.w.len());
    match cfg.output.as_deref().or(fallback) {
        Some(path) => emit_csv(&out.records, scale, path)?,
        None => write_csv(&out.records, scale, io::stdout().lock())?,
    }
    Ok(out)
}

/// One-line summary of a finished run.
pub fn summary_line(label: &str, cfg: &RunConfig, out: &RunOutput) -> String {
    let last = out.records.last().expect("runs record their start");
    format!(
        "{label}: opt={:?} k={} adp={} train_fx={}",
        cfg.optimizer,
        last.k,
        last.adp,
        fmt_real(last.train_fx)
    )
    .to_lowercase()
}

/// Runs two configurations on separate threads and writes both CSVs.
pub fn compare(a: &RunConfig, b: &RunConfig, out_a: &Path, out_b: &Path) -> Result<[String; 2]> {
    if a.seeds.data != b.seeds.data {
        return Err(config_error(format!(
            "compared runs must share the data seed ({} vs {})",
            a.seeds.data, b.seeds.data
        )));
    }
    if a.dataset != b.dataset || a.objective != b.objective || a.split_fraction != b.split_fraction {
        return Err(config_error("compared runs must use the same dataset and objective"));
    }
    let (ra, rb) = thread::scope(|s| {
        let ha = s.spawn(|| run_to_csv(a, Some(out_a)));
        let hb = s.spawn(|| run_to_csv(b, Some(out_b)));
        (
            ha.join().expect("run thread panicked"),
            hb.join().expect("run thread panicked"),
        )
    });
    Ok([summary_line("a", a, &ra?), summary_line("b", b, &rb?)])
}

/// Entry point behind the `sqn` binary; returns the process exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run(_) => parse_config(&args[2..]).and_then(|cfg| {
            let out = run_to_csv(&cfg, None)?;
            eprintln!("{}", summary_line("run", &cfg, &out));
            Ok(())
        }),
        Command::Compare(c) => (|| {
            let a = parse_config_file(&c.config_a)?;
            let b = parse_config_file(&c.config_b)?;
            let pa = c.out_a.or(a.output.clone()).unwrap_or_else(|| "compare_a.csv".into());
            let pb = c.out_b.or(b.output.clone()).unwrap_or_else(|| "compare_b.csv".into());
            for line in compare(&a, &b, &pa, &pb)? {
                println!("{line}");
            }
            Ok(())
        })(),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
