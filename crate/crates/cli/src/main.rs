mod input;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use binmedian::bench::{self, BenchReport, BenchScenario};
use binmedian::{binapprox_with, binmedian_with, median_select, select_kth, sort_median, BinParams, UpdatableMedian};

use input::Format;

#[derive(Parser)]
#[command(name = "binmedian", version, about = "Medians by repeated binning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Median of the input values.
    Median {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = MedianMode::ExactBin)]
        mode: MedianMode,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// k-th smallest input value (1-based).
    Select {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        k: usize,
    },
    /// Median after each batch is added to a base dataset, reusing cached
    /// bin counts.
    UpdateSim {
        #[command(flatten)]
        input: InputArgs,
        /// Files of values added one batch at a time, in the input format.
        batches: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = UpdateMode::Exact)]
        mode: UpdateMode,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run built-in or configured benchmark scenarios.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input file, or `-` for standard input.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = BinParams::DEFAULT_BINS)]
    bins: usize,
    /// Survivor count at which binning stops and the rest is sorted.
    #[arg(long, default_value_t = BinParams::DEFAULT_CUTOFF)]
    cutoff: usize,
}

impl ParamArgs {
    fn params(&self) -> Result<BinParams> {
        Ok(BinParams::new(self.bins, self.cutoff)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MedianMode {
    ExactBin,
    ExactSelect,
    Approx,
    Sort,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UpdateMode {
    Exact,
    Approx,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in scenario name, or a TOML file of scenarios.
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dataset size (base size for update scenarios).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Medians per timed block.
    #[arg(long)]
    block: Option<usize>,
    /// Write key=value records here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check correctness only; no timings.
    #[arg(long)]
    verify_only: bool,
    /// Verify scenarios on separate threads.
    #[arg(long, requires = "verify_only")]
    parallel: bool,
    /// List built-in scenario names.
    #[arg(long)]
    list: bool,
}

#[derive(Deserialize)]
struct BenchConfig {
    scenario: Vec<BenchScenario>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Median { input, mode, params } => {
            let params = params.params()?;
            let mut values = input::read_path(&input.input, input.format)?;
            match mode {
                MedianMode::ExactBin => writeln!(out, "{}", binmedian_with(&values, params)?)?,
                MedianMode::ExactSelect => writeln!(out, "{}", median_select(&mut values)?)?,
                MedianMode::Sort => writeln!(out, "{}", sort_median(&mut values)?)?,
                MedianMode::Approx => {
                    let a = binapprox_with(&values, params.bins)?;
                    writeln!(out, "{}", a.value)?;
                    writeln!(out, "bound {}", a.bound)?;
                }
            }
        }
        Command::Select { input, k } => {
            let mut values = input::read_path(&input.input, input.format)?;
            writeln!(out, "{}", select_kth(&mut values, k)?)?;
        }
        Command::UpdateSim {
            input,
            batches,
            mode,
            params,
        } => update_sim(&mut out, &input, &batches, mode, params.params()?)?,
        Command::Bench(args) => run_bench(&mut out, args)?,
    }
    Ok(())
}

fn update_sim(out: &mut impl Write, input: &InputArgs, batches: &[PathBuf], mode: UpdateMode, params: BinParams) -> Result<()> {
    if batches.is_empty() {
        bail!("no batch files given");
    }
    let base = input::read_path(&input.input, input.format)?;
    let mut um = UpdatableMedian::with_params(&base, params)?;
    for (i, path) in batches.iter().enumerate() {
        let batch = input::read_path(path, input.format)?;
        um.add(&batch).with_context(|| format!("adding {}", path.display()))?;
        match mode {
            UpdateMode::Exact => {
                let m = um.query_exact()?;
                writeln!(out, "step={} n={} median={m} rebuilds={}", i + 1, um.len(), um.rebuild_count())?;
            }
            UpdateMode::Approx => {
                let a = um.query_approx()?;
                writeln!(
                    out,
                    "step={} n={} median={} bound={} rebuilds={}",
                    i + 1,
                    um.len(),
                    a.value,
                    a.bound,
                    um.rebuild_count()
                )?;
            }
        }
    }
    writeln!(out, "rebuild_count={}", um.rebuild_count())?;
    Ok(())
}

fn load_scenarios(name: &str, n: Option<usize>) -> Result<Vec<BenchScenario>> {
    let path = Path::new(name);
    if name.ends_with(".toml") || path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {name}"))?;
        let mut cfg: BenchConfig = toml::from_str(&text).with_context(|| format!("invalid config {name}"))?;
        if let Some(n) = n {
            cfg.scenario.iter_mut().for_each(|s| s.base_size = n);
        }
        return Ok(cfg.scenario);
    }
    Ok(bench::builtin(name, n)?)
}

fn run_bench(out: &mut impl Write, args: BenchArgs) -> Result<()> {
    if args.list {
        for name in bench::builtin_names() {
            writeln!(out, "{name}")?;
        }
        return Ok(());
    }
    let Some(name) = args.scenario.as_deref() else {
        bail!("no scenario given (use --list to see built-in names)");
    };
    let mut scenarios = load_scenarios(name, args.n)?;
    for s in &mut scenarios {
        if let Some(seed) = args.seed {
            s.seed = seed;
        }
        if let Some(r) = args.reps {
            s.repetitions = r;
        }
        if let Some(b) = args.block {
            s.block_size = b;
        }
        s.validate()?;
    }

    if args.verify_only {
        let mut text = String::new();
        for v in bench::verify(&scenarios, args.parallel)? {
            text += &format!("scenario={} checked={} checksum={}\n", v.scenario, v.checked, v.data_checksum);
        }
        write!(out, "{text}")?;
        if let Some(path) = &args.out {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
        }
        return Ok(());
    }

    let mut reports: Vec<BenchReport> = Vec::new();
    for s in &scenarios {
        let r = bench::run(s)?;
        write!(out, "{}", bench::render_table(std::slice::from_ref(&r)))?;
        out.flush()?;
        reports.push(r);
    }
    if let Some(path) = &args.out {
        fs::write(path, bench::render_records(&reports)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
