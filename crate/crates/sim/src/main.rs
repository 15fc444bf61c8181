use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relay_core::channel::{ChannelModel, ChannelSpec};
use relay_core::codebook::{generate_binary, generate_dmc, verify as verify_book, Codebook};
use relay_core::exponents::{ExponentReport, SourceClass};
use relay_core::protocol::Transcript;
use relay_sim::experiment::{Prepared, Strategy};
use relay_sim::verify::{run_suite, SuiteConfig};
use relay_sim::{emit_svg, run_experiment, sweep_eps, sweep_p, Chart, ExperimentSpec};
use serde_json::json;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "relay-est", version, about = "Mean estimation over a noisy relay: exponents, sweeps, simulation and exact checks")]
struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic exponents of one instance, as JSON.
    Exponents {
        #[arg(long)]
        eps: f64,
        /// `bernoulli` or `subgaussian:<sigma2>`.
        #[arg(long, default_value = "bernoulli")]
        source: String,
        /// `bsc:<p>`, `noiseless:<size>`, JSON, or `@file.json`.
        #[arg(long, default_value = "bsc:0.1")]
        channel: String,
    },
    /// Exponent curves for a Bernoulli source over a BSC.
    Sweep {
        /// `p=<value>` (sweep eps) or `eps=<value>` (sweep p).
        #[arg(long)]
        fix: String,
        /// Number of grid points in (0, 1/2).
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Output files; `.svg` writes a chart, anything else CSV. Stdout when absent.
        #[arg(long)]
        out: Vec<PathBuf>,
    },
    /// Monte Carlo error probabilities from an experiment config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Directory for results.csv and results.json; CSV to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the JSON-lines transcript of trial 0 at the first n
        /// (main strategy only).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Generate or verify codebook files.
    Codebook {
        #[command(subcommand)]
        action: CodebookAction,
    },
    /// Run the exact oracle suite, or check a transcript against a config.
    Verify {
        #[arg(long, default_value_t = 6)]
        max_k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, requires = "config")]
        transcript: Option<PathBuf>,
        /// Experiment config describing the run that produced the transcript.
        #[arg(long, requires = "transcript")]
        config: Option<PathBuf>,
        /// Sample size of that run (default: the config's only n).
        #[arg(long)]
        n: Option<usize>,
        /// Print every check, not just failures.
        #[arg(long)]
        all: bool,
    },
}

#[derive(Subcommand)]
enum CodebookAction {
    Generate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Binary Hamming book with distance at least this fraction of k.
        #[arg(long, conflicts_with = "channel")]
        min_fraction: Option<f64>,
        /// Channel for a Bhattacharyya-distance book.
        #[arg(long)]
        channel: Option<String>,
        #[arg(long, default_value_t = 0.2)]
        slack: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        attempts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify {
        file: PathBuf,
        /// Needed for Bhattacharyya books.
        #[arg(long)]
        channel: Option<String>,
        /// Fail unless every pair is at least this far apart.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn core_failure(e: relay_core::Error) -> Failure {
    use relay_core::Error as E;
    match e {
        E::CodebookGeneration { .. } | E::EnumerationTooLarge { .. } => runtime(e),
        _ => config(e),
    }
}

fn parse_channel(s: &str) -> anyhow::Result<ChannelModel> {
    let s = s.trim();
    if let Some(path) = s.strip_prefix('@') {
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return Ok(ChannelSpec::from_json(&text)?);
    }
    if s.starts_with('{') {
        return Ok(ChannelSpec::from_json(s)?);
    }
    let (kind, value) = s.split_once(':').ok_or_else(|| anyhow!("channel {s:?}: expected bsc:<p>, noiseless:<size>, JSON or @file"))?;
    let spec = match kind {
        "bsc" => ChannelSpec::Bsc { p: value.parse()? },
        "noiseless" => ChannelSpec::Noiseless { size: value.parse()? },
        _ => bail!("unknown channel kind {kind:?}"),
    };
    Ok(spec.build()?)
}

fn parse_source(s: &str) -> anyhow::Result<SourceClass> {
    match s.split_once(':') {
        None if s == "bernoulli" => Ok(SourceClass::Bernoulli),
        Some(("subgaussian", v)) => {
            let sigma2: f64 = v.parse()?;
            if !(sigma2 > 0.0 && sigma2.is_finite()) {
                bail!("sigma2 must be positive");
            }
            Ok(SourceClass::SubGaussian { sigma2 })
        }
        _ => bail!("source {s:?}: expected bernoulli or subgaussian:<sigma2>"),
    }
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(runtime)
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Outcome {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(runtime(e)),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Outcome {
    emit(&(serde_json::to_string_pretty(value).map_err(runtime)? + "\n"))
}

fn exponents(eps: f64, source: &str, channel: &str) -> Outcome {
    let source = parse_source(source).map_err(config)?;
    let channel = parse_channel(channel).map_err(config)?;
    let report = ExponentReport::new(source, &channel, eps).map_err(core_failure)?;
    print_json(&report)
}

fn sweep(fix: &str, grid: usize, out: &[PathBuf]) -> Outcome {
    if grid == 0 {
        return Err(config(anyhow!("--grid must be positive")));
    }
    let (name, value) = fix.split_once('=').ok_or_else(|| config(anyhow!("--fix expects p=<value> or eps=<value>")))?;
    let value: f64 = value.parse().map_err(config)?;
    let points = relay_sim::default_grid(grid);
    let (table, title) = match name {
        "p" => (sweep_eps(value, &points), format!("Exponents at p = {value}")),
        "eps" => (sweep_p(value, &points), format!("Exponents at eps = {value}")),
        _ => return Err(config(anyhow!("--fix expects p=<value> or eps=<value>"))),
    };
    let table = table.map_err(core_failure)?;
    if out.is_empty() {
        emit(&table.to_csv())?;
    }
    for path in out {
        if path.extension().is_some_and(|e| e == "svg") {
            let svg = emit_svg(&Chart::from_sweep(&table, title.clone())).map_err(runtime)?;
            write(path, &svg)?;
        } else {
            write(path, &table.to_csv())?;
        }
    }
    Ok(())
}

fn read_spec(path: &Path) -> Result<ExperimentSpec, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(config)?;
    let spec = ExperimentSpec::from_json(&text).map_err(|e| config(anyhow!("{}: {e}", path.display())))?;
    spec.validate().map_err(|e| config(anyhow!("{}: {e}", path.display())))?;
    Ok(spec)
}

fn simulate(config_path: &Path, out: Option<&Path>, transcript: Option<&Path>) -> Outcome {
    let spec = read_spec(config_path)?;
    if let Some(path) = transcript {
        let n = spec.n_values[0];
        let prepared = Prepared::new(&spec, n).map_err(|e| if e.is_config() { config(e) } else { runtime(e) })?;
        let seed = relay_sim::trial_seed(spec.master_seed, spec.strategy.name(), n, 0);
        let t = prepared
            .transcript(seed)
            .ok_or_else(|| config(anyhow!("transcripts only exist for the main strategy")))?
            .map_err(runtime)?;
        write(path, &t.to_jsonl())?;
    }
    let table = run_experiment(&spec).map_err(|e| if e.is_config() { config(e) } else { runtime(e) })?;
    match out {
        None => emit(&table.to_csv())?,
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(runtime)?;
            write(&dir.join("results.csv"), &table.to_csv())?;
            let json = serde_json::to_string_pretty(&table).map_err(runtime)?;
            write(&dir.join("results.json"), &(json + "\n"))?;
        }
    }
    if let Some(fit) = &table.fit {
        eprintln!("fitted exponent {} over n = {:?}", relay_sim::fmt_sig(fit.slope), fit.used_n);
    } else if let Some(note) = &table.fit_note {
        eprintln!("no exponent fitted: {note}");
    }
    Ok(())
}

fn codebook(action: CodebookAction) -> Outcome {
    match action {
        CodebookAction::Generate { k, m, min_fraction, channel, slack, seed, attempts, out } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let book = match (min_fraction, channel) {
                (Some(f), None) => generate_binary(k, m, f, &mut rng, attempts),
                (None, Some(c)) => {
                    let channel = parse_channel(&c).map_err(config)?;
                    generate_dmc(k, m, &channel, &mut rng, slack, attempts)
                }
                _ => return Err(config(anyhow!("give exactly one of --min-fraction and --channel"))),
            }
            .map_err(core_failure)?;
            let text = book.to_text().map_err(runtime)?;
            match out {
                Some(path) => write(&path, &text)?,
                None => emit(&text)?,
            }
            eprintln!("min pairwise distance {}", relay_sim::fmt_sig(book.min_pairwise()));
            Ok(())
        }
        CodebookAction::Verify { file, channel, threshold } => {
            let channel = channel.map(|c| parse_channel(&c)).transpose().map_err(config)?;
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display())).map_err(config)?;
            let book = Codebook::from_text(&text, channel.as_ref()).map_err(config)?;
            let v = verify_book(&book, channel.as_ref()).map_err(config)?;
            let ok = threshold.is_none_or(|t| v.min_pairwise >= t);
            print_json(&json!({
                "k": book.k(),
                "m": book.m(),
                "metric": book.metric(),
                "verification": v,
                "threshold": threshold,
                "satisfied": ok,
            }))?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Verification(format!(
                    "minimum distance {} below threshold {}",
                    v.min_pairwise,
                    threshold.unwrap_or_default()
                )))
            }
        }
    }
}

fn verify_transcript(transcript: &Path, config_path: &Path, n: Option<usize>) -> Outcome {
    let spec = read_spec(config_path)?;
    if spec.strategy != Strategy::Main {
        return Err(config(anyhow!("transcripts only exist for the main strategy")));
    }
    let n = match (n, spec.n_values.as_slice()) {
        (Some(n), _) => n,
        (None, [n]) => *n,
        _ => return Err(config(anyhow!("config has several n values; pass --n"))),
    };
    let prepared = Prepared::new(&spec, n).map_err(|e| if e.is_config() { config(e) } else { runtime(e) })?;
    let Prepared::Main(runner) = prepared else { unreachable!("main strategy") };
    let text = fs::read_to_string(transcript).with_context(|| format!("reading {}", transcript.display())).map_err(config)?;
    let transcript = Transcript::from_jsonl(&text).map_err(config)?;
    let result = transcript.check(&runner);
    print_json(&json!({
        "records": transcript.records.len(),
        "expected": runner.config().usable_blocks(),
        "consistent": result.is_ok(),
        "error": result.as_ref().err().map(|e| e.to_string()),
    }))?;
    result.map_err(|e| Failure::Verification(e.to_string()))
}

fn verify(max_k: usize, seed: u64, all: bool) -> Outcome {
    if max_k > 10 {
        return Err(config(anyhow!("--max-k {max_k} is too large for exact enumeration (at most 10)")));
    }
    let report = run_suite(&SuiteConfig::up_to(max_k, seed)).map_err(core_failure)?;
    let shown: Vec<_> = report.reports.iter().filter(|r| all || !r.satisfied).collect();
    print_json(&json!({
        "config": report.config,
        "checks": report.checks,
        "failed": report.failed,
        "reports": shown,
    }))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} of {} checks failed", report.failed, report.checks)))
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(runtime)?;
    }
    match cli.command {
        Command::Exponents { eps, source, channel } => exponents(eps, &source, &channel),
        Command::Sweep { fix, grid, out } => sweep(&fix, grid, &out),
        Command::Simulate { config, out, transcript } => simulate(&config, out.as_deref(), transcript.as_deref()),
        Command::Codebook { action } => codebook(action),
        Command::Verify { max_k, seed, transcript, config, n, all } => match (transcript, config) {
            (Some(t), Some(c)) => verify_transcript(&t, &c, n),
            _ => verify(max_k, seed, all),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("error: invalid configuration: {e:#}"),
                Failure::Runtime(e) => eprintln!("error: {e:#}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
