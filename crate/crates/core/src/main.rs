use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use specious::miner::{mine_top_k, MinerConfig, PolarityMode};
use specious::report::{read_rules, write_report, write_rules, RunSummary, Timings};
use specious::specdetect::{detect_rules, DetectConfig, EquivalenceForm};
use specious::synthgen::{plant_equivalent, plant_simpson, GroundTruth, PlantSpec, SynthError};
use specious::Dataset;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_UNREALIZABLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "specious",
    version,
    about = "Mine top-K dependency rules and flag the specious ones"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine the top-K non-redundant dependency rules into a rule file.
    Mine(MineArgs),
    /// Judge a rule file (or freshly mined rules) for speciousness.
    Detect(DetectArgs),
    /// Generate a synthetic dataset with planted structure.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Fimi,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolarityArg {
    Both,
    Positive,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "fimi")]
    format: Format,
}

#[derive(Args)]
struct MiningArgs {
    #[arg(long, default_value_t = 100)]
    top_k: usize,
    #[arg(long)]
    max_antecedent: Option<usize>,
    /// Comma-separated attribute names allowed as consequents.
    #[arg(long, value_delimiter = ',')]
    consequents: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "both")]
    polarity: PolarityArg,
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    mining: MiningArgs,
    /// Rule file to write (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Rule file from `mine`; rules are mined on the fly when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[command(flatten)]
    mining: MiningArgs,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Verdict report to write (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Run summary (JSON).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Simpson,
    Equiv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquivMode {
    Copy,
    Complement,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "simpson")]
    kind: SynthKind,
    /// Dataset file to write.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "fimi")]
    format: Format,
    /// Ground-truth sidecar (default: `<output>.truth.json`).
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    n: u64,
    #[arg(long, default_value_t = 0.5)]
    p_x: f64,
    #[arg(long, default_value_t = 0.75)]
    q_given_x: f64,
    #[arg(long, default_value_t = 0.25)]
    q_given_not_x: f64,
    #[arg(long, default_value_t = 0.75)]
    c_given_x: f64,
    #[arg(long, default_value_t = 0.25)]
    c_given_not_x: f64,
    #[arg(long, default_value_t = -0.00625, allow_hyphen_values = true)]
    delta1: f64,
    #[arg(long, default_value_t = -0.00625, allow_hyphen_values = true)]
    delta2: f64,
    #[arg(long, default_value_t = 10)]
    noise: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Source dataset for `--kind equiv`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fimi")]
    input_format: Format,
    /// Attribute to duplicate or complement for `--kind equiv`.
    #[arg(long)]
    source: Option<String>,
    #[arg(long, value_enum, default_value = "copy")]
    mode: EquivMode,
}

/// A failure mapped to an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

fn load(input: &InputArgs) -> Result<Dataset, Failure> {
    load_path(&input.input, input.format)
}

fn load_path(path: &Path, format: Format) -> Result<Dataset, Failure> {
    let d = match format {
        Format::Fimi => Dataset::load_fimi(path),
        Format::Csv => Dataset::load_csv(path),
    };
    d.map_err(|e| Failure::data(e.to_string()))
}

fn miner_config(d: &Dataset, m: &MiningArgs) -> Result<MinerConfig, Failure> {
    let consequents = match &m.consequents {
        None => None,
        Some(names) => Some(
            names
                .iter()
                .map(|s| d.attr(s.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::data(e.to_string()))?,
        ),
    };
    let cfg = MinerConfig {
        k: m.top_k,
        max_antecedent: m.max_antecedent,
        consequents,
        polarity_mode: match m.polarity {
            PolarityArg::Both => PolarityMode::Both,
            PolarityArg::Positive => PolarityMode::Positive,
        },
        prune: true,
        parallel: true,
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_failure(e: io::Error) -> Failure {
    Failure::data(e.to_string())
}

fn cmd_mine(args: &MineArgs) -> Result<(), Failure> {
    let d = load(&args.input)?;
    let cfg = miner_config(&d, &args.mining)?;
    let top = mine_top_k(&d, &cfg).map_err(|e| Failure::data(e.to_string()))?;
    let out = open_output(args.output.as_deref())?;
    write_rules(out, &d, &top.rules).map_err(io_failure)
}

fn cmd_detect(args: &DetectArgs, threads: Option<usize>) -> Result<(), Failure> {
    let dcfg = DetectConfig {
        theta: args.theta,
        alpha: args.alpha,
        parallel: true,
    };
    dcfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let t0 = Instant::now();
    let d = load(&args.input)?;
    let load_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mcfg = miner_config(&d, &args.mining)?;
    let rules = match &args.rules {
        Some(path) => {
            let f = File::open(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            read_rules(BufReader::new(f), &d).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?
        }
        None => mine_top_k(&d, &mcfg).map_err(|e| Failure::data(e.to_string()))?.rules,
    };
    let mine_seconds = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let det = detect_rules(&rules, &d, &dcfg).map_err(|e| Failure::data(e.to_string()))?;
    let detect_seconds = t2.elapsed().as_secs_f64();

    let out = open_output(args.output.as_deref())?;
    write_report(out, &d, &det).map_err(io_failure)?;

    if let Some(path) = &args.summary {
        let mut config = BTreeMap::new();
        config.insert("input".into(), json!(args.input.input.display().to_string()));
        config.insert(
            "rules_file".into(),
            json!(args.rules.as_ref().map(|p| p.display().to_string())),
        );
        config.insert("top_k".into(), json!(args.mining.top_k));
        config.insert("max_antecedent".into(), json!(args.mining.max_antecedent));
        config.insert("consequents".into(), json!(args.mining.consequents));
        config.insert("polarity".into(), json!(mcfg.polarity_mode));
        config.insert("theta".into(), json!(args.theta));
        config.insert("alpha".into(), json!(args.alpha));
        config.insert("threads".into(), json!(threads));
        let timings = Timings {
            load_seconds,
            mine_seconds,
            detect_seconds,
        };
        let summary = RunSummary::build(&d, &det, args.alpha, config, timings);
        let mut w = open_output(Some(path))?;
        serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| Failure::data(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(io_failure)?;
    }
    Ok(())
}

fn write_dataset(d: &Dataset, path: &Path, format: Format) -> Result<(), Failure> {
    let f = File::create(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let w = BufWriter::new(f);
    match format {
        Format::Fimi => d.write_fimi(w),
        Format::Csv => d.write_csv(w),
    }
    .map_err(io_failure)
}

fn synth_failure(e: SynthError) -> Failure {
    match e {
        SynthError::InvalidSpec(_) | SynthError::Unrealizable(_) => Failure {
            code: EXIT_UNREALIZABLE,
            message: e.to_string(),
        },
        other => Failure::data(other.to_string()),
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let (dataset, truth): (Dataset, GroundTruth) = match args.kind {
        SynthKind::Simpson => {
            let spec = PlantSpec {
                n: args.n,
                p_x: args.p_x,
                q_given_x: args.q_given_x,
                q_given_not_x: args.q_given_not_x,
                c_given_x: args.c_given_x,
                c_given_not_x: args.c_given_not_x,
                delta1: args.delta1,
                delta2: args.delta2,
                noise_attrs: args.noise,
                noise_density: args.density,
                seed: args.seed,
            };
            let p = plant_simpson(&spec).map_err(synth_failure)?;
            (p.dataset, p.truth)
        }
        SynthKind::Equiv => {
            let input = args
                .input
                .as_deref()
                .ok_or_else(|| Failure::usage("--kind equiv needs --input"))?;
            let source = args
                .source
                .as_deref()
                .ok_or_else(|| Failure::usage("--kind equiv needs --source"))?;
            let d = load_path(input, args.input_format)?;
            let form = match args.mode {
                EquivMode::Copy => EquivalenceForm::Direct,
                EquivMode::Complement => EquivalenceForm::Complement,
            };
            plant_equivalent(&d, source, form).map_err(synth_failure)?
        }
    };
    write_dataset(&dataset, &args.output, args.format)?;
    let truth_path = args.truth.clone().unwrap_or_else(|| {
        let mut s = args.output.clone().into_os_string();
        s.push(".truth.json");
        PathBuf::from(s)
    });
    let mut w = open_output(Some(&truth_path))?;
    serde_json::to_writer_pretty(&mut w, &truth).map_err(|e| Failure::data(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_failure)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Failure::usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Mine(a) => cmd_mine(a),
        Command::Detect(a) => cmd_detect(a, cli.threads),
        Command::Synth(a) => cmd_synth(a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("specious: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
