//! Command-line front end: fixed-population sampling, stream sampling
//! over a line protocol, exact design enumeration, and replication
//! studies. Every run report embeds the tool version, the seed and the
//! window policy, so runs are reproducible byte for byte given the same
//! input, seed and flags.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use osod_core::{
    enumerate_design, ht_estimate, inclusion_from_auxiliary, joint_inclusion, pivotal_sample,
    sample_population, systematic_sample, DesignSource, OsodError, ProbabilityVector,
    StreamSampler, Tolerance, WindowPolicy, WindowSearch,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit with 2 on malformed input, 3 when a run is infeasible.
const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "osod",
    version,
    about = "One-step one-decision unequal-probability sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample from a fixed population file
    Sample(SampleArgs),
    /// Decide units one by one from a `<id>,<probability>` line stream
    Stream(StreamArgs),
    /// Exactly enumerate the sampling design of a small population
    Enumerate(EnumerateArgs),
    /// Replicate a sampler and summarize the expansion estimator
    Simulate(SimulateArgs),
    /// Derive capped proportional inclusion probabilities from sizes
    PiFromAux(PiFromAuxArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Osod,
    Systematic,
    Pivotal,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Osod => "osod",
            Method::Systematic => "systematic",
            Method::Pivotal => "pivotal",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// `smallest`, `integer`, `fixed:<m>` or `full`.
fn parse_window(value: &str) -> Result<WindowSearch, String> {
    match value {
        "smallest" => Ok(WindowSearch::SmallestAdmissible),
        "integer" => Ok(WindowSearch::IntegerSumFirst),
        "full" => Ok(WindowSearch::FullBuffer),
        other => match other.strip_prefix("fixed:") {
            Some(m) => m
                .parse::<usize>()
                .ok()
                .filter(|&m| m >= 1)
                .map(WindowSearch::FixedSize)
                .ok_or_else(|| format!("invalid fixed window size in '{other}'")),
            None => Err(format!(
                "unknown window policy '{other}' (expected smallest|integer|fixed:<m>|full)"
            )),
        },
    }
}

fn window_name(search: WindowSearch) -> String {
    match search {
        WindowSearch::SmallestAdmissible => "smallest".into(),
        WindowSearch::IntegerSumFirst => "integer".into(),
        WindowSearch::FixedSize(m) => format!("fixed:{m}"),
        WindowSearch::FullBuffer => "full".into(),
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Input file, or `-` for standard input
    #[arg(long, default_value = "-")]
    input: String,
    /// Seed (falls back to OSOD_SEED, then to a recorded random value)
    #[arg(long)]
    seed: Option<u64>,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target sample size when deriving probabilities from an `x` column
    #[arg(long)]
    n: Option<f64>,
    /// Close a fractional-mass population with a phantom unit instead of
    /// failing when the run cannot finish
    #[arg(long)]
    phantom: bool,
}

#[derive(Args)]
struct StreamArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Window policy: smallest|integer|fixed:<m>|full
    #[arg(long, value_parser = parse_window, default_value = "smallest")]
    window: WindowSearch,
    /// Hard cap on undecided units held
    #[arg(long, default_value_t = 1024)]
    max_buffer: usize,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target sample size when deriving probabilities from an `x` column
    #[arg(long)]
    n: Option<f64>,
    /// Window policy: smallest|integer|fixed:<m>|full
    #[arg(long, value_parser = parse_window, default_value = "smallest")]
    window: WindowSearch,
    /// Estimate the design from this many replications instead of exact
    /// enumeration
    #[arg(long)]
    replications: Option<u64>,
    /// Write the joint inclusion matrix to this CSV file
    #[arg(long)]
    joint: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target sample size when deriving probabilities from an `x` column
    #[arg(long)]
    n: Option<f64>,
    /// Sampling method to replicate
    #[arg(long, value_enum, default_value = "osod")]
    method: Method,
    /// Window policy for the osod method
    #[arg(long, value_parser = parse_window, default_value = "smallest")]
    window: WindowSearch,
    /// Number of replications
    #[arg(long, default_value_t = 10_000)]
    replications: u64,
    /// Write per-unit empirical inclusion frequencies to this CSV file
    #[arg(long)]
    freq_out: Option<String>,
}

#[derive(Args)]
struct PiFromAuxArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target sample size (sum of the derived probabilities)
    #[arg(long)]
    n: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Stream(args) => cmd_stream(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::PiFromAux(args) => cmd_pi_from_aux(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.code == 0 => ExitCode::SUCCESS, // closed pipe
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INFEASIBLE,
            message: message.into(),
        }
    }
}

impl From<io::Error> for CmdError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            // The consumer closed the pipe; stop quietly like any
            // well-behaved filter.
            return CmdError {
                code: 0,
                message: String::new(),
            };
        }
        CmdError::input(format!("i/o failure: {e}"))
    }
}

impl From<OsodError> for CmdError {
    fn from(e: OsodError) -> Self {
        let code = match e {
            OsodError::Infeasible { .. }
            | OsodError::NegativeProbability { .. }
            | OsodError::BufferOverflow { .. }
            | OsodError::NonIntegerSize { .. } => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        CmdError {
            code,
            message: e.to_string(),
        }
    }
}

/// Resolve the seed: flag, then the OSOD_SEED variable, then fresh
/// entropy. The source is echoed in the report so no run is silently
/// unseeded.
fn resolve_seed(flag: Option<u64>) -> (u64, &'static str) {
    if let Some(seed) = flag {
        return (seed, "flag");
    }
    if let Ok(raw) = std::env::var("OSOD_SEED") {
        if let Ok(seed) = raw.trim().parse::<u64>() {
            return (seed, "env");
        }
    }
    (rand::rng().random(), "entropy")
}

fn open_input(path: &str) -> Result<Box<dyn Read>, CmdError> {
    if path == "-" {
        Ok(Box::new(io::stdin()))
    } else {
        Ok(Box::new(File::open(path).map_err(|e| {
            CmdError::input(format!("cannot open '{path}': {e}"))
        })?))
    }
}

struct Population {
    ids: Vec<String>,
    probs: ProbabilityVector,
    y: Option<Vec<f64>>,
    /// True when probabilities were derived from an auxiliary column.
    derived: bool,
}

/// Read a population CSV with header `id,pi[,y]` or `id,x[,y]`; an `x`
/// column needs `--n` to derive the probabilities.
fn read_population(path: &str, n: Option<f64>, tol: &Tolerance) -> Result<Population, CmdError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open_input(path)?);
    let headers = reader
        .headers()
        .map_err(|e| CmdError::input(format!("bad header: {e}")))?;
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let id_col = find("id").ok_or_else(|| CmdError::input("missing 'id' column"))?;
    let pi_col = find("pi");
    let x_col = find("x");
    let y_col = find("y");
    if pi_col.is_none() && x_col.is_none() {
        return Err(CmdError::input("need a 'pi' or 'x' column"));
    }

    let mut ids = Vec::new();
    let mut values = Vec::new();
    let mut y = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CmdError::input(format!("record {}: {e}", line + 2)))?;
        let parse = |col: usize, what: &str| -> Result<f64, CmdError> {
            record
                .get(col)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CmdError::input(format!("record {}: bad {what}", line + 2)))
        };
        ids.push(
            record
                .get(id_col)
                .ok_or_else(|| CmdError::input(format!("record {}: missing id", line + 2)))?
                .to_string(),
        );
        match (pi_col, x_col) {
            (Some(col), _) => values.push(parse(col, "pi")?),
            (None, Some(col)) => values.push(parse(col, "x")?),
            (None, None) => unreachable!(),
        }
        if let Some(col) = y_col {
            y.push(parse(col, "y")?);
        }
    }
    if ids.is_empty() {
        return Err(CmdError::input("empty population"));
    }

    let derived = pi_col.is_none();
    let probs = if derived {
        let n =
            n.ok_or_else(|| CmdError::input("an 'x' column needs --n to derive probabilities"))?;
        inclusion_from_auxiliary(&values, n, tol)?
    } else {
        ProbabilityVector::validate(&values, tol)?
    };
    let y = if y.is_empty() { None } else { Some(y) };
    Ok(Population {
        ids,
        probs,
        y,
        derived,
    })
}

fn cmd_sample(args: SampleArgs) -> Result<(), CmdError> {
    let tol = Tolerance::default();
    let population = read_population(&args.common.input, args.n, &tol)?;
    let (seed, seed_source) = resolve_seed(args.common.seed);
    let total_mass = population.probs.sum();

    let (mask, phantom_probability) = if args.phantom {
        let n = population.probs.len();
        let policy = WindowPolicy::full_buffer().with_max_buffer(n + 1);
        let mut engine: StreamSampler<usize> = StreamSampler::new(policy, tol);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut emissions = Vec::new();
        for (k, &p) in population.probs.iter().enumerate() {
            emissions.extend(engine.push(k, p, &mut rng)?);
        }
        emissions.extend(engine.finalize_with_phantom(&mut rng)?);
        let mut mask = vec![false; n];
        for e in emissions {
            mask[e.id] = e.selected;
        }
        (mask, engine.report().phantoms.first().copied())
    } else {
        let ledger = sample_population(&population.probs, seed, &tol).map_err(|e| match e {
            OsodError::NegativeProbability { .. } | OsodError::Infeasible { .. } => {
                CmdError::infeasible(format!("{e}; retry with --phantom"))
            }
            other => other.into(),
        })?;
        (ledger.as_mask(), None)
    };

    let realized = mask.iter().filter(|&&b| b).count();
    let residual = realized as f64 - total_mass;

    let mut out = io::stdout().lock();
    match args.common.format {
        Format::Csv => {
            writeln!(out, "id,decision")?;
            for (id, selected) in population.ids.iter().zip(&mask) {
                writeln!(out, "{id},{}", u8::from(*selected))?;
            }
        }
        Format::Json => {
            let decisions: Vec<serde_json::Value> = population
                .ids
                .iter()
                .zip(&mask)
                .map(|(id, s)| serde_json::json!({"id": id, "selected": u8::from(*s)}))
                .collect();
            let doc = serde_json::json!({
                "command": "sample",
                "version": VERSION,
                "seed": seed,
                "seed_source": seed_source,
                "phantom": args.phantom,
                "decisions": decisions,
                "summary": {
                    "population": population.ids.len(),
                    "total_mass": total_mass,
                    "realized_size": realized,
                    "conservation_residual": residual,
                    "phantom_probability": phantom_probability,
                },
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
    }

    eprintln!(
        "# osod v{VERSION} sample seed={seed} ({seed_source}) phantom={}",
        args.phantom
    );
    if population.derived {
        eprintln!("# probabilities derived from auxiliary sizes");
    }
    if let Some(p) = phantom_probability {
        eprintln!("# phantom unit used with probability {p:.6}");
    }
    eprintln!(
        "# population {} total_mass {:.6} realized {} residual {:+.6}",
        population.ids.len(),
        total_mass,
        realized,
        residual
    );
    Ok(())
}

fn cmd_stream(args: StreamArgs) -> Result<(), CmdError> {
    let tol = Tolerance::default();
    let (seed, seed_source) = resolve_seed(args.common.seed);
    let policy = WindowPolicy {
        search: args.window,
        max_buffer: args.max_buffer.max(1),
        phantom_on_overflow: true,
    };
    let mut engine: StreamSampler<String> = StreamSampler::new(policy, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let reader = BufReader::new(open_input(&args.common.input)?);
    let mut out = io::stdout().lock();
    let mut realized = 0usize;
    let mut total_mass = 0.0;
    let mut emitted = 0usize;

    let emit = |emissions: Vec<osod_core::Emission<String>>,
                out: &mut io::StdoutLock<'_>,
                realized: &mut usize,
                emitted: &mut usize|
     -> Result<(), CmdError> {
        for e in emissions {
            writeln!(out, "{},{}", e.id, u8::from(e.selected))?;
            out.flush()?;
            *realized += usize::from(e.selected);
            *emitted += 1;
        }
        Ok(())
    };

    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (id, prob) = trimmed
            .rsplit_once(',')
            .and_then(|(id, p)| p.trim().parse::<f64>().ok().map(|p| (id.trim(), p)))
            .ok_or_else(|| {
                CmdError::input(format!(
                    "line {}: expected '<id>,<probability>', got '{trimmed}'",
                    line_no + 1
                ))
            })?;
        total_mass += prob;
        let emissions = engine.push(id.to_string(), prob, &mut rng)?;
        emit(emissions, &mut out, &mut realized, &mut emitted)?;
    }
    let emissions = engine.finish(&mut rng)?;
    emit(emissions, &mut out, &mut realized, &mut emitted)?;

    let report = engine.report();
    eprintln!(
        "# osod v{VERSION} stream seed={seed} ({seed_source}) window={} max_buffer={}",
        window_name(args.window),
        policy.max_buffer
    );
    eprintln!(
        "# units {} realized {} total_mass {:.6} max_latency {} max_occupancy {}",
        emitted, realized, total_mass, report.max_latency, report.max_occupancy
    );
    for p in &report.phantoms {
        eprintln!("# phantom unit used with probability {p:.6}");
    }
    if report.midstream_phantom {
        eprintln!("# mid-stream phantom: the realized sample size is random");
    }
    Ok(())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<(), CmdError> {
    let tol = Tolerance::default();
    let population = read_population(&args.common.input, args.n, &tol)?;
    let policy = WindowPolicy {
        search: args.window,
        ..WindowPolicy::smallest()
    };

    let (design, seed_line) = match args.replications {
        None => (enumerate_design(&population.probs, &policy, &tol)?, None),
        Some(reps) => {
            let (seed, seed_source) = resolve_seed(args.common.seed);
            (
                osod_core::monte_carlo_design(&population.probs, &policy, reps, seed, &tol)?,
                Some(format!("seed={seed} ({seed_source})")),
            )
        }
    };
    let joint = joint_inclusion(&design);

    // Side outputs first, so an early-closed stdout pipe cannot lose them.
    if let Some(path) = &args.joint {
        let mut file = File::create(path)
            .map_err(|e| CmdError::input(format!("cannot create '{path}': {e}")))?;
        writeln!(file, "unit,{}", population.ids.join(","))?;
        for k in 0..design.n_units {
            let row: Vec<String> = (0..design.n_units)
                .map(|l| joint.get(k, l).to_string())
                .collect();
            writeln!(file, "{},{}", population.ids[k], row.join(","))?;
        }
    }

    let mut out = io::stdout().lock();
    match args.common.format {
        Format::Csv => {
            writeln!(out, "sample_bits,probability")?;
            for (&bits, &p) in &design.entries {
                writeln!(out, "{},{}", design.bits_string(bits), p)?;
            }
        }
        Format::Json => {
            let entries: Vec<serde_json::Value> = design
                .entries
                .iter()
                .map(|(&bits, &p)| {
                    serde_json::json!({"sample": design.bits_string(bits), "probability": p})
                })
                .collect();
            let matrix: Vec<Vec<f64>> = (0..design.n_units)
                .map(|k| (0..design.n_units).map(|l| joint.get(k, l)).collect())
                .collect();
            let doc = serde_json::json!({
                "command": "enumerate",
                "version": VERSION,
                "window": window_name(args.window),
                "ids": population.ids,
                "source": match design.source {
                    DesignSource::Exact => "exact".to_string(),
                    DesignSource::MonteCarlo(r) => format!("monte-carlo:{r}"),
                },
                "pruned_mass": design.pruned_mass,
                "entries": entries,
                "joint_inclusion": matrix,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
    }

    eprintln!(
        "# osod v{VERSION} enumerate window={} {}",
        window_name(args.window),
        seed_line.unwrap_or_else(|| "exact".into())
    );
    eprintln!(
        "# support {} total_probability {:.9} pruned_mass {:.3e}",
        design.support_size(),
        design.total_probability(),
        design.pruned_mass
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CmdError> {
    let tol = Tolerance::default();
    let population = read_population(&args.common.input, args.n, &tol)?;
    let (seed, seed_source) = resolve_seed(args.common.seed);
    if args.replications == 0 {
        return Err(CmdError::input("--replications must be at least 1"));
    }
    let n = population.probs.len();
    let y: Vec<f64> = population.y.clone().unwrap_or_else(|| vec![1.0; n]);
    if y.len() != n {
        return Err(CmdError::input("y column length mismatch"));
    }
    let total: f64 = y.iter().sum();
    let policy = WindowPolicy {
        search: args.window,
        ..WindowPolicy::smallest()
    };

    let mut out = io::stdout().lock();
    writeln!(out, "replication,estimate,size")?;
    let mut counts = vec![0u64; n];
    let mut estimates = Vec::with_capacity(args.replications as usize);
    for rep in 0..args.replications {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep);
        let mask: Vec<bool> = match args.method {
            Method::Osod => {
                let mut engine: StreamSampler<usize> = StreamSampler::new(policy, tol);
                let mut mask = vec![false; n];
                let record = |es: Vec<osod_core::Emission<usize>>, mask: &mut Vec<bool>| {
                    for e in es {
                        mask[e.id] = e.selected;
                    }
                };
                for (k, &p) in population.probs.iter().enumerate() {
                    let es = engine.push(k, p, &mut rng)?;
                    record(es, &mut mask);
                }
                let es = engine.finish(&mut rng)?;
                record(es, &mut mask);
                mask
            }
            Method::Systematic => {
                let u: f64 = rng.random();
                systematic_sample(&population.probs, u, true, &mut rng, &tol)?
            }
            Method::Pivotal => pivotal_sample(&population.probs, &mut rng, &tol)?,
        };
        let size = mask.iter().filter(|&&b| b).count();
        for (k, &selected) in mask.iter().enumerate() {
            counts[k] += u64::from(selected);
        }
        let estimate = ht_estimate(&mask, &y, &population.probs)?;
        writeln!(out, "{rep},{estimate},{size}")?;
        estimates.push(estimate);
    }

    let reps = args.replications as f64;
    let mean = estimates.iter().sum::<f64>() / reps;
    let variance = if estimates.len() > 1 {
        estimates
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / (reps - 1.0)
    } else {
        0.0
    };
    let max_freq_dev = counts
        .iter()
        .zip(population.probs.iter())
        .map(|(&c, &p)| (c as f64 / reps - p).abs())
        .fold(0.0f64, f64::max);

    if let Some(path) = &args.freq_out {
        let mut file = File::create(path)
            .map_err(|e| CmdError::input(format!("cannot create '{path}': {e}")))?;
        writeln!(file, "id,pi,frequency")?;
        for ((id, &p), &c) in population
            .ids
            .iter()
            .zip(population.probs.iter())
            .zip(&counts)
        {
            writeln!(file, "{id},{p},{}", c as f64 / reps)?;
        }
    }

    eprintln!(
        "# osod v{VERSION} simulate method={} window={} replications={} seed={seed} \
         ({seed_source})",
        args.method.name(),
        window_name(args.window),
        args.replications
    );
    eprintln!(
        "# y_total {total:.6} mean_estimate {mean:.6} sd {:.6} variance {variance:.6}",
        variance.sqrt()
    );
    eprintln!("# max inclusion frequency deviation {max_freq_dev:.6}");
    Ok(())
}

fn cmd_pi_from_aux(args: PiFromAuxArgs) -> Result<(), CmdError> {
    let tol = Tolerance::default();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open_input(&args.common.input)?);
    let headers = reader
        .headers()
        .map_err(|e| CmdError::input(format!("bad header: {e}")))?;
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let id_col = find("id").ok_or_else(|| CmdError::input("missing 'id' column"))?;
    let x_col = find("x").ok_or_else(|| CmdError::input("missing 'x' column"))?;

    let mut ids = Vec::new();
    let mut x = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CmdError::input(format!("record {}: {e}", line + 2)))?;
        ids.push(record.get(id_col).unwrap_or_default().to_string());
        x.push(
            record
                .get(x_col)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CmdError::input(format!("record {}: bad x", line + 2)))?,
        );
    }
    let probs = inclusion_from_auxiliary(&x, args.n, &tol)?;
    let capped = probs.iter().filter(|&&p| p >= 1.0).count();

    let mut out = io::stdout().lock();
    match args.common.format {
        Format::Csv => {
            writeln!(out, "id,pi")?;
            for (id, &p) in ids.iter().zip(probs.iter()) {
                writeln!(out, "{id},{p}")?;
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = ids
                .iter()
                .zip(probs.iter())
                .map(|(id, &p)| serde_json::json!({"id": id, "pi": p}))
                .collect();
            let doc = serde_json::json!({
                "command": "pi-from-aux",
                "version": VERSION,
                "n": args.n,
                "capped_units": capped,
                "probabilities": rows,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
    }
    eprintln!(
        "# osod v{VERSION} pi-from-aux n={} capped {capped} sum {:.9}",
        args.n,
        probs.sum()
    );
    Ok(())
}
