use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use monogamy_core::experiments::{
    self, Family, MonteCarloResult, RunMetadata, Sample, SweepResult, DEFAULT_P_GRID,
};
use monogamy_core::monogamy::{MonogamyReport, Party};
use monogamy_core::{DensityMatrix, Error, OptimizerConfig, StateSpec};
use serde::Serialize;

const WORKERS_ENV: &str = "DISCORD_NUM_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "monogamy", version, about = "Discord monogamy experiments on three-qubit states")]
struct Cli {
    /// Optimizer settings (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Optimizer restart seed; also the sampling seed for montecarlo.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Node of the monogamy relation.
    #[arg(long, global = true, default_value = "A")]
    node: Party,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monogamy report for one state.
    Analyze {
        /// State spec, JSON or `family:key=value,...`.
        #[arg(long, alias = "spec", conflicts_with = "rho", required_unless_present = "rho")]
        state: Option<String>,
        /// Density matrix JSON file with `dims`, `re`, `im`.
        #[arg(long)]
        rho: Option<PathBuf>,
    },
    /// δ_M over an interior (θ, φ) grid of generalized W states.
    SweepW {
        #[arg(long, default_value = "25x25", value_parser = parse_grid)]
        grid: (usize, usize),
    },
    /// δ_M against the white-noise weight p.
    SweepNoise {
        /// Pure gen_ghz or gen_w spec; repeatable.
        #[arg(long, alias = "spec")]
        state: Vec<String>,
        /// Default state set when no --state is given.
        #[arg(long, default_value = "gen_w")]
        family: String,
        #[arg(long, default_value_t = DEFAULT_P_GRID)]
        p_grid: usize,
    },
    /// Violation fraction over random class members.
    Montecarlo {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Also write one CSV row per sample.
        #[arg(long)]
        samples_csv: Option<PathBuf>,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid {s:?} is not of the form <n>x<m>"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("grid count {v:?} is not an integer"));
    Ok((parse(a)?, parse(b)?))
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{WORKERS_ENV}={raw:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot size worker pool: {e}")))
}

fn load_config(cli: &Cli) -> Result<OptimizerConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => OptimizerConfig::load(path)?,
        None => OptimizerConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize to JSON");
    s.push('\n');
    s
}

/// CSV outputs carry their metadata in a `<out>.meta.json` sidecar, or on
/// stderr when writing to stdout.
fn emit_csv_metadata(out: Option<&Path>, meta: &RunMetadata) -> Result<(), Failure> {
    let text = to_json(meta);
    match out {
        Some(path) => {
            let mut side = path.as_os_str().to_owned();
            side.push(".meta.json");
            emit(Some(Path::new(&side)), &text)
        }
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    metadata: &'a RunMetadata,
    result: &'a T,
}

fn load_rho(path: &Path) -> Result<DensityMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_workers()?;
    let cfg = load_config(&cli)?;
    let out = cli.out.as_deref();
    let node = cli.node;
    let started = Instant::now();

    match &cli.command {
        Command::Analyze { state, rho } => {
            let (rho_m, spec, inputs) = match (state, rho) {
                (Some(s), _) => {
                    let spec: StateSpec = s.parse()?;
                    let spec = spec.resolved()?;
                    let rho_m = spec.build()?.to_density();
                    let inputs = serde_json::json!({ "state": &spec, "node": node });
                    (rho_m, Some(spec), inputs)
                }
                (None, Some(path)) => {
                    let rho_m = load_rho(path)?;
                    let inputs = serde_json::json!({ "rho": &rho_m, "node": node });
                    (rho_m, None, inputs)
                }
                (None, None) => return Err(usage("analyze needs --state or --rho")),
            };
            let analysis = experiments::analyze(&rho_m, spec, node, &cfg)?;
            let mut meta = RunMetadata::new("analyze", &cfg, Some(cfg.seed), &inputs);
            meta.wall_time = started.elapsed();
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => emit(out, &to_json(&Envelope { metadata: &meta, result: &analysis }))?,
                Format::Csv => {
                    let text = format!(
                        "{}\n{}\n",
                        MonogamyReport::CSV_COLUMNS.join(","),
                        analysis.report.csv_values().join(",")
                    );
                    emit(out, &text)?;
                    emit_csv_metadata(out, &meta)?;
                }
            }
            report_time(&meta);
        }
        Command::SweepW { grid } => {
            let mut result = experiments::sweep_w(grid.0, grid.1, node, &cfg)?;
            result.metadata.seed = Some(cfg.seed);
            result.metadata.wall_time = started.elapsed();
            emit_sweep(out, cli.format, &result)?;
            if let Some(p) = result.points.iter().find(|p| p.report.delta_m.0 <= 0.0) {
                eprintln!("note: non-positive delta_m {} at {:?}", p.report.delta_m, p.params);
            }
        }
        Command::SweepNoise { state, family, p_grid } => {
            let specs: Vec<StateSpec> = if state.is_empty() {
                match family.as_str() {
                    "gen_w" => experiments::default_w_noise_states(),
                    "gen_ghz" => experiments::default_ghz_noise_states(),
                    other => return Err(usage(format!("--family {other:?}: expected gen_w or gen_ghz"))),
                }
            } else {
                state.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
            };
            let mut result = experiments::sweep_noise(&specs, *p_grid, node, &cfg)?;
            result.metadata.seed = Some(cfg.seed);
            result.metadata.wall_time = started.elapsed();
            emit_sweep(out, cli.format, &result)?;
            for c in &result.crossovers {
                eprintln!("crossover p* = {} for {}", experiments::fmt_sig(c.p_star), serde_json::to_string(&c.state).unwrap_or_default());
            }
        }
        Command::Montecarlo { family, samples, samples_csv } => {
            let family: Family = family.parse()?;
            let seed = cli.seed.unwrap_or(0);
            let (result, draws) = experiments::montecarlo(family, *samples, seed, node, &cfg)?;
            let inputs = serde_json::json!({ "family": family, "samples": samples, "node": node });
            let mut meta = RunMetadata::new("montecarlo", &cfg, Some(seed), &inputs);
            meta.wall_time = started.elapsed();
            if let Some(path) = samples_csv {
                emit(Some(path), &samples_to_csv(family, &draws))?;
            }
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => emit(out, &to_json(&Envelope { metadata: &meta, result: &result }))?,
                Format::Csv => {
                    emit(out, &montecarlo_csv(&result))?;
                    emit_csv_metadata(out, &meta)?;
                }
            }
            report_time(&meta);
        }
    }
    Ok(())
}

fn emit_sweep(out: Option<&Path>, format: Option<Format>, result: &SweepResult) -> Result<(), Failure> {
    match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(out, &result.to_csv())?;
            emit_csv_metadata(out, &result.metadata)?;
        }
        Format::Json => emit(out, &to_json(result))?,
    }
    report_time(&result.metadata);
    Ok(())
}

fn samples_to_csv(family: Family, draws: &[Sample]) -> String {
    let mut text = Sample::csv_header(family);
    text.push('\n');
    for s in draws {
        text.push_str(&s.csv_row());
        text.push('\n');
    }
    text
}

fn montecarlo_csv(r: &MonteCarloResult) -> String {
    use experiments::fmt_sig;
    format!(
        "family,samples,violations,fraction,seed,threshold,delta_min,delta_max,delta_mean\n{},{},{},{},{},{},{},{},{}\n",
        r.family.name(),
        r.samples,
        r.violations,
        fmt_sig(r.fraction),
        r.seed,
        fmt_sig(r.threshold),
        fmt_sig(r.delta_min),
        fmt_sig(r.delta_max),
        fmt_sig(r.delta_mean),
    )
}

fn report_time(meta: &RunMetadata) {
    eprintln!("{} finished in {:.3} s", meta.command, meta.wall_time.as_secs_f64());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
