//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ensemble::{verify_interchange, EnsembleRunner, EnsembleSpec, DEFAULT_REALIZATIONS};
use crate::error::Error;
use crate::io::{read_grid_csv, render_heatmap, write_grid_csv, DEFAULT_ZOOM};
use crate::model::{DisorderKind, RingSize, MAX_DELTA};
use crate::wigner::{PhaseSpaceGrid, TimeLabel};

/// Worker cap read from the environment.
pub const THREADS_ENV: &str = "WIGNERWALK_THREADS";

/// Pass threshold of the `verify` subcommand.
pub const INTERCHANGE_TOL: f64 = 1e-12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

const DEFAULT_TIMES: [f64; 6] = [1.0, 10.0, 20.0, 40.0, 100.0, 500.0];

#[derive(Parser, Debug)]
#[command(name = "wignerwalk", version, about = "Wigner functions of quantum walks on disordered rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ensemble-averaged Wigner functions at the given times.
    Evolve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        times: TimesArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ensemble-averaged exact long-time Wigner function.
    Longtime {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Snapshots and the long-time grid from one sweep.
    Ensemble {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        times: TimesArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Render a grid CSV as a PPM heatmap.
    Render {
        /// Grid CSV written by another subcommand.
        #[arg(long)]
        input: PathBuf,
        /// Image path; defaults to the input path with a `.ppm` extension.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Pixels per grid cell.
        #[arg(long, default_value_t = DEFAULT_ZOOM)]
        zoom: usize,
    },
    /// Check that time and ensemble averages commute on a small instance.
    Verify {
        /// Ring size.
        #[arg(long, default_value_t = 21)]
        n: usize,
        /// Source node; defaults to floor(N/2).
        #[arg(long)]
        j: Option<usize>,
        /// Disorder kind: none, dd, dod or cdod.
        #[arg(long, default_value = "dd")]
        kind: DisorderKind,
        /// Disorder strength.
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        /// Number of disorder realizations.
        #[arg(long, default_value_t = 20)]
        r: usize,
        /// Base seed; realization i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// End of the averaging window.
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        /// Sample times in the window.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Ring size.
    #[arg(long, default_value_t = 101)]
    n: usize,
    /// Source node; defaults to floor(N/2).
    #[arg(long)]
    j: Option<usize>,
    /// Disorder kind: none, dd, dod or cdod.
    #[arg(long, default_value = "dod")]
    kind: DisorderKind,
    /// Disorder strength.
    #[arg(long, default_value_t = MAX_DELTA)]
    delta: f64,
    /// Number of disorder realizations.
    #[arg(long, default_value_t = DEFAULT_REALIZATIONS)]
    r: usize,
    /// Base seed; realization i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute degeneracy tolerance (default: 1e-9 times the spectral range).
    #[arg(long)]
    eps_deg: Option<f64>,
    /// Accept disorder strengths above 1/2.
    #[arg(long)]
    allow_strong_disorder: bool,
}

#[derive(Args, Debug)]
struct TimesArg {
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TIMES)]
    times: Vec<f64>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,
    /// Skip the PPM heatmaps.
    #[arg(long)]
    no_image: bool,
    /// Pixels per grid cell.
    #[arg(long, default_value_t = DEFAULT_ZOOM)]
    zoom: usize,
    /// Worker threads (overrides WIGNERWALK_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress progress and the list of written files.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandKind {
    Evolve,
    Longtime,
    Ensemble,
    Render,
    Verify,
}

impl SubcommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SubcommandKind::Evolve => "evolve",
            SubcommandKind::Longtime => "longtime",
            SubcommandKind::Ensemble => "ensemble",
            SubcommandKind::Render => "render",
            SubcommandKind::Verify => "verify",
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: SubcommandKind,
    pub n: usize,
    pub j: usize,
    pub kind: DisorderKind,
    pub delta: f64,
    pub r: usize,
    pub base_seed: u64,
    pub times: Vec<f64>,
    pub eps_deg: Option<f64>,
    pub allow_strong_disorder: bool,
    pub output_dir: PathBuf,
    pub image: bool,
    pub zoom: usize,
    pub threads: Option<usize>,
    pub quiet: bool,
    /// `render` only.
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// `verify` only.
    pub t_max: f64,
    pub samples: usize,
}

impl RunConfig {
    fn base(subcommand: SubcommandKind) -> Self {
        Self {
            subcommand,
            n: 101,
            j: 50,
            kind: DisorderKind::Dod,
            delta: MAX_DELTA,
            r: DEFAULT_REALIZATIONS,
            base_seed: 0,
            times: Vec::new(),
            eps_deg: None,
            allow_strong_disorder: false,
            output_dir: PathBuf::from("."),
            image: true,
            zoom: DEFAULT_ZOOM,
            threads: None,
            quiet: false,
            input: None,
            output: None,
            t_max: 100.0,
            samples: 200,
        }
    }

    pub fn ensemble_spec(&self) -> Result<EnsembleSpec, Error> {
        let mut spec = EnsembleSpec::new(
            RingSize::new(self.n)?,
            self.j,
            self.kind,
            self.delta,
            self.r,
            self.base_seed,
        )
        .with_times(self.times.clone());
        spec.eps_deg = self.eps_deg;
        spec.uncapped = self.allow_strong_disorder;
        Ok(spec)
    }

    /// `{sub}_{kind}_d{delta}_N{n}_j{j}_[t{t}|longtime]_R{r}_s{seed}.csv`
    pub fn file_stem(&self, time: TimeLabel) -> String {
        let when = match time {
            TimeLabel::At(t) => format!("t{t}"),
            other => other.to_string(),
        };
        format!(
            "{}_{}_d{}_N{}_j{}_{}_R{}_s{}",
            self.subcommand.as_str(),
            self.kind,
            self.delta,
            self.n,
            self.j,
            when,
            self.r,
            self.base_seed
        )
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Help or version text; not a failure.
    Info(String),
    Usage(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        _ => Ok(None),
    }
}

fn check_model(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.n < 3 {
        return Err(usage(format!("--n must be at least 3, got {}", cfg.n)));
    }
    if cfg.j >= cfg.n {
        return Err(usage(format!("--j must be below N = {}, got {}", cfg.n, cfg.j)));
    }
    if cfg.r == 0 {
        return Err(usage("--r must be at least 1"));
    }
    if !cfg.delta.is_finite() || cfg.delta < 0.0 {
        return Err(usage(format!("--delta must be non-negative, got {}", cfg.delta)));
    }
    if cfg.delta > MAX_DELTA && !cfg.allow_strong_disorder {
        return Err(usage(format!(
            "--delta {} is outside [0, {MAX_DELTA}] (pass --allow-strong-disorder to override)",
            cfg.delta
        )));
    }
    if let Some(eps) = cfg.eps_deg {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(usage(format!("--eps-deg must be non-negative, got {eps}")));
        }
    }
    if let Some(t) = cfg.times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(usage(format!("--times entries must be non-negative, got {t}")));
    }
    Ok(())
}

/// Parses and validates `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;

    let apply_model = |cfg: &mut RunConfig, m: ModelArgs| {
        cfg.n = m.n;
        cfg.j = m.j.unwrap_or(m.n / 2);
        cfg.kind = m.kind;
        cfg.delta = m.delta;
        cfg.r = m.r;
        cfg.base_seed = m.seed;
        cfg.eps_deg = m.eps_deg;
        cfg.allow_strong_disorder = m.allow_strong_disorder;
    };
    let apply_output = |cfg: &mut RunConfig, o: OutputArgs| -> Result<(), CliError> {
        cfg.output_dir = o.out;
        cfg.image = !o.no_image;
        cfg.zoom = o.zoom.max(1);
        cfg.threads = match o.threads {
            Some(t) => Some(t),
            None => threads_from_env()?,
        };
        cfg.quiet = o.quiet;
        Ok(())
    };

    let cfg = match cli.command {
        Command::Evolve { model, times, output } => {
            let mut cfg = RunConfig::base(SubcommandKind::Evolve);
            apply_model(&mut cfg, model);
            cfg.times = times.times;
            apply_output(&mut cfg, output)?;
            cfg
        }
        Command::Ensemble { model, times, output } => {
            let mut cfg = RunConfig::base(SubcommandKind::Ensemble);
            apply_model(&mut cfg, model);
            cfg.times = times.times;
            apply_output(&mut cfg, output)?;
            cfg
        }
        Command::Longtime { model, output } => {
            let mut cfg = RunConfig::base(SubcommandKind::Longtime);
            apply_model(&mut cfg, model);
            apply_output(&mut cfg, output)?;
            cfg
        }
        Command::Render { input, output, zoom } => {
            let mut cfg = RunConfig::base(SubcommandKind::Render);
            cfg.input = Some(input);
            cfg.output = output;
            cfg.zoom = zoom.max(1);
            return Ok(cfg);
        }
        Command::Verify { n, j, kind, delta, r, seed, t_max, samples } => {
            let mut cfg = RunConfig::base(SubcommandKind::Verify);
            cfg.n = n;
            cfg.j = j.unwrap_or(n / 2);
            cfg.kind = kind;
            cfg.delta = delta;
            cfg.r = r;
            cfg.base_seed = seed;
            cfg.t_max = t_max;
            cfg.samples = samples;
            cfg.image = false;
            if !(t_max >= 0.0 && t_max.is_finite()) {
                return Err(usage(format!("--t-max must be non-negative, got {t_max}")));
            }
            if samples < 2 {
                return Err(usage("--samples must be at least 2"));
            }
            cfg
        }
    };
    check_model(&cfg)?;
    if matches!(cfg.subcommand, SubcommandKind::Evolve | SubcommandKind::Ensemble)
        && cfg.times.is_empty()
    {
        return Err(usage("--times must list at least one time"));
    }
    Ok(cfg)
}

/// What a successful [`execute`] produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// `verify` verdict; always true for other subcommands.
    pub passed: bool,
    pub max_dev: Option<f64>,
}

fn write_outputs(cfg: &RunConfig, grids: &[PhaseSpaceGrid], files: &mut Vec<PathBuf>) -> Result<(), Error> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|source| Error::Io {
        path: cfg.output_dir.clone(),
        source,
    })?;
    for g in grids {
        let stem = cfg.file_stem(g.meta.time);
        let csv = cfg.output_dir.join(format!("{stem}.csv"));
        write_grid_csv(g, &csv)?;
        files.push(csv);
        if cfg.image {
            let ppm = cfg.output_dir.join(format!("{stem}.ppm"));
            render_heatmap(g, &ppm, cfg.zoom)?;
            files.push(ppm);
        }
    }
    Ok(())
}

fn default_render_path(input: &Path) -> PathBuf {
    input.with_extension("ppm")
}

/// Runs the pipeline for a validated configuration.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, Error> {
    let mut outcome = Outcome {
        passed: true,
        ..Outcome::default()
    };
    if cfg.delta > MAX_DELTA {
        eprintln!(
            "warning: disorder strength {} exceeds the studied range [0, {MAX_DELTA}]",
            cfg.delta
        );
    }
    let progress = |done: usize, total: usize| {
        if total >= 10 && done.is_multiple_of(total / 10) {
            eprintln!("  {done}/{total} realizations");
        }
    };
    let mut runner = EnsembleRunner::new().workers(cfg.threads);
    if !cfg.quiet {
        runner = runner.on_progress(&progress);
    }
    match cfg.subcommand {
        SubcommandKind::Evolve => {
            let res = runner.snapshot(&cfg.ensemble_spec()?)?;
            write_outputs(cfg, &res.grids, &mut outcome.files)?;
        }
        SubcommandKind::Longtime => {
            let res = runner.longtime(&cfg.ensemble_spec()?)?;
            write_outputs(cfg, &res.grids, &mut outcome.files)?;
        }
        SubcommandKind::Ensemble => {
            let res = runner.full(&cfg.ensemble_spec()?)?;
            write_outputs(cfg, &res.grids, &mut outcome.files)?;
        }
        SubcommandKind::Render => {
            let input = cfg.input.as_deref().expect("render requires --input");
            let grid = read_grid_csv(input)?;
            let path = cfg.output.clone().unwrap_or_else(|| default_render_path(input));
            render_heatmap(&grid, &path, cfg.zoom)?;
            outcome.files.push(path);
        }
        SubcommandKind::Verify => {
            let report = verify_interchange(&cfg.ensemble_spec()?, cfg.t_max, cfg.samples)?;
            outcome.passed = report.max_dev <= INTERCHANGE_TOL;
            outcome.max_dev = Some(report.max_dev);
        }
    }
    Ok(outcome)
}

/// Executes `cfg` and reports to stdout/stderr; returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(outcome) => {
            if !cfg.quiet {
                for f in &outcome.files {
                    println!("{}", f.display());
                }
            }
            if let Some(dev) = outcome.max_dev {
                println!(
                    "max_dev = {dev:e} ({})",
                    if outcome.passed { "ok" } else { "FAILED" }
                );
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_RUNTIME
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// Full entry point: parse, run, map to an exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cfg) => run(&cfg),
        Err(CliError::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(CliError::Usage(text)) => {
            eprint!("{text}");
            if !text.ends_with('\n') {
                eprintln!();
            }
            EXIT_USAGE
        }
    }
}
