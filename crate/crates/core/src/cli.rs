//! Command-line front end: simulate, estimate, diagnose, and sweep.
//!
//! Sample files are text: a header line `MRFS 1 d=<d> dims=<l1>x...x<ld>
//! m=<m>`, an optional provenance comment, then the symbols in row-major
//! order. Reports are key = value lines followed by tab-separated tables.
//! Every command is deterministic given its flags; the `MRF_THREADS`
//! environment variable caps the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::estimator::{
    empirical_specification, estimate, typicality_check, EmpiricalTable, EstimateConfig,
    EstimatorError, Evaluation, KappaMode, PicReport, TypicalityReport,
};
use crate::lattice::{
    radius_schedule, window, Neighborhood, Region, Site, DEFAULT_CANDIDATE_CAP,
};
use crate::model::{Potential, Specification};
use crate::sampler::{default_burn_in, gibbs_sample, replicate_seed, Provenance, Sample};

/// Errors reported by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    /// Flags or file contents failed validation.
    #[error("{0}")]
    Validation(String),
    /// A file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        /// Offending path.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 1 for validation failures, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn invalid(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

/// Parses arguments, runs the chosen command, and returns the process exit
/// code: 0 on success, 1 on validation failures, 2 on I/O failures.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let usage_error = err.use_stderr();
            let _ = err.print();
            return if usage_error { 1 } else { 0 };
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Diagnose(args) => cmd_diagnose(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    });
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let raw = match std::env::var("MRF_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(std::env::VarError::NotUnicode(_)) => {
            return Err(CliError::Validation(
                "MRF_THREADS is not valid unicode".into(),
            ))
        }
        Ok(raw) => raw,
    };
    let workers: usize = raw.trim().parse().unwrap_or(0);
    if workers == 0 {
        return Err(CliError::Validation(format!(
            "MRF_THREADS must be a positive integer, got {raw:?}"
        )));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|err| CliError::Validation(format!("worker pool: {err}")))
}

#[derive(Parser)]
#[command(
    name = "mrfpic",
    version,
    about = "Neighborhood selection for Markov random fields on the integer lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded Gibbs sample of a lattice model and write it to a file
    Simulate(SimulateArgs),
    /// Score every candidate neighborhood of a sample and report the best
    Estimate(EstimateArgs),
    /// Compare a sample's empirical conditionals against a model
    Diagnose(DiagnoseArgs),
    /// Replicate simulate and estimate across sizes and tally recovery
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    /// Two-symbol spin model with product interactions
    Ising,
    /// Multi-symbol model with agreement interactions
    Potts,
}

#[derive(Args)]
struct ModelArgs {
    /// Interaction family
    #[arg(long, value_enum, default_value = "ising")]
    model: ModelKind,
    /// Coupling on every unit offset
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    beta: f64,
    /// Alphabet size (potts only; ising is two-letter)
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    /// Declared interaction range when it exceeds the largest offset
    #[arg(long)]
    range: Option<i64>,
}

impl ModelArgs {
    fn build(&self, dim: usize) -> Result<Potential, CliError> {
        let base = match self.model {
            ModelKind::Ising => {
                if self.alphabet != 2 {
                    return Err(CliError::Validation(
                        "ising uses a two-letter alphabet; pick --model potts for more symbols"
                            .into(),
                    ));
                }
                Potential::ising(dim, self.beta)
            }
            ModelKind::Potts => Potential::potts(dim, self.alphabet, self.beta),
        }
        .map_err(invalid)?;
        match self.range {
            None => Ok(base),
            Some(range) => Potential::new(
                dim,
                base.alphabet_size(),
                base.pairs().to_vec(),
                base.field().to_vec(),
                Some(range),
            )
            .map_err(invalid),
        }
    }
}

/// Lattice extents, parsed from `64x64`-style text.
#[derive(Clone, Debug)]
struct Dims(Vec<usize>);

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, len) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "x")?;
            }
            write!(f, "{len}")?;
        }
        Ok(())
    }
}

fn parse_dims(text: &str) -> Result<Dims, String> {
    let mut dims = Vec::new();
    for part in text.split('x') {
        match part.parse::<usize>() {
            Ok(len) if len >= 1 => dims.push(len),
            _ => return Err(format!("expected positive extents like 64x64, got {text:?}")),
        }
    }
    Ok(Dims(dims))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EvaluationArg {
    /// Projected when the radius fits the window, per-candidate otherwise
    Auto,
    /// Count the full ball once and marginalize per candidate
    Projected,
    /// Separate counting scan per candidate
    PerCandidate,
}

impl From<EvaluationArg> for Evaluation {
    fn from(arg: EvaluationArg) -> Evaluation {
        match arg {
            EvaluationArg::Auto => Evaluation::Auto,
            EvaluationArg::Projected => Evaluation::Projected,
            EvaluationArg::PerCandidate => Evaluation::PerCandidate,
        }
    }
}

fn evaluation_name(evaluation: Evaluation) -> &'static str {
    match evaluation {
        Evaluation::Auto => "auto",
        Evaluation::Projected => "projected",
        Evaluation::PerCandidate => "per-candidate",
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Lattice extents, e.g. 64x64
    #[arg(long, value_parser = parse_dims)]
    dims: Dims,
    /// Retained sweeps after burn-in
    #[arg(long, default_value_t = 100)]
    sweeps: u32,
    /// Discarded initial sweeps (default: ten times the retained sweeps)
    #[arg(long)]
    burn_in: Option<u32>,
    /// Sampler seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output sample file
    #[arg(long)]
    out: PathBuf,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let dims = &args.dims.0;
    let p = args.model.build(dims.len())?;
    let burn_in = args.burn_in.unwrap_or_else(|| default_burn_in(args.sweeps));
    let sample = gibbs_sample(&p, dims, args.sweeps, burn_in, args.seed).map_err(invalid)?;
    write_sample(&sample, &args.out)?;
    println!(
        "wrote {}: {} sites, alphabet {}, seed {}",
        args.out.display(),
        sample.volume(),
        sample.alphabet_size(),
        args.seed
    );
    Ok(())
}

#[derive(Args)]
struct EstimateArgs {
    /// Input sample file
    #[arg(long)]
    input: PathBuf,
    /// Candidate radius (default: the slow-growth schedule of the window)
    #[arg(long)]
    radius: Option<i64>,
    /// Penalty multiplier
    #[arg(long, default_value_t = 1.0)]
    penalty_scale: f64,
    /// Allow radii beyond the window width; all candidates then score the region shrunk by the radius
    #[arg(long)]
    force_radius: bool,
    /// Evaluation route
    #[arg(long, value_enum, default_value = "auto")]
    evaluation: EvaluationArg,
    /// Cap on the number of candidates
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
    candidate_cap: u64,
    /// Report file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let sample = read_sample(&args.input)?;
    let radius = match args.radius {
        Some(radius) => radius,
        None => default_radius(&sample)?,
    };
    let mut config = EstimateConfig::new(radius);
    config.penalty_scale = args.penalty_scale;
    config.force_radius = args.force_radius;
    config.evaluation = args.evaluation.into();
    config.candidate_cap = args.candidate_cap;
    let report = match estimate(&sample, &config) {
        Ok(report) => report,
        Err(EstimatorError::RadiusExceedsWindow {
            radius,
            window_width,
        }) => {
            return Err(CliError::Validation(format!(
                "radius {radius} exceeds the window width {window_width}; \
                 pass --force-radius to search anyway on fewer sites"
            )))
        }
        Err(err) => return Err(invalid(err)),
    };
    emit(&render_estimate(&args.input, &sample, &report), args.out.as_deref())
}

fn default_radius(sample: &Sample) -> Result<i64, CliError> {
    let window_volume = window(sample.region()).map(|win| win.volume()).unwrap_or(0);
    if window_volume == 0 {
        return Err(CliError::Validation(
            "sample too small: the counting window is empty".into(),
        ));
    }
    radius_schedule(window_volume, 1.0, sample.region().dim()).map_err(invalid)
}

fn render_estimate(input: &Path, sample: &Sample, report: &PicReport) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "command = estimate");
    let _ = writeln!(text, "input = {}", input.display());
    let _ = writeln!(text, "region = {}", sample.region());
    let _ = writeln!(text, "volume = {}", sample.volume());
    let _ = writeln!(text, "alphabet = {}", sample.alphabet_size());
    let _ = writeln!(text, "window_width = {}", report.window_width);
    match window(sample.region()) {
        Some(win) => {
            let _ = writeln!(text, "window = {win}");
            let _ = writeln!(text, "window_volume = {}", win.volume());
        }
        None => {
            let _ = writeln!(text, "window = empty");
            let _ = writeln!(text, "window_volume = 0");
        }
    }
    let _ = writeln!(text, "radius = {}", report.radius);
    let _ = writeln!(text, "forced = {}", report.forced);
    let _ = writeln!(text, "evaluation = {}", evaluation_name(report.evaluation));
    let _ = writeln!(text, "penalty_scale = {}", report.penalty_scale);
    let _ = writeln!(text, "candidates = {}", report.candidates.len());
    let selected = report.selected_value();
    let _ = writeln!(text, "selected = {}", selected.gamma);
    let _ = writeln!(text, "selected_index = {}", report.selected_index);
    let _ = writeln!(text, "selected_size = {}", selected.gamma.len());
    let _ = writeln!(text, "selected_radius = {}", selected.gamma.radius());
    let _ = writeln!(text, "log_mpl = {}", selected.log_mpl);
    let _ = writeln!(text, "penalty = {}", selected.penalty);
    let _ = writeln!(text, "pic = {}", selected.pic);
    let ties: Vec<String> = report.tie_indices.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(text, "ties = {}", report.tie_indices.len());
    let _ = writeln!(text, "tie_indices = {}", ties.join(";"));
    match report.runner_up_margin() {
        Some(margin) => {
            let _ = writeln!(text, "runner_up_margin = {margin}");
        }
        None => {
            let _ = writeln!(text, "runner_up_margin = none");
        }
    }
    let _ = writeln!(text);
    let _ = writeln!(text, "[candidates]");
    let _ = writeln!(text, "index\tsize\tradius\tlog_mpl\tpenalty\tpic\tgamma");
    for (i, value) in report.candidates.iter().enumerate() {
        let _ = writeln!(
            text,
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}",
            value.gamma.len(),
            value.gamma.radius(),
            value.log_mpl,
            value.penalty,
            value.pic,
            value.gamma
        );
    }
    text
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Input sample file
    #[arg(long)]
    input: PathBuf,
    /// Neighborhood to condition on, e.g. "(0,1);(1,0)"; closed under
    /// negation automatically; "-" is the empty set
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    #[command(flatten)]
    model: ModelArgs,
    /// Concentration constant of the bound: "auto" or a positive number
    #[arg(long, default_value = "auto")]
    kappa: String,
    /// Density parameter in (0, 1] for the auto constant
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Report file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_kappa(text: &str, alpha: f64) -> Result<KappaMode, CliError> {
    if text == "auto" {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(CliError::Validation(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        return Ok(KappaMode::Auto { alpha });
    }
    match text.parse::<f64>() {
        Ok(kappa) if kappa.is_finite() && kappa > 0.0 => Ok(KappaMode::Fixed(kappa)),
        _ => Err(CliError::Validation(format!(
            "kappa must be \"auto\" or a positive number, got {text:?}"
        ))),
    }
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<(), CliError> {
    let sample = read_sample(&args.input)?;
    let dim = sample.region().dim();
    let (gamma, was_symmetric) = parse_gamma(&args.gamma, dim)?;
    if !was_symmetric {
        eprintln!("warning: gamma was closed under negation; using {gamma}");
    }
    let p = args.model.build(dim)?;
    if p.alphabet_size() != sample.alphabet_size() {
        return Err(CliError::Validation(format!(
            "model alphabet {} does not match the sample alphabet {}",
            p.alphabet_size(),
            sample.alphabet_size()
        )));
    }
    let spec = Specification::from_potential_on(&p, &gamma).map_err(invalid)?;
    let kappa = parse_kappa(&args.kappa, args.alpha)?;
    let empirical = empirical_specification(&sample, &gamma).map_err(invalid)?;
    let typicality = typicality_check(&sample, &gamma, &spec, kappa).map_err(invalid)?;
    let max_deviation = empirical.max_deviation(&spec).map_err(invalid)?;
    let text = render_diagnose(&args.input, &sample, &empirical, &typicality, max_deviation);
    emit(&text, args.out.as_deref())
}

fn render_block(block: &[u8]) -> String {
    if block.is_empty() {
        return "-".into();
    }
    block
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_diagnose(
    input: &Path,
    sample: &Sample,
    empirical: &EmpiricalTable,
    typicality: &TypicalityReport,
    max_deviation: f64,
) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "command = diagnose");
    let _ = writeln!(text, "input = {}", input.display());
    let _ = writeln!(text, "region = {}", sample.region());
    let _ = writeln!(text, "volume = {}", sample.volume());
    let _ = writeln!(text, "alphabet = {}", empirical.alphabet);
    let _ = writeln!(text, "gamma = {}", empirical.gamma);
    let _ = writeln!(text, "gamma_size = {}", empirical.gamma.len());
    let _ = writeln!(text, "kappa = {}", typicality.kappa);
    let _ = writeln!(text, "blocks = {}", empirical.rows.len());
    let _ = writeln!(text, "max_deviation = {max_deviation}");
    let _ = writeln!(text, "worst_margin = {}", typicality.worst_margin);
    let _ = writeln!(text, "all_pass = {}", typicality.all_pass);
    let _ = writeln!(text);
    let _ = writeln!(text, "[empirical]");
    let mut header = String::from("block\tcount");
    for a in 0..empirical.alphabet {
        let _ = write!(header, "\tp{a}");
    }
    let _ = writeln!(text, "{header}");
    for (block, row) in &empirical.rows {
        let _ = write!(text, "{}\t{}", render_block(block), row.block_count);
        for p in &row.probs {
            let _ = write!(text, "\t{p}");
        }
        let _ = writeln!(text);
    }
    let _ = writeln!(text);
    let _ = writeln!(text, "[typicality]");
    let _ = writeln!(
        text,
        "block\tcenter\tcount\tratio\tq\tdeviation\tbound\tpass"
    );
    for record in &typicality.records {
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            render_block(&record.block),
            record.center,
            record.block_count,
            record.ratio,
            record.q,
            record.deviation,
            record.bound,
            record.pass
        );
    }
    text
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Lattice sizes, comma-separated, e.g. 32x32,64x64,128x128
    #[arg(long, value_parser = parse_dims, value_delimiter = ',', required = true)]
    sizes: Vec<Dims>,
    /// Replicates per size
    #[arg(long, default_value_t = 20)]
    replicates: u32,
    /// Master seed; each cell derives its own seed from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Retained sweeps after burn-in
    #[arg(long, default_value_t = 100)]
    sweeps: u32,
    /// Discarded initial sweeps (default: ten times the retained sweeps)
    #[arg(long)]
    burn_in: Option<u32>,
    /// Candidate radius
    #[arg(long)]
    radius: i64,
    /// Penalty multiplier
    #[arg(long, default_value_t = 1.0)]
    penalty_scale: f64,
    /// Allow radii beyond the window width; all candidates then score the region shrunk by the radius
    #[arg(long)]
    force_radius: bool,
    /// Evaluation route
    #[arg(long, value_enum, default_value = "auto")]
    evaluation: EvaluationArg,
    /// Cap on the number of candidates
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
    candidate_cap: u64,
    /// Per-replicate CSV output path
    #[arg(long)]
    csv: PathBuf,
}

/// How a selected neighborhood relates to the model's basic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Exact,
    Over,
    Under,
    Mixed,
}

impl Class {
    fn name(self) -> &'static str {
        match self {
            Class::Exact => "exact",
            Class::Over => "over",
            Class::Under => "under",
            Class::Mixed => "mixed",
        }
    }
}

fn classify(selected: &Neighborhood, truth: &Neighborhood) -> Class {
    if selected == truth {
        Class::Exact
    } else if truth.is_subset_of(selected) {
        Class::Over
    } else if selected.is_subset_of(truth) {
        Class::Under
    } else {
        Class::Mixed
    }
}

struct SweepRow {
    size: String,
    replicate: u32,
    seed: u64,
    selected: String,
    class: Class,
    margin: Option<f64>,
    wall_ms: u128,
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    if args.replicates == 0 {
        return Err(CliError::Validation("sweep needs at least one replicate".into()));
    }
    let dim = args.sizes[0].0.len();
    if args.sizes.iter().any(|size| size.0.len() != dim) {
        return Err(CliError::Validation(
            "all sizes must have the same number of axes".into(),
        ));
    }
    let p = args.model.build(dim)?;
    let truth = p.basic_neighborhood();
    let burn_in = args.burn_in.unwrap_or_else(|| default_burn_in(args.sweeps));
    let mut config = EstimateConfig::new(args.radius);
    config.penalty_scale = args.penalty_scale;
    config.force_radius = args.force_radius;
    config.evaluation = args.evaluation.into();
    config.candidate_cap = args.candidate_cap;

    let replicates = args.replicates as u64;
    let cells: Vec<(usize, u32)> = (0..args.sizes.len())
        .flat_map(|s| (0..args.replicates).map(move |r| (s, r)))
        .collect();
    let rows: Result<Vec<SweepRow>, CliError> = cells
        .par_iter()
        .map(|&(s, r)| {
            let seed = replicate_seed(args.seed, s as u64 * replicates + r as u64);
            let start = Instant::now();
            let sample =
                gibbs_sample(&p, &args.sizes[s].0, args.sweeps, burn_in, seed).map_err(invalid)?;
            let report = estimate(&sample, &config).map_err(invalid)?;
            let wall_ms = start.elapsed().as_millis();
            let selected = report.selected();
            Ok(SweepRow {
                size: args.sizes[s].to_string(),
                replicate: r,
                seed,
                selected: selected.to_string(),
                class: classify(selected, &truth),
                margin: report.runner_up_margin(),
                wall_ms,
            })
        })
        .collect();
    let rows = rows?;
    write_sweep_csv(&rows, &args.csv)?;
    print!("{}", render_sweep_summary(args, &truth, &rows));
    Ok(())
}

fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<(), CliError> {
    let csv_io = |err: csv::Error| CliError::io(path, std::io::Error::other(err));
    let mut writer = csv::Writer::from_path(path).map_err(csv_io)?;
    writer
        .write_record([
            "size",
            "replicate",
            "seed",
            "selected",
            "correct",
            "class",
            "margin",
            "wall_ms",
        ])
        .map_err(csv_io)?;
    for row in rows {
        writer
            .write_record([
                row.size.clone(),
                row.replicate.to_string(),
                row.seed.to_string(),
                row.selected.clone(),
                (row.class == Class::Exact).to_string(),
                row.class.name().to_string(),
                row.margin.map(|m| m.to_string()).unwrap_or_default(),
                row.wall_ms.to_string(),
            ])
            .map_err(csv_io)?;
    }
    writer
        .flush()
        .map_err(|err| CliError::io(path, err))
}

fn render_sweep_summary(args: &SweepArgs, truth: &Neighborhood, rows: &[SweepRow]) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "command = sweep");
    let _ = writeln!(text, "truth = {truth}");
    let sizes: Vec<String> = args.sizes.iter().map(|size| size.to_string()).collect();
    let _ = writeln!(text, "sizes = {}", sizes.join(","));
    let _ = writeln!(text, "replicates = {}", args.replicates);
    let _ = writeln!(text, "seed = {}", args.seed);
    let _ = writeln!(text, "radius = {}", args.radius);
    let _ = writeln!(text, "penalty_scale = {}", args.penalty_scale);
    let _ = writeln!(text, "rows = {}", rows.len());
    let _ = writeln!(text, "csv = {}", args.csv.display());
    let _ = writeln!(text);
    let _ = writeln!(text, "[summary]");
    let _ = writeln!(
        text,
        "size\tn\texact\tover\tunder\tmixed\trecovery\tover_rate\tunder_rate"
    );
    let per_size = args.replicates as usize;
    for (s, size) in args.sizes.iter().enumerate() {
        let group = &rows[s * per_size..(s + 1) * per_size];
        let tally = |class: Class| group.iter().filter(|row| row.class == class).count();
        let (exact, over, under, mixed) = (
            tally(Class::Exact),
            tally(Class::Over),
            tally(Class::Under),
            tally(Class::Mixed),
        );
        let n = group.len() as f64;
        let _ = writeln!(
            text,
            "{size}\t{}\t{exact}\t{over}\t{under}\t{mixed}\t{}\t{}\t{}",
            group.len(),
            exact as f64 / n,
            over as f64 / n,
            (under + mixed) as f64 / n
        );
    }
    text
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|err| CliError::io(path, err)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes a sample as text: the header line, a provenance comment when the
/// sample carries one, then one line of symbols per run of the last axis.
pub fn write_sample(sample: &Sample, path: &Path) -> Result<(), CliError> {
    if sample.region().lo().coords().iter().any(|&c| c != 0) {
        return Err(CliError::Validation(
            "sample files put the region origin at zero".into(),
        ));
    }
    let region = sample.region();
    let d = region.dim();
    let dims: Vec<String> = (0..d).map(|k| region.extent(k).to_string()).collect();
    let mut text = format!(
        "MRFS 1 d={} dims={} m={}\n",
        d,
        dims.join("x"),
        sample.alphabet_size()
    );
    if let Some(prov) = sample.provenance() {
        let _ = writeln!(
            text,
            "# provenance model={} seed={} sweeps={} burn_in={}",
            prov.model, prov.seed, prov.sweeps, prov.burn_in
        );
    }
    let row = region.extent(d - 1) as usize;
    for line in sample.symbols().chunks(row) {
        let rendered: Vec<String> = line.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(text, "{}", rendered.join(" "));
    }
    fs::write(path, text).map_err(|err| CliError::io(path, err))
}

/// Reads a sample file written by [`write_sample`].
pub fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let text = fs::read_to_string(path).map_err(|err| CliError::io(path, err))?;
    parse_sample(&text)
        .map_err(|msg| CliError::Validation(format!("{}: {msg}", path.display())))
}

fn header_field<'a>(token: &'a str, key: &str) -> Result<&'a str, String> {
    token
        .strip_prefix(key)
        .ok_or_else(|| format!("expected {key}<value>, got {token:?}"))
}

fn parse_sample(text: &str) -> Result<Sample, String> {
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            None => return Err("missing header line".into()),
            Some(line) if line.trim().is_empty() => continue,
            Some(line) => break line,
        }
    };
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 5 || tokens[0] != "MRFS" {
        return Err(format!("malformed header {header:?}"));
    }
    if tokens[1] != "1" {
        return Err(format!("unsupported format version {}", tokens[1]));
    }
    let d: usize = header_field(tokens[2], "d=")?
        .parse()
        .map_err(|_| format!("bad dimension count in {:?}", tokens[2]))?;
    let dims = parse_dims(header_field(tokens[3], "dims=")?)?;
    let m: usize = header_field(tokens[4], "m=")?
        .parse()
        .map_err(|_| format!("bad alphabet size in {:?}", tokens[4]))?;
    if dims.0.len() != d {
        return Err(format!(
            "header says d={d} but dims lists {} axes",
            dims.0.len()
        ));
    }
    let mut provenance = None;
    let mut symbols = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(body) = rest.trim_start().strip_prefix("provenance ") {
                provenance = Some(parse_provenance(body)?);
            }
            continue;
        }
        for token in line.split_whitespace() {
            symbols.push(
                token
                    .parse::<u8>()
                    .map_err(|_| format!("bad symbol {token:?}"))?,
            );
        }
    }
    let region = Region::from_dims(&dims.0).map_err(|err| err.to_string())?;
    let mut sample = Sample::new(region, m, symbols).map_err(|err| err.to_string())?;
    if let Some(prov) = provenance {
        sample = sample.with_provenance(prov);
    }
    Ok(sample)
}

fn parse_provenance(body: &str) -> Result<Provenance, String> {
    let mut model = None;
    let mut seed = None;
    let mut sweeps = None;
    let mut burn_in = None;
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| format!("bad provenance token {token:?}"))?;
        match key {
            "model" => model = Some(value.to_string()),
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| format!("bad provenance seed {value:?}"))?,
                )
            }
            "sweeps" => {
                sweeps = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| format!("bad provenance sweeps {value:?}"))?,
                )
            }
            "burn_in" => {
                burn_in = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| format!("bad provenance burn_in {value:?}"))?,
                )
            }
            _ => return Err(format!("unknown provenance key {key:?}")),
        }
    }
    match (model, seed, sweeps, burn_in) {
        (Some(model), Some(seed), Some(sweeps), Some(burn_in)) => Ok(Provenance {
            model,
            seed,
            sweeps,
            burn_in,
        }),
        _ => Err("provenance needs model, seed, sweeps, and burn_in".into()),
    }
}

/// Parses a neighborhood from offset syntax like `(0,1);(1,0)`; `-` is the
/// empty set. Coordinates are comma-separated integers inside parentheses,
/// offsets are separated by `;`, and the set is closed under negation; the
/// flag reports whether the input was already symmetric.
pub fn parse_gamma(text: &str, dim: usize) -> Result<(Neighborhood, bool), CliError> {
    if text == "-" {
        return Ok((Neighborhood::empty(dim), true));
    }
    let mut offsets = Vec::new();
    let mut pos = 0usize;
    for segment in text.split(';') {
        offsets.push(parse_offset(segment, pos, dim)?);
        pos += segment.len() + 1;
    }
    Neighborhood::symmetrized(dim, offsets).map_err(invalid)
}

fn parse_offset(segment: &str, pos: usize, dim: usize) -> Result<Site, CliError> {
    let inner = segment.strip_prefix('(').ok_or_else(|| {
        CliError::Validation(format!("gamma: expected '(' at byte {pos}"))
    })?;
    let inner = inner.strip_suffix(')').ok_or_else(|| {
        CliError::Validation(format!(
            "gamma: expected ')' at byte {}",
            pos + segment.len().saturating_sub(1)
        ))
    })?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != dim {
        return Err(CliError::Validation(format!(
            "gamma: offset at byte {pos} has {} coordinates, expected {dim}",
            parts.len()
        )));
    }
    let mut coords = Vec::with_capacity(dim);
    let mut coord_pos = pos + 1;
    for part in parts {
        let value: i64 = part.parse().map_err(|_| {
            CliError::Validation(format!(
                "gamma: bad coordinate {part:?} at byte {coord_pos}"
            ))
        })?;
        coords.push(value);
        coord_pos += part.len() + 1;
    }
    Ok(Site::new(coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ball;

    fn site(coords: &[i64]) -> Site {
        Site::new(coords.to_vec())
    }

    #[test]
    fn dims_parse_and_render() {
        assert_eq!(parse_dims("64x64").unwrap().0, vec![64, 64]);
        assert_eq!(parse_dims("7").unwrap().0, vec![7]);
        assert_eq!(parse_dims("2x3x4").unwrap().to_string(), "2x3x4");
        assert!(parse_dims("").is_err());
        assert!(parse_dims("64x").is_err());
        assert!(parse_dims("0x4").is_err());
        assert!(parse_dims("axb").is_err());
    }

    fn cross() -> Neighborhood {
        Neighborhood::new(
            2,
            vec![site(&[0, 1]), site(&[0, -1]), site(&[1, 0]), site(&[-1, 0])],
        )
        .unwrap()
    }

    #[test]
    fn gamma_parses_canonical_and_symmetrizes() {
        let (gamma, symmetric) = parse_gamma("(0,1);(0,-1);(1,0);(-1,0)", 2).unwrap();
        assert_eq!(gamma, cross());
        assert!(symmetric);
        let (gamma, symmetric) = parse_gamma("(0,1);(1,0)", 2).unwrap();
        assert_eq!(gamma, cross());
        assert!(!symmetric);
        let (empty, symmetric) = parse_gamma("-", 2).unwrap();
        assert!(empty.is_empty());
        assert!(symmetric);
    }

    #[test]
    fn gamma_errors_carry_byte_positions() {
        let err = parse_gamma("(1,0);1,0)", 2).unwrap_err().to_string();
        assert!(err.contains("byte 6"), "{err}");
        let err = parse_gamma("(1,0;(0,1)", 2).unwrap_err().to_string();
        assert!(err.contains("')'"), "{err}");
        let err = parse_gamma("(1,x)", 2).unwrap_err().to_string();
        assert!(err.contains("byte 3"), "{err}");
        let err = parse_gamma("(1)", 2).unwrap_err().to_string();
        assert!(err.contains("expected 2"), "{err}");
        let err = parse_gamma("(0,0)", 2).unwrap_err().to_string();
        assert!(err.contains("nonzero"), "{err}");
    }

    #[test]
    fn sample_files_round_trip() {
        let p = Potential::ising(2, 0.3).unwrap();
        let sample = gibbs_sample(&p, &[6, 5], 3, 3, 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sample.mrfs");
        write_sample(&sample, &path).unwrap();
        let back = read_sample(&path).unwrap();
        assert_eq!(back, sample);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("MRFS 1 d=2 dims=6x5 m=2\n"), "{text}");
        assert!(text.lines().nth(1).unwrap().starts_with("# provenance "));
    }

    #[test]
    fn sample_files_reject_malformed_input() {
        assert!(parse_sample("").is_err());
        assert!(parse_sample("MRFS 2 d=1 dims=4 m=2\n0 0 0 0\n").is_err());
        assert!(parse_sample("MRFS 1 d=2 dims=4 m=2\n0 0 0 0\n").is_err());
        assert!(parse_sample("MRFS 1 d=1 dims=4 m=2\n0 0 0\n").is_err());
        assert!(parse_sample("MRFS 1 d=1 dims=4 m=2\n0 0 2 0\n").is_err());
        assert!(parse_sample("MRFS 1 d=1 dims=4 m=2\n0 0 x 0\n").is_err());
        let ok = parse_sample("MRFS 1 d=1 dims=4 m=2\n\n0 1\n1 0\n").unwrap();
        assert_eq!(ok.symbols(), &[0, 1, 1, 0]);
        assert!(ok.provenance().is_none());
    }

    #[test]
    fn classification_matches_set_relations() {
        let truth = cross();
        let one_axis = Neighborhood::new(2, vec![site(&[0, 1]), site(&[0, -1])]).unwrap();
        let diagonal =
            Neighborhood::new(2, vec![site(&[1, 1]), site(&[-1, -1])]).unwrap();
        assert_eq!(classify(&cross(), &truth), Class::Exact);
        assert_eq!(classify(&ball(1, 2), &truth), Class::Over);
        assert_eq!(classify(&one_axis, &truth), Class::Under);
        assert_eq!(classify(&Neighborhood::empty(2), &truth), Class::Under);
        assert_eq!(classify(&diagonal, &truth), Class::Mixed);
    }

    #[test]
    fn kappa_parses_auto_and_fixed() {
        assert!(matches!(
            parse_kappa("auto", 0.5).unwrap(),
            KappaMode::Auto { alpha } if alpha == 0.5
        ));
        assert!(matches!(
            parse_kappa("2.5", 1.0).unwrap(),
            KappaMode::Fixed(k) if k == 2.5
        ));
        assert!(parse_kappa("auto", 0.0).is_err());
        assert!(parse_kappa("auto", 1.5).is_err());
        assert!(parse_kappa("-1", 1.0).is_err());
        assert!(parse_kappa("nan", 1.0).is_err());
    }

    #[test]
    fn provenance_lines_round_trip() {
        let prov = Provenance {
            model: "m=2;range=1;pairs[(0,1)=0.3;(1,0)=0.3];field[0,0]".into(),
            seed: 42,
            sweeps: 500,
            burn_in: 200,
        };
        let body = format!(
            "model={} seed={} sweeps={} burn_in={}",
            prov.model, prov.seed, prov.sweeps, prov.burn_in
        );
        assert_eq!(parse_provenance(&body).unwrap(), prov);
        assert!(parse_provenance("model=x seed=1 sweeps=2").is_err());
        assert!(parse_provenance("model=x seed=y sweeps=2 burn_in=3").is_err());
    }

    #[test]
    fn block_rendering_is_stable() {
        assert_eq!(render_block(&[]), "-");
        assert_eq!(render_block(&[0, 2, 1]), "0,2,1");
    }
}
