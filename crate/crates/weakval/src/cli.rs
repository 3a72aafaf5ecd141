//! Argument parsing and subcommand execution.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use weakval_core::aav::{ProtocolConfig, ProtocolPlan, ProtocolReport, Readout};
use weakval_core::pointer::{gaussian_packet, Grid, DEFAULT_POINTS};
use weakval_core::qkernel::{Operator, StateVector};
use weakval_core::scenarios::{
    cheshire_report_with, cheshire_setup, guidance_velocity_oracle, CheshireReport, VelocityField, WisemanConfig,
    WisemanPlan,
};
use weakval_core::selection_bias::{
    berkson_conditional_correlation, superpose, BerksonConfig, BerksonOutcome, BerksonPlan, FourierTarget,
    PendulumOutcome, PendulumPlan, PendulumRanges,
};
use weakval_core::weakvalue::{extract_via_weak_operators_with_eps, weak_value_with_eps, Method};
use weakval_core::{Error, C64, DEFAULT_OVERLAP_EPS};

use crate::formats::{parse_operator, parse_state};
use crate::parallel::{run_parallel, with_threads};
use crate::report::{open_output, write_csv, write_json, Meta, Report, TOOL, VERSION};
use crate::uniformity::MarginalUniformity;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "weakval", version, about = "Weak values, weak measurements and post-selection simulations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Root seed for every random stream
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Reduced Planck constant
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Output file; standard output if omitted
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; defaults to the available parallelism
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact weak value of an observable between a pre- and post-selected state
    WeakValue(WeakValueArgs),
    /// Monte Carlo weak measurement with a Gaussian pointer
    AavSim(AavSimArgs),
    /// Path and polarisation weak values in a two-arm interferometer
    Cheshire(CheshireArgs),
    /// Weak-velocity field of a Gaussian packet against the guidance field
    Bohmian(BohmianArgs),
    /// Selection-bias demonstrations
    Bias(BiasArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::WeakValue(_) => "weak-value",
            Command::AavSim(_) => "aav-sim",
            Command::Cheshire(_) => "cheshire",
            Command::Bohmian(_) => "bohmian",
            Command::Bias(_) => "bias",
        }
    }

    fn args_json(&self) -> Result<Value, CliError> {
        Ok(match self {
            Command::WeakValue(a) => serde_json::to_value(a)?,
            Command::AavSim(a) => serde_json::to_value(a)?,
            Command::Cheshire(a) => serde_json::to_value(a)?,
            Command::Bohmian(a) => serde_json::to_value(a)?,
            Command::Bias(a) => serde_json::to_value(a)?,
        })
    }
}

/// Accepts plain integers and integral scientific notation such as `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("{s:?} is not a non-negative integer")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMethod {
    Direct,
    WeakOperator,
}

#[derive(Debug, Args, Serialize)]
pub struct SystemArgs {
    /// Preset (sigma_x, sigma_y, sigma_z, projector0, projector1, identity) or JSON matrix of rows
    #[arg(long)]
    pub observable: String,
    /// Preset (zero, one, plus, minus, plus_i, minus_i) or JSON vector; normalised on input
    #[arg(long)]
    pub pre: String,
    /// Post-selected state, same syntax as --pre
    #[arg(long)]
    pub post: String,
    /// Hilbert-space dimension; sizes the identity preset and is checked against the inputs
    #[arg(long)]
    pub dim: Option<usize>,
}

impl SystemArgs {
    fn load(&self) -> Result<(Operator, StateVector, StateVector), CliError> {
        let a = parse_operator(&self.observable, self.dim)?;
        let pre = parse_state(&self.pre)?;
        let post = parse_state(&self.post)?;
        let dim = self.dim.unwrap_or(a.dim());
        a.ensure_dim(dim)?;
        for s in [&pre, &post] {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim() }.into());
            }
        }
        Ok((a, pre, post))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct WeakValueArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value_t = ExactMethod::Direct)]
    pub method: ExactMethod,
    /// Smallest |<post|pre>| for which the weak value is reported
    #[arg(long, default_value_t = DEFAULT_OVERLAP_EPS)]
    pub overlap_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutArg {
    P,
    Q,
}

impl From<ReadoutArg> for Readout {
    fn from(r: ReadoutArg) -> Self {
        match r {
            ReadoutArg::P => Readout::P,
            ReadoutArg::Q => Readout::Q,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AavSimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Pointer coordinate width
    #[arg(long, default_value_t = 0.05)]
    pub sigma_q: f64,
    #[arg(long, default_value = "100000", value_parser = parse_count)]
    pub attempts: u64,
    /// Pointer variable read out after post-selection
    #[arg(long, value_enum, default_value_t = ReadoutArg::P)]
    pub readout: ReadoutArg,
    /// Pointer grid points (power of two); default grid if neither this nor --box is given
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Pointer grid length
    #[arg(long = "box")]
    pub box_length: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheshireArgs {
    #[arg(long, default_value_t = 0.05)]
    pub sigma_q: f64,
    /// Attempts per observable and readout
    #[arg(long, default_value = "400000", value_parser = parse_count)]
    pub attempts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityMode {
    /// Monte Carlo over weak/strong outcome pairs
    Mc,
    /// Exact conditional means, no sampling
    Exact,
}

#[derive(Debug, Args, Serialize)]
pub struct BohmianArgs {
    #[arg(long, value_enum, default_value_t = VelocityMode::Mc)]
    pub mode: VelocityMode,
    /// Packet width
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x: f64,
    /// Carrier wavenumber
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    /// Time between the weak and the strong position measurement
    #[arg(long, default_value_t = 0.025)]
    pub tau: f64,
    /// Probe coordinate width
    #[arg(long, default_value_t = 0.05)]
    pub sigma_q: f64,
    #[arg(long, default_value = "1000000", value_parser = parse_count)]
    pub attempts: u64,
    #[arg(long, default_value_t = 21)]
    pub bins: usize,
    /// Bins with fewer samples are reported absent
    #[arg(long, default_value_t = 100)]
    pub min_occupancy: u64,
    #[arg(long, default_value_t = 1024)]
    pub grid_points: usize,
    #[arg(long = "box", default_value_t = 40.0)]
    pub box_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasMode {
    Pendulum,
    Berkson,
}

#[derive(Debug, Args, Serialize)]
pub struct BiasArgs {
    #[arg(long, value_enum, default_value_t = BiasMode::Pendulum)]
    pub mode: BiasMode,
    /// Ensemble size (default 1e6 pendulums or 1e5 subjects)
    #[arg(long, value_parser = parse_count)]
    pub n: Option<u64>,
    /// Base rate of the first trait (berkson)
    #[arg(long, default_value_t = 0.2)]
    pub rate_a: f64,
    /// Base rate of the second trait (berkson)
    #[arg(long, default_value_t = 0.2)]
    pub rate_b: f64,
}

#[derive(Debug, Serialize)]
pub struct WeakValueOutput {
    pub re: f64,
    pub im: f64,
    pub value: C64,
    pub overlap: C64,
    pub overlap_abs: f64,
    pub method: Method,
}

#[derive(Debug, Serialize)]
struct WeakValueRow {
    re: f64,
    im: f64,
    overlap_abs: f64,
    method: Method,
}

#[derive(Debug, Serialize)]
struct DensityRow {
    coordinate_or_momentum: f64,
    density: f64,
}

#[derive(Debug, Serialize)]
struct CheshireRow {
    label: String,
    exact_re: f64,
    exact_im: f64,
    estimate_re: f64,
    estimate_im: f64,
    stderr_re: Option<f64>,
    stderr_im: Option<f64>,
    postselected_p: u64,
    postselected_q: u64,
}

#[derive(Debug, Serialize)]
pub struct BohmianOutput {
    pub mode: VelocityMode,
    pub field: VelocityField,
    pub oracle: VelocityField,
    /// Mean |field - oracle| over bins present in both.
    pub mean_abs_deviation: Option<f64>,
    /// As above, restricted to bins within one packet width of the centre.
    pub central_mean_abs_deviation: Option<f64>,
    pub probe_points: usize,
    pub probe_length: f64,
}

#[derive(Debug, Serialize)]
struct VelocityRow {
    bin_center: f64,
    velocity: Option<f64>,
    count: u64,
}

#[derive(Debug, Serialize)]
pub struct PendulumOutput {
    pub target: FourierTarget,
    pub outcome: PendulumOutcome,
    pub uniformity: MarginalUniformity,
}

#[derive(Debug, Serialize)]
struct WaveformRow {
    t: f64,
    target: f64,
    reconstructed: f64,
}

#[derive(Debug, Serialize)]
pub struct BerksonOutput {
    pub rate_a: f64,
    pub rate_b: f64,
    pub outcome: BerksonOutcome,
    /// Closed-form correlation among admitted subjects.
    pub r_conditional_expected: f64,
}

#[derive(Debug, Serialize)]
struct BerksonRow {
    n: u64,
    n_admitted: u64,
    r_unconditional: f64,
    r_conditional: f64,
    r_conditional_expected: f64,
}

type CsvWriter = Box<dyn FnOnce(&mut dyn std::io::Write) -> Result<(), CliError>>;

/// A computed result with its JSON body and CSV writer.
struct Outcome {
    json: Value,
    csv: CsvWriter,
}

impl Outcome {
    fn new<T, R>(result: &T, rows: Vec<R>) -> Result<Self, CliError>
    where
        T: Serialize,
        R: Serialize + 'static,
    {
        Ok(Self { json: serde_json::to_value(result)?, csv: Box::new(move |out| write_csv(out, rows)) })
    }
}

/// Runs a parsed command line and writes its report.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let g = &cli.global;
    if !(g.hbar > 0.0 && g.hbar.is_finite()) {
        return Err(CliError::Input(format!("--hbar {} must be positive", g.hbar)));
    }
    if g.threads == Some(0) {
        return Err(CliError::Input("--threads must be at least 1".into()));
    }
    let outcome = match &cli.command {
        Command::WeakValue(a) => weak_value_cmd(a)?,
        Command::AavSim(a) => aav_sim_cmd(a, g)?,
        Command::Cheshire(a) => cheshire_cmd(a, g)?,
        Command::Bohmian(a) => bohmian_cmd(a, g)?,
        Command::Bias(a) => bias_cmd(a, g)?,
    };
    let mut out = open_output(g.out.as_deref())?;
    match g.format {
        Format::Csv => (outcome.csv)(&mut *out),
        Format::Json => {
            let mut config = cli.command.args_json()?;
            if let (Value::Object(map), Value::Object(globals)) = (&mut config, serde_json::to_value(g)?) {
                map.extend(globals);
            }
            let meta = Meta {
                tool: TOOL,
                version: VERSION,
                subcommand: cli.command.name(),
                seed: g.seed,
                hbar: g.hbar,
                config,
                duration_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            write_json(&mut *out, &Report { meta, result: outcome.json })
        }
    }
}

fn weak_value_cmd(args: &WeakValueArgs) -> Result<Outcome, CliError> {
    let (a, pre, post) = args.system.load()?;
    let r = match args.method {
        ExactMethod::Direct => weak_value_with_eps(&a, &pre, &post, args.overlap_eps)?,
        ExactMethod::WeakOperator => extract_via_weak_operators_with_eps(&a, &pre, &post, args.overlap_eps)?,
    };
    let output = WeakValueOutput {
        re: r.value.re,
        im: r.value.im,
        value: r.value,
        overlap: r.overlap,
        overlap_abs: r.overlap.norm(),
        method: r.method,
    };
    let row = WeakValueRow { re: output.re, im: output.im, overlap_abs: output.overlap_abs, method: output.method };
    Outcome::new(&output, vec![row])
}

fn aav_sim_cmd(args: &AavSimArgs, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let (a, pre, post) = args.system.load()?;
    let mut config = ProtocolConfig::new(args.sigma_q, args.attempts, g.seed, args.readout.into());
    config.hbar = g.hbar;
    if args.grid_points.is_some() || args.box_length.is_some() {
        let n = args.grid_points.unwrap_or(DEFAULT_POINTS);
        let length = args.box_length.unwrap_or(2.0 * (std::f64::consts::PI * n as f64).sqrt() * args.sigma_q);
        config.grid = Some(Grid::new(n, length, g.hbar)?);
    }
    let plan = ProtocolPlan::new(&a, &pre, &post, config)?;
    let report: ProtocolReport = with_threads(g.threads, || run_parallel(&plan))??;
    let rows = plan
        .readout_state()
        .density_table()
        .into_iter()
        .map(|(x, density)| DensityRow { coordinate_or_momentum: x, density })
        .collect();
    Outcome::new(&report, rows)
}

fn cheshire_cmd(args: &CheshireArgs, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let setup = cheshire_setup();
    let report: CheshireReport = with_threads(g.threads, || {
        cheshire_report_with(&setup, args.sigma_q, args.attempts, g.seed, g.hbar, run_parallel)
    })??;
    let rows: Vec<CheshireRow> = report
        .entries
        .iter()
        .map(|e| CheshireRow {
            label: e.label.clone(),
            exact_re: e.exact.re,
            exact_im: e.exact.im,
            estimate_re: e.estimate.value.re,
            estimate_im: e.estimate.value.im,
            stderr_re: e.estimate.stderr_re,
            stderr_im: e.estimate.stderr_im,
            postselected_p: e.p_run.n_postselected,
            postselected_q: e.q_run.n_postselected,
        })
        .collect();
    Outcome::new(&report, rows)
}

fn bohmian_cmd(args: &BohmianArgs, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let system = Grid::new(args.grid_points, args.box_length, g.hbar)?;
    let psi = gaussian_packet(&system, args.sigma_x, 0.0, args.k)?;
    let mut config = WisemanConfig::new(args.mass, args.tau, args.sigma_q, args.attempts, g.seed);
    config.bins = args.bins;
    config.min_occupancy = args.min_occupancy;
    let plan = WisemanPlan::new(&psi, config)?;
    let field = match args.mode {
        VelocityMode::Mc => with_threads(g.threads, || run_parallel(&plan))?,
        VelocityMode::Exact => plan.exact_field(),
    };
    let oracle = guidance_velocity_oracle(&psi, args.mass, plan.binning())?;
    let half_width = psi.std_dev();
    let output = BohmianOutput {
        mode: args.mode,
        mean_abs_deviation: field.mean_abs_deviation(&oracle, |_| true),
        central_mean_abs_deviation: field.mean_abs_deviation(&oracle, |c| c.abs() <= half_width),
        probe_points: plan.probe_grid().n(),
        probe_length: plan.probe_grid().length(),
        field,
        oracle,
    };
    let f = &output.field;
    let rows = f
        .bin_centers
        .iter()
        .zip(&f.velocities)
        .zip(&f.counts)
        .map(|((&bin_center, &velocity), &count)| VelocityRow { bin_center, velocity, count })
        .collect();
    Outcome::new(&output, rows)
}

fn bias_cmd(args: &BiasArgs, g: &GlobalArgs) -> Result<Outcome, CliError> {
    match args.mode {
        BiasMode::Pendulum => {
            let target = FourierTarget::default_chord();
            let n = args.n.unwrap_or(1_000_000);
            let plan = PendulumPlan::new(n, target.clone(), PendulumRanges::default(), g.seed)?;
            let outcome = with_threads(g.threads, || run_parallel(&plan))??;
            let times = target.sample_times();
            let rows = times
                .iter()
                .zip(target.waveform(&times))
                .zip(superpose(&outcome.representatives, &times))
                .map(|((&t, target), reconstructed)| WaveformRow { t, target, reconstructed })
                .collect();
            let uniformity = MarginalUniformity::of(&outcome.marginals);
            Outcome::new(&PendulumOutput { target, outcome, uniformity }, rows)
        }
        BiasMode::Berkson => {
            let config = BerksonConfig { rate_a: args.rate_a, rate_b: args.rate_b };
            let plan = BerksonPlan::new(args.n.unwrap_or(100_000), config, g.seed)?;
            let outcome = with_threads(g.threads, || run_parallel(&plan))??;
            let expected = berkson_conditional_correlation(args.rate_a, args.rate_b);
            let row = BerksonRow {
                n: outcome.n,
                n_admitted: outcome.n_admitted,
                r_unconditional: outcome.r_unconditional,
                r_conditional: outcome.r_conditional,
                r_conditional_expected: expected,
            };
            let output =
                BerksonOutput { rate_a: args.rate_a, rate_b: args.rate_b, outcome, r_conditional_expected: expected };
            Outcome::new(&output, vec![row])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn dimension_flag_is_checked() {
        let args = SystemArgs { observable: "sigma_z".into(), pre: "plus".into(), post: "zero".into(), dim: Some(3) };
        assert!(matches!(args.load(), Err(CliError::Domain(Error::DimensionMismatch { .. }))));
        let args = SystemArgs { observable: "identity".into(), pre: "[1,0,0]".into(), post: "[1,1,1]".into(), dim: Some(3) };
        assert!(args.load().is_ok());
    }
}
