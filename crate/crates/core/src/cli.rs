//! Command-line interface: structural validation, single-syndrome
//! decoding, Monte-Carlo sweeps and hardware estimates.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qldpc::code::{
    build_layer_cover, no_stopping_subset_check, validate_css, CssCode, ErrorType, LayerCover,
    TannerGraph,
};
use qldpc::decoder::{DecoderConfig, FixedPointParams, LayerOrder, Schedule};
use qldpc::gf2::Syndrome;
use qldpc::harness::{self, Experiment, ExperimentConfig};
use qldpc::hwmodel::{self, ArchitectureSpec, PostProcessingStyle};
use qldpc::postprocess::{
    CheckAgnosiaDecoder, ExecutionContract, PostProcessConfig, PostProcessMode, ReliabilityMetric,
};
use qldpc::Error;

#[derive(Parser)]
#[command(
    name = "qldpc",
    version,
    about = "Quantized NMS decoding of CSS quantum LDPC codes with check-agnosia post-processing"
)]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = machine default).
    #[arg(long, global = true, env = "QLDPC_WORKERS")]
    workers: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a code's structure: dimensions, four-cycles, CSS commutation,
    /// stopping subsets, layer cover.
    Validate(ValidateArgs),
    /// Decode a single syndrome read from a file.
    Decode(DecodeArgs),
    /// Run a Monte-Carlo sweep described by a config file.
    Experiment(ExperimentArgs),
    /// Analytical worst-case latency and power of decoder architectures.
    Hwmodel(HwmodelArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Copy, Clone, ValueEnum)]
enum ErrorTypeArg {
    X,
    Z,
}

impl From<ErrorTypeArg> for ErrorType {
    fn from(v: ErrorTypeArg) -> Self {
        match v {
            ErrorTypeArg::X => ErrorType::X,
            ErrorTypeArg::Z => ErrorType::Z,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ScheduleArg {
    Flooded,
    Layered,
}

impl From<ScheduleArg> for Schedule {
    fn from(v: ScheduleArg) -> Self {
        match v {
            ScheduleArg::Flooded => Schedule::Flooded,
            ScheduleArg::Layered => Schedule::Layered,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum LayerOrderArg {
    Fixed,
    Random,
}

impl From<LayerOrderArg> for LayerOrder {
    fn from(v: LayerOrderArg) -> Self {
        match v {
            LayerOrderArg::Fixed => LayerOrder::Fixed,
            LayerOrderArg::Random => LayerOrder::Random,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum MetricArg {
    MinPairSum,
    AbsSum,
    Random,
}

impl From<MetricArg> for ReliabilityMetric {
    fn from(v: MetricArg) -> Self {
        match v {
            MetricArg::MinPairSum => ReliabilityMetric::MinPairSum,
            MetricArg::AbsSum => ReliabilityMetric::AbsSum,
            MetricArg::Random => ReliabilityMetric::Random,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Solver,
    MpOnly,
}

impl From<ModeArg> for PostProcessMode {
    fn from(v: ModeArg) -> Self {
        match v {
            ModeArg::Solver => PostProcessMode::Solver,
            ModeArg::MpOnly => PostProcessMode::MpOnly,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum ExecutionArg {
    Sequential,
    Parallel,
}

impl From<ExecutionArg> for ExecutionContract {
    fn from(v: ExecutionArg) -> Self {
        match v {
            ExecutionArg::Sequential => ExecutionContract::Sequential,
            ExecutionArg::Parallel => ExecutionContract::Parallel,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum PpStyleArg {
    HwReuse,
    Dedicated,
}

impl From<PpStyleArg> for PostProcessingStyle {
    fn from(v: PpStyleArg) -> Self {
        match v {
            PpStyleArg::HwReuse => PostProcessingStyle::HwReuse,
            PpStyleArg::Dedicated => PostProcessingStyle::Dedicated,
        }
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    hx: PathBuf,
    #[arg(long)]
    hz: PathBuf,
    #[arg(long)]
    layer_cover: Option<PathBuf>,
}

#[derive(Args)]
struct DecoderArgs {
    #[arg(long, value_enum, default_value_t = ScheduleArg::Flooded)]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = 60)]
    max_iterations: usize,
    #[arg(long, default_value_t = 3)]
    snapshot_iteration: usize,
    #[arg(long, default_value_t = 12)]
    llr_init: i32,
    #[arg(long, default_value_t = 0.875)]
    scale_factor: f64,
    #[arg(long, value_enum, default_value_t = LayerOrderArg::Fixed)]
    layer_order: LayerOrderArg,
    #[arg(long)]
    layer_cover: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    msg_bits: u32,
    #[arg(long, default_value_t = 8)]
    llr_bits: u32,
    #[arg(long, default_value_t = 10)]
    max_attempts: usize,
    #[arg(long, value_enum, default_value_t = MetricArg::MinPairSum)]
    metric: MetricArg,
    #[arg(long, value_enum, default_value_t = ModeArg::MpOnly)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ExecutionArg::Sequential)]
    execution: ExecutionArg,
    /// Skip post-processing (plain NMS decode).
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    hx: PathBuf,
    #[arg(long)]
    hz: PathBuf,
    #[arg(long, value_enum, default_value_t = ErrorTypeArg::X)]
    error_type: ErrorTypeArg,
    /// File holding the syndrome as whitespace-separated 0/1 bits.
    #[arg(long)]
    syndrome: PathBuf,
    #[command(flatten)]
    decoder: DecoderArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file (TOML, flat keys). See --print-config.
    #[arg(long, required_unless_present = "print_config")]
    config: Option<PathBuf>,
    /// Print the default configuration and exit.
    #[arg(long)]
    print_config: bool,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the p sweep (comma separated).
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HwmodelArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ScheduleArg::Flooded])]
    schedule: Vec<ScheduleArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PpStyleArg::HwReuse])]
    pp_style: Vec<PpStyleArg>,
    /// Clock frequency in Hz (e.g. 100e6).
    #[arg(long, value_delimiter = ',', default_values_t = [100e6])]
    clock_hz: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [30u32])]
    max_iterations: Vec<u32>,
    /// Defaults to max_iterations when omitted.
    #[arg(long, value_delimiter = ',')]
    snapshot_iteration: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', default_values_t = [3.5])]
    layers_per_iteration: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [10u32])]
    max_attempts: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [441u32])]
    n_checks: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [5.5])]
    unit_power_w: Vec<f64>,
    /// Additive sorter power in W (excluded when omitted).
    #[arg(long)]
    sorter_power_w: Option<f64>,
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> qldpc::Result<()> {
    match cli.command {
        Command::Validate(ref args) => validate(args),
        Command::Decode(ref args) => decode(args, cli.seed.unwrap_or(0), cli.format),
        Command::Experiment(ref args) => experiment(args, cli.seed, cli.workers, cli.format),
        Command::Hwmodel(ref args) => hw_model(args, cli.format),
    }
}

fn validate(args: &ValidateArgs) -> qldpc::Result<()> {
    let code = CssCode::from_alist_files(&args.hx, &args.hz)?;
    for (name, h) in [("hx", &code.h_x), ("hz", &code.h_z)] {
        println!("{name}: {} checks x {} qubits", h.n_checks(), h.n_qubits());
    }
    for (name, h) in [("hx", &code.h_x), ("hz", &code.h_z)] {
        println!(
            "four-cycle-free ({name}): {}",
            if h.has_four_cycles() { "no" } else { "yes" }
        );
    }
    println!(
        "css commutation: {}",
        if validate_css(&code) { "yes" } else { "no" }
    );
    for (name, h) in [("hx", &code.h_x), ("hz", &code.h_z)] {
        let graph = TannerGraph::new(h);
        let mut ok = 0usize;
        let mut max_rounds = 0usize;
        let mut violations = 0usize;
        for c in 0..h.n_checks() {
            let report = no_stopping_subset_check(&graph, c);
            if report.no_stopping_subset {
                ok += 1;
                max_rounds = max_rounds.max(report.rounds);
            } else {
                violations += 1;
            }
        }
        println!(
            "no-stopping-subset ({name}): {ok}/{} checks, max peeling rounds {max_rounds}{}",
            h.n_checks(),
            if violations > 0 {
                format!(", {violations} violating")
            } else {
                String::new()
            }
        );
        let isolated = graph.isolated_qubits();
        if !isolated.is_empty() {
            println!(
                "warning ({name}): {} isolated qubit(s), first {}",
                isolated.len(),
                isolated[0]
            );
        }
    }
    if let Some(path) = &args.layer_cover {
        // Covers apply to the decoding matrix of one error type; report
        // against both.
        for (name, h) in [("hx", &code.h_x), ("hz", &code.h_z)] {
            match LayerCover::from_file(h, path) {
                Ok(cover) => println!(
                    "layer cover ({name}): valid, {} layers covering {} iteration(s), {} layers/iteration",
                    cover.n_layers(),
                    cover.iterations_covered(),
                    cover.layers_per_iteration()
                ),
                Err(e) => println!("layer cover ({name}): invalid ({e})"),
            }
        }
    }
    Ok(())
}

fn read_syndrome(path: &PathBuf, n_checks: usize) -> qldpc::Result<Syndrome> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let bits: std::result::Result<Vec<u8>, _> = text
        .split_whitespace()
        .map(|t| match t {
            "0" => Ok(0u8),
            "1" => Ok(1u8),
            other => Err(Error::InvalidConfig(format!(
                "syndrome entries must be 0 or 1, got {other:?}"
            ))),
        })
        .collect();
    let bits = bits?;
    if bits.len() != n_checks {
        return Err(Error::DimensionMismatch {
            expected: n_checks,
            actual: bits.len(),
        });
    }
    Ok(Syndrome::from_bits(bits))
}

fn decoder_configs(args: &DecoderArgs) -> (DecoderConfig, PostProcessConfig) {
    let decoder = DecoderConfig {
        schedule: args.schedule.into(),
        max_iterations: args.max_iterations,
        scale_factor: args.scale_factor,
        llr_init: args.llr_init,
        layer_order: args.layer_order.into(),
        snapshot_iteration: args.snapshot_iteration,
        fixed_point: FixedPointParams {
            msg_bits: args.msg_bits,
            llr_bits: args.llr_bits,
        },
        snapshot_metric: ReliabilityMetric::from(args.metric).snapshot_metric(),
    };
    let pp = PostProcessConfig {
        max_attempts: args.max_attempts,
        metric: args.metric.into(),
        mode: args.mode.into(),
        execution: args.execution.into(),
        snapshot_iteration: args.snapshot_iteration,
    };
    (decoder, pp)
}

fn decode(args: &DecodeArgs, seed: u64, format: Format) -> qldpc::Result<()> {
    let code = CssCode::from_alist_files(&args.hx, &args.hz)?;
    let error_type: ErrorType = args.error_type.into();
    let h = code.decoding_matrix(error_type);
    let graph = TannerGraph::new(h);
    let syndrome = read_syndrome(&args.syndrome, h.n_checks())?;
    let cover = match Schedule::from(args.decoder.schedule) {
        Schedule::Flooded => None,
        Schedule::Layered => Some(match &args.decoder.layer_cover {
            Some(path) => LayerCover::from_file(h, path)?,
            None => build_layer_cover(h, 1)?,
        }),
    };
    let (decoder_cfg, pp_cfg) = decoder_configs(&args.decoder);
    let priors =
        qldpc::decoder::PriorVector::uniform(h.n_qubits(), decoder_cfg.llr_init);
    let mut ca = CheckAgnosiaDecoder::new(h, &graph, cover.as_ref(), decoder_cfg, pp_cfg)?;

    let estimate_string = |e: &qldpc::ErrorVector| -> String {
        e.bits().iter().map(|b| char::from(b'0' + b)).collect()
    };

    if args.decoder.baseline {
        let out = ca.decode_baseline(&syndrome, &priors, seed);
        match format {
            Format::Json => println!(
                "{}",
                serde_json::json!({
                    "converged": out.converged,
                    "iterations": out.iterations_used,
                    "estimate": estimate_string(&out.error_estimate),
                    "estimate_weight": out.error_estimate.weight(),
                })
            ),
            _ => {
                println!("converged: {}", if out.converged { "yes" } else { "no" });
                println!("iterations: {}", out.iterations_used);
                println!("estimate weight: {}", out.error_estimate.weight());
                println!("estimate: {}", estimate_string(&out.error_estimate));
            }
        }
    } else {
        let out = ca.decode(&syndrome, &priors, seed);
        let d = &out.diagnostics;
        match format {
            Format::Json => println!(
                "{}",
                serde_json::json!({
                    "decoded": out.decoded,
                    "initial_converged": d.initial_converged,
                    "initial_iterations": d.initial_iterations,
                    "winning_attempt": d.winning_attempt,
                    "attempts_run": d.attempts_run,
                    "solver_calls": d.solver_calls,
                    "solver_unsat": d.solver_unsat,
                    "estimate": estimate_string(&out.estimate),
                    "estimate_weight": out.estimate.weight(),
                })
            ),
            _ => {
                println!("decoded: {}", if out.decoded { "yes" } else { "no" });
                println!(
                    "initial decode: {} after {} iteration(s)",
                    if d.initial_converged { "converged" } else { "failed" },
                    d.initial_iterations
                );
                match d.winning_attempt {
                    Some(k) => println!("winning attempt: {k} of {}", d.attempts_run),
                    None => println!("winning attempt: none ({} run)", d.attempts_run),
                }
                if d.solver_calls > 0 {
                    println!(
                        "residual solver: {} call(s), {} unsatisfiable",
                        d.solver_calls, d.solver_unsat
                    );
                }
                println!("estimate weight: {}", out.estimate.weight());
                println!("estimate: {}", estimate_string(&out.estimate));
            }
        }
    }
    Ok(())
}

fn experiment(
    args: &ExperimentArgs,
    seed: Option<u64>,
    workers: Option<usize>,
    format: Format,
) -> qldpc::Result<()> {
    if args.print_config {
        print!("{}", ExperimentConfig::default().to_toml());
        return Ok(());
    }
    let path = args.config.as_ref().expect("enforced by clap");
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(workers) = workers {
        cfg.workers = workers;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(p) = &args.p {
        cfg.p = p.clone();
    }

    let experiment = Experiment::prepare(cfg.clone())?;
    for w in experiment.warnings() {
        eprintln!("warning: {w}");
    }
    let rows = experiment.run();

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?),
        None => Box::new(std::io::stdout()),
    };
    let io_err = |e: std::io::Error| Error::Io {
        path: args.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>")),
        source: e,
    };
    match format {
        Format::Json => harness::write_json(&cfg, &rows, &mut out).map_err(io_err)?,
        _ => harness::write_csv(&rows, &mut out).map_err(io_err)?,
    }
    Ok(())
}

fn trimmed(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn hw_model(args: &HwmodelArgs, format: Format) -> qldpc::Result<()> {
    let mut specs = Vec::new();
    for &schedule in &args.schedule {
        for &pp_style in &args.pp_style {
            for &clock_hz in &args.clock_hz {
                for &max_iterations in &args.max_iterations {
                    let snapshots = match &args.snapshot_iteration {
                        Some(list) => list.clone(),
                        None => vec![max_iterations],
                    };
                    for &snapshot_iteration in &snapshots {
                        for &layers_per_iteration in &args.layers_per_iteration {
                            for &max_attempts in &args.max_attempts {
                                for &n_checks in &args.n_checks {
                                    for &unit_power_w in &args.unit_power_w {
                                        specs.push(ArchitectureSpec {
                                            schedule: schedule.into(),
                                            pp_style: pp_style.into(),
                                            clock_hz,
                                            max_iterations,
                                            snapshot_iteration,
                                            layers_per_iteration,
                                            max_attempts,
                                            n_checks,
                                            unit_power_w,
                                            sorter_power_w: args.sorter_power_w,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let points = hwmodel::pareto_sweep(&specs)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&points).expect("serialize")),
        _ => {
            for point in &points {
                let spec = &point.spec;
                let est = &point.estimate;
                let schedule = match spec.schedule {
                    Schedule::Flooded => "flooded",
                    Schedule::Layered => "layered",
                };
                let style = match spec.pp_style {
                    PostProcessingStyle::HwReuse => "hw-reuse",
                    PostProcessingStyle::Dedicated => "dedicated",
                };
                println!(
                    "{schedule} {style} (i_max={}, snapshot={}, attempts={}): {} cycles ({} + {} + {}), {} us / {} W{}",
                    spec.max_iterations,
                    spec.snapshot_iteration,
                    spec.max_attempts,
                    trimmed(est.cycles),
                    trimmed(est.breakdown.initial_mp),
                    trimmed(est.breakdown.sorter),
                    trimmed(est.breakdown.post_processing),
                    trimmed(est.latency_s * 1e6),
                    trimmed(est.power_w),
                    if point.pareto { " [pareto]" } else { "" }
                );
            }
        }
    }
    Ok(())
}
