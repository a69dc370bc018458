//! `mcsa` — command-line front end for the MCSA toolkit.
//!
//! Subcommands cover the whole pipeline: waveform synthesis, sideband
//! prediction and table matching, spectral analysis with feature extraction,
//! classifier training and inference, acquisition-chain emulation, and the
//! canonical fixture tables. Every output file gets a `<file>.manifest`
//! recording the command, parameters, and input digests; identical flags,
//! inputs, and seeds produce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 check failure (a `--match-case` miss), 2
//! usage/input error, 3 numeric divergence during training.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mcsa_core::ann::{
    accuracy, classify_with_threshold, init_model, train, Activation, TrainConfig,
    DEFAULT_REJECT_THRESHOLD,
};
use mcsa_core::daq::{capture, dequantize, AdcConfig, Channel, ConditioningChain};
use mcsa_core::features::{
    builtin_fixtures, extract_features, find_case, load_fixtures, FixtureCase, FixtureTable,
    Normalize, CANONICAL_FIXTURES,
};
use mcsa_core::io;
use mcsa_core::motor::{
    compute_slip, fault_from_tables, synthesize, FaultLabel, FaultSignature, MotorParams,
    SpectralComponent, Waveform,
};
use mcsa_core::sideband::{
    broken_bar_sidebands, flux_harmonics, match_table, NSchedule, SidebandGrid,
};
use mcsa_core::spectrum::{transform, Window};
use mcsa_core::Error as CoreError;

mod manifest;
use manifest::Manifest;

#[derive(Parser)]
#[command(name = "mcsa", version, about = "Motor current signature analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a healthy or faulted stator-current waveform.
    Synth(SynthArgs),
    /// Predict sideband frequency grids; optionally match a fixture table.
    Sidebands(SidebandsArgs),
    /// Transform a waveform and extract sideband features.
    Analyze(AnalyzeArgs),
    /// Train the fault classifier on a feature dataset.
    Train(TrainArgs),
    /// Classify feature vectors with a trained model.
    Classify(ClassifyArgs),
    /// Emulate the acquisition chain (encode) or decode a capture file.
    #[command(subcommand)]
    Daq(DaqCommand),
    /// Print or write the canonical harmonic fixture tables.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Supply frequency f1 in Hz.
    #[arg(long, default_value_t = 50.0)]
    f1: f64,
    /// Synchronous speed in rpm.
    #[arg(long, default_value_t = 3000.0)]
    ns: f64,
    /// Rotor speed in rpm (defaults to synchronous).
    #[arg(long)]
    nr: Option<f64>,
    /// Fault condition: healthy, ten_turns, thirty_turns, or custom.
    #[arg(long, default_value = "healthy")]
    fault: String,
    /// Custom component as `freq_hz,amplitude[,phase_rad]`; repeatable.
    #[arg(long = "component")]
    components: Vec<String>,
    /// Fundamental amplitude.
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 3250.0)]
    fs: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 390)]
    n: usize,
    /// Additive Gaussian noise sigma.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixture file overriding the built-in tables.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Output waveform file (WFM-CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SidebandsArgs {
    /// Slip; alternative to --nr.
    #[arg(long)]
    s: Option<f64>,
    /// Synchronous speed in rpm.
    #[arg(long, default_value_t = 3000.0)]
    ns: f64,
    /// Rotor speed in rpm.
    #[arg(long)]
    nr: Option<f64>,
    /// Pole pairs.
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Supply frequency in Hz.
    #[arg(long, default_value_t = 50.0)]
    f: f64,
    /// Largest harmonic order (odd k from 1).
    #[arg(long = "k-max", default_value_t = 21)]
    k_max: u32,
    /// n-schedule: n1 or half.
    #[arg(long, default_value = "n1")]
    schedule: String,
    /// Use the broken-rotor-bar pair instead of flux harmonics.
    #[arg(long, default_value_t = false)]
    broken_bar: bool,
    /// Match the grid against a fixture case (ten_turns or thirty_turns).
    #[arg(long = "match-case")]
    match_case: Option<String>,
    /// Frequency tolerance for --match-case, in Hz.
    #[arg(long, default_value_t = 1.0)]
    tol: f64,
    /// Fixture file overriding the built-in tables.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Write the grid or match report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input waveform (WFM-CSV).
    #[arg(long = "in")]
    input: PathBuf,
    /// Analysis window: hann or rect.
    #[arg(long, default_value = "hann")]
    window: String,
    /// Transform length; defaults to the waveform length.
    #[arg(long = "n-fft")]
    n_fft: Option<usize>,
    /// Where extraction frequencies come from: flags or fixture.
    #[arg(long = "grid-from", default_value = "flags")]
    grid_from: String,
    /// Fixture case for --grid-from fixture.
    #[arg(long)]
    case: Option<String>,
    /// Slip for --grid-from flags; alternative to --nr.
    #[arg(long)]
    s: Option<f64>,
    /// Synchronous speed in rpm.
    #[arg(long, default_value_t = 3000.0)]
    ns: f64,
    /// Rotor speed in rpm.
    #[arg(long)]
    nr: Option<f64>,
    /// Pole pairs.
    #[arg(long, default_value_t = 1)]
    p: u32,
    /// Supply frequency in Hz.
    #[arg(long, default_value_t = 50.0)]
    f: f64,
    /// Largest harmonic order in the feature layout.
    #[arg(long = "k-max", default_value_t = 9)]
    k_max: u32,
    /// n-schedule for --grid-from flags: n1 or half.
    #[arg(long, default_value = "n1")]
    schedule: String,
    /// Feature normalization: none or by_fundamental.
    #[arg(long, default_value = "by_fundamental")]
    normalize: String,
    /// Stamp the emitted feature row with a fault label (for training data).
    #[arg(long)]
    label: Option<String>,
    /// Fixture file overriding the built-in tables.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Prefix for `<prefix>.spectrum.csv` and `<prefix>.features.csv`.
    #[arg(long = "out-prefix")]
    out_prefix: String,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled feature dataset (CSV).
    #[arg(long)]
    data: PathBuf,
    /// Hidden layer width.
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    /// Output classes.
    #[arg(long, default_value_t = 3)]
    classes: usize,
    /// Hidden activation: sigmoid or tanh.
    #[arg(long, default_value = "sigmoid")]
    activation: String,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Loss history CSV; defaults to `<out>.loss.csv`.
    #[arg(long = "loss-out")]
    loss_out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Feature vectors to classify (dataset CSV; labels ignored).
    #[arg(long)]
    features: PathBuf,
    /// Confidence below this is flagged uncertain.
    #[arg(long, default_value_t = DEFAULT_REJECT_THRESHOLD)]
    threshold: f64,
}

#[derive(Subcommand)]
enum DaqCommand {
    /// Run a waveform through the acquisition chain into a capture file.
    Encode(DaqEncodeArgs),
    /// Decode a capture file back to a voltage waveform.
    Decode(DaqDecodeArgs),
}

#[derive(Args)]
struct DaqEncodeArgs {
    /// Input physical waveform (amps or rpm, WFM-CSV).
    #[arg(long = "in")]
    input: PathBuf,
    /// Acquisition channel: current or speed.
    #[arg(long, default_value = "current")]
    channel: String,
    /// Output capture file (DAQ-CAP v1).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DaqDecodeArgs {
    /// Input capture file (DAQ-CAP v1).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output voltage waveform (WFM-CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FixturesArgs {
    /// Write the tables here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err.downcast_ref::<CoreError>() {
                Some(CoreError::Divergence { .. }) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Sidebands(args) => cmd_sidebands(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Train(args) => cmd_train(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Daq(DaqCommand::Encode(args)) => cmd_daq_encode(args),
        Command::Daq(DaqCommand::Decode(args)) => cmd_daq_decode(args),
        Command::Fixtures(args) => cmd_fixtures(args),
    }
}

// ─── Shared helpers ─────────────────────────────────────────────────────────

fn load_fixture_tables(path: &Option<PathBuf>) -> anyhow::Result<Vec<FixtureTable>> {
    match path {
        Some(p) => Ok(load_fixtures(&std::fs::read_to_string(p)?)?),
        None => Ok(builtin_fixtures()),
    }
}

fn slip_value(s: Option<f64>, ns: f64, nr: Option<f64>) -> anyhow::Result<f64> {
    match (s, nr) {
        (Some(slip), None) => Ok(slip),
        (None, Some(nr)) => {
            if !ns.is_finite() || ns <= 0.0 {
                anyhow::bail!("--ns must be positive");
            }
            if nr < 0.0 || nr > ns {
                anyhow::bail!("--nr {nr} must lie in [0, --ns {ns}]");
            }
            Ok((ns - nr) / ns)
        }
        (Some(_), Some(_)) => anyhow::bail!("give either --s or --nr, not both"),
        (None, None) => anyhow::bail!("one of --s or --nr is required"),
    }
}

fn odd_k_values(k_max: u32) -> anyhow::Result<Vec<u32>> {
    if k_max < 1 {
        anyhow::bail!("--k-max must be >= 1");
    }
    Ok((1..=k_max).step_by(2).collect())
}

fn grid_csv(grid: &SidebandGrid) -> String {
    let mut out = String::from("k,branch,n,freq_hz,reflected\n");
    for e in grid.entries() {
        out.push_str(&format!(
            "{},{},{},{:.17e},{}\n",
            e.k, e.branch, e.n, e.freq_hz, e.reflected
        ));
    }
    out
}

// ─── synth ──────────────────────────────────────────────────────────────────

fn parse_component(spec: &str) -> anyhow::Result<SpectralComponent> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 && parts.len() != 3 {
        anyhow::bail!("--component needs freq_hz,amplitude[,phase_rad], got `{spec}`");
    }
    let parse = |field: &str, what: &str| -> anyhow::Result<f64> {
        field
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("--component: cannot parse {what} from `{field}`"))
    };
    Ok(SpectralComponent {
        freq_hz: parse(parts[0], "frequency")?,
        amplitude: parse(parts[1], "amplitude")?,
        phase_rad: if parts.len() == 3 {
            parse(parts[2], "phase")?
        } else {
            0.0
        },
    })
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<ExitCode> {
    let pole_pairs = (60.0 * args.f1 / args.ns).round().max(1.0) as u32;
    let params = MotorParams::new(pole_pairs, args.f1, args.ns, 2.2, 8.0)
        .map_err(|e| anyhow::anyhow!("--f1/--ns: {e}"))?;
    let nr = args.nr.unwrap_or(args.ns);
    let slip = compute_slip(&params, nr).map_err(|e| anyhow::anyhow!("--nr: {e}"))?;

    if !args.components.is_empty() && args.fault != "custom" {
        anyhow::bail!("--component only applies with --fault custom");
    }
    let fault = match args.fault.as_str() {
        "healthy" => FaultSignature::healthy(),
        "ten_turns" | "thirty_turns" => {
            let tables = load_fixture_tables(&args.fixtures)?;
            fault_from_tables(FixtureCase::parse(&args.fault)?, &tables)?
        }
        "custom" => {
            if args.components.is_empty() {
                anyhow::bail!("--fault custom requires at least one --component");
            }
            let components = args
                .components
                .iter()
                .map(|c| parse_component(c))
                .collect::<anyhow::Result<Vec<_>>>()?;
            FaultSignature::new(FaultLabel::InterTurnMinor, components)?
        }
        other => anyhow::bail!(
            "--fault must be healthy, ten_turns, thirty_turns, or custom, got `{other}`"
        ),
    };

    let w = synthesize(
        &params, &slip, &fault, args.amp, args.fs, args.n, args.noise, args.seed,
    )?;
    io::write_waveform(&args.out, &w)?;
    Manifest::new("synth")
        .param("f1", args.f1)
        .param("ns", args.ns)
        .param("nr", nr)
        .param("fault", &args.fault)
        .param("amp", args.amp)
        .param("fs", args.fs)
        .param("n", args.n)
        .param("noise", args.noise)
        .param("seed", args.seed)
        .inputs(args.fixtures.iter())?
        .write_for(&args.out)?;
    println!(
        "wrote {} samples at {} Hz to {}",
        w.len(),
        w.sample_rate_hz(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

// ─── sidebands ──────────────────────────────────────────────────────────────

fn cmd_sidebands(args: SidebandsArgs) -> anyhow::Result<ExitCode> {
    let slip = slip_value(args.s, args.ns, args.nr)?;
    let schedule = NSchedule::parse(&args.schedule)?;
    let grid = if args.broken_bar {
        broken_bar_sidebands(slip, args.f, &(1..=args.k_max.max(1)).collect::<Vec<_>>())?
    } else {
        flux_harmonics(slip, args.p, args.f, &odd_k_values(args.k_max)?, schedule)?
    };

    let manifest = || -> anyhow::Result<Manifest> {
        let mut m = Manifest::new("sidebands")
            .param("slip", slip)
            .param("p", args.p)
            .param("f", args.f)
            .param("k_max", args.k_max)
            .param("schedule", &args.schedule)
            .param("broken_bar", args.broken_bar);
        if let Some(case) = &args.match_case {
            m = m.param("match_case", case).param("tol", args.tol);
        }
        m.inputs(args.fixtures.iter())
    };

    let Some(case_str) = args.match_case.as_deref() else {
        let text = grid_csv(&grid);
        match &args.out {
            Some(path) => {
                std::fs::write(path, &text)?;
                manifest()?.write_for(path)?;
            }
            None => print!("{text}"),
        }
        return Ok(ExitCode::SUCCESS);
    };

    let tables = load_fixture_tables(&args.fixtures)?;
    let case = FixtureCase::parse(case_str)?;
    let fixture = find_case(&tables, case)?;
    let report = match_table(&grid, fixture, args.tol)?;
    let text = io::match_report_to_string(&report);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text)?;
            manifest()?.write_for(path)?;
        }
        None => print!("{text}"),
    }
    eprintln!(
        "{case}: {}/{} rows within {} Hz",
        report.pass_count(),
        report.total(),
        args.tol
    );
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

// ─── analyze ────────────────────────────────────────────────────────────────

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let w = io::read_waveform(&args.input)?;
    let window = Window::parse(&args.window)?;
    let spectrum = transform(&w, window, args.n_fft)?;
    let normalize = Normalize::parse(&args.normalize)?;
    let ks = odd_k_values(args.k_max)?;

    let grid = match args.grid_from.as_str() {
        "flags" => {
            let slip = slip_value(args.s, args.ns, args.nr)?;
            flux_harmonics(slip, args.p, args.f, &ks, NSchedule::parse(&args.schedule)?)?
        }
        "fixture" => {
            let case_str = args
                .case
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--grid-from fixture requires --case"))?;
            let case = FixtureCase::parse(case_str)?;
            let tables = load_fixture_tables(&args.fixtures)?;
            let table = find_case(&tables, case)?;
            SidebandGrid::from_fixture(table, &ks, case.reconciling_schedule())?
        }
        other => anyhow::bail!("--grid-from must be flags or fixture, got `{other}`"),
    };
    let label = args
        .label
        .as_deref()
        .map(FaultLabel::parse)
        .transpose()?;
    let features = extract_features(&spectrum, &grid, normalize)?.with_label(label);

    let spectrum_path = PathBuf::from(format!("{}.spectrum.csv", args.out_prefix));
    let features_path = PathBuf::from(format!("{}.features.csv", args.out_prefix));
    io::write_spectrum(&spectrum_path, &spectrum)?;
    io::write_dataset(&features_path, &[features])?;

    let manifest = Manifest::new("analyze")
        .param("window", window.as_str())
        .param("grid_from", &args.grid_from)
        .param("k_max", args.k_max)
        .param("normalize", normalize.as_str())
        .inputs(std::iter::once(&args.input).chain(args.fixtures.iter()))?;
    manifest.write_for(&spectrum_path)?;
    manifest.write_for(&features_path)?;

    println!(
        "fs_hz={} ts_s={:e} bin_hz={}",
        w.sample_rate_hz(),
        1.0 / w.sample_rate_hz(),
        spectrum.bin_hz()
    );
    Ok(ExitCode::SUCCESS)
}

// ─── train / classify ───────────────────────────────────────────────────────

fn cmd_train(args: TrainArgs) -> anyhow::Result<ExitCode> {
    let data = io::read_dataset(&args.data)?;
    let input_dim = data
        .first()
        .map(|v| v.len())
        .ok_or_else(|| anyhow::anyhow!("dataset is empty"))?;
    let model = init_model(
        &[input_dim, args.hidden, args.classes],
        Activation::parse(&args.activation)?,
        args.seed,
    )?;
    let cfg = TrainConfig {
        learning_rate: args.lr,
        epochs: args.epochs,
        batch_size: args.batch,
        seed: args.seed,
        l2: args.l2,
    };
    let (trained, history) = train(model, &data, &cfg)?;

    io::write_model(&args.out, &trained)?;
    let loss_path = args
        .loss_out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.loss.csv", args.out.display())));
    let mut loss_csv = String::from("epoch,loss\n");
    for (epoch, loss) in history.iter().enumerate() {
        loss_csv.push_str(&format!("{epoch},{loss:.17e}\n"));
    }
    std::fs::write(&loss_path, loss_csv)?;

    let manifest = Manifest::new("train")
        .param("hidden", args.hidden)
        .param("classes", args.classes)
        .param("activation", &args.activation)
        .param("epochs", args.epochs)
        .param("lr", args.lr)
        .param("batch", args.batch)
        .param("l2", args.l2)
        .param("seed", args.seed)
        .inputs(std::iter::once(&args.data))?;
    manifest.write_for(&args.out)?;
    manifest.write_for(&loss_path)?;

    let final_loss = history.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} epochs, final loss {final_loss:.6}, training accuracy {:.1}%",
        history.len(),
        accuracy(&trained, &data)? * 100.0
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(args: ClassifyArgs) -> anyhow::Result<ExitCode> {
    let model = io::read_model(&args.model)?;
    let data = io::read_dataset(&args.features)?;
    println!("label,confidence,uncertain");
    for v in &data {
        let c = classify_with_threshold(&model, v.values(), args.threshold)?;
        println!("{},{:.6},{}", c.label, c.confidence, c.uncertain);
    }
    Ok(ExitCode::SUCCESS)
}

// ─── daq ────────────────────────────────────────────────────────────────────

fn cmd_daq_encode(args: DaqEncodeArgs) -> anyhow::Result<ExitCode> {
    let w = io::read_waveform(&args.input)?;
    let channel = Channel::parse(&args.channel)?;
    let chain = ConditioningChain::for_channel(channel);
    let cap = capture(&w, &chain, &AdcConfig::default(), channel.select_code())?;
    io::write_capture(&args.out, &cap)?;
    Manifest::new("daq encode")
        .param("channel", channel.as_str())
        .inputs(std::iter::once(&args.input))?
        .write_for(&args.out)?;
    println!(
        "captured {} samples ({} saturated) to {}",
        cap.codes.len(),
        cap.saturation_count,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_daq_decode(args: DaqDecodeArgs) -> anyhow::Result<ExitCode> {
    let cap = io::read_capture(&args.input)?;
    // The wire trace is authoritative; decode it rather than trusting the
    // code column alone (the reader has already cross-checked both).
    let codes = cap.decode_trace()?;
    let cfg = AdcConfig::default();
    let volts: Vec<f64> = codes.iter().map(|&c| dequantize(&cfg, c)).collect();
    let w = Waveform::new(cap.sample_rate_hz, volts)?;
    io::write_waveform(&args.out, &w)?;
    Manifest::new("daq decode")
        .inputs(std::iter::once(&args.input))?
        .write_for(&args.out)?;
    println!("decoded {} samples to {}", w.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

// ─── fixtures ───────────────────────────────────────────────────────────────

fn cmd_fixtures(args: FixturesArgs) -> anyhow::Result<ExitCode> {
    match &args.out {
        Some(path) => {
            std::fs::write(path, CANONICAL_FIXTURES)?;
            Manifest::new("fixtures").write_for(path)?;
        }
        None => print!("{CANONICAL_FIXTURES}"),
    }
    Ok(ExitCode::SUCCESS)
}
