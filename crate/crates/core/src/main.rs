use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use ccsim::formats::{read_symbol_file, write_symbol_file, SymbolFile};
use ccsim::harness::{self, format_g6, validate, ExperimentConfig, Scale};
use ccsim::mapping::{build_frame, FrameSpec, PairingMode, QamConstellation, DEFAULT_FEC_BLOCK_LEN};
use ccsim::metrics::symbol_metrics;
use ccsim::shaping::{
    format_bits, input_bit_length, num_sequences, parse_bits, rate_loss, AmplitudeAlphabet, AmplitudeSequence,
    Ccdm, Composition,
};

/// Constant-composition shaping and fiber-nonlinearity simulator.
#[derive(Parser)]
#[command(name = "ccsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write the CSV report.
    Sweep(SweepArgs),
    /// Shaping metrics of a binary symbol file, as one CSV row.
    Metrics(MetricsArgs),
    /// Constant-composition distribution matcher.
    #[command(subcommand)]
    Ccdm(CcdmCommand),
    /// Generate a shaped frame and write it as a symbol file.
    Frame(FrameArgs),
    /// Run the analytic limit checks of the fiber model.
    Validate,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment file; omitted fields take the reference values.
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scale: Option<Scale>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    /// Symbols per run and polarization (rounded down to whole FEC blocks).
    #[arg(long)]
    symbols: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Fill the wall_s column (makes the CSV non-reproducible).
    #[arg(long)]
    wall_time: bool,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct MetricsArgs {
    symbol_file: PathBuf,
    /// One-sided amplitude PMF the symbols were shaped for.
    #[arg(long, default_value = "0.4,0.3,0.2,0.1")]
    pmf: String,
}

#[derive(Subcommand)]
enum CcdmCommand {
    /// Map input bits to an amplitude sequence.
    Encode {
        #[arg(long)]
        composition: Composition,
        #[arg(long)]
        bits: String,
    },
    /// Map an amplitude sequence back to its input bits.
    Decode {
        #[arg(long)]
        composition: Composition,
        /// Comma-separated amplitude indices.
        #[arg(long)]
        symbols: String,
    },
    /// Codebook size, input length and rate loss of a composition.
    Info {
        #[arg(long)]
        composition: Composition,
        #[arg(long, default_value = "0.4,0.3,0.2,0.1")]
        pmf: String,
    },
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long, short)]
    n: usize,
    #[arg(long, default_value = "intra")]
    pairing: PairingMode,
    #[arg(long, default_value_t = DEFAULT_FEC_BLOCK_LEN * 10)]
    symbols: usize,
    #[arg(long)]
    interleave: bool,
    #[arg(long, default_value_t = DEFAULT_FEC_BLOCK_LEN)]
    fec_block_len: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_pmf(text: &str) -> Result<AmplitudeAlphabet> {
    let pmf: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("invalid pmf {text:?}"))?;
    let amplitudes = (0..pmf.len()).map(|i| (2 * i + 1) as f64).collect();
    Ok(AmplitudeAlphabet::new(amplitudes, pmf)?)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => harness::load_config(path)?.0,
        None => {
            let mut c = ExperimentConfig::default();
            harness::apply_seed_env(&mut c)?;
            c
        }
    };
    if let Some(scale) = args.scale {
        scale.apply(&mut config);
    }
    let s = &mut config.sweep;
    if let Some(v) = args.seed {
        s.base_seed = v;
    }
    if let Some(v) = args.out {
        s.output = v;
    }
    if let Some(v) = args.runs {
        s.num_runs = v;
    }
    if let Some(v) = args.symbols {
        s.symbols_per_run = v;
    }
    if let Some(v) = args.workers {
        s.workers = v;
    }
    s.record_wall_time |= args.wall_time;
    for w in &config.validate()? {
        eprintln!("warning: {w}");
    }
    let quiet = args.quiet;
    let result = harness::run_sweep(&config, &|p| {
        if quiet {
            return;
        }
        let r = p.row;
        let snr = r.snr_db.map(format_g6).unwrap_or_else(|| "failed".into());
        eprintln!(
            "[{}/{}] n={} {} interleaved={} run={} snr_db={}{}",
            p.done,
            p.total,
            r.point.block_length(),
            r.point.pairing_label(),
            u8::from(r.point.interleaved),
            r.run,
            snr,
            r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default(),
        );
    })?;
    let out = &config.sweep.output;
    harness::emit_csv(&result, out).with_context(|| format!("cannot write {}", out.display()))?;
    println!("pairing,interleaved,n,snr_db,ci_low_db,ci_high_db,run_ratio");
    for a in &result.aggregates {
        let opt = |v: Option<f64>| v.map(format_g6).unwrap_or_default();
        println!(
            "{},{},{},{},{},{},{}",
            a.point.pairing_label(),
            u8::from(a.point.interleaved),
            a.point.block_length(),
            opt(a.snr_db),
            opt(a.ci_db.map(|c| c.0)),
            opt(a.ci_db.map(|c| c.1)),
            format_g6(a.run_ratio),
        );
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let file = read_symbol_file(&args.symbol_file)
        .with_context(|| format!("cannot read {}", args.symbol_file.display()))?;
    let alphabet = parse_pmf(&args.pmf)?;
    let constellation = QamConstellation::new(&alphabet);
    let m = symbol_metrics(&file.x, &file.y, &constellation)?;
    let h = &file.header;
    println!("n,pairing,interleaved,n_sim,kl_bits,kurtosis,run_ratio,run_ratio_abs,run_ratio_arg");
    println!(
        "{},{},{},{},{},{},{},{},{}",
        h.block_length_n,
        h.pairing_mode,
        u8::from(h.interleaved),
        m.n_sim,
        format_g6(m.kl_bits),
        format_g6(m.kurtosis),
        format_g6(m.run_ratio),
        format_g6(m.run_ratio_abs),
        format_g6(m.run_ratio_arg),
    );
    Ok(())
}

fn ccdm(cmd: CcdmCommand) -> Result<()> {
    match cmd {
        CcdmCommand::Encode { composition, bits } => {
            let bits = parse_bits(&bits)?;
            println!("{}", Ccdm::new(composition).encode(&bits)?);
        }
        CcdmCommand::Decode { composition, symbols } => {
            let seq = AmplitudeSequence::parse(&symbols)?;
            println!("{}", format_bits(&Ccdm::new(composition).decode(&seq)?));
        }
        CcdmCommand::Info { composition, pmf } => {
            let alphabet = parse_pmf(&pmf)?;
            if alphabet.arity() != composition.arity() {
                bail!("composition has {} entries but the pmf has {}", composition.arity(), alphabet.arity());
            }
            println!("n={}", composition.n());
            println!("num_sequences={}", num_sequences(&composition));
            println!("input_bits={}", input_bit_length(&composition));
            println!("rate_loss_bits={}", format_g6(rate_loss(&composition, &alphabet)));
        }
    }
    Ok(())
}

fn frame(args: FrameArgs) -> Result<()> {
    let alphabet = AmplitudeAlphabet::pas64();
    let constellation = QamConstellation::new(&alphabet);
    let spec = FrameSpec {
        block_length_n: args.n,
        pairing_mode: args.pairing,
        total_symbols: args.symbols,
        interleave: args.interleave,
        fec_block_len: args.fec_block_len,
    };
    let frame = build_frame(&alphabet, &constellation, &spec, args.seed)?;
    write_symbol_file(&args.out, &SymbolFile::from_frame(&frame))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(())
}

fn run_validate() -> Result<()> {
    let outcomes = validate::run_all();
    let mut stdout = std::io::stdout().lock();
    for o in &outcomes {
        writeln!(stdout, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", outcomes.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Metrics(a) => metrics(a),
        Command::Ccdm(c) => ccdm(c),
        Command::Frame(a) => frame(a),
        Command::Validate => run_validate(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
