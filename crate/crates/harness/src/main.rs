use clap::{Args, Parser, Subcommand, ValueEnum};
use slnrsim::config::ExperimentConfig;
use slnrsim::error::HarnessError;
use slnrsim::experiments::{
    max_stray_gain, oracle_check, peak_angles_deg, run_beam_pattern, run_convergence_trace,
    run_sum_rate_sweep, OracleCheckParams,
};
use slnrsim::export;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Hybrid SLNR beamforming experiments: sum-rate sweeps, GA convergence
/// traces, beam patterns, and GA-versus-exhaustive-search checks.
#[derive(Parser)]
#[command(name = "slnrsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo mean sum rate over the configured SNR grid
    Sweep(RunArgs),
    /// GA best/mean fitness per generation on one channel realization
    Trace(RunArgs),
    /// Beam patterns per scheme for a line-of-sight scenario
    Beams(RunArgs),
    /// GA hit rate against the exhaustive oracle on a small instance
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output file format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Run Monte Carlo realizations on one thread instead of the rayon pool
    #[arg(long)]
    serial: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for export::OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => export::OutputFormat::Csv,
            FormatArg::Json => export::OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 4)]
    n_tx: usize,
    #[arg(long, default_value_t = 2)]
    n_rf: usize,
    #[arg(long, default_value_t = 2)]
    users: usize,
    #[arg(long, default_value_t = 1)]
    bits: u32,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 0.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    population: usize,
    #[arg(long, default_value_t = 100)]
    generations: usize,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Beams(args) => cmd_beams(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.display().to_string();
    }
    config.validate()?;
    Ok(config)
}

fn out_path(config: &ExperimentConfig, name: &str, format: export::OutputFormat) -> PathBuf {
    Path::new(&config.output_dir).join(format!("{name}.{}", format.extension()))
}

fn cmd_sweep(args: RunArgs) -> Result<(), HarnessError> {
    let config = load_config(&args)?;
    let format = export::OutputFormat::from(args.format);
    let started = Instant::now();
    let table = run_sum_rate_sweep(&config, !args.serial)?;
    let path = out_path(&config, "sweep", format);
    let text = match format {
        export::OutputFormat::Csv => export::sweep_to_csv(&table),
        export::OutputFormat::Json => export::to_json(&table),
    };
    export::write_text(&path, &text)?;
    println!(
        "sweep: {} schemes x {} SNR points x {} realizations (seed {}, hash {}) in {:.1}s",
        config.schemes.len(),
        config.snr_grid_db.len(),
        config.n_channel_realizations,
        config.seed,
        table.meta.config_hash,
        started.elapsed().as_secs_f64()
    );
    for row in &table.rows {
        println!(
            "  {:>13} @ {:>6.1} dB: {:.4} bps/Hz (+/- {:.4})",
            row.scheme.to_string(),
            row.snr_db,
            row.mean_sum_rate_bps_hz,
            row.std_err
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_trace(args: RunArgs) -> Result<(), HarnessError> {
    let config = load_config(&args)?;
    let format = export::OutputFormat::from(args.format);
    let table = run_convergence_trace(&config)?;
    let path = out_path(&config, "trace", format);
    let text = match format {
        export::OutputFormat::Csv => export::trace_to_csv(&table),
        export::OutputFormat::Json => export::to_json(&table),
    };
    export::write_text(&path, &text)?;
    let first = table.rows.first().expect("nonempty trace");
    let last = table.rows.last().expect("nonempty trace");
    println!(
        "trace: {} @ {} dB, generations 0..{} (seed {})",
        table.scheme, table.snr_db, last.generation, config.seed
    );
    println!(
        "  best fitness {:.4} -> {:.4}, mean {:.4} -> {:.4}",
        first.best_fitness, last.best_fitness, first.mean_fitness, last.mean_fitness
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_beams(args: RunArgs) -> Result<(), HarnessError> {
    let config = load_config(&args)?;
    let format = export::OutputFormat::from(args.format);
    let tables = run_beam_pattern(&config)?;
    let angles = config.los_angles_deg.clone().unwrap_or_default();
    for table in &tables {
        let path = out_path(&config, &format!("beams_{}", table.scheme), format);
        let text = match format {
            export::OutputFormat::Csv => export::beams_to_csv(table),
            export::OutputFormat::Json => export::to_json(table),
        };
        export::write_text(&path, &text)?;
        let peaks = peak_angles_deg(table, config.n_users);
        let stray = max_stray_gain(table, &angles, 10.0);
        println!(
            "beams: {} peaks at {:?} deg, strongest stray lobe {:.2} dB",
            table.scheme,
            peaks,
            10.0 * stray.log10()
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_oracle_check(args: OracleArgs) -> Result<(), HarnessError> {
    let params = OracleCheckParams {
        n_tx: args.n_tx,
        n_rf: args.n_rf,
        n_users: args.users,
        bits: args.bits,
        runs: args.runs,
        snr_db: args.snr_db,
        seed: args.seed,
        population_size: args.population,
        max_generations: args.generations,
    };
    let report = oracle_check(&params)?;
    println!(
        "oracle-check: {} of {} runs matched the exhaustive maximum ({:.0}%)",
        report.hits,
        report.runs,
        report.hit_rate * 100.0
    );
    println!(
        "  mean GA fitness {:.4}, mean exhaustive maximum {:.4}, never exceeded: {}",
        report.mean_ga_fitness, report.mean_oracle_fitness, report.ga_never_exceeded
    );
    Ok(())
}
