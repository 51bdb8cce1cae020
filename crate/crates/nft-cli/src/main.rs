//! Experiment command line: transforms, channel runs, loopbacks, and the
//! Monte-Carlo rate sweep.
//!
//! Exit codes: 0 success, 2 validation error, 3 numeric failure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nft::channel::{ssfm_propagate, ChannelConfig, StepPolicy};
use nft::zs::{ab_from_qhat, al_forward, dlp_inverse, evaluate_polynomials, Regime};
use nft::{SpectralGrid, SpectralSignal, TimeGrid};

use nft_cli::config::{ExperimentConfig, Scheme};
use nft_cli::experiment::{classify, run_experiment, run_loopback, RunError};
use nft_cli::plots::{reemit_from_run_dir, write_run_dir, PLOT_KINDS};
use nft_cli::signal_io::{
    read_spectral_signal, read_time_signal, write_spectral_signal, write_time_signal,
};

#[derive(Parser)]
#[command(
    name = "nft-cli",
    about = "Nonlinear-spectrum transmission experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Forward transform: time signal -> spectral amplitude on the canonical mesh.
    Nft {
        /// Input time-signal file.
        #[arg(long)]
        input: PathBuf,
        /// Output spectral-signal file (the spectral amplitude).
        #[arg(long)]
        output: PathBuf,
        /// Coefficient count; defaults to the next power of two at or
        /// above twice the number of time samples.
        #[arg(long)]
        spectral_samples: Option<usize>,
    },
    /// Inverse transform: spectral amplitude -> time signal by phase
    /// retrieval and discrete layer peeling.
    Inft {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t_start: f64,
        #[arg(long, allow_hyphen_values = true)]
        t_end: f64,
        #[arg(long)]
        samples: usize,
    },
    /// Split-step propagation of a time signal over the stochastic channel.
    Propagate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Normalized distance.
        #[arg(long, allow_hyphen_values = true)]
        distance: f64,
        /// Normalized noise power spectral density (0 = noise-free).
        #[arg(long, default_value_t = 0.0)]
        noise_psd: f64,
        /// Noise band, ordinary frequency (required when noise_psd > 0).
        #[arg(long, default_value_t = 0.0)]
        noise_bandwidth: f64,
        /// Fixed step count (0 = automatic policy).
        #[arg(long, default_value_t = 0)]
        z_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One deterministic nonlinear-multiplexing loopback trial.
    NfdmLoopback(LoopbackArgs),
    /// One deterministic linear-multiplexing loopback trial.
    WdmLoopback(LoopbackArgs),
    /// Monte-Carlo power sweep defined by a config file.
    RateSweep {
        #[arg(long)]
        config: PathBuf,
        /// Output run directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the configured trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-emit plot series from a stored run directory.
    EmitPlots {
        #[arg(long)]
        run: PathBuf,
        /// One of: rate, entropy, clouds.
        #[arg(long)]
        kind: String,
    },
}

#[derive(clap::Args)]
struct LoopbackArgs {
    #[arg(long)]
    config: PathBuf,
    /// Launch power for this trial, dBm.
    #[arg(long, allow_hyphen_values = true)]
    power_dbm: f64,
    /// Inject channel noise (default noise-free).
    #[arg(long, default_value_t = false)]
    noisy: bool,
    /// Optional TSV dump of sent/received symbols.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Validation(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text).map_err(RunError::Validation)
}

fn open_out(path: &PathBuf) -> Result<BufWriter<File>, RunError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| RunError::Validation(format!("cannot create {}: {e}", path.display())))
}

fn open_in(path: &PathBuf) -> Result<BufReader<File>, RunError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| RunError::Validation(format!("cannot open {}: {e}", path.display())))
}

fn loopback(args: &LoopbackArgs, scheme: Scheme) -> Result<(), RunError> {
    let mut cfg = load_config(&args.config)?;
    cfg.scheme = scheme;
    let report = run_loopback(&cfg, args.power_dbm, args.noisy)?;
    println!(
        "loopback: scheme={scheme:?} power={} dBm achieved_power={:.4} symbol_error={:.6e}",
        args.power_dbm, report.achieved_power, report.symbol_error
    );
    if let Some(path) = &args.output {
        let mut out = open_out(path)?;
        let werr = |e: std::io::Error| RunError::Validation(e.to_string());
        writeln!(
            out,
            "# loopback symbols\nsent_re\tsent_im\trecv_re\trecv_im"
        )
        .map_err(werr)?;
        for (s, r) in report.sent.iter().zip(&report.received) {
            writeln!(
                out,
                "{:.12e}\t{:.12e}\t{:.12e}\t{:.12e}",
                s.re, s.im, r.re, r.im
            )
            .map_err(werr)?;
        }
    }
    Ok(())
}

fn run(cmd: Cmd) -> Result<(), RunError> {
    match cmd {
        Cmd::Nft {
            input,
            output,
            spectral_samples,
        } => {
            let signal = read_time_signal(open_in(&input)?)?;
            let m = spectral_samples.unwrap_or((2 * signal.grid.len()).next_power_of_two());
            let poly = al_forward(&signal, m, Regime::Defocusing).map_err(classify)?;
            let grid = SpectralGrid::nft_canonical(&signal.grid, m).map_err(classify)?;
            let sc = evaluate_polynomials(&poly, &grid).map_err(classify)?;
            let qhat = SpectralSignal::new(grid, sc.qhat).map_err(classify)?;
            write_spectral_signal(&qhat, open_out(&output)?)
                .map_err(|e| RunError::Validation(e.to_string()))?;
            println!("nft: {} samples -> {} spectral nodes", signal.grid.len(), m);
            Ok(())
        }
        Cmd::Inft {
            input,
            output,
            t_start,
            t_end,
            samples,
        } => {
            let qhat = read_spectral_signal(open_in(&input)?)?;
            let grid = TimeGrid::new(t_start, t_end, samples).map_err(classify)?;
            let sc = ab_from_qhat(&qhat, Regime::Defocusing).map_err(classify)?;
            let (signal, report) = dlp_inverse(&sc, &grid).map_err(classify)?;
            if report.conditioning_warning {
                eprintln!(
                    "warning: unimodularity drift {:.2e} during peeling; result is ill-conditioned",
                    report.invariant_drift
                );
            }
            write_time_signal(&signal, open_out(&output)?)
                .map_err(|e| RunError::Validation(e.to_string()))?;
            println!(
                "inft: {} spectral nodes -> {samples} samples",
                qhat.grid.len()
            );
            Ok(())
        }
        Cmd::Propagate {
            input,
            output,
            distance,
            noise_psd,
            noise_bandwidth,
            z_steps,
            seed,
        } => {
            let signal = read_time_signal(open_in(&input)?)?;
            let cfg = ChannelConfig {
                regime: Regime::Defocusing,
                distance,
                noise_psd,
                noise_bandwidth,
                steps: if z_steps == 0 {
                    StepPolicy::Auto
                } else {
                    StepPolicy::Fixed(z_steps)
                },
                seed,
            };
            let out = ssfm_propagate(&signal, &cfg).map_err(classify)?;
            write_time_signal(&out, open_out(&output)?)
                .map_err(|e| RunError::Validation(e.to_string()))?;
            println!("propagate: distance {distance} done");
            Ok(())
        }
        Cmd::NfdmLoopback(args) => loopback(&args, Scheme::Nfdm),
        Cmd::WdmLoopback(args) => loopback(&args, Scheme::Wdm),
        Cmd::RateSweep {
            config,
            out,
            trials,
            seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let result = run_experiment(&cfg)?;
            write_run_dir(&result, &out)?;
            for (p, awgn) in result.points.iter().zip(&result.awgn_bits) {
                println!(
                    "power {:+.2} dBm: rate {:.3} bits/2D (awgn {:.3}), cond. entropy {:.3} bits, alpha {:.2}, {} ok / {} failed",
                    p.target_dbm,
                    p.rate_bits,
                    awgn,
                    p.conditional_entropy_bits,
                    p.alpha,
                    p.trials_ok,
                    p.trials_failed
                );
            }
            println!("run written to {}", out.display());
            Ok(())
        }
        Cmd::EmitPlots { run, kind } => {
            if !PLOT_KINDS.contains(&kind.as_str()) {
                return Err(RunError::Validation(format!(
                    "unknown plot kind '{kind}'; available: {}",
                    PLOT_KINDS.join(", ")
                )));
            }
            for f in reemit_from_run_dir(&run, &kind)? {
                println!("wrote {f}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ RunError::Validation(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e @ RunError::Numeric(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
