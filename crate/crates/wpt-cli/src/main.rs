//! `wpt` — coupled-resonator power-link analysis from the command line.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 runtime simulation
//! error.

mod config;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use wpt_core::error::Error;
use wpt_core::estimation::{m_from_zin_magnitude, m_from_zin_phase};
use wpt_core::experiments::{
    self, exp_ac_sweep, exp_adaptive, exp_compare, exp_surface, run_all, ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "wpt",
    version,
    about = "Adaptive maximum-power-transfer analysis for a coupled resonant link",
    after_help = "Defaults reproduce the reference circuit (10 V, 5 ohm, 20 uH, 240.7 nF per side)\n\
                  and the 0.2->0.9 coupling ramp. See README.md for the config-file keys."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Configuration file with flat `key = value` lines (SI units)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts
    #[arg(long, value_name = "DIR", env = "WPT_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Single coupling coefficient (dimensionless, in (0, 0.99])
    #[arg(long, value_name = "K")]
    k: Option<f64>,
    /// Sweep grid lower edge (Hz)
    #[arg(long, value_name = "HZ")]
    fmin: Option<f64>,
    /// Sweep grid upper edge (Hz)
    #[arg(long, value_name = "HZ")]
    fmax: Option<f64>,
    /// Number of sweep grid points
    #[arg(long, value_name = "N")]
    points: Option<usize>,
    /// Adaptive-run duration (s)
    #[arg(long, value_name = "S")]
    duration: Option<f64>,
    /// Gradient-ascent gain (Hz per A)
    #[arg(long, value_name = "HZ_PER_A")]
    learn_rate: Option<f64>,
    /// Tracker start frequency (Hz)
    #[arg(long, value_name = "HZ")]
    start_freq: Option<f64>,
    /// Integrator step (s)
    #[arg(long = "step-h", value_name = "S")]
    step_h: Option<f64>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    common: Overrides,
    /// Measured input-impedance magnitude |Z_IN| (ohm)
    #[arg(long, value_name = "OHM")]
    zin_mag: Option<f64>,
    /// Drive amplitude (V); with --i1-amp, an alternative to --zin-mag
    #[arg(long, value_name = "V")]
    v_amp: Option<f64>,
    /// Measured primary current amplitude (A)
    #[arg(long, value_name = "A")]
    i1_amp: Option<f64>,
    /// Operating frequency (Hz)
    #[arg(long, value_name = "HZ")]
    freq: f64,
    /// Measured input-impedance phase (rad); also runs the phase inversion
    #[arg(long, value_name = "RAD")]
    zin_phase: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// AC sweep per coupling coefficient (sweep_<k>.csv + anchors)
    Sweep(Overrides),
    /// |I2| surface over (k, f) and its per-k maxima (surface.csv, ridge.csv)
    Surface(Overrides),
    /// Invert a primary-side measurement to mutual inductance and |I2|
    Estimate(EstimateArgs),
    /// Closed-loop adaptive frequency-tracking ramp (adaptive.csv)
    Adapt(Overrides),
    /// Static vs adaptive matching comparison (compare.csv + table)
    Compare(Overrides),
    /// Full reproduction suite (everything above + summary.json)
    All(Overrides),
}

fn build_config(ov: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &ov.config {
        config::apply_config_file(&mut cfg, path)?;
    }
    if let Some(dir) = &ov.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(k) = ov.k {
        cfg.k_list = vec![k];
    }
    if let Some(v) = ov.fmin {
        cfg.f_min = v;
    }
    if let Some(v) = ov.fmax {
        cfg.f_max = v;
    }
    if let Some(v) = ov.points {
        cfg.f_points = v;
    }
    if let Some(v) = ov.duration {
        cfg.duration = v;
    }
    if let Some(v) = ov.learn_rate {
        cfg.learn_rate = v;
    }
    if let Some(v) = ov.start_freq {
        cfg.start_freq = v;
    }
    if let Some(v) = ov.step_h {
        cfg.step_h = v;
    }
    config::revalidate_circuit(&cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn run_estimate(args: &EstimateArgs) -> Result<(), Error> {
    let cfg = build_config(&args.common)?;
    let p = cfg.circuit;
    if !args.freq.is_finite() || args.freq <= 0.0 {
        return Err(Error::InvalidParam {
            name: "freq",
            reason: format!("must be positive, got {}", args.freq),
        });
    }
    let omega = 2.0 * std::f64::consts::PI * args.freq;
    let zin_mag = match (args.zin_mag, args.v_amp, args.i1_amp) {
        (Some(z), _, _) => z,
        (None, Some(v), Some(i1)) if i1 > 0.0 => v / i1,
        _ => {
            return Err(Error::InvalidParam {
                name: "zin_mag",
                reason: "provide --zin-mag, or --v-amp together with --i1-amp".into(),
            })
        }
    };
    let m = m_from_zin_magnitude(zin_mag, &p, omega)?;
    let i2 = wpt_core::circuit::i2_magnitude(&p, m, omega)?;
    println!("|Z_IN|   = {zin_mag:.6} ohm at {:.3} Hz", args.freq);
    println!("M_est    = {m:.6e} H (magnitude method)");
    println!("|I2|_est = {i2:.6e} A");
    if let Some(phase) = args.zin_phase {
        let mp = m_from_zin_phase(phase, &p, omega)?;
        println!("M_est    = {mp:.6e} H (phase method)");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.cmd {
        Cmd::Sweep(ov) => {
            let cfg = build_config(ov)?;
            let summary = exp_ac_sweep(&cfg)?;
            println!(
                "wrote {} sweep files to {}",
                summary.per_k.len(),
                cfg.out_dir.display()
            );
            for s in &summary.per_k {
                println!(
                    "k = {:.2}: argmax|I1| = {:.1} Hz ({} maxima), argmax|I2| = {:.1} Hz ({} maxima)",
                    s.k, s.argmax_i1_hz, s.i1_maxima, s.argmax_i2_hz, s.i2_maxima
                );
            }
        }
        Cmd::Surface(ov) => {
            let cfg = build_config(ov)?;
            let summary = exp_surface(&cfg)?;
            println!(
                "wrote surface.csv and ridge.csv to {}",
                cfg.out_dir.display()
            );
            for s in &summary.per_k {
                let tops: Vec<String> = s
                    .ridge
                    .iter()
                    .map(|r| format!("{:.1} Hz ({:.4} A)", r.f_hz, r.i2_a))
                    .collect();
                println!("k = {:.2}: {}", s.k, tops.join(", "));
            }
        }
        Cmd::Estimate(args) => run_estimate(args)?,
        Cmd::Adapt(ov) => {
            let cfg = build_config(ov)?;
            let s = exp_adaptive(&cfg)?;
            println!("wrote adaptive.csv to {}", cfg.out_dir.display());
            println!("final frequency   = {:.1} Hz", s.final_freq_hz);
            println!(
                "final metric      = {:.4} A ({:.4} A^2)",
                s.final_metric_a, s.final_metric_sq
            );
            println!(
                "analytic max      = {:.4} A^2 at final k",
                s.analytic_max_sq
            );
            match s.freq_break_s {
                Some(t) => println!("downward break    = {:.4} ms", t * 1e3),
                None => println!("downward break    = none"),
            }
            if let Some(e) = s.max_estimator_err {
                println!(
                    "estimator error   = {:.3}% max after first reversal",
                    e * 100.0
                );
            }
        }
        Cmd::Compare(ov) => {
            let cfg = build_config(ov)?;
            let summary = exp_compare(&cfg)?;
            print!("{}", experiments::format_compare_table(&summary));
            println!("wrote compare.csv to {}", cfg.out_dir.display());
        }
        Cmd::All(ov) => {
            let cfg = build_config(ov)?;
            let all = run_all(&cfg)?;
            print!("{}", experiments::format_compare_table(&all.compare));
            println!("wrote full suite to {}", cfg.out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParam { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
