use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mimomc::estimation::{
    music2d_with, reshape_joint, stack_pulses, DoaSearch, MusicSubspace, Spectrum2d,
};
use mimomc::experiments::{
    preset, run_spectrum, run_sweep, Execution, ExperimentConfig, Measure, PRESETS,
};
use mimomc::signal_model::{add_noise, noise_free_mf_matrix, RadarConfig, Scene, Target};
use mimomc::{Error, Result};
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "mimomc",
    version,
    about = "MIMO radar with matrix completion: Monte-Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset (or config file) sweep and write CSV.
    Run {
        #[arg(long, required_unless_present = "config")]
        preset: Option<String>,
        /// Key/value config file; applied on top of --preset when both are given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// `key=value`, repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Run trials on one thread (output is identical).
        #[arg(long)]
        serial: bool,
        /// Grid points for spectrum presets.
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// List preset names.
    Presets,
    /// Dump the MUSIC pseudo-spectrum of one scheme-I scene (full data).
    Spectrum {
        /// Comma list of DOAs in degrees.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10.0, 10.3])]
        doas: Vec<f64>,
        /// Comma list of speeds (m/s), one per DOA.
        #[arg(long, value_delimiter = ',', default_values_t = vec![150.0, 400.0])]
        speeds: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        mt: usize,
        #[arg(long, default_value_t = 20)]
        mr: usize,
        #[arg(long, default_value_t = 5)]
        pulses: usize,
        /// Per-entry SNR in dB; omit for noise-free.
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// DOA grid step in degrees.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Joint DOA–speed spectrum instead of DOA only.
        #[arg(long)]
        joint: bool,
        /// Speed grid step for --joint, m/s.
        #[arg(long, default_value_t = 5.0)]
        speed_step: f64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Presets => {
            let mut stdout = io::stdout().lock();
            for name in PRESETS {
                let _ = writeln!(stdout, "{name}");
            }
            Ok(())
        }
        Command::Run {
            preset: name,
            config,
            trials,
            seed,
            out,
            overrides,
            serial,
            grid,
        } => {
            let mut cfg = match &name {
                Some(n) => preset(n)?,
                None => ExperimentConfig::default(),
            };
            if let Some(path) = config {
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                for line in text.lines() {
                    let line = line.split('#').next().unwrap_or("").trim();
                    if line.is_empty() {
                        continue;
                    }
                    if let Some(p) = line.strip_prefix("preset").map(|r| r.trim_start()) {
                        if let Some(v) = p.strip_prefix('=') {
                            if name.is_none() {
                                cfg = preset(v.trim())?;
                                continue;
                            }
                            return Err(Error::Config(
                                "preset given both on the command line and in the config".into(),
                            ));
                        }
                    }
                    cfg.apply_override(line)?;
                }
            }
            for o in &overrides {
                cfg.apply_override(o)?;
            }
            if let Some(t) = trials {
                cfg.n_trials = t;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.validate()?;
            run(&cfg, &out, serial, grid)
        }
        Command::Spectrum {
            doas,
            speeds,
            mt,
            mr,
            pulses,
            snr,
            seed,
            step,
            joint,
            speed_step,
            out,
        } => {
            let csv = spectrum(
                &doas, &speeds, mt, mr, pulses, snr, seed, step, joint, speed_step,
            )?;
            match out {
                Some(path) => write(&path, &csv),
                None => {
                    let _ = io::stdout().lock().write_all(csv.as_bytes());
                    Ok(())
                }
            }
        }
    }
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn run(cfg: &ExperimentConfig, out: &PathBuf, serial: bool, grid: usize) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::Input(format!("{}: {e}", out.display())))?;
    let path = out.join(format!("{}.csv", cfg.preset));
    if cfg.measure == Measure::Spectrum {
        write(&path, &run_spectrum(cfg, grid)?)?;
        eprintln!("wrote {}", path.display());
        return Ok(());
    }
    let exec = if serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let table = run_sweep(cfg, exec)?;
    write(&path, &table.to_csv())?;
    eprintln!(
        "wrote {} ({} points x {} trials, {} failed)",
        path.display(),
        table.rows.len(),
        cfg.n_trials,
        table.failed()
    );
    if let Some(errors) = table.errors_csv() {
        let epath = out.join(format!("{}.errors.csv", cfg.preset));
        write(&epath, &errors)?;
        eprintln!("wrote {}", epath.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn spectrum(
    doas: &[f64],
    speeds: &[f64],
    mt: usize,
    mr: usize,
    pulses: usize,
    snr: Option<f64>,
    seed: u64,
    step: f64,
    joint: bool,
    speed_step: f64,
) -> Result<String> {
    if doas.len() != speeds.len() {
        return Err(Error::Config(format!(
            "{} DOAs but {} speeds",
            doas.len(),
            speeds.len()
        )));
    }
    if !(step > 0.0 && speed_step > 0.0) {
        return Err(Error::Config("grid steps must be positive".into()));
    }
    let radar = RadarConfig::ula(mt, mr, 1e9)
        .with_spacing_wavelengths(mr as f64 / 2.0, 0.5)
        .with_pulses(pulses);
    radar.validate()?;
    let scene = Scene::new(
        doas.iter()
            .zip(speeds)
            .map(|(&d, &s)| Target::new(d, s, Complex64::new(1.0, 0.0)))
            .collect(),
    );
    let per_pulse = (1..=pulses)
        .map(|q| {
            let z = noise_free_mf_matrix(&scene, &radar, q)?;
            Ok(match snr {
                Some(s) => add_noise(&z, s, seed.wrapping_add(q as u64))?.values,
                None => z.values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stacked = stack_pulses(&per_pulse)?;
    let grid: Vec<f64> = {
        let n = (180.0 / step).round() as usize;
        (0..=n)
            .map(|i| (-90.0 + i as f64 * step).min(90.0))
            .collect()
    };
    if joint {
        let ytilde = reshape_joint(&stacked.y, mt, mr)?;
        let subspace = MusicSubspace::from_snapshots(&ytilde, scene.len())?;
        let top = speeds.iter().copied().fold(0.0, f64::max) * 1.25 + speed_step;
        let n = (top / speed_step).ceil() as usize;
        let speed_grid: Vec<f64> = (0..=n).map(|i| i as f64 * speed_step).collect();
        let spec: Spectrum2d = music2d_with(&subspace, &grid, &speed_grid, &radar)?;
        for p in &spec.peaks {
            eprintln!("peak: theta {} deg, speed {} m/s", p.theta, p.speed);
        }
        Ok(spec.to_csv())
    } else {
        let subspace = MusicSubspace::from_snapshots(&stacked.y, scene.len())?;
        for p in subspace.estimate_doas(&radar, &DoaSearch::default())? {
            eprintln!("peak: theta {} deg", p.theta);
        }
        Ok(subspace.spectrum(&grid, &radar)?.to_csv())
    }
}
