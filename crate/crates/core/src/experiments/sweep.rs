//! Sweeps over configuration axes, aggregation and CSV output.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Measure, SweepAxis};
use super::trial::{run_trial, trial_seed, TrialOutcome};
use crate::error::{Error, Result};
use crate::signal_model::{column_power_spectrum, gen_waveforms, WaveformKind};

/// Rounding allowance when comparing `μ_max` against a threshold, so that an
/// exactly incoherent matrix (`μ = 1`) never counts as exceeding `μ₀ = 1`.
const MU_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// One point of the cartesian sweep: axis labels and the resolved config.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub labels: Vec<String>,
    pub config: ExperimentConfig,
}

/// Expands the sweep axes of `cfg`, first axis slowest.
pub fn sweep_points(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let mut points = vec![SweepPoint {
        labels: Vec::new(),
        config: cfg.clone(),
    }];
    for axis in &cfg.sweep {
        let mut next = Vec::with_capacity(points.len() * axis.len());
        for p in &points {
            for i in 0..axis.len() {
                let mut config = p.config.clone();
                axis.apply(i, &mut config);
                let mut labels = p.labels.clone();
                labels.push(axis.label(i));
                next.push(SweepPoint { labels, config });
            }
        }
        points = next;
    }
    for p in &points {
        p.config
            .validate()
            .map_err(|e| Error::Config(format!("sweep point [{}]: {e}", p.labels.join(", "))))?;
    }
    Ok(points)
}

/// Aggregates of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub labels: Vec<String>,
    pub trials: usize,
    pub failed: usize,
    /// Successful trials whose solver did not meet its stopping rule.
    pub not_converged: usize,
    pub mean_phi: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub mean_mu_max: Option<f64>,
    pub mean_mu1: Option<f64>,
    /// `Pr(μ_max > μ₀)` for each threshold of the config's grid.
    pub pr_mu_exceeds: Vec<f64>,
    /// Successes over all trials (failed trials count as unresolved).
    pub resolution_mc: Option<f64>,
    pub resolution_full: Option<f64>,
    /// `(trial index, message)` for every failed trial.
    pub errors: Vec<(usize, String)>,
}

/// The full result of [`run_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub preset: String,
    pub measure: Measure,
    pub master_seed: u64,
    pub first_trial: usize,
    pub last_trial: usize,
    pub axes: Vec<&'static str>,
    pub mu0_grid: Vec<f64>,
    pub rows: Vec<PointSummary>,
}

/// Runs every trial at every sweep point; the result does not depend on `exec`.
pub fn run_sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<SweepTable> {
    if cfg.measure == Measure::Spectrum {
        return Err(Error::Config(
            "spectrum presets produce a table via run_spectrum".into(),
        ));
    }
    let points = sweep_points(cfg)?;
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| cfg.trial_range().map(move |t| (p, t)))
        .collect();
    let work =
        |&(p, t): &(usize, usize)| run_trial(&points[p].config, t).map_err(|e| e.to_string());
    let results: Vec<std::result::Result<TrialOutcome, String>> = match exec {
        Execution::Serial => tasks.iter().map(work).collect(),
        Execution::Parallel => tasks.par_iter().map(work).collect(),
    };

    let per_point = cfg.n_trials;
    let rows = points
        .iter()
        .zip(results.chunks(per_point))
        .map(|(point, chunk)| summarize(point, chunk, cfg))
        .collect();
    Ok(SweepTable {
        preset: cfg.preset.clone(),
        measure: cfg.measure,
        master_seed: cfg.master_seed,
        first_trial: cfg.first_trial,
        last_trial: cfg.first_trial + cfg.n_trials - 1,
        axes: cfg.sweep.iter().map(SweepAxis::name).collect(),
        mu0_grid: cfg.mu0_grid.clone(),
        rows,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(
    point: &SweepPoint,
    chunk: &[std::result::Result<TrialOutcome, String>],
    cfg: &ExperimentConfig,
) -> PointSummary {
    let first = cfg.first_trial;
    let ok: Vec<&TrialOutcome> = chunk.iter().filter_map(|r| r.as_ref().ok()).collect();
    let errors: Vec<(usize, String)> = chunk
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().err().map(|e| (first + i, e.clone())))
        .collect();
    let trials = chunk.len();
    let fraction = |pick: fn(&TrialOutcome) -> Option<bool>| {
        let hits = ok.iter().filter(|o| pick(o) == Some(true)).count();
        ok.iter()
            .any(|o| pick(o).is_some())
            .then(|| hits as f64 / trials as f64)
    };
    let with_phi: Vec<&&TrialOutcome> = ok.iter().filter(|o| o.phi.is_some()).collect();
    let pr_mu_exceeds = if ok.is_empty() {
        vec![f64::NAN; cfg.mu0_grid.len()]
    } else {
        cfg.mu0_grid
            .iter()
            .map(|&mu0| {
                ok.iter()
                    .filter(|o| o.coherence.mu_max > mu0 + MU_SLACK)
                    .count() as f64
                    / ok.len() as f64
            })
            .collect()
    };
    PointSummary {
        labels: point.labels.clone(),
        trials,
        failed: errors.len(),
        not_converged: ok.iter().filter(|o| !o.converged).count(),
        mean_phi: mean(with_phi.iter().filter_map(|o| o.phi)),
        mean_iterations: mean(with_phi.iter().map(|o| o.iterations)),
        mean_mu_max: mean(ok.iter().map(|o| o.coherence.mu_max)),
        mean_mu1: mean(ok.iter().map(|o| o.coherence.mu1)),
        pr_mu_exceeds,
        resolution_mc: fraction(|o| o.resolution),
        resolution_full: fraction(|o| o.resolution_full),
        errors,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepTable {
    /// Row for the point whose labels equal `labels`.
    pub fn row(&self, labels: &[&str]) -> Option<&PointSummary> {
        self.rows.iter().find(|r| {
            r.labels
                .iter()
                .map(String::as_str)
                .eq(labels.iter().copied())
        })
    }

    /// Total failed trials over all points.
    pub fn failed(&self) -> usize {
        self.rows.iter().map(|r| r.failed).sum()
    }

    /// CSV with a header row; every row starts with the provenance columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("preset,master_seed,trial_first,trial_last");
        for a in &self.axes {
            let _ = write!(out, ",{a}");
        }
        out.push_str(",trials,failed");
        let coherence = self.measure == Measure::Coherence;
        let resolution = self.measure == Measure::Resolution;
        if !coherence {
            out.push_str(",not_converged,mean_phi,mean_iterations");
        }
        out.push_str(",mean_mu_max,mean_mu1");
        if coherence {
            for mu0 in &self.mu0_grid {
                let _ = write!(out, ",pr_mu_gt_{mu0}");
            }
        }
        if resolution {
            out.push_str(",resolution_mc,resolution_full");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{}",
                self.preset, self.master_seed, self.first_trial, self.last_trial
            );
            for l in &r.labels {
                let _ = write!(out, ",{l}");
            }
            let _ = write!(out, ",{},{}", r.trials, r.failed);
            if !coherence {
                let _ = write!(
                    out,
                    ",{},{},{}",
                    r.not_converged,
                    opt(r.mean_phi),
                    opt(r.mean_iterations)
                );
            }
            let _ = write!(out, ",{},{}", opt(r.mean_mu_max), opt(r.mean_mu1));
            if coherence {
                for p in &r.pr_mu_exceeds {
                    let _ = write!(out, ",{p}");
                }
            }
            if resolution {
                let _ = write!(out, ",{},{}", opt(r.resolution_mc), opt(r.resolution_full));
            }
            out.push('\n');
        }
        out
    }

    /// `trial,message` lines for failed trials, or `None` when all succeeded.
    pub fn errors_csv(&self) -> Option<String> {
        if self.failed() == 0 {
            return None;
        }
        let mut out = String::from("preset,master_seed");
        for a in &self.axes {
            let _ = write!(out, ",{a}");
        }
        out.push_str(",trial,error\n");
        for r in &self.rows {
            for (t, e) in &r.errors {
                let _ = write!(out, "{},{}", self.preset, self.master_seed);
                for l in &r.labels {
                    let _ = write!(out, ",{l}");
                }
                let _ = writeln!(out, ",{t},\"{}\"", e.replace('"', "'"));
            }
        }
        Some(out)
    }
}

/// Maximal column power spectrum of each swept waveform over `ω ∈ [−½, ½)`.
///
/// Gaussian waveforms are drawn from trial `first_trial` of the master seed.
pub fn run_spectrum(cfg: &ExperimentConfig, grid_points: usize) -> Result<String> {
    cfg.validate()?;
    let kinds: Vec<WaveformKind> = cfg
        .sweep
        .iter()
        .find_map(|a| match a {
            SweepAxis::Waveform(v) => Some(v.clone()),
            _ => None,
        })
        .unwrap_or_else(|| vec![cfg.waveform]);
    let omega: Vec<f64> = (0..grid_points)
        .map(|i| -0.5 + i as f64 / grid_points as f64)
        .collect();
    let seed = trial_seed(cfg.master_seed, cfg.first_trial);
    let columns = kinds
        .iter()
        .map(|&k| {
            let w = gen_waveforms(k, cfg.mt, cfg.nyquist, 1.0, seed)?;
            column_power_spectrum(&w, &omega)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::from("preset,master_seed,trial_first,trial_last,omega");
    for k in &kinds {
        let _ = write!(out, ",{k}");
    }
    out.push('\n');
    for (i, w) in omega.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{},{w}",
            cfg.preset, cfg.master_seed, cfg.first_trial, cfg.first_trial
        );
        for c in &columns {
            let _ = write!(out, ",{}", c[i]);
        }
        out.push('\n');
    }
    Ok(out)
}
