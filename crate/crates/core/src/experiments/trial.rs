//! One Monte-Carlo realization of an experiment.

use super::config::{DoaLaw, DoaMethod, ExperimentConfig, Measure, SpeedLaw};
use crate::error::{Error, Result};
use crate::estimation::{
    matched_filter, music2d_with, reshape_joint, resolution_success, stack_pulses, DoaSearch,
    MusicSubspace,
};
use crate::linalg::CMatrix;
use crate::matcomp::{
    matrix_coherence_at_rank, noise_radius, relative_error, svt_complete, CoherenceReport,
};
use crate::rng::SeededRng;
use crate::sampling::{derive_row_seed, observe, ObservationMask};
use crate::signal_model::{
    add_noise, gen_waveforms, noise_free_mf_matrix, noise_free_raw_matrix, noise_variance,
    DataMatrix, RadarConfig, SamplingScheme, Scene, Target, WaveformMatrix,
};

// Stream tags under the trial seed.
const SCENE: u64 = 1;
const WAVEFORM: u64 = 2;
const NOISE: u64 = 3;
const MASK: u64 = 4;

/// Seed of trial `index`; independent of the sweep point, so every point of a
/// sweep sees the same scenes.
pub fn trial_seed(master_seed: u64, index: usize) -> u64 {
    derive_row_seed(master_seed, index as u64, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial_index: usize,
    /// Mean relative recovery error over the processed pulses.
    pub phi: Option<f64>,
    /// Coherence of the noise-free first-pulse matrix at rank = distinct DOAs.
    pub coherence: CoherenceReport,
    /// DOA resolution from the completed matrices.
    pub resolution: Option<bool>,
    /// DOA resolution from the full noisy matrices (no masking, no completion).
    pub resolution_full: Option<bool>,
    pub doa_estimates: Vec<f64>,
    /// Mean SVT iterations per pulse.
    pub iterations: f64,
    /// Whether every pulse's completion met its stopping rule.
    pub converged: bool,
}

/// Draws the scene of a trial. Uniform draws are always consumed so that the
/// same trial seed yields the same underlying randomness at every sweep point.
pub fn draw_scene(cfg: &ExperimentConfig, seed: u64) -> Result<Scene> {
    let mut rng = SeededRng::new(derive_row_seed(seed, SCENE, 0));
    let k = cfg.targets;
    let u = rng.unit();
    let doas: Vec<f64> = match &cfg.doas {
        Some(list) => list.clone(),
        None => {
            let first = match cfg.doa_first {
                DoaLaw::Fixed(t) => t,
                DoaLaw::Uniform => {
                    let hi = 90.0 - (k - 1) as f64 * cfg.delta_theta;
                    if hi < -90.0 {
                        return Err(Error::Config(format!(
                            "{k} targets spaced {}° do not fit in [-90°, 90°]",
                            cfg.delta_theta
                        )));
                    }
                    -90.0 + (hi + 90.0) * u
                }
            };
            (0..k).map(|i| first + i as f64 * cfg.delta_theta).collect()
        }
    };
    let mut targets = Vec::with_capacity(doas.len());
    for (i, &doa) in doas.iter().enumerate() {
        let s = rng.unit();
        let speed = match &cfg.speed {
            SpeedLaw::Uniform { lo, hi } => lo + (hi - lo) * s,
            SpeedLaw::Fixed(v) => *v
                .get(i)
                .ok_or_else(|| Error::Config(format!("no fixed speed for target {}", i + 1)))?,
        };
        let target = Target::new(doa, speed, rng.complex_normal(1.0));
        target.validate()?;
        targets.push(target);
    }
    Ok(Scene::new(targets))
}

/// The transmit waveform of a trial (Gaussian draws are per trial).
pub fn trial_waveform(cfg: &ExperimentConfig, seed: u64) -> Result<WaveformMatrix> {
    gen_waveforms(
        cfg.waveform,
        cfg.mt,
        cfg.nyquist,
        1.0,
        derive_row_seed(seed, WAVEFORM, 0),
    )
}

fn noise_free(
    scene: &Scene,
    radar: &RadarConfig,
    wave: Option<&WaveformMatrix>,
    q: usize,
) -> Result<CMatrix> {
    Ok(match wave {
        None => noise_free_mf_matrix(scene, radar, q)?.values,
        Some(w) => noise_free_raw_matrix(scene, radar, w, q)?.values,
    })
}

/// Runs trial `index` of `cfg` (one sweep point). Deterministic in
/// `(cfg, index)`.
pub fn run_trial(cfg: &ExperimentConfig, index: usize) -> Result<TrialOutcome> {
    let radar = cfg.radar()?;
    let seed = trial_seed(cfg.master_seed, index);
    let scene = draw_scene(cfg, seed)?;
    let wave = match cfg.scheme {
        SamplingScheme::MatchedFilter => None,
        SamplingScheme::RawSamples => Some(trial_waveform(cfg, seed)?),
    };
    let rank = scene.distinct_doas();

    let first = noise_free(&scene, &radar, wave.as_ref(), 1)?;
    let coherence = matrix_coherence_at_rank(&first, rank.min(first.nrows()).min(first.ncols()))?;
    let mut outcome = TrialOutcome {
        trial_index: index,
        phi: None,
        coherence,
        resolution: None,
        resolution_full: None,
        doa_estimates: Vec::new(),
        iterations: 0.0,
        converged: true,
    };
    match cfg.measure {
        Measure::Coherence => return Ok(outcome),
        Measure::Spectrum => {
            return Err(Error::Config(
                "spectrum presets are not Monte-Carlo runs".into(),
            ))
        }
        Measure::Recovery | Measure::Resolution => {}
    }

    let pulses = if cfg.measure == Measure::Resolution {
        radar.pulses_q
    } else {
        1
    };
    let (rows, cols) = cfg.matrix_shape();
    let per_row = cfg.per_row()?;
    let mask_seed = derive_row_seed(seed, MASK, 0);
    let mut completed = Vec::with_capacity(pulses);
    let mut full = Vec::with_capacity(pulses);
    let mut phi_sum = 0.0;
    let mut iter_sum = 0usize;
    for q in 1..=pulses {
        let clean = if q == 1 {
            first.clone()
        } else {
            noise_free(&scene, &radar, wave.as_ref(), q)?
        };
        let noisy = add_noise(
            &DataMatrix {
                values: clean.clone(),
                scheme: cfg.scheme,
                pulse_index: q,
            },
            cfg.snr_db,
            derive_row_seed(seed, NOISE, q as u64),
        )?
        .values;
        let mask = ObservationMask::draw(rows, cols, per_row, mask_seed, q as u64, cfg.scheme)?;
        let sigma = noise_variance(&clean, cfg.snr_db).sqrt();
        let params = cfg
            .svt
            .clone()
            .with_noise_radius(noise_radius(mask.count(), sigma));
        let result = svt_complete(&observe(&noisy, &mask)?, &params)?;
        phi_sum += relative_error(&result.recovered, &clean)?;
        iter_sum += result.iterations;
        outcome.converged &= result.converged;
        if cfg.measure == Measure::Resolution {
            match &wave {
                None => {
                    completed.push(result.recovered);
                    full.push(noisy);
                }
                Some(w) => {
                    completed.push(matched_filter(&result.recovered, w)?);
                    full.push(matched_filter(&noisy, w)?);
                }
            }
        }
    }
    outcome.phi = Some(phi_sum / pulses as f64);
    outcome.iterations = iter_sum as f64 / pulses as f64;

    if cfg.measure == Measure::Resolution {
        let truth = scene.doas();
        let delta = min_spacing(&truth);
        let est = estimate_doas(cfg, &radar, &completed, truth.len())?;
        let est_full = estimate_doas(cfg, &radar, &full, truth.len())?;
        outcome.resolution = Some(resolved(&truth, &est, delta, cfg.epsilon)?);
        outcome.resolution_full = Some(resolved(&truth, &est_full, delta, cfg.epsilon)?);
        outcome.doa_estimates = est;
    }
    Ok(outcome)
}

fn min_spacing(doas: &[f64]) -> f64 {
    let mut d = doas.to_vec();
    d.sort_by(f64::total_cmp);
    d.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Fewer peaks than targets counts as a failure to resolve.
fn resolved(truth: &[f64], est: &[f64], delta: f64, epsilon: f64) -> Result<bool> {
    if est.len() < truth.len() {
        return Ok(false);
    }
    resolution_success(truth, est, delta, epsilon)
}

/// DOA estimates (sorted) from per-pulse `mr × mt` matched-filter matrices.
pub fn estimate_doas(
    cfg: &ExperimentConfig,
    radar: &RadarConfig,
    per_pulse: &[CMatrix],
    k: usize,
) -> Result<Vec<f64>> {
    let stacked = stack_pulses(per_pulse)?;
    let mut doas: Vec<f64> = match cfg.doa_method {
        DoaMethod::Music => MusicSubspace::from_snapshots(&stacked.y, k)?
            .estimate_doas(radar, &DoaSearch::default())?
            .into_iter()
            .map(|p| p.theta)
            .collect(),
        DoaMethod::Music2d => {
            let joint = reshape_joint(&stacked.y, stacked.mt, stacked.mr)?;
            let subspace = MusicSubspace::from_snapshots(&joint, k)?;
            let thetas = grid(-90.0, 90.0, cfg.theta_step);
            let top = match &cfg.speed {
                SpeedLaw::Uniform { hi, .. } => *hi,
                SpeedLaw::Fixed(v) => v.iter().copied().fold(0.0, f64::max) * 1.25,
            };
            let speeds = grid(0.0, top, cfg.speed_step);
            music2d_with(&subspace, &thetas, &speeds, radar)?
                .peaks
                .into_iter()
                .map(|p| p.theta)
                .collect()
        }
    };
    doas.sort_by(f64::total_cmp);
    Ok(doas)
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| (lo + i as f64 * step).min(hi)).collect()
}
