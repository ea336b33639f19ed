//! Target parameter estimation from (recovered) fusion-center matrices:
//! matched filtering, pulse stacking, sample covariance, 1D MUSIC over DOA,
//! 2D MUSIC over (DOA, speed) and the DOA resolution criterion.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, shape, CMatrix, CVector, HermitianEigen, Svd};
use crate::signal_model::{
    doppler_steering, transmit_steering, virtual_steering, RadarConfig, WaveformMatrix,
};

/// Floor applied to MUSIC denominators before inversion.
pub const DENOMINATOR_FLOOR: f64 = 1e-18;

/// Matched filter bank applied to a raw-sample matrix: `Ẑ S̃ᴴ` (`mr × mt`).
///
/// `S̃` has orthonormal rows, so no further normalization is applied.
pub fn matched_filter(zhat: &CMatrix, wave: &WaveformMatrix) -> Result<CMatrix> {
    if zhat.ncols() != wave.n() {
        return Err(Error::dims(format!("M_r x {}", wave.n()), shape(zhat)));
    }
    Ok(zhat * wave.samples.adjoint())
}

/// `Y = [y_1, …, y_Q]`, `y_q = vec(Y_q)` stacked column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedData {
    pub y: CMatrix,
    pub mt: usize,
    pub mr: usize,
}

impl StackedData {
    pub fn pulses(&self) -> usize {
        self.y.ncols()
    }
}

/// Stacks per-pulse `mr × mt` matrices into the `mt·mr × Q` snapshot matrix.
pub fn stack_pulses(per_pulse: &[CMatrix]) -> Result<StackedData> {
    let first = per_pulse
        .first()
        .ok_or_else(|| Error::Domain("no pulses to stack".into()))?;
    let (mr, mt) = first.shape();
    let mut y = CMatrix::zeros(mr * mt, per_pulse.len());
    for (q, m) in per_pulse.iter().enumerate() {
        if m.shape() != (mr, mt) {
            return Err(Error::dims(shape(first), shape(m)));
        }
        // nalgebra storage is column-major, which is exactly vec(·)
        y.column_mut(q).copy_from_slice(m.as_slice());
    }
    Ok(StackedData { y, mt, mr })
}

/// `R̂ = Y Yᴴ / Q`.
pub fn sample_covariance(y: &CMatrix) -> Result<CMatrix> {
    if y.ncols() == 0 || y.nrows() == 0 {
        return Err(Error::Domain("empty snapshot matrix".into()));
    }
    Ok(y * y.adjoint() / Complex64::new(y.ncols() as f64, 0.0))
}

#[derive(Debug, Clone)]
enum Basis {
    Noise(CMatrix),
    Signal(CMatrix),
}

/// Signal/noise subspace split of a sample covariance for `k` sources.
#[derive(Debug, Clone)]
pub struct MusicSubspace {
    dim: usize,
    sources: usize,
    basis: Basis,
}

impl MusicSubspace {
    /// Noise subspace `E_n` = eigenvectors of the `n − k` smallest eigenvalues of `cov`.
    pub fn from_covariance(cov: &CMatrix, k: usize) -> Result<Self> {
        let n = cov.nrows();
        if !cov.is_square() {
            return Err(Error::dims("square covariance", shape(cov)));
        }
        if k >= n {
            return Err(Error::Domain(format!(
                "{k} sources need more than {n} sensors"
            )));
        }
        let eig = HermitianEigen::new(cov)?;
        Ok(MusicSubspace {
            dim: n,
            sources: k,
            basis: Basis::Noise(eig.eigenvectors.columns(0, n - k).into_owned()),
        })
    }

    /// Same subspaces as `from_covariance(sample_covariance(y), k)`, via the
    /// left singular vectors of `y` when `k` does not exceed its column count.
    pub fn from_snapshots(y: &CMatrix, k: usize) -> Result<Self> {
        let n = y.nrows();
        if k >= n {
            return Err(Error::Domain(format!(
                "{k} sources need more than {n} sensors"
            )));
        }
        if k > y.ncols() {
            return Self::from_covariance(&sample_covariance(y)?, k);
        }
        let svd = Svd::new(y)?;
        Ok(MusicSubspace {
            dim: n,
            sources: k,
            basis: Basis::Signal(svd.left_basis(k)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sources(&self) -> usize {
        self.sources
    }

    /// Explicit noise basis, when built from a covariance.
    pub fn noise_basis(&self) -> Option<&CMatrix> {
        match &self.basis {
            Basis::Noise(e) => Some(e),
            Basis::Signal(_) => None,
        }
    }

    /// `vᴴ E_n E_nᴴ v`.
    pub fn noise_power(&self, v: &CVector) -> f64 {
        match &self.basis {
            Basis::Noise(e) => (e.adjoint() * v).norm_squared(),
            Basis::Signal(e) => v.norm_squared() - (e.adjoint() * v).norm_squared(),
        }
    }

    /// Pseudo-spectrum value `1 / vᴴ E_n E_nᴴ v`, floored denominator.
    pub fn pseudo_spectrum(&self, v: &CVector) -> f64 {
        1.0 / self.noise_power(v).max(DENOMINATOR_FLOOR)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::dims(
                format!("steering of length {}", self.dim),
                len.to_string(),
            ));
        }
        Ok(())
    }

    /// 1D MUSIC over `theta_grid` (degrees) with `v(θ) = a(θ) ⊗ b(θ)`.
    pub fn spectrum(&self, theta_grid: &[f64], cfg: &RadarConfig) -> Result<SpectrumResult> {
        if theta_grid.is_empty() {
            return Err(Error::Domain("empty angle grid".into()));
        }
        self.check_dim(cfg.mt * cfg.mr)?;
        let values = theta_grid
            .iter()
            .map(|&t| virtual_steering(t, cfg).map(|v| self.pseudo_spectrum(&v)))
            .collect::<Result<Vec<_>>>()?;
        let mut peaks: Vec<Peak> = local_maxima(&values)
            .into_iter()
            .map(|i| Peak {
                theta: theta_grid[i],
                value: values[i],
            })
            .collect();
        peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
        peaks.truncate(self.sources);
        Ok(SpectrumResult {
            grid: theta_grid.to_vec(),
            values,
            peaks,
        })
    }

    /// Coarse-to-fine DOA search: scan `[-90, 90]` at `coarse_step`, then
    /// rescan a window around each of the `k` strongest coarse peaks on a
    /// `fine_step` lattice and keep the `k` strongest fine peaks.
    pub fn estimate_doas(&self, cfg: &RadarConfig, search: &DoaSearch) -> Result<Vec<Peak>> {
        let coarse_n = (180.0 / search.coarse_step).round() as i64;
        let coarse: Vec<f64> = (0..=coarse_n)
            .map(|i| (-90.0 + i as f64 * search.coarse_step).min(90.0))
            .collect();
        let coarse_spec = self.spectrum(&coarse, cfg)?;

        let half = search.window_steps as f64 * search.coarse_step;
        let limit = (90.0 / search.fine_step).floor() as i64;
        let mut lattice = BTreeSet::new();
        for p in &coarse_spec.peaks {
            let lo = (((p.theta - half) / search.fine_step).floor() as i64).max(-limit);
            let hi = (((p.theta + half) / search.fine_step).ceil() as i64).min(limit);
            lattice.extend(lo..=hi);
        }
        let points: Vec<i64> = lattice.into_iter().collect();
        let values = points
            .iter()
            .map(|&k| {
                virtual_steering(k as f64 * search.fine_step, cfg).map(|v| self.pseudo_spectrum(&v))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut peaks = Vec::new();
        for (idx, &k) in points.iter().enumerate() {
            let left = (idx > 0 && points[idx - 1] == k - 1).then(|| values[idx - 1]);
            let right =
                (idx + 1 < points.len() && points[idx + 1] == k + 1).then(|| values[idx + 1]);
            let is_peak = match (left, right) {
                (Some(l), Some(r)) => values[idx] > l && values[idx] > r,
                (None, Some(r)) => k == -limit && values[idx] > r,
                (Some(l), None) => k == limit && values[idx] > l,
                (None, None) => false,
            };
            if is_peak {
                peaks.push(Peak {
                    theta: k as f64 * search.fine_step,
                    value: values[idx],
                });
            }
        }
        peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
        peaks.truncate(self.sources);
        Ok(peaks)
    }
}

/// Grid parameters for [`MusicSubspace::estimate_doas`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoaSearch {
    pub coarse_step: f64,
    pub fine_step: f64,
    /// Half-width of each refinement window, in coarse steps.
    pub window_steps: usize,
}

impl Default for DoaSearch {
    fn default() -> Self {
        DoaSearch {
            coarse_step: 0.1,
            fine_step: 0.005,
            window_steps: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub theta: f64,
    pub value: f64,
}

/// Sampled 1D pseudo-spectrum with its strongest local maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// At most `K` strict local maxima, strongest first.
    pub peaks: Vec<Peak>,
}

impl SpectrumResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,pseudo_spectrum\n");
        for (t, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{v:e}");
        }
        out
    }
}

/// Strict local maxima of a sampled curve; endpoints compare with their one neighbor.
fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .filter(|&i| {
            let left_ok = i == 0 || values[i] > values[i - 1];
            let right_ok = i + 1 == n || values[i] > values[i + 1];
            left_ok && right_ok
        })
        .collect()
}

/// MUSIC pseudo-spectrum of covariance `cov` for `k` sources over `theta_grid`.
pub fn music_spectrum(
    cov: &CMatrix,
    k: usize,
    theta_grid: &[f64],
    cfg: &RadarConfig,
) -> Result<SpectrumResult> {
    MusicSubspace::from_covariance(cov, k)?.spectrum(theta_grid, cfg)
}

/// Reorders `Y` (`mt·mr × Q`) into `Ỹ` (`Q·mt × mr`).
///
/// Row `q·mt + i`, column `l` of `Ỹ` holds the transmit-`i`, receive-`l`
/// component of pulse `q`, so noise-free `Ỹ = F Σ [b(θ_1) … b(θ_K)]ᵀ` with
/// `F = [d(ϑ_k) ⊗ a(θ_k)]`.
pub fn reshape_joint(y: &CMatrix, mt: usize, mr: usize) -> Result<CMatrix> {
    if y.nrows() != mt * mr {
        return Err(Error::dims(format!("{} x Q", mt * mr), shape(y)));
    }
    let q = y.ncols();
    Ok(CMatrix::from_fn(q * mt, mr, |row, l| {
        let (pulse, i) = (row / mt, row % mt);
        y[(i * mr + l, pulse)]
    }))
}

/// Inverse of [`reshape_joint`].
pub fn unreshape_joint(yt: &CMatrix, mt: usize, mr: usize) -> Result<CMatrix> {
    if mt == 0 || yt.nrows() % mt != 0 || yt.ncols() != mr {
        return Err(Error::dims(format!("Q*{mt} x {mr}"), shape(yt)));
    }
    let q = yt.nrows() / mt;
    Ok(CMatrix::from_fn(mt * mr, q, |row, pulse| {
        let (i, l) = (row / mr, row % mr);
        yt[(pulse * mt + i, l)]
    }))
}

/// `R̂_Ỹ = Ỹ Ỹᴴ / mr`.
pub fn joint_covariance(yt: &CMatrix) -> Result<CMatrix> {
    sample_covariance(yt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak2d {
    pub theta: f64,
    pub speed: f64,
    pub value: f64,
}

/// 2D pseudo-spectrum on a DOA × speed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2d {
    pub thetas: Vec<f64>,
    pub speeds: Vec<f64>,
    /// Row-major: `values[i * speeds.len() + j]` is at `(thetas[i], speeds[j])`.
    pub values: Vec<f64>,
    pub peaks: Vec<Peak2d>,
}

impl Spectrum2d {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.speeds.len() + j]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,speed_mps,pseudo_spectrum\n");
        for (i, t) in self.thetas.iter().enumerate() {
            for (j, s) in self.speeds.iter().enumerate() {
                let _ = writeln!(out, "{t},{s},{:e}", self.at(i, j));
            }
        }
        out
    }
}

/// Joint DOA–speed MUSIC with steering `d(ϑ) ⊗ a(θ)` on the `Q·mt`-dim covariance.
pub fn music2d_spectrum(
    cov: &CMatrix,
    k: usize,
    theta_grid: &[f64],
    speed_grid: &[f64],
    cfg: &RadarConfig,
) -> Result<Spectrum2d> {
    let subspace = MusicSubspace::from_covariance(cov, k)?;
    music2d_with(&subspace, theta_grid, speed_grid, cfg)
}

/// 2D MUSIC from a precomputed subspace (e.g. [`MusicSubspace::from_snapshots`] on `Ỹ`).
pub fn music2d_with(
    subspace: &MusicSubspace,
    theta_grid: &[f64],
    speed_grid: &[f64],
    cfg: &RadarConfig,
) -> Result<Spectrum2d> {
    if theta_grid.is_empty() || speed_grid.is_empty() {
        return Err(Error::Domain("empty DOA or speed grid".into()));
    }
    subspace.check_dim(cfg.pulses_q * cfg.mt)?;
    let dopplers: Vec<CVector> = speed_grid
        .iter()
        .map(|&s| doppler_steering(s, cfg))
        .collect();
    let mut values = Vec::with_capacity(theta_grid.len() * speed_grid.len());
    for &t in theta_grid {
        let a = transmit_steering(t, cfg)?;
        for d in &dopplers {
            values.push(subspace.pseudo_spectrum(&kron(d, &a)));
        }
    }
    let (nt, ns) = (theta_grid.len(), speed_grid.len());
    let mut peaks = Vec::new();
    for i in 0..nt {
        for j in 0..ns {
            let v = values[i * ns + j];
            let mut is_peak = nt * ns > 1;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nt as i64 || jj >= ns as i64 {
                        continue;
                    }
                    if values[ii as usize * ns + jj as usize] >= v {
                        is_peak = false;
                    }
                }
            }
            if is_peak {
                peaks.push(Peak2d {
                    theta: theta_grid[i],
                    speed: speed_grid[j],
                    value: v,
                });
            }
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks.truncate(subspace.sources);
    Ok(Spectrum2d {
        thetas: theta_grid.to_vec(),
        speeds: speed_grid.to_vec(),
        values,
        peaks,
    })
}

/// Default resolution tolerance factor `ε`.
pub const RESOLUTION_EPSILON: f64 = 0.1;

/// True iff every estimate lies within `ε·Δθ` of its matched true DOA.
///
/// Truths and estimates are matched in sorted order, which is the assignment
/// minimizing the largest deviation on a line. The bound is closed.
pub fn resolution_success(
    true_doas: &[f64],
    estimated_doas: &[f64],
    delta_theta: f64,
    epsilon: f64,
) -> Result<bool> {
    if true_doas.len() != estimated_doas.len() {
        return Err(Error::Domain(format!(
            "{} estimates for {} targets",
            estimated_doas.len(),
            true_doas.len()
        )));
    }
    let mut truth = true_doas.to_vec();
    let mut est = estimated_doas.to_vec();
    truth.sort_by(f64::total_cmp);
    est.sort_by(f64::total_cmp);
    let bound = epsilon * delta_theta.abs();
    // absorb rounding in θ̂ − θ so that |error| = εΔθ counts as inside
    let slack = 1e-12 * truth.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    Ok(truth
        .iter()
        .zip(&est)
        .all(|(t, e)| (t - e).abs() <= bound + slack))
}
