//! Colocated MIMO pulse-radar signal model.
//!
//! A ULA of `mt` transmitters and `mr` receivers illuminates `K` far-field
//! point targets. For pulse `q` the noise-free matched-filter outputs form
//! the `mr × mt` matrix `Z_q = B Σ D_q Aᵀ`; without matched filtering the
//! receivers see `Z̃_q = Z_q S̃` over the `N` Nyquist snapshots of the
//! orthonormal waveform matrix `S̃`. The bulk range delay is absorbed into
//! the reflectivities (single range bin).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, kron, shape, CMatrix, CVector};
use crate::rng::SeededRng;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Array geometry, carrier and pulse timing.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig {
    pub mt: usize,
    pub mr: usize,
    /// Transmit element spacing in meters.
    pub dt: f64,
    /// Receive element spacing in meters.
    pub dr: f64,
    pub carrier_freq: f64,
    pub wavelength: f64,
    /// Number of pulses `Q` in a coherent processing interval.
    pub pulses_q: usize,
    pub t_pri: f64,
    pub t_pulse: f64,
    /// Nyquist sampling period.
    pub t_sample: f64,
    /// Nyquist samples per pulse, `t_pulse / t_sample`.
    pub n_nyquist: usize,
}

impl RadarConfig {
    pub const DEFAULT_T_PRI: f64 = 1e-4;
    pub const DEFAULT_T_SAMPLE: f64 = 1e-8;

    /// Half-wavelength ULAs at `carrier_freq`, one pulse, `n_nyquist = mt`.
    pub fn ula(mt: usize, mr: usize, carrier_freq: f64) -> Self {
        let wavelength = SPEED_OF_LIGHT / carrier_freq;
        RadarConfig {
            mt,
            mr,
            dt: wavelength / 2.0,
            dr: wavelength / 2.0,
            carrier_freq,
            wavelength,
            pulses_q: 1,
            t_pri: Self::DEFAULT_T_PRI,
            t_pulse: mt as f64 * Self::DEFAULT_T_SAMPLE,
            t_sample: Self::DEFAULT_T_SAMPLE,
            n_nyquist: mt,
        }
    }

    /// Sets the spacings in units of wavelength.
    pub fn with_spacing_wavelengths(mut self, dt: f64, dr: f64) -> Self {
        self.dt = dt * self.wavelength;
        self.dr = dr * self.wavelength;
        self
    }

    pub fn with_pulses(mut self, q: usize) -> Self {
        self.pulses_q = q;
        self
    }

    /// Sets `N` and the pulse width `N · T_s` consistently.
    pub fn with_nyquist_samples(mut self, n: usize) -> Self {
        self.n_nyquist = n;
        self.t_pulse = n as f64 * self.t_sample;
        self
    }

    pub fn with_pri(mut self, t_pri: f64) -> Self {
        self.t_pri = t_pri;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mt == 0 || self.mr == 0 || self.pulses_q == 0 || self.n_nyquist == 0 {
            return Err(Error::Config(
                "antenna, pulse and sample counts must be positive".into(),
            ));
        }
        let positives = [
            ("dt", self.dt),
            ("dr", self.dr),
            ("carrier_freq", self.carrier_freq),
            ("wavelength", self.wavelength),
            ("t_pri", self.t_pri),
            ("t_pulse", self.t_pulse),
            ("t_sample", self.t_sample),
        ];
        for (name, v) in positives {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let c = self.wavelength * self.carrier_freq;
        if ((c - SPEED_OF_LIGHT) / SPEED_OF_LIGHT).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "wavelength·frequency = {c} differs from the speed of light"
            )));
        }
        if (self.t_pulse / self.t_sample).round() as usize != self.n_nyquist {
            return Err(Error::Config(format!(
                "n_nyquist = {} inconsistent with t_pulse/t_sample = {}",
                self.n_nyquist,
                self.t_pulse / self.t_sample
            )));
        }
        Ok(())
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Direction of arrival in degrees, within `[-90, 90]`.
    pub doa_deg: f64,
    /// Radial speed in m/s.
    pub speed: f64,
    pub reflectivity: Complex64,
}

impl Target {
    pub fn new(doa_deg: f64, speed: f64, reflectivity: Complex64) -> Self {
        Target {
            doa_deg,
            speed,
            reflectivity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_doa(self.doa_deg)?;
        if !self.speed.is_finite() {
            return Err(Error::Domain(format!("speed {} is not finite", self.speed)));
        }
        if !(self.reflectivity.re.is_finite() && self.reflectivity.im.is_finite()) {
            return Err(Error::Domain("reflectivity is not finite".into()));
        }
        Ok(())
    }
}

/// The targets illuminated in one range bin.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub targets: Vec<Target>,
}

impl Scene {
    pub fn new(targets: Vec<Target>) -> Self {
        Scene { targets }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn doas(&self) -> Vec<f64> {
        self.targets.iter().map(|t| t.doa_deg).collect()
    }

    /// Number of distinct DOAs (exact comparison), i.e. the rank of `Z_q`.
    pub fn distinct_doas(&self) -> usize {
        let mut d = self.doas();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d.len()
    }
}

/// Which fusion-center matrix a receiver forwards samples of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingScheme {
    /// Scheme I: random subset of the matched-filter bank outputs, `mr × mt`.
    MatchedFilter,
    /// Scheme II: random sub-Nyquist time samples, `mr × N`.
    RawSamples,
}

impl fmt::Display for SamplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingScheme::MatchedFilter => "I",
            SamplingScheme::RawSamples => "II",
        })
    }
}

impl FromStr for SamplingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" | "mf" | "scheme-i" | "matched-filter" => Ok(SamplingScheme::MatchedFilter),
            "ii" | "2" | "raw" | "scheme-ii" | "nyquist" => Ok(SamplingScheme::RawSamples),
            other => Err(Error::Parse(format!("unknown sampling scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveformKind {
    Hadamard,
    GaussianOrthogonal,
}

impl fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveformKind::Hadamard => "hadamard",
            WaveformKind::GaussianOrthogonal => "g-orth",
        })
    }
}

impl FromStr for WaveformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hadamard" => Ok(WaveformKind::Hadamard),
            "g-orth" | "gorth" | "gaussian" | "gaussian-orthogonal" => {
                Ok(WaveformKind::GaussianOrthogonal)
            }
            other => Err(Error::Parse(format!("unknown waveform kind '{other}'"))),
        }
    }
}

/// Orthonormal transmit snapshots `S̃` (`mt × N`, `S̃ S̃ᴴ = I`).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformMatrix {
    pub samples: CMatrix,
    pub kind: WaveformKind,
    /// Total transmit energy; a global scale absorbed into the reflectivities.
    pub energy: f64,
}

impl WaveformMatrix {
    pub fn mt(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n(&self) -> usize {
        self.samples.ncols()
    }
}

/// A full (noise-free or noisy) fusion-center data matrix for one pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub values: CMatrix,
    pub scheme: SamplingScheme,
    /// 1-based pulse index.
    pub pulse_index: usize,
}

fn check_doa(doa_deg: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&doa_deg) {
        return Err(Error::Domain(format!(
            "direction of arrival {doa_deg}° outside [-90°, 90°]"
        )));
    }
    Ok(())
}

fn ula_steering(doa_deg: f64, count: usize, spacing: f64, cfg: &RadarConfig) -> Result<CVector> {
    check_doa(doa_deg)?;
    let step = cfg.wavenumber() * spacing * doa_deg.to_radians().sin();
    Ok(CVector::from_fn(count, |i, _| {
        Complex64::from_polar(1.0, step * i as f64)
    }))
}

/// Transmit steering vector `a(θ)`, element `i` = `exp(j 2π/λ · i·dt · sin θ)`.
pub fn transmit_steering(doa_deg: f64, cfg: &RadarConfig) -> Result<CVector> {
    ula_steering(doa_deg, cfg.mt, cfg.dt, cfg)
}

/// Receive steering vector `b(θ)`.
pub fn receive_steering(doa_deg: f64, cfg: &RadarConfig) -> Result<CVector> {
    ula_steering(doa_deg, cfg.mr, cfg.dr, cfg)
}

/// Slow-time Doppler phase `exp(j 2π/λ · 2ϑ (q−1) T_PRI)` for 1-based pulse `q`.
pub fn doppler_phase(speed: f64, pulse_index: usize, cfg: &RadarConfig) -> Result<Complex64> {
    if pulse_index == 0 {
        return Err(Error::Domain("pulse index is 1-based".into()));
    }
    let phase = cfg.wavenumber() * 2.0 * speed * (pulse_index - 1) as f64 * cfg.t_pri;
    Ok(Complex64::from_polar(1.0, phase))
}

/// Doppler steering across the `Q` pulses, `d(ϑ)`.
pub fn doppler_steering(speed: f64, cfg: &RadarConfig) -> CVector {
    let step = cfg.wavenumber() * 2.0 * speed * cfg.t_pri;
    CVector::from_fn(cfg.pulses_q, |q, _| {
        Complex64::from_polar(1.0, step * q as f64)
    })
}

/// Virtual-array steering `a(θ) ⊗ b(θ)` of length `mt·mr` (receive index fastest).
pub fn virtual_steering(doa_deg: f64, cfg: &RadarConfig) -> Result<CVector> {
    let a = transmit_steering(doa_deg, cfg)?;
    let b = receive_steering(doa_deg, cfg)?;
    Ok(kron(&a, &b))
}

/// Sylvester–Hadamard matrix of order `n` (a power of two), entries ±1.
pub fn hadamard(n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Unsupported(format!(
            "Hadamard order {n} (only powers of two are constructed)"
        )));
    }
    let mut h = vec![vec![1.0]];
    while h.len() < n {
        let m = h.len();
        let mut next = vec![vec![0.0; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        }
        h = next;
    }
    Ok(h)
}

/// Generates `mt × n` orthonormal transmit snapshots.
///
/// `Hadamard` takes the first `mt` rows of the order-`n` Sylvester matrix
/// scaled by `1/√n`. `GaussianOrthogonal` orthonormalizes the rows of an i.i.d.
/// standard complex Gaussian matrix drawn from `seed` (unused for Hadamard).
pub fn gen_waveforms(
    kind: WaveformKind,
    mt: usize,
    n: usize,
    energy: f64,
    seed: u64,
) -> Result<WaveformMatrix> {
    if mt == 0 {
        return Err(Error::Domain(
            "at least one transmit antenna required".into(),
        ));
    }
    if n < mt {
        return Err(Error::InfeasibleOrthogonality { mt, n });
    }
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::Domain(format!(
            "energy must be positive, got {energy}"
        )));
    }
    let samples = match kind {
        WaveformKind::Hadamard => {
            let h = hadamard(n)?;
            let scale = 1.0 / (n as f64).sqrt();
            CMatrix::from_fn(mt, n, |i, j| Complex64::new(h[i][j] * scale, 0.0))
        }
        WaveformKind::GaussianOrthogonal => {
            let mut rng = SeededRng::new(seed);
            let g = CMatrix::from_fn(mt, n, |_, _| rng.complex_normal(1.0));
            orthonormalize_rows(g)?
        }
    };
    Ok(WaveformMatrix {
        samples,
        kind,
        energy,
    })
}

/// Modified Gram–Schmidt over rows with one re-orthogonalization pass.
fn orthonormalize_rows(mut m: CMatrix) -> Result<CMatrix> {
    let rows = m.nrows();
    for i in 0..rows {
        for _pass in 0..2 {
            for k in 0..i {
                let proj: Complex64 = (0..m.ncols()).map(|j| m[(k, j)].conj() * m[(i, j)]).sum();
                for j in 0..m.ncols() {
                    let sub = proj * m[(k, j)];
                    m[(i, j)] -= sub;
                }
            }
        }
        let norm = m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Input("rank-deficient Gaussian draw".into()));
        }
        for j in 0..m.ncols() {
            m[(i, j)] /= norm;
        }
    }
    Ok(m)
}

/// Noise-free matched-filter matrix `Z_q = B Σ D_q Aᵀ` (`mr × mt`).
pub fn noise_free_mf_matrix(
    scene: &Scene,
    cfg: &RadarConfig,
    pulse_index: usize,
) -> Result<DataMatrix> {
    if scene.is_empty() {
        return Err(Error::Domain("scene has no targets".into()));
    }
    let mut z = CMatrix::zeros(cfg.mr, cfg.mt);
    for target in &scene.targets {
        target.validate()?;
        let a = transmit_steering(target.doa_deg, cfg)?;
        let b = receive_steering(target.doa_deg, cfg)?;
        let coef = target.reflectivity * doppler_phase(target.speed, pulse_index, cfg)?;
        z += (b * coef) * a.transpose();
    }
    Ok(DataMatrix {
        values: z,
        scheme: SamplingScheme::MatchedFilter,
        pulse_index,
    })
}

/// Noise-free raw sample matrix `Z̃_q = Z_q S̃` (`mr × N`).
pub fn noise_free_raw_matrix(
    scene: &Scene,
    cfg: &RadarConfig,
    wave: &WaveformMatrix,
    pulse_index: usize,
) -> Result<DataMatrix> {
    if wave.mt() != cfg.mt {
        return Err(Error::dims(
            format!("{} x N waveform", cfg.mt),
            shape(&wave.samples),
        ));
    }
    let mf = noise_free_mf_matrix(scene, cfg, pulse_index)?;
    Ok(DataMatrix {
        values: mf.values * &wave.samples,
        scheme: SamplingScheme::RawSamples,
        pulse_index,
    })
}

/// Per-entry noise variance giving `snr_db` against the mean entry power of `z`.
pub fn noise_variance(z: &CMatrix, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    let entries = (z.nrows() * z.ncols()).max(1) as f64;
    frobenius_sq(z) / entries * 10f64.powf(-snr_db / 10.0)
}

/// Adds circular white Gaussian noise at a per-entry SNR; `+∞` leaves `z` unchanged.
pub fn add_noise(z: &DataMatrix, snr_db: f64, seed: u64) -> Result<DataMatrix> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("SNR {snr_db} dB is not usable")));
    }
    let variance = noise_variance(&z.values, snr_db);
    if variance == 0.0 {
        return Ok(z.clone());
    }
    let mut rng = SeededRng::new(seed);
    let mut values = z.values.clone();
    // column-major fill order is part of the determinism contract
    for v in values.iter_mut() {
        *v += rng.complex_normal(variance);
    }
    Ok(DataMatrix {
        values,
        scheme: z.scheme,
        pulse_index: z.pulse_index,
    })
}

/// Maximum over waveform columns of the column power spectrum.
///
/// Column `n` of `S̃` is a snapshot across the transmit antennas; its power at
/// normalized spatial frequency `ω` is `|Σ_i s̃[i,n] e^{-j2πωi}|²`. A target at
/// `θ` sits at `ω = (dt/λ) sin θ`.
pub fn column_power_spectrum(wave: &WaveformMatrix, omega_grid: &[f64]) -> Result<Vec<f64>> {
    if omega_grid.is_empty() {
        return Err(Error::Domain("empty frequency grid".into()));
    }
    if let Some(w) = omega_grid.iter().find(|w| !(-0.5..=0.5).contains(*w)) {
        return Err(Error::Domain(format!("frequency {w} outside [-1/2, 1/2]")));
    }
    let s = &wave.samples;
    Ok(omega_grid
        .iter()
        .map(|&omega| {
            let phasors: Vec<Complex64> = (0..s.nrows())
                .map(|i| Complex64::from_polar(1.0, -2.0 * PI * omega * i as f64))
                .collect();
            (0..s.ncols())
                .map(|col| {
                    phasors
                        .iter()
                        .enumerate()
                        .map(|(i, p)| s[(i, col)] * p)
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .fold(0.0, f64::max)
        })
        .collect())
}
