//! Experiment configuration, presets and the key/value config grammar.
//!
//! A config file is a sequence of lines `key = value`. Blank lines and
//! everything after `#` are ignored; keys are case sensitive. A `preset` line,
//! if present, must come first and loads that preset as the base; later lines
//! override it. The same `key=value` pairs are accepted by `--override`.
//!
//! | key | value |
//! |-----|-------|
//! | `preset` | preset name (see [`PRESETS`]) |
//! | `measure` | `coherence`, `recovery`, `resolution` or `spectrum` |
//! | `scheme` | `I` or `II` |
//! | `waveform` | `hadamard` or `g-orth` |
//! | `mt`, `mr`, `nyquist`, `pulses` | positive integers |
//! | `carrier_freq`, `t_pri` | Hz, seconds |
//! | `dt` | transmit spacing in wavelengths, or `filled` for `mr/2` |
//! | `dr` | receive spacing in wavelengths |
//! | `targets` | number of targets `K` |
//! | `doa_first` | `uniform` or a fixed angle in degrees |
//! | `doas` | explicit comma list of angles (overrides `doa_first`/`delta_theta`) |
//! | `delta_theta` | spacing between consecutive targets, degrees |
//! | `speed` | `uniform:lo:hi` or a comma list of fixed speeds (m/s) |
//! | `occupancy`, `per_row`, `samples_per_df` | sampling budget (last one set wins) |
//! | `snr_db` | number or `inf` |
//! | `trials`, `first_trial`, `seed` | Monte-Carlo range and master seed |
//! | `mu0_grid` | comma list of thresholds for `Pr(μ_max > μ₀)` |
//! | `epsilon` | resolution tolerance factor |
//! | `doa_method` | `music` or `music2d` |
//! | `speed_step`, `theta_step` | 2D-MUSIC grid steps |
//! | `svt_max_iter`, `svt_tol`, `svt_tau` | solver settings (`svt_tau = auto` restores the default) |
//! | `sweep.<axis>` | comma list of values; an empty value removes the axis |
//!
//! Sweep axes are `samples_per_df`, `delta_theta`, `snr_db`, `nyquist`, `mr`,
//! `array` (sets `mt = mr`), `mt_nyquist` (sets `mt = nyquist`), `waveform`,
//! `scheme` and `doas` (target sets separated by `;`). Points are the
//! cartesian product, first axis slowest.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matcomp::SvtParams;
use crate::signal_model::{RadarConfig, SamplingScheme, WaveformKind};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 9] = [
    "coh-s1",
    "coh-s2",
    "recov-s1",
    "recov-s2",
    "wave-spectrum",
    "wave-recov",
    "doa-s1",
    "doa-s2",
    "scheme-compare",
];

/// Δθ list of the DOA resolution figures, degrees.
pub const DOA_DELTA_THETAS: [f64; 10] = [0.05, 0.08, 0.1, 0.12, 0.15, 0.18, 0.2, 0.22, 0.25, 0.3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Coherence,
    Recovery,
    Resolution,
    Spectrum,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Coherence => "coherence",
            Measure::Recovery => "recovery",
            Measure::Resolution => "resolution",
            Measure::Spectrum => "spectrum",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherence" => Ok(Measure::Coherence),
            "recovery" => Ok(Measure::Recovery),
            "resolution" => Ok(Measure::Resolution),
            "spectrum" => Ok(Measure::Spectrum),
            other => Err(Error::Parse(format!("unknown measure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoaMethod {
    Music,
    /// Joint DOA–speed search; the DOA is read off the 2D peaks.
    Music2d,
}

/// Law of the first target's DOA; target `k` sits at `θ₁ + k·Δθ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DoaLaw {
    /// Uniform over the range that keeps every target inside `[−90°, 90°]`.
    Uniform,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpeedLaw {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// One speed per target, in target order.
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TxSpacing {
    Wavelengths(f64),
    /// `mr · λ/2`, so the virtual array is a filled half-wave ULA.
    Filled,
}

/// How many entries each receiver forwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Fraction of each row, rounded to the nearest count.
    Occupancy(f64),
    PerRow(usize),
    /// Total samples per degree of freedom `m / (K (n1 + n2 − K))`.
    SamplesPerDf(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    SamplesPerDf(Vec<f64>),
    DeltaTheta(Vec<f64>),
    Snr(Vec<f64>),
    Nyquist(Vec<usize>),
    ReceiveAntennas(Vec<usize>),
    ArraySize(Vec<usize>),
    TransmitAndNyquist(Vec<usize>),
    Waveform(Vec<WaveformKind>),
    Scheme(Vec<SamplingScheme>),
    TargetSet(Vec<Vec<f64>>),
}

impl SweepAxis {
    /// Column name in the output table (also the `sweep.<name>` key).
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::SamplesPerDf(_) => "samples_per_df",
            SweepAxis::DeltaTheta(_) => "delta_theta",
            SweepAxis::Snr(_) => "snr_db",
            SweepAxis::Nyquist(_) => "nyquist",
            SweepAxis::ReceiveAntennas(_) => "mr",
            SweepAxis::ArraySize(_) => "array",
            SweepAxis::TransmitAndNyquist(_) => "mt_nyquist",
            SweepAxis::Waveform(_) => "waveform",
            SweepAxis::Scheme(_) => "scheme",
            SweepAxis::TargetSet(_) => "doas",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::SamplesPerDf(v) | SweepAxis::DeltaTheta(v) | SweepAxis::Snr(v) => v.len(),
            SweepAxis::Nyquist(v)
            | SweepAxis::ReceiveAntennas(v)
            | SweepAxis::ArraySize(v)
            | SweepAxis::TransmitAndNyquist(v) => v.len(),
            SweepAxis::Waveform(v) => v.len(),
            SweepAxis::Scheme(v) => v.len(),
            SweepAxis::TargetSet(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value `i` as written in the output table.
    pub fn label(&self, i: usize) -> String {
        match self {
            SweepAxis::SamplesPerDf(v) | SweepAxis::DeltaTheta(v) | SweepAxis::Snr(v) => {
                v[i].to_string()
            }
            SweepAxis::Nyquist(v)
            | SweepAxis::ReceiveAntennas(v)
            | SweepAxis::ArraySize(v)
            | SweepAxis::TransmitAndNyquist(v) => v[i].to_string(),
            SweepAxis::Waveform(v) => v[i].to_string(),
            SweepAxis::Scheme(v) => v[i].to_string(),
            SweepAxis::TargetSet(v) => join(&v[i], " "),
        }
    }

    /// Writes value `i` into `cfg`.
    pub fn apply(&self, i: usize, cfg: &mut ExperimentConfig) {
        match self {
            SweepAxis::SamplesPerDf(v) => cfg.budget = Budget::SamplesPerDf(v[i]),
            SweepAxis::DeltaTheta(v) => cfg.delta_theta = v[i],
            SweepAxis::Snr(v) => cfg.snr_db = v[i],
            SweepAxis::Nyquist(v) => cfg.nyquist = v[i],
            SweepAxis::ReceiveAntennas(v) => cfg.mr = v[i],
            SweepAxis::ArraySize(v) => {
                cfg.mt = v[i];
                cfg.mr = v[i];
            }
            SweepAxis::TransmitAndNyquist(v) => {
                cfg.mt = v[i];
                cfg.nyquist = v[i];
            }
            SweepAxis::Waveform(v) => cfg.waveform = v[i],
            SweepAxis::Scheme(v) => cfg.scheme = v[i],
            SweepAxis::TargetSet(v) => {
                cfg.targets = v[i].len();
                cfg.doas = Some(v[i].clone());
            }
        }
    }

    fn parse(axis: &str, value: &str) -> Result<Self> {
        Ok(match axis {
            "samples_per_df" => SweepAxis::SamplesPerDf(parse_list(value)?),
            "delta_theta" => SweepAxis::DeltaTheta(parse_list(value)?),
            "snr_db" => SweepAxis::Snr(parse_list(value)?),
            "nyquist" => SweepAxis::Nyquist(parse_list(value)?),
            "mr" => SweepAxis::ReceiveAntennas(parse_list(value)?),
            "array" => SweepAxis::ArraySize(parse_list(value)?),
            "mt_nyquist" => SweepAxis::TransmitAndNyquist(parse_list(value)?),
            "waveform" => SweepAxis::Waveform(parse_list(value)?),
            "scheme" => SweepAxis::Scheme(parse_list(value)?),
            "doas" => SweepAxis::TargetSet(
                value
                    .split(';')
                    .map(parse_list)
                    .collect::<Result<Vec<_>>>()?,
            ),
            other => return Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        })
    }
}

/// Everything needed to run one figure-class experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: String,
    pub measure: Measure,
    pub scheme: SamplingScheme,
    pub waveform: WaveformKind,
    pub mt: usize,
    pub mr: usize,
    pub nyquist: usize,
    pub pulses: usize,
    pub carrier_freq: f64,
    pub t_pri: f64,
    pub dt: TxSpacing,
    /// Receive spacing in wavelengths.
    pub dr: f64,
    pub targets: usize,
    pub doa_first: DoaLaw,
    /// Explicit target DOAs; takes precedence over `doa_first` and `delta_theta`.
    pub doas: Option<Vec<f64>>,
    pub delta_theta: f64,
    pub speed: SpeedLaw,
    pub budget: Budget,
    pub snr_db: f64,
    pub n_trials: usize,
    pub first_trial: usize,
    pub master_seed: u64,
    pub mu0_grid: Vec<f64>,
    pub epsilon: f64,
    pub doa_method: DoaMethod,
    pub theta_step: f64,
    pub speed_step: f64,
    pub svt: SvtParams,
    pub sweep: Vec<SweepAxis>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: "custom".into(),
            measure: Measure::Recovery,
            scheme: SamplingScheme::MatchedFilter,
            waveform: WaveformKind::GaussianOrthogonal,
            mt: 20,
            mr: 20,
            nyquist: 256,
            pulses: 1,
            carrier_freq: 1e9,
            t_pri: RadarConfig::DEFAULT_T_PRI,
            dt: TxSpacing::Wavelengths(0.5),
            dr: 0.5,
            targets: 2,
            doa_first: DoaLaw::Uniform,
            doas: None,
            delta_theta: 5.0,
            speed: SpeedLaw::Uniform { lo: 0.0, hi: 500.0 },
            budget: Budget::Occupancy(0.5),
            snr_db: 25.0,
            n_trials: 100,
            first_trial: 0,
            master_seed: 1,
            mu0_grid: vec![1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0],
            epsilon: crate::estimation::RESOLUTION_EPSILON,
            doa_method: DoaMethod::Music,
            theta_step: 0.1,
            speed_step: 5.0,
            svt: SvtParams::default(),
            sweep: Vec::new(),
        }
    }
}

/// The configuration of a named figure experiment.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig {
        preset: name.to_string(),
        ..ExperimentConfig::default()
    };
    let mdf = |v: &[f64]| SweepAxis::SamplesPerDf(v.to_vec());
    let cfg = match name {
        "coh-s1" => ExperimentConfig {
            measure: Measure::Coherence,
            n_trials: 500,
            sweep: vec![
                SweepAxis::ArraySize(vec![10, 20, 40]),
                SweepAxis::DeltaTheta(vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0]),
            ],
            ..base
        },
        "coh-s2" => ExperimentConfig {
            measure: Measure::Coherence,
            scheme: SamplingScheme::RawSamples,
            speed: SpeedLaw::Uniform {
                lo: 150.0,
                hi: 450.0,
            },
            n_trials: 500,
            sweep: vec![
                SweepAxis::Nyquist(vec![32, 64, 128, 256]),
                SweepAxis::DeltaTheta(vec![1.0, 5.0, 10.0, 20.0, 30.0]),
            ],
            ..base
        },
        "recov-s1" => ExperimentConfig {
            mt: 40,
            mr: 40,
            dt: TxSpacing::Filled,
            sweep: vec![
                SweepAxis::DeltaTheta(vec![0.0, 1.0, 5.0]),
                mdf(&[1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0]),
            ],
            ..base
        },
        "recov-s2" => ExperimentConfig {
            scheme: SamplingScheme::RawSamples,
            mt: 40,
            mr: 40,
            dt: TxSpacing::Filled,
            sweep: vec![
                SweepAxis::Waveform(vec![
                    WaveformKind::Hadamard,
                    WaveformKind::GaussianOrthogonal,
                ]),
                SweepAxis::DeltaTheta(vec![0.0, 1.0, 5.0]),
                mdf(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0]),
            ],
            ..base
        },
        "wave-spectrum" => ExperimentConfig {
            measure: Measure::Spectrum,
            mt: 10,
            nyquist: 32,
            n_trials: 1,
            sweep: vec![SweepAxis::Waveform(vec![
                WaveformKind::Hadamard,
                WaveformKind::GaussianOrthogonal,
            ])],
            ..base
        },
        "wave-recov" => ExperimentConfig {
            scheme: SamplingScheme::RawSamples,
            mt: 10,
            mr: 128,
            nyquist: 32,
            sweep: vec![
                SweepAxis::TargetSet(vec![vec![20.0, 40.0], vec![0.0, 80.0]]),
                SweepAxis::Waveform(vec![
                    WaveformKind::Hadamard,
                    WaveformKind::GaussianOrthogonal,
                ]),
                mdf(&[1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0]),
            ],
            ..base
        },
        "doa-s1" | "doa-s2" => {
            let scheme_two = name == "doa-s2";
            let mut sweep = Vec::new();
            if scheme_two {
                sweep.push(SweepAxis::Waveform(vec![
                    WaveformKind::GaussianOrthogonal,
                    WaveformKind::Hadamard,
                ]));
            }
            sweep.push(SweepAxis::Snr(vec![10.0, 25.0]));
            sweep.push(SweepAxis::DeltaTheta(DOA_DELTA_THETAS.to_vec()));
            ExperimentConfig {
                measure: Measure::Resolution,
                scheme: if scheme_two {
                    SamplingScheme::RawSamples
                } else {
                    SamplingScheme::MatchedFilter
                },
                pulses: 5,
                dt: TxSpacing::Filled,
                doa_first: DoaLaw::Fixed(10.0),
                speed: SpeedLaw::Fixed(vec![150.0, 400.0]),
                n_trials: 200,
                sweep,
                ..base
            }
        }
        "scheme-compare" => ExperimentConfig {
            mr: 40,
            dt: TxSpacing::Filled,
            sweep: vec![
                SweepAxis::ReceiveAntennas(vec![40, 80]),
                SweepAxis::DeltaTheta(vec![5.0, 30.0]),
                SweepAxis::Scheme(vec![
                    SamplingScheme::MatchedFilter,
                    SamplingScheme::RawSamples,
                ]),
                SweepAxis::TransmitAndNyquist(vec![10, 20, 40, 60, 80]),
            ],
            ..base
        },
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(cfg)
}

impl ExperimentConfig {
    /// Parses a config file body (see the module docs for the grammar).
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Option<ExperimentConfig> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                split_pair(line).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
            if key == "preset" {
                if cfg.is_some() {
                    return Err(Error::Config(format!(
                        "line {}: preset must be the first setting",
                        lineno + 1
                    )));
                }
                cfg = Some(preset(value)?);
                continue;
            }
            cfg.get_or_insert_with(ExperimentConfig::default)
                .set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        let cfg = cfg.unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) = split_pair(pair)?;
        if key == "preset" {
            return Err(Error::Config(
                "preset cannot be overridden; use --preset".into(),
            ));
        }
        self.set(key, value)
    }

    /// Sets one key (see the module docs for the recognised keys).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        if let Some(axis) = key.strip_prefix("sweep.") {
            let pos = self.sweep.iter().position(|a| a.name() == axis);
            if value.is_empty() {
                if let Some(i) = pos {
                    self.sweep.remove(i);
                }
                return Ok(());
            }
            let parsed = SweepAxis::parse(axis, value)?;
            match pos {
                Some(i) => self.sweep[i] = parsed,
                None => self.sweep.push(parsed),
            }
            return Ok(());
        }
        match key {
            "measure" => self.measure = value.parse()?,
            "scheme" => self.scheme = value.parse()?,
            "waveform" => self.waveform = value.parse()?,
            "mt" => self.mt = parse_one(value)?,
            "mr" => self.mr = parse_one(value)?,
            "nyquist" => self.nyquist = parse_one(value)?,
            "pulses" => self.pulses = parse_one(value)?,
            "carrier_freq" => self.carrier_freq = parse_one(value)?,
            "t_pri" => self.t_pri = parse_one(value)?,
            "dt" => {
                self.dt = if value == "filled" {
                    TxSpacing::Filled
                } else {
                    TxSpacing::Wavelengths(parse_one(value)?)
                }
            }
            "dr" => self.dr = parse_one(value)?,
            "targets" => self.targets = parse_one(value)?,
            "doa_first" => {
                self.doa_first = if value == "uniform" {
                    DoaLaw::Uniform
                } else {
                    DoaLaw::Fixed(parse_one(value)?)
                }
            }
            "doas" => {
                if value.is_empty() {
                    self.doas = None;
                } else {
                    let list: Vec<f64> = parse_list(value)?;
                    self.targets = list.len();
                    self.doas = Some(list);
                }
            }
            "delta_theta" => self.delta_theta = parse_one(value)?,
            "speed" => {
                self.speed = match value.strip_prefix("uniform:") {
                    Some(range) => {
                        let (lo, hi) = range
                            .split_once(':')
                            .ok_or_else(|| Error::Parse(format!("speed range '{range}'")))?;
                        SpeedLaw::Uniform {
                            lo: parse_one(lo)?,
                            hi: parse_one(hi)?,
                        }
                    }
                    None => SpeedLaw::Fixed(parse_list(value)?),
                }
            }
            "occupancy" => self.budget = Budget::Occupancy(parse_one(value)?),
            "per_row" => self.budget = Budget::PerRow(parse_one(value)?),
            "samples_per_df" => self.budget = Budget::SamplesPerDf(parse_one(value)?),
            "snr_db" => self.snr_db = parse_snr(value)?,
            "trials" => self.n_trials = parse_one(value)?,
            "first_trial" => self.first_trial = parse_one(value)?,
            "seed" => self.master_seed = parse_one(value)?,
            "mu0_grid" => self.mu0_grid = parse_list(value)?,
            "epsilon" => self.epsilon = parse_one(value)?,
            "doa_method" => {
                self.doa_method = match value {
                    "music" => DoaMethod::Music,
                    "music2d" => DoaMethod::Music2d,
                    other => return Err(Error::Parse(format!("unknown doa_method '{other}'"))),
                }
            }
            "theta_step" => self.theta_step = parse_one(value)?,
            "speed_step" => self.speed_step = parse_one(value)?,
            "svt_max_iter" => self.svt.max_iter = parse_one(value)?,
            "svt_tol" => self.svt.tol = parse_one(value)?,
            "svt_tau" => {
                self.svt.tau = if value == "auto" {
                    None
                } else {
                    Some(parse_one(value)?)
                }
            }
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Checks the settings that do not depend on the sweep point.
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.targets == 0 {
            return Err(Error::Config("at least one target required".into()));
        }
        if let Budget::Occupancy(p) = self.budget {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Config(format!("occupancy {p} outside (0, 1]")));
            }
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("invalid snr_db {}", self.snr_db)));
        }
        if !(self.epsilon > 0.0) || !(self.theta_step > 0.0) || !(self.speed_step > 0.0) {
            return Err(Error::Config(
                "epsilon and grid steps must be positive".into(),
            ));
        }
        if let SpeedLaw::Fixed(v) = &self.speed {
            if v.len() < self.targets && self.doas.is_none() {
                return Err(Error::Config(format!(
                    "{} fixed speeds for {} targets",
                    v.len(),
                    self.targets
                )));
            }
        }
        if self.sweep.iter().any(SweepAxis::is_empty) {
            return Err(Error::Config("sweep axis without values".into()));
        }
        self.radar()?;
        Ok(())
    }

    /// The radar geometry of this configuration.
    pub fn radar(&self) -> Result<RadarConfig> {
        let dt = match self.dt {
            TxSpacing::Wavelengths(w) => w,
            TxSpacing::Filled => self.mr as f64 / 2.0,
        };
        let cfg = RadarConfig::ula(self.mt, self.mr, self.carrier_freq)
            .with_spacing_wavelengths(dt, self.dr)
            .with_pulses(self.pulses)
            .with_nyquist_samples(self.nyquist)
            .with_pri(self.t_pri);
        cfg.validate()?;
        Ok(cfg)
    }

    /// `(rows, cols)` of the per-pulse fusion matrix for the configured scheme.
    pub fn matrix_shape(&self) -> (usize, usize) {
        match self.scheme {
            SamplingScheme::MatchedFilter => (self.mr, self.mt),
            SamplingScheme::RawSamples => (self.mr, self.nyquist),
        }
    }

    /// Entries forwarded per receiver.
    pub fn per_row(&self) -> Result<usize> {
        let (rows, cols) = self.matrix_shape();
        let count = match self.budget {
            Budget::Occupancy(p) => (p * cols as f64).round() as usize,
            Budget::PerRow(l) => l,
            Budget::SamplesPerDf(s) => {
                let r = self.targets.min(rows).min(cols);
                let df = (r * (rows + cols - r)) as f64;
                (s * df / rows as f64).round() as usize
            }
        };
        if count == 0 || count > cols {
            return Err(Error::Config(format!(
                "budget {:?} gives {count} samples per row of {cols}",
                self.budget
            )));
        }
        Ok(count)
    }

    /// Trial indices covered, `first_trial..first_trial + n_trials`.
    pub fn trial_range(&self) -> std::ops::Range<usize> {
        self.first_trial..self.first_trial + self.n_trials
    }
}

fn split_pair(line: &str) -> Result<(&str, &str)> {
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected key=value, got '{line}'")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::Parse(format!("empty key in '{line}'")));
    }
    Ok((k, v.trim()))
}

fn parse_one<T: FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse '{}'", s.trim())))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_one)
        .collect()
}

fn parse_snr(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        other => parse_one(other),
    }
}

fn join(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_figure_setups() {
        let doa = preset("doa-s1").unwrap();
        let dt = doa
            .sweep
            .iter()
            .find_map(|a| match a {
                SweepAxis::DeltaTheta(v) => Some(v.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(
            dt,
            vec![0.05, 0.08, 0.1, 0.12, 0.15, 0.18, 0.2, 0.22, 0.25, 0.3]
        );
        assert_eq!(
            (doa.mt, doa.mr, doa.pulses, doa.per_row().unwrap()),
            (20, 20, 5, 10)
        );

        let rec = preset("recov-s1").unwrap();
        assert_eq!((rec.snr_db, rec.mt, rec.mr), (25.0, 40, 40));

        let wave = preset("wave-recov").unwrap();
        assert_eq!((wave.mr, wave.mt, wave.nyquist), (128, 10, 32));

        let s2 = preset("doa-s2").unwrap();
        assert_eq!(s2.per_row().unwrap(), 128);

        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(matches!(preset("fig-99"), Err(Error::Config(_))));
    }

    #[test]
    fn samples_per_df_budget() {
        let mut cfg = preset("recov-s1").unwrap();
        // df = 2 (40 + 40 − 2) = 156; m/df = 5 → 780 samples → 19.5 per row
        cfg.budget = Budget::SamplesPerDf(5.0);
        assert_eq!(cfg.per_row().unwrap(), 20);
        cfg.budget = Budget::SamplesPerDf(2.0);
        assert_eq!(cfg.per_row().unwrap(), 8);
        cfg.budget = Budget::SamplesPerDf(50.0);
        assert!(cfg.per_row().is_err());
    }

    #[test]
    fn filled_aperture_spacing() {
        let cfg = preset("doa-s1").unwrap().radar().unwrap();
        assert!((cfg.dt / cfg.wavelength - 10.0).abs() < 1e-12);
        assert!((cfg.dr / cfg.wavelength - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parses_files_and_overrides() {
        let text = "preset = doa-s1   # base\n\n trials = 7\nsweep.delta_theta = 0.1, 0.3\nspeed = uniform:0:100\nsnr_db = inf\n";
        let mut cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.preset, "doa-s1");
        assert_eq!(cfg.n_trials, 7);
        assert_eq!(cfg.snr_db, f64::INFINITY);
        assert_eq!(cfg.speed, SpeedLaw::Uniform { lo: 0.0, hi: 100.0 });
        assert_eq!(cfg.sweep[1], SweepAxis::DeltaTheta(vec![0.1, 0.3]));

        cfg.apply_override("sweep.snr_db=").unwrap();
        assert_eq!(cfg.sweep.len(), 1);
        cfg.apply_override("sweep.doas = 20,40; 0,80").unwrap();
        assert_eq!(cfg.sweep[1].label(1), "0 80");
        cfg.apply_override("dt=0.5").unwrap();
        assert_eq!(cfg.dt, TxSpacing::Wavelengths(0.5));

        assert!(cfg.apply_override("bogus=1").is_err());
        assert!(cfg.apply_override("trials").is_err());
        assert!(cfg.apply_override("mt=abc").is_err());
        assert!(ExperimentConfig::parse("trials = 0").is_err());
        assert!(ExperimentConfig::parse("occupancy = 1.5").is_err());
        assert!(ExperimentConfig::parse("trials = 3\npreset = doa-s1").is_err());
    }
}
