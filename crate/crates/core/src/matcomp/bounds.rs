use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, shape, CMatrix};

/// Sample counts sufficient for exact recovery with high probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBound {
    /// `C·max{μ₁², μ₀^½ μ₁, μ₀ n^¼} · n r β log n`.
    pub general: f64,
    /// `C·μ₀ n^{6/5} r β log n`, valid only when `r ≤ n^{1/5}/μ₀`.
    pub improved: Option<f64>,
}

impl SampleBound {
    /// The tightest applicable bound.
    pub fn required(&self) -> f64 {
        self.improved.map_or(self.general, |b| b.min(self.general))
    }
}

/// Uniform-sampling sample-count bound for a rank-`r` `n1 × n2` matrix.
pub fn theorem1_bound(
    n1: usize,
    n2: usize,
    r: usize,
    mu0: f64,
    mu1: f64,
    beta: f64,
    c: f64,
) -> Result<SampleBound> {
    if beta.is_nan() || beta <= 2.0 {
        return Err(Error::Domain(format!("beta must exceed 2, got {beta}")));
    }
    if !(c > 0.0) || !(mu0 > 0.0) || !(mu1 > 0.0) || r == 0 || n1 == 0 || n2 == 0 {
        return Err(Error::Domain(
            "sizes, rank, coherences and C must be positive".into(),
        ));
    }
    let n = n1.max(n2) as f64;
    let r = r as f64;
    let base = n * r * beta * n.ln();
    let factor = (mu1 * mu1).max(mu0.sqrt() * mu1).max(mu0 * n.powf(0.25));
    let improved = (r <= n.powf(0.2) / mu0).then(|| c * mu0 * n.powf(1.2) * r * beta * n.ln());
    Ok(SampleBound {
        general: c * factor * base,
        improved,
    })
}

/// Radius `δ = σ √(m + √(8m))` of the noisy-constraint ball.
pub fn noise_radius(m: usize, sigma: f64) -> f64 {
    let m = m as f64;
    sigma * (m + (8.0 * m).sqrt()).sqrt()
}

/// `4 √((2+p) min(n1,n2) / p) · δ + 2δ`.
pub fn recovery_error_bound(p: f64, n1: usize, n2: usize, delta: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("occupancy {p} outside (0, 1]")));
    }
    let nmin = n1.min(n2) as f64;
    Ok(4.0 * ((2.0 + p) * nmin / p).sqrt() * delta + 2.0 * delta)
}

/// `‖Ẑ − Z‖_F / ‖Z‖_F`.
pub fn relative_error(estimate: &CMatrix, reference: &CMatrix) -> Result<f64> {
    if estimate.shape() != reference.shape() {
        return Err(Error::dims(shape(reference), shape(estimate)));
    }
    let denom = frobenius_sq(reference);
    if denom == 0.0 {
        return Err(Error::Domain("relative error against a zero matrix".into()));
    }
    Ok((frobenius_sq(&(estimate - reference)) / denom).sqrt())
}

/// Samples per degree of freedom, `m / (r (n1 + n2 − r))`.
pub fn samples_per_df(m: usize, n1: usize, n2: usize, r: usize) -> Result<f64> {
    if r == 0 || r > n1.min(n2) {
        return Err(Error::Domain(format!("rank {r} invalid for {n1}x{n2}")));
    }
    Ok(m as f64 / (r * (n1 + n2 - r)) as f64)
}
