//! Singular value thresholding for nuclear-norm matrix completion.
//!
//! Solves `min τ‖X‖_* + ½‖X‖_F²` subject to `P_Ω(X) = P_Ω(Y)` by the
//! Uzawa-type iteration
//!
//! ```text
//! X_k     = shrink(D_{k-1}, τ)
//! D_k     = D_{k-1} + step · P_Ω(Y − X_k)
//! ```
//!
//! started from the kicked dual `D_0 = k₀ · step · P_Ω(Y)` with
//! `k₀ = ⌈τ / (step ‖P_Ω(Y)‖₂)⌉`. For noisy data the iteration is stopped as
//! soon as the iterate enters the ball `‖P_Ω(X − Y)‖_F ≤ δ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, frobenius_sq, CMatrix, Svd};
use crate::sampling::ObservedMatrix;

/// Relative residual beyond which the iteration is declared divergent.
const DIVERGED: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SvtParams {
    /// Shrinkage threshold; `None` means `5·√(n1 n2)`.
    pub tau: Option<f64>,
    /// Dual step; `None` means `1.2 / p`.
    pub step: Option<f64>,
    /// Relative residual `‖P_Ω(X−Y)‖_F / ‖P_Ω(Y)‖_F` at which to stop.
    pub tol: f64,
    pub max_iter: usize,
    /// Absolute residual `δ` at which to stop (noisy constraint).
    pub noise_radius: Option<f64>,
}

impl Default for SvtParams {
    fn default() -> Self {
        SvtParams {
            tau: None,
            step: None,
            tol: 1e-4,
            max_iter: 500,
            noise_radius: None,
        }
    }
}

impl SvtParams {
    pub fn with_noise_radius(mut self, delta: f64) -> Self {
        self.noise_radius = (delta > 0.0).then_some(delta);
        self
    }

    /// `(τ, step)` after filling defaults for an `n1 × n2` problem with occupancy `p`.
    pub fn resolve(&self, n1: usize, n2: usize, p: f64) -> Result<(f64, f64)> {
        let tau = self.tau.unwrap_or(5.0 * ((n1 * n2) as f64).sqrt());
        let step = self.step.unwrap_or(1.2 / p);
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        // Convergence is guaranteed for step < 2; the 1.2/p recipe exceeds it on
        // purpose and is stable in practice up to 2/p.
        if !(step > 0.0 && step < 2.0 / p) {
            return Err(Error::Domain(format!(
                "step {step} outside (0, 2/p) for p = {p}"
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Domain("tol and max_iter must be positive".into()));
        }
        Ok((tau, step))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub recovered: CMatrix,
    pub iterations: usize,
    /// Relative residual of the returned iterate.
    pub final_residual: f64,
    pub converged: bool,
    /// Relative residual after every iteration.
    pub residual_history: Vec<f64>,
}

/// Shrinks every singular value of `m` by `tau`, clamping at zero.
pub fn singular_value_shrink(m: &CMatrix, tau: f64) -> Result<CMatrix> {
    let svd = Svd::new(m)?;
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - tau;
        if shrunk <= 0.0 {
            break;
        }
        let u = svd.u.column(k);
        let v = svd.v.column(k);
        out += (u * Complex64::new(shrunk, 0.0)) * v.adjoint();
    }
    Ok(out)
}

/// Completes `observed` by singular value thresholding.
///
/// Non-convergence within `max_iter` is reported through
/// [`CompletionResult::converged`], not as an error.
pub fn svt_complete(observed: &ObservedMatrix, params: &SvtParams) -> Result<CompletionResult> {
    let (n1, n2) = (observed.nrows(), observed.ncols());
    let mask = &observed.mask;
    let m = mask.count();
    if m == 0 {
        return Err(Error::Domain("no observed entries".into()));
    }
    if !all_finite(&observed.values) {
        return Err(Error::Input(
            "observed matrix has non-finite entries".into(),
        ));
    }
    let p = m as f64 / (n1 * n2) as f64;
    let (tau, step) = params.resolve(n1, n2, p)?;

    let data = mask.project(&observed.values);
    let data_norm = frobenius_sq(&data).sqrt();
    if data_norm == 0.0 {
        return Ok(CompletionResult {
            recovered: CMatrix::zeros(n1, n2),
            iterations: 0,
            final_residual: 0.0,
            converged: true,
            residual_history: Vec::new(),
        });
    }

    let spectral = Svd::new(&data)?.singular_values[0];
    let kick = (tau / (step * spectral)).ceil().max(1.0);
    let mut dual = &data * Complex64::new(kick * step, 0.0);
    let mut x = CMatrix::zeros(n1, n2);
    let mut history = Vec::with_capacity(params.max_iter.min(1024));
    let mut converged = false;

    for _ in 0..params.max_iter {
        // a diverging dual (step too large for the sampling pattern) ends the
        // run with the last finite iterate
        if !all_finite(&dual) {
            break;
        }
        let next = singular_value_shrink(&dual, tau)?;
        let mut residual_sq = 0.0;
        for (i, j) in mask.entries() {
            let r = data[(i, j)] - next[(i, j)];
            residual_sq += r.norm_sqr();
            dual[(i, j)] += r * step;
        }
        let residual = residual_sq.sqrt();
        let relative = residual / data_norm;
        if !relative.is_finite() || relative > DIVERGED {
            break;
        }
        x = next;
        history.push(relative);
        let inside_ball = params.noise_radius.is_some_and(|delta| residual <= delta);
        if relative <= params.tol || inside_ball {
            converged = true;
            break;
        }
    }

    Ok(CompletionResult {
        recovered: x,
        iterations: history.len(),
        final_residual: history.last().copied().unwrap_or(0.0),
        converged,
        residual_history: history,
    })
}
