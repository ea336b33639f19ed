use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, orthonormality_defect, CMatrix, Svd};

/// Incoherence parameters of a matrix at a given rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceReport {
    pub rank_used: usize,
    /// `μ(U)` of the left singular subspace.
    pub mu_u: f64,
    /// `μ(V)` of the right singular subspace.
    pub mu_v: f64,
    /// `max(μ(U), μ(V))`, the smallest admissible `μ₀`.
    pub mu_max: f64,
    /// `max |Σ_k u_k v_kᴴ| · √(n1 n2 / r)`, the smallest admissible `μ₁`.
    pub mu1: f64,
}

/// `μ(U) = (n/r) max_i ‖P_U e_i‖²` for an orthonormal basis `U` (`n × r`).
///
/// `‖P_U e_i‖²` equals the squared norm of row `i` of the basis.
pub fn coherence_of_subspace(basis: &CMatrix) -> Result<f64> {
    let (n, r) = basis.shape();
    if r == 0 || n == 0 {
        return Err(Error::Input("empty basis".into()));
    }
    let defect = orthonormality_defect(basis);
    if defect > 1e-10 {
        return Err(Error::Input(format!(
            "basis columns are not orthonormal (defect {defect:.2e})"
        )));
    }
    let max_row = (0..n)
        .map(|i| basis.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(n as f64 / r as f64 * max_row)
}

/// Coherence at the numerical rank: singular values above `rank_threshold · σ₁`.
pub fn matrix_coherence(m: &CMatrix, rank_threshold: f64) -> Result<CoherenceReport> {
    let svd = nonzero_svd(m)?;
    let r = svd.numerical_rank(rank_threshold).max(1);
    report(&svd, m.nrows(), m.ncols(), r)
}

/// Coherence using the leading `rank` singular vectors regardless of their size.
pub fn matrix_coherence_at_rank(m: &CMatrix, rank: usize) -> Result<CoherenceReport> {
    let svd = nonzero_svd(m)?;
    if rank == 0 || rank > svd.singular_values.len() {
        return Err(Error::Domain(format!(
            "rank {rank} invalid for a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    report(&svd, m.nrows(), m.ncols(), rank)
}

fn nonzero_svd(m: &CMatrix) -> Result<Svd> {
    if m.is_empty() || frobenius_sq(m) == 0.0 {
        return Err(Error::Domain(
            "coherence of a zero matrix is undefined".into(),
        ));
    }
    Svd::new(m)
}

fn report(svd: &Svd, n1: usize, n2: usize, r: usize) -> Result<CoherenceReport> {
    let u = svd.left_basis(r);
    let v = svd.right_basis(r);
    let mu_u = coherence_of_subspace(&u)?;
    let mu_v = coherence_of_subspace(&v)?;
    let uv = &u * v.adjoint();
    let max_entry = uv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(CoherenceReport {
        rank_used: r,
        mu_u,
        mu_v,
        mu_max: mu_u.max(mu_v),
        mu1: max_entry * ((n1 * n2) as f64 / r as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use num_complex::Complex64;

    fn random(rows: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| rng.complex_normal(1.0))
    }

    #[test]
    fn subspace_extremes() {
        let n = 9;
        let e1 = CMatrix::from_fn(n, 1, |i, _| {
            Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        assert!((coherence_of_subspace(&e1).unwrap() - n as f64).abs() < 1e-12);
        let flat = CMatrix::from_element(n, 1, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
        assert!((coherence_of_subspace(&flat).unwrap() - 1.0).abs() < 1e-12);
        let not_unit = CMatrix::from_element(n, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(
            coherence_of_subspace(&not_unit),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn subspace_matches_explicit_projector() {
        let mut rng = SeededRng::new(11);
        for &(n, r) in &[(7usize, 2usize), (12, 3), (20, 5)] {
            let basis = Svd::new(&random(n, r, &mut rng)).unwrap().left_basis(r);
            let projector = &basis * basis.adjoint();
            let brute = (0..n)
                .map(|i| {
                    projector
                        .column(i)
                        .iter()
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
                * n as f64
                / r as f64;
            let mu = coherence_of_subspace(&basis).unwrap();
            assert!((mu - brute).abs() < 1e-10);
            assert!(mu >= 1.0 - 1e-12 && mu <= n as f64 / r as f64 + 1e-12);
        }
    }

    #[test]
    fn mu1_bounded_by_mu0_sqrt_r() {
        let mut rng = SeededRng::new(5);
        for trial in 0..100 {
            let r = 1 + trial % 4;
            let (n1, n2) = (8 + trial % 7, 10 + trial % 5);
            let m = random(n1, r, &mut rng) * random(r, n2, &mut rng);
            let rep = matrix_coherence(&m, 1e-8).unwrap();
            assert_eq!(rep.rank_used, r);
            assert!(rep.mu1 <= rep.mu_max * (r as f64).sqrt() + 1e-9);
            assert!(rep.mu1 >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn zero_matrix_rejected() {
        assert!(matches!(
            matrix_coherence(&CMatrix::zeros(3, 3), 1e-8),
            Err(Error::Domain(_))
        ));
        let m = CMatrix::identity(3, 3);
        assert!(matrix_coherence_at_rank(&m, 4).is_err());
        let rep = matrix_coherence_at_rank(&m, 3).unwrap();
        assert!((rep.mu_max - 1.0).abs() < 1e-12);
    }
}
