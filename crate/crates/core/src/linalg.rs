//! Dense complex helpers: nalgebra storage, faer factorizations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Compact SVD with singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns (not the adjoint).
    pub v: CMatrix,
}

impl Svd {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Domain("SVD of an empty matrix".into()));
        }
        if !all_finite(m) {
            return Err(Error::Input(
                "SVD of a matrix with non-finite entries".into(),
            ));
        }
        let a = to_faer(m);
        let svd = a
            .thin_svd()
            .map_err(|e| Error::Input(format!("SVD did not converge: {e:?}")))?;
        let s = svd.S().column_vector();
        let k = s.nrows();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));
        let (fu, fv) = (svd.U(), svd.V());
        Ok(Svd {
            u: CMatrix::from_fn(m.nrows(), k, |i, j| fu[(i, order[j])]),
            singular_values: order.iter().map(|&i| s[i].re).collect(),
            v: CMatrix::from_fn(m.ncols(), k, |i, j| fv[(i, order[j])]),
        })
    }

    /// Number of singular values strictly above `rel_threshold * sigma_1`.
    pub fn numerical_rank(&self, rel_threshold: f64) -> usize {
        let s1 = self.singular_values.first().copied().unwrap_or(0.0);
        if s1 == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .filter(|&&s| s > rel_threshold * s1)
            .count()
    }

    pub fn left_basis(&self, r: usize) -> CMatrix {
        self.u.columns(0, r).into_owned()
    }

    pub fn right_basis(&self, r: usize) -> CMatrix {
        self.v.columns(0, r).into_owned()
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::dims("non-empty square matrix", shape(m)));
        }
        if !all_finite(m) {
            return Err(Error::Input(
                "eigen-decomposition of a non-finite matrix".into(),
            ));
        }
        let eig = to_faer(m)
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Input(format!("eigen-decomposition did not converge: {e:?}")))?;
        let vals = eig.S().column_vector();
        let vecs = eig.U();
        let n = m.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re));
        Ok(HermitianEigen {
            eigenvalues: order.iter().map(|&i| vals[i].re).collect(),
            eigenvectors: CMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]),
        })
    }
}

fn to_faer(m: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn shape(m: &CMatrix) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

/// Kronecker product `a ⊗ b` of two column vectors; `b` varies fastest.
pub fn kron(a: &CVector, b: &CVector) -> CVector {
    let nb = b.len();
    CVector::from_fn(a.len() * nb, |idx, _| a[idx / nb] * b[idx % nb])
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest absolute deviation of `BᴴB` from the identity.
pub fn orthonormality_defect(basis: &CMatrix) -> f64 {
    let gram = basis.adjoint() * basis;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(
                ((i * 7 + j * 3) % 11) as f64 - 5.0,
                ((i * 5 + j) % 13) as f64 - 6.0,
            )
        })
    }

    #[test]
    fn svd_reconstructs_and_sorts() {
        for &(r, c) in &[(6, 4), (4, 6), (5, 5)] {
            let m = sample(r, c);
            let svd = Svd::new(&m).unwrap();
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
            let k = svd.singular_values.len();
            let s = CMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    Complex64::new(svd.singular_values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let back = &svd.u * s * svd.v.adjoint();
            assert!((back - &m).norm() < 1e-10 * m.norm());
            assert!(orthonormality_defect(&svd.u) < 1e-12);
            assert!(orthonormality_defect(&svd.v) < 1e-12);
        }
    }

    #[test]
    fn hermitian_eigen_ascending() {
        let a = sample(5, 3);
        let h = &a * a.adjoint();
        let eig = HermitianEigen::new(&h).unwrap();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        // rank 3 out of 5
        assert!(eig.eigenvalues[0].abs() < 1e-9 * eig.eigenvalues[4]);
        assert!(eig.eigenvalues[1].abs() < 1e-9 * eig.eigenvalues[4]);
        assert!(eig.eigenvalues[2] > 1e-6);
    }

    #[test]
    fn kron_ordering() {
        let one = Complex64::new(1.0, 0.0);
        let a = CVector::from_vec(vec![one, one * 2.0]);
        let b = CVector::from_vec(vec![one * 3.0, one * 5.0, one * 7.0]);
        let k = kron(&a, &b);
        let expect = [3.0, 5.0, 7.0, 6.0, 10.0, 14.0];
        for (z, e) in k.iter().zip(expect) {
            assert_eq!(z.re, e);
        }
    }
}
