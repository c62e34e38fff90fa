// SPDX-License-Identifier: Apache-2.0

use ndarray::{array, Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, dagger, hermiticity_defect, hermitian_eigen, zeros, C64, I};

/// Tolerance on `max |H − H†|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A d×d Hermitian matrix, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: Array2<C64>,
}

impl Hamiltonian {
    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        let (r, cols) = matrix.dim();
        if r != cols || r == 0 {
            return Err(Error::NotSquare { rows: r, cols });
        }
        let deviation = hermiticity_defect(&matrix);
        if deviation.is_nan() || deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: zeros(dim) }
    }

    pub fn pauli_x() -> Self {
        Self {
            matrix: array![[c(0.0), c(1.0)], [c(1.0), c(0.0)]],
        }
    }

    pub fn pauli_y() -> Self {
        Self {
            matrix: array![[c(0.0), -I], [I, c(0.0)]],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            matrix: array![[c(1.0), c(0.0)], [c(0.0), c(-1.0)]],
        }
    }

    /// `(A + A†)/2` with `A` having i.i.d. standard normal real and imaginary
    /// parts. Exactly Hermitian.
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Array2::from_shape_simple_fn((dim, dim), || {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        Self {
            matrix: (&a + &dagger(&a)) * c(0.5),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// `L = −iH`.
    pub fn generator(&self) -> Array2<C64> {
        self.matrix.mapv(|z| -I * z)
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_norm(&self) -> f64 {
        let (vals, _) = hermitian_eigen(&self.matrix);
        vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Eigenvalues in ascending order with matching unit eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, Array2<C64>) {
        hermitian_eigen(&self.matrix)
    }

    /// The `k`-th eigenvector (ascending eigenvalue order).
    pub fn eigenvector(&self, k: usize) -> Option<Array1<C64>> {
        if k >= self.dim() {
            return None;
        }
        let (_, vecs) = self.eigen();
        Some(vecs.column(k).to_owned())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.mapv(|z| z * factor),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, vec_norm};

    #[test]
    fn paulis_are_hermitian() {
        for h in [Hamiltonian::pauli_x(), Hamiltonian::pauli_y(), Hamiltonian::pauli_z()] {
            assert!(Hamiltonian::new(h.matrix().clone()).is_ok());
            assert!((h.spectral_norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian_perturbation() {
        let mut m = Hamiltonian::pauli_z().matrix().clone();
        m[[0, 1]] += c(1e-3);
        match Hamiltonian::new(m) {
            Err(Error::NotHermitian { deviation }) => assert!((deviation - 1e-3).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            Hamiltonian::new(Array2::zeros((2, 3))),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn random_is_exactly_hermitian_and_reproducible() {
        let h = Hamiltonian::random(5, 9);
        assert_eq!(hermiticity_defect(h.matrix()), 0.0);
        assert_eq!(h, Hamiltonian::random(5, 9));
        assert_ne!(h, Hamiltonian::random(5, 10));
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let h = Hamiltonian::random(4, 3);
        let (vals, _) = h.eigen();
        for (k, &val) in vals.iter().enumerate() {
            let v = h.eigenvector(k).unwrap();
            assert!((vec_norm(&v) - 1.0).abs() < 1e-12);
            let hv = h.matrix().dot(&v);
            let lv = v.mapv(|z| z * val);
            let diff = Array2::from_shape_vec((4, 1), (&hv - &lv).to_vec()).unwrap();
            assert!(max_abs_diff(&diff, &Array2::zeros((4, 1))) < 1e-12);
        }
        assert!(h.eigenvector(4).is_none());
    }
}
