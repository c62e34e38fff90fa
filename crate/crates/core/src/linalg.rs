// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear algebra used throughout the crate.
//!
//! Everything here works on `ndarray::Array2<Complex64>`. The matrix
//! exponential is a Padé(13) scaling-and-squaring routine and serves as the
//! reference propagator that the chain-series and Monte Carlo routes are
//! compared against.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Complex scalar type used everywhere.
pub type C64 = Complex64;

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn eye(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, c(1.0))
}

pub fn zeros(n: usize) -> Array2<C64> {
    Array2::zeros((n, n))
}

/// Matrix with a single unit entry at `(row, col)` (0-based).
pub fn unit(n: usize, row: usize, col: usize) -> Array2<C64> {
    let mut m = zeros(n);
    m[[row, col]] = c(1.0);
    m
}

/// Conjugate transpose.
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Kronecker product `a ⊗ b` (the first factor is the slow index).
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = s * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Largest entry modulus.
pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Max-entry deviation of `a` from the identity.
pub fn identity_defect(a: &Array2<C64>) -> f64 {
    max_abs_diff(a, &eye(a.nrows()))
}

/// Max-entry norm of `h - h†`.
pub fn hermiticity_defect(h: &Array2<C64>) -> f64 {
    max_abs_diff(h, &dagger(h))
}

/// Defect of †-unitarity: max of `‖U†U - I‖` and `‖UU† - I‖`.
pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let ud = dagger(u);
    identity_defect(&ud.dot(u)).max(identity_defect(&u.dot(&ud)))
}

pub fn vec_norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

// b_0..b_13 from Higham (2005), Table 2.3.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring with a Padé(13) approximant.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return zeros(0);
    }

    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings));

    let id = eye(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b = |k: usize| c(PADE13[k]);

    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u_outer = a6.dot(&u_inner) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = scaled.dot(&u_outer);

    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = a6.dot(&v_inner) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = solve(&q, &p);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    r
}

/// Solves `a x = b` by LU with partial pivoting.
///
/// Panics if `a` is numerically singular; only used on Padé denominators,
/// which are well conditioned by construction.
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[[i, k]].norm().total_cmp(&lu[[j, k]].norm()))
            .unwrap();
        assert!(lu[[pivot, k]].norm() > 0.0, "singular matrix in solve");
        if pivot != k {
            for j in 0..n {
                lu.swap([k, j], [pivot, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [pivot, j]);
            }
        }
        let d = lu[[k, k]];
        for i in (k + 1)..n {
            let f = lu[[i, k]] / d;
            if f == c(0.0) {
                continue;
            }
            for j in k..n {
                let t = lu[[k, j]];
                lu[[i, j]] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[[k, j]];
                x[[i, j]] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let d = lu[[k, k]];
        for j in 0..x.ncols() {
            let mut s = x[[k, j]];
            for i in (k + 1)..n {
                s -= lu[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = s / d;
        }
    }
    x
}

pub(crate) fn to_nalgebra(a: &Array2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Column `k` of the returned matrix is the eigenvector for eigenvalue `k`.
pub fn hermitian_eigen(h: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let eig = to_nalgebra(h).symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Singular values of an arbitrary complex matrix, descending.
pub fn singular_values(a: &Array2<C64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    // nalgebra is happier with tall matrices
    let m = if a.nrows() < a.ncols() {
        to_nalgebra(&dagger(a))
    } else {
        to_nalgebra(a)
    };
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        assert_eq!(expm(&zeros(3)), eye(3));
    }

    #[test]
    fn expm_diagonal_matches_scalar_exponentials() {
        let mut a = zeros(2);
        a[[0, 0]] = C64::new(0.0, -7.0);
        a[[1, 1]] = C64::new(2.0, 1.0);
        let e = expm(&a);
        assert!((e[[0, 0]] - C64::new(0.0, -7.0).exp()).norm() < 1e-13);
        assert!((e[[1, 1]] - C64::new(2.0, 1.0).exp()).norm() < 1e-12);
        assert!(e[[0, 1]].norm() < 1e-14);
    }

    #[test]
    fn expm_nilpotent_is_exact_polynomial() {
        // exp([[0,x],[0,0]]) = [[1,x],[0,1]]
        let mut a = zeros(2);
        a[[0, 1]] = C64::new(3.0, -2.0);
        let e = expm(&a);
        assert!(max_abs_diff(&e, &(eye(2) + &a)) < 1e-14);
    }

    #[test]
    fn expm_agrees_with_eigendecomposition_for_hermitian_generator() {
        let mut h = zeros(3);
        h[[0, 0]] = c(0.3);
        h[[1, 1]] = c(-1.1);
        h[[2, 2]] = c(2.0);
        h[[0, 1]] = C64::new(0.5, 0.25);
        h[[1, 0]] = C64::new(0.5, -0.25);
        h[[1, 2]] = C64::new(-0.75, 1.0);
        h[[2, 1]] = C64::new(-0.75, -1.0);
        let t = 2.5;
        let (vals, vecs) = hermitian_eigen(&h);
        let phases = Array2::from_diag(&Array1::from_iter(
            vals.iter().map(|&e| C64::new(0.0, -e * t).exp()),
        ));
        let oracle = vecs.dot(&phases).dot(&dagger(&vecs));
        let e = expm(&h.mapv(|z| -I * t * z));
        assert!(max_abs_diff(&e, &oracle) < 1e-12);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut a = zeros(3);
        a[[0, 1]] = c(2.0);
        a[[1, 0]] = c(1.0);
        a[[1, 2]] = C64::new(0.0, 1.0);
        a[[2, 2]] = c(4.0);
        a[[2, 0]] = c(1.0);
        let x = Array2::from_shape_fn((3, 1), |(i, _)| C64::new(i as f64, 1.0));
        let b = a.dot(&x);
        assert!(max_abs_diff(&solve(&a, &b), &x) < 1e-14);
    }

    #[test]
    fn kron_dimensions_and_placement() {
        let a = unit(2, 0, 1);
        let b = eye(3);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (6, 6));
        assert_eq!(k[[0, 3]], c(1.0));
        assert_eq!(k[[2, 5]], c(1.0));
        assert_eq!(k[[3, 0]], c(0.0));
    }

    #[test]
    fn singular_values_of_rank_one() {
        let u = Array2::from_shape_fn((2, 1), |(i, _)| c(1.0 + i as f64));
        let v = Array2::from_shape_fn((1, 4), |(_, j)| C64::new(0.0, j as f64 - 1.5));
        let sv = singular_values(&u.dot(&v));
        assert_eq!(sv.len(), 2);
        assert!(sv[0] > 1.0);
        assert!(sv[1] < 1e-12);
    }
}
