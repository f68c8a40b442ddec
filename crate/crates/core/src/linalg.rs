//! Dense complex linear algebra helpers.
//!
//! Arrays are `ndarray` throughout; factorizations (LU, Hermitian eigen,
//! SVD) are delegated to `nalgebra` through cheap copies at the boundary.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Padé(13) coefficients and the θ₁₃ scaling threshold, Higham (2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

pub(crate) fn to_na(a: &Array2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_na(m: &DMatrix<C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Maximum absolute column sum.
pub fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(a: &Array2<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    to_na(a).singular_values().max()
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Entrywise Hermiticity test, relative to the largest entry.
pub fn is_hermitian(a: &Array2<C64>, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = max_abs(a).max(1.0);
    let n = a.nrows();
    (0..n).all(|i| (i..n).all(|j| (a[[i, j]] - a[[j, i]].conj()).norm() <= tol * scale))
}

pub fn is_diagonal(a: &Array2<C64>) -> bool {
    a.indexed_iter().all(|((i, j), z)| i == j || *z == C64::new(0.0, 0.0))
}

fn accumulate(terms: &[(f64, &Array2<C64>)], identity: f64, n: usize) -> Array2<C64> {
    let mut acc = Array2::<C64>::eye(n) * C64::new(identity, 0.0);
    for (coef, m) in terms {
        acc.scaled_add(C64::new(*coef, 0.0), m);
    }
    acc
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(0.5f64.powi(squarings), 0.0);

    let b = &PADE13;
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let u_high = accumulate(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0, n);
    let u_low = accumulate(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1], n);
    let u = a.dot(&(a6.dot(&u_high) + u_low));

    let v_high = accumulate(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0, n);
    let v_low = accumulate(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0], n);
    let v = a6.dot(&v_high) + v_low;

    let p = &v + &u;
    let q = &v - &u;
    let mut r = from_na(
        &to_na(&q)
            .lu()
            .solve(&to_na(&p))
            .expect("Padé denominator is nonsingular after scaling"),
    );
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    r
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues and the
/// unitary matrix whose columns are the eigenvectors.
pub fn hermitian_eigen(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    if !is_hermitian(a, 1e-12) {
        return Err(Error::InvalidArgument(
            "hermitian_eigen called on a non-Hermitian matrix".into(),
        ));
    }
    let eig = nalgebra::SymmetricEigen::new(to_na(a));
    Ok((eig.eigenvalues.iter().copied().collect(), from_na(&eig.eigenvectors)))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(a: &Array2<C64>) -> Result<f64> {
    let (vals, _) = hermitian_eigen(a)?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Pairwise (cascade) summation; the reduction tree depends only on the
/// slice length, so results are reproducible regardless of how the
/// summands were produced.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Default + std::ops::Add<Output = T>,
{
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().fold(T::default(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64, scale: f64) -> Array2<C64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, n), |_| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
        })
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Array2::<C64>::zeros((5, 5));
        let e = expm(&z);
        assert!(max_abs(&(e - Array2::<C64>::eye(5))) < 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let d = Array1::from(vec![c(0.3, -1.0), c(-2.0, 0.5), c(4.0, 3.0), c(-20.0, 0.0)]);
        let e = expm(&Array2::from_diag(&d));
        for i in 0..4 {
            let want = d[i].exp();
            assert!((e[[i, i]] - want).norm() <= 1e-13 * want.norm());
        }
        assert!(e.indexed_iter().all(|((i, j), z)| i == j || z.norm() < 1e-300));
    }

    #[test]
    fn expm_inverse_pair() {
        for seed in 0..5 {
            let m = random_matrix(12, seed, 10.0 / 12.0);
            assert!(one_norm(&m) <= 10.0 + 1e-12);
            let prod = expm(&m).dot(&expm(&(-&m)));
            assert!(max_abs(&(prod - Array2::<C64>::eye(12))) < 1e-10);
        }
    }

    #[test]
    fn expm_matches_eigen_route_for_hermitian() {
        let m = random_matrix(20, 9, 1.0);
        let h = (&m + &dagger(&m)) * c(0.5, 0.0);
        let scale = 50.0 / one_norm(&h);
        let h = &h * c(scale, 0.0);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        let diag = Array2::from_diag(&Array1::from_iter(vals.iter().map(|&v| c(v.exp(), 0.0))));
        let oracle = vecs.dot(&diag).dot(&dagger(&vecs));
        let got = expm(&h);
        let rel = spectral_norm(&(&got - &oracle)) / spectral_norm(&oracle);
        assert!(rel < 1e-12, "relative error {rel}");

        // Anti-Hermitian generator: the exponential is unitary.
        let g = &h * c(0.0, -1.0);
        let u = expm(&g);
        let err = max_abs(&(dagger(&u).dot(&u) - Array2::<C64>::eye(20)));
        assert!(err < 1e-12, "unitarity error {err}");
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 0.25).collect();
        assert_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>());
        let empty: [f64; 0] = [];
        assert_eq!(pairwise_sum(&empty), 0.0);
    }

    #[test]
    fn hermitian_eigen_rejects_general_matrix() {
        let m = random_matrix(4, 1, 1.0);
        assert!(hermitian_eigen(&m).is_err());
    }
}
