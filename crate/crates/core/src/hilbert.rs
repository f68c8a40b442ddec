//! Truncated Fock space: ladder operators, quadratures, states and
//! expectation values.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::linalg;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A bosonic mode truncated to `dim` levels, together with the physical
/// constants that fix the quadrature scales.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockSpace {
    dim: usize,
    hbar: f64,
    mass: f64,
    omega: f64,
}

impl FockSpace {
    pub fn new(dim: usize, hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        check_positive("hbar", hbar)?;
        check_positive("mass", mass)?;
        check_positive("omega", omega)?;
        Ok(Self { dim, hbar, mass, omega })
    }

    /// ħ = m = ω = 1.
    pub fn natural(dim: usize) -> Result<Self> {
        Self::new(dim, 1.0, 1.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Position scale √(ħ/2mω): Q = q0 (a + a†).
    pub fn q0(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }

    /// Momentum scale √(mħω/2): P = i p0 (a† − a).
    pub fn p0(&self) -> f64 {
        (self.mass * self.hbar * self.omega / 2.0).sqrt()
    }

    /// s with s² = mω/2ħ, the width parameter of the coherent-state
    /// wavefunctions.
    pub fn s(&self) -> f64 {
        (self.mass * self.omega / (2.0 * self.hbar)).sqrt()
    }

    fn op(&self, matrix: Array2<C64>) -> OperatorMatrix {
        OperatorMatrix { matrix, space: *self }
    }

    pub fn annihilation(&self) -> OperatorMatrix {
        let mut m = Array2::zeros((self.dim, self.dim));
        for n in 1..self.dim {
            m[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
        }
        self.op(m)
    }

    pub fn creation(&self) -> OperatorMatrix {
        self.annihilation().dagger()
    }

    pub fn number(&self) -> OperatorMatrix {
        self.op(Array2::from_diag(&Array1::from_iter(
            (0..self.dim).map(|n| C64::new(n as f64, 0.0)),
        )))
    }

    pub fn position(&self) -> OperatorMatrix {
        let a = self.annihilation().matrix;
        let ad = linalg::dagger(&a);
        self.op((a + ad) * C64::new(self.q0(), 0.0))
    }

    pub fn momentum(&self) -> OperatorMatrix {
        let a = self.annihilation().matrix;
        let ad = linalg::dagger(&a);
        self.op((ad - a) * C64::new(0.0, self.p0()))
    }

    pub fn identity(&self) -> OperatorMatrix {
        self.op(Array2::eye(self.dim))
    }

    pub fn zero_operator(&self) -> OperatorMatrix {
        self.op(Array2::zeros((self.dim, self.dim)))
    }

    pub fn vacuum(&self) -> StateVector {
        StateVector::basis(*self, 0).expect("dim >= 2")
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, found })
        }
    }
}

/// A dense operator on a [`FockSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    matrix: Array2<C64>,
    space: FockSpace,
}

impl OperatorMatrix {
    pub fn new(matrix: Array2<C64>, space: FockSpace) -> Result<Self> {
        if matrix.nrows() != space.dim {
            return Err(Error::DimensionMismatch { expected: space.dim, found: matrix.nrows() });
        }
        if matrix.ncols() != space.dim {
            return Err(Error::DimensionMismatch { expected: space.dim, found: matrix.ncols() });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator has non-finite entries".into()));
        }
        Ok(Self { matrix, space })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }
    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }
    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: linalg::dagger(&self.matrix), space: self.space }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { matrix: &self.matrix * c, space: self.space }
    }

    /// Operator product `self · other`.
    pub fn dot(&self, other: &Self) -> Self {
        Self { matrix: self.matrix.dot(&other.matrix), space: self.space }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix + &other.matrix, space: self.space }
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix - &other.matrix, space: self.space }
    }

    /// `self + c·other`
    pub fn plus_scaled(&self, c: C64, other: &Self) -> Self {
        let mut matrix = self.matrix.clone();
        matrix.scaled_add(c, &other.matrix);
        Self { matrix, space: self.space }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.dot(other).minus(&other.dot(self))
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector { amplitudes: self.matrix.dot(&psi.amplitudes), space: self.space }
    }

    pub fn exp(&self) -> Self {
        matrix_exponential(self)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::is_hermitian(&self.matrix, tol)
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.matrix)
    }
}

/// Amplitudes of a (generally unnormalized) pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<C64>,
    space: FockSpace,
}

impl StateVector {
    pub fn new(amplitudes: Array1<C64>, space: FockSpace) -> Result<Self> {
        space.check_len(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("state has non-finite amplitudes".into()));
        }
        Ok(Self { amplitudes, space })
    }

    pub fn basis(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::Truncation(format!("level {n} outside dim {}", space.dim)));
        }
        let mut amplitudes = Array1::zeros(space.dim);
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, space })
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }
    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn norm_sqr(&self) -> f64 {
        let terms: Vec<f64> = self.amplitudes.iter().map(|z| z.norm_sqr()).collect();
        linalg::pairwise_sum(&terms)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { amplitudes: &self.amplitudes * c, space: self.space }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateState(format!("cannot normalize a state of norm {n}")));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C64 {
        let terms: Vec<C64> = self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .collect();
        linalg::pairwise_sum(&terms)
    }

    /// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let a = self.normalized()?;
        let b = other.normalized()?;
        Ok(a.inner(&b).norm_sqr())
    }

    /// Unnormalized vector distance ‖self − other‖.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.amplitudes - &other.amplitudes).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn projector(&self) -> DensityMatrix {
        let v = &self.amplitudes;
        let m = Array2::from_shape_fn((v.len(), v.len()), |(i, j)| v[i] * v[j].conj());
        DensityMatrix { matrix: m, space: self.space }
    }

    /// Position-representation wavefunction ⟨x|ψ⟩ on the given points,
    /// using real Hermite functions (the phase convention of
    /// [`FockSpace::position`] and [`FockSpace::momentum`]).
    pub fn position_wavefunction(&self, xs: &[f64]) -> Vec<C64> {
        let sp = self.space;
        let scale = (sp.mass * sp.omega / sp.hbar).sqrt();
        let norm0 = (sp.mass * sp.omega / (std::f64::consts::PI * sp.hbar)).powf(0.25);
        xs.iter()
            .map(|&x| {
                let xi = scale * x;
                let mut prev = 0.0;
                let mut cur = norm0 * (-0.5 * xi * xi).exp();
                let mut acc = self.amplitudes[0] * cur;
                for n in 1..sp.dim {
                    let next = (2.0 / n as f64).sqrt() * xi * cur
                        - ((n - 1) as f64 / n as f64).sqrt() * prev;
                    prev = cur;
                    cur = next;
                    acc += self.amplitudes[n] * cur;
                }
                acc
            })
            .collect()
    }
}

/// A unit vector with the logarithm of the norm it was divided by; the
/// unnormalized state is `exp(log_norm) · state`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedState {
    pub state: StateVector,
    pub log_norm: f64,
}

impl TrackedState {
    pub fn from_state(psi: &StateVector) -> Result<Self> {
        let n = psi.norm();
        Ok(Self { state: psi.normalized()?, log_norm: n.ln() })
    }

    /// ln⟨ψ|ψ⟩ of the unnormalized state.
    pub fn log_norm_sqr(&self) -> f64 {
        2.0 * self.log_norm
    }

    pub fn norm_sqr(&self) -> f64 {
        (2.0 * self.log_norm).exp()
    }

    /// The unnormalized vector; overflows for extreme log-norms.
    pub fn unnormalized(&self) -> StateVector {
        self.state.scale(C64::new(self.log_norm.exp(), 0.0))
    }
}

/// A density matrix. Construction checks Hermiticity; normalization is
/// explicit.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: Array2<C64>,
    space: FockSpace,
}

impl DensityMatrix {
    pub fn new(matrix: Array2<C64>, space: FockSpace) -> Result<Self> {
        let op = OperatorMatrix::new(matrix, space)?;
        if !op.is_hermitian(1e-12) {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        Ok(Self { matrix: op.matrix, space })
    }

    pub(crate) fn from_parts_unchecked(matrix: Array2<C64>, space: FockSpace) -> Self {
        Self { matrix, space }
    }

    pub fn diagonal(rho: &[f64], space: FockSpace) -> Result<Self> {
        space.check_len(rho.len())?;
        let m = Array2::from_diag(&Array1::from_iter(rho.iter().map(|&p| C64::new(p, 0.0))));
        Self::new(m, space)
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }
    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().iter().copied().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::DegenerateState(format!("density matrix has trace {tr}")));
        }
        Ok(Self { matrix: &self.matrix / C64::new(tr, 0.0), space: self.space })
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }

    pub fn purity(&self) -> f64 {
        let rho = self.normalized().map(|r| r.matrix).unwrap_or_else(|_| self.matrix.clone());
        rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Tr(ρ O) / Tr ρ
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        let tr = self.trace();
        if tr.norm() == 0.0 {
            return Err(Error::DegenerateState("density matrix has zero trace".into()));
        }
        let n = self.space.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[[i, j]] * op.matrix[[j, i]];
            }
        }
        Ok(acc / tr)
    }

    /// Tr(ρO²)/Trρ − (Tr(ρO)/Trρ)², real part.
    pub fn variance(&self, op: &OperatorMatrix) -> Result<f64> {
        let m = self.expectation(op)?;
        let shifted = op.minus(&self.space.identity().scale(m));
        Ok(self.expectation(&shifted.dagger().dot(&shifted))?.re)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        linalg::min_hermitian_eigenvalue(&self.matrix)
    }

    /// Hermitian part, (ρ + ρ†)/2.
    pub fn symmetrized(&self) -> Self {
        let m = (&self.matrix + &linalg::dagger(&self.matrix)) * C64::new(0.5, 0.0);
        Self { matrix: m, space: self.space }
    }
}

/// Normalized coherent state |α⟩.
pub fn coherent_state(alpha: C64, space: FockSpace) -> Result<StateVector> {
    let r = alpha.norm();
    if r * r + 6.0 * r > space.dim as f64 {
        return Err(Error::Truncation(format!(
            "coherent amplitude |α| = {r:.4} needs |α|² + 6|α| <= dim = {}",
            space.dim
        )));
    }
    let mut amps = Array1::zeros(space.dim);
    amps[0] = C64::new((-0.5 * r * r).exp(), 0.0);
    for n in 1..space.dim {
        amps[n] = amps[n - 1] * alpha / (n as f64).sqrt();
    }
    Ok(StateVector { amplitudes: amps, space })
}

/// Thermal (geometric) photon distribution with mean `nbar`.
pub fn thermal_state(nbar: f64, space: FockSpace) -> Result<DensityMatrix> {
    check_nonnegative("nbar", nbar)?;
    let q = nbar / (1.0 + nbar);
    if q.powi(space.dim as i32) >= 1e-12 {
        return Err(Error::Truncation(format!(
            "thermal tail q^dim = {:.3e} is not below 1e-12 (nbar = {nbar}, dim = {})",
            q.powi(space.dim as i32),
            space.dim
        )));
    }
    let mut p: Vec<f64> = (0..space.dim).map(|n| q.powi(n as i32)).collect();
    let total: f64 = linalg::pairwise_sum(&p);
    p.iter_mut().for_each(|x| *x /= total);
    DensityMatrix::diagonal(&p, space)
}

pub fn matrix_exponential(m: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix { matrix: linalg::expm(&m.matrix), space: m.space }
}

/// ⟨ψ|O|ψ⟩ / ⟨ψ|ψ⟩
pub fn expectation(psi: &StateVector, op: &OperatorMatrix) -> Result<C64> {
    psi.space.check_len(op.matrix.nrows())?;
    let n2 = psi.norm_sqr();
    if !(n2 > 0.0) {
        return Err(Error::DegenerateState("expectation in a zero-norm state".into()));
    }
    Ok(psi.inner(&op.apply(psi)) / n2)
}

/// ⟨ΔO† ΔO⟩ on the normalized state, ΔO = O − ⟨O⟩; for Hermitian O this
/// is ⟨O²⟩ − ⟨O⟩².
pub fn variance(psi: &StateVector, op: &OperatorMatrix) -> Result<f64> {
    let m = expectation(psi, op)?;
    let phi = op.apply(psi);
    let shifted = StateVector { amplitudes: &phi.amplitudes - &(&psi.amplitudes * m), space: psi.space };
    Ok(shifted.norm_sqr() / psi.norm_sqr())
}

/// Central moments ⟨(O − ⟨O⟩)^k⟩ for k = 1..=4 of a Hermitian operator on
/// the normalized state, computed in the operator's eigenbasis.
pub fn central_moments(psi: &StateVector, op: &OperatorMatrix) -> Result<[f64; 4]> {
    let (vals, vecs) = linalg::hermitian_eigen(&op.matrix)?;
    let psi = psi.normalized()?;
    let coeffs = linalg::dagger(&vecs).dot(&psi.amplitudes);
    let probs: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
    let mean: f64 = vals.iter().zip(&probs).map(|(v, p)| v * p).sum();
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = vals.iter().zip(&probs).map(|(v, p)| p * (v - mean).powi(k as i32 + 1)).sum();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_tiny_dimension() {
        assert_eq!(FockSpace::natural(1), Err(Error::InvalidDimension(1)));
        assert!(FockSpace::new(4, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lowest_truncation_annihilation() {
        let sp = FockSpace::natural(2).unwrap();
        let a = sp.annihilation();
        assert_eq!(a.matrix()[[0, 1]], c(1.0, 0.0));
        assert_eq!(a.matrix()[[0, 0]], c(0.0, 0.0));
        assert_eq!(a.matrix()[[1, 0]], c(0.0, 0.0));
        assert_eq!(a.matrix()[[1, 1]], c(0.0, 0.0));
    }

    #[test]
    fn canonical_commutator_except_last_level() {
        let sp = FockSpace::new(30, 0.7, 1.3, 2.1).unwrap();
        let comm = sp.position().commutator(&sp.momentum());
        let n = sp.dim();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j && i < n - 1 { c(0.0, sp.hbar()) } else { c(0.0, 0.0) };
                if i == n - 1 && j == n - 1 {
                    continue;
                }
                assert!((comm.matrix()[[i, j]] - want).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn number_raising_relation() {
        let sp = FockSpace::natural(40).unwrap();
        let n = sp.number();
        let ad = sp.creation();
        let lhs = n.dot(&ad);
        let rhs = ad.dot(&n.plus(&sp.identity()));
        let diff = lhs.minus(&rhs);
        for i in 0..39 {
            for j in 0..39 {
                assert_eq!(diff.matrix()[[i, j]], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn vacuum_coherent_state() {
        let sp = FockSpace::natural(10).unwrap();
        let psi = coherent_state(c(0.0, 0.0), sp).unwrap();
        assert_eq!(psi.amplitudes()[0], c(1.0, 0.0));
        assert!(psi.amplitudes().iter().skip(1).all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn coherent_state_is_annihilation_eigenstate() {
        let sp = FockSpace::natural(30).unwrap();
        let psi = coherent_state(c(1.0, 0.0), sp).unwrap();
        let m = expectation(&psi, &sp.annihilation()).unwrap();
        assert!((m - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn coherent_number_statistics_are_poissonian() {
        let sp = FockSpace::natural(128).unwrap();
        let alpha = c(20f64.sqrt() * 0.6, 20f64.sqrt() * 0.8);
        let psi = coherent_state(alpha, sp).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-8);
        let v = variance(&psi, &sp.number()).unwrap();
        assert!((v - 20.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn coherent_tail_guard() {
        let sp = FockSpace::natural(20).unwrap();
        assert!(matches!(coherent_state(c(3.0, 0.0), sp), Err(Error::Truncation(_))));
    }

    #[test]
    fn thermal_statistics() {
        let sp = FockSpace::natural(128).unwrap();
        let rho = thermal_state(4.0, sp).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let n = sp.number();
        let mean = rho.expectation(&n).unwrap().re;
        let var = rho.variance(&n).unwrap();
        assert!((mean - 4.0).abs() < 1e-9);
        assert!((var - 20.0).abs() < 1e-8, "{var}");

        let vac = thermal_state(0.0, sp).unwrap();
        assert_eq!(vac.populations()[0], 1.0);
        assert!(vac.populations()[1..].iter().all(|&p| p == 0.0));

        assert!(thermal_state(4.0, FockSpace::natural(60).unwrap()).is_err());
        assert!(thermal_state(-1.0, sp).is_err());
    }

    #[test]
    fn zero_state_is_degenerate() {
        let sp = FockSpace::natural(4).unwrap();
        let z = StateVector::new(Array1::zeros(4), sp).unwrap();
        assert!(matches!(expectation(&z, &sp.number()), Err(Error::DegenerateState(_))));
        assert!(variance(&z, &sp.number()).is_err());
    }

    #[test]
    fn coherent_wavefunction_phase_convention() {
        let sp = FockSpace::new(60, 1.0, 2.0, 0.5).unwrap();
        let alpha = c(0.8, -0.6);
        let psi = coherent_state(alpha, sp).unwrap();
        let xs: Vec<f64> = (0..41).map(|i| -3.0 + 0.15 * i as f64).collect();
        let got = psi.position_wavefunction(&xs);
        let s = sp.s();
        let pref = (2.0 * s * s / std::f64::consts::PI).powf(0.25);
        for (x, g) in xs.iter().zip(got) {
            let want = pref
                * (-s * s * x * x + 2.0 * s * alpha * x - 0.5 * alpha * alpha - 0.5 * alpha.norm_sqr())
                    .exp();
            assert!((g - want).norm() < 1e-10, "x={x}: {g} vs {want}");
        }
    }

    #[test]
    fn central_moments_of_coherent_position() {
        let sp = FockSpace::natural(60).unwrap();
        let psi = coherent_state(c(1.0, 0.5), sp).unwrap();
        let m = central_moments(&psi, &sp.position()).unwrap();
        assert!(m[0].abs() < 1e-12);
        assert!((m[1] - 0.5).abs() < 1e-10);
        assert!(m[2].abs() < 1e-10);
        assert!((m[3] - 3.0 * 0.25).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn expectation_is_conjugate_symmetric(
            re in proptest::collection::vec(-1.0f64..1.0, 8),
            im in proptest::collection::vec(-1.0f64..1.0, 8),
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let sp = FockSpace::natural(8).unwrap();
            let amps = Array1::from_iter(re.iter().zip(&im).map(|(&a, &b)| c(a, b)));
            prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
            let psi = StateVector::new(amps, sp).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = Array2::from_shape_fn((8, 8), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let op = OperatorMatrix::new(m, sp).unwrap();
            let lhs = expectation(&psi, &op.dagger()).unwrap();
            let rhs = expectation(&psi, &op).unwrap().conj();
            prop_assert!((lhs - rhs).norm() < 1e-12);
            prop_assert!(variance(&psi, &sp.position()).unwrap() >= -1e-10);
        }
    }
}
