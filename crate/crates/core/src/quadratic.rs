//! Quadrature measurement under a quadratic Hamiltonian.
//!
//! The split-step drift and noise operators are
//! A = αP² + γQ² + ξQP + ηP + ζQ and B = kQ + κP. Conjugation gives
//! e^{−εA} B e^{εA} = f₁(ε)Q + f₂(ε)P + f₃(ε), so that a whole trajectory
//! collapses to e^{At} e^{X₁Q + X₂P} e^{X₃ + iħZ/2} with Xᵢ = ∫ fᵢ dW and
//! Z = ∫ (f₁X₂ − f₂X₁) dW.

use num_complex::Complex64 as C64;

use crate::coherent::{self, FactorizedState, GaussianKet, GaussianWavefunction, LinearExponential};
use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::hilbert::{matrix_exponential, FockSpace, OperatorMatrix, StateVector, TrackedState};
use crate::linalg;
use crate::oracle::LseModel;
use crate::paths::{TrajectoryFunctionals, WienerPath};
use crate::special;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Coefficients of A and B. `eta` and `zeta` here are the linear P and Q
/// coefficients of A, unrelated to the momentum model's η.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticModel {
    pub hbar: f64,
    pub alpha: C64,
    pub gamma: C64,
    pub xi: C64,
    pub eta: C64,
    pub zeta: C64,
    pub kq: C64,
    pub kp: C64,
}

impl QuadraticModel {
    /// λ = √(ξ² − 4αγ), principal branch.
    pub fn lambda(&self) -> C64 {
        (self.xi * self.xi - 4.0 * self.alpha * self.gamma).sqrt()
    }

    pub fn a_operator(&self, space: FockSpace) -> OperatorMatrix {
        let (q, p) = (space.position(), space.momentum());
        p.dot(&p)
            .scale(self.alpha)
            .plus(&q.dot(&q).scale(self.gamma))
            .plus(&q.dot(&p).scale(self.xi))
            .plus(&p.scale(self.eta))
            .plus(&q.scale(self.zeta))
    }

    pub fn b_operator(&self, space: FockSpace) -> OperatorMatrix {
        space.position().scale(self.kq).plus(&space.momentum().scale(self.kp))
    }

    pub fn lse_model(&self, space: FockSpace) -> Result<LseModel> {
        self.check_space(space)?;
        LseModel::from_drift(self.a_operator(space), self.b_operator(space))
    }

    fn check_space(&self, space: FockSpace) -> Result<()> {
        if (space.hbar() - self.hbar).abs() > 1e-15 * self.hbar {
            return Err(Error::InvalidArgument(format!(
                "model uses ħ = {} but the Fock space uses ħ = {}",
                self.hbar,
                space.hbar()
            )));
        }
        Ok(())
    }
}

/// The three coefficient functions of the swapped noise operator.
pub trait CoefficientFunctions: Sync {
    fn f1(&self, eps: f64) -> C64;
    fn f2(&self, eps: f64) -> C64;
    fn f3(&self, eps: f64) -> C64;
}

/// Closed-form f₁, f₂, f₃. With C = cosh(iħλε), S = sinh(iħλε):
///
/// f₁ = kC + (kξ − 2κγ) S/λ
/// f₂ = κC + (2αk − κξ) S/λ
/// f₃ = (kη − κζ) S/λ + (kηξ − 2κγη − 2kαζ + κζξ)(C − 1)/λ²
///
/// S/λ and (C−1)/λ² are even in λ, so the branch of λ never matters, and
/// both are evaluated through series near λε = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientTriple {
    hbar: f64,
    lambda: C64,
    k: C64,
    kappa: C64,
    c1: C64,
    c2: C64,
    c3s: C64,
    c3c: C64,
}

impl CoefficientTriple {
    /// C, S/λ and (C − 1)/λ² at ε.
    pub fn kernels(&self, eps: f64) -> (C64, C64, C64) {
        let ihe = I * self.hbar * eps;
        let z = ihe * self.lambda;
        (z.cosh(), ihe * special::sinhc(z), ihe * ihe * special::coshc(z))
    }
}

impl CoefficientFunctions for CoefficientTriple {
    fn f1(&self, eps: f64) -> C64 {
        let (c, s, _) = self.kernels(eps);
        self.k * c + self.c1 * s
    }
    fn f2(&self, eps: f64) -> C64 {
        let (c, s, _) = self.kernels(eps);
        self.kappa * c + self.c2 * s
    }
    fn f3(&self, eps: f64) -> C64 {
        let (_, s, cm) = self.kernels(eps);
        self.c3s * s + self.c3c * cm
    }
}

pub fn coefficient_functions(model: &QuadraticModel) -> CoefficientTriple {
    let QuadraticModel { hbar, alpha, gamma, xi, eta, zeta, kq: k, kp: kappa } = *model;
    CoefficientTriple {
        hbar,
        lambda: model.lambda(),
        k,
        kappa,
        c1: k * xi - 2.0 * kappa * gamma,
        c2: 2.0 * alpha * k - kappa * xi,
        c3s: k * eta - kappa * zeta,
        c3c: k * eta * xi - 2.0 * kappa * gamma * eta - 2.0 * k * alpha * zeta + kappa * zeta * xi,
    }
}

/// Spectral norm of e^{−εA}Be^{εA} − (f₁Q + f₂P + f₃) restricted to the
/// lowest `keep` levels, away from the truncation edge.
pub fn swap_relation_check(
    model: &QuadraticModel,
    coeffs: &dyn CoefficientFunctions,
    eps: f64,
    space: FockSpace,
    keep: usize,
) -> Result<f64> {
    model.check_space(space)?;
    if keep == 0 || keep > space.dim() {
        return Err(Error::InvalidArgument(format!("keep = {keep} must be in 1..={}", space.dim())));
    }
    let a = model.a_operator(space);
    let b = model.b_operator(space);
    let lhs = matrix_exponential(&a.scale(C64::new(-eps, 0.0)))
        .dot(&b)
        .dot(&matrix_exponential(&a.scale(C64::new(eps, 0.0))));
    let rhs = space
        .position()
        .scale(coeffs.f1(eps))
        .plus(&space.momentum().scale(coeffs.f2(eps)))
        .plus(&space.identity().scale(coeffs.f3(eps)));
    let diff = lhs.minus(&rhs);
    let block = diff.matrix().slice(ndarray::s![..keep, ..keep]).to_owned();
    Ok(linalg::spectral_norm(&block))
}

/// W, Y, Xᵢ = Σ fᵢ(t_{n−1})ΔWₙ and Z = Σ ΔWₙ(f₁X₂ − f₂X₁)|_{n−1}.
pub fn trajectory_functionals(coeffs: &dyn CoefficientFunctions, path: &WienerPath) -> TrajectoryFunctionals {
    let mut out = TrajectoryFunctionals::zero();
    for (n, &dw) in path.increments().iter().enumerate() {
        let t = path.time(n);
        let (f1, f2, f3) = (coeffs.f1(t), coeffs.f2(t), coeffs.f3(t));
        out.z += (f1 * out.x2 - f2 * out.x1) * dw;
        out.x1 += f1 * dw;
        out.x2 += f2 * dw;
        out.x3 += f3 * dw;
        out.w += dw;
        out.y += t * dw;
    }
    out
}

/// Initial state for [`evolve_state`].
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Coherent(C64),
    Vector(StateVector),
}

/// Closed-form evolution of a coherent state, as a squeezed coherent ket
/// (operator part, including e^{X₃}) and the scalar log iħZ/2.
pub fn evolve_coherent(
    model: &QuadraticModel,
    space: FockSpace,
    alpha: C64,
    t: f64,
    fun: &TrajectoryFunctionals,
) -> Result<(GaussianKet, C64)> {
    model.check_space(space)?;
    check_nonnegative("t", t)?;
    if model.eta != ZERO || model.zeta != ZERO {
        return Err(Error::UnsupportedState(
            "the coherent closed form needs a drift without linear P and Q terms".into(),
        ));
    }
    let le = LinearExponential::new(fun.x1, fun.x2, space);
    let (shifted, lin_log) = coherent::apply_linear_exponential(&le, alpha);
    let mut ket = coherent::apply_quadratic_exponential_ket(
        model.alpha * t,
        model.gamma * t,
        model.xi * t,
        shifted,
        space,
    )?;
    ket.log_scale += lin_log + fun.x3;
    let b = ket.beta.norm();
    if b * b + 6.0 * b > 0.8 * space.dim() as f64 {
        log::warn!(
            "evolved coherent amplitude |β| = {b:.3} is close to the truncation limit of dim {}",
            space.dim()
        );
    }
    Ok((ket, I * model.hbar * fun.z / 2.0))
}

/// Position wavefunction of the evolved coherent state (scalar factor
/// excluded).
pub fn evolve_coherent_wavefunction(
    model: &QuadraticModel,
    space: FockSpace,
    alpha: C64,
    t: f64,
    fun: &TrajectoryFunctionals,
) -> Result<GaussianWavefunction> {
    evolve_coherent(model, space, alpha, t, fun)?.0.wavefunction(space)
}

/// |ψ(t)⟩ = e^{At} e^{X₁Q+X₂P} e^{X₃+iħZ/2} |ψ(0)⟩. Coherent inputs use the
/// closed form; general vectors use dense matrix exponentials.
pub fn evolve_state(
    model: &QuadraticModel,
    space: FockSpace,
    psi0: &InitialState,
    t: f64,
    fun: &TrajectoryFunctionals,
) -> Result<FactorizedState> {
    model.check_space(space)?;
    check_nonnegative("t", t)?;
    match psi0 {
        InitialState::Coherent(alpha) if model.eta == ZERO && model.zeta == ZERO => {
            let (ket, scalar_log) = evolve_coherent(model, space, *alpha, t, fun)?;
            Ok(FactorizedState { operator_part: ket.to_fock(space)?, scalar_log })
        }
        other => {
            let psi = match other {
                InitialState::Coherent(alpha) => crate::hilbert::coherent_state(*alpha, space)?,
                InitialState::Vector(v) => v.clone(),
            };
            let shift = space.position().scale(fun.x1).plus(&space.momentum().scale(fun.x2));
            let drift = model.a_operator(space).scale(C64::new(t, 0.0));
            let out = matrix_exponential(&drift).apply(&matrix_exponential(&shift).apply(&psi));
            let mut tracked = TrackedState::from_state(&out)?;
            tracked.state = tracked.state.scale(C64::from_polar(1.0, fun.x3.im));
            tracked.log_norm += fun.x3.re;
            Ok(FactorizedState { operator_part: tracked, scalar_log: I * model.hbar * fun.z / 2.0 })
        }
    }
}

/// Position measurement of a harmonic oscillator:
/// A = −iP²/2ħm − (imω²/2ħ + 2k)Q², B = √(2k)Q.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoPositionModel {
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
    pub k: f64,
    /// s² = mω/2ħ
    pub s2: f64,
    /// r = mω²/2ħk
    pub r: f64,
    /// z = √(2i/r − 1), Im z > 0
    pub z: C64,
}

impl HoPositionModel {
    pub fn new(hbar: f64, mass: f64, omega: f64, k: f64) -> Result<Self> {
        check_positive("hbar", hbar)?;
        check_positive("mass", mass)?;
        check_positive("omega", omega)?;
        check_positive("k", k)?;
        let r = mass * omega * omega / (2.0 * hbar * k);
        let z = (C64::new(-1.0, 2.0 / r)).sqrt();
        Ok(Self { hbar, mass, omega, k, s2: mass * omega / (2.0 * hbar), r, z })
    }

    /// Parameterized by the ratio r instead of k.
    pub fn from_ratio(hbar: f64, mass: f64, omega: f64, r: f64) -> Result<Self> {
        check_positive("r", r)?;
        Self::new(hbar, mass, omega, mass * omega * omega / (2.0 * hbar * r))
    }

    pub fn quadratic_model(&self) -> QuadraticModel {
        QuadraticModel {
            hbar: self.hbar,
            alpha: C64::new(0.0, -1.0 / (2.0 * self.hbar * self.mass)),
            gamma: C64::new(-2.0 * self.k, -self.mass * self.omega * self.omega / (2.0 * self.hbar)),
            xi: ZERO,
            eta: ZERO,
            zeta: ZERO,
            kq: C64::new((2.0 * self.k).sqrt(), 0.0),
            kp: ZERO,
        }
    }

    pub fn space(&self, dim: usize) -> Result<FockSpace> {
        FockSpace::new(dim, self.hbar, self.mass, self.omega)
    }

    fn tanh_zwt(&self, t: f64) -> C64 {
        special::tanh(self.z * self.omega * t)
    }

    /// l(t) = −½ tanh(zωt) / (rz + (1 + ir) tanh(zωt)), the coth form
    /// multiplied through by tanh so that t = 0 is regular.
    pub fn l(&self, t: f64) -> C64 {
        let th = self.tanh_zwt(t);
        -0.5 * th / (self.r * self.z + C64::new(1.0, self.r) * th)
    }

    /// s′²(t) = s² iz (iz tanh(zωt) − 1)/(tanh(zωt) − iz)
    pub fn s2prime(&self, t: f64) -> Result<C64> {
        check_nonnegative("t", t)?;
        let th = self.tanh_zwt(t);
        let iz = I * self.z;
        let den = th - iz;
        // |tanh| < 1 is not guaranteed for complex arguments, but tanh = iz
        // would need tanh to leave the region it maps Im z > 0 into.
        if den.norm() < 1e-12 {
            return Err(Error::Singular(format!("s′² pole at t = {t}")));
        }
        Ok(self.s2 * iz * (iz * th - 1.0) / den)
    }

    /// s′² through l(t), in the unsimplified Gaussian-integral form.
    pub fn s2prime_l_form(&self, t: f64) -> Result<C64> {
        coherent::s2prime_unsimplified(self.s2, self.l(t))
    }

    /// lim_{t→∞} s′² = −i s² z
    pub fn s2prime_limit(&self) -> C64 {
        -I * self.s2 * self.z
    }

    /// σ_x² at time t.
    pub fn conditional_x_variance(&self, t: f64) -> Result<f64> {
        ho_conditional_x_variance(self.s2prime(t)?)
    }

    /// 1/(4 s² Im z)
    pub fn steady_state_variance(&self) -> f64 {
        1.0 / (4.0 * self.s2 * self.z.im)
    }
}

pub fn ho_position_s2(model: &HoPositionModel, t: f64) -> Result<C64> {
    model.s2prime(t)
}

pub fn ho_conditional_x_variance(s2prime: C64) -> Result<f64> {
    coherent::conditional_x_variance(s2prime)
}

pub fn ho_steady_state_variance(model: &HoPositionModel) -> f64 {
    model.steady_state_variance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::coherent_state;
    use crate::oracle::integrate_lse;
    use crate::paths::sample_path;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_model(rng: &mut impl Rng, hbar: f64) -> QuadraticModel {
        let mut r = || c(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        QuadraticModel { hbar, alpha: r(), gamma: r(), xi: r(), eta: r(), zeta: r(), kq: r(), kp: r() }
    }

    #[test]
    fn initial_values() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let m = random_model(&mut rng, 1.0);
        let f = coefficient_functions(&m);
        assert_eq!(f.f1(0.0), m.kq);
        assert_eq!(f.f2(0.0), m.kp);
        assert_eq!(f.f3(0.0), ZERO);
        assert!((m.lambda() * m.lambda() - (m.xi * m.xi - 4.0 * m.alpha * m.gamma)).norm() < 1e-14);
    }

    #[test]
    fn vanishing_drift_gives_constant_coefficients() {
        let m = QuadraticModel {
            hbar: 1.0,
            alpha: ZERO,
            gamma: ZERO,
            xi: ZERO,
            eta: ZERO,
            zeta: ZERO,
            kq: c(0.7, 0.1),
            kp: c(-0.2, 0.3),
        };
        let f = coefficient_functions(&m);
        for eps in [0.0, 0.5, 3.0] {
            assert_eq!(f.f1(eps), m.kq);
            assert_eq!(f.f2(eps), m.kp);
            assert_eq!(f.f3(eps), ZERO);
        }
    }

    #[test]
    fn swap_relation_on_random_models_with_general_hbar() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for hbar in [1.0, 0.6] {
            let space = FockSpace::new(60, hbar, 1.4, 0.8).unwrap();
            for _ in 0..5 {
                let m = random_model(&mut rng, hbar);
                let f = coefficient_functions(&m);
                let res = swap_relation_check(&m, &f, 0.2, space, 20).unwrap();
                assert!(res < 1e-10, "ħ = {hbar}: {res}");
            }
        }
    }

    #[test]
    fn degenerate_lambda_uses_series() {
        // ξ² = 4αγ: λ = 0 exactly.
        let m = QuadraticModel {
            hbar: 1.0,
            alpha: c(0.2, 0.0),
            gamma: c(0.05, 0.0),
            xi: c(0.2, 0.0),
            eta: c(0.1, 0.1),
            zeta: c(-0.2, 0.0),
            kq: c(0.3, 0.0),
            kp: c(0.1, -0.2),
        };
        assert_eq!(m.lambda(), ZERO);
        let f = coefficient_functions(&m);
        let space = FockSpace::natural(60).unwrap();
        assert!(swap_relation_check(&m, &f, 0.2, space, 20).unwrap() < 1e-10);
        assert!(f.f1(0.3).re.is_finite());
    }

    #[test]
    fn functionals_of_a_silent_path_vanish() {
        let hom = HoPositionModel::from_ratio(1.0, 1.0, 1.0, 1.0).unwrap();
        let f = coefficient_functions(&hom.quadratic_model());
        let path = WienerPath::from_increments(0.01, vec![0.0; 50]).unwrap();
        assert_eq!(trajectory_functionals(&f, &path), TrajectoryFunctionals::zero());
    }

    #[test]
    fn proportional_coefficients_give_zero_z() {
        let m = QuadraticModel {
            hbar: 1.0,
            alpha: ZERO,
            gamma: ZERO,
            xi: ZERO,
            eta: c(0.3, 0.0),
            zeta: c(0.1, 0.0),
            kq: c(0.5, 0.0),
            kp: c(0.5, 0.0),
        };
        let f = coefficient_functions(&m);
        let path = sample_path(1.0, 200, 4).unwrap();
        assert!(trajectory_functionals(&f, &path).z.norm() < 1e-15);
    }

    #[test]
    fn closed_form_matches_split_step_product() {
        let hom = HoPositionModel::from_ratio(1.0, 1.0, 1.0, 1.0).unwrap();
        let model = hom.quadratic_model();
        let space = hom.space(80).unwrap();
        let alpha = c(0.5, -0.3);
        let path = sample_path(1.0, 1000, 12).unwrap();
        let fun = trajectory_functionals(&coefficient_functions(&model), &path);
        let closed = evolve_state(&model, space, &InitialState::Coherent(alpha), 1.0, &fun).unwrap();
        let lse = integrate_lse(&model.lse_model(space).unwrap(), &coherent_state(alpha, space).unwrap(), &path).unwrap();
        let full = closed.full();
        assert!(1.0 - full.state.fidelity(&lse.state).unwrap() < 1e-10);
        // The scalar factor is e^{iħZ/2}: the unnormalized norms agree.
        assert!((full.log_norm - lse.log_norm).abs() < 1e-8, "{} vs {}", full.log_norm, lse.log_norm);
    }

    #[test]
    fn dense_route_agrees_with_closed_form() {
        let hom = HoPositionModel::from_ratio(1.0, 1.0, 1.0, 2.0).unwrap();
        let model = hom.quadratic_model();
        let space = hom.space(60).unwrap();
        let alpha = c(0.2, 0.1);
        let path = sample_path(0.3, 300, 2).unwrap();
        let fun = trajectory_functionals(&coefficient_functions(&model), &path);
        let closed = evolve_state(&model, space, &InitialState::Coherent(alpha), 0.3, &fun).unwrap().full();
        let v = InitialState::Vector(coherent_state(alpha, space).unwrap());
        let dense = evolve_state(&model, space, &v, 0.3, &fun).unwrap().full();
        assert!(closed.unnormalized().distance(&dense.unnormalized()) < 1e-9 * closed.norm_sqr().sqrt());
    }

    #[test]
    fn ho_forms_agree() {
        for r in [0.1, 1.0, 10.0] {
            let hom = HoPositionModel::from_ratio(1.0, 1.0, 1.0, r).unwrap();
            assert!(hom.z.im > 0.0);
            assert!((hom.r - hom.mass * hom.omega.powi(2) / (2.0 * hom.hbar * hom.k)).abs() < 1e-14 * hom.r);
            assert!((hom.s2prime(0.0).unwrap() - hom.s2).norm() < 1e-15);
            for i in 1..=50 {
                let t = 0.1 * i as f64;
                let a = hom.s2prime(t).unwrap();
                let b = hom.s2prime_l_form(t).unwrap();
                assert!((a - b).norm() < 1e-10 * a.norm(), "r={r} t={t}");
            }
            let late = 20.0 / (hom.z.re * hom.omega);
            assert!((hom.s2prime(late).unwrap() - hom.s2prime_limit()).norm() < 1e-6 * hom.s2);
        }
    }

    #[test]
    fn ho_closed_form_matches_quadratic_exponential() {
        let hom = HoPositionModel::new(0.8, 1.3, 0.9, 0.6).unwrap();
        let space = hom.space(40).unwrap();
        let m = hom.quadratic_model();
        for t in [0.3, 1.0, 2.5] {
            let g = coherent::apply_quadratic_exponential(m.alpha * t, m.gamma * t, ZERO, c(0.3, 0.2), space).unwrap();
            assert!((g.s2prime - hom.s2prime(t).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn steady_state_limits() {
        let hom = HoPositionModel::from_ratio(1.0, 1.0, 1.0, 1.0).unwrap();
        let want = 0.25 / hom.s2prime_limit().re;
        assert!((hom.steady_state_variance() - want).abs() < 1e-14);
        assert!((hom.conditional_x_variance(0.0).unwrap() - 0.5).abs() < 1e-15);
        let weak = HoPositionModel::from_ratio(1.0, 1.0, 1.0, 1e8).unwrap();
        assert!((weak.steady_state_variance() - 0.5).abs() < 1e-6);
        assert!(ho_conditional_x_variance(c(-1.0, 0.0)).is_err());
    }
}
