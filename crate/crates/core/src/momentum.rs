//! Momentum measurement of a particle in a linear potential.
//!
//! H = P²/2m − FQ measured through O = √k P. In the momentum representation
//! the evolution operator is
//! e^{iFQt/ħ} e^{η(−P²t − PFt² − F²t³/3)} e^{√(2k)(PW + FY)} with
//! η = i/2ħm + 2k, so a Gaussian Ψ(p) = exp(ap² + bp + c) stays Gaussian.

use num_complex::Complex64 as C64;

use crate::error::{check_nonnegative, check_positive, invalid, Error, Result};
use crate::hilbert::{FockSpace, OperatorMatrix};
use crate::oracle::{LseModel, MasterModel};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearPotentialModel {
    pub hbar: f64,
    pub mass: f64,
    pub force: f64,
    pub k: f64,
}

impl LinearPotentialModel {
    pub fn new(hbar: f64, mass: f64, force: f64, k: f64) -> Result<Self> {
        check_positive("hbar", hbar)?;
        check_positive("mass", mass)?;
        check_positive("k", k)?;
        if !force.is_finite() {
            return Err(invalid("force must be finite"));
        }
        Ok(Self { hbar, mass, force, k })
    }

    /// η = i/2ħm + 2k
    pub fn eta(&self) -> C64 {
        C64::new(2.0 * self.k, 1.0 / (2.0 * self.hbar * self.mass))
    }

    fn check_space(&self, space: FockSpace) -> Result<()> {
        if (space.hbar() - self.hbar).abs() > 1e-15 * self.hbar {
            return Err(invalid("model and Fock space use different ħ"));
        }
        Ok(())
    }

    /// A = −ηP² + iFQ/ħ, B = √(2k)P on an oscillator basis.
    pub fn lse_model(&self, space: FockSpace) -> Result<LseModel> {
        self.check_space(space)?;
        let p = space.momentum();
        let a = p
            .dot(&p)
            .scale(-self.eta())
            .plus(&space.position().scale(I * self.force / self.hbar));
        LseModel::from_drift(a, p.scale(C64::new((2.0 * self.k).sqrt(), 0.0)))
    }

    /// H = P²/2m − FQ with the single Lindblad operator √k P.
    pub fn master_model(&self, space: FockSpace) -> Result<MasterModel> {
        self.check_space(space)?;
        let p = space.momentum();
        let h = p
            .dot(&p)
            .scale(C64::new(0.5 / self.mass, 0.0))
            .minus(&space.position().scale(C64::new(self.force, 0.0)));
        let h = symmetrize(&h);
        MasterModel::new(h, vec![p.scale(C64::new(self.k.sqrt(), 0.0))])
    }
}

fn symmetrize(op: &OperatorMatrix) -> OperatorMatrix {
    op.plus(&op.dagger()).scale(C64::new(0.5, 0.0))
}

/// Ψ(p) = exp(a p² + b p + c), Re a < 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMomentumState {
    pub hbar: f64,
    pub quad_coeff: C64,
    pub lin_coeff: C64,
    pub log_norm: C64,
}

impl GaussianMomentumState {
    pub fn new(hbar: f64, quad_coeff: C64, lin_coeff: C64, log_norm: C64) -> Result<Self> {
        check_positive("hbar", hbar)?;
        if !(quad_coeff.re < 0.0) {
            return Err(Error::UnsupportedState(format!(
                "Re of the p² coefficient must be negative, got {quad_coeff}"
            )));
        }
        Ok(Self { hbar, quad_coeff, lin_coeff, log_norm })
    }

    /// Normalized Gaussian with the given momentum mean and variance and
    /// position mean.
    pub fn from_moments(hbar: f64, mean_p: f64, var_p: f64, mean_q: f64) -> Result<Self> {
        check_positive("var_p", var_p)?;
        let a = C64::new(-0.25 / var_p, 0.0);
        let b = C64::new(mean_p / (2.0 * var_p), -mean_q / hbar);
        let mut s = Self::new(hbar, a, b, C64::new(0.0, 0.0))?;
        s.log_norm = C64::new(-0.5 * s.log_norm_sqr(), 0.0);
        Ok(s)
    }

    /// Oscillator ground state of frequency ω: σ_p² = mħω/2.
    pub fn ground(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        Self::from_moments(hbar, 0.0, 0.5 * mass * hbar * omega, 0.0)
    }

    /// −1/(4 Re a)
    pub fn var_p(&self) -> f64 {
        -0.25 / self.quad_coeff.re
    }

    /// −Re b/(2 Re a)
    pub fn mean_p(&self) -> f64 {
        -self.lin_coeff.re / (2.0 * self.quad_coeff.re)
    }

    /// ⟨Q⟩ with Q = iħ d/dp.
    pub fn mean_q(&self) -> f64 {
        -self.hbar * (2.0 * self.quad_coeff.im * self.mean_p() + self.lin_coeff.im)
    }

    /// ln ∫|Ψ|² dp
    pub fn log_norm_sqr(&self) -> f64 {
        let (ra, rb) = (self.quad_coeff.re, self.lin_coeff.re);
        2.0 * self.log_norm.re + 0.5 * (std::f64::consts::PI / (-2.0 * ra)).ln() - rb * rb / (2.0 * ra)
    }

    pub fn eval(&self, p: f64) -> C64 {
        (self.quad_coeff * p * p + self.lin_coeff * p + self.log_norm).exp()
    }
}

/// Apply the disentangled evolution operator for a record with functionals
/// W(t) and Y(t) = ∫ s dW(s). The translation p ↦ p − Ft is applied last.
pub fn propagate_gaussian(
    model: &LinearPotentialModel,
    state0: &GaussianMomentumState,
    t: f64,
    w: f64,
    y: f64,
) -> Result<GaussianMomentumState> {
    check_nonnegative("t", t)?;
    if (state0.hbar - model.hbar).abs() > 1e-15 * model.hbar {
        return Err(invalid("state and model use different ħ"));
    }
    let eta = model.eta();
    let f = model.force;
    let sq = (2.0 * model.k).sqrt();
    let a = state0.quad_coeff - eta * t;
    let b = state0.lin_coeff + sq * w - eta * f * t * t;
    let c = state0.log_norm + sq * f * y - eta * f * f * t * t * t / 3.0;
    let ft = f * t;
    GaussianMomentumState::new(state0.hbar, a, b - 2.0 * a * ft, c + a * ft * ft - b * ft)
}

/// σ_p²(t) = σ_p²(0)/(1 + 8kσ_p²(0)t), whatever the record.
pub fn conditional_momentum_variance(var_p0: f64, k: f64, t: f64) -> Result<f64> {
    check_positive("var_p0", var_p0)?;
    check_positive("k", k)?;
    check_nonnegative("t", t)?;
    Ok(var_p0 / (1.0 + 8.0 * k * var_p0 * t))
}

/// Trajectory-averaged ⟨pⁿ⟩ at t: the initial Gaussian moments shifted by
/// the impulse Ft.
pub fn averaged_momentum_moment(state0: &GaussianMomentumState, force: f64, t: f64, n: u32) -> Result<f64> {
    if !(1..=4).contains(&n) {
        return Err(invalid(format!("moment order {n} not in 1..=4")));
    }
    let (mu, v) = (state0.mean_p() + force * t, state0.var_p());
    Ok(match n {
        1 => mu,
        2 => mu * mu + v,
        3 => mu.powi(3) + 3.0 * mu * v,
        _ => mu.powi(4) + 6.0 * mu * mu * v + 3.0 * v * v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{expectation, variance, StateVector};
    use crate::oracle::{integrate_lse, integrate_master};
    use crate::paths::{sample_path, w_and_y};
    use crate::quadrature;

    // The oscillator ground state is the only Gaussian the oracle tests need.
    fn fock_state(g: &GaussianMomentumState, space: FockSpace) -> StateVector {
        assert!(g.mean_p() == 0.0 && g.mean_q() == 0.0);
        space.vacuum()
    }

    #[test]
    fn moments_round_trip() {
        let s = GaussianMomentumState::from_moments(0.7, 0.4, 0.3, -1.2).unwrap();
        assert!((s.mean_p() - 0.4).abs() < 1e-14);
        assert!((s.var_p() - 0.3).abs() < 1e-14);
        assert!((s.mean_q() + 1.2).abs() < 1e-14);
        assert!(s.log_norm_sqr().abs() < 1e-14);
        let num = quadrature::integrate(|p| C64::new(s.eval(p).norm_sqr(), 0.0), &[-6.0, 0.4, 6.0], 1e-12, 0.0).unwrap();
        assert!((num.value.re - 1.0).abs() < 1e-10);
        assert!(GaussianMomentumState::new(1.0, C64::new(0.1, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn variance_law() {
        assert_eq!(conditional_momentum_variance(0.5, 0.25, 0.0).unwrap(), 0.5);
        assert!((conditional_momentum_variance(0.5, 0.25, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(conditional_momentum_variance(0.5, 0.25, 1e3).unwrap() < 1e-3);
        let m = LinearPotentialModel::new(1.0, 1.0, 0.8, 0.25).unwrap();
        let g = GaussianMomentumState::ground(1.0, 1.0, 1.0).unwrap();
        let mut vs = Vec::new();
        for (w, y) in [(0.3, 0.1), (-1.0, 0.7), (2.0, -0.4)] {
            let s = propagate_gaussian(&m, &g, 1.0, w, y).unwrap();
            assert!((s.var_p() - 0.25).abs() < 1e-12);
            vs.push(s.var_p());
        }
        assert!(vs.iter().all(|v| (v - vs[0]).abs() < 1e-15));
    }

    #[test]
    fn identity_and_free_limits() {
        let g = GaussianMomentumState::from_moments(1.0, 0.3, 0.5, 0.2).unwrap();
        let m = LinearPotentialModel::new(1.0, 1.0, 0.0, 1e-300).unwrap();
        let s = propagate_gaussian(&m, &g, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s, g);
        let s = propagate_gaussian(&m, &g, 2.0, 0.0, 0.0).unwrap();
        assert!((s.var_p() - 0.5).abs() < 1e-12 && (s.mean_p() - 0.3).abs() < 1e-12);
        // Free flight moves the position mean by ⟨p⟩t/m.
        assert!((s.mean_q() - (0.2 + 0.3 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn moment_law() {
        let g = GaussianMomentumState::ground(1.0, 1.0, 1.0).unwrap();
        assert!((averaged_momentum_moment(&g, 2.0, 3.0, 1).unwrap() - 6.0).abs() < 1e-14);
        for n in 1..=4 {
            assert_eq!(averaged_momentum_moment(&g, 0.0, 0.0, n).unwrap(), averaged_momentum_moment(&g, 0.0, 5.0, n).unwrap());
        }
        assert!(averaged_momentum_moment(&g, 1.0, 1.0, 5).is_err());
    }

    #[test]
    fn closed_form_matches_split_step() {
        let space = FockSpace::natural(80).unwrap();
        let m = LinearPotentialModel::new(1.0, 1.0, 0.5, 0.25).unwrap();
        let g = GaussianMomentumState::ground(1.0, 1.0, 1.0).unwrap();
        let psi0 = fock_state(&g, space);
        let path = sample_path(1.0, 10_000, 5).unwrap();
        let end = integrate_lse(&m.lse_model(space).unwrap(), &psi0, &path).unwrap();
        let (w, y) = w_and_y(&path);
        let s = propagate_gaussian(&m, &g, 1.0, w, y).unwrap();
        let p = space.momentum();
        let var = variance(&end.state, &p).unwrap();
        let mean = expectation(&end.state, &p).unwrap().re;
        let q = expectation(&end.state, &space.position()).unwrap().re;
        assert!((var / s.var_p() - 1.0).abs() < 1e-3, "{var} vs {}", s.var_p());
        assert!((mean - s.mean_p()).abs() < 1e-3, "{mean} vs {}", s.mean_p());
        assert!((q - s.mean_q()).abs() < 1e-3, "{q} vs {}", s.mean_q());
        assert!((end.log_norm_sqr() - s.log_norm_sqr()).abs() < 1e-3);
    }

    #[test]
    fn master_equation_shifts_momentum_by_the_impulse() {
        let space = FockSpace::natural(80).unwrap();
        let m = LinearPotentialModel::new(1.0, 1.0, 0.5, 0.25).unwrap();
        let g = GaussianMomentumState::ground(1.0, 1.0, 1.0).unwrap();
        let rho = integrate_master(&m.master_model(space).unwrap(), &space.vacuum().projector(), 1.0, 1000).unwrap();
        let p = space.momentum();
        let mean = rho.expectation(&p).unwrap().re;
        assert!((mean - averaged_momentum_moment(&g, 0.5, 1.0, 1).unwrap()).abs() < 1e-6);
        assert!((rho.variance(&p).unwrap() - g.var_p()).abs() < 1e-6);
        let p2 = rho.expectation(&p.dot(&p)).unwrap().re;
        assert!((p2 - averaged_momentum_moment(&g, 0.5, 1.0, 2).unwrap()).abs() < 1e-6);
    }
}
