//! Exponentials of linear and quadratic forms in Q and P acting on coherent
//! states, in closed form.
//!
//! Conventions: Q = q0 (a + a†), P = i p0 (a† − a) with q0 = √(ħ/2mω),
//! p0 = √(mħω/2); |α⟩ is the normalized coherent state and
//! ⟨x|α⟩ = (2s²/π)^{1/4} exp(−s²x² + 2sαx − α²/2 − |α|²/2), s² = mω/2ħ.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{FockSpace, StateVector, TrackedState};
use crate::special;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// e^{μQ + νP} written as e^{θa + φa†}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearExponential {
    pub mu: C64,
    pub nu: C64,
    pub theta: C64,
    pub phi: C64,
}

impl LinearExponential {
    /// `mu` multiplies Q and `nu` multiplies P.
    pub fn new(mu: C64, nu: C64, space: FockSpace) -> Self {
        let (q0, p0) = (space.q0(), space.p0());
        Self { mu, nu, theta: mu * q0 - I * nu * p0, phi: mu * q0 + I * nu * p0 }
    }

    /// Directly in ladder form; `mu` and `nu` are left at zero.
    pub fn from_ladder(theta: C64, phi: C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self { mu: zero, nu: zero, theta, phi }
    }
}

/// e^{θa+φa†}|α⟩ = e^{log_norm}|α + φ⟩. Returns (α + φ, log_norm).
pub fn apply_linear_exponential(le: &LinearExponential, alpha: C64) -> (C64, C64) {
    let (theta, phi) = (le.theta, le.phi);
    let log = 0.5 * phi.norm_sqr() + (alpha * phi.conj()).re + theta * alpha + theta * phi / 2.0;
    (alpha + phi, log)
}

/// Normal-ordered factorization
/// e^{ua² + va†² + wa†a} = e^{(χ−w)/2} e^{l a†²} e^{χ a†a} e^{m a²}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisentangledQuadratic {
    pub u: C64,
    pub v: C64,
    pub w: C64,
    pub f: C64,
    pub l: C64,
    pub chi: C64,
    pub m_coef: C64,
}

impl DisentangledQuadratic {
    /// Exponent of the scalar prefactor, (χ − w)/2.
    pub fn prefactor_log(&self) -> C64 {
        (self.chi - self.w) / 2.0
    }
}

/// Factorize e^{ua²+va†²+wa†a}; f = √(w² − 4uv),
/// l = v/(f coth f − w), m = u/(f coth f − w), χ = −ln(cosh f − w sinh f / f).
pub fn disentangle_quadratic(u: C64, v: C64, w: C64) -> Result<DisentangledQuadratic> {
    let f = (w * w - 4.0 * u * v).sqrt();
    let fc = special::z_coth(f);
    let den = fc - w;
    if den.norm() < 1e-12 {
        return Err(Error::Singular(format!(
            "disentangling pole: |f coth f − w| = {:.3e} for u = {u}, v = {v}, w = {w}",
            den.norm()
        )));
    }
    // cosh f − w sinh f/f = cosh f · (f coth f − w)/(f coth f)
    let chi = -special::ln_cosh(f) - (den / fc).ln();
    Ok(DisentangledQuadratic { u, v, w, f, l: v / den, chi, m_coef: u / den })
}

/// ηP² + ζQ² + ξQP rewritten as u a² + v a†² + w a†a + constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderQuadratic {
    pub u: C64,
    pub v: C64,
    pub w: C64,
    pub constant: C64,
}

pub fn ladder_form(eta: C64, zeta: C64, xi: C64, space: FockSpace) -> LadderQuadratic {
    let q2 = space.q0() * space.q0();
    let p2 = space.p0() * space.p0();
    let hbar = space.hbar();
    let base = zeta * q2 - eta * p2;
    let w = 2.0 * (zeta * q2 + eta * p2);
    LadderQuadratic {
        u: base - I * xi * hbar / 2.0,
        v: base + I * xi * hbar / 2.0,
        w,
        constant: (w + I * hbar * xi) / 2.0,
    }
}

/// A squeezed coherent ket e^{log_scale} e^{l a†²}|β⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianKet {
    pub l: C64,
    pub beta: C64,
    pub log_scale: C64,
}

/// ⟨x|ψ⟩ = exp(log_norm − s2prime·x² + lin·x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianWavefunction {
    pub s2prime: C64,
    pub lin: C64,
    pub log_norm: C64,
}

impl GaussianWavefunction {
    pub fn eval(&self, x: f64) -> C64 {
        (self.log_norm - self.s2prime * x * x + self.lin * x).exp()
    }

    /// Variance of |ψ(x)|², 1/(4 Re s′²).
    pub fn position_variance(&self) -> Result<f64> {
        conditional_x_variance(self.s2prime)
    }

    pub fn position_mean(&self) -> Result<f64> {
        if !(self.s2prime.re > 0.0) {
            return Err(Error::InvalidArgument(format!("Re s′² = {} is not positive", self.s2prime.re)));
        }
        Ok(self.lin.re / (2.0 * self.s2prime.re))
    }
}

/// σ_x² = 1/(4 Re s′²)
pub fn conditional_x_variance(s2prime: C64) -> Result<f64> {
    if !(s2prime.re > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Re s′² = {} is not positive: the wavefunction is not normalizable",
            s2prime.re
        )));
    }
    Ok(0.25 / s2prime.re)
}

/// s′² written through l as s²[(1−2l)/(3−2l)][1 + 2(1−2l)/(1+2l)], the
/// form that comes straight out of the Gaussian integral.
pub fn s2prime_unsimplified(s2: f64, l: C64) -> Result<C64> {
    let (a, b) = (1.0 + 2.0 * l, 3.0 - 2.0 * l);
    if a.norm() < 1e-12 || b.norm() < 1e-12 {
        return Err(Error::Singular(format!("pole in s′² at l = {l}")));
    }
    Ok(s2 * ((1.0 - 2.0 * l) / b) * (1.0 + 2.0 * (1.0 - 2.0 * l) / a))
}

impl GaussianKet {
    pub fn wavefunction(&self, space: FockSpace) -> Result<GaussianWavefunction> {
        let a = 1.0 + 2.0 * self.l;
        if a.norm() < 1e-12 {
            return Err(Error::Singular(format!("pole at 1 + 2l = 0 (l = {})", self.l)));
        }
        let s = space.s();
        let s2 = s * s;
        let beta = self.beta;
        let log_norm = self.log_scale + 0.25 * (2.0 * s2 / std::f64::consts::PI).ln()
            - 0.5 * a.ln()
            - 0.5 * beta.norm_sqr()
            - beta * beta / (2.0 * a);
        Ok(GaussianWavefunction { s2prime: s2 * (1.0 - 2.0 * self.l) / a, lin: 2.0 * s * beta / a, log_norm })
    }

    /// Fock amplitudes, as a unit vector and the log of the norm removed.
    /// The phase of e^{log_scale} is applied to the vector.
    pub fn to_fock(&self, space: FockSpace) -> Result<TrackedState> {
        let n = space.dim();
        let b = self.beta.norm();
        if 2.0 * self.l.norm() >= 1.0 {
            return Err(Error::UnsupportedState(format!(
                "|2l| = {:.3} >= 1: the squeezed ket is not normalizable",
                2.0 * self.l.norm()
            )));
        }
        if b * b + 6.0 * b > n as f64 {
            return Err(Error::Truncation(format!(
                "squeezed coherent amplitude |β| = {b:.3} needs |β|² + 6|β| <= dim = {n}"
            )));
        }
        // Generating function e^{βx + lx²}: n dₙ = β dₙ₋₁ + 2l dₙ₋₂, and
        // eₙ = √(n!) dₙ is the amplitude up to e^{−|β|²/2}.
        let mut e = Array1::<C64>::zeros(n);
        e[0] = C64::new(1.0, 0.0);
        e[1] = self.beta;
        for k in 2..n {
            e[k] = (self.beta * e[k - 1] + 2.0 * self.l * ((k - 1) as f64).sqrt() * e[k - 2]) / (k as f64).sqrt();
        }
        let total: f64 = e.iter().map(|z| z.norm_sqr()).sum();
        let tail: f64 = e.iter().skip(n.saturating_sub(5)).map(|z| z.norm_sqr()).sum();
        if !total.is_finite() || tail > 1e-16 * total {
            return Err(Error::Truncation(format!(
                "squeezed ket leaves {:.3e} of its weight in the top five levels of dim {n}",
                tail / total
            )));
        }
        let nrm = total.sqrt();
        let phase = C64::from_polar(1.0, self.log_scale.im);
        let state = StateVector::new(e.mapv(|z| z * phase / nrm), space)?;
        Ok(TrackedState { state, log_norm: self.log_scale.re - 0.5 * b * b + nrm.ln() })
    }
}

/// e^{ηP² + ζQ² + ξQP}|α⟩ as a squeezed coherent ket.
pub fn apply_quadratic_exponential_ket(eta: C64, zeta: C64, xi: C64, alpha: C64, space: FockSpace) -> Result<GaussianKet> {
    let lq = ladder_form(eta, zeta, xi, space);
    let d = disentangle_quadratic(lq.u, lq.v, lq.w)?;
    let beta = alpha * d.chi.exp();
    let log_scale = lq.constant + d.prefactor_log() + d.m_coef * alpha * alpha
        + 0.5 * (beta.norm_sqr() - alpha.norm_sqr());
    Ok(GaussianKet { l: d.l, beta, log_scale })
}

/// ⟨x|e^{ηP² + ζQ² + ξQP}|α⟩ as a Gaussian.
pub fn apply_quadratic_exponential(eta: C64, zeta: C64, xi: C64, alpha: C64, space: FockSpace) -> Result<GaussianWavefunction> {
    let ket = apply_quadratic_exponential_ket(eta, zeta, xi, alpha, space)?;
    let (a, b) = (1.0 + 2.0 * ket.l, 3.0 - 2.0 * ket.l);
    if a.norm() < 1e-12 || b.norm() < 1e-12 {
        return Err(Error::Singular(format!("pole in the Gaussian coefficients at l = {}", ket.l)));
    }
    ket.wavefunction(space)
}

/// A state split into an operator part and a scalar factor that only
/// affects its normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizedState {
    pub operator_part: TrackedState,
    pub scalar_log: C64,
}

impl FactorizedState {
    /// The normalized state, built from the operator part alone.
    pub fn normalized(&self) -> StateVector {
        self.operator_part.state.clone()
    }

    /// The full (unnormalized) state as unit vector and log-norm, with the
    /// phase of the scalar factor applied.
    pub fn full(&self) -> TrackedState {
        let phase = C64::from_polar(1.0, self.scalar_log.im);
        TrackedState {
            state: self.operator_part.state.scale(phase),
            log_norm: self.operator_part.log_norm + self.scalar_log.re,
        }
    }
}

/// Normalized state of a factorized result; the scalar factor cancels.
pub fn strip_normalization(state: &FactorizedState) -> StateVector {
    state.normalized()
}
