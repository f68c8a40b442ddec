//! Continuous QND measurement of the photon number of a cavity mode.
//!
//! A = −iω(a†a + ½) − 2k(a†a)² and B = √(2k)a†a are both diagonal, so a
//! trajectory depends on its noise only through W(t) and
//! V(t)V†(t) = diag(Vₙ) with Vₙ = exp(−4ktn² + 2√(2k)nW).

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_nonnegative, check_positive, invalid, Error, Result};
use crate::hilbert::{coherent_state, thermal_state, DensityMatrix, FockSpace, OperatorMatrix, StateVector};
use crate::linalg::pairwise_sum;
use crate::oracle::{self, LseIntegrator, LseModel};
use crate::quadrature::{self, GaussHermite};
use crate::stats::Estimate;

/// Measurement constant and mode frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QndModel {
    pub k: f64,
    pub omega: f64,
}

impl QndModel {
    pub fn new(k: f64, omega: f64) -> Result<Self> {
        check_positive("k", k)?;
        if !omega.is_finite() {
            return Err(invalid("omega must be finite"));
        }
        Ok(Self { k, omega })
    }

    pub fn tau(&self, t: f64) -> f64 {
        self.k * t
    }

    /// Diagonal of A, in units where ħ = 1.
    pub fn drift_diagonal(&self, dim: usize) -> Vec<C64> {
        (0..dim)
            .map(|n| {
                let n = n as f64;
                C64::new(-2.0 * self.k * n * n, -self.omega * (n + 0.5))
            })
            .collect()
    }

    /// The split-step model on a natural-unit Fock space.
    pub fn lse_model(&self, space: FockSpace) -> Result<LseModel> {
        let dim = space.dim();
        let a = Array2::from_diag(&ndarray::Array1::from(self.drift_diagonal(dim)));
        let b = space.number().scale(C64::new((2.0 * self.k).sqrt(), 0.0));
        LseModel::from_drift(OperatorMatrix::new(a, space)?, b)
    }
}

/// Relative weights Vₙ/maxₘVₘ, with the common log factor kept apart.
#[derive(Clone, Debug, PartialEq)]
pub struct QndWeights {
    pub v: Vec<f64>,
    pub log_scale: f64,
    pub w: f64,
    pub t: f64,
}

impl QndWeights {
    /// ln Vₙ
    pub fn log_weight(&self, n: usize) -> f64 {
        self.v[n].ln() + self.log_scale
    }
}

fn log_weight(k: f64, t: f64, w: f64, n: usize) -> f64 {
    let n = n as f64;
    -4.0 * k * t * n * n + 2.0 * (2.0 * k).sqrt() * n * w
}

pub fn qnd_weights(k: f64, t: f64, w: f64, nmax: usize) -> Result<QndWeights> {
    check_positive("k", k)?;
    check_nonnegative("t", t)?;
    if nmax == 0 {
        return Err(invalid("need at least one level"));
    }
    let logs: Vec<f64> = (0..nmax).map(|n| log_weight(k, t, w, n)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(QndWeights { v: logs.iter().map(|l| (l - top).exp()).collect(), log_scale: top, w, t })
}

fn check_populations(rho: &[f64]) -> Result<()> {
    if rho.is_empty() || rho.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(invalid("populations must be finite and nonnegative"));
    }
    let total = pairwise_sum(rho);
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("populations sum to {total}, not 1")));
    }
    Ok(())
}

/// Mean and variance of n under ρₙVₙ/Σρₘ Vₘ. The variance is the centred
/// second moment, so it never goes negative through cancellation.
pub fn conditional_number_stats(rho_diag: &[f64], weights: &QndWeights) -> Result<(f64, f64)> {
    check_populations(rho_diag)?;
    if weights.v.len() != rho_diag.len() {
        return Err(Error::DimensionMismatch { expected: rho_diag.len(), found: weights.v.len() });
    }
    let mass: Vec<f64> = rho_diag.iter().zip(&weights.v).map(|(r, v)| r * v).collect();
    stats_of_mass(&mass)
}

fn stats_of_mass(mass: &[f64]) -> Result<(f64, f64)> {
    let total = pairwise_sum(mass);
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateState("no weighted mass left on this trajectory".into()));
    }
    let first: Vec<f64> = mass.iter().enumerate().map(|(n, m)| n as f64 * m).collect();
    let mean = pairwise_sum(&first) / total;
    let second: Vec<f64> = mass.iter().enumerate().map(|(n, m)| (n as f64 - mean).powi(2) * m).collect();
    Ok((mean, pairwise_sum(&second) / total))
}

/// σₙ(W) along a trajectory ending at W, from log-space weights.
fn conditional_sigma(log_rho: &[f64], k: f64, t: f64, w: f64, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(log_rho.iter().enumerate().map(|(n, lr)| lr + log_weight(k, t, w, n)));
    let top = scratch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scratch.iter_mut().for_each(|x| *x = (*x - top).exp());
    stats_of_mass(scratch).map(|(_, v)| v.sqrt()).unwrap_or(0.0)
}

/// Smallest Gauss–Hermite order accepted by the averaging routines.
pub const MIN_QUADRATURE_ORDER: usize = 16;

/// Dilation of the Gauss–Hermite rule: nodes spread β times wider than the
/// Gaussian, so that the kinks of σₙ(W) between neighbouring peaks are
/// resolved.
const DILATION: f64 = 2.0;

/// ⟨σₙ⟩ at scaled time τ (k = 1, t = τ).
pub fn average_conditional_uncertainty(rho_diag: &[f64], tau: f64, quadrature_order: usize) -> Result<f64> {
    average_conditional_uncertainty_kt(rho_diag, 1.0, tau, quadrature_order)
}

/// ⟨σₙ⟩ = ∫ σₙ(W) Σρₙ Vₙ(W) dP(W), with dP the N(0, t) measure.
///
/// ρₙVₙ(W) dP(W) is the N(μₙ, t) density with μₙ = 2√(2k) n t, so the
/// average splits into one Gaussian expectation per level, each done with a
/// dilated Gauss–Hermite rule.
pub fn average_conditional_uncertainty_kt(rho_diag: &[f64], k: f64, t: f64, quadrature_order: usize) -> Result<f64> {
    check_populations(rho_diag)?;
    check_positive("k", k)?;
    check_nonnegative("t", t)?;
    if quadrature_order < MIN_QUADRATURE_ORDER {
        return Err(invalid(format!(
            "quadrature order {quadrature_order} is below the minimum {MIN_QUADRATURE_ORDER}"
        )));
    }
    let log_rho: Vec<f64> = rho_diag.iter().map(|p| p.ln()).collect();
    let mut scratch = Vec::with_capacity(rho_diag.len());
    if t == 0.0 {
        return Ok(conditional_sigma(&log_rho, k, 0.0, 0.0, &mut scratch));
    }
    let gh = GaussHermite::new(quadrature_order)?;
    let nodes: Vec<(f64, f64)> = gh
        .nodes
        .iter()
        .zip(&gh.weights)
        .map(|(&y, &w)| {
            let weight = (w.ln() + y * y * (1.0 - 1.0 / (DILATION * DILATION))).exp()
                / (DILATION * std::f64::consts::PI.sqrt());
            (y * (2.0 * t).sqrt() / DILATION, weight)
        })
        .collect();
    let drift = 2.0 * (2.0 * k).sqrt() * t;
    let per_level: Vec<f64> = rho_diag
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            if p == 0.0 {
                return 0.0;
            }
            let mu = drift * n as f64;
            let terms: Vec<f64> = nodes
                .iter()
                .map(|&(dx, w)| w * conditional_sigma(&log_rho, k, t, mu + dx, &mut scratch))
                .collect();
            p * pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&per_level))
}

/// ∫ Σρₙ Vₙ(W) dP(W), by adaptive Gauss–Kronrod over W. Equals 1: the
/// trajectory probabilities are normalized.
pub fn measure_normalization(rho_diag: &[f64], k: f64, t: f64) -> Result<f64> {
    check_populations(rho_diag)?;
    check_positive("k", k)?;
    check_positive("t", t)?;
    let sd = t.sqrt();
    let drift = 2.0 * (2.0 * k).sqrt() * t;
    let top = drift * (rho_diag.len() - 1) as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * t).sqrt();
    let density = |w: f64| -> C64 {
        let terms: Vec<f64> = rho_diag
            .iter()
            .enumerate()
            .map(|(n, &p)| {
                let d = w - drift * n as f64;
                p * norm * (-d * d / (2.0 * t)).exp()
            })
            .collect();
        C64::new(pairwise_sum(&terms), 0.0)
    };
    let lo = -12.0 * sd;
    let hi = top + 12.0 * sd;
    let pieces = ((hi - lo) / sd).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=pieces).map(|i| lo + (hi - lo) * i as f64 / pieces as f64).collect();
    Ok(quadrature::integrate(density, &breaks, 1e-12, 1e-14)?.value.re)
}

/// ρ(t) = V ρ(0) V†/Tr with V = e^{At}e^{BW}, elementwise on the Fock
/// basis.
pub fn posterior_state(rho0: &DensityMatrix, model: &QndModel, t: f64, w: f64) -> Result<DensityMatrix> {
    check_nonnegative("t", t)?;
    let space = rho0.space();
    let sq = (2.0 * model.k).sqrt();
    let logv: Vec<C64> = model
        .drift_diagonal(space.dim())
        .iter()
        .enumerate()
        .map(|(n, a)| a * t + sq * n as f64 * w)
        .collect();
    let top = logv.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let v: Vec<C64> = logv.iter().map(|z| (z - top).exp()).collect();
    let m = rho0.matrix();
    let out = Array2::from_shape_fn(m.raw_dim(), |(i, j)| v[i] * m[[i, j]] * v[j].conj());
    let tr: C64 = out.diag().sum();
    if !(tr.re > 0.0) || !tr.re.is_finite() {
        return Err(Error::DegenerateState("posterior trace vanished".into()));
    }
    DensityMatrix::new(out, space)?.normalized()
}

/// Fig. 1 initial photon distributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialPopulation {
    Thermal { nbar: f64 },
    Coherent { mean: f64 },
}

impl InitialPopulation {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Thermal { .. } => "thermal",
            Self::Coherent { .. } => "coherent",
        }
    }

    /// Populations on `dim` levels; errors if the truncated tail is not
    /// negligible.
    pub fn populations(&self, dim: usize) -> Result<Vec<f64>> {
        let space = FockSpace::natural(dim)?;
        match *self {
            Self::Thermal { nbar } => Ok(thermal_state(nbar, space)?.populations()),
            Self::Coherent { mean } => {
                check_nonnegative("mean", mean)?;
                let psi = coherent_state(C64::new(mean.sqrt(), 0.0), space)?;
                let p: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
                let total = pairwise_sum(&p);
                Ok(p.iter().map(|x| x / total).collect())
            }
        }
    }
}

/// Pure state with the given populations; the diagonal statistics of a QND
/// trajectory depend on the populations only.
pub fn purified(rho_diag: &[f64]) -> Result<StateVector> {
    check_populations(rho_diag)?;
    let space = FockSpace::natural(rho_diag.len())?;
    StateVector::new(rho_diag.iter().map(|p| C64::new(p.sqrt(), 0.0)).collect(), space)
}

/// Monte Carlo ⟨σₙ⟩ at time t over `trajectories` split-step trajectories.
///
/// Records are drawn from their physical law: n ~ ρ, then W with drift
/// 2√(2k)n. Each trajectory's weight ⟨ψ|ψ⟩/Σρₙ Vₙ(W) corrects for the
/// proposal, and is 1 up to discretization.
pub fn monte_carlo_uncertainty(
    rho_diag: &[f64],
    model: &QndModel,
    t: f64,
    steps: usize,
    trajectories: usize,
    seed: u64,
) -> Result<Estimate> {
    check_populations(rho_diag)?;
    check_positive("t", t)?;
    let psi0 = purified(rho_diag)?;
    let space = psi0.space();
    let integrator = LseIntegrator::new(&model.lse_model(space)?, t / steps as f64)?;
    let cdf: Vec<f64> = rho_diag
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let drift = 2.0 * (2.0 * model.k).sqrt();
    let samples = oracle::run_ensemble(trajectories, t, steps, seed, |index, path| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x716e_645f_6e75_6d62);
        rng.set_stream(index);
        let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
        let n = cdf.partition_point(|c| *c < u).min(rho_diag.len() - 1);
        let path = path.with_drift(drift * n as f64);
        let end = integrator.run(&psi0, &path)?;
        let weights = qnd_weights(model.k, t, path.endpoint(), rho_diag.len())?;
        let proposal: Vec<f64> = rho_diag.iter().zip(&weights.v).map(|(r, v)| r * v).collect();
        let log_weight = end.log_norm_sqr() - (pairwise_sum(&proposal).ln() + weights.log_scale);
        let pops: Vec<f64> = end.state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let (_, var) = stats_of_mass(&pops)?;
        Ok(log_weight.exp() * var.sqrt())
    })?;
    Estimate::from_samples(&samples)
}
