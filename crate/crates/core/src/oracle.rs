//! Brute-force reference integrators on a truncated Fock space.
//!
//! [`LseIntegrator`] steps the linear stochastic Schrödinger equation
//! dψ = Ãψ dt + Bψ dW with the splitting ψ ↦ e^{A dt} e^{B ΔW} ψ,
//! A = Ã − B²/2. [`integrate_master`] integrates the Lindblad equation the
//! ensemble of such trajectories reproduces.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{check_positive, invalid, Error, Result};
use crate::hilbert::{DensityMatrix, FockSpace, OperatorMatrix, StateVector, TrackedState};
use crate::linalg::{self, pairwise_sum};
use crate::paths::{self, WienerPath};
use crate::stats::{ComplexEstimate, Estimate};

/// Drift Ã and noise coefficient B of a single-increment linear SSE.
#[derive(Clone, Debug)]
pub struct LseModel {
    a_tilde: OperatorMatrix,
    b: OperatorMatrix,
    a: OperatorMatrix,
}

impl LseModel {
    pub fn new(a_tilde: OperatorMatrix, b: OperatorMatrix) -> Result<Self> {
        if a_tilde.space() != b.space() {
            return Err(Error::DimensionMismatch {
                expected: a_tilde.space().dim(),
                found: b.space().dim(),
            });
        }
        let b2 = b.dot(&b);
        let a = a_tilde.plus_scaled(C64::new(-0.5, 0.0), &b2);
        Ok(Self { a_tilde, b, a })
    }

    /// Build from the split-step drift A directly (Ã = A + B²/2).
    pub fn from_drift(a: OperatorMatrix, b: OperatorMatrix) -> Result<Self> {
        let b2 = b.dot(&b);
        Self::new(a.plus_scaled(C64::new(0.5, 0.0), &b2), b)
    }

    pub fn a_tilde(&self) -> &OperatorMatrix {
        &self.a_tilde
    }
    pub fn b(&self) -> &OperatorMatrix {
        &self.b
    }
    /// A = Ã − B²/2
    pub fn a(&self) -> &OperatorMatrix {
        &self.a
    }
    pub fn space(&self) -> FockSpace {
        self.a.space()
    }
}

/// Hamiltonian and Lindblad operators of ρ̇ = −(i/ħ)[H,ρ] + Σ(2OρO† − O†Oρ − ρO†O).
#[derive(Clone, Debug)]
pub struct MasterModel {
    h: OperatorMatrix,
    lindblads: Vec<OperatorMatrix>,
}

impl MasterModel {
    pub fn new(h: OperatorMatrix, lindblads: Vec<OperatorMatrix>) -> Result<Self> {
        if !h.is_hermitian(1e-12) {
            return Err(invalid("Hamiltonian is not Hermitian"));
        }
        if let Some(o) = lindblads.iter().find(|o| o.space() != h.space()) {
            return Err(Error::DimensionMismatch { expected: h.space().dim(), found: o.space().dim() });
        }
        Ok(Self { h, lindblads })
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.h
    }
    pub fn lindblads(&self) -> &[OperatorMatrix] {
        &self.lindblads
    }

    /// The linear unraveling with one noise: B = √2·O, Ã = −iH/ħ − O†O.
    pub fn to_lse(&self) -> Result<LseModel> {
        let [o] = self.lindblads.as_slice() else {
            return Err(Error::UnsupportedState(format!(
                "a single-noise unraveling needs exactly one Lindblad operator, got {}",
                self.lindblads.len()
            )));
        };
        let hbar = self.h.space().hbar();
        let a_tilde = self.h.scale(C64::new(0.0, -1.0 / hbar)).minus(&o.dagger().dot(o));
        LseModel::new(a_tilde, o.scale(C64::new(std::f64::consts::SQRT_2, 0.0)))
    }
}

enum NoiseStep {
    /// B diagonal: e^{BΔW} is elementwise.
    Diagonal(Vec<C64>),
    /// B = c·V diag(λ) V† with V unitary and λ real; the state is kept in
    /// the eigenbasis of B.
    Eigen { c: C64, lambda: Vec<f64>, v: Array2<C64>, vh: Array2<C64> },
}

/// Precomputed stepping operators for one (model, dt).
pub struct LseIntegrator {
    space: FockSpace,
    dt: f64,
    noise: NoiseStep,
    /// e^{A dt}, expressed in the working basis.
    drift: Array2<C64>,
    /// Is `drift` diagonal (fast elementwise product)?
    drift_diag: Option<Vec<C64>>,
    /// A dt, when both A and B are diagonal: the whole step is then one
    /// elementwise exponential, formed in log space.
    log_step: Option<Vec<C64>>,
}

impl LseIntegrator {
    pub fn new(model: &LseModel, dt: f64) -> Result<Self> {
        check_positive("dt", dt)?;
        let space = model.space();
        let b = model.b().matrix();
        let exp_a = linalg::expm(&(model.a().matrix() * C64::new(dt, 0.0)));
        let (noise, drift) = if linalg::is_diagonal(b) {
            (NoiseStep::Diagonal(b.diag().to_vec()), exp_a)
        } else {
            // Normal B of the form c·Hermitian: pick c from the largest entry.
            let (i, j) = b
                .indexed_iter()
                .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
                .map(|(ij, _)| ij)
                .expect("nonempty");
            let pivot = b[[i, j]];
            let c = if i == j {
                pivot / pivot.norm()
            } else {
                // For c·H with H Hermitian, b_ij / conj(b_ji) = c / conj(c).
                let ratio = pivot / b[[j, i]].conj();
                ratio.sqrt()
            };
            let h = b / c;
            if !linalg::is_hermitian(&h, 1e-12) {
                return Err(Error::UnsupportedState(
                    "noise operator B must be diagonal or a complex multiple of a Hermitian matrix"
                        .into(),
                ));
            }
            let h = (&h + &linalg::dagger(&h)) * C64::new(0.5, 0.0);
            let (lambda, v) = linalg::hermitian_eigen(&h)?;
            let vh = linalg::dagger(&v);
            let drift = vh.dot(&exp_a).dot(&v);
            (NoiseStep::Eigen { c, lambda, v, vh }, drift)
        };
        let drift_diag = linalg::is_diagonal(&drift).then(|| drift.diag().to_vec());
        let log_step = (matches!(noise, NoiseStep::Diagonal(_)) && linalg::is_diagonal(model.a().matrix()))
            .then(|| model.a().matrix().diag().iter().map(|a| a * dt).collect());
        // Commuting diagonal factors make the split exact; the guideline
        // only matters otherwise.
        let a_norm = model.a().norm();
        if log_step.is_none() && a_norm * dt > 0.1 {
            log::warn!(
                "split step guideline exceeded: ‖A‖·dt = {:.3} > 0.1 (dt = {dt:.3e})",
                a_norm * dt
            );
        }
        Ok(Self { space, dt, noise, drift, drift_diag, log_step })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn to_work(&self, psi: &Array1<C64>) -> Array1<C64> {
        match &self.noise {
            NoiseStep::Diagonal(_) => psi.clone(),
            NoiseStep::Eigen { vh, .. } => vh.dot(psi),
        }
    }

    fn out_of_work(&self, y: &Array1<C64>) -> Array1<C64> {
        match &self.noise {
            NoiseStep::Diagonal(_) => y.clone(),
            NoiseStep::Eigen { v, .. } => v.dot(y),
        }
    }

    /// One split step. Returns a log scale factor that was divided out of
    /// `y` to keep the exponentials finite.
    fn step(&self, y: &mut Array1<C64>, dw: f64) -> f64 {
        if let (NoiseStep::Diagonal(b), Some(la)) = (&self.noise, &self.log_step) {
            let logs: Vec<C64> = b.iter().zip(la).map(|(bi, ai)| bi * dw + ai).collect();
            return scaled_exp_mul(y, &logs);
        }
        let logs: Vec<C64> = match &self.noise {
            NoiseStep::Diagonal(b) => b.iter().map(|bi| bi * dw).collect(),
            NoiseStep::Eigen { c, lambda, .. } => lambda.iter().map(|l| c * dw * l).collect(),
        };
        let shift = scaled_exp_mul(y, &logs);
        match &self.drift_diag {
            Some(d) => y.iter_mut().zip(d).for_each(|(yi, di)| *yi *= di),
            None => *y = self.drift.dot(y),
        }
        shift
    }
}

/// y ← y·exp(logs) / e^{shift}, with the shift chosen so that the largest
/// entry has modulus 1. Returns the shift.
fn scaled_exp_mul(y: &mut Array1<C64>, logs: &[C64]) -> f64 {
    let shift = y
        .iter()
        .zip(logs)
        .filter(|(yi, _)| yi.norm() > 0.0)
        .map(|(yi, l)| l.re + yi.norm().ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    y.iter_mut().zip(logs).for_each(|(yi, l)| {
        if yi.norm() > 0.0 {
            *yi = (l + yi.ln() - shift).exp();
        }
    });
    shift
}

impl LseIntegrator {
    /// Integrate along `path`, returning the states after each step count
    /// listed in `checkpoints` (strictly increasing, each ≤ path length).
    pub fn run_checkpoints(
        &self,
        psi0: &StateVector,
        path: &WienerPath,
        checkpoints: &[usize],
    ) -> Result<Vec<TrackedState>> {
        if psi0.space() != self.space {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: psi0.space().dim() });
        }
        if (path.dt() - self.dt).abs() > 1e-12 * self.dt {
            return Err(invalid(format!(
                "path step {} does not match integrator step {}",
                path.dt(),
                self.dt
            )));
        }
        if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.last().is_some_and(|&c| c > path.len()) {
            return Err(invalid("checkpoints must be strictly increasing and within the path"));
        }
        let start = TrackedState::from_state(psi0)?;
        let mut log_norm = start.log_norm;
        let mut y = self.to_work(start.state.amplitudes());
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut next = checkpoints.iter().peekable();
        let emit = |y: &Array1<C64>, log_norm: f64| -> Result<TrackedState> {
            let state = StateVector::new(self.out_of_work(y), self.space)?;
            Ok(TrackedState { state, log_norm })
        };
        while next.peek() == Some(&&0) {
            out.push(emit(&y, log_norm)?);
            next.next();
        }
        for (n, &dw) in path.increments().iter().enumerate() {
            let shift = self.step(&mut y, dw);
            let nrm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !(nrm > 0.0) || !nrm.is_finite() {
                return Err(Error::Numerical(format!(
                    "state norm became {nrm} at step {}; reduce dt",
                    n + 1
                )));
            }
            y.mapv_inplace(|z| z / nrm);
            log_norm += shift + nrm.ln();
            while next.peek() == Some(&&(n + 1)) {
                out.push(emit(&y, log_norm)?);
                next.next();
            }
        }
        Ok(out)
    }

    pub fn run(&self, psi0: &StateVector, path: &WienerPath) -> Result<TrackedState> {
        let mut v = self.run_checkpoints(psi0, path, &[path.len()])?;
        Ok(v.pop().expect("one checkpoint"))
    }
}

/// Unnormalized state at the end of `path`, as (unit vector, log-norm).
pub fn integrate_lse(model: &LseModel, psi0: &StateVector, path: &WienerPath) -> Result<TrackedState> {
    LseIntegrator::new(model, path.dt())?.run(psi0, path)
}

/// Run trajectories 0..count in parallel and return `f`'s results in index
/// order. Paths are keyed by (seed, index), so the output does not depend on
/// the number of worker threads.
pub fn run_ensemble<T: Send>(
    count: usize,
    t: f64,
    steps: usize,
    seed: u64,
    f: impl Fn(u64, WienerPath) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if count == 0 {
        return Err(invalid("ensemble needs at least one trajectory"));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|i| f(i, paths::sample_path_indexed(t, steps, seed, i)?))
        .collect()
}

/// Mean of ⟨ψ|O|ψ⟩ over unnormalized trajectories.
pub fn ensemble_average(op: &OperatorMatrix, states: &[TrackedState]) -> Result<ComplexEstimate> {
    if states.is_empty() {
        return Err(invalid("ensemble average of an empty set"));
    }
    let values: Vec<C64> = states
        .iter()
        .map(|s| s.state.inner(&op.apply(&s.state)) * s.norm_sqr())
        .collect();
    ComplexEstimate::from_samples(&values)
}

/// Σ wᵢ⟨O⟩ᵢ / Σ wᵢ with wᵢ = ⟨ψᵢ|ψᵢ⟩ and ⟨O⟩ᵢ the normalized expectation.
pub fn weighted_conditional_average(op: &OperatorMatrix, states: &[TrackedState]) -> Result<Estimate> {
    if states.is_empty() {
        return Err(invalid("ensemble average of an empty set"));
    }
    let values: Vec<f64> = states.iter().map(|s| s.state.inner(&op.apply(&s.state)).re).collect();
    let weights: Vec<f64> = states.iter().map(|s| s.norm_sqr()).collect();
    crate::stats::weighted_mean(&values, &weights)
}

/// Mean of the trajectory norms ⟨ψ|ψ⟩ (1 in expectation).
pub fn mean_norm(states: &[TrackedState]) -> Result<Estimate> {
    let w: Vec<f64> = states.iter().map(|s| s.norm_sqr()).collect();
    Estimate::from_samples(&w)
}

struct MasterRhs {
    l: Array2<C64>,
    o: Vec<Array2<C64>>,
    od: Vec<Array2<C64>>,
}

impl MasterRhs {
    fn eval(&self, rho: &Array2<C64>) -> Array2<C64> {
        let lr = self.l.dot(rho);
        let mut out = &lr + &linalg::dagger(&lr);
        for (o, od) in self.o.iter().zip(&self.od) {
            out.scaled_add(C64::new(2.0, 0.0), &o.dot(rho).dot(od));
        }
        out
    }
}

/// Classical RK4 integration of the master equation; returns ρ at each
/// step count in `checkpoints`.
pub fn integrate_master_checkpoints(
    model: &MasterModel,
    rho0: &DensityMatrix,
    t: f64,
    steps: usize,
    checkpoints: &[usize],
) -> Result<Vec<DensityMatrix>> {
    check_positive("t", t)?;
    if steps == 0 {
        return Err(invalid("master integration needs at least one step"));
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.last().is_some_and(|&c| c > steps) {
        return Err(invalid("checkpoints must be strictly increasing and at most `steps`"));
    }
    let space = model.h.space();
    if rho0.space() != space {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: rho0.space().dim() });
    }
    let hbar = space.hbar();
    let mut l = model.h.matrix() * C64::new(0.0, -1.0 / hbar);
    for o in &model.lindblads {
        l = l - linalg::dagger(o.matrix()).dot(o.matrix());
    }
    let rhs = MasterRhs {
        l,
        o: model.lindblads.iter().map(|o| o.matrix().clone()).collect(),
        od: model.lindblads.iter().map(|o| linalg::dagger(o.matrix())).collect(),
    };
    let dt = t / steps as f64;
    let h = C64::new(dt, 0.0);
    let mut rho = rho0.matrix().clone();
    let tr0 = rho0.trace().re;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    while next.peek() == Some(&&0) {
        out.push(DensityMatrix::from_parts_unchecked(rho.clone(), space));
        next.next();
    }
    for n in 1..=steps {
        let k1 = rhs.eval(&rho);
        let k2 = rhs.eval(&(&rho + &(&k1 * (h * 0.5))));
        let k3 = rhs.eval(&(&rho + &(&k2 * (h * 0.5))));
        let k4 = rhs.eval(&(&rho + &(&k3 * h)));
        let incr = (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (h / 6.0);
        rho = rho + incr;
        rho = (&rho + &linalg::dagger(&rho)) * C64::new(0.5, 0.0);
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(format!(
                "master integration diverged at step {n}; use more than {steps} steps"
            )));
        }
        let drift = (rho.diag().iter().map(|z| z.re).sum::<f64>() - tr0).abs();
        if drift > 1e-9 * tr0.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "trace drifted by {drift:.3e} at step {n}; use more than {steps} steps"
            )));
        }
        while next.peek() == Some(&&n) {
            out.push(DensityMatrix::from_parts_unchecked(rho.clone(), space));
            next.next();
        }
    }
    Ok(out)
}

pub fn integrate_master(model: &MasterModel, rho0: &DensityMatrix, t: f64, steps: usize) -> Result<DensityMatrix> {
    let mut v = integrate_master_checkpoints(model, rho0, t, steps, &[steps])?;
    Ok(v.pop().expect("one checkpoint"))
}

/// Sum of values produced in index order (pairwise, thread-count independent).
pub fn ordered_sum(xs: &[f64]) -> f64 {
    pairwise_sum(xs)
}
