//! Named experiments and their record output.
//!
//! Every experiment returns a flat list of [`CurveRecord`]s. A run may hold
//! several curves; they are emitted as consecutive blocks, one block per
//! curve, each block covering the grid in increasing order. The block order
//! of each experiment is listed on its `run_*` function.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_positive, invalid, Error, Result};
use crate::hilbert::{coherent_state, variance, FockSpace};
use crate::momentum::{self, GaussianMomentumState, LinearPotentialModel};
use crate::oracle::{self, integrate_master_checkpoints, LseIntegrator};
use crate::qnd::{self, InitialPopulation, QndModel};
use crate::quadratic::HoPositionModel;
use crate::stats::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig1Qnd,
    MomentumLinear,
    HoPosition,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Self::Fig1Qnd, Self::MomentumLinear, Self::HoPosition, Self::Validate];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig1Qnd => "fig1-qnd",
            Self::MomentumLinear => "momentum-linear",
            Self::HoPosition => "ho-position",
            Self::Validate => "validate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
    MasterEq,
}

/// One output row. `stderr` is present exactly for Monte Carlo rows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRecord {
    pub abscissa: f64,
    pub value: f64,
    pub stderr: Option<f64>,
    pub method: Method,
}

impl CurveRecord {
    fn exact(abscissa: f64, value: f64, method: Method) -> Self {
        Self { abscissa, value, stderr: None, method }
    }

    fn sampled(abscissa: f64, e: Estimate) -> Self {
        Self { abscissa, value: e.mean, stderr: Some(e.stderr), method: Method::MonteCarlo }
    }
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, n: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(invalid("grid ends must be finite"));
        }
        if n == 0 || (n == 1 && start != stop) || (n > 1 && !(stop > start)) {
            return Err(invalid(format!("grid {start}:{stop}:{n} is not strictly increasing")));
        }
        Ok(Self { start, stop, n })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.stop } else { self.start + h * i as f64 }).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;
    /// `a:b:n`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || invalid(format!("grid `{s}` is not of the form a:b:n"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let a = parts[0].trim().parse().map_err(|_| bad())?;
        let b = parts[1].trim().parse().map_err(|_| bad())?;
        let n = parts[2].trim().parse().map_err(|_| bad())?;
        Self::new(a, b, n)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(invalid(format!("unknown format `{s}` (csv or json)"))),
        }
    }
}

/// Everything an experiment run depends on. Units: ħ, m, ω as given; the
/// QND grid is in τ = kt, the oscillator grid in ωt, the momentum grid in t.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trajectories: usize,
    pub dim: usize,
    pub dt: f64,
    pub grid: Grid,
    pub oracle: bool,
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
    /// Measurement constant (QND and momentum runs).
    pub k: f64,
    /// mω²/2ħk for the oscillator run.
    pub r: f64,
    pub force: f64,
    pub nbar: f64,
    pub coherent_mean: f64,
    /// Initial coherent amplitude of the oscillator run.
    pub alpha: f64,
    pub quadrature_order: usize,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            seed: 1,
            trajectories: 8,
            dim: 80,
            dt: 1e-3,
            grid: Grid { start: 0.0, stop: 1.0, n: 11 },
            oracle: true,
            hbar: 1.0,
            mass: 1.0,
            omega: 1.0,
            k: 0.25,
            r: 1.0,
            force: 0.5,
            nbar: 4.0,
            coherent_mean: 20.0,
            alpha: 0.0,
            quadrature_order: 64,
        };
        match experiment {
            Experiment::Fig1Qnd => Self {
                trajectories: 2000,
                dim: 160,
                dt: 0.01,
                grid: Grid { start: 0.0, stop: 2.0, n: 21 },
                k: 1.0,
                ..base
            },
            Experiment::HoPosition => Self { grid: Grid { start: 0.0, stop: 5.0, n: 21 }, ..base },
            Experiment::MomentumLinear | Experiment::Validate => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectories == 0 {
            return Err(invalid("trajectories must be at least 1"));
        }
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        for (name, v) in [
            ("dt", self.dt),
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("omega", self.omega),
            ("k", self.k),
            ("r", self.r),
        ] {
            check_positive(name, v)?;
        }
        if self.grid.start < 0.0 {
            return Err(invalid("time grids start at 0 or later"));
        }
        Grid::new(self.grid.start, self.grid.stop, self.grid.n)?;
        if self.quadrature_order < qnd::MIN_QUADRATURE_ORDER {
            return Err(invalid(format!("quadrature order must be at least {}", qnd::MIN_QUADRATURE_ORDER)));
        }
        Ok(())
    }
}

/// Step counts reaching each grid time exactly, or a config error.
fn checkpoints(times: &[f64], dt: f64) -> Result<Vec<usize>> {
    times
        .iter()
        .map(|&t| {
            let n = (t / dt).round();
            if (n * dt - t).abs() > 1e-9 * t.max(1.0) {
                Err(invalid(format!("grid time {t} is not a multiple of dt = {dt}")))
            } else {
                Ok(n as usize)
            }
        })
        .collect()
}

/// ⟨σₙ(τ)⟩ for the thermal and coherent initial states.
///
/// Blocks: thermal quadrature, coherent quadrature, then with the oracle on
/// thermal Monte Carlo and coherent Monte Carlo (τ > 0 only).
pub fn run_fig1(config: &ExperimentConfig) -> Result<Vec<CurveRecord>> {
    config.validate()?;
    let states = [
        InitialPopulation::Thermal { nbar: config.nbar },
        InitialPopulation::Coherent { mean: config.coherent_mean },
    ];
    // Truncation problems are configuration errors: check before any work.
    let pops: Vec<Vec<f64>> = states.iter().map(|s| s.populations(config.dim)).collect::<Result<_>>()?;
    let taus = config.grid.points();
    let model = QndModel::new(config.k, 0.0)?;
    let mut out = Vec::new();
    for p in &pops {
        let values: Vec<f64> = taus
            .par_iter()
            .map(|&tau| qnd::average_conditional_uncertainty_kt(p, config.k, tau / config.k, config.quadrature_order))
            .collect::<Result<_>>()?;
        out.extend(taus.iter().zip(values).map(|(&x, v)| CurveRecord::exact(x, v, Method::Quadrature)));
    }
    if config.oracle {
        for (s, p) in pops.iter().enumerate() {
            for (i, &tau) in taus.iter().enumerate().filter(|(_, &tau)| tau > 0.0) {
                let t = tau / config.k;
                let steps = ((t / config.dt).ceil() as usize).max(1);
                let seed = config.seed.wrapping_add(((s as u64) << 32) | i as u64);
                let e = qnd::monte_carlo_uncertainty(p, &model, t, steps, config.trajectories, seed)?;
                out.push(CurveRecord::sampled(tau, e));
            }
        }
    }
    Ok(out)
}

/// Conditional position variance of the measured oscillator against ωt.
///
/// Blocks: closed-form σ_x², the steady-state value (constant over the
/// grid), then with the oracle on the split-step σ_x² averaged over
/// trajectories.
pub fn run_ho_position(config: &ExperimentConfig) -> Result<Vec<CurveRecord>> {
    config.validate()?;
    let hom = HoPositionModel::from_ratio(config.hbar, config.mass, config.omega, config.r)?;
    let xs = config.grid.points();
    let times: Vec<f64> = xs.iter().map(|x| x / config.omega).collect();
    let mut out = Vec::with_capacity(3 * xs.len());
    for (&x, &t) in xs.iter().zip(&times) {
        out.push(CurveRecord::exact(x, hom.conditional_x_variance(t)?, Method::ClosedForm));
    }
    let steady = hom.steady_state_variance();
    out.extend(xs.iter().map(|&x| CurveRecord::exact(x, steady, Method::ClosedForm)));
    if config.oracle {
        let space = hom.space(config.dim)?;
        let psi0 = coherent_state(C64::new(config.alpha, 0.0), space)?;
        let marks = checkpoints(&times, config.dt)?;
        let last = *marks.last().expect("nonempty grid");
        let integrator = LseIntegrator::new(&hom.quadratic_model().lse_model(space)?, config.dt)?;
        let q = space.position();
        let per_path = oracle::run_ensemble(
            config.trajectories,
            last.max(1) as f64 * config.dt,
            last.max(1),
            config.seed,
            |_, path| {
                integrator
                    .run_checkpoints(&psi0, &path, &marks)?
                    .iter()
                    .map(|s| variance(&s.state, &q))
                    .collect::<Result<Vec<f64>>>()
            },
        )?;
        for (j, &x) in xs.iter().enumerate() {
            let samples: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
            out.push(CurveRecord::sampled(x, Estimate::from_samples(&samples)?));
        }
    }
    Ok(out)
}

/// Momentum measurement in a linear potential, from the oscillator ground
/// state, against t.
///
/// Blocks: closed-form conditional σ_p², closed-form trajectory average
/// ⟨p⟩ = ⟨p(0)⟩ + Ft, then with the oracle on the split-step conditional
/// σ_p² and the master-equation ⟨P⟩.
pub fn run_momentum(config: &ExperimentConfig) -> Result<Vec<CurveRecord>> {
    config.validate()?;
    let model = LinearPotentialModel::new(config.hbar, config.mass, config.force, config.k)?;
    let g = GaussianMomentumState::ground(config.hbar, config.mass, config.omega)?;
    let ts = config.grid.points();
    let mut out = Vec::with_capacity(4 * ts.len());
    for &t in &ts {
        out.push(CurveRecord::exact(t, momentum::conditional_momentum_variance(g.var_p(), config.k, t)?, Method::ClosedForm));
    }
    for &t in &ts {
        out.push(CurveRecord::exact(t, momentum::averaged_momentum_moment(&g, config.force, t, 1)?, Method::ClosedForm));
    }
    if config.oracle {
        let space = FockSpace::new(config.dim, config.hbar, config.mass, config.omega)?;
        let marks = checkpoints(&ts, config.dt)?;
        let last = (*marks.last().expect("nonempty grid")).max(1);
        let t_end = last as f64 * config.dt;
        let integrator = LseIntegrator::new(&model.lse_model(space)?, config.dt)?;
        let p = space.momentum();
        let psi0 = space.vacuum();
        let per_path = oracle::run_ensemble(config.trajectories, t_end, last, config.seed, |_, path| {
            integrator
                .run_checkpoints(&psi0, &path, &marks)?
                .iter()
                .map(|s| variance(&s.state, &p))
                .collect::<Result<Vec<f64>>>()
        })?;
        for (j, &t) in ts.iter().enumerate() {
            let samples: Vec<f64> = per_path.iter().map(|v| v[j]).collect();
            out.push(CurveRecord::sampled(t, Estimate::from_samples(&samples)?));
        }
        let rhos = integrate_master_checkpoints(&model.master_model(space)?, &psi0.projector(), t_end, last, &marks)?;
        for (rho, &t) in rhos.iter().zip(&ts) {
            out.push(CurveRecord::exact(t, rho.expectation(&p)?.re, Method::MasterEq));
        }
    }
    Ok(out)
}

/// Run a curve-producing experiment.
pub fn run(config: &ExperimentConfig) -> Result<Vec<CurveRecord>> {
    match config.experiment {
        Experiment::Fig1Qnd => run_fig1(config),
        Experiment::HoPosition => run_ho_position(config),
        Experiment::MomentumLinear => run_momentum(config),
        Experiment::Validate => Err(invalid("`validate` produces a report, not curves")),
    }
}

/// CSV with header `abscissa,value,stderr,method`, or a JSON array of
/// records with the same field names.
pub fn render(records: &[CurveRecord], format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if records.is_empty() {
                w.write_record(["abscissa", "value", "stderr", "method"])
                    .map_err(|e| Error::Numerical(e.to_string()))?;
            }
            for r in records {
                w.serialize(r).map_err(|e| Error::Numerical(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records).map_err(|e| Error::Numerical(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}
