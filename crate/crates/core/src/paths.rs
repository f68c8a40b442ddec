//! Discretized Wiener paths, Ito (left-endpoint) sums, and the Gaussian
//! statistics of the resulting functionals.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{check_positive, invalid, Error, Result};
use crate::linalg::pairwise_sum;
use crate::quadrature;

/// Where a sampled path came from. Refinement bumps `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PathOrigin {
    pub seed: u64,
    pub index: u64,
    pub level: u32,
}

/// Wiener increments ΔWₙ on a uniform grid of step `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerPath {
    dt: f64,
    increments: Vec<f64>,
    origin: Option<PathOrigin>,
}

/// Generator for (seed, index, level): the seed and level form the key and
/// the trajectory index selects the stream, so every path is reproducible
/// on its own, whatever order or thread it is generated on.
fn rng_for(origin: PathOrigin) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&origin.seed.to_le_bytes());
    key[8..12].copy_from_slice(&origin.level.to_le_bytes());
    key[12..16].copy_from_slice(b"lqtw");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(origin.index);
    rng
}

/// Path number `index` of the ensemble keyed by `seed`.
pub fn sample_path_indexed(t: f64, steps: usize, seed: u64, index: u64) -> Result<WienerPath> {
    check_positive("t", t)?;
    if steps == 0 {
        return Err(invalid("a path needs at least one step"));
    }
    let dt = t / steps as f64;
    let origin = PathOrigin { seed, index, level: 0 };
    let mut rng = rng_for(origin);
    let sd = dt.sqrt();
    let increments = (0..steps)
        .map(|_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
        .collect();
    Ok(WienerPath { dt, increments, origin: Some(origin) })
}

pub fn sample_path(t: f64, steps: usize, seed: u64) -> Result<WienerPath> {
    sample_path_indexed(t, steps, seed, 0)
}

impl WienerPath {
    /// A path with explicitly given increments.
    pub fn from_increments(dt: f64, increments: Vec<f64>) -> Result<Self> {
        check_positive("dt", dt)?;
        if increments.is_empty() {
            return Err(invalid("a path needs at least one increment"));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(invalid("path increments must be finite"));
        }
        Ok(Self { dt, increments, origin: None })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
    pub fn len(&self) -> usize {
        self.increments.len()
    }
    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }
    pub fn origin(&self) -> Option<PathOrigin> {
        self.origin
    }
    pub fn t_final(&self) -> f64 {
        self.dt * self.len() as f64
    }

    /// Left endpoint of step n (0-based).
    pub fn time(&self, n: usize) -> f64 {
        self.dt * n as f64
    }

    /// W(t_final)
    pub fn endpoint(&self) -> f64 {
        pairwise_sum(&self.increments)
    }

    /// Halve the step by Brownian-bridge interpolation. Sampled paths draw
    /// the midpoints from the generator for the next level, so refining
    /// twice from the same path always gives the same result.
    pub fn refine(&self) -> Result<Self> {
        let origin = self.origin.ok_or_else(|| {
            invalid("only sampled paths can be refined reproducibly; use refine_with")
        })?;
        let next = PathOrigin { level: origin.level + 1, ..origin };
        let mut rng = rng_for(next);
        let mut out = self.refine_with(|| {
            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
        });
        out.origin = Some(next);
        Ok(out)
    }

    /// Brownian-bridge refinement with caller-supplied standard normals.
    pub fn refine_with(&self, mut normal: impl FnMut() -> f64) -> Self {
        let half = 0.5 * self.dt;
        let sd = 0.5 * self.dt.sqrt();
        let mut increments = Vec::with_capacity(2 * self.len());
        for &dw in &self.increments {
            let first = 0.5 * dw + sd * normal();
            increments.push(first);
            increments.push(dw - first);
        }
        Self { dt: half, increments, origin: None }
    }

    /// Condition the path on W(t_final) = `w` by spreading the endpoint
    /// correction evenly (the Brownian bridge through `w`).
    pub fn pinned(&self, w: f64) -> Self {
        let shift = (w - self.endpoint()) / self.len() as f64;
        let increments = self.increments.iter().map(|x| x + shift).collect();
        Self { dt: self.dt, increments, origin: self.origin }
    }

    /// Add a constant drift: ΔWₙ ↦ ΔWₙ + μ dt.
    pub fn with_drift(&self, mu: f64) -> Self {
        let d = mu * self.dt;
        let increments = self.increments.iter().map(|x| x + d).collect();
        Self { dt: self.dt, increments, origin: self.origin }
    }

    /// Running values W(t_n) for n = 0..=len.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut w = 0.0;
        out.push(w);
        for dw in &self.increments {
            w += dw;
            out.push(w);
        }
        out
    }
}

/// Scalar random variables that parameterize the closed-form propagators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryFunctionals {
    pub w: f64,
    pub y: f64,
    #[serde(skip)]
    pub x1: C64,
    #[serde(skip)]
    pub x2: C64,
    #[serde(skip)]
    pub x3: C64,
    #[serde(skip)]
    pub z: C64,
}

impl TrajectoryFunctionals {
    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Self { w: 0.0, y: 0.0, x1: z, x2: z, x3: z, z }
    }
}

/// Σ f(t_{n−1}) ΔWₙ
pub fn ito_integral(path: &WienerPath, f: impl Fn(f64) -> C64) -> C64 {
    let terms: Vec<C64> = path
        .increments
        .iter()
        .enumerate()
        .map(|(n, &dw)| f(path.time(n)) * dw)
        .collect();
    pairwise_sum(&terms)
}

/// W(t) and Y(t) = ∫ t′ dW(t′).
pub fn w_and_y(path: &WienerPath) -> (f64, f64) {
    let y: Vec<f64> = path.increments.iter().enumerate().map(|(n, &dw)| path.time(n) * dw).collect();
    (path.endpoint(), pairwise_sum(&y))
}

/// Z = ∫ f₁ X₂ dW − ∫ f₂ X₁ dW with Xᵢ the running Ito integrals of fᵢ,
/// all sums taken at left endpoints.
pub fn double_ito_z(path: &WienerPath, f1: impl Fn(f64) -> C64, f2: impl Fn(f64) -> C64) -> C64 {
    let mut x1 = C64::new(0.0, 0.0);
    let mut x2 = C64::new(0.0, 0.0);
    let mut z = C64::new(0.0, 0.0);
    for (n, &dw) in path.increments.iter().enumerate() {
        let t = path.time(n);
        let (a, b) = (f1(t), f2(t));
        z += (a * x2 - b * x1) * dw;
        x1 += a * dw;
        x2 += b * dw;
    }
    z
}

/// Covariance matrix of (W(t), Y(t)).
pub fn covariance_wy(t: f64) -> Result<[[f64; 2]; 2]> {
    check_positive("t", t)?;
    Ok([[t, t * t / 2.0], [t * t / 2.0, t * t * t / 3.0]])
}

/// Joint Gaussian density of (W(t), Y(t)).
pub fn joint_density_wy(w: f64, y: f64, t: f64) -> Result<f64> {
    check_positive("t", t)?;
    let pref = 12f64.sqrt() / (2.0 * std::f64::consts::PI * t * t);
    Ok(pref * (-2.0 * w * w / t - 6.0 * y * y / (t * t * t) + 6.0 * w * y / (t * t)).exp())
}

/// ⟨Xᵢ(t) Xⱼ(t)⟩ = ∫₀ᵗ fᵢ fⱼ dt′.
pub fn xi_covariance(fi: impl Fn(f64) -> C64, fj: impl Fn(f64) -> C64, t: f64) -> Result<C64> {
    check_positive("t", t)?;
    let breaks: Vec<f64> = (0..=16).map(|i| t * i as f64 / 16.0).collect();
    let r = quadrature::integrate(|s| fi(s) * fj(s), &breaks, 1e-10, 1e-300).map_err(|e| {
        Error::Numerical(format!("covariance integral over [0, {t}] failed: {e}"))
    })?;
    Ok(r.value)
}

/// ⟨Xᵢ(t) Xⱼ(τ)⟩ = ∫₀^{min(t,τ)} fᵢ fⱼ dt′.
pub fn xi_covariance_two_time(
    fi: impl Fn(f64) -> C64,
    fj: impl Fn(f64) -> C64,
    t: f64,
    tau: f64,
) -> Result<C64> {
    check_positive("tau", tau)?;
    xi_covariance(fi, fj, t.min(tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(_: f64) -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn sampling_is_deterministic_and_stream_separated() {
        let a = sample_path(1.0, 100, 7).unwrap();
        let b = sample_path(1.0, 100, 7).unwrap();
        assert_eq!(a.increments(), b.increments());
        let c = sample_path_indexed(1.0, 100, 7, 1).unwrap();
        assert_ne!(a.increments(), c.increments());
        let d = sample_path(1.0, 100, 8).unwrap();
        assert_ne!(a.increments(), d.increments());
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(sample_path(0.0, 10, 1).is_err());
        assert!(sample_path(1.0, 0, 1).is_err());
        assert!(covariance_wy(-1.0).is_err());
        assert!(joint_density_wy(0.0, 0.0, 0.0).is_err());
        assert!(WienerPath::from_increments(0.1, vec![]).is_err());
    }

    #[test]
    fn single_step_path() {
        let p = sample_path(2.0, 1, 3).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.endpoint(), p.increments()[0]);
        assert_eq!(p.t_final(), 2.0);
    }

    #[test]
    fn ito_integral_of_one_is_w() {
        let p = sample_path(1.0, 1000, 11).unwrap();
        assert!((ito_integral(&p, one).re - p.endpoint()).abs() < 1e-12);
        let (_, y) = w_and_y(&p);
        assert!((ito_integral(&p, |s| C64::new(s, 0.0)).re - y).abs() < 1e-14);
    }

    #[test]
    fn z_is_antisymmetric() {
        let p = sample_path(1.0, 500, 5).unwrap();
        let f = |s: f64| C64::new(s.sin(), s);
        assert_eq!(double_ito_z(&p, f, f), C64::new(0.0, 0.0));
        assert_eq!(double_ito_z(&p, one, |_| C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
        let z12 = double_ito_z(&p, one, |s| C64::new(s, 0.0));
        let z21 = double_ito_z(&p, |s| C64::new(s, 0.0), one);
        assert!((z12 + z21).norm() < 1e-13);
    }

    #[test]
    fn refinement_preserves_coarse_increments() {
        let p = sample_path(1.0, 64, 9).unwrap();
        let r = p.refine().unwrap();
        assert_eq!(r.len(), 128);
        assert_eq!(r.dt(), p.dt() / 2.0);
        for (n, dw) in p.increments().iter().enumerate() {
            assert!((r.increments()[2 * n] + r.increments()[2 * n + 1] - dw).abs() < 1e-15);
        }
        assert_eq!(r, p.refine().unwrap());
        assert!(WienerPath::from_increments(0.1, vec![0.1]).unwrap().refine().is_err());
    }

    #[test]
    fn pinning_and_drift() {
        let p = sample_path(1.0, 100, 2).unwrap();
        assert!((p.pinned(0.3).endpoint() - 0.3).abs() < 1e-14);
        let d = p.with_drift(2.0);
        assert!((d.endpoint() - p.endpoint() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn density_matches_bivariate_normal() {
        let t = 1.7;
        let c = covariance_wy(t).unwrap();
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        assert!((det - t.powi(4) / 12.0).abs() < 1e-14);
        assert!((joint_density_wy(0.0, 0.0, 1.0).unwrap() - 12f64.sqrt() / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        let (sw, sy) = ((c[0][0]).sqrt(), (c[1][1]).sqrt());
        for i in -6..=6 {
            for j in -6..=6 {
                let (w, y) = (i as f64 * 0.5 * sw, j as f64 * 0.5 * sy);
                let q = (c[1][1] * w * w - 2.0 * c[0][1] * w * y + c[0][0] * y * y) / det;
                let want = (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt());
                assert!((joint_density_wy(w, y, t).unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn xi_covariances() {
        assert!((xi_covariance(one, one, 2.5).unwrap().re - 2.5).abs() < 1e-12);
        let v = xi_covariance(one, |s| C64::new(s, 0.0), 2.0).unwrap();
        assert!((v.re - covariance_wy(2.0).unwrap()[0][1]).abs() < 1e-12);
        let two = xi_covariance_two_time(one, one, 3.0, 1.25).unwrap();
        assert!((two.re - 1.25).abs() < 1e-12);
    }
}
