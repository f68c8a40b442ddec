//! Deterministic quadrature rules: Gauss–Hermite and adaptive
//! Gauss–Kronrod (G7/K15).

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Nodes and weights of an `order`-point Gauss–Hermite rule for the weight
/// `exp(-x²)` on the real line, sorted ascending.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(invalid("Gauss–Hermite order must be at least 1"));
        }
        const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
        let n = order;
        // Golub–Welsch: nodes are eigenvalues of the symmetric Jacobi
        // matrix. They are then polished by Newton on the orthonormal
        // recurrence, which also gives weights with full relative accuracy
        // far out in the tails.
        let jacobi = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        guesses.sort_by(f64::total_cmp);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for (i, &z0) in guesses.iter().enumerate() {
            let mut z = z0;
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..50 {
                let (mut p1, mut p2) = (PIM4, 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j - 1) as f64 / j as f64).sqrt() * p3;
                }
                pp = (2.0 * n as f64).sqrt() * p2;
                let step = p1 / pp;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "Gauss–Hermite root {i} of order {n} failed to converge"
                )));
            }
            x[i] = z;
            w[i] = 2.0 / (pp * pp);
        }
        // Exact symmetry.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let node = 0.5 * (x[j] - x[i]);
            let weight = 0.5 * (w[i] + w[j]);
            x[i] = -node;
            x[j] = node;
            w[i] = weight;
            w[j] = weight;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        if x.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Numerical(format!("Gauss–Hermite order {n}: nodes collided")));
        }
        Ok(Self { nodes: x, weights: w })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Expectation of `g(Y)` for `Y ~ normal(mean, std²)`.
    pub fn normal_expectation(&self, mean: f64, std: f64, g: impl Fn(f64) -> f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * std;
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(mean + scale * x))
            .collect();
        crate::linalg::pairwise_sum(&terms) / std::f64::consts::PI.sqrt()
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &impl Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

/// Globally adaptive G7/K15 integration of a complex integrand over
/// `[breaks[0], breaks[last]]`, starting from the given subdivision.
pub fn integrate(
    f: impl Fn(f64) -> C64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Integral> {
    const MAX_INTERVALS: usize = 8192;
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("integration breakpoints must be strictly increasing"));
    }
    let mut pieces: Vec<(f64, f64, C64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = kronrod15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let value: C64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Numerical(
                "integrand produced a non-finite value".into(),
            ));
        }
        if error <= abs_tol.max(rel_tol * value.norm()) {
            return Ok(Integral { value, error, intervals: pieces.len() });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not converge: estimate {value}, error {error:.3e} \
                 over {} intervals (requested rel {rel_tol:.1e}, abs {abs_tol:.1e})",
                pieces.len()
            )));
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .expect("nonempty");
        let (a, b, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if !(mid > a && mid < b) {
            return Err(Error::Numerical(format!(
                "adaptive quadrature exhausted floating-point resolution near {a}"
            )));
        }
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (v, e) = kronrod15(&f, lo, hi);
            pieces.push((lo, hi, v, e));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_weights_sum_to_sqrt_pi() {
        for order in [1, 2, 5, 16, 64, 128, 256] {
            let gh = GaussHermite::new(order).unwrap();
            let s: f64 = gh.weights.iter().sum();
            assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-13, "order {order}: {s}");
            assert!(gh.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn hermite_rule_is_exact_on_even_moments() {
        // ∫ x^{2k} e^{-x²} dx = Γ(k + 1/2)
        let gh = GaussHermite::new(20).unwrap();
        let mut gamma = std::f64::consts::PI.sqrt(); // Γ(1/2)
        for k in 0..20 {
            let m: f64 = gh
                .nodes
                .iter()
                .zip(&gh.weights)
                .map(|(x, w)| w * x.powi(2 * k))
                .sum();
            assert!((m - gamma).abs() <= 1e-12 * gamma, "k={k}: {m} vs {gamma}");
            gamma *= k as f64 + 0.5;
        }
    }

    #[test]
    fn normal_expectation_of_square() {
        let gh = GaussHermite::new(16).unwrap();
        let v = gh.normal_expectation(1.5, 0.7, |y| y * y);
        assert!((v - (1.5f64.powi(2) + 0.49)).abs() < 1e-13);
    }

    #[test]
    fn kronrod_integrates_smooth_functions() {
        let r = integrate(|x| C64::new(x.cos(), x.exp()), &[0.0, 2.0], 1e-13, 0.0).unwrap();
        assert!((r.value.re - 2f64.sin()).abs() < 1e-13);
        assert!((r.value.im - (2f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn kronrod_handles_narrow_peaks_with_breaks() {
        let g = |x: f64| C64::new((-(x - 3.0).powi(2) / 2e-4).exp(), 0.0);
        let breaks: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1 - 2.0).collect();
        let r = integrate(g, &breaks, 1e-12, 1e-15).unwrap();
        let want = (2.0 * std::f64::consts::PI * 1e-4).sqrt();
        assert!((r.value.re - want).abs() < 1e-12 * want.max(1.0));
    }

    #[test]
    fn rejects_bad_breaks() {
        assert!(integrate(|_| C64::new(1.0, 0.0), &[1.0, 1.0], 1e-10, 0.0).is_err());
        assert!(integrate(|_| C64::new(1.0, 0.0), &[1.0], 1e-10, 0.0).is_err());
    }
}
