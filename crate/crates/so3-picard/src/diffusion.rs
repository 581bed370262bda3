//! Variance-exploding noise schedules and the isotropic perturbation kernel
//! on SO(3).
//!
//! Schedules are indexed in denoising order: index 0 carries the highest
//! noise level (where sampling starts) and index T the lowest (the sample
//! output). The discrete diffusion increments are the telescoping differences
//! `g²[i] = σ²_i − σ²_{i+1} ≥ 0`, the exact discretization of the VE variance
//! growth, so that `Σ g²[i] = σ²_0 − σ²_T`.
//!
//! Forward noising is applied multiplicatively, `X₀ · Exp(σ·ε)` with
//! `ε ~ N(0, I₃)`, which is exact on the manifold; the relative tangent
//! `Log(X₀⁻¹ X)` is then Gaussian by construction, matching the kernel
//! implemented in [`kernel_log_density_unnormalized`]. The kernel exposes
//! only the unnormalized log-density: every use in this crate (scores and
//! relative densities) is normalizer-free, and the exact SO(3) normalizer is
//! deliberately not approximated.

use rand::Rng;

use crate::so3::{self, compose, geodesic_distance, Rotation};
use crate::{Error, Result};

/// Discrete noise levels `σ_0 > σ_1 > … > σ_T`, in denoising order.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSchedule {
    sigmas: Vec<f64>,
}

impl NoiseSchedule {
    /// Geometric interpolation `σ_i = σ_max · (σ_min/σ_max)^(i/T)` over T+1
    /// levels. Requires `0 < σ_min < σ_max` and `T ≥ 1`; the endpoints are
    /// exactly `σ_max` and `σ_min`.
    pub fn geometric(sigma_min: f64, sigma_max: f64, steps: usize) -> Result<Self> {
        if !(sigma_min > 0.0 && sigma_max > sigma_min) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < sigma_min < sigma_max, got ({sigma_min}, {sigma_max})"
            )));
        }
        if steps < 1 {
            return Err(Error::InvalidArgument("need at least one step".into()));
        }
        let t = steps as f64;
        let mut sigmas: Vec<f64> = (0..=steps)
            .map(|i| sigma_max * (sigma_min / sigma_max).powf(i as f64 / t))
            .collect();
        // Pin the endpoints; powf is exact at 0 but not always at 1.
        sigmas[0] = sigma_max;
        sigmas[steps] = sigma_min;
        Ok(NoiseSchedule { sigmas })
    }

    /// Wraps an explicit level list (e.g. from a CLI flag). Levels must be
    /// positive and non-increasing; ties are allowed so that degenerate
    /// constant schedules (zero drift) remain expressible.
    pub fn from_sigmas(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.len() < 2 {
            return Err(Error::InvalidArgument(
                "schedule needs at least two levels".into(),
            ));
        }
        if sigmas.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidArgument(
                "schedule levels must be positive and finite".into(),
            ));
        }
        if sigmas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "schedule levels must be non-increasing in denoising order".into(),
            ));
        }
        Ok(NoiseSchedule { sigmas })
    }

    /// Number of denoising steps T (one less than the number of levels).
    pub fn steps(&self) -> usize {
        self.sigmas.len() - 1
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.sigmas[i]
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigmas[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.sigmas.last().unwrap()
    }

    /// Discrete squared diffusion increment `σ²_i − σ²_{i+1}` for step i.
    pub fn g_squared(&self, i: usize) -> f64 {
        self.sigmas[i] * self.sigmas[i] - self.sigmas[i + 1] * self.sigmas[i + 1]
    }
}

/// Per-step squared diffusion increments of the VE process (zero drift).
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionCoefficients {
    g_sq: Vec<f64>,
}

impl DiffusionCoefficients {
    pub fn from_schedule(schedule: &NoiseSchedule) -> Self {
        DiffusionCoefficients {
            g_sq: (0..schedule.steps()).map(|i| schedule.g_squared(i)).collect(),
        }
    }

    pub fn g_sq(&self) -> &[f64] {
        &self.g_sq
    }
}

/// Isotropic perturbation kernel `Σ = σ²I` on SO(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationKernel {
    sigma: f64,
}

impl PerturbationKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "kernel sigma must be positive, got {sigma}"
            )));
        }
        Ok(PerturbationKernel { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `−‖Log(X⁻¹Y)‖² / (2σ²)`, the kernel's log-density up to its
    /// normalizer. Symmetric in its arguments and invariant under a common
    /// left factor.
    pub fn log_density_unnormalized(&self, x: &Rotation, y: &Rotation) -> f64 {
        let d = geodesic_distance(x, y);
        -(d * d) / (2.0 * self.sigma * self.sigma)
    }
}

/// Free-function form of [`PerturbationKernel::log_density_unnormalized`].
pub fn kernel_log_density_unnormalized(x: &Rotation, y: &Rotation, sigma: f64) -> Result<f64> {
    Ok(PerturbationKernel::new(sigma)?.log_density_unnormalized(x, y))
}

/// One multiplicative forward-noising draw: `X₀ · Exp(σ·ε)`, `ε ~ N(0, I₃)`.
///
/// `sigma` must be nonnegative; `sigma = 0` returns `X₀` unchanged (the RNG
/// is still advanced by one tangent draw, keeping seeded streams aligned).
pub fn perturb<R: Rng + ?Sized>(x0: &Rotation, sigma: f64, rng: &mut R) -> Rotation {
    assert!(sigma >= 0.0, "perturb requires sigma >= 0, got {sigma}");
    let step = so3::draw_tangent_gaussian(sigma, rng);
    compose(x0, &so3::exp_map(&step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::{exp_map, inverse, log_map, random_uniform, Tangent};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn geometric_midpoint() {
        let s = NoiseSchedule::geometric(0.01, 1.0, 2).unwrap();
        assert_eq!(s.sigmas().len(), 3);
        assert!((s.sigma(0) - 1.0).abs() < 1e-15);
        assert!((s.sigma(1) - 0.1).abs() < 1e-15);
        assert!((s.sigma(2) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn geometric_endpoints_exact() {
        let s = NoiseSchedule::geometric(0.013, 1.41, 100).unwrap();
        assert_eq!(s.sigma_max(), 1.41);
        assert_eq!(s.sigma_min(), 0.013);
        assert_eq!(s.steps(), 100);
    }

    #[test]
    fn geometric_accepts_near_degenerate_range() {
        let s = NoiseSchedule::geometric(0.5, 0.5 * (1.0 + 1e-12), 10).unwrap();
        assert_eq!(s.steps(), 10);
    }

    #[test]
    fn geometric_rejects_bad_inputs() {
        assert!(NoiseSchedule::geometric(0.0, 1.0, 10).is_err());
        assert!(NoiseSchedule::geometric(1.0, 0.5, 10).is_err());
        assert!(NoiseSchedule::geometric(0.1, 1.0, 0).is_err());
    }

    #[test]
    fn explicit_list_validation() {
        assert!(NoiseSchedule::from_sigmas(vec![1.0, 0.5, 0.1]).is_ok());
        // Constant schedules are allowed; increasing ones are not.
        assert!(NoiseSchedule::from_sigmas(vec![0.5, 0.5, 0.5]).is_ok());
        assert!(NoiseSchedule::from_sigmas(vec![0.1, 0.5]).is_err());
        assert!(NoiseSchedule::from_sigmas(vec![1.0, -0.5]).is_err());
        assert!(NoiseSchedule::from_sigmas(vec![1.0]).is_err());
    }

    #[test]
    fn g_squared_is_nonnegative_and_telescopes() {
        let s = NoiseSchedule::geometric(0.01, 1.5, 100).unwrap();
        let c = DiffusionCoefficients::from_schedule(&s);
        assert!(c.g_sq().iter().all(|g| *g >= 0.0));
        let sum: f64 = c.g_sq().iter().sum();
        let expected = s.sigma_max().powi(2) - s.sigma_min().powi(2);
        assert!((sum - expected).abs() < 1e-12);
    }

    #[test]
    fn kernel_reference_values() {
        let x = Rotation::identity();
        assert_eq!(kernel_log_density_unnormalized(&x, &x, 0.3).unwrap(), 0.0);
        let sigma = 0.4;
        let y = exp_map(&Tangent::new(sigma, 0.0, 0.0).unwrap());
        let v = kernel_log_density_unnormalized(&x, &y, sigma).unwrap();
        assert!((v + 0.5).abs() < 1e-12);
        assert!(kernel_log_density_unnormalized(&x, &y, 0.0).is_err());
        assert!(kernel_log_density_unnormalized(&x, &y, -0.2).is_err());
    }

    #[test]
    fn kernel_is_left_invariant_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let g = random_uniform(&mut rng);
            let x = random_uniform(&mut rng);
            let y = random_uniform(&mut rng);
            let v = kernel_log_density_unnormalized(&x, &y, 0.5).unwrap();
            let vg = kernel_log_density_unnormalized(&compose(&g, &x), &compose(&g, &y), 0.5)
                .unwrap();
            assert!((v - vg).abs() < 1e-9);
            let v_swapped = kernel_log_density_unnormalized(&y, &x, 0.5).unwrap();
            assert!((v - v_swapped).abs() < 1e-12);
        }
    }

    #[test]
    fn perturb_with_zero_sigma_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let x0 = random_uniform(&mut rng);
        let out = perturb(&x0, 0.0, &mut rng);
        assert_eq!(out.matrix(), x0.matrix());
    }

    #[test]
    fn perturb_matches_chi_square_expectation() {
        let sigma = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let x0 = random_uniform(&mut rng);
        let n = 100_000;
        let mean_sq: f64 = (0..n)
            .map(|_| geodesic_distance(&x0, &perturb(&x0, sigma, &mut rng)).powi(2))
            .sum::<f64>()
            / n as f64;
        let expected = 3.0 * sigma * sigma;
        assert!(
            (mean_sq - expected).abs() < 0.03 * expected,
            "E d² = {mean_sq}, expected ≈ {expected}"
        );
    }

    #[test]
    fn successive_perturbations_compose_variances() {
        let (a, b) = (0.05, 0.03);
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let x0 = random_uniform(&mut rng);
        let n = 100_000;
        let mut sq = [0.0f64; 3];
        for _ in 0..n {
            let x = perturb(&perturb(&x0, a, &mut rng), b, &mut rng);
            let rel = log_map(&compose(&inverse(&x0), &x)).vector();
            for i in 0..3 {
                sq[i] += rel[i] * rel[i];
            }
        }
        let expected = a * a + b * b;
        for (i, s) in sq.iter().enumerate() {
            let var = s / n as f64;
            assert!(
                (var - expected).abs() < 0.05 * expected,
                "component {i}: {var} vs {expected}"
            );
        }
    }

    /// Kolmogorov–Smirnov check that the relative tangent of a perturbation
    /// is component-wise N(0, σ²).
    #[test]
    fn perturb_relative_tangent_is_gaussian() {
        let sigma = 0.05;
        let n = 10_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let x0 = random_uniform(&mut rng);
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut comps: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for _ in 0..n {
            let x = perturb(&x0, sigma, &mut rng);
            let rel = log_map(&compose(&inverse(&x0), &x)).vector();
            for i in 0..3 {
                comps[i].push(rel[i]);
            }
        }
        for (i, values) in comps.iter_mut().enumerate() {
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut d_stat = 0.0f64;
            for (k, v) in values.iter().enumerate() {
                let cdf = normal.cdf(*v);
                let lo = k as f64 / n as f64;
                let hi = (k + 1) as f64 / n as f64;
                d_stat = d_stat.max((cdf - lo).abs()).max((hi - cdf).abs());
            }
            // Asymptotic Kolmogorov distribution for the p-value.
            let lambda = (n as f64).sqrt() * d_stat;
            let p: f64 = 2.0
                * (1..=100)
                    .map(|k| {
                        let k = k as f64;
                        (-1.0f64).powi(k as i32 + 1) * (-2.0 * k * k * lambda * lambda).exp()
                    })
                    .sum::<f64>();
            assert!(p > 0.01, "component {i}: KS D={d_stat}, p={p}");
        }
    }
}
