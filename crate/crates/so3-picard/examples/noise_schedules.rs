//! Noise schedules, diffusion increments, and forward perturbation on SO(3).
//!
//! ```bash
//! cargo run --release -p so3-picard --example noise_schedules
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so3_picard::diffusion::{
    kernel_log_density_unnormalized, perturb, DiffusionCoefficients, NoiseSchedule,
};
use so3_picard::so3::{exp_map, geodesic_distance, random_uniform, Tangent};

fn main() -> so3_picard::Result<()> {
    let schedule = NoiseSchedule::geometric(0.01, std::f64::consts::FRAC_PI_2, 100)?;
    println!(
        "geometric schedule: sigma_0 = {:.4}, sigma_50 = {:.4}, sigma_100 = {:.4}",
        schedule.sigma(0),
        schedule.sigma(50),
        schedule.sigma(100)
    );

    // The squared increments telescope back to sigma_max^2 - sigma_min^2.
    let coeffs = DiffusionCoefficients::from_schedule(&schedule);
    let sum: f64 = coeffs.g_sq().iter().sum();
    println!(
        "sum of g^2 increments = {:.9} (sigma_max^2 - sigma_min^2 = {:.9})",
        sum,
        schedule.sigma_max().powi(2) - schedule.sigma_min().powi(2)
    );

    // The kernel log-density at a one-sigma displacement is -1/2.
    let sigma = 0.3;
    let x = so3_picard::Rotation::identity();
    let y = exp_map(&Tangent::new(sigma, 0.0, 0.0)?);
    println!(
        "kernel log-density at one sigma: {:.6}",
        kernel_log_density_unnormalized(&x, &y, sigma)?
    );

    // Multiplicative forward noising: E[d(X0, X)^2] ≈ 3 sigma^2 for small
    // angles (three tangent dimensions).
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x0 = random_uniform(&mut rng);
    let sigma = 0.05;
    let n = 20_000;
    let mean_sq: f64 = (0..n)
        .map(|_| geodesic_distance(&x0, &perturb(&x0, sigma, &mut rng)).powi(2))
        .sum::<f64>()
        / n as f64;
    println!(
        "E[d^2] over {n} perturbations at sigma={sigma}: {:.6e} (3 sigma^2 = {:.6e})",
        mean_sq,
        3.0 * sigma * sigma
    );
    Ok(())
}
