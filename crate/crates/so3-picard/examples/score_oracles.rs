//! Analytic score oracles: single tangent Gaussians and symmetry-orbit
//! mixtures, checked against finite differences of their log-density.
//!
//! ```bash
//! cargo run --release -p so3-picard --example score_oracles
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so3_picard::score::{
    mixture_log_density_unnormalized, mixture_responsibilities, mixture_score,
    tangent_gaussian_score, SymmetryMixture,
};
use so3_picard::so3::{compose, exp_map, random_uniform, Rotation, Tangent};
use so3_picard::symmetry::SymmetryGroup;

fn main() -> so3_picard::Result<()> {
    // Score of a single mode: -Log(mu^-1 X) / sigma^2 in the right tangent
    // space, zero at the mode itself.
    let x = exp_map(&Tangent::new(0.1, 0.0, 0.0)?);
    let s = tangent_gaussian_score(&x, &Rotation::identity(), 0.5)?;
    println!("single-mode score at Exp(0.1,0,0): {:?}", s.vector().as_slice());

    // A tetrahedral pose mixture: 12 modes, uniform weights.
    let mix = SymmetryMixture::symmetry_orbit(SymmetryGroup::Tetrahedral, &Rotation::identity(), 0.1)?;
    println!("tetrahedral orbit: {} modes", mix.modes().len());

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let query = random_uniform(&mut rng);
    let sigma_t = 0.3;

    // Responsibilities are a posterior over modes (log-sum-exp stabilized).
    let resp = mixture_responsibilities(&query, &mix, sigma_t);
    let top = resp
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    println!(
        "responsibilities: sum = {:.12}, dominant mode {} at {:.4}",
        resp.iter().sum::<f64>(),
        top.0,
        top.1
    );

    // The analytic mixture score equals the finite-difference gradient of
    // the noised log-density along each so(3) basis direction.
    let analytic = mixture_score(&query, &mix, sigma_t);
    let h = 1e-5;
    let mut fd = [0.0f64; 3];
    for (i, slot) in fd.iter_mut().enumerate() {
        let mut dir = [0.0; 3];
        dir[i] = h;
        let plus = compose(&query, &exp_map(&Tangent::new(dir[0], dir[1], dir[2])?));
        let minus = compose(&query, &exp_map(&Tangent::new(-dir[0], -dir[1], -dir[2])?));
        *slot = (mixture_log_density_unnormalized(&plus, &mix, sigma_t)
            - mixture_log_density_unnormalized(&minus, &mix, sigma_t))
            / (2.0 * h);
    }
    println!("analytic score:       {:?}", analytic.vector().as_slice());
    println!("finite differences:   {fd:?}");
    Ok(())
}
