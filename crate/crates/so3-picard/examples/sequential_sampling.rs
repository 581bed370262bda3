//! Sequential baselines: the probability-flow-ODE sampler and its stochastic
//! geodesic-random-walk counterpart, on a six-fold symmetric pose
//! distribution.
//!
//! ```bash
//! cargo run --release -p so3-picard --example sequential_sampling
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so3_picard::diffusion::NoiseSchedule;
use so3_picard::harness::min_angular_distance;
use so3_picard::sampler::{sample_sequential_ode, sample_sequential_sde, PicardConfig};
use so3_picard::score::{MixtureScoreModel, ScoreModel, SymmetryMixture};
use so3_picard::symmetry::SymmetryGroup;
use so3_picard::Rotation;

fn main() -> so3_picard::Result<()> {
    let schedule = NoiseSchedule::geometric(0.01, std::f64::consts::FRAC_PI_2, 100)?;
    let cfg = PicardConfig::new(schedule, 1, 0.0)?;
    let mixture =
        SymmetryMixture::symmetry_orbit(SymmetryGroup::Cyclic(6), &Rotation::identity(), 0.03)?;
    let modes = mixture.modes().to_vec();
    let model = MixtureScoreModel::new(mixture);

    let n = 200;
    for stochastic in [false, true] {
        let mut distances = Vec::with_capacity(n);
        for seed in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let run = if stochastic {
                sample_sequential_sde(&model, &cfg, &mut rng)?
            } else {
                sample_sequential_ode(&model, &cfg, &mut rng)?
            };
            distances.push(min_angular_distance(&run.sample, &modes)?);
        }
        let mean = distances.iter().sum::<f64>() / n as f64;
        let max = distances.iter().cloned().fold(0.0f64, f64::max);
        println!(
            "{}: mean min-angular distance {:.3} deg, worst {:.3} deg over {n} samples",
            if stochastic { "seq-sde" } else { "seq-ode" },
            mean,
            max
        );
    }
    println!("score evaluations used: {}", model.evaluations());
    Ok(())
}
