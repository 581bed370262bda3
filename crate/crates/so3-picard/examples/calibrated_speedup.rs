//! Wall-clock latency under a calibrated per-evaluation cost: the busy-wait
//! wrapper emulates an expensive network head so the Picard sampler's
//! concurrency shows up as latency reduction.
//!
//! The sequential walk pays T costs back to back; a Picard sweep pays its
//! whole window concurrently, so with enough free hardware threads the run
//! collapses to roughly K costs (K = sweeps, typically far below T).
//!
//! ```bash
//! cargo run --release -p so3-picard --example calibrated_speedup
//! ```

use std::sync::Arc;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so3_picard::diffusion::NoiseSchedule;
use so3_picard::sampler::{sample_picard, sample_sequential_ode, PicardConfig};
use so3_picard::score::{make_calibrated_cost_model, MixtureScoreModel, SymmetryMixture};
use so3_picard::symmetry::SymmetryGroup;
use so3_picard::Rotation;

fn main() -> so3_picard::Result<()> {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    println!("hardware threads: {threads}");
    if threads < 8 {
        println!("note: the latency win needs free threads; on {threads} thread(s) the");
        println!("window evaluations serialize and the extra sweeps dominate.");
    }

    let schedule = NoiseSchedule::geometric(0.01, std::f64::consts::FRAC_PI_2, 100)?;
    let cfg = PicardConfig::new(schedule, 12, 1e-3)?;
    let oracle = Arc::new(MixtureScoreModel::new(SymmetryMixture::symmetry_orbit(
        SymmetryGroup::Cyclic(1),
        &Rotation::identity(),
        0.05,
    )?));
    let model = make_calibrated_cost_model(oracle, Duration::from_millis(1));

    let seq = sample_sequential_ode(&model, &cfg, &mut ChaCha8Rng::seed_from_u64(9))?;
    println!(
        "sequential: {} evaluations, {:.1} ms",
        seq.stats.total_evaluations,
        seq.stats.wall_clock.as_secs_f64() * 1e3
    );

    let pic = sample_picard(&model, &cfg, &mut ChaCha8Rng::seed_from_u64(9))?;
    println!(
        "picard:     {} evaluations over {} sweeps, {:.1} ms",
        pic.stats.total_evaluations,
        pic.stats.sweeps,
        pic.stats.wall_clock.as_secs_f64() * 1e3
    );
    println!(
        "speedup: {:.2}x",
        seq.stats.wall_clock.as_secs_f64() / pic.stats.wall_clock.as_secs_f64()
    );
    Ok(())
}
