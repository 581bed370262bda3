//! Tabulated score interchange: sample an analytic oracle onto a grid, write
//! the text table, reload it, and drive a sampler from the lookup model.
//!
//! ```bash
//! cargo run --release -p so3-picard --example score_table_io
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use so3_picard::diffusion::NoiseSchedule;
use so3_picard::sampler::{sample_picard, PicardConfig};
use so3_picard::score::{
    load_tabulated_score, save_score_table, MixtureScoreModel, ScoreModel, SymmetryMixture,
};
use so3_picard::so3::random_uniform;
use so3_picard::symmetry::SymmetryGroup;
use so3_picard::Rotation;

fn main() -> so3_picard::Result<()> {
    let schedule = NoiseSchedule::geometric(0.05, std::f64::consts::FRAC_PI_2, 20)?;
    let oracle = MixtureScoreModel::new(SymmetryMixture::symmetry_orbit(
        SymmetryGroup::Cyclic(4),
        &Rotation::identity(),
        0.1,
    )?);

    // Sample the oracle on a seeded uniform grid at every schedule level.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid: Vec<Rotation> = (0..256).map(|_| random_uniform(&mut rng)).collect();
    let path = std::env::temp_dir().join("cyclic4_scores.txt");
    save_score_table(&oracle, &grid, schedule.sigmas(), &path)?;
    println!("wrote {} x {} records to {}", grid.len(), schedule.sigmas().len(), path.display());

    // Reload and compare a lookup against the oracle at a grid point: the
    // tabulated values survive the text round trip bit-exactly.
    let table = load_tabulated_score(&path)?;
    let direct = oracle.evaluate(&grid[17], schedule.sigma(5))?;
    let looked_up = table.evaluate(&grid[17], schedule.sigma(5))?;
    println!(
        "lookup == oracle at a grid point: {}",
        looked_up.vector() == direct.vector()
    );

    // Querying far outside the tabulated noise range is an error.
    match table.evaluate(&grid[0], 50.0) {
        Err(e) => println!("out-of-range query rejected: {e}"),
        Ok(_) => println!("unexpected: out-of-range query succeeded"),
    }

    // The lookup model drives the sampler through the same contract.
    let cfg = PicardConfig::new(schedule, 4, 1e-2)?;
    let run = sample_picard(&table, &cfg, &mut ChaCha8Rng::seed_from_u64(11))?;
    println!(
        "picard over the tabulated model: K = {}, evaluations = {}",
        run.stats.sweeps, run.stats.total_evaluations
    );
    Ok(())
}
