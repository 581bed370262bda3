//! Window-size ablation: evaluation overhead (algorithm inefficiency) and
//! sweep counts as the batch window grows.
//!
//! ```bash
//! cargo run --release -p so3-picard --example window_sweep
//! ```

use so3_picard::harness::{
    render_window_sweep, sweep_window, ExperimentConfig, OracleSpec, SamplerKind,
};
use so3_picard::symmetry::SymmetryGroup;

fn main() -> so3_picard::Result<()> {
    let mut cfg = ExperimentConfig::new(
        OracleSpec::new(SymmetryGroup::Cyclic(1), 0.05),
        SamplerKind::Picard,
    );
    cfg.seed = 1234;

    // A window of 1 degenerates to the sequential walk (inefficiency exactly
    // 1); wider windows trade extra evaluations for fewer sweeps.
    let points = sweep_window(&cfg, &[1, 2, 4, 8, 12, 16], 50)?;
    print!("{}", render_window_sweep(&points));

    let baseline = points.first().unwrap();
    let widest = points.last().unwrap();
    println!(
        "\nwindow {} needs {:.1}x the evaluations of sequential but {:.1}x fewer sweeps",
        widest.window,
        widest.mean_ai / baseline.mean_ai,
        baseline.mean_sweeps / widest.mean_sweeps
    );
    Ok(())
}
