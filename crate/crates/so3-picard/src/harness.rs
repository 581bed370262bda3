//! Experiment runner, quality/efficiency metrics, and text export formats.
//!
//! A [`RunReport`] aggregates sampler statistics with angular-distance
//! quality metrics against the oracle's mode set, rendered as a diff-able
//! `key: value` document. Sample sets are exported as one canonical unit
//! quaternion per line (or, alternatively, row-major matrices); numbers are
//! written in shortest round-trip form so that saving and reloading is
//! bit-exact and identical configurations produce byte-identical files.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use crate::diffusion::NoiseSchedule;
use crate::sampler::{
    run_batch, sample_picard, sample_sequential_ode, sample_sequential_sde, PicardConfig,
    SamplerStats,
};
use crate::score::{make_calibrated_cost_model, MixtureScoreModel, ScoreModel, SymmetryMixture};
use crate::so3::{geodesic_distance, Rotation};
use crate::symmetry::SymmetryGroup;
use crate::{Error, Result};

/// Coverage threshold used by the mode-coverage section of reports.
pub const COVERAGE_THRESHOLD_DEG: f64 = 5.0;

/// Which sampling algorithm an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    SequentialOde,
    SequentialSde,
    Picard,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerKind::SequentialOde => write!(f, "seq-ode"),
            SamplerKind::SequentialSde => write!(f, "seq-sde"),
            SamplerKind::Picard => write!(f, "picard"),
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq-ode" => Ok(SamplerKind::SequentialOde),
            "seq-sde" => Ok(SamplerKind::SequentialSde),
            "picard" => Ok(SamplerKind::Picard),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampler `{other}` (expected seq-ode | seq-sde | picard)"
            ))),
        }
    }
}

/// Analytic oracle specification: a symmetry orbit around a canonical pose.
#[derive(Clone, Debug)]
pub struct OracleSpec {
    pub group: SymmetryGroup,
    pub kernel_sigma: f64,
    pub canonical: Rotation,
}

impl OracleSpec {
    pub fn new(group: SymmetryGroup, kernel_sigma: f64) -> Self {
        OracleSpec {
            group,
            kernel_sigma,
            canonical: Rotation::identity(),
        }
    }

    pub fn describe(&self) -> String {
        format!("{} kernel_sigma={}", self.group, self.kernel_sigma)
    }

    pub fn build_mixture(&self) -> Result<SymmetryMixture> {
        SymmetryMixture::symmetry_orbit(self.group, &self.canonical, self.kernel_sigma)
    }
}

/// Noise schedule specification, either the geometric triple or an explicit
/// level list.
#[derive(Clone, Debug)]
pub enum ScheduleSpec {
    Geometric {
        sigma_min: f64,
        sigma_max: f64,
        steps: usize,
    },
    Explicit(Vec<f64>),
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<NoiseSchedule> {
        match self {
            ScheduleSpec::Geometric {
                sigma_min,
                sigma_max,
                steps,
            } => NoiseSchedule::geometric(*sigma_min, *sigma_max, *steps),
            ScheduleSpec::Explicit(sigmas) => NoiseSchedule::from_sigmas(sigmas.clone()),
        }
    }
}

impl Default for ScheduleSpec {
    /// 100 geometric steps from π/2 down to 0.01 rad.
    fn default() -> Self {
        ScheduleSpec::Geometric {
            sigma_min: 0.01,
            sigma_max: std::f64::consts::FRAC_PI_2,
            steps: 100,
        }
    }
}

/// A fully-defaulted experiment: oracle, sampler, schedule, and run shape.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub label: String,
    pub oracle: OracleSpec,
    pub sampler: SamplerKind,
    pub schedule: ScheduleSpec,
    pub window: usize,
    pub tolerance: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Busy-wait cost per score evaluation (emulates an expensive network).
    pub eval_cost: Option<Duration>,
    /// Where to write the sample file, if anywhere.
    pub out_path: Option<PathBuf>,
    /// Sample file layout used when `out_path` is set.
    pub out_format: SampleFormat,
}

impl ExperimentConfig {
    pub fn new(oracle: OracleSpec, sampler: SamplerKind) -> Self {
        ExperimentConfig {
            label: sampler.to_string(),
            oracle,
            sampler,
            schedule: ScheduleSpec::default(),
            window: 12,
            tolerance: 1e-3,
            n_samples: 1,
            seed: 0,
            eval_cost: None,
            out_path: None,
            out_format: SampleFormat::default(),
        }
    }

    fn picard_config(&self) -> Result<PicardConfig> {
        PicardConfig::new(self.schedule.build()?, self.window, self.tolerance)
    }

    fn build_model(&self) -> Result<Arc<dyn ScoreModel>> {
        let oracle = Arc::new(MixtureScoreModel::new(self.oracle.build_mixture()?));
        Ok(match self.eval_cost {
            Some(cost) if !cost.is_zero() => {
                Arc::new(make_calibrated_cost_model(oracle, cost))
            }
            _ => oracle,
        })
    }
}

/// Quality of a sample set against the oracle's modes.
#[derive(Clone, Debug)]
pub struct QualityMetrics {
    pub mean_min_angular_deg: f64,
    pub median_min_angular_deg: f64,
    /// Fraction of samples within [`COVERAGE_THRESHOLD_DEG`] of some mode.
    pub fraction_within_threshold: f64,
    /// Per-mode counts of samples within the threshold.
    pub mode_hit_counts: Vec<usize>,
}

impl QualityMetrics {
    pub fn covered_modes(&self) -> usize {
        self.mode_hit_counts.iter().filter(|c| **c > 0).count()
    }
}

/// Aggregated outcome of one experiment.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub label: String,
    pub sampler: SamplerKind,
    pub oracle: String,
    pub steps: usize,
    pub window: usize,
    pub tolerance: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Aggregate stats: evaluations and strides summed over samples, sweeps
    /// taken as the per-sample maximum, wall clock covering the whole batch.
    pub stats: SamplerStats,
    pub mean_sweeps: f64,
    pub quality: QualityMetrics,
    pub per_sample_min_deg: Vec<f64>,
    /// `(baseline label, wall-clock ratio)` when compared against a baseline.
    pub speedup_vs_baseline: Option<(String, f64)>,
}

/// Minimum over modes of the angular distance in degrees.
pub fn min_angular_distance(x: &Rotation, modes: &[Rotation]) -> Result<f64> {
    if modes.is_empty() {
        return Err(Error::InvalidArgument(
            "min_angular_distance needs at least one mode".into(),
        ));
    }
    let best = modes
        .iter()
        .map(|m| geodesic_distance(x, m))
        .fold(f64::INFINITY, f64::min);
    Ok(best * 180.0 / PI)
}

/// Evaluations relative to one sequential pass over the covered steps:
/// `total_evaluations / Σ strides` (1.0 for any sequential run).
pub fn algorithm_inefficiency(stats: &SamplerStats) -> f64 {
    let steps: usize = stats.strides.iter().sum();
    stats.total_evaluations as f64 / steps as f64
}

/// Wall-clock ratio `base / test` between two comparable runs.
pub fn speedup_report(base: &RunReport, test: &RunReport) -> Result<f64> {
    if base.steps != test.steps {
        return Err(Error::InvalidComparison(format!(
            "step counts differ: {} vs {}",
            base.steps, test.steps
        )));
    }
    if base.oracle != test.oracle {
        return Err(Error::InvalidComparison(format!(
            "oracles differ: `{}` vs `{}`",
            base.oracle, test.oracle
        )));
    }
    Ok(base.stats.wall_clock.as_secs_f64() / test.stats.wall_clock.as_secs_f64())
}

fn quality_metrics(samples: &[Rotation], modes: &[Rotation]) -> Result<(QualityMetrics, Vec<f64>)> {
    let per_sample: Vec<f64> = samples
        .iter()
        .map(|s| min_angular_distance(s, modes))
        .collect::<Result<_>>()?;
    let mut sorted = per_sample.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.is_empty() {
        f64::NAN
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };
    let mean = per_sample.iter().sum::<f64>() / per_sample.len().max(1) as f64;

    let mut hit_counts = vec![0usize; modes.len()];
    let mut within = 0usize;
    for sample in samples {
        let (best_mode, best_deg) = modes
            .iter()
            .enumerate()
            .map(|(i, m)| (i, geodesic_distance(sample, m) * 180.0 / PI))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("modes are nonempty");
        if best_deg <= COVERAGE_THRESHOLD_DEG {
            hit_counts[best_mode] += 1;
            within += 1;
        }
    }
    Ok((
        QualityMetrics {
            mean_min_angular_deg: mean,
            median_min_angular_deg: median,
            fraction_within_threshold: within as f64 / samples.len().max(1) as f64,
            mode_hit_counts: hit_counts,
        },
        per_sample,
    ))
}

/// Runs the configured experiment: draws `n_samples` with per-sample seeds
/// `seed + i`, writes the sample file when an output path is set, and
/// returns the aggregated report. Deterministic per seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.n_samples < 1 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let picard_cfg = cfg.picard_config()?;
    let mixture = cfg.oracle.build_mixture()?;
    let modes = mixture.modes().to_vec();
    let model = cfg.build_model()?;

    let (samples, stats, mean_sweeps) = match cfg.sampler {
        SamplerKind::Picard => {
            let (samples, stats) = run_batch(model.as_ref(), &picard_cfg, cfg.n_samples, cfg.seed)?;
            let mean_sweeps = stats.strides.len() as f64 / cfg.n_samples as f64;
            (samples, stats, mean_sweeps)
        }
        SamplerKind::SequentialOde | SamplerKind::SequentialSde => {
            let mut samples = Vec::with_capacity(cfg.n_samples);
            let mut total_evaluations = 0u64;
            let mut strides = Vec::new();
            let mut sweeps = 0usize;
            let mut wall = Duration::ZERO;
            for i in 0..cfg.n_samples {
                use rand::SeedableRng;
                let mut rng =
                    rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                let run = match cfg.sampler {
                    SamplerKind::SequentialOde => {
                        sample_sequential_ode(model.as_ref(), &picard_cfg, &mut rng)?
                    }
                    _ => sample_sequential_sde(model.as_ref(), &picard_cfg, &mut rng)?,
                };
                total_evaluations += run.stats.total_evaluations;
                sweeps = sweeps.max(run.stats.sweeps);
                strides.extend(run.stats.strides);
                wall += run.stats.wall_clock;
                samples.push(run.sample);
            }
            let steps = picard_cfg.steps() as f64;
            let stats = SamplerStats {
                sweeps,
                total_evaluations,
                strides,
                wall_clock: wall,
                algorithm_inefficiency: total_evaluations as f64
                    / (steps * cfg.n_samples as f64),
            };
            (samples, stats, picard_cfg.steps() as f64)
        }
    };

    if let Some(path) = &cfg.out_path {
        export_samples_as(&samples, path, cfg.out_format)?;
    }
    let (quality, per_sample_min_deg) = quality_metrics(&samples, &modes)?;
    Ok(RunReport {
        label: cfg.label.clone(),
        sampler: cfg.sampler,
        oracle: cfg.oracle.describe(),
        steps: picard_cfg.steps(),
        window: cfg.window,
        tolerance: cfg.tolerance,
        n_samples: cfg.n_samples,
        seed: cfg.seed,
        stats,
        mean_sweeps,
        quality,
        per_sample_min_deg,
        speedup_vs_baseline: None,
    })
}

/// Runs `base` and `test` on identical seeds and attaches the wall-clock
/// ratio to the test report.
pub fn compare_runs(
    base: &ExperimentConfig,
    test: &ExperimentConfig,
) -> Result<(RunReport, RunReport)> {
    let base_report = run_experiment(base)?;
    let mut test_report = run_experiment(test)?;
    let speedup = speedup_report(&base_report, &test_report)?;
    test_report.speedup_vs_baseline = Some((base_report.label.clone(), speedup));
    Ok((base_report, test_report))
}

/// One point of a window-size ablation.
#[derive(Clone, Debug)]
pub struct WindowSweepPoint {
    pub window: usize,
    pub runs: usize,
    pub mean_ai: f64,
    pub mean_sweeps: f64,
}

/// Runs the Picard sampler `runs` times per window size (seeds `seed + i`)
/// and reports the mean algorithm inefficiency and sweep count per size.
pub fn sweep_window(
    cfg: &ExperimentConfig,
    windows: &[usize],
    runs: usize,
) -> Result<Vec<WindowSweepPoint>> {
    if runs < 1 {
        return Err(Error::InvalidArgument("need at least one run".into()));
    }
    let mixture = cfg.oracle.build_mixture()?;
    let model = MixtureScoreModel::new(mixture);
    let schedule = cfg.schedule.build()?;
    let mut points = Vec::with_capacity(windows.len());
    for &window in windows {
        let picard_cfg = PicardConfig::new(schedule.clone(), window, cfg.tolerance)?;
        let mut ai_sum = 0.0;
        let mut sweep_sum = 0.0;
        for i in 0..runs {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let run = sample_picard(&model, &picard_cfg, &mut rng)?;
            ai_sum += run.stats.algorithm_inefficiency;
            sweep_sum += run.stats.sweeps as f64;
        }
        points.push(WindowSweepPoint {
            window,
            runs,
            mean_ai: ai_sum / runs as f64,
            mean_sweeps: sweep_sum / runs as f64,
        });
    }
    Ok(points)
}

/// Renders the report as a machine-parseable `key: value` document with a
/// per-mode coverage table.
pub fn render_report(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str("so3-picard report v1\n");
    let _ = writeln!(out, "label: {}", report.label);
    let _ = writeln!(out, "sampler: {}", report.sampler);
    let _ = writeln!(out, "oracle: {}", report.oracle);
    let _ = writeln!(out, "steps: {}", report.steps);
    let _ = writeln!(out, "window: {}", report.window);
    let _ = writeln!(out, "tolerance: {}", report.tolerance);
    let _ = writeln!(out, "samples: {}", report.n_samples);
    let _ = writeln!(out, "seed: {}", report.seed);
    let _ = writeln!(out, "sweeps_max: {}", report.stats.sweeps);
    let _ = writeln!(out, "sweeps_mean: {:.4}", report.mean_sweeps);
    let _ = writeln!(out, "total_evaluations: {}", report.stats.total_evaluations);
    let _ = writeln!(
        out,
        "algorithm_inefficiency: {:.6}",
        report.stats.algorithm_inefficiency
    );
    let _ = writeln!(
        out,
        "wall_clock_s: {:.6}",
        report.stats.wall_clock.as_secs_f64()
    );
    let _ = writeln!(
        out,
        "mean_min_angular_deg: {:.6}",
        report.quality.mean_min_angular_deg
    );
    let _ = writeln!(
        out,
        "median_min_angular_deg: {:.6}",
        report.quality.median_min_angular_deg
    );
    let _ = writeln!(
        out,
        "within_{COVERAGE_THRESHOLD_DEG}deg_fraction: {:.6}",
        report.quality.fraction_within_threshold
    );
    let _ = writeln!(
        out,
        "mode_coverage: {}/{} within {COVERAGE_THRESHOLD_DEG} deg",
        report.quality.covered_modes(),
        report.quality.mode_hit_counts.len()
    );
    if let Some((label, speedup)) = &report.speedup_vs_baseline {
        let _ = writeln!(out, "baseline: {label}");
        let _ = writeln!(out, "speedup_vs_baseline: {speedup:.4}");
    }
    out.push_str("coverage_counts:\n");
    for (i, count) in report.quality.mode_hit_counts.iter().enumerate() {
        let _ = writeln!(out, "  mode {i:3}: {count}");
    }
    out
}

/// Renders a window sweep as a fixed-width table.
pub fn render_window_sweep(points: &[WindowSweepPoint]) -> String {
    let mut out = String::new();
    out.push_str("so3-picard window-sweep v1\n");
    out.push_str("window  runs  mean_ai   mean_sweeps\n");
    for p in points {
        let _ = writeln!(
            out,
            "{:6}  {:4}  {:8.4}  {:11.4}",
            p.window, p.runs, p.mean_ai, p.mean_sweeps
        );
    }
    out
}

const SAMPLES_HEADER: &str = "so3-samples v1";
const SAMPLES_MAT_HEADER: &str = "so3-samples-mat v1";

/// Serialization layout for sample files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SampleFormat {
    /// `qw qx qy qz` per line, canonicalized to `w ≥ 0`.
    #[default]
    Quaternion,
    /// Nine row-major matrix entries per line.
    RowMajor,
}

/// Renders samples in the requested format; numbers use shortest round-trip
/// formatting, so reloading reproduces the rotations bit-exactly.
pub fn render_samples(samples: &[Rotation], format: SampleFormat) -> String {
    let mut out = String::new();
    match format {
        SampleFormat::Quaternion => {
            out.push_str(SAMPLES_HEADER);
            out.push('\n');
            for s in samples {
                let [w, x, y, z] = s.to_quaternion();
                let _ = writeln!(out, "{w} {x} {y} {z}");
            }
        }
        SampleFormat::RowMajor => {
            out.push_str(SAMPLES_MAT_HEADER);
            out.push('\n');
            for s in samples {
                let m = s.to_row_major();
                let line = m.map(|v| v.to_string()).join(" ");
                out.push_str(&line);
                out.push('\n');
            }
        }
    }
    out
}

/// Writes the default quaternion format to `path`.
pub fn export_samples(samples: &[Rotation], path: &Path) -> Result<()> {
    export_samples_as(samples, path, SampleFormat::Quaternion)
}

pub fn export_samples_as(samples: &[Rotation], path: &Path, format: SampleFormat) -> Result<()> {
    std::fs::write(path, render_samples(samples, format))?;
    Ok(())
}

/// Reads either sample format back.
pub fn load_samples(path: &Path) -> Result<Vec<Rotation>> {
    let text = std::fs::read_to_string(path)?;
    parse_samples(&text)
}

pub fn parse_samples(text: &str) -> Result<Vec<Rotation>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file: missing samples header".into(),
    })?;
    let format = match header.trim() {
        SAMPLES_HEADER => SampleFormat::Quaternion,
        SAMPLES_MAT_HEADER => SampleFormat::RowMajor,
        other => {
            return Err(Error::Parse {
                line: 1,
                message: format!("unknown samples header `{other}`"),
            })
        }
    };
    let mut samples = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad number `{f}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        let rotation = match format {
            SampleFormat::Quaternion => {
                if values.len() != 4 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected 4 fields, found {}", values.len()),
                    });
                }
                Rotation::from_quaternion(values[0], values[1], values[2], values[3])
            }
            SampleFormat::RowMajor => {
                if values.len() != 9 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected 9 fields, found {}", values.len()),
                    });
                }
                let mut v = [0.0; 9];
                v.copy_from_slice(&values);
                Rotation::from_row_major(&v)
            }
        }
        .map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        samples.push(rotation);
    }
    Ok(samples)
}
