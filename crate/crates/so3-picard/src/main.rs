//! Experiment CLI: thin argument parsing over the `so3_picard` library.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use so3_picard::harness::{
    compare_runs, render_report, render_window_sweep, run_experiment, sweep_window,
    ExperimentConfig, OracleSpec, SampleFormat, SamplerKind, ScheduleSpec,
};
use so3_picard::score::{save_score_table, MixtureScoreModel};
use so3_picard::so3::random_uniform;
use so3_picard::symmetry::SymmetryGroup;
use so3_picard::{Error, Result};

#[derive(Parser)]
#[command(
    name = "so3-picard",
    version,
    about = "Sequential and parallel-in-time diffusion sampling on SO(3)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Denoising step count T
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Picard batch window size p
    #[arg(long, default_value_t = 12)]
    window: usize,
    /// Relative convergence tolerance tau
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    /// Lowest noise level, radians
    #[arg(long, default_value_t = 0.01)]
    sigma_min: f64,
    /// Highest noise level, radians
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    sigma_max: f64,
    /// Explicit comma-separated noise levels in denoising order; overrides
    /// the geometric (sigma-min, sigma-max, steps) triple
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    sigmas: Option<Vec<f64>>,
    /// Oracle symmetry group: cyclic:N | tet | oct | ico
    #[arg(long, default_value = "ico")]
    oracle: String,
    /// Mode sharpness of the oracle, radians
    #[arg(long, default_value_t = 0.05)]
    kernel_sigma: f64,
    /// Number of samples to draw (sample i uses seed + i)
    #[arg(long, default_value_t = 1)]
    samples: usize,
    /// Base RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Busy-wait cost per score evaluation, milliseconds (0 = none)
    #[arg(long, default_value_t = 0.0)]
    eval_cost_ms: f64,
}

impl ExperimentArgs {
    fn to_config(&self, sampler: SamplerKind) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(
            OracleSpec::new(parse_oracle(&self.oracle)?, self.kernel_sigma),
            sampler,
        );
        cfg.schedule = match &self.sigmas {
            Some(levels) => ScheduleSpec::Explicit(levels.clone()),
            None => ScheduleSpec::Geometric {
                sigma_min: self.sigma_min,
                sigma_max: self.sigma_max,
                steps: self.steps,
            },
        };
        cfg.window = self.window;
        cfg.tolerance = self.tolerance;
        cfg.n_samples = self.samples;
        cfg.seed = self.seed;
        if self.eval_cost_ms > 0.0 {
            cfg.eval_cost = Some(Duration::from_secs_f64(self.eval_cost_ms / 1e3));
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one sampler and report quality/efficiency metrics
    Sample {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Sampler: seq-ode | seq-sde | picard
        #[arg(long, default_value = "picard")]
        sampler: String,
        /// Write the drawn samples here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sample file layout: quat | mat
        #[arg(long, default_value = "quat")]
        format: String,
        /// Also write the rendered report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the sequential-ODE baseline and the Picard sampler on identical
    /// seeds and report the speedup
    Compare {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Write the Picard samples here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the combined report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Ablate the batch window size and report algorithm inefficiency per p
    SweepWindow {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Comma-separated window sizes to sweep
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,12")]
        windows: Vec<usize>,
        /// Picard runs per window size
        #[arg(long, default_value_t = 50)]
        runs: usize,
        /// Also write the sweep table here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample the analytic oracle onto a rotation grid and write a
    /// tabulated score file
    ExportTable {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Number of uniform random grid rotations
        #[arg(long, default_value_t = 64)]
        grid_size: usize,
        /// Number of noise levels taken from the schedule (0 = all)
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Output path for the score table
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_oracle(spec: &str) -> Result<SymmetryGroup> {
    match spec {
        "tet" => Ok(SymmetryGroup::Tetrahedral),
        "oct" => Ok(SymmetryGroup::Octahedral),
        "ico" => Ok(SymmetryGroup::Icosahedral),
        other => match other.strip_prefix("cyclic:") {
            Some(n) => {
                let n: u32 = n.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad cyclic order `{n}`"))
                })?;
                Ok(SymmetryGroup::Cyclic(n))
            }
            None => Err(Error::InvalidArgument(format!(
                "unknown oracle `{other}` (expected cyclic:N | tet | oct | ico)"
            ))),
        },
    }
}

fn parse_format(format: &str) -> Result<SampleFormat> {
    match format {
        "quat" => Ok(SampleFormat::Quaternion),
        "mat" => Ok(SampleFormat::RowMajor),
        other => Err(Error::InvalidArgument(format!(
            "unknown sample format `{other}` (expected quat | mat)"
        ))),
    }
}

fn write_or_print(text: &str, path: &Option<PathBuf>) -> Result<()> {
    print!("{text}");
    if let Some(path) = path {
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample {
            args,
            sampler,
            out,
            format,
            report,
        } => {
            let mut cfg = args.to_config(sampler.parse()?)?;
            cfg.out_path = out;
            cfg.out_format = parse_format(&format)?;
            let run_report = run_experiment(&cfg)?;
            write_or_print(&render_report(&run_report), &report)
        }
        Command::Compare { args, out, report } => {
            let base = args.to_config(SamplerKind::SequentialOde)?;
            let mut test = args.to_config(SamplerKind::Picard)?;
            test.out_path = out;
            let (base_report, test_report) = compare_runs(&base, &test)?;
            let mut text = render_report(&base_report);
            text.push('\n');
            text.push_str(&render_report(&test_report));
            write_or_print(&text, &report)
        }
        Command::SweepWindow {
            args,
            windows,
            runs,
            report,
        } => {
            let cfg = args.to_config(SamplerKind::Picard)?;
            let points = sweep_window(&cfg, &windows, runs)?;
            write_or_print(&render_window_sweep(&points), &report)
        }
        Command::ExportTable {
            args,
            grid_size,
            levels,
            out,
        } => {
            use rand::SeedableRng;
            let cfg = args.to_config(SamplerKind::Picard)?;
            let schedule = match &cfg.schedule {
                ScheduleSpec::Explicit(v) => {
                    so3_picard::diffusion::NoiseSchedule::from_sigmas(v.clone())?
                }
                ScheduleSpec::Geometric {
                    sigma_min,
                    sigma_max,
                    steps,
                } => so3_picard::diffusion::NoiseSchedule::geometric(
                    *sigma_min, *sigma_max, *steps,
                )?,
            };
            let all = schedule.sigmas();
            let sigma_levels: Vec<f64> = if levels == 0 || levels >= all.len() {
                all.to_vec()
            } else {
                // Evenly spaced subset of the schedule, endpoints included.
                (0..levels)
                    .map(|i| all[i * (all.len() - 1) / (levels - 1).max(1)])
                    .collect()
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
            let grid: Vec<_> = (0..grid_size).map(|_| random_uniform(&mut rng)).collect();
            let model = MixtureScoreModel::new(cfg.oracle.build_mixture()?);
            save_score_table(&model, &grid, &sigma_levels, &out)?;
            println!(
                "wrote {} records ({} rotations x {} levels) to {}",
                grid.len() * sigma_levels.len(),
                grid.len(),
                sigma_levels.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
