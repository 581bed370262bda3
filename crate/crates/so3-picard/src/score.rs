//! Score evaluation: the model contract plus analytic oracles.
//!
//! A score model maps a rotation and a noise level to the gradient of the
//! noised log-density, expressed in the right tangent space (perturbations
//! compose as `X · Exp(v)`, so a score `s` at `X` predicts
//! `log p(X · Exp(v)) ≈ log p(X) + sᵀv`). The samplers consume nothing else.
//!
//! The analytic oracles model a symmetric object's pose distribution as a
//! mixture of tangent Gaussians over a symmetry orbit. Noising such a mode of
//! width `k` with level `σ_t` widens it to `σ_total² = k² + σ_t²` (the
//! Euclidean convolution rule in the tangent approximation, accurate to
//! O(σ⁴)), so the noised mixture score is the responsibility-weighted sum of
//! per-mode tangent-Gaussian scores. Responsibilities are computed in log
//! space with max subtraction: a 60-mode icosahedral mixture at small σ
//! underflows otherwise.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::so3::{compose, geodesic_distance, inverse, log_map, Rotation, Tangent};
use crate::symmetry::SymmetryGroup;
use crate::{Error, Result};

/// Evaluation contract for `∇ log p_σ`.
///
/// Implementations must be safe to call concurrently; the evaluation counter
/// increases by one per single evaluation and by the batch length per batch
/// call. Batch results must equal element-wise evaluation exactly.
pub trait ScoreModel: Send + Sync {
    fn evaluate(&self, rotation: &Rotation, sigma: f64) -> Result<Tangent>;

    fn evaluate_batch(&self, queries: &[(Rotation, f64)]) -> Result<Vec<Tangent>> {
        queries.iter().map(|(x, s)| self.evaluate(x, *s)).collect()
    }

    /// Total single evaluations performed so far (monotone).
    fn evaluations(&self) -> u64;
}

/// Score of a single tangent Gaussian centered at `mode` with total width
/// `sigma_total`: `−Log(mode⁻¹X) / σ_total²` in the right tangent space at X.
pub fn tangent_gaussian_score(
    x: &Rotation,
    mode: &Rotation,
    sigma_total: f64,
) -> Result<Tangent> {
    if !sigma_total.is_finite() || sigma_total <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma_total must be positive, got {sigma_total}"
        )));
    }
    let rel = log_map(&compose(&inverse(mode), x));
    // Same op order as the per-mode term in `mixture_score`, so a one-mode
    // mixture reduces to this bit for bit.
    let inv_var = 1.0 / (sigma_total * sigma_total);
    Ok(Tangent::wrap(-rel.vector() * inv_var))
}

/// A pose distribution over a symmetry orbit: tangent-Gaussian modes of
/// common width `kernel_sigma` with fixed mixture weights.
#[derive(Clone, Debug)]
pub struct SymmetryMixture {
    modes: Vec<Rotation>,
    weights: Vec<f64>,
    kernel_sigma: f64,
}

impl SymmetryMixture {
    /// Validates: at least one mode, positive width, nonnegative weights
    /// summing to 1 within 1e-12.
    pub fn new(modes: Vec<Rotation>, weights: Vec<f64>, kernel_sigma: f64) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one mode".into()));
        }
        if modes.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} modes but {} weights",
                modes.len(),
                weights.len()
            )));
        }
        if !kernel_sigma.is_finite() || kernel_sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "kernel_sigma must be positive, got {kernel_sigma}"
            )));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        Ok(SymmetryMixture {
            modes,
            weights,
            kernel_sigma,
        })
    }

    /// Uniform mixture over `{canonical · S : S in group}`.
    pub fn symmetry_orbit(
        group: SymmetryGroup,
        canonical: &Rotation,
        kernel_sigma: f64,
    ) -> Result<Self> {
        let modes: Vec<Rotation> = group
            .elements()?
            .iter()
            .map(|s| compose(canonical, s))
            .collect();
        let w = 1.0 / modes.len() as f64;
        SymmetryMixture::new(modes.clone(), vec![w; modes.len()], kernel_sigma)
    }

    pub fn modes(&self) -> &[Rotation] {
        &self.modes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kernel_sigma(&self) -> f64 {
        self.kernel_sigma
    }

    /// Mode width after noising with level `sigma_t`.
    pub fn sigma_total(&self, sigma_t: f64) -> f64 {
        (self.kernel_sigma * self.kernel_sigma + sigma_t * sigma_t).sqrt()
    }
}

/// Per-mode relative tangents `Log(μ_m⁻¹ X)` (shared by density, score, and
/// responsibilities).
fn relative_tangents(x: &Rotation, mix: &SymmetryMixture) -> Vec<Vector3<f64>> {
    mix.modes
        .iter()
        .map(|m| log_map(&compose(&inverse(m), x)).vector())
        .collect()
}

fn log_weights_unnormalized(
    rels: &[Vector3<f64>],
    weights: &[f64],
    sigma_total: f64,
) -> Vec<f64> {
    let inv_two_var = 1.0 / (2.0 * sigma_total * sigma_total);
    rels.iter()
        .zip(weights)
        .map(|(z, w)| w.ln() - z.norm_squared() * inv_two_var)
        .collect()
}

/// Posterior responsibilities of each mode at query `x`, noise level
/// `sigma_t`. Nonnegative and summing to 1 at every query.
pub fn mixture_responsibilities(
    x: &Rotation,
    mix: &SymmetryMixture,
    sigma_t: f64,
) -> Vec<f64> {
    let rels = relative_tangents(x, mix);
    let logs = log_weights_unnormalized(&rels, &mix.weights, mix.sigma_total(sigma_t));
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut resp: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = resp.iter().sum();
    for r in &mut resp {
        *r /= total;
    }
    resp
}

/// Unnormalized log-density of the noised mixture,
/// `log Σ_m w_m exp(−‖Log(μ_m⁻¹X)‖² / (2σ_total²))`.
pub fn mixture_log_density_unnormalized(
    x: &Rotation,
    mix: &SymmetryMixture,
    sigma_t: f64,
) -> f64 {
    let rels = relative_tangents(x, mix);
    let logs = log_weights_unnormalized(&rels, &mix.weights, mix.sigma_total(sigma_t));
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// Score of the noised mixture: the responsibility-weighted sum of per-mode
/// tangent-Gaussian scores at width `σ_total² = kernel_sigma² + σ_t²`.
pub fn mixture_score(x: &Rotation, mix: &SymmetryMixture, sigma_t: f64) -> Tangent {
    assert!(sigma_t >= 0.0, "sigma_t must be nonnegative, got {sigma_t}");
    let sigma_total = mix.sigma_total(sigma_t);
    let rels = relative_tangents(x, mix);
    let logs = log_weights_unnormalized(&rels, &mix.weights, sigma_total);
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut acc = Vector3::zeros();
    let inv_var = 1.0 / (sigma_total * sigma_total);
    for (z, l) in rels.iter().zip(&logs) {
        let r = (l - max).exp();
        total += r;
        acc += (-z * inv_var) * r;
    }
    Tangent::wrap(acc / total)
}

/// Analytic oracle: a [`SymmetryMixture`] behind the [`ScoreModel`] contract.
///
/// Stateless apart from the evaluation counter; batch evaluation fans out
/// across threads for large batches and is bit-identical to element-wise
/// evaluation regardless of thread count.
pub struct MixtureScoreModel {
    mixture: SymmetryMixture,
    evals: AtomicU64,
}

impl MixtureScoreModel {
    pub fn new(mixture: SymmetryMixture) -> Self {
        MixtureScoreModel {
            mixture,
            evals: AtomicU64::new(0),
        }
    }

    pub fn mixture(&self) -> &SymmetryMixture {
        &self.mixture
    }
}

impl ScoreModel for MixtureScoreModel {
    fn evaluate(&self, rotation: &Rotation, sigma: f64) -> Result<Tangent> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        Ok(mixture_score(rotation, &self.mixture, sigma))
    }

    fn evaluate_batch(&self, queries: &[(Rotation, f64)]) -> Result<Vec<Tangent>> {
        self.evals.fetch_add(queries.len() as u64, Ordering::Relaxed);
        if queries.len() >= 64 {
            Ok(queries
                .par_iter()
                .map(|(x, s)| mixture_score(x, &self.mixture, *s))
                .collect())
        } else {
            Ok(queries
                .iter()
                .map(|(x, s)| mixture_score(x, &self.mixture, *s))
                .collect())
        }
    }

    fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }
}

/// A model that always returns the zero score (useful as a drift-free probe).
pub struct ZeroScoreModel {
    evals: AtomicU64,
}

impl ZeroScoreModel {
    pub fn new() -> Self {
        ZeroScoreModel {
            evals: AtomicU64::new(0),
        }
    }
}

impl Default for ZeroScoreModel {
    fn default() -> Self {
        Self::new()
    }
}

impl ScoreModel for ZeroScoreModel {
    fn evaluate(&self, _rotation: &Rotation, _sigma: f64) -> Result<Tangent> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        Ok(Tangent::zero())
    }

    fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }
}

/// Wraps a model with a fixed busy-wait per evaluation, standing in for an
/// expensive network head so that wall-clock speedups can be measured on
/// cheap analytic oracles. Batch elements burn concurrently, one busy-wait
/// each, so a batch of p on ≥p free threads costs ≈1× the per-eval time.
pub struct CalibratedCostModel {
    inner: Arc<dyn ScoreModel>,
    cost: Duration,
}

impl CalibratedCostModel {
    pub fn new(inner: Arc<dyn ScoreModel>, per_eval_cost: Duration) -> Self {
        CalibratedCostModel {
            inner,
            cost: per_eval_cost,
        }
    }

    fn burn(&self) {
        if self.cost.is_zero() {
            return;
        }
        let start = Instant::now();
        while start.elapsed() < self.cost {
            std::hint::spin_loop();
        }
    }
}

impl ScoreModel for CalibratedCostModel {
    fn evaluate(&self, rotation: &Rotation, sigma: f64) -> Result<Tangent> {
        self.burn();
        self.inner.evaluate(rotation, sigma)
    }

    fn evaluate_batch(&self, queries: &[(Rotation, f64)]) -> Result<Vec<Tangent>> {
        if self.cost.is_zero() {
            return self.inner.evaluate_batch(queries);
        }
        queries
            .par_iter()
            .map(|(x, s)| {
                self.burn();
                self.inner.evaluate(x, *s)
            })
            .collect()
    }

    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }
}

/// Builds a [`CalibratedCostModel`]; a zero cost behaves exactly like `inner`.
pub fn make_calibrated_cost_model(
    inner: Arc<dyn ScoreModel>,
    per_eval_cost: Duration,
) -> CalibratedCostModel {
    CalibratedCostModel::new(inner, per_eval_cost)
}

const TABLE_HEADER: &str = "so3-score-table v1";
/// Accepted relative slack around the tabulated σ range when querying.
const TABLE_SIGMA_SLACK: f64 = 0.5;

/// One record of a tabulated score file.
#[derive(Clone, Debug)]
struct TableEntry {
    rotation: Rotation,
    sigma: f64,
    score: Vector3<f64>,
}

/// Nearest-neighbor lookup over a (rotation-grid × σ-level) score table.
///
/// This is the interchange point for externally trained models: queries snap
/// to the closest tabulated σ level (within 50% relative slack beyond the
/// tabulated range, else an error) and then to the nearest grid rotation at
/// that level. Lookups are not interpolated.
pub struct TabulatedScoreModel {
    entries: Vec<TableEntry>,
    levels: Vec<f64>,
    evals: AtomicU64,
}

impl TabulatedScoreModel {
    /// Parses the text format: a `so3-score-table v1` header line, then one
    /// `qw qx qy qz sigma s1 s2 s3` record per line, whitespace-separated,
    /// with `#` starting a comment.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut saw_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != TABLE_HEADER {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header `{TABLE_HEADER}`, found `{line}`"),
                    });
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 8 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 8 fields, found {}", fields.len()),
                });
            }
            let mut values = [0.0f64; 8];
            for (slot, field) in values.iter_mut().zip(&fields) {
                *slot = field.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad number `{field}`: {e}"),
                })?;
            }
            let rotation = Rotation::from_quaternion(values[0], values[1], values[2], values[3])
                .map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if !values[4].is_finite() || values[4] <= 0.0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("sigma must be positive, got {}", values[4]),
                });
            }
            entries.push(TableEntry {
                rotation,
                sigma: values[4],
                score: Vector3::new(values[5], values[6], values[7]),
            });
        }
        if !saw_header {
            return Err(Error::Parse {
                line: 1,
                message: format!("empty file: missing `{TABLE_HEADER}` header"),
            });
        }
        if entries.is_empty() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: "table has a header but no records".into(),
            });
        }
        let mut levels: Vec<f64> = entries.iter().map(|e| e.sigma).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        Ok(TabulatedScoreModel {
            entries,
            levels,
            evals: AtomicU64::new(0),
        })
    }

    fn nearest_level(&self, sigma: f64) -> Result<f64> {
        let min = *self.levels.first().unwrap();
        let max = *self.levels.last().unwrap();
        if sigma < min * (1.0 - TABLE_SIGMA_SLACK) || sigma > max * (1.0 + TABLE_SIGMA_SLACK) {
            return Err(Error::SigmaOutOfRange { sigma, min, max });
        }
        Ok(*self
            .levels
            .iter()
            .min_by(|a, b| {
                (*a - sigma).abs().partial_cmp(&(*b - sigma).abs()).unwrap()
            })
            .unwrap())
    }
}

impl ScoreModel for TabulatedScoreModel {
    fn evaluate(&self, rotation: &Rotation, sigma: f64) -> Result<Tangent> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let level = self.nearest_level(sigma)?;
        let best = self
            .entries
            .iter()
            .filter(|e| e.sigma == level)
            .min_by(|a, b| {
                geodesic_distance(&a.rotation, rotation)
                    .partial_cmp(&geodesic_distance(&b.rotation, rotation))
                    .unwrap()
            })
            .expect("each level has at least one entry");
        Ok(Tangent::wrap(best.score))
    }

    fn evaluations(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }
}

/// Loads a tabulated score model from `path` (see [`TabulatedScoreModel`]).
pub fn load_tabulated_score(path: &Path) -> Result<TabulatedScoreModel> {
    TabulatedScoreModel::load(path)
}

/// Renders a score table sampled from `model` on the given rotation grid and
/// σ levels. Numbers are written in shortest round-trip form, so reloading
/// reproduces them bit-exactly.
pub fn render_score_table(
    model: &dyn ScoreModel,
    grid: &[Rotation],
    sigma_levels: &[f64],
) -> Result<String> {
    let mut out = String::new();
    out.push_str(TABLE_HEADER);
    out.push('\n');
    out.push_str("# qw qx qy qz sigma s1 s2 s3\n");
    for sigma in sigma_levels {
        for rotation in grid {
            let score = model.evaluate(rotation, *sigma)?.vector();
            let [w, x, y, z] = rotation.to_quaternion();
            writeln!(
                out,
                "{w} {x} {y} {z} {sigma} {} {} {}",
                score.x, score.y, score.z
            )
            .expect("writing to String cannot fail");
        }
    }
    Ok(out)
}

/// Writes [`render_score_table`] output to `path`.
pub fn save_score_table(
    model: &dyn ScoreModel,
    grid: &[Rotation],
    sigma_levels: &[f64],
    path: &Path,
) -> Result<()> {
    std::fs::write(path, render_score_table(model, grid, sigma_levels)?)?;
    Ok(())
}
