//! Experiment runner: sweeps over (family, sparsity, scale), replicated
//! simulation, aggregation against the theoretical bounds, and CSV/SVG
//! export. The CLI is a thin wrapper over this module.
//!
//! Sweep cells are deterministic in `(config, seed)`: replicate `r` of cell
//! `c` always draws from stream `mix(c + 1, r)` of the configured seed, so
//! results are identical under any thread schedule, and single-threaded
//! runs produce byte-identical output files.

pub mod csv;
pub mod figures;
pub mod svg;

use std::fmt;
use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::base_for_spec;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::network::{NetworkConfig, build_network};
use crate::rng::{StreamRng, mix};
use crate::stats::{mean, sample_std, stderr_of_mean};
use crate::trajectory::{Polyline, arc_trajectory, idx, line_trajectory};

/// Environment variable naming the default directory for dataset paths.
pub const DATA_DIR_ENV: &str = "TRAJGROWTH_DATA_DIR";

/// Stream salt reserved for input-trajectory construction.
const TRAJECTORY_STREAM: u64 = u64::MAX;

/// Supported config file version.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Gaussian,
    Uniform,
    Discrete,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [
        FamilyKind::Gaussian,
        FamilyKind::Uniform,
        FamilyKind::Discrete,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::Uniform => "uniform",
            FamilyKind::Discrete => "discrete",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(FamilyKind::Gaussian),
            "uniform" => Ok(FamilyKind::Uniform),
            "discrete" => Ok(FamilyKind::Discrete),
            other => Err(Error::Config(format!("unknown family '{other}'"))),
        }
    }
}

/// Where the input trajectory comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectorySource {
    /// Straight line between two dataset images (flattened, unit-normalized).
    MnistLine { path: PathBuf, i: usize, j: usize },
    /// Straight line between two random points on the unit sphere.
    RandomLine { dim: usize },
    /// Random-endpoint chord bent into semicircular arcs in `planes`
    /// random perpendicular directions.
    RandomArc { dim: usize, planes: usize },
}

/// Sweep axes: every combination of (family, alpha, scale) becomes a cell.
/// `scales` are target family standard deviations before any `1/√k`
/// scaling: gaussian `σ = s`, uniform `C = s·√3`, discrete `{−s, +s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxes {
    pub families: Vec<FamilyKind>,
    pub alphas: Vec<f64>,
    pub scales: Vec<f64>,
}

fn default_segments() -> usize {
    10_000
}

fn default_replicates() -> usize {
    100
}

fn default_bias_scale() -> f64 {
    0.01
}

fn default_scaling() -> bool {
    true
}

/// A full experiment description; serializes to/from the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Config format version; must equal [`CONFIG_VERSION`].
    pub version: u32,
    pub seed: u64,
    pub width: usize,
    pub depth: usize,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Divide weight family scales by √fan-in at sampling time.
    #[serde(default = "default_scaling")]
    pub scale_weights_by_inv_sqrt_k: bool,
    /// Scale of the default per-family bias law.
    #[serde(default = "default_bias_scale")]
    pub bias_scale: f64,
    pub trajectory: TrajectorySource,
    pub sweep: SweepAxes,
    /// Explicit value set for the discrete family (unscaled); when absent a
    /// two-point set `{−s, +s}` matched to the scale axis is used.
    #[serde(default)]
    pub discrete_values: Option<Vec<f64>>,
    /// Full bias-spec override; when absent the per-family default at
    /// `bias_scale` applies.
    #[serde(default)]
    pub bias: Option<DistributionSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.width == 0 || self.depth == 0 || self.segments == 0 || self.replicates == 0 {
            return Err(Error::Config(
                "width, depth, segments, and replicates must all be at least 1".into(),
            ));
        }
        if self.sweep.families.is_empty()
            || self.sweep.alphas.is_empty()
            || self.sweep.scales.is_empty()
        {
            return Err(Error::Config("sweep axes must be nonempty".into()));
        }
        if self.sweep.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Config("sweep alphas must lie in [0, 1]".into()));
        }
        if self.sweep.scales.iter().any(|s| *s <= 0.0) {
            return Err(Error::Config("sweep scales must be positive".into()));
        }
        if let Some(values) = &self.discrete_values {
            DistributionSpec::discrete(values, 1.0)?;
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// The weight spec for one sweep cell.
    pub fn weight_spec(
        &self,
        family: FamilyKind,
        alpha: f64,
        scale: f64,
    ) -> Result<DistributionSpec> {
        let spec = match family {
            FamilyKind::Gaussian => DistributionSpec::gaussian(scale, alpha)?,
            FamilyKind::Uniform => DistributionSpec::uniform(scale * 3.0f64.sqrt(), alpha)?,
            FamilyKind::Discrete => match &self.discrete_values {
                Some(values) => DistributionSpec::discrete(values, alpha)?,
                None => DistributionSpec::discrete(&[-scale, scale], alpha)?,
            },
        };
        Ok(spec.with_inv_sqrt_k_scaling(self.scale_weights_by_inv_sqrt_k))
    }

    /// The bias spec for one sweep cell: the configured override, or the
    /// family-matched default at `bias_scale` (never sparsified, never
    /// fan-in scaled).
    pub fn bias_spec(&self, family: FamilyKind) -> Result<DistributionSpec> {
        if let Some(spec) = &self.bias {
            return Ok(spec.clone());
        }
        match family {
            FamilyKind::Gaussian => DistributionSpec::gaussian(self.bias_scale, 1.0),
            FamilyKind::Uniform => DistributionSpec::uniform(self.bias_scale, 1.0),
            FamilyKind::Discrete => {
                DistributionSpec::discrete(&[-self.bias_scale, self.bias_scale], 1.0)
            }
        }
    }
}

/// Resolve a dataset path against [`DATA_DIR_ENV`] when relative.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Build the input polyline for an experiment. Random endpoints draw from
/// the reserved trajectory stream of the experiment seed.
pub fn build_trajectory(config: &ExperimentConfig) -> Result<Polyline> {
    let mut rng = StreamRng::new(config.seed, TRAJECTORY_STREAM);
    match &config.trajectory {
        TrajectorySource::MnistLine { path, i, j } => {
            let resolved = resolve_data_path(path);
            let tensor = idx::load_idx(&resolved)?;
            let a = idx::mnist_point(&tensor, *i, true)?;
            let b = idx::mnist_point(&tensor, *j, true)?;
            line_trajectory(&a, &b, config.segments)
        }
        TrajectorySource::RandomLine { dim } => {
            let a = random_unit_point(*dim, &mut rng);
            let b = random_unit_point(*dim, &mut rng);
            line_trajectory(&a, &b, config.segments)
        }
        TrajectorySource::RandomArc { dim, planes } => {
            let a = random_unit_point(*dim, &mut rng);
            let b = random_unit_point(*dim, &mut rng);
            arc_trajectory(&a, &b, config.segments, *planes, &mut rng)
        }
    }
}

fn random_unit_point(dim: usize, rng: &mut StreamRng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
    v
}

/// Aggregates for one layer of one sweep cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerAggregate {
    /// Mean over replicates of the post-activation trajectory length.
    pub mean_length: f64,
    pub std_length: f64,
    /// Pooled (segment-weighted) mean growth ratio into this layer.
    pub mean_growth: f64,
    /// Between-replicate standard error of the growth ratio.
    pub stderr_growth: f64,
    pub dead_fraction: f64,
    /// Theoretical lower-bound base for this layer's transition.
    pub bound_base: f64,
}

/// Results for one (family, alpha, scale) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub family: FamilyKind,
    pub alpha: f64,
    /// Native family parameter before fan-in scaling (σ, C, or max |w|).
    pub scale_param: f64,
    /// Standard deviation of the sparse mixture (before fan-in scaling).
    pub mixture_std: f64,
    pub input_length: f64,
    pub layers: Vec<LayerAggregate>,
    /// Segment-weighted growth ratio pooled over replicates and layers.
    pub overall_growth: f64,
    /// Between-replicate standard error of the overall growth ratio.
    pub overall_growth_stderr: f64,
}

impl CellResult {
    /// Lower bound on the final-layer expected length: product of the
    /// per-layer bases times the input length.
    pub fn bound_final_length(&self) -> f64 {
        self.layers.iter().map(|l| l.bound_base).product::<f64>() * self.input_length
    }
}

/// A completed sweep: the config echo plus one [`CellResult`] per cell, in
/// (family, alpha, scale) iteration order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub input_length: f64,
    pub cells: Vec<CellResult>,
}

/// Run the full sweep described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let input = build_trajectory(config)?;
    run_experiment_on(config, &input)
}

/// Run the sweep on an already-built input trajectory.
pub fn run_experiment_on(config: &ExperimentConfig, input: &Polyline) -> Result<ExperimentResult> {
    config.validate()?;
    let input_length = crate::trajectory::arc_length(input);
    let mut cells = Vec::new();
    let mut cell_index: u64 = 0;
    for &family in &config.sweep.families {
        for &alpha in &config.sweep.alphas {
            for &scale in &config.sweep.scales {
                cells.push(run_cell(config, input, family, alpha, scale, cell_index)?);
                cell_index += 1;
            }
        }
    }
    Ok(ExperimentResult {
        config: config.clone(),
        input_length,
        cells,
    })
}

fn run_cell(
    config: &ExperimentConfig,
    input: &Polyline,
    family: FamilyKind,
    alpha: f64,
    scale: f64,
    cell_index: u64,
) -> Result<CellResult> {
    let weight_spec = config.weight_spec(family, alpha, scale)?;
    let bias_spec = config.bias_spec(family)?;
    let net_config = NetworkConfig {
        width: config.width,
        depth: config.depth,
        input_dim: input.dim(),
        weight_spec: weight_spec.clone(),
        bias_spec,
    };

    // One profile per replicate, on its own stream; order-stable collect.
    let profiles = (0..config.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = StreamRng::new(config.seed, mix(cell_index + 1, rep as u64));
            let net = build_network(&net_config, &mut rng)?;
            net.growth_profile(input)
        })
        .collect::<Result<Vec<_>>>()?;

    let depth = config.depth;
    let input_length = crate::trajectory::arc_length(input);

    let mut layers = Vec::with_capacity(depth);
    for d in 0..depth {
        let lengths: Vec<f64> = profiles.iter().map(|p| p.lengths[d + 1]).collect();
        let per_rep_ratio: Vec<f64> = profiles.iter().map(|p| p.mean_ratios[d]).collect();
        let ratio_sum: f64 = profiles.iter().map(|p| p.ratio_sums[d]).sum();
        let surviving: usize = profiles.iter().map(|p| p.surviving_counts[d]).sum();
        let dead: f64 =
            profiles.iter().map(|p| p.dead_fractions[d]).sum::<f64>() / profiles.len() as f64;
        let fan_in = if d == 0 { input.dim() } else { config.width };
        let bound = base_for_spec(&weight_spec, fan_in)?;
        layers.push(LayerAggregate {
            mean_length: mean(&lengths),
            std_length: sample_std(&lengths),
            mean_growth: if surviving == 0 {
                0.0
            } else {
                ratio_sum / surviving as f64
            },
            stderr_growth: stderr_of_mean(&per_rep_ratio),
            dead_fraction: dead,
            bound_base: bound.base,
        });
    }

    // Overall growth: pooled over every surviving segment at every layer of
    // every replicate; the error bar comes from replicate-level dispersion.
    let total_ratio: f64 = profiles.iter().flat_map(|p| p.ratio_sums.iter()).sum();
    let total_surviving: usize = profiles
        .iter()
        .flat_map(|p| p.surviving_counts.iter())
        .sum();
    let per_rep_overall: Vec<f64> = profiles
        .iter()
        .map(|p| {
            let s: f64 = p.ratio_sums.iter().sum();
            let n: usize = p.surviving_counts.iter().sum();
            if n == 0 { 0.0 } else { s / n as f64 }
        })
        .collect();
    let overall_growth = if total_surviving == 0 {
        0.0
    } else {
        total_ratio / total_surviving as f64
    };

    Ok(CellResult {
        family,
        alpha,
        scale_param: weight_spec.family().scale_param(),
        mixture_std: weight_spec.std_dev(),
        input_length,
        layers,
        overall_growth,
        overall_growth_stderr: stderr_of_mean(&per_rep_overall),
    })
}
