//! Figure presets: canned sweeps that regenerate the bundled reference
//! figures as CSV + SVG pairs with a JSON metadata sidecar.
//!
//! Each figure runs at one of two scales. `desk` (1000 segments, 20
//! replicates, width 256) finishes in seconds to a couple of minutes on one
//! core; `paper` (10000 segments, 100 replicates, width 784) reproduces the
//! full protocol and can run for hours. The metadata sidecar records which
//! was used.

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::trajectory::idx;
use crate::verify::{SubvectorMethod, subvector_norm_expectation};

use super::csv::export_csv;
use super::svg::{SvgPlot, export_svg};
use super::{
    ExperimentConfig, ExperimentResult, FamilyKind, SweepAxes, TrajectorySource, resolve_data_path,
    run_experiment,
};

pub const DEFAULT_FIGURE_SEED: u64 = 1729;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5,
}

impl FigureName {
    pub const ALL: [FigureName; 6] = [
        FigureName::Fig2,
        FigureName::Fig3a,
        FigureName::Fig3b,
        FigureName::Fig4a,
        FigureName::Fig4b,
        FigureName::Fig5,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureName::Fig2 => "fig2",
            FigureName::Fig3a => "fig3a",
            FigureName::Fig3b => "fig3b",
            FigureName::Fig4a => "fig4a",
            FigureName::Fig4b => "fig4b",
            FigureName::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureName::ALL
            .iter()
            .copied()
            .find(|n| n.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown figure '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureScale {
    Desk,
    Paper,
}

impl FigureScale {
    pub fn name(&self) -> &'static str {
        match self {
            FigureScale::Desk => "desk",
            FigureScale::Paper => "paper",
        }
    }
}

impl std::str::FromStr for FigureScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(FigureScale::Desk),
            "paper" => Ok(FigureScale::Paper),
            other => Err(Error::Config(format!(
                "unknown scale '{other}' (desk|paper)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureOptions {
    pub scale: FigureScale,
    pub seed: u64,
    /// IDX image file for dataset-endpoint trajectories; resolved against
    /// [`DATA_DIR_ENV`] when relative. Random endpoints are used when absent.
    pub mnist: Option<PathBuf>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            scale: FigureScale::Desk,
            seed: DEFAULT_FIGURE_SEED,
            mnist: None,
        }
    }
}

struct Preset {
    width: usize,
    depth: usize,
    segments: usize,
    replicates: usize,
}

fn preset(scale: FigureScale, depth: usize) -> Preset {
    match scale {
        FigureScale::Desk => Preset {
            width: 256,
            depth,
            segments: 1_000,
            replicates: 20,
        },
        FigureScale::Paper => Preset {
            width: 784,
            depth,
            segments: 10_000,
            replicates: 100,
        },
    }
}

fn trajectory_for(options: &FigureOptions, dim: usize) -> TrajectorySource {
    match &options.mnist {
        // Dataset endpoints 101 and 1001, unit-normalized.
        Some(path) => TrajectorySource::MnistLine {
            path: path.clone(),
            i: 101,
            j: 1001,
        },
        None => TrajectorySource::RandomLine { dim },
    }
}

fn alpha_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = from;
    while a <= to + 1e-9 {
        out.push((a * 100.0).round() / 100.0);
        a += step;
    }
    out
}

/// Regenerate one figure into `outdir`; returns the paths written.
pub fn reproduce_figure(
    name: FigureName,
    options: &FigureOptions,
    outdir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(outdir).map_err(|source| Error::Io {
        path: outdir.into(),
        source,
    })?;
    match name {
        FigureName::Fig2 => fig2(options, outdir),
        FigureName::Fig3a => fig3(options, outdir, SweepVariant::Scale),
        FigureName::Fig3b => fig3(options, outdir, SweepVariant::Alpha),
        FigureName::Fig4a => fig4(options, outdir, Fig4Direction::Sphere),
        FigureName::Fig4b => fig4(options, outdir, Fig4Direction::FirstUnit),
        FigureName::Fig5 => fig5(options, outdir),
    }
}

fn write_meta(path: &Path, meta: serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

fn meta_for(config: &ExperimentConfig, figure: &str, scale: FigureScale) -> serde_json::Value {
    json!({
        "figure": figure,
        "scale": scale.name(),
        "note": match scale {
            FigureScale::Desk =>
                "desk preset: 1000 segments, 20 replicates, width 256 — reduced from the \
                 full protocol (10000 segments, 100 replicates, width 784) for quick runs",
            FigureScale::Paper =>
                "paper preset: 10000 segments, 100 replicates, width 784 (full protocol)",
        },
        "seed": config.seed,
        "width": config.width,
        "depth": config.depth,
        "segments": config.segments,
        "replicates": config.replicates,
        "trajectory": format!("{:?}", config.trajectory),
        "families": config.sweep.families.iter().map(|f| f.name()).collect::<Vec<_>>(),
        "alphas": config.sweep.alphas,
        "scales": config.sweep.scales,
    })
}

/// Expected length per layer for a sparse-Gaussian net at several sparsity
/// levels (log-length versus depth).
fn fig2(options: &FigureOptions, outdir: &Path) -> Result<Vec<PathBuf>> {
    let p = preset(options.scale, 14);
    let alphas = match options.scale {
        FigureScale::Desk => vec![0.1, 0.3, 0.5, 0.7, 0.9],
        FigureScale::Paper => alpha_grid(0.1, 0.9, 0.1),
    };
    let config = ExperimentConfig {
        version: 1,
        seed: options.seed,
        width: p.width,
        depth: p.depth,
        segments: p.segments,
        replicates: p.replicates,
        scale_weights_by_inv_sqrt_k: true,
        bias_scale: 0.01,
        trajectory: trajectory_for(options, p.width),
        sweep: SweepAxes {
            families: vec![FamilyKind::Gaussian],
            alphas,
            scales: vec![6.0],
        },
        discrete_values: None,
        bias: None,
    };
    let result = run_experiment(&config)?;

    let csv_path = outdir.join("fig2.csv");
    export_csv(&result, &csv_path)?;
    // Companion file with lengths normalized by the input length.
    let normalized = normalized_lengths(&result);
    let norm_path = outdir.join("fig2_normalized.csv");
    export_csv(&normalized, &norm_path)?;

    let svg_path = outdir.join("fig2.svg");
    export_svg(&result, &svg_path)?;

    let meta_path = outdir.join("fig2.meta.json");
    write_meta(&meta_path, meta_for(&config, "fig2", options.scale))?;
    Ok(vec![csv_path, norm_path, svg_path, meta_path])
}

fn normalized_lengths(result: &ExperimentResult) -> ExperimentResult {
    let mut out = result.clone();
    for cell in out.cells.iter_mut() {
        let scale = cell.input_length;
        if scale > 0.0 {
            for layer in cell.layers.iter_mut() {
                layer.mean_length /= scale;
                layer.std_length /= scale;
            }
            cell.input_length = 1.0;
        }
    }
    out.input_length = 1.0;
    out
}

enum SweepVariant {
    /// Growth factor versus family standard deviation at fixed sparsity.
    Scale,
    /// Growth factor versus sparsity at fixed standard deviation.
    Alpha,
}

fn fig3(options: &FigureOptions, outdir: &Path, variant: SweepVariant) -> Result<Vec<PathBuf>> {
    let p = preset(
        options.scale,
        match options.scale {
            FigureScale::Desk => 6,
            FigureScale::Paper => 8,
        },
    );
    let (tag, alphas, scales) = match variant {
        SweepVariant::Scale => (
            "fig3a",
            vec![0.5],
            vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
        ),
        SweepVariant::Alpha => ("fig3b", alpha_grid(0.1, 1.0, 0.1), vec![2.0]),
    };
    let config = ExperimentConfig {
        version: 1,
        seed: options.seed,
        width: p.width,
        depth: p.depth,
        segments: p.segments,
        replicates: p.replicates,
        scale_weights_by_inv_sqrt_k: true,
        bias_scale: 0.01,
        trajectory: trajectory_for(options, p.width),
        sweep: SweepAxes {
            families: FamilyKind::ALL.to_vec(),
            alphas,
            scales,
        },
        discrete_values: None,
        bias: None,
    };
    let result = run_experiment(&config)?;

    let csv_path = outdir.join(format!("{tag}.csv"));
    export_csv(&result, &csv_path)?;

    let (x_label, title) = match variant {
        SweepVariant::Scale => (
            "family standard deviation (before 1/sqrt(k) scaling)",
            "Growth factor vs weight scale (alpha = 0.5)",
        ),
        SweepVariant::Alpha => (
            "alpha (fraction of nonzero weights)",
            "Growth factor vs sparsity (std = 2)",
        ),
    };
    let svg_path = outdir.join(format!("{tag}.svg"));
    growth_plot(&result, &variant, title, x_label).write(&svg_path)?;

    let meta_path = outdir.join(format!("{tag}.meta.json"));
    write_meta(&meta_path, meta_for(&config, tag, options.scale))?;
    Ok(vec![csv_path, svg_path, meta_path])
}

/// Observed growth factor per family against the swept axis, with the
/// matching bound base dashed underneath.
fn growth_plot(
    result: &ExperimentResult,
    variant: &SweepVariant,
    title: &str,
    x_label: &str,
) -> SvgPlot {
    let mut plot = SvgPlot::new(title, x_label, "mean growth factor");
    for family in &result.config.sweep.families {
        let cells: Vec<_> = result
            .cells
            .iter()
            .filter(|c| c.family == *family)
            .collect();
        let x_of = |c: &super::CellResult| match variant {
            SweepVariant::Scale => c.mixture_std / c.alpha.sqrt().max(f64::MIN_POSITIVE),
            SweepVariant::Alpha => c.alpha,
        };
        let observed: Vec<(f64, f64)> = cells.iter().map(|c| (x_of(c), c.overall_growth)).collect();
        let idx = plot.add_series(family.name(), observed);
        let bound: Vec<(f64, f64)> = cells
            .iter()
            .map(|c| {
                (
                    x_of(c),
                    c.layers.last().map(|l| l.bound_base).unwrap_or(0.0),
                )
            })
            .collect();
        plot.add_dashed_series(&format!("{family} bound"), bound, idx);
    }
    plot
}

enum Fig4Direction {
    /// Uniform random point on the unit sphere per dimension.
    Sphere,
    /// First standard basis vector (single nonzero entry).
    FirstUnit,
}

/// Expected random-subvector norm against sparsity, between its alpha and
/// sqrt(alpha) envelopes.
fn fig4(options: &FigureOptions, outdir: &Path, direction: Fig4Direction) -> Result<Vec<PathBuf>> {
    let (tag, dims): (&str, Vec<usize>) = match direction {
        Fig4Direction::Sphere => ("fig4a", vec![2, 10, 50, 500]),
        Fig4Direction::FirstUnit => ("fig4b", vec![4, 8, 12, 16]),
    };
    let trials = match options.scale {
        FigureScale::Desk => 20_000,
        FigureScale::Paper => 100_000,
    };
    let alphas = alpha_grid(0.05, 0.95, 0.05);

    let mut csv = String::from("dim,alpha,value,stderr,lower_bound,upper_bound\n");
    let mut plot = SvgPlot::new(
        match direction {
            Fig4Direction::Sphere => "E||u_J|| for spherical u: between alpha and sqrt(alpha)",
            Fig4Direction::FirstUnit => "E||u_J|| for a single-entry u: exactly alpha",
        },
        "alpha",
        "E||u_J|| / ||u||",
    );
    for (di, &dim) in dims.iter().enumerate() {
        let mut rng = StreamRng::new(options.seed, 0xf1_6400 + di as u64);
        let u: Vec<f64> = match direction {
            Fig4Direction::Sphere => {
                let mut v: Vec<f64> = (0..dim)
                    .map(|_| {
                        use rand_distr::Distribution;
                        rand_distr::StandardNormal.sample(&mut rng)
                    })
                    .collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter_mut().for_each(|x| *x /= n);
                v
            }
            Fig4Direction::FirstUnit => {
                let mut v = vec![0.0; dim];
                v[0] = 1.0;
                v
            }
        };
        let method = if dim <= 20 {
            SubvectorMethod::Enumerate
        } else {
            SubvectorMethod::MonteCarlo { trials }
        };
        let mut points = Vec::new();
        for &alpha in &alphas {
            let (value, stderr) = subvector_norm_expectation(&u, alpha, method, &mut rng)?;
            csv.push_str(&format!(
                "{dim},{alpha},{value},{stderr},{},{}\n",
                alpha,
                alpha.sqrt()
            ));
            points.push((alpha, value));
        }
        plot.add_series(&format!("dim {dim}"), points);
    }
    // Envelope references.
    let lower: Vec<(f64, f64)> = alphas.iter().map(|&a| (a, a)).collect();
    let upper: Vec<(f64, f64)> = alphas.iter().map(|&a| (a, a.sqrt())).collect();
    let li = plot.add_series("alpha (lower bound)", lower);
    plot.add_dashed_series("sqrt(alpha) (upper bound)", upper, li);

    let csv_path = outdir.join(format!("{tag}.csv"));
    std::fs::write(&csv_path, csv).map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;
    let svg_path = outdir.join(format!("{tag}.svg"));
    plot.write(&svg_path)?;
    let meta_path = outdir.join(format!("{tag}.meta.json"));
    write_meta(
        &meta_path,
        json!({
            "figure": tag,
            "scale": options.scale.name(),
            "seed": options.seed,
            "dims": dims,
            "alphas": alphas,
            "mc_trials": trials,
            "direction": match direction {
                Fig4Direction::Sphere => "uniform on unit sphere",
                Fig4Direction::FirstUnit => "first standard basis vector",
            },
            "note": "dims <= 20 are exact enumeration (stderr 0); larger dims Monte Carlo",
        }),
    )?;
    Ok(vec![csv_path, svg_path, meta_path])
}

/// Growth factor for random-endpoint straight lines and multi-plane arcs,
/// against both the scale axis and the sparsity axis.
fn fig5(options: &FigureOptions, outdir: &Path) -> Result<Vec<PathBuf>> {
    let p = preset(options.scale, 6);
    // Trajectories live in the network's input dimension.
    let dim = p.width;
    let planes = 100.min(dim - 1);
    let mut files = Vec::new();
    let panels: [(&str, TrajectorySource); 2] = [
        ("line", TrajectorySource::RandomLine { dim }),
        ("arc", TrajectorySource::RandomArc { dim, planes }),
    ];
    for (traj_tag, trajectory) in panels {
        for (axis_tag, alphas, scales) in [
            (
                "sigma",
                vec![0.5],
                match options.scale {
                    FigureScale::Desk => vec![1.0, 2.0, 3.0, 4.0],
                    FigureScale::Paper => vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
                },
            ),
            (
                "alpha",
                match options.scale {
                    FigureScale::Desk => vec![0.2, 0.4, 0.6, 0.8, 1.0],
                    FigureScale::Paper => alpha_grid(0.1, 1.0, 0.1),
                },
                vec![2.0],
            ),
        ] {
            let config = ExperimentConfig {
                version: 1,
                seed: options.seed,
                width: p.width,
                depth: p.depth,
                segments: p.segments,
                replicates: p.replicates,
                scale_weights_by_inv_sqrt_k: true,
                bias_scale: 0.01,
                trajectory: trajectory.clone(),
                sweep: SweepAxes {
                    families: FamilyKind::ALL.to_vec(),
                    alphas: alphas.clone(),
                    scales: scales.clone(),
                },
                discrete_values: None,
                bias: None,
            };
            let result = run_experiment(&config)?;
            let tag = format!("fig5_{traj_tag}_{axis_tag}");
            let csv_path = outdir.join(format!("{tag}.csv"));
            export_csv(&result, &csv_path)?;
            let variant = if axis_tag == "sigma" {
                SweepVariant::Scale
            } else {
                SweepVariant::Alpha
            };
            let (title, x_label) = if axis_tag == "sigma" {
                (
                    format!("Growth factor vs weight scale, random-endpoint {traj_tag}"),
                    "family standard deviation (before 1/sqrt(k) scaling)",
                )
            } else {
                (
                    format!("Growth factor vs sparsity, random-endpoint {traj_tag}"),
                    "alpha (fraction of nonzero weights)",
                )
            };
            let svg_path = outdir.join(format!("{tag}.svg"));
            growth_plot(&result, &variant, &title, x_label).write(&svg_path)?;
            let meta_path = outdir.join(format!("{tag}.meta.json"));
            write_meta(&meta_path, meta_for(&config, &tag, options.scale))?;
            files.extend([csv_path, svg_path, meta_path]);
        }
    }
    Ok(files)
}

/// Human-readable description of an IDX file for the `idx-info` command.
pub fn idx_info(path: &Path) -> Result<String> {
    let resolved = resolve_data_path(path);
    let raw = std::fs::read(&resolved).map_err(|source| Error::Io {
        path: resolved.clone(),
        source,
    })?;
    let gzipped = raw.starts_with(&[0x1f, 0x8b]);
    let tensor = idx::load_idx(&resolved)?;
    let mut out = String::new();
    out.push_str(&format!("path: {}\n", resolved.display()));
    out.push_str(&format!("gzip: {}\n", if gzipped { "yes" } else { "no" }));
    out.push_str("element type: unsigned byte (0x08)\n");
    out.push_str(&format!(
        "dimensions: {}\n",
        tensor
            .dims()
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" x ")
    ));
    out.push_str(&format!("items: {}\n", tensor.len()));
    out.push_str(&format!("item size: {} bytes\n", tensor.item_size()));
    out.push_str(&format!("payload: {} bytes\n", tensor.data().len()));
    Ok(out)
}
