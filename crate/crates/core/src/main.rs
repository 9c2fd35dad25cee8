use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use trajgrowth::bounds::{base_for_spec, base_prior_gaussian};
use trajgrowth::distributions::DistributionSpec;
use trajgrowth::harness::csv::export_csv;
use trajgrowth::harness::figures::{
    DEFAULT_FIGURE_SEED, FigureName, FigureOptions, FigureScale, idx_info, reproduce_figure,
};
use trajgrowth::harness::svg::export_svg;
use trajgrowth::harness::{ExperimentConfig, FamilyKind, run_experiment};
use trajgrowth::verify::standard_battery;

/// Trajectory growth through random sparse deep ReLU networks: simulate,
/// bound, and verify.
#[derive(Parser)]
#[command(name = "trajgrowth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config file.
    Simulate(SimulateArgs),
    /// Print the bound table for a grid of distribution parameters.
    Bounds(BoundsArgs),
    /// Run every oracle check; nonzero exit if any fails.
    Verify(VerifyArgs),
    /// Regenerate a canned figure (CSV + SVG + metadata).
    Figure(FigureArgs),
    /// Inspect an IDX dataset file.
    IdxInfo { path: PathBuf },
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for result.csv / result.svg.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's segment count.
    #[arg(long)]
    segments: Option<usize>,
    /// Override the config's replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the config's network width.
    #[arg(long)]
    width: Option<usize>,
    /// Override the config's network depth.
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Layer width.
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Depth for the cumulative bound column.
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Comma-separated sparsity values.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1.0")]
    alphas: Vec<f64>,
    /// Comma-separated family standard deviations (before 1/sqrt(k)).
    #[arg(long, value_delimiter = ',', default_value = "1.0,2.0,4.0")]
    scales: Vec<f64>,
    /// Comma-separated families (gaussian, uniform, discrete).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "gaussian,uniform,discrete"
    )]
    families: Vec<String>,
    /// Divide family scales by sqrt(k) before computing the base.
    #[arg(long)]
    scaled: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// fig2 | fig3a | fig3b | fig4a | fig4b | fig5
    name: String,
    /// desk (fast) or paper (full protocol).
    #[arg(long, default_value = "desk")]
    scale: String,
    #[arg(long, default_value = "figures")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FIGURE_SEED)]
    seed: u64,
    /// IDX image file for dataset-endpoint trajectories (otherwise random
    /// endpoints are used).
    #[arg(long)]
    mnist: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Bounds(args) => bounds_table(args),
        Command::Verify(args) => verify(args),
        Command::Figure(args) => figure(args),
        Command::IdxInfo { path } => {
            print!("{}", idx_info(&path)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(segments) = args.segments {
        config.segments = segments;
    }
    if let Some(replicates) = args.replicates {
        config.replicates = replicates;
    }
    if let Some(width) = args.width {
        config.width = width;
    }
    if let Some(depth) = args.depth {
        config.depth = depth;
    }
    config.validate()?;

    let result = run_experiment(&config)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let csv_path = args.out_dir.join("result.csv");
    let svg_path = args.out_dir.join("result.svg");
    export_csv(&result, &csv_path)?;
    export_svg(&result, &svg_path)?;

    println!("input length: {:.6}", result.input_length);
    println!(
        "{:<10} {:>6} {:>8} {:>12} {:>12} {:>12}",
        "family", "alpha", "std", "growth", "stderr", "bound"
    );
    for cell in &result.cells {
        let bound = cell.layers.last().map(|l| l.bound_base).unwrap_or(0.0);
        println!(
            "{:<10} {:>6} {:>8.4} {:>12.6} {:>12.2e} {:>12.6}",
            cell.family.name(),
            cell.alpha,
            cell.mixture_std,
            cell.overall_growth,
            cell.overall_growth_stderr,
            bound
        );
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    Ok(ExitCode::SUCCESS)
}

fn bounds_table(args: BoundsArgs) -> Result<ExitCode> {
    println!(
        "{:<10} {:>6} {:>8} {:>10} {:>12} {:>14}",
        "family", "alpha", "scale", "M", "base", "base^depth"
    );
    for name in &args.families {
        let family: FamilyKind = name.parse()?;
        for &alpha in &args.alphas {
            for &scale in &args.scales {
                let spec = match family {
                    FamilyKind::Gaussian => DistributionSpec::gaussian(scale, alpha)?,
                    FamilyKind::Uniform => DistributionSpec::uniform(scale * 3.0f64.sqrt(), alpha)?,
                    FamilyKind::Discrete => DistributionSpec::discrete(&[-scale, scale], alpha)?,
                }
                .with_inv_sqrt_k_scaling(args.scaled);
                let base = base_for_spec(&spec, args.k)?;
                println!(
                    "{:<10} {:>6} {:>8} {:>10.6} {:>12.6} {:>14.6e}",
                    family.name(),
                    alpha,
                    scale,
                    spec.m_constant(),
                    base.base,
                    base.base.powi(args.depth as i32)
                );
            }
        }
    }
    // Order-of-magnitude comparison factor from the earlier dense-Gaussian
    // analysis (hidden constant not included).
    for &scale in &args.scales {
        let sigma = if args.scaled {
            scale / (args.k as f64).sqrt()
        } else {
            scale
        };
        let prior = base_prior_gaussian(sigma, args.k)?;
        println!(
            "{:<10} {:>6} {:>8} {:>10} {:>12.6} {:>14} (order-of-magnitude factor)",
            "gauss-prior", "-", scale, "-", prior.base, "-"
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let reports = standard_battery(args.seed);
    let mut all_pass = true;
    for report in &reports {
        all_pass &= report.pass;
        println!(
            "{} {:<38} [{} item{}] {}",
            if report.pass { "PASS" } else { "FAIL" },
            report.id,
            report.items.len(),
            if report.items.len() == 1 { "" } else { "s" },
            report.rule
        );
        if !report.pass {
            for item in report.items.iter().filter(|i| !i.pass) {
                println!(
                    "     item '{}': estimate {} vs reference {} (stderr {})",
                    item.label, item.estimate, item.reference, item.stderr
                );
            }
        }
    }
    if let Some(path) = &args.json {
        let body = serde_json::json!({
            "seed": args.seed,
            "all_pass": all_pass,
            "reports": reports,
        });
        std::fs::write(path, serde_json::to_string_pretty(&body)?)
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    println!(
        "{}",
        if all_pass {
            "all checks passed"
        } else {
            "CHECKS FAILED"
        }
    );
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn figure(args: FigureArgs) -> Result<ExitCode> {
    let name: FigureName = args.name.parse()?;
    let scale: FigureScale = args.scale.parse()?;
    let options = FigureOptions {
        scale,
        seed: args.seed,
        mnist: args.mnist,
    };
    let files = reproduce_figure(name, &options, &args.out_dir)?;
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(ExitCode::SUCCESS)
}
