//! End-to-end checks of the experiment harness and the CLI binary:
//! deterministic output bytes, thread-count invariance, figure content,
//! and the command-line surface.

use std::process::Command;

use trajgrowth::harness::csv::{CSV_HEADER, csv_string, export_csv};
use trajgrowth::harness::figures::{FigureName, FigureOptions, reproduce_figure};
use trajgrowth::harness::svg::export_svg;
use trajgrowth::harness::{
    ExperimentConfig, FamilyKind, SweepAxes, TrajectorySource, run_experiment,
};
use trajgrowth::network::{build_network, read_network, write_network};

fn quick_config() -> ExperimentConfig {
    ExperimentConfig {
        version: 1,
        seed: 77,
        width: 32,
        depth: 5,
        segments: 100,
        replicates: 8,
        scale_weights_by_inv_sqrt_k: true,
        bias_scale: 0.01,
        trajectory: TrajectorySource::RandomLine { dim: 32 },
        sweep: SweepAxes {
            families: FamilyKind::ALL.to_vec(),
            alphas: vec![0.5, 1.0],
            scales: vec![2.0],
        },
        discrete_values: None,
        bias: None,
    }
}

#[test]
fn identical_config_and_seed_give_identical_csv_bytes() {
    let config = quick_config();
    let a = csv_string(&run_experiment(&config).unwrap());
    let b = csv_string(&run_experiment(&config).unwrap());
    assert_eq!(
        a, b,
        "CSV output must be byte-identical for identical config + seed"
    );
    assert!(a.starts_with(CSV_HEADER));
}

#[test]
fn thread_count_does_not_change_results() {
    let config = quick_config();
    let pool1 = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let single = pool1.install(|| csv_string(&run_experiment(&config).unwrap()));
    let multi = pool4.install(|| csv_string(&run_experiment(&config).unwrap()));
    assert_eq!(
        single, multi,
        "replicate parallelism must not change output bytes"
    );
}

#[test]
fn empty_sweep_is_rejected_but_single_cell_gives_header_plus_rows() {
    let mut config = quick_config();
    config.sweep.families = vec![FamilyKind::Uniform];
    config.sweep.alphas = vec![1.0];
    let result = run_experiment(&config).unwrap();
    let text = csv_string(&result);
    assert_eq!(text.lines().count(), 1 + (config.depth + 1));

    config.sweep.alphas.clear();
    assert!(run_experiment(&config).is_err());
}

#[test]
fn fig2_curves_are_ordered_by_alpha_from_layer_three() {
    // Reduced-size fig2-style run: log-length curves for larger alpha must
    // dominate smaller alpha from layer 3 onward.
    let config = ExperimentConfig {
        version: 1,
        seed: 31,
        width: 128,
        depth: 10,
        segments: 300,
        replicates: 10,
        scale_weights_by_inv_sqrt_k: true,
        bias_scale: 0.01,
        trajectory: TrajectorySource::RandomLine { dim: 128 },
        sweep: SweepAxes {
            families: vec![FamilyKind::Gaussian],
            alphas: vec![0.3, 0.6, 0.9],
            scales: vec![6.0],
        },
        discrete_values: None,
        bias: None,
    };
    let result = run_experiment(&config).unwrap();
    for d in 3..=config.depth {
        let lengths: Vec<f64> = result
            .cells
            .iter()
            .map(|c| c.layers[d - 1].mean_length)
            .collect();
        assert!(
            lengths.windows(2).all(|w| w[0] < w[1]),
            "layer {d}: lengths not ordered by alpha: {lengths:?}"
        );
    }
}

#[test]
fn growth_depends_linearly_on_scale() {
    // fig3a-style sweep: per family, the observed growth factor against the
    // family std fits a line with R^2 >= 0.99.
    let config = ExperimentConfig {
        version: 1,
        seed: 41,
        width: 128,
        depth: 5,
        segments: 300,
        replicates: 10,
        scale_weights_by_inv_sqrt_k: true,
        bias_scale: 0.01,
        trajectory: TrajectorySource::RandomLine { dim: 128 },
        sweep: SweepAxes {
            families: FamilyKind::ALL.to_vec(),
            alphas: vec![0.5],
            scales: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
        },
        discrete_values: None,
        bias: None,
    };
    let result = run_experiment(&config).unwrap();
    for family in FamilyKind::ALL {
        let cells: Vec<_> = result.cells.iter().filter(|c| c.family == family).collect();
        let x: Vec<f64> = cells
            .iter()
            .map(|c| c.mixture_std / c.alpha.sqrt())
            .collect();
        let y: Vec<f64> = cells.iter().map(|c| c.overall_growth).collect();
        let fit = trajgrowth::stats::linear_fit(&x, &y);
        assert!(
            fit.r2 >= 0.99,
            "{family}: growth vs scale R^2 = {} (points {y:?})",
            fit.r2
        );
        assert!(fit.slope > 0.0);
    }
}

#[test]
fn network_dump_file_round_trip() {
    let config = quick_config();
    let spec = config.weight_spec(FamilyKind::Discrete, 0.5, 2.0).unwrap();
    let net_config = trajgrowth::network::NetworkConfig {
        width: 12,
        depth: 3,
        input_dim: 12,
        weight_spec: spec,
        bias_spec: config.bias_spec(FamilyKind::Discrete).unwrap(),
    };
    let net = build_network(&net_config, &mut trajgrowth::StreamRng::new(5, 5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.bin");
    let mut file = std::fs::File::create(&path).unwrap();
    write_network(&net, &mut file).unwrap();
    drop(file);
    let back = read_network(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(net, back);
}

#[test]
fn figure_outputs_exist_and_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let options = FigureOptions::default();
    let files = reproduce_figure(FigureName::Fig4a, &options, dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    for file in &files {
        assert!(file.exists(), "{} missing", file.display());
    }
    let svg = std::fs::read_to_string(&files[1]).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("</svg>"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&files[2]).unwrap()).unwrap();
    assert_eq!(meta["figure"], "fig4a");
    assert_eq!(meta["scale"], "desk");
}

#[test]
fn export_files_round_trip_through_disk() {
    let result = run_experiment(&quick_config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("r.csv");
    let svg_path = dir.path().join("r.svg");
    export_csv(&result, &csv_path).unwrap();
    export_svg(&result, &svg_path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&csv_path).unwrap(),
        csv_string(&result)
    );
    assert!(
        std::fs::read_to_string(&svg_path)
            .unwrap()
            .contains("<polyline")
    );
}

// ---------------------------------------------------------------------------
// CLI binary
// ---------------------------------------------------------------------------

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trajgrowth"))
}

#[test]
fn cli_bounds_prints_table() {
    let out = cli()
        .args([
            "bounds", "--k", "64", "--depth", "4", "--alphas", "0.5", "--scales", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("gaussian"));
    assert!(text.contains("uniform"));
    assert!(text.contains("discrete"));
    assert!(text.contains("order-of-magnitude"));
}

#[test]
fn cli_simulate_runs_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("cfg.toml");
    std::fs::write(
        &config_path,
        r#"
version = 1
seed = 5
width = 16
depth = 3
segments = 64
replicates = 4

[trajectory]
kind = "random_line"
dim = 16

[sweep]
families = ["gaussian"]
alphas = [1.0]
scales = [2.0]
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = cli()
        .args([
            "simulate",
            "--config",
            config_path.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
            "--replicates",
            "3",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("result.csv")).unwrap();
    // The CLI override wins over the config file value.
    let row = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(
        fields[12], "3",
        "replicates column must reflect the CLI override"
    );
    assert!(out_dir.join("result.svg").exists());
}

#[test]
fn cli_simulate_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    std::fs::write(&config_path, "version = 9\n").unwrap();
    let out = cli()
        .args(["simulate", "--config", config_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn cli_idx_info_reads_gzip() {
    use std::io::Write;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.idx.gz");
    let bytes = trajgrowth::trajectory::idx::encode_idx(&[5, 2, 2], &[1u8; 20]);
    let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
    enc.write_all(&bytes).unwrap();
    std::fs::write(&path, enc.finish().unwrap()).unwrap();

    let out = cli()
        .args(["idx-info", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("gzip: yes"));
    assert!(text.contains("5 x 2 x 2"));

    let missing = cli()
        .args(["idx-info", "/nonexistent/file.idx"])
        .output()
        .unwrap();
    assert!(!missing.status.success());
}

#[test]
fn cli_data_dir_env_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let bytes = trajgrowth::trajectory::idx::encode_idx(&[1, 2, 2], &[9u8; 4]);
    std::fs::write(dir.path().join("rel.idx"), bytes).unwrap();
    let out = cli()
        .env("TRAJGROWTH_DATA_DIR", dir.path())
        .args(["idx-info", "rel.idx"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8(out.stdout).unwrap().contains("items: 1"));
}

#[test]
fn cli_figure_rejects_unknown_name() {
    let out = cli().args(["figure", "fig99"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown figure"));
}
