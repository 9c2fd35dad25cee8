//! CSV export of sweep results.
//!
//! One row per sweep cell per layer, fixed schema:
//!
//! ```text
//! family,alpha,scale_param,mixture_std,k,depth_layer,mean_length,std_length,
//! mean_growth,stderr_growth,bound_base,dead_segment_fraction,replicates,segments,seed
//! ```
//!
//! The `depth_layer = 0` row carries the input trajectory; its growth and
//! bound columns are empty (there is no transition into layer 0). Floats are
//! written with Rust's shortest round-trip formatting, so re-parsing
//! reproduces every value bit-exactly.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::ExperimentResult;

pub const CSV_HEADER: &str = "family,alpha,scale_param,mixture_std,k,depth_layer,mean_length,\
std_length,mean_growth,stderr_growth,bound_base,dead_segment_fraction,replicates,segments,seed";

/// Render a result to CSV text.
pub fn csv_string(result: &ExperimentResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let config = &result.config;
    for cell in &result.cells {
        let prefix = format!(
            "{},{},{},{},{}",
            cell.family, cell.alpha, cell.scale_param, cell.mixture_std, config.width
        );
        let suffix = format!("{},{},{}", config.replicates, config.segments, config.seed);
        out.push_str(&format!(
            "{prefix},0,{},{},,,,,{suffix}\n",
            cell.input_length, 0.0
        ));
        for (d, layer) in cell.layers.iter().enumerate() {
            out.push_str(&format!(
                "{prefix},{},{},{},{},{},{},{},{suffix}\n",
                d + 1,
                layer.mean_length,
                layer.std_length,
                layer.mean_growth,
                layer.stderr_growth,
                layer.bound_base,
                layer.dead_fraction,
            ));
        }
    }
    out
}

/// Write a result to a CSV file.
pub fn export_csv(result: &ExperimentResult, path: &Path) -> Result<()> {
    fs::write(path, csv_string(result)).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}
