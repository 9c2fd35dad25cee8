//! Self-contained static SVG line plots: axes, ticks, grid, legend, solid
//! observation curves and dashed bound curves. No external plotting service
//! or JavaScript; the output is a single `<svg>` element.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::ExperimentResult;

const WIDTH: f64 = 880.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 250.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// One curve. Dashed series share the color of the preceding solid series
/// when `color_of` points at it, which pairs each bound with its
/// observation.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Index of the series whose palette color to reuse; `None` assigns the
    /// next palette color.
    pub color_of: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SvgPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    series: Vec<Series>,
}

impl SvgPlot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn with_log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    /// Add a solid series; returns its index for color pairing.
    pub fn add_series(&mut self, label: &str, points: Vec<(f64, f64)>) -> usize {
        self.series.push(Series {
            label: label.into(),
            points,
            dashed: false,
            color_of: None,
        });
        self.series.len() - 1
    }

    /// Add a dashed series colored like series `pair_with`.
    pub fn add_dashed_series(&mut self, label: &str, points: Vec<(f64, f64)>, pair_with: usize) {
        self.series.push(Series {
            label: label.into(),
            points,
            dashed: true,
            color_of: Some(pair_with),
        });
    }

    fn transformed(&self) -> Vec<(usize, Vec<(f64, f64)>)> {
        self.series
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let pts = s
                    .points
                    .iter()
                    .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
                    .map(|&(x, y)| if self.log_y { (x, y.log10()) } else { (x, y) })
                    .collect();
                (i, pts)
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let data = self.transformed();
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for (_, pts) in &data {
            for &(x, y) in pts {
                xs.push(x);
                ys.push(y);
            }
        }
        let (x_min, x_max) = padded_range(&xs);
        let (y_min, y_max) = padded_range(&ys);

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
        let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(
            svg,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16" font-weight="bold">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        );

        // Grid and ticks.
        for x in nice_ticks(x_min, x_max) {
            let px = sx(x);
            let _ = writeln!(
                svg,
                r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
                MARGIN_TOP,
                MARGIN_TOP + plot_h
            );
            let _ = writeln!(
                svg,
                r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
                MARGIN_TOP + plot_h + 18.0,
                tick_label(x)
            );
        }
        for y in nice_ticks(y_min, y_max) {
            let py = sy(y);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd" stroke-width="1"/>"##,
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            );
            let label = if self.log_y {
                format!("1e{}", tick_label(y))
            } else {
                tick_label(y)
            };
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{label}</text>"#,
                MARGIN_LEFT - 8.0,
                py + 4.0
            );
        }

        // Frame and axis labels.
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black" stroke-width="1"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let y_mid = MARGIN_TOP + plot_h / 2.0;
        let _ = writeln!(
            svg,
            r#"<text x="22" y="{y_mid:.2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 22 {y_mid:.2})">{}</text>"#,
            escape(&self.y_label)
        );

        // Series.
        for (i, pts) in &data {
            if pts.is_empty() {
                continue;
            }
            let s = &self.series[*i];
            let color = self.color_for(*i);
            let dash = if s.dashed {
                r#" stroke-dasharray="7,5""#
            } else {
                ""
            };
            let mut path = String::new();
            for (j, &(x, y)) in pts.iter().enumerate() {
                let _ = write!(
                    path,
                    "{}{:.2},{:.2}",
                    if j == 0 { "" } else { " " },
                    sx(x),
                    sy(y)
                );
            }
            let _ = writeln!(
                svg,
                r#"<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.8"{dash}/>"#
            );
        }

        // Legend.
        let legend_x = MARGIN_LEFT + plot_w + 14.0;
        for (i, s) in self.series.iter().enumerate() {
            let y = MARGIN_TOP + 10.0 + i as f64 * 20.0;
            let color = self.color_for(i);
            let dash = if s.dashed {
                r#" stroke-dasharray="7,5""#
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                r#"<line x1="{legend_x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.8"{dash}/>"#,
                legend_x + 26.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                legend_x + 32.0,
                y + 4.0,
                escape(&s.label)
            );
        }

        svg.push_str("</svg>\n");
        svg
    }

    fn color_for(&self, index: usize) -> &'static str {
        let mut idx = index;
        if let Some(of) = self.series[index].color_of {
            idx = of;
        }
        // Palette position counts only color-owning series.
        let owners_before = self.series[..=idx]
            .iter()
            .filter(|s| s.color_of.is_none())
            .count();
        PALETTE[(owners_before.saturating_sub(1)) % PALETTE.len()]
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|source| Error::Io {
            path: path.into(),
            source,
        })
    }
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        return (min - 1.0, max + 1.0);
    }
    let pad = (max - min) * 0.05;
    (min - pad, max + pad)
}

/// Ticks at 1-2-5 steps, roughly five per axis.
fn nice_ticks(min: f64, max: f64) -> Vec<f64> {
    let span = max - min;
    let raw_step = span / 5.0;
    let mag = 10.0f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (min / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= max + step * 1e-9 {
        // Snap tiny float residue to zero.
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        // Trim trailing zeros from a fixed representation.
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Default plot for a sweep result: mean length per layer for every cell,
/// with the bound-product curve dashed alongside.
pub fn export_svg(result: &ExperimentResult, path: &Path) -> Result<()> {
    let mut plot = SvgPlot::new(
        "Trajectory length by layer",
        "layer",
        "mean trajectory length (log scale)",
    )
    .with_log_y();
    for cell in &result.cells {
        let label = format!(
            "{} α={} std={:.3}",
            cell.family, cell.alpha, cell.mixture_std
        );
        let mut observed = vec![(0.0, cell.input_length)];
        for (d, layer) in cell.layers.iter().enumerate() {
            observed.push(((d + 1) as f64, layer.mean_length));
        }
        let idx = plot.add_series(&label, observed);

        let mut bound_curve = vec![(0.0, cell.input_length)];
        let mut product = cell.input_length;
        for (d, layer) in cell.layers.iter().enumerate() {
            product *= layer.bound_base;
            bound_curve.push(((d + 1) as f64, product));
        }
        plot.add_dashed_series(&format!("{label} bound"), bound_curve, idx);
    }
    plot.write(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_svg() {
        let mut plot = SvgPlot::new("t", "x", "y");
        let a = plot.add_series("obs", vec![(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)]);
        plot.add_dashed_series("bound", vec![(0.0, 0.5), (2.0, 3.0)], a);
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("obs"));
        assert!(svg.contains("bound"));
    }

    #[test]
    fn log_scale_drops_nonpositive_points() {
        let mut plot = SvgPlot::new("t", "x", "y").with_log_y();
        plot.add_series("s", vec![(0.0, 0.0), (1.0, 10.0), (2.0, 100.0)]);
        let svg = plot.render();
        // The zero-valued point is filtered; the polyline has two points.
        let poly = svg.lines().find(|l| l.contains("<polyline")).unwrap();
        assert_eq!(poly.matches(',').count(), 2);
    }

    #[test]
    fn paired_series_share_color() {
        let mut plot = SvgPlot::new("t", "x", "y");
        let a = plot.add_series("a", vec![(0.0, 1.0), (1.0, 2.0)]);
        plot.add_dashed_series("a bound", vec![(0.0, 1.0), (1.0, 1.5)], a);
        plot.add_series("b", vec![(0.0, 2.0), (1.0, 3.0)]);
        assert_eq!(plot.color_for(0), plot.color_for(1));
        assert_ne!(plot.color_for(0), plot.color_for(2));
    }

    #[test]
    fn ticks_cover_range() {
        let ticks = nice_ticks(0.0, 10.0);
        assert!(ticks.len() >= 3 && ticks.len() <= 7);
        assert!(ticks.iter().all(|t| (0.0..=10.0 + 1e-9).contains(t)));
        let neg = nice_ticks(-3.2, 4.7);
        assert!(neg.contains(&0.0));
    }

    #[test]
    fn empty_plot_does_not_panic() {
        let plot = SvgPlot::new("empty", "x", "y");
        let svg = plot.render();
        assert!(svg.contains("</svg>"));
    }
}
