//! Input trajectories and length measurement.
//!
//! A trajectory is a curve `x(t)`, `t ∈ [0, 1]`, discretized into a
//! [`Polyline`]; its length is the polyline's Euclidean arc length. The
//! growth measurement compares consecutive layers of a forward trace
//! segment by segment.

pub mod idx;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::network::LayerTrace;
use crate::rng::StreamRng;

/// An ordered list of points in `R^m`, uniform in the curve parameter.
/// Stored as an `(n_points, dim)` row-major matrix; at least two points.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Array2<f64>,
}

impl Polyline {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        if points.nrows() < 2 {
            return Err(Error::Dimension(format!(
                "a polyline needs at least 2 points, got {}",
                points.nrows()
            )));
        }
        if points.ncols() == 0 {
            return Err(Error::Dimension(
                "polyline points must have dimension >= 1".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let dim = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(
                "all points must share one dimension".into(),
            ));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points =
            Array2::from_shape_vec((n, dim), flat).map_err(|e| Error::Dimension(e.to_string()))?;
        Self::new(points)
    }

    pub fn n_points(&self) -> usize {
        self.points.nrows()
    }

    pub fn n_segments(&self) -> usize {
        self.points.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }
}

/// Uniform linear interpolation between two distinct endpoints.
pub fn line_trajectory(x0: &[f64], x1: &[f64], segments: usize) -> Result<Polyline> {
    if x0.len() != x1.len() {
        return Err(Error::Dimension(format!(
            "endpoint dimensions differ: {} vs {}",
            x0.len(),
            x1.len()
        )));
    }
    if segments == 0 {
        return Err(Error::Domain("need at least one segment".into()));
    }
    if x0 == x1 {
        return Err(Error::Domain("line endpoints must be distinct".into()));
    }
    let dim = x0.len();
    let mut points = Array2::zeros((segments + 1, dim));
    for i in 0..=segments {
        let t = i as f64 / segments as f64;
        for j in 0..dim {
            points[(i, j)] = x0[j] + t * (x1[j] - x0[j]);
        }
    }
    Polyline::new(points)
}

/// A chord bent into a semicircular arc: the along-chord coordinate follows
/// `(1 − cos πt)/2` and each of `planes` random orthonormal directions
/// perpendicular to the chord carries a `(‖chord‖/2)·sin πt` displacement.
/// With one plane this is an exact semicircle over the chord. Endpoints are
/// preserved exactly; `planes = 0` degenerates to [`line_trajectory`].
pub fn arc_trajectory(
    x0: &[f64],
    x1: &[f64],
    segments: usize,
    planes: usize,
    rng: &mut StreamRng,
) -> Result<Polyline> {
    if planes == 0 {
        return line_trajectory(x0, x1, segments);
    }
    let dim = x0.len();
    if dim < 2 {
        return Err(Error::Dimension(
            "arc trajectories need dimension >= 2".into(),
        ));
    }
    if planes > dim - 1 {
        return Err(Error::Domain(format!(
            "cannot fit {planes} orthonormal planes perpendicular to a chord in dimension {dim}"
        )));
    }
    if x0.len() != x1.len() {
        return Err(Error::Dimension("endpoint dimensions differ".into()));
    }
    if segments == 0 {
        return Err(Error::Domain("need at least one segment".into()));
    }
    if x0 == x1 {
        return Err(Error::Domain("arc endpoints must be distinct".into()));
    }

    let chord: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| b - a).collect();
    let chord_norm = norm(&chord);
    let radius = chord_norm / 2.0;
    let chord_unit: Vec<f64> = chord.iter().map(|c| c / chord_norm).collect();

    // Orthonormal directions perpendicular to the chord: Gram-Schmidt on
    // standard-normal columns, with one re-orthogonalization pass.
    let mut basis: Vec<Vec<f64>> = vec![chord_unit.clone()];
    while basis.len() < planes + 1 {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&v, b);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= d * bi;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    let perp = &basis[1..];

    let mut points = Array2::zeros((segments + 1, dim));
    for i in 0..=segments {
        if i == 0 {
            points.row_mut(0).assign(&ndarray::ArrayView1::from(x0));
            continue;
        }
        if i == segments {
            points
                .row_mut(segments)
                .assign(&ndarray::ArrayView1::from(x1));
            continue;
        }
        let t = i as f64 / segments as f64;
        let along = 0.5 * (1.0 - (std::f64::consts::PI * t).cos());
        let lift = radius * (std::f64::consts::PI * t).sin();
        for j in 0..dim {
            let mut coord = x0[j] + along * chord[j];
            for q in perp {
                coord += lift * q[j];
            }
            points[(i, j)] = coord;
        }
    }
    Polyline::new(points)
}

/// Euclidean arc length: the sum of segment lengths.
pub fn arc_length(p: &Polyline) -> f64 {
    matrix_arc_length(&p.points.view())
}

pub(crate) fn matrix_arc_length(points: &ArrayView2<'_, f64>) -> f64 {
    let mut total = 0.0;
    for i in 0..points.nrows() - 1 {
        let mut ss = 0.0;
        let a = points.row(i);
        let b = points.row(i + 1);
        for j in 0..points.ncols() {
            let d = b[j] - a[j];
            ss += d * d;
        }
        total += ss.sqrt();
    }
    total
}

/// Per-transition segment statistics between two point sets sharing a
/// discretization: the sum of surviving segment-length ratios, the number
/// of surviving segments, and the number of dead ones (zero-length in the
/// earlier layer, excluded from the ratio mean).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SegmentStats {
    pub ratio_sum: f64,
    pub surviving: usize,
    pub dead: usize,
}

impl SegmentStats {
    pub fn mean_ratio(&self) -> f64 {
        if self.surviving == 0 {
            0.0
        } else {
            self.ratio_sum / self.surviving as f64
        }
    }

    pub fn dead_fraction(&self) -> f64 {
        let total = self.surviving + self.dead;
        if total == 0 {
            0.0
        } else {
            self.dead as f64 / total as f64
        }
    }
}

pub(crate) fn matrix_segment_stats(
    prev: &ArrayView2<'_, f64>,
    next: &ArrayView2<'_, f64>,
) -> SegmentStats {
    debug_assert_eq!(prev.nrows(), next.nrows());
    let mut stats = SegmentStats::default();
    for i in 0..prev.nrows() - 1 {
        let n0 = row_distance(prev, i);
        let n1 = row_distance(next, i);
        if n0 > 0.0 {
            stats.ratio_sum += n1 / n0;
            stats.surviving += 1;
        } else {
            stats.dead += 1;
        }
    }
    stats
}

fn row_distance(points: &ArrayView2<'_, f64>, i: usize) -> f64 {
    let a = points.row(i);
    let b = points.row(i + 1);
    let mut ss = 0.0;
    for j in 0..points.ncols() {
        let d = b[j] - a[j];
        ss += d * d;
    }
    ss.sqrt()
}

/// Per-layer growth measurements for one network × one input trajectory.
#[derive(Debug, Clone)]
pub struct GrowthProfile {
    /// Arc length at each stage: index 0 is the input, index `d ≥ 1` the
    /// post-activation image of layer `d`.
    pub lengths: Vec<f64>,
    /// Arc length of the pre-activation image of each layer.
    pub pre_lengths: Vec<f64>,
    /// Mean over surviving segments of the per-segment length ratio between
    /// stage `d` and stage `d + 1`.
    pub mean_ratios: Vec<f64>,
    /// Fraction of segments with zero length at stage `d` (excluded from
    /// the ratio mean).
    pub dead_fractions: Vec<f64>,
    /// Raw ratio sums and surviving-segment counts behind `mean_ratios`,
    /// for segment-weighted aggregation across replicates.
    pub ratio_sums: Vec<f64>,
    pub surviving_counts: Vec<usize>,
}

impl GrowthProfile {
    pub fn depth(&self) -> usize {
        self.mean_ratios.len()
    }
}

/// Measure growth from a materialized forward trace. Ratios and lengths are
/// taken on post-activation images; stage 0 is the input itself.
pub fn growth_profile(trace: &LayerTrace, input: &Polyline) -> Result<GrowthProfile> {
    if trace.post.iter().any(|p| p.n_points() != input.n_points()) {
        return Err(Error::Dimension(
            "trace and input polylines must share a point count".into(),
        ));
    }
    let depth = trace.post.len();
    let mut profile = GrowthProfile {
        lengths: Vec::with_capacity(depth + 1),
        pre_lengths: Vec::with_capacity(depth),
        mean_ratios: Vec::with_capacity(depth),
        dead_fractions: Vec::with_capacity(depth),
        ratio_sums: Vec::with_capacity(depth),
        surviving_counts: Vec::with_capacity(depth),
    };
    profile.lengths.push(arc_length(input));
    for d in 0..depth {
        let prev = if d == 0 {
            input.points()
        } else {
            trace.post[d - 1].points()
        };
        let next = trace.post[d].points();
        let stats = matrix_segment_stats(&prev.view(), &next.view());
        profile.lengths.push(arc_length(&trace.post[d]));
        profile.pre_lengths.push(arc_length(&trace.pre[d]));
        profile.mean_ratios.push(stats.mean_ratio());
        profile.dead_fractions.push(stats.dead_fraction());
        profile.ratio_sums.push(stats.ratio_sum);
        profile.surviving_counts.push(stats.surviving);
    }
    Ok(profile)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn line_two_points() {
        let p = line_trajectory(&[0.0, 0.0], &[3.0, 4.0], 1).unwrap();
        assert_eq!(p.n_points(), 2);
        assert_eq!(p.point(1).to_vec(), vec![3.0, 4.0]);
    }

    #[test]
    fn line_length_is_chord_length() {
        let p = line_trajectory(&[0.0, 0.0], &[3.0, 4.0], 10).unwrap();
        assert_relative_eq!(arc_length(&p), 5.0, max_relative = 1e-12);
    }

    #[test]
    fn equal_endpoints_rejected() {
        assert!(line_trajectory(&[1.0, 2.0], &[1.0, 2.0], 4).is_err());
    }

    #[test]
    fn repeated_point_has_zero_length() {
        let p = Polyline::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(arc_length(&p), 0.0);
    }

    #[test]
    fn unit_circle_circumference() {
        let n = 10_000;
        let rows: Vec<Vec<f64>> = (0..=n)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![th.cos(), th.sin()]
            })
            .collect();
        let p = Polyline::from_rows(&rows).unwrap();
        // Inscribed polygon perimeter: 2*pi within ~ (pi^3/3)/n^2 < 1e-6 rel.
        assert_relative_eq!(
            arc_length(&p),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-6
        );
    }

    #[test]
    fn single_plane_arc_is_a_semicircle() {
        let mut rng = StreamRng::new(11, 0);
        let p = arc_trajectory(&[0.0, 0.0], &[1.0, 0.0], 10_000, 1, &mut rng).unwrap();
        let expected = std::f64::consts::PI / 2.0;
        assert_relative_eq!(arc_length(&p), expected, max_relative = 1e-3);
    }

    #[test]
    fn arc_preserves_endpoints_exactly() {
        let mut rng = StreamRng::new(12, 0);
        let x0 = vec![0.3, -1.0, 2.0, 0.0, 0.5];
        let x1 = vec![1.0, 0.25, -0.5, 3.0, -2.0];
        for planes in [1usize, 2, 4] {
            let p = arc_trajectory(&x0, &x1, 100, planes, &mut rng).unwrap();
            assert_eq!(p.point(0).to_vec(), x0);
            assert_eq!(p.point(100).to_vec(), x1);
        }
    }

    #[test]
    fn zero_planes_degenerates_to_line() {
        let mut rng = StreamRng::new(13, 0);
        let arc = arc_trajectory(&[0.0, 0.0], &[2.0, 2.0], 16, 0, &mut rng).unwrap();
        let line = line_trajectory(&[0.0, 0.0], &[2.0, 2.0], 16).unwrap();
        assert_eq!(arc, line);
    }

    #[test]
    fn arc_rejects_bad_dims() {
        let mut rng = StreamRng::new(14, 0);
        assert!(arc_trajectory(&[0.0], &[1.0], 10, 1, &mut rng).is_err());
        assert!(arc_trajectory(&[0.0, 0.0], &[1.0, 0.0], 10, 2, &mut rng).is_err());
    }

    #[test]
    fn arc_directions_are_orthonormal_to_chord() {
        // Indirect check: displacing along the arc never changes the chord
        // projection beyond the along-chord profile, so the midpoint sits at
        // distance radius * planes.sqrt() from the chord midpoint.
        let mut rng = StreamRng::new(15, 0);
        let x0 = vec![0.0; 8];
        let mut x1 = vec![0.0; 8];
        x1[0] = 2.0;
        let planes = 3;
        let p = arc_trajectory(&x0, &x1, 2, planes, &mut rng).unwrap();
        let mid = p.point(1);
        // Along-chord coordinate at t = 1/2 is half the chord.
        assert_relative_eq!(mid[0], 1.0, epsilon = 1e-12);
        let perp: f64 = mid.iter().skip(1).map(|v| v * v).sum::<f64>();
        assert_relative_eq!(perp.sqrt(), (planes as f64).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn refinement_preserves_straight_segment_length() {
        let coarse = line_trajectory(&[1.0, -2.0, 0.5], &[4.0, 2.0, -1.5], 3).unwrap();
        let fine = line_trajectory(&[1.0, -2.0, 0.5], &[4.0, 2.0, -1.5], 96).unwrap();
        assert_relative_eq!(arc_length(&coarse), arc_length(&fine), max_relative = 1e-12);
    }
}
