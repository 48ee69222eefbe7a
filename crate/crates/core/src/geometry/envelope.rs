//! Brute-force construction of minimal α-extensions.
//!
//! Nothing here uses the closed forms of [`crate::geometry::extension`]: the
//! higher segments are found by solving "`z` lies on the free boundary" for
//! each fixed-boundary anchor `y` by bracketed bisection along the free
//! boundary, and the extension boundary is the pointwise extremum over those
//! segments. This is the oracle the closed forms are checked against.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::lens::{Lens, Point2, Segment};
use crate::numeric::{bisect, golden_max, log_grid};

/// A higher segment `[x, y]` together with its α-section point `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HigherSegment {
    pub x: Point2,
    pub y: Point2,
    pub z: Point2,
}

impl HigherSegment {
    /// Ordinate of the segment's line at abscissa `u`, if `u` is within its span.
    pub fn height_at(&self, u: f64) -> Option<f64> {
        let (lo, hi) = if self.x.x1 < self.y.x1 { (self.x.x1, self.y.x1) } else { (self.y.x1, self.x.x1) };
        if u < lo || u > hi || hi == lo {
            return None;
        }
        let lambda = (u - self.y.x1) / (self.x.x1 - self.y.x1);
        Some(self.y.x2 + lambda * (self.x.x2 - self.y.x2))
    }
}

/// Sampling specification for the envelope and extension checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeGrid {
    /// Output abscissa range.
    pub x_min: f64,
    pub x_max: f64,
    /// Number of output abscissas.
    pub points: usize,
    /// Number of fixed-boundary anchors.
    pub anchors: usize,
    /// Scan density along the free boundary, points per decade of offset.
    pub scan_per_decade: usize,
}

impl EnvelopeGrid {
    pub fn for_lens(lens: &Lens) -> EnvelopeGrid {
        let (x_min, x_max) = match *lens {
            Lens::Parabolic { eps } => (-2.0 * eps, 2.0 * eps),
            _ => (0.5, 2.0),
        };
        EnvelopeGrid { x_min, x_max, points: 101, anchors: 256, scan_per_decade: 16 }
    }

    fn validate(&self, lens: &Lens) -> Result<()> {
        if !(self.x_max > self.x_min) || self.points < 2 || self.anchors < 3 || self.scan_per_decade < 2 {
            return Err(Error::InvalidParameter(format!("bad envelope grid {self:?}")));
        }
        if lens.is_power_family() && !(self.x_min > 0.0) {
            return Err(Error::InvalidParameter("power lens grids need x_min > 0".into()));
        }
        Ok(())
    }

    fn abscissas(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|i| self.x_min + (self.x_max - self.x_min) * i as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Abscissas of candidate free-boundary points, ordered outward from the anchor.
fn side_scan(lens: &Lens, t: f64, side: Side, per_decade: usize) -> Vec<f64> {
    match *lens {
        Lens::Parabolic { eps } => {
            let offsets = log_grid(1e-6 * eps, 1e4 * eps, per_decade);
            let sign = if side == Side::Right { 1.0 } else { -1.0 };
            offsets.into_iter().map(|d| t + sign * d).collect()
        }
        _ => {
            let ratios = log_grid(1.0 + 1e-9, 1e8, per_decade);
            match side {
                Side::Right => ratios.into_iter().map(|r| t * r).collect(),
                Side::Left => ratios.into_iter().map(|r| t / r).collect(),
            }
        }
    }
}

fn section(lens: &Lens, alpha: f64, y: &Point2, s: f64) -> (Point2, Point2) {
    let x = lens.free_point(s).expect("lens with a free boundary");
    (x, x.lerp(y, alpha))
}

/// Free-boundary points `x` on one side of the anchor for which
/// `alpha x + (1 - alpha) y` lands on the free boundary.
fn higher_on_side(lens: &Lens, alpha: f64, t: f64, side: Side, per_decade: usize) -> Vec<HigherSegment> {
    let y = lens.fixed_point(t);
    let f = |s: f64| lens.free_excess(&section(lens, alpha, &y, s).1);
    let scan = side_scan(lens, t, side, per_decade);
    let vals: Vec<f64> = scan.iter().map(|&s| f(s)).collect();
    let mut out = Vec::new();
    for i in 0..scan.len().saturating_sub(1) {
        let (a, b) = (vals[i], vals[i + 1]);
        if !(a.is_finite() && b.is_finite()) || a.signum() == b.signum() || a == 0.0 {
            continue;
        }
        let (lo, hi) = if scan[i] < scan[i + 1] { (scan[i], scan[i + 1]) } else { (scan[i + 1], scan[i]) };
        if let Ok(s) = bisect(f, lo, hi, 1e-16) {
            let (x, z) = section(lens, alpha, &y, s);
            out.push(HigherSegment { x, y, z });
        }
    }
    out
}

/// All higher segments anchored at the fixed-boundary point with abscissa `t`.
pub fn higher_segments_at(lens: &Lens, alpha: f64, t: f64, per_decade: usize) -> Vec<HigherSegment> {
    if matches!(lens, Lens::EpigraphPower { .. }) {
        return Vec::new();
    }
    let mut v = higher_on_side(lens, alpha, t, Side::Left, per_decade);
    v.extend(higher_on_side(lens, alpha, t, Side::Right, per_decade));
    v
}

/// Sampled boundary of the minimal α-extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    /// Polyline approximating the extension's free boundary, abscissas ascending.
    pub points: Vec<Point2>,
    /// The higher segments found at the anchors.
    pub segments: Vec<HigherSegment>,
}

impl Envelope {
    /// CSV with header `x1,x2`, one point per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x1,x2\n");
        for p in &self.points {
            s.push_str(&format!("{},{}\n", p.x1, p.x2));
        }
        s
    }
}

fn anchor_range(lens: &Lens, alpha: f64, grid: &EnvelopeGrid) -> Result<Vec<f64>> {
    let t0 = if lens.is_power_family() { 1.0 } else { 0.0 };
    let probe = higher_segments_at(lens, alpha, t0, grid.scan_per_decade);
    if probe.is_empty() {
        return Err(Error::EnvelopeBracketing(format!(
            "no higher segment bracketed at anchor {t0}; increase scan density"
        )));
    }
    let n = grid.anchors - 1;
    if lens.is_power_family() {
        let spread = probe.iter().map(|h| (h.x.x1 / h.y.x1).max(h.y.x1 / h.x.x1)).fold(1.0, f64::max) * 1.01;
        let (l0, l1) = ((grid.x_min / spread).ln(), (grid.x_max * spread).ln());
        Ok((0..=n).map(|i| (l0 + (l1 - l0) * i as f64 / n as f64).exp()).collect())
    } else {
        let spread = probe.iter().map(|h| (h.x.x1 - h.y.x1).abs()).fold(0.0, f64::max) * 1.01;
        let (l0, l1) = (grid.x_min - spread, grid.x_max + spread);
        Ok((0..=n).map(|i| l0 + (l1 - l0) * i as f64 / n as f64).collect())
    }
}

/// Numeric boundary of the minimal α-extension of a parabolic or power lens.
///
/// For each output abscissa the extremal ordinate (toward the free side) over
/// the lens and all higher segments is taken on the anchor grid, then refined
/// by golden-section search over the anchor abscissa around the best anchor.
pub fn numeric_envelope(lens: &Lens, alpha: f64, grid: &EnvelopeGrid) -> Result<Envelope> {
    if matches!(lens, Lens::EpigraphPower { .. }) {
        return Err(Error::InvalidParameter("the epigraph has no free boundary".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    grid.validate(lens)?;
    let per_decade = grid.scan_per_decade;
    // +1 when the free boundary is above the fixed one
    let sigma = match lens.free_coef() {
        Some(c) if c < lens.fixed_coef().unwrap() => -1.0,
        _ => 1.0,
    };
    let anchors = anchor_range(lens, alpha, grid)?;
    let per_anchor: Vec<[Vec<HigherSegment>; 2]> = anchors
        .iter()
        .map(|&t| {
            [
                higher_on_side(lens, alpha, t, Side::Left, per_decade),
                higher_on_side(lens, alpha, t, Side::Right, per_decade),
            ]
        })
        .collect();
    if per_anchor.iter().all(|s| s[0].is_empty() && s[1].is_empty()) {
        return Err(Error::EnvelopeBracketing("no higher segments found on the anchor grid".into()));
    }

    let mut points = Vec::with_capacity(grid.points);
    for u in grid.abscissas() {
        let mut best = sigma * lens.free_point(u).unwrap().x2;
        for (side_idx, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let mut coarse: Option<(usize, f64)> = None;
            for (i, segs) in per_anchor.iter().enumerate() {
                for h in &segs[side_idx] {
                    if let Some(v) = h.height_at(u) {
                        if coarse.map_or(true, |(_, b)| sigma * v > b) {
                            coarse = Some((i, sigma * v));
                        }
                    }
                }
            }
            let Some((i, v)) = coarse else { continue };
            best = best.max(v);
            let lo = anchors[i.saturating_sub(1)];
            let hi = anchors[(i + 1).min(anchors.len() - 1)];
            let refined = golden_max(
                |t| {
                    higher_on_side(lens, alpha, t, side, per_decade)
                        .iter()
                        .filter_map(|h| h.height_at(u))
                        .map(|v| sigma * v)
                        .fold(f64::NEG_INFINITY, f64::max)
                },
                lo,
                hi,
                1e-12,
            );
            best = best.max(refined.value);
        }
        points.push(Point2::new(u, sigma * best));
    }
    let segments = per_anchor.into_iter().flat_map(|[l, r]| l.into_iter().chain(r)).collect();
    Ok(Envelope { points, segments })
}

fn anchors_for_check(lens: &Lens, grid: &EnvelopeGrid) -> Vec<f64> {
    let n = grid.anchors.max(2) - 1;
    (0..=n)
        .map(|i| grid.x_min + (grid.x_max - grid.x_min) * i as f64 / n as f64)
        .filter(|&t| !lens.is_power_family() || t > 0.0)
        .collect()
}

/// Sampled check that `outer` is an α-extension of `inner`.
///
/// For every anchor `y` on the fixed boundary and every free-boundary point
/// `x` (the exact higher-segment roots plus the scan grid), whenever `[z, y]`
/// lies in `inner` the segment `[x, y]` must lie in `outer`. The higher
/// segments carry the binding cases; the scan points catch the regime where
/// no higher segment exists on one side.
pub fn is_alpha_extension(inner: &Lens, outer: &Lens, alpha: f64, grid: &EnvelopeGrid) -> Result<bool> {
    if !inner.same_fixed_boundary(outer) {
        return Err(Error::MismatchedFixedBoundary(format!("{inner:?} vs {outer:?}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if matches!(inner, Lens::EpigraphPower { .. }) {
        return Ok(matches!(outer, Lens::EpigraphPower { .. }));
    }
    if outer.parameter() < inner.parameter() {
        return Ok(false);
    }
    let within = |x: &Point2, y: &Point2| match Segment::new(*x, *y) {
        Ok(seg) => outer.contains_segment(&seg),
        Err(_) => true,
    };
    for t in anchors_for_check(inner, grid) {
        let y = inner.fixed_point(t);
        for h in higher_segments_at(inner, alpha, t, grid.scan_per_decade) {
            if !within(&h.x, &h.y) {
                return Ok(false);
            }
        }
        for side in [Side::Left, Side::Right] {
            for s in side_scan(inner, t, side, grid.scan_per_decade) {
                let (x, z) = section(inner, alpha, &y, s);
                let hypothesis = inner.contains(&z)
                    && Segment::new(z, y).map_or(true, |seg| inner.contains_segment(&seg));
                if hypothesis && !within(&x, &y) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// An α-extension is a β-extension for every `beta > alpha`. Returns whether
/// that implication holds on the sampled `betas` for this pair of lenses.
pub fn extension_monotone_in_alpha(
    inner: &Lens,
    outer: &Lens,
    alpha: f64,
    betas: &[f64],
    grid: &EnvelopeGrid,
) -> Result<bool> {
    if !is_alpha_extension(inner, outer, alpha, grid)? {
        return Ok(true);
    }
    for &beta in betas.iter().filter(|&&b| b > alpha && b < 1.0) {
        if !is_alpha_extension(inner, outer, beta, grid)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lens::is_higher_segment;

    #[test]
    fn horizontal_parabolic_segment_found() {
        let lens = Lens::parabolic(1.0).unwrap();
        let y1 = -3.0 * 2f64.sqrt() / 4.0;
        let segs = higher_segments_at(&lens, 0.5, y1, 16);
        assert_eq!(segs.len(), 2);
        let right = segs.iter().find(|h| h.x.x1 > y1).unwrap();
        assert!((right.x.x1 - 2f64.sqrt() / 4.0).abs() < 1e-12);
        assert!((right.x.x2 - 9.0 / 8.0).abs() < 1e-12);
        for h in &segs {
            assert!(is_higher_segment(&lens, 0.5, &h.x, &h.y));
        }
    }

    #[test]
    fn power_segment_ratios_match_eq2_roots() {
        let lens = Lens::power(2.0, 2.0).unwrap();
        let segs = higher_segments_at(&lens, 0.75, 1.0, 16);
        let mut ratios: Vec<f64> = segs.iter().map(|h| h.x.x1).collect();
        ratios.sort_by(f64::total_cmp);
        let s = (2.0f64 / 3.0).sqrt();
        assert_eq!(ratios.len(), 2);
        assert!((ratios[0] - (1.0 - s)).abs() < 1e-12);
        assert!((ratios[1] - (1.0 + s)).abs() < 1e-12);
    }

    #[test]
    fn envelope_parabolic_origin_height() {
        let lens = Lens::parabolic(1.0).unwrap();
        let grid = EnvelopeGrid { x_min: -1.0, x_max: 1.0, points: 21, anchors: 64, scan_per_decade: 16 };
        let env = numeric_envelope(&lens, 0.5, &grid).unwrap();
        let mid = env.points[10];
        assert_eq!(mid.x1, 0.0);
        assert!((mid.x2 - 9.0 / 8.0).abs() < 1e-6, "{mid:?}");
    }

    #[test]
    fn envelope_near_unit_alpha_hugs_lens() {
        let lens = Lens::parabolic(1.0).unwrap();
        let grid = EnvelopeGrid { x_min: -1.0, x_max: 1.0, points: 11, anchors: 64, scan_per_decade: 16 };
        let env = numeric_envelope(&lens, 0.999, &grid).unwrap();
        for p in env.points {
            assert!((p.x2 - p.x1 * p.x1 - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn envelope_hyperbola_product() {
        let lens = Lens::power(2.0, -1.0).unwrap();
        let grid = EnvelopeGrid { x_min: 0.5, x_max: 2.0, points: 11, anchors: 64, scan_per_decade: 16 };
        let env = numeric_envelope(&lens, 0.5, &grid).unwrap();
        let max = env.points.iter().map(|p| p.x1 * p.x2).fold(0.0, f64::max);
        assert!((max - 2.125).abs() < 1e-6, "{max}");
    }

    #[test]
    fn csv_has_header_and_sorted_rows() {
        let lens = Lens::parabolic(1.0).unwrap();
        let grid = EnvelopeGrid { x_min: -1.0, x_max: 1.0, points: 5, anchors: 16, scan_per_decade: 8 };
        let csv = numeric_envelope(&lens, 0.5, &grid).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x1,x2"));
        let xs: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(xs.len(), 5);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn extension_examples() {
        let inner = Lens::parabolic(1.0).unwrap();
        let grid = EnvelopeGrid::for_lens(&inner);
        assert!(is_alpha_extension(&inner, &Lens::parabolic(1.0607).unwrap(), 0.5, &grid).unwrap());
        assert!(!is_alpha_extension(&inner, &Lens::parabolic(1.05).unwrap(), 0.5, &grid).unwrap());
        let outer = Lens::parabolic(1.0607).unwrap();
        assert!(is_alpha_extension(&inner, &outer, 0.6, &grid).unwrap());
        assert!(extension_monotone_in_alpha(&inner, &outer, 0.5, &[0.6, 0.7, 0.9], &grid).unwrap());
    }

    #[test]
    fn epigraph_regime_requires_epigraph() {
        let inner = Lens::power(2.0, 2.0).unwrap();
        let grid = EnvelopeGrid::for_lens(&inner);
        let big = Lens::power(1000.0, 2.0).unwrap();
        assert!(!is_alpha_extension(&inner, &big, 0.4, &grid).unwrap());
        let epi = Lens::epigraph(2.0).unwrap();
        assert!(is_alpha_extension(&inner, &epi, 0.4, &grid).unwrap());
    }

    #[test]
    fn mismatched_fixed_boundary_is_error() {
        let a = Lens::parabolic(1.0).unwrap();
        let b = Lens::power(2.0, -1.0).unwrap();
        let grid = EnvelopeGrid::for_lens(&a);
        assert!(matches!(is_alpha_extension(&a, &b, 0.5, &grid), Err(Error::MismatchedFixedBoundary(_))));
    }
}
