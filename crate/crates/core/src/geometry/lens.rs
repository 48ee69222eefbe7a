//! Lens domains and the planar primitives they act on.
//!
//! A lens is the closed region between a fixed boundary (the boundary of the
//! outer convex domain) and a free boundary (the boundary of the inner one).
//! Two families are built in:
//!
//! - parabolic: `x1^2 <= x2 <= x1^2 + eps^2`, the lenses of quadratic BMO;
//! - power: `lower * x1^q <= x2 <= upper * x1^q` with `x1 > 0`, the lenses of
//!   the `A_{p1,p2}` classes.
//!
//! For `q > 1` and `q < 0` the curve `x1^q` is convex, so the fixed boundary is
//! the lower curve. For `0 < q < 1` it is concave and the roles swap: the fixed
//! boundary is the upper curve. `EpigraphPower` is the degenerate extension
//! that keeps only the fixed-boundary constraint.
//!
//! Membership is closed and uses a relative band of [`BOUNDARY_TOL`].

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{golden_max, log_grid, scan_roots};

/// Relative tolerance for boundary membership.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// A point of the plane. Serialized as `[x1, x2]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (*self - *other).norm()
    }

    /// `lambda * self + (1 - lambda) * other`
    pub fn lerp(&self, other: &Point2, lambda: f64) -> Point2 {
        Point2::new(
            lambda * self.x1 + (1.0 - lambda) * other.x1,
            lambda * self.x2 + (1.0 - lambda) * other.x2,
        )
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x1, p.x2]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x1 * k, self.x2 * k)
    }
}

/// A non-degenerate straight segment `[p, r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    p: Point2,
    r: Point2,
}

impl Segment {
    pub fn new(p: Point2, r: Point2) -> Result<Self> {
        if p == r {
            return Err(Error::DegenerateSegment);
        }
        if !p.is_finite() || !r.is_finite() {
            return Err(Error::InvalidParameter("segment endpoint is not finite".into()));
        }
        Ok(Self { p, r })
    }

    pub fn start(&self) -> Point2 {
        self.p
    }

    pub fn end(&self) -> Point2 {
        self.r
    }

    /// Point at parameter `t` in `[0, 1]`, `t = 0` being the start.
    pub fn at(&self, t: f64) -> Point2 {
        self.r.lerp(&self.p, t)
    }
}

/// The built-in lens families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lens {
    /// `x1^2 <= x2 <= x1^2 + eps^2`.
    Parabolic { eps: f64 },
    /// `x1 > 0`, `lower * x1^q <= x2 <= upper * x1^q`.
    Power { q: f64, lower: f64, upper: f64 },
    /// The part of `x1 > 0, x2 > 0` on the outer side of `x2 = coef * x1^q`.
    EpigraphPower { q: f64, coef: f64 },
}

fn convex_power(q: f64) -> bool {
    !(q > 0.0 && q < 1.0)
}

fn check_q(q: f64) -> Result<()> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("power exponent q = {q} must be finite and nonzero")));
    }
    Ok(())
}

impl Lens {
    pub fn parabolic(eps: f64) -> Result<Lens> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        Ok(Lens::Parabolic { eps })
    }

    /// The lens `Omega_C^q`: `x1^q <= x2 <= C x1^q`.
    pub fn power(c: f64, q: f64) -> Result<Lens> {
        Lens::power_bounds(q, 1.0, c)
    }

    pub fn power_bounds(q: f64, lower: f64, upper: f64) -> Result<Lens> {
        check_q(q)?;
        if !(lower > 0.0) || !(upper > lower) || !upper.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power lens needs 0 < lower < upper, got lower = {lower}, upper = {upper}"
            )));
        }
        Ok(Lens::Power { q, lower, upper })
    }

    /// `{x1 > 0, x2 >= x1^q}` for convex `x1^q`.
    pub fn epigraph(q: f64) -> Result<Lens> {
        check_q(q)?;
        Ok(Lens::EpigraphPower { q, coef: 1.0 })
    }

    pub fn is_power_family(&self) -> bool {
        !matches!(self, Lens::Parabolic { .. })
    }

    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Lens::Parabolic { .. } => None,
            Lens::Power { q, .. } | Lens::EpigraphPower { q, .. } => Some(q),
        }
    }

    /// Coefficient of the fixed boundary curve of a power-family lens.
    pub fn fixed_coef(&self) -> Option<f64> {
        match *self {
            Lens::Parabolic { .. } => None,
            Lens::Power { q, lower, upper } => Some(if convex_power(q) { lower } else { upper }),
            Lens::EpigraphPower { coef, .. } => Some(coef),
        }
    }

    pub fn free_coef(&self) -> Option<f64> {
        match *self {
            Lens::Power { q, lower, upper } => Some(if convex_power(q) { upper } else { lower }),
            _ => None,
        }
    }

    /// The size parameter: `eps` for parabolic lenses, the ratio
    /// `upper / lower` for power lenses, infinity for the epigraph.
    pub fn parameter(&self) -> f64 {
        match *self {
            Lens::Parabolic { eps } => eps,
            Lens::Power { lower, upper, .. } => upper / lower,
            Lens::EpigraphPower { .. } => f64::INFINITY,
        }
    }

    /// Same fixed boundary, different size parameter.
    pub fn with_parameter(&self, param: f64) -> Result<Lens> {
        match *self {
            Lens::Parabolic { .. } => Lens::parabolic(param),
            Lens::Power { q, .. } | Lens::EpigraphPower { q, .. } => {
                let f = self.fixed_coef().expect("power family");
                if param.is_infinite() {
                    return Ok(Lens::EpigraphPower { q, coef: f });
                }
                if convex_power(q) {
                    Lens::power_bounds(q, f, f * param)
                } else {
                    Lens::power_bounds(q, f / param, f)
                }
            }
        }
    }

    pub fn same_fixed_boundary(&self, other: &Lens) -> bool {
        match (self, other) {
            (Lens::Parabolic { .. }, Lens::Parabolic { .. }) => true,
            (Lens::Parabolic { .. }, _) | (_, Lens::Parabolic { .. }) => false,
            _ => {
                let (qa, qb) = (self.exponent().unwrap(), other.exponent().unwrap());
                let (fa, fb) = (self.fixed_coef().unwrap(), other.fixed_coef().unwrap());
                (qa - qb).abs() <= 1e-12 * qa.abs() && (fa - fb).abs() <= 1e-12 * fa.abs()
            }
        }
    }

    /// Ratio `x2 / x1^q` of a point with `x1 > 0`.
    fn power_ratio(q: f64, p: &Point2) -> f64 {
        p.x2 / p.x1.powf(q)
    }

    /// Closed membership with the relative band.
    pub fn contains(&self, p: &Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        match *self {
            Lens::Parabolic { eps } => {
                let d = p.x2 - p.x1 * p.x1;
                let slack = BOUNDARY_TOL * (1.0 + p.x2.abs().max(eps * eps));
                d >= -slack && d <= eps * eps + slack
            }
            Lens::Power { q, lower, upper } => {
                if !(p.x1 > 0.0) || !(p.x2 > 0.0) {
                    return false;
                }
                let r = Self::power_ratio(q, p);
                r >= lower * (1.0 - BOUNDARY_TOL) && r <= upper * (1.0 + BOUNDARY_TOL)
            }
            Lens::EpigraphPower { q, coef } => {
                if !(p.x1 > 0.0) || !(p.x2 > 0.0) {
                    return false;
                }
                let r = Self::power_ratio(q, p);
                if convex_power(q) {
                    r >= coef * (1.0 - BOUNDARY_TOL)
                } else {
                    r <= coef * (1.0 + BOUNDARY_TOL)
                }
            }
        }
    }

    /// Whether `p` lies on the fixed boundary (within the relative band).
    pub fn on_fixed(&self, p: &Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        match *self {
            Lens::Parabolic { .. } => {
                (p.x2 - p.x1 * p.x1).abs() <= BOUNDARY_TOL * (1.0 + p.x2.abs())
            }
            _ => {
                let (q, f) = (self.exponent().unwrap(), self.fixed_coef().unwrap());
                p.x1 > 0.0 && (Self::power_ratio(q, p) / f - 1.0).abs() <= BOUNDARY_TOL
            }
        }
    }

    /// Whether `p` lies on the free boundary. The epigraph has none.
    pub fn on_free(&self, p: &Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        match *self {
            Lens::Parabolic { eps } => {
                (p.x2 - p.x1 * p.x1 - eps * eps).abs() <= BOUNDARY_TOL * (1.0 + p.x2.abs())
            }
            Lens::Power { q, .. } => {
                let c = self.free_coef().unwrap();
                p.x1 > 0.0 && (Self::power_ratio(q, p) / c - 1.0).abs() <= BOUNDARY_TOL
            }
            Lens::EpigraphPower { .. } => false,
        }
    }

    /// Point of the fixed boundary with abscissa `t` (`t > 0` for power lenses).
    pub fn fixed_point(&self, t: f64) -> Point2 {
        match *self {
            Lens::Parabolic { .. } => Point2::new(t, t * t),
            _ => Point2::new(t, self.fixed_coef().unwrap() * t.powf(self.exponent().unwrap())),
        }
    }

    /// Point of the free boundary with abscissa `t`, if there is a free boundary.
    pub fn free_point(&self, t: f64) -> Option<Point2> {
        match *self {
            Lens::Parabolic { eps } => Some(Point2::new(t, t * t + eps * eps)),
            Lens::Power { q, .. } => Some(Point2::new(t, self.free_coef().unwrap() * t.powf(q))),
            Lens::EpigraphPower { .. } => None,
        }
    }

    /// Signed excess over the free boundary in additive form.
    ///
    /// Positive outside the lens on the free side. The function is concave
    /// along every straight line in the half-plane `x1 > 0` (whole plane for
    /// parabolic lenses), which makes segment checks a unimodal search.
    pub fn free_excess(&self, p: &Point2) -> f64 {
        match *self {
            Lens::Parabolic { eps } => p.x2 - p.x1 * p.x1 - eps * eps,
            Lens::Power { q, .. } => {
                let c = self.free_coef().unwrap();
                if convex_power(q) {
                    p.x2 - c * p.x1.powf(q)
                } else {
                    c * p.x1.powf(q) - p.x2
                }
            }
            Lens::EpigraphPower { .. } => f64::NEG_INFINITY,
        }
    }

    /// Signed distance-like violation: positive outside the lens, nonpositive
    /// inside. Additive defect for parabolic lenses, log-ratio for power ones
    /// (so it is invariant under the power orbit).
    pub fn violation(&self, p: &Point2) -> f64 {
        let (fixed, free) = self.side_violations(p);
        fixed.max(free)
    }

    /// The violation split into the fixed-side and free-side parts.
    pub fn side_violations(&self, p: &Point2) -> (f64, f64) {
        if !p.is_finite() {
            return (f64::INFINITY, f64::INFINITY);
        }
        match *self {
            Lens::Parabolic { eps } => {
                let d = p.x2 - p.x1 * p.x1;
                (-d, d - eps * eps)
            }
            _ => {
                if !(p.x1 > 0.0) || !(p.x2 > 0.0) {
                    return (f64::INFINITY, f64::INFINITY);
                }
                let q = self.exponent().unwrap();
                let lr = p.x2.ln() - q * p.x1.ln();
                let sign = if convex_power(q) { 1.0 } else { -1.0 };
                let fixed = sign * (self.fixed_coef().unwrap().ln() - lr);
                let free = match self.free_coef() {
                    Some(c) => sign * (lr - c.ln()),
                    None => f64::NEG_INFINITY,
                };
                (fixed, free)
            }
        }
    }

    /// Lens gauge of a point: the size parameter of the smallest lens with the
    /// same fixed boundary that contains `p`.
    ///
    /// Parabolic: `sqrt(x2 - x1^2)`. Power: `x2 / (fixed x1^q)` for convex
    /// powers and its reciprocal for concave ones. Points on the wrong side of
    /// the fixed boundary get the gauge of their mirror, which is never below
    /// the fixed-boundary value; callers that care check [`Lens::contains`].
    pub fn gauge(&self, p: &Point2) -> f64 {
        match *self {
            Lens::Parabolic { .. } => (p.x2 - p.x1 * p.x1).max(0.0).sqrt(),
            _ => {
                if !(p.x1 > 0.0) || !(p.x2 > 0.0) {
                    return f64::INFINITY;
                }
                let (q, f) = (self.exponent().unwrap(), self.fixed_coef().unwrap());
                let r = Self::power_ratio(q, p) / f;
                if convex_power(q) {
                    r
                } else {
                    1.0 / r
                }
            }
        }
    }

    /// Exact segment containment for the built-in families.
    ///
    /// Parabolic: the defect `x2 - x1^2` along `[p, r]` is the quadratic
    /// `(1-t) d_p + t d_r + t(1-t)(dx1)^2`, maximized in closed form. Power:
    /// both endpoints must be inside; the fixed-side constraint is then
    /// automatic and the free-side excess is concave, so a golden-section
    /// search locates its maximum.
    pub fn contains_segment(&self, seg: &Segment) -> bool {
        let (p, r) = (seg.start(), seg.end());
        if !self.contains(&p) || !self.contains(&r) {
            return false;
        }
        match *self {
            Lens::Parabolic { eps } => {
                let dp = p.x2 - p.x1 * p.x1;
                let dr = r.x2 - r.x1 * r.x1;
                let dx = r.x1 - p.x1;
                let big_d = dx * dx;
                let t = if big_d > 0.0 {
                    (0.5 + (dr - dp) / (2.0 * big_d)).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let m = seg.r.lerp(&seg.p, t);
                let defect = (1.0 - t) * dp + t * dr + t * (1.0 - t) * big_d;
                let slack = BOUNDARY_TOL * (1.0 + m.x2.abs().max(eps * eps));
                defect <= eps * eps + slack
            }
            Lens::Power { .. } => {
                let best = golden_max(|t| self.free_excess(&seg.at(t)), 0.0, 1.0, 1e-12);
                best.value <= 0.0 || self.contains(&seg.at(best.arg))
            }
            Lens::EpigraphPower { .. } => true,
        }
    }

    /// Fixed-boundary points `a`, `b` whose midpoint is `p`, ordered with
    /// `a.x1 > b.x1`. `None` if no such chord exists or `p` is outside.
    pub fn midpoint_chord(&self, p: &Point2) -> Option<(Point2, Point2)> {
        if !self.contains(p) {
            return None;
        }
        match *self {
            Lens::Parabolic { .. } => {
                let delta = (p.x2 - p.x1 * p.x1).max(0.0).sqrt();
                if delta == 0.0 {
                    return Some((*p, *p));
                }
                Some((self.fixed_point(p.x1 + delta), self.fixed_point(p.x1 - delta)))
            }
            _ => {
                let (q, f) = (self.exponent().unwrap(), self.fixed_coef().unwrap());
                let target = Self::power_ratio(q, p) / f;
                if (target - 1.0).abs() <= BOUNDARY_TOL {
                    return Some((*p, *p));
                }
                // ((1+d)^q + (1-d)^q) / 2 is monotone in d on (0, 1)
                let h = |d: f64| 0.5 * ((1.0 + d).powf(q) + (1.0 - d).powf(q)) - target;
                let hi = 1.0 - 1e-15;
                let grid: Vec<f64> = (0..=256).map(|i| hi * i as f64 / 256.0).collect();
                let d = scan_roots(h, &grid, 1e-15).into_iter().find(|&d| d > 0.0)?;
                Some((self.fixed_point(p.x1 * (1.0 + d)), self.fixed_point(p.x1 * (1.0 - d))))
            }
        }
    }

    /// The chord of the fixed boundary cut out by the tangent to the free
    /// boundary at `x`. Returns `(a, b, lambda)` with `x = lambda a + (1 - lambda) b`
    /// and `a.x1 > b.x1`. The chord lies in the lens and touches the free
    /// boundary only at `x`.
    pub fn tangent_chord(&self, x: &Point2) -> Option<(Point2, Point2, f64)> {
        match *self {
            Lens::Parabolic { eps } => {
                let a = self.fixed_point(x.x1 + eps);
                let b = self.fixed_point(x.x1 - eps);
                Some((a, b, 0.5))
            }
            Lens::Power { q, .. } => {
                if !(x.x1 > 0.0) {
                    return None;
                }
                let k = self.fixed_coef().unwrap() / self.free_coef().unwrap();
                // rho = w / x1 where the tangent meets k rho^q = 1 + q (rho - 1)
                let h = |rho: f64| k * rho.powf(q) - 1.0 - q * (rho - 1.0);
                let grid = log_grid(1e-12, 1e12, 64);
                let roots = scan_roots(h, &grid, 1e-15);
                let lo = roots.iter().copied().filter(|&r| r < 1.0 - 1e-12).fold(None, |m: Option<f64>, r| {
                    Some(m.map_or(r, |m| m.max(r)))
                })?;
                let hi = roots.iter().copied().filter(|&r| r > 1.0 + 1e-12).fold(None, |m: Option<f64>, r| {
                    Some(m.map_or(r, |m| m.min(r)))
                })?;
                let a = self.fixed_point(x.x1 * hi);
                let b = self.fixed_point(x.x1 * lo);
                let lambda = (x.x1 - b.x1) / (a.x1 - b.x1);
                Some((a, b, lambda))
            }
            Lens::EpigraphPower { .. } => None,
        }
    }
}

/// Sampled segment containment: every point of a uniform parameter grid with
/// `samples` points, endpoints included, lies in the lens.
///
/// This is an approximation; [`Lens::contains_segment`] is exact for the
/// built-in families.
pub fn segment_in_lens(lens: &Lens, seg: &Segment, samples: usize) -> Result<bool> {
    if samples < 2 {
        return Err(Error::InvalidParameter(format!("samples = {samples} must be at least 2")));
    }
    let last = (samples - 1) as f64;
    Ok((0..samples).all(|i| lens.contains(&seg.at(i as f64 / last))))
}

/// Whether `[x, y]` is a higher segment: `y` on the fixed boundary, `x` and
/// `z = alpha x + (1 - alpha) y` on the free boundary and `[z, y]` inside.
pub fn is_higher_segment(lens: &Lens, alpha: f64, x: &Point2, y: &Point2) -> bool {
    if !(alpha > 0.0 && alpha < 1.0) {
        return false;
    }
    if !lens.on_fixed(y) || !lens.on_free(x) {
        return false;
    }
    let z = x.lerp(y, alpha);
    if !lens.on_free(&z) {
        return false;
    }
    match Segment::new(z, *y) {
        Ok(seg) => lens.contains_segment(&seg),
        Err(_) => false,
    }
}

/// `(u1, u2) -> (u1 + t, u2 + 2 u1 t + t^2)`, the symmetry group of parabolic lenses.
pub fn affine_orbit_parabolic(p: &Point2, t: f64) -> Point2 {
    Point2::new(p.x1 + t, p.x2 + 2.0 * p.x1 * t + t * t)
}

/// `(u1, u2) -> (t u1, t^q u2)`, the symmetry group of power lenses.
pub fn affine_orbit_power(p: &Point2, t: f64, q: f64) -> Result<Point2> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("power orbit needs t > 0, got {t}")));
    }
    Ok(Point2::new(t * p.x1, t.powf(q) * p.x2))
}
