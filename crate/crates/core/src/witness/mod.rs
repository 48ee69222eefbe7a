//! Extremal functions: the counterexample construction behind the
//! rearrangement theorem, the closed-form BMO and `A_2` extremals, and a
//! random sampler of lens-class functions.

mod random;

use serde::Serialize;
use serde_json::json;

pub use random::random_class_function;

use crate::error::{Error, Result};
use crate::geometry::{
    higher_segments_at, is_alpha_extension, is_higher_segment, min_extension, min_extension_a2, solve_eq2,
    EnvelopeGrid, Lens, Point2, Segment,
};
use crate::numeric::bisect;
use crate::martingale::{admissible_alphas, atom_averages, dyadic_filtration, union_ratios, Filtration};
use crate::spaces::step::check_grid;
use crate::spaces::{
    ap_characteristic_dyadic, ap_continuous_search, class_characteristic, continuous_bmo_search,
    dyadic_bmo_seminorm, lens_rearrangement, membership_in_class, monotone_rearrangement, ApParams,
    DyadicStepFunction, StepFunction1D,
};

/// Tolerance for the exactness checks on configurations.
const CONFIG_TOL: f64 = 1e-9;

/// Points of the counterexample construction: `z = alpha x + (1 - alpha) y`
/// with `y` on the fixed boundary, and a chord `[a, b]` of the fixed
/// boundary inside the lens through `x`. The function equals `y` outside the
/// atom `omega` and on the first children of `omega` making up a `1 - alpha`
/// share of it; the remaining children carry `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessConfig {
    pub x: Point2,
    pub y: Point2,
    pub z: Point2,
    pub a: Point2,
    pub b: Point2,
    pub alpha: f64,
    /// `(level, id)` of the atom `omega`.
    pub omega: (usize, usize),
}

impl WitnessConfig {
    /// Share of `a` on the remainder: `x = lambda a + (1 - lambda) b`.
    pub fn lambda(&self) -> f64 {
        let d = self.a.x1 - self.b.x1;
        if d == 0.0 {
            1.0
        } else {
            (self.x.x1 - self.b.x1) / d
        }
    }

    /// Check the configuration invariants against a lens.
    pub fn validate(&self, lens: &Lens) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("witness configuration: {what}")));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha outside (0, 1)");
        }
        let z = self.x.lerp(&self.y, self.alpha);
        if z.dist(&self.z) > CONFIG_TOL * (1.0 + self.z.norm()) {
            return bad("z is not alpha x + (1 - alpha) y");
        }
        if !lens.on_fixed(&self.y) || !lens.on_fixed(&self.a) || !lens.on_fixed(&self.b) {
            return bad("y, a, b must lie on the fixed boundary");
        }
        let lambda = self.lambda();
        if !(-CONFIG_TOL..=1.0 + CONFIG_TOL).contains(&lambda)
            || self.a.lerp(&self.b, lambda).dist(&self.x) > CONFIG_TOL * (1.0 + self.x.norm())
        {
            return bad("x is not on the chord [a, b]");
        }
        if let Ok(seg) = Segment::new(self.a, self.b) {
            if !lens.contains_segment(&seg) {
                return bad("the chord [a, b] leaves the lens");
            }
        }
        Ok(())
    }
}

fn near_integer(v: f64) -> Option<usize> {
    let r = v.round();
    ((v - r).abs() <= 1e-9 * (1.0 + v.abs())).then_some(r as usize)
}

/// The counterexample function on the dyadic grid of the filtration,
/// refined just enough to split the remainder of `omega` between `a` and `b`
/// in the proportion `lambda`.
pub fn theorem1_witness(lens: &Lens, cfg: &WitnessConfig, filt: &Filtration) -> Result<DyadicStepFunction<Point2>> {
    cfg.validate(lens)?;
    let (lvl, id) = cfg.omega;
    if lvl + 1 >= filt.level_count() || id >= filt.level(lvl).len() {
        return Err(Error::InvalidParameter(format!("atom {:?} has no children in the filtration", cfg.omega)));
    }
    let omega = &filt.level(lvl)[id];
    let target = near_integer((1.0 - cfg.alpha) * omega.cells as f64).ok_or(Error::NotAdmissible(cfg.alpha))?;
    let mut prime = Vec::new();
    let mut acc = 0;
    for &c in &omega.children {
        if acc == target {
            break;
        }
        acc += filt.level(lvl + 1)[c].cells;
        prime.push(c);
    }
    if acc != target || target == 0 || target == omega.cells {
        return Err(Error::NotAdmissible(cfg.alpha));
    }
    let rest_cells = omega.cells - target;
    let lambda = cfg.lambda().clamp(0.0, 1.0);
    let (n, depth) = (filt.n(), filt.depth());
    let mut extra = 0;
    let a_cells = loop {
        let per = 1usize << (n * extra);
        if let Some(k) = near_integer(lambda * (rest_cells * per) as f64) {
            break k;
        }
        extra += 1;
        if check_grid(n, depth + extra).is_err() {
            return Err(Error::RefineDepth(format!("share {lambda} of a is not dyadic at any admissible depth")));
        }
    };
    let fine_depth = depth + extra;
    let cells = check_grid(n, fine_depth)?;
    // which original child of omega (if any) each coarse cell belongs to
    let mut child_of_leaf = vec![None; filt.finest().len()];
    for (leaf, slot) in child_of_leaf.iter_mut().enumerate() {
        let mut a = leaf;
        for k in (lvl + 2..filt.level_count()).rev() {
            a = filt.level(k)[a].parent.unwrap();
        }
        if filt.level(lvl + 1)[a].parent == Some(id) {
            *slot = Some(a);
        }
    }
    let mask = (1usize << fine_depth) - 1;
    let mut values = vec![cfg.y; cells];
    let mut placed = 0;
    for (idx, v) in values.iter_mut().enumerate() {
        let mut coarse = 0;
        for d in 0..n {
            coarse |= (((idx >> (fine_depth * d)) & mask) >> extra) << (depth * d);
        }
        match child_of_leaf[filt.leaf_of_cell()[coarse]] {
            Some(c) if !prime.contains(&c) => {
                *v = if placed < a_cells { cfg.a } else { cfg.b };
                placed += 1;
            }
            _ => {}
        }
    }
    DyadicStepFunction::new(n, fine_depth, values)
}

/// A witness function: scalar for the BMO and `A_2` extremals, plane-valued
/// for generic lenses.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum WitnessFunction {
    Scalar(DyadicStepFunction),
    Plane(DyadicStepFunction<Point2>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RearrangedFunction {
    Scalar(StepFunction1D),
    Plane(StepFunction1D<Point2>),
}

/// A witness with its dyadic and continuous characteristics.
///
/// For BMO (homogeneous seminorms) `ratio` is `continuous / dyadic`. For
/// power-lens classes the characteristic is not homogeneous and `ratio` is
/// the continuous characteristic reached from the dyadic one, which is the
/// quantity the sharp constant bounds. In both cases `ratio <= target`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub class: String,
    pub params: serde_json::Value,
    pub dyadic: f64,
    pub continuous: f64,
    pub ratio: f64,
    pub target: f64,
    pub witness: WitnessFunction,
    #[serde(skip)]
    pub rearranged: RearrangedFunction,
    pub worst_interval: [f64; 2],
}

/// Sharp constant for BMO: `(1 + 2^n) / 2^(1 + n/2)`.
pub fn bmo_constant(n: u32) -> f64 {
    (1.0 + (n as f64).exp2()) / (1.0 + n as f64 / 2.0).exp2()
}

/// Sharp constant for `A_2`: `(Q (2^n + 1)^2 - (2^n - 1)^2) / 2^(n+2)`.
pub fn a2_constant(q_const: f64, n: u32) -> f64 {
    let p = (n as f64).exp2();
    (q_const * (p + 1.0) * (p + 1.0) - (p - 1.0) * (p - 1.0)) / (4.0 * p)
}

fn alpha_for(n: usize) -> Result<f64> {
    if n == 0 || n > 24 {
        return Err(Error::InvalidParameter(format!("dimension n = {n} must be in 1..=24")));
    }
    Ok((-(n as f64)).exp2())
}

/// The BMO extremal in `[0,1]^n` with dyadic seminorm `eps`.
pub fn bmo_extremal_witness(eps: f64, n: usize) -> Result<WitnessReport> {
    let lens = Lens::parabolic(eps)?;
    let alpha = alpha_for(n)?;
    let s = alpha.sqrt();
    let x1 = (1.0 - alpha) * eps / (2.0 * s);
    let y1 = -(1.0 + alpha) * eps / (2.0 * s);
    let x = Point2::new(x1, x1 * x1 + eps * eps);
    let y = lens.fixed_point(y1);
    let cfg = WitnessConfig {
        x,
        y,
        z: x.lerp(&y, alpha),
        a: lens.fixed_point(x1 + eps),
        b: lens.fixed_point(x1 - eps),
        alpha,
        omega: (0, 0),
    };
    let phi = theorem1_witness(&lens, &cfg, &dyadic_filtration(n, 1)?)?;
    let scalar = phi.map(|p| p.x1);
    let dyadic = dyadic_bmo_seminorm(&scalar);
    let rearranged = monotone_rearrangement(&scalar);
    let worst = continuous_bmo_search(&rearranged);
    Ok(WitnessReport {
        class: "bmo".into(),
        params: json!({ "eps": eps, "n": n }),
        dyadic,
        continuous: worst.value,
        ratio: worst.value / dyadic,
        target: bmo_constant(n as u32),
        witness: WitnessFunction::Scalar(scalar),
        rearranged: RearrangedFunction::Scalar(rearranged),
        worst_interval: [worst.start, worst.end],
    })
}

/// The `A_2` extremal in `[0,1]^n` with dyadic characteristic `Q`.
pub fn a2_extremal_witness(q_const: f64, n: usize) -> Result<WitnessReport> {
    if !(q_const > 1.0) || !q_const.is_finite() {
        return Err(Error::InvalidParameter(format!("Q = {q_const} must exceed 1")));
    }
    let alpha = alpha_for(n)?;
    let lens = Lens::power(q_const, -1.0)?;
    let roots = solve_eq2(q_const, -1.0, alpha)?;
    let a = *roots.last().expect("nonempty root list");
    let x = Point2::new(a, q_const / a);
    let y = Point2::new(1.0, 1.0);
    let h = (1.0 - 1.0 / q_const).sqrt();
    let cfg = WitnessConfig {
        x,
        y,
        z: x.lerp(&y, alpha),
        a: lens.fixed_point(a * (1.0 + h)),
        b: lens.fixed_point(a * (1.0 - h)),
        alpha,
        omega: (0, 0),
    };
    let phi = theorem1_witness(&lens, &cfg, &dyadic_filtration(n, 1)?)?;
    let scalar = phi.map(|p| p.x1);
    let params = ApParams::a2(q_const)?;
    let dyadic = ap_characteristic_dyadic(&scalar, &params)?;
    let rearranged = monotone_rearrangement(&scalar);
    let worst = ap_continuous_search(&rearranged, &params)?;
    Ok(WitnessReport {
        class: "a2".into(),
        params: json!({ "Q": q_const, "n": n }),
        dyadic,
        continuous: worst.value,
        ratio: worst.value,
        target: min_extension_a2(q_const, alpha),
        witness: WitnessFunction::Scalar(scalar),
        rearranged: RearrangedFunction::Scalar(rearranged),
        worst_interval: [worst.start, worst.end],
    })
}

/// Outcome of the falsifier.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", content = "report", rename_all = "snake_case")]
pub enum Falsification {
    Counterexample(Box<WitnessReport>),
    NoneFound,
}

fn anchor(lens: &Lens) -> f64 {
    if lens.is_power_family() {
        1.0
    } else {
        0.0
    }
}

/// Points `x, y, z` with `[z, y]` in the lens but `[x, y]` not in the candidate.
fn violating_triple(lens: &Lens, candidate: &Lens, alpha: f64, grid: &EnvelopeGrid) -> Option<(Point2, Point2, Point2)> {
    let t = anchor(lens);
    let y = lens.fixed_point(t);
    let escapes = |x: &Point2| Segment::new(*x, y).map_or(false, |seg| !candidate.contains_segment(&seg));
    // x to the right of y puts the chord values first in the non-increasing
    // rearrangement, so the violating interval starts at 0
    let mut segments = higher_segments_at(lens, alpha, t, grid.scan_per_decade);
    segments.sort_by(|p, q| q.x.x1.total_cmp(&p.x.x1));
    for h in segments {
        if is_higher_segment(lens, alpha, &h.x, &h.y) && escapes(&h.x) {
            return Some((h.x, h.y, h.z));
        }
    }
    None
}

/// Fixed-boundary points `a`, `b` with `x = lambda a + (1 - lambda) b` and
/// `a.x1 > b.x1`.
fn chord_with_share(lens: &Lens, x: &Point2, lambda: f64) -> Option<(Point2, Point2)> {
    match *lens {
        Lens::Parabolic { .. } => {
            let d = x.x2 - x.x1 * x.x1;
            if d < 0.0 {
                return None;
            }
            let (da, db) = ((d * (1.0 - lambda) / lambda).sqrt(), (d * lambda / (1.0 - lambda)).sqrt());
            Some((lens.fixed_point(x.x1 + da), lens.fixed_point(x.x1 - db)))
        }
        Lens::Power { q, .. } => {
            if !(x.x1 > 0.0) || !lens.contains(x) {
                return None;
            }
            let r = x.x2 / (lens.fixed_coef().unwrap() * x.x1.powf(q));
            if (r - 1.0).abs() <= 1e-12 {
                return Some((*x, *x));
            }
            let t = |s: f64| (1.0 - lambda * s) / (1.0 - lambda);
            let h = |s: f64| lambda * s.powf(q) + (1.0 - lambda) * t(s).powf(q) - r;
            let (lo, hi) = (1.0 + 1e-12, (1.0 / lambda) * (1.0 - 1e-15));
            if h(lo).signum() == h(hi).signum() {
                return None;
            }
            let s = bisect(h, lo, hi, 1e-15).ok()?;
            Some((lens.fixed_point(x.x1 * s), lens.fixed_point(x.x1 * t(s))))
        }
        Lens::EpigraphPower { .. } => None,
    }
}

/// Chords through `x` inside the lens with shares `k / 2^m`, `m <= 8`.
fn dyadic_chords(lens: &Lens, x: &Point2) -> Vec<(Point2, Point2)> {
    let mut out = Vec::new();
    for m in 1..=8 {
        for k in (1..1 << m).step_by(2) {
            let Some((a, b)) = chord_with_share(lens, x, k as f64 / (1u32 << m) as f64) else { continue };
            if Segment::new(a, b).map_or(true, |s| lens.contains_segment(&s)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// `x` moved toward the fixed boundary, keeping its abscissa: the share
/// `1 - theta` of its distance to the fixed boundary is kept.
fn pull_inside(lens: &Lens, x: &Point2, theta: f64) -> Point2 {
    let fixed = match *lens {
        Lens::Parabolic { .. } => x.x1 * x.x1,
        _ => lens.fixed_coef().unwrap() * x.x1.powf(lens.exponent().unwrap()),
    };
    Point2::new(x.x1, fixed + (1.0 - theta) * (x.x2 - fixed))
}

/// Look for a function in the lens class over `filt` whose rearrangement
/// leaves the candidate lens. Finds one exactly when the candidate is not an
/// α-extension of the lens.
pub fn theorem1_falsifier(lens: &Lens, candidate: &Lens, alpha: f64, filt: &Filtration) -> Result<Falsification> {
    if !lens.same_fixed_boundary(candidate) {
        return Err(Error::MismatchedFixedBoundary(format!("{lens:?} vs {candidate:?}")));
    }
    let admissible = admissible_alphas(filt);
    if !admissible.iter().any(|&r| (r - alpha).abs() <= 1e-12) {
        return Err(Error::NotAdmissible(alpha));
    }
    if !union_ratios(filt).iter().any(|&r| (r - (1.0 - alpha)).abs() <= 1e-12) {
        return Err(Error::NotAdmissible(alpha));
    }
    let grid = EnvelopeGrid::for_lens(lens);
    if is_alpha_extension(lens, candidate, alpha, &grid)? {
        return Ok(Falsification::NoneFound);
    }
    let Some((x, y, _)) = violating_triple(lens, candidate, alpha, &grid) else {
        return Ok(Falsification::NoneFound);
    };
    let omega = (0..filt.level_count() - 1)
        .flat_map(|k| filt.level(k).iter().map(move |at| (k, at.id)))
        .find(|&(k, id)| {
            let at = &filt.level(k)[id];
            near_integer((1.0 - alpha) * at.cells as f64).is_some_and(|t| {
                let mut acc = 0;
                at.children.iter().any(|&c| {
                    acc += filt.level(k + 1)[c].cells;
                    acc == t
                })
            })
        })
        .ok_or(Error::NotAdmissible(alpha))?;
    let target = min_extension(lens, alpha)?.parameter();
    // the tangent chord at a free-boundary point rarely has a dyadic share;
    // points slightly inside have nearby chords that do
    let escapes = |x: &Point2| Segment::new(*x, y).map_or(false, |seg| !candidate.contains_segment(&seg));
    let starts = [0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2].into_iter().filter_map(|theta| {
        let x = if theta == 0.0 { x } else { pull_inside(lens, &x, theta) };
        let z = x.lerp(&y, alpha);
        let ok = lens.contains(&x) && escapes(&x) && Segment::new(z, y).map_or(true, |s| lens.contains_segment(&s));
        ok.then_some((x, z))
    });
    let configs = starts.flat_map(|(x, z)| dyadic_chords(lens, &x).into_iter().map(move |(a, b)| (x, z, a, b)));
    for (x, z, a, b) in configs {
        let cfg = WitnessConfig { x, y, z, a, b, alpha, omega };
        let phi = match theorem1_witness(lens, &cfg, filt) {
            Ok(phi) => phi,
            Err(Error::RefineDepth(_)) => continue,
            Err(e) => return Err(e),
        };
        let rearranged = lens_rearrangement(&phi, lens)?;
        let member = membership_in_class(&rearranged, candidate);
        if member.member {
            continue;
        }
        let reach = class_characteristic(&rearranged, lens);
        let fine = dyadic_filtration(phi.n(), phi.depth())?;
        let dyadic = atom_averages(&phi, &fine)?.iter().flatten().map(|p| lens.gauge(p)).fold(0.0, f64::max);
        let (class, ratio, target) = match lens {
            Lens::Parabolic { eps } => ("bmo", reach.value / dyadic, target / eps),
            _ => ("power", reach.value, target),
        };
        let report = WitnessReport {
            class: class.into(),
            params: json!({ "lens": lens, "candidate": candidate, "alpha": alpha }),
            dyadic,
            continuous: reach.value,
            ratio,
            target,
            witness: WitnessFunction::Plane(phi),
            rearranged: RearrangedFunction::Plane(rearranged),
            worst_interval: [member.worst.start, member.worst.end],
        };
        return Ok(Falsification::Counterexample(Box::new(report)));
    }
    Ok(Falsification::NoneFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::membership_in_class_f;

    #[test]
    fn bmo_witness_n1_values() {
        let r = bmo_extremal_witness(1.0, 1).unwrap();
        let WitnessFunction::Scalar(f) = &r.witness else { panic!() };
        let s2 = std::f64::consts::SQRT_2;
        let expect = [-3.0 * s2 / 4.0, -3.0 * s2 / 4.0, s2 / 4.0 + 1.0, s2 / 4.0 - 1.0];
        for (v, e) in f.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-15, "{v} vs {e}");
        }
        assert!((r.dyadic - 1.0).abs() < 1e-12);
        assert!((r.ratio - 3.0 / (2.0 * s2)).abs() < 1e-6, "{}", r.ratio);
        assert!(r.worst_interval[0] == 0.0);
    }

    #[test]
    fn witness_satisfies_class_and_root_average() {
        let lens = Lens::parabolic(1.0).unwrap();
        let alpha = 0.5;
        let (x1, y1) = (0.25 * std::f64::consts::SQRT_2, -0.75 * std::f64::consts::SQRT_2);
        let x = Point2::new(x1, x1 * x1 + 1.0);
        let y = lens.fixed_point(y1);
        let cfg = WitnessConfig {
            x,
            y,
            z: x.lerp(&y, alpha),
            a: lens.fixed_point(x1 + 1.0),
            b: lens.fixed_point(x1 - 1.0),
            alpha,
            omega: (0, 0),
        };
        let filt = dyadic_filtration(1, 1).unwrap();
        let phi = theorem1_witness(&lens, &cfg, &filt).unwrap();
        assert_eq!(phi.depth(), 2);
        assert!(membership_in_class_f(&phi, &dyadic_filtration(1, 2).unwrap(), &lens).unwrap());
        let root = atom_averages(&phi, &filt).unwrap()[0][0];
        assert!(root.dist(&cfg.z) < 1e-15);
    }

    #[test]
    fn degenerate_config_is_constant() {
        let lens = Lens::parabolic(1.0).unwrap();
        let y = lens.fixed_point(0.3);
        let cfg = WitnessConfig { x: y, y, z: y, a: y, b: y, alpha: 0.5, omega: (0, 0) };
        let phi = theorem1_witness(&lens, &cfg, &dyadic_filtration(1, 1).unwrap()).unwrap();
        assert!(phi.values().iter().all(|&v| v == y));
    }

    #[test]
    fn invalid_configs_rejected() {
        let lens = Lens::parabolic(1.0).unwrap();
        let y = lens.fixed_point(0.0);
        let x = Point2::new(0.0, 1.0);
        let cfg = WitnessConfig {
            x,
            y,
            z: x,
            a: lens.fixed_point(1.0),
            b: lens.fixed_point(-1.0),
            alpha: 0.5,
            omega: (0, 0),
        };
        assert!(cfg.validate(&lens).is_err());
        let wide = WitnessConfig { z: x.lerp(&y, 0.5), a: lens.fixed_point(3.0), b: lens.fixed_point(-3.0), ..cfg };
        assert!(wide.validate(&lens).is_err());
    }

    #[test]
    fn a2_witness_n1() {
        let r = a2_extremal_witness(2.0, 1).unwrap();
        assert!((r.dyadic - 2.0).abs() < 1e-12, "{}", r.dyadic);
        assert!((r.ratio - 2.125).abs() < 1e-6, "{}", r.ratio);
        assert!((r.target - 2.125).abs() < 1e-12);
    }

    #[test]
    fn falsifier_examples() {
        let filt = dyadic_filtration(1, 1).unwrap();
        let lens = Lens::parabolic(1.0).unwrap();
        let out = theorem1_falsifier(&lens, &Lens::parabolic(1.05).unwrap(), 0.5, &filt).unwrap();
        let Falsification::Counterexample(r) = out else { panic!("expected a counterexample") };
        assert!(r.continuous > 1.05);
        assert_eq!(r.worst_interval[0], 0.0);
        let out = theorem1_falsifier(&lens, &Lens::parabolic(1.0607).unwrap(), 0.5, &filt).unwrap();
        assert_eq!(out, Falsification::NoneFound);
        assert!(matches!(theorem1_falsifier(&lens, &lens, 0.3, &filt), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn constants() {
        assert_eq!(bmo_constant(1), 1.0606601717798212);
        assert_eq!(bmo_constant(2), 1.25);
        assert_eq!(a2_constant(2.0, 1), 2.125);
        assert_eq!(a2_constant(3.0, 2), 4.125);
    }
}
