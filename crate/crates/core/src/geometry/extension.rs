//! Minimal α-extensions in closed form.
//!
//! Parabolic lenses extend to parabolic lenses, `Omega_C^{-1}` to
//! `Omega_{C'}^{-1}`, and general power lenses through the homogeneous
//! higher-segment equation
//!
//! ```text
//! C (alpha a + 1 - alpha)^q = alpha C a^q + 1 - alpha,      a = x1 / y1,
//! ```
//!
//! whose roots parametrize the higher segments up to the scaling symmetry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::lens::Lens;
use crate::numeric::{bisect, log_grid};

/// Minimal α-extension of a power lens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "extension", content = "constant", rename_all = "snake_case")]
pub enum Extension {
    /// The extension is the power lens with the same fixed boundary and ratio span `C'`.
    Bounded(f64),
    /// No bounded extension: only the fixed-boundary constraint survives.
    Epigraph,
}

impl Extension {
    pub fn constant(&self) -> Option<f64> {
        match *self {
            Extension::Bounded(c) => Some(c),
            Extension::Epigraph => None,
        }
    }

    /// The extension as a lens sharing the fixed boundary of `base`.
    pub fn lens(&self, base: &Lens) -> Result<Lens> {
        match *self {
            Extension::Bounded(c) => base.with_parameter(c),
            Extension::Epigraph => base.with_parameter(f64::INFINITY),
        }
    }
}

/// `eps' = (1 + alpha) eps / (2 sqrt(alpha))`.
pub fn min_extension_parabolic(eps: f64, alpha: f64) -> f64 {
    (1.0 + alpha) * eps / (2.0 * alpha.sqrt())
}

/// `C' = (C (alpha + 1)^2 - (alpha - 1)^2) / (4 alpha)` for `Omega_C^{-1}`.
pub fn min_extension_a2(c: f64, alpha: f64) -> f64 {
    (c * (alpha + 1.0).powi(2) - (alpha - 1.0).powi(2)) / (4.0 * alpha)
}

/// Threshold `1 - C^{-1/(q-1)}` below which a `q > 1` lens has no bounded extension.
pub fn epigraph_threshold(c: f64, q: f64) -> f64 {
    1.0 - c.powf(-1.0 / (q - 1.0))
}

/// Residual `LHS - RHS` of the higher-segment equation, together with `RHS`.
pub fn eq2_residual(c: f64, q: f64, alpha: f64, a: f64) -> (f64, f64) {
    let lhs = c * (alpha * a + 1.0 - alpha).powf(q);
    let rhs = alpha * c * a.powf(q) + (1.0 - alpha);
    (lhs - rhs, rhs)
}

fn eq2_grid() -> Vec<f64> {
    let mut grid = log_grid(1e-8, 1e-1, 16);
    grid.pop();
    let mut mid = log_grid(1e-1, 10.0, 256);
    mid.pop();
    grid.extend(mid);
    grid.extend(log_grid(10.0, 1e8, 16));
    grid
}

fn validate_power(c: f64, q: f64, alpha: f64) -> Result<()> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("C = {c} must be at least 1")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if q == 0.0 || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q = {q} must be finite and nonzero")));
    }
    Ok(())
}

/// Positive roots of the higher-segment equation, ascending.
///
/// The residual is scanned on a log grid over `[1e-8, 1e8]` (256 points per
/// decade on `[0.1, 10]`, 16 elsewhere) and every sign change is bisected to
/// machine precision. For `q > 1` there are two roots when
/// `alpha > 1 - C^{-1/(q-1)}` and one root above 1 otherwise; for `q <= -1`
/// there are always two.
pub fn solve_eq2(c: f64, q: f64, alpha: f64) -> Result<Vec<f64>> {
    validate_power(c, q, alpha)?;
    if !(q > 1.0 || q <= -1.0) {
        return Err(Error::InvalidParameter(format!(
            "the higher-segment equation is solved for q > 1 or q <= -1, got q = {q}"
        )));
    }
    let g = |a: f64| eq2_residual(c, q, alpha, a).0;
    let grid = eq2_grid();
    let vals: Vec<f64> = grid.iter().map(|&a| g(a)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() {
        if vals[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && vals[i + 1] != 0.0 && vals[i].signum() != vals[i + 1].signum() {
            let r = bisect(g, grid[i], grid[i + 1], 1e-16)?;
            roots.push(r);
        }
    }
    if roots.is_empty() {
        return Err(Error::RootBracketing(format!(
            "no sign change of the higher-segment residual for C = {c}, q = {q}, alpha = {alpha}"
        )));
    }
    Ok(roots)
}

/// Closed form for `q > 1` at the smaller root `a`.
fn eq3(c: f64, q: f64, a: f64) -> f64 {
    let caq = c * a.powf(q);
    let ln = q * (1.0 - caq).ln() + (q - 1.0) * (q - 1.0).ln()
        - (1.0 - a).ln()
        - (q - 1.0) * (a - caq).ln()
        - q * q.ln();
    ln.exp()
}

/// Closed form for `q <= -1` at the bigger root `a`.
fn eq3b(c: f64, q: f64, a: f64) -> f64 {
    let caq = c * a.powf(q);
    let ln = (1.0 - q) * (a - caq).ln() - q * (-q).ln()
        - (a - 1.0).ln()
        + q * (1.0 - caq).ln()
        - (1.0 - q) * (1.0 - q).ln();
    ln.exp()
}

/// Minimal α-extension of `Omega_C^q`.
///
/// `q in (0, 1)` is conjugated by `(u, v) -> (v / C, u)` to exponent `1/q`
/// with constant `C^{1/q}`; `q in (-1, 0)` by `(u, v) -> (v, u)` to exponent
/// `1/q` with constant `C^{-1/q}`. The answers map back as `K^q` and `K^{-q}`.
pub fn min_extension_power(c: f64, q: f64, alpha: f64) -> Result<Extension> {
    validate_power(c, q, alpha)?;
    if q == 1.0 {
        return Err(Error::InvalidParameter("q = 1 does not define a lens".into()));
    }
    if c == 1.0 {
        return Ok(Extension::Bounded(1.0));
    }
    if q > 1.0 {
        if alpha <= epigraph_threshold(c, q) {
            return Ok(Extension::Epigraph);
        }
        let roots = solve_eq2(c, q, alpha)?;
        let a = roots
            .iter()
            .copied()
            .find(|&r| r < 1.0)
            .ok_or_else(|| Error::RootBracketing(format!(
                "smaller root below the scan range for C = {c}, q = {q}, alpha = {alpha}"
            )))?;
        Ok(Extension::Bounded(eq3(c, q, a)))
    } else if q <= -1.0 {
        let roots = solve_eq2(c, q, alpha)?;
        let a = *roots.last().expect("nonempty");
        if !(a > 1.0) {
            return Err(Error::RootBracketing(format!(
                "bigger root above the scan range for C = {c}, q = {q}, alpha = {alpha}"
            )));
        }
        Ok(Extension::Bounded(eq3b(c, q, a)))
    } else if q > 0.0 {
        let qp = 1.0 / q;
        Ok(match min_extension_power(c.powf(qp), qp, alpha)? {
            Extension::Bounded(k) => Extension::Bounded(k.powf(q)),
            Extension::Epigraph => Extension::Epigraph,
        })
    } else {
        let qp = 1.0 / q;
        Ok(match min_extension_power(c.powf(-qp), qp, alpha)? {
            Extension::Bounded(k) => Extension::Bounded(k.powf(-q)),
            Extension::Epigraph => Extension::Epigraph,
        })
    }
}

/// Minimal α-extension of any built-in lens, as a lens.
pub fn min_extension(lens: &Lens, alpha: f64) -> Result<Lens> {
    match *lens {
        Lens::Parabolic { eps } => Lens::parabolic(min_extension_parabolic(eps, alpha)),
        Lens::Power { q, .. } => min_extension_power(lens.parameter(), q, alpha)?.lens(lens),
        Lens::EpigraphPower { .. } => Ok(*lens),
    }
}
