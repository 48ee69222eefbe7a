//! Static SVG plot of a lens, its higher segments and its extension.

use std::fmt::Write;

use lensrr_core::geometry::{Envelope, Lens};
use lensrr_core::Point2;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const SAMPLES: usize = 200;

/// Abscissa range of the plot: `|x1| <= 2 eps'` for parabolic lenses, the
/// envelope grid range for power lenses.
fn x_range(lens: &Lens, ext: &Lens) -> (f64, f64) {
    match *lens {
        Lens::Parabolic { .. } => {
            let e = ext.parameter();
            (-2.0 * e, 2.0 * e)
        }
        _ => (0.5, 2.0),
    }
}

fn curve(lo: f64, hi: f64, f: impl Fn(f64) -> Option<Point2>) -> Vec<Point2> {
    (0..=SAMPLES).filter_map(|i| f(lo + (hi - lo) * i as f64 / SAMPLES as f64)).filter(|p| p.is_finite()).collect()
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(x: (f64, f64), pts: &[&[Point2]]) -> Frame {
        let ys = pts.iter().flat_map(|c| c.iter()).filter(|p| p.x1 >= x.0 && p.x1 <= x.1).map(|p| p.x2);
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
        let pad = 0.05 * (hi - lo);
        Frame { x, y: (lo - pad, hi + pad) }
    }

    fn map(&self, p: &Point2) -> (f64, f64) {
        let u = (p.x1 - self.x.0) / (self.x.1 - self.x.0) * WIDTH;
        let v = HEIGHT - (p.x2 - self.y.0) / (self.y.1 - self.y.0) * HEIGHT;
        (u, v)
    }

    fn polyline(&self, svg: &mut String, pts: &[Point2], style: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|p| self.map(p)).map(|(u, v)| format!("{u:.2},{v:.2}")).collect();
        let _ = writeln!(svg, r#"  <polyline fill="none" {style} points="{}"/>"#, coords.join(" "));
    }
}

pub fn plot(lens: &Lens, ext: &Lens, alpha: f64, envelope: Option<&Envelope>) -> String {
    let (lo, hi) = x_range(lens, ext);
    let fixed = curve(lo, hi, |t| Some(lens.fixed_point(t)));
    let free = curve(lo, hi, |t| lens.free_point(t));
    let outer = match envelope {
        Some(env) => env.points.clone(),
        None => curve(lo, hi, |t| ext.free_point(t)),
    };
    let frame = Frame::fit((lo, hi), &[&fixed, &free, &outer]);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, "  <title>{lens:?}, alpha = {alpha}</title>");
    let _ = writeln!(svg, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    if let Some(env) = envelope {
        for h in &env.segments {
            frame.polyline(&mut svg, &[h.y, h.x], r##"stroke="#999" stroke-width="0.5""##);
        }
    }
    frame.polyline(&mut svg, &fixed, r##"stroke="#000" stroke-width="1.5""##);
    frame.polyline(&mut svg, &free, r##"stroke="#1f77b4" stroke-width="1.5""##);
    frame.polyline(&mut svg, &outer, r##"stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 3""##);
    svg.push_str("</svg>\n");
    svg
}
