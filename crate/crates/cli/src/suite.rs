//! Property suites behind `lensrr verify`.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use lensrr_core::geometry::{
    affine_orbit_parabolic, affine_orbit_power, epigraph_threshold, eq2_residual, extension_monotone_in_alpha,
    is_alpha_extension, min_extension_a2, min_extension_parabolic, min_extension_power, numeric_envelope,
    solve_eq2, EnvelopeGrid, Lens, Point2,
};
use lensrr_core::martingale::{
    atom_averages, binary_refinement, dyadic_filtration, is_alpha_filtration, is_alpha_martingale_certified,
    Certificate,
};
use lensrr_core::spaces::{
    ap_characteristic_continuous_1d, ap_characteristic_dyadic, continuous_bmo_seminorm_1d, dyadic_bmo_seminorm,
    monotone_rearrangement, ApParams, DyadicStepFunction,
};
use lensrr_core::witness::{
    a2_constant, a2_extremal_witness, bmo_constant, bmo_extremal_witness, random_class_function,
    theorem1_falsifier,
};
use lensrr_core::Falsification;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::args::Suite;

type Check = fn(u64) -> Result<String, String>;

struct Property {
    module: &'static str,
    name: &'static str,
    check: Check,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub module: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.module.len() + r.name.len() + 1).max().unwrap_or(0);
        let mut s = String::new();
        for r in &self.rows {
            let label = format!("{}/{}", r.module, r.name);
            let _ = writeln!(s, "{label:<width$}  {}  {}", if r.pass { "PASS" } else { "FAIL" }, r.detail);
        }
        let failed = self.rows.iter().filter(|r| !r.pass).count();
        let _ = writeln!(s, "{} properties, {} failed", self.rows.len(), failed);
        s
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn properties() -> Vec<Property> {
    vec![
        Property { module: "geometry", name: "orbit-invariance", check: orbit_invariance },
        Property { module: "geometry", name: "parabolic-extension-shape", check: parabolic_shape },
        Property { module: "geometry", name: "a2-is-power-q-minus-one", check: a2_power },
        Property { module: "geometry", name: "eq2-residuals-and-roots", check: eq2 },
        Property { module: "geometry", name: "envelope-vs-closed-form", check: envelope },
        Property { module: "geometry", name: "square-root-reduction", check: square_root },
        Property { module: "geometry", name: "extension-monotone-in-alpha", check: monotone },
        Property { module: "functions", name: "rearrangement-distribution", check: distribution },
        Property { module: "functions", name: "rearrangement-idempotent", check: idempotent },
        Property { module: "functions", name: "seminorm-invariance", check: invariance },
        Property { module: "functions", name: "rearranged-bmo-bound", check: bmo_bound },
        Property { module: "functions", name: "rearranged-a2-bound", check: a2_bound },
        Property { module: "martingales", name: "binary-refinement-lemma", check: lemma },
        Property { module: "witnesses", name: "bmo-attainment", check: bmo_attainment },
        Property { module: "witnesses", name: "a2-attainment", check: a2_attainment },
        Property { module: "witnesses", name: "falsifier-dichotomy", check: falsifier },
        Property { module: "witnesses", name: "random-class-bounds", check: random_bounds },
    ]
}

pub fn run(suite: Suite, seed: u64) -> Report {
    let selected: Vec<Property> = properties()
        .into_iter()
        .filter(|p| match suite {
            Suite::All => true,
            Suite::Geometry => p.module == "geometry",
            Suite::Functions => p.module == "functions",
            Suite::Martingales => p.module == "martingales",
            Suite::Witnesses => p.module == "witnesses",
        })
        .collect();
    let rows = selected
        .par_iter()
        .map(|p| {
            let result = catch_unwind(AssertUnwindSafe(|| (p.check)(seed)))
                .unwrap_or_else(|_| Err("panicked".to_string()));
            let (pass, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Row { module: p.module, name: p.name, pass, detail }
        })
        .collect();
    Report { rows }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn orbit_invariance(seed: u64) -> Result<String, String> {
    let mut r = rng(seed, 1);
    let mut checked = 0;
    for _ in 0..1000 {
        let eps = r.gen_range(0.1..3.0);
        let lens = Lens::parabolic(eps).unwrap();
        let x1: f64 = r.gen_range(-5.0..5.0);
        let d: f64 = r.gen_range(-1.0..10.0);
        if (d - eps * eps).abs() < 1e-6 || d.abs() < 1e-6 {
            continue;
        }
        let p = Point2::new(x1, x1 * x1 + d);
        let t = r.gen_range(-10.0..10.0);
        ensure(lens.contains(&p) == lens.contains(&affine_orbit_parabolic(&p, t)), || format!("{p:?}, t = {t}"))?;
        let q = [-2.0, -1.0, 0.5, 2.0, 3.0][r.gen_range(0..5)];
        let c = r.gen_range(1.1..5.0);
        let lens = Lens::power(c, q).unwrap();
        let ratio: f64 = r.gen_range(0.5..6.0);
        if (ratio - 1.0).abs() < 1e-6 || (ratio - c).abs() < 1e-6 {
            continue;
        }
        let u: f64 = r.gen_range(0.1..10.0);
        let p = Point2::new(u, ratio * u.powf(q));
        let t = r.gen_range(0.05..20.0);
        let moved = affine_orbit_power(&p, t, q).map_err(|e| e.to_string())?;
        ensure(lens.contains(&p) == lens.contains(&moved), || format!("{p:?}, t = {t}, q = {q}"))?;
        checked += 1;
    }
    Ok(format!("{checked} point pairs"))
}

fn parabolic_shape(_: u64) -> Result<String, String> {
    let alphas: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    for w in alphas.windows(2) {
        ensure(min_extension_parabolic(1.0, w[1]) < min_extension_parabolic(1.0, w[0]), || format!("not decreasing at {w:?}"))?;
    }
    for eps in [0.1, 0.5, 2.0, 7.0] {
        for &a in &alphas {
            let (lhs, rhs) = (min_extension_parabolic(eps, a), eps * min_extension_parabolic(1.0, a));
            ensure((lhs - rhs).abs() <= 1e-14 * rhs, || format!("not linear at eps = {eps}, alpha = {a}"))?;
        }
    }
    Ok("99 alphas".into())
}

fn a2_power(_: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    for c in [1.01, 1.5, 2.0, 4.0, 10.0] {
        for alpha in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let general = min_extension_power(c, -1.0, alpha).map_err(|e| e.to_string())?.constant().unwrap();
            let closed = min_extension_a2(c, alpha);
            worst = worst.max((general - closed).abs() / closed);
        }
    }
    ensure(worst <= 1e-10, || format!("relative gap {worst:e}"))?;
    Ok(format!("max relative gap {worst:.1e}"))
}

fn eq2(_: u64) -> Result<String, String> {
    for c in [1.5, 2.0, 4.0] {
        for q in [2.0, 3.0] {
            let th = epigraph_threshold(c, q);
            for (alpha, count) in [(0.5 * th, 1), (th, 1), (0.5 * (th + 1.0), 2)] {
                let roots = solve_eq2(c, q, alpha).map_err(|e| e.to_string())?;
                ensure(roots.len() == count, || format!("C = {c}, q = {q}, alpha = {alpha}: {roots:?}"))?;
                for a in roots {
                    let (res, rhs) = eq2_residual(c, q, alpha, a);
                    ensure(res.abs() < 1e-12 * (1.0 + rhs.abs()), || format!("residual {res:e} at a = {a}"))?;
                }
            }
        }
    }
    let roots = solve_eq2(2.0, 2.0, 0.5).map_err(|e| e.to_string())?;
    ensure(roots.len() == 1 && (roots[0] - 2.0).abs() < 1e-12, || format!("C = 2, q = 2, alpha = 1/2: {roots:?}"))?;
    Ok("18 cases".into())
}

fn envelope_gap(lens: &Lens, alpha: f64, expected: f64) -> Result<f64, String> {
    let env = numeric_envelope(lens, alpha, &EnvelopeGrid::for_lens(lens)).map_err(|e| e.to_string())?;
    let got = env.points.iter().map(|p| lens.gauge(p)).fold(0.0, f64::max);
    Ok((got - expected).abs())
}

fn envelope(_: u64) -> Result<String, String> {
    let mut cases = Vec::new();
    for eps in [0.5, 1.0, 2.0] {
        for alpha in [0.25, 0.5, 0.75] {
            cases.push((Lens::parabolic(eps).unwrap(), alpha, min_extension_parabolic(eps, alpha)));
        }
    }
    for c in [1.5, 2.0, 4.0] {
        for q in [2.0, 3.0, -1.0, -2.0] {
            for alpha in [0.25, 0.5, 0.75] {
                if q > 1.0 && alpha <= epigraph_threshold(c, q) {
                    continue;
                }
                let k = min_extension_power(c, q, alpha).map_err(|e| e.to_string())?.constant().unwrap();
                cases.push((Lens::power(c, q).unwrap(), alpha, k));
            }
        }
    }
    let gaps: Vec<Result<f64, String>> = cases.par_iter().map(|(l, a, k)| envelope_gap(l, *a, *k)).collect();
    let mut worst = 0.0f64;
    for (g, (l, a, _)) in gaps.into_iter().zip(&cases) {
        let g = g?;
        ensure(g < 1e-6, || format!("{l:?} alpha = {a}: gap {g:e}"))?;
        worst = worst.max(g);
    }
    Ok(format!("{} lenses, max gap {worst:.1e}", cases.len()))
}

fn square_root(_: u64) -> Result<String, String> {
    let mut pts = Vec::new();
    for c in [1.1, 1.2, 1.3, 1.4, 1.5] {
        for alpha in [0.6, 0.7, 0.8, 0.9] {
            pts.push((c, alpha));
        }
    }
    let gaps: Vec<Result<(f64, f64), String>> = pts
        .par_iter()
        .map(|&(c, alpha)| {
            let direct = min_extension_power(c * c, 2.0, alpha).map_err(|e| e.to_string())?.constant().unwrap().sqrt();
            let got = min_extension_power(c, 0.5, alpha).map_err(|e| e.to_string())?.constant().unwrap();
            Ok(((got - direct).abs(), envelope_gap(&Lens::power(c, 0.5).unwrap(), alpha, got)?))
        })
        .collect();
    for (g, (c, a)) in gaps.into_iter().zip(&pts) {
        let (mapped, env) = g?;
        ensure(mapped < 1e-8, || format!("C = {c}, alpha = {a}: conjugation gap {mapped:e}"))?;
        ensure(env < 1e-6, || format!("C = {c}, alpha = {a}: envelope gap {env:e}"))?;
    }
    Ok(format!("{} points", pts.len()))
}

fn monotone(_: u64) -> Result<String, String> {
    let betas = [0.3, 0.5, 0.7, 0.9];
    let lens = Lens::parabolic(1.0).unwrap();
    let grid = EnvelopeGrid::for_lens(&lens);
    for alpha in [0.2, 0.4, 0.6] {
        let outer = Lens::parabolic(min_extension_parabolic(1.0, alpha) + 1e-6).unwrap();
        let ok = is_alpha_extension(&lens, &outer, alpha, &grid).map_err(|e| e.to_string())?
            && extension_monotone_in_alpha(&lens, &outer, alpha, &betas, &grid).map_err(|e| e.to_string())?;
        ensure(ok, || format!("alpha = {alpha}"))?;
    }
    Ok("3 extensions".into())
}

fn random_dyadic(r: &mut ChaCha8Rng, lo: f64, hi: f64, max_bits: usize, tied: bool) -> DyadicStepFunction {
    loop {
        let n = r.gen_range(1..=2usize);
        let depth = r.gen_range(0..=4usize);
        if n * depth > max_bits {
            continue;
        }
        let values = (0..1usize << (n * depth))
            .map(|_| if tied { r.gen_range(-3i32..=3) as f64 } else { r.gen_range(lo..hi) })
            .collect();
        return DyadicStepFunction::new(n, depth, values).unwrap();
    }
}

fn distribution(seed: u64) -> Result<String, String> {
    let mut r = rng(seed, 2);
    for i in 0..1000 {
        let f = random_dyadic(&mut r, 0.0, 1.0, 8, true);
        let g = monotone_rearrangement(&f);
        let mut before = BTreeMap::new();
        for &v in f.values() {
            *before.entry(v.to_bits()).or_insert(0.0) += f.cell_measure();
        }
        let mut after = BTreeMap::new();
        for (lo, hi, v) in g.pieces() {
            *after.entry(v.to_bits()).or_insert(0.0) += hi - lo;
        }
        ensure(before == after, || format!("sample {i}"))?;
    }
    Ok("1000 functions".into())
}

fn idempotent(seed: u64) -> Result<String, String> {
    let mut r = rng(seed, 3);
    for i in 0..1000 {
        let f = random_dyadic(&mut r, 0.0, 1.0, 8, true);
        let g = monotone_rearrangement(&f);
        let lifted = g.to_dyadic(f.n() * f.depth()).map_err(|e| e.to_string())?;
        ensure(monotone_rearrangement(&lifted) == g, || format!("sample {i}"))?;
    }
    Ok("1000 functions".into())
}

fn invariance(seed: u64) -> Result<String, String> {
    let mut r = rng(seed, 4);
    let p = ApParams::a2(2.0).unwrap();
    for i in 0..200 {
        let f = random_dyadic(&mut r, 0.1, 5.0, 6, false);
        let (shift, scale) = (r.gen_range(-10.0..10.0), r.gen_range(0.01..100.0));
        let b = dyadic_bmo_seminorm(&f);
        ensure((dyadic_bmo_seminorm(&f.map(|v| v + shift)) - b).abs() < 1e-9 * (1.0 + b), || format!("bmo shift, sample {i}"))?;
        let a = ap_characteristic_dyadic(&f, &p).map_err(|e| e.to_string())?;
        let scaled = ap_characteristic_dyadic(&f.map(|v| v * scale), &p).map_err(|e| e.to_string())?;
        ensure((a - scaled).abs() < 1e-9 * a, || format!("A_2 scaling, sample {i}"))?;
    }
    Ok("200 functions".into())
}

fn bmo_bound(seed: u64) -> Result<String, String> {
    let mut r = rng(seed, 5);
    let mut slack = f64::INFINITY;
    for i in 0..200 {
        let f = random_dyadic(&mut r, -3.0, 3.0, 6, false);
        let alpha = (-(f.n() as f64)).exp2();
        let bound = min_extension_parabolic(dyadic_bmo_seminorm(&f), alpha);
        let c = continuous_bmo_seminorm_1d(&monotone_rearrangement(&f));
        ensure(c <= bound + 1e-9, || format!("sample {i}: {c} > {bound}"))?;
        slack = slack.min(bound - c);
    }
    Ok(format!("200 functions, min slack {slack:.2e}"))
}

fn a2_bound(seed: u64) -> Result<String, String> {
    let mut r = rng(seed, 6);
    let p = ApParams::a2(2.0).unwrap();
    for i in 0..200 {
        let f = random_dyadic(&mut r, 0.1, 10.0, 6, false);
        let alpha = (-(f.n() as f64)).exp2();
        let bound = min_extension_a2(ap_characteristic_dyadic(&f, &p).map_err(|e| e.to_string())?, alpha);
        let c = ap_characteristic_continuous_1d(&monotone_rearrangement(&f), &p).map_err(|e| e.to_string())?;
        ensure(c <= bound + 1e-9, || format!("sample {i}: {c} > {bound}"))?;
    }
    Ok("200 functions".into())
}

fn lemma(seed: u64) -> Result<String, String> {
    let lens = Lens::parabolic(1.0).unwrap();
    let mut count = 0;
    for n in 1..=2 {
        for depth in 1..=3 {
            let alpha = (-(n as f64)).exp2();
            let filt = dyadic_filtration(n, depth).unwrap();
            for s in 0..100 {
                let f = random_class_function(&lens, &filt, seed.wrapping_add(s)).map_err(|e| e.to_string())?;
                let (refined, _) = binary_refinement(&filt, &f, &lens).map_err(|e| e.to_string())?;
                let where_ = || format!("n = {n}, depth = {depth}, sample {s}");
                ensure(refined.is_binary() && is_alpha_filtration(&refined, alpha), where_)?;
                let avg = atom_averages(&f, &refined).map_err(|e| e.to_string())?;
                ensure(avg.iter().flatten().all(|p| lens.contains(p)), where_)?;
                let cert = is_alpha_martingale_certified(&f, &filt, &lens, alpha);
                ensure(cert == Certificate::CertifiedYes, where_)?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} functions"))
}

fn bmo_attainment(_: u64) -> Result<String, String> {
    for n in 1..=3u32 {
        let r = bmo_extremal_witness(1.0, n as usize).map_err(|e| e.to_string())?;
        ensure((r.dyadic - 1.0).abs() < 1e-12, || format!("n = {n}: dyadic {}", r.dyadic))?;
        ensure((r.ratio - bmo_constant(n)).abs() < 1e-6, || format!("n = {n}: ratio {}", r.ratio))?;
        ensure(r.worst_interval[0] == 0.0, || format!("n = {n}: worst interval {:?}", r.worst_interval))?;
    }
    Ok("n = 1, 2, 3".into())
}

fn a2_attainment(_: u64) -> Result<String, String> {
    for q in [1.5, 2.0, 4.0] {
        for n in 1..=2u32 {
            let r = a2_extremal_witness(q, n as usize).map_err(|e| e.to_string())?;
            ensure((r.ratio - a2_constant(q, n)).abs() < 1e-6, || format!("Q = {q}, n = {n}: ratio {}", r.ratio))?;
        }
    }
    Ok("Q in {1.5, 2, 4}, n = 1, 2".into())
}

fn falsifier(_: u64) -> Result<String, String> {
    let filt = dyadic_filtration(1, 1).unwrap();
    let cases = [
        (Lens::parabolic(1.0).unwrap(), min_extension_parabolic(1.0, 0.5)),
        (Lens::power(2.0, -1.0).unwrap(), min_extension_a2(2.0, 0.5)),
    ];
    for (lens, minimal) in cases {
        for k in [0.99, 1.0, 1.01] {
            let candidate = lens.with_parameter(minimal * k).unwrap();
            let found = matches!(
                theorem1_falsifier(&lens, &candidate, 0.5, &filt).map_err(|e| e.to_string())?,
                Falsification::Counterexample(_)
            );
            ensure(found == (k < 1.0), || format!("{lens:?}, candidate factor {k}"))?;
        }
    }
    Ok("6 candidates".into())
}

fn random_bounds(seed: u64) -> Result<String, String> {
    let filt = dyadic_filtration(1, 3).unwrap();
    let bmo = Lens::parabolic(1.0).unwrap();
    let p = ApParams::a2(2.0).unwrap();
    let a2 = p.lens().unwrap();
    let (bmo_max, a2_max) = (bmo_constant(1), a2_constant(2.0, 1));
    let worst: Vec<Result<(f64, f64), String>> = (0..1000u64)
        .into_par_iter()
        .map(|s| {
            let s = seed.wrapping_add(s);
            let f = random_class_function(&bmo, &filt, s).map_err(|e| e.to_string())?.map(|p| p.x1);
            let w = random_class_function(&a2, &filt, s).map_err(|e| e.to_string())?.map(|p| p.x1);
            Ok((
                continuous_bmo_seminorm_1d(&monotone_rearrangement(&f)),
                ap_characteristic_continuous_1d(&monotone_rearrangement(&w), &p).map_err(|e| e.to_string())?,
            ))
        })
        .collect();
    let (mut b, mut a) = (0.0f64, 0.0f64);
    for w in worst {
        let (x, y) = w?;
        b = b.max(x);
        a = a.max(y);
    }
    ensure(b <= bmo_max + 1e-9 && a <= a2_max + 1e-9, || format!("bmo {b}, a2 {a}"))?;
    Ok(format!("1000 seeds, worst bmo {b:.7}, worst a2 {a:.7}"))
}
