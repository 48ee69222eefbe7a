use std::fs;
use std::path::Path;

use lensrr_core::geometry::{
    epigraph_threshold, is_alpha_extension, min_extension, min_extension_a2, min_extension_parabolic,
    numeric_envelope, Envelope, EnvelopeGrid, Lens,
};
use lensrr_core::spaces::{
    ap_characteristic_dyadic, ap_continuous_search, continuous_bmo_search, dyadic_bmo_seminorm,
    monotone_rearrangement, ApParams,
};
use lensrr_core::witness::{a2_constant, a2_extremal_witness, bmo_constant, bmo_extremal_witness};
use lensrr_core::DyadicStepFunction;
use serde_json::{json, Value};

use crate::args::{Class, Command, LensKind, Ratio};
use crate::{suite, svg, Outcome, UsageError};

/// Tolerance of `extend --check`.
pub const CHECK_TOL: f64 = 1e-6;

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn core(e: lensrr_core::Error) -> UsageError {
    UsageError(e.to_string())
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, UsageError> {
    v.ok_or_else(|| usage(format!("missing required flag --{flag}")))
}

fn alpha_of(r: &Ratio) -> Result<f64, UsageError> {
    match (r.n, r.alpha) {
        (Some(_), Some(_)) => Err(usage("give either --n or --alpha, not both")),
        (Some(n), None) if (1..=24).contains(&n) => Ok((-(n as f64)).exp2()),
        (Some(n), None) => Err(usage(format!("--n {n} must be in 1..=24"))),
        (None, Some(a)) if a > 0.0 && a < 1.0 => Ok(a),
        (None, Some(a)) => Err(usage(format!("--alpha {a} must lie in (0, 1)"))),
        (None, None) => Err(usage("missing --n or --alpha")),
    }
}

fn json_out(v: &Value) -> Outcome {
    Outcome { stdout: format!("{v}\n"), code: 0 }
}

fn write(path: &Path, contents: &str) -> Result<(), UsageError> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn ap_params(p1: Option<f64>, p2: Option<f64>, q_const: f64) -> Result<ApParams, UsageError> {
    ApParams::new(required(p1, "p1")?, required(p2, "p2")?, q_const).map_err(core)
}

/// The epigraph threshold of the lens an `A_{p1,p2}` class embeds into.
fn ap_threshold(p: &ApParams) -> Option<f64> {
    let (c, q) = (p.lens_constant(), p.lens_exponent());
    if q > 1.0 {
        Some(epigraph_threshold(c, q))
    } else if q > 0.0 && q < 1.0 {
        Some(epigraph_threshold(c.powf(1.0 / q), 1.0 / q))
    } else {
        None
    }
}

pub fn run(cmd: Command) -> Result<Outcome, UsageError> {
    match cmd {
        Command::Constant { class, ratio, q_const, p1, p2 } => constant(class, &ratio, q_const, p1, p2),
        Command::Extend { lens, eps, c, q, alpha, check, csv, svg } => {
            extend(lens, eps, c, q, alpha, check, csv.as_deref(), svg.as_deref())
        }
        Command::Rearrange { input, output, class, q_const, p1, p2 } => {
            rearrange(&input, output.as_deref(), class, q_const, p1, p2)
        }
        Command::Witness { class, n, eps, q_const, output } => witness(class, n, eps, q_const, output.as_deref()),
        Command::Verify { suite, seed } => {
            let report = suite::run(suite, seed);
            Ok(Outcome { stdout: report.table(), code: if report.all_passed() { 0 } else { 1 } })
        }
    }
}

fn constant(class: Class, ratio: &Ratio, q_const: Option<f64>, p1: Option<f64>, p2: Option<f64>) -> Result<Outcome, UsageError> {
    let alpha = alpha_of(ratio)?;
    let value = match class {
        Class::Bmo => match ratio.n {
            Some(n) => bmo_constant(n),
            None => min_extension_parabolic(1.0, alpha),
        },
        Class::A2 => {
            let q = required(q_const, "Q")?;
            ApParams::a2(q).map_err(core)?;
            match ratio.n {
                Some(n) => a2_constant(q, n),
                None => min_extension_a2(q, alpha),
            }
        }
        Class::Ap => {
            let p = ap_params(p1, p2, required(q_const, "Q")?)?;
            match p.rearranged_constant(alpha).map_err(core)? {
                Some(k) => k,
                None => {
                    let th = ap_threshold(&p).unwrap_or(f64::NAN);
                    return Err(usage(format!(
                        "alpha = {alpha} is at or below the threshold 1 - C^(-1/(q-1)) = {th}: \
                         the rearrangement is unbounded on this class"
                    )));
                }
            }
        }
    };
    Ok(json_out(&json!({ "constant": value })))
}

fn build_lens(kind: LensKind, eps: Option<f64>, c: Option<f64>, q: Option<f64>) -> Result<Lens, UsageError> {
    match kind {
        LensKind::Parabolic => Lens::parabolic(required(eps, "eps")?).map_err(core),
        LensKind::Power => {
            let q = required(q, "q")?;
            if q == 1.0 {
                return Err(usage("q = 1 does not define a lens"));
            }
            Lens::power(required(c, "C")?, q).map_err(core)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn extend(
    kind: LensKind,
    eps: Option<f64>,
    c: Option<f64>,
    q: Option<f64>,
    alpha: f64,
    check: bool,
    csv: Option<&Path>,
    svg_path: Option<&Path>,
) -> Result<Outcome, UsageError> {
    let lens = build_lens(kind, eps, c, q)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(usage(format!("--alpha {alpha} must lie in (0, 1)")));
    }
    let ext = min_extension(&lens, alpha).map_err(core)?;
    let bounded = !matches!(ext, Lens::EpigraphPower { .. });
    let mut out = json!({
        "lens": lens,
        "alpha": alpha,
        "extension": if bounded { "bounded" } else { "epigraph" },
        "constant": if bounded { Some(ext.parameter()) } else { None },
    });
    if !bounded {
        if let Some(th) = lens.exponent().filter(|&q| q > 1.0).map(|q| epigraph_threshold(lens.parameter(), q)) {
            out["threshold"] = json!(th);
        }
    }
    let grid = EnvelopeGrid::for_lens(&lens);
    let envelope: Option<Envelope> = if bounded && (check || csv.is_some() || svg_path.is_some()) {
        Some(numeric_envelope(&lens, alpha, &grid).map_err(core)?)
    } else {
        None
    };
    let mut code = 0;
    if check {
        let pass;
        if let Some(env) = &envelope {
            let numeric = env.points.iter().map(|p| lens.gauge(p)).fold(0.0, f64::max);
            pass = (numeric - ext.parameter()).abs() < CHECK_TOL;
            out["check"] = json!({ "pass": pass, "closed_form": ext.parameter(), "envelope": numeric, "tolerance": CHECK_TOL });
        } else {
            let huge = lens.with_parameter(lens.parameter() * 1e6).map_err(core)?;
            pass = is_alpha_extension(&lens, &ext, alpha, &grid).map_err(core)?
                && !is_alpha_extension(&lens, &huge, alpha, &grid).map_err(core)?;
            out["check"] = json!({ "pass": pass });
        }
        if !pass {
            code = 1;
        }
    }
    if let Some(path) = csv {
        let env = envelope.as_ref().ok_or_else(|| usage("the epigraph has no free boundary to write"))?;
        write(path, &env.to_csv())?;
        out["csv"] = json!(path);
    }
    if let Some(path) = svg_path {
        write(path, &svg::plot(&lens, &ext, alpha, envelope.as_ref()))?;
        out["svg"] = json!(path);
    }
    Ok(Outcome { stdout: format!("{out}\n"), code })
}

fn read_dyadic(path: &Path) -> Result<DyadicStepFunction, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("malformed JSON in {}: {e}", path.display())))?;
    if let Some(w) = v.get_mut("witness") {
        v = w.take();
    }
    serde_json::from_value(v).map_err(|e| usage(format!("not a scalar dyadic step function: {e}")))
}

fn rearrange(
    input: &Path,
    output: Option<&Path>,
    class: Class,
    q_const: f64,
    p1: Option<f64>,
    p2: Option<f64>,
) -> Result<Outcome, UsageError> {
    let f = read_dyadic(input)?;
    let g = monotone_rearrangement(&f);
    let (dyadic, worst, ratio) = match class {
        Class::Bmo => {
            let d = dyadic_bmo_seminorm(&f);
            let w = continuous_bmo_search(&g);
            let ratio = if d > 0.0 { Some(w.value / d) } else { None };
            (d, w, ratio)
        }
        Class::A2 | Class::Ap => {
            let p = if class == Class::A2 { ApParams::a2(q_const).map_err(core)? } else { ap_params(p1, p2, q_const)? };
            let d = ap_characteristic_dyadic(&f, &p).map_err(core)?;
            let w = ap_continuous_search(&g, &p).map_err(core)?;
            let value = w.value;
            (d, w, Some(value))
        }
    };
    let mut out = json!({
        "class": class_name(class),
        "dyadic": dyadic,
        "continuous": worst.value,
        "ratio": ratio,
        "worst_interval": [worst.start, worst.end],
    });
    match output {
        Some(path) => {
            write(path, &serde_json::to_string(&g).expect("serializable"))?;
            out["output"] = json!(path);
        }
        None => out["rearranged"] = json!(g),
    }
    Ok(json_out(&out))
}

fn class_name(c: Class) -> &'static str {
    match c {
        Class::Bmo => "bmo",
        Class::A2 => "a2",
        Class::Ap => "ap",
    }
}

fn witness(class: Class, n: u32, eps: f64, q_const: Option<f64>, output: Option<&Path>) -> Result<Outcome, UsageError> {
    let report = match class {
        Class::Bmo => bmo_extremal_witness(eps, n as usize).map_err(core)?,
        Class::A2 => a2_extremal_witness(required(q_const, "Q")?, n as usize).map_err(core)?,
        Class::Ap => return Err(usage("closed-form witnesses exist for --class bmo and --class a2 only")),
    };
    let text = serde_json::to_string(&report).expect("serializable");
    if let Some(path) = output {
        write(path, &text)?;
    }
    Ok(Outcome { stdout: text + "\n", code: 0 })
}
