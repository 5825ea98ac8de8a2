use crate::args::Command;
use crate::output::{csv, CliError, CliResult, Sink};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::Path;
use symflow::horseshoe::{self, HorseshoeOptions, HorseshoePack};
use symflow::io::fmt17;
use symflow::lorenz::{self, LorenzModel};
use symflow::spectrum::{self, SpectrumResult};
use symflow::suspension::SuspensionSystem;
use symflow::witness::{self, Proximity, VerificationReport, WitnessTolerance};
use symflow::{thermo, InvariantMeasure, LocallyConstantFunction as Lcf, Sft};

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_sft(path: &Path) -> CliResult<Sft> {
    Ok(Sft::from_json_value(&read_json(path)?)?)
}

fn load_fn(s: &Sft, path: &Path) -> CliResult<Lcf> {
    Ok(Lcf::from_json_value(s, &read_json(path)?)?)
}

fn load_suspension(path: &Path) -> CliResult<SuspensionSystem> {
    Ok(SuspensionSystem::from_json_value(&read_json(path)?)?)
}

fn positive(name: &str, x: f64) -> CliResult<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::input(format!("{name} must be positive, got {x}")))
    }
}

/// Explicit values, or `lo,hi,count` evenly spaced with both ends.
fn points(list: &[f64], grid: &Option<Vec<f64>>, name: &str) -> CliResult<Vec<f64>> {
    let mut out = list.to_vec();
    if let Some(g) = grid {
        let [lo, hi, n] = g[..] else {
            return Err(CliError::input(format!("--grid for {name} takes lo,hi,count")));
        };
        if n < 1.0 || n.fract() != 0.0 {
            return Err(CliError::input("grid count must be a positive integer"));
        }
        let n = n as usize;
        out.extend((0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }));
    }
    if out.is_empty() {
        return Err(CliError::input(format!("no {name} values given")));
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(CliError::input(format!("{name} values must be finite")));
    }
    Ok(out)
}

/// Run `f` over the points in parallel, keeping input order and failing on
/// the first error in that order.
fn sweep<T: Send>(xs: &[f64], f: impl Fn(f64) -> symflow::Result<T> + Sync) -> CliResult<Vec<T>> {
    let results: Vec<symflow::Result<T>> = xs.par_iter().map(|&x| f(x)).collect();
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}

fn status_str(s: spectrum::Status) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn measure_of(c: symflow::MarkovComponent) -> CliResult<InvariantMeasure> {
    Ok(InvariantMeasure::new(vec![(1.0, c)])?)
}

pub fn run(command: Command, sink: &Sink) -> CliResult<()> {
    match command {
        Command::Entropy { sft, tol } => {
            positive("tol", tol)?;
            let s = load_sft(&sft)?;
            let h = s.topological_entropy(tol)?;
            match sink.out {
                None => sink.text(&format!("{h}\n")),
                Some(_) => sink.json(json!({
                    "entropy": h,
                    "k": s.k(),
                    "removed": s.removed(),
                })),
            }
        }
        Command::Pressure { sft, g, beta, grid, tol } => {
            positive("tol", tol)?;
            let s = load_sft(&sft)?;
            let g = load_fn(&s, &g)?;
            let betas = points(&beta, &grid, "beta")?;
            let rows = sweep(&betas, |b| {
                let p = thermo::pressure(&s, &g.scale(b), tol)?;
                let eq = &p.equilibrium;
                Ok(vec![fmt17(b), fmt17(p.value), fmt17(eq.integrate(&g)), fmt17(eq.entropy())])
            })?;
            sink.text(&csv(&["beta", "pressure", "mean", "entropy"], &rows))
        }
        Command::Spectrum { sft, g, u, alpha, grid, tol } => {
            positive("tol", tol)?;
            let s = load_sft(&sft)?;
            let g = load_fn(&s, &g)?;
            let u = u.map(|p| load_fn(&s, &p)).transpose()?;
            let alphas = points(&alpha, &grid, "alpha")?;
            let rows = sweep(&alphas, |a| {
                let r = spectrum::conditional_pressure_spectrum(&s, &g, u.as_ref(), a, tol)?;
                Ok(vec![
                    fmt17(a),
                    fmt17(r.value),
                    fmt17(r.dual[0]),
                    fmt17(r.witness_entropy),
                    fmt17(r.witness_mean[0]),
                    status_str(r.status),
                ])
            })?;
            sink.text(&csv(&["alpha", "H", "beta", "witness_entropy", "witness_mean", "status"], &rows))
        }
        Command::Spectrum2d { sft, g, h, alpha, tol } => {
            positive("tol", tol)?;
            let s = load_sft(&sft)?;
            let g = load_fn(&s, &g)?;
            let h = load_fn(&s, &h)?;
            if alpha.is_empty() || alpha.len() % 2 != 0 {
                return Err(CliError::input("--alpha takes pairs a1,a2"));
            }
            let targets: Vec<[f64; 2]> = alpha.chunks(2).map(|c| [c[0], c[1]]).collect();
            let rs = spectrum::rotation_set_2d(&s, &g, &h, spectrum::ROTATION_DIRECTIONS)?;
            let results: Vec<symflow::Result<SpectrumResult>> = targets
                .par_iter()
                .map(|&a| spectrum::conditional_entropy_spectrum_2d(&s, &g, &h, a, tol))
                .collect();
            let mut records = Vec::new();
            for r in results {
                let r = r?;
                records.push(json!({
                    "alpha": r.alpha,
                    "H": r.value,
                    "beta": r.dual,
                    "witness_entropy": r.witness_entropy,
                    "witness_mean": r.witness_mean,
                    "status": r.status,
                }));
            }
            sink.json(json!({
                "rotation_set": rotation_json(&rs),
                "records": records,
            }))
        }
        Command::RotationSet { sft, g, h, directions } => {
            let s = load_sft(&sft)?;
            let g = load_fn(&s, &g)?;
            let h = load_fn(&s, &h)?;
            let rs = spectrum::rotation_set_2d(&s, &g, &h, directions)?;
            sink.json(rotation_json(&rs))
        }
        Command::FlowEntropy { suspension, tol } => {
            positive("tol", tol)?;
            let sys = load_suspension(&suspension)?;
            let fe = sys.flow_top_entropy(tol)?;
            let mu = measure_of(fe.equilibrium)?;
            sink.json(json!({
                "flow_entropy": fe.value,
                "pressure_residual": fe.pressure_residual,
                "base_entropy": sys.base().topological_entropy(tol)?,
                "maximal_measure": mu.to_json_value(false),
            }))
        }
        Command::FlowSpectrum { suspension, phi, alpha, grid, tol } => {
            positive("tol", tol)?;
            let sys = load_suspension(&suspension)?;
            let phi = load_fn(sys.base(), &phi)?;
            let alphas = points(&alpha, &grid, "alpha")?;
            let rows = sweep(&alphas, |a| {
                let r = spectrum::flow_conditional_spectrum(&sys, &phi, a, tol)?;
                Ok(vec![
                    fmt17(a),
                    fmt17(r.value),
                    fmt17(r.dual[0]),
                    fmt17(r.dual[1]),
                    fmt17(r.witness_entropy),
                    fmt17(r.witness_mean[0]),
                    status_str(r.status),
                ])
            })?;
            sink.text(&csv(&["alpha", "H", "beta", "s", "witness_entropy", "witness_mean", "status"], &rows))
        }
        Command::Horseshoe { sft, measure, eta, zeta, n_max, seed, samples } => {
            positive("eta", eta)?;
            positive("zeta", zeta)?;
            let s = load_sft(&sft)?;
            let measures = measure
                .iter()
                .map(|p| Ok(InvariantMeasure::from_json_value(Some(&s), &read_json(p)?)?))
                .collect::<CliResult<Vec<_>>>()?;
            let pack = horseshoe::build_multi_horseshoe(&s, &measures, &HorseshoeOptions { eta, zeta, n_max, seed, samples })?;
            let mut v = pack.to_json_value();
            v["pass"] = json!(pack.certificate.pass);
            sink.json(v)
        }
        Command::Certify { pack, samples, seed, suspension } => {
            let mut v = read_json(&pack)?;
            // envelope added by `horseshoe`
            if let Some(obj) = v.as_object_mut() {
                obj.remove("meta");
                obj.remove("pass");
            }
            let pack = HorseshoePack::from_json_value(&v, samples, seed)?;
            let mut v = json!({ "certificate": to_value(&pack.certificate)? });
            let mut pass = pack.certificate.pass;
            if let Some(p) = suspension {
                let sys = load_suspension(&p)?;
                let fc = horseshoe::lift_pack_to_flow(&sys, &pack, samples, seed)?;
                pass &= fc.pass;
                v["flow_certificate"] = to_value(&fc)?;
            }
            v["pass"] = json!(pass);
            sink.json(v)
        }
        Command::Witness { request } => {
            let req_value = read_json(&request)?;
            let (mu, details) = build_witness(&req_value)?;
            let report = verify_against(&mu, Some(&req_value))?;
            let pass = report.pass;
            sink.json(json!({
                "measure": mu.to_json_value(true),
                "request": req_value,
                "witness": details,
                "report": to_value(&report)?,
            }))?;
            failed_unless(pass)
        }
        Command::Verify { measure } => {
            let v = read_json(&measure)?;
            let (mv, request) = match v.get("measure") {
                Some(m) => (m, v.get("request")),
                None => (&v, None),
            };
            let mu = InvariantMeasure::from_json_value(None, mv)?;
            let report = verify_against(&mu, request)?;
            let pass = report.pass;
            sink.json(json!({ "report": to_value(&report)? }))?;
            failed_unless(pass)
        }
        Command::LorenzValidate { model, grid } => {
            if grid < 2 {
                return Err(CliError::input("grid must be at least 2"));
            }
            let m = LorenzModel::from_json_value(&read_json(&model)?)?;
            let report = lorenz::validate_lorenz(&m, grid);
            sink.json(to_value(&report)?)
        }
        Command::LorenzSimulate { model, x0, y0, n, stats } => {
            let m = LorenzModel::from_json_value(&read_json(&model)?)?;
            let t = lorenz::simulate_return_map(&m, x0, y0, n)?;
            let mut running = 0.0;
            let rows: Vec<Vec<String>> = t
                .points
                .iter()
                .zip(&t.itinerary)
                .enumerate()
                .map(|(k, (&(x, y), &sym))| {
                    running += f64::from(sym);
                    vec![k.to_string(), fmt17(x), fmt17(y), sym.to_string(), fmt17(running / (k + 1) as f64)]
                })
                .collect();
            sink.text(&csv(&["k", "x", "y", "symbol", "running_mean"], &rows))?;
            if let Some(path) = stats {
                let st = lorenz::empirical_statistics(&m, &t, |x, _| if x > 0.0 { 1.0 } else { 0.0 })?;
                sink.json_to(
                    &path,
                    json!({
                        "points": t.points.len(),
                        "halted": t.halted,
                        "mean_symbol": st.mean,
                        "exponent": st.exponent,
                    }),
                )?;
            }
            Ok(())
        }
        Command::Run { .. } => Err(CliError::input("nested run")),
    }
}

fn failed_unless(pass: bool) -> CliResult<()> {
    if pass {
        Ok(())
    } else {
        Err(CliError::Domain { name: "verification_failed", message: "verification report has failing checks".into() })
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| CliError::input(format!("serialize: {e}")))
}

fn rotation_json(rs: &spectrum::RotationSet) -> Value {
    let witnesses: Vec<Value> = rs
        .witnesses
        .iter()
        .map(|(w, p)| json!({ "cycle": w.0, "point": [p[0], p[1]] }))
        .collect();
    json!({
        "support": rs.support.iter().map(|(t, v)| vec![*t, *v]).collect::<Vec<_>>(),
        "outer": rs.outer.iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
        "inner": rs.inner.iter().map(|p| p.to_vec()).collect::<Vec<_>>(),
        "witnesses": witnesses,
        "outer_area": rs.outer_area(),
        "inner_area": rs.inner_area(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProximityJson {
    measure: Value,
    zeta: f64,
}

/// Witness request. Exactly one of `sft`, `suspension`; functions and
/// systems are inline JSON objects.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessRequest {
    sft: Option<Value>,
    suspension: Option<Value>,
    g: Value,
    h: Option<Value>,
    u: Option<Value>,
    alpha: Value,
    c: Option<f64>,
    h_cap: Option<f64>,
    tol_mean: Option<f64>,
    tol_ent: Option<f64>,
    proximity: Option<ProximityJson>,
}

enum Target {
    Scalar(f64),
    Pair([f64; 2]),
}

/// Parsed request with its system loaded.
struct Request {
    sft: Sft,
    suspension: Option<SuspensionSystem>,
    g: Lcf,
    h: Option<Lcf>,
    u: Option<Lcf>,
    alpha: Target,
    c: Option<f64>,
    h_cap: Option<f64>,
    tol: WitnessTolerance,
    proximity: Option<(InvariantMeasure, f64)>,
}

fn parse_request(v: &Value) -> CliResult<Request> {
    let r: WitnessRequest =
        serde_json::from_value(v.clone()).map_err(|e| CliError::input(format!("witness request: {e}")))?;
    let (sft, suspension) = match (&r.sft, &r.suspension) {
        (Some(s), None) => (Sft::from_json_value(s)?, None),
        (None, Some(sys)) => {
            let sys = SuspensionSystem::from_json_value(sys)?;
            (sys.base().clone(), Some(sys))
        }
        _ => return Err(CliError::input("witness request needs exactly one of \"sft\", \"suspension\"")),
    };
    let alpha = match &r.alpha {
        Value::Number(n) => Target::Scalar(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(x), Some(y)) => Target::Pair([x, y]),
            _ => return Err(CliError::input("alpha pair must hold numbers")),
        },
        _ => return Err(CliError::input("alpha must be a number or a pair")),
    };
    let defaults = WitnessTolerance::default();
    let tol = WitnessTolerance { mean: r.tol_mean.unwrap_or(defaults.mean), entropy: r.tol_ent.unwrap_or(defaults.entropy) };
    positive("tol_mean", tol.mean)?;
    positive("tol_ent", tol.entropy)?;
    let parse = |v: &Value| Lcf::from_json_value(&sft, v);
    let proximity = match r.proximity {
        None => None,
        Some(p) => {
            positive("zeta", p.zeta)?;
            Some((InvariantMeasure::from_json_value(Some(&sft), &p.measure)?, p.zeta))
        }
    };
    Ok(Request {
        g: parse(&r.g)?,
        h: r.h.as_ref().map(parse).transpose()?,
        u: r.u.as_ref().map(parse).transpose()?,
        alpha,
        c: r.c,
        h_cap: r.h_cap,
        tol,
        proximity,
        sft,
        suspension,
    })
}

fn spectrum_details(r: &SpectrumResult) -> Value {
    json!({
        "kind": "spectrum",
        "H": r.value,
        "dual": r.dual,
        "entropy": r.witness_entropy,
        "mean": r.witness_mean,
    })
}

fn build_witness(v: &Value) -> CliResult<(InvariantMeasure, Value)> {
    let r = parse_request(v)?;
    let s = &r.sft;
    let inter = |w: witness::Witness, kind: &str| -> CliResult<(InvariantMeasure, Value)> {
        let details = json!({
            "kind": kind,
            "mean": w.mean,
            "entropy": w.entropy,
            "chi": w.chi,
            "level": w.level,
            "band": [w.band.0, w.band.1],
            "t": w.t,
            "beta": w.beta,
            "endpoint": w.endpoint,
            "d_star": w.d_star,
        });
        Ok((measure_of(w.component)?, details))
    };
    match (&r.alpha, &r.suspension) {
        (Target::Pair(a), None) => {
            let h = r.h.as_ref().ok_or_else(|| CliError::input("a pair target needs \"h\""))?;
            let res = witness::birkhoff_witness_2d(s, &r.g, h, *a, r.tol.mean)?;
            let details = spectrum_details(&res);
            Ok((measure_of(res.witness)?, details))
        }
        (Target::Pair(_), Some(_)) => Err(CliError::input("flow witnesses take a scalar alpha")),
        (Target::Scalar(a), Some(sys)) => match r.c {
            Some(c) => inter(witness::flow_intermediate_witness(sys, &r.g, *a, c, r.tol)?, "flow_intermediate"),
            None => {
                let res = spectrum::flow_conditional_spectrum(sys, &r.g, *a, r.tol.mean)?;
                let details = spectrum_details(&res);
                Ok((measure_of(res.witness)?, details))
            }
        },
        (Target::Scalar(a), None) => {
            if let Some(cap) = r.h_cap {
                positive("h_cap", cap)?;
                let w = witness::low_entropy_mean_witness(s, &r.g, *a, cap, r.tol.mean)?;
                let details = json!({
                    "kind": "low_entropy",
                    "p": w.p,
                    "q": w.q,
                    "entropy": w.entropy,
                    "mean": w.mean,
                    "cycles": [w.cycles.0 .0.clone(), w.cycles.1 .0.clone()],
                });
                return Ok((measure_of(w.component)?, details));
            }
            match r.c {
                Some(c) => {
                    let prox = r.proximity.as_ref().map(|(m, z)| Proximity { measure: m, zeta: *z });
                    inter(witness::intermediate_witness(s, &r.g, *a, c, r.u.as_ref(), prox, r.tol)?, "intermediate")
                }
                None => {
                    let res = spectrum::conditional_pressure_spectrum(s, &r.g, r.u.as_ref(), *a, r.tol.mean)?;
                    let details = spectrum_details(&res);
                    Ok((measure_of(res.witness)?, details))
                }
            }
        }
    }
}

/// Constraints implied by a request, checked through the independent
/// verification path. Without a request only the structural checks run.
fn verify_against(mu: &InvariantMeasure, request: Option<&Value>) -> CliResult<VerificationReport> {
    let Some(v) = request else {
        return Ok(witness::verify_measure(mu, &[], None, WitnessTolerance::default()));
    };
    let r = parse_request(v)?;
    if mu.sft() != &r.sft {
        return Err(CliError::input("measure and request live on different SFTs"));
    }
    let mut report = match (&r.alpha, &r.suspension) {
        (Target::Pair(a), _) => {
            let h = r.h.as_ref().ok_or_else(|| CliError::input("a pair target needs \"h\""))?;
            let means = [("g".to_string(), &r.g, a[0]), ("h".to_string(), h, a[1])];
            witness::verify_measure(mu, &means, None, r.tol)
        }
        (Target::Scalar(a), Some(sys)) => {
            // flow average α ⇔ ∫(φ − αρ) = 0; flow entropy c ⇔ h − c∫ρ = 0
            let shifted = r.g.linear(&r.sft, 1.0, sys.roof(), -a)?;
            let means = [("g-alpha*roof".to_string(), &shifted, 0.0)];
            match r.c {
                Some(c) => {
                    let u = sys.roof().scale(-c);
                    witness::verify_measure(mu, &means, Some((0.0, Some(&u))), r.tol)
                }
                None => witness::verify_measure(mu, &means, None, r.tol),
            }
        }
        (Target::Scalar(a), None) => {
            let means = [("g".to_string(), &r.g, *a)];
            let level = match (r.h_cap, r.c) {
                (None, Some(c)) => Some((c, r.u.as_ref())),
                _ => None,
            };
            witness::verify_measure(mu, &means, level, r.tol)
        }
    };
    if let (Target::Scalar(_), None, Some(cap)) = (&r.alpha, &r.suspension, r.h_cap) {
        let h = witness::block_entropy(mu);
        report.checks.push(witness::Check {
            name: "entropy_cap".into(),
            value: h,
            target: Some(cap),
            tolerance: Some(r.tol.entropy),
            pass: h <= cap + r.tol.entropy,
        });
        report.pass = report.checks.iter().all(|c| c.pass);
    }
    Ok(report)
}
