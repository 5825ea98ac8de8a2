use super::map::{beta_limit, inner_opts};
use super::range::ratio_range_on_model;
use super::{SpectrumResult, Status};
use crate::error::{Error, Result};
use crate::function::LocallyConstantFunction;
use crate::linalg::PerronOptions;
use crate::roots::{expand_bracket, solve_increasing, RootOptions};
use crate::suspension::SuspensionSystem;
use crate::thermo::{EdgeModel, PressureResult};

/// Root `s` of `P(v − sρ) = 0`, with the equilibrium there.
pub(crate) fn pressure_root(
    model: &EdgeModel,
    v: &[f64],
    rho: &[f64],
    opts: &PerronOptions,
    tol: f64,
) -> Result<(f64, PressureResult)> {
    let shifted = |s: f64| -> Vec<f64> { v.iter().zip(rho).map(|(a, r)| a - s * r).collect() };
    let p0 = model.pressure(v, opts)?.value;
    let rmin = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // P(v) − s·ρmax ≤ P(v − sρ) ≤ P(v) − s·ρmin for s ≥ 0, reversed for s < 0
    let (a, b) = (p0 / rmax, p0 / rmin);
    let (lo, hi) = (a.min(b), a.max(b));
    let s = if p0 == 0.0 {
        0.0
    } else if hi - lo <= f64::EPSILON * hi.abs() {
        lo
    } else {
        let pad = 1e-12 * (1.0 + hi.abs());
        solve_increasing(
            |s| {
                let p = model.pressure(&shifted(s), opts)?;
                Ok((-p.value, Some(model.edge_mean(&p.q, &p.pi, rho))))
            },
            lo - pad,
            hi + pad,
            RootOptions { f_tol: tol, x_tol: 1e-16, max_iter: 400 },
        )?
        .x
    };
    let p = model.pressure(&shifted(s), opts)?;
    Ok((s, p))
}

/// Flow conditional spectrum: the largest Abramov entropy among measures
/// whose flow average of the induced observable `phi` is `alpha`.
pub fn flow_conditional_spectrum(
    sys: &SuspensionSystem,
    phi: &LocallyConstantFunction,
    alpha: f64,
    tol: f64,
) -> Result<SpectrumResult> {
    let base = sys.base();
    let model = EdgeModel::for_functions(base, &[phi, sys.roof()])?;
    let pv = model.edge_values(phi)?;
    let rv = model.edge_values(sys.roof())?;
    ratio_range_on_model(&model, &pv, &rv)?.as_birkhoff().check_interior(alpha)?;
    let psi: Vec<f64> = pv.iter().zip(&rv).map(|(p, r)| p - alpha * r).collect();
    let opts = inner_opts(tol);
    let stol = 1e-3 * tol;
    // s(β) is convex, and ∫ψ dμ_β has the sign of s′(β)
    let f1 = |beta: f64| -> Result<f64> {
        let v: Vec<f64> = psi.iter().map(|x| beta * x).collect();
        let (_, p) = pressure_root(&model, &v, &rv, &opts, stol)?;
        let mpsi = model.edge_mean(&p.q, &p.pi, &psi);
        let mrho = model.edge_mean(&p.q, &p.pi, &rv);
        Ok(mpsi / mrho)
    };
    let limit = beta_limit(&psi);
    let (lo, hi) = expand_bracket(f1, 0.0, 1.0, limit)?
        .ok_or_else(|| Error::TiltDivergence(format!("no bracket for flow average {alpha} with |beta| <= {limit:.3e}")))?;
    let beta = if lo == hi {
        lo
    } else {
        solve_increasing(|b| Ok((f1(b)?, None)), lo, hi, RootOptions { f_tol: 0.1 * tol, x_tol: 1e-16, max_iter: 400 })
            .map_err(|e| Error::TiltDivergence(format!("bracket [{lo}, {hi}]: {e}")))?
            .x
    };
    let v: Vec<f64> = psi.iter().map(|x| beta * x).collect();
    let (s, p) = pressure_root(&model, &v, &rv, &opts, stol)?;
    let mphi = model.edge_mean(&p.q, &p.pi, &pv);
    let mrho = model.edge_mean(&p.q, &p.pi, &rv);
    let entropy = p.entropy();
    let witness = model.component(p.q, p.pi)?;
    Ok(SpectrumResult {
        alpha: vec![alpha],
        value: s,
        dual: vec![beta, s],
        witness,
        witness_entropy: entropy / mrho,
        witness_mean: vec![mphi / mrho],
        status: Status::Interior,
    })
}
