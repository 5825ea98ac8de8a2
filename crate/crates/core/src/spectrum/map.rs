use super::range::{range_on_model, rotation_set_2d};
use super::{SpectrumResult, Status, INTERIOR_MARGIN, ROTATION_DIRECTIONS};
use crate::error::{Error, Result};
use crate::function::LocallyConstantFunction;
use crate::linalg::PerronOptions;
use crate::roots::{expand_bracket, solve_increasing, RootOptions};
use crate::sft::Sft;
use crate::thermo::{EdgeModel, PressureResult};

/// Perron tolerance used inside dual solves.
pub(crate) fn inner_opts(tol: f64) -> PerronOptions {
    PerronOptions::with_tol((1e-3 * tol).clamp(1e-14, 1e-12))
}

/// Largest |β| for which `exp(β·spread)` stays representable.
pub(crate) fn beta_limit(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    600.0 / (hi - lo).max(1e-300)
}

pub(crate) fn axpy(base: &[f64], beta: f64, g: &[f64]) -> Vec<f64> {
    base.iter().zip(g).map(|(u, x)| u + beta * x).collect()
}

/// Solve `∫g dμ_β = α` for the equilibrium `μ_β` of `u + βg`.
pub(crate) fn solve_tilt(
    model: &EdgeModel,
    u: &[f64],
    g: &[f64],
    alpha: f64,
    tol: f64,
) -> Result<(f64, PressureResult)> {
    let opts = inner_opts(tol);
    let mean_gap = |beta: f64| -> Result<f64> {
        let p = model.pressure(&axpy(u, beta, g), &opts)?;
        Ok(model.edge_mean(&p.q, &p.pi, g) - alpha)
    };
    let limit = beta_limit(g);
    let (lo, hi) = expand_bracket(mean_gap, 0.0, 1.0, limit)?.ok_or_else(|| {
        Error::TiltDivergence(format!("no bracket for mean {alpha} with |beta| <= {limit:.3e}"))
    })?;
    let beta = if lo == hi {
        lo
    } else {
        solve_increasing(
            |b| Ok((mean_gap(b)?, None)),
            lo,
            hi,
            RootOptions { f_tol: 0.1 * tol, x_tol: 1e-16, max_iter: 400 },
        )
        .map_err(|e| Error::TiltDivergence(format!("bracket [{lo}, {hi}]: {e}")))?
        .x
    };
    let p = model.pressure(&axpy(u, beta, g), &opts)?;
    Ok((beta, p))
}

/// `H(α) = sup{h_μ : ∫g dμ = α} = inf_β P(βg) − βα`.
pub fn conditional_entropy_spectrum(s: &Sft, g: &LocallyConstantFunction, alpha: f64, tol: f64) -> Result<SpectrumResult> {
    conditional_pressure_spectrum(s, g, None, alpha, tol)
}

/// `sup{h_μ + ∫u dμ : ∫g dμ = α} = inf_β P(u + βg) − βα`.
pub fn conditional_pressure_spectrum(
    s: &Sft,
    g: &LocallyConstantFunction,
    u: Option<&LocallyConstantFunction>,
    alpha: f64,
    tol: f64,
) -> Result<SpectrumResult> {
    let fs: Vec<&LocallyConstantFunction> = std::iter::once(g).chain(u).collect();
    let model = EdgeModel::for_functions(s, &fs)?;
    let gv = model.edge_values(g)?;
    let uv = match u {
        Some(u) => model.edge_values(u)?,
        None => vec![0.0; gv.len()],
    };
    range_on_model(&model, &gv)?.check_interior(alpha)?;
    let (beta, p) = solve_tilt(&model, &uv, &gv, alpha, tol)?;
    let mean = model.edge_mean(&p.q, &p.pi, &gv);
    let entropy = p.entropy();
    let value = p.value - beta * alpha;
    let witness = model.component(p.q, p.pi)?;
    Ok(SpectrumResult {
        alpha: vec![alpha],
        value,
        dual: vec![beta],
        witness,
        witness_entropy: entropy,
        witness_mean: vec![mean],
        status: Status::Interior,
    })
}

/// State of the two-observable dual problem at `β`.
struct Dual2 {
    value: f64,
    grad: [f64; 2],
    p: PressureResult,
}

/// Minimize `P(u + β₁g + β₂h) − β·α` (convex); returns `β` and the
/// equilibrium at the minimizer.
pub(crate) fn solve_tilt_2d(
    model: &EdgeModel,
    u: &[f64],
    g: &[f64],
    h: &[f64],
    alpha: [f64; 2],
    tol: f64,
) -> Result<([f64; 2], PressureResult)> {
    let opts = inner_opts(tol);
    let eval = |b: [f64; 2]| -> Result<Dual2> {
        let pot: Vec<f64> = u.iter().zip(g).zip(h).map(|((u, g), h)| u + b[0] * g + b[1] * h).collect();
        let p = model.pressure(&pot, &opts)?;
        let mg = model.edge_mean(&p.q, &p.pi, g);
        let mh = model.edge_mean(&p.q, &p.pi, h);
        Ok(Dual2 { value: p.value - b[0] * alpha[0] - b[1] * alpha[1], grad: [mg - alpha[0], mh - alpha[1]], p })
    };
    let gtol = 0.1 * tol;
    let norm = |g: [f64; 2]| g[0].abs().max(g[1].abs());
    let mut beta = [0.0f64; 2];
    let mut cur = eval(beta)?;
    let mut stalled = false;
    for _ in 0..200 {
        if norm(cur.grad) <= gtol {
            return Ok((beta, cur.p));
        }
        // finite-difference Hessian of the dual (Jacobian of the means)
        let mut hess = [[0.0; 2]; 2];
        for k in 0..2 {
            let eps = 1e-5 * (1.0 + beta[k].abs());
            let mut bp = beta;
            let mut bm = beta;
            bp[k] += eps;
            bm[k] -= eps;
            let (gp, gm) = (eval(bp)?.grad, eval(bm)?.grad);
            for r in 0..2 {
                hess[r][k] = (gp[r] - gm[r]) / (2.0 * eps);
            }
        }
        let off = 0.5 * (hess[0][1] + hess[1][0]);
        let det = hess[0][0] * hess[1][1] - off * off;
        let dir = if hess[0][0] > 0.0 && det > 0.0 {
            [
                -(hess[1][1] * cur.grad[0] - off * cur.grad[1]) / det,
                -(-off * cur.grad[0] + hess[0][0] * cur.grad[1]) / det,
            ]
        } else {
            [-cur.grad[0], -cur.grad[1]]
        };
        let slope = dir[0] * cur.grad[0] + dir[1] * cur.grad[1];
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = [beta[0] + t * dir[0], beta[1] + t * dir[1]];
            if trial.iter().all(|b| b.abs() < 1e4) {
                if let Ok(next) = eval(trial) {
                    if next.value <= cur.value + 1e-4 * t * slope || norm(next.grad) < 0.5 * norm(cur.grad) {
                        accepted = Some((trial, next));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((b, next)) => {
                beta = b;
                cur = next;
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    if stalled || norm(cur.grad) > gtol {
        // coordinate-wise monotone solves
        for _ in 0..500 {
            for k in 0..2 {
                let (fixed, other) = if k == 0 { (h, g) } else { (g, h) };
                let base: Vec<f64> = u.iter().zip(fixed).map(|(u, f)| u + beta[1 - k] * f).collect();
                let (b, _) = solve_tilt(model, &base, other, alpha[k], tol)?;
                beta[k] = b;
            }
            cur = eval(beta)?;
            if norm(cur.grad) <= gtol {
                return Ok((beta, cur.p));
            }
        }
        return Err(Error::NotConverged { what: "two-observable dual solve".into(), iterations: 700 });
    }
    Ok((beta, cur.p))
}

/// `H(α₁, α₂) = sup{h_μ : ∫g dμ = α₁, ∫h dμ = α₂}`.
pub fn conditional_entropy_spectrum_2d(
    s: &Sft,
    g: &LocallyConstantFunction,
    h: &LocallyConstantFunction,
    alpha: [f64; 2],
    tol: f64,
) -> Result<SpectrumResult> {
    rotation_set_2d(s, g, h, ROTATION_DIRECTIONS)?.check_interior(alpha, INTERIOR_MARGIN)?;
    let model = EdgeModel::for_functions(s, &[g, h])?;
    let gv = model.edge_values(g)?;
    let hv = model.edge_values(h)?;
    let zero = vec![0.0; gv.len()];
    let (beta, p) = solve_tilt_2d(&model, &zero, &gv, &hv, alpha, tol)?;
    let mean = vec![model.edge_mean(&p.q, &p.pi, &gv), model.edge_mean(&p.q, &p.pi, &hv)];
    let entropy = p.entropy();
    let value = p.value - beta[0] * alpha[0] - beta[1] * alpha[1];
    let witness = model.component(p.q, p.pi)?;
    Ok(SpectrumResult {
        alpha: alpha.to_vec(),
        value,
        dual: beta.to_vec(),
        witness,
        witness_entropy: entropy,
        witness_mean: mean,
        status: Status::Interior,
    })
}
