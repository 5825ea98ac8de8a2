//! Ergodic witnesses: Markov measures with prescribed Birkhoff averages and
//! prescribed entropy (or pressure of an affine functional `χ(μ) = ∫u dμ`).

use crate::error::{Error, Result};
use crate::function::LocallyConstantFunction;
use crate::graph;
use crate::linalg::Mat;
use crate::measures::{d_star, stationary, InvariantMeasure, MarkovComponent, D_STAR_DEPTH};
use crate::roots::bisect;
use crate::sft::{Sft, Word};
use crate::spectrum::map::solve_tilt;
use crate::spectrum::{
    birkhoff_range, conditional_entropy_spectrum_2d, conditional_pressure_spectrum, rotation_set_2d, SpectrumResult,
    ROTATION_DIRECTIONS,
};
use crate::suspension::SuspensionSystem;
use crate::thermo::EdgeModel;
use serde::Serialize;

/// Mass seeded on every admissible transition along the interpolation
/// path, keeping all intermediate chains irreducible.
pub const PATH_PADDING: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct WitnessTolerance {
    pub mean: f64,
    pub entropy: f64,
}

impl Default for WitnessTolerance {
    fn default() -> Self {
        WitnessTolerance { mean: 1e-9, entropy: 1e-7 }
    }
}

fn interior_or_not(e: Error) -> Error {
    match e {
        Error::Boundary { alpha, .. } => Error::NotInterior(vec![alpha]),
        e => e,
    }
}

/// A two-cycle chain of small entropy.
#[derive(Clone, Debug)]
pub struct LowWitness {
    pub component: MarkovComponent,
    /// Leave probabilities at the two junctions.
    pub p: f64,
    pub q: f64,
    pub entropy: f64,
    pub mean: f64,
    pub cycles: (Word, Word),
}

fn block(w: &[usize], start: usize, m: usize) -> Vec<usize> {
    (0..m).map(|t| w[(start + t) % w.len()]).collect()
}

fn chain_entropy(q: &Mat, pi: &[f64]) -> f64 {
    let mut h = 0.0;
    for (i, p) in pi.iter().enumerate() {
        if *p > 0.0 {
            h += p * q.row(i).iter().filter(|&&v| v > 0.0 && v < 1.0).map(|&v| -v * v.ln()).sum::<f64>();
        }
    }
    h.max(0.0)
}

/// Markov chain hopping between the periodic orbits of `a` (mean below
/// `alpha`) and `b` (mean above), with mean `alpha` and entropy at most
/// `h_cap`.
pub fn two_cycle_witness(
    s: &Sft,
    g: &LocallyConstantFunction,
    a: &Word,
    b: &Word,
    alpha: f64,
    h_cap: f64,
    tol: f64,
    min_memory: usize,
) -> Result<LowWitness> {
    if !(h_cap > 0.0) {
        return Err(Error::InvalidInput("entropy cap must be positive".into()));
    }
    let floor = min_memory.max(g.memory().saturating_sub(1)).max(1);
    let memory = (floor..=floor + a.len() + b.len() + 2)
        .find(|&m| {
            let mut ab: Vec<Vec<usize>> = (0..a.len()).map(|i| block(a, i, m)).collect();
            ab.extend((0..b.len()).map(|i| block(b, i, m)));
            let total = ab.len();
            ab.sort();
            ab.dedup();
            ab.len() == total
        })
        .ok_or_else(|| Error::InvalidInput("cycles share every block".into()))?;
    let model = EdgeModel::new(s, memory + 1)?;
    debug_assert_eq!(model.state_memory(), memory);
    let code = model.code();
    let n = code.len();
    let gv = model.edge_values(g)?;
    let nodes = |w: &Word| -> Vec<usize> { (0..w.len()).map(|i| code.index[block(w, i, memory).as_slice()]).collect() };
    let (ca, cb) = (nodes(a), nodes(b));
    let adj = code.sft.adjacency();
    let p1 = graph::shortest_path_between(&adj, &ca, &cb)
        .ok_or_else(|| Error::NotIrreducible("no connector between the cycles".into()))?;
    let p2 = graph::shortest_path_between(&adj, &cb, &ca)
        .ok_or_else(|| Error::NotIrreducible("no connector between the cycles".into()))?;
    let (ja, jb) = (p1[0], p2[0]);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_union = vec![false; n];
    let add = |x: usize, y: usize, succ: &mut Vec<Vec<usize>>| {
        if !succ[x].contains(&y) {
            succ[x].push(y);
        }
    };
    for c in [&ca, &cb] {
        for i in 0..c.len() {
            add(c[i], c[(i + 1) % c.len()], &mut succ);
            in_union[c[i]] = true;
        }
    }
    for p in [&p1, &p2] {
        for w in p.windows(2) {
            add(w[0], w[1], &mut succ);
            in_union[w[0]] = true;
            in_union[w[1]] = true;
        }
    }
    let next_a = ca[(ca.iter().position(|&x| x == ja).expect("junction on cycle") + 1) % ca.len()];
    let next_b = cb[(cb.iter().position(|&x| x == jb).expect("junction on cycle") + 1) % cb.len()];
    let build = |p: f64, q: f64| -> Mat {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            if !in_union[i] {
                let out: Vec<usize> = code.sft.successors(i).collect();
                for &j in &out {
                    m[(i, j)] = 1.0 / out.len() as f64;
                }
            } else if i == ja {
                m[(i, next_a)] = 1.0 - p;
                m[(i, p1[1])] += p;
            } else if i == jb {
                m[(i, next_b)] = 1.0 - q;
                m[(i, p2[1])] += q;
            } else {
                for &j in &succ[i] {
                    m[(i, j)] = 1.0 / succ[i].len() as f64;
                }
            }
        }
        m
    };
    let eval = |p: f64, q: f64| -> Result<(f64, Mat, Vec<f64>)> {
        let m = build(p, q);
        let pi = stationary(&m)?;
        Ok((model.edge_mean(&m, &pi, &gv) - alpha, m, pi))
    };
    let mut p = 0.5f64;
    let mut best = f64::INFINITY;
    while p > 1e-250 {
        // mean decreases in q; q = 1 spends the least time on b
        if eval(p, 1.0)?.0 > 0.0 {
            p *= 0.5;
            continue;
        }
        let mut qlo = 1.0f64;
        while eval(qlo, 0.0).is_err() || eval(p, qlo)?.0 <= 0.0 {
            qlo *= 0.5;
            if qlo < 1e-300 {
                break;
            }
        }
        let qhi = (2.0 * qlo).min(1.0);
        let root = bisect(|q| Ok(eval(p, q)?.0), qlo, qhi, 0.1 * tol, 2000)?;
        let (gap, m, pi) = eval(p, root.x)?;
        let h = chain_entropy(&m, &pi);
        best = best.min(h);
        if h <= h_cap {
            let component = model.component(m, pi)?;
            return Ok(LowWitness {
                component,
                p,
                q: root.x,
                entropy: h,
                mean: alpha + gap,
                cycles: (a.clone(), b.clone()),
            });
        }
        p *= 0.25;
    }
    Err(Error::EntropyCapUnreachable { cap: h_cap, achieved: best })
}

/// Ergodic measure with mean `alpha` and entropy at most `h_cap`, built on
/// the extremal periodic orbits of `g`.
pub fn low_entropy_mean_witness(s: &Sft, g: &LocallyConstantFunction, alpha: f64, h_cap: f64, tol: f64) -> Result<LowWitness> {
    let r = birkhoff_range(s, g)?;
    r.check_interior(alpha).map_err(interior_or_not)?;
    two_cycle_witness(s, g, &r.argmin, &r.argmax, alpha, h_cap, tol, 1)
}

/// Optional proximity requirement `d*(ν, μ₀) < ζ`; `μ₀` must have mean
/// `alpha`.
#[derive(Clone, Copy, Debug)]
pub struct Proximity<'a> {
    pub measure: &'a InvariantMeasure,
    pub zeta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    /// The target equals the top of the band; the top measure is returned.
    Top,
    /// Interior point of the interpolation path.
    Path,
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub component: MarkovComponent,
    pub mean: f64,
    pub entropy: f64,
    /// `∫u dν` (zero when no `u` is given).
    pub chi: f64,
    /// `h_ν + ∫u dν`
    pub level: f64,
    /// Band `(floor, top]` of attainable levels.
    pub band: (f64, f64),
    pub t: f64,
    pub beta: f64,
    pub endpoint: Endpoint,
    pub d_star: Option<f64>,
}

/// Low endpoint for the pressure target: the pair of periodic orbits whose
/// chord through `alpha` maximizes `∫u`.
fn chi_floor_cycles(
    s: &Sft,
    g: &LocallyConstantFunction,
    u: Option<&LocallyConstantFunction>,
    alpha: f64,
) -> Result<(Word, Word, f64)> {
    let r = birkhoff_range(s, g)?;
    r.check_interior(alpha).map_err(interior_or_not)?;
    let u = match u {
        None => return Ok((r.argmin, r.argmax, 0.0)),
        Some(u) => u,
    };
    let rs = rotation_set_2d(s, g, u, ROTATION_DIRECTIONS)?;
    let mut best: Option<(Word, Word, f64)> = None;
    for (wa, pa) in &rs.witnesses {
        for (wb, pb) in &rs.witnesses {
            if pa[0] < alpha && alpha < pb[0] {
                let v = pa[1] + (alpha - pa[0]) * (pb[1] - pa[1]) / (pb[0] - pa[0]);
                if best.as_ref().map_or(true, |b| v > b.2) {
                    best = Some((wa.clone(), wb.clone(), v));
                }
            }
        }
    }
    Ok(best.unwrap_or((r.argmin, r.argmax, f64::NEG_INFINITY)))
}

/// Ergodic Markov measure with `∫g = alpha` and `h + ∫u = c`.
pub fn intermediate_witness(
    s: &Sft,
    g: &LocallyConstantFunction,
    alpha: f64,
    c: f64,
    u: Option<&LocallyConstantFunction>,
    proximity: Option<Proximity<'_>>,
    tol: WitnessTolerance,
) -> Result<Witness> {
    let zero;
    let u_fn = match u {
        Some(u) => u,
        None => {
            zero = LocallyConstantFunction::constant(s, 0.0)?;
            &zero
        }
    };
    let (wa, wb, chi_floor) = chi_floor_cycles(s, g, u, alpha)?;
    let need = g.memory().max(u_fn.memory());

    // top endpoint
    let (top, top_level) = match proximity {
        None => {
            let spec = conditional_pressure_spectrum(s, g, u, alpha, tol.mean)?;
            let level = spec.witness_entropy + spec.witness.integrate(u_fn);
            (spec.witness, level)
        }
        Some(px) => {
            if !(px.zeta > 0.0) {
                return Err(Error::InvalidInput("zeta must be positive".into()));
            }
            let m0 = px.measure.integrate(g);
            if (m0 - alpha).abs() > tol.mean {
                return Err(Error::InvalidInput(format!("reference measure has mean {m0}, not {alpha}")));
            }
            let p0 = px.measure.entropy() + px.measure.integrate(u_fn);
            if c > p0 + tol.entropy {
                return Err(Error::OutsideBand { c, lo: chi_floor, hi: p0 });
            }
            let mut m = need.max(px.measure.max_memory()).max(1);
            while 0.5f64.powi(m as i32 + 1) >= 0.5 * px.zeta {
                m += 1;
            }
            let proj = px.measure.markov_projection(m)?;
            let level = proj.entropy() + proj.integrate(u_fn);
            (proj, level)
        }
    };
    let band = (chi_floor, top_level);
    if !(c > chi_floor) || c > top_level + tol.entropy {
        return Err(Error::OutsideBand { c, lo: chi_floor, hi: top_level });
    }
    let finish = |component: MarkovComponent, t: f64, beta: f64, endpoint: Endpoint| -> Result<Witness> {
        let mu: InvariantMeasure = component.clone().into();
        let d = match proximity {
            Some(px) => {
                let d = d_star(&mu, px.measure, D_STAR_DEPTH)?;
                if d >= px.zeta {
                    return Err(Error::ProximityUnachievable { zeta: px.zeta, achieved: d });
                }
                Some(d)
            }
            None => None,
        };
        let entropy = component.entropy();
        let chi = component.integrate(u_fn);
        Ok(Witness {
            mean: component.integrate(g),
            entropy,
            chi,
            level: entropy + chi,
            band,
            t,
            beta,
            endpoint,
            d_star: d,
            component,
        })
    };
    if c >= top_level - tol.entropy && top.is_ergodic() {
        return finish(top, 1.0, 0.0, Endpoint::Top);
    }

    // low endpoint below the target
    let mut cap = 0.5 * (c - chi_floor).min(1.0);
    let low = loop {
        let lw = two_cycle_witness(s, g, &wa, &wb, alpha, cap, 0.1 * tol.mean, need.saturating_sub(1))?;
        let level = lw.entropy + lw.component.integrate(u_fn);
        if level < c - tol.entropy {
            break lw;
        }
        cap *= 0.1;
        if cap < 1e-12 {
            return Err(Error::OutsideBand { c, lo: level, hi: top_level });
        }
    };

    let memory = low.component.memory().max(top.memory()).max(need.saturating_sub(1)).max(1);
    let model = EdgeModel::new(s, memory + 1)?;
    let q_low = low.component.to_memory(memory)?;
    let q_top = top.to_memory(memory)?;
    let gv = model.edge_values(g)?;
    let uv = model.edge_values(u_fn)?;
    let n = model.num_states();
    let eval = |t: f64| -> Result<(f64, f64, crate::thermo::PressureResult)> {
        let mut qt = Mat::zeros(n);
        for &(i, j) in model.edges() {
            qt[(i, j)] = (1.0 - t) * q_low.q()[(i, j)] + t * q_top.q()[(i, j)] + PATH_PADDING;
        }
        for i in 0..n {
            let sum: f64 = qt.row(i).iter().sum();
            qt.row_mut(i).iter_mut().for_each(|v| *v /= sum);
        }
        let base: Vec<f64> = model.edges().iter().map(|&(i, j)| qt[(i, j)].ln()).collect();
        let (beta, p) = solve_tilt(&model, &base, &gv, alpha, tol.mean)?;
        let level = p.entropy() + model.edge_mean(&p.q, &p.pi, &uv);
        Ok((level - c, beta, p))
    };
    let (f0, _, _) = eval(0.0)?;
    let (f1, b1, p1) = eval(1.0)?;
    let (t, beta, p) = if f1.abs() <= 0.5 * tol.entropy || f1 < 0.0 {
        if f1.abs() > tol.entropy {
            return Err(Error::OutsideBand { c, lo: chi_floor, hi: c + f1 });
        }
        (1.0, b1, p1)
    } else if f0 >= 0.0 {
        return Err(Error::OutsideBand { c, lo: c + f0, hi: top_level });
    } else {
        let root = bisect(|t| Ok(eval(t)?.0), 0.0, 1.0, 0.5 * tol.entropy, 200)?;
        let (_, beta, p) = eval(root.x)?;
        (root.x, beta, p)
    };
    let component = model.component(p.q, p.pi)?;
    finish(component, t, beta, Endpoint::Path)
}

/// Ergodic measure with `(∫g, ∫h) = alpha`: the two-observable spectrum
/// witness.
pub fn birkhoff_witness_2d(
    s: &Sft,
    g: &LocallyConstantFunction,
    h: &LocallyConstantFunction,
    alpha: [f64; 2],
    tol: f64,
) -> Result<SpectrumResult> {
    conditional_entropy_spectrum_2d(s, g, h, alpha, tol)
}

/// Convex weights over `2^d` candidates, candidate `k` lying in the open
/// orthant whose sign in coordinate `i` is `+` iff bit `i` of `k` is set,
/// such that `Σ θ_k (p_k − α∘q_k) = 0`. Map data uses `q ≡ 1`.
pub fn orthant_combination(alpha: &[f64], candidates: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<f64>> {
    let d = alpha.len();
    if candidates.len() != 1 << d {
        return Err(Error::InvalidInput(format!("need {} candidates for d = {d}", 1usize << d)));
    }
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
    for (k, (p, q)) in candidates.iter().enumerate() {
        if p.len() != d || q.len() != d {
            return Err(Error::InvalidInput(format!("candidate {k} has the wrong dimension")));
        }
        let v: Vec<f64> = (0..d).map(|i| p[i] - alpha[i] * q[i]).collect();
        for (i, &vi) in v.iter().enumerate() {
            let want_pos = k >> i & 1 == 1;
            if !(q[i] > 0.0) || (want_pos && !(vi > 0.0)) || (!want_pos && !(vi < 0.0)) {
                return Err(Error::OrthantViolation { candidate: k, coordinate: i });
            }
        }
        vecs.push(v);
    }
    // weights of each current candidate over the originals
    let mut mix: Vec<Vec<f64>> = (0..vecs.len()).map(|k| {
        let mut e = vec![0.0; vecs.len()];
        e[k] = 1.0;
        e
    }).collect();
    for i in (0..d).rev() {
        let half = vecs.len() / 2;
        let mut nv = Vec::with_capacity(half);
        let mut nm = Vec::with_capacity(half);
        for k in 0..half {
            // k (bit i clear, negative) pairs with k + half (positive)
            let (neg, pos) = (&vecs[k], &vecs[k + half]);
            let (w, z) = (pos[i], neg[i]);
            let (a, b) = (-z / (w - z), w / (w - z));
            nv.push((0..i).map(|j| a * pos[j] + b * neg[j]).collect::<Vec<f64>>());
            nm.push(mix[k + half].iter().zip(&mix[k]).map(|(x, y)| a * x + b * y).collect::<Vec<f64>>());
        }
        vecs = nv;
        mix = nm;
    }
    let theta = mix.pop().expect("one combination remains");
    let residual = (0..d)
        .map(|i| {
            candidates.iter().zip(&theta).map(|((p, q), t)| t * (p[i] - alpha[i] * q[i])).sum::<f64>().abs()
        })
        .fold(0.0, f64::max);
    let scale = candidates.iter().flat_map(|(p, q)| p.iter().chain(q)).map(|v| v.abs()).fold(1.0, f64::max);
    assert!(residual <= 1e-10 * scale, "orthant combination residual {residual}");
    Ok(theta)
}

/// [`orthant_combination`] for plain means (`q ≡ 1`).
pub fn orthant_combination_means(alpha: &[f64], means: &[Vec<f64>]) -> Result<Vec<f64>> {
    let cands: Vec<(Vec<f64>, Vec<f64>)> = means.iter().map(|m| (m.clone(), vec![1.0; alpha.len()])).collect();
    orthant_combination(alpha, &cands)
}

/// Witness for a suspension flow: the lift has flow average `alpha` of
/// the observable induced by `phi` and flow entropy `c`. Reduces to the
/// base target `∫(φ − αρ) = 0`, `h − c∫ρ = 0`.
pub fn flow_intermediate_witness(
    sys: &SuspensionSystem,
    phi: &LocallyConstantFunction,
    alpha: f64,
    c: f64,
    tol: WitnessTolerance,
) -> Result<Witness> {
    let s = sys.base();
    let g = phi.linear(s, 1.0, sys.roof(), -alpha)?;
    let u = sys.roof().scale(-c);
    intermediate_witness(s, &g, 0.0, 0.0, Some(&u), None, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Entropy from block entropies, `H_{m+1} − H_m` per component.
pub fn block_entropy(mu: &InvariantMeasure) -> f64 {
    let block = |p: &crate::measures::CylinderProfile, n: usize| -> f64 {
        if n == 0 {
            return 0.0;
        }
        p.level(n).values().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum()
    };
    mu.components()
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, c)| {
            let m = c.memory();
            let p = c.profile(m + 1);
            w * (block(&p, m + 1) - block(&p, m))
        })
        .sum()
}

/// `∫g dμ` summed over cylinders.
pub fn cylinder_mean(mu: &InvariantMeasure, g: &LocallyConstantFunction) -> f64 {
    let m = g.memory().max(1);
    mu.profile(m).level(m).iter().map(|(w, p)| p * g.at(w)).sum()
}

/// Recheck a witness through cylinder sums and block entropies: ergodicity,
/// stationarity, full support, each mean constraint `(name, g, α)`, and
/// optionally the level `h + ∫u = c`.
pub fn verify_measure(
    mu: &InvariantMeasure,
    means: &[(String, &LocallyConstantFunction, f64)],
    level: Option<(f64, Option<&LocallyConstantFunction>)>,
    tol: WitnessTolerance,
) -> VerificationReport {
    let flag = |name: &str, ok: bool| Check { name: name.into(), value: f64::from(u8::from(ok)), target: None, tolerance: None, pass: ok };
    let mut checks = vec![flag("ergodic", mu.is_ergodic()), flag("full_support", mu.support_is_full())];
    let residual = mu
        .components()
        .iter()
        .map(|(_, c)| crate::measures::balance_residual(c.q(), c.pi()))
        .fold(0.0, f64::max);
    checks.push(Check { name: "stationary".into(), value: residual, target: Some(0.0), tolerance: Some(1e-9), pass: residual <= 1e-9 });
    for (name, g, alpha) in means {
        let v = cylinder_mean(mu, g);
        checks.push(Check {
            name: format!("mean:{name}"),
            value: v,
            target: Some(*alpha),
            tolerance: Some(tol.mean),
            pass: (v - alpha).abs() <= tol.mean,
        });
    }
    let h = block_entropy(mu);
    checks.push(Check { name: "entropy".into(), value: h, target: None, tolerance: None, pass: h >= 0.0 });
    if let Some((c, u)) = level {
        let v = h + u.map_or(0.0, |u| cylinder_mean(mu, u));
        checks.push(Check { name: "level".into(), value: v, target: Some(c), tolerance: Some(tol.entropy), pass: (v - c).abs() <= tol.entropy });
    }
    VerificationReport { pass: checks.iter().all(|c| c.pass), checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn setup() -> (Sft, LocallyConstantFunction) {
        let s = Sft::full_shift(2);
        let g = LocallyConstantFunction::symbol_indicator(&s, 1).unwrap();
        (s, g)
    }

    fn binary_entropy(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn low_entropy_symmetric() {
        let (s, g) = setup();
        let w = low_entropy_mean_witness(&s, &g, 0.5, 0.05, 1e-10).unwrap();
        assert!(w.entropy <= 0.05);
        assert_abs_diff_eq!(w.component.integrate(&g), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(w.p, w.q, epsilon = 1e-9);
        assert!(w.component.is_ergodic());
        let w = low_entropy_mean_witness(&s, &g, 0.3, 0.02, 1e-10).unwrap();
        assert!(w.component.entropy() <= 0.02);
        assert_abs_diff_eq!(w.component.integrate(&g), 0.3, epsilon = 1e-10);
        assert!(matches!(low_entropy_mean_witness(&s, &g, 0.0, 0.1, 1e-9), Err(Error::NotInterior(_))));
    }

    #[test]
    fn low_entropy_on_golden_mean() {
        let gm = Sft::golden_mean();
        let g = LocallyConstantFunction::symbol_indicator(&gm, 1).unwrap();
        let w = low_entropy_mean_witness(&gm, &g, 0.2, 0.01, 1e-10).unwrap();
        assert!(w.component.entropy() <= 0.01);
        assert_abs_diff_eq!(w.component.integrate(&g), 0.2, epsilon = 1e-10);
        assert!(w.component.is_ergodic());
    }

    #[test]
    fn intermediate_entropy() {
        let (s, g) = setup();
        let c = 0.5 * binary_entropy(0.3);
        let w = intermediate_witness(&s, &g, 0.3, c, None, None, WitnessTolerance { mean: 1e-9, entropy: 1e-7 }).unwrap();
        assert_abs_diff_eq!(w.component.integrate(&g), 0.3, epsilon = 1e-8);
        assert_abs_diff_eq!(w.component.entropy(), c, epsilon = 1e-6);
        assert!(w.component.is_ergodic());
        let mu: InvariantMeasure = w.component.into();
        assert!(mu.support_is_full());
    }

    #[test]
    fn top_and_floor() {
        let (s, g) = setup();
        let top = binary_entropy(0.3);
        let w = intermediate_witness(&s, &g, 0.3, top, None, None, WitnessTolerance::default()).unwrap();
        assert_eq!(w.endpoint, Endpoint::Top);
        assert!(matches!(
            intermediate_witness(&s, &g, 0.3, 0.0, None, None, WitnessTolerance::default()),
            Err(Error::OutsideBand { .. })
        ));
    }

    #[test]
    fn pressure_target_with_u() {
        let (s, g) = setup();
        let u = LocallyConstantFunction::word_indicator(&s, &[0, 1]).unwrap().scale(0.5);
        let spec = conditional_pressure_spectrum(&s, &g, Some(&u), 0.4, 1e-10).unwrap();
        let c = 0.5 * (spec.value + 0.5 * 0.4);
        let w = intermediate_witness(&s, &g, 0.4, c, Some(&u), None, WitnessTolerance::default()).unwrap();
        assert_abs_diff_eq!(w.component.integrate(&g), 0.4, epsilon = 1e-8);
        assert_abs_diff_eq!(w.component.entropy() + w.component.integrate(&u), c, epsilon = 1e-6);
    }

    #[test]
    fn proximity_near_reference() {
        let (s, g) = setup();
        let mu0 = InvariantMeasure::bernoulli(&s, &[0.6, 0.4]).unwrap();
        let c = 0.98 * binary_entropy(0.4);
        let px = Proximity { measure: &mu0, zeta: 0.1 };
        let w = intermediate_witness(&s, &g, 0.4, c, None, Some(px), WitnessTolerance::default()).unwrap();
        assert!(w.d_star.unwrap() < 0.1);
        assert_abs_diff_eq!(w.entropy, c, epsilon = 1e-6);
    }

    #[test]
    fn orthant_examples() {
        let t = orthant_combination_means(&[0.5], &[vec![0.2], vec![0.8]]).unwrap();
        assert_abs_diff_eq!(t[0], 0.5, epsilon = 1e-15);
        let t = orthant_combination_means(&[0.3], &[vec![0.2], vec![0.8]]).unwrap();
        assert_abs_diff_eq!(t[0], 5.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t[1], 1.0 / 6.0, epsilon = 1e-15);
        let a = [0.4, 0.2];
        let d = 0.05;
        let means = vec![vec![0.4 - d, 0.2 - 2.0 * d], vec![0.4 + 2.0 * d, 0.2 - d], vec![0.4 - 3.0 * d, 0.2 + d], vec![0.4 + d, 0.2 + d]];
        let t = orthant_combination_means(&a, &means).unwrap();
        assert!(t.iter().all(|x| *x >= 0.0));
        assert_abs_diff_eq!(t.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for i in 0..2 {
            let m: f64 = t.iter().zip(&means).map(|(t, m)| t * m[i]).sum();
            assert_abs_diff_eq!(m, a[i], epsilon = 1e-12);
        }
        assert_eq!(
            orthant_combination_means(&[0.5], &[vec![0.6], vec![0.8]]),
            Err(Error::OrthantViolation { candidate: 0, coordinate: 0 })
        );
    }
    #[test]
    fn verification_agrees_with_construction() {
        let (s, g) = setup();
        let c = 0.5 * binary_entropy(0.3);
        let w = intermediate_witness(&s, &g, 0.3, c, None, None, WitnessTolerance::default()).unwrap();
        let mu: InvariantMeasure = w.component.clone().into();
        let r = verify_measure(&mu, &[("g".into(), &g, 0.3)], Some((c, None)), WitnessTolerance { mean: 1e-8, entropy: 1e-6 });
        assert!(r.pass, "{r:?}");
        assert_abs_diff_eq!(r.get("entropy").unwrap().value, w.entropy, epsilon = 1e-10);
    }

    #[test]
    fn flow_targets() {
        let s = Sft::full_shift(2);
        let phi = LocallyConstantFunction::symbol_indicator(&s, 1).unwrap();
        for roof in [vec![2.0, 2.0], vec![1.0, 2.0]] {
            let sys = SuspensionSystem::new(s.clone(), LocallyConstantFunction::from_symbol_values(&s, &roof).unwrap()).unwrap();
            let w = flow_intermediate_witness(&sys, &phi, 0.25, 0.15, WitnessTolerance::default()).unwrap();
            let mu: InvariantMeasure = w.component.into();
            assert_abs_diff_eq!(sys.flow_integral(&mu, &phi), 0.25, epsilon = 1e-8);
            assert_abs_diff_eq!(sys.abramov_entropy(&mu), 0.15, epsilon = 1e-6);
        }
    }
}
