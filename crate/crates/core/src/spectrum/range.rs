//! Ranges of Birkhoff averages: `L_g`, the rotation set `L_{g,h}`, and the
//! range of flow averages.

use super::cycles::{canonical_cycle, max_mean_cycle, min_mean_cycle, MeanCycle};
use crate::error::{Error, Result};
use crate::function::LocallyConstantFunction;
use crate::sft::{Sft, Word};
use crate::thermo::EdgeModel;
use std::f64::consts::TAU;

/// Relative width below which a range is treated as a single point.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Relative distance from an endpoint that counts as the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Ambient periodic word traced by a cycle of the edge model.
pub(crate) fn cycle_word(model: &EdgeModel, c: &MeanCycle) -> Word {
    let code = model.code();
    let w: Vec<usize> = c
        .edges
        .iter()
        .map(|&e| *code.words[model.edges()[e].1].last().expect("nonempty"))
        .collect();
    canonical_cycle(&w)
}

pub(crate) fn cycle_average(c: &MeanCycle, values: &[f64]) -> f64 {
    c.edges.iter().map(|&e| values[e]).sum::<f64>() / c.edges.len() as f64
}

#[derive(Clone, Debug)]
pub struct BirkhoffRange {
    pub min: f64,
    pub max: f64,
    pub argmin: Word,
    pub argmax: Word,
}

impl BirkhoffRange {
    pub fn is_degenerate(&self) -> bool {
        self.max - self.min <= DEGENERATE_TOL * (1.0 + self.min.abs().max(self.max.abs()))
    }

    /// Accept only targets strictly inside the range.
    pub fn check_interior(&self, alpha: f64) -> Result<()> {
        let (lo, hi) = (self.min, self.max);
        if self.is_degenerate() {
            return Err(Error::Degenerate { value: lo });
        }
        let tol = BOUNDARY_TOL * (1.0 + lo.abs().max(hi.abs()));
        if !alpha.is_finite() || alpha < lo - tol || alpha > hi + tol {
            return Err(Error::OutsideRange { alpha, lo, hi });
        }
        if alpha <= lo + tol || alpha >= hi - tol {
            return Err(Error::Boundary { alpha, lo, hi });
        }
        Ok(())
    }
}

pub(crate) fn range_on_model(model: &EdgeModel, values: &[f64]) -> Result<BirkhoffRange> {
    let n = model.num_states();
    let lo = min_mean_cycle(n, model.edges(), values)
        .ok_or_else(|| Error::InvalidInput("edge graph has no cycle".into()))?;
    let hi = max_mean_cycle(n, model.edges(), values)
        .ok_or_else(|| Error::InvalidInput("edge graph has no cycle".into()))?;
    Ok(BirkhoffRange { min: lo.value, max: hi.value, argmin: cycle_word(model, &lo), argmax: cycle_word(model, &hi) })
}

/// `L_g = [min, max]` with witnessing periodic orbits.
pub fn birkhoff_range(s: &Sft, g: &LocallyConstantFunction) -> Result<BirkhoffRange> {
    let model = EdgeModel::new(s, g.memory())?;
    let vals = model.edge_values(g)?;
    range_on_model(&model, &vals)
}

/// Support-function approximation of `L_{g,h}`.
#[derive(Clone, Debug)]
pub struct RotationSet {
    /// `(θ, max ∫(cos θ·g + sin θ·h))` per sampled direction.
    pub support: Vec<(f64, f64)>,
    /// Vertices of the circumscribed polygon.
    pub outer: Vec<[f64; 2]>,
    /// Distinct periodic-orbit witnesses and their average vectors.
    pub witnesses: Vec<(Word, [f64; 2])>,
    /// Convex hull of the witnesses, counter-clockwise.
    pub inner: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, collinear
/// points dropped.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = points.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        .abs()
}

impl RotationSet {
    pub fn inner_area(&self) -> f64 {
        polygon_area(&self.inner)
    }

    pub fn outer_area(&self) -> f64 {
        polygon_area(&self.outer)
    }

    /// Signed distance from `p` to the inner hull boundary (positive
    /// inside); `-inf` when the hull has empty interior.
    pub fn inner_depth(&self, p: [f64; 2]) -> f64 {
        let h = &self.inner;
        if h.len() < 3 || self.inner_area() <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (0..h.len())
            .map(|i| {
                let (a, b) = (h[i], h[(i + 1) % h.len()]);
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                cross(a, b, p) / len
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest violation of a sampled support constraint.
    pub fn outer_excess(&self, p: [f64; 2]) -> f64 {
        self.support
            .iter()
            .map(|&(t, hval)| t.cos() * p[0] + t.sin() * p[1] - hval)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Ok` when `p` sits inside the inner hull by at least `margin`.
    pub fn check_interior(&self, p: [f64; 2], margin: f64) -> Result<()> {
        let scale = self.support.iter().map(|s| s.1.abs()).fold(1.0, f64::max);
        if !(p[0].is_finite() && p[1].is_finite()) || self.outer_excess(p) > 1e-12 * scale {
            return Err(Error::Exterior(p.to_vec()));
        }
        if self.inner_depth(p) < margin {
            return Err(Error::NotInterior(p.to_vec()));
        }
        Ok(())
    }
}

/// Sample the rotation set of `(g, h)` in `directions` evenly spaced
/// directions.
pub fn rotation_set_2d(
    s: &Sft,
    g: &LocallyConstantFunction,
    h: &LocallyConstantFunction,
    directions: usize,
) -> Result<RotationSet> {
    if directions < 3 {
        return Err(Error::InvalidInput("need at least 3 directions".into()));
    }
    let model = EdgeModel::for_functions(s, &[g, h])?;
    let gv = model.edge_values(g)?;
    let hv = model.edge_values(h)?;
    let n = model.num_states();
    let mut support = Vec::with_capacity(directions);
    let mut witnesses: Vec<(Word, [f64; 2])> = Vec::new();
    for j in 0..directions {
        let t = j as f64 * TAU / directions as f64;
        let (c, sn) = (t.cos(), t.sin());
        let w: Vec<f64> = gv.iter().zip(&hv).map(|(a, b)| c * a + sn * b).collect();
        let cyc = max_mean_cycle(n, model.edges(), &w).ok_or_else(|| Error::InvalidInput("no cycle".into()))?;
        let pt = [cycle_average(&cyc, &gv), cycle_average(&cyc, &hv)];
        support.push((t, cyc.value));
        let word = cycle_word(&model, &cyc);
        if !witnesses.iter().any(|(w, _)| *w == word) {
            witnesses.push((word, pt));
        }
    }
    let outer = (0..directions)
        .map(|j| {
            let (t1, h1) = support[j];
            let (t2, h2) = support[(j + 1) % directions];
            let det = (t2 - t1).sin();
            [(h1 * t2.sin() - h2 * t1.sin()) / det, (t1.cos() * h2 - t2.cos() * h1) / det]
        })
        .collect();
    let pts: Vec<[f64; 2]> = witnesses.iter().map(|w| w.1).collect();
    let inner = convex_hull(&pts);
    Ok(RotationSet { support, outer, witnesses, inner })
}

/// Range of flow averages `∫φ dμ / ∫ρ dμ`.
#[derive(Clone, Debug)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
    pub argmin: Word,
    pub argmax: Word,
}

impl RatioRange {
    pub fn as_birkhoff(&self) -> BirkhoffRange {
        BirkhoffRange { min: self.min, max: self.max, argmin: self.argmin.clone(), argmax: self.argmax.clone() }
    }
}

fn cycle_ratio(c: &MeanCycle, phi: &[f64], rho: &[f64]) -> f64 {
    let a: f64 = c.edges.iter().map(|&e| phi[e]).sum();
    let b: f64 = c.edges.iter().map(|&e| rho[e]).sum();
    a / b
}

/// Dinkelbach iteration for `max` (or `min` when `maximize` is false) of
/// the cycle ratio `Σφ / Σρ`.
fn ratio_extreme(model: &EdgeModel, phi: &[f64], rho: &[f64], maximize: bool) -> Result<(f64, MeanCycle)> {
    let n = model.num_states();
    let pick = |w: &[f64]| if maximize { max_mean_cycle(n, model.edges(), w) } else { min_mean_cycle(n, model.edges(), w) };
    let mut cyc = pick(phi).ok_or_else(|| Error::InvalidInput("no cycle".into()))?;
    let mut alpha = cycle_ratio(&cyc, phi, rho);
    let scale = phi.iter().chain(rho).map(|v| v.abs()).fold(1.0, f64::max);
    for _ in 0..200 {
        let w: Vec<f64> = phi.iter().zip(rho).map(|(p, r)| p - alpha * r).collect();
        let next = pick(&w).expect("cycle exists");
        let gain = if maximize { next.value } else { -next.value };
        if gain <= 1e-14 * scale {
            return Ok((alpha, cyc));
        }
        cyc = next;
        alpha = cycle_ratio(&cyc, phi, rho);
    }
    Err(Error::NotConverged { what: "Dinkelbach ratio iteration".into(), iterations: 200 })
}

pub(crate) fn ratio_range_on_model(model: &EdgeModel, phi: &[f64], rho: &[f64]) -> Result<RatioRange> {
    let (max, cmax) = ratio_extreme(model, phi, rho, true)?;
    let (min, cmin) = ratio_extreme(model, phi, rho, false)?;
    Ok(RatioRange { min, max, argmin: cycle_word(model, &cmin), argmax: cycle_word(model, &cmax) })
}

/// Extremes of `∫φ dμ / ∫ρ dμ` over invariant measures.
pub fn flow_ratio_range(
    s: &Sft,
    phi: &LocallyConstantFunction,
    rho: &LocallyConstantFunction,
) -> Result<RatioRange> {
    let model = EdgeModel::for_functions(s, &[phi, rho])?;
    let pv = model.edge_values(phi)?;
    let rv = model.edge_values(rho)?;
    ratio_range_on_model(&model, &pv, &rv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ranges() {
        let s = Sft::full_shift(2);
        let g = LocallyConstantFunction::symbol_indicator(&s, 1).unwrap();
        let r = birkhoff_range(&s, &g).unwrap();
        assert_eq!((r.min, r.max), (0.0, 1.0));
        assert_eq!((r.argmin.0.clone(), r.argmax.0.clone()), (vec![0], vec![1]));
        let c = LocallyConstantFunction::constant(&s, 2.5).unwrap();
        let r = birkhoff_range(&s, &c).unwrap();
        assert!(r.is_degenerate());
        assert!(matches!(r.check_interior(2.5), Err(Error::Degenerate { .. })));
        let gm = Sft::golden_mean();
        let g = LocallyConstantFunction::symbol_indicator(&gm, 1).unwrap();
        let r = birkhoff_range(&gm, &g).unwrap();
        assert_abs_diff_eq!(r.max, 0.5);
        assert_eq!(r.argmax.0, vec![0, 1]);
        assert!(matches!(r.check_interior(0.7), Err(Error::OutsideRange { .. })));
        assert!(matches!(r.check_interior(0.5), Err(Error::Boundary { .. })));
        assert!(r.check_interior(0.25).is_ok());
    }

    #[test]
    fn hull() {
        let h = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.1], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]);
        assert_eq!(h.len(), 4);
        assert_abs_diff_eq!(polygon_area(&h), 1.0);
    }

    #[test]
    fn rotation_sets() {
        let s = Sft::full_shift(2);
        let g = LocallyConstantFunction::symbol_indicator(&s, 1).unwrap();
        let h = LocallyConstantFunction::word_indicator(&s, &[0, 1]).unwrap();
        let rs = rotation_set_2d(&s, &g, &h, 64).unwrap();
        for p in [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5]] {
            assert!(rs.witnesses.iter().any(|w| (w.1[0] - p[0]).abs() < 1e-12 && (w.1[1] - p[1]).abs() < 1e-12));
        }
        assert!(rs.check_interior([0.5, 0.25], 1e-6).is_ok());
        assert!(matches!(rs.check_interior([0.5, 0.6], 1e-6), Err(Error::Exterior(_))));
        let fine = rotation_set_2d(&s, &g, &h, 256).unwrap();
        assert!(fine.inner_area() >= rs.inner_area() - 1e-15);
        // dependent observables: a segment
        let one_minus = LocallyConstantFunction::symbol_indicator(&s, 0).unwrap();
        let seg = rotation_set_2d(&s, &g, &one_minus, 64).unwrap();
        assert!(seg.inner_area() < 1e-15);
        assert!(seg.outer_area() < 1e-9);
        assert!(matches!(seg.check_interior([0.3, 0.3], 1e-6), Err(Error::Exterior(_))));
        assert!(matches!(seg.check_interior([0.3, 0.7], 1e-6), Err(Error::NotInterior(_))));
    }

    #[test]
    fn flow_ratio_extremes() {
        let g = Sft::golden_mean();
        let phi = LocallyConstantFunction::symbol_indicator(&g, 1).unwrap();
        let rho = LocallyConstantFunction::from_symbol_values(&g, &[1.0, 2.0]).unwrap();
        let r = flow_ratio_range(&g, &phi, &rho).unwrap();
        assert_abs_diff_eq!(r.min, 0.0);
        assert_abs_diff_eq!(r.max, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r.argmax.0, vec![0, 1]);
    }
}
