//! Geometric Lorenz return map `P(x, y) = (f(x), H(x, y))` on the square
//! `[−1, 1]²` cut along `x = 0`, with
//! `f(x) = sign(x)(c|x|^γ − 1)` and `H(x, y) = −a·sign(x) − b·y`.

use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_GRID: usize = 10_000;
/// Iterates closer than this to the cut stop the simulation.
pub const SINGULAR_DISTANCE: f64 = 1e-15;
/// Accepted error of the extrapolated one-sided limits of `f` at 0.
pub const LIMIT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientMap {
    pub c: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberMap {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LorenzModel {
    pub f: QuotientMap,
    #[serde(rename = "H")]
    pub h: FiberMap,
    /// Singularity exponents `(λ₁, λ₂, λ₃)`.
    pub lambda: [f64; 3],
}

impl LorenzModel {
    /// The reference model: `c = 1.9`, `γ = 0.78`, `a = 0.5`, `b = 0.25`,
    /// `λ = (−3, −1, 2)`.
    pub fn example() -> Self {
        LorenzModel { f: QuotientMap { c: 1.9, gamma: 0.78 }, h: FiberMap { a: 0.5, b: 0.25 }, lambda: [-3.0, -1.0, 2.0] }
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let m: LorenzModel =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("Lorenz model JSON: {e}")))?;
        let all = [m.f.c, m.f.gamma, m.h.a, m.h.b, m.lambda[0], m.lambda[1], m.lambda[2]];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("Lorenz parameters must be finite".into()));
        }
        if !(m.f.gamma > 0.0) {
            return Err(Error::InvalidInput("gamma must be positive".into()));
        }
        Ok(m)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }

    pub fn f(&self, x: f64) -> f64 {
        x.signum() * (self.f.c * x.abs().powf(self.f.gamma) - 1.0)
    }

    pub fn df(&self, x: f64) -> f64 {
        self.f.c * self.f.gamma * x.abs().powf(self.f.gamma - 1.0)
    }

    pub fn fiber(&self, x: f64, y: f64) -> f64 {
        -self.h.a * x.signum() - self.h.b * y
    }

    pub fn dfiber_dx(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }

    pub fn dfiber_dy(&self, _x: f64, _y: f64) -> f64 {
        -self.h.b
    }

    pub fn step(&self, x: f64, y: f64) -> (f64, f64) {
        (self.f(x), self.fiber(x, y))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Constraint {
    pub name: String,
    pub pass: bool,
    /// Worst-case slack of the inequality on the grid (positive passes).
    pub margin: f64,
    /// The extreme quantity behind the margin.
    pub worst: f64,
    /// Informational entries do not count towards `pass`.
    pub required: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LorenzReport {
    pub grid: usize,
    pub constraints: Vec<Constraint>,
    pub pass: bool,
}

impl LorenzReport {
    pub fn get(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.constraints.iter().filter(|c| c.required && !c.pass).map(|c| c.name.as_str()).collect()
    }
}

fn constraint(name: &str, margin: f64, worst: f64, required: bool) -> Constraint {
    Constraint { name: name.into(), pass: margin > 0.0, margin, worst, required }
}

/// Aitken extrapolation of `g(±10^{-k})`, `k = 4..=8`.
fn one_sided_limit(g: impl Fn(f64) -> f64, side: f64) -> f64 {
    let v: Vec<f64> = (4..=8).map(|k| g(side * 10f64.powi(-k))).collect();
    let (a, b, c) = (v[2], v[3], v[4]);
    let denom = c - 2.0 * b + a;
    if denom.abs() < 1e-300 {
        c
    } else {
        c - (c - b).powi(2) / denom
    }
}

/// Check every constraint of the model on the grid `x = ±i/n`,
/// `y = j/n` (`i = 1..=n`, `j = −n..=n`).
pub fn validate_lorenz(m: &LorenzModel, grid: usize) -> LorenzReport {
    let n = grid.max(1);
    let [l1, l2, l3] = m.lambda;
    let xs: Vec<f64> = (1..=n).flat_map(|i| [-(i as f64) / n as f64, i as f64 / n as f64]).collect();
    let mut out = vec![
        constraint("lambda_order", (l2 - l1).min(-l2).min(l3), (l2 - l1).min(-l2).min(l3), true),
        constraint("lambda_1_plus_lambda_3_negative", -(l1 + l3), l1 + l3, true),
        constraint("lambda_2_plus_lambda_3_positive", l2 + l3, l2 + l3, true),
    ];
    let left = one_sided_limit(|x| m.f(x), -1.0);
    let right = one_sided_limit(|x| m.f(x), 1.0);
    out.push(constraint("f_limit_left_is_1", LIMIT_TOL - (left - 1.0).abs(), left, true));
    out.push(constraint("f_limit_right_is_minus_1", LIMIT_TOL - (right + 1.0).abs(), right, true));
    let max_abs_f = xs.iter().map(|&x| m.f(x).abs()).fold(0.0, f64::max);
    out.push(constraint("f_range_open_interval", 1.0 - max_abs_f, max_abs_f, true));
    let min_df = xs.iter().map(|&x| m.df(x)).fold(f64::INFINITY, f64::min);
    out.push(constraint("f_derivative_above_sqrt2", min_df - 2f64.sqrt(), min_df, true));

    let ys: Vec<f64> = (0..=2 * n).map(|j| (j as f64 - n as f64) / n as f64).collect();
    // per x: (min −sign(x)·H, max |∂H/∂y|, max |∂H/∂x|, max |H|)
    let (sign, dy, dx, habs) = xs
        .par_iter()
        .map(|&x| {
            let mut acc = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
            for &y in &ys {
                let h = m.fiber(x, y);
                acc.0 = acc.0.min(-x.signum() * h);
                acc.1 = acc.1.max(m.dfiber_dy(x, y).abs());
                acc.2 = acc.2.max(m.dfiber_dx(x, y).abs());
                acc.3 = acc.3.max(h.abs());
            }
            acc
        })
        .reduce(
            || (f64::INFINITY, 0.0, 0.0, 0.0),
            |a, b| (a.0.min(b.0), a.1.max(b.1), a.2.max(b.2), a.3.max(b.3)),
        );
    out.push(constraint("fiber_sign", sign, sign, true));
    out.push(constraint("fiber_contraction_y", 1.0 - dy, dy, true));
    out.push(constraint("fiber_contraction_x", 1.0 - dx, dx, true));
    out.push(constraint("fiber_image_in_square", 1.0 - habs, habs, false));
    LorenzReport { grid: n, pass: out.iter().all(|c| !c.required || c.pass), constraints: out }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub points: Vec<(f64, f64)>,
    /// `1` where `x > 0`, else `0`.
    pub itinerary: Vec<u8>,
    /// The orbit came within [`SINGULAR_DISTANCE`] of the cut and stopped.
    pub halted: bool,
}

impl Trajectory {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }
}

/// Orbit of length `n` (including the initial point).
pub fn simulate_return_map(m: &LorenzModel, x0: f64, y0: f64, n: usize) -> Result<Trajectory> {
    if x0 == 0.0 {
        return Err(Error::SingularInitialPoint);
    }
    if !(x0.abs() <= 1.0 && y0.abs() <= 1.0) {
        return Err(Error::InvalidInput(format!("initial point ({x0}, {y0}) outside the square")));
    }
    let mut points = Vec::with_capacity(n);
    let mut itinerary = Vec::with_capacity(n);
    let (mut x, mut y) = (x0, y0);
    let mut halted = false;
    for k in 0..n {
        if k > 0 && x.abs() < SINGULAR_DISTANCE {
            halted = true;
            break;
        }
        points.push((x, y));
        itinerary.push(u8::from(x > 0.0));
        (x, y) = m.step(x, y);
    }
    Ok(Trajectory { points, itinerary, halted })
}

#[derive(Clone, Debug, Serialize)]
pub struct Statistics {
    pub mean: f64,
    /// Cesàro averages after each step.
    pub running: Vec<f64>,
    /// `(1/n) Σ log f′(x_k)`, a heuristic expansion rate.
    pub exponent: f64,
}

pub fn empirical_statistics(m: &LorenzModel, t: &Trajectory, g: impl Fn(f64, f64) -> f64) -> Result<Statistics> {
    if t.points.len() < 2 {
        return Err(Error::InvalidInput("statistics need at least two points".into()));
    }
    let mut running = Vec::with_capacity(t.points.len());
    let mut sum = 0.0;
    for (k, &(x, y)) in t.points.iter().enumerate() {
        sum += g(x, y);
        running.push(sum / (k + 1) as f64);
    }
    let exponent = t.points.iter().map(|&(x, _)| m.df(x).ln()).sum::<f64>() / t.points.len() as f64;
    Ok(Statistics { mean: *running.last().expect("nonempty"), running, exponent })
}
