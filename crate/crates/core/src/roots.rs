//! Safeguarded one-dimensional root finding.
//!
//! All solvers here work on functions whose *sign* is nondecreasing in the
//! argument. Newton steps (analytic derivative when supplied, secant
//! otherwise) are taken inside a maintained bracket; three consecutive
//! non-improving steps force a bisection.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub x_tol: f64,
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { x_tol: 1e-15, f_tol: 1e-13, max_iter: 500 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Root {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// One evaluation: function value and, optionally, its derivative.
pub type Eval = (f64, Option<f64>);

/// Root of `f` in `[lo, hi]`, where `f(lo) <= 0 <= f(hi)` and the sign of
/// `f` is nondecreasing.
pub fn solve_increasing<F>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root>
where
    F: FnMut(f64) -> Result<Eval>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, _) = f(a)?;
    let (mut fb, _) = f(b)?;
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::InvalidInput(format!(
            "root not bracketed: f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    if fa == 0.0 {
        return Ok(Root { x: a, value: fa, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, value: fb, iterations: 0 });
    }
    // start from the secant point
    let mut x = a - fa * (b - a) / (fb - fa);
    if !(x > a && x < b) {
        x = 0.5 * (a + b);
    }
    let mut best = f64::INFINITY;
    let mut stalls = 0usize;
    for it in 1..=opts.max_iter {
        let (fx, dfx) = f(x)?;
        if fx.abs() <= opts.f_tol {
            return Ok(Root { x, value: fx, iterations: it });
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if b - a <= opts.x_tol * (1.0 + a.abs().max(b.abs())) {
            let (x, v) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
            return Ok(Root { x, value: v, iterations: it });
        }
        if fx.abs() < 0.5 * best {
            best = fx.abs();
            stalls = 0;
        } else {
            stalls += 1;
        }
        let newton = match dfx {
            Some(d) if d > 0.0 && d.is_finite() => x - fx / d,
            _ => a - fa * (b - a) / (fb - fa),
        };
        x = if stalls >= 3 || !(newton > a && newton < b) {
            stalls = 0;
            0.5 * (a + b)
        } else {
            newton
        };
    }
    Err(Error::NotConverged { what: "safeguarded root solve".into(), iterations: opts.max_iter })
}

/// Grow a bracket around `x0` for a sign-nondecreasing function. Returns
/// `(lo, hi)` with `f(lo) <= 0 <= f(hi)`, or `None` if `|x|` would exceed
/// `limit`.
pub fn expand_bracket<F>(mut f: F, x0: f64, step: f64, limit: f64) -> Result<Option<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f0 = f(x0)?;
    if f0 == 0.0 {
        return Ok(Some((x0, x0)));
    }
    let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
    let mut prev = x0;
    let mut h = step;
    loop {
        let x = x0 + dir * h;
        if x.abs() > limit {
            return Ok(None);
        }
        let fx = f(x)?;
        if (dir > 0.0 && fx >= 0.0) || (dir < 0.0 && fx <= 0.0) {
            return Ok(Some(if dir > 0.0 { (prev, x) } else { (x, prev) }));
        }
        prev = x;
        h *= 2.0;
    }
}

/// Plain bisection for a continuous function with `f(lo)` and `f(hi)` of
/// opposite signs (either orientation).
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, f_tol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(Root { x: a, value: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, value: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!("bisection endpoints share sign: {fa}, {fb}")));
    }
    let neg_at_a = fa < 0.0;
    let mut last = Root { x: a, value: fa, iterations: 0 };
    for it in 1..=max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        last = Root { x: m, value: fm, iterations: it };
        if fm.abs() <= f_tol || (b - a).abs() <= f64::EPSILON * (1.0 + m.abs()) {
            return Ok(last);
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Err(Error::NotConverged {
        what: format!("bisection (last |f| = {:e})", last.value.abs()),
        iterations: max_iter,
    })
}
