//! Small dense matrices and the Perron–Frobenius solver.
//!
//! Everything here is sized for desk-scale problems: transition matrices on
//! a few hundred block symbols at most.

use crate::error::{Error, Result};
use std::ops::{Index, IndexMut};

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        Ok(Mat { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.n;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x A`
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    /// Positive-support adjacency lists.
    pub fn support(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| self[(i, j)] > 0.0).collect())
            .collect()
    }

    /// Solve `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            let (piv, big) = (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if big == 0.0 || !big.is_finite() {
                return Err(Error::InvalidInput("singular linear system".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            let s: f64 = (col + 1..n).map(|j| a[col * n + j] * x[j]).sum();
            x[col] = (x[col] - s) / a[col * n + col];
        }
        Ok(x)
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Options for [`perron`].
#[derive(Clone, Debug)]
pub struct PerronOptions {
    /// Target width of the Collatz–Wielandt bracket, measured as `ln(hi/lo)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting vector for the right iteration (positive entries).
    pub start: Option<Vec<f64>>,
}

impl Default for PerronOptions {
    fn default() -> Self {
        PerronOptions { tol: 1e-12, max_iter: 1_000_000, start: None }
    }
}

impl PerronOptions {
    pub fn with_tol(tol: f64) -> Self {
        PerronOptions { tol, ..Default::default() }
    }
}

/// Perron root with left and right eigenvectors, normalized so that
/// `sum(right) = 1` and `left · right = 1`.
#[derive(Clone, Debug)]
pub struct Perron {
    pub value: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    /// Final Collatz–Wielandt bracket `[lo, hi]` on the root.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

impl Perron {
    pub fn log_value(&self) -> f64 {
        self.value.ln()
    }
}

// Above this dimension the shift-invert phase is skipped.
const DENSE_LIMIT: usize = 400;
const POWER_WARMUP: usize = 30;

/// Collatz–Wielandt bounds of `b` at a positive vector `x`.
fn cw_bounds(y: &[f64], x: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (yi, xi) in y.iter().zip(x) {
        let r = yi / xi;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

fn normalize(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
}

/// Right Perron vector of an irreducible nonnegative matrix.
///
/// Power iteration on `B + sI` (which is primitive even when `B` is
/// periodic), switching to shift-invert iteration with a shift just above
/// the Collatz–Wielandt upper bound once warmed up. Convergence is declared
/// when the bracket satisfies `ln(hi/lo) <= tol` and the iterate has
/// stopped moving.
fn right_vector(b: &Mat, tol: f64, max_iter: usize, start: Option<&[f64]>) -> Result<(f64, Vec<f64>, (f64, f64), usize)> {
    let n = b.dim();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let mut x: Vec<f64> = match start {
        Some(s) if s.len() == n && s.iter().all(|v| *v > 0.0) => s.to_vec(),
        Some(_) => return Err(Error::InvalidInput("Perron start vector must be positive".into())),
        None => vec![1.0; n],
    };
    normalize(&mut x);
    let row_max = (0..n).map(|i| b.row(i).iter().sum::<f64>()).fold(0.0, f64::max);
    if row_max <= 0.0 {
        return Err(Error::InvalidInput("zero matrix has no Perron root".into()));
    }
    let shift = 0.5 * row_max;
    let vec_tol = tol.max(1e-14);
    for it in 0..max_iter {
        let y = b.mul_vec(&x);
        let (lo, hi) = cw_bounds(&y, &x);
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::NotIrreducible("Perron iterate lost positivity".into()));
        }
        let gap = (hi / lo).ln();
        let mut next: Vec<f64> = if it < POWER_WARMUP || n > DENSE_LIMIT {
            y.iter().zip(&x).map(|(yi, xi)| yi + shift * xi).collect()
        } else {
            let sigma = hi + (hi - lo).max(1e-10 * hi);
            let mut m = b.clone();
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = -m[(i, j)];
                }
                m[(i, i)] += sigma;
            }
            match m.solve(&x) {
                Ok(z) if z.iter().all(|v| *v > 0.0 && v.is_finite()) => z,
                _ => y.iter().zip(&x).map(|(yi, xi)| yi + shift * xi).collect(),
            }
        };
        normalize(&mut next);
        let moved = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / next.iter().cloned().fold(0.0, f64::max);
        if gap <= tol && moved <= vec_tol {
            let y = b.mul_vec(&next);
            let (lo2, hi2) = cw_bounds(&y, &next);
            let value = if (hi2 / lo2).ln() <= gap { 0.5 * (lo2 + hi2) } else { 0.5 * (lo + hi) };
            let bracket = if (hi2 / lo2).ln() <= gap { (lo2, hi2) } else { (lo, hi) };
            return Ok((value, next, bracket, it + 1));
        }
        x = next;
    }
    Err(Error::NotConverged { what: "Perron iteration".into(), iterations: max_iter })
}

/// Perron root and eigenvectors of an irreducible nonnegative matrix.
pub fn perron(b: &Mat, opts: &PerronOptions) -> Result<Perron> {
    let (value, right, bracket, it_r) = right_vector(b, opts.tol, opts.max_iter, opts.start.as_deref())?;
    let (_, mut left, _, it_l) = right_vector(&b.transpose(), opts.tol, opts.max_iter, None)?;
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    left.iter_mut().for_each(|v| *v /= dot);
    Ok(Perron { value, right, left, bracket, iterations: it_r + it_l })
}

/// Perron root only; skips the left vector.
pub fn perron_root(b: &Mat, tol: f64) -> Result<f64> {
    right_vector(b, tol, PerronOptions::default().max_iter, None).map(|r| r.0)
}
