//! Invariant measures as finite convex combinations of Markov components.

use crate::error::{Error, Result};
use crate::function::LocallyConstantFunction;
use crate::graph;
use crate::linalg::{perron, Mat, PerronOptions};
use crate::sft::{BlockCode, Sft, Word, ENUMERATION_BUDGET};
use rand::Rng;
use serde_json::Value;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

/// Default cylinder depth for [`d_star`].
pub const D_STAR_DEPTH: usize = 10;

const ROW_SUM_TOL: f64 = 1e-9;

/// Unique stationary distribution of a row-stochastic matrix.
pub fn stationary(q: &Mat) -> Result<Vec<f64>> {
    let n = q.dim();
    if n == 0 {
        return Err(Error::InvalidInput("empty stochastic matrix".into()));
    }
    let closed = graph::closed_classes(&q.support());
    if closed.len() != 1 {
        return Err(Error::NonUniqueStationary(closed.len()));
    }
    let class = &closed[0];
    let k = class.len();
    // π (I - Q_C) = 0 with the last balance equation replaced by Σπ = 1
    let mut rows = vec![vec![0.0; k]; k];
    for (r, &j) in class.iter().enumerate() {
        for (c, &i) in class.iter().enumerate() {
            rows[r][c] = if i == j { 1.0 } else { 0.0 } - q[(i, j)];
        }
    }
    rows[k - 1] = vec![1.0; k];
    let mut rhs = vec![0.0; k];
    rhs[k - 1] = 1.0;
    let x = Mat::from_rows(&rows)?.solve(&rhs)?;
    let mut pi = vec![0.0; n];
    for (c, &i) in class.iter().enumerate() {
        pi[i] = x[c].max(0.0);
    }
    // two lazy smoothing steps remove solver round-off without moving π
    for _ in 0..2 {
        let next = q.vec_mul(&pi);
        for (p, v) in pi.iter_mut().zip(next) {
            *p = 0.5 * (*p + v);
        }
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= s);
    }
    Ok(pi)
}

/// `‖πQ − π‖₁`
pub fn balance_residual(q: &Mat, pi: &[f64]) -> f64 {
    q.vec_mul(pi).iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
}

/// Hash map with a fixed hasher: iteration order, and so every float sum
/// over it, is the same in every process.
pub type StableMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

/// Cylinder probabilities of every positive-probability word of length
/// `1..=depth`.
#[derive(Clone, Debug, Default)]
pub struct CylinderProfile {
    levels: Vec<StableMap<Word, f64>>,
}

impl CylinderProfile {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Words of length `n` (1-based) with their probabilities.
    pub fn level(&self, n: usize) -> &StableMap<Word, f64> {
        &self.levels[n - 1]
    }

    pub fn get(&self, w: &[usize]) -> f64 {
        self.levels.get(w.len().wrapping_sub(1)).and_then(|l| l.get(w)).copied().unwrap_or(0.0)
    }

    fn accumulate(&mut self, other: &CylinderProfile, weight: f64) {
        if self.levels.len() < other.levels.len() {
            self.levels.resize(other.levels.len(), StableMap::default());
        }
        for (mine, theirs) in self.levels.iter_mut().zip(&other.levels) {
            for (w, p) in theirs {
                *mine.entry(w.clone()).or_insert(0.0) += weight * p;
            }
        }
    }

    /// `Σ_n 2^{-n} max_w |self[w] − other[w]|` over the common depth.
    pub fn distance(&self, other: &CylinderProfile) -> f64 {
        let depth = self.depth().min(other.depth());
        (1..=depth)
            .map(|n| {
                let (a, b) = (self.level(n), other.level(n));
                let mut m = 0.0f64;
                for (w, p) in a {
                    m = m.max((p - b.get(w).copied().unwrap_or(0.0)).abs());
                }
                for (w, p) in b {
                    if !a.contains_key(w) {
                        m = m.max(p.abs());
                    }
                }
                m * 0.5f64.powi(n as i32)
            })
            .sum()
    }

    /// Per-level maximum deviation, without the `2^{-n}` weights.
    pub fn level_gaps(&self, other: &CylinderProfile) -> Vec<f64> {
        let depth = self.depth().min(other.depth());
        (1..=depth)
            .map(|n| {
                let (a, b) = (self.level(n), other.level(n));
                a.keys()
                    .chain(b.keys())
                    .map(|w| (a.get(w).copied().unwrap_or(0.0) - b.get(w).copied().unwrap_or(0.0)).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Build directly from per-level tables.
    pub fn from_levels(levels: Vec<StableMap<Word, f64>>) -> Self {
        CylinderProfile { levels }
    }
}

/// A stationary Markov chain on the admissible `m`-words of an SFT.
#[derive(Clone, Debug)]
pub struct MarkovComponent {
    sft: Sft,
    memory: usize,
    states: Vec<Word>,
    index: HashMap<Word, usize>,
    q: Mat,
    pi: Vec<f64>,
    ergodic: bool,
}

impl MarkovComponent {
    /// Validate `q` against the `m`-block recoding of `sft` and compute its
    /// stationary vector.
    pub fn new(sft: &Sft, memory: usize, q: Mat) -> Result<Self> {
        let n = sft.word_count(memory);
        if q.dim() as u128 != n {
            return Err(Error::MemoryMismatch(format!(
                "Q has dimension {} but there are {n} admissible {memory}-words",
                q.dim()
            )));
        }
        let pi = stationary(&q)?;
        Self::with_stationary(sft, memory, q, pi)
    }

    /// As [`MarkovComponent::new`] with a caller-supplied stationary vector,
    /// checked to `1e-9`.
    pub fn with_stationary(sft: &Sft, memory: usize, q: Mat, pi: Vec<f64>) -> Result<Self> {
        if memory == 0 {
            return Err(Error::InvalidInput("memory must be at least 1".into()));
        }
        let code = sft.block_recode(memory)?;
        Self::from_code(sft, &code, q, pi)
    }

    /// As [`MarkovComponent::with_stationary`] on an existing recoding.
    pub fn from_code(sft: &Sft, code: &BlockCode, mut q: Mat, mut pi: Vec<f64>) -> Result<Self> {
        let memory = code.memory;
        let n = code.len();
        if q.dim() != n {
            return Err(Error::MemoryMismatch(format!(
                "Q has dimension {} but there are {n} admissible {memory}-words",
                q.dim()
            )));
        }
        if pi.len() != n {
            return Err(Error::InvalidInput(format!("pi has length {} but Q has dimension {n}", pi.len())));
        }
        for i in 0..n {
            let row = q.row_mut(i);
            let mut s = 0.0;
            for (j, v) in row.iter().enumerate() {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(Error::InvalidInput(format!("Q[{i}][{j}] = {v} is not a probability")));
                }
                if *v > 0.0 && !code.sft.allowed(i, j) {
                    return Err(Error::InvalidInput(format!(
                        "Q charges the forbidden transition {} -> {}",
                        code.words[i], code.words[j]
                    )));
                }
                s += v;
            }
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidInput(format!("row {i} of Q sums to {s}")));
            }
            row.iter_mut().for_each(|v| *v /= s);
        }
        if pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidInput("pi must be a probability vector".into()));
        }
        let s: f64 = pi.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!("pi sums to {s}")));
        }
        pi.iter_mut().for_each(|p| *p /= s);
        let res = balance_residual(&q, &pi);
        if res > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!("pi is not stationary for Q (residual {res:e})")));
        }
        let support: Vec<usize> = (0..n).filter(|&i| pi[i] > 0.0).collect();
        let ergodic = graph::is_strongly_connected(&graph::induced(&q.support(), &support));
        Ok(MarkovComponent { sft: sft.clone(), memory, states: code.words.clone(), index: code.index.clone(), q, pi, ergodic })
    }

    /// i.i.d. measure with the given symbol probabilities; every symbol
    /// with positive probability must be followable by every other.
    pub fn bernoulli(sft: &Sft, p: &[f64]) -> Result<Self> {
        let k = sft.k();
        if p.len() != k {
            return Err(Error::InvalidInput(format!("expected {k} probabilities")));
        }
        for i in 0..k {
            for j in 0..k {
                if p[j] > 0.0 && !sft.allowed(i, j) {
                    return Err(Error::InvalidInput("Bernoulli measure needs a full shift on its support".into()));
                }
            }
        }
        let q = Mat::from_rows(&vec![p.to_vec(); k])?;
        Self::with_stationary(sft, 1, q, p.to_vec())
    }

    /// Measure of maximal entropy of an irreducible SFT.
    pub fn parry(sft: &Sft) -> Result<Self> {
        if !sft.is_irreducible() {
            return Err(Error::NotIrreducible("Parry measure needs an irreducible SFT".into()));
        }
        let a = sft.matrix_f64();
        let p = perron(&a, &PerronOptions::default())?;
        let k = sft.k();
        let mut q = Mat::zeros(k);
        for i in 0..k {
            for j in sft.successors(i) {
                q[(i, j)] = p.right[j] / (p.value * p.right[i]);
            }
        }
        let pi: Vec<f64> = (0..k).map(|i| p.left[i] * p.right[i]).collect();
        Self::with_stationary(sft, 1, q, pi)
    }

    /// Uniform measure on the periodic orbit of `w`.
    pub fn periodic_orbit(sft: &Sft, w: &[usize]) -> Result<Self> {
        if !sft.is_closable(w) {
            return Err(Error::NonClosableWord(w.to_vec()));
        }
        let p = primitive_period(w);
        let w = &w[..p];
        let block = |i: usize, m: usize| -> Vec<usize> { (0..m).map(|t| w[(i + t) % p]).collect() };
        let memory = (1..=p)
            .find(|&m| {
                let mut seen: Vec<Vec<usize>> = (0..p).map(|i| block(i, m)).collect();
                seen.sort();
                seen.dedup();
                seen.len() == p
            })
            .unwrap_or(p);
        let code = sft.block_recode(memory)?;
        let n = code.len();
        let mut q = Mat::zeros(n);
        let mut pi = vec![0.0; n];
        let mut on_orbit = vec![false; n];
        for i in 0..p {
            let a = code.index[block(i, memory).as_slice()];
            let b = code.index[block(i + 1, memory).as_slice()];
            q[(a, b)] = 1.0;
            pi[a] = 1.0 / p as f64;
            on_orbit[a] = true;
        }
        for (i, &orb) in on_orbit.iter().enumerate() {
            if orb {
                continue;
            }
            let succ: Vec<usize> = code.sft.successors(i).collect();
            for &j in &succ {
                q[(i, j)] = 1.0 / succ.len() as f64;
            }
        }
        Self::with_stationary(sft, memory, q, pi)
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn state_index(&self, w: &[usize]) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn is_ergodic(&self) -> bool {
        self.ergodic
    }

    /// `−Σ π(w) Q(w,w′) log Q(w,w′)`
    pub fn entropy(&self) -> f64 {
        let n = self.states.len();
        let mut h = 0.0;
        for i in 0..n {
            if self.pi[i] == 0.0 {
                continue;
            }
            let row: f64 = self.q.row(i).iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum();
            h += self.pi[i] * row;
        }
        h.max(0.0)
    }

    /// Successor state of `i` when the next ambient symbol is `s`.
    fn step(&self, i: usize, s: usize) -> Option<usize> {
        let w = &self.states[i];
        let mut nxt = w[1..].to_vec();
        nxt.push(s);
        self.index.get(nxt.as_slice()).copied()
    }

    /// Probability of the cylinder `[w]`; zero for inadmissible words.
    pub fn cylinder_prob(&self, w: &[usize]) -> f64 {
        if w.is_empty() {
            return 1.0;
        }
        if !self.sft.is_admissible(w) {
            return 0.0;
        }
        let m = self.memory;
        if w.len() < m {
            return self
                .states
                .iter()
                .zip(&self.pi)
                .filter(|(s, _)| s.starts_with(w))
                .map(|(_, p)| p)
                .sum();
        }
        let mut i = self.index[&w[..m]];
        let mut p = self.pi[i];
        for &s in &w[m..] {
            if p == 0.0 {
                return 0.0;
            }
            let j = self.step(i, s).expect("admissible word stays in the recoding");
            p *= self.q[(i, j)];
            i = j;
        }
        p
    }

    /// All positive-probability words of length `1..=depth`.
    pub fn profile(&self, depth: usize) -> CylinderProfile {
        let m = self.memory;
        let mut levels: Vec<StableMap<Word, f64>> = Vec::with_capacity(depth);
        for n in 1..=depth.min(m) {
            let mut level = StableMap::default();
            for (s, &p) in self.states.iter().zip(&self.pi) {
                if p > 0.0 {
                    *level.entry(Word(s[..n].to_vec())).or_insert(0.0) += p;
                }
            }
            levels.push(level);
        }
        if depth > m {
            // carry (word, last state) pairs forward
            let mut frontier: Vec<(Vec<usize>, usize, f64)> = self
                .states
                .iter()
                .enumerate()
                .filter(|(i, _)| self.pi[*i] > 0.0)
                .map(|(i, s)| (s.0.clone(), i, self.pi[i]))
                .collect();
            for _ in m + 1..=depth {
                let mut next = Vec::with_capacity(frontier.len() * 2);
                let mut level = StableMap::with_capacity_and_hasher(frontier.len() * 2, Default::default());
                for (w, i, p) in &frontier {
                    for (j, &qij) in self.q.row(*i).iter().enumerate() {
                        if qij > 0.0 {
                            let mut nw = w.clone();
                            nw.push(self.states[j][m - 1]);
                            let np = p * qij;
                            level.insert(Word(nw.clone()), np);
                            next.push((nw, j, np));
                        }
                    }
                }
                levels.push(level);
                frontier = next;
            }
        }
        CylinderProfile { levels }
    }

    /// `∫ g dμ`, exact.
    pub fn integrate(&self, g: &LocallyConstantFunction) -> f64 {
        let mg = g.memory();
        if mg <= self.memory {
            return self.states.iter().zip(&self.pi).filter(|(_, p)| **p > 0.0).map(|(s, p)| p * g.at(s)).sum();
        }
        if mg == self.memory + 1 {
            let mut total = 0.0;
            let mut buf = Vec::with_capacity(mg);
            for (i, s) in self.states.iter().enumerate() {
                if self.pi[i] == 0.0 {
                    continue;
                }
                for (j, &qij) in self.q.row(i).iter().enumerate() {
                    if qij > 0.0 {
                        buf.clear();
                        buf.extend_from_slice(s);
                        buf.push(self.states[j][self.memory - 1]);
                        total += self.pi[i] * qij * g.at(&buf);
                    }
                }
            }
            return total;
        }
        self.profile(mg).level(mg).iter().map(|(w, p)| p * g.at(w)).sum()
    }

    /// The same measure presented on `m′`-word states, `m′ ≥ m`.
    pub fn to_memory(&self, memory: usize) -> Result<Self> {
        if memory < self.memory {
            return Err(Error::MemoryMismatch(format!("cannot lower memory {} to {memory}", self.memory)));
        }
        if memory == self.memory {
            return Ok(self.clone());
        }
        let code = self.sft.block_recode(memory)?;
        let n = code.len();
        let m = self.memory;
        let mut q = Mat::zeros(n);
        let mut pi = vec![0.0; n];
        for (a, u) in code.words.iter().enumerate() {
            pi[a] = self.cylinder_prob(u);
            let tail = self.index[&u[memory - m..]];
            let succ: Vec<usize> = code.sft.successors(a).collect();
            let mut total = 0.0;
            for &b in &succ {
                let head = self.index[&code.words[b][memory - m..]];
                q[(a, b)] = self.q[(tail, head)];
                total += q[(a, b)];
            }
            if total == 0.0 {
                // unreachable row: any admissible continuation will do
                for &b in &succ {
                    q[(a, b)] = 1.0 / succ.len() as f64;
                }
            }
        }
        Self::with_stationary(&self.sft, memory, q, pi)
    }

    /// The (m+1)-word distribution is charged on every admissible word.
    pub fn has_full_support(&self) -> bool {
        let n = self.states.len();
        (0..n).all(|i| self.pi[i] > 0.0)
            && (0..n).all(|i| self.q.row(i).iter().enumerate().all(|(j, &v)| v > 0.0 || !self.step_allowed(i, j)))
    }

    fn step_allowed(&self, i: usize, j: usize) -> bool {
        self.states[i][1..] == self.states[j][..self.memory - 1] && self.sft.allowed(self.states[i][self.memory - 1], self.states[j][self.memory - 1])
    }

    /// Sample an ambient symbol path of length `len` from the stationary
    /// chain.
    pub fn sample_path<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<usize> {
        let pick = |weights: &[f64], rng: &mut R| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    return i;
                }
            }
            weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
        };
        let mut i = pick(&self.pi, rng);
        let mut out: Vec<usize> = self.states[i].0.clone();
        while out.len() < len {
            i = pick(self.q.row(i), rng);
            out.push(self.states[i][self.memory - 1]);
        }
        out.truncate(len);
        out
    }
}

/// Length of the primitive root of `w`.
fn primitive_period(w: &[usize]) -> usize {
    let n = w.len();
    (1..=n).find(|&p| n % p == 0 && (0..n).all(|i| w[i] == w[i % p])).unwrap_or(n)
}

/// A finite convex combination of Markov components.
#[derive(Clone, Debug)]
pub struct InvariantMeasure {
    components: Vec<(f64, MarkovComponent)>,
}

impl From<MarkovComponent> for InvariantMeasure {
    fn from(c: MarkovComponent) -> Self {
        InvariantMeasure { components: vec![(1.0, c)] }
    }
}

impl InvariantMeasure {
    pub fn new(components: Vec<(f64, MarkovComponent)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("a measure needs at least one component".into()));
        }
        if components.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("component weights must be nonnegative".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidInput(format!("component weights sum to {total}")));
        }
        let sft = components[0].1.sft();
        if components.iter().any(|(_, c)| c.sft() != sft) {
            return Err(Error::InvalidInput("components live on different SFTs".into()));
        }
        Ok(InvariantMeasure { components: components.into_iter().map(|(w, c)| (w / total, c)).collect() })
    }

    /// `Σ θ_i μ_i`, flattening the components of each `μ_i`.
    pub fn mixture(parts: &[(f64, &InvariantMeasure)]) -> Result<Self> {
        let mut comps = Vec::new();
        for (theta, mu) in parts {
            for (w, c) in &mu.components {
                comps.push((theta * w, c.clone()));
            }
        }
        Self::new(comps)
    }

    pub fn bernoulli(sft: &Sft, p: &[f64]) -> Result<Self> {
        MarkovComponent::bernoulli(sft, p).map(Into::into)
    }

    pub fn parry(sft: &Sft) -> Result<Self> {
        MarkovComponent::parry(sft).map(Into::into)
    }

    pub fn periodic_orbit(sft: &Sft, w: &[usize]) -> Result<Self> {
        MarkovComponent::periodic_orbit(sft, w).map(Into::into)
    }

    pub fn components(&self) -> &[(f64, MarkovComponent)] {
        &self.components
    }

    pub fn sft(&self) -> &Sft {
        self.components[0].1.sft()
    }

    pub fn max_memory(&self) -> usize {
        self.components.iter().map(|(_, c)| c.memory()).max().unwrap_or(1)
    }

    pub fn entropy(&self) -> f64 {
        self.components.iter().map(|(w, c)| w * c.entropy()).sum()
    }

    pub fn integrate(&self, g: &LocallyConstantFunction) -> f64 {
        self.components.iter().filter(|(w, _)| *w > 0.0).map(|(w, c)| w * c.integrate(g)).sum()
    }

    pub fn cylinder_prob(&self, w: &[usize]) -> f64 {
        self.components.iter().map(|(t, c)| t * c.cylinder_prob(w)).sum()
    }

    pub fn profile(&self, depth: usize) -> CylinderProfile {
        let mut out = CylinderProfile::default();
        for (w, c) in &self.components {
            if *w > 0.0 {
                out.accumulate(&c.profile(depth), *w);
            }
        }
        if out.levels.len() < depth {
            out.levels.resize(depth, StableMap::default());
        }
        out
    }

    /// The memory-`m` Markov measure with the same `(m+1)`-word
    /// distribution.
    pub fn markov_projection(&self, memory: usize) -> Result<MarkovComponent> {
        let sft = self.sft();
        let code = sft.block_recode(memory)?;
        let n = code.len();
        let mut q = Mat::zeros(n);
        let mut pi = vec![0.0; n];
        for (a, w) in code.words.iter().enumerate() {
            pi[a] = self.cylinder_prob(w);
            let succ: Vec<usize> = code.sft.successors(a).collect();
            let mut ext = w.0.clone();
            ext.push(0);
            for &b in &succ {
                ext[memory] = code.words[b][memory - 1];
                q[(a, b)] = if pi[a] > 0.0 { self.cylinder_prob(&ext) / pi[a] } else { 1.0 / succ.len() as f64 };
            }
            let s: f64 = q.row(a).iter().sum();
            q.row_mut(a).iter_mut().for_each(|v| *v /= s);
        }
        MarkovComponent::from_code(sft, &code, q, pi)
    }

    /// Ergodic iff every charged component is ergodic and all charged
    /// components describe the same measure.
    pub fn is_ergodic(&self) -> bool {
        let charged: Vec<&MarkovComponent> = self.components.iter().filter(|(w, _)| *w > 0.0).map(|(_, c)| c).collect();
        if !charged.iter().all(|c| c.is_ergodic()) {
            return false;
        }
        // Markov measures of memory ≤ M are determined by their (M+1)-words
        let depth = self.max_memory() + 1;
        let first = charged[0].profile(depth);
        charged[1..].iter().all(|c| first.distance(&c.profile(depth)) <= 1e-12)
    }

    /// `supp μ` is the whole SFT. The support of a mixture is the union of
    /// component supports, and an irreducible SFT is not a finite union of
    /// proper closed invariant subsets, so one component must be full.
    pub fn support_is_full(&self) -> bool {
        self.components.iter().any(|(w, c)| *w > 0.0 && c.has_full_support())
    }

    pub fn to_json_value(&self, include_sft: bool) -> Value {
        let comps: Vec<Value> = self
            .components
            .iter()
            .map(|(w, c)| {
                serde_json::json!({
                    "weight": w,
                    "memory": c.memory(),
                    "Q": c.q().to_rows(),
                    "pi": c.pi(),
                })
            })
            .collect();
        let mut v = serde_json::json!({ "components": comps });
        if include_sft {
            v["sft"] = self.sft().to_json_value();
        }
        v
    }

    /// Parse measure JSON; the ambient SFT comes from an embedded `"sft"`
    /// field or from `ambient`.
    pub fn from_json_value(ambient: Option<&Sft>, v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::InvalidInput("measure must be a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "components" | "sft") {
                return Err(Error::InvalidInput(format!("unknown measure field {key:?}")));
            }
        }
        let embedded = obj.get("sft").map(Sft::from_json_value).transpose()?;
        let sft = match (&embedded, ambient) {
            (Some(e), Some(a)) if e != a => {
                return Err(Error::InvalidInput("embedded SFT differs from the ambient SFT".into()))
            }
            (Some(e), _) => e,
            (None, Some(a)) => a,
            (None, None) => return Err(Error::InvalidInput("measure has no SFT".into())),
        };
        let comps = obj
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("measure needs a \"components\" array".into()))?;
        let mut out = Vec::with_capacity(comps.len());
        for c in comps {
            let c: ComponentJson =
                serde_json::from_value(c.clone()).map_err(|e| Error::InvalidInput(format!("component JSON: {e}")))?;
            let q = Mat::from_rows(&c.q)?;
            let comp = match c.pi {
                Some(pi) => MarkovComponent::with_stationary(sft, c.memory, q, pi)?,
                None => MarkovComponent::new(sft, c.memory, q)?,
            };
            out.push((c.weight, comp));
        }
        Self::new(out)
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentJson {
    weight: f64,
    memory: usize,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    pi: Option<Vec<f64>>,
}

/// Translation-invariant weak* metric truncated at `depth`.
pub fn d_star(mu: &InvariantMeasure, nu: &InvariantMeasure, depth: usize) -> Result<f64> {
    if mu.sft() != nu.sft() {
        return Err(Error::InvalidInput("measures live on different SFTs".into()));
    }
    let count = mu.sft().word_count(depth);
    if count > ENUMERATION_BUDGET {
        return Err(Error::EnumerationTooLarge { count, budget: ENUMERATION_BUDGET });
    }
    Ok(mu.profile(depth).distance(&nu.profile(depth)))
}
