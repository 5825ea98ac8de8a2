//! Multi-horseshoe certificates at the symbolic level.
//!
//! Horseshoes are free concatenations of length-`n` words that start in an
//! anchor set `F` and end in its closing set `L(F)` (every `L(F) → F`
//! transition is allowed), so any sequence of such words is admissible.
//! `Λ_i` uses the words whose periodic orbit lies close to `μ_i`, and `Θ`
//! uses their union.

use crate::error::{Error, Result};
use crate::graph;
use crate::linalg::{perron_root, Mat};
use crate::measures::{CylinderProfile, InvariantMeasure, D_STAR_DEPTH};
use crate::roots::bisect;
use crate::sft::{Sft, Word, ENUMERATION_BUDGET};
use crate::suspension::SuspensionSystem;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use crate::measures::StableMap as HashMap;
use std::collections::HashSet;

pub const DEFAULT_SAMPLES: usize = 500;
/// Alphabets up to this size try every anchor set; larger ones try
/// singletons and the full alphabet.
pub const ANCHOR_SEARCH_ALPHABET: usize = 12;
/// Mixtures used for the flow reweighting identity.
pub const IDENTITY_MIXTURES: usize = 50;
pub const IDENTITY_TOL: f64 = 1e-10;
const CHUNK: usize = 1 << 16;
const MAX_SAMPLE_WORDS: usize = 16;
const MAX_CONCATENATION: usize = 8;
const LATTICE_POINTS: usize = 2000;

#[derive(Clone, Debug)]
pub struct HorseshoeOptions {
    pub eta: f64,
    pub zeta: f64,
    pub n_max: usize,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Clone, Debug)]
pub struct HorseshoePack {
    pub sft: Sft,
    pub measures: Vec<InvariantMeasure>,
    pub entropies: Vec<f64>,
    pub eta: f64,
    pub zeta: f64,
    pub n: usize,
    /// Anchor set: every word starts here.
    pub first: Vec<usize>,
    /// Closing set: every word ends here.
    pub last: Vec<usize>,
    /// `G_i`, the alphabet of `Λ_i`.
    pub words: Vec<Vec<Word>>,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub horseshoes: HorseshoeCondition,
    pub entropy: EntropyCondition,
    pub distance: StatisticalCertificate,
    pub pass: bool,
}

/// `Λ_i ⊆ Θ ⊊ X` are transitive SFTs of positive entropy.
#[derive(Clone, Debug, Serialize)]
pub struct HorseshoeCondition {
    pub words_admissible: bool,
    pub concatenations_admissible: bool,
    pub irreducible: bool,
    pub nested: bool,
    /// `h_top(Θ) < h_top(X)`; irreducible SFTs are entropy minimal.
    pub proper: bool,
    pub word_counts: Vec<usize>,
    pub theta_words: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyCondition {
    /// `h_top(Λ_i)`
    pub entropies: Vec<f64>,
    /// `h_{μ_i} − η`
    pub bounds: Vec<f64>,
    pub margins: Vec<f64>,
    pub theta_entropy: f64,
    pub theta_margin: f64,
    pub ambient_entropy: f64,
    pub pass: bool,
}

/// Hausdorff distances estimated from sampled invariant measures of the
/// horseshoes; not a proof.
#[derive(Clone, Debug, Serialize)]
pub struct StatisticalCertificate {
    pub label: String,
    pub samples: usize,
    pub seed: u64,
    /// `d_H(μ_i, M(Λ_i))` estimates with all samples and with the first half.
    pub member_distance: Vec<f64>,
    pub member_distance_half: Vec<f64>,
    /// `d_H(F, M(Θ))` estimates.
    pub family_distance: f64,
    pub family_distance_half: f64,
    pub zeta: f64,
    pub margins: Vec<f64>,
    pub family_margin: f64,
    pub pass: bool,
}

fn encode(w: &[usize], k: u64) -> u64 {
    w.iter().fold(0, |c, &s| c * k + s as u64)
}

/// Target cylinder profile keyed by integer codes, for the word search.
struct Target {
    k: u64,
    levels: Vec<(HashMap<u64, f64>, Vec<(u64, f64)>)>,
}

impl Target {
    fn new(p: &CylinderProfile, k: usize) -> Self {
        let k = k as u64;
        let levels = (1..=p.depth())
            .map(|n| {
                let map: HashMap<u64, f64> = p.level(n).iter().map(|(w, &v)| (encode(w, k), v)).collect();
                let mut desc: Vec<(u64, f64)> = map.iter().map(|(&c, &v)| (c, v)).collect();
                desc.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                (map, desc)
            })
            .collect();
        Target { k, levels }
    }

    /// d* between the periodic orbit of `w` and the target, stopping once
    /// the partial sum reaches `bound`.
    fn cyclic_distance(&self, w: &[usize], bound: f64) -> f64 {
        let n = w.len();
        let mut codes = vec![0u64; n];
        let mut sorted = Vec::with_capacity(n);
        let mut total = 0.0;
        for (l, (map, desc)) in self.levels.iter().enumerate() {
            for (j, c) in codes.iter_mut().enumerate() {
                *c = *c * self.k + w[(j + l) % n] as u64;
            }
            sorted.clear();
            sorted.extend_from_slice(&codes);
            sorted.sort_unstable();
            let mut dev = 0.0f64;
            let mut i = 0;
            while i < n {
                let mut e = i + 1;
                while e < n && sorted[e] == sorted[i] {
                    e += 1;
                }
                let f = (e - i) as f64 / n as f64;
                dev = dev.max((f - map.get(&sorted[i]).copied().unwrap_or(0.0)).abs());
                i = e;
            }
            if let Some(&(_, p)) = desc.iter().find(|(c, _)| sorted.binary_search(c).is_err()) {
                dev = dev.max(p);
            }
            total += dev * 0.5f64.powi(l as i32 + 1);
            if total >= bound {
                break;
            }
        }
        total
    }
}

/// Profile of the periodic orbit of `w`.
pub fn cyclic_profile(w: &[usize], depth: usize) -> CylinderProfile {
    let n = w.len();
    let levels = (1..=depth)
        .map(|l| {
            let mut m: HashMap<Word, f64> = HashMap::default();
            for j in 0..n {
                let u: Vec<usize> = (0..l).map(|t| w[(j + t) % n]).collect();
                *m.entry(Word(u)).or_insert(0.0) += 1.0 / n as f64;
            }
            m
        })
        .collect();
    CylinderProfile::from_levels(levels)
}

/// Profile of the shift-invariant measure obtained from i.i.d.
/// concatenations of equal-length `words` drawn with `weights`, averaged
/// over the starting offset.
pub fn word_bernoulli_profile(words: &[&[usize]], weights: &[f64], depth: usize) -> CylinderProfile {
    let n = words[0].len();
    let mut top: HashMap<Vec<usize>, f64> = HashMap::default();
    for j in 0..n {
        let mut dist: HashMap<Vec<usize>, f64> = HashMap::default();
        for (g, &w) in words.iter().zip(weights) {
            *dist.entry(g[j..n.min(j + depth)].to_vec()).or_insert(0.0) += w;
        }
        while dist.keys().next().is_some_and(|c| c.len() < depth) {
            let mut next: HashMap<Vec<usize>, f64> = HashMap::with_capacity_and_hasher(dist.len() * words.len(), Default::default());
            for (c, p) in &dist {
                let need = depth - c.len();
                for (g, &w) in words.iter().zip(weights) {
                    let mut nc = c.clone();
                    nc.extend_from_slice(&g[..n.min(need)]);
                    *next.entry(nc).or_insert(0.0) += p * w;
                }
            }
            dist = next;
        }
        for (c, p) in dist {
            *top.entry(c).or_insert(0.0) += p / n as f64;
        }
    }
    let levels = (1..=depth)
        .map(|l| {
            let mut m: HashMap<Word, f64> = HashMap::default();
            for (c, p) in &top {
                *m.entry(Word(c[..l].to_vec())).or_insert(0.0) += p;
            }
            m
        })
        .collect();
    CylinderProfile::from_levels(levels)
}

fn combine(profiles: &[&CylinderProfile], theta: &[f64]) -> CylinderProfile {
    let depth = profiles.iter().map(|p| p.depth()).min().unwrap_or(0);
    let levels = (1..=depth)
        .map(|n| {
            let mut m: HashMap<Word, f64> = HashMap::default();
            for (p, &t) in profiles.iter().zip(theta) {
                for (w, v) in p.level(n) {
                    *m.entry(w.clone()).or_insert(0.0) += t * v;
                }
            }
            m
        })
        .collect();
    CylinderProfile::from_levels(levels)
}

/// Points of the simplex lattice `{θ : rθ ∈ ℕ^m, Σθ = 1}`.
fn lattice(m: usize, max_points: usize) -> Vec<Vec<f64>> {
    fn count(r: usize, m: usize) -> f64 {
        (1..m).map(|i| (r + i) as f64 / i as f64).product()
    }
    let mut r = 1;
    while count(r + 1, m) <= max_points as f64 {
        r += 1;
    }
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(left - a, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, m, &mut Vec::new(), &mut out);
    out.into_iter().map(|v| v.into_iter().map(|a| a as f64 / r as f64).collect()).collect()
}

/// Convex hull of finitely many profiles, stored densely for fast
/// distance minimization.
struct Hull {
    m: usize,
    index: Vec<HashMap<Word, usize>>,
    /// level → vertex → entry
    vals: Vec<Vec<Vec<f64>>>,
}

impl Hull {
    fn new(vertices: &[CylinderProfile]) -> Self {
        let depth = vertices.iter().map(|p| p.depth()).min().unwrap_or(0);
        let mut index = Vec::with_capacity(depth);
        let mut vals = Vec::with_capacity(depth);
        for n in 1..=depth {
            let mut idx: HashMap<Word, usize> = HashMap::default();
            for v in vertices {
                for w in v.level(n).keys() {
                    let next = idx.len();
                    idx.entry(w.clone()).or_insert(next);
                }
            }
            let mut rows = vec![vec![0.0; idx.len()]; vertices.len()];
            for (row, v) in rows.iter_mut().zip(vertices) {
                for (w, p) in v.level(n) {
                    row[idx[w]] = *p;
                }
            }
            index.push(idx);
            vals.push(rows);
        }
        Hull { m: vertices.len(), index, vals }
    }

    /// Dense view of `nu` plus, per level, the largest entry outside the
    /// hull's support.
    fn project(&self, nu: &CylinderProfile) -> Vec<(Vec<f64>, f64)> {
        self.index
            .iter()
            .enumerate()
            .map(|(l, idx)| {
                let mut dense = vec![0.0; idx.len()];
                let mut outside = 0.0f64;
                for (w, p) in nu.level(l + 1) {
                    match idx.get(w) {
                        Some(&i) => dense[i] = *p,
                        None => outside = outside.max(p.abs()),
                    }
                }
                (dense, outside)
            })
            .collect()
    }

    fn distance(&self, theta: &[f64], nu: &[(Vec<f64>, f64)]) -> f64 {
        self.vals
            .iter()
            .zip(nu)
            .enumerate()
            .map(|(l, (rows, (dense, outside)))| {
                let mut m = *outside;
                for (i, x) in dense.iter().enumerate() {
                    let v: f64 = rows.iter().zip(theta).map(|(r, t)| r[i] * t).sum();
                    m = m.max((v - x).abs());
                }
                m * 0.5f64.powi(l as i32 + 1)
            })
            .sum()
    }

    /// `inf_θ d*(Σ θ_i V_i, ν)`; the objective is convex in `θ`.
    fn inf_distance(&self, nu: &CylinderProfile) -> f64 {
        let dense = self.project(nu);
        match self.m {
            1 => self.distance(&[1.0], &dense),
            2 => {
                let f = |t: f64| self.distance(&[1.0 - t, t], &dense);
                let phi = 0.5 * (5f64.sqrt() - 1.0);
                let (mut a, mut b) = (0.0f64, 1.0f64);
                let mut c = b - phi * (b - a);
                let mut d = a + phi * (b - a);
                let (mut fc, mut fd) = (f(c), f(d));
                for _ in 0..60 {
                    if fc <= fd {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - phi * (b - a);
                        fc = f(c);
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + phi * (b - a);
                        fd = f(d);
                    }
                }
                fc.min(fd).min(f(0.0)).min(f(1.0))
            }
            m => lattice(m, LATTICE_POINTS).iter().map(|t| self.distance(t, &dense)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// A random invariant measure of the free concatenation over `words`:
/// even draws are i.i.d. word measures on a random subset with Dirichlet
/// weights, odd draws are periodic orbits of random concatenations.
fn sample_profile(words: &[&Word], draw: usize, rng: &mut ChaCha8Rng, depth: usize) -> CylinderProfile {
    if draw % 2 == 0 {
        let r = rng.gen_range(1..=MAX_SAMPLE_WORDS.min(words.len()));
        let chosen: Vec<&[usize]> = sample(rng, words.len(), r).iter().map(|i| &words[i].0[..]).collect();
        let raw: Vec<f64> = (0..r).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|x| x / total).collect();
        word_bernoulli_profile(&chosen, &weights, depth)
    } else {
        let r = rng.gen_range(1..=MAX_CONCATENATION);
        let mut cat = Vec::with_capacity(r * words[0].len());
        for _ in 0..r {
            cat.extend_from_slice(words[rng.gen_range(0..words.len())]);
        }
        cyclic_profile(&cat, depth)
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sampled profiles: one list per `Λ_i`, then one for `Θ`.
fn draw_samples(pack: &HorseshoePack, samples: usize, seed: u64) -> (Vec<Vec<CylinderProfile>>, Vec<CylinderProfile>) {
    let members = pack
        .words
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let refs: Vec<&Word> = g.iter().collect();
            (0..samples)
                .into_par_iter()
                .map(|j| sample_profile(&refs, j, &mut stream_rng(seed, ((i as u64 + 1) << 32) | j as u64), D_STAR_DEPTH))
                .collect()
        })
        .collect();
    let union = pack.theta_words();
    let refs: Vec<&Word> = union.iter().collect();
    let theta =
        (0..samples).into_par_iter().map(|j| sample_profile(&refs, j, &mut stream_rng(seed, j as u64), D_STAR_DEPTH)).collect();
    (members, theta)
}

fn statistical(
    targets: &[CylinderProfile],
    members: &[Vec<CylinderProfile>],
    theta: &[CylinderProfile],
    count: usize,
) -> (Vec<f64>, f64) {
    let m = targets.len();
    let hull = Hull::new(targets);
    let mut member_dist = Vec::with_capacity(m);
    let mut best = Vec::with_capacity(m);
    for (t, ms) in targets.iter().zip(members) {
        let d: Vec<f64> = ms[..count].par_iter().map(|p| p.distance(t)).collect();
        member_dist.push(d.iter().cloned().fold(0.0, f64::max));
        let arg = (0..count).min_by(|&a, &b| d[a].total_cmp(&d[b])).expect("at least one sample");
        best.push(&ms[arg]);
    }
    // sup over F of the distance to M(Θ), bounded through Σθ·(best member)
    let grid = if m == 1 { vec![vec![1.0]] } else if m == 2 { (0..=100).map(|j| vec![1.0 - j as f64 / 100.0, j as f64 / 100.0]).collect() } else { lattice(m, 200) };
    let vertex_refs: Vec<&CylinderProfile> = targets.iter().collect();
    let sup_f = grid
        .par_iter()
        .map(|t| combine(&vertex_refs, t).distance(&combine(&best, t)))
        .reduce(|| 0.0, f64::max);
    // sup over sampled M(Θ) of the distance to F
    let sup_theta = theta[..count]
        .par_iter()
        .chain(members.par_iter().flat_map(|ms| ms[..count].par_iter()))
        .map(|p| hull.inf_distance(p))
        .reduce(|| 0.0, f64::max);
    (member_dist, sup_f.max(sup_theta))
}

fn statistical_certificate(
    targets: &[CylinderProfile],
    members: &[Vec<CylinderProfile>],
    theta: &[CylinderProfile],
    samples: usize,
    seed: u64,
    zeta: f64,
) -> StatisticalCertificate {
    let (member_distance, family_distance) = statistical(targets, members, theta, samples);
    let (member_distance_half, family_distance_half) = statistical(targets, members, theta, (samples / 2).max(1));
    let margins: Vec<f64> = member_distance.iter().map(|d| zeta - d).collect();
    let family_margin = zeta - family_distance;
    StatisticalCertificate {
        label: "statistical certificate".into(),
        samples,
        seed,
        pass: margins.iter().all(|m| *m > 0.0) && family_margin > 0.0,
        member_distance,
        member_distance_half,
        family_distance,
        family_distance_half,
        zeta,
        margins,
        family_margin,
    }
}

/// Transfer matrix of a word set on first symbols: `T[a][b]` counts the
/// words starting with `a` that may be followed by `b`.
fn first_symbol_transfer(sft: &Sft, words: &[Word]) -> (Mat, Vec<Vec<usize>>) {
    let mut firsts: Vec<usize> = words.iter().map(|w| w[0]).collect();
    firsts.sort_unstable();
    firsts.dedup();
    let pos = |a: usize| firsts.binary_search(&a).expect("first symbol listed");
    let mut t = Mat::zeros(firsts.len());
    for w in words {
        let last = *w.last().expect("nonempty word");
        for (b, &f) in firsts.iter().enumerate() {
            if sft.allowed(last, f) {
                t[(pos(w[0]), b)] += 1.0;
            }
        }
    }
    let adj = t.support();
    (t, adj)
}

/// `h_top` of the free concatenation over `words` (per symbol).
pub fn word_entropy(sft: &Sft, words: &[Word]) -> Result<f64> {
    if words.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let (t, adj) = first_symbol_transfer(sft, words);
    if !graph::is_strongly_connected(&adj) {
        return Err(Error::NotIrreducible("word transfer graph".into()));
    }
    Ok(perron_root(&t, 1e-14)?.ln() / words[0].len() as f64)
}

impl HorseshoePack {
    /// Alphabet of `Θ`: the union of the `G_i`.
    pub fn theta_words(&self) -> Vec<Word> {
        let mut all: Vec<Word> = self.words.iter().flatten().cloned().collect();
        all.sort();
        all.dedup();
        all
    }

    /// Replace `G_i` by its first `keep` words (for negative tests).
    pub fn truncated(&self, i: usize, keep: usize) -> HorseshoePack {
        let mut p = self.clone();
        p.words[i].truncate(keep);
        p
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "sft": self.sft.to_json_value(),
            "n": self.n,
            "anchor": { "first": self.first, "last": self.last },
            "eta": self.eta,
            "zeta": self.zeta,
            "measures": self.measures.iter().map(|m| m.to_json_value(false)).collect::<Vec<_>>(),
            "entropies": self.entropies,
            "words": self.words,
            "certificate": self.certificate,
        })
    }

    /// Parse a pack; the stored certificate is recomputed.
    pub fn from_json_value(v: &Value, samples: usize, seed: u64) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Anchor {
            first: Vec<usize>,
            last: Vec<usize>,
        }
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct PackJson {
            sft: Value,
            n: usize,
            anchor: Anchor,
            eta: f64,
            zeta: f64,
            measures: Vec<Value>,
            #[serde(default, rename = "entropies")]
            _entropies: Option<Value>,
            words: Vec<Vec<Word>>,
            #[serde(default, rename = "certificate")]
            _certificate: Option<Value>,
        }
        let p: PackJson = serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("pack JSON: {e}")))?;
        let sft = Sft::from_json_value(&p.sft)?;
        let measures = p.measures.iter().map(|m| InvariantMeasure::from_json_value(Some(&sft), m)).collect::<Result<Vec<_>>>()?;
        if measures.len() != p.words.len() {
            return Err(Error::InvalidInput("one word set per measure required".into()));
        }
        for g in &p.words {
            if g.iter().any(|w| w.len() != p.n) {
                return Err(Error::InvalidInput(format!("pack words must have length {}", p.n)));
            }
        }
        let entropies = measures.iter().map(|m| m.entropy()).collect();
        let mut pack = HorseshoePack {
            sft,
            measures,
            entropies,
            eta: p.eta,
            zeta: p.zeta,
            n: p.n,
            first: p.anchor.first,
            last: p.anchor.last,
            words: p.words,
            certificate: placeholder_certificate(),
        };
        pack.certificate = certify_pack(&pack, samples, seed)?;
        Ok(pack)
    }
}

fn placeholder_certificate() -> Certificate {
    Certificate {
        horseshoes: HorseshoeCondition {
            words_admissible: false,
            concatenations_admissible: false,
            irreducible: false,
            nested: false,
            proper: false,
            word_counts: vec![],
            theta_words: 0,
            pass: false,
        },
        entropy: EntropyCondition {
            entropies: vec![],
            bounds: vec![],
            margins: vec![],
            theta_entropy: 0.0,
            theta_margin: 0.0,
            ambient_entropy: 0.0,
            pass: false,
        },
        distance: StatisticalCertificate {
            label: String::new(),
            samples: 0,
            seed: 0,
            member_distance: vec![],
            member_distance_half: vec![],
            family_distance: 0.0,
            family_distance_half: 0.0,
            zeta: 0.0,
            margins: vec![],
            family_margin: 0.0,
            pass: false,
        },
        pass: false,
    }
}

fn anchor_sets(s: &Sft) -> Vec<(Vec<usize>, Vec<bool>)> {
    let k = s.k();
    let subsets: Vec<Vec<usize>> = if k <= ANCHOR_SEARCH_ALPHABET {
        (1u32..1 << k).map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).collect()).collect()
    } else {
        let mut v: Vec<Vec<usize>> = (0..k).map(|a| vec![a]).collect();
        v.push((0..k).collect());
        v
    };
    subsets
        .into_iter()
        .filter_map(|f| {
            let last: Vec<bool> = (0..k).map(|l| f.iter().all(|&a| s.allowed(l, a))).collect();
            last.iter().any(|&b| b).then_some((f, last))
        })
        .collect()
}

/// Search `n ≤ n_max` for word sets meeting the entropy requirement and
/// certify the resulting pack.
pub fn build_multi_horseshoe(s: &Sft, measures: &[InvariantMeasure], opts: &HorseshoeOptions) -> Result<HorseshoePack> {
    if !s.is_irreducible() {
        return Err(Error::NotIrreducible("horseshoes need an irreducible SFT".into()));
    }
    if measures.is_empty() {
        return Err(Error::InvalidInput("at least one measure required".into()));
    }
    if !(opts.eta > 0.0 && opts.zeta > 0.0) {
        return Err(Error::InvalidInput("eta and zeta must be positive".into()));
    }
    for (i, mu) in measures.iter().enumerate() {
        if mu.sft() != s {
            return Err(Error::InvalidInput(format!("measure {i} lives on a different SFT")));
        }
        if !mu.is_ergodic() {
            return Err(Error::InvalidInput(format!("measure {i} is not ergodic")));
        }
    }
    if (s.k() as f64).powi(D_STAR_DEPTH as i32) >= u64::MAX as f64 {
        return Err(Error::InvalidInput("alphabet too large for word codes".into()));
    }
    let targets: Vec<Target> = measures.iter().map(|m| Target::new(&m.profile(D_STAR_DEPTH), s.k())).collect();
    let entropies: Vec<f64> = measures.iter().map(|m| m.entropy()).collect();
    let anchors = anchor_sets(s);
    let half = 0.5 * opts.zeta;
    let mut deficits = vec![f64::INFINITY; measures.len()];
    for n in 1..=opts.n_max {
        let mut cand: Vec<Vec<Vec<usize>>> = vec![Vec::new(); measures.len()];
        let mut buf: Vec<Vec<usize>> = Vec::with_capacity(CHUNK);
        let classify = |buf: &mut Vec<Vec<usize>>, cand: &mut Vec<Vec<Vec<usize>>>| {
            let hits: Vec<Vec<bool>> =
                buf.par_iter().map(|w| targets.iter().map(|t| t.cyclic_distance(w, half) < half).collect()).collect();
            for (w, h) in buf.drain(..).zip(hits) {
                for (i, &hit) in h.iter().enumerate() {
                    if hit {
                        cand[i].push(w.clone());
                    }
                }
            }
        };
        s.for_each_word(n, ENUMERATION_BUDGET, |w| {
            buf.push(w.to_vec());
            if buf.len() == CHUNK {
                classify(&mut buf, &mut cand);
            }
        })?;
        classify(&mut buf, &mut cand);

        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for (a, (first, last)) in anchors.iter().enumerate() {
            let scores: Vec<f64> = cand
                .iter()
                .zip(&entropies)
                .map(|(ws, h)| {
                    let c = ws.iter().filter(|w| first.contains(&w[0]) && last[w[n - 1]]).count();
                    if c < 2 {
                        f64::NEG_INFINITY
                    } else {
                        (c as f64).ln() / n as f64 - (h - 0.5 * opts.eta)
                    }
                })
                .collect();
            let worst = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.as_ref().map_or(true, |b| worst > b.0) {
                best = Some((worst, a, scores));
            }
        }
        let Some((worst, a, scores)) = best else {
            continue;
        };
        deficits = scores.iter().map(|s| -s).collect();
        if worst > 0.0 {
            let (first, last) = &anchors[a];
            let words = cand
                .into_iter()
                .map(|ws| ws.into_iter().filter(|w| first.contains(&w[0]) && last[w[n - 1]]).map(Word).collect())
                .collect();
            let mut pack = HorseshoePack {
                sft: s.clone(),
                measures: measures.to_vec(),
                entropies,
                eta: opts.eta,
                zeta: opts.zeta,
                n,
                first: first.clone(),
                last: (0..s.k()).filter(|&l| last[l]).collect(),
                words,
                certificate: placeholder_certificate(),
            };
            pack.certificate = certify_pack(&pack, opts.samples, opts.seed)?;
            return Ok(pack);
        }
    }
    Err(Error::DepthInsufficient { n: opts.n_max, deficits })
}

/// Recheck every condition of the pack; sampling is deterministic in
/// `seed`.
pub fn certify_pack(pack: &HorseshoePack, samples: usize, seed: u64) -> Result<Certificate> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let s = &pack.sft;
    let union = pack.theta_words();
    let in_anchor = |w: &Word| pack.first.contains(&w[0]) && pack.last.contains(&w[w.len() - 1]);
    let words_admissible = pack.words.iter().flatten().all(|w| w.len() == pack.n && s.is_admissible(w) && in_anchor(w));
    let lasts: HashSet<usize> = union.iter().map(|w| w[w.len() - 1]).collect();
    let firsts: HashSet<usize> = union.iter().map(|w| w[0]).collect();
    let concatenations_admissible = lasts.iter().all(|&l| firsts.iter().all(|&f| s.allowed(l, f)));
    let irreducible = pack
        .words
        .iter()
        .chain(std::iter::once(&union))
        .all(|g| !g.is_empty() && graph::is_strongly_connected(&first_symbol_transfer(s, g).1));
    let union_set: HashSet<&Word> = union.iter().collect();
    let nested = pack.words.iter().flatten().all(|w| union_set.contains(w));

    let entropy_of = |g: &[Word]| -> f64 {
        if g.is_empty() || !irreducible {
            return f64::NEG_INFINITY;
        }
        word_entropy(s, g).unwrap_or(f64::NEG_INFINITY)
    };
    let entropies: Vec<f64> = pack.words.iter().map(|g| entropy_of(g)).collect();
    let theta_entropy = entropy_of(&union);
    let ambient_entropy = s.topological_entropy(1e-13)?;
    let proper = theta_entropy < ambient_entropy - 1e-9;
    let word_counts: Vec<usize> = pack.words.iter().map(|g| g.len()).collect();
    let horseshoes = HorseshoeCondition {
        pass: words_admissible && concatenations_admissible && irreducible && nested && proper && word_counts.iter().all(|&c| c >= 2),
        words_admissible,
        concatenations_admissible,
        irreducible,
        nested,
        proper,
        word_counts,
        theta_words: union.len(),
    };
    let bounds: Vec<f64> = pack.entropies.iter().map(|h| h - pack.eta).collect();
    let margins: Vec<f64> = entropies.iter().zip(&bounds).map(|(e, b)| e - b).collect();
    let sup_h = pack.entropies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let theta_margin = theta_entropy - (sup_h - pack.eta);
    let entropy = EntropyCondition {
        pass: margins.iter().all(|m| *m > 0.0) && theta_margin > 0.0,
        entropies,
        bounds,
        margins,
        theta_entropy,
        theta_margin,
        ambient_entropy,
    };

    let targets: Vec<CylinderProfile> = pack.measures.iter().map(|m| m.profile(D_STAR_DEPTH)).collect();
    let distance = if pack.words.iter().any(|g| g.is_empty()) {
        let mut d = placeholder_certificate().distance;
        d.label = "statistical certificate".into();
        d.samples = samples;
        d.seed = seed;
        d.zeta = pack.zeta;
        d
    } else {
        let (members, theta) = draw_samples(pack, samples, seed);
        statistical_certificate(&targets, &members, &theta, samples, seed, pack.zeta)
    };
    Ok(Certificate { pass: horseshoes.pass && entropy.pass && distance.pass, horseshoes, entropy, distance })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub mixtures: usize,
    /// Largest cylinder discrepancy between `R(Σθμ)` and `Σ w R(μ)`.
    pub max_profile_gap: f64,
    /// Same for the flow entropies.
    pub max_entropy_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowCertificate {
    /// `h_top` of the suspension over `Λ_i`.
    pub entropies: Vec<f64>,
    /// Flow entropies `h_{μ_i}/∫ρ dμ_i`.
    pub measure_entropies: Vec<f64>,
    /// Entropy tolerance carried to the flow, `η/∫ρ dμ_i`.
    pub eta_flow: Vec<f64>,
    pub margins: Vec<f64>,
    pub theta_entropy: f64,
    pub theta_margin: f64,
    pub distance: StatisticalCertificate,
    pub identity: IdentityCheck,
    pub pass: bool,
}

/// Flow topological entropy of the suspension over the free concatenation
/// of `words`: the root of `λ(T(s)) = 1`, where `T(s)` moves between
/// prefix classes with weight `exp(−s·ρ̂)` and `ρ̂` is the roof summed along
/// a word.
pub fn flow_word_entropy(sys: &SuspensionSystem, words: &[Word]) -> Result<f64> {
    let s = sys.base();
    let roof = sys.roof();
    let n = words[0].len();
    let r = roof.memory().saturating_sub(1).max(1);
    if n < r {
        return Err(Error::InvalidInput(format!("word length {n} shorter than roof memory {}", roof.memory())));
    }
    let mut prefixes: Vec<&[usize]> = words.iter().map(|w| &w[..r]).collect();
    prefixes.sort_unstable();
    prefixes.dedup();
    let pos = |p: &[usize]| prefixes.binary_search(&p).expect("prefix listed");
    let mut transitions: Vec<(usize, usize, f64)> = Vec::new();
    for w in words {
        for (b, p) in prefixes.iter().enumerate() {
            if !s.allowed(w[n - 1], p[0]) {
                continue;
            }
            let mut ext = w.0.clone();
            ext.extend_from_slice(p);
            let rho: f64 = (0..n).map(|j| roof.at(&ext[j..])).sum();
            transitions.push((pos(&w[..r]), b, rho));
        }
    }
    let log_lambda = |sv: f64| -> Result<f64> {
        let mut t = Mat::zeros(prefixes.len());
        for &(a, b, rho) in &transitions {
            t[(a, b)] += (-sv * rho).exp();
        }
        Ok(perron_root(&t, 1e-15)?.ln())
    };
    let h0 = log_lambda(0.0)?;
    let rmin = transitions.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
    let rmax = transitions.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = (h0 / rmax, h0 / rmin);
    if h0 == 0.0 || hi - lo <= 1e-15 * hi.abs() {
        return Ok(lo);
    }
    let pad = 1e-12 * hi.abs();
    Ok(bisect(log_lambda, lo - pad, hi + pad, 1e-15, 300)?.x)
}

/// The certificate re-expressed for the suspension flow over the ambient
/// SFT: Abramov entropies, flow cylinder distances, and the reweighting
/// identity `R(Σθ_iμ_i) = Σ w_i R(μ_i)` with `w_i ∝ θ_i ∫ρ dμ_i`.
pub fn lift_pack_to_flow(sys: &SuspensionSystem, pack: &HorseshoePack, samples: usize, seed: u64) -> Result<FlowCertificate> {
    if sys.base() != &pack.sft {
        return Err(Error::InvalidInput("suspension base differs from the pack SFT".into()));
    }
    if sys.roof().memory() > D_STAR_DEPTH {
        return Err(Error::InvalidInput("roof memory exceeds the distance depth".into()));
    }
    if pack.words.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidInput("empty word set".into()));
    }
    let integrals: Vec<f64> = pack.measures.iter().map(|m| m.integrate(sys.roof())).collect();
    let entropies: Vec<f64> = pack.words.iter().map(|g| flow_word_entropy(sys, g)).collect::<Result<_>>()?;
    let measure_entropies: Vec<f64> = pack.entropies.iter().zip(&integrals).map(|(h, r)| h / r).collect();
    let eta_flow: Vec<f64> = integrals.iter().map(|r| pack.eta / r).collect();
    let margins: Vec<f64> =
        entropies.iter().zip(&measure_entropies).zip(&eta_flow).map(|((e, h), t)| e - h + t).collect();
    let theta_entropy = flow_word_entropy(sys, &pack.theta_words())?;
    let top = (0..measure_entropies.len()).max_by(|&a, &b| measure_entropies[a].total_cmp(&measure_entropies[b])).expect("measures");
    let theta_margin = theta_entropy - measure_entropies[top] + eta_flow[top];

    let targets: Vec<CylinderProfile> = pack.measures.iter().map(|m| sys.flow_profile(m, D_STAR_DEPTH)).collect();
    let (members, theta) = draw_samples(pack, samples, seed);
    let lift = |v: Vec<CylinderProfile>| -> Vec<CylinderProfile> { v.iter().map(|p| sys.flow_profile_from(p)).collect() };
    let members: Vec<Vec<CylinderProfile>> = members.into_iter().map(lift).collect();
    let theta = lift(theta);
    let distance = statistical_certificate(&targets, &members, &theta, samples, seed, pack.zeta);

    let mut rng = stream_rng(seed, u64::MAX);
    let mut max_profile_gap = 0.0f64;
    let mut max_entropy_gap = 0.0f64;
    for _ in 0..IDENTITY_MIXTURES {
        let raw: Vec<f64> = pack.measures.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let parts: Vec<(f64, &InvariantMeasure)> = raw.iter().map(|x| x / total).zip(&pack.measures).collect();
        let mix = InvariantMeasure::mixture(&parts)?;
        let w = sys.flow_weights(&parts);
        let lhs = sys.flow_profile(&mix, D_STAR_DEPTH);
        let rhs = combine(&targets.iter().collect::<Vec<_>>(), &w);
        max_profile_gap = max_profile_gap.max(lhs.level_gaps(&rhs).into_iter().fold(0.0, f64::max));
        let h_rhs: f64 = w.iter().zip(&measure_entropies).map(|(a, b)| a * b).sum();
        max_entropy_gap = max_entropy_gap.max((sys.abramov_entropy(&mix) - h_rhs).abs());
    }
    let identity = IdentityCheck {
        mixtures: IDENTITY_MIXTURES,
        max_profile_gap,
        max_entropy_gap,
        tolerance: IDENTITY_TOL,
        pass: max_profile_gap <= IDENTITY_TOL && max_entropy_gap <= IDENTITY_TOL,
    };
    Ok(FlowCertificate {
        pass: margins.iter().all(|m| *m > 0.0) && theta_margin > 0.0 && distance.pass && identity.pass,
        entropies,
        measure_entropies,
        eta_flow,
        margins,
        theta_entropy,
        theta_margin,
        distance,
        identity,
    })
}
