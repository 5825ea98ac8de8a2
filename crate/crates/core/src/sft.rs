//! Subshifts of finite type.

use crate::error::{Error, Result};
use crate::graph;
use crate::linalg::{perron_root, Mat};
use serde::{Deserialize, Serialize};
use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

/// Default cap on the number of words any enumeration may produce.
pub const ENUMERATION_BUDGET: u128 = 1 << 24;

/// A finite word over the alphabet `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(symbols: Vec<usize>) -> Self {
        Word(symbols)
    }

    /// Parse `"0101"` (single digits) or `"10,3,2"` (comma separated).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("cannot parse word {s:?}"));
        if s.is_empty() {
            return Err(bad());
        }
        let symbols: Option<Vec<usize>> = if s.contains(',') {
            s.split(',').map(|t| t.trim().parse().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect()
        };
        symbols.map(Word).ok_or_else(bad)
    }

    /// Key form used in JSON tables: digits concatenated when `k <= 10`.
    pub fn key(&self, k: usize) -> String {
        if k <= 10 {
            self.0.iter().map(|d| char::from(b'0' + *d as u8)).collect()
        } else {
            self.0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

impl Deref for Word {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl Borrow<[usize]> for Word {
    fn borrow(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl From<&[usize]> for Word {
    fn from(v: &[usize]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = if self.0.iter().all(|&d| d < 10) { 10 } else { usize::MAX };
        f.write_str(&self.key(k))
    }
}

/// A two-sided subshift of finite type on `0..k`, trimmed so that every
/// symbol has a successor and a predecessor.
#[derive(Clone, Debug)]
pub struct Sft {
    k: usize,
    a: Vec<u8>,
    irreducible: bool,
    aperiodic: bool,
    // original index of each surviving symbol
    labels: Vec<usize>,
    removed: Vec<usize>,
}

impl PartialEq for Sft {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.a == other.a
    }
}

#[derive(Serialize, Deserialize)]
struct SftJson {
    k: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<i64>>,
}

impl Sft {
    /// Build an SFT from a 0/1 matrix, iteratively removing stranded
    /// symbols.
    pub fn validate_and_trim(rows: &[Vec<u8>]) -> Result<Sft> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DegenerateSft);
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("transition matrix must be square".into()));
        }
        if rows.iter().flatten().any(|&v| v > 1) {
            return Err(Error::InvalidInput("transition matrix entries must be 0 or 1".into()));
        }
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for i in 0..n {
                if !alive[i] {
                    continue;
                }
                let has_succ = (0..n).any(|j| alive[j] && rows[i][j] == 1);
                let has_pred = (0..n).any(|j| alive[j] && rows[j][i] == 1);
                if !has_succ || !has_pred {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let labels: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        let removed: Vec<usize> = (0..n).filter(|&i| !alive[i]).collect();
        if labels.is_empty() {
            return Err(Error::DegenerateSft);
        }
        let k = labels.len();
        let mut a = vec![0u8; k * k];
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                a[i * k + j] = rows[li][lj];
            }
        }
        Ok(Sft::assemble(k, a, labels, removed))
    }

    fn assemble(k: usize, a: Vec<u8>, labels: Vec<usize>, removed: Vec<usize>) -> Sft {
        let mut s = Sft { k, a, irreducible: false, aperiodic: false, labels, removed };
        let adj = s.adjacency();
        s.irreducible = graph::is_strongly_connected(&adj);
        s.aperiodic = s.irreducible && graph::period(&adj) == 1;
        s
    }

    pub fn full_shift(k: usize) -> Sft {
        Sft::validate_and_trim(&vec![vec![1u8; k]; k]).expect("full shift is valid")
    }

    /// The shift on `{0,1}` forbidding the word `11`.
    pub fn golden_mean() -> Sft {
        Sft::validate_and_trim(&[vec![1, 1], vec![1, 0]]).expect("golden mean is valid")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn allowed(&self, i: usize, j: usize) -> bool {
        self.a[i * self.k + j] == 1
    }

    pub fn matrix(&self) -> Vec<Vec<u8>> {
        self.a.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    pub fn matrix_f64(&self) -> Mat {
        let rows: Vec<Vec<f64>> = self.a.chunks(self.k).map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        Mat::from_rows(&rows).expect("square")
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(move |&j| self.allowed(i, j))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.k).map(|i| self.successors(i).collect()).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.a.iter().filter(|&&v| v == 1).count()
    }

    /// Original indices of the surviving symbols.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Original indices of symbols removed by trimming.
    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn is_aperiodic(&self) -> bool {
        self.aperiodic
    }

    pub fn is_admissible(&self, w: &[usize]) -> bool {
        w.iter().all(|&s| s < self.k) && w.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    /// Admissible and cyclically closable: the periodic point `w^∞` exists.
    pub fn is_closable(&self, w: &[usize]) -> bool {
        !w.is_empty() && self.is_admissible(w) && self.allowed(w[w.len() - 1], w[0])
    }

    /// `log λ(A)`; the SFT must be irreducible.
    pub fn topological_entropy(&self, tol: f64) -> Result<f64> {
        if !self.irreducible {
            return Err(Error::NotIrreducible(
                "topological entropy requested on a reducible SFT; restrict to an SCC first".into(),
            ));
        }
        Ok(perron_root(&self.matrix_f64(), tol)?.ln())
    }

    /// Number of admissible `n`-words (sum of entries of `A^{n-1}`),
    /// saturating.
    pub fn word_count(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let mut v = vec![1u128; self.k];
        for _ in 1..n {
            let mut next = vec![0u128; self.k];
            for (i, slot) in next.iter_mut().enumerate() {
                for j in self.successors(i) {
                    *slot = slot.saturating_add(v[j]);
                }
            }
            v = next;
        }
        v.iter().fold(0u128, |a, b| a.saturating_add(*b))
    }

    fn check_budget(&self, n: usize, budget: u128) -> Result<()> {
        let count = self.word_count(n);
        if count > budget {
            return Err(Error::EnumerationTooLarge { count, budget });
        }
        Ok(())
    }

    /// Visit every admissible `n`-word in lexicographic order.
    pub fn for_each_word<F: FnMut(&[usize])>(&self, n: usize, budget: u128, mut f: F) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidInput("word length must be at least 1".into()));
        }
        self.check_budget(n, budget)?;
        let adj = self.adjacency();
        let mut w = Vec::with_capacity(n);
        // stack of next-successor positions
        let mut pos: Vec<usize> = Vec::with_capacity(n);
        for s in 0..self.k {
            w.clear();
            w.push(s);
            pos.clear();
            pos.push(0);
            while let Some(p) = pos.last_mut() {
                if w.len() == n {
                    f(&w);
                    w.pop();
                    pos.pop();
                    continue;
                }
                let last = w[w.len() - 1];
                if *p < adj[last].len() {
                    let nx = adj[last][*p];
                    *p += 1;
                    w.push(nx);
                    pos.push(0);
                } else {
                    w.pop();
                    pos.pop();
                }
            }
        }
        Ok(())
    }

    pub fn admissible_words(&self, n: usize) -> Result<Vec<Word>> {
        self.admissible_words_with_budget(n, ENUMERATION_BUDGET)
    }

    pub fn admissible_words_with_budget(&self, n: usize, budget: u128) -> Result<Vec<Word>> {
        let mut out = Vec::new();
        self.for_each_word(n, budget, |w| out.push(Word(w.to_vec())))?;
        Ok(out)
    }

    /// Recode to the `m`-block alphabet.
    pub fn block_recode(&self, m: usize) -> Result<BlockCode> {
        if m == 0 {
            return Err(Error::InvalidInput("memory must be at least 1".into()));
        }
        let words = self.admissible_words(m)?;
        let index: HashMap<Word, usize> = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let n = words.len();
        let mut a = vec![0u8; n * n];
        for (i, w) in words.iter().enumerate() {
            let last = w[m - 1];
            for s in self.successors(last) {
                let mut nxt = w[1..].to_vec();
                nxt.push(s);
                let j = index[nxt.as_slice()];
                a[i * n + j] = 1;
            }
        }
        let sft = Sft::assemble(n, a, (0..n).collect(), Vec::new());
        Ok(BlockCode { memory: m, words, index, sft })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({ "k": self.k, "A": self.matrix() })
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Sft> {
        let raw: SftJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("SFT JSON: {e}")))?;
        if raw.a.len() != raw.k {
            return Err(Error::InvalidInput(format!("k = {} but A has {} rows", raw.k, raw.a.len())));
        }
        let mut rows = Vec::with_capacity(raw.k);
        for r in &raw.a {
            if r.len() != raw.k {
                return Err(Error::InvalidInput("transition matrix must be square".into()));
            }
            let mut row = Vec::with_capacity(raw.k);
            for &v in r {
                match v {
                    0 | 1 => row.push(v as u8),
                    _ => return Err(Error::InvalidInput(format!("transition entry {v} is not 0 or 1"))),
                }
            }
            rows.push(row);
        }
        Sft::validate_and_trim(&rows)
    }
}

/// An `m`-block recoding: the symbols of `sft` are the admissible `m`-words
/// of the source shift.
#[derive(Clone, Debug)]
pub struct BlockCode {
    pub memory: usize,
    pub words: Vec<Word>,
    pub index: HashMap<Word, usize>,
    pub sft: Sft,
}

impl BlockCode {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn symbol(&self, w: &[usize]) -> Option<usize> {
        self.index.get(w).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_shift_untouched() {
        let s = Sft::validate_and_trim(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(s.k(), 2);
        assert!(s.removed().is_empty());
    }

    #[test]
    fn trimming_reaches_fixpoint() {
        let s = Sft::validate_and_trim(&[vec![1, 1], vec![0, 0]]).unwrap();
        assert_eq!(s.k(), 1);
        assert_eq!(s.removed(), &[1]);
        assert_eq!(s.matrix(), vec![vec![1]]);
        assert_abs_diff_eq!(s.topological_entropy(1e-12).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_is_rejected() {
        assert_eq!(Sft::validate_and_trim(&[vec![0]]), Err(Error::DegenerateSft));
        assert!(Sft::validate_and_trim(&[vec![2]]).is_err());
    }

    #[test]
    fn irreducibility() {
        assert!(Sft::full_shift(2).is_irreducible());
        assert!(Sft::golden_mean().is_irreducible());
        let s = Sft::validate_and_trim(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(!s.is_irreducible());
        assert!(s.topological_entropy(1e-12).is_err());
    }

    #[test]
    fn entropies() {
        assert_abs_diff_eq!(Sft::full_shift(2).topological_entropy(1e-12).unwrap(), 2f64.ln(), epsilon = 1e-12);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(Sft::golden_mean().topological_entropy(1e-12).unwrap(), phi.ln(), epsilon = 1e-12);
    }

    #[test]
    fn word_lists() {
        let words = Sft::full_shift(2).admissible_words(2).unwrap();
        let shown: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, ["00", "01", "10", "11"]);
        let g = Sft::golden_mean();
        let shown: Vec<String> = g.admissible_words(3).unwrap().iter().map(|w| w.to_string()).collect();
        assert_eq!(shown, ["000", "001", "010", "100", "101"]);
        assert_eq!(g.admissible_words(2).unwrap().len(), 3);
    }

    #[test]
    fn budget_is_enforced() {
        let s = Sft::full_shift(2);
        assert!(matches!(s.admissible_words(25), Err(Error::EnumerationTooLarge { .. })));
        assert_eq!(s.word_count(25), 1 << 25);
    }

    #[test]
    fn recoding() {
        let bc = Sft::full_shift(2).block_recode(2).unwrap();
        assert_eq!(bc.sft.k(), 4);
        assert_eq!(bc.sft.edge_count(), 8);
        assert_abs_diff_eq!(bc.sft.topological_entropy(1e-12).unwrap(), 2f64.ln(), epsilon = 1e-11);
        let g = Sft::golden_mean();
        let id = g.block_recode(1).unwrap();
        assert_eq!(id.sft, g);
        let g2 = g.block_recode(2).unwrap();
        assert_eq!(g2.sft.k(), 3);
        assert!(g2.sft.is_aperiodic());
    }

    #[test]
    fn json_round_trip() {
        let g = Sft::golden_mean();
        let back = Sft::from_json_value(&g.to_json_value()).unwrap();
        assert_eq!(back, g);
        assert!(Sft::from_json_value(&serde_json::json!({"k": 2, "A": [[1, 3], [1, 1]]})).is_err());
        assert!(Sft::from_json_value(&serde_json::json!({"k": 3, "A": [[1, 1], [1, 1]]})).is_err());
    }

    #[test]
    fn word_parsing() {
        assert_eq!(Word::parse("0110").unwrap().0, vec![0, 1, 1, 0]);
        assert_eq!(Word::parse("10,2").unwrap().0, vec![10, 2]);
        assert!(Word::parse("0x").is_err());
        assert_eq!(Word(vec![10, 2]).key(11), "10,2");
    }
}
