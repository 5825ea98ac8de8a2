//! Locally constant functions: real tables on admissible `m`-words.

use crate::error::{Error, Result};
use crate::sft::{Sft, Word};
use serde_json::{Map, Value};
use std::collections::BTreeMap;

/// `g(x) = table(x_0 … x_{m-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocallyConstantFunction {
    memory: usize,
    table: BTreeMap<Word, f64>,
}

impl LocallyConstantFunction {
    /// Tabulate `f` on every admissible `m`-word of `s`.
    pub fn from_fn<F: FnMut(&[usize]) -> f64>(s: &Sft, memory: usize, mut f: F) -> Result<Self> {
        if memory == 0 {
            return Err(Error::InvalidInput("memory must be at least 1".into()));
        }
        let mut table = BTreeMap::new();
        s.for_each_word(memory, crate::sft::ENUMERATION_BUDGET, |w| {
            table.insert(Word(w.to_vec()), f(w));
        })?;
        let out = LocallyConstantFunction { memory, table };
        out.check_finite()?;
        Ok(out)
    }

    /// Build from an explicit table, which must cover exactly the
    /// admissible `m`-words (or all of them via `default`).
    pub fn from_table(s: &Sft, memory: usize, entries: BTreeMap<Word, f64>, default: Option<f64>) -> Result<Self> {
        for w in entries.keys() {
            if w.len() != memory {
                return Err(Error::InvalidInput(format!("table key {w} has length {} != memory {memory}", w.len())));
            }
            if !s.is_admissible(w) {
                return Err(Error::InadmissibleWord(w.0.clone()));
            }
        }
        let mut missing = None;
        let out = Self::from_fn(s, memory, |w| match entries.get(w) {
            Some(v) => *v,
            None => match default {
                Some(d) => d,
                None => {
                    missing.get_or_insert_with(|| Word(w.to_vec()));
                    f64::NAN
                }
            },
        });
        if let Some(w) = missing {
            return Err(Error::InvalidInput(format!("table has no value for admissible word {w}")));
        }
        out
    }

    pub fn constant(s: &Sft, c: f64) -> Result<Self> {
        Self::from_fn(s, 1, |_| c)
    }

    /// Indicator of the 1-cylinder `[a]`.
    pub fn symbol_indicator(s: &Sft, a: usize) -> Result<Self> {
        Self::from_fn(s, 1, |w| if w[0] == a { 1.0 } else { 0.0 })
    }

    /// Indicator of the cylinder `[w]`.
    pub fn word_indicator(s: &Sft, w: &[usize]) -> Result<Self> {
        Self::from_fn(s, w.len().max(1), |x| if x == w { 1.0 } else { 0.0 })
    }

    /// `[v0, v1, …]` as a memory-1 function.
    pub fn from_symbol_values(s: &Sft, values: &[f64]) -> Result<Self> {
        if values.len() != s.k() {
            return Err(Error::InvalidInput(format!("expected {} symbol values, got {}", s.k(), values.len())));
        }
        Self::from_fn(s, 1, |w| values[w[0]])
    }

    fn check_finite(&self) -> Result<()> {
        match self.table.iter().find(|(_, v)| !v.is_finite()) {
            Some((w, v)) => Err(Error::InvalidInput(format!("non-finite value {v} at word {w}"))),
            None => Ok(()),
        }
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn table(&self) -> &BTreeMap<Word, f64> {
        &self.table
    }

    /// Value on any word of length at least `memory` (only the first
    /// `memory` symbols are read).
    pub fn eval(&self, w: &[usize]) -> Option<f64> {
        w.get(..self.memory).and_then(|p| self.table.get(p)).copied()
    }

    /// Value at the point `x` given through its first `memory` symbols;
    /// panics on inadmissible input.
    pub fn at(&self, w: &[usize]) -> f64 {
        self.eval(w).unwrap_or_else(|| panic!("no table entry for {:?}", w))
    }

    /// The same function, read with a longer memory.
    pub fn lift(&self, s: &Sft, memory: usize) -> Result<Self> {
        if memory < self.memory {
            return Err(Error::MemoryMismatch(format!("cannot lower memory {} to {memory}", self.memory)));
        }
        Self::from_fn(s, memory, |w| self.at(w))
    }

    fn combine(&self, s: &Sft, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let m = self.memory.max(other.memory);
        Self::from_fn(s, m, |w| f(self.at(w), other.at(w)))
    }

    pub fn add(&self, s: &Sft, other: &Self) -> Result<Self> {
        self.combine(s, other, |a, b| a + b)
    }

    /// `a·self + b·other`.
    pub fn linear(&self, s: &Sft, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.combine(s, other, |x, y| a * x + b * y)
    }

    pub fn scale(&self, c: f64) -> Self {
        LocallyConstantFunction { memory: self.memory, table: self.table.iter().map(|(w, v)| (w.clone(), c * v)).collect() }
    }

    pub fn shift(&self, c: f64) -> Self {
        LocallyConstantFunction { memory: self.memory, table: self.table.iter().map(|(w, v)| (w.clone(), v + c)).collect() }
    }

    pub fn min(&self) -> f64 {
        self.table.values().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.table.values().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks that the table covers exactly the admissible `m`-words of `s`.
    pub fn check_domain(&self, s: &Sft) -> Result<()> {
        let count = s.word_count(self.memory);
        if count != self.table.len() as u128 || self.table.keys().any(|w| !s.is_admissible(w)) {
            return Err(Error::InvalidInput(format!(
                "function table does not match the admissible {}-words of the SFT",
                self.memory
            )));
        }
        Ok(())
    }

    pub fn to_json_value(&self, k: usize) -> Value {
        let mut table = Map::new();
        for (w, v) in &self.table {
            table.insert(w.key(k), Value::from(*v));
        }
        serde_json::json!({ "memory": self.memory, "table": table })
    }

    /// Parse `{"memory": m, "table": {"01": v, …}, "default": d?}`; a bare
    /// array of numbers is read as a memory-1 function.
    pub fn from_json_value(s: &Sft, v: &Value) -> Result<Self> {
        if let Some(arr) = v.as_array() {
            let values: Option<Vec<f64>> = arr.iter().map(|x| x.as_f64()).collect();
            let values = values.ok_or_else(|| Error::InvalidInput("symbol values must be numbers".into()))?;
            return Self::from_symbol_values(s, &values);
        }
        let obj = v.as_object().ok_or_else(|| Error::InvalidInput("function must be a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "memory" | "table" | "default") {
                return Err(Error::InvalidInput(format!("unknown function field {key:?}")));
            }
        }
        let memory = obj
            .get("memory")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidInput("function needs an integer \"memory\"".into()))? as usize;
        let default = match obj.get("default") {
            None | Some(Value::Null) => None,
            Some(d) => Some(d.as_f64().ok_or_else(|| Error::InvalidInput("\"default\" must be a number".into()))?),
        };
        let mut entries = BTreeMap::new();
        if let Some(t) = obj.get("table") {
            let t = t.as_object().ok_or_else(|| Error::InvalidInput("\"table\" must be an object".into()))?;
            for (key, val) in t {
                let w = Word::parse(key)?;
                let x = val.as_f64().ok_or_else(|| Error::InvalidInput(format!("value for {key} is not a number")))?;
                entries.insert(w, x);
            }
        }
        Self::from_table(s, memory, entries, default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_cover_admissible_words() {
        let g = Sft::golden_mean();
        let f = LocallyConstantFunction::word_indicator(&g, &[0, 1]).unwrap();
        assert_eq!(f.table().len(), 3);
        assert_eq!(f.at(&[0, 1, 0]), 1.0);
        assert_eq!(f.at(&[1, 0]), 0.0);
        assert!(f.check_domain(&g).is_ok());
        assert!(f.check_domain(&Sft::full_shift(2)).is_err());
    }

    #[test]
    fn lift_and_combine() {
        let s = Sft::full_shift(2);
        let a = LocallyConstantFunction::symbol_indicator(&s, 1).unwrap();
        let b = LocallyConstantFunction::word_indicator(&s, &[1, 1]).unwrap();
        let c = a.linear(&s, 2.0, &b, -1.0).unwrap();
        assert_eq!(c.memory(), 2);
        assert_eq!(c.at(&[1, 1]), 1.0);
        assert_eq!(c.at(&[1, 0]), 2.0);
        assert_eq!(c.max(), 2.0);
        assert!(b.lift(&s, 1).is_err());
    }

    #[test]
    fn json_forms() {
        let g = Sft::golden_mean();
        let v = serde_json::json!({"memory": 2, "table": {"01": 1.5}, "default": 0.0});
        let f = LocallyConstantFunction::from_json_value(&g, &v).unwrap();
        assert_eq!(f.at(&[0, 1]), 1.5);
        assert_eq!(f.at(&[1, 0]), 0.0);
        let back = LocallyConstantFunction::from_json_value(&g, &f.to_json_value(2)).unwrap();
        assert_eq!(back, f);
        let bad = serde_json::json!({"memory": 2, "table": {"11": 1.0}});
        assert!(LocallyConstantFunction::from_json_value(&g, &bad).is_err());
        let partial = serde_json::json!({"memory": 1, "table": {"0": 1.0}});
        assert!(LocallyConstantFunction::from_json_value(&g, &partial).is_err());
        let arr = serde_json::json!([1.0, 2.0]);
        assert_eq!(LocallyConstantFunction::from_json_value(&g, &arr).unwrap().at(&[1]), 2.0);
    }
}
