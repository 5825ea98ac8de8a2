//! Topological pressure and equilibrium measures of locally constant
//! potentials.

use crate::error::{Error, Result};
use crate::function::LocallyConstantFunction;
use crate::linalg::{perron, Mat, PerronOptions};
use crate::measures::{InvariantMeasure, MarkovComponent};
use crate::sft::{BlockCode, Sft};

/// The edge graph of an `s`-block recoding. Potentials of memory up to
/// `s + 1` become functions of edges, and pressure becomes `log λ` of the
/// weighted adjacency matrix.
#[derive(Clone, Debug)]
pub struct EdgeModel {
    sft: Sft,
    code: BlockCode,
    /// recoded transitions `(from, to)`
    edges: Vec<(usize, usize)>,
}

impl EdgeModel {
    /// Edge model able to carry potentials of memory `≤ memory`.
    pub fn new(sft: &Sft, memory: usize) -> Result<Self> {
        if !sft.is_irreducible() {
            return Err(Error::NotIrreducible("pressure needs an irreducible SFT".into()));
        }
        let s = memory.saturating_sub(1).max(1);
        let code = sft.block_recode(s)?;
        let mut edges = Vec::new();
        for i in 0..code.len() {
            for j in code.sft.successors(i) {
                edges.push((i, j));
            }
        }
        Ok(EdgeModel { sft: sft.clone(), code, edges })
    }

    /// Smallest edge model carrying all of `fs`.
    pub fn for_functions(sft: &Sft, fs: &[&LocallyConstantFunction]) -> Result<Self> {
        let m = fs.iter().map(|f| f.memory()).max().unwrap_or(1);
        Self::new(sft, m)
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn code(&self) -> &BlockCode {
        &self.code
    }

    pub fn state_memory(&self) -> usize {
        self.code.memory
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_states(&self) -> usize {
        self.code.len()
    }

    /// The `(s+1)`-word carried by edge `e`.
    pub fn edge_word(&self, e: usize) -> Vec<usize> {
        let (i, j) = self.edges[e];
        let mut w = self.code.words[i].0.clone();
        w.push(*self.code.words[j].last().expect("nonempty"));
        w
    }

    /// Values of `g` on every edge.
    pub fn edge_values(&self, g: &LocallyConstantFunction) -> Result<Vec<f64>> {
        if g.memory() > self.code.memory + 1 {
            return Err(Error::MemoryMismatch(format!(
                "potential memory {} exceeds edge model memory {}",
                g.memory(),
                self.code.memory + 1
            )));
        }
        (0..self.edges.len())
            .map(|e| {
                let w = self.edge_word(e);
                g.eval(&w).ok_or_else(|| Error::InadmissibleWord(w))
            })
            .collect()
    }

    /// Pressure of the edge potential `values`.
    pub fn pressure(&self, values: &[f64], opts: &PerronOptions) -> Result<PressureResult> {
        if values.len() != self.edges.len() {
            return Err(Error::InvalidInput("edge value vector has the wrong length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("potential must be finite".into()));
        }
        let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let n = self.num_states();
        let mut b = Mat::zeros(n);
        for (&(i, j), v) in self.edges.iter().zip(values) {
            b[(i, j)] = (v - top).exp();
        }
        let p = perron(&b, opts)?;
        let mut q = Mat::zeros(n);
        for &(i, j) in &self.edges {
            q[(i, j)] = b[(i, j)] * p.right[j] / (p.value * p.right[i]);
        }
        for i in 0..n {
            let s: f64 = q.row(i).iter().sum();
            q.row_mut(i).iter_mut().for_each(|v| *v /= s);
        }
        let mut pi: Vec<f64> = p.left.iter().zip(&p.right).map(|(l, r)| l * r).collect();
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= s);
        Ok(PressureResult {
            value: p.value.ln() + top,
            lambda: p.value,
            offset: top,
            left: p.left,
            right: p.right,
            bracket: (p.bracket.0.ln() + top, p.bracket.1.ln() + top),
            q,
            pi,
        })
    }

    /// `Σ π(i) Q(i,j) v(e)` for the chain `(q, pi)` on this edge model.
    pub fn edge_mean(&self, q: &Mat, pi: &[f64], values: &[f64]) -> f64 {
        self.edges.iter().zip(values).map(|(&(i, j), v)| pi[i] * q[(i, j)] * v).sum()
    }

    /// Build a validated component from a chain on this model's states.
    pub fn component(&self, q: Mat, pi: Vec<f64>) -> Result<MarkovComponent> {
        MarkovComponent::from_code(&self.sft, &self.code, q, pi)
    }
}

/// Pressure `P = log λ` with the Perron data and the equilibrium chain.
#[derive(Clone, Debug)]
pub struct PressureResult {
    pub value: f64,
    /// Perron root of the shifted matrix `B·e^{-offset}`.
    pub lambda: f64,
    pub offset: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Bracket on `P` from the Collatz–Wielandt bounds.
    pub bracket: (f64, f64),
    pub q: Mat,
    pub pi: Vec<f64>,
}

impl PressureResult {
    /// Entropy of the equilibrium chain.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (i, p) in self.pi.iter().enumerate() {
            if *p > 0.0 {
                h += p * self.q.row(i).iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum::<f64>();
            }
        }
        h.max(0.0)
    }
}

/// Pressure of `g` together with its equilibrium measure.
#[derive(Clone, Debug)]
pub struct Pressure {
    pub value: f64,
    pub equilibrium: MarkovComponent,
    pub lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

pub fn pressure(s: &Sft, g: &LocallyConstantFunction, tol: f64) -> Result<Pressure> {
    pressure_with(s, g, &PerronOptions::with_tol(tol))
}

/// [`pressure`] with explicit Perron options (start vector, iteration cap).
pub fn pressure_with(s: &Sft, g: &LocallyConstantFunction, opts: &PerronOptions) -> Result<Pressure> {
    let model = EdgeModel::new(s, g.memory())?;
    let vals = model.edge_values(g)?;
    let r = model.pressure(&vals, opts)?;
    let equilibrium = model.component(r.q, r.pi)?;
    Ok(Pressure { value: r.value, equilibrium, lambda: r.lambda * r.offset.exp(), left: r.left, right: r.right })
}

/// `P(g) − (h_μ + ∫g dμ)`; nonnegative by the variational principle.
pub fn verify_equilibrium(s: &Sft, g: &LocallyConstantFunction, mu: &InvariantMeasure, tol: f64) -> Result<f64> {
    let p = pressure(s, g, tol)?;
    Ok(p.value - (mu.entropy() + mu.integrate(g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_and_constant_potentials() {
        let g = Sft::golden_mean();
        let h = g.topological_entropy(1e-13).unwrap();
        let zero = LocallyConstantFunction::constant(&g, 0.0).unwrap();
        assert_abs_diff_eq!(pressure(&g, &zero, 1e-13).unwrap().value, h, epsilon = 1e-12);
        let c = LocallyConstantFunction::constant(&g, 1.7).unwrap();
        assert_abs_diff_eq!(pressure(&g, &c, 1e-13).unwrap().value, h + 1.7, epsilon = 1e-12);
    }

    #[test]
    fn bernoulli_equilibrium() {
        let s = Sft::full_shift(2);
        for beta in [-3.0, -0.5, 0.0, 1.2, 4.0f64] {
            let g = LocallyConstantFunction::symbol_indicator(&s, 1).unwrap().scale(beta);
            let p = pressure(&s, &g, 1e-13).unwrap();
            assert_abs_diff_eq!(p.value, (1.0 + beta.exp()).ln(), epsilon = 1e-12);
            let prob = beta.exp() / (1.0 + beta.exp());
            assert_abs_diff_eq!(p.equilibrium.cylinder_prob(&[1]), prob, epsilon = 1e-12);
            assert_abs_diff_eq!(p.equilibrium.cylinder_prob(&[1, 0, 1]), prob * prob * (1.0 - prob), epsilon = 1e-12);
        }
    }

    #[test]
    fn gaps() {
        let g = Sft::golden_mean();
        let zero = LocallyConstantFunction::constant(&g, 0.0).unwrap();
        let parry = InvariantMeasure::parry(&g).unwrap();
        assert!(verify_equilibrium(&g, &zero, &parry, 1e-13).unwrap().abs() <= 1e-9);
        let s = Sft::full_shift(2);
        let zero = LocallyConstantFunction::constant(&s, 0.0).unwrap();
        let fixed = InvariantMeasure::periodic_orbit(&s, &[0]).unwrap();
        assert_abs_diff_eq!(verify_equilibrium(&s, &zero, &fixed, 1e-13).unwrap(), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn long_memory_potential() {
        let s = Sft::full_shift(2);
        let g = LocallyConstantFunction::word_indicator(&s, &[0, 1, 1]).unwrap().scale(0.8);
        let p = pressure(&s, &g, 1e-13).unwrap();
        assert_eq!(p.equilibrium.memory(), 2);
        let mu: InvariantMeasure = p.equilibrium.clone().into();
        assert_abs_diff_eq!(mu.entropy() + mu.integrate(&g), p.value, epsilon = 1e-10);
    }
}
