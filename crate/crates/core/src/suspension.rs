//! Suspension flows over SFTs with locally constant roofs.
//!
//! Flow quantities are computed through the base: entropies by Abramov's
//! formula and flow averages as ratios of base integrals.

use crate::error::{Error, Result};
use crate::function::LocallyConstantFunction;
use crate::linalg::PerronOptions;
use crate::measures::{CylinderProfile, InvariantMeasure, MarkovComponent};
use crate::roots::{solve_increasing, RootOptions};
use crate::sft::Sft;
use crate::thermo::EdgeModel;
use serde_json::Value;

#[derive(Clone, Debug)]
pub struct SuspensionSystem {
    base: Sft,
    roof: LocallyConstantFunction,
    roof_min: f64,
}

impl SuspensionSystem {
    pub fn new(base: Sft, roof: LocallyConstantFunction) -> Result<Self> {
        roof.check_domain(&base)?;
        let roof_min = roof.min();
        if !(roof_min > 0.0) {
            return Err(Error::InvalidInput(format!("roof must be strictly positive (min {roof_min})")));
        }
        Ok(SuspensionSystem { base, roof, roof_min })
    }

    pub fn base(&self) -> &Sft {
        &self.base
    }

    pub fn roof(&self) -> &LocallyConstantFunction {
        &self.roof
    }

    pub fn roof_min(&self) -> f64 {
        self.roof_min
    }

    pub fn roof_max(&self) -> f64 {
        self.roof.max()
    }

    /// `h_μ / ∫ρ dμ`
    pub fn abramov_entropy(&self, mu: &InvariantMeasure) -> f64 {
        mu.entropy() / mu.integrate(&self.roof)
    }

    /// `∫φ dμ / ∫ρ dμ`, the flow average of the observable whose induced
    /// base function is `phi`.
    pub fn flow_integral(&self, mu: &InvariantMeasure, phi: &LocallyConstantFunction) -> f64 {
        mu.integrate(phi) / mu.integrate(&self.roof)
    }

    pub fn lift(&self, mu: &InvariantMeasure) -> FlowMeasure {
        FlowMeasure { roof_integral: mu.integrate(&self.roof), base: mu.clone() }
    }

    /// Flow topological entropy: the root `s*` of `s ↦ P(−sρ)`.
    pub fn flow_top_entropy(&self, tol: f64) -> Result<FlowEntropy> {
        let model = EdgeModel::new(&self.base, self.roof.memory())?;
        let rho = model.edge_values(&self.roof)?;
        let opts = PerronOptions::with_tol((0.1 * tol).max(1e-14));
        let h = self.base.topological_entropy(opts.tol)?;
        let eval = |s: f64| -> Result<(f64, f64, crate::thermo::PressureResult)> {
            let v: Vec<f64> = rho.iter().map(|r| -s * r).collect();
            let p = model.pressure(&v, &opts)?;
            let mean = model.edge_mean(&p.q, &p.pi, &rho);
            Ok((p.value, mean, p))
        };
        let (lo, hi) = (h / self.roof_max(), h / self.roof_min);
        let s = if h == 0.0 {
            0.0
        } else if hi - lo <= f64::EPSILON * hi {
            lo
        } else {
            // P(−sρ) decreases with slope −∫ρ dμ_s
            let root = solve_increasing(
                |s| {
                    let (p, mean, _) = eval(s)?;
                    Ok((-p, Some(mean)))
                },
                lo,
                hi,
                RootOptions { f_tol: tol, ..Default::default() },
            )?;
            root.x
        };
        let (p, _, res) = eval(s)?;
        let equilibrium = model.component(res.q, res.pi)?;
        Ok(FlowEntropy { value: s, pressure_residual: p, equilibrium })
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::json!({ "base": self.base.to_json_value(), "roof": self.roof.to_json_value(self.base.k()) })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::InvalidInput("suspension must be a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "base" | "roof") {
                return Err(Error::InvalidInput(format!("unknown suspension field {key:?}")));
            }
        }
        let base = Sft::from_json_value(obj.get("base").ok_or_else(|| Error::InvalidInput("missing \"base\"".into()))?)?;
        let roof = LocallyConstantFunction::from_json_value(
            &base,
            obj.get("roof").ok_or_else(|| Error::InvalidInput("missing \"roof\"".into()))?,
        )?;
        Self::new(base, roof)
    }

    /// Flow-weighted cylinder profile: `μ[w]ρ(w)/∫ρ dμ` for words of length
    /// at least the roof memory.
    pub fn flow_profile(&self, mu: &InvariantMeasure, depth: usize) -> CylinderProfile {
        self.flow_profile_from(&mu.profile(depth))
    }

    /// [`Self::flow_profile`] from a base profile whose depth reaches the
    /// roof memory.
    pub fn flow_profile_from(&self, base: &CylinderProfile) -> CylinderProfile {
        let m = self.roof.memory();
        let total: f64 = base.level(m).iter().map(|(w, p)| p * self.roof.at(w)).sum();
        let levels = (1..=base.depth())
            .map(|n| {
                if n < m {
                    Default::default()
                } else {
                    base.level(n).iter().map(|(w, p)| (w.clone(), p * self.roof.at(w) / total)).collect()
                }
            })
            .collect();
        CylinderProfile::from_levels(levels)
    }

    /// Cylinder distance between the lifted measures.
    pub fn d_star_flow(&self, mu: &InvariantMeasure, nu: &InvariantMeasure, depth: usize) -> f64 {
        self.flow_profile(mu, depth).distance(&self.flow_profile(nu, depth))
    }

    /// Weights of `R(Σ θ_i μ_i)` as a combination of the `R(μ_i)`.
    pub fn flow_weights(&self, parts: &[(f64, &InvariantMeasure)]) -> Vec<f64> {
        let raw: Vec<f64> = parts.iter().map(|(t, mu)| t * mu.integrate(&self.roof)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|r| r / total).collect()
    }
}

/// A base measure together with its roof integral.
#[derive(Clone, Debug)]
pub struct FlowMeasure {
    pub base: InvariantMeasure,
    pub roof_integral: f64,
}

#[derive(Clone, Debug)]
pub struct FlowEntropy {
    pub value: f64,
    /// `P(−s*ρ)` at the returned root.
    pub pressure_residual: f64,
    /// Equilibrium measure of `−s*ρ`, a measure of maximal flow entropy.
    pub equilibrium: MarkovComponent,
}
