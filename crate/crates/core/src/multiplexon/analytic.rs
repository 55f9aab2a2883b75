use crate::error::{Error, Result};
use crate::models::{dynamic_cumulative, DynamicParams};
use crate::multiplex::{check_layer_count, Mode};
use crate::multiplexon::{moebius, Multiplexon, StepMultiplexon, DEFAULT_TOLERANCE};
use crate::subset::Subset;

/// Builtin closed-form multiplexons, all expressed cumulatively.
#[derive(Clone, Debug, PartialEq)]
pub enum AnalyticMultiplexon {
    /// Constant layers `W̄_S ≡ values[S]`, indexed by bitmask (`values[0] = 1`).
    Constant { r: usize, values: Vec<f64> },
    /// Two layers `1{x+y ≤ a}`, `1{x+y ≤ b}`, intersection `1{x+y ≤ min(a,b)}`.
    Threshold { a: f64, b: f64 },
    /// Two-layer uniform-attachment limit.
    UniformAttachment,
    /// A cumulative step multiplexon, e.g. the block-constant limit of a correlated
    /// stochastic block model.
    Step(StepMultiplexon),
    /// Constant limit of a Markov edge process over `T + 1` snapshots.
    Dynamic { params: DynamicParams, values: Vec<f64> },
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} outside [0,1]")))
    }
}

/// `1 - m (1 - ln m)`, continuously extended by 1 at `m = 0`.
pub(crate) fn ua_double(m: f64) -> f64 {
    if m <= 0.0 {
        1.0
    } else {
        1.0 - m * (1.0 - m.ln())
    }
}

impl AnalyticMultiplexon {
    /// Constant multiplexon from the cumulative values of the nonempty subsets,
    /// listed in bitmask order `{1}, {2}, {1,2}, {3}, ...`.
    pub fn constant(r: usize, cumulative: &[f64]) -> Result<Self> {
        check_layer_count(r)?;
        if cumulative.len() != (1 << r) - 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} cumulative values, got {}",
                (1 << r) - 1,
                cumulative.len()
            )));
        }
        let mut values = Vec::with_capacity(1 << r);
        values.push(1.0);
        values.extend_from_slice(cumulative);
        StepMultiplexon::constant(r, Mode::Cumulative, &values)?;
        Ok(AnalyticMultiplexon::Constant { r, values })
    }

    /// Constant multiplexon from disjoint probabilities of the nonempty subsets;
    /// the empty set receives the remaining mass.
    pub fn constant_disjoint(r: usize, disjoint: &[f64]) -> Result<Self> {
        check_layer_count(r)?;
        if disjoint.len() != (1 << r) - 1 {
            return Err(Error::InvalidParameter(format!("expected {} disjoint values", (1 << r) - 1)));
        }
        if disjoint.iter().any(|&p| p < 0.0) || disjoint.iter().sum::<f64>() > 1.0 + DEFAULT_TOLERANCE {
            return Err(Error::NotDecomposable("disjoint probabilities must be nonnegative and sum to at most 1".into()));
        }
        let mut values = vec![1.0 - disjoint.iter().sum::<f64>()];
        values.extend_from_slice(disjoint);
        moebius::superset_sums(&mut values, r);
        values[0] = 1.0;
        Self::constant(r, &values[1..])
    }

    pub fn threshold(a: f64, b: f64) -> Result<Self> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        Ok(AnalyticMultiplexon::Threshold { a, b })
    }

    pub fn dynamic(params: DynamicParams) -> Result<Self> {
        params.validate()?;
        check_layer_count(params.t + 1)?;
        let values = dynamic_cumulative(&params)?;
        Ok(AnalyticMultiplexon::Dynamic { params, values })
    }

    /// `W̄_S(x, y)` for a nonempty subset valid for this family.
    pub fn eval_layer(&self, s: Subset, x: f64, y: f64) -> Result<f64> {
        if s.is_empty() || !s.is_valid_for(self.r()) {
            return Err(Error::UnknownSubset { subset: s });
        }
        Ok(self.cumulative_at(s, x, y))
    }

    /// The constant values of a constant-valued family, indexed by bitmask.
    pub fn constant_values(&self) -> Option<&[f64]> {
        match self {
            AnalyticMultiplexon::Constant { values, .. } | AnalyticMultiplexon::Dynamic { values, .. } => {
                Some(values)
            }
            _ => None,
        }
    }

    /// Exact step representation, when the family is piecewise constant.
    pub fn as_step(&self) -> Option<StepMultiplexon> {
        match self {
            AnalyticMultiplexon::Step(w) => Some(w.clone()),
            _ => self
                .constant_values()
                .map(|v| StepMultiplexon::constant(self.r(), Mode::Cumulative, v).expect("validated on construction")),
        }
    }
}

impl Multiplexon for AnalyticMultiplexon {
    fn r(&self) -> usize {
        match self {
            AnalyticMultiplexon::Constant { r, .. } => *r,
            AnalyticMultiplexon::Threshold { .. } | AnalyticMultiplexon::UniformAttachment => 2,
            AnalyticMultiplexon::Step(w) => w.r(),
            AnalyticMultiplexon::Dynamic { params, .. } => params.t + 1,
        }
    }

    fn cumulative_at(&self, s: Subset, x: f64, y: f64) -> f64 {
        if s.is_empty() {
            return 1.0;
        }
        match self {
            AnalyticMultiplexon::Constant { values, .. } | AnalyticMultiplexon::Dynamic { values, .. } => {
                values[s.index()]
            }
            AnalyticMultiplexon::Threshold { a, b } => {
                let cut = match s.bits() {
                    1 => *a,
                    2 => *b,
                    _ => a.min(*b),
                };
                if x + y <= cut {
                    1.0
                } else {
                    0.0
                }
            }
            AnalyticMultiplexon::UniformAttachment => {
                let m = x.max(y);
                if s.bits() == 1 {
                    1.0 - m
                } else {
                    ua_double(m)
                }
            }
            AnalyticMultiplexon::Step(w) => w.cumulative_at(s, x, y),
        }
    }
}
