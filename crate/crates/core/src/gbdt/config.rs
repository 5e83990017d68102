use alloc::format;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// One tree per class per round, softmax over six logits.
    MulticlassSoftmax,
    /// Five logistic outputs, one per cumulative threshold.
    OrdinalBinary,
    SquaredError,
}

impl Objective {
    pub fn n_outputs(self) -> usize {
        match self {
            Objective::MulticlassSoftmax => 6,
            Objective::OrdinalBinary => 5,
            Objective::SquaredError => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    LeafWise { max_leaves: usize },
    DepthWise { max_depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Goss {
    /// Fraction of samples with the largest |gradient| always kept.
    pub top_fraction: f64,
    /// Fraction of all samples drawn at random from the rest.
    pub other_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Depth-wise growth, column subsampling 0.8, no GOSS.
    XgbLike,
    /// Leaf-wise growth with GOSS (0.2, 0.1).
    LgbmLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub objective: Objective,
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub growth: Growth,
    pub max_bins: usize,
    pub min_samples_leaf: usize,
    pub lambda_l2: f64,
    pub min_gain: f64,
    pub colsample_per_tree: f64,
    pub goss: Option<Goss>,
    pub seed: u64,
    /// Rounds without a validation QWK improvement before stopping.
    pub early_stopping_patience: Option<usize>,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self::preset(Preset::XgbLike)
    }
}

impl GbdtConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = Self {
            objective: Objective::MulticlassSoftmax,
            n_rounds: 500,
            learning_rate: 0.1,
            growth: Growth::DepthWise { max_depth: 6 },
            max_bins: 256,
            min_samples_leaf: 20,
            lambda_l2: 1.0,
            min_gain: 0.0,
            colsample_per_tree: 0.8,
            goss: None,
            seed: 42,
            early_stopping_patience: Some(50),
        };
        match preset {
            Preset::XgbLike => base,
            Preset::LgbmLike => Self {
                growth: Growth::LeafWise { max_leaves: 31 },
                colsample_per_tree: 1.0,
                goss: Some(Goss { top_fraction: 0.2, other_fraction: 0.1 }),
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::invalid(format!("gbdt config: {msg}")));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and >= 0");
        }
        if !(2..=256).contains(&self.max_bins) {
            return bad("max_bins must be in 2..=256");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be >= 1");
        }
        if !(self.lambda_l2 >= 0.0) || !(self.min_gain >= 0.0) {
            return bad("lambda_l2 and min_gain must be >= 0");
        }
        if !(self.colsample_per_tree > 0.0 && self.colsample_per_tree <= 1.0) {
            return bad("colsample_per_tree must be in (0, 1]");
        }
        match self.growth {
            Growth::LeafWise { max_leaves } if max_leaves < 2 => return bad("max_leaves must be >= 2"),
            Growth::DepthWise { max_depth } if max_depth < 1 => return bad("max_depth must be >= 1"),
            _ => {}
        }
        if let Some(g) = self.goss {
            let ok = g.top_fraction > 0.0 && g.other_fraction > 0.0 && g.top_fraction + g.other_fraction <= 1.0;
            if !ok {
                return bad("GOSS fractions must be positive with top + other <= 1");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_differ_as_documented() {
        let x = GbdtConfig::preset(Preset::XgbLike);
        assert_eq!(x.growth, Growth::DepthWise { max_depth: 6 });
        assert_eq!(x.colsample_per_tree, 0.8);
        assert!(x.goss.is_none());
        let l = GbdtConfig::preset(Preset::LgbmLike);
        assert_eq!(l.growth, Growth::LeafWise { max_leaves: 31 });
        assert_eq!(l.goss, Some(Goss { top_fraction: 0.2, other_fraction: 0.1 }));
        assert!(x.validate().is_ok() && l.validate().is_ok());
    }

    #[test]
    fn rejects_bad_goss() {
        let c = GbdtConfig { goss: Some(Goss { top_fraction: 0.7, other_fraction: 0.5 }), ..Default::default() };
        assert!(c.validate().is_err());
        let c = GbdtConfig { colsample_per_tree: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
