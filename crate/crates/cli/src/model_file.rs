//! The model file: a flat TOML document describing one child and its
//! parents.
//!
//! ```toml
//! format_version = 1
//! child_states = 3
//! parent_states = [3, 3]
//! expression = "WMEAN"       # WMEAN, WMIN, WMAX or MIXMINMAX
//! weights = [0.4, 0.6]       # MIXMINMAX takes [w_min, w_max]
//! variance = 0.01
//! sample_size = 5
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use rnm::{ExpressionKind, GenerationParams, RankedFragment, WeightExpression};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub child_states: usize,
    pub parent_states: Vec<usize>,
    pub expression: String,
    pub weights: Vec<f64>,
    pub variance: f64,
    pub sample_size: usize,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub fragment: RankedFragment,
    pub spec: WeightExpression,
    pub params: GenerationParams,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("model file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Validates the document and builds the model. `max_combinations`
    /// replaces the default enumeration cap.
    pub fn into_model(self, max_combinations: Option<u64>) -> Result<Model, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported format_version {}, expected {FORMAT_VERSION}",
                self.format_version
            )));
        }
        let fragment = RankedFragment::new(self.parent_states, self.child_states)?;
        let kind: ExpressionKind = self.expression.parse()?;
        let spec = WeightExpression::from_parts(kind, self.weights).map_err(rnm::RnmError::from)?;
        spec.validate(&fragment).map_err(rnm::RnmError::from)?;
        let mut params = GenerationParams::new(self.variance, self.sample_size)?;
        if let Some(cap) = max_combinations {
            params = params.with_max_combinations(cap);
        }
        Ok(Model {
            fragment,
            spec,
            params,
        })
    }
}
