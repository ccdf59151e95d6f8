//! Sectioned `key = value` parameter files (TOML syntax).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BiologicalParams, EngineeringParams, ModelParameters, ReactorGeometry, ThermalParams};

/// The shipped default parameter file.
pub const DEFAULT_PARAMS: &str = include_str!("../../assets/default_params.toml");

/// Geometry plus model constants, as stored in one parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    pub geometry: ReactorGeometry,
    pub thermal: ThermalParams,
    pub biological: BiologicalParams,
    pub engineering: EngineeringParams,
}

impl ParameterSet {
    pub fn model(&self) -> ModelParameters {
        ModelParameters {
            thermal: self.thermal.clone(),
            biological: self.biological.clone(),
            engineering: self.engineering.clone(),
        }
    }

    pub fn from_parts(geometry: ReactorGeometry, model: &ModelParameters) -> Self {
        ParameterSet {
            geometry,
            thermal: model.thermal.clone(),
            biological: model.biological.clone(),
            engineering: model.engineering.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.model().validate()
    }
}

pub fn parse_parameters(text: &str) -> Result<ParameterSet> {
    let set: ParameterSet = toml::from_str(text).map_err(|e| Error::Config(format!("parameter file: {e}")))?;
    set.validate()?;
    Ok(set)
}

pub fn emit_parameters(set: &ParameterSet) -> Result<String> {
    toml::to_string(set).map_err(|e| Error::Config(format!("cannot serialize parameters: {e}")))
}

pub fn load_parameters(path: impl AsRef<Path>) -> Result<ParameterSet> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_parameters(&text)
}

pub fn default_parameters() -> ParameterSet {
    parse_parameters(DEFAULT_PARAMS).expect("bundled parameter file is valid")
}

impl Default for ModelParameters {
    fn default() -> Self {
        default_parameters().model()
    }
}

impl Default for ReactorGeometry {
    fn default() -> Self {
        default_parameters().geometry
    }
}
