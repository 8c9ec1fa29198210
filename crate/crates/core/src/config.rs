//! Engine configuration file.
//!
//! One JSON object with a block per subsystem. Every field has a default and
//! unknown keys are rejected:
//!
//! ```json
//! {"raster": {"resolution": 500}, "sweep": {"scale_factors": [0.9, 1.0, 1.1]}}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gestures::GestureConfig;
use crate::raster::RasterConfig;
use crate::solar::SolarConfig;
use crate::sweep::SweepConfig;
use crate::viewopt::EnergyConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub raster: RasterConfig,
    pub energy: EnergyConfig,
    pub sweep: SweepConfig,
    pub gestures: GestureConfig,
    pub solar: SolarConfig,
}

impl EngineConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: EngineConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.raster.validate()?;
        self.energy.validate()?;
        self.sweep.validate()?;
        self.gestures.validate()?;
        self.solar.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = EngineConfig::default();
        let back = EngineConfig::from_json_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn empty_object_is_default() {
        assert_eq!(EngineConfig::from_json_str("{}").unwrap(), EngineConfig::default());
    }

    #[test]
    fn partial_blocks_keep_other_defaults() {
        let c = EngineConfig::from_json_str(r#"{"raster": {"resolution": 200}, "energy": {"starts": 4}}"#).unwrap();
        assert_eq!(c.raster.resolution, 200);
        assert_eq!(c.raster.fov_y, RasterConfig::default().fov_y);
        assert_eq!(c.energy.starts, 4);
        assert_eq!(c.energy.omega, [1.0, 100.0, 10.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(EngineConfig::from_json_str(r#"{"rastr": {}}"#).is_err());
        assert!(EngineConfig::from_json_str(r#"{"sweep": {"bins": 3}}"#).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(EngineConfig::from_json_str(r#"{"raster": {"resolution": 95}}"#).is_err());
        assert!(EngineConfig::from_json_str(r#"{"energy": {"theta1": 1.0}}"#).is_err());
    }
}
