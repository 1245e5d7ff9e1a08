//! JSON run configuration for `simulate`.

use std::path::{Path, PathBuf};

use lasso_s_core::sim::LambdaMode;
use lasso_s_core::SimConfig;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::model::Convention;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub simulation: SimConfig,
    /// Convention of the log-grid bounds, if any.
    pub lambda_convention: Convention,
    pub threads: Option<usize>,
    /// Output stem; `.csv` and `.json` are appended.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn read(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))
    }

    /// The simulation with grid bounds converted to the internal convention.
    pub fn resolved(&self) -> AppResult<SimConfig> {
        let mut sim = self.simulation.clone();
        if let LambdaMode::LogGrid { min, max, .. } = &mut sim.lambda_mode {
            *min = self.lambda_convention.to_internal(*min);
            *max = self.lambda_convention.to_internal(*max);
        }
        sim.validate()
            .map_err(|e| AppError::Config(e.to_string()))?;
        Ok(sim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::parse(r#"{"simulaton": {}}"#).is_err());
        assert!(RunConfig::parse(r#"{"simulation": {"trails": 3}}"#).is_err());
        assert!(RunConfig::parse(r#"{"simulation": {"trials": 3}}"#).is_ok());
    }

    #[test]
    fn grid_bounds_follow_convention() {
        let cfg = RunConfig::parse(
            r#"{"lambda_convention": "paper",
                "simulation": {"lambda_mode": {"log_grid": {"min": 2.0, "max": 8.0, "count": 3}}}}"#,
        )
        .unwrap();
        let sim = cfg.resolved().unwrap();
        assert_eq!(sim.lambda_mode.grid(sim.n).unwrap(), vec![4.0, 2.0, 1.0]);
    }

    #[test]
    fn invalid_simulation_is_config_error() {
        let cfg = RunConfig::parse(r#"{"simulation": {"n": 101}}"#).unwrap();
        assert!(matches!(cfg.resolved(), Err(AppError::Config(_))));
    }

    #[test]
    fn bundled_configs_parse() {
        for name in ["fig1a.json", "fig1b.json"] {
            let p = Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("configs")
                .join(name);
            RunConfig::read(&p).unwrap().resolved().unwrap();
        }
    }
}
