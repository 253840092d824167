//! Run configuration read from a flat JSON object.
//!
//! Every key mirrors a command-line argument; flags given on the command line
//! win over the file. Unknown keys are rejected so that a typo cannot
//! silently fall back to a default.

use std::path::{Path, PathBuf};

use diode_core::bifurcation::{Param, Space, ZAxis};
use diode_core::bvp::Freeze;
use serde::Deserialize;

use crate::output::Format;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,

    // cubic
    pub k_hat: Option<f64>,
    pub b_hat: Option<f64>,
    pub space: Option<Space>,
    pub oracle: Option<bool>,

    // integrate
    pub j_x: Option<f64>,
    pub gamma: Option<f64>,
    pub x_max: Option<f64>,
    pub x0: Option<f64>,

    // shoot
    pub alpha: Option<f64>,
    #[serde(rename = "a_L")]
    pub a_l: Option<f64>,
    pub jx_guess: Option<f64>,
    pub beta_guess: Option<f64>,
    pub freeze: Option<Freeze>,
    pub max_iter: Option<usize>,

    // scan
    pub surface: Option<bool>,
    pub fixed: Option<Param>,
    pub value: Option<f64>,
    pub range: Option<(f64, f64)>,
    pub n: Option<usize>,
    pub k_range: Option<(f64, f64)>,
    pub b_range: Option<(f64, f64)>,
    pub n_k: Option<usize>,
    pub n_b: Option<usize>,
    pub z: Option<ZAxis>,

    // child-langmuir
    pub delta: Option<f64>,
    pub j_x_max: Option<f64>,
    #[serde(rename = "phi_L")]
    pub phi_l: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("config {path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let cfg = Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })?;
        if let Some(t) = cfg.tol {
            if !(t > 0.0) {
                return Err(ConfigError::Invalid {
                    path: path.into(),
                    msg: format!("tol must be positive, got {t}"),
                });
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let c = RunConfig::from_json(
            r#"{"j_x": 1.0, "a_L": 0.2, "phi_L": 3, "space": "theta", "range": [-5, 5]}"#,
        )
        .unwrap();
        assert_eq!(c.j_x, Some(1.0));
        assert_eq!(c.a_l, Some(0.2));
        assert_eq!(c.phi_l, Some(3.0));
        assert_eq!(c.space, Some(Space::Theta));
        assert_eq!(c.range, Some((-5.0, 5.0)));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_json(r#"{"jx": 1.0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"a_l": 1.0}"#).is_err());
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"tol": 0}"#).unwrap();
        assert!(matches!(
            RunConfig::load(&path),
            Err(ConfigError::Invalid { .. })
        ));
    }
}
