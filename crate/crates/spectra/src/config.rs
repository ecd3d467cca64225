//! Potential configuration files (TOML or JSON) and built-in named potentials.
//!
//! A config looks like
//!
//! ```json
//! { "plateau": [-1.0, 1.0],
//!   "left_wing":  {"type": "power", "exponent": 2.0, "coefficient": 0.5},
//!   "right_wing": {"type": "power", "exponent": 4.0, "coefficient": 1.0} }
//! ```
//!
//! Coefficients are the `c` in `w(r) = c * r^p`. Quadratic wings may instead be
//! given by their curvature, and series wings by a `terms` list.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};
use crate::potential::{PiecewisePotential, WingKind, WingSpec};

/// One wing as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WingConfig {
    /// `w(r) = coefficient * r^exponent`.
    Power { exponent: f64, coefficient: f64 },
    /// `w(r) = curvature / 2 * r^2`.
    Quadratic { curvature: f64 },
    /// `w(r) = sum_k c_k r^{p_k}`; terms are `[coefficient, exponent]` pairs
    /// sorted by exponent, leading term first.
    CustomSeries { terms: Vec<(f64, f64)> },
}

impl WingConfig {
    pub fn to_wing(&self) -> Result<WingSpec> {
        let wing = match self {
            WingConfig::Power {
                exponent,
                coefficient,
            } => WingSpec::power(*coefficient, *exponent),
            WingConfig::Quadratic { curvature } => WingSpec::quadratic(*curvature),
            WingConfig::CustomSeries { terms } => WingSpec::series(terms.clone())?,
        };
        wing.validate()?;
        Ok(wing)
    }

    pub fn from_wing(wing: &WingSpec) -> Self {
        match wing.kind {
            WingKind::Quadratic => WingConfig::Quadratic {
                curvature: 2.0 * wing.coefficient,
            },
            WingKind::Power => WingConfig::Power {
                exponent: wing.exponent,
                coefficient: wing.coefficient,
            },
            WingKind::CustomSeries => {
                let mut terms = vec![(wing.coefficient, wing.exponent)];
                terms.extend(wing.extra_terms.iter().copied());
                WingConfig::CustomSeries { terms }
            }
        }
    }
}

/// A plateau potential as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// `[a, b]`, the interval where the potential vanishes.
    pub plateau: [f64; 2],
    pub left_wing: WingConfig,
    pub right_wing: WingConfig,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PiecewisePotential> {
        PiecewisePotential::new(
            self.plateau[0],
            self.plateau[1],
            self.left_wing.to_wing()?,
            self.right_wing.to_wing()?,
        )
    }

    pub fn from_potential(pot: &PiecewisePotential) -> Self {
        let (a, b) = pot.plateau();
        PotentialConfig {
            plateau: [a, b],
            left_wing: WingConfig::from_wing(pot.left_wing()),
            right_wing: WingConfig::from_wing(pot.right_wing()),
        }
    }

    /// Parse from a string, dispatching on the file extension of `path`
    /// (`.toml` or `.json`).
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(text)
                .map_err(|e| SpectraError::Config(format!("{}: {e}", path.display()))),
            Some("json") => serde_json::from_str(text)
                .map_err(|e| SpectraError::Config(format!("{}: {e}", path.display()))),
            other => Err(SpectraError::Config(format!(
                "{}: unsupported config extension {:?} (expected .toml or .json)",
                path.display(),
                other.unwrap_or("")
            ))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpectraError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// Serialize in the format implied by `path`'s extension.
    pub fn dump(&self, path: &Path) -> Result<String> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => {
                toml::to_string_pretty(self).map_err(|e| SpectraError::Config(e.to_string()))
            }
            Some("json") => {
                serde_json::to_string_pretty(self).map_err(|e| SpectraError::Config(e.to_string()))
            }
            other => Err(SpectraError::Config(format!(
                "unsupported config extension {:?} (expected .toml or .json)",
                other.unwrap_or("")
            ))),
        }
    }
}

/// Resolve a `--potential` argument: a built-in name (`counterexample`,
/// `gaussian`, `quartic`, `asymmetric(ka,kb)`) or a path to a config file.
pub fn resolve_potential(arg: &str) -> Result<PiecewisePotential> {
    if let Some(pot) = builtin_potential(arg)? {
        return Ok(pot);
    }
    PotentialConfig::load(Path::new(arg))?.build()
}

/// Parse a built-in potential name; `Ok(None)` if `arg` is not a name.
pub fn builtin_potential(arg: &str) -> Result<Option<PiecewisePotential>> {
    let arg = arg.trim();
    match arg {
        "counterexample" => return Ok(Some(PiecewisePotential::counterexample())),
        "gaussian" => return Ok(Some(PiecewisePotential::gaussian())),
        "quartic" => return Ok(Some(PiecewisePotential::quartic())),
        _ => {}
    }
    if let Some(rest) = arg.strip_prefix("asymmetric(") {
        let inner = rest.strip_suffix(')').ok_or_else(|| {
            SpectraError::Config(format!("malformed potential name {arg:?}"))
        })?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(SpectraError::Config(format!(
                "asymmetric takes two curvatures, got {arg:?}"
            )));
        }
        let ka: f64 = parts[0]
            .parse()
            .map_err(|_| SpectraError::Config(format!("bad curvature {:?}", parts[0])))?;
        let kb: f64 = parts[1]
            .parse()
            .map_err(|_| SpectraError::Config(format!("bad curvature {:?}", parts[1])))?;
        return PiecewisePotential::asymmetric(ka, kb).map(Some);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let pot = PiecewisePotential::counterexample();
        let cfg = PotentialConfig::from_potential(&pot);
        let text = cfg.dump(Path::new("x.json")).unwrap();
        let back = PotentialConfig::parse(&text, Path::new("x.json")).unwrap();
        assert_eq!(back.build().unwrap(), pot);
    }

    #[test]
    fn toml_round_trip() {
        let pot = PiecewisePotential::new(
            -1.0,
            2.0,
            WingSpec::power(0.5, 3.0),
            WingSpec::series(vec![(1.0, 2.0), (0.25, 4.0)]).unwrap(),
        )
        .unwrap();
        let cfg = PotentialConfig::from_potential(&pot);
        let text = cfg.dump(Path::new("x.toml")).unwrap();
        let back = PotentialConfig::parse(&text, Path::new("x.toml")).unwrap();
        assert_eq!(back.build().unwrap(), pot);
    }

    #[test]
    fn spec_example_parses() {
        let text = r#"{ "plateau": [0.0, 1.0],
            "left_wing":  {"type": "power", "exponent": 2.0, "coefficient": 0.5},
            "right_wing": {"type": "quadratic", "curvature": 4.0} }"#;
        let cfg = PotentialConfig::parse(text, Path::new("p.json")).unwrap();
        let pot = cfg.build().unwrap();
        assert_eq!(pot.plateau(), (0.0, 1.0));
        let (kl, kr) = pot.junction_curvatures();
        assert_eq!((kl, kr), (1.0, 4.0));
    }

    #[test]
    fn unknown_field_is_an_error() {
        let text = r#"{ "plateau": [0.0, 1.0],
            "left_wing":  {"type": "power", "exponent": 2.0, "coefficient": 0.5, "slope": 3},
            "right_wing": {"type": "quadratic", "curvature": 4.0} }"#;
        let err = PotentialConfig::parse(text, Path::new("p.json")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("slope"), "{msg}");
    }

    #[test]
    fn invalid_wing_rejected_on_build() {
        let text = r#"{ "plateau": [0.0, 1.0],
            "left_wing":  {"type": "power", "exponent": 0.5, "coefficient": 1.0},
            "right_wing": {"type": "quadratic", "curvature": 4.0} }"#;
        let cfg = PotentialConfig::parse(text, Path::new("p.json")).unwrap();
        assert!(cfg.build().is_err());
    }

    #[test]
    fn builtin_names() {
        assert_eq!(
            builtin_potential("counterexample").unwrap().unwrap(),
            PiecewisePotential::counterexample()
        );
        assert_eq!(
            builtin_potential("gaussian").unwrap().unwrap(),
            PiecewisePotential::gaussian()
        );
        assert_eq!(
            builtin_potential("quartic").unwrap().unwrap(),
            PiecewisePotential::quartic()
        );
        let pot = builtin_potential("asymmetric(1, 4)").unwrap().unwrap();
        assert_eq!(pot.junction_curvatures(), (1.0, 4.0));
        assert!(builtin_potential("some/path.toml").unwrap().is_none());
        assert!(builtin_potential("asymmetric(1)").is_err());
    }
}
