//! JSON run configuration and the tolerance registry.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cone::ConeSpec;
use crate::moment::GeneratorSet;
use crate::reduce::{Subspace, SubspaceSchema};
use crate::tube::TubePoint;

/// Raw configuration file contents.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub cone: ConeSpec,
    #[serde(default)]
    pub subspace: Option<SubspaceSchema>,
    #[serde(default)]
    pub candidate_subalgebra: Option<GeneratorSet>,
    #[serde(default)]
    pub base_point: Option<TubePoint>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A configuration problem tied to the key that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError { key: key.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    /// Parses and checks dimensions of every present section.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let key = match path.as_str() {
                "." | "" => missing_or_unknown_key(&inner.to_string()).unwrap_or_else(|| ".".into()),
                _ => path,
            };
            ConfigError::new(key, inner)
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        self.cone.validate().map_err(|e| ConfigError::new("cone", e))?;
        let n = self.cone.ambient_dim();
        if let Some(s) = &self.subspace {
            Subspace::from_schema(s, n).map_err(|e| ConfigError::new("subspace.basis", e))?;
        }
        if let Some(g) = &self.candidate_subalgebra {
            g.validate().map_err(|e| ConfigError::new("candidate_subalgebra", e))?;
            if let Some(bad) = g.generators.iter().position(|x| x.dim() != n) {
                return Err(ConfigError::new(
                    format!("candidate_subalgebra.generators[{bad}]"),
                    format!("dimension {} does not match the cone dimension {n}", g.generators[bad].dim()),
                ));
            }
        }
        if let Some(p) = &self.base_point {
            for (key, v) in [("base_point.re", &p.re), ("base_point.im", &p.im)] {
                if v.len() != n {
                    return Err(ConfigError::new(
                        key,
                        format!("length {} does not match the cone dimension {n}", v.len()),
                    ));
                }
            }
        }
        for (name, &value) in &self.tolerances {
            check_tolerance(name, value).map_err(|m| ConfigError::new(format!("tolerances.{name}"), m))?;
        }
        Ok(())
    }

    pub fn subspace(&self) -> Result<Subspace, ConfigError> {
        let s = self.subspace.as_ref().ok_or_else(|| ConfigError::new("subspace", "missing key"))?;
        Subspace::from_schema(s, self.cone.ambient_dim()).map_err(|e| ConfigError::new("subspace.basis", e))
    }
}

/// serde reports missing and unknown top-level fields at the root path;
/// recover the key name from its message.
fn missing_or_unknown_key(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

/// Named tolerances with their defaults.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("cone.dual_identity", 1e-9),
    ("cone.dual_scaling", 1e-9),
    ("cone.gradient", 1e-6),
    ("cone.hessian", 1e-5),
    ("cone.homogeneity", 1e-9),
    ("cone.projection", 1e-12),
    ("liecond.analytic_w", 1e-8),
    ("liecond.bracket", 1e-8),
    ("liecond.j_invariance", 1e-10),
    ("liecond.orbit", 1e-6),
    ("liecond.span", 1e-6),
    ("moment.bracket", 1e-10),
    ("moment.bracket_compatibility", 1e-10),
    ("moment.defining_property", 1e-4),
    ("moment.group_law", 1e-10),
    ("moment.linearity", 1e-10),
    ("reduce.admissibility", 1e-9),
    ("reduce.cone_scaling", 1e-10),
    ("reduce.orbit_agreement", 1e-6),
    ("reduce.residual", 1e-8),
    ("reduce.roundtrip", 1e-8),
    ("reduce.slice_bound", 1e-9),
    ("reduce.slice_uniqueness", 1e-6),
    ("reduce.tau_invariance", 1e-12),
    ("tube.kahler_bilinearity", 1e-4),
];

fn check_tolerance(name: &str, value: f64) -> Result<(), String> {
    if !DEFAULT_TOLERANCES.iter().any(|(n, _)| *n == name) {
        return Err("unknown tolerance name".into());
    }
    if !(value.is_finite() && value >= 0.0) {
        return Err(format!("tolerance must be finite and non-negative, got {value}"));
    }
    Ok(())
}

/// Effective tolerances for a run: defaults, then config, then `--tol`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(DEFAULT_TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self.0.get(name).unwrap_or_else(|| panic!("unregistered tolerance {name}"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        check_tolerance(name, value)?;
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    /// Applies a `NAME=VALUE` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::new("--tol", format!("expected NAME=VALUE, got `{spec}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| ConfigError::new(format!("--tol {name}"), format!("`{value}` is not a number")))?;
        self.set(name.trim(), value).map_err(|m| ConfigError::new(format!("--tol {name}"), m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = r#"{"cone":{"type":"lorentz","d":1},"subspace":{"basis":[[0,1]]}}"#;

    #[test]
    fn parses_worked_config() {
        let c = Config::parse(WORKED).unwrap();
        assert_eq!(c.cone, ConeSpec::lorentz(1));
        assert_eq!(c.subspace().unwrap().dim(), 1);
    }

    #[test]
    fn errors_name_the_key() {
        let e = Config::parse(r#"{"cone":{"type":"lorentz","d":1},"subspace":{"basis":[[0,"a"]]}}"#).unwrap_err();
        assert!(e.key.starts_with("subspace.basis"), "{e}");
        let e = Config::parse(r#"{"cone":{"type":"lorentz","d":1},"bogus":1}"#).unwrap_err();
        assert_eq!(e.key, "bogus");
        let e = Config::parse(r#"{"subspace":{"basis":[]}}"#).unwrap_err();
        assert_eq!(e.key, "cone");
        let e = Config::parse(r#"{"cone":{"type":"lorentz","d":1},"subspace":{"basis":[[0,1,2]]}}"#).unwrap_err();
        assert_eq!(e.key, "subspace.basis");
        let e = Config::parse(r#"{"cone":{"type":"lorentz","d":1},"tolerances":{"nope":1}}"#).unwrap_err();
        assert_eq!(e.key, "tolerances.nope");
        let e = Config::parse(r#"{"cone":{"type":"lorentz","d":1},"base_point":{"re":[0],"im":[1,0]}}"#).unwrap_err();
        assert_eq!(e.key, "base_point.re");
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.apply_override("reduce.residual=1e-3").unwrap();
        assert_eq!(t.get("reduce.residual"), 1e-3);
        assert!(t.apply_override("reduce.residual").is_err());
        assert!(t.apply_override("nope=1").is_err());
        assert!(t.apply_override("reduce.residual=x").is_err());
    }
}
