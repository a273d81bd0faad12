//! Versioned TOML experiment configuration.
//!
//! ```toml
//! schema = 1
//!
//! [system]
//! maps = ["T4", "T2"]
//! p = [0.6, 0.4]
//! seed = 7
//!
//! [experiment]
//! kind = "orbit-trace"
//! steps = 500
//! ```

use critlab_core::{Family, MapDescriptor, RandomSystem};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// A parse or validation failure, located by line and column when it comes
/// from the TOML layer and by dotted field path when it is semantic.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}{message}", location(.line, .column, .field))]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

fn location(line: &Option<usize>, column: &Option<usize>, field: &Option<String>) -> String {
    let mut s = String::new();
    if let (Some(l), Some(c)) = (line, column) {
        s.push_str(&format!("line {l}, column {c}: "));
    }
    if let Some(f) = field {
        s.push_str(&format!("{f}: "));
    }
    s
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            column: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    fn from_toml(text: &str, err: toml::de::Error) -> Self {
        let (line, column) = match err.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        ConfigError {
            line,
            column,
            field: None,
            message: err.message().trim().to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub system: SystemConfig,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub maps: Vec<MapSpec>,
    pub p: Vec<f64>,
    pub seed: u64,
}

/// A builtin map by name, or a member of a parametric family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Builtin(String),
    Family(FamilyMap),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Doubling,
    Logistic,
    PowerGood,
    PowerBad,
    Mobius,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyMap {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default = "half")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

fn half() -> f64 {
    0.5
}
fn default_x0() -> f64 {
    0.3
}
fn default_eps() -> f64 {
    1.0 / 128.0
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    200_000
}
fn default_cap() -> u64 {
    1_000_000
}
fn default_max_kappa() -> usize {
    12
}
fn default_margin() -> f64 {
    0.2
}
fn default_fit_level() -> u32 {
    4
}
fn default_min_level() -> u32 {
    12
}
fn default_report_samples() -> usize {
    1000
}
fn default_report_cap() -> u64 {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// One random orbit and its occupation of the laminar regions.
    OrbitTrace {
        steps: usize,
        #[serde(default = "default_x0")]
        x0: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    /// Fixed vector of the Ulam operator.
    UlamDensity {
        resolution: usize,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
    },
    /// `L^q` norms of Ulam densities across resolutions.
    LqSweep { resolutions: Vec<usize>, q: Vec<f64> },
    /// Two-map systems over a range of `p2`: occupation and return times.
    PhaseScan {
        p2: Vec<f64>,
        steps: u64,
        #[serde(default = "default_eps")]
        eps: f64,
        samples: usize,
        #[serde(default = "default_cap")]
        cap: u64,
        /// Rows within this distance of `theta = 1` are not judged.
        #[serde(default = "default_margin")]
        margin: f64,
    },
    /// First-return times to an inducing domain.
    Kac {
        samples: usize,
        #[serde(default = "default_cap")]
        cap: u64,
        #[serde(default = "default_max_kappa")]
        max_kappa: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<usize>,
    },
    /// Kolmogorov distance to the system density as `p2` varies.
    Continuity { resolution: usize, p2: Vec<f64> },
    /// Dyadic interval masses against the analytic bounds.
    BoundsCheck {
        resolution: usize,
        #[serde(default = "default_fit_level")]
        fit_level: u32,
        #[serde(default = "default_min_level")]
        min_level: u32,
    },
    /// Domain conditions for each `kappa` and a batch of returns.
    InducingReport {
        #[serde(default = "default_max_kappa")]
        max_kappa: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<usize>,
        #[serde(default = "default_report_samples")]
        samples: usize,
        #[serde(default = "default_report_cap")]
        cap: u64,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::OrbitTrace { .. } => "orbit-trace",
            Experiment::UlamDensity { .. } => "ulam-density",
            Experiment::LqSweep { .. } => "lq-sweep",
            Experiment::PhaseScan { .. } => "phase-scan",
            Experiment::Kac { .. } => "kac",
            Experiment::Continuity { .. } => "continuity",
            Experiment::BoundsCheck { .. } => "bounds-check",
            Experiment::InducingReport { .. } => "inducing-report",
        }
    }
}

impl MapSpec {
    pub fn resolve(&self) -> Result<MapDescriptor, String> {
        match self {
            MapSpec::Builtin(name) => MapDescriptor::builtin(name).ok_or_else(|| format!("unknown map `{name}`")),
            MapSpec::Family(f) => {
                let need = |v: Option<f64>, key: &str| v.ok_or_else(|| format!("family needs `{key}`"));
                let family = match f.family {
                    FamilyName::Doubling => Family::Doubling,
                    FamilyName::Logistic => Family::Logistic { a: need(f.a, "a")? },
                    FamilyName::PowerGood => Family::PowerGood { r: need(f.r, "r")? },
                    FamilyName::PowerBad => Family::PowerBad {
                        ell: need(f.ell, "ell")?,
                        flip: f.flip.unwrap_or(false),
                    },
                    FamilyName::Mobius => Family::Mobius { s: need(f.s, "s")? },
                };
                let name = f.name.clone().unwrap_or_else(|| format!("{:?}", f.family).to_lowercase());
                MapDescriptor::new(&name, family, f.c).map_err(|e| e.to_string())
            }
        }
    }
}

/// Parses without semantic checks.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::from_toml(text, e))
}

/// Parses and validates.
pub fn load_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg = parse_config(text)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn emit_config(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configs always serialize")
}

/// FNV-1a of the emitted configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> u64 {
    emit_config(cfg).bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

fn check(ok: bool, field: &str, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::field(field, message))
    }
}

fn check_p2(v: &[f64], field: &str, closed: bool) -> Result<(), ConfigError> {
    check(!v.is_empty(), field, "must not be empty")?;
    let ok = |p: f64| if closed { (0.0..=1.0).contains(&p) } else { p > 0.0 && p < 1.0 };
    check(v.iter().all(|&p| ok(p)), field, "probabilities out of range")
}

impl ExperimentConfig {
    pub fn maps(&self) -> Result<Vec<MapDescriptor>, ConfigError> {
        self.system
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| m.resolve().map_err(|e| ConfigError::field(&format!("system.maps[{i}]"), e)))
            .collect()
    }

    pub fn build_system(&self) -> Result<RandomSystem, ConfigError> {
        RandomSystem::new(self.maps()?, self.system.p.clone()).map_err(|e| ConfigError::field("system", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check(
            self.schema == SCHEMA_VERSION,
            "schema",
            &format!("unsupported schema {}, expected {SCHEMA_VERSION}", self.schema),
        )?;
        check(
            self.system.maps.len() == self.system.p.len(),
            "system.p",
            "needs one probability per map",
        )?;
        let sys = self.build_system()?;
        let two_maps = || check(sys.maps().len() == 2, "system.maps", "this experiment needs exactly two maps");
        let resolution = |n: usize, field: &str| check(n >= 2 && n.is_power_of_two(), field, "must be a power of two >= 2");
        let eps_ok = |eps: f64| check(eps > 0.0 && eps < 0.5, "experiment.eps", "must lie in (0, 1/2)");
        match &self.experiment {
            Experiment::OrbitTrace { steps, x0, eps } => {
                check(*steps >= 1, "experiment.steps", "must be positive")?;
                check((0.0..=1.0).contains(x0), "experiment.x0", "must lie in [0, 1]")?;
                eps_ok(*eps)?;
            }
            Experiment::UlamDensity { resolution: n, tol, max_iter } => {
                resolution(*n, "experiment.resolution")?;
                check(*tol > 0.0, "experiment.tol", "must be positive")?;
                check(*max_iter >= 1, "experiment.max_iter", "must be positive")?;
            }
            Experiment::LqSweep { resolutions, q } => {
                check(resolutions.len() >= 2, "experiment.resolutions", "needs at least two entries")?;
                for &n in resolutions {
                    resolution(n, "experiment.resolutions")?;
                }
                check(!q.is_empty() && q.iter().all(|&q| q >= 1.0), "experiment.q", "exponents must be >= 1")?;
            }
            Experiment::PhaseScan { p2, steps, eps, samples, cap, margin } => {
                two_maps()?;
                check_p2(p2, "experiment.p2", false)?;
                check(*steps >= 1, "experiment.steps", "must be positive")?;
                eps_ok(*eps)?;
                check(*samples >= 10, "experiment.samples", "needs at least 10 samples")?;
                check(*cap >= 1, "experiment.cap", "must be positive")?;
                check(*margin >= 0.0, "experiment.margin", "must be non-negative")?;
            }
            Experiment::Kac { samples, cap, max_kappa, g, t } | Experiment::InducingReport { max_kappa, g, t, samples, cap } => {
                check(*samples >= 10, "experiment.samples", "needs at least 10 samples")?;
                check(*cap >= 1, "experiment.cap", "must be positive")?;
                check((1..=24).contains(max_kappa), "experiment.max_kappa", "must lie in 1..=24")?;
                let n = sys.maps().len();
                check(g.is_none_or(|g| sys.good_indices().contains(&g)), "experiment.g", "must index a good map")?;
                check(t.is_none_or(|t| t < n), "experiment.t", "index out of range")?;
                check(!sys.bad_indices().is_empty() || t.is_some(), "experiment.t", "no bad map to default to")?;
            }
            Experiment::Continuity { resolution: n, p2 } => {
                two_maps()?;
                resolution(*n, "experiment.resolution")?;
                check_p2(p2, "experiment.p2", true)?;
            }
            Experiment::BoundsCheck { resolution: n, fit_level, min_level } => {
                resolution(*n, "experiment.resolution")?;
                check(fit_level <= min_level, "experiment.fit_level", "must not exceed min_level")?;
                check(
                    (1usize << *min_level) <= *n,
                    "experiment.min_level",
                    "finest level must not be finer than the resolution",
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORBIT: &str = r#"
schema = 1

[system]
maps = ["T2", "T4"]
p = [0.4, 0.6]
seed = 3

[experiment]
kind = "orbit-trace"
steps = 500
"#;

    #[test]
    fn defaults_are_filled() {
        let cfg = load_config(ORBIT).unwrap();
        assert_eq!(
            cfg.experiment,
            Experiment::OrbitTrace {
                steps: 500,
                x0: 0.3,
                eps: 1.0 / 128.0
            }
        );
    }

    #[test]
    fn unknown_keys_are_located() {
        let text = ORBIT.replace("steps = 500", "steps = 500\nstepz = 4");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("stepz"), "{err}");
        // tagged tables are reported at their header
        assert_eq!(err.line, Some(9));
        let text = ORBIT.replace("seed = 3", "seed = 3\ncolour = 1");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("colour"), "{err}");
        assert_eq!((err.line, err.column), (Some(8), Some(1)));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = ORBIT.replace("\"T2\"", "\"T7\"");
        assert_eq!(load_config(&text).unwrap_err().field.as_deref(), Some("system.maps[0]"));
        let text = ORBIT.replace("schema = 1", "schema = 2");
        assert_eq!(load_config(&text).unwrap_err().field.as_deref(), Some("schema"));
        let text = ORBIT.replace("p = [0.4, 0.6]", "p = [0.4]");
        assert_eq!(load_config(&text).unwrap_err().field.as_deref(), Some("system.p"));
    }

    #[test]
    fn family_maps() {
        let text = ORBIT.replace(
            "maps = [\"T2\", \"T4\"]",
            "maps = [{ family = \"power-bad\", ell = 2.5, c = 0.4 }, { family = \"power-good\", r = 3.0, c = 0.4 }]",
        );
        let cfg = load_config(&text).unwrap();
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.maps()[0].order, 2.5);
        assert_eq!(sys.c(), 0.4);
        let missing = ORBIT.replace("\"T2\"", "{ family = \"mobius\" }");
        assert!(load_config(&missing).unwrap_err().message.contains("`s`"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = load_config(ORBIT).unwrap();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.system.seed = 4;
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
