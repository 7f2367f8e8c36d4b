//! Experiment configuration: JSON schema, dotted-path overrides, and
//! scenario-specific validation.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use nehari_lab::diagnostics::BubbleTrainSpec;
use nehari_lab::solvers::{DescentConfig, MountainPassConfig};
use nehari_lab::{Params, Real};
use serde::{Deserialize, Serialize};

/// Which experiment to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Closed-form identities of the explicit entire solutions.
    ClosedFormSuite,
    /// Local classification of both semi-trivial branches at two
    /// coupling strengths.
    Classify,
    /// Multi-start search expected to end in a semi-trivial minimizer.
    GroundSmallNu,
    /// Multi-start search expected to end in a fully coupled minimizer.
    GroundLargeNu,
    /// String plus climbing search for the mountain-pass candidate.
    MountainPass,
    /// Consistency checks of the scalar infimum lemma.
    AlgebraicLemma,
    /// Windowed mass accounting on a synthesized bubble train.
    MassLedger,
}

/// Log-uniform radial grid on `[r_min, r_max]` with `n` nodes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_min: Real,
    pub r_max: Real,
    pub n: usize,
}

/// Classifier section: the two coupling strengths probed on each
/// semi-trivial branch, plus the probe budget. `nu_small` must sit below
/// and `nu_large` above the quadratic destabilization threshold, so the
/// boundary exponent value 2 resolves to a definite expected verdict.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub nu_small: Real,
    pub nu_large: Real,
    pub n_directions: usize,
    pub step: Real,
}

/// Mass-ledger section: window cut radii and the bubble train to
/// synthesize.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassConfig {
    pub eps: Real,
    pub big_r: Real,
    pub bubbles: Vec<BubbleTrainSpec<Real>>,
}

/// One reproducible experiment. The resolved value (defaults filled,
/// overrides applied) is embedded verbatim in `result.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub params: Params<Real>,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descent: Option<DescentConfig<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mountain_pass: Option<MountainPassConfig<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<MassConfig>,
    /// Multi-start budget for the ground-state scenarios.
    #[serde(default = "default_n_starts")]
    pub n_starts: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn default_n_starts() -> usize {
    8
}

impl ExperimentConfig {
    /// Structural validation beyond what serde enforces: parameter
    /// hypotheses, grid sanity, and scenario-specific required sections.
    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| anyhow!("params: {e}"))?;
        let g = &self.grid;
        if !(g.r_min > 0.0 && g.r_min < g.r_max && g.r_max.is_finite()) {
            bail!(
                "grid radii must satisfy 0 < r_min < r_max, got [{}, {}]",
                g.r_min,
                g.r_max
            );
        }
        if g.n < 16 {
            bail!("grid needs at least 16 nodes, got {}", g.n);
        }
        match self.scenario {
            Scenario::GroundSmallNu | Scenario::GroundLargeNu => {
                let dc = self
                    .descent
                    .as_ref()
                    .ok_or_else(|| anyhow!("{:?} requires a `descent` section", self.scenario))?;
                dc.validate().map_err(|e| anyhow!("descent: {e}"))?;
                if self.n_starts < 5 {
                    bail!(
                        "ground-state scenarios need n_starts >= 5 (the deterministic starts), got {}",
                        self.n_starts
                    );
                }
            }
            Scenario::MountainPass => {
                let mp = self.mountain_pass.as_ref().ok_or_else(|| {
                    anyhow!("MountainPass requires a `mountain_pass` section")
                })?;
                mp.validate().map_err(|e| anyhow!("mountain_pass: {e}"))?;
            }
            Scenario::Classify => {
                let cc = self
                    .classify
                    .as_ref()
                    .ok_or_else(|| anyhow!("Classify requires a `classify` section"))?;
                if !(cc.nu_small > 0.0 && cc.nu_large >= cc.nu_small) {
                    bail!(
                        "classify coupling strengths must satisfy 0 < nu_small <= nu_large, got {} and {}",
                        cc.nu_small,
                        cc.nu_large
                    );
                }
                if cc.n_directions == 0 || !(cc.step > 0.0) {
                    bail!("classify needs n_directions >= 1 and step > 0");
                }
            }
            Scenario::MassLedger => {
                let mc = self
                    .mass
                    .as_ref()
                    .ok_or_else(|| anyhow!("MassLedger requires a `mass` section"))?;
                if mc.bubbles.is_empty() {
                    bail!("mass section needs at least one bubble");
                }
                if !(g.r_min < mc.eps && mc.eps < mc.big_r && mc.big_r < g.r_max) {
                    bail!(
                        "mass cuts must satisfy r_min < eps < big_r < r_max, got eps = {}, big_r = {}",
                        mc.eps,
                        mc.big_r
                    );
                }
            }
            Scenario::ClosedFormSuite | Scenario::AlgebraicLemma => {}
        }
        Ok(())
    }
}

/// Loads, overrides, and validates a config file. Parse failures carry
/// the line and column of the offending token.
pub fn load(path: &Path, overrides: &[String], out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg: ExperimentConfig = if overrides.is_empty() {
        serde_json::from_str(&text)
            .map_err(|e| anyhow!("config {}: {e} (line {}, column {})", path.display(), e.line(), e.column()))?
    } else {
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| anyhow!("config {}: {e} (line {}, column {})", path.display(), e.line(), e.column()))?;
        for spec in overrides {
            apply_override(&mut value, spec)?;
        }
        serde_json::from_value(value)
            .map_err(|e| anyhow!("config {} after overrides: {e}", path.display()))?
    };
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Applies one `key.path=value` override to the parsed JSON tree,
/// creating intermediate objects as needed. The value is parsed as JSON
/// when possible and kept as a string otherwise.
pub fn apply_override(root: &mut serde_json::Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override must look like key=value, got {spec:?}"))?;
    if key.is_empty() {
        bail!("override key is empty in {spec:?}");
    }
    let mut node = &mut *root;
    let mut segments = key.split('.').peekable();
    while let Some(seg) = segments.next() {
        let map = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("override path {key:?} walks through a non-object"))?;
        if segments.peek().is_none() {
            let value = serde_json::from_str::<serde_json::Value>(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(seg.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(seg.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one segment");
}

#[cfg(test)]
mod tests {
    use super::*;
    use nehari_lab::HProfile;

    fn base_json() -> serde_json::Value {
        serde_json::json!({
            "scenario": "ClosedFormSuite",
            "params": {
                "n_dim": 4,
                "lambda1": 0.2,
                "lambda2": 0.4,
                "alpha": 1.8,
                "beta": 1.8,
                "nu": 0.5,
                "h": { "Constant": 1.0 }
            },
            "grid": { "r_min": 1e-6, "r_max": 1e6, "n": 256 },
            "seed": 7,
            "output_dir": "out"
        })
    }

    #[test]
    fn deserializes_with_defaults() {
        let cfg: ExperimentConfig = serde_json::from_value(base_json()).expect("config");
        assert_eq!(cfg.scenario, Scenario::ClosedFormSuite);
        assert_eq!(cfg.n_starts, 8);
        assert!(cfg.descent.is_none());
        assert!(matches!(cfg.params.h, HProfile::Constant(c) if c == 1.0));
        cfg.validate().expect("valid");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = base_json();
        v["surprise"] = serde_json::json!(1);
        assert!(serde_json::from_value::<ExperimentConfig>(v).is_err());
    }

    #[test]
    fn overrides_parse_numbers_strings_and_nested_paths() {
        let mut v = base_json();
        apply_override(&mut v, "params.nu=0.25").expect("numeric");
        apply_override(&mut v, "output_dir=elsewhere").expect("string");
        apply_override(&mut v, "classify.nu_small=0.02").expect("created path");
        assert_eq!(v["params"]["nu"], serde_json::json!(0.25));
        assert_eq!(v["output_dir"], serde_json::json!("elsewhere"));
        assert_eq!(v["classify"]["nu_small"], serde_json::json!(0.02));
    }

    #[test]
    fn override_without_equals_is_an_error() {
        let mut v = base_json();
        assert!(apply_override(&mut v, "params.nu").is_err());
    }

    #[test]
    fn scenario_sections_are_enforced() {
        let mut v = base_json();
        v["scenario"] = serde_json::json!("MountainPass");
        let cfg: ExperimentConfig = serde_json::from_value(v).expect("parse");
        let err = cfg.validate().expect_err("missing section");
        assert!(err.to_string().contains("mountain_pass"));
    }

    #[test]
    fn ground_scenarios_need_enough_starts() {
        let mut v = base_json();
        v["scenario"] = serde_json::json!("GroundSmallNu");
        v["descent"] = serde_json::json!({
            "max_iters": 100,
            "step0": 1.0,
            "armijo_c": 1e-4,
            "grad_tol": 1e-5,
            "positive_part": true
        });
        v["n_starts"] = serde_json::json!(2);
        let cfg: ExperimentConfig = serde_json::from_value(v).expect("parse");
        assert!(cfg.validate().is_err());
    }
}
