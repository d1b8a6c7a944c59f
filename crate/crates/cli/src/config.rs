//! Experiment configuration: embedded defaults, named presets, a user TOML
//! file and command-line overrides, merged in that order.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Table;

use skewlab_core::cocycle::{ToralCocycle, ToralObservable};
use skewlab_core::correlations::MeasureRegime;
use skewlab_core::inducing::{InducingScheme, SchemeConfig};
use skewlab_core::maps::IntermittentMap;

use crate::error::{CliError, Result};

/// Every key with its default value. Echoed into each manifest.
pub const DEFAULTS: &str = r#"
[map]
family = "lsv"
gamma = 0.5
c1 = 2.0
c2 = 1.0

[scheme]
phi_max = 1024
theta = 0.75
epsilon = 0.5

[grid]
m = 128

[run]
horizon = 1024
omega_count = 4096
k_max = 8
seed = 24301
threads = 1
estimator = "operator"
mc_samples = 1000000
mc_burn_in = 10000
mc_batches = 100
fixed_point_cap = 1024
asymptotics_depth = 25
probe_trials = 16

[cocycle]
kind = "cosine"
eps = 0.3
eps2 = 0.0

[observables.v]
poly = [1.0, 1.0]
cos = 1.0

[observables.w]
poly = [0.0, 0.0, 1.0]
cos = 0.5

[tolerances]
tail_beta = 0.15
perron = 1e-8
lambda2 = 0.99
fourier = 1e-6
tower = 1e-10
decay_slope = 0.4
finite_ratio = 0.2
infinite_gap = 0.15
eps_loss = 0.5
resonance = 0.01
asymptotics_r2 = 0.9

[output]
dir = "out"
dat = false
cache = true
"#;

/// Overrides applied on top of [`DEFAULTS`] for each named preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("lsv-finite", ""),
    (
        "lsv-thin",
        r#"
[map]
gamma = 0.3
[scheme]
phi_max = 4096
[run]
horizon = 4096
"#,
    ),
    (
        "lsv-infinite",
        r#"
[map]
gamma = 1.5
[scheme]
phi_max = 4096
[run]
horizon = 4096
"#,
    ),
    (
        "thaler",
        r#"
[map]
family = "thaler"
gamma = 0.5
c2 = 1.0
"#,
    ),
    (
        "doubling",
        r#"
[map]
family = "doubling"
[scheme]
phi_max = 48
[grid]
m = 64
[run]
horizon = 48
omega_count = 1024
"#,
    ),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    /// `lsv`, `thaler` or `doubling`.
    pub family: String,
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub phi_max: usize,
    pub theta: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub horizon: usize,
    pub omega_count: usize,
    pub k_max: i32,
    pub seed: u64,
    pub threads: usize,
    /// `operator`, `tower` or `monte-carlo`.
    pub estimator: String,
    pub mc_samples: usize,
    pub mc_burn_in: usize,
    pub mc_batches: usize,
    pub fixed_point_cap: usize,
    pub asymptotics_depth: usize,
    pub probe_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSection {
    /// `zero`, `constant`, `cosine`, `planar` or `identity-angle`.
    pub kind: String,
    pub eps: f64,
    pub eps2: f64,
}

/// `Σ poly[p] x^p + cos · cos ψ_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub poly: Vec<f64>,
    pub cos: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    pub v: ObservableSpec,
    pub w: ObservableSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tail_beta: f64,
    pub perron: f64,
    pub lambda2: f64,
    pub fourier: f64,
    pub tower: f64,
    pub decay_slope: f64,
    pub finite_ratio: f64,
    pub infinite_gap: f64,
    pub eps_loss: f64,
    pub resonance: f64,
    pub asymptotics_r2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    /// Also write whitespace-separated `.dat` mirrors of every CSV.
    pub dat: bool,
    pub cache: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapConfig,
    pub scheme: SchemeSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub cocycle: CocycleSection,
    pub observables: ObservablesSection,
    pub tolerances: Tolerances,
    pub output: OutputSection,
}

/// Command-line values that take precedence over every file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

fn parse_table(text: &str, origin: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| CliError::Config { field: origin.to_string(), message: e.to_string() })
}

/// Recursive merge: tables merge key by key, everything else is replaced.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

impl ExperimentConfig {
    /// Defaults, then the preset, then the user file, then overrides.
    pub fn load(preset: Option<&str>, user_toml: Option<&str>, overrides: &Overrides) -> Result<Self> {
        let mut table = parse_table(DEFAULTS, "defaults")?;
        if let Some(name) = preset {
            let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| CliError::Config {
                field: "preset".into(),
                message: format!("unknown preset {name:?}; known presets: {}", preset_names().join(", ")),
            })?;
            merge(&mut table, parse_table(text, "preset")?);
        }
        if let Some(text) = user_toml {
            merge(&mut table, parse_table(text, "config file")?);
        }
        let mut cfg: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Config {
            field: "config".into(),
            message: e.message().to_string(),
        })?;
        if let Some(out) = &overrides.out {
            cfg.output.dir = out.clone();
        }
        if let Some(seed) = overrides.seed {
            cfg.run.seed = seed;
        }
        if let Some(t) = overrides.threads {
            cfg.run.threads = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn defaults() -> Self {
        Self::load(None, None, &Overrides::default()).expect("embedded defaults are valid")
    }

    fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: &str| Err(CliError::Config { field: field.into(), message: message.into() });
        match self.map.family.as_str() {
            "lsv" | "thaler" | "doubling" => {}
            other => return bad("map.family", &format!("unknown family {other:?} (lsv, thaler, doubling)")),
        }
        if self.map.family != "doubling" && !(self.map.gamma > 0.0 && self.map.gamma.is_finite()) {
            return bad("map.gamma", "must be positive");
        }
        if self.map.family == "lsv" && !(self.map.c1 > 0.0 && self.map.c1 <= 2.0) {
            return bad("map.c1", "must lie in (0, 2]");
        }
        if self.map.family == "thaler" && !(self.map.c2 > 0.0) {
            return bad("map.c2", "must be positive");
        }
        let positive_ints = [
            ("scheme.phi_max", self.scheme.phi_max),
            ("grid.m", self.grid.m),
            ("run.horizon", self.run.horizon),
            ("run.omega_count", self.run.omega_count),
            ("run.threads", self.run.threads),
            ("run.mc_samples", self.run.mc_samples),
            ("run.mc_batches", self.run.mc_batches),
            ("run.fixed_point_cap", self.run.fixed_point_cap),
            ("run.asymptotics_depth", self.run.asymptotics_depth),
            ("run.probe_trials", self.run.probe_trials),
        ];
        for (field, v) in positive_ints {
            if v == 0 {
                return bad(field, "must be positive");
            }
        }
        if self.run.k_max < 1 {
            return bad("run.k_max", "must be at least 1");
        }
        if !self.run.omega_count.is_power_of_two() {
            return bad("run.omega_count", "must be a power of two");
        }
        if !(self.scheme.theta > 0.0 && self.scheme.theta < 1.0) {
            return bad("scheme.theta", "must lie in (0, 1)");
        }
        if !(self.scheme.epsilon > 0.0) {
            return bad("scheme.epsilon", "must be positive");
        }
        match self.run.estimator.as_str() {
            "operator" | "tower" | "monte-carlo" => {}
            other => return bad("run.estimator", &format!("unknown estimator {other:?} (operator, tower, monte-carlo)")),
        }
        match self.cocycle.kind.as_str() {
            "zero" | "constant" | "cosine" | "planar" | "identity-angle" => {}
            other => return bad("cocycle.kind", &format!("unknown cocycle {other:?}")),
        }
        let t = &self.tolerances;
        for (field, v) in [
            ("tolerances.tail_beta", t.tail_beta),
            ("tolerances.perron", t.perron),
            ("tolerances.lambda2", t.lambda2),
            ("tolerances.fourier", t.fourier),
            ("tolerances.tower", t.tower),
            ("tolerances.decay_slope", t.decay_slope),
            ("tolerances.finite_ratio", t.finite_ratio),
            ("tolerances.infinite_gap", t.infinite_gap),
            ("tolerances.eps_loss", t.eps_loss),
            ("tolerances.resonance", t.resonance),
            ("tolerances.asymptotics_r2", t.asymptotics_r2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, "must be positive");
            }
        }
        for (name, spec) in [("observables.v", &self.observables.v), ("observables.w", &self.observables.w)] {
            if spec.poly.iter().chain([&spec.cos]).any(|x| !x.is_finite()) {
                return bad(name, "coefficients must be finite");
            }
        }
        Ok(())
    }

    /// Finite measure for `γ < 1` and for the doubling map.
    pub fn regime(&self) -> MeasureRegime {
        if self.map.family == "doubling" || self.map.gamma < 1.0 {
            MeasureRegime::Finite
        } else {
            MeasureRegime::Infinite
        }
    }

    /// Finite-measure checks need `γ < 1`.
    pub fn require_finite(&self, command: &str) -> Result<()> {
        if self.regime() != MeasureRegime::Finite {
            return Err(CliError::Regime(format!(
                "{command} needs a finite-measure map (gamma < 1); this configuration has gamma = {}",
                self.map.gamma
            )));
        }
        Ok(())
    }

    /// Infinite-measure checks need `γ ∈ [1, 2)`.
    pub fn require_infinite(&self, command: &str) -> Result<()> {
        if self.map.family == "doubling" || !(self.map.gamma >= 1.0 && self.map.gamma < 2.0) {
            return Err(CliError::Regime(format!(
                "{command} needs an infinite-measure map with gamma in [1, 2); this configuration has {} gamma = {}",
                self.map.family, self.map.gamma
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical TOML rendering, ignoring the output
    /// directory so that a rerun elsewhere hashes the same.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir.clear();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn build_map(&self) -> Result<IntermittentMap> {
        Ok(match self.map.family.as_str() {
            "lsv" => IntermittentMap::lsv(self.map.gamma, self.map.c1)?,
            "thaler" => IntermittentMap::thaler(self.map.gamma, self.map.c2)?,
            _ => IntermittentMap::doubling(),
        })
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        SchemeConfig {
            phi_max: self.scheme.phi_max,
            theta: self.scheme.theta,
            epsilon: self.scheme.epsilon,
            ..SchemeConfig::default()
        }
    }

    pub fn build_scheme(&self) -> Result<InducingScheme> {
        Ok(InducingScheme::new(self.build_map()?, &self.scheme_config())?)
    }

    pub fn build_cocycle(&self) -> ToralCocycle {
        let c = &self.cocycle;
        match c.kind.as_str() {
            "zero" => ToralCocycle::zero(1),
            "constant" => ToralCocycle::constant(c.eps),
            "planar" => ToralCocycle::planar(c.eps, c.eps2),
            "identity-angle" => ToralCocycle::identity_angle(),
            _ => ToralCocycle::cosine(c.eps),
        }
    }

    pub fn observable(&self, spec: &ObservableSpec, d: usize) -> ToralObservable {
        ToralObservable::poly_plus_cos(d, &spec.poly, spec.cos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_loads() {
        for name in preset_names() {
            let cfg = ExperimentConfig::load(Some(name), None, &Overrides::default()).unwrap();
            assert!(cfg.build_scheme().is_ok(), "{name}");
        }
    }

    #[test]
    fn user_file_and_flags_override() {
        let cfg = ExperimentConfig::load(
            Some("lsv-infinite"),
            Some("[grid]\nm = 32\n"),
            &Overrides { seed: Some(7), ..Default::default() },
        )
        .unwrap();
        assert_eq!(cfg.grid.m, 32);
        assert_eq!(cfg.map.gamma, 1.5);
        assert_eq!(cfg.run.seed, 7);
        assert_eq!(cfg.regime(), MeasureRegime::Infinite);
        assert!(cfg.require_finite("check-finite").is_err());
        assert!(cfg.require_infinite("check-infinite").is_ok());
    }

    #[test]
    fn field_level_errors() {
        let err = ExperimentConfig::load(None, Some("[grid]\nm = 0\n"), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("grid.m"), "{err}");
        let err = ExperimentConfig::load(None, Some("[grid]\nsize = 3\n"), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("size"), "{err}");
        let err = ExperimentConfig::load(None, Some("[run]\nomega_count = 100\n"), &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("run.omega_count"), "{err}");
        assert!(ExperimentConfig::load(Some("nope"), None, &Overrides::default()).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::defaults();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.output.dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.grid.m = 64;
        assert_ne!(a.hash(), b.hash());
    }
}
