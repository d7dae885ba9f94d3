//! Run configuration as written by users: frequencies in MHz (the ÷2π
//! convention), times in ns, temperatures in µK. Everything is converted to
//! SI angular units when resolved into core types.

use std::path::Path;

use rydgate_core::design_u1::{SearchU1, ThresholdsU1};
use rydgate_core::design_u2::{ObjectiveU2, SearchU2, ThresholdsU2};
use rydgate_core::noise::{
    Beams, BranchAveraging, DriftMode, DurationRule, Estimator, FidelityOptions, LeakModel, NoiseScenario,
    PhaseNoiseSpec, PositionMode, StepConfig, TrapConfig,
};
use rydgate_core::units::{microkelvin, mhz, ns, thz, us};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; `--seed` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads; `RYDGATE_WORKERS` and `--workers` override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Output directory; `--out` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_u1: Option<SearchU1Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_u2: Option<SearchU2Config>,
    /// Gate analysed by `analyze` and `cz-verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SearchU1Config {
    pub omega_mhz: f64,
    /// Inclusive [low, high] range of Δ.
    pub delta_mhz: [f64; 2],
    /// Inclusive [low, high] range of V.
    pub v_mhz: [f64; 2],
    /// Rabi-cycle counts to scan.
    pub n: Vec<u32>,
    #[serde(default = "default_grid_step")]
    pub grid_step_mhz: f64,
    #[serde(default = "default_screen")]
    pub screen_cycles: f64,
    #[serde(default = "default_u1_e_ro")]
    pub max_e_ro: f64,
    #[serde(default = "default_u1_e_de")]
    pub max_e_de_ns: f64,
    #[serde(default = "default_residual")]
    pub max_residual: f64,
}

fn default_grid_step() -> f64 {
    0.05
}
fn default_screen() -> f64 {
    0.1
}
fn default_u1_e_ro() -> f64 {
    1e-7
}
fn default_u1_e_de() -> f64 {
    90.0
}
fn default_residual() -> f64 {
    1e-6
}

impl SearchU1Config {
    pub fn resolve(&self) -> Result<SearchU1, CliError> {
        let key = |k: &str| format!("search_u1.{k}");
        positive(self.omega_mhz, &key("omega_mhz"))?;
        positive(self.grid_step_mhz, &key("grid_step_mhz"))?;
        positive(self.screen_cycles, &key("screen_cycles"))?;
        if self.n.contains(&0) {
            return Err(CliError::config(key("n"), "cycle counts must be at least 1"));
        }
        for (name, r) in [("delta_mhz", self.delta_mhz), ("v_mhz", self.v_mhz)] {
            if !r.iter().all(|x| x.is_finite()) {
                return Err(CliError::config(key(name), "range bounds must be finite"));
            }
        }
        Ok(SearchU1 {
            omega: mhz(self.omega_mhz),
            delta_range: (mhz(self.delta_mhz[0]), mhz(self.delta_mhz[1])),
            v_range: (mhz(self.v_mhz[0]), mhz(self.v_mhz[1])),
            n_values: self.n.clone(),
            grid_step: mhz(self.grid_step_mhz),
            screen: self.screen_cycles,
            thresholds: ThresholdsU1 {
                max_e_ro: self.max_e_ro,
                max_e_de: ns(self.max_e_de_ns),
                max_residual: self.max_residual,
            },
            mode: Default::default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SearchU2Config {
    /// |Ω_t|, also the cap on |Ω_c|.
    pub omega_t_mhz: f64,
    /// (N_c, N_t) pairs to search.
    pub pairs: Vec<[u32; 2]>,
    /// Start centre.
    pub omega_c_mhz: f64,
    pub delta_c_mhz: f64,
    pub delta_t_mhz: f64,
    pub v_mhz: f64,
    /// Half-width of the random start box on every coordinate.
    #[serde(default = "default_spread")]
    pub spread_mhz: f64,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    /// Sign of β − α − γ ≈ ±π/2.
    #[serde(default = "default_sign")]
    pub sign: i8,
    /// `pedersen` or `weighted`.
    #[serde(default = "default_objective")]
    #[schemars(with = "String")]
    pub objective: ObjectiveU2,
    #[serde(default = "default_u2_e_ro")]
    pub max_e_ro: f64,
    #[serde(default = "default_u2_e_de")]
    pub max_e_de_ns: f64,
}

fn default_spread() -> f64 {
    0.02
}
fn default_starts() -> usize {
    8
}
fn default_sign() -> i8 {
    1
}
fn default_objective() -> ObjectiveU2 {
    ObjectiveU2::Pedersen
}
fn default_u2_e_ro() -> f64 {
    1e-5
}
fn default_u2_e_de() -> f64 {
    150.0
}

impl SearchU2Config {
    pub fn resolve(&self, seed: u64) -> Result<SearchU2, CliError> {
        let key = |k: &str| format!("search_u2.{k}");
        positive(self.omega_t_mhz, &key("omega_t_mhz"))?;
        if self.spread_mhz < 0.0 || !self.spread_mhz.is_finite() {
            return Err(CliError::config(key("spread_mhz"), "must be finite and non-negative"));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(CliError::config(key("sign"), "must be +1 or -1"));
        }
        if self.pairs.iter().any(|p| p.contains(&0)) {
            return Err(CliError::config(key("pairs"), "cycle counts must be at least 1"));
        }
        let center = [self.omega_c_mhz, self.delta_c_mhz, self.delta_t_mhz, self.v_mhz];
        Ok(SearchU2 {
            omega_cap: mhz(self.omega_t_mhz),
            n_pairs: self.pairs.iter().map(|p| (p[0], p[1])).collect(),
            center: center.map(mhz),
            spread: [mhz(self.spread_mhz); 4],
            n_starts: self.n_starts,
            seed,
            sign: self.sign,
            objective: self.objective,
            thresholds: ThresholdsU2 { max_e_ro: self.max_e_ro, max_e_de: ns(self.max_e_de_ns) },
            mode: Default::default(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// No decay, no edges, no leakage, no phase noise.
    Bare,
    /// 1.2 ms lifetime, 20 ns edges with re-tuned duration, leakage on.
    #[default]
    Table3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum DurationChoice {
    Design,
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LeakChoice {
    None,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorChoice {
    NonHermitian,
    Mcwf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TrapToml {
    pub waist_um: f64,
    pub wavelength_um: f64,
    pub depth_uk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BeamsToml {
    pub lambda1_nm: f64,
    pub lambda2_nm: f64,
    pub radius_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PhaseNoiseToml {
    pub freqs_hz: Vec<f64>,
    /// S_ν(f) in Hz²/Hz, one entry per frequency.
    pub s_nu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StepsToml {
    pub flat: usize,
    pub edge: usize,
}

/// A temperature sweep. Unset fields fall back to the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub preset: Preset,
    /// Gate to simulate; a U1 design. Defaults to the 4-cycle reference gate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    pub temperatures_uk: Vec<f64>,
    /// Any of `static`, `doppler_max`, `vdw_max`, `all_six`.
    #[serde(default = "default_drift_modes")]
    #[schemars(with = "Vec<String>")]
    pub drift_modes: Vec<DriftMode>,
    /// `centers`, `monte_carlo` or `three_point`.
    #[serde(default = "default_positions")]
    #[schemars(with = "String")]
    pub positions: PositionMode,
    /// Rydberg lifetime; 0 switches decay off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<DurationChoice>,
    /// Fixed gate duration; overrides `duration`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leak: Option<LeakChoice>,
    /// Use the enhanced reference spectrum.
    #[serde(default)]
    pub enhanced_phase_noise: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_noise: Option<PhaseNoiseToml>,
    /// C6/2π in THz·µm⁶; unset reproduces the design V at the nominal spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c6_thz_um6: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapToml>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beams: Option<BeamsToml>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<StepsToml>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorChoice,
    /// Trajectory sets per realization for the `mcwf` estimator.
    #[serde(default = "default_traj")]
    pub n_traj: usize,
    /// `full` or `stratified`.
    #[serde(default = "default_branches")]
    #[schemars(with = "String")]
    pub branches: BranchAveraging,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_tolerance: Option<f64>,
}

fn default_drift_modes() -> Vec<DriftMode> {
    vec![DriftMode::AllSix]
}
fn default_positions() -> PositionMode {
    PositionMode::MonteCarlo
}
fn default_samples() -> usize {
    100
}
fn default_estimator() -> EstimatorChoice {
    EstimatorChoice::NonHermitian
}
fn default_traj() -> usize {
    100
}
fn default_branches() -> BranchAveraging {
    BranchAveraging::Full
}
fn default_bootstrap() -> usize {
    2000
}

impl NoiseConfig {
    /// Scenario shared by every row of the sweep; temperature and drift mode
    /// are filled in per row.
    pub fn base_scenario(&self, seed: u64) -> Result<NoiseScenario, CliError> {
        let key = |k: &str| format!("noise.{k}");
        let mut s = match self.preset {
            Preset::Bare => NoiseScenario::default(),
            Preset::Table3 => NoiseScenario::table3(),
        };
        s.seed = seed;
        s.positions = self.positions;
        if let Some(t) = self.lifetime_us {
            non_negative(t, &key("lifetime_us"))?;
            s.lifetime = (t > 0.0).then(|| us(t));
        }
        if let Some(e) = self.edge_ns {
            non_negative(e, &key("edge_ns"))?;
            s.edge = ns(e);
        }
        if let Some(d) = self.duration {
            s.duration = match d {
                DurationChoice::Design => DurationRule::Design,
                DurationChoice::Optimized => DurationRule::Optimized,
            };
        }
        if let Some(t) = self.duration_ns {
            positive(t, &key("duration_ns"))?;
            s.duration = DurationRule::Fixed(ns(t));
        }
        if let Some(l) = self.leak {
            s.leak = match l {
                LeakChoice::None => LeakModel::None,
                LeakChoice::Reference => LeakModel::Reference,
            };
        }
        if self.enhanced_phase_noise && self.phase_noise.is_some() {
            return Err(CliError::config(key("phase_noise"), "conflicts with enhanced_phase_noise = true"));
        }
        if self.enhanced_phase_noise {
            s.phase_noise = Some(PhaseNoiseSpec::enhanced());
        }
        if let Some(p) = &self.phase_noise {
            let spec = PhaseNoiseSpec::new(p.freqs_hz.clone(), p.s_nu.clone())
                .map_err(|e| CliError::config(key("phase_noise"), e.to_string()))?;
            s.phase_noise = Some(spec);
        }
        if let Some(c) = self.c6_thz_um6 {
            positive(c, &key("c6_thz_um6"))?;
            s.c6 = Some(thz(c));
        }
        if let Some(l) = self.spacing_um {
            positive(l, &key("spacing_um"))?;
            s.spacing_um = l;
        }
        if let Some(t) = &self.trap {
            positive(t.waist_um, &key("trap.waist_um"))?;
            positive(t.wavelength_um, &key("trap.wavelength_um"))?;
            positive(t.depth_uk, &key("trap.depth_uk"))?;
            s.trap = TrapConfig { waist_um: t.waist_um, wavelength_um: t.wavelength_um, depth_k: microkelvin(t.depth_uk) };
        }
        if let Some(b) = &self.beams {
            positive(b.lambda1_nm, &key("beams.lambda1_nm"))?;
            positive(b.lambda2_nm, &key("beams.lambda2_nm"))?;
            positive(b.radius_um, &key("beams.radius_um"))?;
            s.beams = Beams { lambda1_um: b.lambda1_nm * 1e-3, lambda2_um: b.lambda2_nm * 1e-3, radius_um: b.radius_um };
        }
        if let Some(st) = &self.steps {
            s.steps = StepConfig { flat: st.flat, edge: st.edge };
        }
        for (i, &t) in self.temperatures_uk.iter().enumerate() {
            non_negative(t, &format!("noise.temperatures_uk[{i}]"))?;
        }
        s.validate().map_err(|e| CliError::config(key("*"), e.to_string()))?;
        Ok(s)
    }

    pub fn fidelity_options(&self) -> Result<FidelityOptions, CliError> {
        if self.n_samples == 0 {
            return Err(CliError::config("noise.n_samples", "must be at least 1"));
        }
        let estimator = match self.estimator {
            EstimatorChoice::NonHermitian => Estimator::NonHermitian,
            EstimatorChoice::Mcwf if self.n_traj == 0 => {
                return Err(CliError::config("noise.n_traj", "must be at least 1"));
            }
            EstimatorChoice::Mcwf => Estimator::Mcwf { n_traj: self.n_traj },
        };
        Ok(FidelityOptions {
            n_samples: self.n_samples,
            estimator,
            branches: self.branches,
            bootstrap: self.bootstrap,
            ci_tolerance: self.ci_tolerance,
            mode: Default::default(),
        })
    }
}

fn positive(x: f64, key: &str) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(key, format!("must be positive and finite, got {x}")))
    }
}

fn non_negative(x: f64, key: &str) -> Result<(), CliError> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(key, format!("must be non-negative and finite, got {x}")))
    }
}

/// Parses TOML, or the `config` block of a run manifest when the file is JSON.
pub fn parse(text: &str, json: bool) -> Result<RunConfig, CliError> {
    if json {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::config("<document>", e.to_string()))?;
        let body = match value.get("config") {
            Some(c) if value.get("schema_version").is_some() => c.clone(),
            _ => value,
        };
        serde_path_to_error::deserialize(body).map_err(|e| CliError::config(e.path().to_string(), e.inner().to_string()))
    } else {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::config("<document>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let msg = e.inner().message().to_string();
            CliError::config(e.path().to_string(), msg)
        })
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    parse(&text, json)
}

pub fn schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(RunConfig)).expect("schema serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_named() {
        let err = parse("[search_u1]\nomega_mhz = 10\nbogus = 1\n", false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn type_error_names_nested_key() {
        let text = "[search_u1]\nomega_mhz = \"ten\"\ndelta_mhz = [1, 2]\nv_mhz = [1, 2]\nn = [1]\n";
        let msg = parse(text, false).unwrap_err().to_string();
        assert!(msg.contains("search_u1.omega_mhz"), "{msg}");
    }

    #[test]
    fn units_convert_on_ingestion() {
        let text = "[search_u1]\nomega_mhz = 10\ndelta_mhz = [18, 21]\nv_mhz = [-37, -33]\nn = [4]\n";
        let s = parse(text, false).unwrap().search_u1.unwrap().resolve().unwrap();
        assert!((s.omega - 2.0 * std::f64::consts::PI * 1e7).abs() < 1e-6);
        assert!((s.thresholds.max_e_de - 90e-9).abs() < 1e-20);
    }

    #[test]
    fn semantic_error_names_key() {
        let text = "[noise]\ntemperatures_uk = [1, -2]\n";
        let cfg = parse(text, false).unwrap();
        let msg = cfg.noise.unwrap().base_scenario(1).unwrap_err().to_string();
        assert!(msg.contains("noise.temperatures_uk[1]"), "{msg}");
    }

    #[test]
    fn manifest_config_block_is_accepted() {
        let json = r#"{"schema_version": 1, "config": {"seed": 9}}"#;
        assert_eq!(parse(json, true).unwrap().seed, Some(9));
    }

    #[test]
    fn round_trip_through_json() {
        let text = "seed = 3\n[noise]\ntemperatures_uk = [1, 10]\ndrift_modes = [\"doppler_max\"]\nedge_ns = 20\n";
        let cfg = parse(text, false).unwrap();
        let back = parse(&serde_json::to_string(&cfg).unwrap(), true).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn schema_lists_sections() {
        let s = schema().to_string();
        assert!(s.contains("search_u1") && s.contains("temperatures_uk"));
    }
}
