//! Scenario files: one experiment description per file.
//!
//! The format is TOML with the sections below; `[grid]` and `[run]` are
//! required, everything else falls back to documented defaults. Frequencies
//! in scenario files are plain Hz (converted to angular units internally),
//! dB values are relative to true shot noise, and fiber loss is given as the
//! total propagation loss fraction over the fiber length.
//!
//! ```toml
//! [grid]
//! spacing_hz = 1.0e9        # bin spacing
//! half_bins = 64            # bins per branch
//!
//! [run]
//! directive = "phase-match-spectrum"
//! rng_seed = 1
//! output = "spectrum"
//! ```
//!
//! Section and key reference: see the repository README. Parsing validates
//! the whole file and reports every problem at once, including unknown keys
//! (with the nearest valid key named) and missing required sections.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// All problems found while parsing and validating a scenario file.
#[derive(Debug, Clone)]
pub struct ScenarioErrors {
    pub issues: Vec<String>,
}

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "scenario validation failed with {} issue(s):",
            self.issues.len()
        )?;
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ScenarioErrors {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    /// Pump carrier frequency (Hz).
    #[serde(default = "default_center_hz")]
    pub center_hz: f64,
    /// Bin spacing (Hz).
    pub spacing_hz: f64,
    /// Bins per branch.
    pub half_bins: usize,
}

fn default_center_hz() -> f64 {
    1.934e14
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FopaSection {
    pub beta2_s2_per_m: f64,
    pub beta4_s4_per_m: f64,
    pub gamma_per_w_m: f64,
    pub pump_peak_power_w: f64,
    pub length_m: f64,
    /// Total propagation loss over the fiber, as a fraction in [0, 1).
    pub loss_total: f64,
    pub raman_n: f64,
    pub segments: usize,
}

impl Default for FopaSection {
    fn default() -> Self {
        FopaSection {
            beta2_s2_per_m: -21.7e-27,
            beta4_s4_per_m: 0.0,
            gamma_per_w_m: 1.3e-3,
            pump_peak_power_w: 0.8443,
            length_m: 1500.0,
            loss_total: 0.0,
            raman_n: 0.0,
            segments: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Lumped,
    Distributed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    /// Parametric-amplifier closed form from the `[fopa]` parameters.
    Fopa,
    /// Flat spectrum of magnitude `flat_xi`, zero phase.
    Flat,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub spectrum: SpectrumKind,
    pub flat_xi: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: ModelKind::Lumped,
            spectrum: SpectrumKind::Fopa,
            flat_xi: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKindKey {
    Coherent,
    NoiseModulated,
    FilteredAse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedSection {
    pub kind: SeedKindKey,
    /// Seed carrier detuning from the pump (Hz). 0 = middle of the branch.
    pub center_detuning_hz: f64,
    pub coherence_control_rate_hz: f64,
    pub random_pm_bandwidth_hz: f64,
    pub sine_pm_freq_hz: f64,
    pub ou_depth_rad: f64,
    pub sine_depth_rad: f64,
    pub dither_depth_rad: f64,
    pub ase_bandwidth_hz: f64,
}

impl Default for SeedSection {
    fn default() -> Self {
        SeedSection {
            kind: SeedKindKey::Coherent,
            center_detuning_hz: 0.0,
            coherence_control_rate_hz: 40.0e6,
            random_pm_bandwidth_hz: 300.0e6,
            sine_pm_freq_hz: 1.0e9,
            ou_depth_rad: 0.3,
            sine_depth_rad: 0.5,
            dither_depth_rad: 0.1,
            ase_bandwidth_hz: 2.0e9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoSection {
    /// FWM gain used to synthesize the LO.
    pub gain: f64,
    /// Apparent shot noise above true shot noise (dB, >= 0).
    pub excess_rin_db: f64,
}

impl Default for LoSection {
    fn default() -> Self {
        LoSection {
            gain: 100.0,
            excess_rin_db: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainSection {
    pub efficiencies: Vec<f64>,
    /// Detector dark noise relative to true shot noise (dB);
    /// defaults to no dark noise.
    pub dark_db: f64,
    pub cmrr_db: f64,
}

impl Default for ChainSection {
    fn default() -> Self {
        ChainSection {
            efficiencies: Vec::new(),
            dark_db: f64::NEG_INFINITY,
            cmrr_db: f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directive {
    Single,
    PumpSweep,
    ModFreqSweep,
    Herald,
    CalibrateRaman,
    CalibrateDetuning,
    PhaseMatchSpectrum,
    NoiseBudget,
}

impl Directive {
    pub fn name(&self) -> &'static str {
        match self {
            Directive::Single => "single",
            Directive::PumpSweep => "pump-sweep",
            Directive::ModFreqSweep => "mod-freq-sweep",
            Directive::Herald => "herald",
            Directive::CalibrateRaman => "calibrate-raman",
            Directive::CalibrateDetuning => "calibrate-detuning",
            Directive::PhaseMatchSpectrum => "phase-match-spectrum",
            Directive::NoiseBudget => "noise-budget",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub directive: Directive,
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    /// Output stem; artifacts are `<out>/<stem>.csv` and
    /// `<out>/<stem>_summary.txt`.
    pub output: String,
    #[serde(default)]
    pub pump_powers_w: Vec<f64>,
    #[serde(default)]
    pub mod_freqs_hz: Vec<f64>,
    #[serde(default = "default_seed_samples")]
    pub seed_samples: usize,
    #[serde(default = "default_gamma_samples")]
    pub gamma_samples: usize,
    #[serde(default = "default_one")]
    pub herald_efficiency: f64,
    #[serde(default)]
    pub target_squeeze_db: f64,
    #[serde(default)]
    pub target_antisqueeze_db: f64,
    #[serde(default)]
    pub target_peak_detuning_hz: f64,
    #[serde(default)]
    pub baseline_db: f64,
    #[serde(default)]
    pub baseline_dark_db: f64,
    #[serde(default)]
    pub new_dark_db: f64,
    #[serde(default)]
    pub added_rin_db: f64,
}

fn default_seed() -> u64 {
    1
}

fn default_seed_samples() -> usize {
    1
}

fn default_gamma_samples() -> usize {
    10_000
}

fn default_one() -> f64 {
    1.0
}

/// A fully validated experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub grid: GridSection,
    #[serde(default)]
    pub fopa: FopaSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub seed: SeedSection,
    #[serde(default)]
    pub lo: LoSection,
    #[serde(default)]
    pub chain: ChainSection,
    pub run: RunSection,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["center_hz", "spacing_hz", "half_bins"]),
    (
        "fopa",
        &[
            "beta2_s2_per_m",
            "beta4_s4_per_m",
            "gamma_per_w_m",
            "pump_peak_power_w",
            "length_m",
            "loss_total",
            "raman_n",
            "segments",
        ],
    ),
    ("model", &["kind", "spectrum", "flat_xi"]),
    (
        "seed",
        &[
            "kind",
            "center_detuning_hz",
            "coherence_control_rate_hz",
            "random_pm_bandwidth_hz",
            "sine_pm_freq_hz",
            "ou_depth_rad",
            "sine_depth_rad",
            "dither_depth_rad",
            "ase_bandwidth_hz",
        ],
    ),
    ("lo", &["gain", "excess_rin_db"]),
    ("chain", &["efficiencies", "dark_db", "cmrr_db"]),
    (
        "run",
        &[
            "directive",
            "rng_seed",
            "output",
            "pump_powers_w",
            "mod_freqs_hz",
            "seed_samples",
            "gamma_samples",
            "herald_efficiency",
            "target_squeeze_db",
            "target_antisqueeze_db",
            "target_peak_detuning_hz",
            "baseline_db",
            "baseline_dark_db",
            "new_dark_db",
            "added_rin_db",
        ],
    ),
];

fn nearest(candidates: &[&str], key: &str) -> String {
    candidates
        .iter()
        .min_by_key(|c| strsim::levenshtein(c, key))
        .map(|c| c.to_string())
        .unwrap_or_default()
}

/// Check the raw TOML table against the schema: unknown sections/keys and
/// missing required sections, with nearest-key suggestions.
fn schema_issues(table: &toml::Table) -> Vec<String> {
    let mut issues = Vec::new();
    let section_names: Vec<&str> = SECTIONS.iter().map(|(n, _)| *n).collect();
    for (name, value) in table.iter() {
        match SECTIONS.iter().find(|(n, _)| n == name) {
            None => issues.push(format!(
                "unknown section [{name}]; nearest valid section is [{}]",
                nearest(&section_names, name)
            )),
            Some((section, keys)) => {
                if let Some(sub) = value.as_table() {
                    for key in sub.keys() {
                        if !keys.contains(&key.as_str()) {
                            issues.push(format!(
                                "unknown key `{key}` in [{section}]; nearest valid key is `{}`",
                                nearest(keys, key)
                            ));
                        }
                    }
                } else {
                    issues.push(format!("[{name}] must be a table"));
                }
            }
        }
    }
    for required in ["grid", "run"] {
        if !table.contains_key(required) {
            issues.push(format!("missing required section [{required}]"));
        }
    }
    issues
}

fn semantic_issues(sc: &Scenario) -> Vec<String> {
    let mut issues = Vec::new();

    if !(sc.grid.spacing_hz > 0.0) {
        issues.push(format!(
            "grid.spacing_hz = {} violates the positive-spacing invariant",
            sc.grid.spacing_hz
        ));
    }
    if sc.grid.half_bins == 0 {
        issues.push("grid.half_bins must be at least 1".into());
    }
    if !(sc.fopa.length_m > 0.0) {
        issues.push("fopa.length_m must be positive".into());
    }
    if sc.fopa.segments == 0 {
        issues.push("fopa.segments must be at least 1".into());
    }
    if sc.fopa.pump_peak_power_w < 0.0 {
        issues.push("fopa.pump_peak_power_w must be non-negative".into());
    }
    if !(0.0..1.0).contains(&sc.fopa.loss_total) {
        issues.push(format!(
            "fopa.loss_total = {} must lie in [0, 1)",
            sc.fopa.loss_total
        ));
    }
    if sc.fopa.raman_n < 0.0 {
        issues.push("fopa.raman_n must be non-negative".into());
    }
    if sc.model.spectrum == SpectrumKind::Flat && sc.model.flat_xi < 0.0 {
        issues.push("model.flat_xi must be non-negative".into());
    }
    if sc.seed.center_detuning_hz < 0.0 {
        issues.push("seed.center_detuning_hz must be non-negative".into());
    }
    if sc.lo.gain < 1.0 {
        issues.push(format!("lo.gain = {} must be at least 1", sc.lo.gain));
    }
    if sc.lo.excess_rin_db < 0.0 {
        issues.push("lo.excess_rin_db must be non-negative".into());
    }
    for (i, eff) in sc.chain.efficiencies.iter().enumerate() {
        if !(*eff > 0.0 && *eff <= 1.0) {
            issues.push(format!(
                "chain.efficiencies[{i}] = {eff} violates the (0, 1] efficiency invariant"
            ));
        }
    }
    if sc.run.output.is_empty() {
        issues.push("run.output must not be empty".into());
    }
    if sc.run.seed_samples == 0 {
        issues.push("run.seed_samples must be at least 1".into());
    }
    if !(sc.run.herald_efficiency > 0.0 && sc.run.herald_efficiency <= 1.0) {
        issues.push("run.herald_efficiency must lie in (0, 1]".into());
    }
    match sc.run.directive {
        Directive::PumpSweep => {
            if sc.run.pump_powers_w.is_empty() {
                issues.push("pump-sweep requires run.pump_powers_w".into());
            }
            if sc.model.spectrum != SpectrumKind::Fopa {
                issues.push("pump-sweep requires model.spectrum = \"fopa\"".into());
            }
        }
        Directive::ModFreqSweep => {
            if sc.run.mod_freqs_hz.is_empty() {
                issues.push("mod-freq-sweep requires run.mod_freqs_hz".into());
            }
            if sc.seed.kind != SeedKindKey::NoiseModulated {
                issues.push("mod-freq-sweep requires seed.kind = \"noise_modulated\"".into());
            }
        }
        Directive::Herald => {
            if sc.run.gamma_samples == 0 {
                issues.push("herald requires run.gamma_samples >= 1".into());
            }
        }
        Directive::CalibrateRaman => {
            if sc.run.target_squeeze_db <= 0.0 || sc.run.target_antisqueeze_db <= 0.0 {
                issues.push(
                    "calibrate-raman requires positive run.target_squeeze_db and run.target_antisqueeze_db"
                        .into(),
                );
            }
        }
        Directive::CalibrateDetuning => {
            if sc.run.target_peak_detuning_hz <= 0.0 {
                issues
                    .push("calibrate-detuning requires positive run.target_peak_detuning_hz".into());
            }
        }
        Directive::NoiseBudget => {
            if sc.run.added_rin_db < 0.0 {
                issues.push("noise-budget requires run.added_rin_db >= 0".into());
            }
        }
        Directive::Single | Directive::PhaseMatchSpectrum => {}
    }
    issues
}

/// Parse and validate a scenario file, reporting every issue found.
pub fn parse_scenario(text: &str) -> std::result::Result<Scenario, ScenarioErrors> {
    let table: toml::Table = text.parse().map_err(|e| ScenarioErrors {
        issues: vec![format!("TOML syntax error: {e}")],
    })?;
    let mut issues = schema_issues(&table);
    match table.try_into::<Scenario>() {
        Ok(sc) => {
            issues.extend(semantic_issues(&sc));
            if issues.is_empty() {
                Ok(sc)
            } else {
                Err(ScenarioErrors { issues })
            }
        }
        Err(e) => {
            issues.push(format!("deserialization error: {e}"));
            Err(ScenarioErrors { issues })
        }
    }
}

/// Serialize a scenario back to TOML (all defaults materialized).
pub fn to_toml(sc: &Scenario) -> Result<String> {
    toml::to_string(sc).map_err(|e| Error::Internal(format!("scenario serialization failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [grid]
        spacing_hz = 1.0e9
        half_bins = 8

        [run]
        directive = "phase-match-spectrum"
        output = "spectrum"
    "#;

    #[test]
    fn minimal_scenario_fills_defaults() {
        let sc = parse_scenario(MINIMAL).unwrap();
        assert_eq!(sc.grid.center_hz, 1.934e14);
        assert_eq!(sc.fopa.segments, 64);
        assert_eq!(sc.model.kind, ModelKind::Lumped);
        assert_eq!(sc.run.rng_seed, 1);
        assert_eq!(sc.lo.gain, 100.0);
    }

    #[test]
    fn bad_efficiency_cites_the_chain_invariant() {
        let text = format!("{MINIMAL}\n[chain]\nefficiencies = [0.9, 1.2]\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err
            .issues
            .iter()
            .any(|i| i.contains("efficiencies[1]") && i.contains("(0, 1] efficiency invariant")));
    }

    #[test]
    fn unknown_key_names_nearest_valid_key() {
        let text = format!("{MINIMAL}\n[lo]\ngian = 10.0\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(
            err.issues
                .iter()
                .any(|i| i.contains("`gian`") && i.contains("`gain`")),
            "{err}"
        );
    }

    #[test]
    fn missing_section_is_named() {
        let err = parse_scenario("[grid]\nspacing_hz = 1.0e9\nhalf_bins = 4\n").unwrap_err();
        assert!(err.issues.iter().any(|i| i.contains("[run]")));
    }

    #[test]
    fn multiple_issues_are_all_reported() {
        let text = r#"
            [grid]
            spacing_hz = -1.0
            half_bins = 0

            [chain]
            efficiencies = [2.0]

            [run]
            directive = "pump-sweep"
            output = ""
        "#;
        let err = parse_scenario(text).unwrap_err();
        assert!(err.issues.len() >= 5, "{err}");
    }

    #[test]
    fn roundtrip_is_lossless() {
        let sc = parse_scenario(MINIMAL).unwrap();
        let text = to_toml(&sc).unwrap();
        let back = parse_scenario(&text).unwrap();
        assert_eq!(sc, back);
    }
}
