//! Line-oriented `section.key = value` configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use qlink::scenario::{FluxModel, ScenarioParams};
use qlink::units::ShapeKind;

use crate::CliError;

/// Alternate spellings accepted for canonical keys.
const ALIASES: &[(&str, &str)] = &[("pump_power_mw", "source.pump_power_mw")];

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// Resolved key/value configuration for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    preset: String,
    values: BTreeMap<String, String>,
    overridden: BTreeSet<String>,
}

fn scenario_entries(p: &ScenarioParams) -> Vec<(&'static str, String)> {
    let s = |v: &dyn Display| v.to_string();
    vec![
        ("source.brightness_per_mw", s(&p.brightness_per_mw)),
        ("source.pump_power_mw", s(&p.pump_power_mw)),
        ("source.pump_wavelength_nm", s(&p.pump_wavelength_nm)),
        ("source.spectrum_shape", s(&p.spectrum_shape)),
        ("source.spectrum_fwhm_nm", s(&p.spectrum_fwhm_nm)),
        ("source.intrinsic_visibility", s(&p.intrinsic_visibility)),
        ("channel_plan.num_pairs", s(&p.num_pairs)),
        ("channel_plan.bandwidth_pm", s(&p.bandwidth_pm)),
        ("channel_plan.spacing_pm", s(&p.spacing_pm)),
        ("channel_plan.span_nm", p.span_nm.map_or_else(|| "none".to_string(), |v| v.to_string())),
        ("channel_plan.vbg_efficiency", s(&p.vbg_efficiency)),
        ("channel_plan.output_coupling", s(&p.output_coupling)),
        ("channel_plan.flux_model", s(&p.flux_model)),
        ("arm.optics", s(&p.optics)),
        ("arm.fiber_coupling", s(&p.fiber_coupling)),
        ("arm.demux_insertion", s(&p.demux_insertion)),
        ("link.dual_db", s(&p.dual_db)),
        ("detector.efficiency", s(&p.detector_efficiency)),
        ("detector.jitter_sigma_ns", s(&p.jitter_sigma_ns)),
        ("detector.jitter_is_fwhm", "false".to_string()),
        ("detector.dead_time_ns", s(&p.dead_time_ns)),
        ("detector.dark_rate", s(&p.dark_rate)),
        ("coincidence.window_ns", s(&p.window_ns)),
        ("key.sifting", s(&p.sifting)),
        ("key.f_ec", s(&p.ec_inefficiency)),
        ("nodemux.pairing_success", s(&p.nodemux_pairing)),
    ]
}

const RUN_DEFAULTS: &[(&str, &str)] = &[
    ("sweep.axis", "pump_power"),
    ("sweep.lo", "1"),
    ("sweep.hi", "30"),
    ("sweep.steps", "30"),
    ("sweep.scale", "linear"),
    ("sweep.axis2", "none"),
    ("sweep.lo2", "0.1"),
    ("sweep.hi2", "5"),
    ("sweep.steps2", "50"),
    ("sweep.scale2", "linear"),
    ("sweep.toggles", "both"),
    ("optimize.power_lo", "0.01"),
    ("optimize.power_hi", "30"),
    ("optimize.power_steps", "100"),
    ("optimize.power_scale", "log"),
    ("optimize.window_lo", "0.1"),
    ("optimize.window_hi", "5"),
    ("optimize.window_steps", "100"),
    ("optimize.window_scale", "linear"),
    ("optimize.toggles", "both"),
    ("linkbudget.lo", "20"),
    ("linkbudget.hi", "80"),
    ("linkbudget.steps", "61"),
    ("mc.duration_s", "1"),
    ("mc.seed", "0"),
    ("mc.channel_pair", "all"),
    ("mc.offset_ns", "auto"),
    ("mc.dump", "none"),
];

/// Splits `key = value` lines; `#` starts a comment.
pub fn parse_lines(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, got `{}`", n + 1, raw.trim())));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key or value", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Parses a configuration file on top of `preset`.
pub fn parse_config(text: &str, preset: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(preset)?;
    for (k, v) in parse_lines(text)? {
        cfg.set(&k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `key=value` from the command line.
pub fn parse_assignment(s: &str) -> Result<(String, String), CliError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Config(format!("expected key=value, got `{s}`"))),
    }
}

impl RunConfig {
    pub fn new(preset: &str) -> Result<Self, CliError> {
        let params = ScenarioParams::named(preset).map_err(|e| CliError::Config(e.to_string()))?;
        let mut values: BTreeMap<String, String> =
            scenario_entries(&params).into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        values.extend(RUN_DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())));
        Ok(Self {
            preset: preset.to_string(),
            values,
            overridden: BTreeSet::new(),
        })
    }

    pub fn preset(&self) -> &str {
        &self.preset
    }

    pub fn canonical(key: &str) -> &str {
        ALIASES.iter().find(|(a, _)| *a == key).map_or(key, |(_, c)| c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = Self::canonical(key);
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                self.overridden.insert(key.to_string());
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown configuration key `{key}`"))),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_overridden(&self, key: &str) -> bool {
        self.overridden.contains(key)
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("key {key} is registered"))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| CliError::Config(format!("{key}: cannot parse `{raw}` as {}", std::any::type_name::<T>())))
    }

    /// `none` maps to `None`.
    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        if self.raw(key) == "none" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn log_defaults(&self) {
        for (k, v) in self.entries() {
            if !self.is_overridden(k) {
                log::info!("default {k} = {v} (preset {})", self.preset);
            }
        }
    }

    /// SHA-256 over the resolved configuration, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.preset.as_bytes());
        for (k, v) in self.entries() {
            h.update(b"\n");
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn scenario_params(&self) -> Result<ScenarioParams, CliError> {
        let jitter: f64 = self.get("detector.jitter_sigma_ns")?;
        let jitter_sigma_ns = if self.get::<bool>("detector.jitter_is_fwhm")? {
            jitter / FWHM_PER_SIGMA
        } else {
            jitter
        };
        Ok(ScenarioParams {
            brightness_per_mw: self.get("source.brightness_per_mw")?,
            pump_power_mw: self.get("source.pump_power_mw")?,
            pump_wavelength_nm: self.get("source.pump_wavelength_nm")?,
            spectrum_shape: self.get::<ShapeKind>("source.spectrum_shape")?,
            spectrum_fwhm_nm: self.get("source.spectrum_fwhm_nm")?,
            intrinsic_visibility: self.get("source.intrinsic_visibility")?,
            num_pairs: self.get("channel_plan.num_pairs")?,
            bandwidth_pm: self.get("channel_plan.bandwidth_pm")?,
            spacing_pm: self.get("channel_plan.spacing_pm")?,
            span_nm: self.get_opt("channel_plan.span_nm")?,
            vbg_efficiency: self.get("channel_plan.vbg_efficiency")?,
            output_coupling: self.get("channel_plan.output_coupling")?,
            flux_model: self.get::<FluxModel>("channel_plan.flux_model")?,
            optics: self.get("arm.optics")?,
            fiber_coupling: self.get("arm.fiber_coupling")?,
            demux_insertion: self.get("arm.demux_insertion")?,
            dual_db: self.get("link.dual_db")?,
            detector_efficiency: self.get("detector.efficiency")?,
            jitter_sigma_ns,
            dead_time_ns: self.get("detector.dead_time_ns")?,
            dark_rate: self.get("detector.dark_rate")?,
            window_ns: self.get("coincidence.window_ns")?,
            sifting: self.get("key.sifting")?,
            ec_inefficiency: self.get("key.f_ec")?,
            nodemux_pairing: self.get("nodemux.pairing_success")?,
        })
    }

    /// Type-checks every key and the scenario invariants.
    pub fn validate(&self) -> Result<(), CliError> {
        self.scenario_params()?
            .build()
            .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;
        for key in ["sweep.lo", "sweep.hi", "sweep.lo2", "sweep.hi2", "optimize.power_lo", "optimize.power_hi"] {
            self.get::<f64>(key)?;
        }
        for key in ["optimize.window_lo", "optimize.window_hi", "linkbudget.lo", "linkbudget.hi", "mc.duration_s"] {
            self.get::<f64>(key)?;
        }
        for key in ["sweep.steps", "sweep.steps2", "optimize.power_steps", "optimize.window_steps", "linkbudget.steps"] {
            self.get::<usize>(key)?;
        }
        self.get::<u64>("mc.seed")?;
        if self.raw("mc.channel_pair") != "all" {
            self.get::<usize>("mc.channel_pair")?;
        }
        if self.raw("mc.offset_ns") != "auto" {
            self.get::<f64>("mc.offset_ns")?;
        }
        Ok(())
    }
}
