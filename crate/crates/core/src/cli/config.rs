//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! [plant]
//! k_m = 25.0          # N/A
//! [controller]
//! mode = 2dof
//! [scenario]
//! setpoint = 0:170 60:151
//! ```
//!
//! Three sections: `plant` (every `CoolerParams` field, SI), `controller`
//! and `scenario`. Profiles are whitespace-separated `t:value` pairs. Keys
//! not listed here are rejected with their line number.

use std::fmt::Write as _;

use crate::control::{LoopConfig, LoopMode};
use crate::error::{Error, Result};
use crate::plant::CoolerParams;
use crate::sim::{InitialState, Profile, Scenario};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    pub plant: CoolerParams,
    pub controller: LoopConfig,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Plant,
    Controller,
    Scenario,
}

const CONTROLLER_KEYS: &[&str] = &[
    "mode",
    "k_p",
    "k_i",
    "ts",
    "u_min",
    "u_max",
    "anti_windup",
    "a",
    "error_scale",
];

const SCENARIO_KEYS: &[&str] = &[
    "duration",
    "sample_period",
    "setpoint",
    "load",
    "current",
    "initial",
    "initial_current",
];

/// Parses `text` over the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    cfg.apply(text)?;
    cfg.validate()?;
    Ok(cfg)
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.controller.validate()?;
        self.scenario.validate()
    }

    /// Overlays the keys present in `text`; anything absent keeps its value.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        let mut section = None;
        let mut seen: Vec<(Section, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| Error::Parse { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(name) = body.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{body}`")))?
                    .trim();
                section = Some(match name {
                    "plant" => Section::Plant,
                    "controller" => Section::Controller,
                    "scenario" => Section::Scenario,
                    _ => return Err(err(format!("unknown section `[{name}]`"))),
                });
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| err(format!("`{key}` appears before any section")))?;
            if seen.iter().any(|(s, k)| *s == sec && k == key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push((sec, key.to_string()));

            match sec {
                Section::Plant => {
                    if !CoolerParams::KEYS.contains(&key) {
                        return Err(err(format!("unknown key `{key}` in [plant]")));
                    }
                    let v = number(value).map_err(err)?;
                    self.plant.set(key, v)?;
                }
                Section::Controller => {
                    if !CONTROLLER_KEYS.contains(&key) {
                        return Err(err(format!("unknown key `{key}` in [controller]")));
                    }
                    self.set_controller(key, value).map_err(err)?;
                }
                Section::Scenario => {
                    if !SCENARIO_KEYS.contains(&key) {
                        return Err(err(format!("unknown key `{key}` in [scenario]")));
                    }
                    self.set_scenario(key, value).map_err(err)?;
                }
            }
        }
        Ok(())
    }

    fn set_controller(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let c = &mut self.controller;
        match key {
            "mode" => {
                c.mode = match value {
                    "1dof" => LoopMode::OneDof,
                    "2dof" => LoopMode::TwoDof,
                    _ => return Err(format!("mode must be `1dof` or `2dof`, got `{value}`")),
                }
            }
            "anti_windup" => {
                c.pi.anti_windup = value
                    .parse()
                    .map_err(|_| format!("anti_windup must be `true` or `false`, got `{value}`"))?
            }
            "k_p" => c.pi.k_p = number(value)?,
            "k_i" => c.pi.k_i = number(value)?,
            "ts" => c.pi.ts = number(value)?,
            "u_min" => c.pi.u_min = number(value)?,
            "u_max" => c.pi.u_max = number(value)?,
            "a" => c.filter.a = number(value)?,
            "error_scale" => c.error_scale = number(value)?,
            _ => unreachable!("controller keys are checked by the caller"),
        }
        Ok(())
    }

    fn set_scenario(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let s = &mut self.scenario;
        match key {
            "duration" => s.duration = number(value)?,
            "sample_period" => s.sample_period = number(value)?,
            "initial_current" => s.initial_current = number(value)?,
            "setpoint" => s.sp_profile = Some(profile(value)?),
            "current" => s.current_profile = Some(profile(value)?),
            "load" => s.load_profile = profile(value)?,
            "initial" => {
                s.initial = if value == "ambient" {
                    InitialState::Ambient
                } else if let Some(i) = value.strip_prefix("steady:") {
                    InitialState::Steady { i_amp: number(i)? }
                } else {
                    return Err(format!(
                        "initial must be `ambient` or `steady:<A>`, got `{value}`"
                    ));
                }
            }
            _ => unreachable!("scenario keys are checked by the caller"),
        }
        Ok(())
    }

    /// Writes every value back in the same format; `parse_config` of the
    /// output reproduces `self` exactly. Fails for an explicit state as the
    /// initial condition, which has no text form.
    pub fn serialize(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str("[plant]\n");
        for key in CoolerParams::KEYS {
            let v = self.plant.get(key).unwrap_or(f64::NAN);
            let _ = writeln!(out, "{key} = {v}");
        }

        let c = &self.controller;
        let mode = match c.mode {
            LoopMode::OneDof => "1dof",
            LoopMode::TwoDof => "2dof",
        };
        out.push_str("\n[controller]\n");
        let _ = writeln!(out, "mode = {mode}");
        for (k, v) in [
            ("k_p", c.pi.k_p),
            ("k_i", c.pi.k_i),
            ("ts", c.pi.ts),
            ("u_min", c.pi.u_min),
            ("u_max", c.pi.u_max),
        ] {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "anti_windup = {}", c.pi.anti_windup);
        let _ = writeln!(out, "a = {}", c.filter.a);
        let _ = writeln!(out, "error_scale = {}", c.error_scale);

        let s = &self.scenario;
        out.push_str("\n[scenario]\n");
        let _ = writeln!(out, "duration = {}", s.duration);
        let _ = writeln!(out, "sample_period = {}", s.sample_period);
        if let Some(sp) = &s.sp_profile {
            let _ = writeln!(out, "setpoint = {}", format_profile(sp));
        }
        let _ = writeln!(out, "load = {}", format_profile(&s.load_profile));
        if let Some(i) = &s.current_profile {
            let _ = writeln!(out, "current = {}", format_profile(i));
        }
        let initial = match &s.initial {
            InitialState::Ambient => "ambient".to_string(),
            InitialState::Steady { i_amp } => format!("steady:{i_amp}"),
            InitialState::State(_) => {
                return Err(Error::invalid(
                    "initial",
                    "an explicit plant state has no text form",
                ))
            }
        };
        let _ = writeln!(out, "initial = {initial}");
        let _ = writeln!(out, "initial_current = {}", s.initial_current);
        Ok(out)
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn profile(s: &str) -> std::result::Result<Profile, String> {
    let points = s
        .split_whitespace()
        .map(|pair| {
            let (t, v) = pair
                .split_once(':')
                .ok_or_else(|| format!("profile entry `{pair}` is not `t:value`"))?;
            Ok((number(t)?, number(v)?))
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    Profile::new(points).map_err(|e| match e {
        Error::Domain(msg) => msg,
        other => other.to_string(),
    })
}

fn format_profile(p: &Profile) -> String {
    p.points()
        .iter()
        .map(|(t, v)| format!("{t}:{v}"))
        .collect::<Vec<_>>()
        .join(" ")
}
