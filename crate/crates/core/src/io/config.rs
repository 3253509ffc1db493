//! Sectioned run configuration (TOML syntax).
//!
//! Every key has a default; unknown keys, type mismatches and constraint
//! violations are all collected and reported with line numbers.

use std::fmt;

use serde::{Deserialize, Serialize};
use toml::de::DeTable;
use toml::Value;

use crate::bpm::{Absorber, Perturbation};
use crate::experiments::{Setup, YoungConfig};
use crate::medium::{MediumParams, WaveParams};
use crate::torus::{CurvatureRange, GridSpec, ModePolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dz: f64,
    pub z_end: f64,
    pub record_every: usize,
    pub absorber: bool,
    pub absorber_strength: f64,
    pub absorber_width: Option<f64>,
    pub profile_dr: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            nx: 128,
            ny: 128,
            dx: 0.5,
            dz: 0.2,
            z_end: 200.0,
            record_every: 10,
            absorber: true,
            absorber_strength: 0.5,
            absorber_width: None,
            profile_dr: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub e0: f64,
    pub seed: u64,
    pub perturbation: String,
    pub level: f64,
    pub separation: f64,
    pub relative_phase: f64,
    pub crit_e_min: f64,
    pub crit_e_max: f64,
    pub crit_count: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            e0: 1.0,
            seed: 0,
            perturbation: "none".into(),
            level: 0.0,
            separation: 16.0,
            relative_phase: 0.0,
            crit_e_min: 0.05,
            crit_e_max: 2.0,
            crit_count: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSection {
    pub filament_x: f64,
    pub hole1_x: f64,
    pub hole2_x: f64,
    pub hole_radius: f64,
    pub screen_z: f64,
    pub hole2_transmission: f64,
    pub randomize: bool,
    pub realizations: usize,
    pub significance: f64,
    pub window: Option<f64>,
}

impl Default for MaskSection {
    fn default() -> Self {
        let y = YoungConfig::default();
        Self {
            filament_x: y.filament_x,
            hole1_x: y.hole1_x,
            hole2_x: y.hole2_x,
            hole_radius: y.hole_radius,
            screen_z: y.screen_z,
            hole2_transmission: y.hole2_transmission,
            randomize: false,
            realizations: y.realizations,
            significance: y.significance,
            window: y.window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSection {
    pub c_min: f64,
    /// Defaults to `0.9 / r_core`.
    pub c_max: Option<f64>,
    pub count: usize,
    pub n_r: usize,
    pub n_theta: usize,
    pub core_fraction: f64,
    pub mu1_values: Vec<f64>,
    pub u_sat_values: Vec<f64>,
    /// Loop radius quantized when the scan has no stable fixed point.
    pub r0: Option<f64>,
    pub policy: String,
    pub delta: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            c_min: 0.0,
            c_max: None,
            count: 41,
            n_r: g.n_r,
            n_theta: g.n_theta,
            core_fraction: g.core_fraction,
            mu1_values: vec![0.0, 1.0, 10.0, 100.0],
            u_sat_values: vec![0.1, 1.0, 10.0],
            r0: None,
            policy: "nearest".into(),
            delta: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSection {
    pub k0: f64,
}

impl Default for WaveSection {
    fn default() -> Self {
        Self { k0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub medium: MediumParams,
    pub wave: WaveSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub mask: MaskSection,
    pub scan: ScanSection,
}

const PERTURBATIONS: &[&str] = &["none", "symmetric-ring", "asymmetric-tilt", "noise"];
const POLICIES: &[&str] = &["nearest", "all-within"];

enum Slot<'a> {
    F64(&'a mut f64),
    OptF64(&'a mut Option<f64>),
    Usize(&'a mut usize),
    U64(&'a mut u64),
    Bool(&'a mut bool),
    Choice(&'a mut String, &'static [&'static str]),
    F64List(&'a mut Vec<f64>),
}

impl RunConfig {
    fn slots(&mut self) -> Vec<(&'static str, &'static str, Slot<'_>)> {
        use Slot::*;
        let m = &mut self.medium;
        let g = &mut self.grid;
        let r = &mut self.run;
        let k = &mut self.mask;
        let s = &mut self.scan;
        vec![
            ("medium", "eps_lin", F64(&mut m.eps_lin)),
            ("medium", "d_eps", F64(&mut m.d_eps)),
            ("medium", "i_sat", F64(&mut m.i_sat)),
            ("medium", "mu1", F64(&mut m.mu1)),
            ("medium", "u_sat", F64(&mut m.u_sat)),
            ("wave", "k0", F64(&mut self.wave.k0)),
            ("grid", "nx", Usize(&mut g.nx)),
            ("grid", "ny", Usize(&mut g.ny)),
            ("grid", "dx", F64(&mut g.dx)),
            ("grid", "dz", F64(&mut g.dz)),
            ("grid", "z_end", F64(&mut g.z_end)),
            ("grid", "record_every", Usize(&mut g.record_every)),
            ("grid", "absorber", Bool(&mut g.absorber)),
            ("grid", "absorber_strength", F64(&mut g.absorber_strength)),
            ("grid", "absorber_width", OptF64(&mut g.absorber_width)),
            ("grid", "profile_dr", F64(&mut g.profile_dr)),
            ("run", "e0", F64(&mut r.e0)),
            ("run", "seed", U64(&mut r.seed)),
            ("run", "perturbation", Choice(&mut r.perturbation, PERTURBATIONS)),
            ("run", "level", F64(&mut r.level)),
            ("run", "separation", F64(&mut r.separation)),
            ("run", "relative_phase", F64(&mut r.relative_phase)),
            ("run", "crit_e_min", F64(&mut r.crit_e_min)),
            ("run", "crit_e_max", F64(&mut r.crit_e_max)),
            ("run", "crit_count", Usize(&mut r.crit_count)),
            ("mask", "filament_x", F64(&mut k.filament_x)),
            ("mask", "hole1_x", F64(&mut k.hole1_x)),
            ("mask", "hole2_x", F64(&mut k.hole2_x)),
            ("mask", "hole_radius", F64(&mut k.hole_radius)),
            ("mask", "screen_z", F64(&mut k.screen_z)),
            ("mask", "hole2_transmission", F64(&mut k.hole2_transmission)),
            ("mask", "randomize", Bool(&mut k.randomize)),
            ("mask", "realizations", Usize(&mut k.realizations)),
            ("mask", "significance", F64(&mut k.significance)),
            ("mask", "window", OptF64(&mut k.window)),
            ("scan", "c_min", F64(&mut s.c_min)),
            ("scan", "c_max", OptF64(&mut s.c_max)),
            ("scan", "count", Usize(&mut s.count)),
            ("scan", "n_r", Usize(&mut s.n_r)),
            ("scan", "n_theta", Usize(&mut s.n_theta)),
            ("scan", "core_fraction", F64(&mut s.core_fraction)),
            ("scan", "mu1_values", F64List(&mut s.mu1_values)),
            ("scan", "u_sat_values", F64List(&mut s.u_sat_values)),
            ("scan", "r0", OptF64(&mut s.r0)),
            ("scan", "policy", Choice(&mut s.policy, POLICIES)),
            ("scan", "delta", F64(&mut s.delta)),
        ]
    }
}

/// One problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

impl From<ConfigErrors> for crate::Error {
    fn from(e: ConfigErrors) -> Self {
        crate::Error::Config(e.to_string())
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn assign(slot: Slot<'_>, v: &Value) -> Result<(), String> {
    match slot {
        Slot::F64(t) => *t = as_f64(v).ok_or("expected a number")?,
        Slot::OptF64(t) => *t = Some(as_f64(v).ok_or("expected a number")?),
        Slot::Usize(t) => match v {
            Value::Integer(i) if *i >= 0 => *t = *i as usize,
            _ => return Err("expected a non-negative integer".into()),
        },
        Slot::U64(t) => match v {
            Value::Integer(i) if *i >= 0 => *t = *i as u64,
            _ => return Err("expected a non-negative integer".into()),
        },
        Slot::Bool(t) => *t = v.as_bool().ok_or("expected true or false")?,
        Slot::Choice(t, options) => match v.as_str() {
            Some(s) if options.contains(&s) => *t = s.to_string(),
            _ => return Err(format!("expected one of {}", options.join(", "))),
        },
        Slot::F64List(t) => {
            let arr = v.as_array().ok_or("expected an array of numbers")?;
            *t = arr.iter().map(as_f64).collect::<Option<_>>().ok_or("expected an array of numbers")?;
        }
    }
    Ok(())
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Byte offsets of every `section.key` in the document.
fn key_lines(text: &str) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    if let Ok(doc) = DeTable::parse(text) {
        for (sec, body) in doc.get_ref().iter() {
            out.push((sec.get_ref().to_string(), line_of(text, sec.span().start)));
            if let toml::de::DeValue::Table(t) = body.get_ref() {
                for (k, _) in t.iter() {
                    out.push((format!("{}.{}", sec.get_ref(), k.get_ref()), line_of(text, k.span().start)));
                }
            }
        }
    }
    out
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            let line = e.span().map(|s| line_of(text, s.start));
            return Err(ConfigErrors(vec![ConfigIssue {
                line,
                key: "<document>".into(),
                message: e.message().to_string(),
            }]));
        }
    };
    let lines = key_lines(text);
    let line = |key: &str| lines.iter().find(|(k, _)| k == key).map(|(_, l)| *l);
    let mut issues = Vec::new();
    let mut cfg = RunConfig::default();
    {
        let mut slots = cfg.slots();
        for (sec, body) in &table {
            let Some(body) = body.as_table() else {
                issues.push(ConfigIssue { line: line(sec), key: sec.clone(), message: "expected a [section]".into() });
                continue;
            };
            if !slots.iter().any(|(s, _, _)| s == sec) {
                issues.push(ConfigIssue { line: line(sec), key: sec.clone(), message: "unknown section".into() });
                continue;
            }
            for (key, v) in body {
                let full = format!("{sec}.{key}");
                match slots.iter().position(|(s, k, _)| s == sec && k == key) {
                    None => issues.push(ConfigIssue { line: line(&full), key: full, message: "unknown key".into() }),
                    Some(i) => {
                        let (_, _, slot) = slots.swap_remove(i);
                        if let Err(m) = assign(slot, v) {
                            issues.push(ConfigIssue { line: line(&full), key: full, message: m });
                        }
                    }
                }
            }
        }
    }
    for (key, message) in cfg.violations() {
        issues.push(ConfigIssue { line: line(&key), key, message });
    }
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(issues))
    }
}

impl RunConfig {
    /// Applies `section.key=value` overrides; bare words are taken as strings.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), ConfigErrors> {
        let mut issues = Vec::new();
        for o in overrides {
            let Some((path, raw)) = o.split_once('=') else {
                issues.push(ConfigIssue { line: None, key: o.clone(), message: "expected section.key=value".into() });
                continue;
            };
            let path = path.trim();
            let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
                Ok(mut t) => t.remove("v").expect("key present"),
                Err(_) => Value::String(raw.trim().to_string()),
            };
            let Some((sec, key)) = path.split_once('.') else {
                issues.push(ConfigIssue { line: None, key: path.into(), message: "expected section.key".into() });
                continue;
            };
            let mut slots = self.slots();
            match slots.iter().position(|(s, k, _)| *s == sec && *k == key) {
                None => issues.push(ConfigIssue { line: None, key: path.into(), message: "unknown key".into() }),
                Some(i) => {
                    let (_, _, slot) = slots.swap_remove(i);
                    if let Err(m) = assign(slot, &value) {
                        issues.push(ConfigIssue { line: None, key: path.into(), message: m });
                    }
                }
            }
        }
        for (key, message) in self.violations() {
            issues.push(ConfigIssue { line: None, key, message });
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(issues))
        }
    }

    /// Canonical document: every key, floats with 17 significant digits.
    pub fn to_toml(&self) -> String {
        let mut copy = self.clone();
        let mut out = String::new();
        let mut current = "";
        for (sec, key, slot) in copy.slots() {
            let value = match slot {
                Slot::F64(v) => fmt_f64(*v),
                Slot::OptF64(v) => match v {
                    Some(x) => fmt_f64(*x),
                    None => continue,
                },
                Slot::Usize(v) => v.to_string(),
                Slot::U64(v) => v.to_string(),
                Slot::Bool(v) => v.to_string(),
                Slot::Choice(v, _) => format!("\"{v}\""),
                Slot::F64List(v) => format!("[{}]", v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ")),
            };
            if sec != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{sec}]\n"));
                current = sec;
            }
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    /// Constraint violations as `(section.key, message)`.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let mut push = |k: &str, m: String| v.push((k.to_string(), m));
        for m in self.medium.violations() {
            let key = m.split_whitespace().next().unwrap_or("medium");
            push(&format!("medium.{key}"), m.clone());
        }
        if !(self.wave.k0 > 0.0 && self.wave.k0.is_finite()) {
            push("wave.k0", format!("k0 must be finite and > 0 (got {})", self.wave.k0));
        }
        let g = &self.grid;
        if g.nx < 8 || !g.nx.is_power_of_two() {
            push("grid.nx", format!("nx must be a power of two >= 8 (got {})", g.nx));
        }
        if !g.ny.is_power_of_two() {
            push("grid.ny", format!("ny must be a power of two, 1 for a slab (got {})", g.ny));
        }
        for (k, x) in [("grid.dx", g.dx), ("grid.dz", g.dz), ("grid.profile_dr", g.profile_dr)] {
            if !(x > 0.0 && x.is_finite()) {
                push(k, format!("must be finite and > 0 (got {x})"));
            }
        }
        if !(g.z_end >= 0.0 && g.z_end.is_finite()) {
            push("grid.z_end", format!("z_end must be finite and >= 0 (got {})", g.z_end));
        }
        if !(g.absorber_strength >= 0.0) {
            push("grid.absorber_strength", format!("must be >= 0 (got {})", g.absorber_strength));
        }
        if let Some(w) = g.absorber_width {
            if !(w > 0.0) {
                push("grid.absorber_width", format!("must be > 0 (got {w})"));
            }
        }
        let r = &self.run;
        if !(r.e0 > 0.0 && r.e0.is_finite()) {
            push("run.e0", format!("e0 must be finite and > 0 (got {})", r.e0));
        }
        if !(r.crit_e_min > 0.0 && r.crit_e_max > r.crit_e_min) {
            push("run.crit_e_max", "need 0 < crit_e_min < crit_e_max".into());
        }
        if r.crit_count < 2 {
            push("run.crit_count", format!("need at least 2 sweep points (got {})", r.crit_count));
        }
        let k = &self.mask;
        if !(k.hole_radius > 0.0) {
            push("mask.hole_radius", format!("must be > 0 (got {})", k.hole_radius));
        }
        if !(k.hole2_transmission >= 0.0 && k.hole2_transmission <= 1.0) {
            push("mask.hole2_transmission", format!("must be in [0, 1] (got {})", k.hole2_transmission));
        }
        if !(k.significance >= 1.0) {
            push("mask.significance", format!("must be >= 1 (got {})", k.significance));
        }
        if k.randomize && k.realizations < 2 {
            push("mask.realizations", "phase randomization needs at least 2 realizations".into());
        }
        let s = &self.scan;
        if !(s.c_min >= 0.0) {
            push("scan.c_min", format!("must be >= 0 (got {})", s.c_min));
        }
        if let Some(c) = s.c_max {
            if !(c > s.c_min) {
                push("scan.c_max", format!("must exceed c_min (got {c})"));
            }
        }
        if s.count < 2 {
            push("scan.count", "need at least 2 scan points".into());
        }
        if s.n_r < 2 {
            push("scan.n_r", "need at least 2 radial points".into());
        }
        if s.n_theta < 4 || s.n_theta % 4 != 0 {
            push("scan.n_theta", format!("must be a positive multiple of 4 (got {})", s.n_theta));
        }
        if !(s.core_fraction > 0.0 && s.core_fraction < 1.0) {
            push("scan.core_fraction", format!("must be in (0, 1) (got {})", s.core_fraction));
        }
        if let Some(r0) = s.r0 {
            if !(r0 > 0.0) {
                push("scan.r0", format!("must be > 0 (got {r0})"));
            }
        }
        if !(s.delta >= 0.0) {
            push("scan.delta", format!("must be >= 0 (got {})", s.delta));
        }
        v
    }

    pub fn wave_params(&self) -> crate::Result<WaveParams> {
        WaveParams::new(self.wave.k0, &self.medium)
    }

    pub fn setup(&self) -> crate::Result<Setup> {
        let g = &self.grid;
        Ok(Setup {
            medium: self.medium,
            wave: self.wave_params()?,
            e0: self.run.e0,
            nx: g.nx,
            ny: g.ny,
            dx: g.dx,
            dz: g.dz,
            z_end: g.z_end,
            record_every: g.record_every,
            absorber: g.absorber.then_some(Absorber { width: g.absorber_width, strength: g.absorber_strength }),
            profile_dr: g.profile_dr,
        })
    }

    pub fn perturbation(&self) -> Perturbation {
        let level = self.run.level;
        match self.run.perturbation.as_str() {
            "symmetric-ring" => Perturbation::SymmetricRing { level },
            "asymmetric-tilt" => Perturbation::AsymmetricTilt { level },
            "noise" => Perturbation::Noise { seed: self.run.seed, level },
            _ => Perturbation::SymmetricRing { level: 0.0 },
        }
    }

    pub fn young(&self) -> YoungConfig {
        let k = &self.mask;
        YoungConfig {
            filament_x: k.filament_x,
            hole1_x: k.hole1_x,
            hole2_x: k.hole2_x,
            hole_radius: k.hole_radius,
            screen_z: k.screen_z,
            hole2_transmission: k.hole2_transmission,
            randomize_seed: k.randomize.then_some(self.run.seed),
            realizations: k.realizations,
            significance: k.significance,
            window: k.window,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec { n_r: self.scan.n_r, n_theta: self.scan.n_theta, core_fraction: self.scan.core_fraction }
    }

    pub fn curvature_range(&self, r_core: f64) -> CurvatureRange {
        CurvatureRange {
            c_min: self.scan.c_min,
            c_max: self.scan.c_max.unwrap_or(0.9 / r_core),
            count: self.scan.count,
        }
    }

    pub fn policy(&self) -> ModePolicy {
        match self.scan.policy.as_str() {
            "all-within" => ModePolicy::AllWithin { delta: self.scan.delta },
            _ => ModePolicy::Nearest,
        }
    }
}
