//! Run configuration: a small INI-style text format.
//!
//! ```text
//! # comment
//! [domain]
//! nx = 32
//! [scenario]
//! name = circle-cubic
//! ```
//!
//! Every key is optional except `scenario.name`; omitted keys take the
//! defaults of the named scenario preset. Unknown keys are logged and
//! ignored.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scenario::preset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    CircleLinear,
    CircleCubic,
    Heart,
    Swimmer,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::CircleLinear,
        ScenarioKind::CircleCubic,
        ScenarioKind::Heart,
        ScenarioKind::Swimmer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::CircleLinear => "circle-linear",
            ScenarioKind::CircleCubic => "circle-cubic",
            ScenarioKind::Heart => "heart",
            ScenarioKind::Swimmer => "swimmer",
        }
    }

    pub fn is_circle(self) -> bool {
        matches!(self, ScenarioKind::CircleLinear | ScenarioKind::CircleCubic)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(ScenarioKind::CircleCubic),
            "beating-heart" => Ok(ScenarioKind::Heart),
            _ => ScenarioKind::ALL
                .into_iter()
                .find(|k| k.name() == s)
                .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Linear,
    Cubic,
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ProfileKind::Linear),
            "cubic" => Ok(ProfileKind::Cubic),
            _ => Err(Error::Config(format!("unknown profile {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: ScenarioKind,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub rho: f64,
    pub mu: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Steps between dumps; step 0 is always dumped.
    pub print_dump: usize,
    pub profile: ProfileKind,
    pub p1: f64,
    pub p2: f64,
    /// Phase durations: first blend, rest, second blend.
    pub t1: f64,
    pub t_rest: f64,
    pub t2: f64,
    pub stroke_period: f64,
    pub upstroke_fraction: f64,
    pub k_targ: f64,
    pub k_spr: f64,
    pub k_beam: f64,
    /// Circle radius or heart width (state A).
    pub size: f64,
    /// Heart width in state B.
    pub size_b: f64,
    pub n_points: usize,
    pub gap_fraction: f64,
    pub body_length: f64,
    /// Swimmer node spacing.
    pub ds: f64,
    /// Directory of geometry decks; generated in memory when absent.
    pub geometry_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
}

type Setter = fn(&mut SimConfig, &str) -> Result<()>;

fn parse<T: FromStr>(v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("cannot parse {v:?}")))
}

macro_rules! keys {
    ($($sec:literal . $key:literal => $field:ident),* $(,)?) => {
        const KEYS: &[(&str, &str, Setter)] = &[
            $(($sec, $key, |c, v| { c.$field = parse(v)?; Ok(()) })),*
        ];
    };
}

keys! {
    "domain"."nx" => nx,
    "domain"."ny" => ny,
    "domain"."lx" => lx,
    "domain"."ly" => ly,
    "fluid"."rho" => rho,
    "fluid"."mu" => mu,
    "time"."dt" => dt,
    "time"."t_final" => t_final,
    "time"."print_dump" => print_dump,
    "scenario"."profile" => profile,
    "scenario"."p1" => p1,
    "scenario"."p2" => p2,
    "scenario"."t1" => t1,
    "scenario"."t_rest" => t_rest,
    "scenario"."t2" => t2,
    "scenario"."stroke_period" => stroke_period,
    "scenario"."upstroke_fraction" => upstroke_fraction,
    "scenario"."k_targ" => k_targ,
    "scenario"."k_spr" => k_spr,
    "scenario"."k_beam" => k_beam,
    "structure"."size" => size,
    "structure"."size_b" => size_b,
    "structure"."n_points" => n_points,
    "structure"."gap_fraction" => gap_fraction,
    "structure"."body_length" => body_length,
    "structure"."ds" => ds,
}

impl SimConfig {
    /// Sets `section.key` from its textual value. Returns `Ok(false)` for an
    /// unknown key.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<bool> {
        match (section, key) {
            ("scenario", "name") => {
                let kind: ScenarioKind = value.parse()?;
                if kind != self.scenario {
                    return Err(Error::Config(format!(
                        "scenario.name cannot change from {} to {kind}",
                        self.scenario
                    )));
                }
                Ok(true)
            }
            ("geometry", "dir") => {
                self.geometry_dir = Some(PathBuf::from(value));
                Ok(true)
            }
            ("output", "dir") => {
                self.output_dir = PathBuf::from(value);
                Ok(true)
            }
            _ => match KEYS.iter().find(|(s, k, _)| *s == section && *k == key) {
                Some((_, _, set)) => set(self, value).map(|_| true),
                None => Ok(false),
            },
        }
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (lhs, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {spec:?} is not key=value")))?;
        let (section, key) = lhs
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("override key {lhs:?} needs section.key")))?;
        if self.set(section, key, value.trim())? {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown key {lhs:?}")))
        }
    }

    pub fn nu(&self) -> f64 {
        self.mu / self.rho
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        let positive = [
            ("domain.lx", self.lx),
            ("domain.ly", self.ly),
            ("fluid.rho", self.rho),
            ("time.dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return fail(format!("fluid.mu must be non-negative, got {}", self.mu));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return fail(format!(
                "time.t_final must be non-negative, got {}",
                self.t_final
            ));
        }
        let steps = self.t_final / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return fail(format!(
                "time.t_final = {} is not a whole number of steps of {}",
                self.t_final, self.dt
            ));
        }
        if self.nx < 4 || self.ny < 4 {
            return fail(format!("grid {}x{} too small", self.nx, self.ny));
        }
        let (hx, hy) = (self.lx / self.nx as f64, self.ly / self.ny as f64);
        if (hx - hy).abs() > 1e-12 * hx {
            return fail(format!("grid cells must be square (dx = {hx}, dy = {hy})"));
        }
        if self.print_dump == 0 {
            return fail("time.print_dump must be at least 1".into());
        }
        if self.profile == ProfileKind::Cubic
            && !(0.0 < self.p1 && self.p1 < self.p2 && self.p2 < 1.0)
        {
            return fail(format!(
                "need 0 < p1 < p2 < 1 (p1 = {}, p2 = {})",
                self.p1, self.p2
            ));
        }
        match self.scenario {
            ScenarioKind::CircleLinear | ScenarioKind::CircleCubic | ScenarioKind::Heart => {
                if !(self.t1 > 0.0 && self.t2 > 0.0 && self.t_rest >= 0.0) {
                    return fail("phase durations need t1 > 0, t2 > 0, t_rest >= 0".into());
                }
                if !(self.k_targ > 0.0) {
                    return fail("scenario.k_targ must be positive".into());
                }
                if !(self.size > 0.0) || self.n_points < 3 {
                    return fail("structure.size must be positive and n_points >= 3".into());
                }
                if self.scenario == ScenarioKind::Heart
                    && !(self.size_b > 0.0 && self.gap_fraction > 0.0 && self.gap_fraction < 0.5)
                {
                    return fail("heart needs size_b > 0 and 0 < gap_fraction < 0.5".into());
                }
            }
            ScenarioKind::Swimmer => {
                if !(self.stroke_period > 0.0) {
                    return fail("scenario.stroke_period must be positive".into());
                }
                if !(self.upstroke_fraction > 0.0 && self.upstroke_fraction < 1.0) {
                    return fail("scenario.upstroke_fraction must lie in (0, 1)".into());
                }
                if !(self.k_spr > 0.0 && self.k_beam > 0.0) {
                    return fail("swimmer needs k_spr > 0 and k_beam > 0".into());
                }
                if !(self.body_length > 0.0 && self.ds > 0.0 && self.ds < self.body_length / 4.0) {
                    return fail(
                        "swimmer needs body_length > 0 and 0 < ds < body_length / 4".into(),
                    );
                }
            }
        }
        Ok(())
    }

    /// Serializes back to the text format accepted by [`load_config`].
    pub fn to_text(&self) -> String {
        // key names double as serde field names
        let json = serde_json::to_value(self).expect("config serializes");
        let mut s = format!("[scenario]\nname = {}\n", self.scenario);
        for sec in ["scenario", "domain", "fluid", "time", "structure"] {
            if sec != "scenario" {
                let _ = writeln!(s, "\n[{sec}]");
            }
            for (_, key, _) in KEYS.iter().filter(|(s, _, _)| *s == sec) {
                let v = match &json[*key] {
                    serde_json::Value::String(v) => v.clone(),
                    v => v.to_string(),
                };
                let _ = writeln!(s, "{key} = {v}");
            }
        }
        if let Some(dir) = &self.geometry_dir {
            let _ = writeln!(s, "\n[geometry]\ndir = {}", dir.display());
        }
        let _ = writeln!(s, "\n[output]\ndir = {}", self.output_dir.display());
        s
    }
}

struct Entry<'a> {
    line: usize,
    section: &'a str,
    key: &'a str,
    value: &'a str,
}

fn tokenize<'a>(path: &Path, text: &'a str) -> Result<Vec<Entry<'a>>> {
    let mut section = "";
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('[') {
            section = rest
                .strip_suffix(']')
                .map(str::trim)
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("malformed section header {l:?}"),
                })?;
            continue;
        }
        let (key, value) = l.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("expected key = value, found {l:?}"),
        })?;
        if section.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "key outside of any [section]".into(),
            });
        }
        out.push(Entry {
            line,
            section,
            key: key.trim(),
            value: value.trim(),
        });
    }
    Ok(out)
}

/// Parses configuration text; `path` is only used in messages.
pub fn parse_config(path: &Path, text: &str) -> Result<SimConfig> {
    let entries = tokenize(path, text)?;
    let name = entries
        .iter()
        .find(|e| e.section == "scenario" && e.key == "name")
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "missing required key scenario.name".into(),
        })?;
    let kind: ScenarioKind = name.value.parse().map_err(|e: Error| Error::Parse {
        path: path.to_path_buf(),
        line: name.line,
        message: e.to_string(),
    })?;
    let mut cfg = preset(kind);
    for e in &entries {
        let known = cfg
            .set(e.section, e.key, e.value)
            .map_err(|err| Error::Parse {
                path: path.to_path_buf(),
                line: e.line,
                message: format!("{}.{}: {err}", e.section, e.key),
            })?;
        if !known {
            log::warn!(
                "{}:{}: ignoring unknown key {}.{}",
                path.display(),
                e.line,
                e.section,
                e.key
            );
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(path, &text)?;
    // relative deck directories are resolved against the config file
    if let (Some(dir), Some(parent)) = (&cfg.geometry_dir, path.parent()) {
        if dir.is_relative() {
            cfg.geometry_dir = Some(parent.join(dir));
        }
    }
    Ok(cfg)
}
