//! Campaign configuration files.
//!
//! Flat `key = value` lines grouped under `[model]`, `[controller]`, `[sde]`
//! and `[campaign]`. An optional top-level `preset = <name>` line expands a
//! preset first; every later key overrides it. Without a preset, unspecified
//! keys take the `fig1_qsr` values. `#` starts a comment.
//!
//! ```text
//! preset = fig2_stab2_psi+
//!
//! [model]
//! channels = 2          # 1 or 2
//! eta1 = 0.3
//! m1 = 1
//! eta2 = 0.4            # two channels only
//! m2 = 0.9              # two channels only
//! omega = 0.3
//! target = psi+         # psi+ psi- phi+ phi-
//!
//! [controller]
//! kind = two_channel    # zero | two_channel | one_channel
//! alpha = 10            # two_channel
//! beta = 12             # two_channel
//! gamma = 1             # two_channel
//! gamma1 = 4            # one_channel
//! gamma2 = 4            # one_channel
//! epsilon = 0.15        # one_channel
//!
//! [sde]
//! dt = 0.001
//! t_final = 10
//! projection_tol = 1e-10
//! max_clipped_mass = 0.01
//! noise_substeps = 1
//! seed = 42
//! log_stride = 10
//!
//! [campaign]
//! n_traj = 500
//! rho0 = phi-           # Bell label, maximally_mixed, fig1_diagonal,
//!                       # or 16 row-major entries `re` / `re:im`
//! workers = 0
//! classify_tol = 0.05
//! save_trajectories = 0
//! fit_window = 2 8      # optional
//! out_dir = results     # optional
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bellstab_core::ensemble::{CampaignConfig, InitialState};
use bellstab_core::{BellLabel, Controller, Error as CoreError, ScenarioPreset};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Section {
    Top,
    Model,
    Controller,
    Sde,
    Campaign,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Top => "",
            Section::Model => "model",
            Section::Controller => "controller",
            Section::Sde => "sde",
            Section::Campaign => "campaign",
        }
    }
}

const MODEL_KEYS: &[&str] = &["channels", "eta1", "m1", "eta2", "m2", "omega", "target"];
const CONTROLLER_KEYS: &[&str] = &["kind", "alpha", "beta", "gamma", "gamma1", "gamma2", "epsilon"];
const SDE_KEYS: &[&str] = &[
    "dt",
    "t_final",
    "projection_tol",
    "max_clipped_mass",
    "noise_substeps",
    "seed",
    "log_stride",
];
const CAMPAIGN_KEYS: &[&str] = &[
    "n_traj",
    "rho0",
    "workers",
    "classify_tol",
    "save_trajectories",
    "fit_window",
    "out_dir",
];

fn allowed(section: Section) -> &'static [&'static str] {
    match section {
        Section::Top => &["preset"],
        Section::Model => MODEL_KEYS,
        Section::Controller => CONTROLLER_KEYS,
        Section::Sde => SDE_KEYS,
        Section::Campaign => CAMPAIGN_KEYS,
    }
}

struct Entry {
    section: Section,
    key: String,
    value: String,
    line: usize,
}

fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section = Section::Top;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("malformed section header `{s}`"),
            })?;
            section = match name.trim() {
                "model" => Section::Model,
                "controller" => Section::Controller,
                "sde" => Section::Sde,
                "campaign" => Section::Campaign,
                other => {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("unknown section `[{other}]`"),
                    })
                }
            };
            continue;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, got `{s}`"),
        })?;
        let (key, value) = (k.trim(), v.trim());
        if !allowed(section).contains(&key) {
            let where_ = if section == Section::Top {
                "at top level".to_string()
            } else {
                format!("in [{}]", section.name())
            };
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key `{key}` {where_}"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("missing value for `{key}`"),
            });
        }
        if !seen.insert((section, key.to_string())) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        out.push(Entry {
            section,
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }
    Ok(out)
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value.parse().map_err(|_| ConfigError::Parse {
        line: e.line,
        message: format!("cannot parse `{}` for `{}`", e.value, e.key),
    })
}

fn parse_with<T>(e: &Entry, f: impl FnOnce(&str) -> Option<T>) -> Result<T, ConfigError> {
    f(&e.value).ok_or_else(|| ConfigError::Parse {
        line: e.line,
        message: format!("cannot parse `{}` for `{}`", e.value, e.key),
    })
}

/// Parses a `rho0` value.
pub fn parse_rho0(s: &str) -> Option<InitialState> {
    let s = s.trim();
    match s {
        "maximally_mixed" => return Some(InitialState::MaximallyMixed),
        "fig1_diagonal" => return Some(InitialState::Fig1Diagonal),
        _ => {}
    }
    if let Ok(l) = s.parse::<BellLabel>() {
        return Some(InitialState::Bell(l));
    }
    let entries = s
        .split_whitespace()
        .map(|tok| match tok.split_once(':') {
            Some((re, im)) => Some((re.parse().ok()?, im.parse().ok()?)),
            None => Some((tok.parse().ok()?, 0.0)),
        })
        .collect::<Option<Vec<(f64, f64)>>>()?;
    (entries.len() == 16).then_some(InitialState::Matrix(entries))
}

pub fn format_rho0(r: &InitialState) -> String {
    match r {
        InitialState::Bell(l) => l.to_string(),
        InitialState::MaximallyMixed => "maximally_mixed".into(),
        InitialState::Fig1Diagonal => "fig1_diagonal".into(),
        InitialState::Matrix(m) => m
            .iter()
            .map(|(re, im)| {
                if *im == 0.0 {
                    format!("{re}")
                } else {
                    format!("{re}:{im}")
                }
            })
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn parse_window(s: &str) -> Option<(f64, f64)> {
    let v: Vec<f64> = s.split_whitespace().map(|t| t.parse().ok()).collect::<Option<_>>()?;
    (v.len() == 2).then(|| (v[0], v[1]))
}

fn default_controller(kind: &str, target: BellLabel) -> Option<Controller> {
    match kind {
        "zero" => Some(Controller::Zero),
        "two_channel" => Some(Controller::two_channel_default(target)),
        "one_channel" => Some(Controller::one_channel_default(target)),
        _ => None,
    }
}

fn retarget(ctl: &mut Controller, label: BellLabel) {
    match ctl {
        Controller::Zero => {}
        Controller::TwoChannel { target, .. } | Controller::OneChannel { target, .. } => *target = label,
    }
}

fn controller_field<'a>(ctl: &'a mut Controller, key: &str) -> Option<&'a mut f64> {
    match ctl {
        Controller::Zero => None,
        Controller::TwoChannel { alpha, beta, gamma, .. } => match key {
            "alpha" => Some(alpha),
            "beta" => Some(beta),
            "gamma" => Some(gamma),
            _ => None,
        },
        Controller::OneChannel {
            gamma1,
            gamma2,
            epsilon,
            ..
        } => match key {
            "gamma1" => Some(gamma1),
            "gamma2" => Some(gamma2),
            "epsilon" => Some(epsilon),
            _ => None,
        },
    }
}

/// Parses configuration text. The result is validated.
pub fn parse_config_str(text: &str) -> Result<CampaignConfig, ConfigError> {
    let entries = tokenize(text)?;
    let mut cfg = ScenarioPreset::Fig1Qsr.config();
    if let Some(e) = entries.iter().find(|e| e.section == Section::Top) {
        let preset: ScenarioPreset = e.value.parse().map_err(|err: CoreError| ConfigError::Parse {
            line: e.line,
            message: err.to_string(),
        })?;
        cfg = preset.config();
    }

    for e in entries.iter().filter(|e| e.section == Section::Model) {
        let m = &mut cfg.model;
        match e.key.as_str() {
            "channels" => m.n_channels = parse_value(e)?,
            "eta1" => m.eta1 = parse_value(e)?,
            "m1" => m.m1 = parse_value(e)?,
            "eta2" => m.eta2 = parse_value(e)?,
            "m2" => m.m2 = parse_value(e)?,
            "omega" => m.omega = parse_value(e)?,
            "target" => m.target = parse_with(e, |s| s.parse().ok())?,
            _ => unreachable!("key list checked by tokenize"),
        }
    }
    let target = cfg.model.target;
    retarget(&mut cfg.controller, target);

    let ctl_entries: Vec<&Entry> = entries.iter().filter(|e| e.section == Section::Controller).collect();
    if let Some(e) = ctl_entries.iter().find(|e| e.key == "kind") {
        let fresh = parse_with(e, |s| default_controller(s, target))?;
        if fresh.kind_name() != cfg.controller.kind_name() {
            cfg.controller = fresh;
        }
    }
    for e in ctl_entries.iter().filter(|e| e.key != "kind") {
        let value: f64 = parse_value(e)?;
        let kind = cfg.controller.kind_name();
        let slot = controller_field(&mut cfg.controller, &e.key).ok_or_else(|| ConfigError::Validation {
            key: format!("controller.{}", e.key),
            message: format!("not a parameter of controller kind `{kind}`"),
        })?;
        *slot = value;
    }

    for e in entries.iter().filter(|e| e.section == Section::Sde) {
        let s = &mut cfg.sde;
        match e.key.as_str() {
            "dt" => s.dt = parse_value(e)?,
            "t_final" => s.t_final = parse_value(e)?,
            "projection_tol" => s.projection_tol = parse_value(e)?,
            "max_clipped_mass" => s.max_clipped_mass = parse_value(e)?,
            "noise_substeps" => s.noise_substeps = parse_value(e)?,
            "seed" => s.seed = parse_value(e)?,
            "log_stride" => s.log_stride = parse_value(e)?,
            _ => unreachable!("key list checked by tokenize"),
        }
    }

    for e in entries.iter().filter(|e| e.section == Section::Campaign) {
        match e.key.as_str() {
            "n_traj" => cfg.n_traj = parse_value(e)?,
            "rho0" => cfg.rho0 = parse_with(e, parse_rho0)?,
            "workers" => cfg.workers = parse_value(e)?,
            "classify_tol" => cfg.classify_tol = parse_value(e)?,
            "save_trajectories" => cfg.save_trajectories = parse_value(e)?,
            "fit_window" => cfg.fit_window = Some(parse_with(e, parse_window)?),
            "out_dir" => cfg.outputs = Some(PathBuf::from(&e.value)),
            _ => unreachable!("key list checked by tokenize"),
        }
    }

    validate(&cfg)?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<CampaignConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Section-qualified name of a key reported by the core validators.
fn qualify(key: &str) -> String {
    let section = match key {
        "n_channels" => return "model.channels".into(),
        k if MODEL_KEYS.contains(&k) => "model",
        k if CONTROLLER_KEYS.contains(&k) => "controller",
        k if SDE_KEYS.contains(&k) => "sde",
        _ => "campaign",
    };
    format!("{section}.{key}")
}

/// Validates `cfg`, naming the offending key on failure.
pub fn validate(cfg: &CampaignConfig) -> Result<(), ConfigError> {
    cfg.validate().map_err(|e| match e {
        CoreError::InvalidParameter { key, reason } => ConfigError::Validation {
            key: qualify(key),
            message: reason,
        },
        CoreError::ConfigMismatch(message) => ConfigError::Validation {
            key: "controller.kind".into(),
            message,
        },
        other => ConfigError::Validation {
            key: "campaign.rho0".into(),
            message: other.to_string(),
        },
    })
}

/// Writes every key, so that parsing the text reproduces `cfg` exactly.
pub fn to_config_string(cfg: &CampaignConfig) -> String {
    let mut s = String::new();
    let m = &cfg.model;
    let _ = writeln!(s, "[model]");
    let _ = writeln!(s, "channels = {}", m.n_channels);
    let _ = writeln!(s, "eta1 = {}", m.eta1);
    let _ = writeln!(s, "m1 = {}", m.m1);
    let _ = writeln!(s, "eta2 = {}", m.eta2);
    let _ = writeln!(s, "m2 = {}", m.m2);
    let _ = writeln!(s, "omega = {}", m.omega);
    let _ = writeln!(s, "target = {}", m.target);

    let _ = writeln!(s, "\n[controller]");
    let _ = writeln!(s, "kind = {}", cfg.controller.kind_name());
    match cfg.controller {
        Controller::Zero => {}
        Controller::TwoChannel { alpha, beta, gamma, .. } => {
            let _ = writeln!(s, "alpha = {alpha}\nbeta = {beta}\ngamma = {gamma}");
        }
        Controller::OneChannel {
            gamma1,
            gamma2,
            epsilon,
            ..
        } => {
            let _ = writeln!(s, "gamma1 = {gamma1}\ngamma2 = {gamma2}\nepsilon = {epsilon}");
        }
    }

    let d = &cfg.sde;
    let _ = writeln!(s, "\n[sde]");
    let _ = writeln!(s, "dt = {}", d.dt);
    let _ = writeln!(s, "t_final = {}", d.t_final);
    let _ = writeln!(s, "projection_tol = {}", d.projection_tol);
    let _ = writeln!(s, "max_clipped_mass = {}", d.max_clipped_mass);
    let _ = writeln!(s, "noise_substeps = {}", d.noise_substeps);
    let _ = writeln!(s, "seed = {}", d.seed);
    let _ = writeln!(s, "log_stride = {}", d.log_stride);

    let _ = writeln!(s, "\n[campaign]");
    let _ = writeln!(s, "n_traj = {}", cfg.n_traj);
    let _ = writeln!(s, "rho0 = {}", format_rho0(&cfg.rho0));
    let _ = writeln!(s, "workers = {}", cfg.workers);
    let _ = writeln!(s, "classify_tol = {}", cfg.classify_tol);
    let _ = writeln!(s, "save_trajectories = {}", cfg.save_trajectories);
    if let Some((lo, hi)) = cfg.fit_window {
        let _ = writeln!(s, "fit_window = {lo} {hi}");
    }
    if let Some(dir) = &cfg.outputs {
        let _ = writeln!(s, "out_dir = {}", dir.display());
    }
    s
}
