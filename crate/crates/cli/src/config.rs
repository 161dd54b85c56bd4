//! Device and protocol configuration.
//!
//! Two interchangeable formats are accepted: flat `key = value` text (with `#`
//! comments), and a JSON object with the same keys. Keys carry their unit, so
//! `f_m_ghz = 3.285` and `{"f_m_ghz": 3.285}` mean the same thing. Values are
//! kept in the units they were written in, which makes the canonical echo
//! re-parse to an identical configuration.

use std::collections::HashSet;
use std::fmt::Write as _;

use fbar_core::circuit::DeviceParams;
use fbar_core::herald::{Protocol, ProtocolConfig};
use fbar_core::optomech::Topology;
use fbar_core::Error as CoreError;
use serde_json::{Map, Value};

use crate::error::{CliError, Location, Result};

/// Circuit model for the resonator's static branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Static capacitance shunted by the finite resistance `r0_kohm`.
    Mbvd,
    /// Lossless static capacitance; `r0_kohm` is ignored.
    Bvd,
}

impl Model {
    fn label(self) -> &'static str {
        match self {
            Model::Mbvd => "mbvd",
            Model::Bvd => "bvd",
        }
    }
}

/// Topologies to analyze.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologySelection {
    One(Topology),
    Both,
}

impl TopologySelection {
    pub fn topologies(self) -> Vec<Topology> {
        match self {
            TopologySelection::One(t) => vec![t],
            TopologySelection::Both => Topology::ALL.to_vec(),
        }
    }

    fn label(self) -> &'static str {
        match self {
            TopologySelection::One(t) => t.label(),
            TopologySelection::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "one-ring" => Some(TopologySelection::One(Topology::OneRing)),
            "two-ring" => Some(TopologySelection::One(Topology::TwoRing)),
            "both" => Some(TopologySelection::Both),
            _ => None,
        }
    }
}

/// How the optomechanical pump strength is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pump {
    /// Intracavity photon number.
    PhotonNumber(f64),
    /// Cavity-enhanced coupling in MHz; the photon number follows from `g_om0_hz`.
    CouplingMhz(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub g_om0_hz: f64,
    pub f_opt_thz: f64,
    pub kappa_i_mhz: f64,
    pub kappa_ext_mhz: f64,
    pub f_m_ghz: f64,
    pub gamma_i_mhz: f64,
    pub k_eff_sq: f64,
    pub pump: Pump,
    pub c0_ff: f64,
    pub r0_kohm: f64,
    pub temperature_mk: f64,
    pub j_ghz: f64,
    pub z_tx_ohm: f64,
    /// Pump detuning; `None` means red-detuned by one mechanical frequency.
    pub detuning_ghz: Option<f64>,
    pub r_l_mohm: f64,
    pub model: Model,
    pub topology: Option<TopologySelection>,
    pub eta_link: f64,
    pub eta_det: f64,
    pub t_reset_us: f64,
    pub t_sep_ns: Option<f64>,
    /// Observables-only mode: a given matching capacitor (and optionally inductor).
    pub c_t_ff: Option<f64>,
    pub l_nh: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            g_om0_hz: 400.0,
            f_opt_thz: 193.0,
            kappa_i_mhz: 25.0,
            kappa_ext_mhz: 125.0,
            f_m_ghz: 3.285,
            gamma_i_mhz: 2.6,
            k_eff_sq: 4.3e-3,
            pump: Pump::PhotonNumber(6.25e8),
            c0_ff: 200.0,
            r0_kohm: 10.0,
            temperature_mk: 50.0,
            j_ghz: 1.7,
            z_tx_ohm: 50.0,
            detuning_ghz: None,
            r_l_mohm: 0.0,
            model: Model::Mbvd,
            topology: None,
            eta_link: 0.5,
            eta_det: 0.9,
            t_reset_us: 1.0,
            t_sep_ns: None,
            c_t_ff: None,
            l_nh: None,
        }
    }
}

const KEYS: &[&str] = &[
    "g_om0_hz",
    "f_opt_thz",
    "kappa_i_mhz",
    "kappa_ext_mhz",
    "f_m_ghz",
    "gamma_i_mhz",
    "k_eff_sq",
    "n_cav",
    "g_om_mhz",
    "c0_ff",
    "r0_kohm",
    "temperature_mk",
    "j_ghz",
    "z_tx_ohm",
    "detuning_ghz",
    "r_l_mohm",
    "model",
    "topology",
    "eta_link",
    "eta_det",
    "t_reset_us",
    "t_sep_ns",
    "c_t_ff",
    "l_nh",
];

fn number(value: &str) -> std::result::Result<f64, String> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("expected a finite number, got `{value}`")),
        Err(_) => Err(format!("expected a number, got `{value}`")),
    }
}

/// `value × 10^exp`, correctly rounded from the decimal the user wrote.
pub fn scaled(value: f64, exp: i32) -> f64 {
    // Display for f64 never uses exponent notation, so appending one is safe.
    format!("{value}e{exp}").parse().expect("finite f64 display re-parses")
}

/// Maps a core parameter name back to the configuration key that sets it.
fn config_key(field: &str) -> &str {
    match field {
        "g_om0" => "g_om0_hz",
        "f_opt" => "f_opt_thz",
        "kappa_i" => "kappa_i_mhz",
        "kappa_ext" => "kappa_ext_mhz",
        "f_m" => "f_m_ghz",
        "gamma_i" => "gamma_i_mhz",
        "c0" => "c0_ff",
        "r0" => "r0_kohm",
        "temperature" => "temperature_mk",
        "j_coupling" => "j_ghz",
        "z_tx" => "z_tx_ohm",
        "detuning" => "detuning_ghz",
        "t_reset" => "t_reset_us",
        "t_sep" => "t_sep_ns",
        other => other,
    }
}

impl Config {
    pub fn parse(text: &str, source_name: &str) -> Result<Config> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text, source_name)
        } else {
            Self::parse_flat(text, source_name)
        }
    }

    fn parse_flat(text: &str, source_name: &str) -> Result<Config> {
        let mut config = Config::default();
        let mut seen = HashSet::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |field: Option<&str>, message: String| CliError::Config {
                source_name: source_name.to_string(),
                location: Location {
                    line: Some(line),
                    field: field.map(str::to_string),
                },
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(None, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            config
                .apply(key, value, &mut seen)
                .map_err(|message| err(Some(key), message))?;
        }
        config.validate(source_name)?;
        Ok(config)
    }

    fn parse_json(text: &str, source_name: &str) -> Result<Config> {
        let err = |line: Option<usize>, field: Option<&str>, message: String| CliError::Config {
            source_name: source_name.to_string(),
            location: Location {
                line,
                field: field.map(str::to_string),
            },
            message,
        };
        let value: Value = serde_json::from_str(text).map_err(|e| err(Some(e.line()), None, e.to_string()))?;
        let object = value
            .as_object()
            .ok_or_else(|| err(None, None, "expected a JSON object".to_string()))?;
        let mut config = Config::default();
        let mut seen = HashSet::new();
        for (key, value) in object {
            let text = match value {
                Value::String(s) => s.clone(),
                Value::Number(n) => match n.as_f64() {
                    Some(v) => v.to_string(),
                    None => return Err(err(None, Some(key), format!("unrepresentable number {n}"))),
                },
                other => return Err(err(None, Some(key), format!("expected a number or string, got {other}"))),
            };
            config
                .apply(key, &text, &mut seen)
                .map_err(|message| err(None, Some(key), message))?;
        }
        config.validate(source_name)?;
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str, seen: &mut HashSet<String>) -> std::result::Result<(), String> {
        if !KEYS.contains(&key) {
            return Err(format!("unknown key (expected one of: {})", KEYS.join(", ")));
        }
        if !seen.insert(key.to_string()) {
            return Err("key given more than once".to_string());
        }
        if (key == "n_cav" && seen.contains("g_om_mhz")) || (key == "g_om_mhz" && seen.contains("n_cav")) {
            return Err("give either `n_cav` or `g_om_mhz`, not both".to_string());
        }
        match key {
            "g_om0_hz" => self.g_om0_hz = number(value)?,
            "f_opt_thz" => self.f_opt_thz = number(value)?,
            "kappa_i_mhz" => self.kappa_i_mhz = number(value)?,
            "kappa_ext_mhz" => self.kappa_ext_mhz = number(value)?,
            "f_m_ghz" => self.f_m_ghz = number(value)?,
            "gamma_i_mhz" => self.gamma_i_mhz = number(value)?,
            "k_eff_sq" => self.k_eff_sq = number(value)?,
            "n_cav" => self.pump = Pump::PhotonNumber(number(value)?),
            "g_om_mhz" => self.pump = Pump::CouplingMhz(number(value)?),
            "c0_ff" => self.c0_ff = number(value)?,
            "r0_kohm" => self.r0_kohm = number(value)?,
            "temperature_mk" => self.temperature_mk = number(value)?,
            "j_ghz" => self.j_ghz = number(value)?,
            "z_tx_ohm" => self.z_tx_ohm = number(value)?,
            "detuning_ghz" => self.detuning_ghz = Some(number(value)?),
            "r_l_mohm" => self.r_l_mohm = number(value)?,
            "model" => {
                self.model = match value {
                    "mbvd" => Model::Mbvd,
                    "bvd" => Model::Bvd,
                    _ => return Err(format!("expected `mbvd` or `bvd`, got `{value}`")),
                }
            }
            "topology" => {
                self.topology = Some(
                    TopologySelection::parse(value)
                        .ok_or_else(|| format!("expected `one-ring`, `two-ring` or `both`, got `{value}`"))?,
                )
            }
            "eta_link" => self.eta_link = number(value)?,
            "eta_det" => self.eta_det = number(value)?,
            "t_reset_us" => self.t_reset_us = number(value)?,
            "t_sep_ns" => self.t_sep_ns = Some(number(value)?),
            "c_t_ff" => self.c_t_ff = Some(number(value)?),
            "l_nh" => self.l_nh = Some(number(value)?),
            _ => unreachable!("key list and setters disagree"),
        }
        Ok(())
    }

    fn validate(&self, source_name: &str) -> Result<()> {
        let err = |field: &str, message: String| CliError::Config {
            source_name: source_name.to_string(),
            location: Location {
                line: None,
                field: Some(field.to_string()),
            },
            message,
        };
        let core = |e: CoreError| match e {
            CoreError::Domain { field, reason, value } => err(config_key(field), format!("{reason} (got {value})")),
            other => err("configuration", other.to_string()),
        };
        if let Pump::CouplingMhz(g) = self.pump {
            if !(g > 0.0) {
                return Err(err("g_om_mhz", format!("must be strictly positive (got {g})")));
            }
        }
        if !(self.r_l_mohm >= 0.0) {
            return Err(err("r_l_mohm", format!("must not be negative (got {})", self.r_l_mohm)));
        }
        if let Some(c) = self.c_t_ff {
            if !(c >= 0.0) {
                return Err(err("c_t_ff", format!("must not be negative (got {c})")));
            }
        }
        if let Some(l) = self.l_nh {
            if !(l > 0.0) {
                return Err(err("l_nh", format!("must be strictly positive (got {l})")));
            }
            if self.c_t_ff.is_none() {
                return Err(err("l_nh", "a given inductor also needs `c_t_ff`".to_string()));
            }
        }
        self.device().validate().map_err(core)?;
        for protocol in [Protocol::TypeI, Protocol::TypeII] {
            self.protocol(protocol, Topology::OneRing).validate().map_err(core)?;
        }
        Ok(())
    }

    /// Device parameters in SI units.
    pub fn device(&self) -> DeviceParams {
        let f_m = scaled(self.f_m_ghz, 9);
        let n_cav = match self.pump {
            Pump::PhotonNumber(n) => n,
            Pump::CouplingMhz(g) => (scaled(g, 6) / self.g_om0_hz).powi(2),
        };
        let device = DeviceParams {
            g_om0: self.g_om0_hz,
            f_opt: scaled(self.f_opt_thz, 12),
            kappa_i: scaled(self.kappa_i_mhz, 6),
            kappa_ext: scaled(self.kappa_ext_mhz, 6),
            f_m,
            gamma_i: scaled(self.gamma_i_mhz, 6),
            k_eff_sq: self.k_eff_sq,
            n_cav,
            c0: scaled(self.c0_ff, -15),
            r0: scaled(self.r0_kohm, 3),
            temperature: scaled(self.temperature_mk, -3),
            j_coupling: scaled(self.j_ghz, 9),
            z_tx: self.z_tx_ohm,
            detuning: self.detuning_ghz.map_or(-f_m, |d| scaled(d, 9)),
        };
        match self.model {
            Model::Mbvd => device,
            Model::Bvd => device.lossless(),
        }
    }

    pub fn protocol(&self, protocol: Protocol, topology: Topology) -> ProtocolConfig {
        ProtocolConfig {
            protocol,
            eta_link: self.eta_link,
            eta_det: self.eta_det,
            t_reset: scaled(self.t_reset_us, -6),
            t_sep: self.t_sep_ns.map(|t| scaled(t, -9)),
            topology,
        }
    }

    /// Matching-loss resistance R_L in ohms.
    pub fn r_l(&self) -> f64 {
        scaled(self.r_l_mohm, -3)
    }

    fn entries(&self) -> Vec<(&'static str, Value)> {
        let num = |v: f64| Value::from(v);
        let mut out = vec![
            ("g_om0_hz", num(self.g_om0_hz)),
            ("f_opt_thz", num(self.f_opt_thz)),
            ("kappa_i_mhz", num(self.kappa_i_mhz)),
            ("kappa_ext_mhz", num(self.kappa_ext_mhz)),
            ("f_m_ghz", num(self.f_m_ghz)),
            ("gamma_i_mhz", num(self.gamma_i_mhz)),
            ("k_eff_sq", num(self.k_eff_sq)),
        ];
        out.push(match self.pump {
            Pump::PhotonNumber(n) => ("n_cav", num(n)),
            Pump::CouplingMhz(g) => ("g_om_mhz", num(g)),
        });
        out.extend([
            ("c0_ff", num(self.c0_ff)),
            ("r0_kohm", num(self.r0_kohm)),
            ("temperature_mk", num(self.temperature_mk)),
            ("j_ghz", num(self.j_ghz)),
            ("z_tx_ohm", num(self.z_tx_ohm)),
        ]);
        if let Some(d) = self.detuning_ghz {
            out.push(("detuning_ghz", num(d)));
        }
        out.push(("r_l_mohm", num(self.r_l_mohm)));
        out.push(("model", Value::from(self.model.label())));
        if let Some(t) = self.topology {
            out.push(("topology", Value::from(t.label())));
        }
        out.extend([
            ("eta_link", num(self.eta_link)),
            ("eta_det", num(self.eta_det)),
            ("t_reset_us", num(self.t_reset_us)),
        ]);
        for (key, value) in [("t_sep_ns", self.t_sep_ns), ("c_t_ff", self.c_t_ff), ("l_nh", self.l_nh)] {
            if let Some(v) = value {
                out.push((key, num(v)));
            }
        }
        out
    }

    /// Canonical flat text; parses back to an identical configuration.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        for (key, value) in self.entries() {
            match value {
                Value::String(text) => writeln!(s, "{key} = {text}").unwrap(),
                // Display for f64 is the shortest representation that reads back exactly.
                Value::Number(n) => writeln!(s, "{key} = {}", n.as_f64().unwrap()).unwrap(),
                _ => unreachable!(),
            }
        }
        s
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
    }
}
