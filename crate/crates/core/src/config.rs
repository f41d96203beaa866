//! Scenario configuration.
//!
//! The file format is line oriented:
//!
//! ```text
//! # comment
//! [section]
//! key = value
//! ```
//!
//! Every key belongs to a section, unknown sections and keys are errors, and
//! an empty file yields the defaults. [`ScenarioConfig::to_config_string`]
//! emits every field, so emitting and re-parsing reproduces the config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::hccc::HcccParams;
use crate::mac::{MacTiming, RetryBackoff};
use crate::metrics::FairnessForm;
use crate::topology::UnreachablePolicy;
use crate::traffic::{ArrivalProcess, Scheme};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key '{key}' in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: invalid value '{value}' for {field}: {message}")]
    InvalidValue {
        line: usize,
        field: String,
        value: String,
        message: String,
    },
    #[error("{field} out of range: {message}")]
    Range { field: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyConfig {
    pub node_count: usize,
    pub area_side: f64,
    pub radius: f64,
    pub source_count: usize,
    pub unreachable: UnreachablePolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficConfig {
    pub offered_load: f64,
    pub arrival: ArrivalProcess,
    pub aimd_alpha: f64,
    pub buffer_capacity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyConfig {
    pub initial: f64,
    pub per_packet: f64,
    pub control_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub seeds: Vec<u64>,
    pub duration_s: f64,
    pub warmup_s: f64,
    pub window_s: f64,
    pub fairness: FairnessForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceFlags {
    pub mac: bool,
    pub hccc: bool,
    pub packets: bool,
    pub topology: bool,
}

impl TraceFlags {
    pub fn any(&self) -> bool {
        self.mac || self.hccc || self.packets || self.topology
    }

    /// Enables the named trace; returns false for an unknown name.
    pub fn enable(&mut self, name: &str) -> bool {
        match name {
            "mac" => self.mac = true,
            "hccc" => self.hccc = true,
            "packets" => self.packets = true,
            "topology" => self.topology = true,
            _ => return false,
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub topology: TopologyConfig,
    pub traffic: TrafficConfig,
    pub mac: MacTiming,
    pub hccc: HcccParams,
    pub energy: EnergyConfig,
    pub run: RunConfig,
    pub trace: TraceFlags,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            topology: TopologyConfig {
                node_count: 100,
                area_side: 100.0,
                radius: 30.0,
                source_count: 20,
                unreachable: UnreachablePolicy::Exclude,
            },
            traffic: TrafficConfig {
                offered_load: 5.0,
                arrival: ArrivalProcess::Cbr,
                aimd_alpha: 0.25,
                buffer_capacity: 500,
            },
            mac: MacTiming::default(),
            hccc: HcccParams::default(),
            energy: EnergyConfig {
                initial: 0.1,
                per_packet: 1e-4,
                control_cost: 0.0,
            },
            run: RunConfig {
                scheme: Scheme::Hccc,
                seeds: vec![1],
                duration_s: 300.0,
                warmup_s: 20.0,
                window_s: 10.0,
                fairness: FairnessForm::Jain,
            },
            trace: TraceFlags::default(),
        }
    }
}

fn parse_value<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_seeds(value: &str) -> Result<Vec<u64>, String> {
    let seeds: Vec<u64> = value
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if seeds.is_empty() {
        return Err("at least one seed required".into());
    }
    Ok(seeds)
}

fn parse_policy(value: &str) -> Result<UnreachablePolicy, String> {
    match value {
        "exclude" => Ok(UnreachablePolicy::Exclude),
        "fail" => Ok(UnreachablePolicy::Fail),
        _ => Err("expected exclude or fail".into()),
    }
}

fn parse_retry(value: &str) -> Result<RetryBackoff, String> {
    match value {
        "fresh" => Ok(RetryBackoff::Fresh),
        "doubling" => Ok(RetryBackoff::Doubling),
        _ => Err("expected fresh or doubling".into()),
    }
}

fn range(field: &str, ok: bool, message: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range {
            field: field.to_string(),
            message: message.to_string(),
        })
    }
}

const SECTIONS: [&str; 7] = ["topology", "traffic", "mac", "hccc", "energy", "run", "trace"];

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::UnknownSection {
                        line: line_no,
                        name: name.to_string(),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                message: format!("expected 'key = value', found '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let Some(sec) = section.as_deref() else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    message: format!("key '{key}' appears before any [section]"),
                });
            };
            cfg.set(sec, key, value).map_err(|e| match e {
                SetError::UnknownKey => ConfigError::UnknownKey {
                    line: line_no,
                    section: sec.to_string(),
                    key: key.to_string(),
                },
                SetError::Invalid(message) => ConfigError::InvalidValue {
                    line: line_no,
                    field: format!("{sec}.{key}"),
                    value: value.to_string(),
                    message,
                },
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its textual form, without range validation.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), SetError> {
        let v = value;
        match (section, key) {
            ("topology", "node_count") => self.topology.node_count = parse_value(v)?,
            ("topology", "area_side") => self.topology.area_side = parse_value(v)?,
            ("topology", "radius") => self.topology.radius = parse_value(v)?,
            ("topology", "source_count") => self.topology.source_count = parse_value(v)?,
            ("topology", "unreachable") => self.topology.unreachable = parse_policy(v)?,

            ("traffic", "offered_load") => self.traffic.offered_load = parse_value(v)?,
            ("traffic", "packet_size") => self.mac.data_frame_bytes = parse_value(v)?,
            ("traffic", "arrival") => self.traffic.arrival = parse_value(v)?,
            ("traffic", "aimd_alpha") => self.traffic.aimd_alpha = parse_value(v)?,
            ("traffic", "buffer_capacity") => self.traffic.buffer_capacity = parse_value(v)?,

            ("mac", "bit_rate") => self.mac.bit_rate_bps = parse_value(v)?,
            ("mac", "slot_us") => self.mac.slot_us = parse_value(v)?,
            ("mac", "sifs_us") => self.mac.sifs_us = parse_value(v)?,
            ("mac", "difs_us") => self.mac.difs_us = parse_value(v)?,
            ("mac", "retry_limit") => self.mac.retry_limit = parse_value(v)?,
            ("mac", "frame_error_rate") => self.mac.frame_error_rate = parse_value(v)?,
            ("mac", "bit_error_rate") => self.mac.bit_error_rate = parse_value(v)?,
            ("mac", "control_frame_size") => self.mac.control_frame_bytes = parse_value(v)?,
            ("mac", "retry_backoff") => self.mac.retry_backoff = parse_retry(v)?,

            ("hccc", "p") => self.hccc.p = parse_value(v)?,
            ("hccc", "B_max") => self.hccc.b_max = parse_value(v)?,
            ("hccc", "W_min") => self.hccc.w_min = parse_value(v)?,
            ("hccc", "W_max") => self.hccc.w_max = parse_value(v)?,
            ("hccc", "R_min") => self.hccc.r_min = parse_value(v)?,
            ("hccc", "R_cap") => self.hccc.r_cap = parse_value(v)?,
            ("hccc", "legacy_ewma") => self.hccc.legacy_ewma = parse_bool(v)?,
            ("hccc", "feedback") => self.hccc.feedback = parse_value(v)?,

            ("energy", "initial") => self.energy.initial = parse_value(v)?,
            ("energy", "per_packet") => self.energy.per_packet = parse_value(v)?,
            ("energy", "control_cost") => self.energy.control_cost = parse_value(v)?,

            ("run", "scheme") => self.run.scheme = parse_value(v)?,
            ("run", "seeds") => self.run.seeds = parse_seeds(v)?,
            ("run", "duration") => self.run.duration_s = parse_value(v)?,
            ("run", "warmup") => self.run.warmup_s = parse_value(v)?,
            ("run", "window") => self.run.window_s = parse_value(v)?,
            ("run", "fairness_form") => self.run.fairness = parse_value(v)?,

            ("trace", "mac") => self.trace.mac = parse_bool(v)?,
            ("trace", "hccc") => self.trace.hccc = parse_bool(v)?,
            ("trace", "packets") => self.trace.packets = parse_bool(v)?,
            ("trace", "topology") => self.trace.topology = parse_bool(v)?,
            _ => return Err(SetError::UnknownKey),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.topology;
        range("topology.node_count", t.node_count >= 2, "need at least 2 nodes")?;
        range("topology.area_side", t.area_side > 0.0 && t.area_side.is_finite(), "must be positive")?;
        range("topology.radius", t.radius > 0.0 && t.radius.is_finite(), "must be positive")?;
        range(
            "topology.source_count",
            t.source_count >= 1 && t.source_count < t.node_count,
            "must be between 1 and node_count - 1",
        )?;

        let tr = &self.traffic;
        range("traffic.offered_load", tr.offered_load >= 0.0 && tr.offered_load.is_finite(), "must be >= 0")?;
        range("traffic.packet_size", self.mac.data_frame_bytes >= 1, "must be at least 1 byte")?;
        range("traffic.aimd_alpha", tr.aimd_alpha >= 0.0 && tr.aimd_alpha.is_finite(), "must be >= 0")?;
        range("traffic.buffer_capacity", tr.buffer_capacity >= 1, "must be at least 1")?;

        let m = &self.mac;
        range("mac.bit_rate", m.bit_rate_bps > 0, "must be positive")?;
        range("mac.slot_us", m.slot_us > 0, "must be positive")?;
        range("mac.sifs_us", m.sifs_us > 0, "must be positive")?;
        range("mac.difs_us", m.difs_us > 0, "must be positive")?;
        range("mac.control_frame_size", m.control_frame_bytes >= 1, "must be at least 1 byte")?;
        range(
            "mac.frame_error_rate",
            (0.0..=1.0).contains(&m.frame_error_rate),
            "must be within [0, 1]",
        )?;
        range(
            "mac.bit_error_rate",
            (0.0..1.0).contains(&m.bit_error_rate),
            "must be within [0, 1)",
        )?;

        let h = &self.hccc;
        range("hccc.p", h.p > 0.0 && h.p < 1.0, "must be within (0, 1)")?;
        range("hccc.B_max", h.b_max > 0.0 && h.b_max < 1.0, "must be within (0, 1)")?;
        range("hccc.W_min", h.w_min >= 1.0, "must be at least 1")?;
        range("hccc.W_max", h.w_max >= h.w_min && h.w_max.is_finite(), "must be >= W_min")?;
        range("hccc.R_min", h.r_min > 0.0, "must be positive")?;
        range("hccc.R_cap", h.r_cap >= h.r_min && h.r_cap.is_finite(), "must be >= R_min")?;

        let e = &self.energy;
        range("energy.initial", e.initial > 0.0 && e.initial.is_finite(), "must be positive")?;
        range("energy.per_packet", e.per_packet >= 0.0 && e.per_packet.is_finite(), "must be >= 0")?;
        range("energy.control_cost", e.control_cost >= 0.0 && e.control_cost.is_finite(), "must be >= 0")?;

        let r = &self.run;
        range("run.seeds", !r.seeds.is_empty(), "at least one seed required")?;
        range("run.duration", r.duration_s >= 0.0 && r.duration_s.is_finite(), "must be >= 0")?;
        range("run.warmup", r.warmup_s >= 0.0 && r.warmup_s.is_finite(), "must be >= 0")?;
        range("run.window", r.window_s > 0.0 && r.window_s.is_finite(), "must be positive")?;
        Ok(())
    }

    /// All fields in parseable form.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let t = &self.topology;
        let _ = writeln!(s, "[topology]");
        let _ = writeln!(s, "node_count = {}", t.node_count);
        let _ = writeln!(s, "area_side = {}", t.area_side);
        let _ = writeln!(s, "radius = {}", t.radius);
        let _ = writeln!(s, "source_count = {}", t.source_count);
        let _ = writeln!(s, "unreachable = {}", t.unreachable.as_str());

        let tr = &self.traffic;
        let _ = writeln!(s, "\n[traffic]");
        let _ = writeln!(s, "offered_load = {}", tr.offered_load);
        let _ = writeln!(s, "packet_size = {}", self.mac.data_frame_bytes);
        let _ = writeln!(s, "arrival = {}", tr.arrival.as_str());
        let _ = writeln!(s, "aimd_alpha = {}", tr.aimd_alpha);
        let _ = writeln!(s, "buffer_capacity = {}", tr.buffer_capacity);

        let m = &self.mac;
        let _ = writeln!(s, "\n[mac]");
        let _ = writeln!(s, "bit_rate = {}", m.bit_rate_bps);
        let _ = writeln!(s, "slot_us = {}", m.slot_us);
        let _ = writeln!(s, "sifs_us = {}", m.sifs_us);
        let _ = writeln!(s, "difs_us = {}", m.difs_us);
        let _ = writeln!(s, "retry_limit = {}", m.retry_limit);
        let _ = writeln!(s, "frame_error_rate = {}", m.frame_error_rate);
        let _ = writeln!(s, "bit_error_rate = {}", m.bit_error_rate);
        let _ = writeln!(s, "control_frame_size = {}", m.control_frame_bytes);
        let _ = writeln!(s, "retry_backoff = {}", m.retry_backoff.as_str());

        let h = &self.hccc;
        let _ = writeln!(s, "\n[hccc]");
        let _ = writeln!(s, "p = {}", h.p);
        let _ = writeln!(s, "B_max = {}", h.b_max);
        let _ = writeln!(s, "W_min = {}", h.w_min);
        let _ = writeln!(s, "W_max = {}", h.w_max);
        let _ = writeln!(s, "R_min = {}", h.r_min);
        let _ = writeln!(s, "R_cap = {}", h.r_cap);
        let _ = writeln!(s, "legacy_ewma = {}", h.legacy_ewma);
        let _ = writeln!(s, "feedback = {}", h.feedback.as_str());

        let e = &self.energy;
        let _ = writeln!(s, "\n[energy]");
        let _ = writeln!(s, "initial = {}", e.initial);
        let _ = writeln!(s, "per_packet = {}", e.per_packet);
        let _ = writeln!(s, "control_cost = {}", e.control_cost);

        let r = &self.run;
        let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "scheme = {}", r.scheme);
        let _ = writeln!(s, "seeds = {}", seeds.join(","));
        let _ = writeln!(s, "duration = {}", r.duration_s);
        let _ = writeln!(s, "warmup = {}", r.warmup_s);
        let _ = writeln!(s, "window = {}", r.window_s);
        let _ = writeln!(s, "fairness_form = {}", r.fairness.as_str());

        let tf = &self.trace;
        let _ = writeln!(s, "\n[trace]");
        let _ = writeln!(s, "mac = {}", tf.mac);
        let _ = writeln!(s, "hccc = {}", tf.hccc);
        let _ = writeln!(s, "packets = {}", tf.packets);
        let _ = writeln!(s, "topology = {}", tf.topology);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetError {
    UnknownKey,
    Invalid(String),
}

impl From<String> for SetError {
    fn from(s: String) -> Self {
        SetError::Invalid(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ScenarioConfig::parse_str("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.topology.node_count, 100);
        assert_eq!(cfg.topology.area_side, 100.0);
        assert_eq!(cfg.topology.radius, 30.0);
        assert_eq!(cfg.hccc.b_max, 0.4);
        assert_eq!(cfg.hccc.w_min, 1.0);
        assert_eq!(cfg.hccc.w_max, 63.0);
        assert_eq!(cfg.mac.bit_rate_bps, 1_000_000);
        assert_eq!(cfg.mac.data_frame_bytes, 200);
        assert_eq!(cfg.traffic.buffer_capacity, 500);
        assert_eq!(cfg.traffic.offered_load, 5.0);
        assert_eq!(cfg.energy.initial, 0.1);
        assert_eq!(cfg.energy.per_packet, 1e-4);
        assert_eq!(cfg.hccc.p, 0.3);
    }

    #[test]
    fn range_error_names_field() {
        let err = ScenarioConfig::parse_str("[hccc]\nB_max = 1.5\n").unwrap_err();
        match err {
            ConfigError::Range { field, .. } => assert_eq!(field, "hccc.B_max"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_round_trip() {
        let text = ScenarioConfig::default().to_config_string();
        assert_eq!(ScenarioConfig::parse_str(&text).unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn modified_config_round_trips() {
        let mut cfg = ScenarioConfig::default();
        cfg.run.seeds = vec![3, 1, 4];
        cfg.run.scheme = Scheme::AimdE2e;
        cfg.hccc.legacy_ewma = false;
        cfg.mac.frame_error_rate = 0.125;
        cfg.traffic.arrival = ArrivalProcess::Poisson;
        cfg.trace.packets = true;
        cfg.topology.unreachable = UnreachablePolicy::Fail;
        let text = cfg.to_config_string();
        assert_eq!(ScenarioConfig::parse_str(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_error_with_line() {
        let err = ScenarioConfig::parse_str("# header\n[mac]\nslot = 5\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn unknown_section_and_syntax_errors() {
        assert!(matches!(
            ScenarioConfig::parse_str("[radio]\n").unwrap_err(),
            ConfigError::UnknownSection { line: 1, .. }
        ));
        assert!(matches!(
            ScenarioConfig::parse_str("[mac]\nslot_us 5\n").unwrap_err(),
            ConfigError::Syntax { line: 2, .. }
        ));
        assert!(matches!(
            ScenarioConfig::parse_str("node_count = 5\n").unwrap_err(),
            ConfigError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            ScenarioConfig::parse_str("[topology]\nnode_count = many\n").unwrap_err(),
            ConfigError::InvalidValue { line: 2, .. }
        ));
    }

    #[test]
    fn comments_and_whitespace_ignored() {
        let cfg = ScenarioConfig::parse_str("  [run]  \n  duration = 12.5   # seconds\n\n").unwrap();
        assert_eq!(cfg.run.duration_s, 12.5);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = ScenarioConfig::from_path(Path::new("/nonexistent/hccc.conf")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/hccc.conf"));
    }
}
