//! Run manifests: every CSV gets a `<csv>.manifest.toml` beside it that
//! holds the fully resolved configuration. Passing a manifest back as
//! `--config` reproduces the CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use macsim::AccessTechnique;

use crate::config::{Config, DEFAULT_KAPPA};
use crate::error::CliError;
use crate::format::toml_float;

/// Keys of the `[manifest]` section. They are informational and ignored
/// when a manifest is loaded as a config.
pub const MANIFEST_KEYS: &[&str] = &["tool", "command", "timestamp", "output", "notes", "overrides"];

/// Forms used where the closed-form relations needed repair.
pub const MODEL_NOTES: &[&str] = &[
    "csma-ca throughput vs load: classical 1-persistent CSMA curve",
    "csma-ca delay vs throughput: (e^(2S)-1)((K-1)/2+2a+1)+1+a",
    "csma-ca delay vs load: delay vs throughput evaluated at the throughput vs load value",
    "pure-aloha delay vs load: (e^G-1)((K-1)/2+2a+1)+1+a",
    "tdma throughput vs load: L/C + q/(2(1-q))·N·L/C + N·L/(2C), additive like the delay relation",
    "tdma/fdma delay vs load: divisor read as the channel rate C",
    "tdma/fdma: queue occupancy q is the sweep argument (S for delay vs throughput, G otherwise)",
    "tdma/fdma values are seconds; contention delays are in frame times",
];

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.toml");
    PathBuf::from(s)
}

pub struct Manifest<'a> {
    pub command: &'a str,
    pub output: &'a Path,
    pub config: &'a Config,
    pub notes: Vec<String>,
}

impl Manifest<'_> {
    pub fn general_notes(config: &Config) -> Vec<String> {
        let mut notes: Vec<String> = MODEL_NOTES.iter().map(|s| s.to_string()).collect();
        let filled = config.kappa_filled();
        if !filled.is_empty() {
            let names: Vec<&str> = filled.iter().map(|t| t.name()).collect();
            notes.push(format!("K blank for {}; analytic delays use K = {}", names.join(", "), toml_float(DEFAULT_KAPPA)));
        }
        notes.push("a is the end-to-end propagation delay in frame times (default 0.01)".into());
        notes
    }

    pub fn sim_notes(config: &Config) -> Vec<String> {
        let mut notes = vec![
            "per-node lambda = G·C/(L·N); slotted-aloha counts G per slot: lambda = G/(N·tau)".to_string(),
            "measured_G/measured_T are per frame time L/C; native_G/native_T per slot for slotted-aloha".to_string(),
            "propagation delay a·L/C; retransmission backoff uniform in [1, backoff_window] slots".to_string(),
            "fdma: private sub-band per node, frame airtime N·L/C".to_string(),
        ];
        let corrupted: Vec<&str> = AccessTechnique::ALL
            .iter()
            .filter(|&&t| config.section(t).failure_prob.is_some())
            .map(|t| t.name())
            .collect();
        notes.push(if corrupted.is_empty() {
            "no per-packet error probability configured".to_string()
        } else {
            format!("per-packet error probability P applied to data frames of: {}", corrupted.join(", "))
        });
        notes
    }

    pub fn render(&self, timestamp: u64) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let list = |items: &[String]| {
            if items.is_empty() {
                "[]".to_string()
            } else {
                let body: Vec<String> = items.iter().map(|s| format!("    {},\n", quote(s))).collect();
                format!("[\n{}]", body.concat())
            }
        };
        let mut s = String::new();
        let _ = writeln!(s, "[manifest]");
        let _ = writeln!(s, "tool = {}", quote(&format!("macsim {}", env!("CARGO_PKG_VERSION"))));
        let _ = writeln!(s, "command = {}", quote(self.command));
        let _ = writeln!(s, "timestamp = {timestamp}");
        let _ = writeln!(s, "output = {}", quote(&self.output.display().to_string()));
        let _ = writeln!(s, "overrides = {}", list(&self.config.overrides()));
        let _ = writeln!(s, "notes = {}\n", list(&self.notes));
        s.push_str(&self.config.to_toml());
        s
    }

    pub fn write(&self) -> Result<PathBuf, CliError> {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let path = manifest_path(self.output);
        std::fs::write(&path, self.render(now)).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
