//! Run configuration: TOML loading with strict key checking, and the
//! canonical TOML rendering used by manifests.
//!
//! Values are kept in the file's units (C in kbit/s, tau and sifs in ms)
//! so a rendered config reads back to exactly the same values.

use std::fmt::Write as _;
use std::path::Path;

use macsim::sim::{CsmaSettings, SimConfig, DEFAULT_BACKOFF_WINDOW};
use macsim::{AccessTechnique, Scale, ScenarioKind, SweepSpec, TechniqueParams};
use toml::{Table, Value};

use crate::error::CliError;
use crate::format::toml_float;

/// K used where a technique has no default for it.
pub const DEFAULT_KAPPA: f64 = 2.0;

const TECHNIQUE_KEYS: [&str; 8] = ["N", "L", "C", "tau", "P", "lambda", "K", "a"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechniqueSection {
    pub nodes: u32,
    pub frame_bits: u32,
    pub rate_kbps: f64,
    pub slot_ms: f64,
    pub failure_prob: Option<f64>,
    pub arrival_rate: Option<f64>,
    pub kappa: Option<f64>,
    pub prop_delay: f64,
}

impl TechniqueSection {
    pub fn defaults(tech: AccessTechnique) -> Self {
        let p = TechniqueParams::defaults(tech);
        TechniqueSection {
            nodes: p.nodes,
            frame_bits: p.frame_bits,
            rate_kbps: p.channel_rate / 1000.0,
            slot_ms: p.slot * 1000.0,
            failure_prob: p.failure_prob,
            arrival_rate: p.arrival_rate,
            kappa: p.kappa,
            prop_delay: p.prop_delay,
        }
    }

    pub fn params(&self) -> TechniqueParams {
        TechniqueParams {
            nodes: self.nodes,
            frame_bits: self.frame_bits,
            channel_rate: self.rate_kbps * 1000.0,
            slot: self.slot_ms / 1000.0,
            failure_prob: self.failure_prob,
            arrival_rate: self.arrival_rate,
            kappa: self.kappa,
            prop_delay: self.prop_delay,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Spec(SweepSpec),
    Values(Vec<f64>),
}

impl SweepAxis {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            SweepAxis::Spec(spec) => Ok(macsim::sweep::make_sweep(spec)?),
            SweepAxis::Values(v) => Ok(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsmaSection {
    pub sifs_ms: f64,
    pub rts_bits: u32,
    pub cts_bits: u32,
    pub ack_bits: u32,
    pub max_retries: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub horizon: f64,
    pub seeds: Vec<u64>,
    pub backoff_window: u32,
    pub aloha_max_retries: Option<u32>,
    pub csma: CsmaSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Indexed like [`AccessTechnique::ALL`].
    pub techniques: [TechniqueSection; 5],
    pub sweep: SweepAxis,
    pub sim: SimSection,
    pub scenario: ScenarioKind,
    pub selected: Vec<AccessTechnique>,
}

fn index(tech: AccessTechnique) -> usize {
    AccessTechnique::ALL.iter().position(|&t| t == tech).expect("technique in ALL")
}

impl Default for Config {
    fn default() -> Self {
        let techniques = AccessTechnique::ALL.map(TechniqueSection::defaults);
        let csma_slot = techniques[index(AccessTechnique::CsmaCa)].slot_ms;
        let defaults = CsmaSettings::defaults_for(csma_slot);
        Config {
            techniques,
            sweep: SweepAxis::Spec(SweepSpec { start: 0.01, stop: 1.0, points: 25, scale: Scale::Logarithmic }),
            sim: SimSection {
                horizon: 100.0,
                seeds: vec![1],
                backoff_window: DEFAULT_BACKOFF_WINDOW,
                aloha_max_retries: None,
                csma: CsmaSection {
                    sifs_ms: defaults.sifs,
                    rts_bits: defaults.rts_bits,
                    cts_bits: defaults.cts_bits,
                    ack_bits: defaults.ack_bits,
                    max_retries: defaults.max_retries,
                },
            },
            scenario: ScenarioKind::ThroughputVsLoad,
            selected: AccessTechnique::ALL.to_vec(),
        }
    }
}

impl Config {
    pub fn section(&self, tech: AccessTechnique) -> &TechniqueSection {
        &self.techniques[index(tech)]
    }

    /// Validated parameters for the analytic models, with blank K cells
    /// filled with [`DEFAULT_KAPPA`].
    pub fn analytic_params(&self, tech: AccessTechnique) -> Result<TechniqueParams, CliError> {
        let mut p = self.section(tech).params();
        p.kappa.get_or_insert(DEFAULT_KAPPA);
        Ok(p.validate()?)
    }

    pub fn sim_config(&self, tech: AccessTechnique, load: f64, seed: u64) -> SimConfig {
        let s = &self.sim;
        let base = SimConfig::at_load(tech, self.section(tech).params(), load, s.horizon, seed);
        SimConfig {
            backoff_window: s.backoff_window,
            aloha_max_retries: s.aloha_max_retries,
            csma: CsmaSettings {
                sifs: s.csma.sifs_ms / 1000.0,
                rts_bits: s.csma.rts_bits,
                cts_bits: s.csma.cts_bits,
                ack_bits: s.csma.ack_bits,
                max_retries: s.csma.max_retries,
            },
            ..base
        }
    }

    /// Fields that differ from the defaults, as `section.key = value`.
    pub fn overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        for tech in AccessTechnique::ALL {
            let d = TechniqueSection::defaults(tech);
            let s = self.section(tech);
            let name = tech.name();
            let mut note = |key: &str, differs: bool, value: String| {
                if differs {
                    out.push(format!("{name}.{key} = {value}"));
                }
            };
            note("N", s.nodes != d.nodes, s.nodes.to_string());
            note("L", s.frame_bits != d.frame_bits, s.frame_bits.to_string());
            note("C", s.rate_kbps != d.rate_kbps, toml_float(s.rate_kbps));
            note("tau", s.slot_ms != d.slot_ms, toml_float(s.slot_ms));
            note("P", s.failure_prob != d.failure_prob, opt_float(s.failure_prob));
            note("lambda", s.arrival_rate != d.arrival_rate, opt_float(s.arrival_rate));
            note("K", s.kappa != d.kappa, opt_float(s.kappa));
            note("a", s.prop_delay != d.prop_delay, toml_float(s.prop_delay));
        }
        out
    }

    /// Techniques whose K cell is blank and falls back to [`DEFAULT_KAPPA`].
    pub fn kappa_filled(&self) -> Vec<AccessTechnique> {
        AccessTechnique::ALL.into_iter().filter(|&t| self.section(t).kappa.is_none()).collect()
    }

    /// Canonical TOML of every resolved value; loading it yields `self`.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let names: Vec<String> = self.selected.iter().map(|t| format!("\"{}\"", t.name())).collect();
        let _ = writeln!(s, "[run]\nscenario = \"{}\"\ntechniques = [{}]\n", self.scenario.name(), names.join(", "));

        s.push_str("[sweep]\n");
        match &self.sweep {
            SweepAxis::Spec(spec) => {
                let scale = match spec.scale {
                    Scale::Linear => "lin",
                    Scale::Logarithmic => "log",
                };
                let _ = writeln!(
                    s,
                    "start = {}\nstop = {}\npoints = {}\nscale = \"{scale}\"",
                    toml_float(spec.start),
                    toml_float(spec.stop),
                    spec.points
                );
            }
            SweepAxis::Values(v) => {
                let v: Vec<String> = v.iter().map(|&x| toml_float(x)).collect();
                let _ = writeln!(s, "values = [{}]", v.join(", "));
            }
        }

        let sim = &self.sim;
        let seeds: Vec<String> = sim.seeds.iter().map(|&x| seed_literal(x)).collect();
        let _ = writeln!(
            s,
            "\n[sim]\nhorizon = {}\nseeds = [{}]\nbackoff_window = {}",
            toml_float(sim.horizon),
            seeds.join(", "),
            sim.backoff_window
        );
        if let Some(r) = sim.aloha_max_retries {
            let _ = writeln!(s, "aloha_max_retries = {r}");
        }
        let c = &sim.csma;
        let _ = writeln!(
            s,
            "\n[sim.csma]\nsifs = {}\nrts_bits = {}\ncts_bits = {}\nack_bits = {}\nmax_retries = {}",
            toml_float(c.sifs_ms),
            c.rts_bits,
            c.cts_bits,
            c.ack_bits,
            c.max_retries
        );

        for tech in AccessTechnique::ALL {
            let t = self.section(tech);
            let _ = writeln!(
                s,
                "\n[{}]\nN = {}\nL = {}\nC = {}\ntau = {}\na = {}",
                tech.name(),
                t.nodes,
                t.frame_bits,
                toml_float(t.rate_kbps),
                toml_float(t.slot_ms),
                toml_float(t.prop_delay)
            );
            for (key, v) in [("P", t.failure_prob), ("lambda", t.arrival_rate), ("K", t.kappa)] {
                if let Some(v) = v {
                    let _ = writeln!(s, "{key} = {}", toml_float(v));
                }
            }
        }
        s
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(toml_float).unwrap_or_else(|| "blank".into())
}

/// TOML integers are signed 64-bit; larger seeds are written as strings.
fn seed_literal(seed: u64) -> String {
    if seed <= i64::MAX as u64 {
        seed.to_string()
    } else {
        format!("\"{seed}\"")
    }
}

struct Reader<'a> {
    path: &'a str,
}

impl Reader<'_> {
    fn err(&self, message: impl Into<String>) -> CliError {
        CliError::config(self.path, message)
    }

    fn check_keys(&self, table: &Table, section: &str, allowed: &[&str]) -> Result<(), CliError> {
        match table.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(self.err(format!("unknown key `{k}` in [{section}]"))),
            None => Ok(()),
        }
    }

    fn table<'t>(&self, root: &'t Table, key: &str) -> Result<Option<&'t Table>, CliError> {
        match root.get(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t)),
            Some(_) => Err(self.err(format!("`{key}` must be a section"))),
        }
    }

    fn float(&self, section: &str, key: &str, v: &Value) -> Result<f64, CliError> {
        match v {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.err(format!("[{section}] {key} must be a number"))),
        }
    }

    fn uint(&self, section: &str, key: &str, v: &Value) -> Result<u32, CliError> {
        match v {
            Value::Integer(i) => {
                u32::try_from(*i).map_err(|_| self.err(format!("[{section}] {key} must be a non-negative integer (got {i})")))
            }
            _ => Err(self.err(format!("[{section}] {key} must be an integer"))),
        }
    }

    fn string<'v>(&self, section: &str, key: &str, v: &'v Value) -> Result<&'v str, CliError> {
        v.as_str().ok_or_else(|| self.err(format!("[{section}] {key} must be a string")))
    }

    fn seed(&self, v: &Value) -> Result<u64, CliError> {
        match v {
            Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            Value::String(s) => s.parse().map_err(|_| self.err(format!("invalid seed `{s}`"))),
            _ => Err(self.err("seeds must be non-negative integers")),
        }
    }

    fn technique(&self, section: &str, table: &Table, into: &mut TechniqueSection) -> Result<(), CliError> {
        self.check_keys(table, section, &TECHNIQUE_KEYS)?;
        for (key, v) in table {
            match key.as_str() {
                "N" => into.nodes = self.uint(section, key, v)?,
                "L" => into.frame_bits = self.uint(section, key, v)?,
                "C" => into.rate_kbps = self.float(section, key, v)?,
                "tau" => into.slot_ms = self.float(section, key, v)?,
                "P" => into.failure_prob = Some(self.float(section, key, v)?),
                "lambda" => into.arrival_rate = Some(self.float(section, key, v)?),
                "K" => into.kappa = Some(self.float(section, key, v)?),
                "a" => into.prop_delay = self.float(section, key, v)?,
                _ => unreachable!("keys checked above"),
            }
        }
        Ok(())
    }
}

/// Parses configuration text. `origin` names the source in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<Config, CliError> {
    let r = Reader { path: origin };
    let root: Table = text.parse().map_err(|e: toml::de::Error| r.err(e.to_string().trim_end().to_string()))?;

    let mut allowed_sections = vec!["common", "sweep", "sim", "run", "manifest"];
    allowed_sections.extend(AccessTechnique::ALL.iter().map(|t| t.name()));
    if let Some(k) = root.keys().find(|k| !allowed_sections.contains(&k.as_str())) {
        return Err(r.err(format!("unknown key `{k}` (top-level section)")));
    }

    let mut cfg = Config::default();
    if let Some(common) = r.table(&root, "common")? {
        for t in cfg.techniques.iter_mut() {
            r.technique("common", common, t)?;
        }
    }
    for tech in AccessTechnique::ALL {
        if let Some(t) = r.table(&root, tech.name())? {
            r.technique(tech.name(), t, &mut cfg.techniques[index(tech)])?;
        }
    }

    if let Some(sweep) = r.table(&root, "sweep")? {
        r.check_keys(sweep, "sweep", &["start", "stop", "points", "scale", "values"])?;
        if let Some(values) = sweep.get("values") {
            if sweep.len() > 1 {
                return Err(r.err("[sweep] takes either `values` or start/stop/points/scale, not both"));
            }
            let list = values.as_array().ok_or_else(|| r.err("[sweep] values must be an array"))?;
            let v = list.iter().map(|x| r.float("sweep", "values", x)).collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() || v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Sweep(macsim::SweepError::Syntax(
                    "[sweep] values must be non-negative and strictly increasing".into(),
                )));
            }
            cfg.sweep = SweepAxis::Values(v);
        } else {
            let SweepAxis::Spec(mut spec) = cfg.sweep.clone() else { unreachable!("default sweep is a spec") };
            for (key, v) in sweep {
                match key.as_str() {
                    "start" => spec.start = r.float("sweep", key, v)?,
                    "stop" => spec.stop = r.float("sweep", key, v)?,
                    "points" => spec.points = r.uint("sweep", key, v)? as usize,
                    "scale" => spec.scale = r.string("sweep", key, v)?.parse()?,
                    _ => unreachable!("keys checked above"),
                }
            }
            macsim::sweep::make_sweep(&spec)?;
            cfg.sweep = SweepAxis::Spec(spec);
        }
    }

    // SIFS defaults to a fiftieth of the CSMA/CA slot as finally resolved
    cfg.sim.csma.sifs_ms = cfg.section(AccessTechnique::CsmaCa).slot_ms / 50.0;
    if let Some(sim) = r.table(&root, "sim")? {
        r.check_keys(sim, "sim", &["horizon", "seeds", "seed", "backoff_window", "aloha_max_retries", "csma"])?;
        for (key, v) in sim {
            match key.as_str() {
                "horizon" => cfg.sim.horizon = r.float("sim", key, v)?,
                "seed" => cfg.sim.seeds = vec![r.seed(v)?],
                "seeds" => {
                    let list = v.as_array().ok_or_else(|| r.err("[sim] seeds must be an array"))?;
                    cfg.sim.seeds = list.iter().map(|x| r.seed(x)).collect::<Result<_, _>>()?;
                }
                "backoff_window" => cfg.sim.backoff_window = r.uint("sim", key, v)?,
                "aloha_max_retries" => cfg.sim.aloha_max_retries = Some(r.uint("sim", key, v)?),
                "csma" => {
                    let t = v.as_table().ok_or_else(|| r.err("`sim.csma` must be a section"))?;
                    r.check_keys(t, "sim.csma", &["sifs", "rts_bits", "cts_bits", "ack_bits", "max_retries"])?;
                    let c = &mut cfg.sim.csma;
                    for (key, v) in t {
                        match key.as_str() {
                            "sifs" => c.sifs_ms = r.float("sim.csma", key, v)?,
                            "rts_bits" => c.rts_bits = r.uint("sim.csma", key, v)?,
                            "cts_bits" => c.cts_bits = r.uint("sim.csma", key, v)?,
                            "ack_bits" => c.ack_bits = r.uint("sim.csma", key, v)?,
                            "max_retries" => c.max_retries = r.uint("sim.csma", key, v)?,
                            _ => unreachable!("keys checked above"),
                        }
                    }
                }
                _ => unreachable!("keys checked above"),
            }
        }
        if cfg.sim.seeds.is_empty() {
            return Err(r.err("[sim] seeds must not be empty"));
        }
    }

    if let Some(run) = r.table(&root, "run")? {
        r.check_keys(run, "run", &["scenario", "techniques"])?;
        if let Some(v) = run.get("scenario") {
            let name = r.string("run", "scenario", v)?;
            cfg.scenario = name.parse().map_err(|e: String| r.err(e))?;
        }
        if let Some(v) = run.get("techniques") {
            let list = v.as_array().ok_or_else(|| r.err("[run] techniques must be an array"))?;
            let names = list.iter().map(|x| r.string("run", "techniques", x)).collect::<Result<Vec<_>, _>>()?;
            cfg.selected = parse_technique_list(&names)?;
        }
    }

    if let Some(m) = r.table(&root, "manifest")? {
        r.check_keys(m, "manifest", crate::manifest::MANIFEST_KEYS)?;
    }

    for tech in AccessTechnique::ALL {
        cfg.section(tech).params().validate().map_err(|e| r.err(format!("[{}] {e}", tech.name())))?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

/// Technique names in the given order; duplicates are removed. An empty
/// list is a usage error.
pub fn parse_technique_list(names: &[&str]) -> Result<Vec<AccessTechnique>, CliError> {
    let mut out = Vec::new();
    for name in names.iter().map(|n| n.trim()).filter(|n| !n.is_empty()) {
        let tech: AccessTechnique = name.parse().map_err(|_| CliError::UnknownTechnique(name.to_string()))?;
        if !out.contains(&tech) {
            out.push(tech);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("technique list is empty".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("", "empty").unwrap();
        assert_eq!(c, Config::default());
        let p = c.section(AccessTechnique::Tdma).params();
        assert_eq!(p, TechniqueParams::defaults(AccessTechnique::Tdma));
        assert_eq!(c.sim.csma.sifs_ms, 0.1);
        assert!(c.overrides().is_empty());
    }

    #[test]
    fn common_then_section() {
        let c = parse_config("[common]\nN = 10\n[tdma]\nN = 4\n", "t").unwrap();
        assert_eq!(c.section(AccessTechnique::Tdma).nodes, 4);
        assert_eq!(c.section(AccessTechnique::Fdma).nodes, 10);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config("[tdma]\nlenght = 512\n", "t").unwrap_err();
        assert!(e.to_string().contains("unknown key `lenght`"), "{e}");
        assert!(parse_config("[bogus]\n", "t").unwrap_err().to_string().contains("unknown key"));
        assert!(parse_config("[sim.csma]\nsfs = 1\n", "t").unwrap_err().to_string().contains("unknown key"));
    }

    #[test]
    fn out_of_range_rejected() {
        let e = parse_config("[fdma]\nP = 1.5\n", "t").unwrap_err();
        assert!(e.to_string().contains("P ≤ 1 violated"), "{e}");
        assert_eq!(e.exit_code(), 5);
    }

    #[test]
    fn canonical_toml_round_trips() {
        let text = "[common]\nL = 200\nC = 12.345\n[sim]\nseeds = [1, \"18446744073709551615\"]\naloha_max_retries = 0\n\
                    [sweep]\nvalues = [0.1, 0.3]\n[run]\ntechniques = [\"tdma\", \"aloha\"]\nscenario = \"delay-vs-load\"\n";
        let c = parse_config(text, "t").unwrap();
        let again = parse_config(&c.to_toml(), "t").unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_toml(), again.to_toml());
    }

    #[test]
    fn technique_lists() {
        assert_eq!(parse_technique_list(&["tdma", "TDMA", "fdma"]).unwrap(), vec![AccessTechnique::Tdma, AccessTechnique::Fdma]);
        assert_eq!(parse_technique_list(&[]).unwrap_err().exit_code(), 2);
        assert_eq!(parse_technique_list(&["token-ring"]).unwrap_err().exit_code(), 3);
    }
}
