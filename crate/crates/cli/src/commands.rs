use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use macsim::analytic::{generate_family, throughput_vs_load};
use macsim::sim::{run_batch, SimConfig};
use macsim::{AccessTechnique, Execution, ScenarioKind, SweepSpec};

use crate::config::{Config, SweepAxis};
use crate::csv::{analytic_row, sim_row, Table, ANALYTIC_HEADER, SIM_HEADER};
use crate::error::CliError;
use crate::format::sig6;
use crate::manifest::Manifest;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<ScenarioKind>,
    pub techniques: Option<Vec<AccessTechnique>>,
    pub sweep: Option<SweepSpec>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut Config) {
        if let Some(s) = self.scenario {
            config.scenario = s;
        }
        if let Some(t) = &self.techniques {
            config.selected = t.clone();
        }
        if let Some(s) = self.sweep {
            config.sweep = SweepAxis::Spec(s);
        }
        if let Some(seed) = self.seed {
            config.sim.seeds = vec![seed];
        }
    }
}

/// What a command reports back: text for stdout and whether every check passed.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn cmd_analytic(config: &Config, out: &Path, execution: Execution) -> Result<Outcome, CliError> {
    let sweep = config.sweep.values()?;
    let jobs = config
        .selected
        .iter()
        .map(|&t| Ok((t, config.analytic_params(t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let curves = generate_family(&jobs, config.scenario, &sweep, execution)?;

    let mut csv = String::from(ANALYTIC_HEADER);
    csv.push('\n');
    for ((tech, _), curve) in jobs.iter().zip(&curves) {
        for p in curve {
            csv.push_str(&analytic_row(*tech, config.scenario, p));
            csv.push('\n');
        }
    }
    write_file(out, &csv)?;
    let manifest = Manifest { command: "analytic", output: out, config, notes: Manifest::general_notes(config) }.write()?;
    let rows = jobs.len() * sweep.len();
    Ok(Outcome {
        text: format!("wrote {rows} rows to {} (manifest {})\n", out.display(), manifest.display()),
        passed: true,
    })
}

/// Throughput the ALOHA models predict for the attempt rate actually seen
/// on the medium, in the technique's native load unit.
fn aloha_oracle(tech: AccessTechnique, attempt_load: f64) -> Option<f64> {
    match tech {
        AccessTechnique::PureAloha | AccessTechnique::SlottedAloha => {
            let p = macsim::TechniqueParams::defaults(tech);
            throughput_vs_load(tech, attempt_load, &p).ok()
        }
        _ => None,
    }
}

/// Relative tolerance: 5 %, or three binomial standard errors over `n` units if larger.
fn tolerance(expected: f64, n: f64) -> f64 {
    let se = (expected * (1.0 - expected) / n).sqrt() / expected;
    0.05f64.max(3.0 * se)
}

pub fn cmd_simulate(config: &Config, out: &Path, execution: Execution) -> Result<Outcome, CliError> {
    let loads = config.sweep.values()?;
    let mut jobs: Vec<(f64, SimConfig)> = Vec::new();
    for &tech in &config.selected {
        for &g in &loads {
            for &seed in &config.sim.seeds {
                let c = config.sim_config(tech, g, seed);
                c.validate()?;
                jobs.push((g, c));
            }
        }
    }
    let configs: Vec<SimConfig> = jobs.iter().map(|(_, c)| *c).collect();
    let results = run_batch(&configs, execution);

    let mut csv = String::from(SIM_HEADER);
    csv.push('\n');
    let mut summary = String::from("measured vs analytic throughput at the measured attempt rate\n");
    for ((g, c), result) in jobs.iter().zip(results) {
        let s = result?;
        let unit = c.params.load_unit(c.technique);
        let n_units = c.horizon / unit;
        csv.push_str(&sim_row(c.technique, *g, c.seed, c.horizon, n_units, &s));
        csv.push('\n');
        let attempt_load = s.transmissions as f64 * unit / c.horizon;
        if let Some(expect) = aloha_oracle(c.technique, attempt_load) {
            let dev = if expect > 0.0 { (s.native_t - expect) / expect } else { 0.0 };
            let _ = writeln!(
                summary,
                "{} G={} seed={}: measured {} analytic {} (attempt load {}) dev {:+.2}%",
                c.technique,
                sig6(*g),
                c.seed,
                sig6(s.native_t),
                sig6(expect),
                sig6(attempt_load),
                dev * 100.0
            );
        }
    }
    write_file(out, &csv)?;
    let summary_path = {
        let mut p = out.as_os_str().to_owned();
        p.push(".summary.txt");
        std::path::PathBuf::from(p)
    };
    write_file(&summary_path, &summary)?;
    let mut notes = Manifest::general_notes(config);
    notes.extend(Manifest::sim_notes(config));
    let manifest = Manifest { command: "simulate", output: out, config, notes }.write()?;
    let _ = writeln!(summary, "wrote {} rows to {} (manifest {})", jobs.len(), out.display(), manifest.display());
    Ok(Outcome { text: summary, passed: true })
}

struct SimRow {
    tech: AccessTechnique,
    load: f64,
    seed: String,
    n_units: f64,
    generated: u64,
    delivered: u64,
    collided: u64,
    dropped: u64,
    in_flight: u64,
    transmissions: u64,
    measured_g: f64,
    measured_t: f64,
    native_t: f64,
    normalized_delay: Option<f64>,
}

struct AnalyticRow {
    tech: AccessTechnique,
    coord: f64,
    delay: Option<f64>,
    saturated: bool,
}

fn technique_of(t: &Table, row: &[String]) -> Result<AccessTechnique, String> {
    let name = t.get(row, "technique");
    name.parse().map_err(|_| format!("unknown technique `{name}`"))
}

fn read_sim(path: &Path) -> Result<Vec<SimRow>, CliError> {
    let cols: Vec<&str> = SIM_HEADER.split(',').collect();
    let t = Table::read(path, &cols)?;
    let parse = |row: &[String]| -> Result<SimRow, String> {
        let need = |c: &str| t.float(row, c)?.ok_or(format!("column `{c}` is empty"));
        Ok(SimRow {
            tech: technique_of(&t, row)?,
            load: need("G")?,
            seed: t.get(row, "seed").to_string(),
            n_units: need("n_units")?,
            generated: t.uint(row, "generated")?,
            delivered: t.uint(row, "delivered")?,
            collided: t.uint(row, "collided")?,
            dropped: t.uint(row, "dropped")?,
            in_flight: t.uint(row, "in_flight")?,
            transmissions: t.uint(row, "transmissions")?,
            measured_g: need("measured_G")?,
            measured_t: need("measured_T")?,
            native_t: need("native_T")?,
            normalized_delay: t.float(row, "normalized_delay")?,
        })
    };
    t.rows.iter().map(|r| parse(r).map_err(|m| CliError::input(path, m))).collect()
}

fn read_analytic(path: &Path) -> Result<(ScenarioKind, Vec<AnalyticRow>), CliError> {
    let cols: Vec<&str> = ANALYTIC_HEADER.split(',').collect();
    let t = Table::read(path, &cols)?;
    let first = t.rows.first().ok_or_else(|| CliError::input(path, "no data rows"))?;
    let scenario: ScenarioKind = t.get(first, "scenario").parse().map_err(|e: String| CliError::input(path, e))?;
    let coord_col = match scenario {
        ScenarioKind::DelayVsThroughput => "T",
        _ => "G",
    };
    let parse = |row: &[String]| -> Result<AnalyticRow, String> {
        if t.get(row, "scenario") != scenario.name() {
            return Err(format!("mixed scenarios `{}` and `{}`", scenario.name(), t.get(row, "scenario")));
        }
        Ok(AnalyticRow {
            tech: technique_of(&t, row)?,
            coord: t.float(row, coord_col)?.ok_or(format!("column `{coord_col}` is empty"))?,
            delay: t.float(row, "D")?,
            saturated: t.get(row, "saturated") == "1",
        })
    };
    let rows = t.rows.iter().map(|r| parse(r).map_err(|m| CliError::input(path, m))).collect::<Result<_, _>>()?;
    Ok((scenario, rows))
}

fn unique_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Both grids must be equal; otherwise names the first value where they part.
fn check_grid(tech: AccessTechnique, analytic: &[f64], sim: &[f64]) -> Result<(), String> {
    for i in 0..analytic.len().max(sim.len()) {
        match (analytic.get(i), sim.get(i)) {
            (Some(a), Some(s)) if a == s => continue,
            (Some(a), Some(s)) => {
                return Err(format!("{tech}: grids differ at load {} (analytic) vs {} (simulated)", sig6(*a), sig6(*s)))
            }
            (Some(a), None) => return Err(format!("{tech}: load {} missing from simulated grid", sig6(*a))),
            (None, Some(s)) => return Err(format!("{tech}: load {} missing from analytic grid", sig6(*s))),
            (None, None) => unreachable!(),
        }
    }
    Ok(())
}

const EXPECTED_ORDER: [AccessTechnique; 5] = [
    AccessTechnique::Tdma,
    AccessTechnique::Fdma,
    AccessTechnique::SlottedAloha,
    AccessTechnique::PureAloha,
    AccessTechnique::CsmaCa,
];

fn ordering_line(entries: &mut [(AccessTechnique, f64)]) -> String {
    entries.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    entries.iter().map(|(t, d)| format!("{t} {}", sig6(*d))).collect::<Vec<_>>().join(" < ")
}

pub fn cmd_compare(analytic_csv: &Path, sim_csv: &Path, report: Option<&Path>) -> Result<Outcome, CliError> {
    let (scenario, analytic) = read_analytic(analytic_csv)?;
    let sim = read_sim(sim_csv)?;
    if sim.is_empty() {
        return Err(CliError::input(sim_csv, "no data rows"));
    }

    let sim_techs: Vec<AccessTechnique> =
        AccessTechnique::ALL.into_iter().filter(|t| sim.iter().any(|r| r.tech == *t)).collect();
    let shared: Vec<AccessTechnique> =
        sim_techs.iter().copied().filter(|t| analytic.iter().any(|r| r.tech == *t)).collect();
    if shared.is_empty() {
        return Err(CliError::input(analytic_csv, "no technique appears in both files"));
    }
    for &tech in &shared {
        let a = unique_sorted(analytic.iter().filter(|r| r.tech == tech).map(|r| r.coord));
        let s = unique_sorted(sim.iter().filter(|r| r.tech == tech).map(|r| r.load));
        check_grid(tech, &a, &s).map_err(|m| CliError::input(sim_csv, m))?;
    }

    let mut out = String::new();
    let mut passed = true;
    let _ = writeln!(out, "analytic: {} ({})", analytic_csv.display(), scenario.name());
    let _ = writeln!(out, "simulated: {}", sim_csv.display());

    out.push_str("\nthroughput agreement (measured vs analytic at the measured attempt rate):\n");
    for tech in [AccessTechnique::PureAloha, AccessTechnique::SlottedAloha] {
        let rows: Vec<&SimRow> = sim.iter().filter(|r| r.tech == tech).collect();
        if rows.is_empty() {
            continue;
        }
        let mut worst: Option<(f64, f64, &SimRow)> = None;
        let mut ok = true;
        for r in &rows {
            let attempt_load = r.transmissions as f64 / r.n_units;
            let Some(expect) = aloha_oracle(tech, attempt_load).filter(|e| *e > 0.0) else { continue };
            let dev = (r.native_t - expect).abs() / expect;
            let tol = tolerance(expect, r.n_units);
            ok &= dev <= tol;
            if worst.is_none_or(|(d, _, _)| dev > d) {
                worst = Some((dev, tol, r));
            }
        }
        passed &= ok;
        match worst {
            Some((dev, tol, r)) => {
                let _ = writeln!(
                    out,
                    "{tech}: {} (max dev {:.1}% at G={} seed={}, tolerance {:.1}%)",
                    if ok { "PASS" } else { "FAIL" },
                    dev * 100.0,
                    sig6(r.load),
                    r.seed,
                    tol * 100.0
                );
            }
            None => {
                let _ = writeln!(out, "{tech}: no transmissions to compare");
            }
        }
    }

    let delay_axis = match scenario {
        ScenarioKind::DelayVsThroughput => Some("S"),
        ScenarioKind::DelayVsLoad => Some("G"),
        ScenarioKind::ThroughputVsLoad => None,
    };
    out.push_str("\ndelay ordering (analytic contention delays in frame times, tdma/fdma in seconds;\n");
    out.push_str("simulated delays in frame times, mean over seeds):\n");
    let grid = unique_sorted(analytic.iter().filter(|r| shared.contains(&r.tech)).map(|r| r.coord));
    for &x in &grid {
        if let Some(axis) = delay_axis {
            let mut entries: Vec<(AccessTechnique, f64)> = analytic
                .iter()
                .filter(|r| r.coord == x && !r.saturated)
                .filter_map(|r| r.delay.map(|d| (r.tech, d)))
                .collect();
            let _ = writeln!(out, "{axis}={} analytic: {}", sig6(x), ordering_line(&mut entries));
        }
        let mut by_tech: BTreeMap<AccessTechnique, (f64, usize)> = BTreeMap::new();
        for r in sim.iter().filter(|r| r.load == x) {
            if let Some(d) = r.normalized_delay {
                let e = by_tech.entry(r.tech).or_insert((0.0, 0));
                e.0 += d;
                e.1 += 1;
            }
        }
        let mut entries: Vec<(AccessTechnique, f64)> = by_tech.into_iter().map(|(t, (s, n))| (t, s / n as f64)).collect();
        let _ = writeln!(out, "G={} simulated: {}", sig6(x), ordering_line(&mut entries));
    }

    out.push_str("\nchecks:\n");
    let mut check = |name: &str, ok: Option<bool>, detail: String| {
        let verdict = match ok {
            Some(true) => "PASS",
            Some(false) => {
                passed = false;
                "FAIL"
            }
            None => "SKIP",
        };
        let _ = writeln!(out, "{verdict} {name}{}{detail}", if detail.is_empty() { "" } else { ": " });
    };

    let order_at = analytic.iter().filter(|r| r.coord == 0.1 && !r.saturated).collect::<Vec<_>>();
    if scenario == ScenarioKind::DelayVsThroughput && EXPECTED_ORDER.iter().all(|t| order_at.iter().any(|r| r.tech == *t)) {
        let d: Vec<f64> = EXPECTED_ORDER
            .iter()
            .map(|t| order_at.iter().find(|r| r.tech == *t).and_then(|r| r.delay).unwrap_or(f64::NAN))
            .collect();
        let ok = d.windows(2).all(|w| w[0] < w[1]);
        let listing: Vec<String> = EXPECTED_ORDER.iter().zip(&d).map(|(t, v)| format!("{t}={}", sig6(*v))).collect();
        check("delay ordering Tdma < Fdma < SlottedAloha < PureAloha < CsmaCa at S=0.1", Some(ok), listing.join(" "));
    } else {
        check(
            "delay ordering at S=0.1",
            None,
            "needs a delay-vs-throughput analytic file with all five techniques at S=0.1".into(),
        );
    }

    let bad: Vec<String> = sim
        .iter()
        .filter(|r| r.generated != r.delivered + r.dropped + r.in_flight)
        .map(|r| format!("{} G={} seed={}", r.tech, sig6(r.load), r.seed))
        .collect();
    check("conservation generated = delivered + dropped + in_flight", Some(bad.is_empty()), bad.join(", "));

    let bad: Vec<String> = sim
        .iter()
        .filter(|r| r.measured_t > r.measured_g)
        .map(|r| format!("{} G={}", r.tech, sig6(r.load)))
        .collect();
    check("measured_T ≤ measured_G", Some(bad.is_empty()), bad.join(", "));

    if sim_techs.contains(&AccessTechnique::Fdma) {
        let collided: u64 = sim.iter().filter(|r| r.tech == AccessTechnique::Fdma).map(|r| r.collided).sum();
        check("fdma zero collisions", Some(collided == 0), if collided == 0 { String::new() } else { format!("{collided} collided") });
    }

    if delay_axis.is_some() {
        for tech in [AccessTechnique::Tdma, AccessTechnique::Fdma] {
            let mut pts: Vec<(f64, f64)> = analytic
                .iter()
                .filter(|r| r.tech == tech && !r.saturated)
                .filter_map(|r| r.delay.map(|d| (r.coord, d)))
                .collect();
            if pts.len() < 2 {
                continue;
            }
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let ok = pts.windows(2).all(|w| w[0].1 < w[1].1);
            check(&format!("{} analytic delay strictly increasing", tech.name()), Some(ok), String::new());
        }
    }

    let _ = writeln!(out, "\noverall: {}", if passed { "PASS" } else { "FAIL" });
    if let Some(path) = report {
        write_file(path, &out)?;
    }
    Ok(Outcome { text: out, passed })
}
