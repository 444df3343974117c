//! CSV and manifest writers.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::noma::{LinkReport, NomaMode};
use crate::runner::{GridRow, ResultBundle};

pub const LINKS_HEADER: [&str; 17] = [
    "receiver",
    "user",
    "x",
    "y",
    "z",
    "serving_ap",
    "branch",
    "dc_gain",
    "channel_bandwidth_hz",
    "bandwidth_limited",
    "rate_bandwidth_hz",
    "noma_mode",
    "sinr",
    "sinr_db",
    "rate_bps",
    "sinr_literal",
    "sinr_sic",
];

pub const ALLOCATION_HEADER: [&str; 7] =
    ["receiver", "objective", "search", "assignment", "score", "sum_sinr", "sum_rate_bps"];

pub const SUMMARY_HEADER: [&str; 4] = ["user", "rate_adr_bps", "rate_wide_bps", "improvement_pct"];

pub const GRID_HEADER: [&str; 12] = [
    "receiver",
    "x",
    "y",
    "z",
    "serving_ap",
    "branch",
    "dc_gain",
    "channel_bandwidth_hz",
    "bandwidth_limited",
    "sinr",
    "sinr_db",
    "rate_bps",
];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn link_fields(l: &LinkReport, mode: NomaMode) -> Vec<String> {
    vec![
        l.serving_ap.to_string(),
        l.branch.to_string(),
        num(l.dc_gain),
        num(l.channel_bandwidth),
        l.bandwidth_limited.to_string(),
        num(l.rate_bandwidth),
        mode.to_string(),
        num(l.sinr),
        num(l.sinr_db),
        num(l.data_rate),
        num(l.sinr_literal),
        num(l.sinr_sic),
    ]
}

/// One row per (receiver kind, user), users in index order.
pub fn write_links(path: &Path, bundle: &ResultBundle, config: &ScenarioConfig) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(LINKS_HEADER)?;
    for run in &bundle.runs {
        for l in run.links() {
            let p = config.users[l.user].position;
            let mut rec = vec![run.kind.to_string(), l.user.to_string(), num(p.x), num(p.y), num(p.z)];
            rec.extend(link_fields(l, config.noma.mode));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_allocation(path: &Path, bundle: &ResultBundle, config: &ScenarioConfig) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(ALLOCATION_HEADER)?;
    for run in &bundle.runs {
        let a = &run.allocation;
        w.write_record([
            run.kind.to_string(),
            config.noma.objective.to_string(),
            a.search.to_string(),
            a.assignment.to_string(),
            num(a.score),
            num(a.evaluation.sum_sinr),
            num(a.evaluation.sum_rate),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-user improvement rows followed by a `mean` row. No-op without a comparison.
pub fn write_summary(path: &Path, bundle: &ResultBundle) -> Result<()> {
    let Some(cmp) = &bundle.comparison else { return Ok(()) };
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in &cmp.rows {
        w.write_record([r.user.to_string(), num(r.rate_adr), num(r.rate_wide), num(r.improvement_pct)])?;
    }
    let mean = |f: fn(&crate::runner::ImprovementRow) -> f64| cmp.rows.iter().map(f).sum::<f64>() / cmp.rows.len() as f64;
    w.write_record([
        "mean".to_string(),
        num(mean(|r| r.rate_adr)),
        num(mean(|r| r.rate_wide)),
        num(cmp.mean_improvement_pct),
    ])?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_grid(path: &Path, rows: &[GridRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(GRID_HEADER)?;
    for r in rows {
        let p = r.position;
        let mut rec = vec![r.kind.to_string(), num(p.x), num(p.y), num(p.z)];
        match &r.link {
            Some(l) => rec.extend([
                l.serving_ap.to_string(),
                l.branch.to_string(),
                num(l.dc_gain),
                num(l.channel_bandwidth),
                l.bandwidth_limited.to_string(),
                num(l.sinr),
                num(l.sinr_db),
                num(l.data_rate),
            ]),
            None => rec.extend(["", "", "0", "0", "false", "0", "", "0"].map(String::from)),
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `ir_<receiver>_u<user>_ap<ap>_b<branch>.csv` files with `time_s,gain` rows.
pub fn dump_responses(dir: &Path, bundle: &ResultBundle) -> Result<usize> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut n = 0;
    for run in &bundle.runs {
        for tr in &run.responses {
            let path = dir.join(format!("ir_{}_u{}_ap{}_b{}.csv", run.kind, tr.user, tr.ap, tr.branch));
            let mut w = writer(&path)?;
            w.write_record(["time_s", "gain"])?;
            for (t, g) in tr.response.rows() {
                w.write_record([num(t), num(g)])?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
            n += 1;
        }
    }
    Ok(n)
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'a str,
    timestamp: &'a str,
    config_hash: &'a str,
    receiver: &'a str,
    threads: usize,
    scenario: &'a ScenarioConfig,
}

/// Run manifest in TOML: provenance plus the fully resolved scenario.
pub fn write_manifest(path: &Path, bundle: &ResultBundle, config: &ScenarioConfig, receiver: &str, threads: usize) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        tool_version: &bundle.provenance.tool_version,
        timestamp: &bundle.provenance.timestamp,
        config_hash: &bundle.provenance.config_hash,
        receiver,
        threads,
        scenario: config,
    };
    let text = toml::to_string(&manifest).expect("manifest serializes");
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
