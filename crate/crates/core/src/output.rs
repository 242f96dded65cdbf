//! CSV and manifest writers. Every CSV starts with one `#` line carrying
//! the engine version and the config hash, then a header row.

use crate::chain::StrainBudget;
use crate::coating::CoatingStack;
use crate::error::Result;
use crate::twophoton::Source;
use crate::ENGINE;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

pub fn tag_line(config_sha256: &str) -> String {
    format!("# engine={} config_sha256={}\n", ENGINE.replace(' ', "/"), config_sha256)
}

fn writer<W: Write>(mut w: W, config_sha256: &str) -> Result<csv::Writer<W>> {
    w.write_all(tag_line(config_sha256).as_bytes())?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w))
}

/// Shortest round-trip exponent form.
fn sci(x: f64) -> String {
    format!("{x:e}")
}

pub fn budget_header() -> Vec<&'static str> {
    let mut h = vec!["f_Hz"];
    h.extend(Source::ALL.iter().map(|s| s.name()));
    h.push("total");
    h
}

pub fn write_budget<W: Write>(w: W, b: &StrainBudget, config_sha256: &str) -> Result<()> {
    let mut out = writer(w, config_sha256)?;
    out.write_record(budget_header())?;
    for ((f, row), t) in b.freqs.iter().zip(&b.sources).zip(&b.total) {
        let mut rec = vec![f.to_string()];
        rec.extend(row.iter().map(|x| sci(*x)));
        rec.push(sci(*t));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_gain<W: Write>(w: W, freqs: &[f64], gain: &[f64], k_a: &[f64], config_sha256: &str) -> Result<()> {
    let mut out = writer(w, config_sha256)?;
    out.write_record(["f_Hz", "gain", "abs_k_a"])?;
    for ((f, g), k) in freqs.iter().zip(gain).zip(k_a) {
        out.write_record([f.to_string(), sci(*g), sci(*k)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_stack<W: Write>(w: W, s: &CoatingStack, config_sha256: &str) -> Result<()> {
    let mut out = writer(w, config_sha256)?;
    out.write_record(["layer", "material", "n", "d_nm", "phi"])?;
    for (i, l) in s.layers.iter().enumerate() {
        out.write_record([i.to_string(), l.material.clone(), l.n.to_string(), (l.d_m * 1e9).to_string(), l.phi.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Run record written next to the CSVs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub engine: String,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub cost_function: String,
    pub outputs: Vec<String>,
    pub values: BTreeMap<String, f64>,
}

impl Manifest {
    pub fn new(command: &str, config_sha256: &str, seed: u64) -> Self {
        Self {
            engine: ENGINE.to_string(),
            command: command.to_string(),
            config_sha256: config_sha256.to_string(),
            seed,
            cost_function: format!(
                "mean ln(total ASD) over {} log-spaced points in [{}, {}] Hz",
                crate::optimize::COST_POINTS,
                crate::optimize::COST_BAND_HZ.0,
                crate::optimize::COST_BAND_HZ.1
            ),
            outputs: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| crate::Error::Config(e.to_string()))
    }
}
