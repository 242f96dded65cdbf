//! `qnamp` command line: budgets, gain curves, design search, coating
//! search and mass sweeps, written as CSV plus a TOML manifest.

use clap::{Args, Parser, Subcommand};
use qnamp::amplifier::{self, circulating_power_exact};
use qnamp::chain::{self, AmplifierModel};
use qnamp::coating::{objective, optimize_stack, stack_transmission, StackSearch};
use qnamp::config::RunConfigFile;
use qnamp::consts::TWO_PI;
use qnamp::optimize::{self, all_free, Bounds, FreeParam, NmOptions, COST_BAND_HZ, COST_POINTS};
use qnamp::output::{self, Manifest};
use qnamp::{ChainConfig, Error};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qnamp", version, about = "Quantum-noise budgets for an amplified interferometer readout")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Signal-referred noise budget per source
    Budget(Common),
    /// Readout gain relative to the bare interferometer
    Gain(Common),
    /// Nelder-Mead search over amplifier and readout parameters
    Optimize {
        #[command(flatten)]
        common: Common,
        /// comma-separated subset of t_a, p_source_w, ofc_detuning_hz,
        /// ofc_input_transmission, homodyne_angle_rad
        #[arg(long, value_delimiter = ',')]
        free: Vec<String>,
        #[arg(long, default_value_t = 400)]
        max_evals: usize,
    },
    /// Thickness search for the amplifier mirror coating
    Coating {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5.0)]
        t_max_ppm: f64,
    },
    /// Re-optimise and budget at several amplifier mirror masses
    MassSweep {
        #[command(flatten)]
        common: Common,
        /// e.g. 3g,30g,300g or 0.3kg
        #[arg(long, value_delimiter = ',', default_value = "3g,30g,300g")]
        masses: Vec<String>,
        #[arg(long, default_value_t = 400)]
        max_evals: usize,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// built-in design point: 15dB or 20dB
    #[arg(long)]
    preset: Option<String>,
    /// disable the amplifier and output filter cavity
    #[arg(long)]
    no_amp: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// overrides run.seed
    #[arg(long)]
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 2,
            Error::Infeasible(_) => 4,
            Error::Io(_) | Error::Csv(_) => 1,
            Error::InvalidParam(_) | Error::Physics { .. } | Error::GridMismatch => 3,
        };
        Failure { code, msg: e.to_string() }
    }
}

type Run<T> = std::result::Result<T, Failure>;

struct Loaded {
    file: RunConfigFile,
    chain: ChainConfig,
    sha: String,
    seed: u64,
}

fn load(c: &Common) -> Run<Loaded> {
    let mut file = match (&c.config, &c.preset) {
        (Some(p), _) => RunConfigFile::load(p)?,
        (None, Some(name)) => RunConfigFile::from_preset(name).map_err(|e| Error::Config(e.to_string()))?,
        (None, None) => return Err(Failure { code: 2, msg: "one of --config or --preset is required".into() }),
    };
    if c.no_amp {
        file.amp.enabled = false;
    }
    if let Some(s) = c.seed {
        file.run.seed = s;
    }
    let chain = file.to_chain()?;
    let sha = file.sha256()?;
    let seed = file.run.seed;
    Ok(Loaded { file, chain, sha, seed })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure { code: 1, msg: format!("{}: {e}", path.display()) }
}

fn create(dir: &Path, name: &str) -> Run<(BufWriter<File>, String)> {
    let p = dir.join(name);
    let f = File::create(&p).map_err(|e| io_err(&p, e))?;
    Ok((BufWriter::new(f), name.to_string()))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Run<String> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| io_err(&p, e))?;
    Ok(name.to_string())
}

fn finish(dir: &Path, mut m: Manifest, outputs: Vec<String>) -> Run<()> {
    m.outputs = outputs;
    write_text(dir, "manifest.toml", &m.to_toml()?)?;
    Ok(())
}

fn parse_mass(s: &str) -> Run<f64> {
    let t = s.trim();
    let bad = || Failure { code: 2, msg: format!("mass {s:?}: expected e.g. 30g or 0.3kg") };
    let (num, scale) = if let Some(v) = t.strip_suffix("kg") {
        (v, 1.0)
    } else if let Some(v) = t.strip_suffix('g') {
        (v, 1e-3)
    } else {
        return Err(bad());
    };
    let v: f64 = num.trim().parse().map_err(|_| bad())?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(bad());
    }
    // divide rather than multiply so 30g gives exactly 0.03
    Ok(if scale == 1.0 { v } else { v / 1e3 })
}

fn free_params(names: &[String]) -> Run<Vec<(FreeParam, Bounds)>> {
    if names.is_empty() {
        return Ok(all_free());
    }
    names.iter().map(|n| FreeParam::parse(n.trim()).map(|p| (p, p.default_bounds())).map_err(Failure::from)).collect()
}

fn cmd_budget(c: &Common) -> Run<()> {
    let l = load(c)?;
    let b = qnamp::budget(&l.chain)?;
    let (w, name) = create(&c.out, "budget.csv")?;
    output::write_budget(w, &b, &l.sha)?;
    let mut m = Manifest::new("budget", &l.sha, l.seed);
    m.values.insert("cost".into(), optimize::cost(&l.chain));
    let cfg = write_text(&c.out, "config.toml", &l.file.to_toml()?)?;
    finish(&c.out, m, vec![name, cfg])
}

/// |K_A| of the ring itself, or the flat gain.
fn amp_gain(c: &ChainConfig, f: f64) -> Run<f64> {
    match c.amp.model {
        AmplifierModel::Flat { gain } => Ok(gain),
        AmplifierModel::Ring => {
            let (r, p) = (&c.amp.ring, &c.amp.pump);
            let w = TWO_PI * f;
            let k = amplifier::kappa_a(r, p, circulating_power_exact(r, p), w)?;
            Ok(amplifier::ring_io(r, k, w, c.amp.io).k_a.abs())
        }
    }
}

fn cmd_gain(c: &Common) -> Run<()> {
    let l = load(c)?;
    let g = chain::gain_curve(&l.chain)?;
    let f = l.chain.grid.points();
    let k: Vec<f64> = f.iter().map(|f| amp_gain(&l.chain, *f)).collect::<Run<_>>()?;
    let (w, name) = create(&c.out, "gain.csv")?;
    output::write_gain(w, f, &g, &k, &l.sha)?;
    let mut m = Manifest::new("gain", &l.sha, l.seed);
    // first downward crossing of unit |K_A|
    if let Some(i) = k.windows(2).position(|w| w[0] >= 1.0 && w[1] < 1.0) {
        let t = (k[i].ln()) / (k[i].ln() - k[i + 1].ln());
        m.values.insert("unity_gain_hz".into(), (f[i].ln() + t * (f[i + 1].ln() - f[i].ln())).exp());
    }
    finish(&c.out, m, vec![name])
}

fn cmd_optimize(c: &Common, free: &[String], max_evals: usize) -> Run<()> {
    let mut l = load(c)?;
    let free = free_params(free)?;
    let opts = NmOptions { max_evals, seed: l.seed, ..Default::default() };
    let r = optimize::optimize(&l.chain, &free, &opts)?;
    let b = qnamp::budget(&r.config)?;
    l.file.update_from(&r.config);
    let cfg = write_text(&c.out, "config.toml", &l.file.to_toml()?)?;
    // outputs describe the winning config, so they carry its hash
    let sha = l.file.sha256()?;
    let (w, name) = create(&c.out, "budget.csv")?;
    output::write_budget(w, &b, &sha)?;
    let mut m = Manifest::new("optimize", &sha, l.seed);
    m.values.insert("cost".into(), r.cost);
    m.values.insert("start_cost".into(), r.start_cost);
    m.values.insert("evals".into(), r.evals as f64);
    for (p, v) in &r.values {
        m.values.insert(p.name().into(), *v);
    }
    finish(&c.out, m, vec![name, cfg])
}

fn cmd_coating(c: &Common, t_max_ppm: f64) -> Run<()> {
    let l = load(c)?;
    let start = l.chain.amp.coat.quarter_wave();
    let search = StackSearch { t_max: t_max_ppm / 1e6, seed: l.seed, ..Default::default() };
    let r = optimize_stack(&start, &search)?;
    let (w, qw) = create(&c.out, "stack_quarter_wave.csv")?;
    output::write_stack(w, &start, &l.sha)?;
    let (w, opt) = create(&c.out, "stack.csv")?;
    output::write_stack(w, &r.stack, &l.sha)?;
    let mut m = Manifest::new("coating", &l.sha, l.seed);
    m.values.insert("quarter_wave_transmission".into(), stack_transmission(&start, start.lambda_m).1);
    m.values.insert("quarter_wave_objective".into(), objective(&start));
    m.values.insert("transmission".into(), r.transmission);
    m.values.insert("objective".into(), r.objective);
    finish(&c.out, m, vec![qw, opt])
}

fn cmd_mass_sweep(c: &Common, masses: &[String], max_evals: usize) -> Run<()> {
    let l = load(c)?;
    let kg: Vec<f64> = masses.iter().map(|s| parse_mass(s)).collect::<Run<_>>()?;
    let opts = NmOptions { max_evals, seed: l.seed, ..Default::default() };
    let sweep = optimize::mass_sweep(&l.chain, &kg, &all_free(), &opts)?;
    let mut m = Manifest::new("mass-sweep", &l.sha, l.seed);
    let mut outs = Vec::new();
    for (e, label) in sweep.iter().zip(masses) {
        let label = label.trim().replace(' ', "");
        let (w, name) = create(&c.out, &format!("budget_{label}.csv"))?;
        output::write_budget(w, &e.budget, &l.sha)?;
        outs.push(name);
        m.values.insert(format!("improvement_{label}"), e.improvement);
        m.values.insert(format!("cost_{label}"), e.optimum.cost);
    }
    m.values.insert("band_lo_hz".into(), COST_BAND_HZ.0);
    m.values.insert("band_hi_hz".into(), COST_BAND_HZ.1);
    m.values.insert("band_points".into(), COST_POINTS as f64);
    finish(&c.out, m, outs)
}

fn threads() -> Run<()> {
    let Ok(v) = std::env::var("QNAMP_THREADS") else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or(Failure { code: 2, msg: format!("QNAMP_THREADS={v:?}: expected a positive integer") })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure { code: 1, msg: e.to_string() })
}

fn run(cli: Cli) -> Run<()> {
    threads()?;
    let common = match &cli.cmd {
        Cmd::Budget(c) | Cmd::Gain(c) => c,
        Cmd::Optimize { common, .. } | Cmd::Coating { common, .. } | Cmd::MassSweep { common, .. } => common,
    };
    fs::create_dir_all(&common.out).map_err(|e| io_err(&common.out, e))?;
    match &cli.cmd {
        Cmd::Budget(c) => cmd_budget(c),
        Cmd::Gain(c) => cmd_gain(c),
        Cmd::Optimize { common, free, max_evals } => cmd_optimize(common, free, *max_evals),
        Cmd::Coating { common, t_max_ppm } => cmd_coating(common, *t_max_ppm),
        Cmd::MassSweep { common, masses, max_evals } => cmd_mass_sweep(common, masses, *max_evals),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qnamp: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
