//! Bounded Nelder–Mead over design parameters, and the mass sweep.

use crate::chain::{budget, midband_cost, ChainConfig, StrainBudget};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_evals: usize,
    /// spread of simplex values at which a run stops
    pub f_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self { max_evals: 400, f_tol: 1e-7, restarts: 2, seed: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
}

/// Minimise `f` inside the box. Works in unit-cube coordinates and clamps
/// every trial point, so no evaluation ever leaves the bounds. Restarts
/// rebuild the simplex around the incumbent with seeded random sizes.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], bounds: &[Bounds], opts: &NmOptions) -> Result<NmResult> {
    let n = x0.len();
    if n == 0 || bounds.len() != n {
        return Err(Error::InvalidParam("dimension mismatch between start point and bounds".into()));
    }
    for (x, b) in x0.iter().zip(bounds) {
        if !(b.lo < b.hi) || !b.lo.is_finite() || !b.hi.is_finite() {
            return Err(Error::Infeasible(format!("empty or unbounded interval [{}, {}]", b.lo, b.hi)));
        }
        if *x < b.lo || *x > b.hi {
            return Err(Error::Infeasible(format!("start {x} outside [{}, {}]", b.lo, b.hi)));
        }
    }
    let to_x = |u: &[f64]| -> Vec<f64> { u.iter().zip(bounds).map(|(u, b)| b.lo + u.clamp(0.0, 1.0) * (b.hi - b.lo)).collect() };
    let evals = std::cell::Cell::new(0usize);
    let eval = |u: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(&to_x(u));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let clamp = |u: Vec<f64>| -> Vec<f64> { u.into_iter().map(|x| x.clamp(0.0, 1.0)).collect() };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_u: Vec<f64> = x0.iter().zip(bounds).map(|(x, b)| (x - b.lo) / (b.hi - b.lo)).collect();
    let mut best_f = eval(&best_u);
    let budget_per_run = opts.max_evals / (opts.restarts + 1);

    for run in 0..=opts.restarts {
        let size = if run == 0 { 0.1 } else { rng.gen_range(0.05..0.25) };
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_u.clone(), best_f)];
        for j in 0..n {
            let mut v = best_u.clone();
            // step inward when the start sits on the upper face
            v[j] = if v[j] + size <= 1.0 { v[j] + size } else { v[j] - size };
            let fv = eval(&v);
            simplex.push((v, fv));
        }
        let start = evals.get();
        while evals.get() - start < budget_per_run {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if (simplex[n].1 - simplex[0].1).abs() <= opts.f_tol * (1.0 + simplex[0].1.abs()) {
                break;
            }
            let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|p| p.0[k]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| clamp(centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect());
            let xr = along(1.0);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(2.0);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let x = along(0.5);
                    let fx = eval(&x);
                    (x, fx)
                } else {
                    let x = along(-0.5);
                    let fx = eval(&x);
                    (x, fx)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let b = simplex[0].0.clone();
                    for p in simplex.iter_mut().skip(1) {
                        p.0 = p.0.iter().zip(&b).map(|(x, b)| b + 0.5 * (x - b)).collect();
                        p.1 = eval(&p.0);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best_f {
            best_f = simplex[0].1;
            best_u = simplex[0].0.clone();
        }
    }
    Ok(NmResult { x: to_x(&best_u), fx: best_f, evals: evals.get() })
}

/// Parameters the design search may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParam {
    TA,
    PSource,
    OfcDetuning,
    OfcCoupler,
    Zeta0,
}

impl FreeParam {
    pub const ALL: [FreeParam; 5] = [FreeParam::TA, FreeParam::PSource, FreeParam::OfcDetuning, FreeParam::OfcCoupler, FreeParam::Zeta0];

    pub fn name(self) -> &'static str {
        match self {
            FreeParam::TA => "t_a",
            FreeParam::PSource => "p_source_w",
            FreeParam::OfcDetuning => "ofc_detuning_hz",
            FreeParam::OfcCoupler => "ofc_input_transmission",
            FreeParam::Zeta0 => "homodyne_angle_rad",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::Config(format!("unknown free parameter {s:?}")))
    }

    pub fn default_bounds(self) -> Bounds {
        match self {
            FreeParam::TA => Bounds { lo: 0.002, hi: 0.03 },
            FreeParam::PSource => Bounds { lo: 20.0, hi: 500.0 },
            FreeParam::OfcDetuning => Bounds { lo: -300.0, hi: -10.0 },
            FreeParam::OfcCoupler => Bounds { lo: 5e-6, hi: 500e-6 },
            FreeParam::Zeta0 => Bounds { lo: -0.5, hi: 0.5 },
        }
    }

    pub fn get(self, c: &ChainConfig) -> Result<f64> {
        Ok(match self {
            FreeParam::TA => c.amp.ring.t_a,
            FreeParam::PSource => c.amp.pump.p_source_w,
            FreeParam::OfcDetuning => ofc(c)?.detuning_hz,
            FreeParam::OfcCoupler => ofc(c)?.t_in,
            FreeParam::Zeta0 => c.zeta0,
        })
    }

    pub fn set(self, c: &mut ChainConfig, v: f64) {
        match self {
            FreeParam::TA => c.amp.ring.t_a = v,
            FreeParam::PSource => c.amp.pump.p_source_w = v,
            FreeParam::OfcDetuning => {
                if let Some(o) = c.ofc.as_mut() {
                    o.detuning_hz = v
                }
            }
            FreeParam::OfcCoupler => {
                if let Some(o) = c.ofc.as_mut() {
                    o.t_in = v
                }
            }
            FreeParam::Zeta0 => c.zeta0 = v,
        }
    }
}

fn ofc(c: &ChainConfig) -> Result<&crate::filter_cavity::FilterCavityParams> {
    c.ofc.as_ref().ok_or_else(|| Error::Config("OFC parameter requested but no OFC configured".into()))
}

/// Mid-band band and sampling of the cost.
pub const COST_BAND_HZ: (f64, f64) = (50.0, 500.0);
pub const COST_POINTS: usize = 24;

pub fn cost(c: &ChainConfig) -> f64 {
    midband_cost(c, COST_BAND_HZ.0, COST_BAND_HZ.1, COST_POINTS).unwrap_or(f64::INFINITY)
}

#[derive(Debug, Clone)]
pub struct DesignOptimum {
    pub config: ChainConfig,
    pub cost: f64,
    pub start_cost: f64,
    pub values: Vec<(FreeParam, f64)>,
    pub evals: usize,
}

pub fn optimize(c: &ChainConfig, free: &[(FreeParam, Bounds)], opts: &NmOptions) -> Result<DesignOptimum> {
    let mut x0 = Vec::with_capacity(free.len());
    for (p, b) in free {
        // start from the configured value, pulled into the box
        x0.push(p.get(c)?.clamp(b.lo, b.hi));
    }
    let bounds: Vec<Bounds> = free.iter().map(|f| f.1).collect();
    let build = |x: &[f64]| {
        let mut k = c.clone();
        for ((p, _), v) in free.iter().zip(x) {
            p.set(&mut k, *v);
        }
        k
    };
    let start_cost = cost(c);
    let r = nelder_mead(|x| cost(&build(x)), &x0, &bounds, opts)?;
    let (config, best) = if r.fx <= start_cost { (build(&r.x), r.fx) } else { (c.clone(), start_cost) };
    if !best.is_finite() {
        return Err(Error::Infeasible("no finite cost inside the parameter box".into()));
    }
    let values = free.iter().map(|(p, _)| (*p, p.get(&config).unwrap_or(f64::NAN))).collect();
    Ok(DesignOptimum { config, cost: best, start_cost, values, evals: r.evals })
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub mass_kg: f64,
    pub optimum: DesignOptimum,
    pub budget: StrainBudget,
    pub improvement: f64,
}

/// Re-optimise the amplifier and OFC at each mirror mass, then budget.
pub fn mass_sweep(c: &ChainConfig, masses_kg: &[f64], free: &[(FreeParam, Bounds)], opts: &NmOptions) -> Result<Vec<SweepEntry>> {
    if let Some(m) = masses_kg.iter().find(|m| !(**m > 0.0)) {
        return Err(Error::InvalidParam(format!("mass {m} kg must be positive")));
    }
    masses_kg
        .par_iter()
        .map(|&m| {
            let mut k = c.clone();
            k.amp.ring.mass_kg = m;
            k.amp_on = true;
            let optimum = optimize(&k, free, opts)?;
            let budget = budget(&optimum.config)?;
            let improvement = crate::chain::midband_improvement(&optimum.config, COST_BAND_HZ.0, COST_BAND_HZ.1, COST_POINTS)?;
            Ok(SweepEntry { mass_kg: m, optimum, budget, improvement })
        })
        .collect()
}

pub fn all_free() -> Vec<(FreeParam, Bounds)> {
    FreeParam::ALL.iter().map(|p| (*p, p.default_bounds())).collect()
}
