//! Full readout chain: squeezer → IFCs → interferometer → amplifier → OFC
//! → detection, and the signal-referred budgets built on it.

use crate::amplifier::{
    cmrr_residual, displacement_coupling, displacement_path, mz_backward, mz_forward, split_pair, CouplingModel, IoModel,
    PumpParams, RingCavityParams,
};
use crate::coating::{brownian_proxy, CoatingDesign};
use crate::consts::TWO_PI;
use crate::error::{Error, Result};
use crate::filter_cavity::{loss_coupling, quadrature_reflection, FilterCavityParams};
use crate::interferometer::{injection_chain, ifo_io, IfoParams, SqueezerParams};
use crate::technical::{coating_brownian, suspension_thermal, CoatingNoiseParams, RinModel, SuspensionParams};
use crate::twophoton::{c as cx, homodyne_by_source, homodyne_vector, FrequencyGrid, Mat2, NoisePath, PathSet, Source, Vec2, ONE, ZERO};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IfoModel {
    Ponderomotive,
    /// identity transfer, unit signal in quadrature 1, no interferometer loss
    Transparent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AmplifierModel {
    Ring,
    /// frequency-flat phase-sensitive gain diag(G, 1/G)
    Flat { gain: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpConfig {
    pub model: AmplifierModel,
    pub ring: RingCavityParams,
    pub pump: PumpParams,
    pub io: IoModel,
    pub coupling: CouplingModel,
    pub cmrr_db: f64,
    pub rin: RinModel,
    pub sus: SuspensionParams,
    pub coat: CoatingDesign,
    pub coat_noise: CoatingNoiseParams,
    /// mirror displacement and pump noise on/off
    pub technical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub ifo: IfoParams,
    pub ifo_model: IfoModel,
    pub sqz: SqueezerParams,
    pub amp: AmpConfig,
    pub ofc: Option<FilterCavityParams>,
    /// fixed homodyne angle after the OFC
    pub zeta0: f64,
    pub grid: FrequencyGrid,
    pub amp_on: bool,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        self.ifo.validate()?;
        self.sqz.validate()?;
        if let Some(o) = &self.ofc {
            o.validate()?;
        }
        self.amp.ring.validate()?;
        if let AmplifierModel::Flat { gain } = self.amp.model {
            if !(gain > 0.0 && gain.is_finite()) {
                return Err(Error::InvalidParam(format!("flat gain {gain}")));
            }
        }
        if !(self.amp.pump.p_source_w >= 0.0 && self.amp.pump.lambda_m > 0.0) {
            return Err(Error::InvalidParam("pump power/wavelength".into()));
        }
        if !self.zeta0.is_finite() {
            return Err(Error::InvalidParam("homodyne angle".into()));
        }
        Ok(())
    }
}

/// Quantities that do not depend on frequency, computed once per config.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// coupler pair realising the configured CMRR
    pub cmrr_pair: Option<(RingCavityParams, RingCavityParams)>,
    pub coat_d_eff: f64,
    pub coat_phi_eff: f64,
}

pub fn prepare(c: &ChainConfig) -> Result<Prepared> {
    c.validate()?;
    let ring_tech = c.amp_on && c.amp.model == AmplifierModel::Ring && c.amp.technical;
    let cmrr_pair = if ring_tech {
        let d = crate::amplifier::cmrr_split(&c.amp.ring, &c.amp.pump, c.amp.cmrr_db, 100.0, c.amp.io, c.amp.coupling)?;
        Some(split_pair(&c.amp.ring, d))
    } else {
        None
    };
    let (d, phi) = brownian_proxy(&c.amp.coat.quarter_wave())?;
    Ok(Prepared { cmrr_pair, coat_d_eff: d, coat_phi_eff: phi })
}

fn phase_input(g: Complex64) -> Mat2 {
    Mat2::new(ZERO, ZERO, g, ZERO)
}

/// All noise paths and the signal at `f`, plus the homodyne angle.
pub fn assemble_point(c: &ChainConfig, prep: &Prepared, f: f64) -> Result<(PathSet, f64)> {
    let omega = TWO_PI * f;
    let mut set = injection_chain(&c.sqz, omega)?;
    let ring_on = c.amp_on && c.amp.model == AmplifierModel::Ring;
    if ring_on {
        set.apply(&mz_backward(&c.amp.ring, omega));
    }
    match c.ifo_model {
        IfoModel::Ponderomotive => {
            ifo_io(&mut set, &c.ifo, omega)?;
        }
        IfoModel::Transparent => set.signal = Vec2::new(ONE, ZERO),
    }
    let mut zeta = 0.0;
    if c.amp_on {
        match c.amp.model {
            AmplifierModel::Ring => {
                let a = &c.amp;
                mz_forward(&mut set, &a.ring, &a.pump, omega, a.io).map_err(|e| label(e, "amplifier"))?;
                if a.technical {
                    add_displacement_noise(&mut set, c, prep, f)?;
                }
            }
            AmplifierModel::Flat { gain } => set.apply(&Mat2::new(cx(gain), ZERO, ZERO, cx(1.0 / gain))),
        }
        if let Some(o) = &c.ofc {
            let m = quadrature_reflection(o, omega);
            set.apply(&m);
            set.push(NoisePath::vacuum(Source::ReadoutLoss, loss_coupling(&m)));
        }
        zeta = c.zeta0;
    }
    set.add_loss(c.ifo.readout_loss, Source::ReadoutLoss)?;
    Ok((set, zeta))
}

fn label(e: Error, what: &str) -> Error {
    match e {
        Error::Physics { msg, .. } => Error::Physics { source_label: what.into(), msg },
        other => other,
    }
}

fn add_displacement_noise(set: &mut PathSet, c: &ChainConfig, prep: &Prepared, f: f64) -> Result<()> {
    let a = &c.amp;
    let omega = TWO_PI * f;
    let g = displacement_coupling(&a.ring, &a.pump, omega, a.io, a.coupling);
    let cos2: Vec<f64> = a.ring.theta_inc.iter().map(|t| t.cos().powi(2)).collect();
    let sus = suspension_thermal(&a.sus, a.ring.mass_kg, f)?;
    set.push(displacement_path(Source::SuspensionThermal, sus * cos2.iter().sum::<f64>().sqrt(), g));
    // the coupler M1 is not counted; M2 and M3 carry the HR coatings
    let coat = coating_brownian(prep.coat_d_eff, prep.coat_phi_eff, &a.coat_noise, f)?;
    set.push(displacement_path(Source::CoatingBrownian, coat * (cos2[1] + cos2[2]).sqrt(), g));
    if let Some((l, r)) = &prep.cmrr_pair {
        let res = cmrr_residual(l, r, &a.pump, omega, a.io, a.coupling).map_err(|e| label(e, "rin"))?;
        set.add_classical(Source::RinResidual, a.rin.rin(f)?.powi(2), phase_input(res));
    }
    Ok(())
}

/// Signal-referred ASD per source and in total.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainBudget {
    pub freqs: Vec<f64>,
    /// indexed by `Source::index`
    pub sources: Vec<[f64; 8]>,
    pub total: Vec<f64>,
}

impl StrainBudget {
    pub fn column(&self, s: Source) -> Vec<f64> {
        self.sources.iter().map(|r| r[s.index()]).collect()
    }
}

struct PointResult {
    per_source: [f64; 8],
    total: f64,
}

fn evaluate_point(c: &ChainConfig, prep: &Prepared, f: f64) -> Result<PointResult> {
    let (set, zeta) = assemble_point(c, prep, f)?;
    let psd = homodyne_by_source(zeta, &set);
    let g = (homodyne_vector(zeta).transpose() * set.signal)[(0, 0)].norm();
    if g == 0.0 || !g.is_finite() {
        return Err(Error::Physics { source_label: "readout".into(), msg: format!("signal gain vanishes at {f} Hz") });
    }
    let mut per_source = [0.0; 8];
    for (o, p) in per_source.iter_mut().zip(psd) {
        *o = p.sqrt() / g;
    }
    let total = psd.iter().sum::<f64>().sqrt() / g;
    if !total.is_finite() {
        return Err(Error::Physics { source_label: "budget".into(), msg: format!("non-finite total at {f} Hz") });
    }
    Ok(PointResult { per_source, total })
}

pub fn budget_on(c: &ChainConfig, freqs: &[f64]) -> Result<StrainBudget> {
    let prep = prepare(c)?;
    let pts: Vec<PointResult> = freqs.par_iter().map(|&f| evaluate_point(c, &prep, f)).collect::<Result<_>>()?;
    Ok(StrainBudget {
        freqs: freqs.to_vec(),
        sources: pts.iter().map(|p| p.per_source).collect(),
        total: pts.iter().map(|p| p.total).collect(),
    })
}

pub fn budget(c: &ChainConfig) -> Result<StrainBudget> {
    budget_on(c, c.grid.points())
}

/// Signal in the configured readout relative to the bare interferometer
/// read at ζ = 0.
pub fn gain_curve(c: &ChainConfig) -> Result<Vec<f64>> {
    let prep = prepare(c)?;
    let mut off = c.clone();
    off.amp_on = false;
    let prep_off = prepare(&off)?;
    c.grid
        .points()
        .par_iter()
        .map(|&f| {
            let (on, z) = assemble_point(c, &prep, f)?;
            let (bare, z0) = assemble_point(&off, &prep_off, f)?;
            let a = (homodyne_vector(z).transpose() * on.signal)[(0, 0)].norm();
            let b = (homodyne_vector(z0).transpose() * bare.signal)[(0, 0)].norm();
            Ok(a / b)
        })
        .collect()
}

/// Mid-band cost: mean ln(total ASD) on `n` log-spaced points in [f_lo, f_hi].
pub fn midband_cost(c: &ChainConfig, f_lo: f64, f_hi: f64, n: usize) -> Result<f64> {
    let g = FrequencyGrid::log(f_lo, f_hi, n)?;
    let b = budget_on(c, g.points())?;
    Ok(b.total.iter().map(|x| x.ln()).sum::<f64>() / n as f64)
}

/// Mean ln(ASD_off/ASD_on) over the band: positive means the amplifier helps.
pub fn midband_improvement(c: &ChainConfig, f_lo: f64, f_hi: f64, n: usize) -> Result<f64> {
    let mut off = c.clone();
    off.amp_on = false;
    let mut on = c.clone();
    on.amp_on = true;
    Ok(midband_cost(&off, f_lo, f_hi, n)? - midband_cost(&on, f_lo, f_hi, n)?)
}
