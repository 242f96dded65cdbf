//! Design points for 15 dB and 20 dB squeezed injection.

use crate::amplifier::{CouplingModel, IoModel, PumpParams, RingCavityParams};
use crate::chain::{AmpConfig, AmplifierModel, ChainConfig, IfoModel};
use crate::coating::CoatingDesign;
use crate::error::{Error, Result};
use crate::filter_cavity::FilterCavityParams;
use crate::interferometer::{IfoParams, SqueezerParams};
use crate::technical::{CoatingNoiseParams, RinModel, SuspensionParams};
use crate::twophoton::FrequencyGrid;

pub const PRESETS: [&str; 2] = ["15dB", "20dB"];

/// Interferometer values not fixed by the design table: test mass, arm
/// length and bandwidth are Voyager-like; the arm power puts the K = 1
/// crossover at 47 Hz.
pub fn default_ifo(src_loss: f64) -> IfoParams {
    let (m, l, b, lam) = (200.0, 4000.0, 500.0, 2e-6);
    IfoParams {
        mass_kg: m,
        arm_length_m: l,
        arm_power_w: IfoParams::arm_power_for_crossover(m, l, b, lam, 47.0),
        bandwidth_hz: b,
        lambda_m: lam,
        arm_loss: 20e-6,
        src_loss,
        readout_loss: 0.10,
    }
}

pub fn default_suspension() -> SuspensionParams {
    SuspensionParams {
        youngs_pa: 155.8e9,
        density_kg_m3: 2329.0,
        cte_per_k: 1e-10,
        dlogy_dt_per_k: -2e-5,
        heat_capacity_j_kg_k: 300.0,
        conductivity_w_m_k: 700.0,
        width_m: 250e-6,
        thickness_m: 50e-6,
        n_fibers: 2,
        length_m: 0.6,
        phi_surface: 1e-5,
        phi_bulk: 2e-9,
        h_surf_m: 1e-6,
        temperature_k: 123.0,
    }
}

pub fn default_coating() -> (CoatingDesign, CoatingNoiseParams) {
    (
        CoatingDesign { n_h: 3.65, n_l: 2.17, phi_h: 3e-5, phi_l: 2e-5, pairs: 12, n_sub: 3.48, lambda_m: 2e-6 },
        CoatingNoiseParams { beam_radius_m: 5e-3, temperature_k: 123.0, poisson: 0.27, youngs_sub_pa: 155.8e9 },
    )
}

fn ifc(length_m: f64, t_in: f64, roundtrip_loss: f64, detuning_hz: f64) -> FilterCavityParams {
    FilterCavityParams { length_m, t_in, roundtrip_loss, detuning_hz }
}

fn amp(t_a: f64, p_source_w: f64, mass_kg: f64, ring_loss: f64) -> AmpConfig {
    let (coat, coat_noise) = default_coating();
    AmpConfig {
        model: AmplifierModel::Ring,
        ring: RingCavityParams::equilateral(t_a, 30.0, mass_kg, ring_loss),
        pump: PumpParams { p_source_w, lambda_m: 2e-6 },
        io: IoModel::Exact,
        coupling: CouplingModel::Buildup,
        cmrr_db: 60.0,
        rin: RinModel::default(),
        sus: default_suspension(),
        coat,
        coat_noise,
        technical: true,
    }
}

pub fn default_grid() -> FrequencyGrid {
    FrequencyGrid::log(5.0, 1e4, 1000).expect("static grid")
}

pub fn preset(name: &str) -> Result<ChainConfig> {
    match name {
        "15dB" => Ok(ChainConfig {
            ifo: default_ifo(300e-6),
            ifo_model: IfoModel::Ponderomotive,
            sqz: SqueezerParams { db: 15.0, injection_loss: 0.01, ifcs: vec![ifc(500.0, 0.0014, 20e-6, -33.4)] },
            amp: amp(0.0089, 220.0, 0.030, 30e-6),
            ofc: Some(ifc(40.0, 43e-6, 20e-6, -80.4)),
            zeta0: -0.04,
            grid: default_grid(),
            amp_on: true,
        }),
        "20dB" => Ok(ChainConfig {
            ifo: default_ifo(100e-6),
            ifo_model: IfoModel::Ponderomotive,
            sqz: SqueezerParams {
                db: 20.0,
                injection_loss: 0.003,
                ifcs: vec![ifc(800.0, 0.0022, 10e-6, -34.6), ifc(800.0, 0.0022, 10e-6, 4.96)],
            },
            amp: amp(0.0090, 230.0, 0.010, 15e-6),
            ofc: Some(ifc(25.0, 22e-6, 10e-6, -77.8)),
            zeta0: -0.04,
            grid: default_grid(),
            amp_on: true,
        }),
        other => Err(Error::Config(format!("unknown preset {other:?}; expected one of {PRESETS:?}"))),
    }
}
