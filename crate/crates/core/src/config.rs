//! Run configuration file (TOML). Units live in the key names; optical
//! losses and transmissions accept "20 ppm" / "0.14 %" strings and are
//! normalised to fractions.

use crate::amplifier::{CouplingModel, IoModel, PumpParams, RingCavityParams};
use crate::chain::{AmpConfig, AmplifierModel, ChainConfig, IfoModel};
use crate::coating::CoatingDesign;
use crate::consts::TWO_PI;
use crate::error::{Error, Result};
use crate::filter_cavity::FilterCavityParams;
use crate::interferometer::{IfoParams, SqueezerParams};
use crate::technical::{CoatingNoiseParams, RinModel, SuspensionParams};
use crate::twophoton::FrequencyGrid;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Dimensionless fraction; reads `0.001`, `"1000 ppm"` or `"0.1 %"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fraction(pub f64);

impl Fraction {
    pub fn parse(s: &str) -> std::result::Result<f64, String> {
        let t = s.trim();
        let (num, scale) = if let Some(x) = t.strip_suffix("ppm") {
            (x, 1e6)
        } else if let Some(x) = t.strip_suffix('%') {
            (x, 1e2)
        } else {
            (t, 1.0)
        };
        num.trim().parse::<f64>().map(|v| v / scale).map_err(|_| format!("cannot read {s:?} as a fraction"))
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Fraction(v)),
            Raw::Int(v) => Ok(Fraction(v as f64)),
            Raw::Text(s) => Fraction::parse(&s).map(Fraction).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfoSection {
    pub arm_loss: Fraction,
    pub src_loss: Fraction,
    pub readout_loss: Fraction,
    pub wavelength_m: f64,
    pub test_mass_kg: f64,
    pub arm_length_m: f64,
    pub arm_power_w: f64,
    pub bandwidth_hz: f64,
    #[serde(default = "ponderomotive")]
    pub model: IfoModel,
}

fn ponderomotive() -> IfoModel {
    IfoModel::Ponderomotive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub length_m: f64,
    pub input_transmission: Fraction,
    pub roundtrip_loss: Fraction,
    pub detuning_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqzSection {
    pub squeeze_db: f64,
    pub injection_loss: Fraction,
    #[serde(default)]
    pub ifc: Vec<CavitySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmpSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// "ring" or "flat"
    #[serde(default = "ring")]
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_gain: Option<f64>,
    pub transmissivity: Fraction,
    pub length_m: f64,
    pub segment1_m: f64,
    pub segment2_m: f64,
    pub pump_power_w: f64,
    pub mass_g: f64,
    pub pendulum_hz: f64,
    pub roundtrip_loss: Fraction,
    pub incidence_deg: [f64; 3],
    pub cmrr_db: f64,
    pub rin_floor_per_rthz: f64,
    pub rin_corner_hz: f64,
    pub io: IoModel,
    pub coupling: CouplingModel,
    #[serde(default = "yes")]
    pub technical_noise: bool,
    pub homodyne_angle_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ofc: Option<CavitySection>,
}

fn yes() -> bool {
    true
}

fn ring() -> String {
    "ring".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoatSection {
    pub n_high: f64,
    pub n_low: f64,
    pub pairs: usize,
    pub phi_high: f64,
    pub phi_low: f64,
    pub beam_radius_mm: f64,
    pub substrate_index: f64,
    pub substrate_youngs_gpa: f64,
    pub poisson: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SusSection {
    pub width_um: f64,
    pub thickness_um: f64,
    pub fibers: u32,
    pub length_cm: f64,
    pub phi_surface: f64,
    pub phi_bulk: f64,
    pub surface_depth_um: f64,
    pub youngs_gpa: f64,
    pub cte_per_k: f64,
    pub dlogy_dt_per_k: f64,
    pub heat_capacity_j_per_kg_k: f64,
    pub conductivity_w_per_m_k: f64,
    pub density_kg_per_m3: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub points: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub ifo: IfoSection,
    pub sqz: SqzSection,
    pub amp: AmpSection,
    pub coat: CoatSection,
    pub sus: SusSection,
    pub run: RunSection,
}

fn cavity_out(c: &CavitySection) -> FilterCavityParams {
    FilterCavityParams { length_m: c.length_m, t_in: c.input_transmission.0, roundtrip_loss: c.roundtrip_loss.0, detuning_hz: c.detuning_hz }
}

fn cavity_in(c: &FilterCavityParams) -> CavitySection {
    CavitySection {
        length_m: c.length_m,
        input_transmission: Fraction(c.t_in),
        roundtrip_loss: Fraction(c.roundtrip_loss),
        detuning_hz: c.detuning_hz,
    }
}

impl RunConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical serialisation.
    pub fn sha256(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn to_chain(&self) -> Result<ChainConfig> {
        let i = &self.ifo;
        let a = &self.amp;
        let model = match (a.model.as_str(), a.flat_gain) {
            ("ring", _) => AmplifierModel::Ring,
            ("flat", Some(gain)) => AmplifierModel::Flat { gain },
            ("flat", None) => return Err(Error::Config("amp.model = \"flat\" needs amp.flat_gain".into())),
            (other, _) => return Err(Error::Config(format!("amp.model {other:?}: expected \"ring\" or \"flat\""))),
        };
        let mass_kg = a.mass_g / 1e3;
        let mut ring = RingCavityParams {
            t_a: a.transmissivity.0,
            length_m: a.length_m,
            l1_m: a.segment1_m,
            l2_m: a.segment2_m,
            mass_kg,
            omega0: TWO_PI * a.pendulum_hz,
            roundtrip_loss: a.roundtrip_loss.0,
            theta_inc: [0.0; 3],
        };
        for (t, d) in ring.theta_inc.iter_mut().zip(a.incidence_deg) {
            *t = d.to_radians();
        }
        let s = &self.sus;
        let k = &self.coat;
        let cfg = ChainConfig {
            ifo: IfoParams {
                mass_kg: i.test_mass_kg,
                arm_length_m: i.arm_length_m,
                arm_power_w: i.arm_power_w,
                bandwidth_hz: i.bandwidth_hz,
                lambda_m: i.wavelength_m,
                arm_loss: i.arm_loss.0,
                src_loss: i.src_loss.0,
                readout_loss: i.readout_loss.0,
            },
            ifo_model: i.model,
            sqz: SqueezerParams {
                db: self.sqz.squeeze_db,
                injection_loss: self.sqz.injection_loss.0,
                ifcs: self.sqz.ifc.iter().map(cavity_out).collect(),
            },
            amp: AmpConfig {
                model,
                ring,
                pump: PumpParams { p_source_w: a.pump_power_w, lambda_m: i.wavelength_m },
                io: a.io,
                coupling: a.coupling,
                cmrr_db: a.cmrr_db,
                rin: RinModel { floor: a.rin_floor_per_rthz, f0_hz: a.rin_corner_hz },
                sus: SuspensionParams {
                    youngs_pa: s.youngs_gpa * 1e9,
                    density_kg_m3: s.density_kg_per_m3,
                    cte_per_k: s.cte_per_k,
                    dlogy_dt_per_k: s.dlogy_dt_per_k,
                    heat_capacity_j_kg_k: s.heat_capacity_j_per_kg_k,
                    conductivity_w_m_k: s.conductivity_w_per_m_k,
                    width_m: s.width_um / 1e6,
                    thickness_m: s.thickness_um / 1e6,
                    n_fibers: s.fibers,
                    length_m: s.length_cm / 1e2,
                    phi_surface: s.phi_surface,
                    phi_bulk: s.phi_bulk,
                    h_surf_m: s.surface_depth_um / 1e6,
                    temperature_k: s.temperature_k,
                },
                coat: CoatingDesign {
                    n_h: k.n_high,
                    n_l: k.n_low,
                    phi_h: k.phi_high,
                    phi_l: k.phi_low,
                    pairs: k.pairs,
                    n_sub: k.substrate_index,
                    lambda_m: i.wavelength_m,
                },
                coat_noise: CoatingNoiseParams {
                    beam_radius_m: k.beam_radius_mm / 1e3,
                    temperature_k: k.temperature_k,
                    poisson: k.poisson,
                    youngs_sub_pa: k.substrate_youngs_gpa * 1e9,
                },
                technical: a.technical_noise,
            },
            ofc: a.ofc.as_ref().map(cavity_out),
            zeta0: a.homodyne_angle_rad,
            grid: FrequencyGrid::log(self.run.f_min_hz, self.run.f_max_hz, self.run.points)
                .map_err(|e| Error::Config(format!("run grid: {e}")))?,
            amp_on: a.enabled,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Write back the fields the design search may change.
    pub fn update_from(&mut self, c: &ChainConfig) {
        self.amp.transmissivity = Fraction(c.amp.ring.t_a);
        self.amp.pump_power_w = c.amp.pump.p_source_w;
        self.amp.homodyne_angle_rad = c.zeta0;
        self.amp.ofc = c.ofc.as_ref().map(cavity_in);
    }

    /// File form of a built-in design point.
    pub fn from_preset(name: &str) -> Result<Self> {
        let c = crate::preset::preset(name)?;
        let a = &c.amp;
        let s = &a.sus;
        let g = c.grid.points();
        Ok(RunConfigFile {
            ifo: IfoSection {
                arm_loss: Fraction(c.ifo.arm_loss),
                src_loss: Fraction(c.ifo.src_loss),
                readout_loss: Fraction(c.ifo.readout_loss),
                wavelength_m: c.ifo.lambda_m,
                test_mass_kg: c.ifo.mass_kg,
                arm_length_m: c.ifo.arm_length_m,
                arm_power_w: c.ifo.arm_power_w,
                bandwidth_hz: c.ifo.bandwidth_hz,
                model: c.ifo_model,
            },
            sqz: SqzSection {
                squeeze_db: c.sqz.db,
                injection_loss: Fraction(c.sqz.injection_loss),
                ifc: c.sqz.ifcs.iter().map(cavity_in).collect(),
            },
            amp: AmpSection {
                enabled: c.amp_on,
                model: "ring".into(),
                flat_gain: None,
                transmissivity: Fraction(a.ring.t_a),
                length_m: a.ring.length_m,
                segment1_m: a.ring.l1_m,
                segment2_m: a.ring.l2_m,
                pump_power_w: a.pump.p_source_w,
                mass_g: PRESET_MASS_G.iter().find(|(n, _)| *n == name).map(|x| x.1).unwrap_or(a.ring.mass_kg * 1e3),
                pendulum_hz: 1.0,
                roundtrip_loss: Fraction(a.ring.roundtrip_loss),
                incidence_deg: [30.0; 3],
                cmrr_db: a.cmrr_db,
                rin_floor_per_rthz: a.rin.floor,
                rin_corner_hz: a.rin.f0_hz,
                io: a.io,
                coupling: a.coupling,
                technical_noise: a.technical,
                homodyne_angle_rad: c.zeta0,
                ofc: c.ofc.as_ref().map(cavity_in),
            },
            coat: CoatSection {
                n_high: a.coat.n_h,
                n_low: a.coat.n_l,
                pairs: a.coat.pairs,
                phi_high: a.coat.phi_h,
                phi_low: a.coat.phi_l,
                beam_radius_mm: 5.0,
                substrate_index: a.coat.n_sub,
                substrate_youngs_gpa: 155.8,
                poisson: a.coat_noise.poisson,
                temperature_k: a.coat_noise.temperature_k,
            },
            sus: SusSection {
                width_um: 250.0,
                thickness_um: 50.0,
                fibers: s.n_fibers,
                length_cm: 60.0,
                phi_surface: s.phi_surface,
                phi_bulk: s.phi_bulk,
                surface_depth_um: 1.0,
                youngs_gpa: 155.8,
                cte_per_k: s.cte_per_k,
                dlogy_dt_per_k: s.dlogy_dt_per_k,
                heat_capacity_j_per_kg_k: s.heat_capacity_j_kg_k,
                conductivity_w_per_m_k: s.conductivity_w_m_k,
                density_kg_per_m3: s.density_kg_m3,
                temperature_k: s.temperature_k,
            },
            run: RunSection { f_min_hz: g[0], f_max_hz: *g.last().unwrap(), points: g.len(), seed: 1 },
        })
    }
}

const PRESET_MASS_G: [(&str, f64); 2] = [("15dB", 30.0), ("20dB", 10.0)];
