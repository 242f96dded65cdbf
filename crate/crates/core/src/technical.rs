//! Classical noise: scatter loss, pump intensity noise, backscatter,
//! suspension and coating thermal motion.

use crate::amplifier::{susceptibility, RingCavityParams};
use crate::consts::{C, G_N, HBAR, K_B, TWO_PI};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Micro-roughness scatter, power-law surface PSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterModel {
    pub a_nm2_mm: f64,
    pub gamma_exp: f64,
    pub alpha: f64,
    pub w_mm: f64,
    pub lambda_nm: f64,
}

impl Default for ScatterModel {
    fn default() -> Self {
        Self { a_nm2_mm: 8e-3, gamma_exp: 1.2, alpha: 1.0, w_mm: 5.0, lambda_nm: 2000.0 }
    }
}

/// Scatter loss as a fraction of incident power.
pub fn scatter_loss(s: &ScatterModel) -> Result<f64> {
    if s.gamma_exp <= 1.0 {
        return Err(Error::InvalidParam(format!("scatter exponent {} ≤ 1: integral diverges", s.gamma_exp)));
    }
    let k = 4.0 * PI / s.lambda_nm;
    Ok(k * k * s.a_nm2_mm / (s.gamma_exp - 1.0) * (1.0 / (2f64.sqrt() * s.alpha * s.w_mm)).powf(1.0 - s.gamma_exp))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RinModel {
    pub floor: f64,
    pub f0_hz: f64,
}

impl Default for RinModel {
    fn default() -> Self {
        Self { floor: 1e-9, f0_hz: 50.0 }
    }
}

impl RinModel {
    pub fn rin(&self, f: f64) -> Result<f64> {
        if f <= 0.0 {
            return Err(Error::InvalidParam(format!("RIN needs f > 0, got {f}")));
        }
        Ok(((f + self.f0_hz) / f).abs() * self.floor)
    }
}

/// Mirror motion driven by pump intensity noise, summed over the three
/// mirrors with the cos² projection, before common-mode rejection.
pub fn rin_displacement(p: &RingCavityParams, p_circ: f64, rin: f64, omega: f64) -> Result<f64> {
    let chi = susceptibility(p, omega)?.abs();
    Ok(2.0 * p_circ * rin / C * chi * p.cos2_sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackscatterParams {
    pub eps_bs: f64,
    pub p_source_w: f64,
    pub lambda_m: f64,
}

/// Quanta/√Hz per quadrature from pump light scattered into the readout.
pub fn backscatter_noise(b: &BackscatterParams, rin: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&b.eps_bs) {
        return Err(Error::InvalidParam(format!("backscatter fraction {}", b.eps_bs)));
    }
    let w0 = TWO_PI * C / b.lambda_m;
    Ok((0.5 * b.eps_bs * b.p_source_w / (2.0 * HBAR * w0)).sqrt() * rin)
}

/// Ribbon-fibre pendulum of the lower suspension stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuspensionParams {
    pub youngs_pa: f64,
    pub density_kg_m3: f64,
    pub cte_per_k: f64,
    pub dlogy_dt_per_k: f64,
    pub heat_capacity_j_kg_k: f64,
    pub conductivity_w_m_k: f64,
    pub width_m: f64,
    pub thickness_m: f64,
    pub n_fibers: u32,
    pub length_m: f64,
    pub phi_surface: f64,
    pub phi_bulk: f64,
    pub h_surf_m: f64,
    pub temperature_k: f64,
}

impl SuspensionParams {
    pub fn f0_pend(&self) -> f64 {
        (G_N / self.length_m).sqrt() / TWO_PI
    }

    pub fn surface_loss(&self) -> f64 {
        let (w, t) = (self.width_m, self.thickness_m);
        self.phi_surface * self.h_surf_m * 2.0 * (w + t) / (w * t)
    }

    /// Static tension stress in one fibre carrying `mass_kg`.
    pub fn stress(&self, mass_kg: f64) -> f64 {
        mass_kg * G_N / (self.n_fibers as f64 * self.width_m * self.thickness_m)
    }

    pub fn thermoelastic(&self, mass_kg: f64, omega: f64) -> f64 {
        let delta = self.youngs_pa * self.temperature_k / (self.density_kg_m3 * self.heat_capacity_j_kg_k)
            * (self.cte_per_k - self.stress(mass_kg) * self.dlogy_dt_per_k / self.youngs_pa).powi(2);
        let tau = self.density_kg_m3 * self.heat_capacity_j_kg_k * self.thickness_m.powi(2) / (PI * PI * self.conductivity_w_m_k);
        delta * omega * tau / (1.0 + (omega * tau).powi(2))
    }

    pub fn loss_angle(&self, mass_kg: f64, omega: f64) -> f64 {
        self.phi_bulk + self.surface_loss() + self.thermoelastic(mass_kg, omega)
    }
}

/// Displacement ASD (m/√Hz) at `f` Hz.
pub fn suspension_thermal(s: &SuspensionParams, mass_kg: f64, f: f64) -> Result<f64> {
    if f <= 0.0 {
        return Err(Error::InvalidParam(format!("suspension noise needs f > 0, got {f}")));
    }
    let w = TWO_PI * f;
    let w0 = TWO_PI * s.f0_pend();
    let phi = s.loss_angle(mass_kg, w);
    let x2 = 4.0 * K_B * s.temperature_k / (w * mass_kg) * (w0 * w0 * phi / (w0.powi(4) * phi * phi + (w0 * w0 - w * w).powi(2)));
    Ok(x2.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoatingNoiseParams {
    pub beam_radius_m: f64,
    pub temperature_k: f64,
    pub poisson: f64,
    pub youngs_sub_pa: f64,
}

/// Thin-coating Brownian ASD on a half-infinite substrate.
pub fn coating_brownian(d_eff: f64, phi_eff: f64, p: &CoatingNoiseParams, f: f64) -> Result<f64> {
    if f <= 0.0 {
        return Err(Error::InvalidParam(format!("coating noise needs f > 0, got {f}")));
    }
    let sx = 2.0 * K_B * p.temperature_k / (PI * PI * f) * d_eff * phi_eff * (1.0 - p.poisson * p.poisson)
        / (p.beam_radius_m.powi(2) * p.youngs_sub_pa);
    Ok(sx.sqrt())
}
