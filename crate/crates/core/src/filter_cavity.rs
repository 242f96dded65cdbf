//! Detuned two-mirror filter cavities in reflection.

use crate::consts::{C, TWO_PI};
use crate::error::{Error, Result};
use crate::twophoton::{c, homodyne_vector, loss_vacuum_coupling, Mat2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterCavityParams {
    /// one-way length
    pub length_m: f64,
    /// input coupler power transmission t_in²
    pub t_in: f64,
    pub roundtrip_loss: f64,
    pub detuning_hz: f64,
}

impl FilterCavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.t_in > 0.0 && self.t_in < 1.0 && (0.0..1.0).contains(&self.roundtrip_loss))
            || !self.detuning_hz.is_finite()
        {
            return Err(Error::InvalidParam(format!("filter cavity parameters out of range: {self:?}")));
        }
        Ok(())
    }

    pub fn r_in(&self) -> f64 {
        (1.0 - self.t_in).sqrt()
    }

    pub fn r_rt(&self) -> f64 {
        self.r_in() * (1.0 - self.roundtrip_loss).sqrt()
    }

    /// Half-width of the resonance in Hz.
    pub fn pole_hz(&self) -> f64 {
        C * (self.t_in + self.roundtrip_loss) / (4.0 * self.length_m) / TWO_PI
    }

    /// Round-trip phase at signed sideband frequency Ω.
    pub fn round_trip_phase(&self, omega: f64) -> f64 {
        2.0 * self.length_m / C * (omega - TWO_PI * self.detuning_hz)
    }
}

/// Amplitude reflectivity at signed sideband frequency (negative for the
/// lower sideband).
///
/// r_fc = r_in − (t_in²/r_in)·x/(1 − x), x = r_rt e^{iφ}, evaluated as
/// (r_in² − x)/(r_in(1 − x)) with the near-resonance differences expanded.
pub fn reflectivity(p: &FilterCavityParams, omega: f64) -> Complex64 {
    let r_in = p.r_in();
    let r_rt = p.r_rt();
    let a = (1.0 - p.roundtrip_loss).sqrt();
    let phi = p.round_trip_phase(omega);
    let hav = 2.0 * (0.5 * phi).sin().powi(2);
    let s = phi.sin();
    // 1 − r_rt and r_in² − r_rt without cancellation
    let one_minus_rrt = (p.t_in + p.roundtrip_loss - p.t_in * p.roundtrip_loss) / (1.0 + r_rt);
    let rin2_minus_rrt = r_in * (p.roundtrip_loss - p.t_in) / (r_in + a);
    let num = Complex64::new(rin2_minus_rrt + r_rt * hav, -r_rt * s);
    let den = Complex64::new(one_minus_rrt + r_rt * hav, -r_rt * s) * r_in;
    num / den
}

/// Sideband reflectivities mapped onto the (amplitude, phase) quadratures.
pub fn quadrature_reflection(p: &FilterCavityParams, omega: f64) -> Mat2 {
    sideband_to_quadrature(reflectivity(p, omega), reflectivity(p, -omega))
}

pub fn sideband_to_quadrature(rp: Complex64, rm: Complex64) -> Mat2 {
    let i = Complex64::i();
    let a = rp + rm.conj();
    let b = rp - rm.conj();
    Mat2::new(a, i * b, -i * b, a) * c(0.5)
}

/// Vacuum admitted by the cavity loss, N N† = I − M M†.
pub fn loss_coupling(m: &Mat2) -> Mat2 {
    loss_vacuum_coupling(m)
}

/// Rotation angle of a matrix of the form e^{iψ} R(θ) (times a scalar).
pub fn rotation_angle(m: &Mat2) -> f64 {
    (m[(1, 0)] / m[(0, 0)]).re.atan()
}

/// Angle in [−π/2, π/2) actually read out when a homodyne at ζ₀ sits after
/// the transfer `m`.
pub fn readout_angle_through(m: &Mat2, zeta0: f64) -> f64 {
    let w = homodyne_vector(zeta0).transpose() * m;
    let (w1, w2) = (w[(0, 0)], w[(0, 1)]);
    let z = 0.5 * (2.0 * (w1.conj() * w2).re).atan2(w1.norm_sqr() - w2.norm_sqr());
    wrap_half_turn(z)
}

pub fn wrap_half_turn(z: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (z + 0.5 * pi).rem_euclid(pi) - 0.5 * pi
}

/// Frequency-dependent readout angle realised by the OFC and a fixed ζ₀.
pub fn effective_readout_angle(ofc: Option<&FilterCavityParams>, zeta0: f64, omega: f64) -> f64 {
    match ofc {
        None => wrap_half_turn(zeta0),
        Some(p) => readout_angle_through(&quadrature_reflection(p, omega), zeta0),
    }
}
