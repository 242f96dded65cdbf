//! Ponderomotive interferometer and the squeezed-vacuum injection path.
//!
//! The interferometer relation is written with the signal (phase) quadrature
//! first. Filter-cavity matrices are derived in (amplitude, phase) order, so
//! they are conjugated by the quadrature swap before acting on the
//! injected field.

use crate::consts::{C, HBAR, TWO_PI};
use crate::error::{Error, Result};
use crate::filter_cavity::{loss_coupling, quadrature_reflection, FilterCavityParams};
use crate::twophoton::{c, check_fraction, phase, rotation, squeeze, Mat2, NoisePath, PathSet, Source, Vec2, ONE, ZERO};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfoParams {
    pub mass_kg: f64,
    pub arm_length_m: f64,
    pub arm_power_w: f64,
    /// arm cavity half-width γ/2π
    pub bandwidth_hz: f64,
    pub lambda_m: f64,
    pub arm_loss: f64,
    pub src_loss: f64,
    pub readout_loss: f64,
}

impl IfoParams {
    /// Arm power that puts the K = 1 crossover at `f_q` (low-frequency
    /// approximation).
    pub fn arm_power_for_crossover(mass_kg: f64, arm_length_m: f64, bandwidth_hz: f64, lambda_m: f64, f_q: f64) -> f64 {
        let (wq, g) = (TWO_PI * f_q, TWO_PI * bandwidth_hz);
        let w0 = TWO_PI * C / lambda_m;
        wq * wq * mass_kg * arm_length_m * arm_length_m * g * g / (8.0 * w0)
    }

    pub fn validate(&self) -> Result<()> {
        for (v, what) in [(self.arm_loss, "arm loss"), (self.src_loss, "SRC loss"), (self.readout_loss, "readout loss")] {
            check_fraction(v, what)?;
        }
        if !(self.mass_kg > 0.0 && self.arm_length_m > 0.0 && self.arm_power_w >= 0.0 && self.bandwidth_hz > 0.0 && self.lambda_m > 0.0) {
            return Err(Error::InvalidParam(format!("interferometer parameters out of range: {self:?}")));
        }
        Ok(())
    }

    pub fn omega0(&self) -> f64 {
        TWO_PI * C / self.lambda_m
    }

    /// Lumped dark-port loss.
    pub fn lumped_loss(&self) -> f64 {
        self.arm_loss + self.src_loss
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kimble {
    pub k: f64,
    pub phi: f64,
    pub h_sql: f64,
}

pub fn kimble_factor(p: &IfoParams, omega: f64) -> Result<Kimble> {
    if omega <= 0.0 {
        return Err(Error::Physics { source_label: "interferometer".into(), msg: "K_IFO singular at Ω = 0".into() });
    }
    let g = TWO_PI * p.bandwidth_hz;
    let (m, l) = (p.mass_kg, p.arm_length_m);
    let k = 8.0 * p.arm_power_w * p.omega0() / (m * l * l * omega * omega * (g * g + omega * omega));
    let h_sql = (8.0 * HBAR / (m * omega * omega * l * l)).sqrt();
    Ok(Kimble { k, phi: (omega / g).atan(), h_sql })
}

pub fn ifo_matrix(k: &Kimble) -> Mat2 {
    Mat2::new(ONE, c(-k.k), ZERO, ONE) * phase(2.0 * k.phi)
}

/// Output per unit strain.
pub fn signal_vector(k: &Kimble) -> Vec2 {
    Vec2::new(phase(k.phi) * ((2.0 * k.k).sqrt() / k.h_sql), ZERO)
}

/// Interferometer pass plus lumped arm/SRC loss. Replaces the signal.
pub fn ifo_io(set: &mut PathSet, p: &IfoParams, omega: f64) -> Result<Kimble> {
    let k = kimble_factor(p, omega)?;
    set.apply(&ifo_matrix(&k));
    set.signal = signal_vector(&k);
    set.add_loss(p.lumped_loss(), Source::SrcArmLoss)?;
    Ok(k)
}

/// Rotation the ideal input filter must apply, in signal-first order.
pub fn ideal_ifc_rotation(k: &Kimble) -> Mat2 {
    rotation(-k.k.atan())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezerParams {
    pub db: f64,
    pub injection_loss: f64,
    pub ifcs: Vec<FilterCavityParams>,
}

impl SqueezerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.db >= 0.0 && self.db.is_finite()) {
            return Err(Error::InvalidParam(format!("squeeze level {} dB", self.db)));
        }
        check_fraction(self.injection_loss, "injection loss")?;
        self.ifcs.iter().try_for_each(|f| f.validate())
    }
}

const SWAP: Mat2 = Mat2::new(ZERO, ONE, ONE, ZERO);

/// Re-express an (amplitude, phase) matrix in signal-first order.
pub fn to_signal_first(m: &Mat2) -> Mat2 {
    SWAP * m * SWAP
}

/// Squeezed vacuum through injection loss and the IFC train, ready to enter
/// the interferometer. The signal slot is left at zero.
pub fn injection_chain(sq: &SqueezerParams, omega: f64) -> Result<PathSet> {
    let mut set = PathSet::new(Vec2::zeros());
    set.push(NoisePath::vacuum(Source::Quantum, squeeze(sq.db, 0.0)));
    set.add_loss(sq.injection_loss, Source::InjectionIfcLoss)?;
    for f in &sq.ifcs {
        let m = quadrature_reflection(f, omega);
        set.apply(&to_signal_first(&m));
        set.push(NoisePath::vacuum(Source::InjectionIfcLoss, to_signal_first(&loss_coupling(&m))));
    }
    Ok(set)
}

/// Closed forms for a lossy readout with and without a flat amplifier:
/// (e^{−2r} + ε, e^{−2r} + ε/G²).
pub fn caves_toy(r: f64, eps: f64, gain: f64) -> Result<(f64, f64)> {
    check_fraction(eps, "detection loss")?;
    if gain <= 0.0 {
        return Err(Error::InvalidParam(format!("gain {gain} must be positive")));
    }
    let s = (-2.0 * r).exp();
    Ok((s + eps, s + eps / (gain * gain)))
}
