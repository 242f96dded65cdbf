//! Triangular ring cavities of the Mach-Zehnder amplifier.
//!
//! The forward beam co-propagates with the pump and picks up the
//! optomechanical shear `[[1,0],[-K_A,1]]`; the backward beam only sees the
//! cavity phase.

use crate::consts::{C, HBAR, TWO_PI};
use crate::error::{Error, Result};
use crate::technical;
use crate::twophoton::{c, eye, phase, Mat2, NoisePath, PathSet, Source, ONE, ZERO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingCavityParams {
    /// power transmissivity of the coupler M1
    pub t_a: f64,
    /// round-trip length
    pub length_m: f64,
    pub l1_m: f64,
    pub l2_m: f64,
    pub mass_kg: f64,
    /// pendulum resonance, rad/s
    pub omega0: f64,
    pub roundtrip_loss: f64,
    pub theta_inc: [f64; 3],
}

impl RingCavityParams {
    pub fn equilateral(t_a: f64, length_m: f64, mass_kg: f64, roundtrip_loss: f64) -> Self {
        Self {
            t_a,
            length_m,
            l1_m: length_m / 3.0,
            l2_m: 2.0 * length_m / 3.0,
            mass_kg,
            omega0: TWO_PI * 1.0,
            roundtrip_loss,
            theta_inc: [30f64.to_radians(); 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t_a > 0.0
            && self.t_a < 1.0
            && self.length_m > 0.0
            && self.mass_kg > 0.0
            && self.roundtrip_loss >= 0.0
            && self.roundtrip_loss < 1.0
            && self.l1_m >= 0.0
            && self.l2_m >= 0.0
            && self.omega0 >= 0.0;
        if !ok {
            return Err(Error::InvalidParam(format!("ring cavity parameters out of range: {self:?}")));
        }
        if ((self.l1_m + self.l2_m) - self.length_m).abs() > 1e-9 * self.length_m {
            return Err(Error::InvalidParam("ring segments l1 + l2 must equal the round-trip length".into()));
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        (1.0 - self.t_a).sqrt()
    }

    pub fn t(&self) -> f64 {
        self.t_a.sqrt()
    }

    /// Σ cos²θ over the three mirrors.
    pub fn cos2_sum(&self) -> f64 {
        self.theta_inc.iter().map(|t| t.cos().powi(2)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpParams {
    pub p_source_w: f64,
    pub lambda_m: f64,
}

impl PumpParams {
    pub fn omega0(&self) -> f64 {
        TWO_PI * C / self.lambda_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IoModel {
    Exact,
    Approx,
}

/// Mirror-displacement coupling prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingModel {
    /// field buildup consistent with the optomechanical gain, ∝ 1/sqrt(T_A)
    Buildup,
    /// literal 1/T_A prefactor
    Quoted,
}

pub fn susceptibility(p: &RingCavityParams, omega: f64) -> Result<f64> {
    let d = p.omega0 * p.omega0 - omega * omega;
    if d == 0.0 {
        return Err(Error::Physics {
            source_label: "amplifier".into(),
            msg: format!("susceptibility singular at pendulum resonance {omega} rad/s"),
        });
    }
    Ok(1.0 / (p.mass_kg * d))
}

pub fn circulating_power_exact(p: &RingCavityParams, pump: &PumpParams) -> f64 {
    0.5 * (p.t() / (1.0 - p.r())).powi(2) * pump.p_source_w
}

pub fn circulating_power_approx(p: &RingCavityParams, pump: &PumpParams) -> f64 {
    2.0 * pump.p_source_w / p.t_a
}

/// Three-mirror form with one susceptibility per mirror.
pub fn kappa_a_general(pump: &PumpParams, p_circ: f64, theta_inc: &[f64; 3], chi: &[f64; 3]) -> f64 {
    let s: f64 = theta_inc.iter().zip(chi).map(|(t, x)| t.cos().powi(2) * x).sum();
    -8.0 * pump.omega0() * p_circ / (C * C) * s
}

pub fn kappa_a(p: &RingCavityParams, pump: &PumpParams, p_circ: f64, omega: f64) -> Result<f64> {
    let chi = susceptibility(p, omega)?;
    Ok(kappa_a_general(pump, p_circ, &p.theta_inc, &[chi; 3]))
}

pub fn gamma_a(p: &RingCavityParams) -> f64 {
    C * p.t_a / (2.0 * p.length_m)
}

/// Forward ring transfer with its gain and phase.
#[derive(Debug, Clone, Copy)]
pub struct RingIo {
    pub m: Mat2,
    pub k_a: f64,
    /// one-way phase η; the field picks up e^{2iη}
    pub eta: f64,
}

fn shear(e2: Complex64, k_a: f64) -> Mat2 {
    Mat2::new(ONE, ZERO, c(-k_a), ONE) * e2
}

/// e^{2iη} = (e^{iφ} − r)/(1 − e^{iφ} r), φ = ΩL/c.
pub fn ring_phase_exact(p: &RingCavityParams, omega: f64) -> Complex64 {
    let phi = omega * p.length_m / C;
    let r = p.r();
    let one_minus_r = p.t_a / (1.0 + r);
    let hav = 2.0 * (0.5 * phi).sin().powi(2);
    let s = phi.sin();
    Complex64::new(one_minus_r - hav, s) / Complex64::new(one_minus_r + r * hav, -r * s)
}

pub fn ring_io_exact(p: &RingCavityParams, kappa: f64, omega: f64) -> RingIo {
    let ph = omega * p.length_m / C;
    let r = p.r();
    let e2 = ring_phase_exact(p, omega);
    let k_a = p.t_a / (1.0 - 2.0 * ph.cos() * r + r * r) * kappa;
    RingIo { m: shear(e2, k_a), k_a, eta: 0.5 * e2.arg() }
}

pub fn ring_io_approx(p: &RingCavityParams, kappa: f64, omega: f64) -> RingIo {
    let g = gamma_a(p);
    let k_a = 4.0 * kappa / (p.t_a * (1.0 + (omega / g).powi(2)));
    let eta = (omega / g).atan();
    RingIo { m: shear(phase(2.0 * eta), k_a), k_a, eta }
}

pub fn ring_io(p: &RingCavityParams, kappa: f64, omega: f64, io: IoModel) -> RingIo {
    match io {
        IoModel::Exact => ring_io_exact(p, kappa, omega),
        IoModel::Approx => ring_io_approx(p, kappa, omega),
    }
}

/// Scaling-law gain at frequency `f` (Hz), with P_circ from the exact
/// buildup of the pump.
pub fn gain_magnitude(p: &RingCavityParams, pump: &PumpParams, f: f64) -> f64 {
    let pc = circulating_power_exact(p, pump);
    (0.01 / p.t_a) * (0.03 / p.mass_kg) * (pc / 40e3) * (1500.0 / f).powi(2)
}

/// Counter-propagating pass: phase only.
pub fn mz_backward(p: &RingCavityParams, omega: f64) -> Mat2 {
    eye() * ring_phase_exact(p, omega)
}

/// Power lost per reflection off the ring when a round-trip loss `ℓ` is
/// present, 1 − |ρ|².
pub fn ring_loss_eff(p: &RingCavityParams, omega: f64) -> f64 {
    if p.roundtrip_loss == 0.0 {
        return 0.0;
    }
    let a = (1.0 - p.roundtrip_loss).sqrt();
    let e = phase(omega * p.length_m / C);
    let r = p.r();
    let rho = (e * a - r) / (ONE - e * (r * a));
    (1.0 - rho.norm_sqr()).max(0.0)
}

/// sqrt(32 ω₀ P_circ / ħc²), 1/m per quantum.
pub fn displacement_prefactor(pump: &PumpParams, p_circ: f64) -> f64 {
    (32.0 * pump.omega0() * p_circ / (HBAR * C * C)).sqrt()
}

/// Complex response of the output phase quadrature to mirror motion ξ.
pub fn displacement_coupling(
    p: &RingCavityParams,
    pump: &PumpParams,
    omega: f64,
    io: IoModel,
    model: CouplingModel,
) -> Complex64 {
    let pre = displacement_prefactor(pump, circulating_power_exact(p, pump));
    match (model, io) {
        (CouplingModel::Quoted, _) => c(pre / p.t_a),
        (CouplingModel::Buildup, IoModel::Exact) => {
            let e = phase(omega * p.length_m / C);
            c(pre * 0.5 * p.t()) / (ONE - e * p.r())
        }
        (CouplingModel::Buildup, IoModel::Approx) => {
            c(pre / p.t()) / Complex64::new(1.0, -omega / gamma_a(p))
        }
    }
}

/// Forward pass through one ring: round-trip loss admitted inside the cavity
/// so its vacuum is amplified, then the optomechanical shear.
pub fn mz_forward(
    set: &mut PathSet,
    p: &RingCavityParams,
    pump: &PumpParams,
    omega: f64,
    io: IoModel,
) -> Result<RingIo> {
    let pc = circulating_power_exact(p, pump);
    let kappa = kappa_a(p, pump, pc, omega)?;
    let ring = ring_io(p, kappa, omega, io);
    set.loss_channel(ring_loss_eff(p, omega), Source::RingLoss)?;
    set.apply(&ring.m);
    Ok(ring)
}

/// Classical displacement of ASD `xi` entering the phase quadrature.
pub fn displacement_path(source: Source, xi: f64, g: Complex64) -> NoisePath {
    NoisePath { source, input_psd: xi * xi, transfer: Mat2::new(ZERO, ZERO, g, ZERO) }
}

/// Pump-noise response of one ring in output-quadrature units per unit RIN.
pub fn rin_response(
    p: &RingCavityParams,
    pump: &PumpParams,
    omega: f64,
    io: IoModel,
    model: CouplingModel,
) -> Result<Complex64> {
    let pc = circulating_power_exact(p, pump);
    let xi = technical::rin_displacement(p, pc, 1.0, omega)?;
    Ok(displacement_coupling(p, pump, omega, io, model) * xi)
}

/// ½(D_left − D_right) for a common pump-noise drive.
pub fn cmrr_residual(
    left: &RingCavityParams,
    right: &RingCavityParams,
    pump: &PumpParams,
    omega: f64,
    io: IoModel,
    model: CouplingModel,
) -> Result<Complex64> {
    Ok((rin_response(left, pump, omega, io, model)? - rin_response(right, pump, omega, io, model)?) * 0.5)
}

/// Split the coupler transmissivity symmetrically, T_A(1 ± δ/2).
pub fn split_pair(p: &RingCavityParams, delta: f64) -> (RingCavityParams, RingCavityParams) {
    let mut l = p.clone();
    let mut r = p.clone();
    l.t_a = p.t_a * (1.0 + 0.5 * delta);
    r.t_a = p.t_a * (1.0 - 0.5 * delta);
    (l, r)
}

/// Relative T_A split that leaves a residual `cmrr_db` below the single-ring
/// response at `f_ref`.
pub fn cmrr_split(
    p: &RingCavityParams,
    pump: &PumpParams,
    cmrr_db: f64,
    f_ref: f64,
    io: IoModel,
    model: CouplingModel,
) -> Result<f64> {
    let omega = TWO_PI * f_ref;
    let target = 10f64.powf(-cmrr_db / 20.0);
    let single = rin_response(p, pump, omega, io, model)?.norm();
    let ratio = |d: f64| -> Result<f64> {
        let (l, r) = split_pair(p, d);
        Ok(cmrr_residual(&l, &r, pump, omega, io, model)?.norm() / single)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if ratio(hi)? < target {
        return Err(Error::Infeasible(format!("CMRR of {cmrr_db} dB needs a coupler split beyond 100%")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> (RingCavityParams, PumpParams) {
        (
            RingCavityParams::equilateral(0.01, 30.0, 0.03, 0.0),
            PumpParams { p_source_w: 200.0, lambda_m: 2e-6 },
        )
    }

    #[test]
    fn static_susceptibility() {
        let (p, _) = reference();
        assert_relative_eq!(susceptibility(&p, 0.0).unwrap(), 1.0 / (0.03 * p.omega0.powi(2)));
        assert!(susceptibility(&p, p.omega0).is_err());
    }

    #[test]
    fn free_mass_limit() {
        let (p, _) = reference();
        let w = 101.0 * p.omega0;
        let x = susceptibility(&p, w).unwrap();
        assert!((x.abs() * p.mass_kg * w * w - 1.0).abs() < 1e-4);
    }

    #[test]
    fn equilateral_kappa_matches_specialised() {
        let (p, pump) = reference();
        let w = TWO_PI * 100.0;
        let chi = susceptibility(&p, w).unwrap();
        let k = kappa_a(&p, &pump, 4e4, w).unwrap();
        assert_relative_eq!(k / (-18.0 * pump.omega0() * 4e4 * chi / (C * C)), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn kappa_sign_below_resonance() {
        let (p, pump) = reference();
        assert!(kappa_a(&p, &pump, 4e4, 0.5 * p.omega0).unwrap() < 0.0);
    }

    #[test]
    fn exact_phase_at_dc() {
        let (p, _) = reference();
        assert!((ring_phase_exact(&p, 0.0) - ONE).norm() < 1e-15);
    }

    #[test]
    fn gamma_reference() {
        let (p, _) = reference();
        assert_relative_eq!(gamma_a(&p), 4.996540966666667e4, max_relative = 1e-12);
    }

    #[test]
    fn approx_lorentzian_half_point() {
        let (p, _) = reference();
        let g = gamma_a(&p);
        let a = ring_io_approx(&p, 1e-3, g);
        let z = ring_io_approx(&p, 1e-3, 0.0);
        assert_relative_eq!(a.k_a / z.k_a, 0.5, max_relative = 1e-14);
        assert_relative_eq!(a.eta, std::f64::consts::FRAC_PI_4, max_relative = 1e-14);
        assert_eq!(z.eta, 0.0);
    }

    #[test]
    fn gain_reference_points() {
        let (p, _) = reference();
        // P_circ pinned at 40 kW
        let unit = PumpParams { p_source_w: 1.0, lambda_m: 2e-6 };
        let pump = PumpParams { p_source_w: 40e3 / circulating_power_exact(&p, &unit), lambda_m: 2e-6 };
        assert_relative_eq!(circulating_power_exact(&p, &pump), 40e3, max_relative = 1e-12);
        assert_relative_eq!(gain_magnitude(&p, &pump, 1500.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(gain_magnitude(&p, &pump, 150.0), 100.0, max_relative = 1e-12);
        assert_relative_eq!(gain_magnitude(&p, &pump, 3000.0), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn backward_is_pure_phase() {
        let (p, _) = reference();
        for f in [0.0, 10.0, 1e3, 1e5] {
            let m = mz_backward(&p, TWO_PI * f);
            assert!((m[(0, 0)].norm() - 1.0).abs() < 1e-13);
            assert_eq!(m[(0, 1)], ZERO);
        }
        assert!((mz_backward(&p, 0.0) - eye()).norm() < 1e-15);
    }

    #[test]
    fn lossless_ring_has_no_loss_path() {
        let (p, _) = reference();
        assert_eq!(ring_loss_eff(&p, 100.0), 0.0);
    }

    #[test]
    fn identical_rings_cancel() {
        let (p, pump) = reference();
        let r = cmrr_residual(&p, &p, &pump, TWO_PI * 100.0, IoModel::Exact, CouplingModel::Buildup).unwrap();
        assert_eq!(r, ZERO);
    }

    #[test]
    fn buildup_coupling_dc_limit() {
        let (p, pump) = reference();
        let g = displacement_coupling(&p, &pump, 0.0, IoModel::Exact, CouplingModel::Buildup);
        let pre = displacement_prefactor(&pump, circulating_power_exact(&p, &pump));
        // ½ t/(1−r) → 1/sqrt(T) for small T
        assert_relative_eq!(g.re * p.t() / pre, 1.0, max_relative = 3e-3);
    }
}
