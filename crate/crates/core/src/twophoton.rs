//! Two-photon quadrature algebra.
//!
//! Fields are pairs of quadratures. Every element of the readout chain is a
//! 2x2 complex matrix evaluated at a sideband frequency; noise inputs are
//! unit-normalised vacua (single-sided PSD 1 per quadrature) or classical
//! spectra expressed in the same unit.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;
pub type Vec2 = Vector2<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye() -> Mat2 {
    Mat2::identity()
}

pub fn phase(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Sideband frequencies in Hz, strictly increasing and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParam("frequency grid is empty".into()));
        }
        for (i, &f) in points.iter().enumerate() {
            if !f.is_finite() || f <= 0.0 {
                return Err(Error::InvalidParam(format!("grid point {i} = {f} is not a positive finite frequency")));
            }
            if i > 0 && f <= points[i - 1] {
                return Err(Error::InvalidParam(format!("grid not strictly increasing at index {i}")));
            }
        }
        Ok(Self { points })
    }

    /// Log-spaced grid, endpoints included.
    pub fn log(f_lo: f64, f_hi: f64, n: usize) -> Result<Self> {
        if !(f_lo > 0.0 && f_hi > f_lo && n >= 2) {
            return Err(Error::InvalidParam(format!("bad log grid {f_lo}..{f_hi} with {n} points")));
        }
        let (a, b) = (f_lo.ln(), f_hi.ln());
        let pts = (0..n)
            .map(|i| {
                if i == n - 1 {
                    f_hi
                } else {
                    (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                }
            })
            .collect();
        Self::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A transfer matrix sampled on a grid.
#[derive(Debug, Clone)]
pub struct QuadratureTransfer {
    pub label: String,
    pub grid: FrequencyGrid,
    pub mats: Vec<Mat2>,
}

impl QuadratureTransfer {
    pub fn from_fn(label: &str, grid: &FrequencyGrid, f: impl Fn(f64) -> Mat2) -> Result<Self> {
        let mats: Vec<Mat2> = grid.points().iter().map(|&x| f(x)).collect();
        if let Some(i) = mats.iter().position(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::Physics {
                source_label: label.to_string(),
                msg: format!("non-finite matrix at {} Hz", grid.points()[i]),
            });
        }
        Ok(Self { label: label.to_string(), grid: grid.clone(), mats })
    }

    pub fn constant(label: &str, grid: &FrequencyGrid, m: Mat2) -> Result<Self> {
        Self::from_fn(label, grid, |_| m)
    }
}

/// Pointwise a·b (b acts first).
pub fn compose(a: &QuadratureTransfer, b: &QuadratureTransfer) -> Result<QuadratureTransfer> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(QuadratureTransfer {
        label: format!("{}*{}", a.label, b.label),
        grid: a.grid.clone(),
        mats: a.mats.iter().zip(&b.mats).map(|(x, y)| x * y).collect(),
    })
}

pub fn rotation(theta: f64) -> Mat2 {
    let (s, co) = theta.sin_cos();
    Mat2::new(c(co), c(-s), c(s), c(co))
}

/// Squeezer. The quadrature at `angle` gets amplitude 10^(-db/20), the
/// orthogonal one the inverse.
pub fn squeeze(db: f64, angle: f64) -> Mat2 {
    let s = 10f64.powf(-db / 20.0);
    let d = Mat2::new(c(s), ZERO, ZERO, c(1.0 / s));
    rotation(angle) * d * rotation(-angle)
}

/// Square root of a 2x2 Hermitian positive semidefinite matrix.
pub fn sqrtm_psd(a: &Mat2) -> Mat2 {
    // symmetrise and clip tiny negative determinants from rounding
    let h = (a + a.adjoint()) * c(0.5);
    let det = (h[(0, 0)].re * h[(1, 1)].re - h[(0, 1)].norm_sqr()).max(0.0);
    let s = det.sqrt();
    let tr = h[(0, 0)].re + h[(1, 1)].re + 2.0 * s;
    if tr <= 0.0 {
        return Mat2::zeros();
    }
    (h + eye() * c(s)) / c(tr.sqrt())
}

/// Coupling of the vacuum that fills the deficit of a lossy element:
/// N with N N† = I − M M†.
pub fn loss_vacuum_coupling(m: &Mat2) -> Mat2 {
    let d = eye() - m * m.adjoint();
    // a lossless element leaves only rounding residue, which the square
    // root would blow up to ~1e-8
    if d.norm() < 1e-13 {
        return Mat2::zeros();
    }
    sqrtm_psd(&d)
}

/// Budget source labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Quantum,
    ReadoutLoss,
    RingLoss,
    RinResidual,
    CoatingBrownian,
    SuspensionThermal,
    InjectionIfcLoss,
    SrcArmLoss,
}

impl Source {
    pub const ALL: [Source; 8] = [
        Source::Quantum,
        Source::ReadoutLoss,
        Source::RingLoss,
        Source::RinResidual,
        Source::CoatingBrownian,
        Source::SuspensionThermal,
        Source::InjectionIfcLoss,
        Source::SrcArmLoss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Source::Quantum => "quantum",
            Source::ReadoutLoss => "readout_loss",
            Source::RingLoss => "ring_loss",
            Source::RinResidual => "rin_residual",
            Source::CoatingBrownian => "coating_brownian",
            Source::SuspensionThermal => "suspension_thermal",
            Source::InjectionIfcLoss => "injection_ifc_loss",
            Source::SrcArmLoss => "src_arm_loss",
        }
    }

    pub fn index(self) -> usize {
        Source::ALL.iter().position(|&s| s == self).unwrap()
    }
}

/// One noise input at one frequency: PSD of the input (per quadrature) and
/// its accumulated transfer to the current point of the chain. The columns
/// of `transfer` are the responses to the two input quadratures, so the
/// coupling matrix is folded in at creation.
#[derive(Debug, Clone)]
pub struct NoisePath {
    pub source: Source,
    pub input_psd: f64,
    pub transfer: Mat2,
}

impl NoisePath {
    pub fn vacuum(source: Source, coupling: Mat2) -> Self {
        Self { source, input_psd: 1.0, transfer: coupling }
    }
}

/// Noise paths plus signal vector at a single frequency.
#[derive(Debug, Clone)]
pub struct PathSet {
    pub paths: Vec<NoisePath>,
    pub signal: Vec2,
}

impl PathSet {
    pub fn new(signal: Vec2) -> Self {
        Self { paths: Vec::new(), signal }
    }

    pub fn push(&mut self, p: NoisePath) {
        self.paths.push(p);
    }

    /// Apply an element to everything already in the chain.
    pub fn apply(&mut self, m: &Mat2) {
        for p in &mut self.paths {
            p.transfer = m * p.transfer;
        }
        self.signal = m * self.signal;
    }

    /// Beam-splitter loss: scale by sqrt(1−ε) and admit sqrt(ε) vacuum.
    pub fn loss_channel(&mut self, eps: f64, source: Source) -> Result<()> {
        check_fraction(eps, "loss")?;
        if eps == 0.0 {
            return Ok(());
        }
        self.apply(&(eye() * c((1.0 - eps).sqrt())));
        self.push(NoisePath::vacuum(source, eye() * c(eps.sqrt())));
        Ok(())
    }

    /// Additive loss b → b + sqrt(ε) n, the lumped form used for the
    /// interferometer, injection and detection losses.
    pub fn add_loss(&mut self, eps: f64, source: Source) -> Result<()> {
        check_fraction(eps, "loss")?;
        if eps > 0.0 {
            self.push(NoisePath::vacuum(source, eye() * c(eps.sqrt())));
        }
        Ok(())
    }

    /// Classical input of PSD `psd` entering through `coupling`.
    pub fn add_classical(&mut self, source: Source, psd: f64, coupling: Mat2) {
        self.push(NoisePath { source, input_psd: psd, transfer: coupling });
    }
}

pub fn check_fraction(eps: f64, what: &str) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParam(format!("{what} fraction {eps} outside [0,1)")));
    }
    Ok(())
}

pub fn homodyne_vector(zeta: f64) -> Vec2 {
    Vec2::new(c(zeta.cos()), c(zeta.sin()))
}

/// PSD contributed by one path in the readout at angle ζ.
pub fn path_psd(zeta: f64, p: &NoisePath) -> f64 {
    let row = homodyne_vector(zeta).transpose() * p.transfer;
    p.input_psd * (row[(0, 0)].norm_sqr() + row[(0, 1)].norm_sqr())
}

/// Total noise PSD and complex signal gain at readout angle ζ.
pub fn homodyne(zeta: f64, set: &PathSet) -> (f64, Complex64) {
    let noise = set.paths.iter().map(|p| path_psd(zeta, p)).sum();
    let g = (homodyne_vector(zeta).transpose() * set.signal)[(0, 0)];
    (noise, g)
}

/// Per-source PSDs at readout angle ζ, indexed by `Source::index`.
pub fn homodyne_by_source(zeta: f64, set: &PathSet) -> [f64; 8] {
    let mut out = [0.0; 8];
    for p in &set.paths {
        out[p.source.index()] += path_psd(zeta, p);
    }
    out
}

/// Signal-referred ASD; None where the signal gain vanishes.
pub fn signal_referred(noise_psd: f64, gain: Complex64) -> Option<f64> {
    let g = gain.norm();
    if g == 0.0 || !g.is_finite() {
        None
    } else {
        Some(noise_psd.sqrt() / g)
    }
}
