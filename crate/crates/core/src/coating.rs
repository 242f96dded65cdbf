//! Dielectric mirror coatings: characteristic-matrix optics, loss proxy and
//! a constrained thickness search.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: String,
    pub n: f64,
    pub d_m: f64,
    pub phi: f64,
}

/// Layers listed from the incidence (air) side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoatingStack {
    pub layers: Vec<Layer>,
    pub n_sub: f64,
    pub lambda_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoatingDesign {
    pub n_h: f64,
    pub n_l: f64,
    pub phi_h: f64,
    pub phi_l: f64,
    pub pairs: usize,
    pub n_sub: f64,
    pub lambda_m: f64,
}

impl CoatingDesign {
    /// (H L)^pairs with quarter-wave optical thickness.
    pub fn quarter_wave(&self) -> CoatingStack {
        let mut layers = Vec::with_capacity(2 * self.pairs);
        for _ in 0..self.pairs {
            layers.push(Layer { material: "aSi".into(), n: self.n_h, d_m: self.lambda_m / (4.0 * self.n_h), phi: self.phi_h });
            layers.push(Layer { material: "SiN".into(), n: self.n_l, d_m: self.lambda_m / (4.0 * self.n_l), phi: self.phi_l });
        }
        CoatingStack { layers, n_sub: self.n_sub, lambda_m: self.lambda_m }
    }
}

/// Power (R, T) at normal incidence from air.
pub fn stack_transmission(s: &CoatingStack, lambda_m: f64) -> (f64, f64) {
    let i = Complex64::i();
    // [[m00, m01], [m10, m11]]
    let mut m = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    for l in &s.layers {
        let d = 2.0 * PI * l.n * l.d_m / lambda_m;
        let (sn, cs) = d.sin_cos();
        let a = [Complex64::new(cs, 0.0), i * (sn / l.n), i * (sn * l.n), Complex64::new(cs, 0.0)];
        m = [
            m[0] * a[0] + m[1] * a[2],
            m[0] * a[1] + m[1] * a[3],
            m[2] * a[0] + m[3] * a[2],
            m[2] * a[1] + m[3] * a[3],
        ];
    }
    let b = m[0] + m[1] * s.n_sub;
    let cc = m[2] + m[3] * s.n_sub;
    let den = b + cc;
    let r = (b - cc) / den;
    (r.norm_sqr(), 4.0 * s.n_sub / den.norm_sqr())
}

/// (total thickness, thickness-weighted loss angle).
pub fn brownian_proxy(s: &CoatingStack) -> Result<(f64, f64)> {
    if s.layers.is_empty() {
        return Err(Error::InvalidParam("empty coating stack".into()));
    }
    let d: f64 = s.layers.iter().map(|l| l.d_m).sum();
    let dp: f64 = s.layers.iter().map(|l| l.d_m * l.phi).sum();
    Ok((d, dp / d))
}

/// d_eff·φ_eff = Σ d_j φ_j.
pub fn objective(s: &CoatingStack) -> f64 {
    s.layers.iter().map(|l| l.d_m * l.phi).sum()
}

#[derive(Debug, Clone)]
pub struct StackOptimum {
    pub stack: CoatingStack,
    pub objective: f64,
    pub transmission: f64,
    /// best objective after each accepted move
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct StackSearch {
    pub t_max: f64,
    pub seed: u64,
    pub restarts: usize,
    /// thickness bounds in quarter-wave units
    pub q_min: f64,
    pub q_max: f64,
}

impl Default for StackSearch {
    fn default() -> Self {
        Self { t_max: 5e-6, seed: 1, restarts: 8, q_min: 0.05, q_max: 2.0 }
    }
}

fn with_q(base: &CoatingStack, q: &[f64]) -> CoatingStack {
    let mut s = base.clone();
    for (l, &x) in s.layers.iter_mut().zip(q) {
        l.d_m = x * base.lambda_m / (4.0 * l.n);
    }
    s
}

fn descend(base: &CoatingStack, q: &mut [f64], cfg: &StackSearch, best: &mut f64, history: &mut Vec<f64>) {
    let feasible = |q: &[f64]| stack_transmission(&with_q(base, q), base.lambda_m).1 <= cfg.t_max;
    let mut step = 0.05;
    while step > 1e-7 {
        let mut improved = false;
        for j in 0..q.len() {
            for dir in [-1.0, 1.0] {
                let old = q[j];
                let trial = (old + dir * step).clamp(cfg.q_min, cfg.q_max);
                if trial == old {
                    continue;
                }
                q[j] = trial;
                let obj = objective(&with_q(base, q));
                if obj < *best && feasible(q) {
                    *best = obj;
                    history.push(obj);
                    improved = true;
                    break;
                }
                q[j] = old;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
}

/// Minimise Σ d φ subject to T ≤ t_max, starting from a feasible stack.
/// Coordinate descent with seeded restarts around the incumbent.
pub fn optimize_stack(start: &CoatingStack, cfg: &StackSearch) -> Result<StackOptimum> {
    let t0 = stack_transmission(start, start.lambda_m).1;
    if t0 > cfg.t_max {
        return Err(Error::Infeasible(format!("starting stack transmits {t0:.3e} > {:.3e}", cfg.t_max)));
    }
    let q0: Vec<f64> = start.layers.iter().map(|l| 4.0 * l.n * l.d_m / start.lambda_m).collect();
    let mut q = q0.clone();
    let mut best = objective(start);
    let mut history = vec![best];
    descend(start, &mut q, cfg, &mut best, &mut history);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        let mut trial: Vec<f64> = q.iter().map(|&x| (x * (1.0 + rng.gen_range(-0.05..0.05))).clamp(cfg.q_min, cfg.q_max)).collect();
        if stack_transmission(&with_q(start, &trial), start.lambda_m).1 > cfg.t_max {
            continue;
        }
        let mut local = objective(&with_q(start, &trial));
        let mut local_hist = Vec::new();
        descend(start, &mut trial, cfg, &mut local, &mut local_hist);
        if local < best {
            best = local;
            q = trial;
            history.push(best);
        }
    }
    let stack = with_q(start, &q);
    let transmission = stack_transmission(&stack, stack.lambda_m).1;
    Ok(StackOptimum { objective: objective(&stack), stack, transmission, history })
}
