//! Acceptance gate. One PASS/FAIL line per criterion; exits non-zero if
//! any criterion fails.

use qnamp::amplifier::{self, IoModel, PumpParams, RingCavityParams};
use qnamp::chain::{self, AmplifierModel, ChainConfig, IfoModel};
use qnamp::coating::{objective, optimize_stack, stack_transmission, StackSearch};
use qnamp::consts::{K_B, TWO_PI};
use qnamp::filter_cavity::quadrature_reflection;
use qnamp::interferometer::caves_toy;
use qnamp::optimize::{all_free, mass_sweep, NmOptions};
use qnamp::output::write_budget;
use qnamp::technical::{self, BackscatterParams, ScatterModel};
use qnamp::twophoton::{homodyne, rotation, squeeze, FrequencyGrid, Mat2};
use qnamp::{budget, preset, Source};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Toy chain: transparent interferometer, flat gain, detection loss only.
fn toy(r: f64, eps: f64, gain: f64, amp_on: bool) -> ChainConfig {
    let mut c = preset("15dB").unwrap();
    c.ifo_model = IfoModel::Transparent;
    c.ifo.arm_loss = 0.0;
    c.ifo.src_loss = 0.0;
    c.ifo.readout_loss = eps;
    c.sqz.db = 20.0 * r / 10f64.ln();
    c.sqz.injection_loss = 0.0;
    c.sqz.ifcs.clear();
    c.amp.model = AmplifierModel::Flat { gain };
    c.ofc = None;
    c.zeta0 = 0.0;
    c.amp_on = amp_on;
    c
}

fn caves() -> Check {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for r in [0.0, 0.5, 1.7269388197455342] {
        for eps in [0.0, 0.05, 0.3] {
            for g in [1.0, 3.0, 30.0] {
                let (s_off, s_on) = caves_toy(r, eps, g).unwrap();
                for (amp, want) in [(false, s_off), (true, s_on)] {
                    let c = toy(r, eps, g, amp);
                    let prep = chain::prepare(&c).unwrap();
                    let (set, z) = chain::assemble_point(&c, &prep, 100.0).unwrap();
                    let (n, sig) = homodyne(z, &set);
                    worst = worst.max(rel(n / sig.norm_sqr(), want));
                }
            }
        }
    }
    let dt = t.elapsed().as_secs_f64();
    ensure(worst < 1e-10 && dt < 1.0, format!("max rel err {worst:.2e} over 27 points x 2, {dt:.3} s"))
}

fn reference_ring() -> (RingCavityParams, PumpParams) {
    let c = preset("15dB").unwrap();
    let mut ring = c.amp.ring.clone();
    ring.t_a = 0.01;
    (ring, PumpParams { p_source_w: 200.0, ..c.amp.pump.clone() })
}

fn unity_gain() -> Check {
    let t = Instant::now();
    let (ring, pump) = reference_ring();
    let g1 = amplifier::gain_magnitude(&ring, &pump, 1500.0);
    let g2 = amplifier::gain_magnitude(&ring, &pump, 150.0);
    let pc = amplifier::circulating_power_exact(&ring, &pump);
    let k = amplifier::kappa_a(&ring, &pump, pc, TWO_PI * 1500.0).unwrap();
    let full = amplifier::ring_io_approx(&ring, k, TWO_PI * 1500.0).k_a.abs();
    let dt = t.elapsed().as_secs_f64();
    ensure(
        rel(g1, 1.0) < 0.03 && rel(g2, 100.0) < 0.03 && dt < 1.0,
        format!("|K_A|(1.5 kHz) = {g1:.4}, |K_A|(150 Hz) = {g2:.3} at T_A=1%, 200 W, 30 g (full ring model {full:.3})"),
    )
}

fn circulating_power() -> Check {
    let (ring, pump) = reference_ring();
    let e = amplifier::circulating_power_exact(&ring, &pump);
    let a = amplifier::circulating_power_approx(&ring, &pump);
    ensure(rel(e, 40e3) < 0.01 && rel(e, a) < 0.006, format!("P_circ = {e:.1} W, exact/approx deviation {:.3}%", 100.0 * rel(e, a)))
}

fn scatter() -> Check {
    let l = technical::scatter_loss(&ScatterModel::default()).unwrap();
    ensure(rel(l, 2.3e-6) < 0.05, format!("loss fraction {l:.4e}"))
}

fn backscatter() -> Check {
    let b = BackscatterParams { eps_bs: 1e-7, p_source_w: 200.0, lambda_m: 2e-6 };
    let n = technical::backscatter_noise(&b, 1e-9).unwrap();
    ensure(rel(n, 7e-3) < 0.1, format!("{n:.4e} quanta/rtHz per quadrature"))
}

fn exact_vs_approx() -> Check {
    let c = preset("15dB").unwrap();
    let (ring, pump) = (&c.amp.ring, &c.amp.pump);
    let pc = amplifier::circulating_power_exact(ring, pump);
    let (mut dk, mut deta): (f64, f64) = (0.0, 0.0);
    for &f in FrequencyGrid::log(10.0, 1000.0, 400).unwrap().points() {
        let w = TWO_PI * f;
        let k = amplifier::kappa_a(ring, pump, pc, w).unwrap();
        let e = amplifier::ring_io_exact(ring, k, w);
        let a = amplifier::ring_io_approx(ring, k, w);
        dk = dk.max(rel(e.k_a, a.k_a));
        deta = deta.max((e.eta - a.eta).abs().to_degrees());
    }
    ensure(dk < 0.01 && deta < 0.5, format!("max K_A deviation {:.3}%, max eta deviation {deta:.2e} deg", 100.0 * dk))
}

fn unitarity() -> Check {
    let c = preset("15dB").unwrap();
    let grid = FrequencyGrid::log(5.0, 1e4, 1000).unwrap();
    let mut ring = c.amp.ring.clone();
    ring.roundtrip_loss = 0.0;
    let pc = amplifier::circulating_power_exact(&ring, &c.amp.pump);
    let mut fcs: Vec<_> = c.sqz.ifcs.clone();
    fcs.extend(c.ofc.clone());
    let fcs: Vec<_> = fcs.into_iter().map(|mut f| {
        f.roundtrip_loss = 0.0;
        f
    }).collect();
    let id = Mat2::identity();
    let mut worst: f64 = 0.0;
    for (i, &f) in grid.points().iter().enumerate() {
        let w = TWO_PI * f;
        let k = amplifier::kappa_a(&ring, &c.amp.pump, pc, w).unwrap();
        for io in [IoModel::Exact, IoModel::Approx] {
            let m = amplifier::ring_io(&ring, k, w, io).m;
            worst = worst.max((m.determinant().norm() - 1.0).abs());
        }
        let b = amplifier::mz_backward(&ring, w);
        worst = worst.max((b.adjoint() * b - id).norm());
        let th = 0.001 * i as f64;
        let r = rotation(th);
        worst = worst.max((r.adjoint() * r - id).norm());
        worst = worst.max((squeeze(15.0, th).determinant().norm() - 1.0).abs());
        for fc in &fcs {
            let m = quadrature_reflection(fc, w);
            worst = worst.max((m.adjoint() * m - id).norm());
        }
    }
    ensure(worst < 1e-10, format!("worst deviation {worst:.2e} over 1000 points (ring, backward, rotation, squeeze, {} filter cavities)", fcs.len()))
}

fn fdt() -> Check {
    let c = preset("15dB").unwrap();
    let s = &c.amp.sus;
    let m = c.amp.ring.mass_kg;
    let w0 = TWO_PI * s.f0_pend();
    let mut worst: f64 = 0.0;
    for &f in c.grid.points() {
        let w = TWO_PI * f;
        let phi = s.loss_angle(m, w);
        // admittance of a lossy pendulum, x/F = 1/(m(ω0²(1+iφ) − ω²))
        let h = num_complex::Complex64::new(1.0, 0.0) / num_complex::Complex64::new(m * (w0 * w0 - w * w), m * w0 * w0 * phi);
        let want = 4.0 * K_B * s.temperature_k * h.im.abs() / w;
        let got = technical::suspension_thermal(s, m, f).unwrap().powi(2);
        worst = worst.max(rel(got, want));
    }
    ensure(worst < 1e-10, format!("max rel err {worst:.2e} over {} points", c.grid.len()))
}

fn coating() -> Check {
    let c = preset("15dB").unwrap();
    let qw = c.amp.coat.quarter_wave();
    let (r, t) = stack_transmission(&qw, qw.lambda_m);
    let opt = optimize_stack(&qw, &StackSearch::default()).map_err(|e| e.to_string())?;
    let (r2, t2) = stack_transmission(&opt.stack, qw.lambda_m);
    let cons = (r + t - 1.0).abs().max((r2 + t2 - 1.0).abs());
    ensure(
        t <= 5e-6 && t2 <= 5e-6 && opt.objective <= objective(&qw) && cons < 1e-12,
        format!(
            "quarter-wave T = {:.3} ppm, optimised T = {:.3} ppm, objective {:.4e} -> {:.4e}, |R+T-1| = {cons:.1e}",
            t * 1e6,
            t2 * 1e6,
            objective(&qw),
            opt.objective
        ),
    )
}

fn qualitative() -> Check {
    let t = Instant::now();
    let c = preset("15dB").unwrap();
    let band = FrequencyGrid::log(50.0, 500.0, 200).unwrap();
    let on = chain::budget_on(&c, band.points()).map_err(|e| e.to_string())?;
    let mut off_c = c.clone();
    off_c.amp_on = false;
    let off = chain::budget_on(&off_c, band.points()).map_err(|e| e.to_string())?;
    let worst = on.total.iter().zip(&off.total).map(|(a, b)| a / b).fold(0.0, f64::max);
    let amp_sources = [Source::RinResidual, Source::CoatingBrownian, Source::SuspensionThermal];
    let margin = on
        .sources
        .iter()
        .map(|row| row[Source::RingLoss.index()] / amp_sources.iter().map(|s| row[s.index()]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let sweep = mass_sweep(&c, &[0.003, 0.03, 0.3], &all_free(), &NmOptions::default()).map_err(|e| e.to_string())?;
    let imp: Vec<f64> = sweep.iter().map(|e| e.improvement).collect();
    let ordered = imp.windows(2).all(|w| w[0] > w[1]);
    let dt = t.elapsed().as_secs_f64();
    ensure(
        worst < 1.0 && margin > 1.0 && ordered && dt < 60.0,
        format!(
            "amp/no-amp worst ratio {worst:.3}; ring loss / next amp source >= {margin:.3}; mid-band ln-improvement 3g {:.3} > 30g {:.3} > 300g {:.3}; {dt:.1} s",
            imp[0], imp[1], imp[2]
        ),
    )
}

fn determinism() -> Check {
    let mut bufs = Vec::new();
    for _ in 0..2 {
        let c = preset("15dB").unwrap();
        let b = budget(&c).map_err(|e| e.to_string())?;
        let mut out = Vec::new();
        write_budget(&mut out, &b, "fixed").map_err(|e| e.to_string())?;
        let sweep = mass_sweep(&c, &[0.003, 0.03], &all_free(), &NmOptions { seed: 9, ..Default::default() }).map_err(|e| e.to_string())?;
        for e in &sweep {
            write_budget(&mut out, &e.budget, "fixed").map_err(|e| e.to_string())?;
        }
        bufs.push(out);
    }
    ensure(bufs[0] == bufs[1], format!("{} bytes per run, identical = {}", bufs[0].len(), bufs[0] == bufs[1]))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("caves oracle", caves),
        ("unity-gain frequency", unity_gain),
        ("circulating power", circulating_power),
        ("scatter loss", scatter),
        ("backscatter", backscatter),
        ("exact vs approximate ring", exact_vs_approx),
        ("unitarity", unitarity),
        ("fluctuation-dissipation", fdt),
        ("coating", coating),
        ("qualitative budget", qualitative),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
