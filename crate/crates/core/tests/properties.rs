use num_complex::Complex64;
use proptest::prelude::*;
use qnamp::amplifier::{self, gain_magnitude, mz_backward, ring_io, IoModel, PumpParams, RingCavityParams};
use qnamp::coating::{stack_transmission, CoatingStack, Layer};
use qnamp::consts::TWO_PI;
use qnamp::filter_cavity::{loss_coupling, quadrature_reflection, FilterCavityParams};
use qnamp::interferometer::caves_toy;
use qnamp::technical::{backscatter_noise, scatter_loss, BackscatterParams, ScatterModel};
use qnamp::twophoton::{compose, homodyne, phase, rotation, squeeze, NoisePath, PathSet};
use qnamp::{FrequencyGrid, Mat2, QuadratureTransfer, Source, Vec2};

fn cplx() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn mat() -> impl Strategy<Value = Mat2> {
    (cplx(), cplx(), cplx(), cplx()).prop_map(|(a, b, c, d)| Mat2::new(a, b, c, d))
}

fn ring(t_a: f64, mass: f64) -> RingCavityParams {
    RingCavityParams::equilateral(t_a, 30.0, mass, 0.0)
}

fn pump(p: f64) -> PumpParams {
    PumpParams { p_source_w: p, lambda_m: 2e-6 }
}

fn fc() -> impl Strategy<Value = FilterCavityParams> {
    (1.0..1000.0f64, 1e-6..0.05f64, 0.0..1e-4f64, -300.0..300.0f64)
        .prop_map(|(l, t, loss, det)| FilterCavityParams { length_m: l, t_in: t, roundtrip_loss: loss, detuning_hz: det })
}

/// Vacuum normalisation: Σ input_psd · T T† for unit-PSD paths.
fn covariance(set: &PathSet) -> Mat2 {
    set.paths.iter().fold(Mat2::zeros(), |acc, p| acc + p.transfer * p.transfer.adjoint() * Complex64::new(p.input_psd, 0.0))
}

proptest! {
    #[test]
    fn composition_is_associative(a in mat(), b in mat(), c in mat()) {
        let g = FrequencyGrid::new(vec![10.0, 20.0]).unwrap();
        let t = |m: Mat2| QuadratureTransfer::constant("m", &g, m).unwrap();
        let l = compose(&compose(&t(a), &t(b)).unwrap(), &t(c)).unwrap();
        let r = compose(&t(a), &compose(&t(b), &t(c)).unwrap()).unwrap();
        for (x, y) in l.mats.iter().zip(&r.mats) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn rotations_and_squeezers_are_symplectic(th in -7.0..7.0f64, db in 0.0..25.0f64) {
        let r = rotation(th);
        prop_assert!((r.adjoint() * r - Mat2::identity()).norm() < 1e-12);
        prop_assert!((squeeze(db, th).determinant() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn lossless_ring_has_unit_determinant(t_a in 1e-3..0.05f64, mass in 1e-3..1.0f64, p in 1.0..500.0f64, f in 5.0..1e4f64) {
        let r = ring(t_a, mass);
        let w = TWO_PI * f;
        let pc = amplifier::circulating_power_exact(&r, &pump(p));
        let k = amplifier::kappa_a(&r, &pump(p), pc, w).unwrap();
        for io in [IoModel::Exact, IoModel::Approx] {
            prop_assert!((ring_io(&r, k, w, io).m.determinant().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn backward_pass_undoes_phase_with_no_pump(t_a in 1e-3..0.05f64, f in 5.0..1e4f64) {
        let r = ring(t_a, 0.03);
        let w = TWO_PI * f;
        let fwd = ring_io(&r, 0.0, w, IoModel::Exact);
        let round = fwd.m * mz_backward(&r, w);
        prop_assert!((round - Mat2::identity() * phase(4.0 * fwd.eta)).norm() < 1e-12);
    }

    #[test]
    fn gain_monotone(t_a in 2e-3..0.03f64, mass in 3e-3..0.3f64, p in 10.0..500.0f64, f in 20.0..3000.0f64) {
        let base = gain_magnitude(&ring(t_a, mass), &pump(p), f);
        prop_assert!(gain_magnitude(&ring(t_a, mass * 1.1), &pump(p), f) < base);
        prop_assert!(gain_magnitude(&ring(t_a * 1.1, mass), &pump(p), f) < base);
        prop_assert!(gain_magnitude(&ring(t_a, mass), &pump(p * 1.1), f) > base);
        prop_assert!(gain_magnitude(&ring(t_a, mass), &pump(p), f * 1.1) < base);
    }

    #[test]
    fn filter_cavity_conserves_vacuum(p in fc(), f in 1.0..1e4f64) {
        let m = quadrature_reflection(&p, TWO_PI * f);
        let n = loss_coupling(&m);
        prop_assert!((m * m.adjoint() + n * n.adjoint() - Mat2::identity()).norm() < 1e-9);
        let mut lossless = p.clone();
        lossless.roundtrip_loss = 0.0;
        let u = quadrature_reflection(&lossless, TWO_PI * f);
        prop_assert!((u.adjoint() * u - Mat2::identity()).norm() < 1e-10);
    }

    #[test]
    fn loss_channel_keeps_vacuum_normalised(th in -3.0..3.0f64, eps in 0.0..0.99f64, eps2 in 0.0..0.99f64) {
        let mut s = PathSet::new(Vec2::zeros());
        s.push(NoisePath::vacuum(Source::Quantum, rotation(th)));
        s.loss_channel(eps, Source::RingLoss).unwrap();
        s.loss_channel(eps2, Source::ReadoutLoss).unwrap();
        prop_assert!((covariance(&s) - Mat2::identity()).norm() < 1e-12);
    }

    #[test]
    fn readout_blind_to_global_phase(a in mat(), sig in cplx(), psi in -4.0..4.0f64, z in -2.0..2.0f64) {
        let mut s = PathSet::new(Vec2::new(sig, Complex64::new(0.3, 0.0)));
        s.push(NoisePath::vacuum(Source::Quantum, a));
        let (n0, g0) = homodyne(z, &s);
        s.apply(&(Mat2::identity() * phase(psi)));
        let (n1, g1) = homodyne(z, &s);
        prop_assert!((n0 - n1).abs() <= 1e-12 * n0.max(1.0));
        prop_assert!((g0.norm() - g1.norm()).abs() < 1e-12);
    }

    #[test]
    fn caves_toy_gain_suppresses_detection_loss(r in 0.0..2.0f64, eps in 0.01..0.5f64, g in 1.0..100.0f64) {
        let (off, on) = caves_toy(r, eps, g).unwrap();
        prop_assert!(on <= off + 1e-15);
        let (_, more) = caves_toy(r, eps, g * 2.0).unwrap();
        prop_assert!(more <= on + 1e-15);
    }

    #[test]
    fn scatter_monotone(w in 1.0..20.0f64, lam in 500.0..3000.0f64, a in 1e-3..0.1f64) {
        let m = ScatterModel { a_nm2_mm: a, w_mm: w, lambda_nm: lam, ..Default::default() };
        let base = scatter_loss(&m).unwrap();
        let more_a = scatter_loss(&ScatterModel { a_nm2_mm: a * 1.2, ..m.clone() }).unwrap();
        let more_w = scatter_loss(&ScatterModel { w_mm: w * 1.2, ..m.clone() }).unwrap();
        let more_l = scatter_loss(&ScatterModel { lambda_nm: lam * 1.2, ..m.clone() }).unwrap();
        prop_assert!(more_a > base && more_w > base && more_l < base);
    }

    #[test]
    fn backscatter_power_law(eps in 1e-9..1e-3f64, p in 1.0..1000.0f64, rin in 1e-10..1e-6f64) {
        let b = BackscatterParams { eps_bs: eps, p_source_w: p, lambda_m: 2e-6 };
        let n = backscatter_noise(&b, rin).unwrap();
        let n4 = backscatter_noise(&BackscatterParams { eps_bs: eps * 4.0, ..b.clone() }, rin).unwrap();
        let n3 = backscatter_noise(&b, 3.0 * rin).unwrap();
        prop_assert!((n4 / n - 2.0).abs() < 1e-12 && (n3 / n - 3.0).abs() < 1e-12);
        prop_assert_eq!(backscatter_noise(&b, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn stack_energy_balance_and_full_wave(ds in proptest::collection::vec((1.3..3.8f64, 10e-9..800e-9f64), 1..30), lam in 1.0e-6..3.0e-6f64) {
        let layers: Vec<Layer> = ds.iter().map(|(n, d)| Layer { material: "x".into(), n: *n, d_m: *d, phi: 1e-5 }).collect();
        let s = CoatingStack { layers, n_sub: 3.48, lambda_m: lam };
        let (r, t) = stack_transmission(&s, lam);
        prop_assert!((r + t - 1.0).abs() < 1e-12);
        // adding a half-wave layer anywhere leaves R unchanged
        let mut s2 = s.clone();
        s2.layers.insert(0, Layer { material: "x".into(), n: 2.0, d_m: lam / 4.0, phi: 0.0 });
        let (r2, _) = stack_transmission(&s2, lam);
        prop_assert!((r2 - r).abs() < 1e-10);
    }
}
