use eitforce::dynamics::linear::{discretize, CMatrix};
use eitforce::dynamics::*;
use eitforce::params::HBAR;
use eitforce::{
    fluctuation_transfer, noise_psd_output, output_mean_field, steady_cavity_field, Complex, Error, SystemParams,
};

/// Moderately stiff set for transient and convergence checks.
fn toy() -> SystemParams {
    let mut p = SystemParams::reference();
    p.n_atoms = 1000;
    p.g = Complex::new(3e4, 1e4);
    p.gamma = 2e6;
    p.gamma_o = 5e4;
    p.zeta = 1e6;
    p.omega_rabi = Complex::new(8e5, -3e5);
    p.a_in = Complex::new(2e3, 5e2);
    p.force = 3e4 * p.mass / (p.k_wavevector * p.t_m);
    p
}

/// Exact solution of the linear weak-probe system at time t from the
/// ground state, via the exponential of the augmented matrix [[M, b], [0, 0]].
fn exact_state(p: &SystemParams, t: f64) -> [Complex<f64>; 3] {
    let m = drift_matrix(p);
    let mut aug = CMatrix::zeros(4, 4);
    for r in 0..3 {
        for c in 0..3 {
            aug[(r, c)] = m[(r, c)];
        }
    }
    aug[(0, 3)] = p.a_in * p.zeta.sqrt();
    let d = discretize(&aug, &CMatrix::zeros(4, 1), t).unwrap();
    [d.phi[(0, 3)], d.phi[(1, 3)], d.phi[(2, 3)]]
}

#[test]
fn undriven_ground_state_stays_dark() {
    let p = SystemParams { a_in: Complex::new(0.0, 0.0), ..SystemParams::reference() };
    let settings = IntegrationSettings::new(1e-10, 1e-6, 50);
    let tr = integrate_weak_probe(&p, &settings).unwrap();
    for s in &tr.samples {
        assert_eq!(s.optical_norm(), 0.0);
        assert!((s.p_mom - p.force * s.t).abs() <= 1e-12 * (p.force * s.t).abs());
    }
}

#[test]
fn reference_steady_state_matches_closed_form() {
    let p = SystemParams::reference();
    let settings = IntegrationSettings::steady_state(&p).unwrap();
    let tr = integrate_weak_probe(&p, &settings).unwrap();
    let c = tr.last().c;
    let expected = steady_cavity_field(&p).unwrap();
    assert!(((c - expected) / expected).norm() < 1e-6);
    // Around 2 × 10^8 intracavity photons against 10^8 atoms: the reference
    // point leaves the weak-probe bound |s_bc| ≤ N.
    assert!(tr.coherence_bound_exceeded);
}

#[test]
fn short_horizon_misses_the_dark_state_polariton() {
    let p = SystemParams::reference();
    let slow = slowest_rate(&p);
    assert!((slow - 2.0 * p.gamma_o).abs() < 0.01 * p.gamma_o);
    let horizon = 50.0 / p.zeta.min(p.gamma);
    let dt = 2.0 / spectral_radius(&p);
    let tr = integrate_weak_probe(&p, &IntegrationSettings::new(dt, horizon, 1)).unwrap();
    let expected = steady_cavity_field(&p).unwrap();
    assert!(((tr.last().c - expected) / expected).norm() > 0.5);
}

#[test]
fn rk4_converges_at_fourth_order() {
    let p = toy();
    let t = 3e-6;
    let exact = exact_state(&p, t);
    let err = |dt: f64| {
        let tr = integrate_weak_probe(&p, &IntegrationSettings::new(dt, t, 1)).unwrap();
        let s = tr.last();
        assert!((s.t - t).abs() < 1e-18);
        let got = [s.c, s.s_ba, s.s_bc];
        let scale: f64 = exact.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        got.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / scale
    };
    let coarse = 0.4 / spectral_radius(&p);
    let steps = (t / coarse).ceil();
    let dt = t / steps;
    let (e1, e2, e3) = (err(dt), err(dt / 2.0), err(dt / 4.0));
    let (r1, r2) = (e1 / e2, e2 / e3);
    assert!(e3 > 1e-14, "{e3}");
    assert!((12.0..20.0).contains(&r1) && (12.0..20.0).contains(&r2), "{r1} {r2}");
}

#[test]
fn fixed_point_is_step_independent() {
    let p = toy();
    let mut last: Option<Complex<f64>> = None;
    for radius in [0.5, 1.0, 2.0] {
        let mut settings = IntegrationSettings::steady_state(&p).unwrap();
        settings.dt = radius / spectral_radius(&p);
        let c = integrate_weak_probe(&p, &settings).unwrap().last().c;
        let expected = steady_cavity_field(&p).unwrap();
        assert!(((c - expected) / expected).norm() < 1e-10);
        if let Some(prev) = last {
            assert!(((c - prev) / expected).norm() < 1e-10);
        }
        last = Some(c);
    }
}

#[test]
fn matched_point_without_force_reflects_almost_nothing() {
    let mut p = SystemParams::reference();
    p.force = 0.0;
    let settings = IntegrationSettings::steady_state(&p).unwrap();
    let c = integrate_weak_probe(&p, &settings).unwrap().last().c;
    let out = p.a_in - c * p.zeta.sqrt();
    let expected = output_mean_field(&p).unwrap();
    assert!((out - expected).norm() < 1e-6 * p.a_in.norm());
    // Only the O(γγ_o/|Ω|^2) leakage of the transparency window survives.
    let leakage = p.gamma * p.gamma_o / p.rabi_sq();
    assert!(out.norm() < 2.0 * leakage * p.a_in.norm());
}

#[test]
fn weak_probe_momentum_ignores_the_light() {
    let p = toy();
    let dark = SystemParams { a_in: Complex::new(0.0, 0.0), ..p };
    let bright = SystemParams { a_in: p.a_in * 1e3, ..p };
    let settings = IntegrationSettings::new(1e-9, 2e-5, 100);
    let a = integrate_weak_probe(&dark, &settings).unwrap();
    let b = integrate_weak_probe(&bright, &settings).unwrap();
    let steps = (settings.t_end / settings.dt).ceil();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.p_mom.to_bits(), y.p_mom.to_bits());
        let exact = p.force * x.t;
        assert!((x.p_mom - exact).abs() <= steps * f64::EPSILON * exact.abs());
    }
}

#[test]
fn uncoupled_full_model_has_free_momentum() {
    let p = SystemParams { g: Complex::new(0.0, 0.0), ..toy() };
    let settings = IntegrationSettings::new(1e-9, 1e-5, 20);
    let weak = integrate_weak_probe(&p, &settings).unwrap();
    let full = integrate_full_semiclassical(&p, &settings, &FullModelOptions::default()).unwrap();
    for (x, y) in weak.samples.iter().zip(&full.samples) {
        assert_eq!(x.p_mom, y.p_mom);
    }
}

#[test]
fn radiation_pressure_pushes_only_the_full_model() {
    let p = SystemParams { force: 0.0, ..toy() };
    let settings = IntegrationSettings::new(1e-9, 2e-5, 1);
    let weak = integrate_weak_probe(&p, &settings).unwrap();
    let full = integrate_full_semiclassical(&p, &settings, &FullModelOptions::default()).unwrap();
    assert_eq!(weak.last().p_mom, 0.0);
    let dp = full.last().p_mom;
    assert!(dp.abs() > 0.0 && dp.is_finite());
    // The kick is linear in ħ while the Doppler feedback stays negligible.
    let doubled = FullModelOptions { hbar: 2.0 * HBAR, include_recoil: false };
    let dp2 = integrate_full_semiclassical(&p, &settings, &doubled).unwrap().last().p_mom;
    assert!((dp2 / dp - 2.0).abs() < 1e-2, "{}", dp2 / dp);
}

#[test]
fn classical_limit_removes_back_action() {
    let p = toy();
    let settings = IntegrationSettings::new(1e-9, 1e-5, 1);
    let weak = integrate_weak_probe(&p, &settings).unwrap().last().p_mom;
    let mut prev = f64::INFINITY;
    for scale in [1.0, 1e-3, 1e-6, 0.0] {
        let options = FullModelOptions { hbar: HBAR * scale, include_recoil: false };
        let full = integrate_full_semiclassical(&p, &settings, &options).unwrap().last().p_mom;
        let rel = ((full - weak) / weak).abs();
        assert!(rel < prev || rel == 0.0, "{scale}: {rel}");
        prev = rel;
    }
    assert_eq!(prev, 0.0);
}

#[test]
fn recoil_shift_moves_the_two_photon_resonance() {
    let p = SystemParams { force: 0.0, ..toy() };
    let settings = IntegrationSettings::new(1e-9, 5e-6, 1);
    let plain = integrate_full_semiclassical(&p, &settings, &FullModelOptions::default()).unwrap();
    let recoil = FullModelOptions { include_recoil: true, ..Default::default() };
    let shifted = integrate_full_semiclassical(&p, &settings, &recoil).unwrap();
    assert_ne!(plain.last().s_bc, shifted.last().s_bc);
}

#[test]
fn oversized_step_is_rejected() {
    let p = SystemParams::reference();
    let dt = 3.0 / spectral_radius(&p);
    for result in [
        integrate_weak_probe(&p, &IntegrationSettings::new(dt, 1e-6, 1)),
        integrate_full_semiclassical(&p, &IntegrationSettings::new(dt, 1e-6, 1), &FullModelOptions::default()),
    ] {
        assert!(matches!(result, Err(Error::UnstableStep(_))));
    }
    assert!(check_step(&p, 2.4 / spectral_radius(&p)).is_ok());
}

#[test]
fn invalid_settings_are_rejected() {
    let p = toy();
    for (dt, t_end) in [(0.0, 1e-6), (-1e-9, 1e-6), (1e-9, f64::NAN)] {
        let err = integrate_weak_probe(&p, &IntegrationSettings { dt, t_end, sample_every: 1 }).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }), "{err:?}");
    }
}

#[test]
fn csv_dump_has_one_row_per_sample() {
    let p = toy();
    let tr = integrate_weak_probe(&p, &IntegrationSettings::new(1e-9, 1e-6, 10)).unwrap();
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,re_c,im_c,re_s_ba,im_s_ba,re_s_bc,im_s_bc,p_mom");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), tr.samples.len());
    let last: Vec<f64> = rows.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], tr.last().t);
    assert_eq!(last[1], tr.last().c.re);
    assert_eq!(last[7], tr.last().p_mom);
}

#[test]
fn single_precision_integration_tracks_double() {
    let p = toy();
    let settings = IntegrationSettings::steady_state(&p).unwrap();
    let wide = integrate_weak_probe(&p, &settings).unwrap().last().c;
    let q = p.to_f32();
    let narrow_settings = IntegrationSettings::<f32> {
        dt: settings.dt as f32,
        t_end: settings.t_end as f32,
        sample_every: settings.sample_every,
    };
    let narrow = integrate_weak_probe(&q, &narrow_settings).unwrap().last().c;
    let narrow = Complex::new(narrow.re as f64, narrow.im as f64);
    assert!(((narrow - wide) / wide).norm() < 1e-3);
}

// ---- fluctuation ensemble ----

#[test]
fn uncoupled_cavity_reflects_vacuum() {
    let p = SystemParams { g: Complex::new(0.0, 0.0), ..toy() };
    let est = simulate_fluctuations(&p, &McSettings::new(&p, p.zeta, 8, 2000, 11)).unwrap();
    for (psd, err) in est.psd.iter().zip(&est.stderr) {
        assert!((psd - 1.0).abs() < 3.0 * err, "{psd} ± {err}");
    }
}

#[test]
fn ensemble_matches_the_shot_noise_floor_at_the_reference_point() {
    let p = SystemParams::reference();
    let est = simulate_fluctuations(&p, &McSettings::new(&p, p.zeta, 8, 2000, 3)).unwrap();
    for ((w, psd), err) in est.omega_grid.iter().zip(&est.psd).zip(&est.stderr) {
        let expected = noise_psd_output(&p, *w).unwrap();
        assert!((psd - expected).abs() < 3.0 * err, "ω={w}: {psd} ± {err} vs {expected}");
    }
}

#[test]
fn input_noise_alone_follows_the_reflection_transfer() {
    let p = toy().with_matched_drive();
    let mut settings = McSettings::new(&p, 4.0 * p.zeta, 12, 2000, 5);
    settings.atomic_noise = false;
    let est = simulate_fluctuations(&p, &settings).unwrap();
    for ((w, psd), err) in est.omega_grid.iter().zip(&est.psd).zip(&est.stderr) {
        let expected = fluctuation_transfer(&p, *w).unwrap().0.value.norm_sqr();
        assert!((psd - expected).abs() < 3.0 * err, "ω={w}: {psd} ± {err} vs {expected}");
    }
    // The matched cavity swallows most of the input noise near ω = 0.
    let floor = fluctuation_transfer(&p, 0.0).unwrap().0.value.norm_sqr();
    assert!(floor < 0.3 && est.psd[0] < 0.5 * est.psd.last().unwrap(), "{floor} {:?}", est.psd);
}

#[test]
fn ensemble_is_deterministic_per_seed() {
    let p = toy();
    let settings = McSettings::new(&p, p.zeta, 4, 200, 42);
    let a = simulate_fluctuations(&p, &settings).unwrap();
    let b = simulate_fluctuations(&p, &settings).unwrap();
    assert_eq!(a, b);
    let c = simulate_fluctuations(&p, &McSettings { seed: 43, ..settings }).unwrap();
    assert_ne!(a.psd, c.psd);
}

#[test]
fn stderr_shrinks_with_the_square_root_of_the_ensemble() {
    let p = toy();
    let small = simulate_fluctuations(&p, &McSettings::new(&p, p.zeta, 16, 1000, 9)).unwrap();
    let large = simulate_fluctuations(&p, &McSettings::new(&p, p.zeta, 16, 2000, 9)).unwrap();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ratio = mean(&small.stderr) / mean(&large.stderr);
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn small_ensembles_are_refused() {
    let p = toy();
    let err = simulate_fluctuations(&p, &McSettings::new(&p, p.zeta, 4, 99, 1)).unwrap_err();
    assert!(matches!(err, Error::InsufficientEnsemble(_)));
}

#[test]
fn euler_maruyama_is_refused_when_unstable_and_agrees_when_resolved() {
    let p = SystemParams::reference();
    let settings = McSettings { scheme: SdeScheme::EulerMaruyama, ..McSettings::new(&p, p.zeta, 4, 200, 1) };
    assert!(matches!(simulate_fluctuations(&p, &settings), Err(Error::UnstableStep(_))));

    let q = toy();
    let mut fine = McSettings::new(&q, 100.0 * q.zeta, 6, 1000, 2);
    fine.scheme = SdeScheme::EulerMaruyama;
    let est = simulate_fluctuations(&q, &fine).unwrap();
    for (psd, err) in est.psd.iter().zip(&est.stderr) {
        assert!((psd - 1.0).abs() < 3.0 * err + 0.02, "{psd} ± {err}");
    }
}

#[test]
fn grid_is_bin_aligned_and_increasing() {
    let record = 1e-3;
    let grid = bin_aligned_grid(record, 1e6, 16);
    assert_eq!(grid.len(), 16);
    assert_eq!(grid[0], 0.0);
    let unit = 2.0 * std::f64::consts::PI / record;
    for w in grid.windows(2) {
        assert!(w[1] > w[0]);
    }
    for w in &grid {
        let k = w / unit;
        assert!((k - k.round()).abs() < 1e-9);
    }
    assert!(*grid.last().unwrap() <= 1e6);
}
