use super::*;
use crate::response::susceptibility_a0;
use approx::assert_relative_eq;

fn reference() -> Params<f64> {
    Params::reference()
}

fn deviation(p: &Params<f64>, cfg: &ThermalConfig) -> Result<f64> {
    let avg = thermal_average(p, cfg, false)?;
    let rest = rest_frame_coherence(p, false)?;
    Ok((avg / rest - 1.0).norm())
}

#[test]
fn rest_frame_coherence_matches_cavity_susceptibility() {
    let p = reference();
    let sigma = doppler_susceptibility(&p, 0.0, 0.0).unwrap();
    let cavity = steady_cavity_field(&p).unwrap();
    let a0 = susceptibility_a0(&p).unwrap().value;
    let expected = a0 * cavity / (Complex::new(0.0, -1.0) * p.g.conj() * p.atoms());
    assert_relative_eq!(sigma.re, expected.re, max_relative = 1e-12);
    assert_relative_eq!(sigma.im, expected.im, max_relative = 1e-12);
}

#[test]
fn two_photon_resonance_survives_matched_velocities() {
    let mut p = reference();
    p.force = 0.0;
    let v_z = 3.0;
    let v_x = p.omega_ab * v_z / p.omega_ac;
    let sigma = doppler_susceptibility(&p, v_x, v_z).unwrap();
    let cavity = steady_cavity_field(&p).unwrap();
    let shifted = Complex::new(-p.gamma, p.omega_ab * v_z / p.c_light);
    let expected: Complex<f64> =
        Complex::<f64>::i() * p.g * cavity * (-p.gamma_o) / (shifted * (-p.gamma_o) + p.rabi_sq());
    assert_relative_eq!(sigma.re, expected.re, max_relative = 1e-6);
    assert_relative_eq!(sigma.im, expected.im, max_relative = 1e-6);
}

#[test]
fn moving_atom_coherence_matches_high_precision_oracle() {
    // tests/oracles/high_precision.py, 50-digit evaluation.
    let p = reference();
    let sigma = doppler_susceptibility(&p, 2.5, -1.5).unwrap();
    assert_relative_eq!(sigma.re, 0.266_931_236_854_918_54, max_relative = 1e-9);
    assert_relative_eq!(sigma.im, 0.132_360_708_833_648_61, max_relative = 1e-9);
}

#[test]
fn density_relation_matches_oracle_and_scales() {
    let p = reference();
    assert_relative_eq!(rabi_from_density(&p), 2.035_752_039_526_186e17, max_relative = 1e-14);
    let dense = Params { density: 2.0 * p.density, ..p };
    assert_relative_eq!(rabi_from_density(&dense), 2.0 * rabi_from_density(&p), max_relative = 1e-15);
}

#[test]
fn density_relation_is_the_matched_drive_for_dipole_coupling() {
    let mut p = reference();
    for volume in [1e-12, 3e-10, 1e-8] {
        p.n_atoms = (p.density * volume).round() as u64;
        let g_sq = dipole_coupling_sq(&p, p.atoms() / p.density);
        p.g = Complex::new(g_sq.sqrt(), 0.0);
        let optimum = crate::readout::optimal_rabi(&p).unwrap();
        assert_relative_eq!(rabi_from_density(&p), optimum, max_relative = 1e-12);
    }
}

#[test]
fn doppler_widths() {
    let p = reference();
    let cold = Params { temperature: 0.0, ..p };
    assert_eq!(doppler_width(p.omega_ab, &cold), 0.0);
    let ab = doppler_width(p.omega_ab, &p);
    assert_relative_eq!(ab, 1.890_967_811_675_642_6e8, max_relative = 1e-13);
    let cb = doppler_width(1e-6 * p.omega_ab, &p);
    assert_relative_eq!(cb, 1e-6 * ab, max_relative = 1e-15);
    let hot = Params { temperature: 4.0, ..p };
    assert_relative_eq!(doppler_width(p.omega_ab, &hot), 2.0 * ab, max_relative = 1e-15);
}

#[test]
fn condition_trivially_holds_at_zero_temperature() {
    let p = Params { temperature: 0.0, ..reference() };
    let report = linearization_condition(&p, &ThermalConfig::default());
    assert_eq!(report.first_order, 0.0);
    assert_eq!(report.second_order, 0.0);
    assert!(report.passes);
}

#[test]
fn one_kelvin_orthogonal_beams_violate_the_condition() {
    // Perpendicular beams: the two-photon Doppler shift is set by ω_ab, not
    // by ω_cb, so the second-order scale overtakes the first-order one.
    let cfg = ThermalConfig { condition_margin: 10.0, ..Default::default() };
    let r = linearization_condition(&reference(), &cfg);
    assert!(r.drive_over_first() > 10.0 && r.drive_over_first() < 100.0);
    assert!(r.first_over_second() < 1.0);
    assert!(!r.passes);
    assert!(!r.drive_dominates());
}

#[test]
fn one_kelvin_collinear_beams_keep_the_drive_dominant() {
    let cfg = ThermalConfig { condition_margin: 10.0, geometry: BeamGeometry::Collinear, ..Default::default() };
    let r = linearization_condition(&reference(), &cfg);
    assert!(r.drive_dominates());
    assert!(r.drive_over_first() > 1e5);
    // ω_ab v γ_o / c and ω_cb v γ / c are only ~4x above ω_ab ω_cb v^2 / c^2.
    assert!(!r.passes);
}

#[test]
fn heating_breaks_the_condition() {
    let cfg = ThermalConfig { geometry: BeamGeometry::Collinear, condition_margin: 10.0, ..Default::default() };
    let cold = Params { temperature: 1e-6, ..reference() };
    assert!(linearization_condition(&cold, &cfg).drive_dominates());
    let hot = Params { temperature: 1.0, ..cold };
    let r = linearization_condition(&hot, &cfg);
    let hotter = Params { temperature: 1e6, ..hot };
    let rr = linearization_condition(&hotter, &cfg);
    assert_relative_eq!(rr.second_order / r.second_order, 1e6, max_relative = 1e-9);
    assert!(!rr.drive_dominates());
}

#[test]
fn linearized_average_is_temperature_independent() {
    let p = reference();
    let rest = rest_frame_coherence(&p, true).unwrap();
    let cavity = steady_cavity_field(&p).unwrap();
    for geometry in [BeamGeometry::Orthogonal, BeamGeometry::Collinear] {
        let cfg = ThermalConfig { geometry, ..Default::default() };
        for t in [1e-6, 1e-2, 1.0, 300.0, 1e4] {
            let q = Params { temperature: t, ..p };
            let avg = thermal_average(&q, &cfg, true).unwrap();
            // Odd terms cancel pairwise; what is left is rounding on the
            // largest single-beam Doppler term of the integrand.
            let shift = p.omega_ab * 25.0 * thermal_speed(&q) / p.c_light;
            let largest = p.atoms() * (p.g * cavity).norm() * shift / p.rabi_sq();
            let tol = 1e-16 * largest + 1e-14 * rest.norm();
            assert!((avg - rest).norm() <= tol, "T={t} {geometry:?}");
        }
    }
}

#[test]
fn exact_average_converges_to_rest_value_when_cooled() {
    let p = reference();
    let cfg = ThermalConfig::default();
    let mut last = f64::INFINITY;
    for t in [1e-6, 1e-7, 1e-8, 1e-9, 1e-10] {
        let dev = deviation(&Params { temperature: t, ..p }, &cfg).unwrap();
        assert!(dev < last, "T={t}: {dev} !< {last}");
        last = dev;
    }
    assert!(last < 1e-5);
    let frozen = Params { temperature: 0.0, ..p };
    assert_eq!(deviation(&frozen, &cfg).unwrap(), 0.0);
}

#[test]
fn collinear_average_at_one_kelvin_is_negligible() {
    let cfg = ThermalConfig { geometry: BeamGeometry::Collinear, ..Default::default() };
    let dev = deviation(&reference(), &cfg).unwrap();
    assert!(dev < 1e-3, "{dev}");
}

#[test]
fn orthogonal_average_breaks_down_once_the_condition_fails() {
    let p = Params { temperature: 1e-4, ..reference() };
    let cfg = ThermalConfig::default();
    let r = linearization_condition(&p, &cfg);
    assert!(!r.passes);
    // |Ω|^2 still dominates both Doppler scales; the breakdown comes from
    // the second-order term γ⟨Δ₂^2⟩ competing with γ_o|Ω|^2 in the
    // numerator of the transparency window.
    assert!(r.drive_dominates());
    let dev = deviation(&p, &cfg).unwrap();
    assert!(dev > 0.1, "{dev}");
}

#[test]
fn orthogonal_average_at_one_kelvin_is_far_from_rest_value() {
    let p = reference();
    let rest = rest_frame_coherence(&p, false).unwrap();
    let avg = thermal_average_at_order(&p, BeamGeometry::Orthogonal, false, 256).unwrap();
    assert!((avg / rest - 1.0).norm() > 100.0);
}

#[test]
fn quadrature_error_shrinks_geometrically_for_smooth_integrands() {
    let p = Params { temperature: 0.1, ..reference() };
    let converged = thermal_average_at_order(&p, BeamGeometry::Orthogonal, false, 512).unwrap();
    let errs: Vec<f64> = [8, 16, 64]
        .iter()
        .map(|&n| {
            let a = thermal_average_at_order(&p, BeamGeometry::Orthogonal, false, n).unwrap();
            (a - converged).norm() / converged.norm()
        })
        .collect();
    assert!(errs[0] > 1e-9 && errs[1] < 1e-2 * errs[0] && errs[2] < 1e-11, "{errs:?}");
}

#[test]
fn config_validation() {
    assert!(ThermalConfig { quadrature_order: 4, ..Default::default() }.validate().is_err());
    assert!(ThermalConfig { quadrature_order: 400, ..Default::default() }.validate().is_err());
    assert!(ThermalConfig { condition_margin: 0.5, ..Default::default() }.validate().is_err());
    assert_eq!("collinear".parse::<BeamGeometry>().unwrap(), BeamGeometry::Collinear);
    assert!("diagonal".parse::<BeamGeometry>().is_err());
}
