//! Balanced-detector readout: mean photocurrent difference, its optimum,
//! the detector noise and the resulting force sensitivity.
//!
//! Arm 2 carries ā₁ = i ā_in (the input split with a fixed π/2 phase) and
//! unit-variance vacuum fluctuations.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::response::{noise_psd_output, output_mean_field};
use crate::scalar::{im, Real};

/// Mean field in the reference arm.
pub fn reference_arm_field<T: Real>(p: &Params<T>) -> Complex<T> {
    im(T::one()) * p.a_in
}

/// ⟨I₁ - I₂⟩ = ⟨â†â₁ + â â₁†⟩ for coherent mean fields.
pub fn photocurrent_difference<T: Real>(a: Complex<T>, a1: Complex<T>) -> T {
    T::lit(2.0) * (a.conj() * a1).re
}

/// Mean difference photocurrent to first order in the force:
///
/// ⟨I₁ - I₂⟩ = -2 (k t_m/m) F ζ |ā_in|^2 (N|g|^2/|Ω|^2) / (N|g|^2γ_o/|Ω|^2 + ζ/2)^2.
pub fn signal_mean<T: Real>(p: &Params<T>) -> Result<T> {
    if !(p.rabi_sq() > T::zero()) {
        return Err(Error::InvalidRegime("signal needs a nonzero drive |Ω|".into()));
    }
    let half = p.zeta / T::lit(2.0);
    let loading = p.eit_loading() + half;
    let gain = p.collective_coupling_sq() / p.rabi_sq();
    Ok(-T::lit(2.0) * p.doppler_shift() * p.zeta * p.input_power() * gain / (loading * loading))
}

/// Drive strength |Ω|^2 = 2 N|g|^2 γ_o / ζ that maximizes |⟨I₁ - I₂⟩|.
///
/// The stationarity of the signal is re-checked with a central difference
/// in |Ω|^2 before returning.
pub fn optimal_rabi<T: Real>(p: &Params<T>) -> Result<T> {
    if !(p.gamma_o > T::zero()) {
        return Err(Error::InvalidRegime("γ_o = 0: the signal grows without bound as |Ω| → 0".into()));
    }
    let best = T::lit(2.0) * p.collective_coupling_sq() * p.gamma_o / p.zeta;
    let at = |w: T| signal_mean(&p.with_rabi_sq(w));
    let centre = at(best)?;
    if centre != T::zero() {
        let h = T::lit(1e-3);
        let slope = (at(best * (T::one() + h))? - at(best * (T::one() - h))?) / (T::lit(2.0) * h * centre);
        // d ln|S| / d ln|Ω|^2 vanishes at the optimum; the O(h^2) remainder
        // is ~1e-6 at this step.
        if slope.abs() > T::lit(1e-4).max(T::epsilon().sqrt()) {
            return Err(Error::InvalidRegime(format!("signal not stationary at the optimum (slope {slope})")));
        }
    }
    Ok(best)
}

/// Detector noise amplitude V at ω = 0 in the EIT limit, written in terms of
/// x = N|g|^2γ_o/|Ω|^2:
///
/// V^2 = [ (x^2 - ζ^2/4)^2/|x + ζ/2|^4 + (|ζ/2 - x|^2 + 2ζx)/|x + ζ/2|^2 ] |ā_in|^2.
///
/// The first term is the reflected mean field beating against arm-2
/// vacuum, the second the output fluctuations beating against ā₁. At the
/// matched point x = ζ/2 this is exactly |ā_in|.
pub fn detector_noise_v<T: Real>(p: &Params<T>) -> Result<T> {
    if !(p.rabi_sq() > T::zero()) {
        return Err(Error::InvalidRegime("detector noise needs a nonzero drive |Ω|".into()));
    }
    let half = p.zeta / T::lit(2.0);
    let x = p.eit_loading();
    let sum = x + half;
    let diff = half - x;
    let mean_part = (x * x - half * half).powi(2) / sum.powi(4);
    let fluct_part = (diff * diff + p.zeta * T::lit(2.0) * x) / (sum * sum);
    Ok(((mean_part + fluct_part) * p.input_power()).sqrt())
}

/// V assembled without the EIT approximation: the exact unforced output
/// field ā and the exact output spectrum at ω = 0,
/// V^2 = |ā|^2 ⟨δ₁δ₁†⟩ + |ā₁|^2 ⟨δδ†⟩(0) with ⟨δ₁δ₁†⟩ = 1.
///
/// Agrees with [`detector_noise_v`] up to O(γγ_o/|Ω|^2) and approaches it
/// from above at the matched point.
pub fn detector_noise_v_exact<T: Real>(p: &Params<T>) -> Result<T> {
    let unforced = Params { force: T::zero(), ..*p };
    let a = output_mean_field(&unforced)?;
    let a1 = reference_arm_field(p);
    let psd = noise_psd_output(p, T::zero())?;
    Ok((a.norm_sqr() + a1.norm_sqr() * psd).sqrt())
}

/// Force resolution F_s = m γ_o / (k t_m |ā_in|), the force at which the
/// matched-point signal equals the shot-noise amplitude. Zero for a
/// lossless ground state (γ_o = 0).
pub fn force_sensitivity<T: Real>(p: &Params<T>) -> Result<T> {
    let amplitude = p.input_power().sqrt();
    if !(amplitude > T::zero()) {
        return Err(Error::InvalidRegime("no input light: |ā_in| = 0".into()));
    }
    Ok(p.mass * p.gamma_o / (p.k_wavevector * p.t_m * amplitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::output_mean_field_linearized;
    use approx::assert_relative_eq;

    fn matched() -> Params<f64> {
        Params::reference()
    }

    #[test]
    fn signal_is_odd_and_linear_in_force() {
        let p = matched();
        let s = signal_mean(&p).unwrap();
        assert!(s < 0.0);
        for alpha in [-3.0, -1.0, 0.0, 0.5, 7.0] {
            let q = Params { force: alpha * p.force, ..p };
            assert_relative_eq!(signal_mean(&q).unwrap(), alpha * s, max_relative = 1e-14, epsilon = 1e-300);
        }
    }

    #[test]
    fn signal_doubles_with_input_power() {
        let p = matched();
        let q = Params { a_in: p.a_in * 2f64.sqrt(), ..p };
        assert_relative_eq!(signal_mean(&q).unwrap(), 2.0 * signal_mean(&p).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn matched_signal_is_the_maximum_value() {
        let p = matched();
        let expected = -p.k_wavevector * p.t_m * p.force * p.input_power() / (p.mass * p.gamma_o);
        assert_relative_eq!(signal_mean(&p).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn signal_agrees_with_linearized_field_route() {
        let mut p = matched();
        p.omega_rabi *= 1.7;
        let a = output_mean_field_linearized(&p).unwrap();
        let route = photocurrent_difference(a, reference_arm_field(&p));
        assert_relative_eq!(route, signal_mean(&p).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn optimal_rabi_unit_case() {
        let mut p = matched();
        p.n_atoms = 1;
        p.g = Complex::new(0.0, 1.0);
        p.gamma_o = 1.0;
        p.zeta = 2.0;
        assert_eq!(optimal_rabi(&p).unwrap(), 1.0);
        p.gamma_o = 0.0;
        assert!(matches!(optimal_rabi(&p), Err(Error::InvalidRegime(_))));
    }

    #[test]
    fn unforced_optimum_skips_slope_check() {
        let p = Params { force: 0.0, ..matched() };
        assert!(optimal_rabi(&p).is_ok());
    }

    #[test]
    fn noise_floor_at_matched_point() {
        let p = matched();
        assert_relative_eq!(detector_noise_v(&p).unwrap(), p.input_power().sqrt(), max_relative = 1e-14);
        let dark = Params { a_in: Complex::new(0.0, 0.0), ..p };
        assert_eq!(detector_noise_v(&dark).unwrap(), 0.0);
        assert_eq!(detector_noise_v_exact(&dark).unwrap(), 0.0);
    }

    #[test]
    fn sensitivity_unit_substitution_and_scaling() {
        let mut p = matched();
        p.mass = 1.0;
        p.gamma_o = 1.0;
        p.k_wavevector = 1.0;
        p.t_m = 1.0;
        p.a_in = Complex::new(0.6, 0.8);
        assert_relative_eq!(force_sensitivity(&p).unwrap(), 1.0, max_relative = 1e-15);
        let q = Params { a_in: p.a_in * 2.0, ..p };
        assert_relative_eq!(force_sensitivity(&q).unwrap(), 0.5, max_relative = 1e-15);
        let lossless = Params { gamma_o: 0.0, ..p };
        assert_eq!(force_sensitivity(&lossless).unwrap(), 0.0);
        let dark = Params { a_in: Complex::new(0.0, 0.0), ..p };
        assert!(force_sensitivity(&dark).is_err());
    }

    #[test]
    fn sensitivity_is_noise_over_signal() {
        let p = matched();
        let ratio = detector_noise_v(&p).unwrap() * p.force.abs() / signal_mean(&p).unwrap().abs();
        assert_relative_eq!(force_sensitivity(&p).unwrap(), ratio, max_relative = 1e-12);
    }

    #[test]
    fn single_precision_model_tracks_double() {
        let p = matched();
        let q = p.to_f32();
        assert_relative_eq!(detector_noise_v(&q).unwrap() as f64, detector_noise_v(&p).unwrap(), max_relative = 1e-5);
        assert_relative_eq!(signal_mean(&q).unwrap() as f64, signal_mean(&p).unwrap(), max_relative = 1e-4);
        assert_relative_eq!(force_sensitivity(&q).unwrap() as f64, force_sensitivity(&p).unwrap(), max_relative = 1e-5);
    }
}
