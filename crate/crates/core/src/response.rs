//! Mean-field steady state and linear-response functions of the loaded
//! cavity.
//!
//! Fourier convention: X(ω) = (2π)^{-1/2} ∫ x(t) e^{iωt} dt. The transfer
//! functions are written in the same `iω - γ` form as the fluctuation
//! equations they come from, so they can be compared term by term with the
//! stochastic integrator in [`crate::dynamics`].

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::{im, re, Real};

/// A complex response sampled at Fourier frequency `omega` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResponse<T: Real> {
    pub omega: T,
    pub value: Complex<T>,
}

pub(crate) fn nonzero<T: Real>(den: Complex<T>, scale: T, context: &'static str) -> Result<Complex<T>> {
    let tiny = T::lit(1e-30);
    if !(den.norm() > tiny * scale) {
        return Err(Error::DegenerateDenominator { context });
    }
    Ok(den)
}

/// Two-level EIT denominator (iω' - γ)(iω' - γ_o) + |Ω|^2 at detunings
/// `shift_ab` (one-photon) and `shift_bc` (two-photon).
pub(crate) fn eit_denominator<T: Real>(p: &Params<T>, shift_ab: T, shift_bc: T) -> (Complex<T>, T) {
    let one = im(shift_ab) - re(p.gamma);
    let two = im(shift_bc) - re(p.gamma_o);
    (one * two + re(p.rabi_sq()), p.rabi_sq() + one.norm() * two.norm())
}

/// Collective susceptibility seen by the cavity at ω = 0 for atoms carrying
/// the frozen Doppler shift δ = k t_m F / m:
///
/// A₀ = N|g|^2 (iδ - γ_o) / [(iδ - γ)(iδ - γ_o) + |Ω|^2].
pub fn susceptibility_a0<T: Real>(p: &Params<T>) -> Result<ComplexResponse<T>> {
    let shift = p.doppler_shift();
    let (den, scale) = eit_denominator(p, shift, shift);
    let den = nonzero(den, scale, "susceptibility A0")?;
    let num = (im(shift) - re(p.gamma_o)) * p.collective_coupling_sq();
    Ok(ComplexResponse { omega: T::zero(), value: num / den })
}

/// Steady intracavity amplitude c̄ = -√ζ ā_in / (A₀ - ζ/2), i.e. the fixed
/// point of the weak-probe equations of motion.
pub fn steady_cavity_field<T: Real>(p: &Params<T>) -> Result<Complex<T>> {
    let a0 = susceptibility_a0(p)?.value;
    let half = p.zeta / T::lit(2.0);
    let den = nonzero(a0 - re(half), a0.norm() + half, "steady cavity field")?;
    Ok(-p.a_in * p.zeta.sqrt() / den)
}

/// Exact output field ā = ā_in - √ζ c̄ reflected off the input mirror.
pub fn output_mean_field<T: Real>(p: &Params<T>) -> Result<Complex<T>> {
    let c = steady_cavity_field(p)?;
    Ok(p.a_in - c * p.zeta.sqrt())
}

/// Output field to first order in the Doppler shift δ, in the EIT limit
/// |Ω|^2 ≫ γγ_o, γ_o^2:
///
/// ā ≈ ā_in (x^2 - ζ^2/4 - i δ ζ N|g|^2/|Ω|^2) / (x + ζ/2)^2, x = N|g|^2γ_o/|Ω|^2.
///
/// The sign of the δ term is the one obtained by expanding the exact
/// expression; it is what makes the photocurrent of [`crate::readout`]
/// come out negative for positive force.
pub fn output_mean_field_linearized<T: Real>(p: &Params<T>) -> Result<Complex<T>> {
    if !(p.rabi_sq() > T::zero()) {
        return Err(Error::InvalidRegime("linearized output field needs |Ω| > 0".into()));
    }
    let half = p.zeta / T::lit(2.0);
    let x = p.eit_loading();
    let y = p.doppler_shift() * p.collective_coupling_sq() / p.rabi_sq();
    let num = Complex::new(x * x - half * half, -y * p.zeta);
    Ok(p.a_in * num / ((x + half) * (x + half)))
}

/// A(ω) = N|g|^2 / (iω - γ + |Ω|^2 / (iω - γ_o)), evaluated in the
/// pole-free product form.
pub fn cavity_self_energy<T: Real>(p: &Params<T>, omega: T) -> Result<Complex<T>> {
    let (den, scale) = eit_denominator(p, omega, omega);
    let den = nonzero(den, scale, "atomic response A(ω)")?;
    Ok((im(omega) - re(p.gamma_o)) * p.collective_coupling_sq() / den)
}

/// Coefficients of the output fluctuation δ(ω) = T_in δ_in(ω) + T_F F(ω):
/// T_in = (iω + A + ζ/2)/(iω + A - ζ/2), T_F = √ζ/(iω + A - ζ/2).
pub fn fluctuation_transfer<T: Real>(p: &Params<T>, omega: T) -> Result<(ComplexResponse<T>, ComplexResponse<T>)> {
    let a = cavity_self_energy(p, omega)?;
    let half = re(p.zeta / T::lit(2.0));
    let den = im(omega) + a - half;
    let den = nonzero(den, omega.abs() + a.norm() + half.re, "output transfer")?;
    let t_in = (im(omega) + a + half) / den;
    let t_f = re(p.zeta.sqrt()) / den;
    Ok((ComplexResponse { omega, value: t_in }, ComplexResponse { omega, value: t_f }))
}

/// Spectral density ⟨F(ω)F†(ω)⟩ of the collective atomic noise fed into the
/// cavity, from ⟨F_bc F_bc†⟩ = 2Nγ_o and ⟨F_ba F_ba†⟩ = 2Nγ:
///
/// S_F = N|g|^2 (2γ_o|Ω|^2 + 2γ|iω - γ_o|^2) / |(iω - γ)(iω - γ_o) + |Ω|^2|^2.
pub fn atomic_noise_density<T: Real>(p: &Params<T>, omega: T) -> Result<T> {
    let (den, scale) = eit_denominator(p, omega, omega);
    let den = nonzero(den, scale, "atomic noise density")?;
    let two = T::lit(2.0);
    let ground = im(omega) - re(p.gamma_o);
    let num = two * p.gamma_o * p.rabi_sq() + two * p.gamma * ground.norm_sqr();
    Ok(p.collective_coupling_sq() * num / den.norm_sqr())
}

/// Output spectrum ⟨δ(ω)δ†(ω)⟩ for vacuum input
/// (⟨δ_in δ_in†⟩ = 1) and ground-state reservoirs.
///
/// For every passive parameter set this equals 1: the cavity plus atoms
/// preserve the output commutator, so the reflected field sits exactly at
/// the shot-noise floor.
pub fn noise_psd_output<T: Real>(p: &Params<T>, omega: T) -> Result<T> {
    let (t_in, t_f) = fluctuation_transfer(p, omega)?;
    let s_f = atomic_noise_density(p, omega)?;
    Ok(t_in.value.norm_sqr() + t_f.value.norm_sqr() * s_f)
}
