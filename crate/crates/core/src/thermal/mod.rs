//! Thermal motion of the gas: Doppler-shifted atomic response, its
//! Maxwell–Boltzmann average, the condition under which the average is
//! trivial, and the density/drive relation of the matched point.
//!
//! The probe runs along z. With [`BeamGeometry::Orthogonal`] the drive runs
//! along x, so an atom moving with (v_x, v_z) sees a one-photon detuning
//! ω_ab v_z / c and a two-photon detuning (ω_ab v_z - ω_ac v_x) / c, and the
//! average is over the two independent velocity components.
//! [`BeamGeometry::Collinear`] puts both beams on z (v_x = v_z), where the
//! two-photon detuning shrinks to (ω_ab - ω_ac) v / c.

pub mod hermite;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::response::{eit_denominator, nonzero, steady_cavity_field};
use crate::scalar::{im, re, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeamGeometry {
    /// Drive perpendicular to the probe.
    #[default]
    Orthogonal,
    /// Drive and probe co-propagating.
    Collinear,
}

impl BeamGeometry {
    pub fn name(self) -> &'static str {
        match self {
            BeamGeometry::Orthogonal => "orthogonal",
            BeamGeometry::Collinear => "collinear",
        }
    }
}

impl std::str::FromStr for BeamGeometry {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "orthogonal" => Ok(BeamGeometry::Orthogonal),
            "collinear" => Ok(BeamGeometry::Collinear),
            _ => Err(format!("unknown beam geometry `{s}` (expected orthogonal|collinear)")),
        }
    }
}

/// Numerical settings of the thermal average. Temperature, mass and the
/// transition frequencies live in [`Params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalConfig {
    /// Gauss–Hermite order per velocity axis; the result is checked against
    /// twice this order.
    pub quadrature_order: usize,
    /// Factor by which each scale of the linearization condition must
    /// dominate the next.
    pub condition_margin: f64,
    pub geometry: BeamGeometry,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self { quadrature_order: 64, condition_margin: 100.0, geometry: BeamGeometry::Orthogonal }
    }
}

impl ThermalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.quadrature_order < 8 || 2 * self.quadrature_order > hermite::MAX_ORDER {
            return Err(Error::InvalidParameter {
                field: "quadrature_order",
                reason: format!("must lie in 8..={}", hermite::MAX_ORDER / 2),
            });
        }
        if !(self.condition_margin >= 1.0) {
            return Err(Error::InvalidParameter { field: "condition_margin", reason: "must be >= 1".into() });
        }
        Ok(())
    }
}

/// Most probable speed sqrt(2 k_B T / m).
pub fn thermal_speed<T: Real>(p: &Params<T>) -> T {
    (T::lit(2.0) * p.k_boltzmann * p.temperature / p.mass).sqrt()
}

/// Single-atom coherence σ̄_ba of an atom moving with (v_x, v_z) in the
/// steady cavity field `cavity`.
pub fn coherence_at<T: Real>(p: &Params<T>, cavity: Complex<T>, v_x: T, v_z: T) -> Result<Complex<T>> {
    let shift = p.doppler_shift();
    let one_photon = shift + p.omega_ab * v_z / p.c_light;
    let two_photon = shift + (p.omega_ab * v_z - p.omega_ac * v_x) / p.c_light;
    let (den, scale) = eit_denominator(p, one_photon, two_photon);
    let den = nonzero(den, scale, "Doppler-shifted coherence")?;
    Ok(im(T::one()) * p.g * cavity * (im(two_photon) - re(p.gamma_o)) / den)
}

/// The same coherence expanded to first order in the velocities, valid when
/// |Ω|^2 dominates every Doppler term of the denominator.
pub fn coherence_linearized<T: Real>(p: &Params<T>, cavity: Complex<T>, v_x: T, v_z: T) -> Complex<T> {
    let two_photon = (p.omega_ab * v_z - p.omega_ac * v_x) / p.c_light;
    let bracket = (im(two_photon) - re(p.gamma_o) + im(p.doppler_shift())) / p.rabi_sq();
    im(T::one()) * p.g * cavity * bracket
}

/// σ̄_ba(v_x, v_z) in the steady cavity field of `p`.
pub fn doppler_susceptibility<T: Real>(p: &Params<T>, v_x: T, v_z: T) -> Result<Complex<T>> {
    let cavity = steady_cavity_field(p)?;
    coherence_at(p, cavity, v_x, v_z)
}

/// Collective coherence N σ̄_ba of atoms at rest, in the exact or the
/// linearized form.
pub fn rest_frame_coherence<T: Real>(p: &Params<T>, linearized: bool) -> Result<Complex<T>> {
    let cavity = steady_cavity_field(p)?;
    let one = if linearized {
        coherence_linearized(p, cavity, T::zero(), T::zero())
    } else {
        coherence_at(p, cavity, T::zero(), T::zero())?
    };
    Ok(one * p.atoms())
}

/// Maxwell–Boltzmann average of N σ̄_ba at a fixed Gauss–Hermite order,
/// without the convergence check.
pub fn thermal_average_at_order<T: Real>(
    p: &Params<T>,
    geometry: BeamGeometry,
    linearized: bool,
    order: usize,
) -> Result<Complex<T>> {
    if p.temperature == T::zero() {
        return rest_frame_coherence(p, linearized);
    }
    let cavity = steady_cavity_field(p)?;
    let v_th = thermal_speed(p);
    let eval = |v_x: T, v_z: T| -> Result<Complex<T>> {
        if linearized {
            Ok(coherence_linearized(p, cavity, v_x, v_z))
        } else {
            coherence_at(p, cavity, v_x, v_z)
        }
    };
    let rule = hermite::rule(order);
    let nodes: Vec<T> = rule.nodes.iter().map(|&u| T::lit(u) * v_th).collect();
    let weights: Vec<T> = rule.weights.iter().map(|&w| T::lit(w)).collect();
    let mut total = Complex::new(T::zero(), T::zero());
    match geometry {
        BeamGeometry::Orthogonal => {
            // (m / 2π k_B T) ∫∫ e^{-m v^2 / 2 k_B T} → (1/π) Σ w_i w_j
            for (&vx, &wx) in nodes.iter().zip(&weights) {
                let mut row = Complex::new(T::zero(), T::zero());
                for (&vz, &wz) in nodes.iter().zip(&weights) {
                    row += eval(vx, vz)? * wz;
                }
                total += row * wx;
            }
            total /= T::PI();
        }
        BeamGeometry::Collinear => {
            for (&v, &w) in nodes.iter().zip(&weights) {
                total += eval(v, v)? * w;
            }
            total /= T::PI().sqrt();
        }
    }
    Ok(total * p.atoms())
}

/// Thermal average of the collective coherence over the Maxwellian velocity
/// distribution.
///
/// With `linearized` set the integrand is the first-order expansion, whose
/// odd velocity terms average to zero and leave the rest-frame value. The
/// result at `cfg.quadrature_order` is compared with twice that order and
/// rejected unless the two agree to 1e-8 relative; the higher-order value is
/// returned.
pub fn thermal_average<T: Real>(p: &Params<T>, cfg: &ThermalConfig, linearized: bool) -> Result<Complex<T>> {
    cfg.validate()?;
    let coarse = thermal_average_at_order(p, cfg.geometry, linearized, cfg.quadrature_order)?;
    let fine = thermal_average_at_order(p, cfg.geometry, linearized, 2 * cfg.quadrature_order)?;
    let scale = fine.norm().max(coarse.norm());
    let change = if scale > T::zero() { (fine - coarse).norm() / scale } else { T::zero() };
    let change = change.to_f64().unwrap_or(f64::INFINITY);
    if !(change < 1e-8) {
        return Err(Error::QuadratureNotConverged { order: 2 * cfg.quadrature_order, change });
    }
    Ok(fine)
}

/// The three scales of the linearization condition at the thermal speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationReport {
    pub thermal_speed: f64,
    /// |Ω|^2.
    pub drive: f64,
    /// Doppler shifts times decay rates.
    pub first_order: f64,
    /// Product of the one- and two-photon Doppler shifts.
    pub second_order: f64,
    pub margin: f64,
    /// `drive >= margin * first_order && first_order >= margin * second_order`.
    pub passes: bool,
}

impl LinearizationReport {
    pub fn drive_over_first(&self) -> f64 {
        self.drive / self.first_order
    }

    pub fn first_over_second(&self) -> f64 {
        self.first_order / self.second_order
    }

    /// Whether |Ω|^2 dominates both Doppler scales by the margin, which is
    /// what the expansion of the denominator actually requires.
    pub fn drive_dominates(&self) -> bool {
        self.drive >= self.margin * self.first_order && self.drive >= self.margin * self.second_order
    }
}

/// Compares |Ω|^2 ≫ ω_ab v γ_o / c + Δ₂ v γ / c ≫ ω_ab v Δ₂ v / c^2 at
/// v = sqrt(2 k_B T / m), with Δ₂ = ω_ab + ω_ac for orthogonal beams (worst
/// case of ω_ab v_z - ω_ac v_x) and |ω_ab - ω_ac| for collinear beams.
pub fn linearization_condition<T: Real>(p: &Params<T>, cfg: &ThermalConfig) -> LinearizationReport {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let v = f(thermal_speed(p));
    let (ab, ac, c) = (f(p.omega_ab), f(p.omega_ac), f(p.c_light));
    let two_photon = match cfg.geometry {
        BeamGeometry::Orthogonal => ab.abs() + ac.abs(),
        BeamGeometry::Collinear => (ab - ac).abs(),
    };
    let drive = f(p.rabi_sq());
    let first_order = ab.abs() * v * f(p.gamma_o) / c + two_photon * v * f(p.gamma) / c;
    let second_order = ab.abs() * v * two_photon * v / (c * c);
    let m = cfg.condition_margin;
    LinearizationReport {
        thermal_speed: v,
        drive,
        first_order,
        second_order,
        margin: m,
        passes: drive >= m * first_order && first_order >= m * second_order,
    }
}

/// Drive strength of the matched point expressed through the atomic density:
/// |Ω|^2 = 6π (N/V) c^3 γ / ω_ab^2 · γ_o / ζ.
pub fn rabi_from_density<T: Real>(p: &Params<T>) -> T {
    T::lit(6.0) * T::PI() * p.density * p.c_light.powi(3) * p.gamma / (p.omega_ab * p.omega_ab) * p.gamma_o / p.zeta
}

/// Coupling |g|^2 = 3π c^3 γ / (ω_ab^2 V) of a dipole transition to a mode of
/// volume V.
pub fn dipole_coupling_sq<T: Real>(p: &Params<T>, mode_volume: T) -> T {
    T::lit(3.0) * T::PI() * p.c_light.powi(3) * p.gamma / (p.omega_ab * p.omega_ab * mode_volume)
}

/// Doppler FWHM ω sqrt(2 ln2 k_B T / (m c^2)) of a transition at
/// `transition_freq`, using the temperature and mass of `p`.
pub fn doppler_width<T: Real>(transition_freq: T, p: &Params<T>) -> T {
    transition_freq
        * (T::lit(2.0) * T::LN_2() * p.k_boltzmann * p.temperature / (p.mass * p.c_light * p.c_light)).sqrt()
}

#[cfg(test)]
mod tests;
