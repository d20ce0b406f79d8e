//! Physical parameters of the sensor.
//!
//! Every rate is an angular frequency in rad/s; every other quantity is SI.
//! Fields are public so sweeps can tweak a copy; call [`Params::validate`]
//! before handing a hand-built record to the model.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// CODATA speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// CODATA Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T: Real> {
    /// Number of atoms N in the cavity mode.
    pub n_atoms: u64,
    /// Single-atom coupling g of the cavity field to |a>-|b>.
    pub g: Complex<T>,
    /// Drive Rabi frequency Ω on |a>-|c>.
    pub omega_rabi: Complex<T>,
    /// Optical coherence decay γ.
    pub gamma: T,
    /// Ground-state (|b>-|c>) decoherence γ_o.
    pub gamma_o: T,
    /// Coupling rate ζ of the semi-transparent input mirror.
    pub zeta: T,
    /// Probe wave-vector k, 1/m.
    pub k_wavevector: T,
    /// Atomic mass, kg.
    pub mass: T,
    /// Measurement time t_m, s.
    pub t_m: T,
    /// Input amplitude ā_in, sqrt(photons/s).
    pub a_in: Complex<T>,
    /// Classical force on each atom, N.
    pub force: T,
    /// |a>-|b> transition frequency.
    pub omega_ab: T,
    /// |a>-|c> transition frequency.
    pub omega_ac: T,
    /// Gas temperature, K.
    pub temperature: T,
    /// Atomic number density N/V, 1/m^3.
    pub density: T,
    pub c_light: T,
    pub k_boltzmann: T,
}

/// Diagnostic flags for the approximations the closed forms rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimeFlags {
    /// `t_m * gamma < 1`.
    pub weak_probe: bool,
    /// `|Ω|^2 > margin * gamma * gamma_o`.
    pub eit: bool,
}

impl<T: Real> Params<T> {
    /// Cold-gas operating point used throughout the tests and the CLI
    /// defaults.
    ///
    /// Density 1e18 m^-3, γ = 1e7, γ_o = 1e3, ζ = 1e6, ω_ab = 5e15 and
    /// ω_cb = 1e-6 ω_ab, m = 1.4e-25 kg, T = 1 K, with c = 3e8 m/s and
    /// k_B = 1.3e-23 J/K as rounded constants. The mode volume is fixed at
    /// 1e-10 m^3 (N = 1e8) and g follows from the dipole relation
    /// |g|^2 = 3π c^3 γ / (ω_ab^2 V). The drive sits at the matched point,
    /// t_m = 1e-8 s, |ā_in|^2 = 1e12 photons/s and the force is chosen so
    /// the frozen Doppler shift k t_m F / m is 1e3 rad/s.
    pub fn reference() -> Self {
        let l = T::lit;
        let n_atoms = 100_000_000u64;
        let density = l(1e18);
        let c = l(3e8);
        let gamma = l(1e7);
        let omega_ab = l(5e15);
        let volume = l(n_atoms as f64) / density;
        let g = (l(3.0) * T::PI() * c.powi(3) * gamma / (omega_ab * omega_ab * volume)).sqrt();
        let mass = l(1.4e-25);
        let k = omega_ab / c;
        let t_m = l(1e-8);
        let mut p = Self {
            n_atoms,
            g: Complex::new(g, T::zero()),
            omega_rabi: Complex::new(T::one(), T::zero()),
            gamma,
            gamma_o: l(1e3),
            zeta: l(1e6),
            k_wavevector: k,
            mass,
            t_m,
            a_in: Complex::new(l(1e6), T::zero()),
            force: l(1e3) * mass / (k * t_m),
            omega_ab,
            omega_ac: omega_ab - l(5e9),
            temperature: T::one(),
            density,
            c_light: c,
            k_boltzmann: l(1.3e-23),
        };
        p.omega_rabi = Complex::new(crate::thermal::rabi_from_density(&p).sqrt(), T::zero());
        p
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: &str) -> Error {
            Error::InvalidParameter { field, reason: reason.to_owned() }
        }
        let finite = |z: Complex<T>| z.re.is_finite() && z.im.is_finite();
        if self.n_atoms < 1 {
            return Err(bad("n_atoms", "must be at least 1"));
        }
        for (field, v) in [
            ("gamma", self.gamma),
            ("zeta", self.zeta),
            ("mass", self.mass),
            ("t_m", self.t_m),
            ("k_wavevector", self.k_wavevector),
            ("density", self.density),
            ("c_light", self.c_light),
            ("k_boltzmann", self.k_boltzmann),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(bad(field, "must be finite and > 0"));
            }
        }
        for (field, v) in [("gamma_o", self.gamma_o), ("temperature", self.temperature)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(bad(field, "must be finite and >= 0"));
            }
        }
        for (field, v) in [("force", self.force), ("omega_ab", self.omega_ab), ("omega_ac", self.omega_ac)] {
            if !v.is_finite() {
                return Err(bad(field, "must be finite"));
            }
        }
        for (field, z) in [("g", self.g), ("omega_rabi", self.omega_rabi), ("a_in", self.a_in)] {
            if !finite(z) {
                return Err(bad(field, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn atoms(&self) -> T {
        T::lit(self.n_atoms as f64)
    }

    /// Frozen Doppler shift k t_m F / m of the atoms after the force acted
    /// for the measurement time.
    pub fn doppler_shift(&self) -> T {
        self.k_wavevector * self.t_m * self.force / self.mass
    }

    /// |Ω|^2.
    pub fn rabi_sq(&self) -> T {
        self.omega_rabi.norm_sqr()
    }

    /// N |g|^2.
    pub fn collective_coupling_sq(&self) -> T {
        self.atoms() * self.g.norm_sqr()
    }

    /// N |g|^2 γ_o / |Ω|^2, the EIT-limit absorption seen by the cavity.
    pub fn eit_loading(&self) -> T {
        self.collective_coupling_sq() * self.gamma_o / self.rabi_sq()
    }

    /// Distance from the matched point, N |g|^2 γ_o / |Ω|^2 - ζ/2.
    pub fn matched_residual(&self) -> T {
        self.eit_loading() - self.zeta / T::lit(2.0)
    }

    /// |ā_in|^2 in photons/s.
    pub fn input_power(&self) -> T {
        self.a_in.norm_sqr()
    }

    pub fn regime_flags(&self, eit_margin: T) -> RegimeFlags {
        RegimeFlags {
            weak_probe: self.t_m * self.gamma < T::one(),
            eit: self.rabi_sq() > eit_margin * self.gamma * self.gamma_o,
        }
    }

    /// Copy with |Ω| rescaled (phase kept) so the drive sits at the
    /// signal-maximizing point |Ω|^2 = 2 N |g|^2 γ_o / ζ.
    pub fn with_matched_drive(&self) -> Self {
        let target = T::lit(2.0) * self.collective_coupling_sq() * self.gamma_o / self.zeta;
        self.with_rabi_sq(target)
    }

    /// Copy with |Ω|^2 set to `rabi_sq`, keeping the drive phase.
    pub fn with_rabi_sq(&self, rabi_sq: T) -> Self {
        let phase = if self.omega_rabi.norm() > T::zero() { self.omega_rabi.arg() } else { T::zero() };
        Self { omega_rabi: Complex::from_polar(rabi_sq.sqrt(), phase), ..*self }
    }
}

impl Params<f64> {
    /// Narrowed copy for exercising the single-precision model.
    pub fn to_f32(&self) -> Params<f32> {
        let c = |z: Complex<f64>| Complex::new(z.re as f32, z.im as f32);
        Params {
            n_atoms: self.n_atoms,
            g: c(self.g),
            omega_rabi: c(self.omega_rabi),
            gamma: self.gamma as f32,
            gamma_o: self.gamma_o as f32,
            zeta: self.zeta as f32,
            k_wavevector: self.k_wavevector as f32,
            mass: self.mass as f32,
            t_m: self.t_m as f32,
            a_in: c(self.a_in),
            force: self.force as f32,
            omega_ab: self.omega_ab as f32,
            omega_ac: self.omega_ac as f32,
            temperature: self.temperature as f32,
            density: self.density as f32,
            c_light: self.c_light as f32,
            k_boltzmann: self.k_boltzmann as f32,
        }
    }
}
