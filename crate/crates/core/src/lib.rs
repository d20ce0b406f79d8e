//! Model of an interferometric force sensor read out through
//! electromagnetically induced transparency (EIT).
//!
//! A cloud of three-level atoms sits in a ring cavity inside one arm of a
//! Mach–Zehnder interferometer. A force on the atoms Doppler-shifts the
//! dark resonance, which rotates the phase of the light reflected off the
//! cavity; a balanced detector reads that phase against the other arm.
//!
//! * [`params`]: the parameter record and its regime diagnostics.
//! * [`response`], [`readout`]: closed-form steady state, transfer
//!   functions, noise spectrum, signal and force sensitivity. Generic over
//!   the scalar type ([`Real`]: `f32` or `f64`).
//! * [`thermal`]: Doppler averaging over the Maxwell–Boltzmann velocity
//!   distribution.
//! * [`dynamics`]: time-domain oracles (deterministic mean-field
//!   integrators and a stochastic ensemble for the fluctuation spectrum).

pub mod dynamics;
pub mod error;
pub mod params;
pub mod readout;
pub mod response;
pub mod scalar;
pub mod thermal;

pub use error::{Error, Result};
pub use params::{Params, RegimeFlags};
pub use readout::{
    detector_noise_v, detector_noise_v_exact, force_sensitivity, optimal_rabi, photocurrent_difference,
    reference_arm_field, signal_mean,
};
pub use response::{
    atomic_noise_density, cavity_self_energy, fluctuation_transfer, noise_psd_output, output_mean_field,
    output_mean_field_linearized, steady_cavity_field, susceptibility_a0, ComplexResponse,
};
pub use scalar::Real;
pub use thermal::{
    doppler_susceptibility, doppler_width, linearization_condition, rabi_from_density, thermal_average, BeamGeometry,
    LinearizationReport, ThermalConfig,
};

pub use num_complex::Complex;

/// Double-precision parameter record; what the oracles and the CLI use.
pub type SystemParams = Params<f64>;
/// Single-precision parameter record.
pub type SystemParamsF32 = Params<f32>;
pub type ComplexResponseF64 = ComplexResponse<f64>;
pub type Complex64 = Complex<f64>;
