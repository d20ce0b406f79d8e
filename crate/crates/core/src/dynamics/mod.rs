//! Time-domain oracles: mean-field integrators for the deterministic
//! equations and a stochastic ensemble for the fluctuation spectrum.

pub mod linear;
pub mod ode;
pub mod sde;
pub mod state;

pub use ode::{
    check_step, drift_eigenvalues, drift_matrix, integrate_full_semiclassical, integrate_full_semiclassical_from,
    integrate_weak_probe, integrate_weak_probe_from, slowest_rate, spectral_radius, FullModelOptions,
    IntegrationSettings,
};
pub use sde::{bin_aligned_grid, simulate_fluctuations, McSettings, SdeScheme, SpectrumEstimate};
pub use state::{MeanFieldState, Trajectory};
