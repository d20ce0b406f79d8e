//! Monte-Carlo estimate of the output fluctuation spectrum.
//!
//! The linearized fluctuations (δ_c, δ_ba, δ_bc) obey
//!
//! dδ_c  = [-(ζ/2) δ_c - i g* δ_ba] dt + √ζ dW_in,
//! dδ_ba = [-γ δ_ba - i g N δ_c - i Ω δ_bc] dt + dF_ba,
//! dδ_bc = [-γ_o δ_bc - i Ω* δ_ba] dt + dF_bc,
//!
//! with the frozen Doppler products dropped. Each quantum Langevin force
//! is replaced by an independent circular complex Wiener process whose
//! classical correlator E[dF dF*] equals the quantum ⟨F F†⟩ (1, 2Nγ and
//! 2Nγ_o per unit time). Because every force has ⟨F† F⟩ = 0 and the
//! spectrum ⟨δ(ω) δ†(ω)⟩ is quadratic in the forces, the classical
//! ensemble reproduces it exactly in expectation.
//!
//! The coherences are simulated as δ/√N so all three variables share one
//! scale. Each trajectory starts from the stationary distribution, runs a
//! warm-up, then records the output increments
//! Y_n = ∫ δ_out dt = ΔW_in - √ζ ∫ δ_c dt over each step, and forms the
//! periodogram |Σ_n Y_n e^{iω(t_n + h/2)}|² / T on the requested grid.
//!
//! Trajectory j draws its normals from ChaCha8 seeded with `seed` on
//! stream j, so the ensemble is reproducible and independent of the
//! number of worker threads.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::linear::{discretize, psd_factor, stationary_covariance, CMatrix};
use crate::error::{Error, Result};
use crate::params::Params;

type C = Complex<f64>;

/// Smallest ensemble accepted by [`simulate_fluctuations`].
pub const MIN_TRAJECTORIES: usize = 100;
/// Largest stderr/psd tolerated at the first grid point.
pub const MAX_RELATIVE_STDERR: f64 = 0.2;

/// Time stepping of the fluctuation ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SdeScheme {
    /// Exact Gaussian transition of the linear system over each step;
    /// stable for any step.
    #[default]
    Exact,
    /// Euler–Maruyama; requires |1 + h λ| < 1 for every drift eigenvalue.
    EulerMaruyama,
}

impl SdeScheme {
    pub fn name(self) -> &'static str {
        match self {
            SdeScheme::Exact => "exact",
            SdeScheme::EulerMaruyama => "euler-maruyama",
        }
    }
}

impl std::str::FromStr for SdeScheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(SdeScheme::Exact),
            "euler-maruyama" | "euler_maruyama" | "em" => Ok(SdeScheme::EulerMaruyama),
            other => Err(format!("unknown scheme {other:?} (expected exact or euler-maruyama)")),
        }
    }
}

/// Ensemble settings.
#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    /// Step h, s.
    pub dt: f64,
    /// Length of each trajectory including the warm-up, s.
    pub t_end: f64,
    /// Discarded initial stretch, s.
    pub warmup: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub scheme: SdeScheme,
    /// Angular frequencies at which the spectrum is estimated, rad/s.
    pub omega_grid: Vec<f64>,
    /// Drive the coherences with their Langevin forces. Switching them off
    /// leaves only the reflected input noise, whose spectrum is |T_in(ω)|².
    pub atomic_noise: bool,
}

impl McSettings {
    /// Number of record steps per trajectory used by [`McSettings::new`].
    pub const RECORD_STEPS: usize = 4096;

    /// Steps of 0.25/ω_max, a warm-up of 10/ζ, a record of 4096 steps and
    /// a grid of `n_freq` bin-aligned frequencies up to `omega_max`
    /// (including ω = 0).
    pub fn new(p: &Params<f64>, omega_max: f64, n_freq: usize, n_traj: usize, seed: u64) -> Self {
        let dt = 0.25 / omega_max;
        let warmup = 10.0 / p.zeta;
        let record = Self::RECORD_STEPS as f64 * dt;
        Self {
            dt,
            t_end: warmup + record,
            warmup,
            n_traj,
            seed,
            scheme: SdeScheme::Exact,
            omega_grid: bin_aligned_grid(record, omega_max, n_freq),
            atomic_noise: true,
        }
    }

    fn steps(&self) -> Result<(usize, usize)> {
        let bad = |field, reason: &str| Error::InvalidParameter { field, reason: reason.into() };
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(bad("dt", "must be positive and finite"));
        }
        if !(self.warmup >= 0.0) || !(self.t_end > self.warmup) || !self.t_end.is_finite() {
            return Err(bad("t_end", "must be finite and exceed the warm-up"));
        }
        if self.omega_grid.is_empty() || self.omega_grid.iter().any(|w| !w.is_finite()) {
            return Err(bad("omega_grid", "must hold at least one finite frequency"));
        }
        let warm = (self.warmup / self.dt).round() as usize;
        let total = (self.t_end / self.dt).round() as usize;
        if total <= warm {
            return Err(bad("t_end", "leaves no record after the warm-up"));
        }
        Ok((warm, total - warm))
    }
}

/// `n` frequencies on the periodogram bins 2πk/T of a record of length
/// `record`: ω = 0 followed by bins spaced roughly logarithmically up to
/// `omega_max`.
pub fn bin_aligned_grid(record: f64, omega_max: f64, n: usize) -> Vec<f64> {
    let unit = 2.0 * std::f64::consts::PI / record;
    let top = ((omega_max / unit).floor() as usize).max(1);
    let mut bins = vec![0usize];
    if n > 1 {
        let m = n - 1;
        for j in 0..m {
            let ideal = if m == 1 { top as f64 } else { (top as f64).powf(j as f64 / (m - 1) as f64) };
            let k = (ideal.round() as usize).max(bins.last().unwrap() + 1);
            bins.push(k);
        }
    }
    bins.into_iter().map(|k| k as f64 * unit).collect()
}

/// Ensemble-averaged periodogram with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub omega_grid: Vec<f64>,
    pub psd: Vec<f64>,
    /// Standard error of the ensemble mean.
    pub stderr: Vec<f64>,
    pub n_traj: usize,
}

/// Drift and noise input of the scaled fluctuation system.
fn scaled_system(p: &Params<f64>, atomic_noise: bool) -> (CMatrix, CMatrix) {
    let atomic = if atomic_noise { 1.0 } else { 0.0 };
    let i = C::i();
    let root_n = p.atoms().sqrt();
    let z = C::from(0.0);
    let a = CMatrix::from_row_slice(
        3,
        3,
        &[
            C::from(-p.zeta / 2.0),
            -i * p.g.conj() * root_n,
            z,
            -i * p.g * root_n,
            C::from(-p.gamma),
            -i * p.omega_rabi,
            z,
            -i * p.omega_rabi.conj(),
            C::from(-p.gamma_o),
        ],
    );
    let b = CMatrix::from_row_slice(
        3,
        3,
        &[
            C::from(p.zeta.sqrt()),
            z,
            z,
            z,
            C::from((2.0 * p.gamma * atomic).sqrt()),
            z,
            z,
            z,
            C::from((2.0 * p.gamma_o * atomic).sqrt()),
        ],
    );
    (a, b)
}

/// One step of the recorded process: state x (3) and output increment Y,
/// (x', Y) = Φ x + L ξ with ξ standard circular complex normals.
struct Step {
    phi: [[C; 3]; 4],
    noise: [[C; 4]; 4],
}

fn exact_step(a: &CMatrix, b: &CMatrix, zeta: f64, h: f64) -> Result<Step> {
    // Augmented state (x, J = ∫ δ_c dt, W = ∫ dW_in).
    let mut aug = CMatrix::zeros(5, 5);
    aug.view_mut((0, 0), (3, 3)).copy_from(a);
    aug[(3, 0)] = C::from(1.0);
    let mut b_aug = CMatrix::zeros(5, 3);
    b_aug.view_mut((0, 0), (3, 3)).copy_from(b);
    b_aug[(4, 0)] = C::from(1.0);
    let d = discretize(&aug, &b_aug, h)?;
    // Keep x and Y = W - √ζ J; J and W restart from zero every step.
    let mut t = CMatrix::zeros(4, 5);
    for k in 0..3 {
        t[(k, k)] = C::from(1.0);
    }
    t[(3, 3)] = C::from(-zeta.sqrt());
    t[(3, 4)] = C::from(1.0);
    let phi = &t * d.phi.columns(0, 3);
    let q = &t * &d.q * t.adjoint();
    Ok(Step { phi: to_rows(&phi), noise: to_rows(&psd_factor(&q)) })
}

fn euler_step(a: &CMatrix, b: &CMatrix, zeta: f64, h: f64) -> Result<Step> {
    let eig = a.clone().schur().eigenvalues().expect("complex Schur form yields eigenvalues");
    if let Some(lambda) = eig.iter().find(|l| (C::from(1.0) + *l * h).norm() >= 1.0) {
        return Err(Error::UnstableStep(format!(
            "Euler–Maruyama with h = {h:e} amplifies drift eigenvalue {lambda} by {:.3e}; use the exact scheme",
            (C::from(1.0) + *lambda * h).norm()
        )));
    }
    let mut phi = CMatrix::zeros(4, 3);
    phi.view_mut((0, 0), (3, 3)).copy_from(&(CMatrix::identity(3, 3) + a * C::from(h)));
    phi[(3, 0)] = C::from(-zeta.sqrt() * h);
    let mut noise = CMatrix::zeros(4, 4);
    noise.view_mut((0, 0), (3, 3)).copy_from(&(b * C::from(h.sqrt())));
    noise[(3, 0)] = C::from(h.sqrt());
    Ok(Step { phi: to_rows(&phi), noise: to_rows(&noise) })
}

fn to_rows<const R: usize, const K: usize>(m: &CMatrix) -> [[C; K]; R] {
    let mut out = [[C::from(0.0); K]; R];
    for (r, row) in out.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = m[(r, k)];
        }
    }
    out
}

#[inline]
fn complex_normal(rng: &mut ChaCha8Rng) -> C {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

struct Plan<'a> {
    step: Step,
    init: [[C; 3]; 3],
    warm: usize,
    record: usize,
    dt: f64,
    omega: &'a [f64],
    seed: u64,
}

fn periodogram(plan: &Plan, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(index);
    let xi = [complex_normal(&mut rng), complex_normal(&mut rng), complex_normal(&mut rng)];
    let mut x = [0, 1, 2].map(|r| plan.init[r][0] * xi[0] + plan.init[r][1] * xi[1] + plan.init[r][2] * xi[2]);
    let step = &plan.step;
    let mut advance = |x: &mut [C; 3]| -> C {
        let xi = [0; 4].map(|_| complex_normal(&mut rng));
        let mut next = [C::from(0.0); 4];
        for (r, v) in next.iter_mut().enumerate() {
            let f = &step.phi[r];
            let l = &step.noise[r];
            *v = f[0] * x[0] + f[1] * x[1] + f[2] * x[2] + l[0] * xi[0] + l[1] * xi[1] + l[2] * xi[2] + l[3] * xi[3];
        }
        *x = [next[0], next[1], next[2]];
        next[3]
    };
    for _ in 0..plan.warm {
        advance(&mut x);
    }
    let rotation: Vec<C> = plan.omega.iter().map(|w| C::from_polar(1.0, w * plan.dt)).collect();
    let mut phase: Vec<C> = plan.omega.iter().map(|w| C::from_polar(1.0, w * plan.dt / 2.0)).collect();
    let mut sums = vec![C::from(0.0); plan.omega.len()];
    for _ in 0..plan.record {
        let y = advance(&mut x);
        for ((s, ph), rot) in sums.iter_mut().zip(phase.iter_mut()).zip(&rotation) {
            *s += y * *ph;
            *ph *= rot;
        }
    }
    let length = plan.record as f64 * plan.dt;
    sums.iter().map(|s| s.norm_sqr() / length).collect()
}

/// Monte-Carlo estimate of ⟨δ_out(ω) δ_out†(ω)⟩ on `settings.omega_grid`.
pub fn simulate_fluctuations(p: &Params<f64>, settings: &McSettings) -> Result<SpectrumEstimate> {
    p.validate()?;
    if settings.n_traj < MIN_TRAJECTORIES {
        return Err(Error::InsufficientEnsemble(format!(
            "{} trajectories requested, at least {MIN_TRAJECTORIES} needed",
            settings.n_traj
        )));
    }
    let (warm, record) = settings.steps()?;
    let (a, b) = scaled_system(p, settings.atomic_noise);
    let step = match settings.scheme {
        SdeScheme::Exact => exact_step(&a, &b, p.zeta, settings.dt)?,
        SdeScheme::EulerMaruyama => euler_step(&a, &b, p.zeta, settings.dt)?,
    };
    let init = to_rows(&psd_factor(&stationary_covariance(&a, &b)?));
    let plan = Plan { step, init, warm, record, dt: settings.dt, omega: &settings.omega_grid, seed: settings.seed };

    let runs: Vec<Vec<f64>> = (0..settings.n_traj as u64).into_par_iter().map(|j| periodogram(&plan, j)).collect();
    let m = settings.omega_grid.len();
    let n = settings.n_traj as f64;
    let mut mean = vec![0.0; m];
    for run in &runs {
        for (acc, v) in mean.iter_mut().zip(run) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n);
    let mut var = vec![0.0; m];
    for run in &runs {
        for ((acc, v), mu) in var.iter_mut().zip(run).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    let stderr: Vec<f64> = var.iter().map(|v| (v / (n - 1.0) / n).sqrt()).collect();
    if let Some(v) = mean.iter().chain(&stderr).find(|v| !v.is_finite()) {
        return Err(Error::UnstableStep(format!("ensemble produced a non-finite spectrum value {v}")));
    }
    if !(stderr[0] <= MAX_RELATIVE_STDERR * mean[0]) {
        return Err(Error::InsufficientEnsemble(format!(
            "relative standard error {:.3} at ω = {:e} exceeds {MAX_RELATIVE_STDERR}",
            stderr[0] / mean[0],
            settings.omega_grid[0]
        )));
    }
    Ok(SpectrumEstimate { omega_grid: settings.omega_grid.clone(), psd: mean, stderr, n_traj: settings.n_traj })
}
