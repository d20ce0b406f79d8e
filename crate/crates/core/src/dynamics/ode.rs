//! Deterministic fourth-order Runge–Kutta integration of the mean-field
//! equations.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex;

use super::state::{MeanFieldState, Trajectory};
use crate::error::{Error, Result};
use crate::params::{Params, HBAR};
use crate::scalar::{im, re, Real};

/// Largest |dt λ| accepted for any eigenvalue λ of the drift matrix; the
/// step is additionally required to damp every mode.
pub const MAX_STEP_RADIUS: f64 = 2.5;
/// |dt λ|_max used by [`IntegrationSettings::steady_state`].
pub const STEADY_STEP_RADIUS: f64 = 2.0;
/// An integration is declared unstable once the optical amplitudes exceed
/// this multiple of their natural scale.
pub const BLOWUP_FACTOR: f64 = 1e6;

/// Step, horizon and output thinning of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings<T: Real> {
    pub dt: T,
    pub t_end: T,
    /// Keep every `sample_every`-th step (the initial and final states are
    /// always kept).
    pub sample_every: usize,
}

impl<T: Real> IntegrationSettings<T> {
    /// Settings that keep about `n_samples` states.
    pub fn new(dt: T, t_end: T, n_samples: usize) -> Self {
        let steps = (t_end / dt).ceil().to_usize().unwrap_or(usize::MAX);
        Self { dt, t_end, sample_every: (steps / n_samples.max(1)).max(1) }
    }

    /// Step at |dt λ|_max = 2 and a horizon of 50 decay times of the
    /// slowest mode (and at least 50/min(ζ, γ)).
    pub fn steady_state(p: &Params<T>) -> Result<Self> {
        let slow = slowest_rate(p);
        if !(slow > 0.0) {
            return Err(Error::InvalidRegime("the mean-field dynamics has an undamped mode".into()));
        }
        let fast = p.zeta.min(p.gamma).to_f64().unwrap_or(f64::NAN);
        let t_end = (50.0 / fast).max(50.0 / slow);
        let dt = STEADY_STEP_RADIUS / spectral_radius(p);
        Ok(Self::new(T::lit(dt), T::lit(t_end), 16))
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter { field: "dt", reason: "must be positive and finite".into() });
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter { field: "t_end", reason: "must be non-negative and finite".into() });
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter { field: "sample_every", reason: "must be at least 1".into() });
        }
        (self.t_end / self.dt)
            .ceil()
            .to_usize()
            .ok_or(Error::InvalidParameter { field: "dt", reason: "too many steps".into() })
    }
}

/// Knobs of the full semiclassical model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullModelOptions {
    /// Value of ħ in the radiation-pressure force; zero switches the force
    /// off.
    pub hbar: f64,
    /// Keep the recoil shift ħk²/2m next to the Doppler shift kp/m.
    pub include_recoil: bool,
}

impl Default for FullModelOptions {
    fn default() -> Self {
        Self { hbar: HBAR, include_recoil: false }
    }
}

fn to64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(to64(z.re), to64(z.im))
}

/// Drift matrix of (c, s_ba, s_bc) in the weak-probe equations with the
/// frozen Doppler shift.
pub fn drift_matrix<T: Real>(p: &Params<T>) -> Matrix3<Complex<f64>> {
    let i = Complex::<f64>::i();
    let zero = Complex::new(0.0, 0.0);
    let shift = to64(p.doppler_shift());
    let g = c64(p.g);
    let om = c64(p.omega_rabi);
    Matrix3::new(
        Complex::from(-to64(p.zeta) / 2.0),
        -i * g.conj(),
        zero,
        -i * g * to64(p.atoms()),
        Complex::new(-to64(p.gamma), shift),
        -i * om,
        zero,
        -i * om.conj(),
        Complex::new(-to64(p.gamma_o), shift),
    )
}

/// Eigenvalues of [`drift_matrix`].
pub fn drift_eigenvalues<T: Real>(p: &Params<T>) -> [Complex<f64>; 3] {
    let ev = drift_matrix(p).schur().eigenvalues().expect("complex Schur form yields eigenvalues");
    [ev[0], ev[1], ev[2]]
}

/// Largest |λ| of the drift matrix.
pub fn spectral_radius<T: Real>(p: &Params<T>) -> f64 {
    drift_eigenvalues(p).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest decay rate -Re λ of the drift matrix; in the EIT regime this is
/// the dark-state polariton.
pub fn slowest_rate<T: Real>(p: &Params<T>) -> f64 {
    drift_eigenvalues(p).iter().map(|z| -z.re).fold(f64::INFINITY, f64::min)
}

fn rk4_amplification(z: Complex<f64>) -> f64 {
    (Complex::from(1.0)
        + z * (Complex::from(1.0) + z * (Complex::from(0.5) + z * (Complex::from(1.0 / 6.0) + z / 24.0))))
        .norm()
}

/// Rejects a step that RK4 cannot take stably on the linear dynamics.
pub fn check_step<T: Real>(p: &Params<T>, dt: T) -> Result<()> {
    let dt = to64(dt);
    for lambda in drift_eigenvalues(p) {
        let z = lambda * dt;
        let growth = rk4_amplification(z);
        if z.norm() > MAX_STEP_RADIUS || !(growth <= 1.0) {
            return Err(Error::UnstableStep(format!(
                "dt = {dt:e} puts eigenvalue {lambda} at |dt λ| = {:.3}, RK4 amplification {growth:.6}; need dt ≤ {:e}",
                z.norm(),
                MAX_STEP_RADIUS / spectral_radius(p)
            )));
        }
    }
    Ok(())
}

/// Natural amplitude of the optical variables: the weak-probe fixed point,
/// or the initial state if that is larger.
fn amplitude_scale<T: Real>(p: &Params<T>, init: &MeanFieldState<T>) -> f64 {
    let b = Vector3::new(c64(p.a_in) * to64(p.zeta).sqrt(), Complex::from(0.0), Complex::from(0.0));
    let fixed = drift_matrix(p).lu().solve(&(-b)).map(|x| x.norm()).unwrap_or(0.0);
    let driven = if fixed.is_finite() { fixed } else { 0.0 };
    to64(init.optical_norm()).max(driven).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy)]
struct Deriv<T: Real> {
    c: Complex<T>,
    s_ba: Complex<T>,
    s_bc: Complex<T>,
    p: T,
}

fn advance<T: Real>(s: &MeanFieldState<T>, k: &Deriv<T>, h: T) -> MeanFieldState<T> {
    MeanFieldState {
        t: s.t,
        c: s.c + k.c * h,
        s_ba: s.s_ba + k.s_ba * h,
        s_bc: s.s_bc + k.s_bc * h,
        p_mom: s.p_mom + k.p * h,
    }
}

enum Stepper<'a, T: Real, F> {
    /// Precomputed step of the linear weak-probe system and the force.
    Linear(&'a LinearStep<T>, T),
    /// Classical RK4 on a general right-hand side.
    General(F),
}

fn integrate<T, F>(
    p: &Params<T>,
    settings: &IntegrationSettings<T>,
    init: MeanFieldState<T>,
    stepper: Stepper<'_, T, F>,
) -> Result<Trajectory<T>>
where
    T: Real,
    F: Fn(&MeanFieldState<T>) -> Deriv<T>,
{
    p.validate()?;
    let steps = settings.steps()?;
    check_step(p, settings.dt)?;
    if !init.is_finite() {
        return Err(Error::InvalidParameter { field: "initial state", reason: "must be finite".into() });
    }
    let limit = BLOWUP_FACTOR * amplitude_scale(p, &init);
    let limit_sqr = limit * limit;
    let n_atoms = p.atoms();
    let dt = settings.dt;
    let half = dt / T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);

    let mut samples = Vec::with_capacity(steps / settings.sample_every + 2);
    samples.push(init);
    let mut exceeded = init.exceeds_atom_number(n_atoms);
    let mut s = init;
    for n in 1..=steps {
        let t = init.t + T::lit(n as f64) * dt;
        s = match &stepper {
            Stepper::Linear(step, force) => {
                let [c, s_ba, s_bc] = mat_vec(&step.r, [s.c, s.s_ba, s.s_bc]);
                let dp = *force + (*force + *force) * two + *force;
                MeanFieldState {
                    t,
                    c: c + step.offset[0],
                    s_ba: s_ba + step.offset[1],
                    s_bc: s_bc + step.offset[2],
                    p_mom: s.p_mom + dp * sixth,
                }
            }
            Stepper::General(rhs) => {
                let k1 = rhs(&s);
                let k2 = rhs(&advance(&s, &k1, half));
                let k3 = rhs(&advance(&s, &k2, half));
                let k4 = rhs(&advance(&s, &k3, dt));
                MeanFieldState {
                    t,
                    c: s.c + (k1.c + (k2.c + k3.c) * two + k4.c) * sixth,
                    s_ba: s.s_ba + (k1.s_ba + (k2.s_ba + k3.s_ba) * two + k4.s_ba) * sixth,
                    s_bc: s.s_bc + (k1.s_bc + (k2.s_bc + k3.s_bc) * two + k4.s_bc) * sixth,
                    p_mom: s.p_mom + (k1.p + (k2.p + k3.p) * two + k4.p) * sixth,
                }
            }
        };
        let norm_sqr = to64(s.c.norm_sqr() + s.s_ba.norm_sqr() + s.s_bc.norm_sqr());
        if !(norm_sqr <= limit_sqr) {
            let norm = norm_sqr.sqrt();
            return Err(Error::UnstableStep(format!(
                "optical amplitude {norm:e} exceeds {limit:e} at t = {:e}",
                to64(s.t)
            )));
        }
        exceeded |= s.exceeds_atom_number(n_atoms);
        if n % settings.sample_every == 0 || n == steps {
            samples.push(s);
        }
    }
    Ok(Trajectory { samples, coherence_bound_exceeded: exceeded })
}

/// Weak-probe mean-field equations with the frozen Doppler shift
/// δ = k t_m F / m:
///
/// ċ = -(ζ/2) c - i g* s_ba + √ζ ā_in,
/// ṡ_ba = (iδ - γ) s_ba - i g N c - i Ω s_bc,
/// ṡ_bc = (iδ - γ_o) s_bc - i Ω* s_ba,
/// ṗ = F,
///
/// from an empty cavity with the atoms in |b> and at rest.
pub fn integrate_weak_probe<T: Real>(p: &Params<T>, settings: &IntegrationSettings<T>) -> Result<Trajectory<T>> {
    integrate_weak_probe_from(p, settings, MeanFieldState::ground())
}

/// [`integrate_weak_probe`] from a given initial state.
pub fn integrate_weak_probe_from<T: Real>(
    p: &Params<T>,
    settings: &IntegrationSettings<T>,
    init: MeanFieldState<T>,
) -> Result<Trajectory<T>> {
    let step = LinearStep::new(p, settings.dt);
    integrate(p, settings, init, Stepper::<T, fn(&MeanFieldState<T>) -> Deriv<T>>::Linear(&step, p.force))
}

type Mat3<T> = [[Complex<T>; 3]; 3];

fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[Complex::new(T::zero(), T::zero()); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

fn mat_vec<T: Real>(a: &Mat3<T>, x: [Complex<T>; 3]) -> [Complex<T>; 3] {
    [0, 1, 2].map(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2])
}

/// One RK4 step of the linear system x' = M x + b collapsed into
/// x ← R x + r with R = Σ_{k≤4} (hM)^k / k! and
/// r = h Σ_{k≤3} (hM)^k / (k+1)! b.
struct LinearStep<T: Real> {
    r: Mat3<T>,
    offset: [Complex<T>; 3],
}

impl<T: Real> LinearStep<T> {
    fn new(p: &Params<T>, h: T) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let i = im(T::one());
        let shift = p.doppler_shift();
        let m: Mat3<T> = [
            [re(-p.zeta / T::lit(2.0)), -i * p.g.conj(), z],
            [-i * p.g * p.atoms(), im(shift) - re(p.gamma), -i * p.omega_rabi],
            [z, -i * p.omega_rabi.conj(), im(shift) - re(p.gamma_o)],
        ];
        let hm = m.map(|row| row.map(|v| v * h));
        let mut r = [[z; 3]; 3];
        let mut s = [[z; 3]; 3];
        let mut power = [[z; 3]; 3];
        for k in 0..3 {
            power[k][k] = re(T::one());
        }
        let mut fact = T::one();
        for k in 0..=4 {
            if k > 0 {
                power = mat_mul(&power, &hm);
                fact *= T::lit(k as f64);
            }
            for a in 0..3 {
                for b in 0..3 {
                    r[a][b] += power[a][b] / fact;
                    if k < 4 {
                        s[a][b] += power[a][b] * h / (fact * T::lit((k + 1) as f64));
                    }
                }
            }
        }
        let offset = mat_vec(&s, [p.a_in * p.zeta.sqrt(), z, z]);
        Self { r, offset }
    }
}

/// Semiclassical model with radiation pressure. The momentum obeys
///
/// ṗ = iħk (g* c̄* s_ba - g s_ba* c̄) / N + F,
///
/// and the coherences see the instantaneous Doppler shift k p / m (minus
/// the recoil shift when requested) instead of the frozen one.
pub fn integrate_full_semiclassical<T: Real>(
    p: &Params<T>,
    settings: &IntegrationSettings<T>,
    options: &FullModelOptions,
) -> Result<Trajectory<T>> {
    integrate_full_semiclassical_from(p, settings, options, MeanFieldState::ground())
}

/// [`integrate_full_semiclassical`] from a given initial state.
pub fn integrate_full_semiclassical_from<T: Real>(
    p: &Params<T>,
    settings: &IntegrationSettings<T>,
    options: &FullModelOptions,
    init: MeanFieldState<T>,
) -> Result<Trajectory<T>> {
    let hbar = T::lit(options.hbar);
    let drive = p.a_in * p.zeta.sqrt();
    let half_zeta = p.zeta / T::lit(2.0);
    let gn = p.g * p.atoms();
    let g_conj = p.g.conj();
    let om = p.omega_rabi;
    let om_conj = om.conj();
    let k_over_m = p.k_wavevector / p.mass;
    let recoil = if options.include_recoil {
        hbar * p.k_wavevector * p.k_wavevector / (T::lit(2.0) * p.mass)
    } else {
        T::zero()
    };
    let kick = T::lit(2.0) * hbar * p.k_wavevector / p.atoms();
    let i = im(T::one());
    integrate(
        p,
        settings,
        init,
        Stepper::General(|s: &MeanFieldState<T>| {
            let shift = k_over_m * s.p_mom - recoil;
            // iħk(z - z*)/N with z = g* c̄* s_ba
            let pressure = -kick * (g_conj * s.c.conj() * s.s_ba).im;
            Deriv {
                c: drive - s.c * half_zeta - i * g_conj * s.s_ba,
                s_ba: (im(shift) - re(p.gamma)) * s.s_ba - i * gn * s.c - i * om * s.s_bc,
                s_bc: (im(shift) - re(p.gamma_o)) * s.s_bc - i * om_conj * s.s_ba,
                p: pressure + p.force,
            }
        }),
    )
}
