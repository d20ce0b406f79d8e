use std::io::{self, Write};

use num_complex::Complex;

use crate::scalar::Real;

/// Collective mean-field amplitudes and the per-atom momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState<T: Real> {
    pub t: T,
    /// Cavity amplitude c̄.
    pub c: Complex<T>,
    /// Collective coherence Σ_j σ̄_ba.
    pub s_ba: Complex<T>,
    /// Collective coherence Σ_j σ̄_bc.
    pub s_bc: Complex<T>,
    /// Atomic momentum, kg m/s.
    pub p_mom: T,
}

impl<T: Real> MeanFieldState<T> {
    /// Empty cavity with every atom in |b> and at rest.
    pub fn ground() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self { t: T::zero(), c: z, s_ba: z, s_bc: z, p_mom: T::zero() }
    }

    /// Euclidean norm of the optical part (c, s_ba, s_bc).
    pub fn optical_norm(&self) -> T {
        (self.c.norm_sqr() + self.s_ba.norm_sqr() + self.s_bc.norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.c.re, self.c.im, self.s_ba.re, self.s_ba.im, self.s_bc.re, self.s_bc.im, self.p_mom]
            .iter()
            .all(|x| x.is_finite())
    }

    /// Whether either collective coherence exceeds the atom number, i.e.
    /// the weak-probe picture of nearly all population in |b> no longer
    /// holds.
    pub fn exceeds_atom_number(&self, n_atoms: T) -> bool {
        let bound = n_atoms * n_atoms;
        self.s_ba.norm_sqr() > bound || self.s_bc.norm_sqr() > bound
    }
}

/// Sampled output of a mean-field integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    pub samples: Vec<MeanFieldState<T>>,
    /// Set when any step left the weak-probe bound |s| ≤ N.
    pub coherence_bound_exceeded: bool,
}

impl<T: Real> Trajectory<T> {
    /// State at the end of the integration.
    pub fn last(&self) -> &MeanFieldState<T> {
        self.samples.last().expect("a trajectory always holds its initial state")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,re_c,im_c,re_s_ba,im_s_ba,re_s_bc,im_s_bc,p_mom")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.c.re, s.c.im, s.s_ba.re, s.s_ba.im, s.s_bc.re, s.s_bc.im, s.p_mom
            )?;
        }
        Ok(())
    }
}
