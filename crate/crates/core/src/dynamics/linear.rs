//! Exact discretization of complex linear SDEs dx = A x dt + B dW, where W
//! is a vector of independent circular complex Wiener processes with
//! E[dW dW†] = I dt.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Transition matrix Φ = exp(A h) and noise covariance
/// Q = ∫_0^h exp(A s) B B† exp(A† s) ds over one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub phi: CMatrix,
    pub q: CMatrix,
}

/// Largest ‖A‖ h_0 used for the Taylor series before squaring up to h.
const TAYLOR_RADIUS: f64 = 1e-3;

fn op_norm_bound(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Computes Φ and Q by Taylor series on h/2^k followed by k doublings
/// Φ_{2t} = Φ_t², Q_{2t} = Q_t + Φ_t Q_t Φ_t†.
pub fn discretize(a: &CMatrix, b: &CMatrix, h: f64) -> Result<Discretization> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter { field: "dt", reason: "must be positive and finite".into() });
    }
    let n = a.nrows();
    let norm = op_norm_bound(a);
    let mut doublings = 0u32;
    let mut h0 = h;
    while norm * h0 > TAYLOR_RADIUS {
        h0 /= 2.0;
        doublings += 1;
    }
    let c = b * b.adjoint();
    let a_h = a * Complex::from(h0);
    let mut phi = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    // Q(t) = Σ_k t^{k+1}/(k+1)! L^k(C), L(X) = A X + X A†.
    let mut q = CMatrix::zeros(n, n);
    let mut lyap = c.clone();
    let mut coeff = h0;
    for k in 1..=20 {
        term = &term * &a_h / Complex::from(k as f64);
        phi += &term;
        q += &lyap * Complex::from(coeff);
        lyap = a * &lyap + &lyap * a.adjoint();
        coeff *= h0 / (k as f64 + 1.0);
        let tail = op_norm_bound(&term) + op_norm_bound(&lyap) * coeff / (op_norm_bound(&q) + f64::MIN_POSITIVE);
        if tail < 1e-18 {
            break;
        }
    }
    for _ in 0..doublings {
        q = &q + &phi * &q * phi.adjoint();
        phi = &phi * &phi;
    }
    Ok(Discretization { phi, q: hermitian_part(&q) })
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex::from(0.5)
}

/// Stationary covariance P of dx = A x dt + B dW, the solution of
/// A P + P A† + B B† = 0. Fails unless every mode of A decays.
pub fn stationary_covariance(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let eig = a.clone().schur().eigenvalues().expect("complex Schur form yields eigenvalues");
    if let Some(lambda) = eig.iter().find(|z| !(z.re < 0.0)) {
        return Err(Error::InvalidRegime(format!("fluctuation mode {lambda} does not decay; no stationary state")));
    }
    // Column-major vec: vec(A P) = (I ⊗ A) vec P, vec(P A†) = (conj(A) ⊗ I) vec P.
    let id = CMatrix::identity(n, n);
    let op = id.kronecker(a) + a.conjugate().kronecker(&id);
    let c = b * b.adjoint();
    let rhs = -CMatrix::from_column_slice(n * n, 1, c.as_slice());
    let vec_p = op.lu().solve(&rhs).ok_or(Error::DegenerateDenominator { context: "stationary covariance" })?;
    Ok(hermitian_part(&CMatrix::from_column_slice(n, n, vec_p.as_slice())))
}

/// Factor L with L L† = M for a Hermitian positive semi-definite M;
/// rounding-level negative eigenvalues are clamped to zero.
pub fn psd_factor(m: &CMatrix) -> CMatrix {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut l = eig.eigenvectors.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        l.column_mut(j).scale_mut(s);
    }
    l
}
