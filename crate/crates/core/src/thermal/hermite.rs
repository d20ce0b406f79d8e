//! Gauss–Hermite rules for ∫ e^{-x^2} f(x) dx, cached per order.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// Nodes and weights of an n-point rule. Nodes are stored in ascending
/// order and are exactly antisymmetric (x[n-1-i] == -x[i]).
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Largest supported order; beyond this the recurrence overflows near the
/// outermost node and the outer weights underflow anyway.
pub const MAX_ORDER: usize = 600;

/// Cached rule of the given order (`1..=MAX_ORDER`).
pub fn rule(order: usize) -> Arc<HermiteRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HermiteRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().unwrap().get(&order) {
        return Arc::clone(r);
    }
    let r = Arc::new(compute(order));
    cache.lock().unwrap().insert(order, Arc::clone(&r));
    r
}

/// Golub–Welsch eigenvalues of the Jacobi matrix as starting points, then
/// Newton on the orthonormal Hermite recurrence, which also yields weights
/// with full relative accuracy in the tails.
fn compute(n: usize) -> HermiteRule {
    assert!((1..=MAX_ORDER).contains(&n), "Gauss-Hermite order {n} out of range");
    let jacobi =
        DMatrix::<f64>::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
    let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    guesses.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    // Orthonormal p_n(z) and the derivative factor sqrt(2n) p_{n-1}(z).
    let eval = |z: f64| {
        let (mut p1, mut p2) = (pim4, 0.0);
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = guesses[i];
        let mut pp = eval(z).1;
        for _ in 0..20 {
            let (p1, d) = eval(z);
            pp = d;
            let step = p1 / d;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                pp = eval(z).1;
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    x.reverse();
    w.reverse();
    HermiteRule { nodes: x, weights: w }
}
