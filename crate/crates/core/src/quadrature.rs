//! Gauss–Legendre rules and adaptive quadrature for smooth complex integrands.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Roots of the Legendre polynomial by Newton iteration; accurate to machine
/// precision for the desk-scale orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Tricomi-style initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss–Legendre integration of a complex integrand over `[a, b]`.
pub fn integrate_gl<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, n: usize) -> C64 {
    let (nodes, weights) = gauss_legendre(n);
    integrate_gl_cached(f, a, b, &nodes, &weights)
}

fn integrate_gl_cached<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    nodes: &[f64],
    weights: &[f64],
) -> C64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = C64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

/// Adaptive Gauss quadrature to an absolute target, for smooth integrands.
///
/// Each panel compares a 16-point and a 32-point rule; panels that miss their
/// share of the budget are bisected.
pub fn integrate_adaptive<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<C64> {
    let (n16, w16) = gauss_legendre(16);
    let (n32, w32) = gauss_legendre(32);
    let mut total = C64::new(0.0, 0.0);
    // (a, b, tol, depth) panels, processed LIFO.
    let mut stack = alloc::vec![(a, b, abs_tol.max(1e-300), 0u32)];
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let coarse = integrate_gl_cached(f, lo, hi, &n16, &w16);
        let fine = integrate_gl_cached(f, lo, hi, &n32, &w32);
        let err = (fine - coarse).norm();
        if err <= tol || (hi - lo) < 1e-14 {
            if err > tol {
                return Err(Error::NumericFailure(format!(
                    "adaptive quadrature stalled on [{lo}, {hi}] with error {err:.3e}"
                )));
            }
            total += fine;
        } else {
            if depth >= 40 {
                return Err(Error::NumericFailure(format!(
                    "adaptive quadrature exceeded depth on [{lo}, {hi}]"
                )));
            }
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * tol, depth + 1));
            stack.push((mid, hi, 0.5 * tol, depth + 1));
        }
    }
    Ok(total)
}
