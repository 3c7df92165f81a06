//! Closed-form one-dimensional theory on `Ω = (-1, 1)` with `D = [a, b]`:
//! exact background and perturbed potentials, the power gap, its real and
//! imaginary closed forms, and the non-uniqueness example.
//!
//! Conventions. Both potentials carry the normalization `u(-1) + u(1) = 0`
//! and constant flux `γ u' = K`. With `F_j(x) = ∫_{-1}^x K/γ_j` and the jump
//! `S = ∫_a^b K (1/γ₁ - 1/γ₀)`, the perturbed potential is the continuous
//! piecewise antiderivative with additive constants `-S/2`, interface values,
//! and `+S/2` on the three branches; the printed three-branch display that
//! omits the left-branch constant is not continuous and breaks the
//! normalization, so the continuous solution is used here. The module's gap
//! is `δW = K·conj(u₁(1) - u₀(1)) = (|K|²/2)∫_a^b conj(1/γ₁ - 1/γ₀)`, which
//! is the arbiter identity tying the branch display to the gap formula. Note
//! the physical two-endpoint power gap on `(-1, 1)` is twice this quantity;
//! cross-checks against 2D solves on the unit square absorb the factor through
//! the affine stretch `x = 2x₁ - 1` (see `quasi_one_d` in the sweep harness).

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::C64;

/// Absolute quadrature target for the antiderivatives.
const QUAD_TOL: f64 = 1e-13;

/// Complex polynomial coefficient `γ(x) = Σ c_k x^k` on `[-1, 1]`.
///
/// Covers the constant, affine, and squared-linear coefficients of the 1D
/// theory; evaluation is Horner's rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient1d {
    coeffs: Vec<C64>,
}

impl Coefficient1d {
    pub fn constant(c: C64) -> Self {
        Self {
            coeffs: alloc::vec![c],
        }
    }

    /// `a + b x`.
    pub fn affine(a: C64, b: C64) -> Self {
        Self {
            coeffs: alloc::vec![a, b],
        }
    }

    /// Arbitrary polynomial, low degree first.
    pub fn poly(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    /// `(α + iβx)²`, the non-uniqueness example family.
    pub fn squared_imaginary_linear(alpha: f64, beta: f64) -> Self {
        // (α + iβx)² = α² + 2iαβ x − β² x²
        Self {
            coeffs: alloc::vec![
                C64::new(alpha * alpha, 0.0),
                C64::new(0.0, 2.0 * alpha * beta),
                C64::new(-beta * beta, 0.0),
            ],
        }
    }

    pub fn eval(&self, x: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// The polynomial `x ↦ p(a + b x)`, expanded.
    ///
    /// Pulls a coefficient given on one interval back to another through an
    /// affine chart; used to map unit-square strip configurations onto
    /// `(-1, 1)`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Self {
        let mut out = alloc::vec![C64::new(0.0, 0.0); self.coeffs.len()];
        // Horner in the composed variable: out(x) <- out(x)·(a + bx) + c_k.
        for c in self.coeffs.iter().rev() {
            let mut next = alloc::vec![C64::new(0.0, 0.0); out.len()];
            for (k, v) in out.iter().enumerate() {
                next[k] += v * a;
                if k + 1 < next.len() {
                    next[k + 1] += v * b;
                }
            }
            next[0] += c;
            out = next;
        }
        Self { coeffs: out }
    }
}

/// The 1D two-phase problem on `(-1, 1)`.
#[derive(Clone, Debug)]
pub struct OneDProblem {
    gamma0: Coefficient1d,
    gamma1: Coefficient1d,
    a: f64,
    b: f64,
    flux: C64,
}

impl OneDProblem {
    pub fn new(
        gamma0: Coefficient1d,
        gamma1: Coefficient1d,
        a: f64,
        b: f64,
        flux: C64,
    ) -> Result<Self> {
        if !(-1.0 < a && a < b && b < 1.0) {
            return Err(Error::InvalidArgument(
                "inclusion interval must satisfy -1 < a < b < 1".into(),
            ));
        }
        // Dissipativity Re γ ≥ c₀ > 0, sampled densely.
        for coef in [&gamma0, &gamma1] {
            let mut min_re = f64::INFINITY;
            for k in 0..=1024 {
                let x = -1.0 + 2.0 * k as f64 / 1024.0;
                min_re = min_re.min(coef.eval(x).re);
            }
            if min_re <= 0.0 {
                return Err(Error::InvalidCoefficient(
                    "Re γ must be positive on (-1, 1)".into(),
                ));
            }
        }
        Ok(Self {
            gamma0,
            gamma1,
            a,
            b,
            flux,
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn flux(&self) -> C64 {
        self.flux
    }

    pub fn gamma0(&self) -> &Coefficient1d {
        &self.gamma0
    }

    pub fn gamma1(&self) -> &Coefficient1d {
        &self.gamma1
    }

    /// `F₀(x) = ∫_{-1}^x K/γ₀`.
    fn f0(&self, x: f64) -> Result<C64> {
        let k = self.flux;
        integrate_adaptive(&|t| k / self.gamma0.eval(t), -1.0, x, QUAD_TOL)
    }

    /// `F₁(x) = ∫_{-1}^x K/γ₁`.
    fn f1(&self, x: f64) -> Result<C64> {
        let k = self.flux;
        integrate_adaptive(&|t| k / self.gamma1.eval(t), -1.0, x, QUAD_TOL)
    }

    /// The jump integral `S = ∫_a^b K (1/γ₁ - 1/γ₀)`.
    fn jump(&self) -> Result<C64> {
        let k = self.flux;
        integrate_adaptive(
            &|t| k * (1.0 / self.gamma1.eval(t) - 1.0 / self.gamma0.eval(t)),
            self.a,
            self.b,
            QUAD_TOL,
        )
    }
}

/// Background potential `u₀(x) = F₀(x) + M`, `M = -(F₀(1) + F₀(-1))/2`.
pub fn solve_1d_background(p: &OneDProblem, x: f64) -> Result<C64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument("x outside [-1, 1]".into()));
    }
    let m = -(p.f0(1.0)? + p.f0(-1.0)?) / 2.0;
    Ok(p.f0(x)? + m)
}

/// Perturbed potential: the continuous piecewise antiderivative with
/// `u₁(-1) + u₁(1) = 0` and flux `γ u₁' = K` across the interfaces.
pub fn solve_1d_perturbed(p: &OneDProblem, x: f64) -> Result<C64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument("x outside [-1, 1]".into()));
    }
    let m = -(p.f0(1.0)? + p.f0(-1.0)?) / 2.0;
    let s = p.jump()?;
    let (a, b) = (p.a, p.b);
    let value = if x <= a {
        p.f0(x)? + m - s / 2.0
    } else if x < b {
        let interface = p.f0(a)? + m - s / 2.0;
        interface + (p.f1(x)? - p.f1(a)?)
    } else {
        p.f0(x)? + m + s / 2.0
    };
    Ok(value)
}

/// The 1D power gap `δW = (|K|²/2) ∫_a^b conj(1/γ₁ - 1/γ₀) dx`.
///
/// Agrees with `K·conj(u₁(1) - u₀(1))` by construction of the branches.
pub fn power_gap_1d(p: &OneDProblem) -> Result<C64> {
    let s = p.jump()?;
    Ok(p.flux * s.conj() / 2.0)
}

/// Real/imaginary closed forms of the gap.
#[derive(Clone, Copy, Debug)]
pub struct GapParts {
    pub re: f64,
    pub im: f64,
}

/// Quadrature of the two displayed integrands
/// `Re δW = (|K|²/2)∫(σ₁/|γ₁|² - σ₀/|γ₀|²)` and
/// `Im δW = (|K|²/2)∫(ε₁/|γ₁|² - ε₀/|γ₀|²)`, signed so that they match the
/// real and imaginary parts of [`power_gap_1d`].
pub fn re_im_gap_formulas(p: &OneDProblem) -> Result<GapParts> {
    let k2 = p.flux.norm_sqr();
    let re = integrate_adaptive(
        &|t| {
            let g0 = p.gamma0.eval(t);
            let g1 = p.gamma1.eval(t);
            C64::new(g1.re / g1.norm_sqr() - g0.re / g0.norm_sqr(), 0.0)
        },
        p.a,
        p.b,
        QUAD_TOL,
    )?;
    let im = integrate_adaptive(
        &|t| {
            let g0 = p.gamma0.eval(t);
            let g1 = p.gamma1.eval(t);
            C64::new(g1.im / g1.norm_sqr() - g0.im / g0.norm_sqr(), 0.0)
        },
        p.a,
        p.b,
        QUAD_TOL,
    )?;
    Ok(GapParts {
        re: k2 / 2.0 * re.re,
        im: k2 / 2.0 * im.re,
    })
}

/// The non-uniqueness pair `γ₀ = (2 + ix)²`, `γ₁ = 17/4`.
pub fn non_uniqueness_problem(a: f64, b: f64, flux: C64) -> Result<OneDProblem> {
    OneDProblem::new(
        Coefficient1d::squared_imaginary_linear(2.0, 1.0),
        Coefficient1d::constant(C64::new(17.0 / 4.0, 0.0)),
        a,
        b,
        flux,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_coefficient_gives_identity_potential() {
        let p = OneDProblem::new(
            Coefficient1d::constant(c(1.0, 0.0)),
            Coefficient1d::constant(c(2.0, 0.0)),
            0.0,
            0.5,
            c(1.0, 0.0),
        )
        .unwrap();
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let u = solve_1d_background(&p, x).unwrap();
            assert!((u - c(x, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn matched_complex_flux_gives_identity_potential() {
        let p = OneDProblem::new(
            Coefficient1d::constant(c(1.0, 1.0)),
            Coefficient1d::constant(c(2.0, 0.0)),
            -0.5,
            0.5,
            c(1.0, 1.0),
        )
        .unwrap();
        for x in [-1.0, 0.2, 1.0] {
            let u = solve_1d_background(&p, x).unwrap();
            assert!((u - c(x, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn curved_background_satisfies_normalization_and_flux() {
        let p = non_uniqueness_problem(-0.5, 0.5, c(1.0, 0.0)).unwrap();
        let u_m = solve_1d_background(&p, -1.0).unwrap();
        let u_p = solve_1d_background(&p, 1.0).unwrap();
        assert!((u_m + u_p).norm() < 1e-12);
        // Flux γ₀ u₀' = K at both endpoints by Richardson central differences.
        for x0 in [-1.0f64, 1.0] {
            let h = 1e-3;
            let d = |hh: f64| {
                let a = solve_1d_background_unclamped(&p, x0 + hh);
                let b = solve_1d_background_unclamped(&p, x0 - hh);
                (a - b) / (2.0 * hh)
            };
            let deriv = (d(h / 2.0) * 4.0 - d(h)) / 3.0;
            let flux = p.gamma0().eval(x0) * deriv;
            assert!(
                (flux - c(1.0, 0.0)).norm() < 1e-10,
                "flux at {x0}: {flux}"
            );
        }
    }

    // Richardson differentiation needs evaluations slightly outside the
    // closed interval; the antiderivative extends smoothly.
    fn solve_1d_background_unclamped(p: &OneDProblem, x: f64) -> C64 {
        let m = -(p.f0(1.0).unwrap() + p.f0(-1.0).unwrap()) / 2.0;
        p.f0(x).unwrap() + m
    }

    #[test]
    fn evaluation_outside_the_interval_is_rejected() {
        let p = OneDProblem::new(
            Coefficient1d::constant(c(1.0, 0.0)),
            Coefficient1d::constant(c(2.0, 0.0)),
            0.0,
            0.5,
            c(1.0, 0.0),
        )
        .unwrap();
        assert!(matches!(
            solve_1d_background(&p, 1.5),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            solve_1d_perturbed(&p, -1.01),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            OneDProblem::new(
                Coefficient1d::constant(c(1.0, 0.0)),
                Coefficient1d::constant(c(2.0, 0.0)),
                0.5,
                0.1,
                c(1.0, 0.0),
            ),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn equal_coefficients_make_u1_equal_u0() {
        let gamma = Coefficient1d::affine(c(1.5, 0.2), c(0.1, 0.0));
        let p = OneDProblem::new(gamma.clone(), gamma, -0.2, 0.4, c(1.0, -0.5)).unwrap();
        for x in [-0.9, -0.2, 0.1, 0.4, 0.8] {
            let u0 = solve_1d_background(&p, x).unwrap();
            let u1 = solve_1d_perturbed(&p, x).unwrap();
            assert!((u0 - u1).norm() < 1e-12);
        }
    }

    #[test]
    fn perturbed_potential_is_continuous_at_interfaces() {
        let p = OneDProblem::new(
            Coefficient1d::affine(c(1.0, 0.3), c(0.2, -0.1)),
            Coefficient1d::constant(c(2.5, 0.7)),
            -0.35,
            0.55,
            c(1.0, 0.25),
        )
        .unwrap();
        for x0 in [p.interval().0, p.interval().1] {
            let eps = 1e-9;
            let left = solve_1d_perturbed(&p, x0 - eps).unwrap();
            let right = solve_1d_perturbed(&p, x0 + eps).unwrap();
            assert!((left - right).norm() < 1e-7, "jump at {x0}");
        }
        // And the normalization holds.
        let u_m = solve_1d_perturbed(&p, -1.0).unwrap();
        let u_p = solve_1d_perturbed(&p, 1.0).unwrap();
        assert!((u_m + u_p).norm() < 1e-12);
    }

    #[test]
    fn step_conductor_frozen_values() {
        // γ₀ = 1, γ₁ = 2, [a,b] = [0, 1/2], K = 1.
        let p = OneDProblem::new(
            Coefficient1d::constant(c(1.0, 0.0)),
            Coefficient1d::constant(c(2.0, 0.0)),
            0.0,
            0.5,
            c(1.0, 0.0),
        )
        .unwrap();
        let dw = power_gap_1d(&p).unwrap();
        assert!((dw - c(-0.125, 0.0)).norm() < 1e-13, "δW = {dw}");
        // u₁(1) − u₀(1) = conj(δW)/K̄ = −1/8.
        let d1 = solve_1d_perturbed(&p, 1.0).unwrap() - solve_1d_background(&p, 1.0).unwrap();
        assert!((d1 - c(-0.125, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn complex_inclusion_frozen_value() {
        // γ₀ = 1, γ₁ = 1+i, [−1/2, 1/2], K = 1 → conj(−1/2 − i/2)/2.
        let p = OneDProblem::new(
            Coefficient1d::constant(c(1.0, 0.0)),
            Coefficient1d::constant(c(1.0, 1.0)),
            -0.5,
            0.5,
            c(1.0, 0.0),
        )
        .unwrap();
        let dw = power_gap_1d(&p).unwrap();
        assert!((dw - c(-0.25, 0.25)).norm() < 1e-13, "δW = {dw}");
    }

    #[test]
    fn non_uniqueness_example_hides_the_inclusion() {
        let p = non_uniqueness_problem(-0.5, 0.5, c(1.0, 0.0)).unwrap();
        let dw = power_gap_1d(&p).unwrap();
        assert!(dw.norm() <= 1e-12, "δW = {dw}");
        let parts = re_im_gap_formulas(&p).unwrap();
        assert!(parts.re.abs() <= 1e-12);
        assert!(parts.im.abs() <= 1e-12);
    }

    #[test]
    fn closed_form_display_of_non_uniqueness_pair() {
        // For γ₀=(2+ix)², γ₁=17/4 the Re part is
        // (|K|²/2)(b−a)(4/17 − (4−ab)/((4+b²)(4+a²))) and the Im part is
        // (|K|²/2)(b−a)(−2(a+b)/((4+b²)(4+a²))), by the primitives
        // x/(4+x²) and −2/(4+x²).
        let (a, b) = (0.1, 0.6);
        let p = non_uniqueness_problem(a, b, c(1.3, -0.4)).unwrap();
        let k2 = c(1.3, -0.4).norm_sqr();
        let display_re = k2 / 2.0
            * ((b - a) * 4.0 / 17.0 - (b / (4.0 + b * b) - a / (4.0 + a * a)));
        let display_im = k2 / 2.0 * (2.0 / (4.0 + b * b) - 2.0 / (4.0 + a * a));
        let parts = re_im_gap_formulas(&p).unwrap();
        assert!((parts.re - display_re).abs() < 1e-12);
        assert!((parts.im - display_im).abs() < 1e-12);
        // Sanity: the symmetric interval variant lands at a pure-imaginary
        // gap of magnitude |K|²/68.
        let q = non_uniqueness_problem(0.0, 0.5, c(1.0, 0.0)).unwrap();
        let dw = power_gap_1d(&q).unwrap();
        assert!(dw.re.abs() < 1e-13);
        assert!((dw.im - (-1.0 / 68.0)).abs() < 1e-13, "Im = {}", dw.im);
    }

    #[test]
    fn gap_formulas_match_gap_on_random_intervals() {
        let mut rng = SplitMix64::new(0x0ED1);
        for _ in 0..10 {
            let a = rng.next_range(-0.95, 0.8);
            let b = rng.next_range(a + 0.02, 0.98);
            let p = non_uniqueness_problem(a, b, c(1.0, 0.5)).unwrap();
            let dw = power_gap_1d(&p).unwrap();
            let parts = re_im_gap_formulas(&p).unwrap();
            assert!((parts.re - dw.re).abs() <= 1e-10);
            assert!((parts.im - dw.im).abs() <= 1e-10);
        }
    }

    #[test]
    fn oracle_consistency_gap_equals_endpoint_difference() {
        let mut rng = SplitMix64::new(0xBEEF);
        for _ in 0..8 {
            let a = rng.next_range(-0.8, 0.3);
            let b = rng.next_range(a + 0.05, 0.9);
            let p = OneDProblem::new(
                Coefficient1d::affine(c(1.2, 0.1), c(rng.next_range(-0.2, 0.2), 0.05)),
                Coefficient1d::affine(c(2.0, -0.4), c(0.0, rng.next_range(-0.1, 0.1))),
                a,
                b,
                c(rng.next_range(0.5, 1.5), rng.next_range(-0.5, 0.5)),
            )
            .unwrap();
            let dw = power_gap_1d(&p).unwrap();
            let d1 = solve_1d_perturbed(&p, 1.0).unwrap() - solve_1d_background(&p, 1.0).unwrap();
            let oracle = p.flux() * d1.conj();
            assert!((dw - oracle).norm() <= 1e-10, "gap {dw} vs oracle {oracle}");
        }
    }

    #[test]
    fn real_resistive_inclusion_sign() {
        // ε ≡ 0 and σ₁ > σ₀: the effective admittance rises, so Re δW < 0
        // and Im δW = 0.
        let p = OneDProblem::new(
            Coefficient1d::constant(c(1.0, 0.0)),
            Coefficient1d::affine(c(2.0, 0.0), c(0.3, 0.0)),
            -0.4,
            0.2,
            c(1.0, 0.0),
        )
        .unwrap();
        let parts = re_im_gap_formulas(&p).unwrap();
        assert!(parts.re < 0.0);
        assert!(parts.im.abs() < 1e-13);
    }

    #[test]
    fn component_monotonicity_in_b() {
        // Strict pointwise monotonicity condition on the σ-quotient makes the
        // corresponding gap component strictly monotone in b.
        let p_of_b = |b: f64| {
            OneDProblem::new(
                Coefficient1d::constant(c(1.0, 0.0)),
                Coefficient1d::constant(c(2.0, 0.5)),
                -0.5,
                b,
                c(1.0, 0.0),
            )
            .unwrap()
        };
        let mut last = 0.0;
        let mut last_abs = 0.0;
        for (i, b) in [-0.2, 0.0, 0.3, 0.6, 0.9].iter().enumerate() {
            let dw = power_gap_1d(&p_of_b(*b)).unwrap();
            if i > 0 {
                assert!(dw.re < last, "Re δW not strictly decreasing");
                assert!(dw.norm() >= last_abs, "|δW| decreased");
            }
            last = dw.re;
            last_abs = dw.norm();
        }
    }
}
