//! Power gaps, exact discrete energy identities, and explicit energy bounds.
//!
//! Everything here is an algebraic consequence of the Galerkin property
//! `a_γ(u, v) = ∮ h v̄` for discrete test functions, so the identity residuals
//! sit at the algebraic residual of the solves, not at discretization error.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{gradient_energy_weighted, AdmittivityField, ComplexField, Regime};
use crate::geometry::{InclusionMask, MeshTopology};
use crate::C64;

/// Background/perturbed coefficient configuration of one experiment.
///
/// `perturbed` is the combined field (background off the inclusion, inclusion
/// value on it); the background field keeps its values on the inclusion cells
/// so that difference integrals are computable.
#[derive(Clone, Debug)]
pub struct CoefficientPair {
    pub background: AdmittivityField,
    pub perturbed: AdmittivityField,
}

impl CoefficientPair {
    pub fn new(background: AdmittivityField, perturbed: AdmittivityField) -> Result<Self> {
        if background.values().len() != perturbed.values().len() {
            return Err(Error::InvalidArgument(
                "coefficient fields live on different meshes".into(),
            ));
        }
        Ok(Self {
            background,
            perturbed,
        })
    }

    pub fn regime(&self) -> Regime {
        self.perturbed.regime()
    }

    /// `γ₁ − γ₀` on a cell.
    pub fn jump(&self, cell: usize) -> C64 {
        self.perturbed.gamma(cell) - self.background.gamma(cell)
    }

    /// `sup_D |γ₁ − γ₀|` over the mask cells.
    pub fn sup_jump(&self, mask: &InclusionMask) -> f64 {
        mask.cells()
            .iter()
            .map(|&c| self.jump(c).norm())
            .fold(0.0, f64::max)
    }

    /// The largest `μ0` the real-background alternative supports on the mask:
    /// `max(inf |ε₁|, inf (σ₁ − σ₀))`, or an error when neither is positive.
    pub fn variable_mu0(&self, mask: &InclusionMask) -> Result<f64> {
        if mask.is_empty() {
            return Err(Error::InvalidRegime("empty inclusion".into()));
        }
        let mut inf_eps = f64::INFINITY;
        let mut inf_sigma_gap = f64::INFINITY;
        for &c in mask.cells() {
            inf_eps = inf_eps.min(self.perturbed.gamma(c).im.abs());
            inf_sigma_gap =
                inf_sigma_gap.min(self.perturbed.gamma(c).re - self.background.gamma(c).re);
        }
        let mu0 = inf_eps.max(inf_sigma_gap);
        if mu0 > 0.0 {
            Ok(mu0)
        } else {
            Err(Error::InvalidRegime(
                "neither |ε₁| nor σ₁ − σ₀ is bounded below on the inclusion".into(),
            ))
        }
    }

    /// The largest `c0` valid for both fields: `min(σ, 1/|γ|)` over all data.
    pub fn data_c0(&self) -> f64 {
        self.background
            .largest_valid_c0()
            .min(self.perturbed.largest_valid_c0())
    }

    /// `|γ₁ − γ₀|` of a constant pair.
    pub fn constant_mu0(&self, mask: &InclusionMask) -> Result<f64> {
        let g0 = self
            .background
            .is_constant()
            .ok_or_else(|| Error::InvalidRegime("background is not constant".into()))?;
        let g1 = mask
            .cells()
            .first()
            .map(|&c| self.perturbed.gamma(c))
            .ok_or_else(|| Error::InvalidRegime("empty inclusion".into()))?;
        for &c in mask.cells() {
            if self.perturbed.gamma(c) != g1 {
                return Err(Error::InvalidRegime(
                    "inclusion coefficient is not constant".into(),
                ));
            }
        }
        Ok((g1 - g0).norm())
    }
}

/// Powers, gap, and the rotated gap of one configuration.
#[derive(Clone, Copy, Debug)]
pub struct PowerReport {
    /// `W₀ = ∮ h ū₀`, boundary evaluation.
    pub w0: C64,
    /// `W₁ = ∮ h ū₁`, boundary evaluation.
    pub w1: C64,
    pub delta_w: C64,
    /// `δV = δW − 2iγ₀ Im(δW/γ₀)`; constant regime only.
    pub delta_v: Option<C64>,
    /// `∫_D |∇u₀|²`.
    pub energy_d: f64,
    /// Volume evaluations `∫ γ₀ |∇u₀|²`, `∫ γ |∇u₁|²`.
    pub w0_volume: C64,
    pub w1_volume: C64,
    /// Residual scale `max(|W₀|, ∫_Ω |∇u₀|²)`.
    pub scale: f64,
}

impl PowerReport {
    /// Boundary/volume consistency of the weak form, relative to the scale.
    pub fn weak_form_consistency(&self) -> f64 {
        let a = (self.w0 - self.w0_volume).norm();
        let b = (self.w1 - self.w1_volume).norm();
        a.max(b) / self.scale
    }
}

/// Identity names in ledger order. The `*`-identities of the real-background
/// regime are spelled with an `s` suffix.
pub const IDENTITY_NAMES: [&str; 12] = [
    "id1", "id2", "id3", "id4", "loc", "id1c", "id2c", "id3c", "id4c", "id1s", "id2s", "id3s",
];

/// One verified identity.
#[derive(Clone, Copy, Debug)]
pub struct IdentityEntry {
    pub name: &'static str,
    pub residual: f64,
    pub applicable: bool,
}

/// Relative residuals of the energy identities.
#[derive(Clone, Debug)]
pub struct IdentityLedger {
    entries: Vec<IdentityEntry>,
    pub scale: f64,
}

impl IdentityLedger {
    pub fn entries(&self) -> &[IdentityEntry] {
        &self.entries
    }

    pub fn residual(&self, name: &str) -> Option<&IdentityEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Largest residual among applicable identities.
    pub fn max_applicable(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.applicable)
            .map(|e| e.residual)
            .fold(0.0, f64::max)
    }
}

fn relative_residual(lhs: C64, rhs: C64, scale: f64) -> f64 {
    (lhs - rhs).norm() / (lhs.norm() + rhs.norm() + scale)
}

/// `∮ h ū` as the exact dual pairing of the assembled load with the trace.
pub fn boundary_power(load: &[C64], u: &ComplexField) -> C64 {
    load.iter()
        .zip(u.values())
        .map(|(l, v)| l * v.conj())
        .sum()
}

/// Computes `W₀`, `W₁`, `δW`, `δV`, and the inclusion energy.
pub fn compute_powers(
    mesh: &MeshTopology,
    u0: &ComplexField,
    u1: &ComplexField,
    load: &[C64],
    pair: &CoefficientPair,
    mask: &InclusionMask,
) -> Result<PowerReport> {
    u0.check_mesh(mesh)?;
    u1.check_mesh(mesh)?;
    let w0 = boundary_power(load, u0);
    let w1 = boundary_power(load, u1);
    let delta_w = w1 - w0;
    let w0_volume = gradient_energy_weighted(mesh, u0, u0, None, |c| pair.background.gamma(c))?;
    let w1_volume = gradient_energy_weighted(mesh, u1, u1, None, |c| pair.perturbed.gamma(c))?;
    let energy_d = gradient_energy_weighted(mesh, u0, u0, Some(mask), |_| C64::new(1.0, 0.0))?.re;
    let dirichlet = gradient_energy_weighted(mesh, u0, u0, None, |_| C64::new(1.0, 0.0))?.re;
    let scale = w0.norm().max(dirichlet);
    let delta_v = match pair.regime() {
        Regime::ConstantPair => {
            let g0 = pair.background.is_constant().ok_or_else(|| {
                Error::InvalidRegime("constant regime with non-constant background".into())
            })?;
            let ratio = delta_w / g0;
            Some(delta_w - C64::new(0.0, 2.0) * g0 * ratio.im)
        }
        _ => None,
    };
    Ok(PowerReport {
        w0,
        w1,
        delta_w,
        delta_v,
        energy_d,
        w0_volume,
        w1_volume,
        scale,
    })
}

/// Evaluates the residuals of every identity applicable to the regime.
pub fn identity_residuals(
    mesh: &MeshTopology,
    u0: &ComplexField,
    u1: &ComplexField,
    load: &[C64],
    pair: &CoefficientPair,
    mask: &InclusionMask,
) -> Result<IdentityLedger> {
    u0.check_mesh(mesh)?;
    u1.check_mesh(mesh)?;
    let report = compute_powers(mesh, u0, u1, load, pair, mask)?;
    let scale = report.scale;
    let dw = report.delta_w;
    let two_i = C64::new(0.0, 2.0);

    let diff = ComplexField::from_values(
        mesh,
        u0.values()
            .iter()
            .zip(u1.values())
            .map(|(a, b)| b - a)
            .collect(),
    )?;

    // ∫ γ |∇(u1-u0)|² and ∫ γ₀ |∇(u1-u0)|²
    let t_gamma_diff =
        gradient_energy_weighted(mesh, &diff, &diff, None, |c| pair.perturbed.gamma(c))?;
    let t_gamma0_diff =
        gradient_energy_weighted(mesh, &diff, &diff, None, |c| pair.background.gamma(c))?;
    // ∫_D (γ1-γ0)|∇u0|², ∫_D (γ1-γ0)|∇u1|²
    let t_jump_u0 = gradient_energy_weighted(mesh, u0, u0, Some(mask), |c| pair.jump(c))?;
    let t_jump_u1 = gradient_energy_weighted(mesh, u1, u1, Some(mask), |c| pair.jump(c))?;
    // Im(∇u1·∇ū0) against γ, γ₀, and (γ1-γ0) on D.
    let weighted_im = |cells: Option<&InclusionMask>, w: &dyn Fn(usize) -> C64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut add = |cell: usize| {
            let g1 = u1.gradient(mesh, cell);
            let g0 = u0.gradient(mesh, cell);
            let dot = g1[0] * g0[0].conj() + g1[1] * g0[1].conj();
            acc += w(cell) * (mesh.cell_area(cell) * dot.im);
        };
        match cells {
            Some(m) => m.cells().iter().for_each(|&c| add(c)),
            None => (0..mesh.n_cells()).for_each(add),
        }
        acc
    };
    let t_im_gamma = weighted_im(None, &|c| pair.perturbed.gamma(c));
    let t_im_gamma0 = weighted_im(None, &|c| pair.background.gamma(c));
    let t_im_jump = weighted_im(Some(mask), &|c| pair.jump(c));
    // ∫_D (γ0-γ1) ∇u1·∇ū0 and ∫_D (γ1-γ0) ∇u0·∇ū1
    let t_cross_10 = gradient_energy_weighted(mesh, u1, u0, Some(mask), |c| -pair.jump(c))?;
    let t_cross_01 = gradient_energy_weighted(mesh, u0, u1, Some(mask), |c| pair.jump(c))?;
    // (loc) right side ∫_D (γ0-γ1) ∇(ū1-ū0)·∇u0, written as a conjugate of a
    // weighted energy so the one quadrature path serves it too.
    let t_loc_rhs =
        gradient_energy_weighted(mesh, &diff, u0, Some(mask), |c| -pair.jump(c).conj())?.conj();

    let mut entries = Vec::with_capacity(IDENTITY_NAMES.len());
    let mut push = |name: &'static str, lhs: C64, rhs: C64, applicable: bool| {
        entries.push(IdentityEntry {
            name,
            residual: if applicable {
                relative_residual(lhs, rhs, scale)
            } else {
                0.0
            },
            applicable,
        });
    };

    push("id1", t_gamma_diff - t_jump_u0, dw + two_i * t_im_gamma, true);
    push(
        "id2",
        t_gamma0_diff + t_jump_u1,
        -dw - two_i * t_im_gamma0,
        true,
    );
    push("id3", t_cross_10, dw + two_i * t_im_gamma0, true);
    push("id4", t_cross_01, -dw - two_i * t_im_gamma, true);
    push("loc", t_gamma_diff, t_loc_rhs, true);

    let constant_ok = pair.regime() == Regime::ConstantPair && report.delta_v.is_some();
    let dv = report.delta_v.unwrap_or(C64::new(0.0, 0.0));
    push(
        "id1c",
        t_gamma_diff - t_jump_u0,
        two_i * t_im_jump + dv,
        constant_ok,
    );
    push("id2c", t_gamma0_diff + t_jump_u1, -dv, constant_ok);
    push("id3c", t_cross_10, dv, constant_ok);
    push("id4c", t_cross_01, -two_i * t_im_jump - dv, constant_ok);

    let star_ok = pair.background.is_real();
    let dw_conj = dw.conj();
    push(
        "id1s",
        t_gamma_diff - t_jump_u0,
        dw_conj + two_i * t_im_jump,
        star_ok,
    );
    push("id2s", t_gamma0_diff + t_jump_u1, -dw_conj, star_ok);
    push("id3s", t_cross_10, dw_conj, star_ok);

    Ok(IdentityLedger { entries, scale })
}

/// Outcome of the constant-pair two-sided energy bound.
#[derive(Clone, Copy, Debug)]
pub struct ConstantBoundCheck {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Checks `c₀|δW|/((c₀+μ₀)μ₀) ≤ ∫_D|∇u₀|² ≤ (1/c₀ + 2/μ₀)|δW|` with the
/// supplied constants; slack is `1e-9` of the report scale.
pub fn bound_check_constant_with(
    report: &PowerReport,
    c0: f64,
    mu0: f64,
) -> Result<ConstantBoundCheck> {
    if !(mu0 > 0.0) {
        return Err(Error::InvalidRegime(
            "constant bound needs |γ₁-γ₀| > 0".into(),
        ));
    }
    let dw = report.delta_w.norm();
    let lower = c0 * dw / ((c0 + mu0) * mu0);
    let upper = (1.0 / c0 + 2.0 / mu0) * dw;
    let mid = report.energy_d;
    let slack = 1e-9 * report.scale;
    Ok(ConstantBoundCheck {
        lower,
        mid,
        upper,
        holds: lower <= mid + slack && mid <= upper + slack,
    })
}

/// Constant-pair bound with constants taken from the coefficient data.
pub fn bound_check_constant(
    report: &PowerReport,
    pair: &CoefficientPair,
    mask: &InclusionMask,
) -> Result<ConstantBoundCheck> {
    if pair.regime() != Regime::ConstantPair {
        return Err(Error::InvalidRegime(
            "constant bound requires the constant-pair regime".into(),
        ));
    }
    let mu0 = pair.constant_mu0(mask)?;
    bound_check_constant_with(report, pair.data_c0(), mu0)
}

/// Outcome of the variable-coefficient two-sided energy bound.
#[derive(Clone, Copy, Debug)]
pub struct VariableBoundCheck {
    pub k1: f64,
    pub k2: f64,
    pub mid: f64,
    pub holds: bool,
}

/// The explicit constants `K₁ = c₀³/(2(2+c₀²))`, `K₂ = 2(1/(μ₀c₀²)+1/μ₀+1/c₀)`.
pub fn variable_bound_constants(c0: f64, mu0: f64) -> (f64, f64) {
    (
        c0.powi(3) / (2.0 * (2.0 + c0 * c0)),
        2.0 * (1.0 / (mu0 * c0 * c0) + 1.0 / mu0 + 1.0 / c0),
    )
}

/// Checks `K₁|δW| ≤ ∫_D|∇u₀|² ≤ K₂|δW|` with the supplied constants.
pub fn bound_check_variable_with(
    report: &PowerReport,
    c0: f64,
    mu0: f64,
) -> Result<VariableBoundCheck> {
    if !(mu0 > 0.0) {
        return Err(Error::InvalidRegime("variable bound needs μ₀ > 0".into()));
    }
    let (k1, k2) = variable_bound_constants(c0, mu0);
    let dw = report.delta_w.norm();
    let mid = report.energy_d;
    let slack = 1e-9 * report.scale;
    Ok(VariableBoundCheck {
        k1,
        k2,
        mid,
        holds: k1 * dw <= mid + slack && mid <= k2 * dw + slack,
    })
}

/// Variable bound with `μ₀` verified cell-wise from the coefficient data
/// (either `|ε₁| ≥ μ₀` or `σ₁ − σ₀ ≥ μ₀` throughout the inclusion).
pub fn bound_check_variable(
    report: &PowerReport,
    pair: &CoefficientPair,
    mask: &InclusionMask,
) -> Result<VariableBoundCheck> {
    if pair.regime() != Regime::RealBackground || !pair.background.is_real() {
        return Err(Error::InvalidRegime(
            "variable bound requires a real Lipschitz background".into(),
        ));
    }
    let mu0 = pair.variable_mu0(mask)?;
    bound_check_variable_with(report, pair.data_c0(), mu0)
}
