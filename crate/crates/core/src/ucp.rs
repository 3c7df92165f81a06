//! Quantitative unique-continuation diagnostics: the Almgren frequency
//! function, three-spheres and doubling ratios, Lipschitz
//! propagation-of-smallness scans, fractional boundary norms, and the
//! mask-bound constants they feed.
//!
//! The inequalities behind these diagnostics hold with constants that are not
//! explicit, so the checks report measured ratios; equality cases (harmonic
//! homogeneous polynomials) make them falsifiable.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::{AdmittivityField, BoundaryCurrent, ComplexField};
use crate::geometry::{interior_offset, BoundaryChart, InclusionMask, MeshTopology, Point};
use crate::quadrature::gauss_legendre;
use crate::C64;

/// Point-evaluable complex field with a gradient.
pub trait PointField {
    fn value(&self, p: Point) -> C64;
    fn gradient(&self, p: Point) -> [C64; 2];
}

/// `Re((x + iy)^k)`: harmonic, homogeneous of degree `k`.
#[derive(Clone, Copy, Debug)]
pub struct HarmonicMonomial {
    pub degree: u32,
}

impl PointField for HarmonicMonomial {
    fn value(&self, p: Point) -> C64 {
        let z = C64::new(p[0], p[1]);
        C64::new(z.powu(self.degree).re, 0.0)
    }

    fn gradient(&self, p: Point) -> [C64; 2] {
        let k = self.degree;
        if k == 0 {
            return [C64::new(0.0, 0.0); 2];
        }
        let z = C64::new(p[0], p[1]);
        let d = z.powu(k - 1) * k as f64;
        [C64::new(d.re, 0.0), C64::new(-d.im, 0.0)]
    }
}

/// Closure-backed analytic field.
pub struct FnField<V, G>
where
    V: Fn(Point) -> C64,
    G: Fn(Point) -> [C64; 2],
{
    pub value: V,
    pub gradient: G,
}

impl<V, G> PointField for FnField<V, G>
where
    V: Fn(Point) -> C64,
    G: Fn(Point) -> [C64; 2],
{
    fn value(&self, p: Point) -> C64 {
        (self.value)(p)
    }

    fn gradient(&self, p: Point) -> [C64; 2] {
        (self.gradient)(p)
    }
}

/// Uniform-grid bucket index for point-in-cell queries.
pub struct CellLocator {
    lo: Point,
    inv_step: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl CellLocator {
    pub fn new(mesh: &MeshTopology) -> Self {
        let verts = mesh.vertices();
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in verts {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let n = ((mesh.n_cells() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let dims = [n, n];
        let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
        let inv_step = [dims[0] as f64 / span[0], dims[1] as f64 / span[1]];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        let clampi = |v: f64, max: usize| -> usize {
            if v < 0.0 {
                0
            } else if v as usize >= max {
                max - 1
            } else {
                v as usize
            }
        };
        for c in 0..mesh.n_cells() {
            let idx = mesh.cells()[c];
            let mut clo = [f64::INFINITY; 2];
            let mut chi = [f64::NEG_INFINITY; 2];
            for &v in &idx {
                for d in 0..2 {
                    clo[d] = clo[d].min(verts[v][d]);
                    chi[d] = chi[d].max(verts[v][d]);
                }
            }
            let i0 = clampi((clo[0] - lo[0]) * inv_step[0], dims[0]);
            let i1 = clampi((chi[0] - lo[0]) * inv_step[0], dims[0]);
            let j0 = clampi((clo[1] - lo[1]) * inv_step[1], dims[1]);
            let j1 = clampi((chi[1] - lo[1]) * inv_step[1], dims[1]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * dims[0] + i].push(c);
                }
            }
        }
        Self {
            lo,
            inv_step,
            dims,
            buckets,
        }
    }

    /// The cell containing `p`, with its barycentric coordinates.
    pub fn locate(&self, mesh: &MeshTopology, p: Point) -> Option<(usize, [f64; 3])> {
        let fi = (p[0] - self.lo[0]) * self.inv_step[0];
        let fj = (p[1] - self.lo[1]) * self.inv_step[1];
        if fi < -1e-9 || fj < -1e-9 {
            return None;
        }
        let i = (fi as usize).min(self.dims[0] - 1);
        let j = (fj as usize).min(self.dims[1] - 1);
        for &c in &self.buckets[j * self.dims[0] + i] {
            if let Some(bary) = barycentric(mesh, c, p) {
                return Some((c, bary));
            }
        }
        None
    }
}

fn barycentric(mesh: &MeshTopology, cell: usize, p: Point) -> Option<[f64; 3]> {
    let idx = mesh.cells()[cell];
    let [a, b, c] = [
        mesh.vertices()[idx[0]],
        mesh.vertices()[idx[1]],
        mesh.vertices()[idx[2]],
    ];
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let l1 = ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / det;
    let l2 = ((c[0] - p[0]) * (a[1] - p[1]) - (a[0] - p[0]) * (c[1] - p[1])) / det;
    let l3 = 1.0 - l1 - l2;
    let tol = -1e-10;
    if l1 >= tol && l2 >= tol && l3 >= tol {
        Some([l1, l2, l3])
    } else {
        None
    }
}

/// FEM solution as a point field (P1 interpolation, cell-wise gradient).
pub struct FemField<'a> {
    mesh: &'a MeshTopology,
    field: &'a ComplexField,
    locator: CellLocator,
}

impl<'a> FemField<'a> {
    pub fn new(mesh: &'a MeshTopology, field: &'a ComplexField) -> Result<Self> {
        field.check_mesh(mesh)?;
        Ok(Self {
            mesh,
            field,
            locator: CellLocator::new(mesh),
        })
    }

    pub fn locate_cell(&self, p: Point) -> Option<usize> {
        self.locator.locate(self.mesh, p).map(|(c, _)| c)
    }
}

impl PointField for FemField<'_> {
    fn value(&self, p: Point) -> C64 {
        match self.locator.locate(self.mesh, p) {
            Some((c, bary)) => {
                let idx = self.mesh.cells()[c];
                self.field.value(idx[0]) * bary[0]
                    + self.field.value(idx[1]) * bary[1]
                    + self.field.value(idx[2]) * bary[2]
            }
            None => C64::new(0.0, 0.0),
        }
    }

    fn gradient(&self, p: Point) -> [C64; 2] {
        match self.locator.locate(self.mesh, p) {
            Some((c, _)) => self.field.gradient(self.mesh, c),
            None => [C64::new(0.0, 0.0); 2],
        }
    }
}

/// Scalar symmetric coefficient `A = σ(x) Id` for the diagnostics.
pub enum Coefficient<'a> {
    Identity,
    /// Cell-wise real σ taken from an admittivity field; used with FEM
    /// solutions.
    CellScalar(&'a AdmittivityField),
}

impl Coefficient<'_> {
    fn cell_sigma(&self, cell: usize) -> f64 {
        match self {
            Coefficient::Identity => 1.0,
            Coefficient::CellScalar(f) => f.gamma(cell).re,
        }
    }
}

/// Sampled `H(r) = ∫_{∂B_r} (A x·x/|x|²)|v|²`, `I(r) = ∫_{B_r} A∇v·∇v̄`,
/// and `N(r) = r I(r)/H(r)`.
#[derive(Clone, Debug)]
pub struct FrequencyProfile {
    pub radii: Vec<f64>,
    pub h: Vec<f64>,
    pub i: Vec<f64>,
    pub n: Vec<f64>,
}

impl FrequencyProfile {
    /// The smallest `C₂ ≥ 0` making `N(r)·exp(C₂ r)` nondecreasing on the
    /// sampled radii (domain scale r₀ = 1).
    pub fn monotonicity_constant(&self) -> f64 {
        let mut c2: f64 = 0.0;
        for w in self.n.windows(2).zip(self.radii.windows(2)) {
            let ((n0, n1), (r0, r1)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
            if n0 > 0.0 && n1 > 0.0 && r1 > r0 {
                c2 = c2.max((n0.ln() - n1.ln()) / (r1 - r0));
            }
        }
        c2
    }
}

/// Result of a ratio-shaped unique-continuation check.
#[derive(Clone, Debug)]
pub struct UcpCheckResult {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub parameters: Vec<(&'static str, f64)>,
}

/// Gradient energy over a disc, tensor quadrature (radial Gauss × angular
/// trapezoid). Exact for polynomial integrands at these orders.
pub fn ball_energy_analytic<V: PointField>(
    v: &V,
    center: Point,
    r: f64,
    angular_nodes: usize,
) -> f64 {
    let (rn, rw) = gauss_legendre(32);
    let m = angular_nodes.max(16);
    let dtheta = 2.0 * PI / m as f64;
    let mut acc = 0.0;
    for (x, w) in rn.iter().zip(&rw) {
        let rho = 0.5 * r * (x + 1.0);
        let wr = 0.5 * r * w;
        let mut ring = 0.0;
        for k in 0..m {
            let theta = k as f64 * dtheta;
            let p = [center[0] + rho * theta.cos(), center[1] + rho * theta.sin()];
            let g = v.gradient(p);
            ring += g[0].norm_sqr() + g[1].norm_sqr();
        }
        acc += wr * rho * ring * dtheta;
    }
    acc
}

/// Gradient energy over a disc by the centroid rule on mesh cells.
pub fn ball_energy_fem(
    mesh: &MeshTopology,
    field: &ComplexField,
    coeff: &Coefficient<'_>,
    center: Point,
    r: f64,
) -> Result<f64> {
    field.check_mesh(mesh)?;
    let r2 = r * r;
    let mut acc = 0.0;
    for c in 0..mesh.n_cells() {
        let p = mesh.cell_centroid(c);
        let dx = p[0] - center[0];
        let dy = p[1] - center[1];
        if dx * dx + dy * dy < r2 {
            let g = field.gradient(mesh, c);
            acc += coeff.cell_sigma(c) * mesh.cell_area(c) * (g[0].norm_sqr() + g[1].norm_sqr());
        }
    }
    Ok(acc)
}

/// Almgren frequency profile of an analytic field with `A = Id`.
pub fn frequency_profile_analytic<V: PointField>(
    v: &V,
    center: Point,
    radii: &[f64],
    angular_nodes: usize,
) -> Result<FrequencyProfile> {
    validate_radii(radii)?;
    let m = angular_nodes.max(256);
    let dtheta = 2.0 * PI / m as f64;
    let mut h = Vec::with_capacity(radii.len());
    let mut i_vals = Vec::with_capacity(radii.len());
    let mut n_vals = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut hr = 0.0;
        for k in 0..m {
            let theta = k as f64 * dtheta;
            let p = [center[0] + r * theta.cos(), center[1] + r * theta.sin()];
            hr += v.value(p).norm_sqr();
        }
        hr *= r * dtheta;
        let ir = ball_energy_analytic(v, center, r, m);
        if hr <= 0.0 {
            return Err(Error::DegenerateProfile { radius: r });
        }
        h.push(hr);
        i_vals.push(ir);
        n_vals.push(r * ir / hr);
    }
    Ok(FrequencyProfile {
        radii: radii.to_vec(),
        h,
        i: i_vals,
        n: n_vals,
    })
}

/// Almgren frequency profile of a FEM solution with `A = σ Id`.
///
/// `H` uses circle quadrature with point interpolation; `I` uses
/// centroid-clipped cell sums.
pub fn frequency_profile_fem(
    mesh: &MeshTopology,
    field: &ComplexField,
    sigma: &AdmittivityField,
    center: Point,
    radii: &[f64],
    angular_nodes: usize,
) -> Result<FrequencyProfile> {
    validate_radii(radii)?;
    if !sigma.is_real() {
        return Err(Error::InvalidCoefficient(
            "frequency profile needs a real scalar coefficient".into(),
        ));
    }
    let fem = FemField::new(mesh, field)?;
    let max_r = radii[radii.len() - 1];
    if mesh.distance_to_boundary(center) <= max_r {
        return Err(Error::InvalidArgument(
            "outermost ball is not contained in the domain".into(),
        ));
    }
    let m = angular_nodes.max(256);
    let dtheta = 2.0 * PI / m as f64;
    let coeff = Coefficient::CellScalar(sigma);
    let mut h = Vec::new();
    let mut i_vals = Vec::new();
    let mut n_vals = Vec::new();
    for &r in radii {
        let mut hr = 0.0;
        for k in 0..m {
            let theta = k as f64 * dtheta;
            let p = [center[0] + r * theta.cos(), center[1] + r * theta.sin()];
            // A x·x/|x|² = σ for scalar coefficients.
            let sig = fem
                .locate_cell(p)
                .map(|c| coeff.cell_sigma(c))
                .unwrap_or(1.0);
            hr += sig * fem.value(p).norm_sqr();
        }
        hr *= r * dtheta;
        if hr <= 0.0 {
            return Err(Error::DegenerateProfile { radius: r });
        }
        let ir = ball_energy_fem(mesh, field, &coeff, center, r)?;
        h.push(hr);
        i_vals.push(ir);
        n_vals.push(r * ir / hr);
    }
    Ok(FrequencyProfile {
        radii: radii.to_vec(),
        h,
        i: i_vals,
        n: n_vals,
    })
}

fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] <= 0.0 {
        return Err(Error::InvalidArgument(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Three-spheres comparison from precomputed ball energies, with the
/// harmonic-equality exponent `θ = log(r₃/r₂)/log(r₃/r₁)` and `C = 1`.
pub fn three_spheres_from_energies(
    e1: f64,
    e2: f64,
    e3: f64,
    radii: (f64, f64, f64),
) -> Result<UcpCheckResult> {
    let (r1, r2, r3) = radii;
    if !(0.0 < r1 && r1 < r2 && r2 < r3) {
        return Err(Error::InvalidArgument(
            "three-spheres radii must satisfy 0 < r1 < r2 < r3".into(),
        ));
    }
    let theta = (r3 / r2).ln() / (r3 / r1).ln();
    let rhs = e1.powf(theta) * e3.powf(1.0 - theta);
    let ratio = if rhs > 0.0 { e2 / rhs } else { f64::INFINITY };
    Ok(UcpCheckResult {
        lhs: e2,
        rhs,
        ratio,
        parameters: vec![
            ("theta", theta),
            ("c", 1.0),
            ("r1", r1),
            ("r2", r2),
            ("r3", r3),
        ],
    })
}

/// Three-spheres check of an analytic field.
pub fn three_spheres_analytic<V: PointField>(
    v: &V,
    center: Point,
    radii: (f64, f64, f64),
    angular_nodes: usize,
) -> Result<UcpCheckResult> {
    let e1 = ball_energy_analytic(v, center, radii.0, angular_nodes);
    let e2 = ball_energy_analytic(v, center, radii.1, angular_nodes);
    let e3 = ball_energy_analytic(v, center, radii.2, angular_nodes);
    three_spheres_from_energies(e1, e2, e3, radii)
}

/// Three-spheres check of a FEM solution.
pub fn three_spheres_fem(
    mesh: &MeshTopology,
    field: &ComplexField,
    coeff: &Coefficient<'_>,
    center: Point,
    radii: (f64, f64, f64),
) -> Result<UcpCheckResult> {
    if mesh.distance_to_boundary(center) <= radii.2 {
        return Err(Error::InvalidArgument(
            "outer ball is not contained in the domain".into(),
        ));
    }
    let e1 = ball_energy_fem(mesh, field, coeff, center, radii.0)?;
    let e2 = ball_energy_fem(mesh, field, coeff, center, radii.1)?;
    let e3 = ball_energy_fem(mesh, field, coeff, center, radii.2)?;
    three_spheres_from_energies(e1, e2, e3, radii)
}

/// Doubling ratio `∫_{B_2r}|∇v|² / ∫_{B_r}|∇v|²` of an analytic field.
pub fn doubling_ratio_analytic<V: PointField>(
    v: &V,
    center: Point,
    r: f64,
    angular_nodes: usize,
) -> Result<UcpCheckResult> {
    if r <= 0.0 {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let er = ball_energy_analytic(v, center, r, angular_nodes);
    let e2r = ball_energy_analytic(v, center, 2.0 * r, angular_nodes);
    doubling_from_energies(er, e2r, r)
}

/// Doubling ratio of a FEM solution.
pub fn doubling_ratio_fem(
    mesh: &MeshTopology,
    field: &ComplexField,
    coeff: &Coefficient<'_>,
    center: Point,
    r: f64,
) -> Result<UcpCheckResult> {
    if mesh.distance_to_boundary(center) <= 2.0 * r {
        return Err(Error::InvalidArgument(
            "doubled ball is not contained in the domain".into(),
        ));
    }
    let er = ball_energy_fem(mesh, field, coeff, center, r)?;
    let e2r = ball_energy_fem(mesh, field, coeff, center, 2.0 * r)?;
    doubling_from_energies(er, e2r, r)
}

fn doubling_from_energies(er: f64, e2r: f64, r: f64) -> Result<UcpCheckResult> {
    if er <= 0.0 {
        return Err(Error::DegenerateInput(
            "inner-ball gradient energy vanishes".into(),
        ));
    }
    let ratio = e2r / er;
    Ok(UcpCheckResult {
        lhs: e2r,
        rhs: er,
        ratio,
        parameters: vec![("r", r), ("r0", 2.0 * r), ("energy_quotient_r0", ratio)],
    })
}

/// One sample of a propagation-of-smallness scan.
#[derive(Clone, Copy, Debug)]
pub struct LpsSample {
    pub center: Point,
    pub ratio: f64,
}

/// Scan outcome: the minimum local-to-global energy ratio over `Ω_{2ρ}`.
#[derive(Clone, Debug)]
pub struct LpsScan {
    pub min_ratio: f64,
    pub argmin: Point,
    pub samples: Vec<LpsSample>,
}

/// Scans `x ∈ Ω_{2ρ}` (cell centroids) for the minimum of
/// `∫_{B_ρ(x)}|∇u|² / ∫_Ω|∇u|²`.
pub fn lps_scan(mesh: &MeshTopology, field: &ComplexField, rho: f64) -> Result<LpsScan> {
    field.check_mesh(mesh)?;
    if rho <= 0.0 {
        return Err(Error::InvalidArgument("rho must be positive".into()));
    }
    let interior = interior_offset(mesh, 2.0 * rho)?;
    if interior.is_empty() {
        return Err(Error::InvalidArgument("Ω_2ρ is empty".into()));
    }
    let n = mesh.n_cells();
    let mut cell_energy = Vec::with_capacity(n);
    let mut global = 0.0;
    for c in 0..n {
        let g = field.gradient(mesh, c);
        let e = mesh.cell_area(c) * (g[0].norm_sqr() + g[1].norm_sqr());
        cell_energy.push(e);
        global += e;
    }
    if global <= 0.0 {
        return Err(Error::DegenerateInput("zero global gradient energy".into()));
    }
    let rho2 = rho * rho;
    let mut samples = Vec::with_capacity(interior.cells().len());
    let mut min_ratio = f64::INFINITY;
    let mut argmin = [0.0, 0.0];
    for &center_cell in interior.cells() {
        let x = mesh.cell_centroid(center_cell);
        let mut local = 0.0;
        for (c, e) in cell_energy.iter().enumerate() {
            let p = mesh.cell_centroid(c);
            let dx = p[0] - x[0];
            let dy = p[1] - x[1];
            if dx * dx + dy * dy < rho2 {
                local += e;
            }
        }
        let ratio = local / global;
        samples.push(LpsSample { center: x, ratio });
        if ratio < min_ratio {
            min_ratio = ratio;
            argmin = x;
        }
    }
    Ok(LpsScan {
        min_ratio,
        argmin,
        samples,
    })
}

/// Uniform arclength samples of a boundary current, rescaled to period 2π.
fn sample_current(h: &BoundaryCurrent, chart: &BoundaryChart, n: usize) -> Vec<C64> {
    let l = chart.total_length();
    (0..n)
        .map(|m| h.eval(chart, m as f64 * l / n as f64))
        .collect()
}

/// Fractional Sobolev norm `‖h‖_{H^s(∂Ω)}` via the Fourier multiplier
/// `(1+κ²)^{s/2}` on the arclength circle (unit-Parseval normalization:
/// a single mode of amplitude one has coefficient one).
pub fn boundary_sobolev_norm(
    h: &BoundaryCurrent,
    chart: &BoundaryChart,
    s: f64,
    samples: usize,
) -> Result<f64> {
    let n = samples.max(512);
    let values = sample_current(h, chart, n);
    let spectrum = dft_coefficients(&values);
    let mut acc = 0.0;
    for (kappa, c) in spectrum {
        let k2 = (kappa as f64) * (kappa as f64);
        acc += (1.0 + k2).powf(s) * c.norm_sqr();
    }
    Ok(acc.sqrt())
}

/// DFT coefficients `ĥ_κ = (1/N) Σ h_m e^{-iκθ_m}` for κ in `[-N/2, N/2)`.
fn dft_coefficients(values: &[C64]) -> Vec<(i64, C64)> {
    let n = values.len();
    let half = n as i64 / 2;
    let mut out = Vec::with_capacity(n);
    for kappa in -half..half {
        let w = C64::new(0.0, -2.0 * PI * kappa as f64 / n as f64).exp();
        let mut phase = C64::new(1.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for v in values {
            acc += v * phase;
            phase *= w;
        }
        out.push((kappa, acc / n as f64));
    }
    out
}

/// The frequency `F(h) = ‖h‖_{H^{-1/2}} / ‖h‖_{H^{-1}}`.
pub fn frequency_of_current(
    h: &BoundaryCurrent,
    chart: &BoundaryChart,
    samples: usize,
) -> Result<f64> {
    let num = boundary_sobolev_norm(h, chart, -0.5, samples)?;
    let den = boundary_sobolev_norm(h, chart, -1.0, samples)?;
    if den <= 0.0 {
        return Err(Error::DegenerateInput("trivial current".into()));
    }
    Ok(num / den)
}

/// The mask-bound constants `p = 1 + log(4F)/log(17/16)`,
/// `H = (27F)^{p(p-1)}` (reported in log₁₀ to avoid overflow).
#[derive(Clone, Copy, Debug)]
pub struct MaskBoundConstants {
    pub p: f64,
    pub log10_h: f64,
    /// `F ≤ 1/4` gives `p ≤ 1`; the bound degenerates.
    pub degenerate: bool,
}

pub fn mask_bound_constants(f: f64) -> Result<MaskBoundConstants> {
    if !(f > 0.0) {
        return Err(Error::InvalidArgument(
            "frequency input must be positive".into(),
        ));
    }
    let p = 1.0 + (4.0 * f).ln() / (17.0f64 / 16.0).ln();
    let degenerate = f <= 0.25;
    let log10_h = if degenerate {
        0.0
    } else {
        p * (p - 1.0) * (27.0 * f).log10()
    };
    Ok(MaskBoundConstants {
        p,
        log10_h,
        degenerate,
    })
}

/// The measured oscillation quotient feeding the mask bound:
/// `F = C · (∫_Ω|∇u|² / ∫_{Ω_{r̄/2}}|∇u|²)^C` with configurable `C`
/// (default 1; the analytic constant is not explicit).
pub fn oscillation_quotient(
    mesh: &MeshTopology,
    field: &ComplexField,
    rbar: f64,
    c: f64,
) -> Result<f64> {
    field.check_mesh(mesh)?;
    if interior_offset(mesh, rbar)?.is_empty() {
        return Err(Error::InvalidArgument("Ω_r̄ is empty".into()));
    }
    let half: InclusionMask = interior_offset(mesh, rbar / 2.0)?;
    let mut inner = 0.0;
    let mut global = 0.0;
    for cell in 0..mesh.n_cells() {
        let g = field.gradient(mesh, cell);
        let e = mesh.cell_area(cell) * (g[0].norm_sqr() + g[1].norm_sqr());
        global += e;
        if half.contains(cell) {
            inner += e;
        }
    }
    if inner <= 0.0 {
        return Err(Error::DegenerateInput(
            "no gradient energy in the interior offset".into(),
        ));
    }
    Ok(c * (global / inner).powf(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{
        assemble_current, assemble_system, solve_neumann, AdmittivityField, BoundaryCurrent,
        ComplexField,
    };
    use crate::geometry::{boundary_chart, generate_mesh, DomainKind};
    use crate::rng::SplitMix64;

    #[test]
    fn almgren_frequency_of_monomials_is_the_degree() {
        let radii: Vec<f64> = (1..=9).map(|k| 0.1 * k as f64).collect();
        for k in 1..=6u32 {
            let v = HarmonicMonomial { degree: k };
            let profile = frequency_profile_analytic(&v, [0.0, 0.0], &radii, 256).unwrap();
            for (r, n) in profile.radii.iter().zip(&profile.n) {
                assert!((n - k as f64).abs() <= 1e-2, "degree {k}, r = {r}: N = {n}");
            }
        }
    }

    #[test]
    fn profile_h_matches_circle_measure_for_constants() {
        // v ≡ 1 has I = 0, N ≡ 0 and H(r) = 2πr.
        let v = FnField {
            value: |_p| C64::new(1.0, 0.0),
            gradient: |_p| [C64::new(0.0, 0.0); 2],
        };
        let profile = frequency_profile_analytic(&v, [0.0, 0.0], &[0.25, 0.5, 1.0], 256).unwrap();
        for ((r, h), (i, n)) in profile
            .radii
            .iter()
            .zip(&profile.h)
            .zip(profile.i.iter().zip(&profile.n))
        {
            assert!((h - 2.0 * PI * r).abs() < 1e-10 * r.max(1.0));
            assert!(i.abs() < 1e-12);
            assert!(n.abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_profile_is_degenerate() {
        let v = FnField {
            value: |_p| C64::new(0.0, 0.0),
            gradient: |_p| [C64::new(0.0, 0.0); 2],
        };
        assert!(matches!(
            frequency_profile_analytic(&v, [0.0, 0.0], &[0.5], 256),
            Err(Error::DegenerateProfile { .. })
        ));
        // Radii must be positive and increasing.
        let w = HarmonicMonomial { degree: 1 };
        assert!(matches!(
            frequency_profile_analytic(&w, [0.0, 0.0], &[0.5, 0.3], 256),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn three_spheres_equality_for_monomials() {
        for k in 1..=4u32 {
            let v = HarmonicMonomial { degree: k };
            let check = three_spheres_analytic(&v, [0.0, 0.0], (1.0, 2.0, 4.0), 512).unwrap();
            assert!(
                (check.ratio - 1.0).abs() <= 1e-3,
                "degree {k}: ratio {}",
                check.ratio
            );
            let theta = check
                .parameters
                .iter()
                .find(|(n, _)| *n == "theta")
                .unwrap()
                .1;
            assert!((theta - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn three_spheres_near_inner_radius_is_trivially_tight() {
        let v = HarmonicMonomial { degree: 2 };
        let check = three_spheres_analytic(&v, [0.0, 0.0], (1.0, 1.0 + 1e-6, 4.0), 256).unwrap();
        assert!(check.ratio >= 1.0 - 1e-6);
        assert!((check.ratio - 1.0).abs() < 1e-4);
    }

    #[test]
    fn doubling_ratios_of_monomials() {
        for (k, expected) in [(1u32, 4.0), (2, 16.0), (3, 64.0)] {
            let v = HarmonicMonomial { degree: k };
            let check = doubling_ratio_analytic(&v, [0.0, 0.0], 0.5, 512).unwrap();
            assert!(
                (check.ratio - expected).abs() / expected <= 1e-2,
                "degree {k}: {}",
                check.ratio
            );
        }
    }

    #[test]
    fn doubling_rejects_constant_fields() {
        let v = FnField {
            value: |_p| C64::new(3.0, -1.0),
            gradient: |_p| [C64::new(0.0, 0.0); 2],
        };
        assert!(matches!(
            doubling_ratio_analytic(&v, [0.0, 0.0], 0.5, 128),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn lps_affine_field_ratio_is_disc_area() {
        let mesh = generate_mesh(DomainKind::UnitSquare, 64).unwrap();
        let u = ComplexField::interpolate(&mesh, |p| C64::new(p[0], 0.0));
        let scan = lps_scan(&mesh, &u, 0.1).unwrap();
        let expected = PI * 0.01;
        assert!(
            (scan.min_ratio - expected).abs() / expected < 0.02,
            "min ratio {} vs {expected}",
            scan.min_ratio
        );
    }

    #[test]
    fn lps_rejects_zero_fields_and_empty_interiors() {
        let mesh = generate_mesh(DomainKind::UnitSquare, 16).unwrap();
        let zero = ComplexField::interpolate(&mesh, |_| C64::new(0.0, 0.0));
        assert!(matches!(
            lps_scan(&mesh, &zero, 0.1),
            Err(Error::DegenerateInput(_))
        ));
        let u = ComplexField::interpolate(&mesh, |p| C64::new(p[0], 0.0));
        assert!(matches!(
            lps_scan(&mesh, &u, 0.3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn lps_min_ratio_is_monotone_in_rho() {
        let mesh = generate_mesh(DomainKind::UnitSquare, 32).unwrap();
        let u = ComplexField::interpolate(&mesh, |p| C64::new((2.0 * p[0]).sin(), p[1] * p[0]));
        let small = lps_scan(&mesh, &u, 0.06).unwrap();
        let large = lps_scan(&mesh, &u, 0.12).unwrap();
        assert!(large.min_ratio >= small.min_ratio);
    }

    #[test]
    fn single_mode_frequency_is_fourth_root_of_two() {
        let mesh = generate_mesh(DomainKind::UnitDisc, 16).unwrap();
        let chart = boundary_chart(&mesh).unwrap();
        let h = BoundaryCurrent::from_modes(&chart, &[(1, C64::new(1.0, 0.0))]).unwrap();
        let f = frequency_of_current(&h, &chart, 512).unwrap();
        assert!(
            (f - 2.0f64.powf(0.25)).abs() <= 1e-10,
            "F = {f} vs {}",
            2.0f64.powf(0.25)
        );
    }

    #[test]
    fn l2_norm_is_parseval_exact_for_band_limited_currents() {
        let mesh = generate_mesh(DomainKind::UnitDisc, 12).unwrap();
        let chart = boundary_chart(&mesh).unwrap();
        let modes = [(1, C64::new(0.7, 0.1)), (4, C64::new(0.0, 0.5))];
        let h = BoundaryCurrent::from_modes(&chart, &modes).unwrap();
        let l2 = boundary_sobolev_norm(&h, &chart, 0.0, 512).unwrap();
        let exact = modes.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        assert!((l2 - exact).abs() <= 1e-12, "{l2} vs {exact}");
    }

    #[test]
    fn two_mode_frequency_closed_form() {
        let mesh = generate_mesh(DomainKind::UnitDisc, 12).unwrap();
        let chart = boundary_chart(&mesh).unwrap();
        let h = BoundaryCurrent::from_modes(
            &chart,
            &[(1, C64::new(1.0, 0.0)), (3, C64::new(1.0, 0.0))],
        )
        .unwrap();
        let f = frequency_of_current(&h, &chart, 512).unwrap();
        let expected = ((2.0f64.powf(-0.5) + 10.0f64.powf(-0.5))
            / (2.0f64.powf(-1.0) + 10.0f64.powf(-1.0)))
        .sqrt();
        assert!((f - expected).abs() <= 1e-10, "{f} vs {expected}");
    }

    #[test]
    fn frequency_at_least_one_and_norms_monotone_in_s() {
        let mesh = generate_mesh(DomainKind::UnitDisc, 8).unwrap();
        let chart = boundary_chart(&mesh).unwrap();
        let mut rng = SplitMix64::new(0xF0F0);
        for _ in 0..50 {
            let mut modes = Vec::new();
            for _ in 0..4 {
                let kappa = 1 + (rng.next_u64() % 20) as i32;
                let sign = if rng.next_f64() < 0.5 { -1 } else { 1 };
                modes.push((
                    sign * kappa,
                    C64::new(rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)),
                ));
            }
            let h = BoundaryCurrent::from_modes(&chart, &modes).unwrap();
            let f = frequency_of_current(&h, &chart, 512).unwrap();
            assert!(f >= 1.0 - 1e-12, "F = {f}");
            let n_m1 = boundary_sobolev_norm(&h, &chart, -1.0, 512).unwrap();
            let n_mh = boundary_sobolev_norm(&h, &chart, -0.5, 512).unwrap();
            let n_0 = boundary_sobolev_norm(&h, &chart, 0.0, 512).unwrap();
            assert!(n_m1 <= n_mh + 1e-12 && n_mh <= n_0 + 1e-12);
        }
    }

    #[test]
    fn mask_bound_constants_match_arithmetic() {
        let c = mask_bound_constants(4.0).unwrap();
        let expected_p = 1.0 + 16.0f64.ln() / (17.0f64 / 16.0).ln();
        assert!((c.p - expected_p).abs() < 1e-12);
        assert!((c.p - 46.7337).abs() < 1e-3, "p = {}", c.p);
        assert!(!c.degenerate);
        let expected_log10h = c.p * (c.p - 1.0) * 108.0f64.log10();
        assert!((c.log10_h - expected_log10h).abs() < 1e-9);
        let d = mask_bound_constants(0.25).unwrap();
        assert!((d.p - 1.0).abs() < 1e-12);
        assert!(d.degenerate);
    }

    /// FEM solution on the disc with Lipschitz σ₀: the frequency profile is
    /// near-monotone (small C₂) and the empirical three-spheres constant is
    /// modest.
    #[test]
    fn fem_solution_diagnostics_on_the_disc() {
        let mesh = generate_mesh(DomainKind::UnitDisc, 24).unwrap();
        let chart = boundary_chart(&mesh).unwrap();
        let sigma =
            AdmittivityField::from_fn(&mesh, |p| C64::new(1.0 + 0.3 * p[0], 0.0), 0.7).unwrap();
        let h = BoundaryCurrent::from_modes(
            &chart,
            &[(1, C64::new(1.0, 0.0)), (2, C64::new(0.4, 0.2))],
        )
        .unwrap();
        let system = assemble_system(&mesh, &sigma).unwrap();
        let load = assemble_current(&mesh, &chart, &h).unwrap();
        let u = solve_neumann(&system, &load).unwrap();

        let radii: Vec<f64> = (2..=8).map(|k| 0.1 * k as f64).collect();
        let profile = frequency_profile_fem(&mesh, &u, &sigma, [0.05, 0.0], &radii, 256).unwrap();
        assert!(profile.h.iter().all(|&x| x > 0.0));
        assert!(profile.monotonicity_constant() <= 1e3);

        let ts = three_spheres_fem(
            &mesh,
            &u,
            &Coefficient::Identity,
            [0.0, 0.0],
            (0.2, 0.4, 0.8),
        )
        .unwrap();
        assert!(ts.ratio <= 10.0, "three-spheres ratio {}", ts.ratio);

        let db = doubling_ratio_fem(&mesh, &u, &Coefficient::Identity, [0.0, 0.0], 0.3).unwrap();
        assert!(db.ratio >= 1.0 && db.ratio <= 1e3);

        let f = oscillation_quotient(&mesh, &u, 0.4, 1.0).unwrap();
        let constants = mask_bound_constants(f).unwrap();
        assert!(constants.p > 1.0);
    }
}
