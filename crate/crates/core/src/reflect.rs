//! Even reflection across a flat Neumann boundary segment: extends a solution
//! with zero flux on `{y₂ = 0}` to the mirrored double domain together with
//! the reflected coefficient, and verifies the extension weakly.
//!
//! Only diagonal anisotropic coefficients are supported; they satisfy the
//! interface condition `a_{2k}(y', 0) = 0, k ≠ 2` identically, which is what
//! makes the even extension a weak solution. Diagonal entries reflect evenly;
//! the odd rule for the off-diagonal column is vacuous here.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fem::{assemble_system_diagonal, ComplexField};
use crate::geometry::{BoundaryEdge, DomainKind, MeshTopology, Point};
use crate::C64;

/// Per-cell real diagonal coefficient `diag(axx, ayy)`.
#[derive(Clone, Debug)]
pub struct DiagonalCoefficient {
    pub axx: Vec<f64>,
    pub ayy: Vec<f64>,
}

impl DiagonalCoefficient {
    pub fn from_fn<F: Fn(Point) -> (f64, f64)>(mesh: &MeshTopology, f: F) -> Result<Self> {
        let mut axx = Vec::with_capacity(mesh.n_cells());
        let mut ayy = Vec::with_capacity(mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let (a, b) = f(mesh.cell_centroid(c));
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::InvalidCoefficient(
                    "diagonal coefficient must be positive".into(),
                ));
            }
            axx.push(a);
            ayy.push(b);
        }
        Ok(Self { axx, ayy })
    }

    pub fn identity(mesh: &MeshTopology) -> Self {
        Self {
            axx: alloc::vec![1.0; mesh.n_cells()],
            ayy: alloc::vec![1.0; mesh.n_cells()],
        }
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.axx
            .iter()
            .zip(&self.ayy)
            .map(|(&a, &b)| (a, b))
            .collect()
    }

    /// Per-cell eigenvalue range (diagonal: just the ordered entries).
    pub fn eigenvalues(&self, cell: usize) -> (f64, f64) {
        let (a, b) = (self.axx[cell], self.ayy[cell]);
        (a.min(b), a.max(b))
    }
}

/// Reflection output: doubled mesh, even field, reflected coefficient, and
/// the measured weak residual of the extension.
#[derive(Clone, Debug)]
pub struct ReflectedProblem {
    pub doubled_mesh: MeshTopology,
    pub doubled_field: ComplexField,
    pub a_tilde: DiagonalCoefficient,
    /// `‖(A ṽ)_interior‖₂ / ‖A ṽ‖₂` on the doubled mesh.
    pub weak_residual: f64,
    /// Doubled-vertex index of the mirror image of each doubled vertex.
    pub mirror_of: Vec<usize>,
    /// `∫_half A ∇v·∇v̄`.
    pub half_energy: f64,
    /// `∫_doubled Ã ∇ṽ·∇ṽ̄`.
    pub doubled_energy: f64,
}

const FLAT_TOL: f64 = 1e-12;

/// Even reflection of a zero-flux-at-the-bottom solution across `{y₂ = 0}`.
pub fn reflect_even(
    mesh: &MeshTopology,
    field: &ComplexField,
    coeff: &DiagonalCoefficient,
) -> Result<ReflectedProblem> {
    field.check_mesh(mesh)?;
    if coeff.axx.len() != mesh.n_cells() {
        return Err(Error::InvalidCoefficient(
            "coefficient not defined on every cell".into(),
        ));
    }
    let verts = mesh.vertices();
    if verts.iter().any(|v| v[1] < -FLAT_TOL) {
        return Err(Error::InvalidMesh(
            "mesh must lie in the upper half plane {y ≥ 0}".into(),
        ));
    }
    let on_line: Vec<bool> = verts.iter().map(|v| v[1].abs() <= FLAT_TOL).collect();
    if !on_line.iter().any(|&b| b) {
        return Err(Error::InvalidMesh(
            "mesh has no vertices on the flat segment {y = 0}".into(),
        ));
    }

    // Zero-flux check: for a Galerkin solution, (A v)_i is the load at vertex
    // i, which must vanish at the interior vertices of the flat segment.
    // Corner hats also integrate the side flux and cannot witness it.
    let mut touches_side = alloc::vec![false; verts.len()];
    for e in mesh.boundary_edges() {
        let [a, b] = e.vertices;
        if !(on_line[a] && on_line[b]) {
            touches_side[a] = true;
            touches_side[b] = true;
        }
    }
    let half_system = assemble_system_diagonal(mesh, &coeff.pairs())?;
    let mut av = alloc::vec![C64::new(0.0, 0.0); mesh.n_vertices()];
    half_system.matrix().mul_vec(field.values(), &mut av);
    let total: f64 = av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let bottom: f64 = av
        .iter()
        .enumerate()
        .filter(|(i, _)| on_line[*i] && !touches_side[*i])
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if total > 0.0 && bottom > 1e-8 * total {
        return Err(Error::InvalidArgument(
            "field carries nonzero flux on the flat segment".into(),
        ));
    }

    // Doubled vertex set: originals keep their indices; strictly-upper
    // vertices get mirrored copies.
    let n_up = verts.len();
    let mut mirror_of: Vec<usize> = (0..n_up).collect();
    let mut doubled_vertices: Vec<Point> = verts.to_vec();
    for (i, v) in verts.iter().enumerate() {
        if !on_line[i] {
            mirror_of[i] = doubled_vertices.len();
            doubled_vertices.push([v[0], -v[1]]);
        }
    }
    let mut full_mirror = alloc::vec![0usize; doubled_vertices.len()];
    for i in 0..n_up {
        full_mirror[i] = mirror_of[i];
        full_mirror[mirror_of[i]] = i;
    }

    // Cells: originals plus orientation-fixed mirrors; the coefficient
    // reflects evenly.
    let mut doubled_cells: Vec<[usize; 3]> = mesh.cells().to_vec();
    let mut axx = coeff.axx.clone();
    let mut ayy = coeff.ayy.clone();
    for (c, cell) in mesh.cells().iter().enumerate() {
        doubled_cells.push([mirror_of[cell[0]], mirror_of[cell[2]], mirror_of[cell[1]]]);
        axx.push(coeff.axx[c]);
        ayy.push(coeff.ayy[c]);
    }

    // Boundary: original non-bottom edges plus their reversed mirrors.
    let mut doubled_edges: Vec<BoundaryEdge> = Vec::new();
    for e in mesh.boundary_edges() {
        let [a, b] = e.vertices;
        if on_line[a] && on_line[b] {
            continue;
        }
        doubled_edges.push(*e);
        doubled_edges.push(BoundaryEdge {
            vertices: [mirror_of[b], mirror_of[a]],
            normal: [e.normal[0], -e.normal[1]],
        });
    }

    let doubled_mesh = MeshTopology::from_parts(
        doubled_vertices,
        doubled_cells,
        doubled_edges,
        DomainKind::UnitSquare,
        mesh.resolution(),
    )
    .map_err(|_| Error::InvalidMesh("doubled mesh failed validation".into()))?;

    let mut values = field.values().to_vec();
    values.extend(
        (n_up..doubled_mesh.n_vertices()).map(|i| field.value(full_mirror[i])),
    );
    let doubled_field = ComplexField::from_values(&doubled_mesh, values)?;

    let a_tilde = DiagonalCoefficient { axx, ayy };

    // Weak residual of div(Ã∇ṽ) = 0 against interior hat functions.
    let doubled_system = assemble_system_diagonal(&doubled_mesh, &a_tilde.pairs())?;
    let mut w = alloc::vec![C64::new(0.0, 0.0); doubled_mesh.n_vertices()];
    doubled_system
        .matrix()
        .mul_vec(doubled_field.values(), &mut w);
    let mut on_doubled_boundary = alloc::vec![false; doubled_mesh.n_vertices()];
    for e in doubled_mesh.boundary_edges() {
        on_doubled_boundary[e.vertices[0]] = true;
        on_doubled_boundary[e.vertices[1]] = true;
    }
    let total: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let interior: f64 = w
        .iter()
        .enumerate()
        .filter(|(i, _)| !on_doubled_boundary[*i])
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let weak_residual = if total > 0.0 { interior / total } else { 0.0 };

    let half_energy = diag_energy(mesh, field, coeff);
    let doubled_energy = diag_energy(&doubled_mesh, &doubled_field, &a_tilde);

    Ok(ReflectedProblem {
        doubled_mesh,
        doubled_field,
        a_tilde,
        weak_residual,
        mirror_of: full_mirror,
        half_energy,
        doubled_energy,
    })
}

fn diag_energy(mesh: &MeshTopology, field: &ComplexField, coeff: &DiagonalCoefficient) -> f64 {
    let mut acc = 0.0;
    for c in 0..mesh.n_cells() {
        let g = field.gradient(mesh, c);
        acc += mesh.cell_area(c)
            * (coeff.axx[c] * g[0].norm_sqr() + coeff.ayy[c] * g[1].norm_sqr());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_current, solve_neumann, BoundaryCurrent};
    use crate::geometry::{boundary_chart, structured_rectangle};

    fn half_square(n: u32) -> MeshTopology {
        structured_rectangle([0.0, 0.0], [1.0, 0.5], n, n / 2, DomainKind::UnitSquare, n)
            .unwrap()
    }

    /// Solve on the half square with current supported away from the bottom.
    fn solved_half_problem(
        mesh: &MeshTopology,
        coeff: &DiagonalCoefficient,
    ) -> (ComplexField, Vec<C64>) {
        let chart = boundary_chart(mesh).unwrap();
        let h = crate::fem::BoundaryCurrent::per_edge_from_fn(mesh, &chart, |p| {
            if p[1] > 0.5 - 1e-12 {
                // top edge: dipole-like pattern
                if p[0] < 0.5 {
                    C64::new(1.0, 0.4)
                } else {
                    C64::new(-1.0, -0.4)
                }
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let load = assemble_current(mesh, &chart, &h).unwrap();
        let system = assemble_system_diagonal(mesh, &coeff.pairs()).unwrap();
        let u = solve_neumann(&system, &load).unwrap();
        (u, load)
    }

    #[test]
    fn identity_coefficient_reflects_to_identity() {
        let mesh = half_square(8);
        let coeff = DiagonalCoefficient::identity(&mesh);
        let (u, _) = solved_half_problem(&mesh, &coeff);
        let reflected = reflect_even(&mesh, &u, &coeff).unwrap();
        assert!(reflected
            .a_tilde
            .axx
            .iter()
            .chain(&reflected.a_tilde.ayy)
            .all(|&v| v == 1.0));
    }

    #[test]
    fn affine_field_reflects_exactly() {
        // v = x₁ has zero flux through {y=0}; its even reflection is x₁ on
        // the doubled square.
        let mesh = half_square(8);
        let coeff = DiagonalCoefficient::identity(&mesh);
        let v = ComplexField::interpolate(&mesh, |p| C64::new(p[0], 0.0));
        let reflected = reflect_even(&mesh, &v, &coeff).unwrap();
        assert!(reflected.weak_residual <= 1e-10, "{}", reflected.weak_residual);
        for (i, vtx) in reflected.doubled_mesh.vertices().iter().enumerate() {
            let val = reflected.doubled_field.value(i);
            assert!((val - C64::new(vtx[0], 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn reflected_solution_is_a_weak_solution() {
        let mesh = half_square(16);
        let coeff = DiagonalCoefficient::from_fn(&mesh, |p| {
            (1.0 + 0.25 * p[0], 1.3 + 0.1 * p[1])
        })
        .unwrap();
        let (u, _) = solved_half_problem(&mesh, &coeff);
        let reflected = reflect_even(&mesh, &u, &coeff).unwrap();
        assert!(
            reflected.weak_residual <= 1e-8,
            "weak residual {}",
            reflected.weak_residual
        );
        // Mirror symmetry is exact at mirrored vertex pairs.
        for i in 0..reflected.doubled_mesh.n_vertices() {
            let j = reflected.mirror_of[i];
            assert_eq!(
                reflected.doubled_field.value(i),
                reflected.doubled_field.value(j)
            );
        }
        // Energy doubles exactly at the discrete level.
        let rel = (reflected.doubled_energy - 2.0 * reflected.half_energy).abs()
            / reflected.doubled_energy;
        assert!(rel < 1e-14, "energy doubling off by {rel}");
    }

    #[test]
    fn ellipticity_constants_are_preserved() {
        let mesh = half_square(8);
        let coeff =
            DiagonalCoefficient::from_fn(&mesh, |p| (1.0 + 0.3 * p[0], 2.0 - 0.5 * p[1]))
                .unwrap();
        let (u, _) = solved_half_problem(&mesh, &coeff);
        let reflected = reflect_even(&mesh, &u, &coeff).unwrap();
        let n = mesh.n_cells();
        for c in 0..n {
            let (lo, hi) = coeff.eigenvalues(c);
            let (mlo, mhi) = reflected.a_tilde.eigenvalues(n + c);
            assert_eq!(lo, mlo);
            assert_eq!(hi, mhi);
        }
    }

    #[test]
    fn reflection_is_idempotent_on_even_data() {
        let mesh = half_square(8);
        let coeff = DiagonalCoefficient::identity(&mesh);
        let (u, _) = solved_half_problem(&mesh, &coeff);
        let once = reflect_even(&mesh, &u, &coeff).unwrap();
        // The upper half of the doubled problem is the original mesh and
        // field; reflecting it again reproduces the doubled data.
        let again = reflect_even(&mesh, &u, &coeff).unwrap();
        assert_eq!(once.doubled_field.values(), again.doubled_field.values());
    }

    #[test]
    fn nonzero_bottom_flux_is_rejected() {
        let mesh = half_square(8);
        let coeff = DiagonalCoefficient::identity(&mesh);
        let chart = boundary_chart(&mesh).unwrap();
        // Current entering through the bottom edge.
        let h = BoundaryCurrent::per_edge_from_fn(&mesh, &chart, |p| {
            if p[1] < 1e-12 {
                C64::new(1.0, 0.0)
            } else if p[1] > 0.5 - 1e-12 {
                C64::new(-1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let load = assemble_current(&mesh, &chart, &h).unwrap();
        let system = assemble_system_diagonal(&mesh, &coeff.pairs()).unwrap();
        let u = solve_neumann(&system, &load).unwrap();
        assert!(matches!(
            reflect_even(&mesh, &u, &coeff),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn lower_half_meshes_are_rejected() {
        let mesh = structured_rectangle(
            [0.0, -0.5],
            [1.0, 0.5],
            4,
            4,
            DomainKind::UnitSquare,
            4,
        )
        .unwrap();
        let coeff = DiagonalCoefficient::identity(&mesh);
        let v = ComplexField::interpolate(&mesh, |p| C64::new(p[0], 0.0));
        assert!(matches!(
            reflect_even(&mesh, &v, &coeff),
            Err(Error::InvalidMesh(_))
        ));
    }
}
