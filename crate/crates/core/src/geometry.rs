//! Structured meshes of the reference domains, inclusion masks, interior
//! offsets, and boundary arclength charts.
//!
//! Domains are generated at unit scale (`r0 = 1`), so the dimensionless norm
//! normalization coincides with the standard one. Cell membership in masks is
//! decided by the cell centroid, which keeps every mask an exact union of
//! cells; the geometric error of that convention is `O(h)` and is accounted
//! for in the tolerances of the tests that use it.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];

/// Reference domains available to [`generate_mesh`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DomainKind {
    UnitSquare,
    UnitDisc,
    /// The interval `(-1, 1)`, realized as a one-cell-high strip so that the
    /// 2D simplicial data model applies; the closed-form 1D theory lives in
    /// the `oned` module.
    Interval,
}

/// An oriented boundary edge with its outward unit normal.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryEdge {
    /// Endpoints ordered so the domain lies on the left (counterclockwise).
    pub vertices: [usize; 2],
    pub normal: [f64; 2],
}

/// Conforming triangle mesh with subdomain tags.
#[derive(Clone, Debug)]
pub struct MeshTopology {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    cell_tags: Vec<u32>,
    areas: Vec<f64>,
    centroids: Vec<Point>,
    domain: DomainKind,
    resolution: u32,
    /// Nominal Lipschitz character of the boundary chart (hypothesis data,
    /// recorded rather than computed sharply).
    m0: f64,
    /// `|Ω| / r0^n` of the generated polygonal domain.
    m1: f64,
}

/// Cell-set inclusion mask.
#[derive(Clone, Debug)]
pub struct InclusionMask {
    cells: Vec<usize>,
    area: f64,
    dist_to_boundary: f64,
}

/// Arclength parameterization of the (single) boundary loop.
#[derive(Clone, Debug)]
pub struct BoundaryChart {
    /// Boundary edge indices in counterclockwise loop order from the anchor.
    loop_edges: Vec<usize>,
    /// `(vertex, arclength)` of each loop vertex, in loop order; the anchor
    /// vertex has arclength 0.
    vertex_arclength: Vec<(usize, f64)>,
    total_length: f64,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Distance from `p` to the segment `[a, b]`.
fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

impl MeshTopology {
    /// Builds a mesh from raw parts, enforcing every topology invariant.
    ///
    /// Boundary edges must be oriented counterclockwise (domain on the left).
    pub fn from_parts(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        domain: DomainKind,
        resolution: u32,
    ) -> Result<Self> {
        Self::finish(vertices, cells, boundary_edges, domain, resolution, 1.0)
    }

    fn finish(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        domain: DomainKind,
        resolution: u32,
        m0: f64,
    ) -> Result<Self> {
        let mut areas = Vec::with_capacity(cells.len());
        let mut centroids = Vec::with_capacity(cells.len());
        for (idx, c) in cells.iter().enumerate() {
            let [a, b, cc] = [vertices[c[0]], vertices[c[1]], vertices[c[2]]];
            let area = signed_area(a, b, cc);
            if area <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "cell {idx} has non-positive signed area {area}"
                )));
            }
            areas.push(area);
            centroids.push([
                (a[0] + b[0] + cc[0]) / 3.0,
                (a[1] + b[1] + cc[1]) / 3.0,
            ]);
        }
        let m1 = areas.iter().sum();
        let cell_tags = alloc::vec![0u32; cells.len()];
        let mesh = Self {
            vertices,
            cells,
            boundary_edges,
            cell_tags,
            areas,
            centroids,
            domain,
            resolution,
            m0,
            m1,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks the topology invariants: positive areas (already enforced),
    /// a single closed boundary loop, and Euler characteristic 1.
    pub fn validate(&self) -> Result<()> {
        // Boundary must be a single closed loop.
        let mut next = alloc::collections::BTreeMap::new();
        for (i, e) in self.boundary_edges.iter().enumerate() {
            if next.insert(e.vertices[0], i).is_some() {
                return Err(Error::InvalidMesh(
                    "boundary vertex with two outgoing edges".into(),
                ));
            }
        }
        let start = self.boundary_edges[0].vertices[0];
        let mut seen = 0usize;
        let mut at = start;
        loop {
            let Some(&edge) = next.get(&at) else {
                return Err(Error::InvalidMesh("boundary loop is open".into()));
            };
            at = self.boundary_edges[edge].vertices[1];
            seen += 1;
            if at == start {
                break;
            }
            if seen > self.boundary_edges.len() {
                return Err(Error::InvalidMesh("boundary loop does not close".into()));
            }
        }
        if seen != self.boundary_edges.len() {
            return Err(Error::InvalidMesh(
                "boundary is not a single connected loop".into(),
            ));
        }
        // Euler characteristic V - E + F = 1 for disc topology.
        let mut edges = BTreeSet::new();
        for c in &self.cells {
            for (u, v) in [(c[0], c[1]), (c[1], c[2]), (c[2], c[0])] {
                edges.insert(if u < v { (u, v) } else { (v, u) });
            }
        }
        let chi = self.vertices.len() as i64 - edges.len() as i64 + self.cells.len() as i64;
        if chi != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic {chi} != 1"
            )));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn cell_tags(&self) -> &[u32] {
        &self.cell_tags
    }

    /// Retags the cells of `mask` with `tag` (subdomain bookkeeping).
    pub fn set_tag(&mut self, mask: &InclusionMask, tag: u32) {
        for &c in mask.cells() {
            self.cell_tags[c] = tag;
        }
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        self.areas[cell]
    }

    pub fn cell_centroid(&self, cell: usize) -> Point {
        self.centroids[cell]
    }

    pub fn total_area(&self) -> f64 {
        self.m1
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Nominal `(M0, M1)` of the generated domain.
    pub fn lipschitz_data(&self) -> (f64, f64) {
        (self.m0, self.m1)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Exact distance from a point to the polygonal boundary.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        let mut d = f64::INFINITY;
        for e in &self.boundary_edges {
            d = d.min(point_segment_distance(
                p,
                self.vertices[e.vertices[0]],
                self.vertices[e.vertices[1]],
            ));
        }
        d
    }

    /// Cheap structural identity used to detect mixed-mesh arguments.
    pub fn stamp(&self) -> MeshStamp {
        let mut acc: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.vertices {
            for coord in v {
                acc ^= coord.to_bits();
                acc = acc.rotate_left(9).wrapping_mul(0x100_0000_01b3);
            }
        }
        MeshStamp {
            n_vertices: self.vertices.len(),
            n_cells: self.cells.len(),
            checksum: acc,
        }
    }

    /// P1 basis gradients `(b_i, c_i) / (2A)` of a cell.
    pub fn cell_basis_gradients(&self, cell: usize) -> [[f64; 2]; 3] {
        let [i, j, k] = self.cells[cell];
        let p = [self.vertices[i], self.vertices[j], self.vertices[k]];
        let inv = 1.0 / (2.0 * self.areas[cell]);
        let mut g = [[0.0; 2]; 3];
        for t in 0..3 {
            let a = p[(t + 1) % 3];
            let b = p[(t + 2) % 3];
            g[t] = [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv];
        }
        g
    }
}

/// Fingerprint tying fields to the mesh they were computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshStamp {
    pub n_vertices: usize,
    pub n_cells: usize,
    pub checksum: u64,
}

/// Builds a conforming mesh of one of the reference domains.
///
/// `unit_square` at resolution `n` is the n×n grid split into `2n²` triangles;
/// `unit_disc` at resolution `n` has `n` concentric rings (ring `j` carries
/// `6j` vertices); `interval` is the strip `(-1,1) × (0, 2/n)`.
pub fn generate_mesh(kind: DomainKind, resolution: u32) -> Result<MeshTopology> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be >= 1".into()));
    }
    match kind {
        DomainKind::UnitSquare => structured_rectangle(
            [0.0, 0.0],
            [1.0, 1.0],
            resolution,
            resolution,
            DomainKind::UnitSquare,
            resolution,
        ),
        DomainKind::Interval => structured_rectangle(
            [-1.0, 0.0],
            [1.0, 2.0 / resolution as f64],
            resolution,
            1,
            DomainKind::Interval,
            resolution,
        ),
        DomainKind::UnitDisc => unit_disc(resolution),
    }
}

/// Structured triangulation of an axis-aligned rectangle (`nx × ny` squares,
/// each split along the up-right diagonal).
pub fn structured_rectangle(
    lo: Point,
    hi: Point,
    nx: u32,
    ny: u32,
    domain: DomainKind,
    resolution: u32,
) -> Result<MeshTopology> {
    let (nx, ny) = (nx as usize, ny as usize);
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64,
            ]);
        }
    }
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
            cells.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(i, 0), vid(i + 1, 0)],
            normal: [0.0, -1.0],
        });
    }
    for j in 0..ny {
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(nx, j), vid(nx, j + 1)],
            normal: [1.0, 0.0],
        });
    }
    for i in (0..nx).rev() {
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(i + 1, ny), vid(i, ny)],
            normal: [0.0, 1.0],
        });
    }
    for j in (0..ny).rev() {
        boundary_edges.push(BoundaryEdge {
            vertices: [vid(0, j + 1), vid(0, j)],
            normal: [-1.0, 0.0],
        });
    }
    MeshTopology::finish(vertices, cells, boundary_edges, domain, resolution, 1.0)
}

fn unit_disc(n: u32) -> Result<MeshTopology> {
    let n = n as usize;
    let ring_start = |j: usize| if j == 0 { 0 } else { 1 + 3 * j * (j - 1) };
    let ring_len = |j: usize| if j == 0 { 1 } else { 6 * j };
    let mut vertices = Vec::with_capacity(1 + 3 * n * (n + 1));
    vertices.push([0.0, 0.0]);
    for j in 1..=n {
        let r = j as f64 / n as f64;
        for t in 0..ring_len(j) {
            let theta = 2.0 * PI * t as f64 / ring_len(j) as f64;
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut cells = Vec::with_capacity(6 * n * n);
    // Innermost fan.
    for t in 0..6 {
        cells.push([0, 1 + t, 1 + (t + 1) % 6]);
    }
    for j in 1..n {
        let inner = ring_start(j);
        let outer = ring_start(j + 1);
        let li = ring_len(j);
        let lo = ring_len(j + 1);
        for s in 0..6 {
            for t in 0..=j {
                let o0 = outer + (s * (j + 1) + t) % lo;
                let o1 = outer + (s * (j + 1) + t + 1) % lo;
                let i0 = inner + (s * j + t) % li;
                cells.push([o0, o1, i0]);
                if t < j {
                    let i1 = inner + (s * j + t + 1) % li;
                    cells.push([o1, i1, i0]);
                }
            }
        }
    }
    let outer = ring_start(n);
    let lo = ring_len(n);
    let mut boundary_edges = Vec::with_capacity(lo);
    for t in 0..lo {
        let a = outer + t;
        let b = outer + (t + 1) % lo;
        let mid = [
            0.5 * (vertices[a][0] + vertices[b][0]),
            0.5 * (vertices[a][1] + vertices[b][1]),
        ];
        let norm = (mid[0] * mid[0] + mid[1] * mid[1]).sqrt();
        boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            normal: [mid[0] / norm, mid[1] / norm],
        });
    }
    MeshTopology::finish(
        vertices,
        cells,
        boundary_edges,
        DomainKind::UnitDisc,
        n as u32,
        1.0,
    )
}

impl InclusionMask {
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Distance from the mask to the boundary; `+inf` for an empty mask.
    pub fn dist_to_boundary(&self) -> f64 {
        self.dist_to_boundary
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }
}

fn mask_from_cells(mesh: &MeshTopology, mut cells: Vec<usize>) -> InclusionMask {
    cells.sort_unstable();
    cells.dedup();
    let area = cells.iter().map(|&c| mesh.cell_area(c)).sum();
    let mut dist = f64::INFINITY;
    for &c in &cells {
        for &v in &mesh.cells()[c] {
            dist = dist.min(mesh.distance_to_boundary(mesh.vertices()[v]));
        }
    }
    InclusionMask {
        cells,
        area,
        dist_to_boundary: dist,
    }
}

/// Mask of the cells whose centroids satisfy `shape`.
pub fn inclusion_mask<F: Fn(Point) -> bool>(mesh: &MeshTopology, shape: F) -> InclusionMask {
    let cells = (0..mesh.n_cells())
        .filter(|&c| shape(mesh.cell_centroid(c)))
        .collect();
    mask_from_cells(mesh, cells)
}

/// Mask of `Ω_r`: cells whose centroids lie at distance `> r` from `∂Ω`.
///
/// May be empty; callers that need `Ω_r ≠ ∅` must check.
pub fn interior_offset(mesh: &MeshTopology, r: f64) -> Result<InclusionMask> {
    if r < 0.0 {
        return Err(Error::InvalidArgument("offset must be nonnegative".into()));
    }
    Ok(inclusion_mask(mesh, |p| mesh.distance_to_boundary(p) > r))
}

/// Set union of two masks on the same mesh.
pub fn mask_union(mesh: &MeshTopology, a: &InclusionMask, b: &InclusionMask) -> InclusionMask {
    let mut cells = a.cells.clone();
    cells.extend_from_slice(&b.cells);
    mask_from_cells(mesh, cells)
}

/// Set intersection of two masks on the same mesh.
pub fn mask_intersection(
    mesh: &MeshTopology,
    a: &InclusionMask,
    b: &InclusionMask,
) -> InclusionMask {
    let cells = a
        .cells
        .iter()
        .copied()
        .filter(|&c| b.contains(c))
        .collect();
    mask_from_cells(mesh, cells)
}

/// Builds the arclength chart of the boundary loop, counterclockwise from the
/// lexicographically smallest boundary vertex.
pub fn boundary_chart(mesh: &MeshTopology) -> Result<BoundaryChart> {
    mesh.validate()?;
    let edges = mesh.boundary_edges();
    let mut outgoing = alloc::collections::BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        outgoing.insert(e.vertices[0], i);
    }
    let anchor = outgoing
        .keys()
        .copied()
        .min_by(|&a, &b| {
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            pa.partial_cmp(&pb).unwrap()
        })
        .ok_or_else(|| Error::InvalidMesh("mesh has no boundary".into()))?;
    let mut loop_edges = Vec::with_capacity(edges.len());
    let mut vertex_arclength = Vec::with_capacity(edges.len());
    let mut s = 0.0;
    let mut at = anchor;
    loop {
        let edge = *outgoing
            .get(&at)
            .ok_or_else(|| Error::InvalidMesh("disconnected boundary".into()))?;
        vertex_arclength.push((at, s));
        loop_edges.push(edge);
        let [a, b] = edges[edge].vertices;
        s += dist(mesh.vertices()[a], mesh.vertices()[b]);
        at = b;
        if at == anchor {
            break;
        }
    }
    Ok(BoundaryChart {
        loop_edges,
        vertex_arclength,
        total_length: s,
    })
}

impl BoundaryChart {
    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Boundary edge indices in loop order.
    pub fn loop_edges(&self) -> &[usize] {
        &self.loop_edges
    }

    /// `(vertex, arclength)` pairs in loop order; anchor first at `s = 0`.
    pub fn vertex_arclengths(&self) -> &[(usize, f64)] {
        &self.vertex_arclength
    }

    pub fn arclength_of_vertex(&self, vertex: usize) -> Option<f64> {
        self.vertex_arclength
            .iter()
            .find(|(v, _)| *v == vertex)
            .map(|(_, s)| *s)
    }

    /// Arclength of the start of the k-th loop edge.
    pub fn edge_start(&self, loop_pos: usize) -> f64 {
        self.vertex_arclength[loop_pos].1
    }

    /// Length of the k-th loop edge.
    pub fn edge_length(&self, loop_pos: usize) -> f64 {
        let s0 = self.vertex_arclength[loop_pos].1;
        let s1 = if loop_pos + 1 < self.vertex_arclength.len() {
            self.vertex_arclength[loop_pos + 1].1
        } else {
            self.total_length
        };
        s1 - s0
    }

    /// Wraps an arclength into `[0, L)`.
    pub fn wrap(&self, s: f64) -> f64 {
        let l = self.total_length;
        let mut t = s % l;
        if t < 0.0 {
            t += l;
        }
        t
    }

    /// Locates an arclength: returns the loop position of the edge containing
    /// it and the offset from the edge start.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let s = self.wrap(s);
        // Last loop position whose start is <= s.
        let mut lo = 0usize;
        let mut hi = self.vertex_arclength.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.vertex_arclength[mid].1 <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, s - self.vertex_arclength[lo].1)
    }

    /// Snaps an arclength to the nearest loop-vertex arclength.
    pub fn snap_to_vertex(&self, s: f64) -> f64 {
        let s = self.wrap(s);
        let mut best = 0.0;
        let mut delta = f64::INFINITY;
        for &(_, sv) in &self.vertex_arclength {
            for cand in [sv, sv + self.total_length, sv - self.total_length] {
                if (cand - s).abs() < delta {
                    delta = (cand - s).abs();
                    best = self.wrap(cand);
                }
            }
        }
        best
    }
}
