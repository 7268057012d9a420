//! Conforming triangulations of one subdomain: structured generators,
//! newest-vertex bisection refinement and per-element geometry.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::{Point, Segment};

/// Tag carried by every boundary facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Dirichlet,
    Interface,
}

/// Undirected edge identifier: vertex pair with the smaller index first.
pub type EdgeKey = (usize, usize);

pub fn edge_key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Which of the two geometries an experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    SplitRect,
    LShape,
}

/// Domain description shared by both subdomain meshes: the kind and the
/// straight interface segment Γ.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub interface: Segment,
}

/// Triangulation of one subdomain.
///
/// Immutable after construction; `refine` returns a new mesh. Local edge
/// `i` of a triangle is the edge opposite local vertex `i`, i.e. it
/// connects local vertices `(i+1)%3` and `(i+2)%3`.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    /// Local index of the newest-vertex-bisection edge of each triangle.
    refinement_edge: Vec<u8>,
    boundary_tags: BTreeMap<EdgeKey, BoundaryTag>,
}

/// Geometry of one triangle: area, edges, outward normals and the affine
/// map x = B ξ + v0 from the reference triangle {(0,0),(1,0),(0,1)}.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub area: f64,
    /// Edge lengths indexed by local edge (opposite the local vertex).
    pub edge_len: [f64; 3],
    /// Outward unit normals per local edge.
    pub normals: [Point; 3],
    /// Columns of B: (v1 - v0, v2 - v0).
    pub jac: [[f64; 2]; 2],
    /// Inverse transpose of B; maps reference gradients to physical ones.
    pub inv_jac_t: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementGeometry {
    /// Longest edge of the triangle (used as the element diameter).
    pub fn diameter(&self) -> f64 {
        self.edge_len.iter().cloned().fold(0.0, f64::max)
    }

    /// Physical point of reference coordinates (ξ, η).
    pub fn map_point(&self, v0: Point, xi: f64, eta: f64) -> Point {
        Point::new(
            v0.x + self.jac[0][0] * xi + self.jac[0][1] * eta,
            v0.y + self.jac[1][0] * xi + self.jac[1][1] * eta,
        )
    }

    /// Physical gradient from a reference gradient.
    pub fn push_gradient(&self, g: (f64, f64)) -> Point {
        Point::new(
            self.inv_jac_t[0][0] * g.0 + self.inv_jac_t[0][1] * g.1,
            self.inv_jac_t[1][0] * g.0 + self.inv_jac_t[1][1] * g.1,
        )
    }
}

impl Mesh {
    /// Build a mesh from raw arrays. Validates orientation and conformity
    /// and assigns the initial refinement edge of every triangle to its
    /// longest edge.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_tags: BTreeMap<EdgeKey, BoundaryTag>,
    ) -> Result<Mesh> {
        let mut refinement_edge = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            if a >= vertices.len() || b >= vertices.len() || c >= vertices.len() {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a vertex out of range"
                )));
            }
            let area = 0.5 * (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]);
            if area <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive area {area}"
                )));
            }
            let mut longest = 0u8;
            let mut len = -1.0;
            for e in 0..3 {
                let (p, q) = local_edge(tri, e);
                let l = vertices[p].dist(vertices[q]);
                if l > len {
                    len = l;
                    longest = e as u8;
                }
            }
            refinement_edge.push(longest);
        }
        let mesh = Mesh {
            vertices,
            triangles,
            refinement_edge,
            boundary_tags,
        };
        mesh.check_conformity()?;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn refinement_edge(&self, t: usize) -> u8 {
        self.refinement_edge[t]
    }

    pub fn boundary_tags(&self) -> &BTreeMap<EdgeKey, BoundaryTag> {
        &self.boundary_tags
    }

    pub fn tag_of(&self, key: EdgeKey) -> Option<BoundaryTag> {
        self.boundary_tags.get(&key).copied()
    }

    /// Vertex indices of local edge `e` of triangle `t`.
    pub fn edge_vertices(&self, t: usize, e: usize) -> (usize, usize) {
        local_edge(&self.triangles[t], e)
    }

    pub fn edge_key_of(&self, t: usize, e: usize) -> EdgeKey {
        let (a, b) = self.edge_vertices(t, e);
        edge_key(a, b)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        Point::new(
            (self.vertices[a].x + self.vertices[b].x + self.vertices[c].x) / 3.0,
            (self.vertices[a].y + self.vertices[b].y + self.vertices[c].y) / 3.0,
        )
    }

    /// Map from every edge to the triangles sharing it (1 or 2 entries).
    pub fn edge_adjacency(&self) -> BTreeMap<EdgeKey, Vec<usize>> {
        let mut map: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        for (t, _) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                map.entry(self.edge_key_of(t, e)).or_default().push(t);
            }
        }
        map
    }

    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        if t >= self.triangles.len() {
            return Err(Error::InvalidArgument(format!(
                "triangle index {t} out of range"
            )));
        }
        let [a, b, c] = self.triangles[t];
        let (va, vb, vc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let d1 = vb - va;
        let d2 = vc - va;
        let det = d1.cross(d2);
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "triangle {t} is degenerate (det = {det})"
            )));
        }
        let jac = [[d1.x, d2.x], [d1.y, d2.y]];
        // inv(B)^T for B = [[d1.x, d2.x], [d1.y, d2.y]].
        let inv_jac_t = [[d2.y / det, -d1.y / det], [-d2.x / det, d1.x / det]];
        let mut edge_len = [0.0; 3];
        let mut normals = [Point::default(); 3];
        let vs = [va, vb, vc];
        for e in 0..3 {
            let p = vs[(e + 1) % 3];
            let q = vs[(e + 2) % 3];
            let tangent = q - p;
            edge_len[e] = tangent.norm();
            // CCW orientation: the outward normal is the forward tangent
            // rotated clockwise.
            normals[e] = Point::new(tangent.y, -tangent.x).normalized();
        }
        Ok(ElementGeometry {
            area: 0.5 * det,
            edge_len,
            normals,
            jac,
            inv_jac_t,
            det,
        })
    }

    /// Longest edge in the mesh.
    pub fn h_max(&self) -> f64 {
        let mut h: f64 = 0.0;
        for tri in &self.triangles {
            for e in 0..3 {
                let (p, q) = local_edge(tri, e);
                h = h.max(self.vertices[p].dist(self.vertices[q]));
            }
        }
        h
    }

    /// Smallest interior angle in the mesh, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for tri in &self.triangles {
            let vs = [
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            ];
            for i in 0..3 {
                let u = vs[(i + 1) % 3] - vs[i];
                let w = vs[(i + 2) % 3] - vs[i];
                let angle = (u.dot(w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos();
                min = min.min(angle);
            }
        }
        min
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| {
                let [a, b, c] = self.triangles[t];
                0.5 * (self.vertices[b] - self.vertices[a])
                    .cross(self.vertices[c] - self.vertices[a])
            })
            .sum()
    }

    /// Checks that every interior edge is shared by exactly two triangles,
    /// every boundary edge by one, and that tags sit exactly on the
    /// boundary edges.
    pub fn check_conformity(&self) -> Result<()> {
        let adjacency = self.edge_adjacency();
        for (key, tris) in &adjacency {
            match tris.len() {
                1 => {
                    if !self.boundary_tags.contains_key(key) {
                        return Err(Error::InvalidMesh(format!(
                            "boundary edge {key:?} has no tag"
                        )));
                    }
                }
                2 => {
                    if self.boundary_tags.contains_key(key) {
                        return Err(Error::InvalidMesh(format!(
                            "interior edge {key:?} carries a boundary tag"
                        )));
                    }
                }
                n => {
                    return Err(Error::InvalidMesh(format!(
                        "edge {key:?} shared by {n} triangles"
                    )))
                }
            }
        }
        for key in self.boundary_tags.keys() {
            if !adjacency.contains_key(key) {
                return Err(Error::InvalidMesh(format!(
                    "tagged facet {key:?} is not a mesh edge"
                )));
            }
        }
        Ok(())
    }

    /// Plain-text dump: `v x y`, `t i j k`, `f i j TAG` lines.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {}", v.x, v.y)?;
        }
        for t in &self.triangles {
            writeln!(w, "t {} {} {}", t[0], t[1], t[2])?;
        }
        for (&(a, b), tag) in &self.boundary_tags {
            let name = match tag {
                BoundaryTag::Dirichlet => "DIRICHLET",
                BoundaryTag::Interface => "INTERFACE",
            };
            writeln!(w, "f {a} {b} {name}")?;
        }
        Ok(())
    }
}

fn local_edge(tri: &[usize; 3], e: usize) -> (usize, usize) {
    (tri[(e + 1) % 3], tri[(e + 2) % 3])
}

/// Structured triangulation of the rectangle [xmin,xmax] × [ymin,ymax]
/// with `nx` × `ny` cells, two triangles each. The diagonal direction
/// alternates per cell row, shifted by `diag_offset`. Boundary facets on
/// `interface` are tagged [`BoundaryTag::Interface`], all others
/// [`BoundaryTag::Dirichlet`].
#[allow(clippy::too_many_arguments)]
pub fn gen_rect_mesh(
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    nx: usize,
    ny: usize,
    diag_offset: usize,
    interface: Option<&Segment>,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument(
            "gen_rect_mesh: cell counts must be at least 1".into(),
        ));
    }
    if xmax <= xmin || ymax <= ymin {
        return Err(Error::InvalidArgument("gen_rect_mesh: empty extent".into()));
    }
    let hx = (xmax - xmin) / nx as f64;
    let hy = (ymax - ymin) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point::new(xmin + i as f64 * hx, ymin + j as f64 * hy));
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = vid(i, j);
            let b = vid(i + 1, j);
            let c = vid(i + 1, j + 1);
            let d = vid(i, j + 1);
            if (j + diag_offset).is_multiple_of(2) {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let tags = tag_boundary(&vertices, &triangles, interface);
    Mesh::new(vertices, triangles, tags)
}

/// Tags every boundary edge of the triangle soup: edges on `interface`
/// become [`BoundaryTag::Interface`], the rest [`BoundaryTag::Dirichlet`].
fn tag_boundary(
    vertices: &[Point],
    triangles: &[[usize; 3]],
    interface: Option<&Segment>,
) -> BTreeMap<EdgeKey, BoundaryTag> {
    let mut counts: BTreeMap<EdgeKey, usize> = BTreeMap::new();
    for tri in triangles {
        for e in 0..3 {
            let (a, b) = local_edge(tri, e);
            *counts.entry(edge_key(a, b)).or_insert(0) += 1;
        }
    }
    let mut tags = BTreeMap::new();
    for (key, count) in counts {
        if count != 1 {
            continue;
        }
        let on_interface = interface
            .map(|seg| {
                seg.contains(vertices[key.0], INTERFACE_TOL)
                    && seg.contains(vertices[key.1], INTERFACE_TOL)
            })
            .unwrap_or(false);
        let tag = if on_interface {
            BoundaryTag::Interface
        } else {
            BoundaryTag::Dirichlet
        };
        tags.insert(key, tag);
    }
    tags
}

/// Tolerance for deciding that a facet endpoint lies on Γ.
pub const INTERFACE_TOL: f64 = 1e-12;

/// The L-shaped domain (−1,1)² \ [0,1)×(−1,0], split into
/// Ω1 = (−1,0)×(−1,1) and Ω2 = (0,1)×(0,1) along Γ = {0}×[0,1]. The
/// reentrant corner at the origin is an endpoint of Γ. Initial meshes are
/// deliberately non-matching on Γ (facet lengths 1/3 vs 1/4).
pub fn gen_lshape_meshes() -> Result<(Mesh, Mesh)> {
    let gamma = lshape_geometry().interface;
    let mesh1 = gen_rect_mesh(-1.0, 0.0, -1.0, 1.0, 3, 6, 0, Some(&gamma))?;
    let mesh2 = gen_rect_mesh(0.0, 1.0, 0.0, 1.0, 4, 4, 0, Some(&gamma))?;
    Ok((mesh1, mesh2))
}

pub fn lshape_geometry() -> Geometry {
    Geometry {
        kind: GeometryKind::LShape,
        interface: Segment::new(Point::new(0.0, 0.0), Point::new(0.0, 1.0)),
    }
}

pub fn split_rect_geometry() -> Geometry {
    Geometry {
        kind: GeometryKind::SplitRect,
        interface: Segment::new(Point::new(1.0, 0.0), Point::new(1.0, 1.0)),
    }
}

/// Newest-vertex bisection of all `marked` triangles plus the closure
/// bisections needed to stay conforming. Child facets inherit boundary
/// tags. Returns a new mesh.
pub fn refine(mesh: &Mesh, marked: &[usize]) -> Mesh {
    let mut edge_marks: BTreeSet<EdgeKey> = BTreeSet::new();
    for &t in marked {
        assert!(t < mesh.n_triangles(), "marked triangle out of range");
        edge_marks.insert(mesh.edge_key_of(t, mesh.refinement_edge(t) as usize));
    }
    refine_marked_edges(mesh, edge_marks)
}

/// Refine with every edge of every triangle marked: each triangle splits
/// into four, every edge is halved.
pub fn uniform_refine(mesh: &Mesh) -> Mesh {
    let mut edge_marks: BTreeSet<EdgeKey> = BTreeSet::new();
    for t in 0..mesh.n_triangles() {
        for e in 0..3 {
            edge_marks.insert(mesh.edge_key_of(t, e));
        }
    }
    refine_marked_edges(mesh, edge_marks)
}

fn refine_marked_edges(mesh: &Mesh, mut edge_marks: BTreeSet<EdgeKey>) -> Mesh {
    if edge_marks.is_empty() {
        return mesh.clone();
    }
    // Closure: a triangle with any marked edge must have its refinement
    // edge marked, so the bisection cascade below halves exactly the
    // marked edges.
    loop {
        let mut changed = false;
        for t in 0..mesh.n_triangles() {
            let ref_key = mesh.edge_key_of(t, mesh.refinement_edge(t) as usize);
            if edge_marks.contains(&ref_key) {
                continue;
            }
            let any = (0..3).any(|e| edge_marks.contains(&mesh.edge_key_of(t, e)));
            if any {
                edge_marks.insert(ref_key);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut vertices = mesh.vertices.clone();
    let mut midpoints: BTreeMap<EdgeKey, usize> = BTreeMap::new();
    for &key in &edge_marks {
        let m = vertices.len();
        vertices.push(mesh.vertices[key.0].midpoint(mesh.vertices[key.1]));
        midpoints.insert(key, m);
    }

    let mut triangles = Vec::with_capacity(mesh.n_triangles() * 2);
    let mut refinement_edge = Vec::with_capacity(mesh.n_triangles() * 2);
    for t in 0..mesh.n_triangles() {
        emit_split(
            mesh.triangles[t],
            mesh.refinement_edge[t],
            &midpoints,
            &mut triangles,
            &mut refinement_edge,
        );
    }

    let mut boundary_tags = BTreeMap::new();
    for (&(a, b), &tag) in &mesh.boundary_tags {
        match midpoints.get(&(a, b)) {
            Some(&m) => {
                boundary_tags.insert(edge_key(a, m), tag);
                boundary_tags.insert(edge_key(m, b), tag);
            }
            None => {
                boundary_tags.insert((a, b), tag);
            }
        }
    }

    Mesh {
        vertices,
        triangles,
        refinement_edge,
        boundary_tags,
    }
}

/// Recursively bisect `tri` while its refinement edge is marked. The
/// cascade depth is at most two: grandchild refinement edges end at new
/// midpoint vertices, which never appear in `midpoints` keys.
fn emit_split(
    tri: [usize; 3],
    ref_edge: u8,
    midpoints: &BTreeMap<EdgeKey, usize>,
    out_tris: &mut Vec<[usize; 3]>,
    out_ref: &mut Vec<u8>,
) {
    let k = ref_edge as usize;
    let apex = tri[k];
    let p = tri[(k + 1) % 3];
    let q = tri[(k + 2) % 3];
    match midpoints.get(&edge_key(p, q)) {
        Some(&m) => {
            // Children keep the apex first; their refinement edges are the
            // parent's two remaining edges (newest vertex is m).
            emit_split([apex, p, m], 2, midpoints, out_tris, out_ref);
            emit_split([apex, m, q], 1, midpoints, out_tris, out_ref);
        }
        None => {
            out_tris.push(tri);
            out_ref.push(ref_edge);
        }
    }
}
