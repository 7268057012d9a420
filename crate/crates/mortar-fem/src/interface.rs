//! Mortar decomposition of the interface Γ and trace evaluation.
//!
//! Both meshes tag facets on Γ independently; the mortar segments are
//! the intervals between the merged arc-length breakpoints of the two
//! facet sets. Every segment lies inside exactly one facet of each mesh,
//! which makes traces from both sides polynomial on the segment.

use crate::error::{Error, Result};
use crate::geom::{Point, Segment};
use crate::mesh::{BoundaryTag, Mesh};
use crate::space::{eval_basis, eval_basis_grad, DofMap, MAX_LOCAL};

/// One side of a mortar segment: the owning triangle/facet of that mesh
/// and the affine map from arc length to reference coordinates.
#[derive(Debug, Clone, Copy)]
pub struct SegmentSide {
    pub tri: usize,
    pub local_edge: usize,
    /// Arc-length interval of the whole owning facet.
    pub facet_s0: f64,
    pub facet_s1: f64,
    /// Reference coordinates of the facet endpoints at `facet_s0` and
    /// `facet_s1` inside the owning triangle.
    ref0: (f64, f64),
    ref1: (f64, f64),
}

impl SegmentSide {
    /// Reference coordinates of the point at arc length `s`.
    pub fn ref_point(&self, s: f64) -> Result<(f64, f64)> {
        let len = self.facet_s1 - self.facet_s0;
        let tol = 1e-9 * len;
        if s < self.facet_s0 - tol || s > self.facet_s1 + tol {
            return Err(Error::Internal(format!(
                "trace point s = {s} outside owning facet [{}, {}]",
                self.facet_s0, self.facet_s1
            )));
        }
        let t = (s - self.facet_s0) / len;
        Ok((
            self.ref0.0 + t * (self.ref1.0 - self.ref0.0),
            self.ref0.1 + t * (self.ref1.1 - self.ref0.1),
        ))
    }

    pub fn facet_length(&self) -> f64 {
        self.facet_s1 - self.facet_s0
    }
}

/// One sub-interval of Γ with the owning facet on each side.
#[derive(Debug, Clone, Copy)]
pub struct MortarSegment {
    pub s0: f64,
    pub s1: f64,
    pub side1: SegmentSide,
    pub side2: SegmentSide,
    /// Local mesh length: the side-1 facet length containing this segment.
    pub h_e: f64,
    /// Outward unit normal of subdomain 1 on Γ.
    pub normal1: Point,
}

impl MortarSegment {
    pub fn length(&self) -> f64 {
        self.s1 - self.s0
    }

    pub fn side(&self, which: usize) -> &SegmentSide {
        match which {
            0 => &self.side1,
            1 => &self.side2,
            _ => panic!("side index must be 0 or 1"),
        }
    }
}

struct Facet {
    tri: usize,
    local_edge: usize,
    s_lo: f64,
    s_hi: f64,
    /// Reference coords of the endpoints at s_lo / s_hi.
    ref_lo: (f64, f64),
    ref_hi: (f64, f64),
}

const REF_COORDS: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];

fn collect_facets(mesh: &Mesh, gamma: &Segment) -> Result<Vec<Facet>> {
    let mut facets = Vec::new();
    for t in 0..mesh.n_triangles() {
        for e in 0..3 {
            let key = mesh.edge_key_of(t, e);
            if mesh.tag_of(key) != Some(BoundaryTag::Interface) {
                continue;
            }
            let (a, b) = mesh.edge_vertices(t, e);
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            for p in [pa, pb] {
                if gamma.line_distance(p) > tol_for(gamma) {
                    return Err(Error::GeometryMismatch(format!(
                        "interface facet endpoint {p:?} off the interface line"
                    )));
                }
            }
            let sa = gamma.arc_coord(pa);
            let sb = gamma.arc_coord(pb);
            // Local vertex indices of the edge endpoints: edge e connects
            // local vertices (e+1)%3 and (e+2)%3.
            let la = (e + 1) % 3;
            let lb = (e + 2) % 3;
            let (s_lo, s_hi, ref_lo, ref_hi) = if sa <= sb {
                (sa, sb, REF_COORDS[la], REF_COORDS[lb])
            } else {
                (sb, sa, REF_COORDS[lb], REF_COORDS[la])
            };
            facets.push(Facet {
                tri: t,
                local_edge: e,
                s_lo,
                s_hi,
                ref_lo,
                ref_hi,
            });
        }
    }
    facets.sort_by(|a, b| a.s_lo.partial_cmp(&b.s_lo).unwrap());
    Ok(facets)
}

fn tol_for(gamma: &Segment) -> f64 {
    1e-12 * gamma.length().max(1.0)
}

fn check_coverage(facets: &[Facet], gamma: &Segment, which: &str) -> Result<()> {
    let tol = tol_for(gamma);
    if facets.is_empty() {
        return Err(Error::GeometryMismatch(format!(
            "mesh {which} has no interface facets"
        )));
    }
    if facets[0].s_lo.abs() > tol || (facets.last().unwrap().s_hi - gamma.length()).abs() > tol {
        return Err(Error::GeometryMismatch(format!(
            "mesh {which} interface extent [{}, {}] does not match Γ length {}",
            facets[0].s_lo,
            facets.last().unwrap().s_hi,
            gamma.length()
        )));
    }
    for pair in facets.windows(2) {
        if (pair[0].s_hi - pair[1].s_lo).abs() > tol {
            return Err(Error::GeometryMismatch(format!(
                "mesh {which} interface facets leave a gap at s = {}",
                pair[0].s_hi
            )));
        }
    }
    Ok(())
}

/// Builds the merged-breakpoint mortar partition of Γ from the interface
/// facets of the two meshes.
pub fn build_mortar_segments(
    mesh1: &Mesh,
    mesh2: &Mesh,
    gamma: &Segment,
) -> Result<Vec<MortarSegment>> {
    let facets1 = collect_facets(mesh1, gamma)?;
    let facets2 = collect_facets(mesh2, gamma)?;
    check_coverage(&facets1, gamma, "1")?;
    check_coverage(&facets2, gamma, "2")?;

    let tol = tol_for(gamma);
    let mut breakpoints: Vec<f64> = Vec::new();
    for f in facets1.iter().chain(facets2.iter()) {
        breakpoints.push(f.s_lo);
        breakpoints.push(f.s_hi);
    }
    breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup_by(|a, b| (*a - *b).abs() <= tol);

    // Outward normal of subdomain 1 on Γ, constant along the straight
    // interface: take it from the first side-1 facet.
    let g0 = mesh1.element_geometry(facets1[0].tri)?;
    let normal1 = g0.normals[facets1[0].local_edge];

    let find_owner = |facets: &[Facet], a: f64, b: f64| -> Result<usize> {
        // Facets tile Γ and are sorted by s_lo: the owner is the last
        // facet starting at or before the segment.
        let idx = facets.partition_point(|f| f.s_lo <= a + tol);
        let i = idx.saturating_sub(1);
        let f = &facets[i];
        if idx > 0 && f.s_lo <= a + tol && f.s_hi >= b - tol {
            return Ok(i);
        }
        Err(Error::Internal(format!(
            "no owning facet for segment [{a}, {b}]"
        )))
    };

    let mut segments = Vec::with_capacity(breakpoints.len().saturating_sub(1));
    for pair in breakpoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a <= tol {
            continue;
        }
        let f1 = &facets1[find_owner(&facets1, a, b)?];
        let f2 = &facets2[find_owner(&facets2, a, b)?];
        let side = |f: &Facet| SegmentSide {
            tri: f.tri,
            local_edge: f.local_edge,
            facet_s0: f.s_lo,
            facet_s1: f.s_hi,
            ref0: f.ref_lo,
            ref1: f.ref_hi,
        };
        segments.push(MortarSegment {
            s0: a,
            s1: b,
            side1: side(f1),
            side2: side(f2),
            h_e: f1.s_hi - f1.s_lo,
            normal1,
        });
    }
    Ok(segments)
}

/// Local basis values of the owning element of `side` at arc length `s`,
/// together with the global DOF indices they belong to.
pub fn trace_basis<'a>(
    dofmap: &'a DofMap,
    side: &SegmentSide,
    s: f64,
) -> Result<([f64; MAX_LOCAL], &'a [usize])> {
    let (xi, eta) = side.ref_point(s)?;
    Ok((
        eval_basis(dofmap.degree, xi, eta),
        dofmap.cell_dofs(side.tri),
    ))
}

/// Normal-derivative values ∂φ/∂n of the owning element's basis at arc
/// length `s`, for the given unit normal.
pub fn trace_normal_deriv_basis<'a>(
    mesh: &Mesh,
    dofmap: &'a DofMap,
    side: &SegmentSide,
    s: f64,
    normal: Point,
) -> Result<([f64; MAX_LOCAL], &'a [usize])> {
    let (xi, eta) = side.ref_point(s)?;
    let geo = mesh.element_geometry(side.tri)?;
    let grads = eval_basis_grad(dofmap.degree, xi, eta);
    let mut out = [0.0; MAX_LOCAL];
    for (k, g) in grads.iter().enumerate().take(dofmap.degree.n_local()) {
        out[k] = geo.push_gradient(*g).dot(normal);
    }
    Ok((out, dofmap.cell_dofs(side.tri)))
}

/// Trace of the FE function at arc length `s`, evaluated from one side.
pub fn eval_trace(dofmap: &DofMap, coeffs: &[f64], side: &SegmentSide, s: f64) -> Result<f64> {
    let (vals, dofs) = trace_basis(dofmap, side, s)?;
    Ok(dofs
        .iter()
        .zip(vals.iter())
        .map(|(&d, &v)| coeffs[d] * v)
        .sum())
}

/// Normal derivative ∂v/∂n of the FE function at arc length `s`,
/// evaluated from the owning element of `side`.
pub fn eval_normal_deriv_trace(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &[f64],
    side: &SegmentSide,
    s: f64,
    normal: Point,
) -> Result<f64> {
    let (vals, dofs) = trace_normal_deriv_basis(mesh, dofmap, side, s, normal)?;
    Ok(dofs
        .iter()
        .zip(vals.iter())
        .map(|(&d, &v)| coeffs[d] * v)
        .sum())
}
