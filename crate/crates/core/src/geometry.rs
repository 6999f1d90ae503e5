//! Closed contours, their segment discretization and the 2D rooftop basis.
//!
//! Contours are stored counterclockwise. Segment normals point into the
//! enclosed region (the +90° rotation of the counterclockwise tangent).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or a free vector in the cross-sectional plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Rotation by +90°, i.e. `ẑ × self`.
    pub fn rot90(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A straight source/observation element `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point2,
    pub end: Point2,
    pub length: f64,
    pub tangent: Point2,
    pub normal: Point2,
}

impl Segment {
    /// Builds a segment whose normal is the +90° rotation of its tangent.
    pub fn new(start: Point2, end: Point2) -> Result<Self> {
        let d = end - start;
        let length = d.norm();
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::invalid(format!(
                "degenerate segment {start:?} -> {end:?}"
            )));
        }
        let tangent = d * (1.0 / length);
        Ok(Segment {
            start,
            end,
            length,
            tangent,
            normal: tangent.rot90(),
        })
    }

    /// Point at arc length `s` from `start`.
    pub fn point_at(&self, s: f64) -> Point2 {
        self.start + self.tangent * s
    }

    pub fn midpoint(&self) -> Point2 {
        (self.start + self.end) * 0.5
    }

    fn translated(&self, offset: Point2) -> Segment {
        Segment {
            start: self.start + offset,
            end: self.end + offset,
            ..*self
        }
    }
}

/// Which side the stored segment normals face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalOrientation {
    Inward,
    Outward,
}

/// A closed polyline `γ_i`. Node `n` is shared by segments `n - 1` and `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub id: usize,
    pub nodes: Vec<Point2>,
    pub segments: Vec<Segment>,
    pub orientation: NormalOrientation,
}

impl Boundary {
    /// Builds a closed contour from its distinct nodes (the closing segment is
    /// implied). Clockwise input is reversed so the contour runs counterclockwise.
    pub fn from_nodes(id: usize, mut nodes: Vec<Point2>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::invalid(format!(
                "a closed contour needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite node coordinate"));
        }
        if signed_area(&nodes) < 0.0 {
            nodes.reverse();
        }
        let n = nodes.len();
        let segments = (0..n)
            .map(|i| Segment::new(nodes[i], nodes[(i + 1) % n]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Boundary {
            id,
            nodes,
            segments,
            orientation: NormalOrientation::Inward,
        })
    }

    /// Number of segments, which equals the number of rooftop functions.
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn centroid(&self) -> Point2 {
        let n = self.nodes.len() as f64;
        let sum = self.nodes.iter().fold(Point2::ORIGIN, |acc, &p| acc + p);
        sum * (1.0 / n)
    }

    pub fn translated(&self, offset: Point2) -> Boundary {
        Boundary {
            id: self.id,
            nodes: self.nodes.iter().map(|&p| p + offset).collect(),
            segments: self.segments.iter().map(|s| s.translated(offset)).collect(),
            orientation: self.orientation,
        }
    }

    pub fn with_id(mut self, id: usize) -> Boundary {
        self.id = id;
        self
    }

    /// Same contour with every normal reversed.
    pub fn with_flipped_normals(&self) -> Boundary {
        let mut out = self.clone();
        for s in &mut out.segments {
            s.normal = -s.normal;
        }
        out.orientation = match self.orientation {
            NormalOrientation::Inward => NormalOrientation::Outward,
            NormalOrientation::Outward => NormalOrientation::Inward,
        };
        out
    }

    /// Even-odd point-in-polygon test against the node polygon.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        let n = self.nodes.len();
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.nodes[i], self.nodes[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Shortest distance from `p` to the contour.
    pub fn distance_to(&self, p: Point2) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let t = (p - s.start).dot(s.tangent).clamp(0.0, s.length);
                p.distance(s.point_at(t))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// True when any segment of `self` crosses any segment of `other`.
    pub fn intersects(&self, other: &Boundary) -> bool {
        self.segments.iter().any(|a| {
            other
                .segments
                .iter()
                .any(|b| segments_intersect(a.start, a.end, b.start, b.end))
        })
    }
}

/// Shoelace signed area; positive for counterclockwise node order.
pub fn signed_area(nodes: &[Point2]) -> f64 {
    let n = nodes.len();
    0.5 * (0..n)
        .map(|i| nodes[i].cross(nodes[(i + 1) % n]))
        .sum::<f64>()
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point2, b: Point2, c: Point2, d: f64| {
        d == 0.0
            && c.x >= a.x.min(b.x)
            && c.x <= a.x.max(b.x)
            && c.y >= a.y.min(b.y)
            && c.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Number of equal pieces covering `len` with pieces no longer than `target`.
fn piece_count(len: f64, target: f64) -> usize {
    // Tolerate round-off when `len` is an exact multiple of `target`.
    let ratio = len / target;
    let n = (ratio - 1e-9 * ratio.max(1.0)).ceil();
    (n as usize).max(1)
}

/// Uniform counterclockwise mesh of a circle with nodes on the circle.
pub fn discretize_circle(center: Point2, radius: f64, target_len: f64) -> Result<Boundary> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!("circle radius must be positive, got {radius}")));
    }
    if !(target_len > 0.0) || !target_len.is_finite() {
        return Err(Error::invalid(format!(
            "target segment length must be positive, got {target_len}"
        )));
    }
    let circumference = 2.0 * PI * radius;
    if target_len >= circumference / 3.0 {
        return Err(Error::invalid(format!(
            "target segment length {target_len} too coarse for radius {radius}"
        )));
    }
    let n = piece_count(circumference, target_len);
    let nodes = (0..n)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n as f64;
            center + Point2::new(radius * phi.cos(), radius * phi.sin())
        })
        .collect();
    Boundary::from_nodes(0, nodes)
}

/// Splits every polygon edge into equal pieces; corners are always nodes.
pub fn discretize_polygon(vertices: &[Point2], target_len: f64) -> Result<Boundary> {
    if vertices.len() < 3 {
        return Err(Error::invalid(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    if !(target_len > 0.0) || !target_len.is_finite() {
        return Err(Error::invalid(format!(
            "target segment length must be positive, got {target_len}"
        )));
    }
    if signed_area(vertices).abs() == 0.0 {
        return Err(Error::invalid("polygon has zero area"));
    }
    check_simple(vertices)?;
    let mut verts = vertices.to_vec();
    if signed_area(&verts) < 0.0 {
        verts.reverse();
    }
    let n = verts.len();
    let mut nodes = Vec::new();
    for i in 0..n {
        let (a, b) = (verts[i], verts[(i + 1) % n]);
        let pieces = piece_count(a.distance(b), target_len);
        for p in 0..pieces {
            let t = p as f64 / pieces as f64;
            nodes.push(a + (b - a) * t);
        }
    }
    Boundary::from_nodes(0, nodes)
}

fn check_simple(v: &[Point2]) -> Result<()> {
    let n = v.len();
    for i in 0..n {
        let (a1, a2) = (v[i], v[(i + 1) % n]);
        if a1 == a2 {
            return Err(Error::invalid(format!("repeated polygon vertex {i}")));
        }
        for j in (i + 1)..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b1, b2) = (v[j], v[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return Err(Error::invalid(format!(
                    "self-intersecting polygon: edges {i} and {j} cross"
                )));
            }
        }
    }
    Ok(())
}

/// Piecewise-linear tangential rooftop centred on node `index`.
///
/// Supported on `minus_segment = [r_{n-1}, r_n]` (rising profile) and
/// `plus_segment = [r_n, r_{n+1}]` (falling profile).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub index: usize,
    pub minus_segment: usize,
    pub plus_segment: usize,
    pub apex: Point2,
}

impl BasisFunction {
    /// Scalar profile at arc length `s` along segment `seg` (measured from the
    /// segment start). Zero off the support.
    pub fn profile(&self, boundary: &Boundary, seg: usize, s: f64) -> f64 {
        let l = boundary.segments[seg].length;
        if seg == self.minus_segment && seg == self.plus_segment {
            unreachable!("a closed contour has at least 3 segments")
        } else if seg == self.minus_segment {
            s / l
        } else if seg == self.plus_segment {
            (l - s) / l
        } else {
            0.0
        }
    }

    /// Vector value `f_n` at arc length `s` on segment `seg`.
    pub fn value(&self, boundary: &Boundary, seg: usize, s: f64) -> Point2 {
        boundary.segments[seg].tangent * self.profile(boundary, seg, s)
    }

    /// Surface divergence on segment `seg`.
    pub fn divergence(&self, boundary: &Boundary, seg: usize) -> f64 {
        let l = boundary.segments[seg].length;
        if seg == self.minus_segment {
            1.0 / l
        } else if seg == self.plus_segment {
            -1.0 / l
        } else {
            0.0
        }
    }
}

/// One rooftop per node of the closed contour.
pub fn build_basis(boundary: &Boundary) -> Result<Vec<BasisFunction>> {
    let n = boundary.len();
    if n < 3 || boundary.nodes.len() != n {
        return Err(Error::invalid("basis requires a closed contour with >= 3 segments"));
    }
    for i in 0..n {
        let next = &boundary.segments[(i + 1) % n];
        if boundary.segments[i].end != next.start {
            return Err(Error::invalid(format!("contour is open between segments {i} and {}", (i + 1) % n)));
        }
    }
    Ok((0..n)
        .map(|i| BasisFunction {
            index: i,
            minus_segment: (i + n - 1) % n,
            plus_segment: i,
            apex: boundary.nodes[i],
        })
        .collect())
}

/// Local frame of an observation point relative to a source segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularGeometry {
    /// Foot of the perpendicular from the observation point onto the segment line.
    pub projection: Point2,
    /// `(start - r)·τ'`
    pub l1: f64,
    /// `(end - r)·τ'`
    pub l2: f64,
    /// `|r - p|`
    pub dist: f64,
    /// `r - p`, perpendicular to the segment.
    pub offset: Point2,
}

impl SingularGeometry {
    /// Same frame with the observation point snapped onto the segment line.
    pub fn on_line(self) -> Self {
        SingularGeometry {
            dist: 0.0,
            offset: Point2::ORIGIN,
            ..self
        }
    }
}

pub fn project_onto_segment(r: Point2, seg: &Segment) -> SingularGeometry {
    let tau = seg.tangent;
    let l1 = (seg.start - r).dot(tau);
    let l2 = (seg.end - r).dot(tau);
    let projection = seg.start - tau * l1;
    let offset = r - projection;
    SingularGeometry {
        projection,
        l1,
        l2,
        dist: offset.norm(),
        offset,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn circle_segment_count() {
        let b = discretize_circle(Point2::ORIGIN, 0.5, 0.025).unwrap();
        assert_eq!(b.len(), 126);
        let c = 2.0 * PI * 0.5;
        assert_eq!(discretize_circle(Point2::ORIGIN, 0.5, c / 4.0).unwrap().len(), 4);
    }

    #[test]
    fn circle_chords_equal() {
        let b = discretize_circle(Point2::new(0.3, -1.0), 0.5, 0.025).unwrap();
        let l0 = b.segments[0].length;
        for s in &b.segments {
            assert!((s.length - l0).abs() <= 1e-12 * l0);
        }
    }

    #[test]
    fn circle_rejects_bad_arguments() {
        assert!(discretize_circle(Point2::ORIGIN, 0.0, 0.1).is_err());
        assert!(discretize_circle(Point2::ORIGIN, 1.0, -0.1).is_err());
        assert!(discretize_circle(Point2::ORIGIN, 1.0, 3.0).is_err());
    }

    #[test]
    fn triangle_mesh_counts() {
        let s3 = 3f64.sqrt();
        let tri = [
            Point2::new(0.0, 1.0),
            Point2::new(-s3 / 2.0, -0.5),
            Point2::new(s3 / 2.0, -0.5),
        ];
        let b = discretize_polygon(&tri, 0.05).unwrap();
        assert_eq!(b.len(), 105);
        for v in tri {
            assert!(b.nodes.iter().any(|&p| p.distance(v) < 1e-14));
        }
        assert!(close(b.perimeter(), 3.0 * s3, 1e-12));
    }

    #[test]
    fn square_mesh_counts() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        assert_eq!(discretize_polygon(&sq, 0.5).unwrap().len(), 8);
    }

    #[test]
    fn bowtie_is_rejected() {
        let bow = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(matches!(
            discretize_polygon(&bow, 0.1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let cw = [
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ];
        let b = discretize_polygon(&cw, 0.3).unwrap();
        assert!(signed_area(&b.nodes) > 0.0);
        let c = b.centroid();
        for s in &b.segments {
            assert!(s.normal.dot(c - s.midpoint()) > 0.0);
        }
    }

    #[test]
    fn basis_layout_and_values() {
        let b = discretize_circle(Point2::ORIGIN, 0.5, 0.025).unwrap();
        let basis = build_basis(&b).unwrap();
        assert_eq!(basis.len(), 126);
        let f = &basis[7];
        let minus = &b.segments[f.minus_segment];
        let v = f.value(&b, f.minus_segment, minus.length);
        assert!((v - minus.tangent).norm() < 1e-15);
        let charge = f.divergence(&b, f.minus_segment) * minus.length
            + f.divergence(&b, f.plus_segment) * b.segments[f.plus_segment].length;
        assert!(charge.abs() < 1e-15);
        // every segment supports exactly two rooftops
        for seg in 0..b.len() {
            let owners = basis
                .iter()
                .filter(|f| f.minus_segment == seg || f.plus_segment == seg)
                .count();
            assert_eq!(owners, 2);
        }
    }

    #[test]
    fn projection_examples() {
        let seg = Segment::new(Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)).unwrap();
        let g = project_onto_segment(Point2::new(0.0, 1.0), &seg);
        assert_eq!(g.projection, Point2::new(0.0, 0.0));
        assert_eq!((g.l1, g.l2, g.dist), (-1.0, 1.0, 1.0));

        let g = project_onto_segment(Point2::new(2.0, 0.0), &seg);
        assert_eq!(g.projection, Point2::new(2.0, 0.0));
        assert_eq!((g.l1, g.l2, g.dist), (-3.0, -1.0, 0.0));

        let g = project_onto_segment(seg.midpoint(), &seg);
        assert_eq!((g.l1, g.l2, g.dist), (-1.0, 1.0, 0.0));
    }

    proptest! {
        #[test]
        fn polygon_perimeter_preserved(
            r in 0.2f64..3.0, n in 3usize..9, target in 0.01f64..0.5, rot in 0.0f64..6.3
        ) {
            let verts: Vec<Point2> = (0..n)
                .map(|i| Point2::new(r, 0.0).rotated(rot + 2.0 * PI * i as f64 / n as f64))
                .collect();
            let exact: f64 = (0..n).map(|i| verts[i].distance(verts[(i + 1) % n])).sum();
            let b = discretize_polygon(&verts, target).unwrap();
            prop_assert!(close(b.perimeter(), exact, 1e-10));
            let c = b.centroid();
            for s in &b.segments {
                prop_assert!(s.normal.dot(c - s.midpoint()) > 0.0);
            }
        }

        #[test]
        fn rooftops_partition_unity(seg in 0usize..40, frac in 0.001f64..0.999) {
            let b = discretize_circle(Point2::ORIGIN, 1.0, 0.16).unwrap();
            let basis = build_basis(&b).unwrap();
            let seg = seg % b.len();
            let s = frac * b.segments[seg].length;
            let nonzero: Vec<f64> = basis
                .iter()
                .map(|f| f.profile(&b, seg, s))
                .filter(|&v| v != 0.0)
                .collect();
            prop_assert_eq!(nonzero.len(), 2);
            prop_assert!((nonzero.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn projection_rigid_motion_invariant(
            rx in -2.0f64..2.0, ry in -2.0f64..2.0,
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, len in 0.1f64..2.0, dir in 0.0f64..6.3,
            tx in -5.0f64..5.0, ty in -5.0f64..5.0, rot in 0.0f64..6.3,
        ) {
            let a = Point2::new(ax, ay);
            let b = a + Point2::new(len, 0.0).rotated(dir);
            let r = Point2::new(rx, ry);
            let g0 = project_onto_segment(r, &Segment::new(a, b).unwrap());
            let t = Point2::new(tx, ty);
            let m = |p: Point2| p.rotated(rot) + t;
            let g1 = project_onto_segment(m(r), &Segment::new(m(a), m(b)).unwrap());
            prop_assert!((g0.l1 - g1.l1).abs() < 1e-12 * 10.0);
            prop_assert!((g0.l2 - g1.l2).abs() < 1e-12 * 10.0);
            prop_assert!((g0.dist - g1.dist).abs() < 1e-12 * 10.0);
        }
    }
}
