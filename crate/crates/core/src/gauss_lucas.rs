//! Where the critical points of a binary form sit relative to its zeros.
//!
//! Points of `CP^1` are handled on the unit sphere through the Hopf map. When
//! the zeros lie in an open hemisphere their spherical convex hull `P` is
//! computed in the gnomonic chart centred at a hemisphere pole, and every
//! critical point is located in `P`, in the opposite polygon `P_∞`, or
//! outside both.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::critical::{find_critical_points, Completeness, CriticalPoint, SolveOptions, ZERO_CLUSTER_TOL};
use crate::geometry::{cp1_to_sphere, cross3, dot3, norm3, spherical_angle, ProjectivePoint, SpherePoint};
use crate::sections::{binary_zeros, random_section_with, Section};
use crate::{Error, Result};

/// Smallest admissible `min_i u·v_i` for a hemisphere witness.
pub const HEMISPHERE_MARGIN: f64 = 1e-9;

/// Angular tolerance for coincidences and for the π threshold in cone gaps.
pub const ANGLE_TOL: f64 = 1e-8;

/// Points this close in angle are merged before taking a hull.
const MERGE_ANGLE: f64 = 1e-12;

/// The unit vector `u` maximising `min_i u·v_i`, or `None` when that
/// minimum is not above [`HEMISPHERE_MARGIN`].
///
/// The maximiser is the direction of the point of the convex hull of the
/// `v_i` nearest the origin. That point lies on a face spanned by at most
/// three of them, so all such subsets are tried.
pub fn hemisphere_witness(points: &[SpherePoint]) -> Option<SpherePoint> {
    let v: Vec<[f64; 3]> = points.iter().map(|p| p.xyz()).collect();
    if v.is_empty() {
        return None;
    }
    let mut best: Option<[f64; 3]> = None;
    let mut consider = |x: [f64; 3]| {
        if best.is_none_or(|b| norm3(x) < norm3(b)) {
            best = Some(x);
        }
    };
    let k = v.len();
    for i in 0..k {
        consider(v[i]);
        for j in i + 1..k {
            if let Some(x) = nearest_on_face(&[v[i], v[j]]) {
                consider(x);
            }
            for l in j + 1..k {
                if let Some(x) = nearest_on_face(&[v[i], v[j], v[l]]) {
                    consider(x);
                }
            }
        }
    }
    let x = best?;
    let nx = norm3(x);
    if !(nx > 0.0) {
        return None;
    }
    let u = [x[0] / nx, x[1] / nx, x[2] / nx];
    // fails when the origin is inside the hull, e.g. a spanning tetrahedron
    let margin = v.iter().map(|&w| dot3(u, w)).fold(f64::INFINITY, f64::min);
    (margin > HEMISPHERE_MARGIN).then(|| SpherePoint::new_unchecked(u))
}

/// Point of the affine hull of `face` nearest the origin, if its barycentric
/// coordinates are non-negative.
fn nearest_on_face(face: &[[f64; 3]]) -> Option<[f64; 3]> {
    // x = v_0 + Σ t_k (v_k − v_0); normal equations for t
    let base = face[0];
    let d: Vec<[f64; 3]> = face[1..].iter().map(|w| [w[0] - base[0], w[1] - base[1], w[2] - base[2]]).collect();
    let t = match d.len() {
        1 => {
            let g = dot3(d[0], d[0]);
            if g <= 1e-24 {
                return None;
            }
            vec![-dot3(d[0], base) / g]
        }
        2 => {
            let (a, b, c) = (dot3(d[0], d[0]), dot3(d[0], d[1]), dot3(d[1], d[1]));
            let det = a * c - b * b;
            if det <= 1e-24 * (a * c).max(f64::MIN_POSITIVE) {
                return None;
            }
            let (r0, r1) = (-dot3(d[0], base), -dot3(d[1], base));
            vec![(c * r0 - b * r1) / det, (a * r1 - b * r0) / det]
        }
        _ => unreachable!("faces have two or three vertices"),
    };
    let lead = 1.0 - t.iter().sum::<f64>();
    if lead < -1e-12 || t.iter().any(|&x| x < -1e-12) {
        return None;
    }
    let mut x = base;
    for (tk, dk) in t.iter().zip(&d) {
        for c in 0..3 {
            x[c] += tk * dk[c];
        }
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolygonKind {
    Point,
    GeodesicSegment,
    Polygon,
}

/// A spherical polygon inside the open hemisphere around `pole`.
#[derive(Debug, Clone)]
pub struct SphericalPolygon {
    pub kind: PolygonKind,
    /// Counterclockwise as seen from outside the sphere above `pole`.
    pub vertices: Vec<SpherePoint>,
    pub pole: SpherePoint,
}

/// Orthonormal `(e1, e2)` with `e1 × e2 = u`.
fn tangent_basis(u: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let axis = if u[0].abs() <= u[1].abs() && u[0].abs() <= u[2].abs() {
        [1.0, 0.0, 0.0]
    } else if u[1].abs() <= u[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let d = dot3(axis, u);
    let e = [axis[0] - d * u[0], axis[1] - d * u[1], axis[2] - d * u[2]];
    let n = norm3(e);
    let e1 = [e[0] / n, e[1] / n, e[2] / n];
    (e1, cross3(u, e1))
}

/// Gnomonic coordinates of `v` in the tangent plane at `u`.
fn gnomonic(u: [f64; 3], basis: ([f64; 3], [f64; 3]), v: [f64; 3]) -> [f64; 2] {
    let h = dot3(u, v);
    [dot3(basis.0, v) / h, dot3(basis.1, v) / h]
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull of points in the open hemisphere around `pole`.
///
/// Geodesics become straight lines under gnomonic projection, so the planar
/// hull (monotone chain, collinear points dropped) gives the vertices.
pub fn spherical_hull(points: &[SpherePoint], pole: &SpherePoint) -> Result<SphericalPolygon> {
    if points.is_empty() {
        return Err(Error::InvalidInput("hull of an empty point set".into()));
    }
    let u = pole.xyz();
    if let Some(bad) = points.iter().find(|p| !(p.dot(pole) > 0.0)) {
        return Err(Error::InvalidInput(format!("{:?} is not in the open hemisphere of the pole", bad.xyz())));
    }
    let basis = tangent_basis(u);
    let mut distinct: Vec<SpherePoint> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| spherical_angle(p, q) <= MERGE_ANGLE) {
            distinct.push(*p);
        }
    }
    if distinct.len() == 1 {
        return Ok(SphericalPolygon { kind: PolygonKind::Point, vertices: distinct, pole: *pole });
    }
    let mut proj: Vec<([f64; 2], usize)> =
        distinct.iter().enumerate().map(|(i, p)| (gnomonic(u, basis, p.xyz()), i)).collect();
    proj.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
    let scale = proj.iter().map(|(x, _)| x[0].abs().max(x[1].abs())).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let mut hull: Vec<([f64; 2], usize)> = Vec::with_capacity(2 * proj.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &([f64; 2], usize)>> =
            if pass == 0 { Box::new(proj.iter()) } else { Box::new(proj.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross2(hull[hull.len() - 2].0, hull[hull.len() - 1].0, p.0) <= eps {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let vertices: Vec<SpherePoint> = hull.iter().map(|&(_, i)| distinct[i]).collect();
    let kind = if vertices.len() <= 2 { PolygonKind::GeodesicSegment } else { PolygonKind::Polygon };
    Ok(SphericalPolygon { kind, vertices, pole: *pole })
}

/// The pointwise antipodal image, listed counterclockwise about the negated pole.
pub fn opposite_polygon(p: &SphericalPolygon) -> SphericalPolygon {
    SphericalPolygon { kind: p.kind, vertices: p.vertices.iter().rev().map(|v| v.neg()).collect(), pole: p.pole.neg() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeVerdict {
    FullPlane,
    HalfPlane,
    Line,
    Ray,
    ProperCone,
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeClass {
    pub verdict: ConeVerdict,
    /// Largest angle between consecutive ray directions; `2π` for a single ray.
    pub max_gap: f64,
}

/// Classifies the cone spanned at `q` by the directions of the minimising
/// geodesics towards `vertices`. Vertices at or opposite `q` have no
/// well-defined direction and are skipped.
pub fn cone_classify(q: &SpherePoint, vertices: &[SpherePoint]) -> ConeClass {
    let qx = q.xyz();
    let (b1, b2) = tangent_basis(qx);
    let mut angles: Vec<f64> = vertices
        .iter()
        .filter_map(|v| {
            let x = v.xyz();
            let d = dot3(x, qx);
            let t = [x[0] - d * qx[0], x[1] - d * qx[1], x[2] - d * qx[2]];
            (norm3(t) > ANGLE_TOL).then(|| dot3(t, b2).atan2(dot3(t, b1)))
        })
        .collect();
    if angles.is_empty() {
        return ConeClass { verdict: ConeVerdict::Empty, max_gap: TAU };
    }
    angles.sort_by(f64::total_cmp);
    let k = angles.len();
    let gaps: Vec<f64> = (0..k).map(|i| if i + 1 < k { angles[i + 1] - angles[i] } else { angles[0] + TAU - angles[k - 1] }).collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let verdict = if max_gap >= TAU - ANGLE_TOL {
        ConeVerdict::Ray
    } else if max_gap < PI - ANGLE_TOL {
        ConeVerdict::FullPlane
    } else if max_gap <= PI + ANGLE_TOL {
        // clusters of equal directions: a line has exactly two, opposite
        let big = gaps.iter().filter(|&&g| g > ANGLE_TOL).count();
        if big == 2 { ConeVerdict::Line } else { ConeVerdict::HalfPlane }
    } else {
        ConeVerdict::ProperCone
    };
    ConeClass { verdict, max_gap }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    InteriorP,
    InteriorPinf,
    BoundaryP,
    BoundaryPinf,
    Outside,
}

impl Location {
    pub fn in_p(self) -> bool {
        matches!(self, Location::InteriorP | Location::BoundaryP)
    }

    pub fn in_pinf(self) -> bool {
        matches!(self, Location::InteriorPinf | Location::BoundaryPinf)
    }

    pub fn label(self) -> &'static str {
        match self {
            Location::InteriorP => "InteriorP",
            Location::InteriorPinf => "InteriorPinf",
            Location::BoundaryP => "BoundaryP",
            Location::BoundaryPinf => "BoundaryPinf",
            Location::Outside => "Violation",
        }
    }
}

/// Locates `q` relative to `P ∪ P_∞`.
///
/// Interiors are relative: the open arc of a segment, the point itself for a
/// degenerate hull. The side is decided by the sign of `q·pole`.
pub fn locate(q: &SpherePoint, p: &SphericalPolygon, _p_inf: &SphericalPolygon) -> Location {
    let side_p = q.dot(&p.pole) > 0.0;
    let (interior, boundary) = if side_p {
        (Location::InteriorP, Location::BoundaryP)
    } else {
        (Location::InteriorPinf, Location::BoundaryPinf)
    };
    let at_vertex = p.vertices.iter().any(|v| spherical_angle(q, v) <= ANGLE_TOL || spherical_angle(q, &v.neg()) <= ANGLE_TOL);
    match p.kind {
        PolygonKind::Point => {
            if at_vertex {
                interior
            } else {
                Location::Outside
            }
        }
        _ if at_vertex => boundary,
        PolygonKind::GeodesicSegment => match cone_classify(q, &p.vertices).verdict {
            ConeVerdict::Line => interior,
            _ => Location::Outside,
        },
        PolygonKind::Polygon => match cone_classify(q, &p.vertices).verdict {
            ConeVerdict::FullPlane => interior,
            ConeVerdict::HalfPlane | ConeVerdict::Line => boundary,
            _ => Location::Outside,
        },
    }
}

#[derive(Debug, Clone)]
pub struct LocatedCritical {
    pub critical: CriticalPoint,
    pub sphere: SpherePoint,
    pub location: Location,
}

#[derive(Debug, Clone)]
pub struct GaussLucasCertificate {
    /// Distinct zeros with multiplicity.
    pub zeros: Vec<(ProjectivePoint, usize)>,
    pub p: SphericalPolygon,
    pub p_inf: SphericalPolygon,
    pub criticals: Vec<LocatedCritical>,
    /// No critical point lies outside `P ∪ P_∞`.
    pub theorem_holds: bool,
    /// Some critical point of index 2 lies in `P_∞`.
    pub has_index2_in_pinf: bool,
    /// `C_{s,P}` is nonempty; only decided when every critical point is
    /// non-degenerate.
    pub has_critical_in_p: Option<bool>,
    /// `C_{s,P}` is nonempty and inside the interior of `P`; decided when
    /// every critical point is non-degenerate and `P` is not a point.
    pub p_side_interior: Option<bool>,
    /// `C_{s,P_∞}` lies in the interior of `P_∞`; decided when `P` is not a point.
    pub pinf_interior: Option<bool>,
    pub completeness: Completeness,
    pub starts_used: usize,
}

impl GaussLucasCertificate {
    /// The verdicts rest on a solve certified complete by Poincaré–Hopf.
    pub fn authoritative(&self) -> bool {
        self.completeness.is_certified()
    }

    pub fn violations(&self) -> usize {
        self.criticals.iter().filter(|c| c.location == Location::Outside).count()
    }
}

/// Builds `P` and `P_∞` from the zeros of `s`, solves for the critical points
/// and locates each of them.
pub fn gauss_lucas_certify(s: &Section, opts: &SolveOptions) -> Result<GaussLucasCertificate> {
    if s.n() != 1 {
        return Err(Error::NotBinary(s.n()));
    }
    if s.m() < 2 {
        return Err(Error::InvalidInput(format!("degree must be at least 2, got {}", s.m())));
    }
    let zeros = binary_zeros(s, ZERO_CLUSTER_TOL)?;
    let sphere_zeros: Vec<SpherePoint> = zeros.iter().map(|(z, _)| cp1_to_sphere(z)).collect::<Result<_>>()?;
    let pole = hemisphere_witness(&sphere_zeros).ok_or(Error::HemisphereViolation)?;
    let p = spherical_hull(&sphere_zeros, &pole)?;
    let p_inf = opposite_polygon(&p);
    let report = find_critical_points(s, opts)?;

    let criticals: Vec<LocatedCritical> = report
        .criticals
        .into_iter()
        .map(|critical| {
            let sphere = cp1_to_sphere(&critical.point)?;
            let location = locate(&sphere, &p, &p_inf);
            Ok(LocatedCritical { critical, sphere, location })
        })
        .collect::<Result<_>>()?;

    let theorem_holds = criticals.iter().all(|c| c.location != Location::Outside);
    let has_index2_in_pinf = criticals.iter().any(|c| c.location.in_pinf() && c.critical.index == Some(2));
    let all_nondegenerate = criticals.iter().all(|c| c.critical.index.is_some());
    let not_point = p.kind != PolygonKind::Point;
    let in_p: Vec<&LocatedCritical> = criticals.iter().filter(|c| c.location.in_p()).collect();
    let has_critical_in_p = all_nondegenerate.then_some(!in_p.is_empty());
    let p_side_interior = (all_nondegenerate && not_point)
        .then(|| !in_p.is_empty() && in_p.iter().all(|c| c.location == Location::InteriorP));
    let pinf_interior = not_point.then(|| {
        criticals.iter().filter(|c| c.location.in_pinf()).all(|c| c.location == Location::InteriorPinf)
    });
    Ok(GaussLucasCertificate {
        zeros,
        p,
        p_inf,
        criticals,
        theorem_holds,
        has_index2_in_pinf,
        has_critical_in_p,
        p_side_interior,
        pinf_interior,
        completeness: report.completeness,
        starts_used: report.starts_used,
    })
}

/// Zeros of `s` admit a hemisphere witness.
pub fn zeros_in_open_hemisphere(s: &Section) -> Result<bool> {
    let zeros = binary_zeros(s, ZERO_CLUSTER_TOL)?;
    let pts: Vec<SpherePoint> = zeros.iter().map(|(z, _)| cp1_to_sphere(z)).collect::<Result<_>>()?;
    Ok(hemisphere_witness(&pts).is_some())
}

/// Draws random binary forms of degree `m` until one has its zeros in an
/// open hemisphere. Returns the section and the number of draws it took.
pub fn sample_hemisphere_section<R: Rng + ?Sized>(m: u32, rng: &mut R, max_draws: usize) -> Result<Option<(Section, usize)>> {
    for draw in 1..=max_draws {
        let s = random_section_with(1, m, rng);
        if zeros_in_open_hemisphere(&s)? {
            return Ok(Some((s, draw)));
        }
    }
    Ok(None)
}
