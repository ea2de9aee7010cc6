//! Projective points, affine charts, unitary maps and the Fubini-Study
//! distance on `CP^n`, plus the model of `CP^1` as the round unit sphere.
//!
//! Points are stored as unit vectors of homogeneous coordinates with a
//! canonical phase: the first coordinate of non-negligible modulus is real
//! and positive. Equality of points is decided by the Fubini-Study distance.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::unitarity_defect;
use crate::{Error, Result, C64};

/// Coordinates below this modulus are treated as zero when fixing the phase.
const PHASE_EPS: f64 = 1e-300;

/// Minimum modulus of `Z_i` for chart `i` to be usable.
pub const CHART_EPS: f64 = 1e-12;

/// A point of `CP^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<C64>,
}

impl ProjectivePoint {
    /// Normalises `coords` and fixes the canonical phase.
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a projective point needs at least 2 homogeneous coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite homogeneous coordinate".into()));
        }
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < PHASE_EPS {
            return Err(Error::InvalidInput("all homogeneous coordinates vanish".into()));
        }
        Ok(Self::from_nonzero(coords, norm))
    }

    fn from_nonzero(mut coords: Vec<C64>, norm: f64) -> Self {
        let lead = coords
            .iter()
            .find(|c| c.norm() > PHASE_EPS * norm.max(1.0))
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let rot = lead.conj() / (lead.norm() * norm);
        for c in coords.iter_mut() {
            *c *= rot;
        }
        // renormalise once more to absorb rounding
        let again = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in coords.iter_mut() {
            *c /= again;
        }
        Self { coords }
    }

    /// Convenience constructor from real coordinates.
    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// The point whose only nonvanishing coordinate is `Z_i`.
    pub fn basis(n: usize, i: usize) -> Self {
        assert!(i <= n, "basis index {i} out of range for CP^{n}");
        let mut coords = vec![C64::new(0.0, 0.0); n + 1];
        coords[i] = C64::new(1.0, 0.0);
        Self { coords }
    }

    /// Complex dimension `n` of the ambient `CP^n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    /// Hermitian inner product `⟨self, other⟩ = Σ conj(self_i) other_i`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a.conj() * b).sum()
    }

    /// True when the Fubini-Study distance to `other` is at most `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        fs_distance(self, other) <= tol
    }
}

/// Fubini-Study distance `arccos |⟨p, q⟩|`, in `[0, π/2]`.
///
/// Evaluated as `atan2(‖q − ⟨p,q⟩p‖, |⟨p,q⟩|)`, which agrees with the arccos
/// form but keeps full precision for nearby points.
pub fn fs_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> f64 {
    assert_eq!(p.dim(), q.dim(), "points live in different projective spaces");
    let ip = p.inner(q);
    let cos = ip.norm().min(1.0);
    let sin = p
        .coords
        .iter()
        .zip(&q.coords)
        .map(|(a, b)| (b - ip * a).norm_sqr())
        .sum::<f64>()
        .sqrt();
    sin.atan2(cos).clamp(0.0, FRAC_PI_2)
}

/// The opposite point on `CP^1`, at distance `π/2`.
pub fn antipode(p: &ProjectivePoint) -> Result<ProjectivePoint> {
    if p.dim() != 1 {
        return Err(Error::NotBinary(p.dim()));
    }
    let [a, b] = [p.coords[0], p.coords[1]];
    ProjectivePoint::new(vec![-b.conj(), a.conj()])
}

/// Index `i` of the affine chart `U_i = {Z_i ≠ 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChartIndex(usize);

impl ChartIndex {
    pub fn new(i: usize, n: usize) -> Result<Self> {
        if i > n {
            return Err(Error::InvalidInput(format!("chart index {i} out of range for CP^{n}")));
        }
        Ok(Self(i))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// A chart in which `p` has all affine coordinates of modulus at most 1:
/// the index of a largest-modulus homogeneous coordinate, smallest on ties.
pub fn chart_of(p: &ProjectivePoint) -> ChartIndex {
    let mut best = 0;
    for (i, c) in p.coords.iter().enumerate() {
        if c.norm() > p.coords[best].norm() {
            best = i;
        }
    }
    ChartIndex(best)
}

/// Affine coordinates `Z_j / Z_i`, `j ≠ i`, in ascending `j`.
pub fn to_chart(p: &ProjectivePoint, chart: ChartIndex) -> Result<Vec<C64>> {
    let i = chart.0;
    if i > p.dim() {
        return Err(Error::InvalidInput(format!("chart index {i} out of range")));
    }
    let zi = p.coords[i];
    if zi.norm() <= CHART_EPS {
        return Err(Error::ChartUndefined { chart: i });
    }
    Ok(p.coords
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, c)| c / zi)
        .collect())
}

/// Inverse of [`to_chart`]: inserts `Z_i = 1` and normalises.
pub fn from_chart(z: &[C64], chart: ChartIndex) -> ProjectivePoint {
    let i = chart.0;
    assert!(i <= z.len(), "chart index {i} out of range for CP^{}", z.len());
    let mut coords = Vec::with_capacity(z.len() + 1);
    coords.extend_from_slice(&z[..i]);
    coords.push(C64::new(1.0, 0.0));
    coords.extend_from_slice(&z[i..]);
    let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    ProjectivePoint::from_nonzero(coords, norm)
}

/// A unitary transformation of `C^{n+1}`, acting on `CP^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMap {
    matrix: DMatrix<C64>,
}

impl UnitaryMap {
    /// Accepts `matrix` if `U U* = I` within `1e-12`.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput("unitary map must be square".into()));
        }
        let defect = unitarity_defect(&matrix);
        if !(defect <= 1e-12) {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n + 1, n + 1) }
    }

    /// Haar-distributed random unitary (QR of a complex Ginibre matrix with
    /// the phases of `R`'s diagonal folded back into `Q`).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let dim = n + 1;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        Self { matrix: q }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn inverse(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix }
    }

    pub fn apply(&self, p: &ProjectivePoint) -> ProjectivePoint {
        let v = DVector::from_column_slice(p.coords());
        let w = &self.matrix * v;
        let norm = w.norm();
        ProjectivePoint::from_nonzero(w.iter().copied().collect(), norm)
    }
}

/// A unitary `U` with `U p = [1, 0, …, 0]` up to phase.
///
/// After rotating `p` so that `Z_0` is real, this is the Householder
/// reflection exchanging `p` and the origin. It is a Hermitian involution,
/// and for `p = [1, x, 0, …]` with `x > 0` it is the map
/// `Z_0 ↦ (Z_0 + x Z_1)/√(1+x²)`, `Z_1 ↦ (x Z_0 − Z_1)/√(1+x²)`.
pub fn move_to_origin(p: &ProjectivePoint) -> UnitaryMap {
    let dim = p.dim() + 1;
    let z0 = p.coords[0];
    let rot = if z0.norm() > 0.0 { z0.conj() / z0.norm() } else { C64::new(1.0, 0.0) };
    let mut v = DVector::from_iterator(dim, p.coords.iter().map(|c| c * rot));
    v[0] -= C64::new(1.0, 0.0);
    let vv = v.norm_squared();
    if vv < 1e-30 {
        return UnitaryMap::identity(p.dim());
    }
    let h = DMatrix::identity(dim, dim) - (&v * v.adjoint()) * C64::new(2.0 / vv, 0.0);
    UnitaryMap { matrix: h }
}

/// A point of the unit sphere in `R^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint([f64; 3]);

impl SpherePoint {
    /// Normalises `xyz`; rejects the zero vector.
    pub fn new(xyz: [f64; 3]) -> Result<Self> {
        let n = norm3(xyz);
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::InvalidInput("sphere point must be a nonzero finite vector".into()));
        }
        Ok(Self([xyz[0] / n, xyz[1] / n, xyz[2] / n]))
    }

    pub(crate) fn new_unchecked(xyz: [f64; 3]) -> Self {
        Self(xyz)
    }

    pub fn xyz(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot3(self.0, other.0)
    }

    pub fn neg(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Great-circle angle between two sphere points, in `[0, π]`.
pub fn spherical_angle(a: &SpherePoint, b: &SpherePoint) -> f64 {
    norm3(cross3(a.0, b.0)).atan2(a.dot(b))
}

/// The Hopf map `[Z_0, Z_1] ↦ (2 Re(Z̄_0 Z_1), 2 Im(Z̄_0 Z_1), |Z_0|² − |Z_1|²)`.
///
/// Sends `[1,0]` to the north pole and doubles distances: the angle between
/// images is twice the Fubini-Study distance.
pub fn cp1_to_sphere(p: &ProjectivePoint) -> Result<SpherePoint> {
    if p.dim() != 1 {
        return Err(Error::NotBinary(p.dim()));
    }
    let [a, b] = [p.coords[0], p.coords[1]];
    let w = a.conj() * b;
    Ok(SpherePoint([2.0 * w.re, 2.0 * w.im, a.norm_sqr() - b.norm_sqr()]))
}

pub fn sphere_to_cp1(x: &SpherePoint) -> ProjectivePoint {
    let [x1, x2, x3] = x.0;
    let coords = if x3 >= 0.0 {
        let a = ((1.0 + x3) / 2.0).sqrt();
        vec![C64::new(a, 0.0), C64::new(x1, x2) / (2.0 * a)]
    } else {
        let b = ((1.0 - x3) / 2.0).sqrt();
        vec![C64::new(x1, -x2) / (2.0 * b), C64::new(b, 0.0)]
    };
    let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    ProjectivePoint::from_nonzero(coords, norm)
}
