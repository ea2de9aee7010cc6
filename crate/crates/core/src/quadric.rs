//! Quadrics: degree-2 sections in canonical form.
//!
//! A quadric `s(Z) = Zᵀ C Z` with `C` complex symmetric is brought to
//! `Σ a_i Z_i²` by a unitary change of variables (Takagi factorization). When
//! `0 < a_0 < ⋯ < a_n`, the critical points are the images of the coordinate
//! points, with Morse index `n + i` at the `i`-th one.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{ProjectivePoint, UnitaryMap};
use crate::linalg::{complete_unitary, symmetric_eigen, symmetry_defect};
use crate::sections::{monomials, Section};
use crate::{Error, Result, C64};

/// Relative gap below which two Takagi values count as equal.
pub const STRICT_TOL: f64 = 1e-9;

/// Relative size below which a Takagi value counts as zero.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QuadricCanonicalForm {
    /// Takagi values, ascending.
    pub a: Vec<f64>,
    /// `s(U Z) = Σ a_i Z_i²`.
    pub u: UnitaryMap,
    /// `0 < a_0 < a_1 < ⋯ < a_n`.
    pub strict: bool,
}

impl QuadricCanonicalForm {
    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    /// `Ū diag(a) U*`, which should give back the coefficient matrix.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let u = self.u.matrix();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(self.a.len(), self.a.iter().map(|&x| C64::new(x, 0.0))));
        u.map(|x| x.conj()) * d * u.adjoint()
    }

    /// The canonical section `Σ a_i Z_i²`.
    pub fn diagonal_section(&self) -> Section {
        let n = self.n();
        Section::new(
            n,
            2,
            self.a.iter().enumerate().map(|(i, &ai)| {
                let mut alpha = vec![0; n + 1];
                alpha[i] = 2;
                (alpha, C64::new(ai, 0.0))
            }),
        )
        .expect("Takagi values are finite")
    }
}

/// Symmetric matrix `C` with `s(Z) = Zᵀ C Z`.
pub fn coefficient_matrix(s: &Section) -> Result<DMatrix<C64>> {
    if s.m() != 2 {
        return Err(Error::InvalidInput(format!("a quadric has degree 2, got {}", s.m())));
    }
    let dim = s.n() + 1;
    let mut c = DMatrix::zeros(dim, dim);
    for (alpha, &v) in s.coeffs() {
        let idx: Vec<usize> = alpha.iter().enumerate().flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize)).collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            c[(i, i)] = v;
        } else {
            c[(i, j)] = v / 2.0;
            c[(j, i)] = v / 2.0;
        }
    }
    Ok(c)
}

/// The quadric `Zᵀ C Z` of a symmetric matrix.
pub fn quadric_section(c: &DMatrix<C64>) -> Result<Section> {
    check_symmetric(c)?;
    let dim = c.nrows();
    if dim < 2 {
        return Err(Error::InvalidInput("coefficient matrix must be at least 2 × 2".into()));
    }
    let terms = monomials(dim, 2).into_iter().map(|alpha| {
        let idx: Vec<usize> = alpha.iter().enumerate().flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize)).collect();
        let (i, j) = (idx[0], idx[1]);
        let v = if i == j { c[(i, i)] } else { c[(i, j)] + c[(j, i)] };
        (alpha, v)
    });
    Section::new(dim - 1, 2, terms)
}

fn check_symmetric(c: &DMatrix<C64>) -> Result<()> {
    if !c.is_square() {
        return Err(Error::InvalidInput(format!("coefficient matrix is {} × {}", c.nrows(), c.ncols())));
    }
    let defect = symmetry_defect(c);
    if !(defect <= 1e-10 * c.norm().max(f64::MIN_POSITIVE)) {
        return Err(Error::NotSymmetric(defect));
    }
    Ok(())
}

/// Takagi factorization `C = Ū diag(a) U*` with `a` ascending.
///
/// The real symmetric matrix `[[X, Y], [Y, −X]]` built from `C = X + iY` has
/// eigenvalues `±a_i`; an eigenvector `(x, y)` for `a_i > 0` gives a column
/// `u = x + iy` with `C ū = a_i u`, and `U` is the conjugate of those columns.
pub fn takagi(c: &DMatrix<C64>) -> Result<QuadricCanonicalForm> {
    check_symmetric(c)?;
    let dim = c.nrows();
    let x = c.map(|v| v.re);
    let y = c.map(|v| v.im);
    let mut big = DMatrix::zeros(2 * dim, 2 * dim);
    big.view_mut((0, 0), (dim, dim)).copy_from(&x);
    big.view_mut((0, dim), (dim, dim)).copy_from(&y);
    big.view_mut((dim, 0), (dim, dim)).copy_from(&y);
    big.view_mut((dim, dim), (dim, dim)).copy_from(&(-&x));
    let (values, vectors) = symmetric_eigen(&big);

    let cutoff = RANK_TOL * values.last().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
    let mut cols: Vec<(f64, DVector<C64>)> = Vec::with_capacity(dim);
    for k in (0..2 * dim).rev().take(dim) {
        if values[k] <= cutoff {
            break;
        }
        let mut u = DVector::from_fn(dim, |i, _| C64::new(vectors[(i, k)], vectors[(dim + i, k)]));
        let norm = u.norm();
        u /= C64::new(norm, 0.0);
        // the only freedom is a sign; fix it on the largest entry
        let lead = u.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
        if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
            u = -u;
        }
        cols.push((values[k], u));
    }
    let rank = cols.len();
    let partial: Vec<DVector<C64>> = cols.iter().rev().map(|(_, u)| u.clone()).collect();
    let full = complete_unitary(&partial, dim);
    // kernel columns first, then positive values ascending
    let mut v = DMatrix::zeros(dim, dim);
    let mut a = vec![0.0; dim];
    for k in 0..dim - rank {
        v.set_column(k, &full.column(rank + k));
    }
    for (k, (val, u)) in cols.iter().rev().enumerate() {
        v.set_column(dim - rank + k, u);
        a[dim - rank + k] = *val;
    }
    let strict = a[0] > 0.0 && a.windows(2).all(|w| w[1] - w[0] > STRICT_TOL * a[dim - 1]);
    Ok(QuadricCanonicalForm { a, u: UnitaryMap::new_unchecked(v.map(|z| z.conj())), strict })
}

/// Non-singular zero locus, i.e. `C` has full rank.
pub fn is_smooth_quadric(q: &QuadricCanonicalForm) -> bool {
    q.a[0] > 0.0
}

/// The `n + 1` critical points `U e_i` with Morse index `n + i`.
pub fn quadric_critical_set(q: &QuadricCanonicalForm) -> Result<Vec<(ProjectivePoint, usize)>> {
    if !q.strict {
        return Err(Error::NotGeneric(format!("Takagi values {:?} are not strictly increasing from a positive value", q.a)));
    }
    let n = q.n();
    Ok((0..=n).map(|i| (q.u.apply(&ProjectivePoint::basis(n, i)), n + i)).collect())
}

/// Random symmetric matrix `Ū diag(a) U*` with Haar-random `U`.
pub fn random_quadric_matrix<R: rand::Rng + ?Sized>(a: &[f64], rng: &mut R) -> DMatrix<C64> {
    let u = UnitaryMap::random(a.len() - 1, rng);
    QuadricCanonicalForm { a: a.to_vec(), u, strict: false }.reconstruct()
}
