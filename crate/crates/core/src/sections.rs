//! Holomorphic sections of `O(m)` over `CP^n` as homogeneous polynomials.
//!
//! In the affine chart `U_i` a section becomes a polynomial `f` of degree at
//! most `m`, the frame has weight `e^{-φ}` with `φ = m log(1 + |z|²)`, and
//! `∇'s = ∂f − f ∂φ`. Everything the solver needs (values, first and second
//! derivatives of `f`, the potential jet, the pointwise norm) lives here.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{chart_of, to_chart, ChartIndex, ProjectivePoint, UnitaryMap};
use crate::linalg::complex_eigenvalues;
use crate::{Error, Result, C64};

/// Exponent vector of a monomial.
pub type MultiIndex = Vec<u32>;

/// Sections whose largest coefficient modulus is below this are rejected.
pub const ZERO_SECTION_EPS: f64 = 1e-300;

/// Points with `|s(p)|² / ‖s‖²` below this count as zeros of `s`.
pub const ZERO_LOCUS_EPS: f64 = 1e-20;

/// All multi-indices of length `vars` and total degree `degree`, in
/// lexicographically decreasing order (`Z_0^degree` first).
pub fn monomials(vars: usize, degree: u32) -> Vec<MultiIndex> {
    fn rec(prefix: &mut MultiIndex, left: usize, degree: u32, out: &mut Vec<MultiIndex>) {
        if left == 1 {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=degree).rev() {
            prefix.push(k);
            rec(prefix, left - 1, degree - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if vars > 0 {
        rec(&mut Vec::with_capacity(vars), vars, degree, &mut out);
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// A degree-`m` homogeneous polynomial in `Z_0, …, Z_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    n: usize,
    m: u32,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl Section {
    /// Builds a section from `(multi-index, coefficient)` terms; repeated
    /// multi-indices are summed and exact zeros dropped.
    pub fn new(n: usize, m: u32, terms: impl IntoIterator<Item = (MultiIndex, C64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        let mut coeffs = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != n + 1 {
                return Err(Error::InvalidInput(format!(
                    "multi-index {alpha:?} has {} entries, expected {}",
                    alpha.len(),
                    n + 1
                )));
            }
            if alpha.iter().sum::<u32>() != m {
                return Err(Error::InvalidInput(format!("multi-index {alpha:?} does not have degree {m}")));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient for {alpha:?}")));
            }
            *coeffs.entry(alpha).or_insert(C64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != C64::new(0.0, 0.0));
        let max = coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        if max < ZERO_SECTION_EPS {
            return Err(Error::ZeroSection);
        }
        Ok(Self { n, m, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, C64> {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &[u32]) -> C64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Evaluates at homogeneous coordinates.
    pub fn eval(&self, z: &[C64]) -> C64 {
        assert_eq!(z.len(), self.n + 1);
        self.coeffs
            .iter()
            .map(|(alpha, c)| alpha.iter().zip(z).fold(*c, |acc, (&k, zi)| acc * zi.powu(k)))
            .sum()
    }

    pub fn scale(&self, k: C64) -> Result<Self> {
        Self::new(self.n, self.m, self.coeffs.iter().map(|(a, c)| (a.clone(), c * k)))
    }

    /// The section `Z ↦ s(B Z)`.
    pub fn compose_linear(&self, b: &DMatrix<C64>) -> Result<Self> {
        let dim = self.n + 1;
        assert_eq!((b.nrows(), b.ncols()), (dim, dim));
        // powers[i][k] = (row i of B · Z)^k
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut linear = Poly::new();
            for j in 0..dim {
                let mut e = vec![0; dim];
                e[j] = 1;
                linear.insert(e, b[(i, j)]);
            }
            let mut row = vec![Poly::from([(vec![0; dim], C64::new(1.0, 0.0))])];
            for k in 1..=self.m as usize {
                let next = poly_mul(&row[k - 1], &linear);
                row.push(next);
            }
            powers.push(row);
        }
        let mut out = Poly::new();
        for (alpha, c) in &self.coeffs {
            let mut term = Poly::from([(vec![0; dim], *c)]);
            for (i, &k) in alpha.iter().enumerate() {
                if k > 0 {
                    term = poly_mul(&term, &powers[i][k as usize]);
                }
            }
            for (e, v) in term {
                *out.entry(e).or_default() += v;
            }
        }
        Self::new(self.n, self.m, out)
    }

    /// The induced action `s ↦ s ∘ U⁻¹`: critical points and zeros of the
    /// result are the images under `U` of those of `s`.
    pub fn act(&self, u: &UnitaryMap) -> Result<Self> {
        self.compose_linear(u.inverse().matrix())
    }

    /// Product of two sections on the same `CP^n`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.n, other.n);
        Self::new(self.n, self.m + other.m, poly_mul(&self.coeffs, &other.coeffs))
    }
}

type Poly = BTreeMap<MultiIndex, C64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: MultiIndex = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_default() += ca * cb;
        }
    }
    out
}

/// Text format:
///
/// ```text
/// # comments and blank lines are ignored
/// <n> <m>
/// <α_0> … <α_n> <re> <im>
/// ```
///
/// Floats are written in shortest round-trip form, so printing and parsing
/// reproduces the coefficients bit for bit.
impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.m)?;
        for (alpha, c) in &self.coeffs {
            for a in alpha {
                write!(f, "{a} ")?;
            }
            writeln!(f, "{:e} {:e}", c.re, c.im)?;
        }
        Ok(())
    }
}

impl FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
        let hdr: Vec<&str> = header.split_whitespace().collect();
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        if hdr.len() != 2 {
            return Err(perr(hline, "expected header `<n> <m>`".into()));
        }
        let n: usize = hdr[0].parse().map_err(|e| perr(hline, format!("bad n: {e}")))?;
        let m: u32 = hdr[1].parse().map_err(|e| perr(hline, format!("bad m: {e}")))?;
        let mut terms = Vec::new();
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != n + 3 {
                return Err(perr(ln, format!("expected {} fields, got {}", n + 3, tok.len())));
            }
            let alpha = tok[..=n]
                .iter()
                .map(|t| t.parse::<u32>().map_err(|e| perr(ln, format!("bad exponent `{t}`: {e}"))))
                .collect::<Result<MultiIndex>>()?;
            let re: f64 = tok[n + 1].parse().map_err(|e| perr(ln, format!("bad real part: {e}")))?;
            let im: f64 = tok[n + 2].parse().map_err(|e| perr(ln, format!("bad imaginary part: {e}")))?;
            terms.push((alpha, C64::new(re, im)));
        }
        Section::new(n, m, terms)
    }
}

/// A section written in an affine chart: `f(z) = s(…, Z_i = 1, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPolynomial {
    chart: ChartIndex,
    n: usize,
    m: u32,
    terms: Vec<(MultiIndex, C64)>,
}

/// Value, gradient and holomorphic Hessian of a chart polynomial.
#[derive(Debug, Clone)]
pub struct PolyJet {
    pub value: C64,
    pub grad: Vec<C64>,
    /// Row-major `n × n`.
    pub hess: Vec<C64>,
}

impl ChartPolynomial {
    pub fn chart(&self) -> ChartIndex {
        self.chart
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn terms(&self) -> &[(MultiIndex, C64)] {
        &self.terms
    }

    /// Coefficient of `z^β`.
    pub fn coeff(&self, beta: &[u32]) -> C64 {
        self.terms.iter().filter(|(b, _)| b.as_slice() == beta).map(|(_, c)| *c).sum()
    }

    /// Flat table with `z_j^k` at `j * (m + 1) + k`.
    fn powers(&self, z: &[C64]) -> Vec<C64> {
        let stride = self.m as usize + 1;
        let mut pw = Vec::with_capacity(z.len() * stride);
        for &zj in z {
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..stride {
                pw.push(acc);
                acc *= zj;
            }
        }
        pw
    }

    /// `Π_l z_l^{b_l − [l = j] − [l = k]}`; callers guarantee non-negative exponents.
    fn lowered(pw: &[C64], stride: usize, b: &[u32], j: usize, k: usize) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (l, &e) in b.iter().enumerate() {
            let e = e as usize - (l == j) as usize - (l == k) as usize;
            if e > 0 {
                acc *= pw[l * stride + e];
            }
        }
        acc
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let pw = self.powers(z);
        let stride = self.m as usize + 1;
        self.terms.iter().map(|(b, c)| c * Self::lowered(&pw, stride, b, usize::MAX, usize::MAX)).sum()
    }

    /// `f` and `∂f` at `z`.
    pub fn value_grad(&self, z: &[C64]) -> (C64, Vec<C64>) {
        let pw = self.powers(z);
        let stride = self.m as usize + 1;
        let mut value = C64::new(0.0, 0.0);
        let mut grad = vec![C64::new(0.0, 0.0); self.n];
        for (b, c) in &self.terms {
            value += c * Self::lowered(&pw, stride, b, usize::MAX, usize::MAX);
            for j in 0..self.n {
                if b[j] > 0 {
                    grad[j] += c * (b[j] as f64) * Self::lowered(&pw, stride, b, j, usize::MAX);
                }
            }
        }
        (value, grad)
    }

    /// `f`, `∂f` and `∂²f` at `z`.
    pub fn jet(&self, z: &[C64]) -> PolyJet {
        let n = self.n;
        let pw = self.powers(z);
        let stride = self.m as usize + 1;
        let zero = C64::new(0.0, 0.0);
        let mut value = zero;
        let mut grad = vec![zero; n];
        let mut hess = vec![zero; n * n];
        for (b, c) in &self.terms {
            value += c * Self::lowered(&pw, stride, b, usize::MAX, usize::MAX);
            for j in 0..n {
                if b[j] == 0 {
                    continue;
                }
                let cj = c * b[j] as f64;
                grad[j] += cj * Self::lowered(&pw, stride, b, j, usize::MAX);
                if b[j] >= 2 {
                    hess[j * n + j] += cj * (b[j] - 1) as f64 * Self::lowered(&pw, stride, b, j, j);
                }
                for k in j + 1..n {
                    if b[k] == 0 {
                        continue;
                    }
                    let v = cj * b[k] as f64 * Self::lowered(&pw, stride, b, j, k);
                    hess[j * n + k] += v;
                    hess[k * n + j] += v;
                }
            }
        }
        PolyJet { value, grad, hess }
    }

    /// `log(|f|² e^{-φ})`, the local expression of `log |s|²`.
    pub fn log_norm_sq(&self, z: &[C64]) -> f64 {
        let r: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        self.eval(z).norm_sqr().ln() - self.m as f64 * r.ln_1p()
    }
}

/// Writes `s` in chart `i`; exact transcription of coefficients.
pub fn dehomogenize(s: &Section, chart: ChartIndex) -> ChartPolynomial {
    let i = chart.get();
    assert!(i <= s.n, "chart {i} out of range");
    let terms = s
        .coeffs
        .iter()
        .map(|(alpha, c)| {
            let beta: MultiIndex = alpha.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &a)| a).collect();
            (beta, *c)
        })
        .collect();
    ChartPolynomial { chart, n: s.n, m: s.m, terms }
}

/// Derivatives of the Fubini-Study potential `φ = m log(1 + |z|²)`.
#[derive(Debug, Clone)]
pub struct FsPotentialJet {
    pub value: f64,
    /// `∂φ/∂z_j`
    pub d1: Vec<C64>,
    /// `∂²φ/∂z_j∂z_k`
    pub d2_holo: DMatrix<C64>,
    /// `∂²φ/∂z_j∂z̄_k`
    pub d2_mixed: DMatrix<C64>,
}

pub fn fs_jet(z: &[C64], m: u32) -> FsPotentialJet {
    let n = z.len();
    let m = m as f64;
    let q = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let d1 = z.iter().map(|w| w.conj() * (m / q)).collect();
    let d2_holo = DMatrix::from_fn(n, n, |j, k| -(z[j].conj() * z[k].conj()) * (m / (q * q)));
    let d2_mixed = DMatrix::from_fn(n, n, |j, k| {
        let delta = if j == k { q } else { 0.0 };
        (C64::new(delta, 0.0) - z[j].conj() * z[k]) * (m / (q * q))
    });
    FsPotentialJet { value: m * (q - 1.0).ln_1p(), d1, d2_holo, d2_mixed }
}

/// `∇'s` at a point, expressed in a chart.
#[derive(Debug, Clone)]
pub struct NablaPrime {
    pub chart: ChartIndex,
    /// Affine coordinates of the point.
    pub z: Vec<C64>,
    /// `∂f − f ∂φ`.
    pub covector: Vec<C64>,
    /// Pointwise Fubini-Study norm of `∇'s` divided by `‖s‖`.
    pub residual: f64,
}

/// `∂f − f ∂φ` in the chart of `poly` at `z`, plus its scale-free norm.
///
/// The norm is `sqrt(|ξ|² + |Σ z_j ξ_j|²) (1 + |z|²)^{(1−m)/2} / ‖s‖`, the
/// Fubini-Study length of the covector `ξ` times the frame weight, which makes
/// it independent of the chart and of the scale of `s`.
pub fn nabla_prime_in_chart(poly: &ChartPolynomial, z: &[C64], section_norm: f64) -> (Vec<C64>, f64) {
    let jet = poly.jet(z);
    covector_and_residual(&jet, z, poly.m, section_norm)
}

fn covector_and_residual(jet: &PolyJet, z: &[C64], m: u32, section_norm: f64) -> (Vec<C64>, f64) {
    let q = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let mf = m as f64;
    let xi: Vec<C64> = jet.grad.iter().zip(z).map(|(g, w)| g - jet.value * w.conj() * (mf / q)).collect();
    let radial: C64 = xi.iter().zip(z).map(|(x, w)| x * w).sum();
    let len = (xi.iter().map(|x| x.norm_sqr()).sum::<f64>() + radial.norm_sqr()).sqrt();
    (xi, len * q.powf((1.0 - mf) / 2.0) / section_norm)
}

/// `∇'s` at `p`, computed in [`chart_of`]`(p)`.
pub fn nabla_prime(s: &Section, p: &ProjectivePoint) -> NablaPrime {
    assert_eq!(s.n, p.dim());
    let chart = chart_of(p);
    let z = to_chart(p, chart).expect("chart_of picks a chart containing p");
    let poly = dehomogenize(s, chart);
    let (covector, residual) = nabla_prime_in_chart(&poly, &z, s.norm());
    NablaPrime { chart, z, covector, residual }
}

/// `|s|²(p) = |f(z)|² (1 + |z|²)^{-m}`, computed from unit homogeneous
/// coordinates so it is chart-free.
pub fn norm_sq(s: &Section, p: &ProjectivePoint) -> f64 {
    s.eval(p.coords()).norm_sqr()
}

/// Chart expression of [`norm_sq`].
pub fn norm_sq_in_chart(poly: &ChartPolynomial, z: &[C64]) -> f64 {
    let q = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    poly.eval(z).norm_sqr() / q.powi(poly.m as i32)
}

/// A real tangent vector in chart coordinates, `(x_1…x_n, y_1…y_n)`.
#[derive(Debug, Clone)]
pub struct RealTangent {
    pub chart: ChartIndex,
    pub components: Vec<f64>,
}

/// Riemannian gradient of `log |s|²` for the Fubini-Study metric
/// `h = ∂∂̄ log(1 + |z|²)`, with `g = Re h`.
///
/// As a complex vector `v = 2 (1 + |z|²)(w + z (z* w))` where
/// `w = conj(∂f/f − ∂φ)`, the inverse metric applied to `∂̄ log |s|²`.
pub fn grad_log_norm_sq(s: &Section, p: &ProjectivePoint) -> Result<RealTangent> {
    if norm_sq(s, p) / s.norm().powi(2) < ZERO_LOCUS_EPS {
        return Err(Error::ZeroLocus);
    }
    let chart = chart_of(p);
    let z = to_chart(p, chart)?;
    let poly = dehomogenize(s, chart);
    let jet = poly.jet(&z);
    let (xi, _) = covector_and_residual(&jet, &z, s.m, 1.0);
    let q = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let w: Vec<C64> = xi.iter().map(|x| (x / jet.value).conj()).collect();
    let zw: C64 = z.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
    let v: Vec<C64> = w.iter().zip(&z).map(|(wj, zj)| (wj + zj * zw) * (2.0 * q)).collect();
    let mut components: Vec<f64> = v.iter().map(|c| c.re).collect();
    components.extend(v.iter().map(|c| c.im));
    Ok(RealTangent { chart, components })
}

/// A linear form `w_0 Z_0 + w_1 Z_1` on `CP^1`, normalised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFactor {
    pub w0: C64,
    pub w1: C64,
}

impl LinearFactor {
    /// The unit linear form vanishing at `p`.
    pub fn vanishing_at(p: &ProjectivePoint) -> Result<Self> {
        if p.dim() != 1 {
            return Err(Error::NotBinary(p.dim()));
        }
        let [a, b] = [p.coords()[0], p.coords()[1]];
        let q = ProjectivePoint::new(vec![b, -a])?;
        Ok(Self { w0: q.coords()[0], w1: q.coords()[1] })
    }

    pub fn zero(&self) -> ProjectivePoint {
        ProjectivePoint::new(vec![self.w1, -self.w0]).expect("linear factor is nonzero")
    }

    pub fn to_section(&self) -> Section {
        Section::new(1, 1, [(vec![1, 0], self.w0), (vec![0, 1], self.w1)]).expect("linear factor is nonzero")
    }
}

/// Product of linear factors times `scale`.
pub fn section_from_factors(factors: &[LinearFactor], scale: C64) -> Result<Section> {
    let mut s = Section::new(1, 0, [(vec![0, 0], scale)])?;
    for l in factors {
        s = s.mul(&l.to_section())?;
    }
    Ok(s)
}

/// Splits a binary form into `m` linear factors, repeated by multiplicity.
///
/// Chart-0 roots come from the eigenvalues of the companion matrix and are
/// then polished by Newton's method in whichever chart keeps them inside the
/// unit disc; exactly vanishing extreme coefficients become zeros at `[1,0]`
/// or `[0,1]`.
pub fn factor_binary_form(s: &Section) -> Result<Vec<LinearFactor>> {
    if s.n != 1 {
        return Err(Error::NotBinary(s.n));
    }
    let m = s.m as usize;
    // c[k] multiplies z^k, z = Z_1 / Z_0
    let c: Vec<C64> = (0..=m).map(|k| s.coeff(&[(m - k) as u32, k as u32])).collect();
    let d = (0..=m).rev().find(|&k| c[k] != C64::new(0.0, 0.0)).unwrap_or(0);
    let mut zeros: Vec<ProjectivePoint> = Vec::with_capacity(m);
    // exactly vanishing low-order coefficients are roots at z = 0
    let low = (0..=d).find(|&k| c[k] != C64::new(0.0, 0.0)).unwrap_or(0);
    for _ in 0..low {
        zeros.push(ProjectivePoint::basis(1, 0));
    }
    let e = d - low;
    if e > 0 {
        let lead = c[d];
        let companion = DMatrix::from_fn(e, e, |i, j| {
            if j == e - 1 {
                -c[low + i] / lead
            } else if i == j + 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let roots = complex_eigenvalues(companion)
            .ok_or_else(|| Error::InvalidInput("companion eigenvalue iteration did not converge".into()))?;
        for r in roots {
            zeros.push(polish_binary_root(&c, r));
        }
    }
    for _ in d..m {
        zeros.push(ProjectivePoint::basis(1, 1));
    }
    zeros.iter().map(LinearFactor::vanishing_at).collect()
}

fn polish_binary_root(c: &[C64], root: C64) -> ProjectivePoint {
    let m = c.len() - 1;
    // evaluate Σ coeffs[k] t^k and its derivative
    let horner = |coeffs: &[C64], t: C64| -> (C64, C64) {
        let mut p = C64::new(0.0, 0.0);
        let mut dp = C64::new(0.0, 0.0);
        for &a in coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + a;
        }
        (p, dp)
    };
    let (coeffs, mut t): (Vec<C64>, C64) = if root.norm() <= 1.0 {
        (c.to_vec(), root)
    } else {
        // w = 1/z, g(w) = Σ c_k w^{m-k}
        ((0..=m).map(|k| c[m - k]).collect(), C64::new(1.0, 0.0) / root)
    };
    let (mut val, _) = horner(&coeffs, t);
    for _ in 0..8 {
        let (p, dp) = horner(&coeffs, t);
        if dp.norm() == 0.0 {
            break;
        }
        let next = t - p / dp;
        let (pn, _) = horner(&coeffs, next);
        if !(pn.norm() < val.norm()) {
            break;
        }
        t = next;
        val = pn;
    }
    let coords = if root.norm() <= 1.0 {
        vec![C64::new(1.0, 0.0), t]
    } else {
        vec![t, C64::new(1.0, 0.0)]
    };
    ProjectivePoint::new(coords).expect("root coordinates are finite")
}

/// Distinct zeros of a binary form with multiplicities; roots closer than
/// `cluster_tol` in Fubini-Study distance are merged.
pub fn binary_zeros(s: &Section, cluster_tol: f64) -> Result<Vec<(ProjectivePoint, usize)>> {
    let factors = factor_binary_form(s)?;
    let mut out: Vec<(ProjectivePoint, usize)> = Vec::new();
    for f in factors {
        let z = f.zero();
        match out.iter_mut().find(|(p, _)| p.approx_eq(&z, cluster_tol)) {
            Some((_, k)) => *k += 1,
            None => out.push((z, 1)),
        }
    }
    Ok(out)
}

/// A sample from the unitarily invariant Gaussian ensemble: the coefficient
/// of `Z^α` is `c_α √(m!/α!)` with `c_α` standard complex Gaussians.
pub fn random_section(n: usize, m: u32, seed: u64) -> Section {
    random_section_with(n, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_section_with<R: Rng + ?Sized>(n: usize, m: u32, rng: &mut R) -> Section {
    let mf = factorial(m);
    let terms: Vec<(MultiIndex, C64)> = monomials(n + 1, m)
        .into_iter()
        .map(|alpha| {
            let weight = (mf / alpha.iter().map(|&a| factorial(a)).product::<f64>()).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            (alpha, C64::new(re, im) * (weight * std::f64::consts::FRAC_1_SQRT_2))
        })
        .collect();
    // the all-zero draw has probability zero
    Section::new(n, m, terms).expect("Gaussian draw is nonzero")
}

/// Monomials spanning the sections with `∇'s(0) = 0` at `0 = [1, 0, …, 0]`:
/// every `α` with `|α| = m` except those with `α_0 = m − 1`.
pub fn kernel_basis_a0(n: usize, m: u32) -> Vec<MultiIndex> {
    monomials(n + 1, m)
        .into_iter()
        .filter(|a| m == 0 || a[0] != m - 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{antipode, from_chart, fs_distance, UnitaryMap};
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn quad12() -> Section {
        Section::new(1, 2, [(vec![2, 0], c(1.0, 0.0)), (vec![0, 2], c(2.0, 0.0))]).unwrap()
    }

    fn random_z(n: usize, rng: &mut ChaCha8Rng, radius: f64) -> Vec<C64> {
        (0..n).map(|_| c(rng.random_range(-radius..radius), rng.random_range(-radius..radius))).collect()
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(monomials(3, 3).len(), 10);
        assert_eq!(monomials(4, 0), vec![vec![0, 0, 0, 0]]);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(Section::new(1, 2, [(vec![1, 0], c(1.0, 0.0))]), Err(Error::InvalidInput(_))));
        assert!(matches!(Section::new(1, 2, [(vec![2, 0, 0], c(1.0, 0.0))]), Err(Error::InvalidInput(_))));
        assert!(matches!(Section::new(1, 2, [(vec![2, 0], c(0.0, 0.0))]), Err(Error::ZeroSection)));
        assert!(matches!(Section::new(1, 2, [(vec![2, 0], c(1e-301, 0.0))]), Err(Error::ZeroSection)));
    }

    #[test]
    fn dehomogenize_examples() {
        let f = dehomogenize(&quad12(), ChartIndex::new(0, 1).unwrap());
        assert_eq!(f.coeff(&[0]), c(1.0, 0.0));
        assert_eq!(f.coeff(&[2]), c(2.0, 0.0));
        let s = Section::new(2, 3, [(vec![3, 0, 0], c(1.0, 0.0))]).unwrap();
        let f = dehomogenize(&s, ChartIndex::new(0, 2).unwrap());
        assert_eq!(f.terms(), &[(vec![0, 0], c(1.0, 0.0))]);
        let s = Section::new(1, 2, [(vec![1, 1], c(1.0, 0.0))]).unwrap();
        let f = dehomogenize(&s, ChartIndex::new(1, 1).unwrap());
        assert_eq!(f.terms(), &[(vec![1], c(1.0, 0.0))]);
    }

    #[test]
    fn fs_jet_examples() {
        let j = fs_jet(&[c(0.0, 0.0), c(0.0, 0.0)], 3);
        assert!(j.d1.iter().all(|x| x.norm() == 0.0));
        assert!(j.d2_holo.iter().all(|x| x.norm() == 0.0));
        assert!((j.d2_mixed.clone() - DMatrix::identity(2, 2) * c(3.0, 0.0)).norm() < 1e-15);
        let j = fs_jet(&[c(1.0, 0.0)], 2);
        assert!((j.d1[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((j.d2_mixed[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fs_jet_mixed_part_is_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..4 {
            for _ in 0..50 {
                let z = random_z(n, &mut rng, 3.0);
                let j = fs_jet(&z, 4);
                let ev = crate::linalg::hermitian_eigenvalues(&j.d2_mixed);
                assert!(ev[0] > 0.0);
                assert!(crate::linalg::hermitian_defect(&j.d2_mixed) < 1e-14);
                assert!(crate::linalg::symmetry_defect(&j.d2_holo) < 1e-14);
            }
        }
    }

    #[test]
    fn nabla_prime_examples() {
        let s = Section::new(2, 3, [(vec![3, 0, 0], c(1.0, 0.0))]).unwrap();
        let np = nabla_prime(&s, &ProjectivePoint::basis(2, 0));
        assert!(np.covector.iter().all(|x| x.norm() == 0.0));
        assert_eq!(np.residual, 0.0);
        assert!(nabla_prime(&quad12(), &ProjectivePoint::basis(1, 1)).residual < 1e-15);
        assert!(nabla_prime(&quad12(), &ProjectivePoint::basis(1, 0)).residual < 1e-15);
        // Z_0 + Z_1 at z = 1: f' − f·m z̄/(1+|z|²) = 1 − 2·(1/2) = 0, the maximum of |s|²
        let l = Section::new(1, 1, [(vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(1.0, 0.0))]).unwrap();
        let f = dehomogenize(&l, ChartIndex::new(0, 1).unwrap());
        let (xi, res) = nabla_prime_in_chart(&f, &[c(1.0, 0.0)], l.norm());
        assert!(xi[0].norm() < 1e-15 && res < 1e-15);
        let (xi, _) = nabla_prime_in_chart(&f, &[c(0.0, 0.0)], l.norm());
        assert!((xi[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn linear_form_critical_point_is_grid_maximum() {
        // brute-force grid over the chart: |s|² for Z_0 + Z_1 peaks at z = 1
        let l = Section::new(1, 1, [(vec![1, 0], c(1.0, 0.0)), (vec![0, 1], c(1.0, 0.0))]).unwrap();
        let f = dehomogenize(&l, ChartIndex::new(0, 1).unwrap());
        let mut best = (f64::MIN, c(0.0, 0.0));
        for i in -200..=200 {
            for j in -200..=200 {
                let z = c(i as f64 * 0.01, j as f64 * 0.01);
                let v = norm_sq_in_chart(&f, &[z]);
                if v > best.0 {
                    best = (v, z);
                }
            }
        }
        assert!((best.1 - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn norm_sq_examples() {
        let s = Section::new(2, 2, [(vec![2, 0, 0], c(1.0, 0.0))]).unwrap();
        assert!((norm_sq(&s, &ProjectivePoint::basis(2, 0)) - 1.0).abs() < 1e-15);
        assert_eq!(norm_sq(&s, &ProjectivePoint::basis(2, 2)), 0.0);
    }

    #[test]
    fn norm_sq_and_residual_are_chart_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..4 {
            for trial in 0..30 {
                let s = random_section(n, 3, trial);
                let p = ProjectivePoint::new(random_z(n + 1, &mut rng, 1.0)).unwrap();
                let direct = norm_sq(&s, &p);
                for i in 0..=n {
                    let chart = ChartIndex::new(i, n).unwrap();
                    let Ok(z) = to_chart(&p, chart) else { continue };
                    if p.coords()[i].norm() < 0.2 {
                        continue;
                    }
                    let poly = dehomogenize(&s, chart);
                    assert!((norm_sq_in_chart(&poly, &z) - direct).abs() < 1e-12 * (1.0 + direct));
                    let res = nabla_prime_in_chart(&poly, &z, s.norm()).1;
                    let reference = nabla_prime(&s, &p).residual;
                    assert!((res - reference).abs() < 1e-10 * (1.0 + reference), "{res} vs {reference}");
                }
            }
        }
    }

    #[test]
    fn polynomial_jet_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for n in 1..4 {
            let s = random_section(n, 4, 100 + n as u64);
            let f = dehomogenize(&s, ChartIndex::new(0, n).unwrap());
            for _ in 0..20 {
                let z = random_z(n, &mut rng, 1.0);
                let jet = f.jet(&z);
                for j in 0..n {
                    let mut zp = z.clone();
                    let mut zm = z.clone();
                    zp[j] += h;
                    zm[j] -= h;
                    // holomorphic: ∂f/∂z_j equals the x_j-derivative
                    let fd = (f.eval(&zp) - f.eval(&zm)) / (2.0 * h);
                    assert!((fd - jet.grad[j]).norm() <= 1e-7 * (1.0 + jet.grad[j].norm()));
                    for k in 0..n {
                        let gp = f.jet(&zp).grad[k];
                        let gm = f.jet(&zm).grad[k];
                        let fd2 = (gp - gm) / (2.0 * h);
                        assert!((fd2 - jet.hess[j * n + k]).norm() <= 1e-7 * (1.0 + jet.hess[j * n + k].norm()));
                    }
                }
            }
        }
    }

    #[test]
    fn gradient_examples() {
        let s = quad12();
        let g = grad_log_norm_sq(&s, &ProjectivePoint::basis(1, 0)).unwrap();
        assert!(g.components.iter().all(|x| x.abs() < 1e-15));
        let zero_pt = ProjectivePoint::new(vec![c(1.0, 0.0), c(0.0, 1.0 / 2f64.sqrt())]).unwrap();
        assert!(matches!(grad_log_norm_sq(&s, &zero_pt), Err(Error::ZeroLocus)));
    }

    #[test]
    fn linear_form_gradient_points_away_from_its_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let x = ProjectivePoint::new(random_z(2, &mut rng, 1.0)).unwrap();
            let l = LinearFactor::vanishing_at(&x).unwrap().to_section();
            let q = ProjectivePoint::new(random_z(2, &mut rng, 1.0)).unwrap();
            let y = antipode(&x).unwrap();
            if fs_distance(&q, &x) < 1e-2 || fs_distance(&q, &y) < 1e-2 {
                continue;
            }
            let g = grad_log_norm_sq(&l, &q).unwrap();
            let z = to_chart(&q, g.chart).unwrap();
            let dir = c(g.components[0], g.components[1]);
            let moved = from_chart(&[z[0] + dir / dir.norm() * 1e-7], g.chart);
            // moving along the gradient approaches y along the great circle through x, q, y
            assert!(fs_distance(&moved, &y) < fs_distance(&q, &y));
            let normal = crate::geometry::cross3(cp_sphere(&x), cp_sphere(&q));
            let off_plane = crate::geometry::dot3(normal, cp_sphere(&moved)) / crate::geometry::norm3(normal);
            assert!(off_plane.abs() < 1e-12, "{off_plane}");
        }
    }

    fn cp_sphere(p: &ProjectivePoint) -> [f64; 3] {
        crate::geometry::cp1_to_sphere(p).unwrap().xyz()
    }

    #[test]
    fn gradient_is_metric_dual_of_differential() {
        // g(v, e) = d log|s|²(e) with g = Re h, h = ∂∂̄ log(1+|z|²)
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let step = 1e-6;
        for n in 1..4 {
            for t in 0..20 {
                let s = random_section(n, 3, 40 + t);
                let p = ProjectivePoint::new(random_z(n + 1, &mut rng, 1.0)).unwrap();
                let g = grad_log_norm_sq(&s, &p).unwrap();
                let z = to_chart(&p, g.chart).unwrap();
                let f = dehomogenize(&s, g.chart);
                let h = fs_jet(&z, 1).d2_mixed;
                let v: Vec<C64> = (0..n).map(|j| c(g.components[j], g.components[n + j])).collect();
                for dir in 0..2 * n {
                    let mut e = vec![c(0.0, 0.0); n];
                    e[dir % n] = if dir < n { c(1.0, 0.0) } else { c(0.0, 1.0) };
                    let zp: Vec<C64> = z.iter().zip(&e).map(|(a, b)| a + b * step).collect();
                    let zm: Vec<C64> = z.iter().zip(&e).map(|(a, b)| a - b * step).collect();
                    let du = (f.log_norm_sq(&zp) - f.log_norm_sq(&zm)) / (2.0 * step);
                    let mut gv = c(0.0, 0.0);
                    for j in 0..n {
                        for k in 0..n {
                            gv += h[(j, k)] * v[j] * e[k].conj();
                        }
                    }
                    assert!((gv.re - du).abs() < 1e-6 * (1.0 + du.abs()), "{} vs {du}", gv.re);
                }
            }
        }
    }

    #[test]
    fn gradient_is_additive_over_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for t in 0..20 {
            let s = random_section(1, 5, 900 + t);
            let factors = factor_binary_form(&s).unwrap();
            for _ in 0..5 {
                let q = ProjectivePoint::new(random_z(2, &mut rng, 1.0)).unwrap();
                let total = grad_log_norm_sq(&s, &q).unwrap();
                let mut sum = vec![0.0; 2];
                for l in &factors {
                    let g = grad_log_norm_sq(&l.to_section(), &q).unwrap();
                    assert_eq!(g.chart, total.chart);
                    sum[0] += g.components[0];
                    sum[1] += g.components[1];
                }
                let scale = 1.0 + total.components.iter().map(|x| x.abs()).sum::<f64>();
                assert!((sum[0] - total.components[0]).abs() < 1e-10 * scale);
                assert!((sum[1] - total.components[1]).abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn factor_examples() {
        let fermat = Section::new(1, 3, [(vec![0, 3], c(1.0, 0.0)), (vec![3, 0], c(-1.0, 0.0))]).unwrap();
        let zeros = binary_zeros(&fermat, 1e-6).unwrap();
        assert_eq!(zeros.len(), 3);
        for k in 0..3 {
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
            let expected = ProjectivePoint::new(vec![c(1.0, 0.0), w]).unwrap();
            assert!(zeros.iter().any(|(p, mult)| *mult == 1 && p.approx_eq(&expected, 1e-12)));
        }
        let power = Section::new(1, 4, [(vec![0, 4], c(1.0, 0.0))]).unwrap();
        let zeros = binary_zeros(&power, 1e-6).unwrap();
        assert_eq!(zeros.len(), 1);
        assert_eq!(zeros[0].1, 4);
        assert!(zeros[0].0.approx_eq(&ProjectivePoint::basis(1, 0), 1e-15));
        let at_infinity = Section::new(1, 3, [(vec![3, 0], c(1.0, 0.0)), (vec![2, 1], c(2.0, 0.0))]).unwrap();
        let zeros = binary_zeros(&at_infinity, 1e-6).unwrap();
        assert!(zeros.iter().any(|(p, k)| *k == 2 && p.approx_eq(&ProjectivePoint::basis(1, 1), 1e-15)));
        assert!(factor_binary_form(&random_section(2, 2, 1)).is_err());
    }

    #[test]
    fn factorization_reconstructs_random_forms() {
        for seed in 0..200 {
            let s = random_section(1, 5, seed);
            let factors = factor_binary_form(&s).unwrap();
            assert_eq!(factors.len(), 5);
            let prod = section_from_factors(&factors, c(1.0, 0.0)).unwrap();
            // best scalar fit, then relative coefficient residual
            let num: C64 = monomials(2, 5).iter().map(|a| prod.coeff(a).conj() * s.coeff(a)).sum();
            let scale = num / prod.norm().powi(2);
            let resid: f64 = monomials(2, 5)
                .iter()
                .map(|a| (prod.coeff(a) * scale - s.coeff(a)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-10 * s.norm(), "seed {seed}: {resid:e}");
            for f in &factors {
                assert!(norm_sq(&s, &f.zero()) / s.norm().powi(2) < 1e-20);
            }
        }
    }

    #[test]
    fn random_section_is_deterministic() {
        assert_eq!(random_section(2, 3, 42), random_section(2, 3, 42));
        assert_ne!(random_section(2, 3, 42), random_section(2, 3, 43));
        assert_eq!(random_section(2, 3, 42).coeffs().len(), 10);
    }

    #[test]
    fn ensemble_norm_is_unitarily_invariant() {
        // Monte Carlo: E|s(p)|² = Σ_α (m!/α!) |p^α|² = (Σ|p_i|²)^m = 1 at every p
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let u = UnitaryMap::random(2, &mut rng);
        let p = ProjectivePoint::new(random_z(3, &mut rng, 1.0)).unwrap();
        let up = u.apply(&p);
        let samples = 10_000;
        let stats = |pt: &ProjectivePoint, base: u64| {
            let v: Vec<f64> = (0..samples).map(|i| norm_sq(&random_section(2, 3, base + i), pt)).collect();
            let mean = v.iter().sum::<f64>() / samples as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
            (mean, (var / samples as f64).sqrt())
        };
        let (m1, se1) = stats(&p, 0);
        let (m2, se2) = stats(&up, 1_000_000);
        assert!((m1 - m2).abs() < 3.0 * (se1 * se1 + se2 * se2).sqrt());
        assert!((m1 - 1.0).abs() < 3.0 * se1);

        // n = 1, m = 1: the same constant at two unrelated points
        let a = ProjectivePoint::basis(1, 0);
        let b = ProjectivePoint::new(vec![c(0.3, 0.1), c(-0.7, 0.5)]).unwrap();
        let va: Vec<f64> = (0..samples).map(|i| norm_sq(&random_section(1, 1, i), &a)).collect();
        let vb: Vec<f64> = (0..samples).map(|i| norm_sq(&random_section(1, 1, 5_000_000 + i), &b)).collect();
        for v in [va, vb] {
            let mean = v.iter().sum::<f64>() / samples as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
            assert!((mean - 1.0).abs() < 3.0 * (var / samples as f64).sqrt());
        }
    }

    #[test]
    fn kernel_basis_examples() {
        assert_eq!(kernel_basis_a0(1, 2), vec![vec![2, 0], vec![0, 2]]);
        assert_eq!(kernel_basis_a0(2, 1), vec![vec![1, 0, 0]]);
        for n in 1..5 {
            for m in 1..6u32 {
                let total = monomials(n + 1, m).len();
                // C(m+n, n) total monomials, n of them excluded
                let binom = (1..=n).fold(1u64, |acc, k| acc * (m as u64 + k as u64) / k as u64) as usize;
                assert_eq!(total, binom);
                assert_eq!(kernel_basis_a0(n, m).len(), binom - n);
            }
        }
    }

    #[test]
    fn kernel_sections_are_critical_at_origin() {
        let origin = ProjectivePoint::basis(2, 0);
        for alpha in kernel_basis_a0(2, 4) {
            let s = Section::new(2, 4, [(alpha, c(1.0, 0.0)), (vec![4, 0, 0], c(1.0, 0.0))]).unwrap();
            assert!(nabla_prime(&s, &origin).residual < 1e-15);
        }
        let s = Section::new(2, 4, [(vec![3, 1, 0], c(1.0, 0.0)), (vec![4, 0, 0], c(1.0, 0.0))]).unwrap();
        assert!(nabla_prime(&s, &origin).residual > 0.1);
    }

    #[test]
    fn text_format_examples() {
        let s: Section = "# quadric\n1 2\n2 0 1 0\n0 2 2 0\n".parse().unwrap();
        assert_eq!(s, quad12());
        assert!(matches!("1 2\n2 0 1\n".parse::<Section>(), Err(Error::Parse { line: 2, .. })));
        assert!(matches!("".parse::<Section>(), Err(Error::Parse { .. })));
        assert!(matches!("1 2\n1 0 1 0\n".parse::<Section>(), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn composition_with_identity_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_section(2, 3, 7);
        assert_eq!(s.compose_linear(&DMatrix::identity(3, 3)).unwrap(), s);
        let u = UnitaryMap::random(2, &mut rng);
        let back = s.act(&u).unwrap().act(&u.inverse()).unwrap();
        for a in monomials(3, 3) {
            assert!((back.coeff(&a) - s.coeff(&a)).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn text_format_round_trips_exactly(seed in any::<u64>(), n in 1usize..4, m in 0u32..5) {
            let s = random_section(n, m, seed);
            let parsed: Section = s.to_string().parse().unwrap();
            prop_assert_eq!(parsed, s);
        }

        #[test]
        fn norm_sq_is_unitarily_equivariant(seed in any::<u64>(), n in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_section_with(n, 3, &mut rng);
            let u = UnitaryMap::random(n, &mut rng);
            let p = ProjectivePoint::new(random_z(n + 1, &mut rng, 1.0)).unwrap();
            let moved = s.act(&u).unwrap();
            prop_assert!((norm_sq(&moved, &u.apply(&p)) - norm_sq(&s, &p)).abs() < 1e-11);
        }

        #[test]
        fn fs_jet_matches_finite_differences(re in -2.0f64..2.0, im in -2.0f64..2.0, re2 in -2.0f64..2.0, im2 in -2.0f64..2.0, m in 1u32..7) {
            let z = [c(re, im), c(re2, im2)];
            let jet = fs_jet(&z, m);
            let phi = |w: &[C64]| m as f64 * w.iter().map(|x| x.norm_sqr()).sum::<f64>().ln_1p();
            let h = 1e-4;
            // Wirtinger derivatives from real partials
            let partial = |j: usize, imag: bool, w: &[C64]| {
                let e = if imag { c(0.0, h) } else { c(h, 0.0) };
                let mut wp = w.to_vec();
                let mut wm = w.to_vec();
                wp[j] += e;
                wm[j] -= e;
                (phi(&wp) - phi(&wm)) / (2.0 * h)
            };
            let dz = |j: usize, w: &[C64]| c(partial(j, false, w), -partial(j, true, w)) * 0.5;
            let dzbar = |j: usize, w: &[C64]| c(partial(j, false, w), partial(j, true, w)) * 0.5;
            prop_assert!((jet.value - phi(&z)).abs() < 1e-12);
            for j in 0..2 {
                prop_assert!((dz(j, &z) - jet.d1[j]).norm() < 1e-6);
                for k in 0..2 {
                    // ∂_j∂_k φ = ∂_j of (∂_k φ), and ∂_j∂̄_k φ = ∂_j of (∂̄_k φ)
                    let shift = |w: &[C64], re_step: f64, im_step: f64| {
                        let mut v = w.to_vec();
                        v[j] += c(re_step, im_step);
                        v
                    };
                    let hh = 1e-4;
                    let ddx = (dz(k, &shift(&z, hh, 0.0)) - dz(k, &shift(&z, -hh, 0.0))) / (2.0 * hh);
                    let ddy = (dz(k, &shift(&z, 0.0, hh)) - dz(k, &shift(&z, 0.0, -hh))) / (2.0 * hh);
                    let holo = (ddx - c(0.0, 1.0) * ddy) * 0.5;
                    prop_assert!((holo - jet.d2_holo[(j, k)]).norm() < 1e-6, "holo {} vs {}", holo, jet.d2_holo[(j, k)]);
                    let ddx = (dzbar(k, &shift(&z, hh, 0.0)) - dzbar(k, &shift(&z, -hh, 0.0))) / (2.0 * hh);
                    let ddy = (dzbar(k, &shift(&z, 0.0, hh)) - dzbar(k, &shift(&z, 0.0, -hh))) / (2.0 * hh);
                    let mixed = (ddx - c(0.0, 1.0) * ddy) * 0.5;
                    prop_assert!((mixed - jet.d2_mixed[(j, k)]).norm() < 1e-6);
                }
            }
        }
    }
}
