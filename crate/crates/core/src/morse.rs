//! Morse counting series and the Morse inequality as exact polynomial
//! division by `1 + t`.

use std::fmt;

use crate::critical::CriticalPoint;
use crate::quadric::{quadric_critical_set, takagi};
use crate::{Error, Result};

/// A polynomial in `t` with non-negative integer coefficients, `coeffs[k]`
/// multiplying `t^k`. Trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct MorseSeries(Vec<u64>);

impl MorseSeries {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self(coeffs)
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// `t^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        Self(c)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> u64 {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Value at an integer `t`.
    pub fn eval(&self, t: i64) -> i64 {
        self.0.iter().rev().fold(0i64, |acc, &c| acc * t + c as i64)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.0.len().max(other.0.len());
        Self::new((0..len).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![0; k];
        c.extend_from_slice(&self.0);
        Self(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }
}

impl fmt::Display for MorseSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, c) => write!(f, "{c}t")?,
                (k, 1) => write!(f, "t^{k}")?,
                (k, c) => write!(f, "{c}t^{k}")?,
            }
        }
        Ok(())
    }
}

/// `Σ t^index` over isolated points plus `Σ t^λ P_t(N)` over critical manifolds.
pub fn series_from_indices(indices: &[usize], manifold_terms: &[(usize, MorseSeries)]) -> MorseSeries {
    let mut out = MorseSeries::zero();
    for &i in indices {
        out = out.add(&MorseSeries::monomial(i));
    }
    for (lambda, p) in manifold_terms {
        out = out.add(&p.shift(*lambda));
    }
    out
}

/// Counting series of the non-degenerate critical points plus manifold terms.
pub fn counting_series(criticals: &[CriticalPoint], manifold_terms: &[(usize, MorseSeries)]) -> MorseSeries {
    let indices: Vec<usize> = criticals.iter().filter_map(|c| c.index).collect();
    series_from_indices(&indices, manifold_terms)
}

/// Poincaré polynomial `1 + t² + ⋯ + t^{2n}` of `CP^n`.
pub fn poincare_cpn(n: usize) -> MorseSeries {
    MorseSeries::new((0..=2 * n).map(|k| u64::from(k % 2 == 0)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseCheck {
    /// `M − P = (1 + t) R` with `R ≥ 0`.
    pub holds: bool,
    /// `R` when the inequality holds.
    pub r: Option<MorseSeries>,
    /// Quotient of `M − P` by `1 + t`, possibly with negative entries.
    pub quotient: Vec<i64>,
    pub remainder: i64,
}

/// Divides `M − P` by `1 + t` exactly.
pub fn morse_inequality_check(m: &MorseSeries, p: &MorseSeries) -> MorseCheck {
    let len = m.0.len().max(p.0.len());
    let mut d: Vec<i64> = (0..len).map(|k| m.coeff(k) as i64 - p.coeff(k) as i64).collect();
    while d.last() == Some(&0) {
        d.pop();
    }
    let (quotient, remainder) = divide_by_one_plus_t(&d);
    let holds = remainder == 0 && quotient.iter().all(|&q| q >= 0);
    let r = holds.then(|| MorseSeries::new(quotient.iter().map(|&q| q as u64).collect()));
    MorseCheck { holds, r, quotient, remainder }
}

/// Synthetic division by `1 + t`, from the top coefficient down.
fn divide_by_one_plus_t(d: &[i64]) -> (Vec<i64>, i64) {
    if d.len() <= 1 {
        return (Vec::new(), d.first().copied().unwrap_or(0));
    }
    let deg = d.len() - 1;
    let mut q = vec![0i64; deg];
    q[deg - 1] = d[deg];
    for k in (1..deg).rev() {
        q[k - 1] = d[k] - q[k];
    }
    let rem = d[0] - q[0];
    (q, rem)
}

/// Even Betti numbers of a smooth quadric hypersurface `D ⊂ CP^n` outside
/// the middle degree: one in each even degree up to `2(n − 1)`, the middle
/// degree `n − 1` left at zero.
fn quadric_known_betti(n: usize) -> Vec<i64> {
    (0..2 * n - 1).map(|k| i64::from(k % 2 == 0 && k != n - 1)).collect()
}

/// The middle Betti number `h^{n−1}(D)` of a smooth quadric `D ⊂ CP^n`, `n`
/// odd.
///
/// With `D` an index-0 critical manifold and the points `p_i` of index
/// `n + i`, the Morse identity `P_t(D) + Σ_i t^{n+i} − P_t(CP^n) = (1 + t) R(t)`
/// vanishes at `t = −1`; the only unknown there is the middle coefficient.
pub fn quadric_middle_betti(n: usize) -> Result<u64> {
    if n == 0 || n % 2 == 0 {
        return Err(Error::InvalidInput(format!("the middle Betti number is solved for odd n, got {n}")));
    }
    let eval = |c: &[i64]| c.iter().rev().fold(0i64, |acc, &x| -acc + x);
    let known = eval(&quadric_known_betti(n));
    let points: i64 = (0..=n).map(|i| if (n + i) % 2 == 0 { 1 } else { -1 }).sum();
    let ambient = poincare_cpn(n).eval(-1);
    // h (−1)^{n−1} + known + points − ambient = 0
    let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
    let h = -(known + points - ambient) * sign;
    u64::try_from(h).map_err(|_| Error::InvalidInput(format!("negative Betti number {h}")))
}

/// Poincaré polynomial of a smooth quadric in `CP^n` for `n ≤ 3`: two points,
/// a conic `≅ P¹`, and `P¹ × P¹`.
pub fn quadric_zero_locus_poincare(n: usize) -> Option<MorseSeries> {
    match n {
        1 => Some(MorseSeries::new(vec![2])),
        2 => Some(MorseSeries::new(vec![1, 0, 1])),
        3 => Some(MorseSeries::new(vec![1, 0, 2, 0, 1])),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct QuadricMorseRun {
    pub n: usize,
    /// Indices of the isolated critical points, from the canonical form.
    pub indices: Vec<usize>,
    pub m: MorseSeries,
    pub p: MorseSeries,
    pub check: MorseCheck,
    /// `h^{n−1}(D)` for odd `n`.
    pub middle_betti: Option<u64>,
}

/// Morse inequality for `|s|²` with `s = Σ (i + 1) Z_i²` on `CP^n`, its zero
/// quadric counted as an index-0 critical manifold.
pub fn quadric_pipeline(n: usize) -> Result<QuadricMorseRun> {
    let pd = quadric_zero_locus_poincare(n)
        .ok_or_else(|| Error::InvalidInput(format!("zero-locus Betti numbers are shipped for n ≤ 3, got {n}")))?;
    let c = nalgebra::DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j { crate::C64::new((i + 1) as f64, 0.0) } else { crate::C64::new(0.0, 0.0) }
    });
    let indices: Vec<usize> = quadric_critical_set(&takagi(&c)?)?.into_iter().map(|(_, i)| i).collect();
    let m = series_from_indices(&indices, &[(0, pd)]);
    let p = poincare_cpn(n);
    let check = morse_inequality_check(&m, &p);
    let middle_betti = if n % 2 == 1 { Some(quadric_middle_betti(n)?) } else { None };
    Ok(QuadricMorseRun { n, indices, m, p, check, middle_betti })
}
