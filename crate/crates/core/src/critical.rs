//! Locating and classifying critical points of a section.
//!
//! In every chart the critical equation `∂f = f ∂φ` is multiplied through by
//! `1 + |z|²`, giving the polynomial system `(1 + |z|²) ∂_j f − m f z̄_j = 0`.
//! It is not holomorphic, so it is solved as `2n` real equations by damped
//! Newton from quasi-random starts in each chart. Survivors are polished in
//! their best chart, deduplicated, and classified through the Hessian of
//! `log |s|²` after moving the point to the origin.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::geometry::{chart_of, from_chart, move_to_origin, to_chart, ChartIndex, ProjectivePoint};
use crate::linalg::{hermitian_eigenvalues, solve_real};
use crate::sections::{
    binary_zeros, dehomogenize, nabla_prime, nabla_prime_in_chart, norm_sq, ChartPolynomial, Section,
    ZERO_LOCUS_EPS,
};
use crate::{Error, Result, C64};

/// Largest `∇'s` residual at which [`hessian_at`] accepts a point.
pub const HESSIAN_RESIDUAL_TOL: f64 = 1e-8;

/// Zeros of a binary form closer than this are treated as one multiple zero.
pub const ZERO_CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Accept a converged point when its scale-free `∇'s` residual is at most this.
    pub residual_tol: f64,
    /// Points closer than this in Fubini-Study distance are merged.
    pub dedup_tol: f64,
    /// A point is degenerate when its margin is below `degen_tol · m`.
    pub degen_tol: f64,
    /// Newton starts per chart; `None` means `50 · m^n`.
    pub starts_per_chart: Option<usize>,
    /// Starts are drawn from the polydisc of this radius.
    pub start_radius: f64,
    /// Newton runs leaving the polydisc of this radius are abandoned.
    pub escape_radius: f64,
    pub max_newton_iter: usize,
    /// On `CP^1`, how many times to double the start budget when the
    /// Poincaré–Hopf count fails.
    pub max_escalations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            dedup_tol: 1e-7,
            degen_tol: 1e-6,
            starts_per_chart: None,
            start_radius: 1.5,
            escape_radius: 4.0,
            max_newton_iter: 100,
            max_escalations: 3,
        }
    }
}

impl SolveOptions {
    pub fn default_starts(n: usize, m: u32) -> usize {
        50 * (m.max(1) as usize).pow(n as u32)
    }
}

/// Second-order data of `log |s|²` at a critical point moved to the origin.
#[derive(Debug, Clone)]
pub struct HessianData {
    /// `2n × 2n` Hermitian: `2 [[−mI, A], [Ā, −mI]]`.
    pub j: DMatrix<C64>,
    /// `n × n` symmetric: `A = 2i (a_jk)` where `Σ a_jk z_j z_k` is the
    /// quadratic part of the normalised chart polynomial (`f(0) = 1`).
    pub a: DMatrix<C64>,
    /// `−mI + (1/m) A Ā`, the Schur complement left after block elimination.
    pub schur: DMatrix<C64>,
}

impl HessianData {
    /// Builds `J`, `A` and the Schur block from the quadratic coefficients.
    pub fn from_quadratic(quadratic: &DMatrix<C64>, m: u32) -> Self {
        let n = quadratic.nrows();
        let mf = m as f64;
        let a = quadratic.map(|x| x * C64::new(0.0, 2.0));
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            j[(r, r)] = C64::new(-2.0 * mf, 0.0);
            j[(n + r, n + r)] = C64::new(-2.0 * mf, 0.0);
            for c in 0..n {
                j[(r, n + c)] = a[(r, c)] * 2.0;
                j[(n + r, c)] = a[(r, c)].conj() * 2.0;
            }
        }
        let schur = DMatrix::identity(n, n) * C64::new(-mf, 0.0) + (&a * a.map(|x| x.conj())) / C64::new(mf, 0.0);
        Self { j, a, schur }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Ascending eigenvalues of the Schur block.
    pub fn schur_eigenvalues(&self) -> Vec<f64> {
        // AĀ is Hermitian for symmetric A; symmetrise away rounding
        hermitian_eigenvalues(&((&self.schur + self.schur.adjoint()) * C64::new(0.5, 0.0)))
    }

    /// Ascending eigenvalues of `J`.
    pub fn j_eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&((&self.j + self.j.adjoint()) * C64::new(0.5, 0.0)))
    }
}

/// Morse index through the Schur block: `n + #{negative eigenvalues}`.
pub fn index_of(h: &HessianData) -> usize {
    h.n() + h.schur_eigenvalues().iter().filter(|&&e| e < 0.0).count()
}

/// Morse index by counting negative eigenvalues of the full `J`.
pub fn index_from_full_hessian(h: &HessianData) -> usize {
    h.j_eigenvalues().iter().filter(|&&e| e < 0.0).count()
}

/// Smallest absolute eigenvalue of the Schur block.
pub fn margin_of(h: &HessianData) -> f64 {
    h.schur_eigenvalues().iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min)
}

/// Hessian data of `log |s|²` at the critical point `p`.
pub fn hessian_at(s: &Section, p: &ProjectivePoint) -> Result<HessianData> {
    let residual = nabla_prime(s, p).residual;
    if !(residual <= HESSIAN_RESIDUAL_TOL) {
        return Err(Error::NotCritical { residual });
    }
    if norm_sq(s, p) / s.norm().powi(2) < ZERO_LOCUS_EPS {
        return Err(Error::ZeroLocus);
    }
    let n = s.n();
    let moved = s.act(&move_to_origin(p))?;
    let f = dehomogenize(&moved, ChartIndex::new(0, n)?);
    let f0 = f.coeff(&vec![0; n]);
    let mut quadratic = DMatrix::zeros(n, n);
    for (beta, c) in f.terms() {
        if beta.iter().sum::<u32>() != 2 {
            continue;
        }
        let c = c / f0;
        let idx: Vec<usize> = beta.iter().enumerate().flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize)).collect();
        let (j, k) = (idx[0], idx[1]);
        if j == k {
            quadratic[(j, j)] = c;
        } else {
            quadratic[(j, k)] = c / 2.0;
            quadratic[(k, j)] = c / 2.0;
        }
    }
    Ok(HessianData::from_quadratic(&quadratic, s.m()))
}

/// Smallest absolute Schur eigenvalue at a critical point; it vanishes
/// exactly when a Takagi value of the quadratic part equals `m/2`.
pub fn degeneracy_margin(s: &Section, p: &ProjectivePoint) -> Result<f64> {
    Ok(margin_of(&hessian_at(s, p)?))
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub point: ProjectivePoint,
    pub residual: f64,
    /// `None` when the point is numerically degenerate.
    pub index: Option<usize>,
    pub nondeg_margin: f64,
    pub hessian: HessianData,
    /// Number of converged starts merged into this point.
    pub multiplicity_hint: usize,
}

/// Outcome of the completeness certificate.
#[derive(Debug, Clone, PartialEq)]
pub enum Completeness {
    /// Zeros − saddles + maxima = 2 on `CP^1`.
    Certified,
    /// The signed count came out wrong even after escalating the budget.
    Failed { signed_count: i64 },
    /// Preconditions of the count do not hold.
    Skipped { reason: String },
    /// No certificate exists for `n ≥ 2`.
    Unavailable,
}

impl Completeness {
    pub fn is_certified(&self) -> bool {
        matches!(self, Completeness::Certified)
    }

    pub fn reason(&self) -> String {
        match self {
            Completeness::Certified => "Poincaré–Hopf count equals 2".into(),
            Completeness::Failed { signed_count } => {
                format!("Poincaré–Hopf count is {signed_count}, expected 2")
            }
            Completeness::Skipped { reason } => reason.clone(),
            Completeness::Unavailable => "no completeness certificate for n ≥ 2".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub criticals: Vec<CriticalPoint>,
    /// Distinct zeros with multiplicity (`n = 1` only).
    pub zeros: Vec<(ProjectivePoint, usize)>,
    pub starts_used: usize,
    pub completeness: Completeness,
    /// The Poincaré–Hopf count still failed at the largest start budget.
    pub max_starts_exceeded: bool,
}

impl SolveReport {
    pub fn certified_complete(&self) -> bool {
        self.completeness.is_certified()
    }
}

/// Result of the Poincaré–Hopf count on `CP^1`.
#[derive(Debug, Clone, PartialEq)]
pub enum PoincareHopf {
    Holds,
    Fails { signed_count: i64 },
    Skipped(String),
}

/// Checks `#zeros − #saddles + #maxima = 2` for the gradient of `|s|²` on
/// the sphere. Requires simple zeros and non-degenerate critical points.
pub fn poincare_hopf_check(report: &SolveReport, m: u32) -> PoincareHopf {
    if let Some(cp) = report.criticals.first() {
        if cp.point.dim() != 1 {
            return PoincareHopf::Skipped("Poincaré–Hopf count is implemented for n = 1 only".into());
        }
    }
    if report.zeros.iter().any(|(_, k)| *k > 1) {
        return PoincareHopf::Skipped("section has a multiple zero".into());
    }
    let total: usize = report.zeros.iter().map(|(_, k)| k).sum();
    if total != m as usize {
        return PoincareHopf::Skipped(format!("found {total} zeros for a degree-{m} form"));
    }
    let mut signed = report.zeros.len() as i64;
    for cp in &report.criticals {
        match cp.index {
            Some(i) => signed += if i % 2 == 0 { 1 } else { -1 },
            None => return PoincareHopf::Skipped("a critical point is degenerate".into()),
        }
    }
    if signed == 2 {
        PoincareHopf::Holds
    } else {
        PoincareHopf::Fails { signed_count: signed }
    }
}

/// Finds the critical points of `s` by multistart Newton over all charts.
///
/// On `CP^1` the result is certified by the Poincaré–Hopf count; when the
/// count fails the start budget is doubled up to `max_escalations` times.
pub fn find_critical_points(s: &Section, opts: &SolveOptions) -> Result<SolveReport> {
    let n = s.n();
    let zeros = if n == 1 { binary_zeros(s, ZERO_CLUSTER_TOL)? } else { Vec::new() };
    let mut budget = opts.starts_per_chart.unwrap_or_else(|| SolveOptions::default_starts(n, s.m()));
    let mut escalations = 0;
    loop {
        let (criticals, starts_used) = solve_with_budget(s, opts, budget)?;
        let mut report = SolveReport {
            criticals,
            zeros: zeros.clone(),
            starts_used,
            completeness: Completeness::Unavailable,
            max_starts_exceeded: false,
        };
        if n != 1 {
            return Ok(report);
        }
        match poincare_hopf_check(&report, s.m()) {
            PoincareHopf::Holds => {
                report.completeness = Completeness::Certified;
                return Ok(report);
            }
            PoincareHopf::Skipped(reason) => {
                report.completeness = Completeness::Skipped { reason };
                return Ok(report);
            }
            PoincareHopf::Fails { signed_count } => {
                if escalations >= opts.max_escalations {
                    report.completeness = Completeness::Failed { signed_count };
                    report.max_starts_exceeded = true;
                    return Ok(report);
                }
                escalations += 1;
                budget *= 2;
            }
        }
    }
}

fn solve_with_budget(s: &Section, opts: &SolveOptions, budget: usize) -> Result<(Vec<CriticalPoint>, usize)> {
    let n = s.n();
    let snorm = s.norm();
    let starts = halton_polydisc(n, budget, opts.start_radius);
    let mut found: Vec<(ProjectivePoint, f64)> = Vec::new();
    for chart in 0..=n {
        let chart = ChartIndex::new(chart, n)?;
        let poly = dehomogenize(s, chart);
        let converged: Vec<Option<(ProjectivePoint, f64)>> = starts
            .par_iter()
            .map(|z0| {
                let z = newton_in_chart(&poly, z0.clone(), opts)?;
                let (_, residual) = nabla_prime_in_chart(&poly, &z, snorm);
                Some((from_chart(&z, chart), residual))
            })
            .collect();
        found.extend(converged.into_iter().flatten());
    }
    let starts_used = budget * (n + 1);

    let mut merged: Vec<(ProjectivePoint, f64, usize)> = Vec::new();
    for (p, raw_residual) in found {
        if let Some((_, _, hint)) = merged.iter_mut().find(|(q, _, _)| p.approx_eq(q, opts.dedup_tol)) {
            *hint += 1;
            continue;
        }
        // stalled runs are far from any root; no point polishing them
        if !(raw_residual <= 1e-6) {
            continue;
        }
        let Some((p, residual)) = polish(s, &p, opts) else { continue };
        if !(residual <= opts.residual_tol) || norm_sq(s, &p) / (snorm * snorm) < ZERO_LOCUS_EPS {
            continue;
        }
        match merged.iter_mut().find(|(q, _, _)| p.approx_eq(q, opts.dedup_tol)) {
            Some((_, _, hint)) => *hint += 1,
            None => merged.push((p, residual, 1)),
        }
    }

    let mut criticals = Vec::with_capacity(merged.len());
    for (point, residual, multiplicity_hint) in merged {
        let hessian = hessian_at(s, &point)?;
        let nondeg_margin = margin_of(&hessian);
        let index = (nondeg_margin > opts.degen_tol * s.m() as f64).then(|| index_of(&hessian));
        criticals.push(CriticalPoint { point, residual, index, nondeg_margin, hessian, multiplicity_hint });
    }
    Ok((criticals, starts_used))
}

/// Re-runs Newton in the chart where `p` has all coordinates in the unit
/// polydisc, then measures the chart-free residual.
fn polish(s: &Section, p: &ProjectivePoint, opts: &SolveOptions) -> Option<(ProjectivePoint, f64)> {
    let chart = chart_of(p);
    let poly = dehomogenize(s, chart);
    let z0 = to_chart(p, chart).ok()?;
    let z = newton_in_chart(&poly, z0, opts)?;
    let (_, residual) = nabla_prime_in_chart(&poly, &z, s.norm());
    Some((from_chart(&z, chart), residual))
}

/// The critical system `G_j = (1 + |z|²) ∂_j f − m f z̄_j` and its real
/// Jacobian with unknowns `(x, y)` and equations `(Re G, Im G)`.
fn critical_system(poly: &ChartPolynomial, z: &[C64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = z.len();
    let m = poly.m() as f64;
    let jet = poly.jet(z);
    let q = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let g = critical_residual(&jet.value, &jet.grad, z, m, q);
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            // dG = P dz + Q dz̄
            let p = z[k].conj() * jet.grad[j] + jet.hess[j * n + k] * q - jet.grad[k] * z[j].conj() * m;
            let mut qq = z[k] * jet.grad[j];
            if j == k {
                qq -= jet.value * m;
            }
            let dx = p + qq;
            let dy = (p - qq) * C64::new(0.0, 1.0);
            jac[(j, k)] = dx.re;
            jac[(j, n + k)] = dy.re;
            jac[(n + j, k)] = dx.im;
            jac[(n + j, n + k)] = dy.im;
        }
    }
    (g, jac)
}

fn critical_residual(value: &C64, grad: &[C64], z: &[C64], m: f64, q: f64) -> DVector<f64> {
    let n = z.len();
    let mut g = DVector::zeros(2 * n);
    for j in 0..n {
        let gj = grad[j] * q - value * z[j].conj() * m;
        g[j] = gj.re;
        g[n + j] = gj.im;
    }
    g
}

/// Damped Newton with backtracking on `‖G‖²` inside one chart. Returns the
/// final iterate if it stayed inside the escape radius; the caller judges
/// convergence with [`nabla_prime_in_chart`].
pub fn newton_in_chart(poly: &ChartPolynomial, mut z: Vec<C64>, opts: &SolveOptions) -> Option<Vec<C64>> {
    let n = z.len();
    let m = poly.m() as f64;
    let (mut g, mut jac) = critical_system(poly, &z);
    let mut gnorm = g.norm();
    let scale = poly.terms().iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    for _ in 0..opts.max_newton_iter {
        if gnorm <= 1e-15 * scale {
            break;
        }
        let step = solve_real(jac.clone(), &(-&g))?;
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 1e-4 {
            let trial: Vec<C64> = (0..n).map(|k| z[k] + C64::new(step[k], step[n + k]) * lambda).collect();
            let (value, grad) = poly.value_grad(&trial);
            let q = 1.0 + trial.iter().map(|w| w.norm_sqr()).sum::<f64>();
            let gtn = critical_residual(&value, &grad, &trial, m, q).norm();
            if gtn < (1.0 - 1e-4 * lambda) * gnorm {
                accepted = Some((trial, gtn));
                break;
            }
            lambda *= 0.5;
        }
        let Some((trial, gtn)) = accepted else { break };
        let moved = step.norm() * lambda;
        z = trial;
        gnorm = gtn;
        if z.iter().any(|w| w.norm() > opts.escape_radius) {
            return None;
        }
        if moved <= 1e-14 * (1.0 + z.iter().map(|w| w.norm()).fold(0.0, f64::max)) {
            break;
        }
        (g, jac) = critical_system(poly, &z);
    }
    Some(z)
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * inv;
        i /= b;
        inv /= base as f64;
    }
    out
}

/// `count` Halton points in the polydisc `{|z_j| ≤ radius}` of `C^n`,
/// uniform in area on each factor.
fn halton_polydisc(n: usize, count: usize, radius: f64) -> Vec<Vec<C64>> {
    assert!(2 * n <= PRIMES.len(), "Halton sequence supports n ≤ {}", PRIMES.len() / 2);
    (1..=count as u64)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let u = radical_inverse(i, PRIMES[2 * j]);
                    let v = radical_inverse(i, PRIMES[2 * j + 1]);
                    C64::from_polar(radius * u.sqrt(), std::f64::consts::TAU * v)
                })
                .collect()
        })
        .collect()
}
