//! Command-line front end.
//!
//! Every run produces one document: JSON with `header` (config echo and
//! version), `body` and `footer` (summary and exit code), or a CSV table with
//! one point per row. Exit codes: 0 ok, 1 input error, 2 solver incomplete,
//! 3 certificate violation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::critical::{find_critical_points, Completeness, CriticalPoint, SolveOptions, SolveReport};
use crate::gauss_lucas::{gauss_lucas_certify, sample_hemisphere_section, GaussLucasCertificate, PolygonKind};
use crate::geometry::{fs_distance, sphere_to_cp1, ProjectivePoint};
use crate::morse::quadric_pipeline;
use crate::quadric::{quadric_critical_set, quadric_section, takagi};
use crate::sections::{random_section_with, Section};
use crate::{Error, Result, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Draw limit when conditioning a random binary form on hemisphere zeros.
pub const MAX_HEMISPHERE_DRAWS: usize = 1_000_000;

/// Numeric and exact quadric critical points must agree this closely.
const VERIFY_TOL: f64 = 1e-7;

#[derive(Parser, Debug)]
#[command(name = "fubini-crit", version, about = "Critical points of sections of O(m) over CP^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a random section and print it in the section text format.
    Sample(Common),
    /// Find and classify the critical points of one section.
    Solve {
        /// Section file; a random section from --n, --m, --seed otherwise.
        #[arg(long)]
        section: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Canonical form and critical points of a quadric.
    Quadric {
        /// Symmetric coefficient matrix, one row per line as `re im` pairs.
        #[arg(long, conflicts_with = "diag")]
        matrix: Option<PathBuf>,
        /// Diagonal coefficients, comma separated.
        #[arg(long, value_delimiter = ',')]
        diag: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Check where critical points sit relative to the hull of the zeros.
    GaussLucas {
        /// Binary form to certify; otherwise --trials random forms of degree --m.
        #[arg(long)]
        section: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Morse inequality for the standard quadric on CP^n.
    Morse(Common),
    /// Monte Carlo counts of critical points by index.
    Density(Common),
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    residual_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    dedup_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    degen_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::StructuredText)]
    format: Format,
    /// Cross-check exact results against the numeric solver.
    #[arg(long)]
    verify: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    StructuredText,
    Tabular,
}

impl Common {
    fn validate(&self) -> Result<()> {
        if self.n == Some(0) {
            return Err(Error::InvalidInput("--n must be at least 1".into()));
        }
        if self.m == Some(0) {
            return Err(Error::InvalidInput("--m must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("--trials must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidInput("--jobs must be at least 1".into()));
        }
        for (name, v) in [("--residual-tol", self.residual_tol), ("--dedup-tol", self.dedup_tol), ("--degen-tol", self.degen_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn need_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::InvalidInput("--n is required".into()))
    }

    fn need_m(&self) -> Result<u32> {
        self.m.ok_or_else(|| Error::InvalidInput("--m is required".into()))
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            residual_tol: self.residual_tol,
            dedup_tol: self.dedup_tol,
            degen_tol: self.degen_tol,
            ..SolveOptions::default()
        }
    }
}

/// Independent stream `trial` of the run seed.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trials<T: Send>(jobs: Option<usize>, trials: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..trials).into_par_iter().map(f).collect()))
}

/// A run's result before serialisation.
struct Outcome {
    body: Value,
    summary: Value,
    table: Table,
    code: i32,
}

#[derive(Default)]
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn with_coords(mut self, dim: usize) -> Self {
        for j in 0..dim {
            self.header.push(format!("z{j}_re"));
            self.header.push(format!("z{j}_im"));
        }
        self
    }

    fn push(&mut self, mut cells: Vec<String>, point: Option<&ProjectivePoint>) {
        if let Some(p) = point {
            for c in p.coords() {
                cells.push(fnum(c.re));
                cells.push(fnum(c.im));
            }
        }
        self.rows.push(cells);
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
    }
}

fn fnum(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e16).contains(&x.abs()) { format!("{x:e}") } else { x.to_string() }
}

fn opt_str<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct PointRecord(Vec<[f64; 2]>);

impl From<&ProjectivePoint> for PointRecord {
    fn from(p: &ProjectivePoint) -> Self {
        Self(p.coords().iter().map(|c| [c.re, c.im]).collect())
    }
}

#[derive(Serialize)]
struct CriticalRecord {
    point: PointRecord,
    index: Option<usize>,
    residual: f64,
    nondeg_margin: f64,
    multiplicity_hint: usize,
}

impl From<&CriticalPoint> for CriticalRecord {
    fn from(c: &CriticalPoint) -> Self {
        Self {
            point: (&c.point).into(),
            index: c.index,
            residual: c.residual,
            nondeg_margin: c.nondeg_margin,
            multiplicity_hint: c.multiplicity_hint,
        }
    }
}

fn completeness_label(c: &Completeness) -> &'static str {
    match c {
        Completeness::Certified => "certified",
        Completeness::Failed { .. } => "failed",
        Completeness::Skipped { .. } => "skipped",
        Completeness::Unavailable => "unavailable",
    }
}

fn report_json(r: &SolveReport) -> Value {
    let criticals: Vec<CriticalRecord> = r.criticals.iter().map(Into::into).collect();
    let zeros: Vec<Value> =
        r.zeros.iter().map(|(p, k)| json!({"point": PointRecord::from(p), "multiplicity": k})).collect();
    json!({
        "criticals": criticals,
        "zeros": zeros,
        "starts_used": r.starts_used,
        "certified_complete": r.certified_complete(),
        "completeness": completeness_label(&r.completeness),
        "completeness_reason": r.completeness.reason(),
        "max_starts_exceeded": r.max_starts_exceeded,
    })
}

fn index_counts(criticals: &[CriticalPoint], n: usize) -> Vec<usize> {
    let mut counts = vec![0; 2 * n + 1];
    for c in criticals {
        if let Some(i) = c.index {
            counts[i] += 1;
        }
    }
    counts
}

fn read_section(path: &PathBuf) -> Result<Section> {
    std::fs::read_to_string(path)?.parse()
}

/// Symmetric matrix file: one row per line, each entry a `re im` pair.
pub fn parse_matrix(text: &str) -> Result<DMatrix<C64>> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse { line: lineno + 1, msg: format!("{t:?}: {e}") }))
            .collect::<Result<_>>()?;
        if nums.len() % 2 != 0 {
            return Err(Error::Parse { line: lineno + 1, msg: "entries come as re im pairs".into() });
        }
        rows.push(nums.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn execute(command: &Command) -> Result<i32> {
    let (name, common) = match command {
        Command::Sample(c) => ("sample", c),
        Command::Solve { common, .. } => ("solve", common),
        Command::Quadric { common, .. } => ("quadric", common),
        Command::GaussLucas { common, .. } => ("gauss-lucas", common),
        Command::Morse(c) => ("morse", c),
        Command::Density(c) => ("density", c),
    };
    common.validate()?;
    if let Command::Sample(c) = command {
        let s = random_section_with(c.need_n()?, c.need_m()?, &mut trial_rng(c.seed, 0));
        emit(c, s.to_string().as_bytes())?;
        return Ok(EXIT_OK);
    }
    let outcome = match command {
        Command::Solve { section, common } => cmd_solve(section.as_ref(), common)?,
        Command::Quadric { matrix, diag, common } => cmd_quadric(matrix.as_ref(), diag.as_deref(), common)?,
        Command::GaussLucas { section, common } => cmd_gauss_lucas(section.as_ref(), common)?,
        Command::Morse(c) => cmd_morse(c)?,
        Command::Density(c) => cmd_density(c)?,
        Command::Sample(_) => unreachable!(),
    };
    let bytes = match common.format {
        Format::StructuredText => {
            let doc = json!({
                "header": {
                    "tool": "fubini-crit",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": name,
                    "config": common,
                },
                "body": outcome.body,
                "footer": {"summary": outcome.summary, "exit_code": outcome.code},
            });
            let mut text = serde_json::to_vec_pretty(&doc).map_err(|e| Error::InvalidInput(format!("json: {e}")))?;
            text.push(b'\n');
            text
        }
        Format::Tabular => outcome.table.to_csv()?,
    };
    emit(common, &bytes)?;
    Ok(outcome.code)
}

fn emit(common: &Common, bytes: &[u8]) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn cmd_solve(section: Option<&PathBuf>, c: &Common) -> Result<Outcome> {
    let s = match section {
        Some(path) => read_section(path)?,
        None => random_section_with(c.need_n()?, c.need_m()?, &mut trial_rng(c.seed, 0)),
    };
    let report = run_trials(c.jobs, 1, |_| find_critical_points(&s, &c.solve_options()))?.remove(0)?;
    let code = if matches!(report.completeness, Completeness::Failed { .. }) { EXIT_INCOMPLETE } else { EXIT_OK };
    let mut table = Table::new(&["kind", "index", "residual", "nondeg_margin", "multiplicity"]).with_coords(s.n() + 1);
    for cp in &report.criticals {
        let row = vec![
            "critical".into(),
            opt_str(cp.index),
            fnum(cp.residual),
            fnum(cp.nondeg_margin),
            cp.multiplicity_hint.to_string(),
        ];
        table.push(row, Some(&cp.point));
    }
    for (z, k) in &report.zeros {
        table.push(vec!["zero".into(), String::new(), String::new(), String::new(), k.to_string()], Some(z));
    }
    let summary = json!({
        "critical_points": report.criticals.len(),
        "by_index": index_counts(&report.criticals, s.n()),
        "degenerate": report.criticals.iter().filter(|cp| cp.index.is_none()).count(),
        "certified_complete": report.certified_complete(),
    });
    Ok(Outcome {
        body: json!({"section": s.to_string(), "report": report_json(&report)}),
        summary,
        table,
        code,
    })
}

fn cmd_quadric(matrix: Option<&PathBuf>, diag: Option<&[f64]>, c: &Common) -> Result<Outcome> {
    let cm = match (matrix, diag) {
        (Some(path), _) => parse_matrix(&std::fs::read_to_string(path)?)?,
        (None, Some(d)) => {
            if d.len() < 2 {
                return Err(Error::InvalidInput("--diag needs at least two entries".into()));
            }
            DMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) })
        }
        (None, None) => return Err(Error::InvalidInput("give --matrix FILE or --diag a0,a1,...".into())),
    };
    let q = takagi(&cm)?;
    let n = q.n();
    let exact = quadric_critical_set(&q)?;
    let exact_json: Vec<Value> =
        exact.iter().map(|(p, i)| json!({"point": PointRecord::from(p), "index": i})).collect();
    let mut table = Table::new(&["source", "index", "residual"]).with_coords(n + 1);
    for (p, i) in &exact {
        table.push(vec!["exact".into(), i.to_string(), String::new()], Some(p));
    }
    let mut body = json!({
        "takagi_values": q.a,
        "strict": q.strict,
        "reconstruction_residual": (q.reconstruct() - &cm).norm(),
        "critical_points": exact_json,
    });
    let mut summary = json!({"critical_points": exact.len(), "smooth": q.a[0] > 0.0});
    let mut code = EXIT_OK;
    if c.verify {
        let s = quadric_section(&cm)?;
        let report = run_trials(c.jobs, 1, |_| find_critical_points(&s, &c.solve_options()))?.remove(0)?;
        for cp in &report.criticals {
            table.push(vec!["numeric".into(), opt_str(cp.index), fnum(cp.residual)], Some(&cp.point));
        }
        let all_found = exact.iter().all(|(p, i)| {
            report.criticals.iter().any(|cp| fs_distance(&cp.point, p) <= VERIFY_TOL && cp.index == Some(*i))
        });
        let matched = all_found && report.criticals.len() == exact.len();
        body["numeric"] = report_json(&report);
        body["match"] = json!(matched);
        summary["match"] = json!(matched);
        if !matched {
            code = EXIT_VIOLATION;
        }
    }
    Ok(Outcome { body, summary, table, code })
}

fn polygon_kind(k: PolygonKind) -> &'static str {
    match k {
        PolygonKind::Point => "Point",
        PolygonKind::GeodesicSegment => "GeodesicSegment",
        PolygonKind::Polygon => "Polygon",
    }
}

fn certificate_json(cert: &GaussLucasCertificate) -> Value {
    let criticals: Vec<Value> = cert
        .criticals
        .iter()
        .map(|lc| json!({"critical": CriticalRecord::from(&lc.critical), "verdict": lc.location.label()}))
        .collect();
    let zeros: Vec<Value> =
        cert.zeros.iter().map(|(p, k)| json!({"point": PointRecord::from(p), "multiplicity": k})).collect();
    let vertices = |v: &[crate::geometry::SpherePoint]| -> Vec<PointRecord> {
        v.iter().map(|x| PointRecord::from(&sphere_to_cp1(x))).collect()
    };
    json!({
        "zeros": zeros,
        "p": {"kind": polygon_kind(cert.p.kind), "vertices": vertices(&cert.p.vertices)},
        "p_inf": {"kind": polygon_kind(cert.p_inf.kind), "vertices": vertices(&cert.p_inf.vertices)},
        "criticals": criticals,
        "theorem_holds": cert.theorem_holds,
        "has_index2_in_pinf": cert.has_index2_in_pinf,
        "has_critical_in_p": cert.has_critical_in_p,
        "p_side_interior": cert.p_side_interior,
        "pinf_interior": cert.pinf_interior,
        "authoritative": cert.authoritative(),
        "completeness_reason": cert.completeness.reason(),
        "starts_used": cert.starts_used,
    })
}

fn cmd_gauss_lucas(section: Option<&PathBuf>, c: &Common) -> Result<Outcome> {
    let opts = c.solve_options();
    type Trial = Result<Option<(GaussLucasCertificate, usize)>>;
    let results: Vec<Trial> = match section {
        Some(path) => {
            let s = read_section(path)?;
            vec![gauss_lucas_certify(&s, &opts).map(|cert| Some((cert, 1)))]
        }
        None => {
            let m = c.need_m()?;
            if c.n.is_some_and(|n| n != 1) {
                return Err(Error::NotBinary(c.n.unwrap()));
            }
            if m < 2 {
                return Err(Error::InvalidInput(format!("degree must be at least 2, got {m}")));
            }
            run_trials(c.jobs, c.trials, |t| {
                let mut rng = trial_rng(c.seed, t);
                match sample_hemisphere_section(m, &mut rng, MAX_HEMISPHERE_DRAWS)? {
                    Some((s, draws)) => Ok(Some((gauss_lucas_certify(&s, &opts)?, draws))),
                    None => Ok(None),
                }
            })?
        }
    };

    let mut table = Table::new(&["trial", "verdict", "index", "residual", "nondeg_margin"]).with_coords(2);
    let mut trials_json = Vec::with_capacity(results.len());
    let (mut violations, mut violating_trials, mut index2, mut non_authoritative, mut unsampled, mut draws) =
        (0usize, 0usize, 0usize, 0usize, 0usize, 0usize);
    let (mut interior_checked, mut interior_ok) = (0usize, 0usize);
    for (t, r) in results.into_iter().enumerate() {
        match r? {
            Some((cert, d)) => {
                draws += d;
                let v = cert.violations();
                violations += v;
                violating_trials += usize::from(v > 0);
                index2 += usize::from(cert.has_index2_in_pinf);
                non_authoritative += usize::from(!cert.authoritative());
                if let Some(ok) = cert.p_side_interior {
                    interior_checked += 1;
                    interior_ok += usize::from(ok);
                }
                for lc in &cert.criticals {
                    let row = vec![
                        t.to_string(),
                        lc.location.label().into(),
                        opt_str(lc.critical.index),
                        fnum(lc.critical.residual),
                        fnum(lc.critical.nondeg_margin),
                    ];
                    table.push(row, Some(&lc.critical.point));
                }
                trials_json.push(json!({"trial": t, "draws": d, "certificate": certificate_json(&cert)}));
            }
            None => {
                unsampled += 1;
                trials_json.push(json!({"trial": t, "draws": MAX_HEMISPHERE_DRAWS, "certificate": null}));
                draws += MAX_HEMISPHERE_DRAWS;
            }
        }
    }
    let certified = trials_json.len() - unsampled;
    let summary = json!({
        "trials": trials_json.len(),
        "certificates": certified,
        "violations": violations,
        "violating_trials": violating_trials,
        "index2_in_pinf": index2,
        "p_interior_checked": interior_checked,
        "p_interior_holds": interior_ok,
        "non_authoritative": non_authoritative,
        "unsampled": unsampled,
        "hemisphere_acceptance_rate": if section.is_some() { json!(null) } else { json!(certified as f64 / draws as f64) },
    });
    let code = if violations > 0 {
        EXIT_VIOLATION
    } else if non_authoritative > 0 || unsampled > 0 {
        EXIT_INCOMPLETE
    } else {
        EXIT_OK
    };
    Ok(Outcome { body: json!({"trials": trials_json}), summary, table, code })
}

fn cmd_morse(c: &Common) -> Result<Outcome> {
    let n = c.need_n()?;
    let run = quadric_pipeline(n)?;
    let mut table = Table::new(&["series", "degree", "coefficient"]);
    let r = run.check.r.clone().unwrap_or_default();
    for (name, series) in [("M", &run.m), ("P", &run.p), ("R", &r)] {
        for (k, &v) in series.coeffs().iter().enumerate() {
            table.push(vec![name.into(), k.to_string(), v.to_string()], None);
        }
    }
    let body = json!({
        "n": n,
        "indices": run.indices,
        "M": run.m.coeffs(),
        "P": run.p.coeffs(),
        "R": run.check.r.as_ref().map(|r| r.coeffs().to_vec()),
        "quotient": run.check.quotient,
        "remainder": run.check.remainder,
        "holds": run.check.holds,
        "middle_betti": run.middle_betti,
        "M_text": run.m.to_string(),
        "P_text": run.p.to_string(),
    });
    let summary = json!({"holds": run.check.holds, "middle_betti": run.middle_betti});
    let code = if run.check.holds { EXIT_OK } else { EXIT_VIOLATION };
    Ok(Outcome { body, summary, table, code })
}

fn mean_and_stderr(xs: &[usize]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<usize>() as f64 / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn cmd_density(c: &Common) -> Result<Outcome> {
    let (n, m) = (c.need_n()?, c.need_m()?);
    let opts = c.solve_options();
    let reports: Vec<Result<SolveReport>> = run_trials(c.jobs, c.trials, |t| {
        let s = random_section_with(n, m, &mut trial_rng(c.seed, t));
        find_critical_points(&s, &opts)
    })?;
    let mut table = Table::new(&["trial", "index", "residual", "nondeg_margin"]).with_coords(n + 1);
    let mut per_index: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 1];
    let mut totals = Vec::new();
    let mut degenerate_trials = 0;
    let mut incomplete = 0;
    let mut anomalies = Vec::new();
    for (t, r) in reports.into_iter().enumerate() {
        let r = r?;
        for cp in &r.criticals {
            let row = vec![t.to_string(), opt_str(cp.index), fnum(cp.residual), fnum(cp.nondeg_margin)];
            table.push(row, Some(&cp.point));
            if cp.index.is_none() {
                anomalies.push(json!({"trial": t, "point": PointRecord::from(&cp.point), "nondeg_margin": cp.nondeg_margin}));
            }
        }
        degenerate_trials += usize::from(r.criticals.iter().any(|cp| cp.index.is_none()));
        incomplete += usize::from(matches!(r.completeness, Completeness::Failed { .. }));
        for (k, count) in index_counts(&r.criticals, n).into_iter().enumerate() {
            per_index[k].push(count);
        }
        totals.push(r.criticals.len());
    }
    let histogram = |xs: &[usize]| -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for &x in xs {
            *h.entry(x).or_insert(0) += 1;
        }
        h
    };
    let by_index: Vec<Value> = per_index
        .iter()
        .enumerate()
        .map(|(k, xs)| {
            let (mean, se) = mean_and_stderr(xs);
            json!({"index": k, "mean": mean, "stderr": se, "histogram": histogram(xs)})
        })
        .collect();
    let (mean, se) = mean_and_stderr(&totals);
    let summary = json!({
        "trials": totals.len(),
        "mean_critical_points": mean,
        "stderr": se,
        "degenerate_trials": degenerate_trials,
        "degenerate_fraction": degenerate_trials as f64 / totals.len() as f64,
        "incomplete_trials": incomplete,
    });
    let body = json!({
        "by_index": by_index,
        "total": {"mean": mean, "stderr": se, "histogram": histogram(&totals)},
        "anomalies": anomalies,
    });
    let code = if incomplete > 0 { EXIT_INCOMPLETE } else { EXIT_OK };
    Ok(Outcome { body, summary, table, code })
}
