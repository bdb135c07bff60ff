//! Experiment driver: triangles for a family over an index window,
//! measured/predicted ratios, inequality checks, isospectrality checks and
//! the JSON/CSV reports.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::asymptotics::{predict, AsymptoticsError, FamilySpec, PredictionRecord, GUARD_TOL};
use crate::galerkin::TruncationPlan;
use crate::logc::LogComplex;
use crate::model::{
    shift_potential, BetaProxy, HillPotential, OperatorKind, Potential, SpectralTriangle,
};
use crate::monodromy::{lowest_eigenvalues, Integration, MonodromyError, Precision};
use crate::parse::format_complex;
use crate::triangles::{compute_r_n, compute_t_n, compute_triangle, window_sup, Backend, TriangleOptions};

/// Predicted gaps below this are computed in double-double when the
/// precision policy is automatic.
pub const AUTO_DD_THRESHOLD: f64 = 1e-6;
/// Predicted gaps below this require the monodromy backend.
pub const MONODROMY_REQUIRED: f64 = 1e-10;
/// Measured gaps at or below this count as vanishing.
pub const VANISHING_GAP: f64 = 1e-8;
/// Agreement required for spectra to count as equal.
/// Relative slack for `lambda- <= mu <= lambda+`.
pub const ORDERING_SLACK: f64 = 1e-12;
pub const ISO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error(transparent)]
    Monodromy(#[from] MonodromyError),
    #[error("eigenvalue count mismatch: {left} vs {right}")]
    CountMismatch { left: usize, right: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionPolicy {
    Double,
    #[serde(rename = "dd")]
    DoubleDouble,
    /// Double-double when the predicted gap is below [`AUTO_DD_THRESHOLD`].
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub backend: Backend,
    pub precision: PrecisionPolicy,
    /// Slack for the gap bound check.
    pub eta: f64,
    /// Compute Neumann eigenvalues too (Hill only).
    pub neumann: bool,
    pub plan: Option<TruncationPlan>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Both,
            precision: PrecisionPolicy::Auto,
            eta: 0.3,
            neumann: false,
            plan: None,
        }
    }
}

fn ser_ext<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) if v.is_infinite() => s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" }),
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_none(),
    }
}

/// `(1/144) S <= |gamma| + |mu - lambda^+| <= 58 S`, `S = |B^-| + |B^+|`,
/// with the proxies standing in for the exact functionals.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct EnclosureCheck {
    pub ok: bool,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// `value / lower`; at least 1 when the lower bound holds.
    pub lower_slack: f64,
    /// `upper / value`; at least 1 when the upper bound holds.
    pub upper_slack: f64,
    pub proxy_based: bool,
}

pub fn check_enclosure(tri: &SpectralTriangle, proxy: &BetaProxy) -> Option<EnclosureCheck> {
    let s = proxy.abs_sum();
    if !(s > 0.0) {
        return None;
    }
    let value = tri.gap.norm() + tri.deviation_plus.norm();
    let lower = s / 144.0;
    let upper = 58.0 * s;
    Some(EnclosureCheck {
        ok: lower <= value && value <= upper,
        value,
        lower,
        upper,
        lower_slack: value / lower,
        upper_slack: if value > 0.0 { upper / value } else { f64::INFINITY },
        proxy_based: true,
    })
}

/// `|gamma| / S` against `2 sqrt(t)/(1+t) +- eta`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct GapBoundCheck {
    pub ok: bool,
    pub ratio: f64,
    pub center: f64,
    pub eta: f64,
    /// `ratio - center`.
    pub residual: f64,
    pub proxy_based: bool,
}

pub fn check_gap_bound(tri: &SpectralTriangle, proxy: &BetaProxy, eta: f64) -> Option<GapBoundCheck> {
    let s = proxy.abs_sum();
    if !(s > 0.0) {
        return None;
    }
    let t = compute_t_n(proxy)?;
    let center = if t.is_infinite() { 0.0 } else { 2.0 * t.sqrt() / (1.0 + t) };
    let ratio = tri.gap.norm() / s;
    let residual = ratio - center;
    Some(GapBoundCheck {
        ok: residual.abs() <= eta,
        ratio,
        center,
        eta,
        residual,
        proxy_based: true,
    })
}

/// `(|nu - lambda^+| + |gamma|) / (|mu - lambda^+| + |gamma|)`.
pub fn check_neumann_equivalence(tri: &SpectralTriangle) -> Option<f64> {
    let nu = tri.nu?;
    let g = tri.gap.norm();
    let den = tri.deviation_plus.norm() + g;
    if den == 0.0 {
        return None;
    }
    Some(((nu - tri.lambda_plus).norm() + g) / den)
}

/// `|measured / predicted - 1|` for the self-adjoint corollary formulas,
/// each absent when its guard trips or the prediction vanishes.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorollaryResiduals {
    /// `mu - lambda^+`.
    pub dev_plus: Option<f64>,
    /// `mu - lambda^-`.
    pub dev_minus: Option<f64>,
    pub midpoint: Option<f64>,
    /// Nonnegative-coefficient case: the large deviation against `gamma`.
    pub large_dev_vs_gap: Option<f64>,
    /// Nonnegative-coefficient case: `|small deviation| / |gamma|`.
    pub small_dev_over_gap: Option<f64>,
}

fn rel_residual(measured: Complex64, predicted: f64) -> Option<f64> {
    if predicted == 0.0 {
        None
    } else {
        Some((measured / predicted - 1.0).norm())
    }
}

pub fn check_self_adjoint_corollaries(tri: &SpectralTriangle, proxy: &BetaProxy) -> CorollaryResiduals {
    let bp = proxy.b_plus_c();
    let abs = bp.norm();
    if abs == 0.0 {
        return CorollaryResiduals::default();
    }
    let cosine = bp.re / abs;
    let not_minus = (cosine + 1.0).abs() > GUARD_TOL;
    let not_plus = (cosine - 1.0).abs() > GUARD_TOL;
    let ratio = proxy.b_minus_c() / bp;
    let mid_ok = (ratio + 1.0).norm() > GUARD_TOL;
    let sign = match tri.kind {
        OperatorKind::Hill => -1.0,
        OperatorKind::Dirac => 1.0,
    };
    let mut out = CorollaryResiduals::default();
    let (sum_dev, diff_dev) = match tri.kind {
        OperatorKind::Hill => (tri.deviation_plus, tri.deviation_minus),
        OperatorKind::Dirac => (tri.deviation_minus, tri.deviation_plus),
    };
    if not_minus {
        let r = rel_residual(sum_dev, sign * (bp.re + abs));
        match tri.kind {
            OperatorKind::Hill => out.dev_plus = r,
            OperatorKind::Dirac => out.dev_minus = r,
        }
    }
    if not_plus {
        let r = rel_residual(diff_dev, sign * (bp.re - abs));
        match tri.kind {
            OperatorKind::Hill => out.dev_minus = r,
            OperatorKind::Dirac => out.dev_plus = r,
        }
    }
    if mid_ok {
        out.midpoint = rel_residual(tri.midpoint_dev, sign * bp.re);
    }
    let g = tri.gap.norm();
    let positive = (proxy.sqrt_minus_c() / proxy.sqrt_plus_c() - 1.0).norm() <= GUARD_TOL;
    if positive && g > 0.0 {
        // Hill: lambda^+ - mu ~ gamma; Dirac: mu - lambda^- ~ gamma
        let (large, small) = match tri.kind {
            OperatorKind::Hill => (-tri.deviation_plus, tri.deviation_minus),
            OperatorKind::Dirac => (tri.deviation_minus, tri.deviation_plus),
        };
        out.large_dev_vs_gap = Some((large / tri.gap - 1.0).norm());
        out.small_dev_over_gap = Some(small.norm() / g);
    }
    out
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignChoice {
    /// The branch rule fixed the sign.
    Resolved,
    /// Matched a posteriori; principal sign kept.
    Matched,
    /// Matched a posteriori; `sqrt(B^-)` negated.
    MatchedFlipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: i64,
    pub triangle: Option<SpectralTriangle>,
    pub prediction: Option<PredictionRecord>,
    pub gap_ratio: Option<Complex64>,
    pub midpoint_ratio: Option<Complex64>,
    /// `(mu - lambda^+, mu - lambda^-)` over their predictions.
    pub dev_ratios: Option<(Option<Complex64>, Option<Complex64>)>,
    pub sign_choice: Option<SignChoice>,
    pub backend_disagreement: Option<f64>,
    pub precision: Precision,
    pub enclosure: Option<EnclosureCheck>,
    pub gap_bound: Option<GapBoundCheck>,
    #[serde(serialize_with = "ser_ext")]
    pub t_n: Option<f64>,
    #[serde(serialize_with = "ser_ext")]
    pub r_n: Option<f64>,
    pub neumann_ratio: Option<f64>,
    pub corollaries: Option<CorollaryResiduals>,
    /// Predicted gap is exactly zero and the measured one is at most
    /// [`VANISHING_GAP`].
    pub vanishing_gap_ok: Option<bool>,
    /// Self-adjoint case: `lambda^- <= mu <= lambda^+` with small
    /// imaginary parts.
    pub ordering_ok: Option<bool>,
    pub error: Option<String>,
    pub notes: Vec<String>,
}

impl ReportRow {
    fn failed(n: i64, precision: Precision, error: String) -> Self {
        Self {
            n,
            triangle: None,
            prediction: None,
            gap_ratio: None,
            midpoint_ratio: None,
            dev_ratios: None,
            sign_choice: None,
            backend_disagreement: None,
            precision,
            enclosure: None,
            gap_bound: None,
            t_n: None,
            r_n: None,
            neumann_ratio: None,
            corollaries: None,
            vanishing_gap_ok: None,
            ordering_ok: None,
            error: Some(error),
            notes: Vec::new(),
        }
    }
}

/// `|ratio - 1|` over the window and whether it is non-increasing over the
/// top half, allowing one inversion.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TrendStat {
    pub errors: Vec<(i64, f64)>,
    pub inversions_top_half: usize,
    pub non_increasing_top_half: bool,
}

pub fn trend(errors: Vec<(i64, f64)>) -> TrendStat {
    let k = errors.len();
    let top = &errors[k / 2..];
    let inversions = top.windows(2).filter(|w| w[1].1 > w[0].1).count();
    TrendStat {
        inversions_top_half: inversions,
        non_increasing_top_half: inversions <= 1,
        errors,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub failed_rows: Vec<i64>,
    pub skipped: Vec<(i64, String)>,
    /// Finite-window suprema standing in for the limsups.
    pub t_sup: Option<f64>,
    pub r_sup: Option<f64>,
    pub gap_trend: TrendStat,
    pub midpoint_trend: TrendStat,
    pub enclosure_failures: Vec<i64>,
    pub gap_bound_failures: Vec<i64>,
    pub vanishing_gap_failures: Vec<i64>,
    pub ordering_failures: Vec<i64>,
    pub backend_disagreements: Vec<i64>,
    pub proxy_caveat: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub family: FamilySpec,
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

const PROXY_CAVEAT: &str =
    "enclosure and gap-bound checks use the closed-form proxies B-/B+ in place of the exact functionals";

fn ratio(measured: Complex64, predicted: LogComplex) -> Option<Complex64> {
    if predicted.is_zero() {
        return None;
    }
    Some((LogComplex::from_c64(measured) / predicted).to_c64())
}

fn choose_integration(policy: PrecisionPolicy, pred: Option<&PredictionRecord>) -> Integration {
    let small = pred.map_or(false, |p| p.gap_pred.abs() < AUTO_DD_THRESHOLD);
    match policy {
        PrecisionPolicy::Double => Integration::double(),
        PrecisionPolicy::DoubleDouble => Integration::double_double(),
        PrecisionPolicy::Auto if small => Integration::double_double(),
        PrecisionPolicy::Auto => Integration::double(),
    }
}

fn run_row(fam: &FamilySpec, v: &Potential, n: i64, opts: &RunOptions) -> ReportRow {
    let mut notes = Vec::new();
    let prediction = match predict(fam, n) {
        Ok(p) => Some(p),
        Err(e) => {
            notes.push(format!("no prediction: {e}"));
            None
        }
    };
    let integration = choose_integration(opts.precision, prediction.as_ref());
    let mut backend = opts.backend;
    let tiny = prediction
        .as_ref()
        .map_or(false, |p| p.gap_pred.abs() < MONODROMY_REQUIRED);
    if tiny && backend == Backend::Galerkin {
        backend = Backend::Both;
        notes.push("predicted gap below 1e-10: monodromy added".to_string());
    }
    if tiny && integration.precision == Precision::Double {
        notes.push("predicted gap below 1e-10 computed in double precision".to_string());
    }
    let topts = TriangleOptions {
        backend,
        integration,
        plan: opts.plan.clone(),
        neumann: opts.neumann,
    };
    let computed = match compute_triangle(v, n, &topts) {
        Ok(c) => c,
        Err(e) => {
            let mut row = ReportRow::failed(n, integration.precision, e.to_string());
            row.prediction = prediction;
            row.notes = notes;
            return row;
        }
    };
    notes.extend(computed.notes.iter().cloned());
    let tri = computed.triangle;

    let mut sign_choice = None;
    let prediction = prediction.map(|p| {
        if p.sign_resolved {
            sign_choice = Some(SignChoice::Resolved);
            return p;
        }
        let q = p.flipped();
        let err = |r: &PredictionRecord| ratio(tri.gap, r.gap_pred).map_or(f64::INFINITY, |z| (z - 1.0).norm());
        if err(&q) < err(&p) {
            sign_choice = Some(SignChoice::MatchedFlipped);
            q
        } else {
            sign_choice = Some(SignChoice::Matched);
            p
        }
    });

    let mut row = ReportRow::failed(n, integration.precision, String::new());
    row.error = None;
    row.backend_disagreement = computed.backend_diff;
    row.sign_choice = sign_choice;
    row.r_n = compute_r_n(&tri);
    if let Some(p) = &prediction {
        row.gap_ratio = ratio(tri.gap, p.gap_pred);
        row.midpoint_ratio = p.midpoint_pred.and_then(|m| ratio(tri.midpoint_dev, m));
        row.dev_ratios = Some((
            p.dev_plus_pred.and_then(|d| ratio(tri.deviation_plus, d)),
            p.dev_minus_pred.and_then(|d| ratio(tri.deviation_minus, d)),
        ));
        row.t_n = compute_t_n(&p.beta);
        row.enclosure = check_enclosure(&tri, &p.beta);
        row.gap_bound = check_gap_bound(&tri, &p.beta, opts.eta);
        if p.gap_pred.is_zero() {
            row.vanishing_gap_ok = Some(tri.gap.norm() <= VANISHING_GAP);
        }
        if fam.is_self_adjoint() {
            row.corollaries = Some(check_self_adjoint_corollaries(&tri, &p.beta));
        }
    }
    if fam.is_self_adjoint() {
        let im_ok = [tri.lambda_minus, tri.lambda_plus, tri.mu]
            .iter()
            .all(|z| z.im.abs() < VANISHING_GAP);
        // gaps shrink below 1e-13 by n = 8 for small couplings, so the
        // slack tracks the floating-point resolution of lambda0
        let slack = ORDERING_SLACK * tri.lambda0.abs().max(1.0);
        let ordered = tri.lambda_minus.re <= tri.mu.re + slack && tri.mu.re <= tri.lambda_plus.re + slack;
        row.ordering_ok = Some(im_ok && ordered);
    }
    row.neumann_ratio = check_neumann_equivalence(&tri);
    row.prediction = prediction;
    row.triangle = Some(tri);
    row.notes = notes;
    row
}

fn summarize(rows: &[ReportRow], skipped: Vec<(i64, String)>) -> Summary {
    let collect = |f: &dyn Fn(&ReportRow) -> bool| rows.iter().filter(|r| f(r)).map(|r| r.n).collect::<Vec<_>>();
    let errs = |f: &dyn Fn(&ReportRow) -> Option<Complex64>| {
        rows.iter()
            .filter_map(|r| f(r).map(|z| (r.n, (z - 1.0).norm())))
            .collect::<Vec<_>>()
    };
    Summary {
        rows: rows.len(),
        failed_rows: collect(&|r| r.error.is_some()),
        skipped,
        t_sup: window_sup(rows.iter().map(|r| r.t_n)),
        r_sup: window_sup(rows.iter().map(|r| r.r_n)),
        gap_trend: trend(errs(&|r| r.gap_ratio)),
        midpoint_trend: trend(errs(&|r| r.midpoint_ratio)),
        enclosure_failures: collect(&|r| r.enclosure.is_some_and(|e| !e.ok)),
        gap_bound_failures: collect(&|r| r.gap_bound.is_some_and(|e| !e.ok)),
        vanishing_gap_failures: collect(&|r| r.vanishing_gap_ok == Some(false)),
        ordering_failures: collect(&|r| r.ordering_ok == Some(false)),
        backend_disagreements: collect(&|r| r.backend_disagreement.is_some_and(|d| d > crate::triangles::AGREEMENT_TOL)),
        proxy_caveat: PROXY_CAVEAT,
    }
}

/// Triangles, predictions and checks for every admissible `n` in `ns`.
/// Inadmissible indices are listed in the summary and skipped; backend
/// failures are recorded per row.
pub fn run_family(fam: &FamilySpec, ns: &[i64], opts: &RunOptions) -> VerificationReport {
    let v = fam.potential();
    let mut skipped = Vec::new();
    let mut admissible = Vec::new();
    for &n in ns {
        let hill_zero = fam.kind() == OperatorKind::Hill && n < 1;
        match fam.check_index(n) {
            Ok(()) if !hill_zero => admissible.push(n),
            Ok(()) => skipped.push((n, "Hill triangles start at n = 1".to_string())),
            Err(e) => skipped.push((n, e.to_string())),
        }
    }
    admissible.sort_unstable();
    admissible.dedup();
    let rows: Vec<ReportRow> = admissible.par_iter().map(|&n| run_row(fam, &v, n, opts)).collect();
    let summary = summarize(&rows, skipped);
    VerificationReport {
        family: fam.clone(),
        rows,
        summary,
    }
}

fn c_str(z: Complex64) -> String {
    format_complex(z)
}

/// Family parameters keyed by their command-line names.
pub fn family_params(fam: &FamilySpec) -> BTreeMap<&'static str, String> {
    let mut m = BTreeMap::new();
    match *fam {
        FamilySpec::TwoExpHill { a, b } => {
            m.insert("a", c_str(a));
            m.insert("b", c_str(b));
        }
        FamilySpec::GenTwoExp { a, b, big_r, big_s } => {
            m.insert("a", c_str(a));
            m.insert("b", c_str(b));
            m.insert("R", big_r.to_string());
            m.insert("S", big_s.to_string());
        }
        FamilySpec::SExp { a, b, s } => {
            m.insert("a", c_str(a));
            m.insert("b", c_str(b));
            m.insert("s", s.to_string());
        }
        FamilySpec::FourTerm { a, b, big_a, big_b } => {
            m.insert("a", c_str(a));
            m.insert("b", c_str(b));
            m.insert("A", c_str(big_a));
            m.insert("B", c_str(big_b));
        }
        FamilySpec::DiracTwoExp { a, big_a, b, big_b } => {
            m.insert("a", c_str(a));
            m.insert("A", c_str(big_a));
            m.insert("b", c_str(b));
            m.insert("B", c_str(big_b));
        }
        FamilySpec::SmoothJump { m: mm, jump, k_max } => {
            m.insert("m", mm.to_string());
            m.insert("jump", c_str(jump));
            m.insert("K", k_max.to_string());
        }
    }
    m
}

#[derive(Serialize)]
struct JsonReport<'a> {
    family: &'static str,
    params: BTreeMap<&'static str, String>,
    rows: &'a [ReportRow],
    summary: &'a Summary,
}

pub const CSV_COLUMNS: [&str; 24] = [
    "n",
    "lam_minus_re",
    "lam_minus_im",
    "lam_plus_re",
    "lam_plus_im",
    "mu_re",
    "mu_im",
    "nu_re",
    "nu_im",
    "gap_re",
    "gap_im",
    "gap_pred_re",
    "gap_pred_im",
    "gap_ratio_re",
    "gap_ratio_im",
    "mid_dev_re",
    "mid_dev_im",
    "mid_pred_re",
    "mid_pred_im",
    "t_n",
    "r_n",
    "enclosure_lo",
    "enclosure_hi",
    "backend_diff",
];

/// 17 significant digits; infinities as `inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn push_c(rec: &mut Vec<String>, z: Option<Complex64>) {
    rec.push(opt_real(z.map(|z| z.re)));
    rec.push(opt_real(z.map(|z| z.im)));
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let j = JsonReport {
            family: self.family.name(),
            params: family_params(&self.family),
            rows: &self.rows,
            summary: &self.summary,
        };
        serde_json::to_string_pretty(&j).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_COLUMNS)?;
        for r in &self.rows {
            let t = r.triangle.as_ref();
            let p = r.prediction.as_ref();
            let mut rec = vec![r.n.to_string()];
            push_c(&mut rec, t.map(|t| t.lambda_minus));
            push_c(&mut rec, t.map(|t| t.lambda_plus));
            push_c(&mut rec, t.map(|t| t.mu));
            push_c(&mut rec, t.and_then(|t| t.nu));
            push_c(&mut rec, t.map(|t| t.gap));
            push_c(&mut rec, p.map(|p| p.gap_pred_c()));
            push_c(&mut rec, r.gap_ratio);
            push_c(&mut rec, t.map(|t| t.midpoint_dev));
            push_c(&mut rec, p.and_then(|p| p.midpoint_pred_c()));
            rec.push(opt_real(r.t_n));
            rec.push(opt_real(r.r_n));
            rec.push(opt_real(r.enclosure.map(|e| e.lower)));
            rec.push(opt_real(r.enclosure.map(|e| e.upper)));
            rec.push(opt_real(r.backend_disagreement));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// True when no row failed structurally and every non-proxy check
    /// (vanishing gaps, self-adjoint ordering) passed.
    pub fn hard_checks_pass(&self) -> bool {
        let s = &self.summary;
        s.failed_rows.is_empty() && s.vanishing_gap_failures.is_empty() && s.ordering_failures.is_empty()
    }
}

/// Outcome of a spectrum comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoCheck {
    pub ok: bool,
    pub max_deviation: f64,
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

fn greedy_bottleneck(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut ua = vec![false; a.len()];
    let mut ub = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut left = a.len();
    for (d, i, j) in pairs {
        if left == 0 {
            break;
        }
        if !ua[i] && !ub[j] {
            ua[i] = true;
            ub[j] = true;
            worst = worst.max(d);
            left -= 1;
        }
    }
    worst
}

/// Minimum-cost assignment of every row to a distinct column
/// (`rows <= cols`), by shortest augmenting paths with potentials.
pub fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Largest distance when each of `a` is matched to a distinct element of
/// `b`: greedy first, optimal assignment when greedy exceeds `tol`.
pub fn match_spectra(a: &[Complex64], b: &[Complex64], tol: f64) -> f64 {
    let g = greedy_bottleneck(a, b);
    if g < tol {
        return g;
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let asg = assignment(&cost);
    let opt = asg.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max);
    g.min(opt)
}

fn compare_lowest(
    left: &Potential,
    right: &Potential,
    t: f64,
    count: usize,
    integ: &Integration,
) -> Result<IsoCheck, VerifyError> {
    // two extra eigenvalues on each side keep near-ties at the cut from
    // producing spurious mismatches
    let (la, lb) = rayon::join(
        || lowest_eigenvalues(left, t, count + 2, integ),
        || lowest_eigenvalues(right, t, count + 2, integ),
    );
    let (la, lb) = (la?, lb?);
    if la.len() != count + 2 || lb.len() != count + 2 {
        return Err(VerifyError::CountMismatch {
            left: la.len(),
            right: lb.len(),
        });
    }
    let d1 = match_spectra(&la[..count], &lb, ISO_TOL);
    let d2 = match_spectra(&lb[..count], &la, ISO_TOL);
    let max_deviation = d1.max(d2);
    Ok(IsoCheck {
        ok: max_deviation < ISO_TOL,
        max_deviation,
        left: la[..count].to_vec(),
        right: lb[..count].to_vec(),
    })
}

/// Spectra of `y(pi) = e^{it} y(0)` for `a e^{-2ix} + b e^{2ix}` and
/// `c e^{-2ix} + d e^{2ix}`, which coincide when `ab = cd`.
pub fn check_isospectral(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    t: f64,
    count: usize,
    integ: &Integration,
) -> Result<IsoCheck, VerifyError> {
    let (p, q) = (a * b, c * d);
    if (p - q).norm() > 1e-14 * p.norm().max(q.norm()).max(1.0) {
        return Err(VerifyError::Precondition(format!(
            "ab = {} differs from cd = {}",
            format_complex(p),
            format_complex(q)
        )));
    }
    if count == 0 {
        return Err(VerifyError::Precondition("count must be positive".into()));
    }
    let left: Potential = HillPotential::two_exp(a, b).into();
    let right: Potential = HillPotential::two_exp(c, d).into();
    compare_lowest(&left, &right, t, count, integ)
}

/// Spectra of `y(pi) = e^{it} y(0)` for `v` and its shift `v(x + zeta)`.
pub fn check_shift_invariance(
    v: &Potential,
    zeta: Complex64,
    t: f64,
    count: usize,
    integ: &Integration,
) -> Result<IsoCheck, VerifyError> {
    if count == 0 {
        return Err(VerifyError::Precondition("count must be positive".into()));
    }
    let shifted = shift_potential(v, zeta);
    compare_lowest(v, &shifted, t, count, integ)
}
