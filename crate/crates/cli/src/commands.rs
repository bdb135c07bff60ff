use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::process::ExitCode;

use hillgap::asymptotics::FamilySpec;
use hillgap::galerkin::{eigs_indexed_many, matched_distance, TruncationPlan};
use hillgap::model::{BoundaryCondition, OperatorKind, Potential};
use hillgap::monodromy::{lowest_eigenvalues, Integration, Precision};
use hillgap::parse::{
    family_from_params, parse_bc, parse_complex, parse_potential, parse_potential_file, parse_range,
};
use hillgap::triangles::{cluster_size, monodromy_cluster, Backend};
use hillgap::verify::{
    check_isospectral, check_shift_invariance, fmt_real, run_family, IsoCheck, PrecisionPolicy, ReportRow,
    RunOptions, SignChoice, VerificationReport, VerifyError, ISO_TOL,
};
use num_complex::Complex64;

use crate::settings::Settings;
use crate::{IsoArgs, SpectrumArgs, VerifyArgs};

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn fail(e: Failure) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.code)
}

type Outcome = Result<ExitCode, Failure>;

fn usage<E: fmt::Display>(e: E) -> Failure {
    Failure::usage(e.to_string())
}

fn required(v: Option<String>, flag: &str) -> Result<String, Failure> {
    v.ok_or_else(|| Failure::usage(format!("missing --{flag}")))
}

fn load_potential(spec: &str) -> Result<Potential, Failure> {
    let path = std::path::Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {spec}: {e}")))?;
        parse_potential_file(&text).map_err(usage)
    } else {
        parse_potential(spec).map_err(usage)
    }
}

fn parse_backend(s: &str) -> Result<Backend, Failure> {
    match s {
        "galerkin" => Ok(Backend::Galerkin),
        "monodromy" => Ok(Backend::Monodromy),
        "both" => Ok(Backend::Both),
        _ => Err(Failure::usage(format!("unknown backend {s:?} (galerkin, monodromy, both)"))),
    }
}

fn parse_precision(s: &str) -> Result<Precision, Failure> {
    match s {
        "double" => Ok(Precision::Double),
        "dd" | "double-double" => Ok(Precision::DoubleDouble),
        _ => Err(Failure::usage(format!("unknown precision {s:?} (double, dd)"))),
    }
}

fn parse_real(s: &str, flag: &str) -> Result<f64, Failure> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Failure::usage(format!("--{flag} expects a real number, got {s:?}")))
}

fn open_out(path: Option<&str>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None | Some("-") => Ok(Box::new(io::stdout().lock())),
        Some(p) => File::create(p)
            .map(|f| Box::new(io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::usage(format!("cannot create {p}: {e}"))),
    }
}

struct SpectrumRow {
    n: i64,
    k: usize,
    value: Complex64,
    source: &'static str,
    agreement: Option<f64>,
}

pub fn spectrum(args: &SpectrumArgs, s: &Settings) -> Outcome {
    let bc = parse_bc(&required(s.pick(args.bc.as_deref(), "bc"), "bc")?).map_err(usage)?;
    let backend = parse_backend(&s.pick(args.backend.as_deref(), "backend").unwrap_or_else(|| "both".into()))?;
    let quasi = matches!(bc.canonical(), BoundaryCondition::Quasi(_));
    if quasi && backend != Backend::Monodromy {
        return Err(Failure::usage("quasi-periodic spectra require --backend monodromy"));
    }
    let v = load_potential(&required(s.pick(args.potential.as_deref(), "potential"), "potential")?)?;
    let ns = parse_range(&required(s.pick(args.n.as_deref(), "n"), "n")?).map_err(usage)?;
    let precision = parse_precision(&s.pick(args.precision.as_deref(), "precision").unwrap_or_else(|| "double".into()))?;
    let integ = Integration::with_precision(precision);

    let rows = if let BoundaryCondition::Quasi(t) = bc.canonical() {
        quasi_rows(&v, t, &ns, &integ)?
    } else {
        indexed_rows(&v, bc, &ns, backend, &integ)?
    };

    let mut out = open_out(s.pick(args.out.as_deref(), "out").as_deref())?;
    let mut w = csv::Writer::from_writer(&mut out);
    let io_err = |e: csv::Error| Failure::usage(format!("writing CSV: {e}"));
    w.write_record(["n", "bc", "k", "re", "im", "backend", "agreement"]).map_err(io_err)?;
    let bc_name = bc.to_string();
    for r in rows {
        w.write_record([
            r.n.to_string(),
            bc_name.clone(),
            r.k.to_string(),
            fmt_real(r.value.re),
            fmt_real(r.value.im),
            r.source.to_string(),
            r.agreement.map(fmt_real).unwrap_or_default(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::usage(format!("writing CSV: {e}")))?;
    Ok(ExitCode::SUCCESS)
}

fn quasi_rows(v: &Potential, t: f64, ns: &[i64], integ: &Integration) -> Result<Vec<SpectrumRow>, Failure> {
    if let Some(bad) = ns.iter().find(|&&n| n < 0) {
        return Err(Failure::usage(format!("quasi-periodic positions start at 0, got {bad}")));
    }
    let count = ns.iter().copied().max().unwrap_or(0) as usize + 1;
    let vals = lowest_eigenvalues(v, t, count, integ).map_err(|e| Failure::numeric(e.to_string()))?;
    Ok(ns
        .iter()
        .map(|&n| SpectrumRow {
            n,
            k: 0,
            value: vals[n as usize],
            source: "monodromy",
            agreement: None,
        })
        .collect())
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn indexed_rows(
    v: &Potential,
    bc: BoundaryCondition,
    ns: &[i64],
    backend: Backend,
    integ: &Integration,
) -> Result<Vec<SpectrumRow>, Failure> {
    let kind = v.kind();
    let mut valid = Vec::new();
    for &n in ns {
        match cluster_size(kind, bc, n) {
            Ok(_) => valid.push(n),
            Err(e) => log::warn!("skipping n = {n}: {e}"),
        }
    }
    let galerkin_ok = !(kind == OperatorKind::Dirac && bc == BoundaryCondition::Dirichlet);
    let use_galerkin = backend != Backend::Monodromy && galerkin_ok;
    let use_monodromy = backend != Backend::Galerkin || !galerkin_ok;
    if backend == Backend::Galerkin && !galerkin_ok {
        log::warn!("the Dirac Dirichlet problem is solved by monodromy only");
    }
    let mut galerkin: BTreeMap<i64, Vec<Complex64>> = BTreeMap::new();
    if use_galerkin && !valid.is_empty() {
        let n_max = valid.iter().map(|n| n.abs()).max().unwrap_or(0);
        let plan = TruncationPlan::default_for_bc(bc, n_max);
        for (n, c) in eigs_indexed_many(v, bc, &valid, &plan).map_err(|e| Failure::numeric(e.to_string()))? {
            galerkin.insert(n, sorted(c.values));
        }
    }
    let mut rows = Vec::new();
    for &n in &valid {
        let mono = if use_monodromy {
            Some(sorted(
                monodromy_cluster(v, bc, n, integ).map_err(|e| Failure::numeric(format!("n = {n}: {e}")))?,
            ))
        } else {
            None
        };
        let gal = galerkin.remove(&n);
        let agreement = match (&mono, &gal) {
            (Some(a), Some(b)) => Some(matched_distance(a, b)),
            _ => None,
        };
        let (values, source) = match (mono, gal) {
            (Some(m), _) => (m, "monodromy"),
            (None, Some(g)) => (g, "galerkin"),
            (None, None) => unreachable!("at least one backend runs"),
        };
        for (k, value) in values.into_iter().enumerate() {
            rows.push(SpectrumRow {
                n,
                k,
                value,
                source,
                agreement,
            });
        }
    }
    Ok(rows)
}

const FAMILY_KEYS: [&str; 10] = ["a", "b", "A", "B", "R", "S", "s", "m", "jump", "K"];

fn family_of(args: &VerifyArgs, s: &Settings) -> Result<FamilySpec, Failure> {
    let name = required(s.pick(args.family.as_deref(), "family"), "family")?;
    let flags = [
        &args.a,
        &args.b,
        &args.big_a,
        &args.big_b,
        &args.big_r,
        &args.big_s,
        &args.s,
        &args.m,
        &args.jump,
        &args.big_k,
    ];
    let mut params = BTreeMap::new();
    for (key, flag) in FAMILY_KEYS.iter().zip(flags) {
        if let Some(v) = s.pick(flag.as_deref(), key) {
            params.insert(key.to_string(), v);
        }
    }
    family_from_params(&name, &params).map_err(usage)
}

fn fmt_ratio(z: Option<Complex64>) -> String {
    match z {
        None => "-".into(),
        Some(z) if z.im.abs() < 5e-5 => format!("{:.4}", z.re),
        Some(z) => format!("{:.4}{:+.4}i", z.re, z.im),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        None => "-".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.3}"),
    }
}

fn fmt_check(x: Option<bool>) -> &'static str {
    match x {
        None => "-",
        Some(true) => "ok",
        Some(false) => "FAIL",
    }
}

fn sign_label(s: Option<SignChoice>) -> &'static str {
    match s {
        None => "-",
        Some(SignChoice::Resolved) => "resolved",
        Some(SignChoice::Matched) => "matched",
        Some(SignChoice::MatchedFlipped) => "flipped",
    }
}

fn print_table(rep: &VerificationReport) {
    println!(
        "{:>5} {:>6} {:>12} {:>20} {:>20} {:>8} {:>8} {:>6} {:>6} {:>8}",
        "n", "prec", "|gap|", "gap_ratio", "midpoint_ratio", "t_n", "r_n", "encl", "bound", "sign"
    );
    for r in &rep.rows {
        print_row(r);
    }
    let s = &rep.summary;
    println!(
        "rows {}, windowed sup t {} r {}, gap-ratio errors non-increasing over top half: {}, midpoint: {}",
        s.rows,
        fmt_opt(s.t_sup),
        fmt_opt(s.r_sup),
        s.gap_trend.non_increasing_top_half,
        s.midpoint_trend.non_increasing_top_half
    );
    println!("note: {}", s.proxy_caveat);
}

fn print_row(r: &ReportRow) {
    if let Some(e) = &r.error {
        println!("{:>5} error: {e}", r.n);
        return;
    }
    let prec = match r.precision {
        Precision::Double => "double",
        Precision::DoubleDouble => "dd",
    };
    println!(
        "{:>5} {:>6} {:>12} {:>20} {:>20} {:>8} {:>8} {:>6} {:>6} {:>8}",
        r.n,
        prec,
        r.triangle.as_ref().map_or("-".into(), |t| format!("{:.4e}", t.gap.norm())),
        fmt_ratio(r.gap_ratio),
        fmt_ratio(r.midpoint_ratio),
        fmt_opt(r.t_n),
        fmt_opt(r.r_n),
        fmt_check(r.enclosure.map(|e| e.ok)),
        fmt_check(r.gap_bound.map(|g| g.ok)),
        sign_label(r.sign_choice),
    );
    for w in [
        r.vanishing_gap_ok.filter(|ok| !ok).map(|_| "gap should vanish"),
        r.ordering_ok.filter(|ok| !ok).map(|_| "self-adjoint ordering violated"),
    ]
    .into_iter()
    .flatten()
    {
        println!("{:>5}   {w}", "");
    }
}

pub fn verify(args: &VerifyArgs, s: &Settings) -> Outcome {
    let fam = family_of(args, s)?;
    let ns = parse_range(&s.pick(args.n.as_deref(), "n").unwrap_or_else(|| "1..8".into())).map_err(usage)?;
    let eta = match s.pick(args.eta.as_deref(), "eta") {
        Some(e) => parse_real(&e, "eta")?,
        None => 0.3,
    };
    if eta <= 0.0 {
        return Err(Failure::usage("--eta must be positive"));
    }
    let backend = parse_backend(&s.pick(args.backend.as_deref(), "backend").unwrap_or_else(|| "both".into()))?;
    let precision = match s.pick(args.precision.as_deref(), "precision").as_deref() {
        None | Some("auto") => PrecisionPolicy::Auto,
        Some(p) => match parse_precision(p)? {
            Precision::Double => PrecisionPolicy::Double,
            Precision::DoubleDouble => PrecisionPolicy::DoubleDouble,
        },
    };
    let opts = RunOptions {
        backend,
        precision,
        eta,
        ..RunOptions::default()
    };
    let rep = run_family(&fam, &ns, &opts);
    for (n, why) in &rep.summary.skipped {
        eprintln!("warning: n = {n} skipped: {why}");
    }
    print_table(&rep);
    if let Some(p) = s.pick(args.out_json.as_deref(), "out-json") {
        std::fs::write(&p, rep.to_json()).map_err(|e| Failure::usage(format!("cannot write {p}: {e}")))?;
    }
    if let Some(p) = s.pick(args.out_csv.as_deref(), "out-csv") {
        let f = File::create(&p).map_err(|e| Failure::usage(format!("cannot create {p}: {e}")))?;
        rep.write_csv(io::BufWriter::new(f))
            .map_err(|e| Failure::usage(format!("cannot write {p}: {e}")))?;
    }
    if rep.hard_checks_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("hard checks failed");
        Ok(ExitCode::from(2))
    }
}

fn iso_failure(e: VerifyError) -> Failure {
    match e {
        VerifyError::Precondition(_) => Failure::usage(e.to_string()),
        other => Failure::numeric(other.to_string()),
    }
}

fn report_iso(label: &str, r: &IsoCheck) -> ExitCode {
    println!("{label}: max matched deviation {:.3e} over {} eigenvalues (tol {ISO_TOL:e})", r.max_deviation, r.left.len());
    for (x, y) in r.left.iter().zip(&r.right) {
        println!("  {:>24} {:>24}  {:>24} {:>24}", fmt_real(x.re), fmt_real(x.im), fmt_real(y.re), fmt_real(y.im));
    }
    if r.ok {
        println!("pass");
        ExitCode::SUCCESS
    } else {
        println!("FAIL");
        ExitCode::from(2)
    }
}

pub fn isospectral(args: &IsoArgs, s: &Settings) -> Outcome {
    let pair = s.pick(args.pair.as_deref(), "pair");
    let shift = s.pick(args.shift.as_deref(), "shift");
    let t = match s.pick(args.t.as_deref(), "t") {
        Some(t) => parse_real(&t, "t")?,
        None => 0.0,
    };
    let count = match s.pick(args.count.as_deref(), "count") {
        Some(c) => c
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| Failure::usage(format!("--count expects a positive integer, got {c:?}")))?,
        None => 12,
    };
    let precision = parse_precision(&s.pick(args.precision.as_deref(), "precision").unwrap_or_else(|| "double".into()))?;
    let integ = Integration::with_precision(precision);
    match (pair, shift) {
        (Some(p), None) => {
            let parts: Vec<&str> = p.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(Failure::usage("--pair expects a,b,c,d"));
            }
            let z: Vec<Complex64> = parts.iter().map(|x| parse_complex(x)).collect::<Result<_, _>>().map_err(usage)?;
            let r = check_isospectral(z[0], z[1], z[2], z[3], t, count, &integ).map_err(iso_failure)?;
            Ok(report_iso("isospectral pair", &r))
        }
        (None, Some(zeta)) => {
            let zeta = parse_complex(&zeta).map_err(usage)?;
            let v = load_potential(&required(s.pick(args.potential.as_deref(), "potential"), "potential")?)?;
            let r = check_shift_invariance(&v, zeta, t, count, &integ).map_err(iso_failure)?;
            Ok(report_iso("shift invariance", &r))
        }
        _ => Err(Failure::usage("give exactly one of --pair or --shift")),
    }
}
