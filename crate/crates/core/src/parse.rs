//! Text formats: complex literals, index ranges, boundary conditions,
//! potential specs and the flat config file.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::asymptotics::{AsymptoticsError, FamilySpec};
use crate::model::{BoundaryCondition, DiracPotential, FourierSeries, HillPotential, Potential};

/// Upper bound on the number of indices a range may expand to.
pub const MAX_RANGE_LEN: usize = 100_000;
/// Largest Fourier exponent accepted in a potential spec.
pub const MAX_EXPONENT: i64 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("bad complex literal {input:?}: {reason}")]
    Complex { input: String, reason: &'static str },
    #[error("bad integer {input:?}")]
    Integer { input: String },
    #[error("bad index range {input:?}: {reason}")]
    Range { input: String, reason: &'static str },
    #[error("bad boundary condition {input:?} (expected per+, per-, dir, neu or quasi:<t>)")]
    Bc { input: String },
    #[error("bad potential spec {input:?}: {reason}")]
    Potential { input: String, reason: String },
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error(transparent)]
    Family(#[from] AsymptoticsError),
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

fn parse_f64(s: &str) -> Option<f64> {
    // f64::from_str also takes "inf" and "nan"; only digits, signs, dots and
    // exponents are allowed here
    if s.is_empty() || !s.chars().all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| finite(*x))
}

/// Complex literal such as `1.5`, `-2i`, `i`, `0.3+0.2i` or `1e-3-4.5e2i`.
/// No spaces.
pub fn parse_complex(input: &str) -> Result<Complex64, ParseError> {
    let err = |reason| ParseError::Complex {
        input: input.to_string(),
        reason,
    };
    if input.is_empty() {
        return Err(err("empty"));
    }
    if input.chars().any(char::is_whitespace) {
        return Err(err("spaces are not allowed"));
    }
    let Some(body) = input.strip_suffix('i') else {
        return parse_f64(input).map(|re| Complex64::new(re, 0.0)).ok_or_else(|| err("not a number"));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_f64(s),
    };
    match split {
        Some(k) => {
            let re = parse_f64(&body[..k]).ok_or_else(|| err("bad real part"))?;
            let im = imag(&body[k..]).ok_or_else(|| err("bad imaginary part"))?;
            Ok(Complex64::new(re, im))
        }
        None => {
            let im = imag(body).ok_or_else(|| err("bad imaginary part"))?;
            Ok(Complex64::new(0.0, im))
        }
    }
}

/// Inverse of [`parse_complex`]; round-trips exactly.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
}

pub fn parse_int(input: &str) -> Result<i64, ParseError> {
    input.parse::<i64>().map_err(|_| ParseError::Integer {
        input: input.to_string(),
    })
}

/// Index list: comma-separated integers and inclusive ranges `a..b`,
/// e.g. `1..6`, `-9..9`, `2,4,10..12`. Order is preserved, duplicates are
/// dropped.
pub fn parse_range(input: &str) -> Result<Vec<i64>, ParseError> {
    let err = |reason| ParseError::Range {
        input: input.to_string(),
        reason,
    };
    if input.trim().is_empty() {
        return Err(err("empty"));
    }
    let mut out: Vec<i64> = Vec::new();
    for item in input.split(',') {
        let item = item.trim();
        let (lo, hi) = match item.split_once("..") {
            Some((a, b)) => {
                let b = b.strip_prefix('=').unwrap_or(b);
                let lo = a.trim().parse::<i64>().map_err(|_| err("bad lower bound"))?;
                let hi = b.trim().parse::<i64>().map_err(|_| err("bad upper bound"))?;
                (lo, hi)
            }
            None => {
                let k = item.parse::<i64>().map_err(|_| err("bad integer"))?;
                (k, k)
            }
        };
        if hi < lo {
            return Err(err("upper bound below lower bound"));
        }
        let len = (hi as i128 - lo as i128 + 1) as u128;
        if len + out.len() as u128 > MAX_RANGE_LEN as u128 {
            return Err(err("too many indices"));
        }
        for k in lo..=hi {
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    Ok(out)
}

pub fn parse_bc(input: &str) -> Result<BoundaryCondition, ParseError> {
    let bad = || ParseError::Bc {
        input: input.to_string(),
    };
    match input.trim() {
        "per+" | "per" | "periodic" => Ok(BoundaryCondition::PerPlus),
        "per-" | "antiperiodic" => Ok(BoundaryCondition::PerMinus),
        "dir" | "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "neu" | "neumann" => Ok(BoundaryCondition::Neumann),
        s => {
            let t = s.strip_prefix("quasi:").ok_or_else(bad)?;
            let t = parse_f64(t).ok_or_else(bad)?;
            Ok(BoundaryCondition::quasi(t))
        }
    }
}

fn key_values(input: &str, body: &str) -> Result<Vec<(String, String)>, ParseError> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| ParseError::Potential {
                input: input.to_string(),
                reason: format!("expected key=value, got {kv:?}"),
            })?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn exponent(input: &str, s: &str) -> Result<i64, ParseError> {
    let k = s.parse::<i64>().map_err(|_| ParseError::Potential {
        input: input.to_string(),
        reason: format!("bad exponent {s:?}"),
    })?;
    if k.abs() > MAX_EXPONENT {
        return Err(ParseError::Potential {
            input: input.to_string(),
            reason: format!("exponent {k} exceeds {MAX_EXPONENT}"),
        });
    }
    Ok(k)
}

fn unsigned(key: &str, s: &str) -> Result<u32, ParseError> {
    s.parse::<u32>().map_err(|_| ParseError::Potential {
        input: s.to_string(),
        reason: format!("{key} must be a non-negative integer"),
    })
}

/// Build a family from named parameters (`a`, `b`, `A`, `B`, `R`, `S`, `s`,
/// `m`, `jump`, `K`). Missing complex parameters are an error; `K`
/// defaults to 16.
pub fn family_from_params(name: &str, params: &BTreeMap<String, String>) -> Result<FamilySpec, ParseError> {
    let missing = |k: &str| ParseError::Potential {
        input: name.to_string(),
        reason: format!("missing parameter {k}"),
    };
    let cx = |k: &str| -> Result<Complex64, ParseError> {
        parse_complex(params.get(k).ok_or_else(|| missing(k))?)
    };
    let int = |k: &str| -> Result<u32, ParseError> { unsigned(k, params.get(k).ok_or_else(|| missing(k))?) };
    let allowed: &[&str] = match name {
        "two-exp" => &["a", "b"],
        "gen-two-exp" => &["a", "b", "R", "S"],
        "s-exp" => &["a", "b", "s"],
        "four-term" => &["a", "b", "A", "B"],
        "dirac-two-exp" => &["a", "A", "b", "B"],
        "smooth-jump" => &["m", "jump", "K"],
        _ => {
            return Err(ParseError::Potential {
                input: name.to_string(),
                reason: "unknown family".to_string(),
            })
        }
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(ParseError::Potential {
            input: name.to_string(),
            reason: format!("unexpected parameter {k}"),
        });
    }
    let fam = match name {
        "two-exp" => FamilySpec::two_exp(cx("a")?, cx("b")?)?,
        "gen-two-exp" => FamilySpec::gen_two_exp(cx("a")?, cx("b")?, int("R")?, int("S")?)?,
        "s-exp" => FamilySpec::s_exp(cx("a")?, cx("b")?, int("s")?)?,
        "four-term" => FamilySpec::four_term(cx("a")?, cx("b")?, cx("A")?, cx("B")?)?,
        "dirac-two-exp" => FamilySpec::dirac_two_exp(cx("a")?, cx("A")?, cx("b")?, cx("B")?)?,
        _ => {
            let k = match params.get("K") {
                Some(s) => unsigned("K", s)?,
                None => 16,
            };
            FamilySpec::smooth_jump(int("m")?, cx("jump")?, k)?
        }
    };
    Ok(fam)
}

/// Inline potential spec:
///
/// * `zero`, `dirac-zero`
/// * `mathieu:a=<c>` for `2a cos 2x`
/// * `hill:v-1=<c>,v1=<c>,...` (coefficient of `e^{2kix}` keyed `v<k>`)
/// * `dirac:p-1=<c>,q1=<c>,...`
/// * any family name with its parameters, e.g. `two-exp:a=1,b=4`
pub fn parse_potential(input: &str) -> Result<Potential, ParseError> {
    let input_t = input.trim();
    let (head, body) = input_t.split_once(':').unwrap_or((input_t, ""));
    let bad = |reason: String| ParseError::Potential {
        input: input.to_string(),
        reason,
    };
    let kv = key_values(input, body)?;
    match head {
        "zero" | "dirac-zero" if !kv.is_empty() => Err(bad("takes no parameters".into())),
        "zero" => Ok(HillPotential::zero().into()),
        "dirac-zero" => Ok(DiracPotential::zero().into()),
        "mathieu" => match kv.as_slice() {
            [(k, v)] if k == "a" => {
                let a = parse_complex(v)?;
                Ok(HillPotential::two_exp(a, a).into())
            }
            _ => Err(bad("expected mathieu:a=<value>".into())),
        },
        "hill" | "dirac" => {
            let mut v = Vec::new();
            let mut p = Vec::new();
            let mut q = Vec::new();
            let mut seen = std::collections::BTreeSet::new();
            for (k, val) in &kv {
                if !seen.insert(k.clone()) {
                    return Err(bad(format!("duplicate key {k}")));
                }
                let (tag, rest) = k.split_at(k.chars().next().map_or(0, char::len_utf8));
                let target = match (head, tag) {
                    ("hill", "v") => &mut v,
                    ("dirac", "p") => &mut p,
                    ("dirac", "q") => &mut q,
                    _ => return Err(bad(format!("unexpected key {k}"))),
                };
                target.push((exponent(input, rest)?, parse_complex(val)?));
            }
            if head == "hill" {
                Ok(HillPotential::new(FourierSeries::new(v)).into())
            } else {
                Ok(DiracPotential::new(FourierSeries::new(p), FourierSeries::new(q)).into())
            }
        }
        _ => {
            let params: BTreeMap<String, String> = kv.into_iter().collect();
            Ok(family_from_params(head, &params)?.potential())
        }
    }
}

/// Potential file: `#` comments, then either one inline spec, or lines
/// `<v|p|q> <k> <complex>` listing Fourier coefficients.
pub fn parse_potential_file(text: &str) -> Result<Potential, ParseError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let bad = |line: usize, reason: String| ParseError::Potential {
        input: format!("line {line}"),
        reason,
    };
    if lines.is_empty() {
        return Err(bad(0, "no content".into()));
    }
    if lines.len() == 1 && lines[0].1.split_whitespace().count() == 1 {
        return parse_potential(lines[0].1);
    }
    let mut v = Vec::new();
    let mut p = Vec::new();
    let mut q = Vec::new();
    for (no, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let [tag, k, val] = parts.as_slice() else {
            return Err(bad(no, "expected `<v|p|q> <k> <value>`".into()));
        };
        let k = exponent(&format!("line {no}"), k)?;
        let val = parse_complex(val)?;
        match *tag {
            "v" => v.push((k, val)),
            "p" => p.push((k, val)),
            "q" => q.push((k, val)),
            _ => return Err(bad(no, format!("unknown tag {tag:?}"))),
        }
    }
    match (v.is_empty(), p.is_empty() && q.is_empty()) {
        (false, true) => Ok(HillPotential::new(FourierSeries::new(v)).into()),
        (true, false) => Ok(DiracPotential::new(FourierSeries::new(p), FourierSeries::new(q)).into()),
        _ => Err(bad(0, "mixes Hill (v) and Dirac (p, q) coefficients".into())),
    }
}

/// Flat `key = value` settings grouped by optional `[section]` headers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    /// Entries before the first section header live under `""`.
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn section(&self, name: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.get(name)
    }

    /// Value for `key` in `section`, falling back to the top level.
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .or_else(|| self.sections.get("").and_then(|s| s.get(key)))
            .map(String::as_str)
    }
}

pub fn parse_config(text: &str) -> Result<Config, ParseError> {
    let mut cfg = Config::default();
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') || l.starts_with(';') {
            continue;
        }
        let bad = |reason: String| ParseError::Config { line, reason };
        if let Some(rest) = l.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| bad("unterminated section header".into()))?.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(bad(format!("bad section name {name:?}")));
            }
            current = name.to_string();
            cfg.sections.entry(current.clone()).or_default();
            continue;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(bad(format!("bad key {k:?}")));
        }
        let sec = cfg.sections.entry(current.clone()).or_default();
        if sec.insert(k.to_string(), v.to_string()).is_some() {
            return Err(bad(format!("duplicate key {k:?}")));
        }
    }
    Ok(cfg)
}
