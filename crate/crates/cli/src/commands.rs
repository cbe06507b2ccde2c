//! Subcommand implementations. Each returns a [`Report`] and an exit code.

use std::fmt;
use std::path::Path;

use fermat_descent::arith::{self, Triple};
use fermat_descent::cyclotomic::{self, CycInt};
use fermat_descent::density;
use fermat_descent::finite_field;
use fermat_descent::local_field::LocalField;
use fermat_descent::parity::{self, ParityScan, TripleSelection};
use fermat_descent::root_number;
use fermat_descent::selmer::{self, LocalImage, SelmerEngine};
use fermat_descent::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{to_csv, Report};
use crate::{Global, SelmerMethod, TripleArgs};

/// Errors that abort a command before any report is printed.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Hypothesis(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Hypothesis(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Hypothesis(m) => write!(f, "hypothesis violated: {m}"),
            CliError::Internal(m) => write!(f, "internal consistency failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) | Error::TooLarge(m) => CliError::Usage(m),
            Error::Hypothesis(m) => CliError::Hypothesis(m),
            Error::Precision(_) | Error::Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

/// A printed report with its exit code; a nonzero code carries a message.
pub struct Outcome {
    pub report: Report,
    pub code: u8,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self {
            report,
            code: 0,
            failure: None,
        }
    }

    fn check(report: Report, passed: bool, code: u8, msg: impl FnOnce() -> String) -> Self {
        if passed {
            Self::ok(report)
        } else {
            Self {
                report,
                code,
                failure: Some(msg()),
            }
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Internal(e.to_string()))
}

fn triple(a: TripleArgs) -> Result<Triple, CliError> {
    Ok(Triple::new(a.r, a.s, a.t, a.p)?)
}

/// Coefficients as JSON numbers where they fit, strings otherwise.
fn cyc_json(x: &CycInt) -> Value {
    Value::Array(
        x.coeffs()
            .iter()
            .map(|c| i64::try_from(c).map_or_else(|_| Value::String(c.to_string()), Value::from))
            .collect(),
    )
}

pub fn root_number(t: TripleArgs, delta: i64) -> Result<Outcome, CliError> {
    let rep = root_number::epsilon_global(&triple(t)?, delta)?;
    Ok(Outcome::ok(Report::new(to_value(&rep)?)))
}

pub fn selmer(
    p: u64,
    r: u64,
    delta: i64,
    method: SelmerMethod,
    g: &Global,
) -> Result<Outcome, CliError> {
    let direct = || -> Result<_, CliError> {
        let engine = SelmerEngine::with_precision(p, g.padic_prec)?;
        Ok(engine.selmer_direct(r, delta)?)
    };
    Ok(match method {
        SelmerMethod::Closed => Outcome::ok(Report::new(to_value(&selmer::selmer_closed_form(
            r, delta, p,
        )?)?)),
        SelmerMethod::Direct => Outcome::ok(Report::new(to_value(&direct()?)?)),
        SelmerMethod::Both => {
            let c = selmer::selmer_closed_form(r, delta, p)?;
            let d = direct()?;
            let agree = c.dimension == d.dimension && c.same_group(&d);
            let report = Report::new(json!({
                "agree": agree,
                "dimension": c.dimension,
                "closed": to_value(&c)?,
                "direct": to_value(&d)?,
            }));
            Outcome::check(report, agree, 3, || {
                format!(
                    "closed form dimension {} vs direct {}",
                    c.dimension, d.dimension
                )
            })
        }
    })
}

/// Splits 1..=max into at most `parts` contiguous ranges.
fn ranges(max: i64, parts: usize) -> Vec<(i64, i64)> {
    let parts = parts.max(1) as i64;
    let step = (max + parts - 1) / parts;
    (0..parts)
        .map(|i| (i * step + 1, ((i + 1) * step).min(max)))
        .filter(|(a, b)| a <= b)
        .collect()
}

pub fn parity_scan(p: u64, delta_max: u64, min_cases: usize) -> Result<Outcome, CliError> {
    let max = i64::try_from(delta_max).map_err(|_| CliError::Usage("δ bound too large".into()))?;
    let sel = TripleSelection::All;
    let scans: Vec<ParityScan> = ranges(max, rayon::current_num_threads() * 4)
        .into_par_iter()
        .map(|(a, b)| parity::parity_scan_deltas(p, a..=b, &sel))
        .collect::<Result<_, _>>()?;
    let scan = scans.into_iter().fold(
        ParityScan {
            p,
            ..ParityScan::default()
        },
        ParityScan::merge,
    );
    let mut report = Report::new(to_value(&scan)?);
    report.text_skip = &["cases", "failures"];
    report.csv = Some(to_csv(&scan.cases)?);
    if !scan.failures.is_empty() {
        let n = scan.failures.len();
        return Ok(Outcome::check(report, false, 3, || {
            format!("parity fails in {n} cases")
        }));
    }
    let enough = scan.admissible >= min_cases;
    let admissible = scan.admissible;
    Ok(Outcome::check(report, enough, 1, || {
        format!("only {admissible} admissible δ, need {min_cases}")
    }))
}

pub fn density(
    t: TripleArgs,
    x_max: u64,
    out: Option<&Path>,
    per_delta: bool,
) -> Result<Outcome, CliError> {
    let t = triple(t)?;
    let deltas = density::enumerate_pth_power_free(x_max, t.p)?;
    let rows = deltas
        .par_iter()
        .map(|&d| density::density_row(&t, d))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = density::summarize(&t, x_max, &rows, per_delta);
    let csv = to_csv(&rows)?;
    if let Some(path) = out {
        std::fs::write(path, &csv)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    let mut report = Report::new(to_value(&rep)?);
    report.text_skip = &["rows", "classes"];
    report.csv = Some(csv);
    Ok(Outcome::ok(report))
}

pub fn jacobi(p: u64, ell: u64, rs: Option<(u64, u64)>) -> Result<Outcome, CliError> {
    let sd = arith::splitting_data(ell, p)?;
    let triples = match rs {
        Some((r, s)) => {
            let t = p
                .checked_sub(r + s)
                .ok_or_else(|| CliError::Usage(format!("r + s must be below p = {p}")))?;
            vec![Triple::new(r, s, t, p)?]
        }
        None => (1..p)
            .flat_map(|r| (1..p - r).map(move |s| (r, s)))
            .map(|(r, s)| Triple::new(r, s, p - r - s, p))
            .collect::<Result<_, _>>()?,
    };
    let field = finite_field::build_field(ell, sd.f as usize)?;
    let chi = field.character(p)?;
    let summer = cyclotomic::JacobiSummer::new(&field, &chi)?;
    let phis = cyclotomic::phi_ell_all(&triples, ell)?;
    let q = field.q();
    let mut entries = Vec::new();
    let mut all_ok = true;
    for (t, phi) in triples.iter().zip(&phis) {
        let j = summer.sum(t)?;
        let norm_ok = j.mul(&j.conj()).as_integer() == Some(q.into());
        let congruence = cyclotomic::jacobi_congruence(&j);
        let stickelberger = if ell % p == 1 {
            Some(cyclotomic::stickelberger_check(t, ell)?)
        } else {
            None
        };
        all_ok &= norm_ok && congruence && phi.agree() && stickelberger != Some(false);
        entries.push(json!({
            "triple": [t.r, t.s, t.t],
            "j": cyc_json(&j),
            "norm_is_q": norm_ok,
            "congruence": congruence,
            "stickelberger": stickelberger,
            "phi_formula": phi.formula,
            "phi_places": phi.brute_force,
        }));
    }
    let report = Report::new(json!({
        "p": p,
        "ell": ell,
        "f": sd.f,
        "g": sd.g,
        "q": q.to_string(),
        "sums": entries,
    }));
    Ok(Outcome::check(report, all_ok, 3, || {
        "a Jacobi-sum identity failed".into()
    }))
}

pub fn count_points(
    p: u64,
    ell: u64,
    f: usize,
    r: u64,
    s: u64,
    delta: i64,
) -> Result<Outcome, CliError> {
    let t = p
        .checked_sub(r + s)
        .ok_or_else(|| CliError::Usage(format!("r + s must be below p = {p}")))?;
    let triple = Triple::new(r, s, t, p)?;
    let field = finite_field::build_field(ell, f)?;
    let affine = finite_field::count_affine_points(&field, &triple, delta)?;
    let infinity = finite_field::points_at_infinity(&triple);
    let prediction = if (field.q() - 1) % p as u128 == 0 {
        Some(cyclotomic::affine_count_from_jacobi(
            &field, &triple, delta,
        )?)
    } else {
        None
    };
    let agree = prediction.map_or(true, |n| n == affine as i128);
    let report = Report::new(json!({
        "p": p,
        "ell": ell,
        "f": f,
        "q": field.q().to_string(),
        "triple": [r, s, t],
        "delta": delta,
        "affine": affine,
        "at_infinity": infinity,
        "projective": affine + infinity,
        "jacobi_prediction": prediction.map(|n| n.to_string()),
    }));
    Ok(Outcome::check(report, agree, 3, || {
        "point count differs from the Jacobi-sum prediction".into()
    }))
}

pub fn regular(p: u64) -> Result<Outcome, CliError> {
    let irr = arith::irregularity_index(p)?;
    let bernoulli = arith::bernoulli_mod_p(p)?;
    let mut v = to_value(&irr)?;
    v["bernoulli_mod_p"] = to_value(&bernoulli)?;
    Ok(Outcome::ok(Report::new(v)))
}

pub fn local_image(p: u64, r: u64, delta: i64) -> Result<Outcome, CliError> {
    let red = arith::reduce_delta(delta, p)?;
    let at_p = selmer::local_image_at_p(r, red.delta, p)?;
    let off_p: Vec<LocalImage> = red
        .factors
        .iter()
        .filter(|(q, _)| *q != p)
        .map(|&(q, _)| selmer::local_image_off_p(q, red.delta, p))
        .collect::<Result<_, _>>()?;
    Ok(Outcome::ok(Report::new(json!({
        "p": p,
        "r": r,
        "delta": red.delta,
        "at_p": to_value(&at_p)?,
        "at_p_dimension": at_p.dimension(),
        "dividing_delta": to_value(&off_p)?,
    }))))
}

pub fn self_check(p: u64, samples: usize, g: &Global) -> Result<Outcome, CliError> {
    let m = g.padic_prec;
    let k = LocalField::new(p, m)?;
    let k1 = LocalField::new(p, m + 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let bound = (p as i64).pow(m);
    let mut failures = Vec::new();
    for n in 0..samples {
        let c: Vec<i64> = (0..p - 1)
            .map(|i| loop {
                let v = rng.gen_range(0..bound);
                if i > 0 || v % p as i64 != 0 {
                    break v;
                }
            })
            .collect();
        let o = rng.gen_range(0..2);
        let x = k.mul(&k.lambda_pow(o), &k.element(&c)?);
        let x1 = k1.mul(&k1.lambda_pow(o), &k1.element(&c)?);
        let class = k.unit_class(&x)?;
        if class != k1.unit_class(&x1)? {
            failures.push(format!("sample {n}: class changes with precision"));
        }
        if !k.is_pth_power(&k.pow(&x, p))? {
            failures.push(format!("sample {n}: x^p not recognised as a p-th power"));
        }
        let e: Vec<u64> = (0..=p).map(|_| rng.gen_range(0..p)).collect();
        let mut y = k.from_int(1);
        for (i, &ei) in e.iter().enumerate() {
            y = k.mul(&y, &k.pow(k.generator_u(i)?, ei));
        }
        if k.unit_class(&y)?.0 != e {
            failures.push(format!("sample {n}: round trip failed for {e:?}"));
        }
    }
    let passed = failures.is_empty();
    let count = failures.len();
    let report = Report::new(json!({
        "p": p,
        "precision": m,
        "seed": g.seed,
        "samples": samples,
        "failures": failures,
    }));
    Ok(Outcome::check(report, passed, 3, || {
        format!("{count} self-check failures")
    }))
}
