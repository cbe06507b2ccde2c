//! The parity ε(π_{r,s,t;δ}) = (−1)^S, checked one case at a time and over δ-ranges.

use serde::{Deserialize, Serialize};

use crate::arith::{self, Triple};
use crate::error::{internal, invalid, Error, Result};
use crate::root_number;
use crate::selmer;

/// One parity comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCase {
    pub p: u64,
    pub r: u64,
    pub s: u64,
    pub t: u64,
    /// Canonical δ.
    pub delta: i64,
    /// r of the reduced triple (r, 1, p−r−1).
    pub reduced_r: u64,
    pub k: usize,
    pub b_symbol: i8,
    pub eps: i8,
    pub s_rank: i64,
    pub holds: bool,
}

/// Compares ε from the root-number formula with S from the Selmer group.
///
/// Both sides are evaluated on the reduced triple of the orbit of `triple`.
pub fn parity_check(triple: &Triple, delta: i64) -> Result<ParityCase> {
    let (_, reduced) = triple.reduced();
    let sel = selmer::selmer_closed_form(reduced.r, delta, triple.p)?;
    let eps = root_number::epsilon_global(&reduced, delta)?.global;
    let sign = if sel.s_rank.rem_euclid(2) == 0 { 1 } else { -1 };
    Ok(ParityCase {
        p: triple.p,
        r: triple.r,
        s: triple.s,
        t: triple.t,
        delta: sel.delta,
        reduced_r: reduced.r,
        k: sel.k,
        b_symbol: sel.b_symbol,
        eps,
        s_rank: sel.s_rank,
        holds: eps == sign,
    })
}

/// Which triples a scan covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleSelection {
    /// Every reduced triple (r, 1, p−r−1), 1 ≤ r ≤ p−2.
    All,
    List(Vec<Triple>),
}

impl TripleSelection {
    pub fn triples(&self, p: u64) -> Result<Vec<Triple>> {
        match self {
            TripleSelection::All => (1..=p - 2).map(|r| Triple::reduced_form(r, p)).collect(),
            TripleSelection::List(v) => {
                if let Some(t) = v.iter().find(|t| t.p != p) {
                    return Err(invalid(format!("triple {t} is for p = {}, not {p}", t.p)));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Aggregate of a parity scan; [`ParityScan::merge`] is associative.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityScan {
    pub p: u64,
    /// Number of δ examined.
    pub examined: usize,
    /// δ skipped because they are not p-th-power-free.
    pub skipped_not_canonical: usize,
    /// δ skipped because p | δ.
    pub skipped_p_divides: usize,
    /// δ skipped because some prime factor is not inert.
    pub skipped_not_inert: usize,
    /// δ meeting the hypotheses.
    pub admissible: usize,
    pub holds: usize,
    pub failures: Vec<ParityCase>,
    pub cases: Vec<ParityCase>,
}

impl ParityScan {
    pub fn merge(mut self, other: ParityScan) -> ParityScan {
        if self.p == 0 {
            self.p = other.p;
        }
        self.examined += other.examined;
        self.skipped_not_canonical += other.skipped_not_canonical;
        self.skipped_p_divides += other.skipped_p_divides;
        self.skipped_not_inert += other.skipped_not_inert;
        self.admissible += other.admissible;
        self.holds += other.holds;
        self.failures.extend(other.failures);
        self.cases.extend(other.cases);
        self.cases.sort_by_key(|c| (c.delta, c.r, c.s));
        self.failures.sort_by_key(|c| (c.delta, c.r, c.s));
        self
    }

    /// Number of (δ, triple) comparisons.
    pub fn checks(&self) -> usize {
        self.cases.len()
    }
}

/// Scans the given positive δ for one p.
pub fn parity_scan_deltas(
    p: u64,
    deltas: impl IntoIterator<Item = i64>,
    triples: &TripleSelection,
) -> Result<ParityScan> {
    if !arith::is_regular(p)? {
        return Err(Error::Hypothesis(format!("p = {p} is irregular")));
    }
    let triples = triples.triples(p)?;
    let mut scan = ParityScan {
        p,
        ..ParityScan::default()
    };
    for delta in deltas {
        scan.examined += 1;
        let red = arith::reduce_delta(delta, p)?;
        if red.delta != delta {
            scan.skipped_not_canonical += 1;
            continue;
        }
        if red.ord_p(p) != 0 {
            scan.skipped_p_divides += 1;
            continue;
        }
        if !red.all_inert {
            scan.skipped_not_inert += 1;
            continue;
        }
        scan.admissible += 1;
        for t in &triples {
            let case = parity_check(t, delta)?;
            if case.holds {
                scan.holds += 1;
            } else {
                scan.failures.push(case.clone());
            }
            scan.cases.push(case);
        }
    }
    Ok(scan)
}

/// Scans 1 ≤ δ ≤ `delta_max`.
pub fn parity_scan(p: u64, delta_max: u64, triples: &TripleSelection) -> Result<ParityScan> {
    let max = i64::try_from(delta_max).map_err(|_| invalid("δ bound too large"))?;
    parity_scan_deltas(p, 1..=max, triples)
}

/// Fails unless the scan covered at least `min_cases` admissible δ without failures.
pub fn require_scan(scan: &ParityScan, min_cases: usize) -> Result<()> {
    if let Some(f) = scan.failures.first() {
        return Err(internal(format!(
            "parity fails for p = {}, ({},{},{}), δ = {}: ε = {}, S = {}",
            f.p, f.r, f.s, f.t, f.delta, f.eps, f.s_rank
        )));
    }
    if scan.admissible < min_cases {
        return Err(invalid(format!(
            "only {} admissible δ for p = {}, need {min_cases}",
            scan.admissible, scan.p
        )));
    }
    Ok(())
}
