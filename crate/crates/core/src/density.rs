//! The proportion of p-th-power-free δ with root number +1.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::arith::{self, Triple};
use crate::error::{invalid, Result};
use crate::root_number;

/// All 1 ≤ δ ≤ x not divisible by q^p for any prime q.
pub fn enumerate_pth_power_free(x: u64, p: u64) -> Result<Vec<u64>> {
    arith::require_odd_prime(p)?;
    if x == 0 {
        return Err(invalid("X must be at least 1"));
    }
    let n = usize::try_from(x).map_err(|_| invalid("X too large"))?;
    let mut free = vec![true; n + 1];
    let mut q = 2u64;
    while let Some(qp) = q.checked_pow(p as u32).filter(|&v| v <= x) {
        if arith::is_prime(q) {
            for m in (qp..=x).step_by(qp as usize) {
                free[m as usize] = false;
            }
        }
        q += 1;
    }
    Ok((1..=x).filter(|&d| free[d as usize]).collect())
}

/// One δ of a density run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityRow {
    pub delta: u64,
    pub ord_p: u32,
    /// δ₀ mod p² for δ = p^{ord_p} δ₀.
    pub delta0_mod_p2: u64,
    pub tau: u32,
    pub alpha: u8,
    pub eps: i8,
}

pub fn density_row(triple: &Triple, delta: u64) -> Result<DensityRow> {
    let p = triple.p;
    let d = i64::try_from(delta).map_err(|_| invalid("δ too large"))?;
    let rep = root_number::epsilon_global(triple, d)?;
    let ord_p = arith::valuation(delta, p);
    let tau = rep.eps_ell.iter().filter(|(_, e)| *e == -1).count() as u32;
    Ok(DensityRow {
        delta,
        ord_p,
        delta0_mod_p2: delta / p.pow(ord_p) % (p * p),
        tau,
        alpha: u8::from(rep.eps_inf * rep.eps_p == -1),
        eps: rep.global,
    })
}

/// Counts within one class (ord_p δ, δ₀ mod p²).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub ord_p: u32,
    pub delta0_mod_p2: u64,
    pub n_total: u64,
    pub n_plus: u64,
    /// The common α of the class, `None` if it varies.
    pub alpha: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub p: u64,
    pub triple: Triple,
    pub x_max: u64,
    pub n_total: u64,
    pub n_plus: u64,
    pub fraction: f64,
    pub classes: Vec<ClassStats>,
    /// True iff α is constant on every class.
    pub alpha_constant: bool,
    /// Per-δ rows, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<DensityRow>>,
}

/// Aggregates rows into a report.
pub fn summarize(
    triple: &Triple,
    x_max: u64,
    rows: &[DensityRow],
    keep_rows: bool,
) -> DensityReport {
    let mut classes: BTreeMap<(u32, u64), ClassStats> = BTreeMap::new();
    for row in rows {
        let entry = classes
            .entry((row.ord_p, row.delta0_mod_p2))
            .or_insert(ClassStats {
                ord_p: row.ord_p,
                delta0_mod_p2: row.delta0_mod_p2,
                n_total: 0,
                n_plus: 0,
                alpha: Some(row.alpha),
            });
        entry.n_total += 1;
        entry.n_plus += u64::from(row.eps == 1);
        if entry.alpha != Some(row.alpha) {
            entry.alpha = None;
        }
    }
    let n_total = rows.len() as u64;
    let n_plus = rows.iter().filter(|r| r.eps == 1).count() as u64;
    let classes: Vec<ClassStats> = classes.into_values().collect();
    DensityReport {
        p: triple.p,
        triple: *triple,
        x_max,
        n_total,
        n_plus,
        fraction: if n_total == 0 {
            0.0
        } else {
            n_plus as f64 / n_total as f64
        },
        alpha_constant: classes.iter().all(|c| c.alpha.is_some()),
        classes,
        rows: keep_rows.then(|| rows.to_vec()),
    }
}

/// Root numbers of J_{r,s,t;δ} over all p-th-power-free 1 ≤ δ ≤ x.
pub fn density_experiment(triple: &Triple, x: u64, keep_rows: bool) -> Result<DensityReport> {
    let rows = enumerate_pth_power_free(x, triple.p)?
        .into_iter()
        .map(|d| density_row(triple, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(triple, x, &rows, keep_rows))
}
