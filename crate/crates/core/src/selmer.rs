//! Local Kummer images and the Π-Selmer group of J_{r,1,p−r−1;δ} over K = Q(ω).
//!
//! Two independent routes: the closed form in terms of k(δ) and the symbol
//! (B/p), and a direct computation of the kernel of the localisation map on
//! S-units, S = {p} ∪ {ℓ | δ}, using the class decompositions of
//! [`crate::local_field`] at Π and of F_{ℓ^{p−1}} at each ℓ | δ.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::arith::{self, ReducedDelta, Triple};
use crate::cyclotomic::{self, CycInt};
use crate::error::{hypothesis, internal, invalid, Error, Result};
use crate::finite_field::{self, FqField, PowerResidueChar};
use crate::linalg;
use crate::local_field::{self, LocalField, UnitClass};

/// Image of the local Kummer map at one place of K.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "place", rename_all = "snake_case")]
pub enum LocalImage {
    /// At Π: spanned by u_i for i in `indices`.
    Pi { p: u64, indices: BTreeSet<usize> },
    /// At ℓ ∤ pδ: the unramified classes F_V^×/(F_V^×)^p.
    Unramified { ell: u64 },
    /// At ℓ | δ: the line ⟨δ⟩.
    Delta { ell: u64, delta: i64 },
}

impl LocalImage {
    /// F_p-dimension of the image.
    pub fn dimension(&self) -> usize {
        match self {
            LocalImage::Pi { indices, .. } => indices.len(),
            LocalImage::Unramified { .. } | LocalImage::Delta { .. } => 1,
        }
    }
}

/// Image at a place V | ℓ, ℓ ≠ p.
pub fn local_image_off_p(ell: u64, delta: i64, p: u64) -> Result<LocalImage> {
    arith::require_odd_prime(p)?;
    if ell == p || !arith::is_prime(ell) {
        return Err(invalid(format!("{ell} is not a prime different from {p}")));
    }
    let red = arith::reduce_delta(delta, p)?;
    Ok(if red.factors.iter().any(|&(q, _)| q == ell) {
        LocalImage::Delta {
            ell,
            delta: red.delta,
        }
    } else {
        LocalImage::Unramified { ell }
    })
}

/// Image at Π for the triple (r, 1, p−r−1) and p ∤ δ.
pub fn local_image_at_p(r: u64, delta: i64, p: u64) -> Result<LocalImage> {
    arith::require_odd_prime(p)?;
    if p < 5 {
        return Err(invalid("the image at Π is only described for p ≥ 5"));
    }
    let b = arith::b_value(r, delta, p)?;
    let mut indices: BTreeSet<usize> = ((p as usize + 3) / 2..=p as usize).collect();
    if arith::b_symbol(b, p) == 1 {
        indices.insert((p as usize - 1) / 2);
    } else {
        indices.insert((p as usize).div_ceil(2));
    }
    Ok(LocalImage::Pi { p, indices })
}

/// A generator of the S-unit group R^×/R^{×p}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// The rational prime p.
    P,
    /// A rational prime ℓ | δ.
    Prime(u64),
    /// The root of unity ω.
    Omega,
    /// The cyclotomic unit E_i.
    E(u64),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::P => write!(f, "p"),
            Generator::Prime(l) => write!(f, "{l}"),
            Generator::Omega => write!(f, "omega"),
            Generator::E(i) => write!(f, "E_{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Direct,
}

/// The hypotheses under which the Selmer group is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub p_regular: bool,
    pub p_coprime_to_delta: bool,
    pub all_factors_inert: bool,
}

impl Hypotheses {
    pub fn hold(&self) -> bool {
        self.p_regular && self.p_coprime_to_delta && self.all_factors_inert
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerReport {
    pub p: u64,
    pub r: u64,
    /// Canonical δ.
    pub delta: i64,
    /// Number of distinct primes dividing δ.
    pub k: usize,
    /// B mod p.
    pub b: u64,
    /// (B/p) with (0/p) = −1.
    pub b_symbol: i8,
    /// Generators of the Selmer group.
    pub generators: Vec<Generator>,
    pub dimension: usize,
    /// S = dimension − 1.
    pub s_rank: i64,
    pub method: Method,
    pub hypotheses: Hypotheses,
    /// The S-unit basis the coordinates of `basis` refer to.
    pub s_units: Vec<Generator>,
    /// Reduced echelon basis of the Selmer group in `s_units` coordinates.
    pub basis: Vec<Vec<u64>>,
}

impl SelmerReport {
    /// True iff both reports describe the same subgroup.
    pub fn same_group(&self, other: &SelmerReport) -> bool {
        self.p == other.p
            && self.delta == other.delta
            && self.s_units == other.s_units
            && self.basis == other.basis
    }
}

/// The S-unit basis [p, ℓ | δ ascending, ω, E_2, E_4, …, E_{p−3}].
pub fn s_unit_basis(red: &ReducedDelta, p: u64) -> Vec<Generator> {
    let mut out = vec![Generator::P];
    out.extend(red.factors.iter().map(|&(q, _)| Generator::Prime(q)));
    out.push(Generator::Omega);
    out.extend((2..p - 2).step_by(2).map(Generator::E));
    out
}

/// Checks the hypotheses of the closed form, failing on the first violation.
fn admissible(r: u64, delta: i64, p: u64) -> Result<(ReducedDelta, Hypotheses)> {
    arith::require_odd_prime(p)?;
    if p < 5 {
        return Err(invalid("the Selmer group is only described for p ≥ 5"));
    }
    Triple::reduced_form(r, p)?;
    let red = arith::reduce_delta(delta, p)?;
    let hyp = Hypotheses {
        p_regular: arith::is_regular(p)?,
        p_coprime_to_delta: red.ord_p(p) == 0,
        all_factors_inert: red.all_inert,
    };
    if !hyp.p_regular {
        return Err(hypothesis(format!("p = {p} is irregular")));
    }
    if !hyp.p_coprime_to_delta {
        return Err(hypothesis(format!("p = {p} divides δ = {}", red.delta)));
    }
    if !hyp.all_factors_inert {
        return Err(hypothesis(format!(
            "δ = {} has a prime factor not inert in Q(ω_{p})",
            red.delta
        )));
    }
    Ok((red, hyp))
}

fn unit_vectors(s_units: &[Generator], gens: &[Generator]) -> Vec<Vec<u64>> {
    let rows: Vec<Vec<u64>> = gens
        .iter()
        .map(|g| s_units.iter().map(|u| u64::from(u == g)).collect())
        .collect();
    rows
}

/// The Selmer group from k(δ) and (B/p).
pub fn selmer_closed_form(r: u64, delta: i64, p: u64) -> Result<SelmerReport> {
    let (red, hyp) = admissible(r, delta, p)?;
    let b = arith::b_value(r, red.delta, p)?;
    let sym = arith::b_symbol(b, p);
    let mut generators: Vec<Generator> = red
        .factors
        .iter()
        .map(|&(q, _)| Generator::Prime(q))
        .collect();
    let (start, extra) = if p % 4 == 1 {
        ((p + 3) / 2, (sym == 1).then_some((p - 1) / 2))
    } else {
        ((p + 5) / 2, (sym == -1).then_some(p.div_ceil(2)))
    };
    let mut e: BTreeSet<u64> = (start..=p - 3).filter(|i| i % 2 == 0).collect();
    e.extend(extra);
    generators.extend(e.into_iter().map(Generator::E));
    let dimension = generators.len();
    let by_formula = if p % 4 == 1 {
        red.k as i64 + (p as i64 - 3 + 2 * sym as i64) / 4
    } else {
        red.k as i64 + (p as i64 - 5 - 2 * sym as i64) / 4
    };
    if by_formula != dimension as i64 {
        return Err(internal(format!(
            "generator count {dimension} differs from the dimension formula {by_formula}"
        )));
    }
    let s_units = s_unit_basis(&red, p);
    let basis = linalg::rref(&unit_vectors(&s_units, &generators), p);
    Ok(SelmerReport {
        p,
        r,
        delta: red.delta,
        k: red.k,
        b,
        b_symbol: sym,
        generators,
        dimension,
        s_rank: dimension as i64 - 1,
        method: Method::ClosedForm,
        hypotheses: hyp,
        s_units,
        basis,
    })
}

/// S = dim Sel − 1.
pub fn selmer_rank_s(r: u64, delta: i64, p: u64) -> Result<i64> {
    Ok(selmer_closed_form(r, delta, p)?.s_rank)
}

/// Upper bound k(δ) + ⌈(p−3)/4⌉ + i(p) + dim Cl(K)[p], valid without regularity.
///
/// `dim_cl` may be omitted only for regular p.
pub fn selmer_upper_bound(delta: i64, p: u64, dim_cl: Option<u64>) -> Result<u64> {
    arith::require_odd_prime(p)?;
    if p < 5 {
        return Err(invalid("the bound is only stated for p ≥ 5"));
    }
    let red = arith::reduce_delta(delta, p)?;
    if red.ord_p(p) != 0 {
        return Err(hypothesis(format!("p = {p} divides δ = {}", red.delta)));
    }
    let irr = arith::irregularity_index(p)?;
    let dim_cl = match (dim_cl, irr.regular) {
        (Some(d), _) => d,
        (None, true) => 0,
        (None, false) => {
            return Err(invalid(format!(
                "p = {p} is irregular: dim Cl(K)[p] must be supplied"
            )));
        }
    };
    Ok(red.k as u64 + (p - 3).div_ceil(4) + irr.index as u64 + dim_cl)
}

/// Residue-field data at an inert prime ℓ: F_{ℓ^{p−1}} with χ and the χ-classes of ω and E_i.
#[derive(Debug)]
struct InertData {
    field: FqField,
    chi: PowerResidueChar,
    omega: u64,
    units: Vec<u64>,
}

/// Direct Selmer computation for one p; caches the Π-classes of p, ω, E_i
/// and the residue-field data per inert prime.
#[derive(Debug)]
pub struct SelmerEngine {
    p: u64,
    local: LocalField,
    units: Vec<(u64, CycInt)>,
    class_p: UnitClass,
    class_omega: UnitClass,
    class_units: Vec<UnitClass>,
    inert: Mutex<HashMap<u64, Arc<InertData>>>,
}

/// Precision retries before giving up.
const MAX_EXTRA_PRECISION: u32 = 3;

impl SelmerEngine {
    /// Engine at the default p-adic precision.
    pub fn new(p: u64) -> Result<Self> {
        Self::with_precision(p, local_field::DEFAULT_PRECISION)
    }

    /// Engine at coefficient precision `m`, raised automatically if a class is not determined.
    pub fn with_precision(p: u64, m: u32) -> Result<Self> {
        arith::require_odd_prime(p)?;
        if p < 5 {
            return Err(invalid("the direct computation needs p ≥ 5"));
        }
        let units = cyclotomic::cyclotomic_units(p)?;
        let mut last = None;
        for extra in 0..=MAX_EXTRA_PRECISION {
            match Self::build(p, m + extra, &units) {
                Ok((local, class_p, class_omega, class_units)) => {
                    return Ok(Self {
                        p,
                        local,
                        units,
                        class_p,
                        class_omega,
                        class_units,
                        inert: Mutex::new(HashMap::new()),
                    })
                }
                Err(e @ Error::Precision(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    #[allow(clippy::type_complexity)]
    fn build(
        p: u64,
        m: u32,
        units: &[(u64, CycInt)],
    ) -> Result<(LocalField, UnitClass, UnitClass, Vec<UnitClass>)> {
        let local = LocalField::new(p, m)?;
        let class_p = local.unit_class(&local.from_int(p as i64))?;
        let class_omega = local.unit_class(local.omega())?;
        let class_units = units
            .iter()
            .map(|(_, e)| local.unit_class(&local.embed_cyclotomic(e)?))
            .collect::<Result<_>>()?;
        Ok((local, class_p, class_omega, class_units))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn local_field(&self) -> &LocalField {
        &self.local
    }

    /// Π-class of E_i.
    pub fn unit_class_e(&self, i: u64) -> Option<&UnitClass> {
        let pos = self.units.iter().position(|(j, _)| *j == i)?;
        Some(&self.class_units[pos])
    }

    fn inert_data(&self, ell: u64) -> Result<Arc<InertData>> {
        if let Some(d) = self.inert.lock().expect("cache lock").get(&ell) {
            return Ok(Arc::clone(d));
        }
        let field = finite_field::build_field(ell, self.p as usize - 1)?;
        let chi = field.character(self.p)?;
        let omega = chi.exponent_of(&field, chi.zeta())?;
        let units = self
            .units
            .iter()
            .map(|(_, e)| chi.exponent_of(&field, &e.reduce_in(&field, chi.zeta())))
            .collect::<Result<_>>()?;
        let data = Arc::new(InertData {
            field,
            chi,
            omega,
            units,
        });
        self.inert
            .lock()
            .expect("cache lock")
            .insert(ell, Arc::clone(&data));
        Ok(data)
    }

    /// Π-class of a rational integer prime to p, or of p itself.
    fn rational_class(&self, n: u64) -> Result<UnitClass> {
        if n == self.p {
            return Ok(self.class_p.clone());
        }
        self.local.unit_class(&self.local.from_int(n as i64))
    }

    /// (ord_ℓ mod p, χ-exponent of the unit part) of a rational integer at ℓ.
    fn rational_class_at(&self, data: &InertData, n: i64) -> Result<(u64, u64)> {
        let ell = data.field.ell();
        let mut m = n.unsigned_abs();
        let mut ord = 0u64;
        while m % ell == 0 {
            m /= ell;
            ord += 1;
        }
        let unit = data.field.from_int(n.signum() * m as i64);
        Ok((ord % self.p, data.chi.exponent_of(&data.field, &unit)?))
    }

    /// Local classes of every S-unit: Π-coordinates followed by (ord, χ) at each ℓ | δ.
    pub fn local_classes(&self, red: &ReducedDelta) -> Result<(Vec<Generator>, Vec<Vec<u64>>)> {
        let p = self.p;
        let s_units = s_unit_basis(red, p);
        let primes: Vec<u64> = red.factors.iter().map(|&(q, _)| q).collect();
        let data: Vec<Arc<InertData>> = primes
            .iter()
            .map(|&l| self.inert_data(l))
            .collect::<Result<_>>()?;
        let mut rows = Vec::with_capacity(s_units.len());
        for g in &s_units {
            let (pi, off): (UnitClass, Vec<(u64, u64)>) = match *g {
                Generator::P | Generator::Prime(_) => {
                    let n = if let Generator::Prime(l) = *g { l } else { p };
                    let off = data
                        .iter()
                        .map(|d| self.rational_class_at(d, n as i64))
                        .collect::<Result<_>>()?;
                    (self.rational_class(n)?, off)
                }
                Generator::Omega => (
                    self.class_omega.clone(),
                    data.iter().map(|d| (0, d.omega)).collect(),
                ),
                Generator::E(i) => {
                    let pos = self
                        .units
                        .iter()
                        .position(|(j, _)| *j == i)
                        .ok_or_else(|| internal(format!("E_{i} missing from the unit table")))?;
                    (
                        self.class_units[pos].clone(),
                        data.iter().map(|d| (0, d.units[pos])).collect(),
                    )
                }
            };
            let mut row = pi.0;
            for (a, b) in off {
                row.push(a);
                row.push(b);
            }
            rows.push(row);
        }
        Ok((s_units, rows))
    }

    /// Ker(α) = Sel as the S-units whose local classes lie in every local image.
    pub fn selmer_direct(&self, r: u64, delta: i64) -> Result<SelmerReport> {
        let p = self.p;
        let (red, hyp) = admissible(r, delta, p)?;
        let LocalImage::Pi { indices, .. } = local_image_at_p(r, red.delta, p)? else {
            return Err(internal("image at Π has the wrong shape"));
        };
        let (s_units, rows) = self.local_classes(&red)?;
        let n = s_units.len();
        let full_rank = linalg::rank(&rows, p);
        if full_rank != n {
            return Err(hypothesis(format!(
                "S-unit classes have rank {full_rank}, expected {n}"
            )));
        }
        // δ = ℓ^m δ₀ has class (m, χ(δ₀)) at ℓ.
        let mut delta_classes = Vec::with_capacity(red.factors.len());
        for &(q, _) in &red.factors {
            let data = self.inert_data(q)?;
            delta_classes.push(self.rational_class_at(&data, red.delta)?);
        }
        let conditions: Vec<Vec<u64>> = rows
            .iter()
            .map(|row| {
                let mut c: Vec<u64> = (0..=p as usize)
                    .filter(|j| !indices.contains(j))
                    .map(|j| row[j])
                    .collect();
                for (idx, &(m, cd)) in delta_classes.iter().enumerate() {
                    let (a, b) = (row[p as usize + 1 + 2 * idx], row[p as usize + 2 + 2 * idx]);
                    c.push((arith::mul_mod(a, cd, p) + p - arith::mul_mod(m, b, p)) % p);
                }
                c
            })
            .collect();
        let basis = linalg::left_kernel(&conditions, p);
        let generators = basis
            .iter()
            .filter_map(|v| {
                let support: Vec<usize> = (0..n).filter(|&i| v[i] != 0).collect();
                (support.len() == 1).then(|| s_units[support[0]])
            })
            .collect();
        let b = arith::b_value(r, red.delta, p)?;
        let dimension = basis.len();
        Ok(SelmerReport {
            p,
            r,
            delta: red.delta,
            k: red.k,
            b,
            b_symbol: arith::b_symbol(b, p),
            generators,
            dimension,
            s_rank: dimension as i64 - 1,
            method: Method::Direct,
            hypotheses: hyp,
            s_units,
            basis,
        })
    }
}

/// Direct computation with a fresh engine at the default precision.
pub fn selmer_direct(r: u64, delta: i64, p: u64) -> Result<SelmerReport> {
    SelmerEngine::new(p)?.selmer_direct(r, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn images_off_p() {
        assert_eq!(
            local_image_off_p(7, 2, 5).unwrap(),
            LocalImage::Unramified { ell: 7 }
        );
        let img = local_image_off_p(2, 2, 5).unwrap();
        assert_eq!(img, LocalImage::Delta { ell: 2, delta: 2 });
        assert_eq!(img.dimension(), 1);
        assert!(local_image_off_p(5, 2, 5).is_err());
    }

    #[test]
    fn images_at_p() {
        let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(
            local_image_at_p(1, 2, 5).unwrap(),
            LocalImage::Pi {
                p: 5,
                indices: set(&[3, 4, 5])
            }
        );
        assert_eq!(
            local_image_at_p(1, 3, 5).unwrap(),
            LocalImage::Pi {
                p: 5,
                indices: set(&[2, 4, 5])
            }
        );
        assert!(local_image_at_p(1, 5, 5).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let a = selmer_closed_form(1, 2, 5).unwrap();
        assert_eq!((a.b, a.dimension, a.s_rank), (0, 1, 0));
        assert_eq!(a.generators, vec![Generator::Prime(2)]);
        let b = selmer_closed_form(1, 3, 5).unwrap();
        assert_eq!((b.b, b.dimension, b.s_rank), (1, 2, 1));
        assert_eq!(b.generators, vec![Generator::Prime(3), Generator::E(2)]);
        assert!(matches!(
            selmer_closed_form(1, 11, 5),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            selmer_closed_form(1, 2, 37),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(selmer_upper_bound(2, 5, None).unwrap(), 2);
        assert_eq!(selmer_upper_bound(1, 7, None).unwrap(), 1);
        assert_eq!(selmer_upper_bound(1, 37, Some(1)).unwrap(), 9 + 1 + 1);
        assert!(selmer_upper_bound(1, 37, None).is_err());
    }

    #[test]
    fn direct_examples() {
        let engine = SelmerEngine::new(5).unwrap();
        for delta in [2, 3] {
            let d = engine.selmer_direct(1, delta).unwrap();
            let c = selmer_closed_form(1, delta, 5).unwrap();
            assert!(d.same_group(&c), "δ = {delta}: {d:?} vs {c:?}");
        }
    }
}
