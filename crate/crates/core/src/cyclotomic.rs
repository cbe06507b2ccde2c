//! Exact arithmetic in ℤ[ω], Jacobi sums, CM types, the Stickelberger
//! relation at split primes, the values φ_ℓ and the cyclotomic units E_i.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, Triple};
use crate::error::{internal, invalid, Result};
use crate::finite_field::{self, FqField, PowerResidueChar};

/// Element of ℤ[ω] in the basis 1, ω, …, ω^{p−2}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycInt {
    p: u64,
    coeffs: Vec<BigInt>,
}

impl CycInt {
    /// Build from coefficients of 1, ω, …; a vector of length p is reduced with Φ_p(ω) = 0.
    pub fn new(p: u64, coeffs: Vec<BigInt>) -> Result<Self> {
        let n = p as usize - 1;
        match coeffs.len() {
            len if len == n => Ok(Self { p, coeffs }),
            len if len == n + 1 => Ok(Self::reduce_full(p, coeffs)),
            len => Err(invalid(format!("{len} coefficients for p = {p}"))),
        }
    }

    /// Reduce Σ_{i<p} c_i ω^i using ω^{p−1} = −(1 + ω + … + ω^{p−2}).
    fn reduce_full(p: u64, mut full: Vec<BigInt>) -> Self {
        let top = full.pop().expect("length p");
        let coeffs = full.into_iter().map(|c| c - &top).collect();
        Self { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        Self {
            p,
            coeffs: vec![BigInt::zero(); p as usize - 1],
        }
    }

    pub fn from_int(p: u64, n: impl Into<BigInt>) -> Self {
        let mut x = Self::zero(p);
        x.coeffs[0] = n.into();
        x
    }

    pub fn one(p: u64) -> Self {
        Self::from_int(p, 1)
    }

    /// ω^k.
    pub fn omega_pow(p: u64, k: u64) -> Self {
        let mut counts = vec![0i64; p as usize];
        counts[(k % p) as usize] = 1;
        Self::from_exponent_counts(p, &counts)
    }

    /// Σ_e counts[e]·ω^e for e ∈ 0..p.
    pub fn from_exponent_counts(p: u64, counts: &[i64]) -> Self {
        assert_eq!(counts.len(), p as usize);
        Self::reduce_full(p, counts.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational integer this element equals, if any.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coeffs[0].clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        Self {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn zip(&self, o: &Self, op: impl Fn(&BigInt, &BigInt) -> BigInt) -> Self {
        assert_eq!(self.p, o.p, "mixed cyclotomic fields");
        Self {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| op(a, b))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed cyclotomic fields");
        let p = self.p as usize;
        let mut full = vec![BigInt::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[(i + j) % p] += a * b;
                }
            }
        }
        Self::reduce_full(self.p, full)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.p);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// σ_h: ω ↦ ω^h.
    pub fn galois_apply(&self, h: u64) -> Result<Self> {
        let p = self.p;
        if h % p == 0 {
            return Err(invalid(format!("σ_{h} is not an automorphism for p = {p}")));
        }
        let mut full = vec![BigInt::zero(); p as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            full[(i as u64 * h % p) as usize] += c;
        }
        Ok(Self::reduce_full(p, full))
    }

    /// Complex conjugation σ_{−1}.
    pub fn conj(&self) -> Self {
        self.galois_apply(self.p - 1).expect("p − 1 is a unit")
    }

    /// N_{K/Q}: the product of all conjugates.
    pub fn norm(&self) -> BigInt {
        let prod = (1..self.p).fold(Self::one(self.p), |acc, h| {
            acc.mul(&self.galois_apply(h).expect("unit"))
        });
        prod.as_integer().expect("norms are rational")
    }

    /// Value mod ℓ under ω ↦ m, for m a p-th root of unity in F_ℓ.
    pub fn eval_mod(&self, m: u64, ell: u64) -> u64 {
        let mut acc = 0u64;
        let mut pw = 1u64;
        for c in &self.coeffs {
            acc = (acc + arith::mul_mod(arith::big_residue(c, ell), pw, ell)) % ell;
            pw = arith::mul_mod(pw, m, ell);
        }
        acc
    }

    /// Image in F_q under ω ↦ ζ.
    pub fn reduce_in(&self, field: &FqField, zeta: &finite_field::FqElt) -> finite_field::FqElt {
        let mut acc = field.zero();
        let mut pw = field.one();
        for c in &self.coeffs {
            let term = field.mul(&field.from_residue(arith::big_residue(c, field.ell())), &pw);
            acc = field.add(&acc, &term);
            pw = field.mul(&pw, zeta);
        }
        acc
    }
}

/// CM type Φ_{r,s,t} = {h : ⟨hr/p⟩ + ⟨hs/p⟩ + ⟨ht/p⟩ = 1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmType {
    pub p: u64,
    pub elements: BTreeSet<u64>,
}

pub fn cm_type(triple: &Triple) -> CmType {
    let p = triple.p;
    let elements = (1..p)
        .filter(|h| h * triple.r % p + h * triple.s % p + h * triple.t % p == p)
        .collect();
    CmType { p, elements }
}

/// j_{r,s,t}(V) = −Σ_{x ≠ 0,1} χ(x)^r χ(1−x)^s with the field's default character.
pub fn jacobi_sum(field: &FqField, triple: &Triple) -> Result<CycInt> {
    let chi = field.character(triple.p)?;
    jacobi_sum_with(field, &chi, triple)
}

/// Jacobi sum for an explicit character.
pub fn jacobi_sum_with(field: &FqField, chi: &PowerResidueChar, triple: &Triple) -> Result<CycInt> {
    JacobiSummer::new(field, chi)?.sum(triple)
}

/// Jacobi sum by enumerating every x ∈ F_q (q ≤ [`finite_field::TABLE_LIMIT`]).
pub fn jacobi_sum_direct(
    field: &FqField,
    chi: &PowerResidueChar,
    triple: &Triple,
) -> Result<CycInt> {
    let table = field.character_table(chi)?;
    check_order(chi, triple)?;
    Ok(from_counts(triple.p, &counts_direct(field, &table, triple)))
}

/// Jacobi sum evaluated class by class over F_q^×/F_Q^× (even degree, χ trivial on F_Q^×).
pub fn jacobi_sum_by_class(
    field: &FqField,
    chi: &PowerResidueChar,
    triple: &Triple,
) -> Result<CycInt> {
    check_order(chi, triple)?;
    let big_q = half_field_size(field, chi.p())?;
    let classes = field.half_subfield_class_characters(chi)?;
    Ok(from_counts(
        triple.p,
        &counts_by_class(&classes, big_q, triple),
    ))
}

fn check_order(chi: &PowerResidueChar, triple: &Triple) -> Result<()> {
    if chi.p() != triple.p {
        return Err(invalid("character order differs from p"));
    }
    Ok(())
}

/// Q = ℓ^{f/2} when f is even and p ∤ Q − 1.
fn half_field_size(field: &FqField, p: u64) -> Result<u128> {
    let f = field.degree();
    if f % 2 != 0 {
        return Err(invalid("class decomposition needs an even degree"));
    }
    let big_q = (field.ell() as u128).pow(f as u32 / 2);
    if (big_q - 1) % p as u128 == 0 {
        return Err(invalid("χ is nontrivial on the half-degree subfield"));
    }
    Ok(big_q)
}

fn from_counts(p: u64, counts: &[i64]) -> CycInt {
    let neg: Vec<i64> = counts.iter().map(|&c| -c).collect();
    CycInt::from_exponent_counts(p, &neg)
}

/// Jacobi sums of one field and character for several triples.
///
/// Fields of even degree 2e with χ trivial on F_Q^× (Q = ℓ^e) are summed
/// class by class over F_q^×/F_Q^×: for x in a class A ≠ F_Q^×, the points
/// 1 − x run once through every class except A and F_Q^×. Other fields up to
/// [`finite_field::TABLE_LIMIT`] are summed element by element. The χ data is
/// computed once.
#[derive(Debug)]
pub struct JacobiSummer<'a> {
    field: &'a FqField,
    p: u64,
    mode: SumMode,
}

#[derive(Debug)]
enum SumMode {
    Classes { classes: Vec<u64>, big_q: u128 },
    Table(Vec<u8>),
}

impl<'a> JacobiSummer<'a> {
    pub fn new(field: &'a FqField, chi: &PowerResidueChar) -> Result<Self> {
        let mode = match half_field_size(field, chi.p()) {
            Ok(big_q) => SumMode::Classes {
                classes: field.half_subfield_class_characters(chi)?,
                big_q,
            },
            Err(_) => SumMode::Table(field.character_table(chi)?),
        };
        Ok(Self {
            field,
            p: chi.p(),
            mode,
        })
    }

    pub fn sum(&self, triple: &Triple) -> Result<CycInt> {
        if triple.p != self.p {
            return Err(invalid("character order differs from p"));
        }
        let counts = match &self.mode {
            SumMode::Classes { classes, big_q } => counts_by_class(classes, *big_q, triple),
            SumMode::Table(table) => counts_direct(self.field, table, triple),
        };
        Ok(from_counts(self.p, &counts))
    }
}

fn counts_direct(field: &FqField, table: &[u8], t: &Triple) -> Vec<i64> {
    let p = t.p;
    let ell = field.ell() as u128;
    let mut counts = vec![0i64; p as usize];
    for n in 2..field.q() {
        // encode(1 − x), digit by digit
        let mut rest = n;
        let mut one_minus = 0u128;
        let mut scale = 1u128;
        for i in 0..field.degree() {
            let c = rest % ell;
            rest /= ell;
            let target = if i == 0 { 1 } else { 0 };
            one_minus += (target + ell - c) % ell * scale;
            scale *= ell;
        }
        if one_minus == 0 {
            continue;
        }
        let e = (t.r * table[n as usize] as u64 + t.s * table[one_minus as usize] as u64) % p;
        counts[e as usize] += 1;
    }
    counts
}

fn counts_by_class(classes: &[u64], big_q: u128, t: &Triple) -> Vec<i64> {
    let p = t.p;
    let mut hist = vec![0i64; p as usize];
    for &c in classes {
        hist[c as usize] += 1;
    }
    let mut counts = vec![0i64; p as usize];
    counts[0] += big_q as i64 - 2;
    for &a in &classes[1..] {
        for c in 0..p {
            let mult = hist[c as usize] - (c == a) as i64 - (c == 0) as i64;
            counts[((t.r * a + t.s * c) % p) as usize] += mult;
        }
    }
    counts
}

/// True iff j ≡ 1 mod (1−ω)².
pub fn jacobi_congruence(j: &CycInt) -> bool {
    let p = BigInt::from(j.p());
    let sum: BigInt = j.coeffs().iter().sum();
    let weighted: BigInt = j
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c * BigInt::from(i))
        .sum();
    ((sum - 1u32) % &p).is_zero() && (weighted % &p).is_zero()
}

/// Exponents h with j(ζ^h) ≡ 0 mod ℓ, where ζ is the labelling root of `chi`.
pub fn stickelberger_vanishing_set(
    field: &FqField,
    chi: &PowerResidueChar,
    triple: &Triple,
) -> Result<BTreeSet<u64>> {
    if field.degree() != 1 {
        return Err(invalid("vanishing sets are evaluated over the prime field"));
    }
    let j = jacobi_sum_with(field, chi, triple)?;
    let ell = field.ell();
    let zeta = chi.zeta().0[0];
    Ok((1..triple.p)
        .filter(|&h| j.eval_mod(arith::pow_mod(zeta, h, ell), ell) == 0)
        .collect())
}

/// Checks (j(V)) = ∏_{h∈Φ} V^{σ_h^{−1}} at a prime ℓ ≡ 1 mod p.
///
/// With V = (ℓ, ω − ζ) and σ_h^{−1}(V) = (ℓ, ω − ζ^h), the relation says
/// that j vanishes at ω ↦ ζ^h exactly for h ∈ Φ.
pub fn stickelberger_check(triple: &Triple, ell: u64) -> Result<bool> {
    let p = triple.p;
    if ell % p != 1 || !arith::is_prime(ell) {
        return Err(invalid(format!("ℓ = {ell} is not a prime ≡ 1 mod {p}")));
    }
    let field = finite_field::build_field(ell, 1)?;
    let chi = field.character(p)?;
    let vanishing = stickelberger_vanishing_set(&field, &chi, triple)?;
    Ok(vanishing == cm_type(triple).elements)
}

/// φ_ℓ evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiEll {
    pub ell: u64,
    pub p: u64,
    /// (ℓ/p).
    pub formula: i8,
    /// Product of the place values computed from the Jacobi sums.
    pub brute_force: i8,
    pub places: u64,
}

impl PhiEll {
    pub fn agree(&self) -> bool {
        self.formula == self.brute_force
    }
}

/// φ_ℓ = ∏_{V | ℓ} φ_V(ϖ_V), by the formula (ℓ/p) and by the place product.
///
/// Places above ℓ are σ_h V for h over cosets of ⟨ℓ⟩ in (Z/p)^×, with
/// j(σ_h V) = σ_h j(V). A place inert over the real subfield contributes
/// j(V)/ℓ^{f/2}, which must be ±1; a conjugate pair V ≠ V̄ contributes
/// j(V)j(V̄)/q_V, which must be 1.
pub fn phi_ell(triple: &Triple, ell: u64) -> Result<PhiEll> {
    Ok(phi_ell_all(std::slice::from_ref(triple), ell)?.remove(0))
}

/// [`phi_ell`] for several triples of the same p, sharing the field and χ data.
pub fn phi_ell_all(triples: &[Triple], ell: u64) -> Result<Vec<PhiEll>> {
    let Some(first) = triples.first() else {
        return Ok(Vec::new());
    };
    let p = first.p;
    let sd = arith::splitting_data(ell, p)?;
    let field = finite_field::build_field(ell, sd.f as usize)?;
    let chi = field.character(p)?;
    let summer = JacobiSummer::new(&field, &chi)?;
    triples
        .iter()
        .map(|t| phi_from_jacobi(&sd, &summer.sum(t)?, field.q()))
        .collect()
}

fn phi_from_jacobi(sd: &arith::SplittingData, j: &CycInt, q: u128) -> Result<PhiEll> {
    let (p, ell) = (sd.p, sd.ell);
    let formula = arith::legendre(ell as i64, p)?;
    let q = BigInt::from(q);
    let mut reps: Vec<u64> = Vec::new();
    let mut seen = BTreeSet::new();
    for h in 1..p {
        if seen.contains(&h) {
            continue;
        }
        reps.push(h);
        let mut x = h;
        for _ in 0..sd.f {
            seen.insert(x);
            x = x * ell % p;
        }
    }
    let coset_of = |h: u64| -> u64 {
        *reps
            .iter()
            .find(|&&rep| (0..sd.f).any(|k| rep * arith::pow_mod(ell, k, p) % p == h))
            .expect("every unit lies in a coset")
    };
    let mut sign = 1i8;
    if sd.inert_in_k_over_f {
        let half = BigInt::from(ell).pow(sd.f as u32 / 2);
        for &h in &reps {
            let jv = j.galois_apply(h)?;
            match jv.as_integer() {
                Some(v) if v == half => {}
                Some(v) if v == -&half => sign = -sign,
                _ => {
                    return Err(internal(format!(
                        "j(V)/ℓ^{} is not ±1 at ℓ = {ell}",
                        sd.f / 2
                    )))
                }
            }
        }
    } else {
        let mut done = BTreeSet::new();
        for &h in &reps {
            if done.contains(&h) {
                continue;
            }
            let bar = coset_of(p - h);
            done.insert(h);
            done.insert(bar);
            let prod = j.galois_apply(h)?.mul(&j.galois_apply(bar)?);
            if prod.as_integer() != Some(q.clone()) {
                return Err(internal(format!("j(V)j(V̄) ≠ q at ℓ = {ell}")));
            }
        }
    }
    Ok(PhiEll {
        ell,
        p,
        formula,
        brute_force: sign,
        places: sd.g,
    })
}

/// E_i = ∏_a (ω^{(1−g)/2}(1−ω^g)/(1−ω))^{a^i σ_a^{−1}} for even 2 ≤ i ≤ p−3.
pub fn cyclotomic_unit_e(i: u64, p: u64, g: u64) -> Result<CycInt> {
    arith::require_odd_prime(p)?;
    if i % 2 != 0 || i < 2 || i + 3 > p {
        return Err(invalid(format!("E_{i} is not defined for p = {p}")));
    }
    if arith::multiplicative_order(g, p) != p - 1 {
        return Err(invalid(format!("{g} is not a primitive root mod {p}")));
    }
    let half = arith::inv_mod(2, p).expect("p odd");
    let shift = arith::mul_mod(arith::residue(1 - g as i64, p), half, p);
    let mut counts = vec![0i64; p as usize];
    for k in 0..g {
        counts[((shift + k) % p) as usize] += 1;
    }
    let base = CycInt::from_exponent_counts(p, &counts);
    let mut acc = CycInt::one(p);
    for a in 1..p {
        let a_inv = arith::inv_mod(a, p).expect("unit");
        let e = arith::pow_mod(a, i, p);
        acc = acc.mul(&base.galois_apply(a_inv)?.pow(e));
    }
    Ok(acc)
}

/// The units E_2, E_4, …, E_{p−3} for the least primitive root.
pub fn cyclotomic_units(p: u64) -> Result<Vec<(u64, CycInt)>> {
    let g = arith::least_primitive_root(p);
    (2..p.saturating_sub(2))
        .step_by(2)
        .map(|i| Ok((i, cyclotomic_unit_e(i, p, g)?)))
        .collect()
}

/// The affine point count predicted from Jacobi sums:
/// q − Σ_{a=1}^{p−1} σ_a(ω^{(r+s)χ(δ)} j).
pub fn affine_count_from_jacobi(field: &FqField, triple: &Triple, delta: i64) -> Result<i128> {
    let p = triple.p;
    let chi = field.character(p)?;
    let d = field.from_int(delta);
    let e = chi.exponent_of(field, &d)?;
    let j = jacobi_sum_with(field, &chi, triple)?;
    let beta = CycInt::omega_pow(p, (triple.r + triple.s) * e).mul(&j);
    let mut total = CycInt::zero(p);
    for a in 1..p {
        total = total.add(&beta.galois_apply(a)?);
    }
    let n = total
        .as_integer()
        .ok_or_else(|| internal("trace of the Jacobi-sum term is not rational"))?;
    let n = n.to_i128().ok_or_else(|| internal("trace overflow"))?;
    Ok(field.q() as i128 - n)
}

/// True iff x is a unit of ℤ[ω] (norm ±1).
pub fn is_unit(x: &CycInt) -> bool {
    x.norm().abs().is_one()
}
