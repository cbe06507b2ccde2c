//! Modular and rational-integer arithmetic: Legendre symbols, splitting of
//! rational primes in Q(ω), the p-adic invariants u, d and B, Bernoulli
//! numbers mod p and regularity.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{hypothesis, invalid, Result};

/// Deterministic primality test for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    num_prime::nt_funcs::is_prime64(n)
}

/// Prime factorization of `n >= 1`, sorted by prime.
pub fn factor(n: u64) -> Vec<(u64, u32)> {
    if n <= 1 {
        return Vec::new();
    }
    num_prime::nt_funcs::factorize64(n)
        .into_iter()
        .map(|(q, e)| (q, e as u32))
        .collect()
}

/// `a * b mod m` without overflow.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `b^e mod m` by square-and-multiply.
pub fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = b % m;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = BigInt::from(a).extended_gcd(&BigInt::from(m));
    if !g.gcd.is_one() {
        return None;
    }
    let x = g.x.mod_floor(&BigInt::from(m));
    x.to_u64()
}

/// Least nonnegative residue of a signed integer modulo `m`.
pub fn residue(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Least nonnegative residue of a big integer modulo `m`.
pub fn big_residue(a: &BigInt, m: u64) -> u64 {
    a.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue fits in u64")
}

/// Exponent of the prime `p` in `n != 0`.
pub fn valuation(n: u64, p: u64) -> u32 {
    let mut n = n;
    let mut v = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Fails unless `p` is an odd prime.
pub fn require_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(invalid(format!("{p} is not an odd prime")));
    }
    Ok(())
}

/// Legendre symbol (a/p): 0 when p | a, otherwise ±1.
pub fn legendre(a: i64, p: u64) -> Result<i8> {
    require_odd_prime(p)?;
    Ok(legendre_unchecked(residue(a, p), p))
}

pub(crate) fn legendre_unchecked(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// The symbol (B/p) with the convention (0/p) = −1.
pub fn b_symbol(b: u64, p: u64) -> i8 {
    match legendre_unchecked(b, p) {
        0 => -1,
        s => s,
    }
}

/// Multiplicative order of `a` modulo the prime `p` (`p ∤ a`).
pub fn multiplicative_order(a: u64, p: u64) -> u64 {
    let a = a % p;
    assert!(a != 0, "order of a multiple of p");
    let mut order = p - 1;
    for (q, _) in factor(p - 1) {
        while order % q == 0 && pow_mod(a, order / q, p) == 1 {
            order /= q;
        }
    }
    order
}

/// Least primitive root modulo the odd prime `p`.
pub fn least_primitive_root(p: u64) -> u64 {
    (2..p)
        .find(|&g| multiplicative_order(g, p) == p - 1)
        .unwrap_or(1)
}

/// Exponent triple (r, s, t) with r, s, t > 0 and r + s + t = p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub r: u64,
    pub s: u64,
    pub t: u64,
    pub p: u64,
}

impl Triple {
    /// Validated constructor.
    pub fn new(r: u64, s: u64, t: u64, p: u64) -> Result<Self> {
        require_odd_prime(p)?;
        if r == 0 || s == 0 || t == 0 || r + s + t != p {
            return Err(invalid(format!(
                "({r},{s},{t}) is not a positive triple summing to {p}"
            )));
        }
        Ok(Self { r, s, t, p })
    }

    /// The reduced triple (r, 1, p−r−1), 1 ≤ r ≤ p−2.
    pub fn reduced_form(r: u64, p: u64) -> Result<Self> {
        if r == 0 || r + 2 > p {
            return Err(invalid(format!(
                "r = {r} outside 1..{}",
                p.saturating_sub(2)
            )));
        }
        Self::new(r, 1, p - r - 1, p)
    }

    /// Scale componentwise by `h` mod p; `None` unless the residues sum to p.
    pub fn scale(&self, h: u64) -> Option<Self> {
        let p = self.p;
        let h = h % p;
        if h == 0 {
            return None;
        }
        let (r, s, t) = (h * self.r % p, h * self.s % p, h * self.t % p);
        (r + s + t == p).then_some(Self { r, s, t, p })
    }

    /// The reduced representative of the birational orbit, with the scaling h = s⁻¹ used.
    pub fn reduced(&self) -> (u64, Self) {
        let h = inv_mod(self.s, self.p).expect("s is a unit mod p");
        let reduced = self
            .scale(h)
            .expect("scaling by s⁻¹ keeps the sum equal to p");
        (h, reduced)
    }

    /// All triples h·(r,s,t) mod p that are again valid triples, with their h.
    pub fn orbit(&self) -> Vec<(u64, Self)> {
        (1..self.p)
            .filter_map(|h| self.scale(h).map(|t| (h, t)))
            .collect()
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.r, self.s, self.t)
    }
}

/// Decomposition of a rational prime ℓ ≠ p in K = Q(ω).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingData {
    pub ell: u64,
    pub p: u64,
    /// Inertia degree: the order of ℓ in F_p^×.
    pub f: u64,
    /// Number of places of K above ℓ.
    pub g: u64,
    /// True iff each place of the real subfield above ℓ is inert in K (f even).
    pub inert_in_k_over_f: bool,
}

impl SplittingData {
    /// True iff ℓ generates a single prime of K (f = p − 1).
    pub fn inert(&self) -> bool {
        self.f == self.p - 1
    }
}

/// Splitting data of the prime `ell` in Q(ω_p).
pub fn splitting_data(ell: u64, p: u64) -> Result<SplittingData> {
    require_odd_prime(p)?;
    if ell == p || !is_prime(ell) {
        return Err(invalid(format!("{ell} is not a prime different from {p}")));
    }
    let f = multiplicative_order(ell, p);
    Ok(SplittingData {
        ell,
        p,
        f,
        g: (p - 1) / f,
        inert_in_k_over_f: f % 2 == 0,
    })
}

/// A p-adic order that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PadicOrder {
    Finite(u32),
    Infinite,
}

impl Serialize for PadicOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PadicOrder::Finite(v) => s.serialize_u32(*v),
            PadicOrder::Infinite => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for PadicOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) => Ok(PadicOrder::Finite(v)),
            Raw::S(s) if s == "infinity" => Ok(PadicOrder::Infinite),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad order {s}"))),
        }
    }
}

/// The invariant u(δ) together with the data it is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaDecomposition {
    pub delta: i64,
    pub p: u64,
    /// ord_p(δ) mod p.
    pub a: u64,
    /// ord_p((δ₀^{p−1} − 1)/p) for the p-unit part δ₀; only meaningful when a = 0.
    pub ord_b: PadicOrder,
    pub u: PadicOrder,
}

/// Computes ord_p(w^{p−1} − 1) − 1 where `w_mod(m)` returns a p-adic unit mod m.
///
/// Precision doubles until the difference is visible; the caller guarantees the
/// underlying integer is not ±1, so the loop terminates.
fn ord_b_from(p: u64, w_mod: impl Fn(&BigUint) -> BigUint) -> u32 {
    let pb = BigUint::from(p);
    let mut k = 2u32;
    loop {
        let m = pb.pow(k);
        let w = w_mod(&m).modpow(&BigUint::from(p - 1), &m);
        if !w.is_one() {
            let mut v = 0u32;
            let mut d = w - 1u32;
            while (&d % &pb).is_zero() {
                d /= &pb;
                v += 1;
            }
            return v - 1;
        }
        k *= 2;
    }
}

fn big_mod(a: &BigInt, m: &BigUint) -> BigUint {
    a.mod_floor(&BigInt::from(m.clone()))
        .to_biguint()
        .expect("nonnegative residue")
}

/// The invariant u(δ) = min(ord_p(a), ord_p(b) + 1) of δ = ε p^a (1−p)^b.
pub fn u_invariant(delta: i64, p: u64) -> Result<DeltaDecomposition> {
    require_odd_prime(p)?;
    if delta == 0 {
        return Err(invalid("δ must be nonzero"));
    }
    let n = delta.unsigned_abs();
    let ord = valuation(n, p);
    let a = ord as u64 % p;
    let unit = n / p.pow(ord);
    let ord_b = if unit == 1 {
        PadicOrder::Infinite
    } else {
        let w = BigInt::from(unit);
        PadicOrder::Finite(ord_b_from(p, |m| big_mod(&w, m)))
    };
    let u = if a != 0 {
        PadicOrder::Finite(0)
    } else {
        match ord_b {
            PadicOrder::Finite(b) => PadicOrder::Finite(b + 1),
            PadicOrder::Infinite => PadicOrder::Infinite,
        }
    };
    Ok(DeltaDecomposition {
        delta,
        p,
        a,
        ord_b,
        u,
    })
}

/// δ reduced modulo p-th powers, with its factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedDelta {
    /// Canonical representative: sign times ∏ ℓ^{e mod p}.
    pub delta: i64,
    /// Number of distinct primes dividing the canonical δ.
    pub k: usize,
    pub factors: Vec<(u64, u32)>,
    /// Every prime factor has order p − 1 mod p (p itself never counts as inert).
    pub all_inert: bool,
}

impl ReducedDelta {
    /// ord_p of the canonical δ.
    pub fn ord_p(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| *q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// The prime-to-p part of |δ|.
    pub fn prime_to_p(&self, p: u64) -> u64 {
        self.factors
            .iter()
            .filter(|(q, _)| *q != p)
            .map(|&(q, e)| q.pow(e))
            .product()
    }
}

/// Reduce δ modulo p-th powers (prime exponents taken mod p).
pub fn reduce_delta(delta: i64, p: u64) -> Result<ReducedDelta> {
    require_odd_prime(p)?;
    if delta == 0 {
        return Err(invalid("δ must be nonzero"));
    }
    let factors: Vec<(u64, u32)> = factor(delta.unsigned_abs())
        .into_iter()
        .map(|(q, e)| (q, e % p as u32))
        .filter(|&(_, e)| e > 0)
        .collect();
    let magnitude: u64 = factors.iter().map(|&(q, e)| q.pow(e)).product();
    let all_inert = factors
        .iter()
        .all(|&(q, _)| q != p && multiplicative_order(q, p) == p - 1);
    Ok(ReducedDelta {
        delta: delta.signum() * magnitude as i64,
        k: factors.len(),
        factors,
        all_inert,
    })
}

/// The invariant u(X) of X = r^r s^s (t−p)^t δ^{r+s}, with d when defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XInvariant {
    pub u: u32,
    /// d mod p for u ∈ {0, 1}.
    pub d: Option<u64>,
}

/// X = r^r s^s (t−p)^t δ^{r+s} reduced mod m.
fn x_residue(triple: &Triple, delta: i64, m: &BigUint) -> BigUint {
    let mi = BigInt::from(m.clone());
    let term = |base: i64, e: u64| -> BigInt {
        BigInt::from(base)
            .mod_floor(&mi)
            .modpow(&BigInt::from(e), &mi)
    };
    let p = triple.p as i64;
    let x = term(triple.r as i64, triple.r)
        * term(triple.s as i64, triple.s)
        * term(triple.t as i64 - p, triple.t)
        * term(delta, triple.r + triple.s);
    big_mod(&x, m)
}

/// Computes u(X) and d for a canonical δ.
pub fn x_invariant(triple: &Triple, delta: i64) -> Result<XInvariant> {
    let p = triple.p;
    let red = reduce_delta(delta, p)?;
    let ord = red.ord_p(p) as u64;
    if ord != 0 {
        let d = (triple.r + triple.s) * ord % p;
        if d == 0 {
            return Err(crate::error::internal("d vanished in the u(X) = 0 branch"));
        }
        return Ok(XInvariant { u: 0, d: Some(d) });
    }
    let p2 = p * p;
    let x = x_residue(triple, red.delta, &BigUint::from(p2))
        .to_u64()
        .expect("residue mod p²");
    let w = pow_mod(x, p - 1, p2);
    if w != 1 {
        return Ok(XInvariant {
            u: 1,
            d: Some((w + p2 - 1) % p2 / p),
        });
    }
    let ord_b = ord_b_from(p, |m| x_residue(triple, red.delta, m));
    Ok(XInvariant {
        u: ord_b + 1,
        d: None,
    })
}

/// The quantity d of the root-number formula (requires u(X) ≤ 1).
pub fn d_value(triple: &Triple, delta: i64) -> Result<u64> {
    let x = x_invariant(triple, delta)?;
    x.d.ok_or_else(|| hypothesis(format!("u(X) = {} ≥ 2 leaves d undefined", x.u)))
}

/// B = p⁻¹((r^r δ^{r+1}/(r+1)^{r+1})^{p−1} − 1)·2rδ²/(r+1)³ mod p for the triple (r,1,p−r−1).
pub fn b_value(r: u64, delta: i64, p: u64) -> Result<u64> {
    Triple::reduced_form(r, p)?;
    if delta == 0 {
        return Err(invalid("δ must be nonzero"));
    }
    let red = reduce_delta(delta, p)?;
    if red.ord_p(p) != 0 {
        return Err(hypothesis(format!("p = {p} divides δ = {delta}")));
    }
    let p2 = p * p;
    let d2 = residue(red.delta, p2);
    let r1 = r + 1;
    let inner = mul_mod(
        mul_mod(pow_mod(r, r, p2), pow_mod(d2, r1, p2), p2),
        inv_mod(pow_mod(r1, r1, p2), p2).expect("p ∤ r+1"),
        p2,
    );
    let w = pow_mod(inner, p - 1, p2);
    let first = (w + p2 - 1) % p2 / p;
    let dp = d2 % p;
    let second = mul_mod(
        2 * r % p * mul_mod(dp, dp, p) % p,
        inv_mod(pow_mod(r1, 3, p), p).expect("p ∤ r+1"),
        p,
    );
    Ok(first * second % p)
}

/// Exact Bernoulli numbers B_0..B_n (B_1 = −1/2) from Σ_{k≤m} C(m+1,k) B_k = 0.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// B_k mod p for even k in 2..=p−3.
pub fn bernoulli_mod_p(p: u64) -> Result<BTreeMap<u64, u64>> {
    require_odd_prime(p)?;
    let top = p.saturating_sub(3) as usize;
    let numbers = bernoulli_numbers(top);
    let mut out = BTreeMap::new();
    for k in (2..=top).step_by(2) {
        let q = &numbers[k];
        let den = big_residue(q.denom(), p);
        let den_inv = inv_mod(den, p).ok_or_else(|| {
            crate::error::internal(format!("B_{k} is not p-integral for p = {p}"))
        })?;
        out.insert(k as u64, mul_mod(big_residue(q.numer(), p), den_inv, p));
    }
    Ok(out)
}

/// The irregularity index i(p) and the even indices k with p | B_k.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Irregularity {
    pub p: u64,
    pub index: usize,
    pub regular: bool,
    pub irregular_indices: Vec<u64>,
}

/// Counts even k ≤ p−3 with B_k ≡ 0 mod p (Kummer's criterion for p | h(Q(ω))).
pub fn irregularity_index(p: u64) -> Result<Irregularity> {
    let irregular_indices: Vec<u64> = bernoulli_mod_p(p)?
        .into_iter()
        .filter(|&(_, v)| v == 0)
        .map(|(k, _)| k)
        .collect();
    Ok(Irregularity {
        p,
        index: irregular_indices.len(),
        regular: irregular_indices.is_empty(),
        irregular_indices,
    })
}

/// True iff p is a regular prime.
pub fn is_regular(p: u64) -> Result<bool> {
    Ok(irregularity_index(p)?.regular)
}
