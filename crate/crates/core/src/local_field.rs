//! Truncated arithmetic in K_Π = Q_p(λ), λ^{p−1} = −p: the generators
//! u_0..u_p of K_Π^×/(K_Π^×)^p, the Galois action, p-th power testing and
//! the decomposition of a class into u-exponents.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::cyclotomic::CycInt;
use crate::error::{internal, invalid, Error, Result};

/// Default coefficient precision M (elements are known mod p^M = λ^{M(p−1)}).
pub const DEFAULT_PRECISION: u32 = 4;

/// Σ c_j λ^j (0 ≤ j ≤ p−2) with c_j ∈ Z/p^M, known modulo λ^prec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalElt {
    c: Vec<u64>,
    prec: u32,
}

impl LocalElt {
    /// Coefficients of 1, λ, …, λ^{p−2}.
    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    /// λ-adic absolute precision.
    pub fn precision(&self) -> u32 {
        self.prec
    }
}

/// Exponents (c_0, …, c_p) ∈ F_p^{p+1} of a class with respect to u_0, …, u_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitClass(pub Vec<u64>);

impl UnitClass {
    /// Indices with nonzero exponent.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] != 0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// The ring O/λ^{M(p−1)} with precision tracking.
#[derive(Debug, Clone)]
struct Ring {
    p: u64,
    m: u32,
    modulus: u64,
    n: u32,
}

impl Ring {
    fn new(p: u64, m: u32) -> Result<Self> {
        let modulus = p
            .checked_pow(m)
            .filter(|&q| q < 1 << 62)
            .ok_or_else(|| Error::TooLarge(format!("{p}^{m} exceeds the coefficient range")))?;
        Ok(Self {
            p,
            m,
            modulus,
            n: m * (p as u32 - 1),
        })
    }

    fn width(&self) -> usize {
        self.p as usize - 1
    }

    fn exact(&self, c: Vec<u64>) -> LocalElt {
        LocalElt { c, prec: self.n }
    }

    fn constant(&self, a: i64) -> LocalElt {
        let mut c = vec![0; self.width()];
        c[0] = arith::residue(a, self.modulus);
        self.exact(c)
    }

    fn big_residue(&self, a: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        let r = ((a % &m) + &m) % &m;
        r.to_u64().expect("residue")
    }

    fn lambda_pow(&self, level: u32) -> LocalElt {
        // λ^{k(p−1)+j} = (−p)^k λ^j
        let w = self.width() as u32;
        let (k, j) = (level / w, level % w);
        let mut c = vec![0; self.width()];
        if k < self.m {
            let pk = self.p.pow(k);
            c[j as usize] = if k % 2 == 0 { pk } else { self.modulus - pk };
        }
        self.exact(c)
    }

    fn vp(&self, c: u64) -> u32 {
        arith::valuation(c, self.p)
    }

    /// ord_λ, or `None` when x vanishes to its precision.
    fn ord(&self, x: &LocalElt) -> Option<u32> {
        let w = self.width() as u32;
        let o =
            x.c.iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(j, &c)| j as u32 + w * self.vp(c))
                .min()?;
        (o < x.prec).then_some(o)
    }

    fn ord_or_prec(&self, x: &LocalElt) -> u32 {
        self.ord(x).unwrap_or(x.prec)
    }

    fn add(&self, a: &LocalElt, b: &LocalElt) -> LocalElt {
        LocalElt {
            c: a.c
                .iter()
                .zip(&b.c)
                .map(|(&x, &y)| (x + y) % self.modulus)
                .collect(),
            prec: a.prec.min(b.prec),
        }
    }

    fn sub(&self, a: &LocalElt, b: &LocalElt) -> LocalElt {
        LocalElt {
            c: a.c
                .iter()
                .zip(&b.c)
                .map(|(&x, &y)| (x + self.modulus - y) % self.modulus)
                .collect(),
            prec: a.prec.min(b.prec),
        }
    }

    fn scale(&self, a: &LocalElt, k: u64) -> LocalElt {
        LocalElt {
            c: a.c
                .iter()
                .map(|&x| arith::mul_mod(x, k, self.modulus))
                .collect(),
            prec: a.prec,
        }
    }

    fn mul(&self, a: &LocalElt, b: &LocalElt) -> LocalElt {
        let w = self.width();
        let m = self.modulus as u128;
        let mut d = vec![0u128; 2 * w - 1];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                d[i + j] = (d[i + j] + x as u128 * y as u128 % m) % m;
            }
        }
        // λ^{w+k} = −p λ^k
        let mut c = vec![0u64; w];
        for k in 0..w {
            let high = if k + w < d.len() { d[k + w] } else { 0 };
            let v = (d[k] + m - high * self.p as u128 % m) % m;
            c[k] = v as u64;
        }
        let prec = (a.prec + self.ord_or_prec(b))
            .min(b.prec + self.ord_or_prec(a))
            .min(self.n);
        LocalElt { c, prec }
    }

    fn pow(&self, a: &LocalElt, mut e: u64) -> LocalElt {
        let mut acc = self.constant(1);
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// x / λ for x with ord ≥ 1; loses one level of precision.
    fn div_lambda(&self, x: &LocalElt) -> LocalElt {
        let w = self.width();
        debug_assert!(x.c[0] % self.p == 0);
        let mut c = vec![0u64; w];
        c[..w - 1].copy_from_slice(&x.c[1..]);
        // c_0 = p·a contributes a·p/λ = −a λ^{p−2}
        let a = x.c[0] / self.p;
        c[w - 1] = (self.modulus - a) % self.modulus;
        LocalElt {
            c,
            prec: x.prec.saturating_sub(1),
        }
    }

    fn div_lambda_pow(&self, x: &LocalElt, k: u32) -> LocalElt {
        (0..k).fold(x.clone(), |acc, _| self.div_lambda(&acc))
    }

    /// Residue mod λ, an element of F_p.
    fn residue(&self, x: &LocalElt) -> u64 {
        x.c[0] % self.p
    }

    /// The λ-adic digit at `level`, assuming ord(x) ≥ level.
    fn digit(&self, x: &LocalElt, level: u32) -> u64 {
        let w = self.width() as u32;
        let (k, j) = (level / w, level % w);
        if k >= self.m {
            return 0;
        }
        let d = x.c[j as usize] / self.p.pow(k) % self.p;
        if k % 2 == 0 {
            d
        } else {
            (self.p - d) % self.p
        }
    }

    /// Teichmüller lift of a mod p, by iterated p-th powering.
    fn teichmuller(&self, a: u64) -> u64 {
        let mut x = a % self.p;
        loop {
            let next = arith::pow_mod(x, self.p, self.modulus);
            if next == x {
                return x;
            }
            x = next;
        }
    }

    /// Inverse of a unit by Newton iteration y ← y(2 − xy).
    fn inv(&self, x: &LocalElt) -> Result<LocalElt> {
        let r = self.residue(x);
        if r == 0 {
            return Err(invalid("inverse of a non-unit"));
        }
        let r_inv = arith::inv_mod(r, self.p).expect("unit residue");
        let mut y = self.constant(self.teichmuller(r_inv) as i64);
        let two = self.constant(2);
        let mut good = 1u32;
        while good < self.n {
            let xy = self.mul(x, &y);
            y = self.mul(&y, &self.sub(&two, &xy));
            good *= 2;
        }
        y.prec = x.prec;
        Ok(y)
    }

    fn cyclotomic_poly(&self, x: &LocalElt) -> LocalElt {
        // Φ_p(1 + x) = Σ_{k<p} (1+x)^k
        let one_plus = self.add(&self.constant(1), x);
        let mut acc = self.constant(0);
        let mut pw = self.constant(1);
        for _ in 0..self.p {
            acc = self.add(&acc, &pw);
            pw = self.mul(&pw, &one_plus);
        }
        acc
    }
}

/// The root ω̂ of Φ_p in K_Π with ω̂ ≡ 1 + λ mod λ², to coefficient precision M.
///
/// Digits of ω̂ − 1 are fixed one level at a time: if x agrees with the root
/// to level n then ord Φ_p(1+x) = n + p − 2, so the digit at λ^n is the
/// unique d that raises that order. The lift runs one p-adic digit beyond M.
pub fn embed_omega(p: u64, m: u32) -> Result<LocalElt> {
    arith::require_odd_prime(p)?;
    if m < DEFAULT_PRECISION {
        return Err(invalid(format!(
            "precision M = {m} below {DEFAULT_PRECISION}"
        )));
    }
    let ring = Ring::new(p, m + 1)?;
    let mut x = ring.lambda_pow(1);
    loop {
        let fx = ring.cyclotomic_poly(&x);
        let Some(o) = ring.ord(&fx) else { break };
        let level = o
            .checked_sub(p as u32 - 2)
            .filter(|&l| l >= 2)
            .ok_or_else(|| internal("ω̂ lift left the branch ω̂ ≡ 1 + λ"))?;
        let step = ring.lambda_pow(level);
        let next = (1..p)
            .map(|d| ring.add(&x, &ring.scale(&step, d)))
            .find(|cand| {
                ring.ord(&ring.cyclotomic_poly(cand))
                    .map_or(true, |o2| o2 > o)
            })
            .ok_or_else(|| internal(format!("no digit lifts ω̂ at level {level}")))?;
        x = next;
    }
    let target = Ring::new(p, m)?;
    let c = ring
        .add(&ring.constant(1), &x)
        .c
        .into_iter()
        .map(|v| v % target.modulus)
        .collect();
    Ok(target.exact(c))
}

/// K_Π at coefficient precision M with its generator tables.
#[derive(Debug, Clone)]
pub struct LocalField {
    ring: Ring,
    omega: LocalElt,
    omega_pows: Vec<LocalElt>,
    teich: Vec<u64>,
    gens: Vec<LocalElt>,
    /// inv_pows[i][c] = u_i^{−c} for 1 ≤ i ≤ p, 0 ≤ c < p.
    inv_pows: Vec<Vec<LocalElt>>,
    /// pth[z0][z1] = (τ(z0)(1 + z1 λ))^p.
    pth: Vec<Vec<LocalElt>>,
}

impl LocalField {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        let omega = embed_omega(p, m)?;
        let ring = Ring::new(p, m)?;
        let mut omega_pows = vec![ring.constant(1)];
        for k in 1..p as usize - 1 {
            let next = ring.mul(&omega_pows[k - 1], &omega);
            omega_pows.push(next);
        }
        let teich: Vec<u64> = (0..p).map(|h| ring.teichmuller(h)).collect();
        let mut gens = vec![ring.lambda_pow(1), omega.clone()];
        for i in 2..=p as u32 {
            gens.push(exp_lambda_pow(&ring, i));
        }
        let mut inv_pows = vec![Vec::new()];
        for g in &gens[1..] {
            let gi = ring.inv(g)?;
            let mut row = vec![ring.constant(1)];
            for c in 1..p as usize {
                let next = ring.mul(&row[c - 1], &gi);
                row.push(next);
            }
            inv_pows.push(row);
        }
        let mut pth = vec![Vec::new()];
        for z0 in 1..p {
            let row = (0..p)
                .map(|z1| {
                    let lin = ring.add(&ring.constant(1), &ring.scale(&ring.lambda_pow(1), z1));
                    let z = ring.scale(&lin, teich[z0 as usize]);
                    ring.pow(&z, p)
                })
                .collect();
            pth.push(row);
        }
        Ok(Self {
            ring,
            omega,
            omega_pows,
            teich,
            gens,
            inv_pows,
            pth,
        })
    }

    pub fn p(&self) -> u64 {
        self.ring.p
    }

    /// Coefficient precision M.
    pub fn precision(&self) -> u32 {
        self.ring.m
    }

    /// λ-adic working precision M(p−1).
    pub fn lambda_precision(&self) -> u32 {
        self.ring.n
    }

    pub fn omega(&self) -> &LocalElt {
        &self.omega
    }

    /// The generator u_i (u_0 = λ, u_1 = ω̂, u_i = exp(λ^i)).
    pub fn generator_u(&self, i: usize) -> Result<&LocalElt> {
        self.gens
            .get(i)
            .ok_or_else(|| invalid(format!("u_{i} is not defined for p = {}", self.p())))
    }

    /// Build an element from coefficients of 1, λ, …, λ^{p−2}.
    pub fn element(&self, coeffs: &[i64]) -> Result<LocalElt> {
        if coeffs.len() != self.ring.width() {
            return Err(invalid("wrong number of λ-coefficients"));
        }
        Ok(self.ring.exact(
            coeffs
                .iter()
                .map(|&a| arith::residue(a, self.ring.modulus))
                .collect(),
        ))
    }

    pub fn from_int(&self, a: i64) -> LocalElt {
        self.ring.constant(a)
    }

    /// λ^k.
    pub fn lambda_pow(&self, k: u32) -> LocalElt {
        self.ring.lambda_pow(k)
    }

    pub fn add(&self, a: &LocalElt, b: &LocalElt) -> LocalElt {
        self.ring.add(a, b)
    }

    pub fn sub(&self, a: &LocalElt, b: &LocalElt) -> LocalElt {
        self.ring.sub(a, b)
    }

    pub fn mul(&self, a: &LocalElt, b: &LocalElt) -> LocalElt {
        self.ring.mul(a, b)
    }

    pub fn pow(&self, a: &LocalElt, e: u64) -> LocalElt {
        self.ring.pow(a, e)
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: &LocalElt) -> Result<LocalElt> {
        self.ring.inv(a)
    }

    /// ord_λ, `None` if zero to working precision.
    pub fn ord_lambda(&self, x: &LocalElt) -> Option<u32> {
        self.ring.ord(x)
    }

    /// True iff a and b agree to the smaller of their precisions.
    pub fn eq_to_precision(&self, a: &LocalElt, b: &LocalElt) -> bool {
        self.ring.ord(&self.ring.sub(a, b)).is_none()
    }

    /// Teichmüller lift μ(h) ∈ Z/p^M.
    pub fn teichmuller(&self, h: u64) -> u64 {
        self.teich[(h % self.p()) as usize]
    }

    /// σ_h acting by λ ↦ μ(h)λ.
    pub fn galois_local(&self, h: u64, x: &LocalElt) -> Result<LocalElt> {
        let p = self.p();
        if h % p == 0 {
            return Err(invalid(format!("σ_{h} is not an automorphism")));
        }
        let mu = self.teichmuller(h);
        let modulus = self.ring.modulus;
        let mut scale = 1u64;
        let c =
            x.c.iter()
                .map(|&cj| {
                    let v = arith::mul_mod(cj, scale, modulus);
                    scale = arith::mul_mod(scale, mu, modulus);
                    v
                })
                .collect();
        Ok(LocalElt { c, prec: x.prec })
    }

    /// Image of an element of ℤ[ω] under ω ↦ ω̂.
    pub fn embed_cyclotomic(&self, x: &CycInt) -> Result<LocalElt> {
        if x.p() != self.p() {
            return Err(invalid("cyclotomic element over a different p"));
        }
        let mut acc = self.ring.constant(0);
        for (a, w) in x.coeffs().iter().zip(&self.omega_pows) {
            let a = self.ring.big_residue(a);
            acc = self.ring.add(&acc, &self.ring.scale(w, a));
        }
        if self.ring.ord(&acc).is_none() {
            return Err(Error::Precision(
                "embedded element vanishes to working precision".into(),
            ));
        }
        Ok(acc)
    }

    /// Splits x = λ^o · τ(z) · w with w ≡ 1 mod λ; returns (o, w).
    fn one_unit_part(&self, x: &LocalElt) -> Result<(u32, LocalElt)> {
        let p = self.p();
        let o = self
            .ring
            .ord(x)
            .ok_or_else(|| Error::Precision("element vanishes to working precision".into()))?;
        let w = self.ring.div_lambda_pow(x, o);
        if w.prec < p as u32 + 1 {
            return Err(Error::Precision(format!(
                "unit part known only mod λ^{} (need λ^{})",
                w.prec,
                p + 1
            )));
        }
        let z0 = self.ring.residue(&w);
        let z0_inv = arith::inv_mod(z0, p).expect("unit residue");
        Ok((o, self.ring.scale(&w, self.teichmuller(z0_inv))))
    }

    /// True iff x is a p-th power in K_Π.
    ///
    /// A unit w is a p-th power iff w/z^p ∈ 1 + λ^{p+1}O for some
    /// z = τ(z_0)(1 + z_1 λ); the candidates with z_0 ≠ w mod λ fail at
    /// level 0, so only z_0 = w mod λ is scanned.
    pub fn is_pth_power(&self, x: &LocalElt) -> Result<bool> {
        let p = self.p();
        let o = self
            .ring
            .ord(x)
            .ok_or_else(|| Error::Precision("element vanishes to working precision".into()))?;
        if o as u64 % p != 0 {
            return Ok(false);
        }
        let w = self.ring.div_lambda_pow(x, o);
        if w.prec < p as u32 + 1 {
            return Err(Error::Precision(format!(
                "unit part known only mod λ^{} (need λ^{})",
                w.prec,
                p + 1
            )));
        }
        let z0 = self.ring.residue(&w) as usize;
        Ok(self.pth[z0].iter().any(|zp| {
            let d = self.ring.sub(&w, zp);
            self.ring.ord(&d).map_or(true, |od| od > p as u32)
        }))
    }

    /// Class of x in K_Π^×/(K_Π^×)^p by projection onto Teichmüller eigenspaces.
    ///
    /// y_i = ∏_h σ_h(w)^{m(h,i)} with m(h,i) ≡ −h^{−i} mod p projects the
    /// class of w onto the eigenspace where σ_h acts by h^i; each projection
    /// is matched against powers of the generators spanning that eigenspace.
    pub fn unit_class(&self, x: &LocalElt) -> Result<UnitClass> {
        let p = self.p();
        let (o, w) = self.one_unit_part(x)?;
        let mut class = vec![0u64; p as usize + 1];
        class[0] = o as u64 % p;
        let conjugates: Vec<LocalElt> = (1..p)
            .map(|h| self.galois_local(h, &w))
            .collect::<Result<_>>()?;
        for i in 0..p - 1 {
            let mut y = self.ring.constant(1);
            for (h, s) in (1..p).zip(&conjugates) {
                let h_inv = arith::inv_mod(h, p).expect("unit");
                let m = (p - arith::pow_mod(h_inv, i, p)) % p;
                y = self.ring.mul(&y, &self.ring.pow(s, m));
            }
            let found = match i {
                0 => self.match_eigen(&y, &[p as usize - 1]),
                1 => self.match_eigen(&y, &[1, p as usize]),
                _ => self.match_eigen(&y, &[i as usize]),
            }?;
            let idx: Vec<usize> = match i {
                0 => vec![p as usize - 1],
                1 => vec![1, p as usize],
                _ => vec![i as usize],
            };
            for (k, c) in idx.into_iter().zip(found) {
                class[k] = c;
            }
        }
        Ok(UnitClass(class))
    }

    /// Exponents e with y · ∏ u_k^{−e_k} a p-th power, k over `indices`.
    fn match_eigen(&self, y: &LocalElt, indices: &[usize]) -> Result<Vec<u64>> {
        let p = self.p() as usize;
        let total = p.pow(indices.len() as u32);
        for n in 0..total {
            let exps: Vec<usize> = (0..indices.len())
                .map(|t| n / p.pow(t as u32) % p)
                .collect();
            let mut z = y.clone();
            for (&k, &e) in indices.iter().zip(&exps) {
                z = self.ring.mul(&z, &self.inv_pows[k][e]);
            }
            if self.is_pth_power(&z)? {
                return Ok(exps.into_iter().map(|e| e as u64).collect());
            }
        }
        Err(Error::Precision(format!(
            "no exponent found on eigenspace spanned by u_{indices:?}"
        )))
    }

    /// Class of x by peeling off u_1, …, u_p level by level along the filtration 1 + λ^n O.
    pub fn unit_class_filtration(&self, x: &LocalElt) -> Result<UnitClass> {
        let p = self.p();
        let (o, mut w) = self.one_unit_part(x)?;
        let mut class = vec![0u64; p as usize + 1];
        class[0] = o as u64 % p;
        let one = self.ring.constant(1);
        for level in 1..=p as u32 {
            let v = self.ring.sub(&w, &one);
            let d = match self.ring.ord(&v) {
                None => 0,
                Some(ov) if ov > level => 0,
                Some(ov) if ov == level => self.ring.digit(&v, level),
                Some(ov) => {
                    return Err(internal(format!("level {ov} survived past its step")));
                }
            };
            let lead = self
                .ring
                .digit(&self.ring.sub(&self.gens[level as usize], &one), level);
            let c = arith::mul_mod(d, arith::inv_mod(lead, p).expect("unit digit"), p);
            class[level as usize] = c;
            w = self
                .ring
                .mul(&w, &self.inv_pows[level as usize][c as usize]);
        }
        let rest = self.ring.sub(&w, &one);
        if self.ring.ord(&rest).is_some_and(|o| o <= p as u32) {
            return Err(internal("filtration remainder is not a p-th power"));
        }
        Ok(UnitClass(class))
    }
}

/// exp(λ^i) truncated to the working precision (i ≥ 2).
fn exp_lambda_pow(ring: &Ring, i: u32) -> LocalElt {
    let p = ring.p;
    let w = ring.width() as u32;
    let mut c = vec![0u64; ring.width()];
    let mut fact_unit = 1u64;
    let mut fact_v = 0u32;
    let mut k = 0u32;
    // ord(λ^{ik}/k!) ≥ k(i−1) + 1
    while k == 0 || k * (i - 1) < ring.n {
        if k > 0 {
            let vk = arith::valuation(k as u64, p);
            fact_v += vk;
            fact_unit = arith::mul_mod(fact_unit, k as u64 / p.pow(vk), ring.modulus);
        }
        let level = i * k;
        let (a, j) = (level / w, level % w);
        if a - fact_v < ring.m {
            let pw = p.pow(a - fact_v);
            let inv = arith::inv_mod(fact_unit, ring.modulus).expect("unit part of k!");
            let mut term = arith::mul_mod(pw, inv, ring.modulus);
            if a % 2 == 1 {
                term = (ring.modulus - term) % ring.modulus;
            }
            c[j as usize] = (c[j as usize] + term) % ring.modulus;
        }
        k += 1;
    }
    ring.exact(c)
}
