//! Explicit finite fields F_{ℓ^f} as polynomial quotients, the p-th power
//! residue character, and point counting on y^p = x^r(δ−x)^s.

use crate::arith::{self, Triple};
use crate::error::{internal, invalid, Error, Result};

/// Largest field size for which a full character table (one byte per element) is built.
pub const TABLE_LIMIT: u128 = 1 << 24;

/// Largest field size enumerated element by element without a table.
pub const ENUMERATION_LIMIT: u128 = 1 << 26;

/// Element of F_{ℓ^f}: coefficients c_0..c_{f−1} of Σ c_i θ^i.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqElt(pub Vec<u64>);

/// The field F_q = F_ℓ[θ]/(m(θ)) with a fixed generator of F_q^×.
#[derive(Debug, Clone)]
pub struct FqField {
    ell: u64,
    f: usize,
    q: u128,
    /// Monic modulus, coefficients in ascending degree, length f + 1.
    modulus: Vec<u64>,
    generator: FqElt,
    /// Distinct primes dividing q − 1.
    order_primes: Vec<u64>,
}

// ---------------------------------------------------------------------------
// Polynomials over F_ℓ (ascending coefficients, no trailing zeros)
// ---------------------------------------------------------------------------

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_sub(a: &[u64], b: &[u64], ell: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + ell - y) % ell
        })
        .collect();
    trim(out)
}

fn poly_rem(a: &[u64], m: &[u64], ell: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = arith::inv_mod(m[dm], ell).expect("nonzero leading coefficient");
    while r.len() > dm {
        let top = r.len() - 1;
        let c = arith::mul_mod(r[top], lead_inv, ell);
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = top - dm + i;
                r[idx] = (r[idx] + ell - arith::mul_mod(c, mi, ell)) % ell;
            }
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn poly_mul(a: &[u64], b: &[u64], ell: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] += x as u128 * y as u128;
            if acc[i + j] >= 1 << 120 {
                acc[i + j] %= ell as u128;
            }
        }
    }
    trim(acc.into_iter().map(|c| (c % ell as u128) as u64).collect())
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], ell: u64) -> Vec<u64> {
    poly_rem(&poly_mul(a, b, ell), m, ell)
}

fn poly_powmod(base: &[u64], mut e: u128, m: &[u64], ell: u64) -> Vec<u64> {
    let mut acc = poly_rem(&[1], m, ell);
    let mut b = poly_rem(base, m, ell);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, ell);
        }
        b = poly_mulmod(&b, &b, m, ell);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], ell: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, ell);
        a = b;
        b = r;
    }
    a
}

/// Rabin's irreducibility test for a monic polynomial of degree f over F_ℓ.
fn is_irreducible(m: &[u64], ell: u64) -> bool {
    let f = m.len() - 1;
    if f == 1 {
        return true;
    }
    let x = vec![0, 1];
    // frob[k] = x^{ℓ^k} mod m
    let mut frob = vec![poly_rem(&x, m, ell)];
    for k in 1..=f {
        let next = poly_powmod(&frob[k - 1], ell as u128, m, ell);
        frob.push(next);
    }
    if poly_sub(&frob[f], &x, ell) != Vec::<u64>::new() {
        return false;
    }
    arith::factor(f as u64).into_iter().all(|(d, _)| {
        let diff = poly_sub(&frob[f / d as usize], &x, ell);
        let g = poly_gcd(&diff, m, ell);
        g.len() == 1
    })
}

/// Primes dividing ℓ^f − 1, via the cyclotomic factorization ℓ^f − 1 = ∏_{d | f} Φ_d(ℓ).
fn primes_of_order(ell: u64, f: usize) -> Result<Vec<u64>> {
    let divisors: Vec<usize> = (1..=f).filter(|d| f % d == 0).collect();
    let mut phi_values: Vec<(usize, u128)> = Vec::new();
    let mut primes = Vec::new();
    for &d in &divisors {
        let mut v = (ell as u128).pow(d as u32) - 1;
        for &(e, pe) in &phi_values {
            if d % e == 0 {
                v /= pe;
            }
        }
        phi_values.push((d, v));
        let small = u64::try_from(v)
            .map_err(|_| Error::TooLarge(format!("Φ_{d}({ell}) does not fit in 64 bits")))?;
        primes.extend(arith::factor(small).into_iter().map(|(q, _)| q));
    }
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

fn digits(mut n: u128, ell: u64, f: usize) -> Vec<u64> {
    (0..f)
        .map(|_| {
            let d = (n % ell as u128) as u64;
            n /= ell as u128;
            d
        })
        .collect()
}

/// Deterministic construction of F_{ℓ^f}.
///
/// The modulus is the first monic irreducible polynomial when the lower
/// coefficients are read as base-ℓ digits (constant term least significant);
/// the generator is the first primitive element in the same ordering.
pub fn build_field(ell: u64, f: usize) -> Result<FqField> {
    if !arith::is_prime(ell) || f == 0 {
        return Err(invalid(format!("cannot build F_{{{ell}^{f}}}")));
    }
    let q = (ell as u128)
        .checked_pow(f as u32)
        .filter(|&q| q < 1 << 100)
        .ok_or_else(|| Error::TooLarge(format!("{ell}^{f} exceeds the supported field size")))?;
    let tail_count = (ell as u128).pow(f as u32);
    let mut modulus = None;
    for n in 0..tail_count {
        let mut m = digits(n, ell, f);
        m.push(1);
        if is_irreducible(&m, ell) {
            modulus = Some(m);
            break;
        }
    }
    let modulus =
        modulus.ok_or_else(|| internal(format!("no irreducible of degree {f} over F_{ell}")))?;
    let order_primes = primes_of_order(ell, f)?;
    let mut field = FqField {
        ell,
        f,
        q,
        modulus,
        generator: FqElt(vec![0; f]),
        order_primes,
    };
    for n in 1..q {
        let cand = field.decode(n);
        if field.is_primitive(&cand) {
            field.generator = cand;
            return Ok(field);
        }
    }
    Err(internal(format!("no generator found for F_{{{ell}^{f}}}")))
}

impl FqField {
    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn q(&self) -> u128 {
        self.q
    }

    /// Monic modulus, ascending coefficients.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn generator(&self) -> &FqElt {
        &self.generator
    }

    pub fn zero(&self) -> FqElt {
        FqElt(vec![0; self.f])
    }

    pub fn one(&self) -> FqElt {
        self.from_int(1)
    }

    /// Image of a rational integer.
    pub fn from_int(&self, n: i64) -> FqElt {
        let mut c = vec![0; self.f];
        c[0] = arith::residue(n, self.ell);
        FqElt(c)
    }

    /// Image of an integer already reduced mod ℓ.
    pub fn from_residue(&self, n: u64) -> FqElt {
        let mut c = vec![0; self.f];
        c[0] = n % self.ell;
        FqElt(c)
    }

    /// The class θ of the polynomial variable (equal to −m(0) when f = 1).
    pub fn theta(&self) -> FqElt {
        self.reduce_poly(&[0, 1])
    }

    fn reduce_poly(&self, a: &[u64]) -> FqElt {
        let r = poly_rem(a, &self.modulus, self.ell);
        let mut c = vec![0; self.f];
        c[..r.len()].copy_from_slice(&r);
        FqElt(c)
    }

    /// Base-ℓ index of an element (constant term least significant).
    pub fn encode(&self, x: &FqElt) -> u128 {
        x.0.iter()
            .rev()
            .fold(0u128, |acc, &c| acc * self.ell as u128 + c as u128)
    }

    /// Inverse of [`FqField::encode`].
    pub fn decode(&self, n: u128) -> FqElt {
        FqElt(digits(n, self.ell, self.f))
    }

    pub fn is_zero(&self, x: &FqElt) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElt, b: &FqElt) -> FqElt {
        FqElt(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (x + y) % self.ell)
                .collect(),
        )
    }

    pub fn sub(&self, a: &FqElt, b: &FqElt) -> FqElt {
        FqElt(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| (x + self.ell - y) % self.ell)
                .collect(),
        )
    }

    pub fn neg(&self, a: &FqElt) -> FqElt {
        FqElt(a.0.iter().map(|&x| (self.ell - x) % self.ell).collect())
    }

    pub fn mul(&self, a: &FqElt, b: &FqElt) -> FqElt {
        self.reduce_poly(&poly_mul(&trim(a.0.clone()), &trim(b.0.clone()), self.ell))
    }

    pub fn pow(&self, a: &FqElt, e: u128) -> FqElt {
        let r = poly_powmod(&trim(a.0.clone()), e, &self.modulus, self.ell);
        self.reduce_poly(&r)
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: &FqElt) -> Result<FqElt> {
        if self.is_zero(a) {
            return Err(invalid("inverse of zero"));
        }
        Ok(self.pow(a, self.q - 2))
    }

    fn is_primitive(&self, x: &FqElt) -> bool {
        if self.is_zero(x) {
            return false;
        }
        let one = self.one();
        self.order_primes
            .iter()
            .all(|&r| self.pow(x, (self.q - 1) / r as u128) != one)
    }

    /// The p-th power residue character χ with the default labelling ζ_p = g^{(q−1)/p}.
    pub fn character(&self, p: u64) -> Result<PowerResidueChar> {
        if p < 2 || (self.q - 1) % p as u128 != 0 {
            return Err(invalid(format!(
                "{p} does not divide q − 1 = {}",
                self.q - 1
            )));
        }
        let exponent = (self.q - 1) / p as u128;
        let zeta = self.pow(&self.generator, exponent);
        PowerResidueChar::new(self, p, zeta)
    }

    /// Elements of the subfield F_Q, Q = ℓ^{f/2}, for even f.
    fn half_subfield(&self) -> Vec<FqElt> {
        let big_q = (self.ell as u128).pow(self.f as u32 / 2);
        let h = self.pow(&self.generator, big_q + 1);
        let mut out = vec![self.zero()];
        let mut x = self.one();
        for _ in 0..big_q - 1 {
            out.push(x.clone());
            x = self.mul(&x, &h);
        }
        out
    }

    /// χ on representatives of F_q^× / F_Q^× (f even): the first entry is the
    /// class of 1, followed by g + c for every c ∈ F_Q.
    pub fn half_subfield_class_characters(&self, chi: &PowerResidueChar) -> Result<Vec<u64>> {
        if self.f % 2 != 0 {
            return Err(invalid("class decomposition needs an even degree"));
        }
        let mut out = vec![0];
        for c in self.half_subfield() {
            let rep = self.add(&self.generator, &c);
            out.push(chi.exponent_of(self, &rep)?);
        }
        Ok(out)
    }

    /// Table of χ exponents indexed by [`FqField::encode`]; entry 0 is unused.
    pub fn character_table(&self, chi: &PowerResidueChar) -> Result<Vec<u8>> {
        if self.q > TABLE_LIMIT {
            return Err(Error::TooLarge(format!("no χ table for q = {}", self.q)));
        }
        let p = chi.p;
        // χ(g^k) = k·χ(g)
        let step = chi.exponent_of(self, &self.generator)?;
        let mut table = vec![0u8; self.q as usize];
        let mut x = self.one();
        let mut k = 0u64;
        for _ in 0..self.q - 1 {
            table[self.encode(&x) as usize] = k as u8;
            x = self.mul(&x, &self.generator);
            k = (k + step) % p;
        }
        Ok(table)
    }
}

/// The character χ(x) = ζ_p^k where x^{(q−1)/p} = ζ_p^k.
#[derive(Debug, Clone)]
pub struct PowerResidueChar {
    p: u64,
    exponent: u128,
    zeta: FqElt,
    zeta_powers: Vec<FqElt>,
}

impl PowerResidueChar {
    fn new(field: &FqField, p: u64, zeta: FqElt) -> Result<Self> {
        let mut zeta_powers = vec![field.one()];
        for k in 1..p {
            let next = field.mul(&zeta_powers[k as usize - 1], &zeta);
            zeta_powers.push(next);
        }
        if field.mul(&zeta_powers[p as usize - 1], &zeta) != field.one()
            || zeta_powers[1..].iter().any(|z| *z == field.one())
        {
            return Err(internal("ζ_p does not have exact order p"));
        }
        Ok(Self {
            p,
            exponent: (field.q - 1) / p as u128,
            zeta,
            zeta_powers,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The fixed primitive p-th root of unity.
    pub fn zeta(&self) -> &FqElt {
        &self.zeta
    }

    /// The same character with ζ_p replaced by ζ_p^a.
    pub fn relabel(&self, field: &FqField, a: u64) -> Result<Self> {
        if a % self.p == 0 {
            return Err(invalid("relabelling exponent must be prime to p"));
        }
        Self::new(
            field,
            self.p,
            self.zeta_powers[(a % self.p) as usize].clone(),
        )
    }

    /// The exponent k ∈ Z/p with χ(c) = ζ_p^k.
    pub fn exponent_of(&self, field: &FqField, c: &FqElt) -> Result<u64> {
        if field.is_zero(c) {
            return Err(invalid("χ(0) is undefined"));
        }
        let w = field.pow(c, self.exponent);
        self.zeta_powers
            .iter()
            .position(|z| *z == w)
            .map(|k| k as u64)
            .ok_or_else(|| internal("c^{(q−1)/p} is not a p-th root of unity"))
    }
}

/// χ exponent of c with the field's default labelling.
pub fn chi_exponent(field: &FqField, c: &FqElt, p: u64) -> Result<u64> {
    field.character(p)?.exponent_of(field, c)
}

fn check_curve_args(field: &FqField, triple: &Triple, delta: i64) -> Result<()> {
    let ell = field.ell;
    if ell == triple.p || arith::residue(delta, ell) == 0 {
        return Err(invalid(format!(
            "ℓ = {ell} divides pδ = {}·{delta}",
            triple.p
        )));
    }
    Ok(())
}

/// #{(x,y) ∈ F_q² : y^p = x^r(δ−x)^s} by enumeration over x.
pub fn count_affine_points(field: &FqField, triple: &Triple, delta: i64) -> Result<u64> {
    check_curve_args(field, triple, delta)?;
    let q = field.q;
    if q > ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!("point count over q = {q}")));
    }
    let p = triple.p;
    let d = field.from_int(delta);
    let curve = |x: &FqElt| {
        let a = field.pow(x, triple.r as u128);
        let b = field.pow(&field.sub(&d, x), triple.s as u128);
        field.mul(&a, &b)
    };
    if (q - 1) % p as u128 == 0 {
        let chi = field.character(p)?;
        let table = if q <= TABLE_LIMIT {
            Some(field.character_table(&chi)?)
        } else {
            None
        };
        let mut count = 0u64;
        for n in 0..q {
            let x = field.decode(n);
            let dx = field.sub(&d, &x);
            if field.is_zero(&x) || field.is_zero(&dx) {
                count += 1;
                continue;
            }
            let k = match &table {
                Some(t) => {
                    (triple.r * t[n as usize] as u64
                        + triple.s * t[field.encode(&dx) as usize] as u64)
                        % p
                }
                None => chi.exponent_of(field, &curve(&x))?,
            };
            if k == 0 {
                count += p;
            }
        }
        return Ok(count);
    }
    if q > TABLE_LIMIT {
        return Err(Error::TooLarge(format!("y-enumeration over q = {q}")));
    }
    let mut hist = vec![0u32; q as usize];
    for n in 0..q {
        let y = field.decode(n);
        hist[field.encode(&field.pow(&y, p as u128)) as usize] += 1;
    }
    Ok((0..q)
        .map(|n| hist[field.encode(&curve(&field.decode(n))) as usize] as u64)
        .sum())
}

/// Number of points at infinity on the smooth model of y^p = x^r(δ−x)^s.
///
/// Over x = ∞ the function F has order −(r+s), so the fibre consists of
/// gcd(r+s, p) places; likewise the fibres over 0 and δ have gcd(r,p) and
/// gcd(s,p) places, each matched by the single affine point (x, 0).
pub fn points_at_infinity(triple: &Triple) -> u64 {
    use num_integer::Integer;
    (triple.r + triple.s).gcd(&triple.p)
}

/// Numerator P_ℓ(T) = Σ a_k T^k of the zeta function of the smooth projective curve.
pub fn zeta_numerator(ell: u64, triple: &Triple, delta: i64) -> Result<Vec<i128>> {
    let p = triple.p;
    let genus2 = (p - 1) as usize;
    let mut power_sums = Vec::with_capacity(genus2);
    for m in 1..=genus2 {
        let field = build_field(ell, m)?;
        let projective = count_affine_points(&field, triple, delta)? + points_at_infinity(triple);
        power_sums.push(field.q as i128 + 1 - projective as i128);
    }
    // Newton: k e_k = Σ_{i=1}^{k} (−1)^{i−1} e_{k−i} s_i
    let mut e = vec![1i128];
    for k in 1..=genus2 {
        let mut acc = 0i128;
        for i in 1..=k {
            let term = e[k - i] * power_sums[i - 1];
            acc += if i % 2 == 1 { term } else { -term };
        }
        if acc % k as i128 != 0 {
            return Err(internal(
                "Newton identities produced a non-integral coefficient",
            ));
        }
        e.push(acc / k as i128);
    }
    let poly: Vec<i128> = e
        .iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
        .collect();
    let top = (ell as i128).pow(genus2 as u32 / 2);
    if poly[genus2].abs() != top {
        return Err(internal(format!(
            "leading coefficient {} is not ±{ell}^{}",
            poly[genus2],
            genus2 / 2
        )));
    }
    Ok(poly)
}

/// The sign η with T^{2g} ℓ^g P(1/(ℓT)) = η P(T), if the symmetry holds.
pub fn functional_equation_sign(poly: &[i128], ell: u64) -> Option<i8> {
    let n = poly.len() - 1;
    let g = n / 2;
    let ell = ell as i128;
    // coefficient of T^j on the left is a_{n−j} ℓ^{j−g}
    let mirrored = |j: usize| -> Option<i128> {
        let a = poly[n - j];
        if j >= g {
            Some(a * ell.pow((j - g) as u32))
        } else {
            let den = ell.pow((g - j) as u32);
            (a % den == 0).then(|| a / den)
        }
    };
    for sign in [1i8, -1] {
        if (0..=n).all(|j| mirrored(j) == Some(sign as i128 * poly[j])) {
            return Some(sign);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields() {
        let f7 = build_field(7, 1).unwrap();
        assert_eq!(f7.generator().0, vec![3]);
        let f16 = build_field(2, 4).unwrap();
        assert_eq!(f16.q(), 16);
        assert_eq!(f16.modulus(), &[1, 1, 0, 0, 1]);
        let f243 = build_field(3, 5).unwrap();
        assert_eq!(f243.q(), 243);
    }

    #[test]
    fn rabin_rejects_mixed_degree_products() {
        // (x^3 + 2x + 1)(x^2 + 1)(x + 1) over F_3 has factor degrees 3, 2, 1 dividing 6.
        let a = poly_mul(&[1, 2, 0, 1], &[1, 0, 1], 3);
        let m = poly_mul(&a, &[1, 1], 3);
        assert_eq!(m.len(), 7);
        assert!(!is_irreducible(&m, 3));
    }

    #[test]
    fn chi_examples() {
        let f7 = build_field(7, 1).unwrap();
        assert_eq!(chi_exponent(&f7, &f7.one(), 3).unwrap(), 0);
        let cubes = (1..7)
            .filter(|&n| chi_exponent(&f7, &f7.from_int(n), 3).unwrap() == 0)
            .count();
        assert_eq!(cubes, 2);
        let f16 = build_field(2, 4).unwrap();
        assert_ne!(chi_exponent(&f16, f16.generator(), 5).unwrap(), 0);
        assert!(chi_exponent(&f16, &f16.zero(), 5).is_err());
        assert!(chi_exponent(&f7, &f7.one(), 5).is_err());
    }

    #[test]
    fn count_examples() {
        let f5 = build_field(5, 1).unwrap();
        let t = Triple::new(1, 1, 1, 3).unwrap();
        assert_eq!(count_affine_points(&f5, &t, 1).unwrap(), 5);
        let f7 = build_field(7, 1).unwrap();
        let n = count_affine_points(&f7, &t, 1).unwrap() as f64;
        let bound = 2.0 * 2.0 * 7f64.sqrt();
        assert!((n - 7.0).abs() <= bound);
        assert!(count_affine_points(&f7, &t, 7).is_err());
    }

    #[test]
    fn zeta_numerator_p3() {
        let t = Triple::new(1, 1, 1, 3).unwrap();
        let poly = zeta_numerator(7, &t, 1).unwrap();
        assert_eq!(poly.len(), 3);
        assert_eq!(poly[0], 1);
        assert_eq!(poly[2], 7);
        assert!((poly[1] as f64).abs() <= 2.0 * 7f64.sqrt());
        assert_eq!(functional_equation_sign(&poly, 7), Some(1));
    }
}
