//! Test-side oracles, written independently of the library code paths.
#![allow(dead_code)]

use fermat_descent::local_field::{LocalElt, LocalField};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

/// Bernoulli numbers B_0..B_n by the Akiyama–Tanigawa algorithm (B_1 = +1/2).
pub fn bernoulli_akiyama_tanigawa(n: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigRational::from_integer(BigInt::from(j));
        }
        out.push(a[0].clone());
    }
    out
}

/// Even k ≤ p−3 with p | numerator(B_k), from the oracle above.
pub fn irregular_indices(p: u64) -> Vec<u64> {
    if p < 5 {
        return Vec::new();
    }
    let b = bernoulli_akiyama_tanigawa(p as usize - 3);
    (2..=p - 3)
        .step_by(2)
        .filter(|&k| (b[k as usize].numer() % BigInt::from(p)).is_zero())
        .collect()
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Legendre symbol by listing the squares.
pub fn legendre_by_squares(a: i64, p: u64) -> i8 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    if (1..p).any(|x| x * x % p == a) {
        1
    } else {
        -1
    }
}

/// ord_p of a nonzero integer.
pub fn ord(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// x = λ^o·u for a random unit u, with coefficients drawn below p^5 so the same
/// integers can be read into fields of precision 4 and 5.
pub fn random_integers(p: u64, rng: &mut impl Rng) -> (u32, Vec<i64>) {
    let bound = p.pow(5) as i64;
    let mut c: Vec<i64> = (0..p - 1).map(|_| rng.gen_range(0..bound)).collect();
    while c[0] % p as i64 == 0 {
        c[0] = rng.gen_range(0..bound);
    }
    (rng.gen_range(0..2), c)
}

pub fn realize(k: &LocalField, o: u32, c: &[i64]) -> LocalElt {
    k.mul(&k.lambda_pow(o), &k.element(c).expect("coefficient count"))
}

/// ∏ u_i^{e_i}.
pub fn product_of_generators(k: &LocalField, e: &[u64]) -> LocalElt {
    let mut x = k.from_int(1);
    for (i, &ei) in e.iter().enumerate() {
        x = k.mul(&x, &k.pow(k.generator_u(i).expect("index in range"), ei));
    }
    x
}

/// Akiyama–Tanigawa sanity: B_2 = 1/6, B_4 = −1/30.
pub fn bernoulli_oracle_self_check() -> bool {
    let b = bernoulli_akiyama_tanigawa(4);
    b[2] == BigRational::new(1.into(), 6.into())
        && b[4] == BigRational::new((-1).into(), 30.into())
        && b[3].is_zero()
        && b[0].is_one()
}
