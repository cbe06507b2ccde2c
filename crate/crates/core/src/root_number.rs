//! Global root numbers ε(π_{r,s,t;δ}) as products of local signs.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::arith::{self, Triple};
use crate::error::{internal, invalid, Result};

/// A place of Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Place {
    Infinity,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(l) => write!(f, "{l}"),
        }
    }
}

/// Local signs and their product for one (triple, δ).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootNumberReport {
    pub p: u64,
    pub r: u64,
    pub s: u64,
    pub t: u64,
    /// Canonical δ (exponents reduced mod p).
    pub delta: i64,
    pub eps_inf: i8,
    pub eps_p: i8,
    /// (ℓ, ε_ℓ) for primes ℓ ≠ p dividing δ, ascending.
    pub eps_ell: Vec<(u64, i8)>,
    /// u(X) for X = r^r s^s (t−p)^t δ^{r+s}.
    pub u_x: u32,
    /// d mod p when u(X) ≤ 1.
    pub d: Option<u64>,
    pub global: i8,
}

impl RootNumberReport {
    pub fn triple(&self) -> Triple {
        Triple {
            r: self.r,
            s: self.s,
            t: self.t,
            p: self.p,
        }
    }

    /// Sign at a place; +1 at primes not dividing pδ.
    pub fn local(&self, place: Place) -> i8 {
        match place {
            Place::Infinity => self.eps_inf,
            Place::Prime(l) if l == self.p => self.eps_p,
            Place::Prime(l) => self
                .eps_ell
                .iter()
                .find(|(q, _)| *q == l)
                .map_or(1, |&(_, e)| e),
        }
    }
}

fn check_delta(delta: i64) -> Result<()> {
    if delta == 0 {
        return Err(invalid("δ must be nonzero"));
    }
    Ok(())
}

/// ε_p from u(X) and d.
fn eps_at_p(triple: &Triple, delta: i64) -> Result<(i8, arith::XInvariant)> {
    let p = triple.p;
    let x = arith::x_invariant(triple, delta)?;
    let rst = triple.r * triple.s % p * triple.t % p;
    let eps = match (x.u, x.d) {
        (0, Some(d)) => -arith::legendre_unchecked(p - rst * d % p, p),
        (1, Some(d)) => -arith::legendre_unchecked(rst * d % p, p),
        (u, _) if u >= 2 => arith::legendre_unchecked(p - 2, p),
        _ => return Err(internal("u(X) ≤ 1 without d")),
    };
    if eps == 0 {
        return Err(internal(format!("vanishing Legendre symbol in ε_{p}")));
    }
    Ok((eps, x))
}

/// The local root number at `place`.
pub fn epsilon_local(place: Place, triple: &Triple, delta: i64) -> Result<i8> {
    check_delta(delta)?;
    let p = triple.p;
    match place {
        Place::Infinity => arith::legendre(-1, p),
        Place::Prime(l) if l == p => Ok(eps_at_p(triple, delta)?.0),
        Place::Prime(l) => {
            if !arith::is_prime(l) {
                return Err(invalid(format!("{l} is not prime")));
            }
            let red = arith::reduce_delta(delta, p)?;
            if red.factors.iter().any(|&(q, _)| q == l) {
                arith::legendre(l as i64, p)
            } else {
                Ok(1)
            }
        }
    }
}

/// ε(π_{r,s,t;δ}) with its local factors.
pub fn epsilon_global(triple: &Triple, delta: i64) -> Result<RootNumberReport> {
    check_delta(delta)?;
    let p = triple.p;
    let red = arith::reduce_delta(delta, p)?;
    let eps_inf = arith::legendre(-1, p)?;
    let (eps_p, x) = eps_at_p(triple, red.delta)?;
    let eps_ell: Vec<(u64, i8)> = red
        .factors
        .iter()
        .filter(|&&(q, _)| q != p)
        .map(|&(q, _)| (q, arith::legendre_unchecked(q % p, p)))
        .collect();
    let global = eps_ell.iter().fold(eps_inf * eps_p, |acc, &(_, e)| acc * e);
    Ok(RootNumberReport {
        p,
        r: triple.r,
        s: triple.s,
        t: triple.t,
        delta: red.delta,
        eps_inf,
        eps_p,
        eps_ell,
        u_x: x.u,
        d: x.d,
        global,
    })
}

/// The sign at 3 for p = 3: −1 iff δ ≡ ±1 mod 9 or ord_3 δ = 1.
pub fn epsilon_p3(delta: i64) -> Result<i8> {
    check_delta(delta)?;
    let red = arith::reduce_delta(delta, 3)?;
    let m9 = arith::residue(red.delta, 9);
    Ok(if m9 == 1 || m9 == 8 || red.ord_p(3) == 1 {
        -1
    } else {
        1
    })
}

/// ε = (−1)^{α+τ} with τ the number of primes ℓ | δ, ℓ ≠ p, that are non-residues mod p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaTau {
    pub alpha: u8,
    pub tau: u32,
}

pub fn alpha_tau(triple: &Triple, delta: i64) -> Result<AlphaTau> {
    let rep = epsilon_global(triple, delta)?;
    let tau = rep.eps_ell.iter().filter(|(_, e)| *e == -1).count() as u32;
    let alpha = u8::from(rep.eps_inf * rep.eps_p == -1);
    Ok(AlphaTau { alpha, tau })
}

/// Conductor exponents at the places of K above pδ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConductorExponents {
    /// Exponent of the Hecke character φ_δ at Π.
    pub c_pi: u32,
    /// Exponent of the CM character at Π.
    pub n_pi: u32,
    /// (ℓ, exponent) at the places above primes ℓ ≠ p dividing δ.
    pub c_v: Vec<(u64, u32)>,
}

pub fn conductor_exponents(triple: &Triple, delta: i64) -> Result<ConductorExponents> {
    check_delta(delta)?;
    let p = triple.p;
    let red = arith::reduce_delta(delta, p)?;
    let x = arith::x_invariant(triple, red.delta)?;
    let c_pi = match x.u {
        0 => p as u32 + 1,
        1 => 2,
        _ => 1,
    };
    let c_v = red
        .factors
        .iter()
        .filter(|&&(q, _)| q != p)
        .map(|&(q, _)| (q, 1))
        .collect();
    Ok(ConductorExponents { c_pi, n_pi: 1, c_v })
}
