//! Root numbers, local Kummer images and Selmer groups for the Jacobians of
//! the Fermat-curve quotients C: y^p = x^r(δ−x)^s, r + s + t = p.
//!
//! Modules, from the bottom up:
//! - [`arith`]: Legendre symbols, splitting data, the invariants u, d, B, Bernoulli numbers.
//! - [`finite_field`]: F_{ℓ^f}, the p-th power residue character, point counts.
//! - [`cyclotomic`]: ℤ[ω], Jacobi sums, CM types, Stickelberger, φ_ℓ, units E_i.
//! - [`local_field`]: K_Π = Q_p(λ), its generators u_0..u_p and class decomposition.
//! - [`root_number`]: local and global root numbers, conductors, α/τ.
//! - [`selmer`]: local images, the closed-form Selmer group and a direct kernel computation.
//! - [`parity`]: ε = (−1)^S checks and scans.
//! - [`density`]: the proportion of δ with ε = +1.

pub mod arith;
pub mod cyclotomic;
pub mod density;
pub mod error;
pub mod finite_field;
pub(crate) mod linalg;
pub mod local_field;
pub mod parity;
pub mod root_number;
pub mod selmer;

pub use arith::Triple;
pub use error::{Error, Result};
