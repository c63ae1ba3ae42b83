//! Polynomial quotients modulo an odd prime.
//!
//! For an odd prime `p` and `w >= 1` the polynomial quotient is
//! `q_{p,w}(u) = (u^w - u^{wp}) / p mod p`; `w = p - 1` gives the Fermat
//! quotient. This crate evaluates these maps exactly and computes the
//! statistics built on top of them: value sets, interpolation counts and
//! fixed points, iterated sumsets and Waring numbers, additive character
//! sums, and the analogous quotients in `F_q[X]/(P)`.
//!
//! Heavy kernels run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise; see [`Exec`].

pub mod arith;
pub mod charsum;
mod error;
mod exec;
pub mod funcfield;
pub mod quotient;
pub mod spectrum;
pub mod verifier;
pub mod waring;

pub use arith::PrimeContext;
pub use error::{Error, Result};
pub use exec::Exec;
