//! Metric geometry of the Moyal plane on a truncated Fock space.
//!
//! The crate realizes the quantum coordinates of the Moyal plane as finite
//! matrices in the number basis and evaluates two competing notions of
//! length on its states:
//!
//! * the length operator `L` on the two-point tensor space and the quantum
//!   (square-)length it induces ([`lengthop`]);
//! * the Connes spectral distance of the Moyal Dirac operator, through closed
//!   forms, an exact diagonal linear program and a certified convex lower
//!   bound ([`spectral`]);
//!
//! together with the two-sheet doubling that reconciles them ([`doubling`])
//! and quadrature oracles for the star product ([`starprod`]).
//!
//! Every truncation artifact is controlled by the *leakage* of a state, the
//! probability mass it carries on the top `edge_guard` Fock levels.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod criteria;
pub mod doubling;
pub mod error;
pub mod fock;
pub mod lengthop;
pub mod linalg;
pub mod spectral;
pub mod starprod;
pub mod sweep;

pub use error::{MoyalError, Result};
pub use fock::{FockContext, Operator, QState, StateTag};
