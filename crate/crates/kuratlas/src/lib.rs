//! Machinery for converting −2-shifted symplectic local models into
//! Kuranishi atlas data, at desk scale and with exact arithmetic wherever
//! the underlying identities are polynomial.
//!
//! The crate is organised as a tower:
//!
//! * [`exactalg`] — Gaussian-rational scalars, multivariate polynomials,
//!   and small dense linear algebra in exact and floating modes.
//! * [`darboux`] — local models `(m, n, q_j, s_j)` in −2-Darboux form and
//!   their derived geometry `V, E, F, s, t, ω, Q`.
//! * [`tangent`] — pointwise tangent-complex cohomology at zeros of `s`,
//!   the induced quadratic form `Q̃_v`, and virtual dimension.
//! * [`reduction`] — the negative-definite subbundle `E⁻`, conditions (*)
//!   and (†), reduction to `(E⁺, s⁺)`, and pullback/pushforward of `E⁻`
//!   along chart comparisons.
//! * [`kuranishi`] — Kuranishi charts, coordinate changes and atlases over
//!   a finite graph model of the underlying space.
//! * [`orientation`] — orientation transport along coordinate changes and
//!   the pointwise complex/real orientation correspondence.
//! * [`cover`] — shrinking chains and the closed families `C_J` on finite
//!   graph spaces.
//! * [`vcount`] — signed counting of zeros in virtual dimension 0,
//!   including planar local degrees by winding number.
//! * [`scenario`] / [`report`] — scenario file ingestion, pipeline
//!   orchestration and deterministic report emission for the CLI.
//!
//! All values are immutable after construction and all operations are
//! pure, so everything here is safe to use from multiple threads.

pub mod cover;
pub mod darboux;
pub mod exactalg;
pub mod kuranishi;
pub mod orientation;
pub mod reduction;
pub mod report;
pub mod scenario;
pub mod tangent;
pub mod vcount;

pub use exactalg::{GaussianRational, Polynomial, Rat};
