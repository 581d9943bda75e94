//! Solver and verification kit for 1D semilinear hyperbolic systems
//!
//! The crate works with systems of the form
//!
//! ```text
//! d_t u_i + c_i d_x u_i + sum_{j,k} A_ijk u_j u_k = 0,     i = 1..p
//! ```
//!
//! where the quadratic coupling tensor is symmetric in its last two indices
//! and *non-resonant*: `A_ijk = 0` whenever the speeds `c_j` and `c_k`
//! coincide. Under that structure, counter-propagating waves can only
//! interact inside a bounded triangle of spacetime, and the total interaction
//! mass is controlled by the product of the incoming wave masses. The crate
//! makes all of this concrete on a grid:
//!
//! - [`system`]: system descriptions, non-resonance validation, the coupling
//!   strength `gamma`, and the quadratic interaction budget that bounds every
//!   fixed-point iterate.
//! - [`geometry`]: the interaction triangle determined by the data interval
//!   and the extreme speeds, plus per-characteristic crossing windows.
//! - [`fields`]: piecewise-linear initial data, spacetime grids, and L1
//!   quadrature over the triangle (exact cell clipping at the boundary).
//! - [`transport`]: exact-characteristic transport solves with a fast path
//!   for speed-aligned grids.
//! - [`picard`]: the fixed-point iteration itself, with per-iterate
//!   interaction masses measured against the budget.
//! - [`verify`]: grid-level checks of the supporting inequalities.
//! - [`stability`], [`glue`]: distance growth between solutions, and
//!   solving on a partition of the data followed by reassembly.
//! - [`blowup`]: a characteristic-marching probe that follows solutions of
//!   *resonant* systems until they leave any fixed bound.
//! - [`wave`]: reduction of compatible 2x2 systems to the quadratic
//!   semilinear wave equation, with a residual check.

pub mod blowup;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod glue;
pub mod oracle;
pub mod picard;
pub mod stability;
pub mod system;
pub mod transport;
pub mod verify;
pub mod wave;

pub use error::{Error, Result};
pub use fields::{Grid, GridField, InitialDatum};
pub use geometry::TriangleDomain;
pub use picard::{picard_solve, PicardReport, Verdict};
pub use system::{ContractionBudget, SystemSpec, ValidationReport};
