//! Data carriers and L1 bookkeeping: piecewise-linear initial data, uniform
//! space-time grids, and quadrature restricted to interaction triangles.

mod datum;
mod grid;
mod quadrature;

pub use datum::{l1_distance, InitialDatum};
pub use grid::{Grid, GridField};
pub use quadrature::{
    l1_over_grid, l1_over_triangle, l1_time_slice, product_l1_over_triangle, triple_norm,
    Region, TripleNorm,
};
pub(crate) use quadrature::l1_over_triangle_capped;
