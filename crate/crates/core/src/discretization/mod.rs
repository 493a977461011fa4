//! Spatial operators on the tensor mesh: metric-corrected coefficients,
//! per-direction tridiagonal lines, the explicit mixed-derivative stencil and
//! the boundary rules of each instrument.

mod boundary;
mod coefficients;
mod grid;
pub(crate) mod line;
mod mixed;

pub use boundary::{
    boundary_row, BoundaryFn, BoundaryRow, BoundarySpec, Face, FaceRule, InstrumentKind, OneSided,
};
pub use coefficients::{apply_metric, metric_coefficients, HjmModel, MetricCoefficients, PdeModel};
pub use grid::{Axes, Direction, Grid3};
pub use line::{
    apply_operator, assemble_line, assemble_line_r, assemble_line_v, assemble_line_y, operator_row,
    Stencil, TriDiagLine,
};
pub use mixed::{apply_mixed, mixed_at};
