//! Lakes of Wada with variable subdivision: exact scales and counts, the
//! typed-square production system, and a raster oracle that checks both.

pub mod counting;
pub mod error;
pub mod raster;
pub mod rational;
pub mod sequence;
pub mod tiling;
pub mod verify;

pub use counting::{
    area_bounds_check, box_count_general, box_count_intermediate, box_count_standard, count_table,
    dimension_from_counts, island_area, squeeze_index, turning_count, CountTable,
};
pub use error::{Result, WadaError};
pub use raster::{rasterize, rasterize_at_level, BoxCountSample, Label, Raster, RasterConfig};
pub use sequence::{
    analytic_dimension, design_sequence, scales, Design, DimensionMethod, DimensionReport, ParamSequence,
};
pub use tiling::{run, run_census, Census, SquareType, Tiling, TilingConfig, TypedCell};
pub use verify::{verify, VerificationReport, VerifyConfig, SCHEMA};
