//! The cylinder ring ℝ[C][y]: arithmetic, structural checks, square-part
//! extraction and zero-set classification.

mod analysis;
mod poly;
mod square_part;
mod zero_set;

pub use analysis::{
    deg_and_leading, divide_sos_by_factor, probe_nonnegativity, weighted_scale, LeadingReport, Precheck,
};
pub(crate) use analysis::{y_minima, YMin};
pub use poly::CylinderPoly;
pub use square_part::{extract_real_square_part, SquareSplit};
pub use zero_set::{zero_set_analysis, ZeroClass, ZeroSetReport};
