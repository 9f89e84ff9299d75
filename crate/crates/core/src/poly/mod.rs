//! Polynomial arithmetic in ℝ[y] and in the circle ring ℝ[C].

mod circle;
mod format;
mod circle_ops;
mod norms;
pub mod roots;
mod univariate;

pub use circle::{CirclePoint, CirclePoly};
pub use circle_ops::{
    circle_sos, circle_zeros, factor_real_zero_part, factor_real_zero_part_exact,
    negativity_witness, poly_with_real_zeros, snap_rational_point, snap_rational_point_within, tangent_poly,
    tangent_poly_exact, ON_CIRCLE_TOL, SIGN_GRID,
};
pub use norms::{markov_beta, norm_bounds, perturbation_bound, sup_norm, NormBounds};
pub use format::format_terms;
pub use univariate::UnivariatePoly;
pub(crate) use univariate::forward_owned;
