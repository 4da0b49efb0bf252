//! Piecewise-linear trigonometric systems on the unit cube: exact inner
//! products, Gram spectra and Riesz constants, trigonometric and Möbius
//! decompositions, and exact ReLU network realizations.
//!
//! ```
//! use rieszpl::{assemble_gram, canonical_system, gershgorin_radii};
//!
//! let g = assemble_gram(&canonical_system(1, 32, true), true).unwrap();
//! assert!(gershgorin_radii(&g).max_radius() <= 0.5 + 1e-12);
//! ```

pub mod basis;
pub mod error;
pub mod fourier;
pub mod gram;
pub mod numtheory;
pub mod oracle;
pub mod relunet;

pub use basis::{enumerate_indices, eval_c, eval_ridge, eval_s, BasisFunction, RidgeIndex, Shape};
pub use error::{Error, Result};
pub use fourier::{
    convolution_identity_check, decomposition_coefficients, fourier_expansion, mu_constant,
    tensor_decomposition_2d, DecompositionSeries, Factor, FourierExpansion, Parity,
};
pub use gram::{
    assemble_gram, canonical_system, extreme_eigenvalues, gershgorin_radii, inner_product_analytic,
    project_l2, riesz_quadratic_form, GershgorinReport, GramMatrix, Provenance, Rational,
    RieszBounds, SpectralSummary,
};
pub use numtheory::{euler_product_partial, moebius, odd_ratio, EulerProduct, OddRatio};
pub use oracle::{inner_product_oracle, project_oracle, QuadratureSpec};
pub use relunet::{
    bound_report, build_c_ridge, build_c_univariate, build_s_ridge, build_s_univariate, compose,
    deserialize, hat_network, identity_network, pad_depth, serialize, stack_combination,
    AffineLayer, BoundReport, ReluNetwork,
};
