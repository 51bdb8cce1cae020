//! Scattering transform of the Zakharov-Shabat system.
//!
//! The eigenproblem underlying the lossless nonlinear-Schrodinger channel is
//! solved on a piecewise-constant approximation of the signal. Two routes are
//! provided and kept mutually consistent:
//!
//! * **continuous layer peeling** ([`forward::clp_forward`],
//!   [`inverse::clp_inverse`]): per-frequency products of exact constant-cell
//!   transfer matrices, on an arbitrary spectral mesh;
//! * **discrete layer peeling** ([`forward::al_forward`],
//!   [`inverse::dlp_inverse`]): the Ablowitz-Ladik discretization, whose
//!   transfer matrices are polynomials in `z = exp(-2 j lambda step)`, so the
//!   scattering coefficients are Fourier series with period `pi / step` and
//!   the cell recursions are exact in coefficient space.

pub mod forward;
pub mod inverse;
mod types;

pub use forward::{
    al_forward, check_applicability, clp_forward, clp_forward_ratio, evaluate_polynomials,
    parseval_energy,
};
pub use inverse::{
    ab_from_qhat, check_discrete_unimodularity, clp_inverse, dlp_inverse, magnitude_a, phase_a,
    q_recovery_alternate, InversionReport, PHASE_RETRIEVAL_SIGN,
};
pub use types::{
    ApplicabilityReport, CellPropagator, CoefficientPolynomials, Regime, ScatteringData,
    DEFAULT_P_MAX, WELL_CONDITIONED_LIMIT,
};
