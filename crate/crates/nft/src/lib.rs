//! Fiber-optic transmission toolkit built around the scattering transform of
//! the nonlinear Schrodinger equation.
//!
//! The crate provides, in normalized units:
//!
//! * uniform time/frequency meshes with Fourier and Hilbert transforms and
//!   energy/duration/bandwidth measures ([`grid`], [`fourier`], [`measure`]);
//! * forward and inverse scattering on the Zakharov-Shabat system, both as
//!   per-frequency layer peeling and as polynomial (Ablowitz-Ladik)
//!   coefficient recursions ([`zs`]);
//! * a split-step stochastic nonlinear-Schrodinger channel with digital
//!   back-propagation ([`channel`]);
//! * multi-user transceivers multiplexing either in the nonlinear spectrum
//!   ([`nfdm`]) or in ordinary frequency bands ([`wdm`]);
//! * achievable-rate estimation: ring constellations, Monte-Carlo transition
//!   histograms and constrained Blahut-Arimoto mutual information ([`rate`]).

pub mod channel;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod measure;
pub mod nfdm;
pub mod pulse;
pub mod rate;
pub mod wdm;
pub mod zs;

pub use error::{Error, Result};
pub use grid::{relative_l2, SpectralGrid, SpectralSignal, TimeGrid, TimeSignal};

/// Complex sample type used throughout.
pub type Complex = num_complex::Complex64;
