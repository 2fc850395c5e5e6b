//! Single-mode filtering of heralded photons from fiber four-wave-mixing
//! sources.
//!
//! The pipeline runs in five stages:
//!
//! * [`modes`]: gate + filter kernels and their Schmidt decomposition.
//! * [`source`]: Gaussian moments of the Stokes/anti-Stokes fields of one
//!   fiber spool (pair generation plus Raman noise).
//! * [`network`]: delay, 50:50 mixing and projection onto detector modes.
//! * [`detection`]: threshold-detector click probabilities, with a
//!   brute-force Fock-space oracle for validation.
//! * [`experiment`]: scenario configuration, delay scans, dip fits and
//!   count statistics.
//!
//! Internal units are SI throughout: angular frequency in rad/s, time in
//! seconds, energy in joules. Configuration keys carry explicit units and
//! are converted on load.

pub mod detection;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod linalg;
pub mod modes;
pub mod network;
pub mod source;
pub mod units;

pub use error::{Error, Result};
pub use grid::FrequencyGrid;

/// Complex scalar used for all field amplitudes and moment matrices.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
