//! Threshold-detector click statistics for Gaussian states, plus a
//! truncated Fock-space oracle for small systems.

mod engine;
pub mod fock;
pub mod oracle;

pub use engine::{
    accidental_probability, coincidence_from_no_click, coincidence_probability, dark_mean, gaussian_no_click, no_click_expectation,
    singles_probability, ClickEvaluator, ClickQuery, DetectorSet, WEIGHT_FLOOR,
};
