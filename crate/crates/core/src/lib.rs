//! Sparse-filter impulsive signature enhancement for rotating-machinery
//! vibration data.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! pieces of the pipeline:
//!
//! - [`signal`]: signal containers, valid (Hankel) convolution, analytic
//!   envelope, autocorrelation and envelope spectrum.
//! - [`sparse_filter`]: the single-neuron convolutional sparse filter
//!   (l1/l2 cost with a soft absolute value, minimized by L-BFGS) and the
//!   classical MED filter it is compared against.
//! - [`features`]: scale-invariant health features (kurtosis, l_p/l_q
//!   norms, band-limited envelope harmonic-to-noise ratio).
//! - [`simulate`]: synthetic bearing fault signals.
//! - [`health`]: SOM / MQE health assessment, PCA, k-means and VAT.
//!
//! File formats, dataset ingestion and the command line live in the `csf`
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod features;
pub mod fft;
pub mod health;
pub mod linalg;
pub mod optim;
pub mod signal;
pub mod simulate;
pub mod sparse_filter;

pub use error::{Error, Result};
pub use features::{
    blehnr, extract_feature_vector, fault_frequencies, kurtosis, lp_lq_norm, BearingGeometry,
    FaultFrequencies, FeatureVector,
};
pub use signal::{autocorrelation, convolve_valid, envelope_spectrum, hilbert_envelope, Acf, Signal, Spectrum};
pub use sparse_filter::{
    csf_cost, csf_cost_multi, csf_gradient, fit_med, fit_simplified_csf, CsfConfig, CsfResult, InitScheme,
};
