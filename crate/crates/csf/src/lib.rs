//! Standard-library companion to `csf-core`: IMS and CSV ingest, JSON
//! reports, two-branch (raw vs. CSF-filtered) assessment and
//! classification pipelines, and the `csf` command-line tool.

pub mod error;
pub mod formats;
pub mod gradcheck;
pub mod ingest;
pub mod pipeline;

pub use error::{Error, Result};
