//! Histograms, empirical entropy, normalized mutual information, fanout
//! tables, and their sensitivity bounds.

mod binning;
mod entropy;
mod fanout;
mod histogram;

pub use binning::{BinSpec, Binning, MAX_BINS};
pub use entropy::{entropy, nmi, nmi_sensitivity};
pub use fanout::{build_fanout, FanoutTable};
pub use histogram::{build_histogram, Histogram};

/// Sensitivity of a histogram under bounded neighbors: one record's value
/// change moves one unit between two bins.
pub const HISTOGRAM_SENSITIVITY: f64 = 2.0;

/// Same argument for fanout counts: one record's foreign key change moves one
/// unit between two entries.
pub const FANOUT_SENSITIVITY: f64 = 2.0;
