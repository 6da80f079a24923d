//! The two private partitioning mechanisms: a noisy 2-means row split and an
//! exponential-mechanism column split scored by normalized mutual
//! information.

mod col;
mod row;

pub use col::col_split;
pub use row::row_split;

/// Parameters shared by the splitting mechanisms.
#[derive(Clone, Copy, Debug)]
pub struct SplitConfig {
    /// Number of clustering iterations (J).
    pub iterations: u32,
    /// Minimum rows per side after the split (beta).
    pub min_side: u64,
}

impl SplitConfig {
    pub fn new(iterations: u32, min_side: u64) -> crate::error::Result<Self> {
        if iterations < 1 {
            return Err(crate::error::Error::Config(
                "iterations must be >= 1".into(),
            ));
        }
        if min_side < 1 {
            return Err(crate::error::Error::Config(
                "minimum table size must be >= 1".into(),
            ));
        }
        Ok(SplitConfig {
            iterations,
            min_side,
        })
    }
}
