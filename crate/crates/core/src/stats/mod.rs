//! Distribution diagnostics: dip test, KS distances, tail exponents, summaries.

pub mod dip;
pub mod ecdf;
pub mod ks;
pub mod meanfield;
pub mod summary;
pub mod tail;

pub use dip::{
    dip_pvalue, dip_sorted, dip_statistic, DipResult, NullCache, NullTable, Verdict, DEFAULT_NULL_REPS,
    SIGNIFICANCE_LEVELS,
};
pub use ecdf::{check_sorted, Ecdf};
pub use ks::{ks_distance, ks_distance_fn, ks_two_sample, Reference};
pub use meanfield::{meanfield_diagnostic, MeanfieldColumn, MeanfieldRow, MeanfieldTable};
pub use summary::{summarize, BinScale, DistributionSummary, Histogram, Moments, DEFAULT_BINS};
pub use tail::{quantile_grid, select_xmin, tail_exponent, tail_exponent_pooled, TailEstimate, TailFit, TailMethod, MIN_TAIL_SAMPLES};
