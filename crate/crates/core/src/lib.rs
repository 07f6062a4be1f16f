//! Correlation screening for networks whose nodes are groups of dependent
//! variables.
//!
//! Each pair of groups (regions) is summarized by the full distribution of
//! its pairwise inter-correlations rather than by the correlation of the
//! group averages. A per-pair critical threshold is derived from surrogate
//! data with zero population inter-correlation and an intra-correlation
//! matched to the observed regions, and an edge is declared when the
//! fraction of inter-correlations exceeding that threshold is above an
//! exceedance level.
//!
//! Module map:
//!
//! * [`dataset`]: region time series, CSV ingestion, network/truth JSON.
//! * [`correlation`]: Pearson kernels, U-scores, empirical distributions,
//!   Wasserstein distance and the Elston variance.
//! * [`discovery`]: discovery counts and their normalized expressions.
//! * [`synthesis`]: block-Toeplitz Gaussian simulation and surrogates.
//! * [`thresholds`]: FWER, quantile, Poli and phase-transition thresholds.
//! * [`inference`]: the correlation-screening (CS) and
//!   correlation-of-averages (CA) pipelines.
//! * [`evaluation`]: confusion metrics and the benchmark harnesses.

pub mod correlation;
pub mod dataset;
pub mod discovery;
pub mod error;
pub mod evaluation;
pub mod inference;
pub mod io;
pub mod render;
pub mod rng;
pub mod synthesis;
pub mod thresholds;

pub use correlation::{EmpiricalDistribution, Signedness, UScoreMatrix};
pub use dataset::{
    BinaryNetwork, Dataset, EdgeRecord, GroundTruthNetwork, RegionTimeSeries, TruthEdge,
};
pub use error::{Error, Result};
pub use inference::{InferenceConfig, Pipeline};
pub use synthesis::{SimulationConfig, SurrogateSpec, ToeplitzDecay, ToeplitzSpec};
pub use thresholds::ThresholdMethod;
