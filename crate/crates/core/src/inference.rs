//! Network construction.
//!
//! CS (correlation screening): for every pair of regions, build the
//! surrogate null, derive the pair threshold, and declare an edge when the
//! fraction of absolute inter-correlations strictly above it exceeds the
//! exceedance level.
//!
//! CA (correlation of averages): correlate the regional mean signals and
//! compare the single coefficient with the same per-pair threshold.

use ndarray::Array1;
use rayon::prelude::*;

use crate::correlation::{column_means, inter_correlations, pearson_view, EmpiricalDistribution};
use crate::dataset::{BinaryNetwork, Dataset, EdgeRecord, RegionTimeSeries};
use crate::discovery::nu_e_hat;
use crate::error::{Error, Result};
use crate::thresholds::{apply_method, surrogate_for_pair, SurrogateNull, ThresholdMethod};

pub const DEFAULT_EXCEEDANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Cs,
    Ca,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Cs => "cs",
            Pipeline::Ca => "ca",
        }
    }
}

impl std::str::FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" => Ok(Pipeline::Cs),
            "ca" => Ok(Pipeline::Ca),
            other => Err(Error::usage(format!("unknown pipeline `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig {
    pub method: ThresholdMethod,
    pub exceedance_level: f64,
    pub surrogate_reps: usize,
    pub seed: u64,
    pub pipeline: Pipeline,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            method: ThresholdMethod::Quantile { alpha: 0.0 },
            exceedance_level: DEFAULT_EXCEEDANCE_LEVEL,
            surrogate_reps: 1,
            seed: 0,
            pipeline: Pipeline::Cs,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.exceedance_level) {
            return Err(Error::usage(format!(
                "exceedance level {} outside [0, 1)",
                self.exceedance_level
            )));
        }
        if self.surrogate_reps == 0 {
            return Err(Error::usage("surrogate reps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDecision {
    pub exceedance: f64,
    pub detected: bool,
}

/// Exceedance is the fraction of `|R| > rho`; an edge needs it strictly
/// above `level`.
pub fn decide_edge_cs(inter: &EmpiricalDistribution, rho: f64, level: f64) -> EdgeDecision {
    let exceedance = nu_e_hat(inter, rho);
    EdgeDecision {
        exceedance,
        detected: exceedance > level,
    }
}

/// Mean signal over the voxels of a region.
pub fn regional_average(a: &RegionTimeSeries) -> Array1<f64> {
    column_means(a.values.view())
}

/// Correlation of the two regional averages.
pub fn correlation_of_averages(a: &RegionTimeSeries, b: &RegionTimeSeries) -> Result<f64> {
    let (ma, mb) = (regional_average(a), regional_average(b));
    pearson_view(ma.view(), mb.view()).map_err(|e| match e {
        Error::DegenerateSeries { .. } => Error::degenerate(format!(
            "regional averages of pair ({}, {})",
            a.region_id, b.region_id
        )),
        other => other,
    })
}

/// The per-pair quantities that every method and pipeline draws from.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub n: usize,
    pub p_a: usize,
    pub p_b: usize,
    pub null: Option<SurrogateNull>,
    pub inter: Option<EmpiricalDistribution>,
    pub average_correlation: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PairNeeds {
    pub null: bool,
    pub inter: bool,
    pub averages: bool,
}

impl PairNeeds {
    pub fn for_config(method: ThresholdMethod, pipeline: Pipeline) -> Self {
        PairNeeds {
            null: method.needs_surrogate(),
            inter: pipeline == Pipeline::Cs,
            averages: pipeline == Pipeline::Ca,
        }
    }

    pub fn union(self, other: PairNeeds) -> Self {
        PairNeeds {
            null: self.null || other.null,
            inter: self.inter || other.inter,
            averages: self.averages || other.averages,
        }
    }
}

impl PairAnalysis {
    pub fn compute(
        a: &RegionTimeSeries,
        b: &RegionTimeSeries,
        needs: PairNeeds,
        surrogate_reps: usize,
        seed: u64,
    ) -> Result<Self> {
        let null = if needs.null {
            Some(surrogate_for_pair(a, b, surrogate_reps, seed)?)
        } else {
            None
        };
        let inter = if needs.inter {
            Some(inter_correlations(a, b, true)?)
        } else {
            None
        };
        let average_correlation = if needs.averages {
            Some(correlation_of_averages(a, b)?)
        } else {
            None
        };
        Ok(PairAnalysis {
            n: a.n(),
            p_a: a.p(),
            p_b: b.p(),
            null,
            inter,
            average_correlation,
        })
    }

    pub fn decide(&self, method: ThresholdMethod, pipeline: Pipeline, level: f64) -> Result<EdgeRecord> {
        let threshold = apply_method(method, self.null.as_ref(), self.n, self.p_a, self.p_b)?;
        match pipeline {
            Pipeline::Cs => {
                let inter = self
                    .inter
                    .as_ref()
                    .ok_or_else(|| Error::usage("CS decision needs inter-correlations"))?;
                let d = decide_edge_cs(inter, threshold, level);
                Ok(EdgeRecord {
                    threshold,
                    exceedance: d.exceedance,
                    detected: d.detected,
                })
            }
            Pipeline::Ca => {
                let r = self
                    .average_correlation
                    .ok_or_else(|| Error::usage("CA decision needs the averages' correlation"))?;
                let detected = r.abs() > threshold;
                Ok(EdgeRecord {
                    threshold,
                    exceedance: if detected { 1.0 } else { 0.0 },
                    detected,
                })
            }
        }
    }
}

/// Runs the configured pipeline over every unordered pair of regions.
/// Pairs are processed in parallel; the result depends only on the data and
/// `cfg.seed`.
pub fn infer_network(ds: &Dataset, cfg: &InferenceConfig) -> Result<BinaryNetwork> {
    cfg.validate()?;
    if ds.regions.len() < 2 {
        return Err(Error::usage("network inference needs at least two regions"));
    }
    let report = crate::dataset::validate_dataset(ds);
    if !report.ok {
        return Err(Error::Format(report.summary()));
    }
    let needs = PairNeeds::for_config(cfg.method, cfg.pipeline);
    let pairs = ds.pairs();
    let edges = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&ds.regions[i], &ds.regions[j]);
            let analysis = PairAnalysis::compute(a, b, needs, cfg.surrogate_reps, cfg.seed)?;
            let rec = analysis.decide(cfg.method, cfg.pipeline, cfg.exceedance_level)?;
            Ok((a.region_id.clone(), b.region_id.clone(), rec))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BinaryNetwork {
        region_ids: ds.region_ids(),
        exceedance_level: cfg.exceedance_level,
        edges,
    })
}
