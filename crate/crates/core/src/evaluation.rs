//! Confusion metrics against ground truth and the benchmark harnesses: the
//! ten-region TPR/FPR table and the threshold comparison on null data.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dataset::{sorted_pair, BinaryNetwork, GroundTruthNetwork};
use crate::discovery::DiscoveryCurve;
use crate::error::{Error, Result};
use crate::inference::{PairAnalysis, PairNeeds, Pipeline, DEFAULT_EXCEEDANCE_LEVEL};
use crate::io::compensated_sum;
use crate::rng::StreamKey;
use crate::synthesis::{SimulationConfig, SimulationPlan, ToeplitzDecay, TABLE1_NULL_PAIRS};
use crate::thresholds::{apply_method, surrogate_for_pair, ThresholdMethod};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Compares detected edges with truth labels over every pair in `truth`.
pub fn confusion(pred: &BinaryNetwork, truth: &GroundTruthNetwork) -> Result<ConfusionCounts> {
    let mut a: Vec<&String> = pred.region_ids.iter().collect();
    let mut b: Vec<&String> = truth.region_ids.iter().collect();
    a.sort();
    b.sort();
    if a != b {
        return Err(Error::usage("predicted and true networks have different region sets"));
    }
    let detected = pred.edge_map();
    let mut c = ConfusionCounts::default();
    for e in &truth.edges {
        let hit = detected
            .get(&sorted_pair(&e.a, &e.b))
            .map(|r| r.detected)
            .unwrap_or(false);
        match (e.is_positive(), hit) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `(TPR, FPR)`; a rate whose denominator is zero is `None`.
pub fn tpr_fpr(c: &ConfusionCounts) -> (Option<f64>, Option<f64>) {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    (ratio(c.tp, c.tp + c.fn_), ratio(c.fp, c.fp + c.tn))
}

/// A pipeline paired with a threshold rule, e.g. `CS+quantile(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkMethod {
    pub pipeline: Pipeline,
    pub method: ThresholdMethod,
}

impl BenchmarkMethod {
    pub fn new(pipeline: Pipeline, method: ThresholdMethod) -> Self {
        BenchmarkMethod { pipeline, method }
    }

    pub fn label(&self) -> String {
        format!("{}+{}", self.pipeline.name().to_uppercase(), self.method)
    }

    /// The five reproducible rows of the synthetic comparison.
    pub fn table1_defaults() -> Vec<BenchmarkMethod> {
        vec![
            BenchmarkMethod::new(Pipeline::Ca, ThresholdMethod::Poli),
            BenchmarkMethod::new(Pipeline::Cs, ThresholdMethod::Poli),
            BenchmarkMethod::new(Pipeline::Cs, ThresholdMethod::Hero),
            BenchmarkMethod::new(Pipeline::Cs, ThresholdMethod::Fwer { alpha: 0.0 }),
            BenchmarkMethod::new(Pipeline::Cs, ThresholdMethod::Quantile { alpha: 0.0 }),
        ]
    }
}

impl std::str::FromStr for BenchmarkMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (pipe, method) = s
            .split_once('+')
            .ok_or_else(|| Error::usage(format!("method `{s}` must look like cs+quantile(0)")))?;
        Ok(BenchmarkMethod {
            pipeline: pipe.parse()?,
            method: method.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub method: String,
    pub rho_min: f64,
    pub fpr_mean: Option<f64>,
    pub fpr_sd: Option<f64>,
    pub tpr_mean: Option<f64>,
    pub tpr_sd: Option<f64>,
    pub reps: usize,
}

/// Mean and sample standard deviation over the defined values; the sd of a
/// single value is 0.
fn mean_sd(values: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        return (None, None);
    }
    let m = defined.len() as f64;
    let mean = compensated_sum(defined.iter().copied()) / m;
    let sd = if defined.len() < 2 {
        0.0
    } else {
        (compensated_sum(defined.iter().map(|v| (v - mean) * (v - mean))) / (m - 1.0)).sqrt()
    };
    (Some(mean), Some(sd))
}

/// Shared settings of the ten-region benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Setup {
    pub regions: usize,
    pub p: usize,
    pub n: usize,
    pub rho_inter: f64,
    pub null_pairs: Vec<(usize, usize)>,
    pub decay: ToeplitzDecay,
    pub surrogate_reps: usize,
    pub exceedance_level: f64,
}

impl Default for Table1Setup {
    fn default() -> Self {
        Table1Setup {
            regions: 10,
            p: 150,
            n: 100,
            rho_inter: 0.2,
            null_pairs: TABLE1_NULL_PAIRS.to_vec(),
            decay: ToeplitzDecay::Linear,
            surrogate_reps: 1,
            exceedance_level: DEFAULT_EXCEEDANCE_LEVEL,
        }
    }
}

impl Table1Setup {
    pub fn config(&self, rho_min: f64) -> SimulationConfig {
        let mut cfg = SimulationConfig::multi_region(
            self.regions,
            self.p,
            rho_min,
            self.rho_inter,
            &self.null_pairs,
            self.n,
            0,
        );
        cfg.decay = self.decay;
        cfg
    }
}

/// Seeds of replicate `rep` at `rho_min`: `(data, inference)`.
pub fn table1_seeds(seed: u64, rho_min: f64, rep: usize) -> (u64, u64) {
    let base = StreamKey::new(seed).label("table1").real(rho_min).index(rep as u64);
    (base.clone().label("data").seed(), base.label("inference").seed())
}

/// Per-replicate `(tpr, fpr)` for every method, in method order.
pub type ReplicateRates = Vec<(Option<f64>, Option<f64>)>;

/// Runs every method on `reps` datasets drawn at each `rho_min`. Replicate
/// datasets and surrogates are keyed by `(seed, rho_min, rep)`, so the rows
/// do not depend on scheduling.
pub fn run_table1_replicates(
    reps: usize,
    rho_mins: &[f64],
    methods: &[BenchmarkMethod],
    setup: &Table1Setup,
    seed: u64,
) -> Result<Vec<Vec<ReplicateRates>>> {
    if reps == 0 {
        return Err(Error::usage("reps must be at least 1"));
    }
    let needs = methods
        .iter()
        .fold(PairNeeds::default(), |acc, m| acc.union(PairNeeds::for_config(m.method, m.pipeline)));
    rho_mins
        .iter()
        .map(|&rho_min| {
            let plan = SimulationPlan::new(&setup.config(rho_min))?;
            (0..reps)
                .into_par_iter()
                .map(|rep| {
                    let (data_seed, infer_seed) = table1_seeds(seed, rho_min, rep);
                    let ds = plan.draw_seeded(data_seed);
                    let analyses = ds
                        .pairs()
                        .into_iter()
                        .map(|(i, j)| {
                            let (a, b) = (&ds.regions[i], &ds.regions[j]);
                            PairAnalysis::compute(a, b, needs, setup.surrogate_reps, infer_seed)
                                .map(|an| (a.region_id.clone(), b.region_id.clone(), an))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    methods
                        .iter()
                        .map(|m| {
                            let edges = analyses
                                .iter()
                                .map(|(a, b, an)| {
                                    an.decide(m.method, m.pipeline, setup.exceedance_level)
                                        .map(|rec| (a.clone(), b.clone(), rec))
                                })
                                .collect::<Result<Vec<_>>>()?;
                            let net = BinaryNetwork {
                                region_ids: ds.region_ids(),
                                exceedance_level: setup.exceedance_level,
                                edges,
                            };
                            Ok(tpr_fpr(&confusion(&net, plan.truth())?))
                        })
                        .collect::<Result<ReplicateRates>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

pub fn run_table1(
    reps: usize,
    rho_mins: &[f64],
    methods: &[BenchmarkMethod],
    setup: &Table1Setup,
    seed: u64,
) -> Result<Vec<BenchmarkRow>> {
    let per_rho = run_table1_replicates(reps, rho_mins, methods, setup, seed)?;
    let mut rows = Vec::with_capacity(rho_mins.len() * methods.len());
    for (k, m) in methods.iter().enumerate() {
        for (&rho_min, reps_out) in rho_mins.iter().zip(&per_rho) {
            let tprs: Vec<Option<f64>> = reps_out.iter().map(|r| r[k].0).collect();
            let fprs: Vec<Option<f64>> = reps_out.iter().map(|r| r[k].1).collect();
            let (tpr_mean, tpr_sd) = mean_sd(&tprs);
            let (fpr_mean, fpr_sd) = mean_sd(&fprs);
            rows.push(BenchmarkRow {
                method: m.label(),
                rho_min,
                fpr_mean,
                fpr_sd,
                tpr_mean,
                tpr_sd,
                reps,
            });
        }
    }
    Ok(rows)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn table1_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from("method,rho_min,fpr_mean,fpr_sd,tpr_mean,tpr_sd,reps\n");
    for r in rows {
        writeln!(
            out,
            "{},{:?},{},{},{},{},{}",
            r.method,
            r.rho_min,
            fmt_opt(r.fpr_mean),
            fmt_opt(r.fpr_sd),
            fmt_opt(r.tpr_mean),
            fmt_opt(r.tpr_sd),
            r.reps
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSample {
    pub method: String,
    pub intra: f64,
    pub replicate: usize,
    pub threshold: f64,
}

/// Thresholds of each method on two-region null data (`rho_ab = 0`) with
/// constant intra-correlation, `reps` replicates per intra level.
pub fn run_fig5(
    reps: usize,
    intras: &[f64],
    methods: &[ThresholdMethod],
    p: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<ThresholdSample>> {
    if reps == 0 {
        return Err(Error::usage("reps must be at least 1"));
    }
    let mut out = Vec::with_capacity(reps * intras.len() * methods.len());
    for &intra in intras {
        let plan = SimulationPlan::new(&SimulationConfig::two_constant(p, intra, intra, 0.0, n, 0))?;
        let per_rep = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let key = StreamKey::new(seed).label("fig5").real(intra).index(rep as u64);
                let ds = plan.draw_seeded(key.clone().label("data").seed());
                let (a, b) = (&ds.regions[0], &ds.regions[1]);
                let null = if methods.iter().any(|m| m.needs_surrogate()) {
                    Some(surrogate_for_pair(a, b, 1, key.label("inference").seed())?)
                } else {
                    None
                };
                methods
                    .iter()
                    .map(|&m| apply_method(m, null.as_ref(), n, a.p(), b.p()))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, m) in methods.iter().enumerate() {
            for (rep, vals) in per_rep.iter().enumerate() {
                out.push(ThresholdSample {
                    method: m.to_string(),
                    intra,
                    replicate: rep,
                    threshold: vals[k],
                });
            }
        }
    }
    Ok(out)
}

pub fn fig5_csv(samples: &[ThresholdSample]) -> String {
    let mut out = String::from("method,intra,replicate,threshold\n");
    for s in samples {
        writeln!(out, "{},{:?},{},{:?}", s.method, s.intra, s.replicate, s.threshold).unwrap();
    }
    out
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Some(if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    })
}

/// Thresholds grouped by `(method, intra)` in replicate order.
pub fn group_samples(samples: &[ThresholdSample]) -> HashMap<(String, u64), Vec<f64>> {
    let mut groups: HashMap<(String, u64), Vec<f64>> = HashMap::new();
    for s in samples {
        groups
            .entry((s.method.clone(), s.intra.to_bits()))
            .or_default()
            .push(s.threshold);
    }
    groups
}

/// Rows `rho,value,statistic,replicate`; `replicate` is empty for curves
/// that are not tied to a replicate.
pub fn curves_csv(curves: &[(Option<usize>, DiscoveryCurve)]) -> String {
    let mut out = String::from("rho,value,statistic,replicate\n");
    for (rep, c) in curves {
        let rep = rep.map(|r| r.to_string()).unwrap_or_default();
        for (g, v) in c.grid.iter().zip(&c.values) {
            writeln!(out, "{g:?},{v:?},{},{rep}", c.statistic).unwrap();
        }
    }
    out
}
