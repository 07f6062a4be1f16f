//! Block-Toeplitz Gaussian simulation with ground truth, and the surrogate
//! null model used to calibrate thresholds.
//!
//! Marginals are standard normal, so covariances are correlations. A
//! region's intra-correlation decays along the voxel index from 1 on the
//! diagonal to `rho_min` at the largest lag; every pair of voxels from two
//! different regions shares the same inter-correlation.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::correlation::{intra_correlation_values, CenteredRows, EmpiricalDistribution};
use crate::dataset::{Dataset, GroundTruthNetwork, RegionTimeSeries, TruthEdge};
use crate::error::{Error, Result};
use crate::rng::StreamKey;

pub const SIM_SCHEMA: &str = "corrscreen-sim/1";

/// Eigenvalues down to `-PSD_TOLERANCE` count as round-off.
pub const PSD_TOLERANCE: f64 = 1e-8;
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToeplitzDecay {
    /// `1 - (1 - rho_min) |i - j| / (p - 1)`.
    #[default]
    Linear,
    /// `rho_min^{|i - j| / (p - 1)}`, an AR(1) profile reaching `rho_min` at the largest lag.
    Geometric,
}

impl std::str::FromStr for ToeplitzDecay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ToeplitzDecay::Linear),
            "geometric" => Ok(ToeplitzDecay::Geometric),
            other => Err(Error::usage(format!("unknown Toeplitz decay `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToeplitzSpec {
    pub p: usize,
    pub rho_min: f64,
    pub decay: ToeplitzDecay,
}

pub fn toeplitz_covariance(spec: &ToeplitzSpec) -> Result<DMatrix<f64>> {
    if spec.p == 0 {
        return Err(Error::usage("Toeplitz block needs p >= 1"));
    }
    if !(0.0..=1.0).contains(&spec.rho_min) {
        return Err(Error::usage(format!("rho_min {} outside [0, 1]", spec.rho_min)));
    }
    let p = spec.p;
    if p == 1 {
        return Ok(DMatrix::from_element(1, 1, 1.0));
    }
    let span = (p - 1) as f64;
    let profile: Vec<f64> = (0..p)
        .map(|lag| {
            if lag == 0 {
                return 1.0;
            }
            let frac = lag as f64 / span;
            match spec.decay {
                ToeplitzDecay::Linear => 1.0 - (1.0 - spec.rho_min) * frac,
                ToeplitzDecay::Geometric => spec.rho_min.powf(frac),
            }
        })
        .collect();
    Ok(DMatrix::from_fn(p, p, |i, j| profile[i.abs_diff(j)]))
}

pub fn constant_covariance(p: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntraStructure {
    Toeplitz { rho_min: f64 },
    Constant { rho: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub id: String,
    pub p: usize,
    pub intra: IntraStructure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterSpec {
    pub a: String,
    pub b: String,
    pub rho: f64,
}

/// Generative description of a multi-region Gaussian dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub regions: Vec<RegionSpec>,
    /// Constant inter-correlation per listed pair; unlisted pairs are 0.
    pub inter: Vec<InterSpec>,
    pub n: usize,
    pub seed: u64,
    pub decay: ToeplitzDecay,
}

/// Unordered pairs given as 1-based region positions that carry zero
/// inter-correlation in the ten-region benchmark.
pub const TABLE1_NULL_PAIRS: [(usize, usize); 4] = [(1, 2), (3, 4), (5, 6), (7, 8)];

impl SimulationConfig {
    /// `k` regions `r1..rk` of `p` Toeplitz voxels; every pair has
    /// inter-correlation `rho_inter` except `null_pairs` (1-based), which
    /// have 0.
    pub fn multi_region(
        k: usize,
        p: usize,
        rho_min: f64,
        rho_inter: f64,
        null_pairs: &[(usize, usize)],
        n: usize,
        seed: u64,
    ) -> Self {
        let regions = (1..=k)
            .map(|i| RegionSpec {
                id: format!("r{i}"),
                p,
                intra: IntraStructure::Toeplitz { rho_min },
            })
            .collect();
        let is_null = |i: usize, j: usize| {
            null_pairs
                .iter()
                .any(|&(x, y)| (x, y) == (i, j) || (y, x) == (i, j))
        };
        let mut inter = Vec::new();
        for i in 1..=k {
            for j in i + 1..=k {
                if !is_null(i, j) {
                    inter.push(InterSpec {
                        a: format!("r{i}"),
                        b: format!("r{j}"),
                        rho: rho_inter,
                    });
                }
            }
        }
        SimulationConfig {
            regions,
            inter,
            n,
            seed,
            decay: ToeplitzDecay::Linear,
        }
    }

    /// The ten-region benchmark: 41 pairs at 0.2 and 4 null pairs.
    pub fn table1(rho_min: f64, p: usize, n: usize, seed: u64) -> Self {
        Self::multi_region(10, p, rho_min, 0.2, &TABLE1_NULL_PAIRS, n, seed)
    }

    /// Two regions with constant intra-correlations and a given inter-correlation.
    pub fn two_constant(p: usize, intra_a: f64, intra_b: f64, rho_ab: f64, n: usize, seed: u64) -> Self {
        let mk = |id: &str, rho| RegionSpec {
            id: id.into(),
            p,
            intra: IntraStructure::Constant { rho },
        };
        SimulationConfig {
            regions: vec![mk("a", intra_a), mk("b", intra_b)],
            inter: if rho_ab != 0.0 {
                vec![InterSpec { a: "a".into(), b: "b".into(), rho: rho_ab }]
            } else {
                Vec::new()
            },
            n,
            seed,
            decay: ToeplitzDecay::Linear,
        }
    }

    /// Two Toeplitz regions with the given minimal intra-correlations.
    pub fn two_toeplitz(p: usize, rho_min_a: f64, rho_min_b: f64, rho_ab: f64, n: usize, seed: u64) -> Self {
        let mk = |id: &str, rho_min| RegionSpec {
            id: id.into(),
            p,
            intra: IntraStructure::Toeplitz { rho_min },
        };
        SimulationConfig {
            regions: vec![mk("a", rho_min_a), mk("b", rho_min_b)],
            inter: if rho_ab != 0.0 {
                vec![InterSpec { a: "a".into(), b: "b".into(), rho: rho_ab }]
            } else {
                Vec::new()
            },
            n,
            seed,
            decay: ToeplitzDecay::Linear,
        }
    }

    pub fn region_index(&self, id: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(Error::usage("simulation needs at least one region"));
        }
        if self.n < crate::dataset::MIN_SAMPLES {
            return Err(Error::usage(format!(
                "simulation needs n >= {}",
                crate::dataset::MIN_SAMPLES
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for r in &self.regions {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::usage(format!("duplicate region id `{}`", r.id)));
            }
            if r.p == 0 {
                return Err(Error::usage(format!("region `{}` has p = 0", r.id)));
            }
            let v = match r.intra {
                IntraStructure::Toeplitz { rho_min } => rho_min,
                IntraStructure::Constant { rho } => rho,
            };
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::usage(format!("region `{}` intra parameter {v} outside [0, 1]", r.id)));
            }
        }
        let mut pairs = std::collections::HashSet::new();
        for e in &self.inter {
            let (Some(i), Some(j)) = (self.region_index(&e.a), self.region_index(&e.b)) else {
                return Err(Error::usage(format!(
                    "inter pair ({}, {}) references an undeclared region",
                    e.a, e.b
                )));
            };
            if i == j {
                return Err(Error::usage(format!("inter pair ({}, {}) is a self-pair", e.a, e.b)));
            }
            if !(-1.0..=1.0).contains(&e.rho) {
                return Err(Error::usage(format!("inter rho {} outside [-1, 1]", e.rho)));
            }
            if !pairs.insert((i.min(j), i.max(j))) {
                return Err(Error::usage(format!("inter pair ({}, {}) listed twice", e.a, e.b)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = SimDoc {
            schema: SIM_SCHEMA.into(),
            n: self.n,
            seed: self.seed,
            toeplitz_decay: Some(self.decay),
            regions: self
                .regions
                .iter()
                .map(|r| match r.intra {
                    IntraStructure::Toeplitz { rho_min } => RegionDoc {
                        id: r.id.clone(),
                        p: r.p,
                        rho_min: Some(rho_min),
                        constant_intra: None,
                    },
                    IntraStructure::Constant { rho } => RegionDoc {
                        id: r.id.clone(),
                        p: r.p,
                        rho_min: None,
                        constant_intra: Some(rho),
                    },
                })
                .collect(),
            inter: self.inter.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match value.get("schema") {
            Some(serde_json::Value::String(s)) if s == SIM_SCHEMA => {}
            Some(serde_json::Value::String(s)) => return Err(Error::Version(s.clone())),
            _ => return Err(Error::Parse("missing `schema`".into())),
        }
        let doc: SimDoc = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        let mut regions = Vec::with_capacity(doc.regions.len());
        for r in doc.regions {
            let intra = match (r.rho_min, r.constant_intra) {
                (Some(rho_min), None) => IntraStructure::Toeplitz { rho_min },
                (None, Some(rho)) => IntraStructure::Constant { rho },
                _ => {
                    return Err(Error::Parse(format!(
                        "region `{}` needs exactly one of `rho_min` or `constant_intra`",
                        r.id
                    )))
                }
            };
            regions.push(RegionSpec { id: r.id, p: r.p, intra });
        }
        let cfg = SimulationConfig {
            regions,
            inter: doc.inter,
            n: doc.n,
            seed: doc.seed,
            decay: doc.toeplitz_decay.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Serialize, Deserialize)]
struct SimDoc {
    schema: String,
    n: usize,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    toeplitz_decay: Option<ToeplitzDecay>,
    regions: Vec<RegionDoc>,
    #[serde(default)]
    inter: Vec<InterSpec>,
}

#[derive(Serialize, Deserialize)]
struct RegionDoc {
    id: String,
    p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant_intra: Option<f64>,
}

fn intra_block(r: &RegionSpec, decay: ToeplitzDecay) -> Result<DMatrix<f64>> {
    match r.intra {
        IntraStructure::Toeplitz { rho_min } => toeplitz_covariance(&ToeplitzSpec { p: r.p, rho_min, decay }),
        IntraStructure::Constant { rho } => Ok(constant_covariance(r.p, rho)),
    }
}

/// Joint covariance of all regions, blocks in declaration order.
pub fn assemble_block_covariance(config: &SimulationConfig) -> Result<DMatrix<f64>> {
    config.validate()?;
    let offsets: Vec<usize> = config
        .regions
        .iter()
        .scan(0, |acc, r| {
            let o = *acc;
            *acc += r.p;
            Some(o)
        })
        .collect();
    let total: usize = config.regions.iter().map(|r| r.p).sum();
    let mut cov = DMatrix::zeros(total, total);
    for (k, r) in config.regions.iter().enumerate() {
        let block = intra_block(r, config.decay)?;
        cov.view_mut((offsets[k], offsets[k]), (r.p, r.p)).copy_from(&block);
    }
    for e in &config.inter {
        let i = config.region_index(&e.a).expect("validated");
        let j = config.region_index(&e.b).expect("validated");
        let (pi, pj) = (config.regions[i].p, config.regions[j].p);
        cov.view_mut((offsets[i], offsets[j]), (pi, pj)).fill(e.rho);
        cov.view_mut((offsets[j], offsets[i]), (pj, pi)).fill(e.rho);
    }
    Ok(cov)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub ok: bool,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::usage("matrix is not square"));
    }
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::usage(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

pub fn check_psd(m: &DMatrix<f64>) -> Result<PsdReport> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new(m.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PsdReport {
        min_eigenvalue,
        ok: min_eigenvalue >= -PSD_TOLERANCE,
    })
}

/// A square factor `F` with `F Fᵀ = cov`: the Cholesky factor when it
/// exists, otherwise `V sqrt(max(Λ, 0))` from the eigendecomposition.
pub fn covariance_factor(cov: &DMatrix<f64>) -> Result<Array2<f64>> {
    check_symmetric(cov)?;
    let p = cov.nrows();
    let factor = match cov.clone().cholesky() {
        Some(ch) => ch.unpack(),
        None => {
            let eig = SymmetricEigen::new(cov.clone());
            let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -PSD_TOLERANCE {
                return Err(Error::Covariance(format!(
                    "covariance is not positive semidefinite (min eigenvalue {min:.3e})"
                )));
            }
            let mut f = eig.eigenvectors;
            for (k, lambda) in eig.eigenvalues.iter().enumerate() {
                let s = lambda.max(0.0).sqrt();
                f.column_mut(k).scale_mut(s);
            }
            f
        }
    };
    Ok(Array2::from_shape_fn((p, p), |(i, j)| factor[(i, j)]))
}

fn standard_normals<R: Rng>(p: usize, n: usize, rng: &mut R) -> Array2<f64> {
    // sample-major fill: column t is drawn before column t + 1
    let mut z = Array2::zeros((p, n));
    for t in 0..n {
        for i in 0..p {
            z[[i, t]] = rng.sample(StandardNormal);
        }
    }
    z
}

/// `n` independent columns from `N(0, cov)`, drawn from the stream `(seed, "mvn")`.
pub fn sample_mvn(cov: &DMatrix<f64>, n: usize, seed: u64) -> Result<Array2<f64>> {
    let factor = covariance_factor(cov)?;
    let mut rng = StreamKey::new(seed).label("mvn").rng();
    Ok(factor.dot(&standard_normals(cov.nrows(), n, &mut rng)))
}

/// A validated configuration with its covariance factor, reusable across draws.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    config: SimulationConfig,
    factor: Array2<f64>,
    truth: GroundTruthNetwork,
}

impl SimulationPlan {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        let cov = assemble_block_covariance(config)?;
        let factor = covariance_factor(&cov)?;
        let ids: Vec<String> = config.regions.iter().map(|r| r.id.clone()).collect();
        let listed = config
            .inter
            .iter()
            .map(|e| TruthEdge { a: e.a.clone(), b: e.b.clone(), rho: e.rho })
            .collect();
        let truth = GroundTruthNetwork::new(ids, listed)?;
        Ok(SimulationPlan {
            config: config.clone(),
            factor,
            truth,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn truth(&self) -> &GroundTruthNetwork {
        &self.truth
    }

    /// One joint draw split into per-region blocks.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Dataset {
        let total = self.factor.nrows();
        let x = self.factor.dot(&standard_normals(total, self.config.n, rng));
        let mut offset = 0;
        let regions = self
            .config
            .regions
            .iter()
            .map(|r| {
                let block = x.slice(ndarray::s![offset..offset + r.p, ..]).to_owned();
                offset += r.p;
                RegionTimeSeries::new(r.id.clone(), block)
            })
            .collect();
        Dataset { regions }
    }

    /// The draw for a given seed, from the stream `(seed, "dataset")`.
    pub fn draw_seeded(&self, seed: u64) -> Dataset {
        self.draw(&mut StreamKey::new(seed).label("dataset").rng())
    }
}

pub fn generate_dataset(config: &SimulationConfig) -> Result<(Dataset, GroundTruthNetwork)> {
    let plan = SimulationPlan::new(config)?;
    let ds = plan.draw_seeded(config.seed);
    Ok((ds, plan.truth))
}

/// Null model: two regions with constant intra-correlations and zero
/// inter-correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateSpec {
    pub p_a: usize,
    pub p_b: usize,
    pub n: usize,
    pub intra_a: f64,
    pub intra_b: f64,
    pub reps: usize,
    pub seed: u64,
}

impl SurrogateSpec {
    fn validate(&self) -> Result<()> {
        if self.p_a == 0 || self.p_b == 0 {
            return Err(Error::usage("surrogate regions need p >= 1"));
        }
        if self.n < 3 {
            return Err(Error::usage("surrogate needs n >= 3"));
        }
        if self.reps == 0 {
            return Err(Error::usage("surrogate needs reps >= 1"));
        }
        for v in [self.intra_a, self.intra_b] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Covariance(format!("constant intra {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Rows of `sqrt(rho) z + sqrt(1 - rho) e_i`, exact draws from
/// `N(0, constant_covariance(p, rho))`.
fn constant_block<R: Rng>(p: usize, n: usize, rho: f64, rng: &mut R) -> Array2<f64> {
    let common: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let (w, s) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut out = Array2::zeros((p, n));
    for i in 0..p {
        for t in 0..n {
            let e: f64 = rng.sample(StandardNormal);
            out[[i, t]] = w * common[t] + s * e;
        }
    }
    out
}

/// Pooled absolute inter-correlations of `reps` surrogate datasets.
pub fn generate_surrogate(spec: &SurrogateSpec) -> Result<EmpiricalDistribution> {
    let signed = generate_surrogate_signed(spec)?;
    EmpiricalDistribution::absolute(signed.values().to_vec())
}

/// Pooled signed inter-correlations of `reps` surrogate datasets.
/// Replicate `r` draws from the stream `(seed, "surrogate", r)`.
pub fn generate_surrogate_signed(spec: &SurrogateSpec) -> Result<EmpiricalDistribution> {
    spec.validate()?;
    let mut values = Vec::with_capacity(spec.reps * spec.p_a * spec.p_b);
    for r in 0..spec.reps {
        let mut rng = StreamKey::new(spec.seed).label("surrogate").index(r as u64).rng();
        let a = constant_block(spec.p_a, spec.n, spec.intra_a, &mut rng);
        let b = constant_block(spec.p_b, spec.n, spec.intra_b, &mut rng);
        let ca = CenteredRows::new(a.view())
            .map_err(|i| Error::Numerical(format!("surrogate row {i} is constant")))?;
        let cb = CenteredRows::new(b.view())
            .map_err(|i| Error::Numerical(format!("surrogate row {i} is constant")))?;
        values.extend(ca.cross(&cb).iter().copied());
    }
    EmpiricalDistribution::signed(values)
}

/// Mean signed intra-correlation, clamped to `[0, 1]`.
pub fn average_intra(a: &RegionTimeSeries) -> Result<f64> {
    let values = intra_correlation_values(a)?;
    let mean = crate::io::compensated_sum(values.iter().copied()) / values.len() as f64;
    if mean < 0.0 {
        log::warn!(
            "region {}: mean intra-correlation {mean:.4} is negative, using 0",
            a.region_id
        );
        return Ok(0.0);
    }
    Ok(mean.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::pearson_view;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn lin(p: usize, rho_min: f64) -> ToeplitzSpec {
        ToeplitzSpec { p, rho_min, decay: ToeplitzDecay::Linear }
    }

    #[test]
    fn toeplitz_examples() {
        let m = toeplitz_covariance(&lin(3, 0.5)).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.75, 0.5, 0.75, 1.0, 0.75, 0.5, 0.75, 1.0]);
        assert_eq!(m, expected);
        assert_eq!(toeplitz_covariance(&lin(4, 1.0)).unwrap(), DMatrix::from_element(4, 4, 1.0));
        assert_eq!(toeplitz_covariance(&lin(1, 0.3)).unwrap(), DMatrix::from_element(1, 1, 1.0));
        assert!(matches!(toeplitz_covariance(&lin(3, 1.5)), Err(Error::Usage(_))));
        assert!(matches!(toeplitz_covariance(&lin(3, -0.1)), Err(Error::Usage(_))));
    }

    #[test]
    fn geometric_toeplitz_reaches_rho_min() {
        let m = toeplitz_covariance(&ToeplitzSpec { p: 5, rho_min: 0.25, decay: ToeplitzDecay::Geometric }).unwrap();
        assert_abs_diff_eq!(m[(0, 4)], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 2)], 0.5, epsilon = 1e-15);
        let ident = toeplitz_covariance(&ToeplitzSpec { p: 3, rho_min: 0.0, decay: ToeplitzDecay::Geometric }).unwrap();
        assert_eq!(ident, DMatrix::identity(3, 3));
    }

    #[test]
    fn constant_covariance_examples() {
        assert_eq!(constant_covariance(2, 0.9), DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]));
        assert_eq!(constant_covariance(3, 0.0), DMatrix::identity(3, 3));
        let eig = SymmetricEigen::new(constant_covariance(3, 0.5));
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_examples() {
        let r = check_psd(&DMatrix::identity(3, 3)).unwrap();
        assert!(r.ok);
        assert_abs_diff_eq!(r.min_eigenvalue, 1.0, epsilon = 1e-12);
        let r = check_psd(&DMatrix::from_row_slice(2, 2, &[1.0, 1.1, 1.1, 1.0])).unwrap();
        assert!(!r.ok);
        assert_abs_diff_eq!(r.min_eigenvalue, -0.1, epsilon = 1e-12);
        let r = check_psd(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(r.ok);
        assert_abs_diff_eq!(r.min_eigenvalue, 0.0, epsilon = 1e-12);
        assert!(matches!(
            check_psd(&DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0])),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn block_assembly() {
        let mut cfg = SimulationConfig::two_toeplitz(1, 0.5, 0.5, 0.2, 10, 0);
        let cov = assemble_block_covariance(&cfg).unwrap();
        assert_eq!(cov, DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.0]));
        cfg.inter.clear();
        cfg.regions.iter_mut().for_each(|r| r.p = 3);
        let cov = assemble_block_covariance(&cfg).unwrap();
        assert!(cov.view((0, 3), (3, 3)).iter().all(|&v| v == 0.0));
        cfg.inter.push(InterSpec { a: "a".into(), b: "zz".into(), rho: 0.1 });
        assert!(matches!(assemble_block_covariance(&cfg), Err(Error::Usage(_))));
    }

    #[test]
    fn mvn_moments_and_determinism() {
        let ident = DMatrix::<f64>::identity(2, 2);
        let x = sample_mvn(&ident, 100_000, 3).unwrap();
        let r = pearson_view(x.row(0), x.row(1)).unwrap();
        assert!(r.abs() <= 0.02, "{r}");

        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]);
        let x = sample_mvn(&cov, 100_000, 4).unwrap();
        let r = pearson_view(x.row(0), x.row(1)).unwrap();
        assert!((0.89..=0.91).contains(&r), "{r}");

        assert_eq!(sample_mvn(&cov, 50, 9).unwrap(), sample_mvn(&cov, 50, 9).unwrap());
        assert_ne!(sample_mvn(&cov, 50, 9).unwrap(), sample_mvn(&cov, 50, 10).unwrap());
    }

    #[test]
    fn mvn_handles_singular_and_rejects_indefinite() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let x = sample_mvn(&singular, 20, 1).unwrap();
        for t in 0..20 {
            assert_abs_diff_eq!(x[[0, t]], x[[1, t]], epsilon = 1e-9);
        }
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.1, 1.1, 1.0]);
        assert!(matches!(sample_mvn(&bad, 5, 1), Err(Error::Covariance(_))));
    }

    #[test]
    fn dataset_generation_labels_truth() {
        let cfg = SimulationConfig::multi_region(4, 3, 0.5, 0.2, &[(1, 2)], 20, 5);
        let (ds, truth) = generate_dataset(&cfg).unwrap();
        assert_eq!(ds.regions.len(), 4);
        assert!(ds.regions.iter().all(|r| r.p() == 3 && r.n() == 20));
        assert_eq!(truth.edges.len(), 6);
        assert_eq!(truth.positives(), 5);
        let (again, _) = generate_dataset(&cfg).unwrap();
        assert_eq!(ds, again);

        let mut null_cfg = cfg.clone();
        null_cfg.inter.clear();
        let (_, t) = generate_dataset(&null_cfg).unwrap();
        assert_eq!(t.positives(), 0);
    }

    #[test]
    fn table1_layout() {
        let cfg = SimulationConfig::table1(0.5, 150, 100, 0);
        assert_eq!(cfg.regions.len(), 10);
        assert_eq!(cfg.inter.len(), 41);
        let truth = SimulationPlan::new(&SimulationConfig::table1(0.5, 4, 100, 0)).unwrap();
        assert_eq!(truth.truth().edges.len(), 45);
        assert_eq!(truth.truth().negatives(), 4);
    }

    #[test]
    fn surrogate_cardinality_and_determinism() {
        let spec = SurrogateSpec { p_a: 7, p_b: 5, n: 30, intra_a: 0.4, intra_b: 0.8, reps: 3, seed: 12 };
        let d = generate_surrogate(&spec).unwrap();
        assert_eq!(d.count(), 3 * 7 * 5);
        assert_eq!(d, generate_surrogate(&spec).unwrap());
        let one = generate_surrogate(&SurrogateSpec { intra_a: 1.0, intra_b: 1.0, ..spec }).unwrap();
        assert_eq!(one.count(), 105);
    }

    #[test]
    fn average_intra_examples() {
        let twins = RegionTimeSeries::new("a", array![[1.0, 3.0, 2.0, 5.0, 4.0], [1.0, 3.0, 2.0, 5.0, 4.0]]);
        assert_abs_diff_eq!(average_intra(&twins).unwrap(), 1.0, epsilon = 1e-12);
        let anti = RegionTimeSeries::new("a", array![[1.0, 3.0, 2.0, 5.0, 4.0], [-1.0, -3.0, -2.0, -5.0, -4.0]]);
        assert_eq!(average_intra(&anti).unwrap(), 0.0);
        let single = RegionTimeSeries::new("a", array![[1.0, 3.0, 2.0, 5.0, 4.0]]);
        assert!(matches!(average_intra(&single), Err(Error::Usage(_))));
    }

    #[test]
    fn config_json_roundtrip() {
        let mut cfg = SimulationConfig::table1(0.7, 20, 50, 99);
        cfg.regions[3].intra = IntraStructure::Constant { rho: 0.3 };
        cfg.decay = ToeplitzDecay::Geometric;
        assert_eq!(SimulationConfig::from_json(&cfg.to_json()).unwrap(), cfg);

        let minimal = r#"{"schema":"corrscreen-sim/1","n":10,"seed":1,
            "regions":[{"id":"a","p":2,"rho_min":0.5},{"id":"b","p":3,"rho_min":0.9}],
            "inter":[{"a":"a","b":"b","rho":0.2}]}"#;
        let c = SimulationConfig::from_json(minimal).unwrap();
        assert_eq!(c.decay, ToeplitzDecay::Linear);
        assert!(matches!(
            SimulationConfig::from_json(&minimal.replace("sim/1", "sim/2")),
            Err(Error::Version(_))
        ));
    }
}
