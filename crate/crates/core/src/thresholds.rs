//! Per-pair critical correlation thresholds.
//!
//! The FWER, quantile and Poli rules read a surrogate null distribution of
//! absolute inter-correlations; the phase-transition rule depends only on
//! `(n, p_a, p_b)` through the exact null law of a Pearson correlation
//! between independent Gaussian series, `f0(r) ∝ (1 - r²)^{(n-4)/2}`.

use std::fmt;

use statrs::function::beta::beta_reg;

use crate::correlation::{EmpiricalDistribution, Signedness};
use crate::dataset::RegionTimeSeries;
use crate::discovery::nu_e_hat;
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::synthesis::{average_intra, generate_surrogate_signed, SurrogateSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMethod {
    /// Poisson-limit FWER control at level `alpha`.
    Fwer { alpha: f64 },
    /// Null quantile at `1 - alpha`.
    Quantile { alpha: f64 },
    /// Null mean plus one standard deviation.
    Poli,
    /// Phase-transition point of the independent-Gaussian null.
    Hero,
}

impl ThresholdMethod {
    /// Parses the `--method` / `--alpha` flag pair.
    pub fn parse(method: &str, alpha: Option<f64>) -> Result<Self> {
        let need_alpha = || {
            let a = alpha.ok_or_else(|| Error::usage(format!("method `{method}` needs --alpha")))?;
            if !(0.0..1.0).contains(&a) {
                return Err(Error::usage(format!("alpha {a} outside [0, 1)")));
            }
            Ok(a)
        };
        let m = match method {
            "fwer" => ThresholdMethod::Fwer { alpha: need_alpha()? },
            "quantile" => ThresholdMethod::Quantile { alpha: need_alpha()? },
            "poli" | "hero" if alpha.is_some() => {
                return Err(Error::usage(format!("method `{method}` takes no --alpha")))
            }
            "poli" => ThresholdMethod::Poli,
            "hero" => ThresholdMethod::Hero,
            other => return Err(Error::usage(format!("unknown threshold method `{other}`"))),
        };
        Ok(m)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThresholdMethod::Fwer { .. } => "fwer",
            ThresholdMethod::Quantile { .. } => "quantile",
            ThresholdMethod::Poli => "poli",
            ThresholdMethod::Hero => "hero",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            ThresholdMethod::Fwer { alpha } | ThresholdMethod::Quantile { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn needs_surrogate(&self) -> bool {
        !matches!(self, ThresholdMethod::Hero)
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.alpha() {
            Some(a) => write!(f, "{}({})", self.name(), a),
            None => f.write_str(self.name()),
        }
    }
}

impl std::str::FromStr for ThresholdMethod {
    type Err = Error;

    /// Accepts the compact `name` or `name(alpha)` form used in labels.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::usage(format!("malformed method `{s}`")))?;
                let alpha = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::usage(format!("malformed alpha in `{s}`")))?;
                ThresholdMethod::parse(name.trim(), Some(alpha))
            }
            None => ThresholdMethod::parse(s, None),
        }
    }
}

fn check_null(null: &EmpiricalDistribution) -> Result<()> {
    if null.signedness() != Signedness::Absolute {
        return Err(Error::usage("thresholds need an absolute null distribution"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::usage(format!("alpha {alpha} outside [0, 1)")));
    }
    Ok(())
}

/// `F0^{-1}(1 - alpha)` with the left-continuous inverse; `alpha = 0` gives
/// the null maximum.
pub fn threshold_quantile(null: &EmpiricalDistribution, alpha: f64) -> Result<f64> {
    check_null(null)?;
    check_alpha(alpha)?;
    Ok(null.quantile(1.0 - alpha))
}

/// Smallest null value `rho` whose expected exceedance count
/// `p_a p_b (1 - F0(rho))` is at most `-ln(1 - alpha)`.
pub fn threshold_fwer(null: &EmpiricalDistribution, alpha: f64, p_a: usize, p_b: usize) -> Result<f64> {
    check_null(null)?;
    check_alpha(alpha)?;
    if p_a == 0 || p_b == 0 {
        return Err(Error::usage("p_a and p_b must be positive"));
    }
    let budget = -(1.0 - alpha).ln();
    let cells = (p_a * p_b) as f64;
    let values = null.values();
    // the expected count is non-increasing along the sorted sample
    let idx = values.partition_point(|&v| cells * nu_e_hat(null, v) > budget);
    Ok(values[idx.min(values.len() - 1)])
}

/// Mean plus the sample standard deviation (denominator `count - 1`) of
/// the null correlations as given. The pipelines pass the signed sample.
pub fn threshold_poli(null: &EmpiricalDistribution) -> Result<f64> {
    let m = null.count();
    if m < 2 {
        return Err(Error::usage("Poli threshold needs at least two null values"));
    }
    let mean = null.mean();
    let ss = crate::io::compensated_sum(null.values().iter().map(|v| (v - mean) * (v - mean)));
    Ok(mean + (ss / (m - 1) as f64).sqrt())
}

/// `P0(|R| <= rho)` for the sample correlation of two independent Gaussian
/// series of length `n`: `R²` follows `Beta(1/2, (n - 2)/2)`.
pub fn null_abs_cdf(n: usize, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    if rho >= 1.0 {
        return 1.0;
    }
    beta_reg(0.5, (n as f64 - 2.0) / 2.0, rho * rho)
}

/// Root of `p_a p_b P0(|R| > rho) = 1`, by bisection to 1e-12.
pub fn threshold_hero(n: usize, p_a: usize, p_b: usize) -> Result<f64> {
    if n < crate::dataset::MIN_SAMPLES {
        return Err(Error::usage(format!("hero threshold needs n >= {}", crate::dataset::MIN_SAMPLES)));
    }
    if p_a == 0 || p_b == 0 {
        return Err(Error::usage("p_a and p_b must be positive"));
    }
    let cells = (p_a * p_b) as f64;
    if cells <= 1.0 {
        return Ok(0.0);
    }
    let excess = |rho: f64| cells * (1.0 - null_abs_cdf(n, rho)) - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A surrogate null sample, signed and in absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateNull {
    pub signed: EmpiricalDistribution,
    pub absolute: EmpiricalDistribution,
}

impl SurrogateNull {
    pub fn from_signed(signed: EmpiricalDistribution) -> Result<Self> {
        let absolute = EmpiricalDistribution::absolute(signed.values().to_vec())?;
        Ok(SurrogateNull { signed, absolute })
    }
}

/// Threshold for `method` given an optional surrogate null. Quantile and
/// FWER read the absolute sample, Poli the signed one.
pub fn apply_method(
    method: ThresholdMethod,
    null: Option<&SurrogateNull>,
    n: usize,
    p_a: usize,
    p_b: usize,
) -> Result<f64> {
    let need = || null.ok_or_else(|| Error::usage(format!("method {method} needs a surrogate null")));
    match method {
        ThresholdMethod::Quantile { alpha } => threshold_quantile(&need()?.absolute, alpha),
        ThresholdMethod::Fwer { alpha } => threshold_fwer(&need()?.absolute, alpha, p_a, p_b),
        ThresholdMethod::Poli => threshold_poli(&need()?.signed),
        ThresholdMethod::Hero => threshold_hero(n, p_a, p_b),
    }
}

fn region_intra(r: &RegionTimeSeries) -> Result<f64> {
    // a single voxel has no intra-correlation; the null law does not depend on it
    if r.p() < 2 {
        Ok(0.0)
    } else {
        average_intra(r)
    }
}

/// Surrogate spec matched to a pair: same sizes, constant intra equal to
/// each region's average intra-correlation, and a seed keyed by the sorted
/// pair of region ids. Regions are oriented by id so that `(a, b)` and
/// `(b, a)` produce the same null sample.
pub fn surrogate_spec_for_pair(
    a: &RegionTimeSeries,
    b: &RegionTimeSeries,
    reps: usize,
    seed: u64,
) -> Result<SurrogateSpec> {
    if a.n() != b.n() {
        return Err(Error::usage(format!(
            "regions {} and {} have different sample counts",
            a.region_id, b.region_id
        )));
    }
    let (first, second) = if a.region_id <= b.region_id { (a, b) } else { (b, a) };
    Ok(SurrogateSpec {
        p_a: first.p(),
        p_b: second.p(),
        n: first.n(),
        intra_a: region_intra(first)?,
        intra_b: region_intra(second)?,
        reps,
        seed: StreamKey::new(seed)
            .label("pair-surrogate")
            .unordered_pair(&a.region_id, &b.region_id)
            .seed(),
    })
}

pub fn surrogate_for_pair(
    a: &RegionTimeSeries,
    b: &RegionTimeSeries,
    reps: usize,
    seed: u64,
) -> Result<SurrogateNull> {
    SurrogateNull::from_signed(generate_surrogate_signed(&surrogate_spec_for_pair(a, b, reps, seed)?)?)
}

pub fn thresholds_for_pair(
    a: &RegionTimeSeries,
    b: &RegionTimeSeries,
    method: ThresholdMethod,
    surrogate_reps: usize,
    seed: u64,
) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::usage("regions have different sample counts"));
    }
    let null = if method.needs_surrogate() {
        Some(surrogate_for_pair(a, b, surrogate_reps, seed)?)
    } else {
        None
    };
    apply_method(method, null.as_ref(), a.n(), a.p(), b.p())
}
