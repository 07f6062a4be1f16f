//! Discovery counts over a threshold and their normalized ecdf expressions.
//!
//! A discovery is an inter-correlation with `|R| > rho` (strict), while the
//! ecdf counts `|R| <= rho`. With these two conventions the total count and
//! `p_a * p_b * (1 - ecdf)` coincide exactly.

use std::str::FromStr;

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::correlation::{inter_correlation_matrix, EmpiricalDistribution, Signedness};
use crate::error::{Error, Result};
use crate::rng::StreamKey;
use crate::synthesis::{SimulationConfig, SimulationPlan};

pub const DEFAULT_GRID_POINTS: usize = 201;

/// `N^{ab}(rho)`: rows with at least one `|R_ij| > rho`.
pub fn count_max_discoveries(r: ArrayView2<'_, f64>, rho: f64) -> usize {
    r.rows()
        .into_iter()
        .filter(|row| row.iter().any(|v| v.abs() > rho))
        .count()
}

/// `N_e^{ab}(rho)`: entries with `|R_ij| > rho`.
pub fn count_total_discoveries(r: ArrayView2<'_, f64>, rho: f64) -> usize {
    r.iter().filter(|v| v.abs() > rho).count()
}

fn expect_absolute(d: &EmpiricalDistribution) {
    debug_assert_eq!(
        d.signedness(),
        Signedness::Absolute,
        "discovery rates are defined on absolute correlations"
    );
}

/// `1 - F(rho)` on the absolute inter-correlations.
pub fn nu_e_hat(d: &EmpiricalDistribution, rho: f64) -> f64 {
    expect_absolute(d);
    d.count_above(rho) as f64 / d.count() as f64
}

/// `1 - F(rho)^{p_b}` on the absolute inter-correlations.
///
/// Evaluated as `(1 - F) * (1 + F + ... + F^{p_b - 1})` with `1 - F` taken
/// from the exceedance count, so the result never rounds below
/// [`nu_e_hat`].
pub fn nu_hat(d: &EmpiricalDistribution, p_b: usize, rho: f64) -> f64 {
    expect_absolute(d);
    let above = nu_e_hat(d, rho);
    let f = d.ecdf(rho);
    let geometric = (0..p_b).fold(0.0, |acc, _| acc * f + 1.0);
    (above * geometric).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// Maximum-based count `N^{ab}`.
    MaxCount,
    /// Sum-based count `N_e^{ab}`.
    TotalCount,
    NuHat,
    NuEHat,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::MaxCount,
        Statistic::TotalCount,
        Statistic::NuHat,
        Statistic::NuEHat,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Statistic::MaxCount => "N_ab",
            Statistic::TotalCount => "N_e_ab",
            Statistic::NuHat => "nu_hat",
            Statistic::NuEHat => "nu_e_hat",
        }
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.tag() == s)
            .ok_or_else(|| Error::usage(format!("unknown statistic `{s}`")))
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// `points` uniformly spaced thresholds on `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| k as f64 / (points - 1) as f64)
            .collect(),
    }
}

pub enum DiscoverySource<'a> {
    /// A full `p_a x p_b` correlation matrix; supports every statistic.
    Matrix(ArrayView2<'a, f64>),
    /// Absolute inter-correlations; counts need `p_a` and `p_b`.
    Distribution {
        dist: &'a EmpiricalDistribution,
        p_a: Option<usize>,
        p_b: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub statistic: Statistic,
}

impl DiscoveryCurve {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::usage("threshold grid must lie in [0, 1]"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::usage("threshold grid must be ascending"));
    }
    Ok(())
}

/// Evaluates one statistic over an ascending threshold grid.
pub fn discovery_curve(source: DiscoverySource<'_>, statistic: Statistic, grid: &[f64]) -> Result<DiscoveryCurve> {
    check_grid(grid)?;
    let values: Vec<f64> = match source {
        DiscoverySource::Matrix(r) => {
            let dist = EmpiricalDistribution::absolute(r.iter().copied().collect())?;
            grid.iter()
                .map(|&rho| match statistic {
                    Statistic::MaxCount => count_max_discoveries(r, rho) as f64,
                    Statistic::TotalCount => count_total_discoveries(r, rho) as f64,
                    Statistic::NuHat => nu_hat(&dist, r.ncols(), rho),
                    Statistic::NuEHat => nu_e_hat(&dist, rho),
                })
                .collect()
        }
        DiscoverySource::Distribution { dist, p_a, p_b } => {
            if dist.signedness() != Signedness::Absolute {
                return Err(Error::usage("discovery curves need absolute correlations"));
            }
            match statistic {
                Statistic::MaxCount => {
                    return Err(Error::usage(
                        "the maximum-based count needs the correlation matrix",
                    ))
                }
                Statistic::TotalCount => {
                    let (Some(pa), Some(pb)) = (p_a, p_b) else {
                        return Err(Error::usage("total count needs p_a and p_b"));
                    };
                    if pa * pb != dist.count() {
                        return Err(Error::usage("p_a * p_b differs from the sample size"));
                    }
                    grid.iter().map(|&rho| dist.count_above(rho) as f64).collect()
                }
                Statistic::NuHat => {
                    let Some(pb) = p_b else {
                        return Err(Error::usage("nu_hat needs p_b"));
                    };
                    grid.iter().map(|&rho| nu_hat(dist, pb, rho)).collect()
                }
                Statistic::NuEHat => grid.iter().map(|&rho| nu_e_hat(dist, rho)).collect(),
            }
        }
    };
    Ok(DiscoveryCurve {
        grid: grid.to_vec(),
        values,
        statistic,
    })
}

/// Monte Carlo estimate of `E[N^{ab}(rho)] / p_a` for the first two regions
/// of `config`, averaging `reps` independent draws. Replicate `r` uses the
/// stream `(seed, "mc-max-discoveries", r)`.
pub fn mc_mean_max_discoveries(config: &SimulationConfig, grid: &[f64], reps: usize, seed: u64) -> Result<Vec<f64>> {
    let per_rep = mc_max_discovery_replicates(config, grid, reps, seed)?;
    Ok((0..grid.len())
        .map(|k| crate::io::compensated_sum(per_rep.iter().map(|v| v[k])) / reps as f64)
        .collect())
}

/// Per-replicate `N_ab / p_a` curves for the first two regions of `config`.
pub fn mc_max_discovery_replicates(config: &SimulationConfig, grid: &[f64], reps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if reps == 0 || config.regions.len() < 2 {
        return Err(Error::usage("need reps >= 1 and two regions"));
    }
    check_grid(grid)?;
    let plan = SimulationPlan::new(config)?;
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = StreamKey::new(seed).label("mc-max-discoveries").index(r as u64).rng();
            let ds = plan.draw(&mut rng);
            let m = inter_correlation_matrix(&ds.regions[0], &ds.regions[1])?;
            let pa = m.nrows() as f64;
            Ok(grid
                .iter()
                .map(|&rho| count_max_discoveries(m.view(), rho) as f64 / pa)
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn max_and_total_counts() {
        let r = array![[0.5, 0.1], [0.2, 0.3]];
        assert_eq!(count_max_discoveries(r.view(), 0.25), 2);
        assert_eq!(count_total_discoveries(r.view(), 0.25), 2);
        assert_eq!(count_max_discoveries(r.view(), 1.0), 0);
        assert_eq!(count_max_discoveries(r.view(), 0.0), 2);
        assert_eq!(count_total_discoveries(r.view(), 0.0), 4);
        assert_eq!(count_max_discoveries(r.view(), 0.4), 1);
        assert_eq!(count_total_discoveries(r.view(), 0.15), 3);
        let full = array![[1.0, -1.0]];
        assert_eq!(count_total_discoveries(full.view(), 1.0), 0);
    }

    #[test]
    fn normalized_rates() {
        let d = EmpiricalDistribution::absolute(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(nu_e_hat(&d, 0.4), 0.0);
        assert_eq!(nu_e_hat(&d, 0.25), 0.5);
        // F = 0.5 at rho = 0.25
        assert_eq!(nu_hat(&d, 2, 0.25), 0.75);
        for rho in [0.0, 0.15, 0.25, 0.35, 0.5] {
            assert_eq!(nu_hat(&d, 1, rho), nu_e_hat(&d, rho));
            assert!(nu_hat(&d, 7, rho) >= nu_e_hat(&d, rho));
        }
    }

    #[test]
    fn total_count_identity_on_example() {
        let r = array![[0.5, -0.1, 0.25], [0.2, 0.3, -0.7]];
        let d = EmpiricalDistribution::absolute(r.iter().copied().collect()).unwrap();
        for rho in uniform_grid(201) {
            let lhs = count_total_discoveries(r.view(), rho);
            assert_eq!(lhs, d.count_above(rho));
            assert_eq!(lhs as f64, (6.0 * nu_e_hat(&d, rho)).round());
        }
    }

    #[test]
    fn curve_on_constant_matrix() {
        let r = Array2::from_elem((3, 4), 0.5);
        let c = discovery_curve(DiscoverySource::Matrix(r.view()), Statistic::TotalCount, &[0.4, 0.5, 0.6]).unwrap();
        assert_eq!(c.values, vec![12.0, 0.0, 0.0]);
        let empty = discovery_curve(DiscoverySource::Matrix(r.view()), Statistic::NuHat, &[]).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn curve_errors() {
        assert!(matches!("N_x".parse::<Statistic>(), Err(Error::Usage(_))));
        let d = EmpiricalDistribution::absolute(vec![0.1, 0.2]).unwrap();
        let src = || DiscoverySource::Distribution { dist: &d, p_a: None, p_b: None };
        assert!(discovery_curve(src(), Statistic::MaxCount, &[0.1]).is_err());
        assert!(discovery_curve(src(), Statistic::NuEHat, &[0.3, 0.1]).is_err());
        assert!(discovery_curve(src(), Statistic::NuEHat, &[1.2]).is_err());
    }

    #[test]
    fn statistic_tags_roundtrip() {
        for s in Statistic::ALL {
            assert_eq!(s.tag().parse::<Statistic>().unwrap(), s);
        }
    }

    #[test]
    fn grid_shape() {
        let g = uniform_grid(DEFAULT_GRID_POINTS);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[200], 1.0);
        assert_eq!(g[100], 0.5);
    }
}
