//! Pearson correlation kernels and empirical distributions of correlations.
//!
//! Bulk correlations center each voxel series once and then evaluate every
//! pair as a centered inner product over the product of norms, with the
//! same summation order as [`pearson`]. The U-scores make the underlying
//! inner-product identity explicit on the sphere `S_{n-2}`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::dataset::RegionTimeSeries;
use crate::error::{Error, Result};

/// Rounding slack tolerated before a correlation is clamped to `[-1, 1]`.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Number of midpoints used to integrate quantile functions.
pub const WASSERSTEIN_GRID: usize = 512;

fn clamp_unit(r: f64) -> Result<f64> {
    if r.is_nan() {
        return Err(Error::Numerical("correlation is NaN".into()));
    }
    if r.abs() <= 1.0 {
        Ok(r)
    } else if r.abs() <= 1.0 + CLAMP_TOLERANCE {
        Ok(r.signum())
    } else {
        Err(Error::Numerical(format!("correlation {r} outside [-1, 1]")))
    }
}

/// Dot product with four interleaved accumulators. Every correlation in the
/// crate goes through this one summation order, so a series correlated with
/// itself gives exactly 1.
#[inline]
pub(crate) fn dot_lanes(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [0.0f64; 4];
    let mut xc = x.chunks_exact(4);
    let mut yc = y.chunks_exact(4);
    for (a, b) in (&mut xc).zip(&mut yc) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    for (a, b) in xc.remainder().iter().zip(yc.remainder()) {
        acc[0] += a * b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Rows minus their means, with the squared norms of the centered rows.
#[derive(Debug, Clone)]
pub(crate) struct CenteredRows {
    rows: Array2<f64>,
    sum_sq: Vec<f64>,
}

impl CenteredRows {
    /// `Err(i)` names the first constant (or non-finite) row.
    pub(crate) fn new(m: ArrayView2<'_, f64>) -> std::result::Result<Self, usize> {
        let mut rows = m.as_standard_layout().into_owned();
        let mut sum_sq = Vec::with_capacity(rows.nrows());
        for (i, mut row) in rows.axis_iter_mut(Axis(0)).enumerate() {
            let mean = row.sum() / row.len() as f64;
            row.mapv_inplace(|v| v - mean);
            let slice = row.as_slice().expect("standard layout");
            let ss = dot_lanes(slice, slice);
            if ss == 0.0 || !ss.is_finite() {
                return Err(i);
            }
            sum_sq.push(ss);
        }
        Ok(CenteredRows { rows, sum_sq })
    }

    pub(crate) fn len(&self) -> usize {
        self.sum_sq.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        self.rows.row(i).to_slice().expect("standard layout")
    }

    pub(crate) fn correlation(&self, i: usize, other: &CenteredRows, j: usize) -> f64 {
        let r = dot_lanes(self.row(i), other.row(j)) / (self.sum_sq[i] * other.sum_sq[j]).sqrt();
        // Cauchy-Schwarz bounds |r| by 1 up to rounding
        r.clamp(-1.0, 1.0)
    }

    /// Correlations of every row of `self` with every row of `other`.
    pub(crate) fn cross(&self, other: &CenteredRows) -> Array2<f64> {
        Array2::from_shape_fn((self.len(), other.len()), |(i, j)| self.correlation(i, other, j))
    }

    /// The upper-triangle correlations `(i < j)` of `self`, row-major.
    pub(crate) fn upper_triangle(&self) -> Vec<f64> {
        let p = self.len();
        let mut out = Vec::with_capacity(p * p.saturating_sub(1) / 2);
        for i in 0..p {
            for j in i + 1..p {
                out.push(self.correlation(i, self, j));
            }
        }
        out
    }
}

pub(crate) fn center_region(r: &RegionTimeSeries) -> Result<CenteredRows> {
    CenteredRows::new(r.values.view()).map_err(|i| Error::degenerate(r.voxel_location(i)))
}

/// Sample Pearson correlation of two equal-length series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson_view(ArrayView1::from(x), ArrayView1::from(y))
}

pub fn pearson_view(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::usage(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::usage("pearson needs at least two samples"));
    }
    let cx = CenteredRows::new(x.insert_axis(Axis(0))).map_err(|_| Error::degenerate("first series"))?;
    let cy = CenteredRows::new(y.insert_axis(Axis(0))).map_err(|_| Error::degenerate("second series"))?;
    let r = dot_lanes(cx.row(0), cy.row(0)) / (cx.sum_sq[0] * cy.sum_sq[0]).sqrt();
    clamp_unit(r)
}

/// Centers every row and scales it to unit norm. `Err(i)` names the first
/// constant row.
pub(crate) fn standardize_rows(m: ArrayView2<'_, f64>) -> std::result::Result<Array2<f64>, usize> {
    let c = CenteredRows::new(m)?;
    let mut out = c.rows;
    for (mut row, ss) in out.axis_iter_mut(Axis(0)).zip(&c.sum_sq) {
        let norm = ss.sqrt();
        row.mapv_inplace(|v| v / norm);
    }
    Ok(out)
}

/// Unit vectors on `S_{n-2}` whose inner products are Pearson correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct UScoreMatrix {
    /// `p x (n - 1)`.
    pub rows: Array2<f64>,
}

impl UScoreMatrix {
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.rows.row(i).dot(&self.rows.row(j))
    }

    /// All pairwise inner products `U Uᵀ`.
    pub fn gram(&self) -> Array2<f64> {
        self.rows.dot(&self.rows.t())
    }
}

/// U-scores of the rows of `m` (`p x n`, `n >= 3`).
///
/// The basis of the orthogonal complement of the all-ones vector is the
/// Helmert basis: its `k`-th vector is `(1, .., 1, -k, 0, .., 0) / sqrt(k(k+1))`
/// with `k` leading ones.
pub fn u_scores(m: ArrayView2<'_, f64>) -> Result<UScoreMatrix> {
    let n = m.ncols();
    if n < 3 {
        return Err(Error::usage("u-scores need at least three samples"));
    }
    let z = standardize_rows(m).map_err(|i| Error::degenerate(format!("row {i}")))?;
    let mut rows = Array2::zeros((m.nrows(), n - 1));
    for (zi, mut ui) in z.axis_iter(Axis(0)).zip(rows.axis_iter_mut(Axis(0))) {
        let mut prefix = 0.0;
        for k in 1..n {
            prefix += zi[k - 1];
            let kf = k as f64;
            ui[k - 1] = (prefix - kf * zi[k]) / (kf * (kf + 1.0)).sqrt();
        }
    }
    Ok(UScoreMatrix { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signedness {
    Signed,
    Absolute,
}

/// A sorted sample of correlations with ecdf and quantile evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    signedness: Signedness,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>, signedness: Signedness) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("empirical distribution needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::usage("empirical distribution values must be finite"));
        }
        if signedness == Signedness::Absolute && values.iter().any(|&v| v < 0.0) {
            return Err(Error::usage("absolute distribution holds a negative value"));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution { values, signedness })
    }

    pub fn signed(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Signedness::Signed)
    }

    /// Takes absolute values of `values`.
    pub fn absolute(values: Vec<f64>) -> Result<Self> {
        Self::new(values.into_iter().map(f64::abs).collect(), Signedness::Absolute)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn signedness(&self) -> Signedness {
        self.signedness
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        crate::io::compensated_sum(self.values.iter().copied()) / self.count() as f64
    }

    /// Number of stored values strictly greater than `rho`.
    pub fn count_above(&self, rho: f64) -> usize {
        self.values.len() - self.values.partition_point(|&v| v <= rho)
    }

    /// Fraction of stored values `<= rho`.
    pub fn ecdf(&self, rho: f64) -> f64 {
        self.values.partition_point(|&v| v <= rho) as f64 / self.count() as f64
    }

    /// Left-continuous generalized inverse of the ecdf: the smallest stored
    /// value `x` with `ecdf(x) >= c`. `c <= 0` gives the minimum.
    pub fn quantile(&self, c: f64) -> f64 {
        let m = self.count();
        let mf = m as f64;
        // smallest k in 1..=m with k / m >= c, evaluated exactly like ecdf
        let mut k = (c * mf).ceil().clamp(1.0, mf) as usize;
        while k > 1 && (k - 1) as f64 / mf >= c {
            k -= 1;
        }
        while k < m && (k as f64) / mf < c {
            k += 1;
        }
        self.values[k - 1]
    }

    /// Merges several samples of the same signedness.
    pub fn pooled(parts: Vec<EmpiricalDistribution>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::usage("nothing to pool"));
        };
        let signedness = first.signedness;
        if parts.iter().any(|p| p.signedness != signedness) {
            return Err(Error::usage("cannot pool signed and absolute distributions"));
        }
        let values = parts.into_iter().flat_map(|p| p.values).collect();
        Self::new(values, signedness)
    }
}

pub fn ecdf_eval(d: &EmpiricalDistribution, rho: f64) -> f64 {
    d.ecdf(rho)
}

pub fn quantile(d: &EmpiricalDistribution, c: f64) -> f64 {
    d.quantile(c)
}

/// The full `p_a x p_b` matrix of inter-correlations.
pub fn inter_correlation_matrix(a: &RegionTimeSeries, b: &RegionTimeSeries) -> Result<Array2<f64>> {
    if a.n() != b.n() {
        return Err(Error::usage(format!(
            "regions {} and {} have different sample counts",
            a.region_id, b.region_id
        )));
    }
    if a.region_id == b.region_id {
        return Err(Error::usage(format!(
            "inter-correlation needs two distinct regions, got {} twice",
            a.region_id
        )));
    }
    Ok(center_region(a)?.cross(&center_region(b)?))
}

pub fn inter_correlations(
    a: &RegionTimeSeries,
    b: &RegionTimeSeries,
    absolute: bool,
) -> Result<EmpiricalDistribution> {
    let r = inter_correlation_matrix(a, b)?;
    let values = r.into_raw_vec_and_offset().0;
    if absolute {
        EmpiricalDistribution::absolute(values)
    } else {
        EmpiricalDistribution::signed(values)
    }
}

/// The `p(p-1)/2` distinct off-diagonal intra-correlations, row-major over
/// the upper triangle.
pub fn intra_correlation_values(a: &RegionTimeSeries) -> Result<Vec<f64>> {
    if a.p() < 2 {
        return Err(Error::usage(format!(
            "region {} needs at least two voxels for intra-correlations",
            a.region_id
        )));
    }
    Ok(center_region(a)?.upper_triangle())
}

pub fn intra_correlations(a: &RegionTimeSeries, absolute: bool) -> Result<EmpiricalDistribution> {
    let values = intra_correlation_values(a)?;
    if absolute {
        EmpiricalDistribution::absolute(values)
    } else {
        EmpiricalDistribution::signed(values)
    }
}

fn grid_point(k: usize) -> f64 {
    (k as f64 + 0.5) / WASSERSTEIN_GRID as f64
}

/// Squared 2-Wasserstein distance, integrating squared quantile differences
/// with the midpoint rule on [`WASSERSTEIN_GRID`] points.
pub fn wasserstein2(da: &EmpiricalDistribution, db: &EmpiricalDistribution) -> Result<f64> {
    if da.signedness() != db.signedness() {
        return Err(Error::usage(
            "wasserstein distance between a signed and an absolute distribution",
        ));
    }
    let total: f64 = (0..WASSERSTEIN_GRID)
        .map(|k| {
            let c = grid_point(k);
            let d = da.quantile(c) - db.quantile(c);
            d * d
        })
        .sum();
    Ok(total / WASSERSTEIN_GRID as f64)
}

/// Asymptotic variance of the maximum-likelihood inter-correlation estimator
/// for two homoscedastic groups with constant intra- and inter-correlation.
pub fn elston_variance(rho_ab: f64, rho_aa: f64, rho_bb: f64, p_a: usize, p_b: usize, n: usize) -> f64 {
    let (pa, pb, n) = (p_a as f64, p_b as f64, n as f64);
    let r2 = rho_ab * rho_ab;
    let first = (r2 - (1.0 + (pa - 1.0) * rho_aa) / pa) * (r2 - (1.0 + (pb - 1.0) * rho_bb) / pb) / n;
    let second = r2 / (2.0 * n)
        * ((pa - 1.0) / pa * (1.0 - rho_aa).powi(2) + (pb - 1.0) / pb * (1.0 - rho_bb).powi(2));
    first + second
}

/// Both sides of the upper bound on the mean inter-correlation implied by
/// dissimilar intra-correlation distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WassersteinBoundReport {
    /// Minimum over the quantile grid of the squared intra quantile gap.
    pub a: f64,
    pub d_w2: f64,
    pub mean_inter: f64,
    /// `1 - sqrt(a) / 2`.
    pub bound: f64,
    pub assumption_holds: bool,
    pub bound_holds: bool,
}

pub fn wasserstein_bound_report(a: &RegionTimeSeries, b: &RegionTimeSeries) -> Result<WassersteinBoundReport> {
    let intra_a = intra_correlations(a, false)?;
    let intra_b = intra_correlations(b, false)?;
    let a_min = (0..WASSERSTEIN_GRID)
        .map(|k| {
            let c = grid_point(k);
            (intra_a.quantile(c) - intra_b.quantile(c)).powi(2)
        })
        .fold(f64::INFINITY, f64::min);
    let d_w2 = wasserstein2(&intra_a, &intra_b)?;

    // Same data passed twice is allowed here: the bound is then trivial.
    let inter = center_region(a)?.cross(&center_region(b)?);
    let mean_inter = crate::io::compensated_sum(inter.iter().copied()) / inter.len() as f64;

    let bound = 1.0 - a_min.sqrt() / 2.0;
    Ok(WassersteinBoundReport {
        a: a_min,
        d_w2,
        mean_inter,
        bound,
        assumption_holds: d_w2 >= a_min && a_min > 0.0,
        bound_holds: mean_inter <= bound,
    })
}

/// Column-wise mean over voxels.
pub fn column_means(m: ArrayView2<'_, f64>) -> Array1<f64> {
    m.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(m.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        // centered: x=(-1.5,-.5,.5,1.5), y=(-1.5,.5,-.5,1.5); sxy=4, sxx=syy=5
        assert_abs_diff_eq!(
            pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(),
            0.8,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateSeries { .. })
        ));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn u_score_examples() {
        let u = u_scores(array![[1.0, 2.0, 3.0], [3.0, 2.0, 1.0]].view()).unwrap();
        assert_abs_diff_eq!(u.dot(0, 1), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(u.dot(0, 0), 1.0, epsilon = 1e-12);
        assert_eq!(u.rows.ncols(), 2);
    }

    #[test]
    fn u_scores_match_pearson_on_random_matrix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let m = Array2::from_shape_fn((5, 20), |_| rng.random::<f64>());
        let u = u_scores(m.view()).unwrap();
        for i in 0..5 {
            assert_abs_diff_eq!(u.rows.row(i).dot(&u.rows.row(i)), 1.0, epsilon = 1e-9);
            for j in 0..5 {
                let r = pearson_view(m.row(i), m.row(j)).unwrap();
                assert!((u.dot(i, j) - r).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn u_scores_reject_constant_row() {
        assert!(matches!(
            u_scores(array![[1.0, 2.0, 3.0], [2.0, 2.0, 2.0]].view()),
            Err(Error::DegenerateSeries { .. })
        ));
    }

    #[test]
    fn ecdf_examples() {
        let d = EmpiricalDistribution::absolute(vec![0.3, 0.1, 0.2]).unwrap();
        assert_abs_diff_eq!(d.ecdf(0.2), 2.0 / 3.0);
        assert_eq!(d.ecdf(1.0), 1.0);
        assert_eq!(d.ecdf(-0.5), 0.0);
        assert_eq!(d.ecdf(0.3), 1.0);
        assert_eq!(d.ecdf(0.0999), 0.0);
    }

    #[test]
    fn quantile_examples() {
        let d = EmpiricalDistribution::absolute(vec![0.4, 0.1, 0.3, 0.2]).unwrap();
        assert_eq!(d.quantile(0.5), 0.2);
        assert_eq!(d.quantile(1.0), 0.4);
        assert_eq!(d.quantile(0.0), 0.1);
        assert_eq!(d.quantile(0.51), 0.3);
    }

    #[test]
    fn quantile_is_exact_at_awkward_levels() {
        // 0.95 * 22500 is not exactly representable.
        let m = 22_500;
        let d = EmpiricalDistribution::absolute((0..m).map(|i| i as f64 / m as f64).collect()).unwrap();
        for &c in &[0.95, 0.99, 0.1, 1.0 - 1e-9] {
            let q = d.quantile(c);
            assert!(d.ecdf(q) >= c);
            let below = d.values().partition_point(|&v| v < q);
            if below > 0 {
                assert!(d.ecdf(d.values()[below - 1]) < c);
            }
        }
    }

    #[test]
    fn distribution_rejects_bad_input() {
        assert!(EmpiricalDistribution::absolute(vec![]).is_err());
        assert!(EmpiricalDistribution::signed(vec![f64::NAN]).is_err());
        assert!(EmpiricalDistribution::new(vec![-0.1], Signedness::Absolute).is_err());
    }

    #[test]
    fn wasserstein_examples() {
        let a = EmpiricalDistribution::absolute(vec![0.2]).unwrap();
        let b = EmpiricalDistribution::absolute(vec![0.5]).unwrap();
        assert_abs_diff_eq!(wasserstein2(&a, &b).unwrap(), 0.09, epsilon = 1e-15);
        assert_eq!(wasserstein2(&a, &a).unwrap(), 0.0);
        let c = EmpiricalDistribution::absolute(vec![0.0, 1.0]).unwrap();
        let d = EmpiricalDistribution::absolute(vec![1.0, 0.0]).unwrap();
        assert_eq!(wasserstein2(&c, &d).unwrap(), 0.0);
        let s = EmpiricalDistribution::signed(vec![0.2]).unwrap();
        assert!(wasserstein2(&a, &s).is_err());
    }

    #[test]
    fn elston_examples() {
        assert_abs_diff_eq!(elston_variance(0.0, 0.3, 0.7, 1, 1, 100), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(elston_variance(0.0, 0.5, 0.5, 2, 2, 10), 0.05625, epsilon = 1e-15);
        assert_eq!(elston_variance(1.0, 1.0, 1.0, 2, 2, 37), 0.0);
        let rho: f64 = 0.35;
        assert_abs_diff_eq!(
            elston_variance(rho, 0.2, 0.9, 1, 1, 50),
            (1.0 - rho * rho).powi(2) / 50.0,
            epsilon = 1e-15
        );
    }

    fn region(id: &str, values: Array2<f64>) -> RegionTimeSeries {
        RegionTimeSeries::new(id, values)
    }

    #[test]
    fn inter_and_intra_cardinalities() {
        let a = region("a", array![[1.0, 2.0, 3.0, 4.0, 6.0], [2.0, 1.0, 4.0, 3.0, 5.0]]);
        let b = region(
            "b",
            array![[1.0, 0.0, 3.0, 1.0, 2.0], [5.0, 4.0, 3.0, 2.0, 1.0], [0.0, 1.0, 0.0, 1.0, 3.0]],
        );
        assert_eq!(inter_correlations(&a, &b, true).unwrap().count(), 6);
        assert_eq!(intra_correlations(&a, false).unwrap().count(), 1);
        let c = region("c", Array2::from_shape_fn((4, 6), |(i, t)| ((i + 1) * t * t) as f64 + (i as f64) * (t as f64).sin()));
        assert_eq!(intra_correlations(&c, true).unwrap().count(), 6);

        let same = region("x", array![[1.0, 2.0, 0.0, 5.0, 3.0]]);
        let twin = region("y", array![[1.0, 2.0, 0.0, 5.0, 3.0]]);
        let d = inter_correlations(&same, &twin, true).unwrap();
        assert_eq!(d.values(), &[1.0]);
    }

    #[test]
    fn degenerate_voxel_is_located() {
        let a = region("a", array![[1.0, 2.0, 3.0, 4.0, 6.0], [2.0, 2.0, 2.0, 2.0, 2.0]]);
        let b = region("b", array![[1.0, 0.0, 3.0, 1.0, 2.0]]);
        match inter_correlations(&a, &b, true) {
            Err(Error::DegenerateSeries { location }) => {
                assert!(location.contains("region a") && location.contains("v2"), "{location}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bound_report_on_identical_regions() {
        let a = region("a", array![[1.0, 2.0, 3.0, 4.0, 6.0], [2.0, 1.0, 4.0, 3.0, 5.0], [0.0, 1.0, 0.5, 3.0, 1.0]]);
        let rep = wasserstein_bound_report(&a, &a).unwrap();
        assert_eq!(rep.a, 0.0);
        assert_eq!(rep.bound, 1.0);
        assert!(rep.bound_holds);
        assert!(!rep.assumption_holds);
    }
}
