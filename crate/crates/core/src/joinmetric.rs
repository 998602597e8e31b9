//! Exact join-quality metrics.
//!
//! Two raw measurements are taken over column value multisets: the multiset
//! Jaccard index `J` (bounded in [0, 0.5]) and the cardinality proportion `K`
//! (ratio of the smaller to the larger distinct-value count). From those, a
//! discrete quality level and a continuous quality score in [0, 1] are
//! derived; the continuous score is the product of two truncated-normal CDFs,
//! one per measurement, with a `strictness` shift applied to the J-side mean.
//!
//! The module also carries the distribution-fitting machinery: a 1-D
//! Wasserstein distance between an empirical sample and a model CDF, and an
//! exhaustive grid search that fits truncated-normal parameters by minimizing
//! that distance.

use serde::{Deserialize, Serialize};

use crate::catalog::ColumnValues;
use crate::error::{Error, Result};

/// Exact measurements for one column pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JoinMeasures {
    /// Multiset Jaccard index, in [0, 0.5].
    pub j: f64,
    /// Cardinality proportion (distinct-count ratio), in (0, 1].
    pub k: f64,
}

/// Parameters of the continuous quality metric: one truncated normal per
/// measurement, both truncated to [0, 1], plus the strictness shift added to
/// the J-side mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityParams {
    pub mu_j: f64,
    pub mu_k: f64,
    pub sigma_j: f64,
    pub sigma_k: f64,
    pub strictness: f64,
}

impl Default for QualityParams {
    fn default() -> Self {
        QualityParams {
            mu_j: 0.0,
            mu_k: 0.44,
            sigma_j: 0.19,
            sigma_k: 0.28,
            strictness: 0.25,
        }
    }
}

impl QualityParams {
    /// Default parameters at a given strictness.
    pub fn with_strictness(strictness: f64) -> Self {
        QualityParams {
            strictness,
            ..QualityParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_j > 0.0) {
            return Err(Error::Domain {
                what: "sigma_j",
                value: self.sigma_j,
            });
        }
        if !(self.sigma_k > 0.0) {
            return Err(Error::Domain {
                what: "sigma_k",
                value: self.sigma_k,
            });
        }
        if !(self.strictness >= 0.0) {
            return Err(Error::Domain {
                what: "strictness",
                value: self.strictness,
            });
        }
        Ok(())
    }
}

fn require_nonempty(v: &ColumnValues, side: &str) -> Result<()> {
    if v.total_count() == 0 {
        return Err(Error::EmptyColumn(side.to_string()));
    }
    Ok(())
}

/// Multiset Jaccard index: sum over values of the smaller multiplicity,
/// divided by the sum of both multiset sizes.
pub fn multiset_jaccard(a: &ColumnValues, b: &ColumnValues) -> Result<f64> {
    require_nonempty(a, "left operand of multiset_jaccard")?;
    require_nonempty(b, "right operand of multiset_jaccard")?;
    // Iterate the side with fewer distinct values.
    let (small, large) = if a.distinct_count() <= b.distinct_count() {
        (a, b)
    } else {
        (b, a)
    };
    let mut shared: u64 = 0;
    for (value, count) in small.counts() {
        shared += (*count).min(large.count_of(value));
    }
    Ok(shared as f64 / (a.total_count() + b.total_count()) as f64)
}

/// Cardinality proportion: smaller distinct count over larger distinct count.
pub fn cardinality_proportion(a: &ColumnValues, b: &ColumnValues) -> Result<f64> {
    require_nonempty(a, "left operand of cardinality_proportion")?;
    require_nonempty(b, "right operand of cardinality_proportion")?;
    let da = a.distinct_count() as f64;
    let db = b.distinct_count() as f64;
    Ok(da.min(db) / da.max(db))
}

/// Both exact measurements for a pair.
pub fn measure(a: &ColumnValues, b: &ColumnValues) -> Result<JoinMeasures> {
    Ok(JoinMeasures {
        j: multiset_jaccard(a, b)?,
        k: cardinality_proportion(a, b)?,
    })
}

/// Discrete quality level in [0, L].
///
/// Level `i` (1-based) requires `j >= 2^-(L-i+1)` and `k >= (i-1)/L`; the
/// result is the largest qualifying level, or 0 when even level 1 fails.
/// Thresholds tighten as `i` grows, so the qualifying set is downward closed
/// and the result is monotone in both `j` and `k`.
pub fn discrete_quality(j: f64, k: f64, levels: u32) -> Result<u32> {
    if !(0.0..=0.5).contains(&j) {
        return Err(Error::Domain { what: "j", value: j });
    }
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::Domain { what: "k", value: k });
    }
    if levels < 1 {
        return Err(Error::Domain {
            what: "levels",
            value: levels as f64,
        });
    }
    let mut best = 0;
    for i in 1..=levels {
        let j_min = 2f64.powi(-((levels - i + 1) as i32));
        let k_min = (i - 1) as f64 / levels as f64;
        if j >= j_min && k >= k_min {
            best = i;
        }
    }
    Ok(best)
}

/// Error function, Abramowitz & Stegun 7.1.26 rational approximation.
/// Absolute error below 1.5e-7, which is enough for every tolerance used
/// by the quality metric.
pub fn erf(x: f64) -> f64 {
    const P: f64 = 0.327_591_1;
    const A1: f64 = 0.254_829_592;
    const A2: f64 = -0.284_496_736;
    const A3: f64 = 1.421_413_741;
    const A4: f64 = -1.453_152_027;
    const A5: f64 = 1.061_405_429;

    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (A1 + t * (A2 + t * (A3 + t * (A4 + t * A5))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x * std::f64::consts::FRAC_1_SQRT_2))
}

/// CDF of a normal(mu, sigma) truncated to [a, b], evaluated at x in [a, b].
pub fn truncated_normal_cdf(mu: f64, sigma: f64, a: f64, b: f64, x: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain {
            what: "sigma",
            value: sigma,
        });
    }
    if !(a < b) {
        return Err(Error::Domain { what: "a", value: a });
    }
    if !(a..=b).contains(&x) {
        return Err(Error::Domain { what: "x", value: x });
    }
    let phi_a = normal_cdf((a - mu) / sigma);
    let phi_b = normal_cdf((b - mu) / sigma);
    let phi_x = normal_cdf((x - mu) / sigma);
    Ok(((phi_x - phi_a) / (phi_b - phi_a)).clamp(0.0, 1.0))
}

/// Continuous join quality in [0, 1]: the product of the J-side truncated
/// normal CDF (mean shifted by strictness) and the K-side CDF.
pub fn continuous_quality(j: f64, k: f64, params: &QualityParams) -> Result<f64> {
    if !(0.0..=0.5).contains(&j) {
        return Err(Error::Domain { what: "j", value: j });
    }
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::Domain { what: "k", value: k });
    }
    params.validate()?;
    let cdf_j = truncated_normal_cdf(params.mu_j + params.strictness, params.sigma_j, 0.0, 1.0, j)?;
    let cdf_k = truncated_normal_cdf(params.mu_k, params.sigma_k, 0.0, 1.0, k)?;
    Ok(cdf_j * cdf_k)
}

/// Step width used to integrate within segments of [`wasserstein_1d`],
/// relative to the domain width.
const WASSERSTEIN_RESOLUTION: f64 = 1e-3;

/// 1-D Wasserstein distance between an empirical sample (sorted ascending)
/// and a model CDF on [a, b]: the integral of |F_emp - F_model|.
///
/// The empirical CDF is constant between consecutive sample points, so the
/// integral is taken segment by segment with a midpoint rule at resolution
/// 1e-3 of the domain width.
pub fn wasserstein_1d<F>(empirical: &[f64], model_cdf: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if empirical.is_empty() {
        return Err(Error::TooFew {
            what: "empirical samples",
            need: 1,
            got: 0,
        });
    }
    if !(a < b) {
        return Err(Error::Domain { what: "a", value: a });
    }
    let n = empirical.len() as f64;
    let max_step = WASSERSTEIN_RESOLUTION * (b - a);

    let mut total = 0.0;
    let mut lo = a;
    let mut below = 0usize; // samples <= lo
    let mut i = 0usize;
    loop {
        // Next breakpoint: the next distinct sample, or b.
        while i < empirical.len() && empirical[i] <= lo {
            below += 1;
            i += 1;
        }
        let hi = if i < empirical.len() {
            empirical[i].min(b)
        } else {
            b
        };
        if hi > lo {
            let f_emp = below as f64 / n;
            let steps = ((hi - lo) / max_step).ceil().max(1.0) as usize;
            let h = (hi - lo) / steps as f64;
            let mut seg = 0.0;
            for s in 0..steps {
                let x = lo + (s as f64 + 0.5) * h;
                seg += (f_emp - model_cdf(x)).abs();
            }
            total += seg * h;
        }
        if hi >= b {
            break;
        }
        lo = hi;
    }
    Ok(total)
}

/// Fit a truncated normal on [0, 1] to samples by exhaustive grid search,
/// minimizing the 1-D Wasserstein distance. The grid runs `mu` over [0, 1]
/// and `sigma` over [grid_step, 1], both at `grid_step` resolution; ties are
/// broken toward the smaller `mu`, then the smaller `sigma`.
pub fn fit_truncated_normal(samples: &[f64], grid_step: f64) -> Result<(f64, f64)> {
    if samples.len() < 10 {
        return Err(Error::TooFew {
            what: "samples",
            need: 10,
            got: samples.len(),
        });
    }
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::Domain {
            what: "grid_step",
            value: grid_step,
        });
    }
    for &s in samples {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain {
                what: "sample",
                value: s,
            });
        }
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);

    let steps = (1.0 / grid_step).round() as usize;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for mu_i in 0..=steps {
        let mu = mu_i as f64 * grid_step;
        for sigma_i in 1..=steps {
            let sigma = sigma_i as f64 * grid_step;
            let d = wasserstein_1d(
                &sorted,
                |x| truncated_normal_cdf(mu, sigma, 0.0, 1.0, x).unwrap_or(0.0),
                0.0,
                1.0,
            )?;
            if d < best.0 {
                best = (d, mu, sigma);
            }
        }
    }
    Ok((best.1, best.2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ColumnValues;

    fn values(cells: &[&str]) -> ColumnValues {
        ColumnValues::from_cells(cells.iter().map(|s| s.to_string()))
    }

    /// Trapezoid-rule CDF of a normal(mu, sigma) truncated to [a, b]: the
    /// cumulative integral of the normal pdf, renormalized. Independent of
    /// the erf-based implementation.
    pub(crate) fn quadrature_cdf(mu: f64, sigma: f64, a: f64, b: f64, x: f64) -> f64 {
        let pdf = |t: f64| {
            let z = (t - mu) / sigma;
            (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let integrate = |lo: f64, hi: f64| {
            if hi <= lo {
                return 0.0;
            }
            let steps = 200_000;
            let h = (hi - lo) / steps as f64;
            let mut sum = 0.5 * (pdf(lo) + pdf(hi));
            for i in 1..steps {
                sum += pdf(lo + i as f64 * h);
            }
            sum * h
        };
        integrate(a, x) / integrate(a, b)
    }

    #[test]
    fn jaccard_equal_size_and_containment_scenarios() {
        // Scenario 1: |A| = |B| = 1000, 500 shared values.
        let a = ColumnValues::from_cells((0..1000).map(|i| format!("v{i}")));
        let b = ColumnValues::from_cells((500..1500).map(|i| format!("v{i}")));
        assert_eq!(multiset_jaccard(&a, &b).unwrap(), 0.25);
        // Scenario 2: |C| = 500 fully contained in |D| = 1500.
        let c = ColumnValues::from_cells((0..500).map(|i| format!("v{i}")));
        let d = ColumnValues::from_cells((0..1500).map(|i| format!("v{i}")));
        assert_eq!(multiset_jaccard(&c, &d).unwrap(), 0.25);
    }

    #[test]
    fn jaccard_self_join_is_half() {
        let a = values(&["x", "x", "y", "z"]);
        assert_eq!(multiset_jaccard(&a, &a).unwrap(), 0.5);
    }

    #[test]
    fn jaccard_min_multiplicities() {
        // A = {x,x,y}, B = {x,y,y,z}: shared = min(2,1) + min(1,2) = 2.
        let a = values(&["x", "x", "y"]);
        let b = values(&["x", "y", "y", "z"]);
        let j = multiset_jaccard(&a, &b).unwrap();
        assert!((j - 2.0 / 7.0).abs() < 1e-15, "j = {j}");
        assert_eq!(j, multiset_jaccard(&b, &a).unwrap());
    }

    #[test]
    fn jaccard_empty_input_is_error() {
        let a = values(&["x"]);
        let empty = ColumnValues::from_cells(std::iter::empty::<String>());
        assert!(matches!(
            multiset_jaccard(&a, &empty),
            Err(Error::EmptyColumn(_))
        ));
    }

    #[test]
    fn cardinality_proportion_known_scenarios() {
        let a = ColumnValues::from_cells((0..1000).map(|i| format!("v{i}")));
        let b = ColumnValues::from_cells((1000..2000).map(|i| format!("v{i}")));
        assert_eq!(cardinality_proportion(&a, &b).unwrap(), 1.0);
        let c = ColumnValues::from_cells((0..500).map(|i| format!("v{i}")));
        let d = ColumnValues::from_cells((0..1500).map(|i| format!("v{i}")));
        let k = cardinality_proportion(&c, &d).unwrap();
        assert!((k - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cardinality_proportion_small_ratio() {
        let a = values(&["a", "b", "c"]);
        let b = ColumnValues::from_cells((0..12).map(|i| format!("v{i}")));
        assert_eq!(cardinality_proportion(&a, &b).unwrap(), 0.25);
    }

    #[test]
    fn discrete_quality_known_labels() {
        // Example scenarios with L = 4: (0.25, 1) -> High (3),
        // (0.25, 0.33) -> Medium (2).
        assert_eq!(discrete_quality(0.25, 1.0, 4).unwrap(), 3);
        assert_eq!(discrete_quality(0.25, 1.0 / 3.0, 4).unwrap(), 2);
        assert_eq!(discrete_quality(0.0, 1.0, 4).unwrap(), 0);
        assert_eq!(discrete_quality(0.5, 1.0, 4).unwrap(), 4);
    }

    #[test]
    fn discrete_quality_rejects_out_of_range() {
        assert!(discrete_quality(0.6, 0.5, 4).is_err());
        assert!(discrete_quality(0.2, 1.5, 4).is_err());
        assert!(discrete_quality(-0.1, 0.5, 4).is_err());
    }

    #[test]
    fn discrete_quality_monotone_on_grid() {
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 100.0).collect();
        for &j in &grid {
            for k in (0..=100).map(|i| i as f64 / 100.0) {
                let q = discrete_quality(j, k, 4).unwrap();
                if j + 0.01 <= 0.5 {
                    assert!(discrete_quality(j + 0.01, k, 4).unwrap() >= q);
                }
                if k + 0.01 <= 1.0 {
                    assert!(discrete_quality(j, k + 0.01, 4).unwrap() >= q);
                }
            }
        }
    }

    #[test]
    fn erf_reference_points() {
        // erf(1) = 0.84270079..., erf(3) = 0.99997791...
        assert!((erf(0.0)).abs() < 2e-7);
        assert!((erf(1.0) - 0.842_700_792_9).abs() < 2e-7);
        assert!((erf(3.0) - 0.999_977_909_5).abs() < 2e-7);
        assert!((erf(-1.0) + erf(1.0)).abs() < 1e-12);
    }

    #[test]
    fn truncated_cdf_endpoints_exact() {
        for &(mu, sigma) in &[(0.0, 0.19), (0.44, 0.28), (0.25, 0.19), (0.5, 0.19)] {
            assert_eq!(truncated_normal_cdf(mu, sigma, 0.0, 1.0, 0.0).unwrap(), 0.0);
            assert_eq!(truncated_normal_cdf(mu, sigma, 0.0, 1.0, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn truncated_cdf_symmetric_midpoint() {
        for &sigma in &[0.1, 0.19, 0.28, 0.5] {
            let c = truncated_normal_cdf(0.5, sigma, 0.0, 1.0, 0.5).unwrap();
            assert!((c - 0.5).abs() < 1e-7, "sigma {sigma}: {c}");
        }
    }

    #[test]
    fn truncated_cdf_matches_quadrature() {
        // Value checked against high-precision quadrature of the pdf.
        let got = truncated_normal_cdf(0.44, 0.28, 0.0, 1.0, 0.7).unwrap();
        let want = quadrature_cdf(0.44, 0.28, 0.0, 1.0, 0.7);
        assert!((got - want).abs() < 1e-6, "got {got}, want {want}");
        assert!((want - 0.832_676_135_4).abs() < 1e-7);
    }

    #[test]
    fn truncated_cdf_rejects_bad_domain() {
        assert!(truncated_normal_cdf(0.0, 0.19, 0.0, 1.0, 1.5).is_err());
        assert!(truncated_normal_cdf(0.0, 0.19, 0.0, 1.0, -0.1).is_err());
        assert!(truncated_normal_cdf(0.0, 0.0, 0.0, 1.0, 0.5).is_err());
        assert!(truncated_normal_cdf(0.0, -1.0, 0.0, 1.0, 0.5).is_err());
        assert!(truncated_normal_cdf(0.0, 0.19, 1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn continuous_quality_zero_at_zero_j() {
        for &(k, s) in &[(0.0, 0.0), (0.5, 0.25), (1.0, 0.5)] {
            let q = continuous_quality(0.0, k, &QualityParams::with_strictness(s)).unwrap();
            assert_eq!(q, 0.0);
        }
    }

    #[test]
    fn continuous_quality_top_corner() {
        // (j, k) = (0.5, 1) at s = 0: the K term is exactly 1 and the J term
        // equals the truncated CDF at 0.5, which quadrature puts at 0.991501.
        let q = continuous_quality(0.5, 1.0, &QualityParams::with_strictness(0.0)).unwrap();
        let want = quadrature_cdf(0.0, 0.19, 0.0, 1.0, 0.5);
        assert!((q - want).abs() < 1e-6, "q = {q}, want = {want}");
        assert!((want - 0.991_501_228_5).abs() < 1e-7);
        let k_term = truncated_normal_cdf(0.44, 0.28, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(k_term, 1.0);
    }

    #[test]
    fn strictness_penalizes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let j = rng.random_range(1e-6..=0.5);
            let k = rng.random_range(0.0..=1.0);
            let q0 = continuous_quality(j, k, &QualityParams::with_strictness(0.0)).unwrap();
            let q25 = continuous_quality(j, k, &QualityParams::with_strictness(0.25)).unwrap();
            let q50 = continuous_quality(j, k, &QualityParams::with_strictness(0.5)).unwrap();
            assert!(q50 <= q25 && q25 <= q0, "j={j} k={k}: {q50} {q25} {q0}");
        }
    }

    #[test]
    fn continuous_quality_orders_discrete_buckets() {
        // Centroids of the discrete-level regions (L = 4, sampled on a fine
        // grid) must be ordered by the continuous metric at s = 0.25.
        let params = QualityParams::with_strictness(0.25);
        let mut sums = [(0.0f64, 0.0f64, 0u64); 5];
        for ji in 0..=100 {
            for ki in 0..=200 {
                let j = ji as f64 * 0.005;
                let k = ki as f64 * 0.005;
                let level = discrete_quality(j, k, 4).unwrap() as usize;
                sums[level].0 += j;
                sums[level].1 += k;
                sums[level].2 += 1;
            }
        }
        let mut prev = -1.0;
        for (level, (sj, sk, n)) in sums.iter().enumerate() {
            assert!(*n > 0, "level {level} has no grid samples");
            let q =
                continuous_quality(sj / *n as f64, sk / *n as f64, &params).unwrap();
            assert!(
                q > prev,
                "level {level} centroid quality {q} not above previous {prev}"
            );
            prev = q;
        }
    }

    #[test]
    fn wasserstein_point_mass_transport() {
        // Empirical {0} vs point mass at 1: unit transport.
        let d = wasserstein_1d(&[0.0], |x| if x < 1.0 { 0.0 } else { 1.0 }, 0.0, 1.0).unwrap();
        assert!((d - 1.0).abs() < 1e-9, "d = {d}");
    }

    #[test]
    fn wasserstein_vs_uniform_analytic() {
        // Empirical {0} vs uniform CDF on [0,1]: integral of (1 - x) = 0.5.
        let d = wasserstein_1d(&[0.0], |x| x, 0.0, 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-6, "d = {d}");
    }

    #[test]
    fn wasserstein_self_distance_near_zero() {
        // Samples placed at the model's own quantiles.
        let cdf = |x: f64| truncated_normal_cdf(0.44, 0.28, 0.0, 1.0, x).unwrap();
        let mut samples = Vec::new();
        for i in 0..1000 {
            let target = (i as f64 + 0.5) / 1000.0;
            // Invert by bisection.
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if cdf(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            samples.push(0.5 * (lo + hi));
        }
        let d = wasserstein_1d(&samples, cdf, 0.0, 1.0).unwrap();
        assert!(d < 2e-3, "d = {d}");
    }

    #[test]
    fn fit_degenerate_sample() {
        let samples = vec![0.42; 50];
        let (mu, sigma) = fit_truncated_normal(&samples, 0.02).unwrap();
        assert!((mu - 0.42).abs() <= 0.02 + 1e-12, "mu = {mu}");
        assert!((sigma - 0.02).abs() < 1e-12, "sigma = {sigma}");
    }

    #[test]
    fn fit_requires_enough_samples() {
        assert!(fit_truncated_normal(&[0.5; 9], 0.01).is_err());
        assert!(fit_truncated_normal(&[0.5; 10], 0.0).is_err());
        assert!(fit_truncated_normal(&[0.5; 10], 0.2).is_err());
    }

    #[test]
    fn quality_params_json_shape() {
        let json = serde_json::to_value(QualityParams::default()).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "mu_j": 0.0,
                "mu_k": 0.44,
                "sigma_j": 0.19,
                "sigma_k": 0.28,
                "strictness": 0.25
            })
        );
        let parsed: QualityParams = serde_json::from_value(json).unwrap();
        assert_eq!(parsed, QualityParams::default());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Brute-force multiset Jaccard over expanded cell lists.
        fn brute_force_jaccard(a: &[String], b: &[String]) -> f64 {
            let mut b_left: Vec<&String> = b.iter().collect();
            let mut shared = 0usize;
            for cell in a {
                if let Some(pos) = b_left.iter().position(|c| *c == cell) {
                    b_left.swap_remove(pos);
                    shared += 1;
                }
            }
            shared as f64 / (a.len() + b.len()) as f64
        }

        fn cells() -> impl Strategy<Value = Vec<String>> {
            proptest::collection::vec("[a-e]{1,2}", 1..40)
        }

        proptest! {
            #[test]
            fn jaccard_matches_brute_force(a in cells(), b in cells()) {
                let va = ColumnValues::from_cells(a.iter().cloned());
                let vb = ColumnValues::from_cells(b.iter().cloned());
                let fast = multiset_jaccard(&va, &vb).unwrap();
                let slow = brute_force_jaccard(&a, &b);
                prop_assert!((fast - slow).abs() < 1e-12);
                prop_assert!((0.0..=0.5).contains(&fast));
                prop_assert_eq!(fast, multiset_jaccard(&vb, &va).unwrap());
                let k = cardinality_proportion(&va, &vb).unwrap();
                prop_assert_eq!(k, cardinality_proportion(&vb, &va).unwrap());
                prop_assert!(k > 0.0 && k <= 1.0);
            }
        }
    }
}
