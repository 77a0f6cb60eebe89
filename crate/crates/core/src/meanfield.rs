//! Mean-field degree law of the growth model.
//!
//! Discrete stationary fractions come from the birth/attachment recurrences;
//! the continuous form is a mixture of exponentials shifted to each `k_i`,
//! all sharing the scale `mu_K = sum(alpha_i * k_i)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{validate_support, KDistribution};

/// Weighted sum of exponentials shifted to integer degrees.
///
/// `scale` equals `sum(alpha_i * k_i)` for the model law; fitting in free mode
/// may decouple it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialMixture {
    components: Vec<(usize, f64)>,
    scale: f64,
}

impl ExponentialMixture {
    /// Model law with scale tied to the mean of the weights' support.
    pub fn model(components: Vec<(usize, f64)>) -> Result<Self> {
        validate_support(&components)?;
        let scale = components.iter().map(|&(k, a)| k as f64 * a).sum();
        Ok(ExponentialMixture { components, scale })
    }

    pub fn with_scale(components: Vec<(usize, f64)>, scale: f64) -> Result<Self> {
        validate_support(&components)?;
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::config("mixture scale must be positive"));
        }
        Ok(ExponentialMixture { components, scale })
    }

    pub fn from_k_distribution(k_dist: &KDistribution) -> Self {
        ExponentialMixture {
            components: k_dist.support().to_vec(),
            scale: k_dist.mean(),
        }
    }

    pub fn components(&self) -> &[(usize, f64)] {
        &self.components
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `sum(alpha_i * k_i)`.
    pub fn shift_mean(&self) -> f64 {
        self.components.iter().map(|&(k, a)| k as f64 * a).sum()
    }

    pub fn min_k(&self) -> usize {
        self.components[0].0
    }

    pub fn max_k(&self) -> usize {
        self.components[self.components.len() - 1].0
    }

    /// The weights read as a link-count law, for growing a matching network.
    pub fn to_k_distribution(&self) -> KDistribution {
        KDistribution::new(self.components.clone()).expect("mixture support is a valid K law")
    }

    pub fn pdf(&self, d: f64) -> f64 {
        self.components
            .iter()
            .filter(|&&(k, _)| d >= k as f64)
            .map(|&(k, a)| a / self.scale * (-(d - k as f64) / self.scale).exp())
            .sum()
    }

    pub fn cdf(&self, d: f64) -> f64 {
        self.components
            .iter()
            .filter(|&&(k, _)| d > k as f64)
            .map(|&(k, a)| a * -(-(d - k as f64) / self.scale).exp_m1())
            .sum()
    }

    /// Mass the continuous law puts on the unit bin centred at integer `d`.
    pub fn bin_mass(&self, d: usize) -> f64 {
        let d = d as f64;
        self.cdf(d + 0.5) - self.cdf(d - 0.5)
    }

    pub fn mean_degree(&self) -> f64 {
        self.shift_mean() + self.scale
    }

    /// Plain-text form:
    ///
    /// ```toml
    /// k = [3, 4, 5]
    /// weight = [0.3, 0.4, 0.3]
    /// scale = 4.0     # optional; defaults to sum(weight * k)
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: MixtureDocument =
            toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        if doc.k.len() != doc.weight.len() {
            return Err(Error::config("`k` and `weight` differ in length"));
        }
        let components = doc.k.into_iter().zip(doc.weight).collect();
        match doc.scale {
            Some(s) => Self::with_scale(components, s),
            None => Self::model(components),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_document()).expect("plain document serializes")
    }

    pub(crate) fn to_document(&self) -> MixtureDocument {
        MixtureDocument {
            k: self.components.iter().map(|c| c.0).collect(),
            weight: self.components.iter().map(|c| c.1).collect(),
            scale: Some(self.scale),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct MixtureDocument {
    pub k: Vec<usize>,
    pub weight: Vec<f64>,
    pub scale: Option<f64>,
}

/// Density of the degree law at `d`.
pub fn pdf_at(mix: &ExponentialMixture, d: f64) -> f64 {
    mix.pdf(d)
}

/// Fraction of nodes with degree below `d`.
pub fn cdf_at(mix: &ExponentialMixture, d: f64) -> f64 {
    mix.cdf(d)
}

/// Mean of the continuous law; `2 * mu_K` for a model-faithful mixture.
pub fn mixture_mean_degree(mix: &ExponentialMixture) -> f64 {
    mix.mean_degree()
}

/// Stationary fraction of nodes with degree `m`.
///
/// Each birth class `k_i` contributes `alpha_i / (1 + mu)` at `m = k_i`,
/// decaying geometrically by `mu / (1 + mu)` per unit of degree above it.
/// Degrees below every `k_i` get zero.
pub fn asymptotic_fraction(k_dist: &KDistribution, m: usize) -> f64 {
    let mu = k_dist.mean();
    let ratio = mu / (1.0 + mu);
    k_dist
        .support()
        .iter()
        .filter(|&&(k, _)| m >= k)
        .map(|&(k, a)| ratio.powi((m - k) as i32) * a / (1.0 + mu))
        .sum()
}

/// Degree -> number of nodes with that degree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeHistogram {
    bins: BTreeMap<usize, u64>,
    total: u64,
}

impl DegreeHistogram {
    pub fn from_degrees<I: IntoIterator<Item = usize>>(degrees: I) -> Self {
        let mut h = DegreeHistogram::default();
        for d in degrees {
            h.add(d, 1);
        }
        h
    }

    /// Builds from `(degree, count)` pairs; zero counts are dropped and
    /// repeated degrees accumulate.
    pub fn from_counts<I: IntoIterator<Item = (usize, u64)>>(counts: I) -> Self {
        let mut h = DegreeHistogram::default();
        for (d, c) in counts {
            h.add(d, c);
        }
        h
    }

    fn add(&mut self, degree: usize, count: u64) {
        if count > 0 {
            *self.bins.entry(degree).or_insert(0) += count;
            self.total += count;
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, degree: usize) -> u64 {
        self.bins.get(&degree).copied().unwrap_or(0)
    }

    /// Observed `(degree, count)` pairs in increasing degree.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.bins.iter().map(|(&d, &c)| (d, c))
    }

    /// Number of distinct observed degrees.
    pub fn distinct(&self) -> usize {
        self.bins.len()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.bins.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.bins.keys().next_back().copied()
    }

    pub fn pmf(&self, degree: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(degree) as f64 / self.total as f64
    }

    /// Fraction of nodes with degree `<= degree`.
    pub fn cdf(&self, degree: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let below: u64 = self.bins.range(..=degree).map(|(_, &c)| c).sum();
        below as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.iter().map(|(d, c)| d as f64 * c as f64).sum::<f64>() / self.total as f64
    }

    /// Total-variation distance to a probability law on the nonnegative
    /// integers. Law mass beyond the largest observed degree counts in full.
    pub fn total_variation<F: Fn(usize) -> f64>(&self, law: F) -> f64 {
        let Some(max) = self.max_degree() else {
            return 1.0;
        };
        let mut diff = 0.0;
        let mut law_mass = 0.0;
        for d in 0..=max {
            let q = law(d);
            law_mass += q;
            diff += (self.pmf(d) - q).abs();
        }
        0.5 * (diff + (1.0 - law_mass).max(0.0))
    }

    /// Total-variation distance between two empirical histograms.
    pub fn total_variation_to(&self, other: &DegreeHistogram) -> f64 {
        let max = self.max_degree().max(other.max_degree()).unwrap_or(0);
        0.5 * (0..=max).map(|d| (self.pmf(d) - other.pmf(d)).abs()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn thirds() -> ExponentialMixture {
        ExponentialMixture::model(vec![(3, 1.0 / 3.0), (4, 1.0 / 3.0), (5, 1.0 / 3.0)]).unwrap()
    }

    // Composite 3-point Gauss-Legendre; nodes are interior, so jumps at
    // panel ends are never sampled.
    fn gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = a + (p as f64 + 0.5) * h;
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(x, w)| w * f(mid + 0.5 * h * x))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    // Integrates piecewise between the shift points so each panel is smooth.
    fn integrate_law<F: Fn(f64) -> f64>(mix: &ExponentialMixture, f: F) -> f64 {
        let upper = mix.min_k() as f64 + 60.0 * mix.scale();
        let mut cuts: Vec<f64> = mix.components().iter().map(|c| c.0 as f64).collect();
        cuts.push(upper);
        cuts.windows(2)
            .map(|w| gauss(&f, w[0], w[1], 4_000))
            .sum()
    }

    #[test]
    fn pdf_examples() {
        let unit = ExponentialMixture::model(vec![(1, 1.0)]).unwrap();
        assert_eq!(pdf_at(&unit, 1.0), 1.0);
        assert_eq!(pdf_at(&unit, 0.5), 0.0);
        let expected = (1.0 / 12.0) * ((-0.5f64).exp() + (-0.25f64).exp() + 1.0);
        assert!((pdf_at(&thirds(), 5.0) - expected).abs() < 1e-15);
        assert!((expected - 0.199).abs() < 1e-3);
    }

    #[test]
    fn cdf_examples() {
        let two = ExponentialMixture::model(vec![(2, 1.0)]).unwrap();
        assert_eq!(cdf_at(&two, 2.0), 0.0);
        assert!((cdf_at(&two, 4.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let m = thirds();
        assert!(cdf_at(&m, 5.0 + 50.0 * 4.0) >= 1.0 - 1e-5);
    }

    #[test]
    fn mean_degree_matches_quadrature() {
        for mix in [
            ExponentialMixture::model(vec![(2, 1.0)]).unwrap(),
            thirds(),
            ExponentialMixture::model(vec![(1, 1.0)]).unwrap(),
        ] {
            let numeric = integrate_law(&mix, |d| d * mix.pdf(d));
            assert!((numeric - mixture_mean_degree(&mix)).abs() < 1e-6);
            assert!((mixture_mean_degree(&mix) - 2.0 * mix.shift_mean()).abs() < 1e-12);
        }
        assert!((mixture_mean_degree(&thirds()) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn pdf_normalizes() {
        let mix = thirds();
        assert!((integrate_law(&mix, |d| mix.pdf(d)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cdf_derivative_is_pdf_between_shifts() {
        let mix = thirds();
        let h = 1e-5;
        for d in [3.3, 3.7, 4.5, 5.2, 7.0, 12.0, 30.0] {
            let deriv = (mix.cdf(d + h) - mix.cdf(d - h)) / (2.0 * h);
            assert!((deriv - mix.pdf(d)).abs() < 1e-6, "d={d}");
        }
    }

    #[test]
    fn asymptotic_fraction_examples() {
        let two = KDistribution::constant(2).unwrap();
        assert!((asymptotic_fraction(&two, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((asymptotic_fraction(&two, 3) - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(asymptotic_fraction(&two, 1), 0.0);
        let pair = KDistribution::new(vec![(2, 0.5), (4, 0.5)]).unwrap();
        assert!((asymptotic_fraction(&pair, 3) - 0.09375).abs() < 1e-15);
    }

    #[test]
    fn geometric_recursion_and_normalization() {
        for k in 1..=6 {
            let dist = KDistribution::constant(k).unwrap();
            let ratio = k as f64 / (1.0 + k as f64);
            for m in k + 1..k + 40 {
                let lhs = asymptotic_fraction(&dist, m);
                let rhs = asymptotic_fraction(&dist, m - 1) * ratio;
                assert!((lhs - rhs).abs() <= 1e-15 * rhs.max(1e-300));
            }
            let total: f64 = (k..k + 400).map(|m| asymptotic_fraction(&dist, m)).sum();
            assert!((total - 1.0).abs() < 1e-9, "k={k} total={total}");
        }
    }

    #[test]
    fn histogram_basics() {
        let h = DegreeHistogram::from_degrees([1, 2, 1]);
        assert_eq!(h.total(), 3);
        assert_eq!(h.count(1), 2);
        assert!((h.cdf(1) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(h.total_variation_to(&h), 0.0);
        let other = DegreeHistogram::from_counts([(1, 1), (2, 2)]);
        assert!((h.total_variation_to(&other) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_document_round_trip() {
        let m = thirds();
        assert_eq!(ExponentialMixture::from_toml_str(&m.to_toml_string()).unwrap(), m);
        let free = ExponentialMixture::from_toml_str("k=[1,3]\nweight=[0.25,0.75]\nscale=1.5").unwrap();
        assert_eq!(free.scale(), 1.5);
        assert!(ExponentialMixture::from_toml_str("k=[1]\nweight=[0.5]").is_err());
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_bounded(
            ks in proptest::sample::subsequence((1usize..12).collect::<Vec<_>>(), 1..5),
            d in 0.0f64..80.0,
            step in 0.0f64..5.0,
        ) {
            let mix = ExponentialMixture::model(
                ks.iter().map(|&k| (k, 1.0 / ks.len() as f64)).collect::<Vec<_>>()
                    .into_iter().collect(),
            );
            // uniform weights may miss the 1e-12 sum check for awkward counts
            prop_assume!(mix.is_ok());
            let mix = mix.unwrap();
            let a = mix.cdf(d);
            let b = mix.cdf(d + step);
            prop_assert!(a <= b + 1e-15);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
            prop_assert!(mix.pdf(d) >= 0.0);
        }
    }
}
