//! Fits a shifted-exponential mixture to an observed degree histogram.
//!
//! Every support of up to four integer shifts in the requested range is tried.
//! For a support and a scale, the weights minimizing count-weighted squared
//! error between degree frequencies and the law's unit-bin masses, over every
//! degree from the lowest candidate shift up to the largest observed one,
//! form a small quadratic program, solved exactly by enumerating faces of the
//! simplex. The scale is then searched in one dimension: tied to the weights'
//! mean shift (`Model`) or free (`Free`).
//!
//! The best support of each size is kept, and the number of components is
//! chosen by the Bayesian information criterion of the histogram's multinomial
//! likelihood, so an extra component must pay `ln n` in doubled log-likelihood.
//! Equal criteria go to the smaller support.

use std::fmt;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{DegreeHistogram, ExponentialMixture};

pub const MIN_SAMPLES: u64 = 30;
pub const MAX_COMPONENTS: usize = 4;
const SCALE_GRID: usize = 64;
const GOLDEN_STEPS: usize = 60;
const MIN_WEIGHT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    /// Scale equals `sum(alpha_i * k_i)`, the growth model's law.
    Model,
    /// Scale is a free parameter.
    Free,
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMode::Model => "model",
            FitMode::Free => "free",
        })
    }
}

impl std::str::FromStr for FitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(FitMode::Model),
            "free" => Ok(FitMode::Free),
            other => Err(Error::config(format!("unknown fit mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub mixture: ExponentialMixture,
    pub mode: FitMode,
    /// Objective value of the returned mixture.
    pub loss: f64,
    /// Smallest objective over every candidate tried, whatever its size.
    pub min_loss: f64,
    /// Information criterion of the returned mixture (lower is better).
    pub bic: f64,
    pub ks_stat: f64,
    pub candidates: usize,
    pub support_searched: String,
}

#[derive(Serialize)]
struct FitDocument<'a> {
    mode: FitMode,
    k: Vec<usize>,
    weight: Vec<f64>,
    scale: f64,
    loss: f64,
    min_loss: f64,
    bic: f64,
    ks_stat: f64,
    candidates: usize,
    support_searched: &'a str,
}

impl FitResult {
    /// TOML document; its `k`, `weight` and `scale` keys read back with
    /// [`ExponentialMixture::from_toml_str`] after dropping the other keys.
    pub fn to_toml_string(&self) -> String {
        let doc = FitDocument {
            mode: self.mode,
            k: self.mixture.components().iter().map(|c| c.0).collect(),
            weight: self.mixture.components().iter().map(|c| c.1).collect(),
            scale: self.mixture.scale(),
            loss: self.loss,
            min_loss: self.min_loss,
            bic: self.bic,
            ks_stat: self.ks_stat,
            candidates: self.candidates,
            support_searched: &self.support_searched,
        };
        toml::to_string(&doc).expect("plain document serializes")
    }
}

/// Observed frequencies with their count weights.
struct Target {
    degrees: Vec<usize>,
    freq: Vec<f64>,
    weight: Vec<f64>,
    /// `sum(weight * freq^2)`, the loss of the zero model.
    base: f64,
}

impl Target {
    /// Every degree from `lowest` to the largest observed one. Empty bins
    /// weigh as a single count so that mass placed on them is not free.
    fn new(hist: &DegreeHistogram, lowest: usize) -> Self {
        let n = hist.total() as f64;
        let max = hist.max_degree().unwrap_or(0);
        let lowest = lowest.min(hist.min_degree().unwrap_or(0));
        let degrees: Vec<usize> = (lowest..=max).collect();
        let freq: Vec<f64> = degrees.iter().map(|&d| hist.count(d) as f64 / n).collect();
        let weight = degrees
            .iter()
            .map(|&d| hist.count(d).max(1) as f64 / n)
            .collect();
        let base = freq.iter().zip(&weight).map(|(p, w)| w * p * p).sum();
        Target {
            degrees,
            freq,
            weight,
            base,
        }
    }
}

/// Unit-bin masses of each shifted exponential at each observed degree.
fn basis(target: &Target, support: &[usize], scale: f64) -> Vec<Vec<f64>> {
    let cdf = |x: f64, k: f64| if x > k { -(-(x - k) / scale).exp_m1() } else { 0.0 };
    support
        .iter()
        .map(|&k| {
            let k = k as f64;
            target
                .degrees
                .iter()
                .map(|&d| {
                    let d = d as f64;
                    cdf(d + 0.5, k) - cdf(d - 0.5, k)
                })
                .collect()
        })
        .collect()
}

/// Minimizes `a' G a - 2 h' a` over the simplex, optionally with
/// `sum(a_i k_i) = mean_shift`. Returns the weights and objective.
fn simplex_qp(g: &DMatrix<f64>, h: &DVector<f64>, shifts: &[f64], mean_shift: Option<f64>) -> Option<(Vec<f64>, f64)> {
    let c = h.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1 << c) {
        let idx: Vec<usize> = (0..c).filter(|i| mask & (1 << i) != 0).collect();
        let s = idx.len();
        let weights_s = if s == 1 {
            match mean_shift {
                Some(mu) if (shifts[idx[0]] - mu).abs() > 1e-12 => continue,
                _ => vec![1.0],
            }
        } else {
            let rows = if mean_shift.is_some() { 2 } else { 1 };
            let dim = s + rows;
            let mut kkt = DMatrix::zeros(dim, dim);
            let mut rhs = DVector::zeros(dim);
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    kkt[(a, b)] = 2.0 * g[(i, j)];
                }
                rhs[a] = 2.0 * h[i];
                kkt[(a, s)] = 1.0;
                kkt[(s, a)] = 1.0;
                if mean_shift.is_some() {
                    kkt[(a, s + 1)] = shifts[i];
                    kkt[(s + 1, a)] = shifts[i];
                }
            }
            rhs[s] = 1.0;
            if let Some(mu) = mean_shift {
                rhs[s + 1] = mu;
            }
            let Some(sol) = kkt.lu().solve(&rhs) else {
                continue;
            };
            let w: Vec<f64> = (0..s).map(|a| sol[a]).collect();
            if w.iter().any(|x| !x.is_finite() || *x < -1e-12) {
                continue;
            }
            w
        };
        let mut full = vec![0.0; c];
        for (a, &i) in idx.iter().enumerate() {
            full[i] = weights_s[a].max(0.0);
        }
        let mut obj = 0.0;
        for i in 0..c {
            obj -= 2.0 * h[i] * full[i];
            for j in 0..c {
                obj += full[i] * g[(i, j)] * full[j];
            }
        }
        if best.as_ref().is_none_or(|b| obj < b.1) {
            best = Some((full, obj));
        }
    }
    best
}

/// Best weights for a support at a fixed scale; loss includes the constant term.
fn loss_at(target: &Target, support: &[usize], scale: f64, mode: FitMode) -> Option<(Vec<f64>, f64)> {
    let cols = basis(target, support, scale);
    let c = support.len();
    let mut g = DMatrix::zeros(c, c);
    let mut h = DVector::zeros(c);
    for i in 0..c {
        for j in i..c {
            let v: f64 = (0..target.degrees.len())
                .map(|d| target.weight[d] * cols[i][d] * cols[j][d])
                .sum();
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        h[i] = (0..target.degrees.len())
            .map(|d| target.weight[d] * cols[i][d] * target.freq[d])
            .sum();
    }
    let shifts: Vec<f64> = support.iter().map(|&k| k as f64).collect();
    let mean = match mode {
        FitMode::Model => Some(scale),
        FitMode::Free => None,
    };
    simplex_qp(&g, &h, &shifts, mean).map(|(w, obj)| (w, (obj + target.base).max(0.0)))
}

#[derive(Debug, Clone)]
struct Candidate {
    support: Vec<usize>,
    weights: Vec<f64>,
    scale: f64,
    loss: f64,
}

/// Grid then golden-section search of the loss over `[lo, hi]` in the
/// coordinate `t`, where `to_scale` maps `t` to a scale.
fn search_scale<F>(target: &Target, support: &[usize], mode: FitMode, lo: f64, hi: f64, to_scale: F) -> Option<Candidate>
where
    F: Fn(f64) -> f64,
{
    let eval = |t: f64| {
        let scale = to_scale(t);
        loss_at(target, support, scale, mode).map(|(w, l)| (w, l, scale))
    };
    let grid: Vec<f64> = (0..=SCALE_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / SCALE_GRID as f64)
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&t| eval(t).map_or(f64::INFINITY, |r| r.1))
        .collect();
    let best = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b]))?;
    if !values[best].is_finite() {
        return None;
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let f = |t: f64| eval(t).map_or(f64::INFINITY, |r| r.1);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    let mut pick = if f1 <= f2 { x1 } else { x2 };
    if values[best] < f(pick) {
        pick = grid[best];
    }
    let (weights, loss, scale) = eval(pick)?;
    Some(Candidate {
        support: support.to_vec(),
        weights,
        scale,
        loss,
    })
}

fn fit_support(target: &Target, support: &[usize], mode: FitMode, max_degree: usize) -> Option<Candidate> {
    let candidate = match mode {
        FitMode::Model if support.len() == 1 => {
            let scale = support[0] as f64;
            loss_at(target, support, scale, mode).map(|(weights, loss)| Candidate {
                support: support.to_vec(),
                weights,
                scale,
                loss,
            })
        }
        FitMode::Model => {
            let lo = support[0] as f64;
            let hi = support[support.len() - 1] as f64;
            search_scale(target, support, mode, lo, hi, |t| t)
        }
        FitMode::Free => {
            let hi = (2.0 * max_degree as f64).max(2.0).ln();
            search_scale(target, support, mode, 0.05f64.ln(), hi, f64::exp)
        }
    }?;
    // a zero weight means a smaller support gives the same fit
    if candidate.weights.iter().any(|&w| w <= MIN_WEIGHT) {
        return None;
    }
    Some(candidate)
}

fn supports(range: &RangeInclusive<usize>, max_size: usize) -> Vec<Vec<usize>> {
    let pool: Vec<usize> = range.clone().collect();
    let mut out = Vec::new();
    for size in 1..=max_size.min(pool.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&i| pool[i]).collect());
            let mut i = size;
            while i > 0 && idx[i - 1] == pool.len() - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

fn to_mixture(c: &Candidate, mode: FitMode) -> Result<ExponentialMixture> {
    let total: f64 = c.weights.iter().sum();
    let components: Vec<(usize, f64)> = c
        .support
        .iter()
        .zip(&c.weights)
        .map(|(&k, &w)| (k, w / total))
        .collect();
    match mode {
        FitMode::Model => ExponentialMixture::model(components),
        FitMode::Free => ExponentialMixture::with_scale(components, c.scale),
    }
}

/// `-2 ln L + p ln n` for the binned law with `p` = component count. Each
/// added component brings one weight, and only differences across sizes matter.
fn bic(hist: &DegreeHistogram, mix: &ExponentialMixture, components: usize) -> f64 {
    let n = hist.total() as f64;
    let mut log_lik = 0.0;
    for (d, c) in hist.iter() {
        let q = mix.bin_mass(d);
        if q <= 0.0 {
            return f64::INFINITY;
        }
        log_lik += c as f64 * q.ln();
    }
    -2.0 * log_lik + components as f64 * n.ln()
}

/// Fits the best mixture with at most `max_components` shifts drawn from `k_range`.
pub fn fit_mixture(
    hist: &DegreeHistogram,
    max_components: usize,
    k_range: RangeInclusive<usize>,
    mode: FitMode,
) -> Result<FitResult> {
    if hist.total() < MIN_SAMPLES {
        return Err(Error::InsufficientSupport(format!(
            "{} samples; need at least {MIN_SAMPLES}",
            hist.total()
        )));
    }
    if hist.distinct() < 2 {
        return Err(Error::InsufficientSupport(
            "histogram has a single degree value".into(),
        ));
    }
    if !(1..=MAX_COMPONENTS).contains(&max_components) {
        return Err(Error::config(format!(
            "max components must be in 1..={MAX_COMPONENTS}"
        )));
    }
    let max_degree = hist.max_degree().unwrap_or(0);
    let (k_lo, k_hi) = (*k_range.start(), *k_range.end());
    if k_lo < 1 || k_lo > k_hi || k_hi > max_degree {
        return Err(Error::config(format!(
            "k range {k_lo}..={k_hi} must lie within 1..={max_degree}"
        )));
    }

    let target = Target::new(hist, *k_range.start());
    let all = supports(&k_range, max_components);
    let fitted: Vec<Option<Candidate>> = all
        .par_iter()
        .map(|s| fit_support(&target, s, mode, max_degree))
        .collect();
    let candidates: Vec<Candidate> = fitted.into_iter().flatten().collect();
    if candidates.is_empty() {
        return Err(Error::InsufficientSupport(
            "no support in range admits a fit".into(),
        ));
    }
    let min_loss = candidates.iter().map(|c| c.loss).fold(f64::INFINITY, f64::min);

    // best per size; `supports` lists sizes in order and each size lexicographically
    let mut per_size: Vec<Option<&Candidate>> = vec![None; max_components + 1];
    for c in &candidates {
        let slot = &mut per_size[c.support.len()];
        if slot.is_none_or(|b| c.loss < b.loss) {
            *slot = Some(c);
        }
    }
    let mut chosen: Option<(&Candidate, ExponentialMixture, f64)> = None;
    for c in per_size.into_iter().flatten() {
        let mix = to_mixture(c, mode)?;
        let bic = bic(hist, &mix, c.support.len());
        if chosen.as_ref().is_none_or(|cur| bic < cur.2) {
            chosen = Some((c, mix, bic));
        }
    }
    let (chosen, mixture, bic) = chosen.expect("at least one candidate");
    let ks_stat = ks_distance(hist, &mixture)?;
    Ok(FitResult {
        mixture,
        mode,
        loss: chosen.loss,
        min_loss,
        bic,
        ks_stat,
        candidates: candidates.len(),
        support_searched: format!(
            "subsets of {{{k_lo}..={k_hi}}} with 1..={max_components} elements, {mode} scale"
        ),
    })
}

/// Largest gap between the empirical degree cdf and the law's cdf,
/// continuity-corrected: degree `d` is compared at `d + 1/2`.
pub fn ks_distance(hist: &DegreeHistogram, mix: &ExponentialMixture) -> Result<f64> {
    let (Some(lo), Some(hi)) = (hist.min_degree(), hist.max_degree()) else {
        return Err(Error::EmptyHistogram);
    };
    let mut sup = if lo > 0 {
        mix.cdf(lo as f64 - 0.5)
    } else {
        0.0
    };
    for d in lo..=hi {
        sup = sup.max((hist.cdf(d) - mix.cdf(d as f64 + 0.5)).abs());
    }
    Ok(sup)
}

/// Draws `n` integer degrees from the continuous law (component by weight,
/// then inverse cdf, rounded to the nearest integer).
pub fn sample_histogram<R: Rng + ?Sized>(mix: &ExponentialMixture, n: usize, rng: &mut R) -> DegreeHistogram {
    let pick = WeightedIndex::new(mix.components().iter().map(|c| c.1)).expect("positive weights");
    DegreeHistogram::from_degrees((0..n).map(|_| {
        let k = mix.components()[pick.sample(rng)].0 as f64;
        let u: f64 = rng.random();
        (k - mix.scale() * (-u).ln_1p()).round() as usize
    }))
}

/// Rows `(degree, observed frequency, fitted unit-bin mass)` from the
/// smaller of the first shift and the lowest observed degree up to the
/// highest observed degree.
pub fn comparison_rows(hist: &DegreeHistogram, mix: &ExponentialMixture) -> Vec<(usize, f64, f64)> {
    let lo = hist.min_degree().unwrap_or(0).min(mix.min_k());
    let hi = hist.max_degree().unwrap_or(0);
    (lo..=hi).map(|d| (d, hist.pmf(d), mix.bin_mass(d))).collect()
}
