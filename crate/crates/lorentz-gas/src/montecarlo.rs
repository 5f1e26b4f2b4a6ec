//! Ensemble estimators over independent trajectories: the free-flight
//! survival function F(t), velocity autocorrelation, mean-square
//! displacement, scaled-displacement histograms, and power-law exponent
//! fits on log-binned survival data.
//!
//! Reproducibility contract: sample i draws from ChaCha8 stream i of the
//! run seed, chunks of fixed size are reduced in index order, so results
//! are bit-identical for a given (cfg, n, seed) regardless of how many
//! worker threads execute the chunks.

use crate::dynamics::{advance, next_collision, ParticleState};
use crate::error::{Error, Result};
use crate::theory::{superdiffusion_matrix, GasConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Samples per work unit; fixed so the reduction order never depends on
/// the number of threads.
const CHUNK: u64 = 4096;
/// Rejection-sampling budget for one initial position.
const MAX_REJECTIONS: u64 = 1_000_000;
/// Survival histogram density.
const BINS_PER_DECADE: f64 = 20.0;
const FIRST_THRESHOLD: f64 = 0.1;

/// The dedicated RNG stream of one sample index under a run seed.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw one microstate from the invariant measure: position uniform on
/// the cell minus the scatterer(s) by rejection, velocity uniform on the
/// unit sphere (normalized Gaussian vector).
pub fn sample_initial(cfg: &GasConfig, rng: &mut impl Rng) -> Result<ParticleState> {
    let dim = cfg.dim();
    let radius = cfg.radius();
    // for r > 1/2 neighboring spheres intrude into the cell
    let neighbor_reach = radius > 0.5;
    let mut position = vec![0.0; dim];
    let mut found = false;
    'rejection: for _ in 0..MAX_REJECTIONS {
        for x in position.iter_mut() {
            *x = rng.random::<f64>() - 0.5;
        }
        let r2: f64 = position.iter().map(|&x| x * x).sum();
        if r2 <= radius * radius {
            continue 'rejection;
        }
        if neighbor_reach {
            // check the 3^d - 1 neighbor centers
            let mut offset = vec![-1i64; dim];
            loop {
                if offset.iter().any(|&o| o != 0) {
                    let d2: f64 = position
                        .iter()
                        .zip(&offset)
                        .map(|(&x, &o)| (x - o as f64) * (x - o as f64))
                        .sum();
                    if d2 <= radius * radius {
                        continue 'rejection;
                    }
                }
                let mut i = 0;
                loop {
                    if i == dim {
                        found = true;
                        break 'rejection;
                    }
                    offset[i] += 1;
                    if offset[i] <= 1 {
                        break;
                    }
                    offset[i] = -1;
                    i += 1;
                }
            }
        }
        found = true;
        break;
    }
    if !found {
        return Err(Error::PackingTooDense(MAX_REJECTIONS));
    }
    let mut velocity = vec![0.0; dim];
    loop {
        for v in velocity.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let n: f64 = velocity.iter().map(|&v| v * v).sum::<f64>().sqrt();
        if n > 1e-12 {
            for v in velocity.iter_mut() {
                *v /= n;
            }
            break;
        }
    }
    ParticleState::new(position, velocity)
}

/// Map sample chunks in parallel and fold the partials in chunk order.
fn chunked<T, F>(n: u64, map_chunk: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> Result<T> + Sync,
{
    let chunks: u64 = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n);
            map_chunk(lo..hi)
        })
        .collect()
}

/// Log-spaced survival thresholds, 20 per decade from 0.1 up to the first
/// grid point at or above `t_max`.
pub fn survival_thresholds(t_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let t = FIRST_THRESHOLD * 10f64.powf(j as f64 / BINS_PER_DECADE);
        out.push(t);
        if t >= t_max {
            return out;
        }
        j += 1;
    }
}

/// Log-binned estimate of the free-flight function F(t).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    /// Increasing survival thresholds (log-spaced).
    pub thresholds: Vec<f64>,
    /// Number of samples whose first collision time is >= threshold.
    pub survivors: Vec<u64>,
    pub samples: u64,
}

impl SurvivalCurve {
    pub fn estimate(&self, bin: usize) -> f64 {
        self.survivors[bin] as f64 / self.samples as f64
    }

    /// Binomial standard error of one bin.
    pub fn stderr(&self, bin: usize) -> f64 {
        let p = self.estimate(bin);
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// Estimate F(t) from n independent samples: per sample the first
/// collision time (capped at `t_max`), histogrammed against log-spaced
/// thresholds. Deterministic given the seed.
pub fn estimate_survival(cfg: &GasConfig, n: u64, t_max: f64, seed: u64) -> Result<SurvivalCurve> {
    if n == 0 {
        return Err(Error::OutOfDomain {
            name: "n",
            value: 0.0,
            domain: "n >= 1",
        });
    }
    if !(t_max > 0.0) {
        return Err(Error::OutOfDomain {
            name: "t_max",
            value: t_max,
            domain: "t_max > 0",
        });
    }
    let thresholds = survival_thresholds(t_max);
    let bins = thresholds.len();
    // hist[k] counts samples whose first-collision time T satisfies
    // thresholds[k-1] <= T < thresholds[k] (k = 0: T below all)
    let partials = chunked(n, |range| {
        let mut hist = vec![0u64; bins + 1];
        for i in range {
            let mut rng = stream_rng(seed, i);
            let state = sample_initial(cfg, &mut rng)?;
            let t_first = next_collision(&state, cfg, t_max)
                .map(|e| e.time_to_hit)
                .unwrap_or(f64::INFINITY);
            let k = thresholds.partition_point(|&t| t <= t_first);
            hist[k] += 1;
        }
        Ok(hist)
    })?;
    let mut hist = vec![0u64; bins + 1];
    for p in partials {
        for (h, v) in hist.iter_mut().zip(p) {
            *h += v;
        }
    }
    // survivors at threshold j = samples with T >= thresholds[j]
    let mut survivors = vec![0u64; bins];
    let mut acc = 0u64;
    for j in (0..bins).rev() {
        acc += hist[j + 1];
        survivors[j] = acc;
    }
    Ok(SurvivalCurve {
        thresholds,
        survivors,
        samples: n,
    })
}

/// Velocity autocorrelation estimates per lag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSeries {
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub samples: u64,
}

/// Spacing between in-trajectory anchors (several mean free times, so
/// anchor products are effectively independent).
const ANCHOR_SPACING: f64 = 10.0;

/// Estimate the VACF ⟨v(0)·v(t)⟩ at the given lags from n trajectories
/// started from the invariant measure.
///
/// With `anchors` = 1 each trajectory contributes the single product
/// v(0)·v(lag). Larger values average v(s)·v(s+lag) over `anchors`
/// stationarity-justified anchor times s spaced 10 time units apart,
/// which shrinks the estimator variance without biasing it; standard
/// errors are computed across trajectories either way.
pub fn estimate_vacf(
    cfg: &GasConfig,
    n: u64,
    lags: &[f64],
    seed: u64,
    anchors: usize,
) -> Result<CorrelationSeries> {
    if lags.is_empty() || lags.windows(2).any(|w| w[0] >= w[1]) || lags[0] < 0.0 {
        return Err(Error::OutOfDomain {
            name: "lags",
            value: f64::NAN,
            domain: "nonempty, sorted, nonnegative",
        });
    }
    if anchors == 0 {
        return Err(Error::OutOfDomain {
            name: "anchors",
            value: 0.0,
            domain: "anchors >= 1",
        });
    }
    let dim = cfg.dim();
    let n_lags = lags.len();
    // checkpoint schedule: anchor captures at a·Δ, products at a·Δ + lag
    #[derive(Clone, Copy)]
    enum Action {
        Capture(usize),
        Product(usize, usize),
    }
    let mut schedule: Vec<(f64, Action)> = Vec::with_capacity(anchors * (1 + n_lags));
    for a in 0..anchors {
        let s = a as f64 * ANCHOR_SPACING;
        schedule.push((s, Action::Capture(a)));
        for (l, &lag) in lags.iter().enumerate() {
            schedule.push((s + lag, Action::Product(a, l)));
        }
    }
    schedule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let partials = chunked(n, |range| {
        let mut sum = vec![0.0; n_lags];
        let mut sum_sq = vec![0.0; n_lags];
        let mut anchor_v = vec![0.0; anchors * dim];
        let mut per_sample = vec![0.0; n_lags];
        for i in range {
            let mut rng = stream_rng(seed, i);
            let mut state = sample_initial(cfg, &mut rng)?;
            per_sample.iter_mut().for_each(|x| *x = 0.0);
            for &(t, action) in &schedule {
                let dt = t - state.time;
                if dt > 0.0 {
                    advance(&mut state, cfg, dt)?;
                }
                match action {
                    Action::Capture(a) => {
                        anchor_v[a * dim..(a + 1) * dim].copy_from_slice(&state.velocity);
                    }
                    Action::Product(a, l) => {
                        let dot: f64 = anchor_v[a * dim..(a + 1) * dim]
                            .iter()
                            .zip(&state.velocity)
                            .map(|(x, y)| x * y)
                            .sum();
                        per_sample[l] += dot / anchors as f64;
                    }
                }
            }
            for (l, &y) in per_sample.iter().enumerate() {
                sum[l] += y;
                sum_sq[l] += y * y;
            }
        }
        Ok((sum, sum_sq))
    })?;
    let mut sum = vec![0.0; n_lags];
    let mut sum_sq = vec![0.0; n_lags];
    for (s, s2) in partials {
        for l in 0..n_lags {
            sum[l] += s[l];
            sum_sq[l] += s2[l];
        }
    }
    let nf = n as f64;
    let values: Vec<f64> = sum.iter().map(|&s| s / nf).collect();
    let stderrs: Vec<f64> = values
        .iter()
        .zip(&sum_sq)
        .map(|(&mean, &s2)| {
            if n > 1 {
                let var = (s2 / nf - mean * mean).max(0.0);
                (var / (nf - 1.0)).sqrt()
            } else {
                f64::NAN
            }
        })
        .collect();
    Ok(CorrelationSeries {
        lags: lags.to_vec(),
        values,
        stderrs,
        samples: n,
    })
}

/// Second-moment matrix of the displacement at one time, with the
/// t·ln t - normalized scalar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsdPoint {
    pub time: f64,
    /// Row-major d x d ensemble second moments ⟨Δ_i Δ_j⟩.
    pub second_moment: Vec<f64>,
    /// ⟨|Δ|²⟩ / (2 d t ln t).
    pub normalized_scalar: f64,
    pub normalized_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsdSeries {
    pub dim: usize,
    pub points: Vec<MsdPoint>,
    pub samples: u64,
}

/// Ensemble second moments of the displacement at each requested time
/// (sorted, each > 1 so ln t > 0).
pub fn estimate_msd(cfg: &GasConfig, n: u64, times: &[f64], seed: u64) -> Result<MsdSeries> {
    if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) || times[0] <= 1.0 {
        return Err(Error::OutOfDomain {
            name: "times",
            value: f64::NAN,
            domain: "nonempty, sorted, each > 1",
        });
    }
    let dim = cfg.dim();
    let n_times = times.len();
    let mat = dim * dim;
    let partials = chunked(n, |range| {
        let mut sums = vec![0.0; n_times * mat];
        let mut sq_sums = vec![0.0; n_times]; // |Δ|²
        let mut sq4_sums = vec![0.0; n_times]; // |Δ|⁴ for the scalar stderr
        for i in range {
            let mut rng = stream_rng(seed, i);
            let mut state = sample_initial(cfg, &mut rng)?;
            let start = state.clone();
            for (k, &t) in times.iter().enumerate() {
                let dt = t - state.time;
                if dt > 0.0 {
                    advance(&mut state, cfg, dt)?;
                }
                let delta = state.displacement_since(&start);
                let mut d2 = 0.0;
                for a in 0..dim {
                    d2 += delta[a] * delta[a];
                    for b in 0..dim {
                        sums[k * mat + a * dim + b] += delta[a] * delta[b];
                    }
                }
                sq_sums[k] += d2;
                sq4_sums[k] += d2 * d2;
            }
        }
        Ok((sums, sq_sums, sq4_sums))
    })?;
    let mut sums = vec![0.0; n_times * mat];
    let mut sq_sums = vec![0.0; n_times];
    let mut sq4_sums = vec![0.0; n_times];
    for (s, q, q4) in partials {
        for (acc, v) in sums.iter_mut().zip(s) {
            *acc += v;
        }
        for (acc, v) in sq_sums.iter_mut().zip(q) {
            *acc += v;
        }
        for (acc, v) in sq4_sums.iter_mut().zip(q4) {
            *acc += v;
        }
    }
    let nf = n as f64;
    let points = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let norm = 2.0 * dim as f64 * t * t.ln();
            let mean_d2 = sq_sums[k] / nf;
            let var_d2 = (sq4_sums[k] / nf - mean_d2 * mean_d2).max(0.0);
            MsdPoint {
                time: t,
                second_moment: sums[k * mat..(k + 1) * mat].iter().map(|&s| s / nf).collect(),
                normalized_scalar: mean_d2 / norm,
                normalized_stderr: (var_d2 / (nf - 1.0).max(1.0)).sqrt() / norm,
            }
        })
        .collect();
    Ok(MsdSeries {
        dim,
        points,
        samples: n,
    })
}

/// Histogram of one scaled displacement component Δ₁/√(t ln t), with the
/// reference centered normal of variance Ξ = D when horizons exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementHistogram {
    pub time: f64,
    /// Bin edges, length bins + 1, covering the full ballistic support.
    pub edges: Vec<f64>,
    /// Empirical density per bin (integrates to 1).
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Reference N(0, Ξ) density at bin centers; None when the gas has no
    /// principal horizon (r >= 1/2).
    pub reference: Option<Vec<f64>>,
    pub samples: u64,
}

const HISTOGRAM_BINS: usize = 121;

/// Scaled-displacement histogram at time t (> e so ln t > 1). The bin
/// range spans ±1.02·t/√(t ln t): ballistic orbits sit exactly at
/// ±t/√(t ln t), so the support spikes stay inside the histogram.
pub fn scaled_displacement_histogram(
    cfg: &GasConfig,
    n: u64,
    t: f64,
    seed: u64,
) -> Result<DisplacementHistogram> {
    if !(t > std::f64::consts::E) {
        return Err(Error::OutOfDomain {
            name: "t",
            value: t,
            domain: "t > e",
        });
    }
    let scale = (t * t.ln()).sqrt();
    let half_range = 1.02 * t / scale;
    let width = 2.0 * half_range / HISTOGRAM_BINS as f64;
    let partials = chunked(n, |range| {
        let mut counts = vec![0u64; HISTOGRAM_BINS];
        for i in range {
            let mut rng = stream_rng(seed, i);
            let mut state = sample_initial(cfg, &mut rng)?;
            let start = state.clone();
            advance(&mut state, cfg, t)?;
            let delta = state.displacement_since(&start);
            let x = delta[0] / scale;
            let bin = (((x + half_range) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
        Ok(counts)
    })?;
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for p in partials {
        for (c, v) in counts.iter_mut().zip(p) {
            *c += v;
        }
    }
    let nf = n as f64;
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (nf * width)).collect();
    let stderr: Vec<f64> = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            (p * (1.0 - p) / nf).sqrt() / width
        })
        .collect();
    let edges: Vec<f64> = (0..=HISTOGRAM_BINS)
        .map(|j| -half_range + j as f64 * width)
        .collect();
    let reference = superdiffusion_matrix(cfg).ok().map(|m| {
        let var = m.scalar;
        (0..HISTOGRAM_BINS)
            .map(|j| {
                let center = -half_range + (j as f64 + 0.5) * width;
                (-center * center / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
            })
            .collect()
    });
    Ok(DisplacementHistogram {
        time: t,
        edges,
        density,
        stderr,
        reference,
        samples: n,
    })
}

/// Power-law fit of a survival curve within a window of survival
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    /// alpha = -slope of ln F vs ln t.
    pub alpha: f64,
    /// Delta-method standard error honoring the nested-indicator
    /// correlation between survival bins.
    pub alpha_stderr: f64,
    /// (F_low, F_high) window in survival-probability units.
    pub window: (f64, f64),
    /// RMS of the log-log fit residuals.
    pub residual_rms: f64,
    pub bins_used: usize,
}

/// Unweighted least-squares slope of ln F̂ against ln t over the bins with
/// F_low < F̂ < F_high; alpha is minus the slope.
pub fn fit_exponent(curve: &SurvivalCurve, window: (f64, f64)) -> Result<ExponentFit> {
    let (f_low, f_high) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut fs = Vec::new();
    for j in 0..curve.len() {
        let f = curve.estimate(j);
        if f > f_low && f < f_high {
            xs.push(curve.thresholds[j].ln());
            ys.push(f.ln());
            fs.push(f);
        }
    }
    let m = xs.len();
    if m < 3 {
        return Err(Error::TooFewBins(m));
    }
    let x_mean = xs.iter().sum::<f64>() / m as f64;
    let y_mean = ys.iter().sum::<f64>() / m as f64;
    let sxx: f64 = xs.iter().map(|&x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / m as f64)
        .sqrt();
    // var(slope) = a' Σ a with a_j the OLS weights and Σ the delta-method
    // covariance of ln F̂: for nested survival indicators at t_i <= t_j,
    // cov(F̂_i, F̂_j) = F_j (1 - F_i)/n, so cov(ln F̂_i, ln F̂_j) ≈ (1/F_i - 1)/n
    let nf = curve.samples as f64;
    let weights: Vec<f64> = xs.iter().map(|&x| (x - x_mean) / sxx).collect();
    let mut var = 0.0;
    for i in 0..m {
        for j in 0..m {
            let f_early = fs[i.min(j)]; // bins are time-ordered
            var += weights[i] * weights[j] * (1.0 / f_early - 1.0) / nf;
        }
    }
    Ok(ExponentFit {
        alpha: -slope,
        alpha_stderr: var.max(0.0).sqrt(),
        window,
        residual_rms,
        bins_used: m,
    })
}
