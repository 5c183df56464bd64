//! Means of quasi-periodic functions and the homogenized coefficients of
//! the limit problem.
//!
//! Three routes to a mean are provided. Finite trigonometric sums have the
//! exact mean given by their constant term. Functions of such sums (here:
//! the reciprocal of the thickness) are averaged either on the compactified
//! torus spanned by their frequencies, or along a long interval in the
//! Besicovitch style. The torus route is spectrally accurate but requires
//! the frequencies to be rationally independent; the long-interval route is
//! always available for a single oscillation scale and converges like the
//! reciprocal window length.

use crate::error::{Error, Result};
use crate::geometry::ThinDomainSpec;
use crate::numeric::{gauss_panel, pairwise_sum_by, GAUSS_8};
use crate::trig::TrigPoly;

/// Tag for the two oscillation scales of a two-wall thickness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleBlock {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug)]
pub struct QpTerm {
    pub coefficient: f64,
    pub frequency: f64,
    pub phase: f64,
    pub block: ScaleBlock,
}

/// A quasi-periodic trigonometric sum whose terms may live on two
/// independent scales. Terms sharing a block and a frequency are merged.
#[derive(Clone, Debug)]
pub struct QPFunction {
    pub constant: f64,
    pub terms: Vec<QpTerm>,
}

impl QPFunction {
    pub fn new(constant: f64, terms: Vec<QpTerm>) -> Result<Self> {
        if !constant.is_finite() {
            return Err(Error::InvalidSpec("constant term must be finite".into()));
        }
        for t in &terms {
            if !t.coefficient.is_finite() || !t.frequency.is_finite() || !t.phase.is_finite() {
                return Err(Error::InvalidSpec("term with non-finite entry".into()));
            }
            if t.frequency <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "frequency must be positive, got {}",
                    t.frequency
                )));
            }
        }
        let mut f = QPFunction { constant, terms };
        f.merge();
        Ok(f)
    }

    pub fn from_profiles(lower: &TrigPoly, upper: &TrigPoly) -> Self {
        let mut terms = Vec::new();
        for t in &lower.terms {
            terms.push(QpTerm {
                coefficient: t.amplitude,
                frequency: t.frequency,
                phase: t.phase,
                block: ScaleBlock::Lower,
            });
        }
        for t in &upper.terms {
            terms.push(QpTerm {
                coefficient: t.amplitude,
                frequency: t.frequency,
                phase: t.phase,
                block: ScaleBlock::Upper,
            });
        }
        QPFunction { constant: lower.constant + upper.constant, terms }
    }

    fn merge(&mut self) {
        self.terms.sort_by(|a, b| {
            (a.block == ScaleBlock::Upper, a.frequency)
                .partial_cmp(&(b.block == ScaleBlock::Upper, b.frequency))
                .unwrap()
        });
        let mut merged: Vec<QpTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.block == t.block && last.frequency == t.frequency => {
                    let re = last.coefficient * last.phase.cos() + t.coefficient * t.phase.cos();
                    let im = last.coefficient * last.phase.sin() + t.coefficient * t.phase.sin();
                    let amp = re.hypot(im);
                    if amp <= 1e-300 {
                        merged.pop();
                    } else {
                        last.coefficient = amp;
                        last.phase = im.atan2(re);
                    }
                }
                _ => merged.push(t),
            }
        }
        self.terms = merged;
    }

    /// Evaluates with the lower-block terms at s_lower and the upper-block
    /// terms at s_upper.
    pub fn eval(&self, s_lower: f64, s_upper: f64) -> f64 {
        let mut v = self.constant;
        for t in &self.terms {
            let s = match t.block {
                ScaleBlock::Lower => s_lower,
                ScaleBlock::Upper => s_upper,
            };
            v += t.coefficient * (t.frequency * s + t.phase).sin();
        }
        v
    }
}

/// Exact mean of a trigonometric sum: its constant term.
pub fn mean_trig(f: &QPFunction) -> f64 {
    f.constant
}

/// Rectangular cell of the compactified torus, one period per frequency.
#[derive(Clone, Debug)]
pub struct TorusCell {
    pub periods: Vec<f64>,
}

impl TorusCell {
    pub fn from_frequencies(freqs: &[f64]) -> Result<Self> {
        if freqs.is_empty() || freqs.len() > 4 {
            return Err(Error::TorusDimension(freqs.len()));
        }
        for &w in freqs {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidSpec(format!("torus frequency must be positive, got {w}")));
            }
        }
        Ok(TorusCell {
            periods: freqs.iter().map(|&w| std::f64::consts::TAU / w).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }
}

/// Tensor midpoint quadrature over the torus cell. Spectrally accurate for
/// smooth periodic integrands; the work is n_per_axis^dim evaluations.
pub fn mean_torus(cell: &TorusCell, n_per_axis: usize, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let d = cell.dim();
    if d == 0 || d > 4 {
        return Err(Error::TorusDimension(d));
    }
    if n_per_axis < 16 {
        return Err(Error::InvalidSpec(format!(
            "torus quadrature needs at least 16 points per axis, got {n_per_axis}"
        )));
    }
    let total = n_per_axis.checked_pow(d as u32).filter(|&t| t <= 1 << 31).ok_or_else(|| {
        Error::InvalidSpec(format!("torus quadrature too large: {n_per_axis}^{d} points"))
    })?;
    let n_f = n_per_axis as f64;
    let sample = |idx: usize| -> f64 {
        let mut theta = [0.0_f64; 4];
        let mut rem = idx;
        for (t, period) in theta.iter_mut().zip(&cell.periods) {
            *t = period * ((rem % n_per_axis) as f64 + 0.5) / n_f;
            rem /= n_per_axis;
        }
        let v = f(&theta[..d]);
        if v.is_finite() {
            v
        } else {
            f64::NAN
        }
    };
    let mean = pairwise_sum_by(total, &sample) / total as f64;
    if !mean.is_finite() {
        return Err(Error::NonFinite { context: "mean_torus", at: 0.0 });
    }
    Ok(mean)
}

/// Besicovitch-style mean over symmetric windows [-T, T] of growing length.
#[derive(Clone, Debug)]
pub struct LongIntervalMean {
    /// (window length T, window average) for each requested window.
    pub estimates: Vec<(f64, f64)>,
    /// Average over the longest window.
    pub value: f64,
    /// Gap between the two longest windows; a tail diagnostic, not a bound.
    pub tail_spread: f64,
}

/// Averages `f` over [-T, T] for each window length. Each window is tiled
/// with Gauss panels no wider than half the shortest oscillation period, so
/// the quadrature resolves every oscillation and the remaining deviation
/// from the true mean is the O(1/T) windowing error.
pub fn mean_long_interval(
    f: impl Fn(f64) -> f64,
    windows: &[f64],
    shortest_period: f64,
) -> Result<LongIntervalMean> {
    if windows.is_empty() {
        return Err(Error::InvalidSpec("window list must be non-empty".into()));
    }
    if !(shortest_period > 0.0) || !shortest_period.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "shortest period must be positive, got {shortest_period}"
        )));
    }
    for pair in windows.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::InvalidSpec("window lengths must be strictly increasing".into()));
        }
    }
    if !(windows[0] > 0.0) {
        return Err(Error::InvalidSpec("window lengths must be positive".into()));
    }
    let width = 0.5 * shortest_period;
    let mut estimates = Vec::with_capacity(windows.len());
    for &t in windows {
        let n_panels = ((2.0 * t / width).ceil() as usize).max(1);
        let dx = 2.0 * t / n_panels as f64;
        let integral = pairwise_sum_by(n_panels, &|i| {
            let lo = -t + dx * i as f64;
            gauss_panel(lo, lo + dx, &GAUSS_8, &f)
        });
        let avg = integral / (2.0 * t);
        if !avg.is_finite() {
            return Err(Error::NonFinite { context: "mean_long_interval", at: t });
        }
        estimates.push((t, avg));
    }
    let value = estimates.last().unwrap().1;
    let tail_spread = if estimates.len() >= 2 {
        (estimates[estimates.len() - 2].1 - value).abs()
    } else {
        0.0
    };
    Ok(LongIntervalMean { estimates, value, tail_spread })
}

/// True when w1/w2 is (numerically) a ratio of small integers. Frequencies
/// related this way share a closed orbit, so the torus route would average
/// over a larger set than the trajectory visits.
fn commensurable(w1: f64, w2: f64) -> bool {
    for p in 1..=16u32 {
        for q in 1..=16u32 {
            if (w1 * q as f64 - w2 * p as f64).abs() <= 1e-9 * w2 * q as f64 {
                return true;
            }
        }
    }
    false
}

fn pairwise_independent(freqs: &[f64]) -> bool {
    for i in 0..freqs.len() {
        for j in (i + 1)..freqs.len() {
            if commensurable(freqs[i], freqs[j]) {
                return false;
            }
        }
    }
    true
}

fn n_for_dim(d: usize) -> usize {
    match d {
        1 => 256,
        2 => 64,
        3 => 40,
        _ => 24,
    }
}

/// How the thickness-reciprocal mean P was obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum PMethod {
    /// Thickness is exactly constant; P is its reciprocal.
    ConstantExact,
    Torus { dim: usize, n_per_axis: usize },
    LongInterval { t_max: f64 },
}

/// Means entering the limit problem: -q w'' + w = fhat on I with natural
/// boundary conditions, where q = 1 / (P * mu_K).
#[derive(Clone, Debug)]
pub struct HomogenizedCoefficients {
    pub k1_mean: f64,
    pub k2_mean: f64,
    pub mu_k: f64,
    pub mu_h: f64,
    /// Mean of 1 / (k1 + k2).
    pub p: f64,
    /// Limit diffusion coefficient 1 / (P * mu_K), in (0, 1].
    pub q: f64,
    pub p_method: PMethod,
    pub p_torus: Option<f64>,
    pub p_long: Option<f64>,
    /// Averaged strip forcing mu_H * f.
    pub f0: TrigPoly,
    /// Limit right-hand side f0 / mu_K.
    pub fhat: TrigPoly,
}

pub const DEFAULT_WINDOWS: [f64; 3] = [1.0e3, 4.0e3, 1.0e4];

pub fn homogenized_coefficients(
    spec: &ThinDomainSpec,
    forcing: &TrigPoly,
) -> Result<HomogenizedCoefficients> {
    let k1_mean = spec.lower.base.mean();
    let k2_mean = spec.upper.base.mean();
    let mu_k = k1_mean + k2_mean;
    let mu_h = spec.strip.height.base.mean();
    if !(mu_k > 0.0) {
        return Err(Error::InvalidSpec(format!("mean thickness must be positive, got {mu_k}")));
    }

    let single_scale = spec.lower.is_constant()
        || spec.upper.is_constant()
        || spec.lower.scale_exponent == spec.upper.scale_exponent;

    let (p, p_method, p_torus, p_long) = if single_scale {
        let combined = spec.lower.base.plus(&spec.upper.base);
        if combined.lower_bound() <= 0.0 {
            return Err(Error::InvalidSpec(
                "thickness must be uniformly positive to average its reciprocal".into(),
            ));
        }
        if combined.is_constant() {
            let p = 1.0 / combined.constant;
            (p, PMethod::ConstantExact, Some(p), Some(p))
        } else {
            let freqs: Vec<f64> = combined.terms.iter().map(|t| t.frequency).collect();
            let shortest_period = std::f64::consts::TAU / freqs.last().unwrap();
            let long = mean_long_interval(
                |s| 1.0 / combined.eval(s),
                &DEFAULT_WINDOWS,
                shortest_period,
            )?;
            if freqs.len() <= 4 && pairwise_independent(&freqs) {
                let cell = TorusCell::from_frequencies(&freqs)?;
                let n = n_for_dim(freqs.len());
                let c = combined.constant;
                let terms = combined.terms.clone();
                let p = mean_torus(&cell, n, |theta| {
                    let mut k = c;
                    for (j, t) in terms.iter().enumerate() {
                        k += t.amplitude * (t.frequency * theta[j] + t.phase).sin();
                    }
                    1.0 / k
                })?;
                (
                    p,
                    PMethod::Torus { dim: freqs.len(), n_per_axis: n },
                    Some(p),
                    Some(long.value),
                )
            } else {
                let t_max = long.estimates.last().unwrap().0;
                (long.value, PMethod::LongInterval { t_max }, None, Some(long.value))
            }
        }
    } else {
        // Two genuinely different scales: average over the product torus.
        // Within each block the frequencies must be rationally independent;
        // across blocks the differing stretches decouple the phases.
        let lower_freqs: Vec<f64> = spec.lower.base.terms.iter().map(|t| t.frequency).collect();
        let upper_freqs: Vec<f64> = spec.upper.base.terms.iter().map(|t| t.frequency).collect();
        if !pairwise_independent(&lower_freqs) || !pairwise_independent(&upper_freqs) {
            return Err(Error::InvalidSpec(
                "commensurable frequencies within one scale block are not supported \
                 for a two-scale thickness"
                    .into(),
            ));
        }
        if spec.lower.base.lower_bound() + spec.upper.base.lower_bound() <= 0.0 {
            return Err(Error::InvalidSpec(
                "thickness must be uniformly positive to average its reciprocal".into(),
            ));
        }
        let dim = lower_freqs.len() + upper_freqs.len();
        if dim > 4 {
            return Err(Error::TorusDimension(dim));
        }
        let mut freqs = lower_freqs;
        freqs.extend_from_slice(&upper_freqs);
        let cell = TorusCell::from_frequencies(&freqs)?;
        let n = n_for_dim(dim);
        let c = spec.lower.base.constant + spec.upper.base.constant;
        let mut terms = spec.lower.base.terms.clone();
        terms.extend_from_slice(&spec.upper.base.terms);
        let p = mean_torus(&cell, n, |theta| {
            let mut k = c;
            for (j, t) in terms.iter().enumerate() {
                k += t.amplitude * (t.frequency * theta[j] + t.phase).sin();
            }
            1.0 / k
        })?;
        (p, PMethod::Torus { dim, n_per_axis: n }, Some(p), None)
    };

    let prod = p * mu_k;
    if prod < 1.0 - 1e-9 {
        return Err(Error::Contract(format!(
            "mean inequality violated: P * mu_K = {prod} < 1"
        )));
    }
    let q = (1.0 / prod).min(1.0);
    let f0 = forcing.scaled(mu_h);
    let fhat = forcing.scaled(mu_h / mu_k);

    Ok(HomogenizedCoefficients {
        k1_mean,
        k2_mean,
        mu_k,
        mu_h,
        p,
        q,
        p_method,
        p_torus,
        p_long,
        f0,
        fhat,
    })
}
