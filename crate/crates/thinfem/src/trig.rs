//! Finite trigonometric polynomials `c + sum_j a_j sin(w_j s + phi_j)`.
//!
//! These are the building blocks for boundary profiles, strip heights and
//! forcing terms. All frequencies are strictly positive; the constant term
//! carries the mean.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinTerm {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub constant: f64,
    pub terms: Vec<SinTerm>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        TrigPoly { constant: c, terms: Vec::new() }
    }

    /// Builds a polynomial, merging terms that share a frequency.
    pub fn new(constant: f64, terms: Vec<SinTerm>) -> Result<Self> {
        if !constant.is_finite() {
            return Err(Error::InvalidSpec("constant term must be finite".into()));
        }
        for t in &terms {
            if !t.amplitude.is_finite() || !t.frequency.is_finite() || !t.phase.is_finite() {
                return Err(Error::InvalidSpec("trig term with non-finite entry".into()));
            }
            if t.frequency <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "trig frequency must be positive, got {}",
                    t.frequency
                )));
            }
        }
        let mut poly = TrigPoly { constant, terms };
        poly.merge_equal_frequencies();
        Ok(poly)
    }

    /// Combines terms with identical frequency by phasor addition:
    /// a1 sin(ws+p1) + a2 sin(ws+p2) = a sin(ws+p). Exact cancellations
    /// collapse to nothing, so `is_constant` sees through them.
    fn merge_equal_frequencies(&mut self) {
        self.terms
            .sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
        let mut merged: Vec<SinTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.frequency == t.frequency => {
                    // phasor components: a sin(ws+p) = (a cos p) sin ws + (a sin p) cos ws
                    let re = last.amplitude * last.phase.cos() + t.amplitude * t.phase.cos();
                    let im = last.amplitude * last.phase.sin() + t.amplitude * t.phase.sin();
                    let amp = re.hypot(im);
                    if amp <= 1e-300 {
                        merged.pop();
                    } else {
                        last.amplitude = amp;
                        last.phase = im.atan2(re);
                    }
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.amplitude != 0.0);
        self.terms = merged;
    }

    pub fn eval(&self, s: f64) -> f64 {
        let mut v = self.constant;
        for t in &self.terms {
            v += t.amplitude * (t.frequency * s + t.phase).sin();
        }
        v
    }

    pub fn deriv(&self, s: f64) -> f64 {
        let mut v = 0.0;
        for t in &self.terms {
            v += t.amplitude * t.frequency * (t.frequency * s + t.phase).cos();
        }
        v
    }

    /// Mean value over any expanding window: the constant term.
    pub fn mean(&self) -> f64 {
        self.constant
    }

    /// Lower bound `c - sum |a_j|` (attained only in the monochromatic case).
    pub fn lower_bound(&self) -> f64 {
        self.constant - self.amplitude_sum()
    }

    pub fn upper_bound(&self) -> f64 {
        self.constant + self.amplitude_sum()
    }

    /// Bound on |d/ds|: `sum |a_j w_j|`.
    pub fn deriv_bound(&self) -> f64 {
        self.terms.iter().map(|t| (t.amplitude * t.frequency).abs()).sum()
    }

    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    pub fn max_frequency(&self) -> Option<f64> {
        self.terms.last().map(|t| t.frequency)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> TrigPoly {
        TrigPoly {
            constant: self.constant * factor,
            terms: self
                .terms
                .iter()
                .map(|t| SinTerm { amplitude: t.amplitude * factor, ..*t })
                .collect(),
        }
    }

    pub fn plus(&self, other: &TrigPoly) -> TrigPoly {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        let mut poly = TrigPoly { constant: self.constant + other.constant, terms };
        poly.merge_equal_frequencies();
        poly
    }
}
