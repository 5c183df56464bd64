//! Thin domains with weakly oscillating boundaries.
//!
//! A domain is described over an interval I = (a, b) by two boundary
//! profiles: the lower wall sits at y = -eps * k1(x / eps^alpha) and the
//! upper wall at y = eps * k2(x / eps^beta). A narrow strip of depth
//! eps^(1+gamma) * H(x / eps^delta) hangs below the upper wall and carries
//! the concentrated forcing. The module also provides the two flattening
//! maps used downstream: L shifts the lower wall to zero, S rescales the
//! result onto the unit-height rectangle Q.

use crate::error::{Error, Result};
use crate::trig::TrigPoly;

/// A boundary profile together with the oscillation exponent: the profile
/// is evaluated at the stretched coordinate x / eps^exponent. Exponents
/// live in [0, 1); 0 means no stretching.
#[derive(Clone, Debug)]
pub struct ScaledProfile {
    pub base: TrigPoly,
    pub scale_exponent: f64,
}

impl ScaledProfile {
    pub fn new(base: TrigPoly, scale_exponent: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&scale_exponent) {
            return Err(Error::InvalidSpec(format!(
                "scale exponent must lie in [0, 1), got {scale_exponent}"
            )));
        }
        Ok(ScaledProfile { base, scale_exponent })
    }

    pub fn constant(c: f64) -> Self {
        ScaledProfile { base: TrigPoly::constant(c), scale_exponent: 0.0 }
    }

    pub fn eval(&self, x: f64, eps: f64) -> f64 {
        self.base.eval(x / eps.powf(self.scale_exponent))
    }

    /// Derivative with respect to the slow variable x.
    pub fn deriv_x(&self, x: f64, eps: f64) -> f64 {
        let stretch = eps.powf(self.scale_exponent);
        self.base.deriv(x / stretch) / stretch
    }

    pub fn lower_bound(&self) -> f64 {
        self.base.lower_bound()
    }

    pub fn upper_bound(&self) -> f64 {
        self.base.upper_bound()
    }

    /// Bound on sup_x eps * |d/dx|, which is eps^(1 - exponent) * sup |base'|.
    pub fn eta_bound(&self, eps: f64) -> f64 {
        eps.powf(1.0 - self.scale_exponent) * self.base.deriv_bound()
    }

    pub fn is_constant(&self) -> bool {
        self.base.is_constant()
    }

    /// Fastest frequency in the slow variable at the given eps.
    pub fn max_frequency_at(&self, eps: f64) -> Option<f64> {
        self.base
            .max_frequency()
            .map(|w| w / eps.powf(self.scale_exponent))
    }
}

#[derive(Clone, Debug)]
pub struct StripSpec {
    /// Depth exponent: the strip has physical depth eps^(1+gamma) * H.
    pub gamma: f64,
    pub height: ScaledProfile,
}

impl StripSpec {
    pub fn new(gamma: f64, height: ScaledProfile) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "strip exponent gamma must be positive and finite, got {gamma}"
            )));
        }
        if height.lower_bound() < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "strip height profile must be nonnegative; lower bound is {}",
                height.lower_bound()
            )));
        }
        Ok(StripSpec { gamma, height })
    }
}

/// Full description of the thin domain and its forcing strip.
#[derive(Clone, Debug)]
pub struct ThinDomainSpec {
    pub interval: (f64, f64),
    pub lower: ScaledProfile,
    pub upper: ScaledProfile,
    pub strip: StripSpec,
}

/// Numeric summary of the standing hypotheses at a given eps.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub eps: f64,
    /// Sampled sup of eps * |d/dx| for the lower and upper walls, and their max.
    pub eta_lower: f64,
    pub eta_upper: f64,
    pub eta: f64,
    /// Closed-form bounds eps^(1-exponent) * sup |base'| for the same quantities.
    pub eta_lower_bound: f64,
    pub eta_upper_bound: f64,
    pub eta_bound: f64,
    /// Oscillation exponents below one, so eta vanishes with eps.
    pub h1_ok: bool,
    /// Both walls uniformly positive (strict two-sided bounds).
    pub h2_ok: bool,
    /// Sampled window averages of k1, k2 and 1/(k1+k2), supporting the
    /// existence of the means used by the limit problem.
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub mean_inv_thickness: f64,
}

impl ThinDomainSpec {
    /// Validates the eps-independent part of the specification. The lower
    /// wall may touch zero (the shifted domain produced by the map L has an
    /// identically zero lower wall); the upper wall and the total thickness
    /// must be uniformly positive.
    pub fn new(
        interval: (f64, f64),
        lower: ScaledProfile,
        upper: ScaledProfile,
        strip: StripSpec,
    ) -> Result<Self> {
        let (a, b) = interval;
        if !a.is_finite() || !b.is_finite() || !(a < b) {
            return Err(Error::InvalidSpec(format!(
                "interval must be finite with a < b, got ({a}, {b})"
            )));
        }
        if lower.lower_bound() < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "lower wall profile must be nonnegative; lower bound is {}",
                lower.lower_bound()
            )));
        }
        if upper.lower_bound() <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "upper wall profile must be uniformly positive; lower bound is {}",
                upper.lower_bound()
            )));
        }
        Ok(ThinDomainSpec { interval, lower, upper, strip })
    }

    /// Skips validation. Intended for tests that probe degenerate inputs.
    pub fn new_unchecked(
        interval: (f64, f64),
        lower: ScaledProfile,
        upper: ScaledProfile,
        strip: StripSpec,
    ) -> Self {
        ThinDomainSpec { interval, lower, upper, strip }
    }

    pub fn k1(&self, x: f64, eps: f64) -> f64 {
        self.lower.eval(x, eps)
    }

    pub fn k2(&self, x: f64, eps: f64) -> f64 {
        self.upper.eval(x, eps)
    }

    /// Total thickness profile K = k1 + k2 (the physical height is eps * K).
    pub fn thickness(&self, x: f64, eps: f64) -> f64 {
        self.k1(x, eps) + self.k2(x, eps)
    }

    pub fn thickness_deriv(&self, x: f64, eps: f64) -> f64 {
        self.lower.deriv_x(x, eps) + self.upper.deriv_x(x, eps)
    }

    /// Strip height profile H evaluated at x.
    pub fn strip_height(&self, x: f64, eps: f64) -> f64 {
        self.strip.height.eval(x, eps)
    }

    /// Physical strip depth eps^(1+gamma) * H(x).
    pub fn strip_depth(&self, x: f64, eps: f64) -> f64 {
        eps.powf(1.0 + self.strip.gamma) * self.strip_height(x, eps)
    }

    /// Strip membership: eps * (k2 - eps^gamma H) < y < eps * k2.
    pub fn in_strip(&self, x: f64, y: f64, eps: f64) -> Result<bool> {
        check_eps(eps)?;
        let top = eps * self.k2(x, eps);
        Ok(y < top && y > top - self.strip_depth(x, eps))
    }

    /// Checks that eps is admissible: positive, and the strip fits strictly
    /// inside the domain everywhere (sampled densely plus a closed-form
    /// sufficient bound when available).
    pub fn validate_at(&self, eps: f64) -> Result<()> {
        check_eps(eps)?;
        let depth_max = eps.powf(self.strip.gamma) * self.strip.height.upper_bound();
        let k_min = self.lower.lower_bound() + self.upper.lower_bound();
        if depth_max < k_min {
            return Ok(());
        }
        // The coarse bound is inconclusive; sample.
        let n = 4096;
        let (a, b) = self.interval;
        for i in 0..=n {
            let x = a + (b - a) * i as f64 / n as f64;
            let gap = self.thickness(x, eps) - eps.powf(self.strip.gamma) * self.strip_height(x, eps);
            if gap <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "strip reaches the lower wall near x = {x} at eps = {eps} (margin {gap:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Map L from the physical domain to the shifted domain with flat lower
    /// wall: (x, y) -> (x, y + eps * k1(x)).
    pub fn map_l(&self, x: f64, y: f64, eps: f64) -> (f64, f64) {
        (x, y + eps * self.k1(x, eps))
    }

    pub fn map_l_inv(&self, x: f64, ybar: f64, eps: f64) -> (f64, f64) {
        (x, ybar - eps * self.k1(x, eps))
    }

    /// Map S from the shifted domain to the unit-height rectangle Q:
    /// (x, ybar) -> (x, ybar / (eps * K(x))).
    pub fn map_s(&self, x: f64, ybar: f64, eps: f64) -> (f64, f64) {
        (x, ybar / (eps * self.thickness(x, eps)))
    }

    pub fn map_s_inv(&self, x: f64, t: f64, eps: f64) -> (f64, f64) {
        (x, t * eps * self.thickness(x, eps))
    }

    /// Jacobian of L at (x, y), row-major [[dxbar/dx, dxbar/dy], [dybar/dx, dybar/dy]].
    pub fn jacobian_l(&self, x: f64, eps: f64) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [eps * self.lower.deriv_x(x, eps), 1.0]]
    }

    /// Jacobian of S^{-1} at (x, t): maps rectangle coordinates to shifted ones.
    pub fn jacobian_s_inv(&self, x: f64, t: f64, eps: f64) -> [[f64; 2]; 2] {
        [
            [1.0, 0.0],
            [t * eps * self.thickness_deriv(x, eps), eps * self.thickness(x, eps)],
        ]
    }

    /// Samples the oscillation measure eta and the wall bounds at a given eps.
    pub fn hypothesis_report(&self, eps: f64, n_samples: usize) -> Result<HypothesisReport> {
        check_eps(eps)?;
        let n = n_samples.max(16);
        let (a, b) = self.interval;
        let dx = (b - a) / n as f64;
        let mut eta_lower = 0.0_f64;
        let mut eta_upper = 0.0_f64;
        let mut k1_min = f64::INFINITY;
        let mut k2_min = f64::INFINITY;
        let mut sums = [0.0_f64; 3];
        for i in 0..=n {
            let x = a + dx * i as f64;
            let k1 = self.k1(x, eps);
            let k2 = self.k2(x, eps);
            let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
            eta_lower = eta_lower.max(eps * self.lower.deriv_x(x, eps).abs());
            eta_upper = eta_upper.max(eps * self.upper.deriv_x(x, eps).abs());
            k1_min = k1_min.min(k1);
            k2_min = k2_min.min(k2);
            sums[0] += weight * k1;
            sums[1] += weight * k2;
            sums[2] += weight / (k1 + k2);
        }
        let h1_ok = self.lower.scale_exponent < 1.0 && self.upper.scale_exponent < 1.0;
        let h2_ok = self.lower.lower_bound() > 0.0 && self.upper.lower_bound() > 0.0;
        Ok(HypothesisReport {
            eps,
            eta_lower,
            eta_upper,
            eta: eta_lower.max(eta_upper),
            eta_lower_bound: self.lower.eta_bound(eps),
            eta_upper_bound: self.upper.eta_bound(eps),
            eta_bound: self.lower.eta_bound(eps).max(self.upper.eta_bound(eps)),
            h1_ok,
            h2_ok,
            mean_lower: sums[0] / n as f64,
            mean_upper: sums[1] / n as f64,
            mean_inv_thickness: sums[2] / n as f64,
        })
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::BadEpsilon(eps));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::SinTerm;
    use std::f64::consts::PI;

    fn term(a: f64, w: f64) -> SinTerm {
        SinTerm { amplitude: a, frequency: w, phase: 0.0 }
    }

    /// The benchmark domain: k1 = 8 - sin(s) - sin(pi s / 8) and
    /// k2 = 8 + sin(s) + sin(pi s / 8) at scale eps^(1/5) (thickness 16
    /// exactly), strip height 2 + sin at scale eps^(1/3), gamma = 1/18.
    pub(crate) fn bench_spec() -> ThinDomainSpec {
        let wall_lo = TrigPoly::new(8.0, vec![term(-1.0, 1.0), term(-1.0, PI / 8.0)]).unwrap();
        let wall_up = TrigPoly::new(8.0, vec![term(1.0, 1.0), term(1.0, PI / 8.0)]).unwrap();
        let lower = ScaledProfile::new(wall_lo, 0.2).unwrap();
        let upper = ScaledProfile::new(wall_up, 0.2).unwrap();
        let height = ScaledProfile::new(
            TrigPoly::new(2.0, vec![term(1.0, 1.0)]).unwrap(),
            1.0 / 3.0,
        )
        .unwrap();
        let strip = StripSpec::new(1.0 / 18.0, height).unwrap();
        ThinDomainSpec::new((0.0, 20.0), lower, upper, strip).unwrap()
    }

    #[test]
    fn wall_evaluation_matches_closed_form() {
        let spec = bench_spec();
        let eps: f64 = 0.1;
        let stretch = eps.powf(0.2);
        let x = 2.0;
        let s: f64 = x / stretch;
        let expected = 8.0 - s.sin() - (PI * s / 8.0).sin();
        assert!((spec.k1(x, eps) - expected).abs() < 1e-13);
        assert!((spec.k2(x, eps) - (16.0 - expected)).abs() < 1e-13);
        assert!((spec.thickness(x, eps) - 16.0).abs() < 1e-12);
    }

    #[test]
    fn maps_invert_each_other() {
        let spec = bench_spec();
        let eps = 0.1;
        for i in 0..50 {
            let x = 0.4 * i as f64;
            let y = 0.01 * (i as f64 - 25.0) / 25.0;
            let (xl, yl) = spec.map_l(x, y, eps);
            let (xb, yb) = spec.map_l_inv(xl, yl, eps);
            assert_eq!(xb, x);
            assert!((yb - y).abs() < 1e-15);
            let (xs, t) = spec.map_s(xl, yl, eps);
            let (xr, yr) = spec.map_s_inv(xs, t, eps);
            assert!((yr - yl).abs() < 1e-15 * (1.0 + yl.abs()));
            assert_eq!(xr, x);
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let spec = bench_spec();
        let eps = 0.1;
        let h = 1e-6;
        for &x in &[1.0, 7.3, 15.9] {
            let jl = spec.jacobian_l(x, eps);
            let fd = (spec.map_l(x + h, 0.02, eps).1 - spec.map_l(x - h, 0.02, eps).1) / (2.0 * h);
            assert!((jl[1][0] - fd).abs() < 1e-6, "L: {} vs {}", jl[1][0], fd);
            assert_eq!(jl[0][0], 1.0);
            assert_eq!(jl[1][1], 1.0);

            let t = 0.37;
            let js = spec.jacobian_s_inv(x, t, eps);
            let fd_x = (spec.map_s_inv(x + h, t, eps).1 - spec.map_s_inv(x - h, t, eps).1) / (2.0 * h);
            let fd_t = (spec.map_s_inv(x, t + h, eps).1 - spec.map_s_inv(x, t - h, eps).1) / (2.0 * h);
            assert!((js[1][0] - fd_x).abs() < 1e-5);
            assert!((js[1][1] - fd_t).abs() < 1e-6);
        }
    }

    #[test]
    fn eta_decays_with_the_predicted_rate() {
        let spec = bench_spec();
        // eta ~ eps^(1 - 1/5); fit the sampled sup over a dyadic eps ladder.
        let eps_list = [0.1, 0.05, 0.025, 0.0125];
        let etas: Vec<f64> = eps_list
            .iter()
            .map(|&e| spec.hypothesis_report(e, 20000).unwrap().eta)
            .collect();
        let slope = crate::numeric::loglog_slope(&eps_list, &etas);
        assert!((slope - 0.8).abs() < 0.04, "slope {slope}");
        // And the closed-form bound dominates the sampled sup.
        for (&e, &eta) in eps_list.iter().zip(&etas) {
            let bound = spec.hypothesis_report(e, 100).unwrap().eta_bound;
            assert!(eta <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hypothesis_flags() {
        let spec = bench_spec();
        let report = spec.hypothesis_report(0.1, 2000).unwrap();
        assert!(report.h1_ok);
        assert!(report.h2_ok);
        assert!((report.mean_lower - 8.0).abs() < 0.1);
        assert!((report.mean_upper - 8.0).abs() < 0.1);

        // A wall that dips to -1 violates the positivity hypothesis: the
        // checked constructor refuses it and the report flags it.
        let bad_wall = ScaledProfile::new(
            TrigPoly::new(1.0, vec![term(2.0, 1.0)]).unwrap(),
            0.2,
        )
        .unwrap();
        let strip = StripSpec::new(0.5, ScaledProfile::constant(1.0)).unwrap();
        assert!(ThinDomainSpec::new(
            (0.0, 1.0),
            ScaledProfile::constant(1.0),
            bad_wall.clone(),
            strip.clone()
        )
        .is_err());
        let unchecked = ThinDomainSpec::new_unchecked(
            (0.0, 1.0),
            ScaledProfile::constant(1.0),
            bad_wall,
            strip,
        );
        assert!(!unchecked.hypothesis_report(0.1, 500).unwrap().h2_ok);
    }

    #[test]
    fn strip_membership_and_containment() {
        let spec = bench_spec();
        let eps = 0.1;
        spec.validate_at(eps).unwrap();
        let x = 3.7;
        let top = eps * spec.k2(x, eps);
        let depth = spec.strip_depth(x, eps);
        assert!(spec.in_strip(x, top - 0.5 * depth, eps).unwrap());
        assert!(!spec.in_strip(x, top + 1e-9, eps).unwrap());
        assert!(!spec.in_strip(x, top - depth - 1e-9, eps).unwrap());
        assert!(spec.in_strip(x, 0.0, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_intervals_and_exponents() {
        assert!(ScaledProfile::new(TrigPoly::constant(1.0), 1.0).is_err());
        assert!(ScaledProfile::new(TrigPoly::constant(1.0), -0.1).is_err());
        assert!(StripSpec::new(0.0, ScaledProfile::constant(1.0)).is_err());
        let strip = StripSpec::new(0.5, ScaledProfile::constant(1.0)).unwrap();
        assert!(ThinDomainSpec::new(
            (1.0, 1.0),
            ScaledProfile::constant(1.0),
            ScaledProfile::constant(1.0),
            strip
        )
        .is_err());
    }
}
