//! Small numerical helpers shared across the crate: compensated summation,
//! Gauss-Legendre tables, and least-squares slope fitting.

/// Gauss-Legendre nodes and weights on [-1, 1], listed as (node, weight).
pub const GAUSS_2: [(f64, f64); 2] = [
    (-0.5773502691896257, 1.0),
    (0.5773502691896257, 1.0),
];

pub const GAUSS_4: [(f64, f64); 4] = [
    (-0.8611363115940526, 0.3478548451374538),
    (-0.3399810435848563, 0.6521451548625461),
    (0.3399810435848563, 0.6521451548625461),
    (0.8611363115940526, 0.3478548451374538),
];

pub const GAUSS_5: [(f64, f64); 5] = [
    (-0.906179845938664, 0.2369268850561891),
    (-0.5384693101056831, 0.4786286704993665),
    (0.0, 0.5688888888888889),
    (0.5384693101056831, 0.4786286704993665),
    (0.906179845938664, 0.2369268850561891),
];

pub const GAUSS_8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.525532409916329, 0.3137066458778873),
    (-0.1834346424956498, 0.362683783378362),
    (0.1834346424956498, 0.362683783378362),
    (0.525532409916329, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

/// Returns the tabulated rule with at least `n` points (capped at 8).
pub fn gauss_rule(n: usize) -> &'static [(f64, f64)] {
    match n {
        0..=2 => &GAUSS_2,
        3..=4 => &GAUSS_4,
        5 => &GAUSS_5,
        _ => &GAUSS_8,
    }
}

/// Integrates `f` over [a, b] with a single panel of the given rule.
pub fn gauss_panel(a: f64, b: f64, rule: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(t, w) in rule {
        acc += w * f(mid + half * t);
    }
    acc * half
}

/// Sums a slice by recursive halving. Error grows like O(log n) in the
/// number of terms instead of O(n) for sequential accumulation, and the
/// result does not depend on chunking choices.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Pairwise summation of `f(0) + ... + f(n-1)` without materialising the terms.
pub fn pairwise_sum_by(n: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn range_sum(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
        match hi - lo {
            0 => 0.0,
            1 => f(lo),
            2 => f(lo) + f(lo + 1),
            len => {
                let mid = lo + len / 2;
                range_sum(lo, mid, f) + range_sum(mid, hi, f)
            }
        }
    }
    range_sum(0, n, f)
}

/// Least-squares slope of ln(y) against ln(x). Inputs must be positive and
/// of equal length >= 2; returns NaN otherwise.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() != ys.len() || xs.len() < 2 {
        return f64::NAN;
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|&x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&y| y.ln()).collect();
    let mx = pairwise_sum(&lx) / n;
    let my = pairwise_sum(&ly) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if sxx == 0.0 {
        return f64::NAN;
    }
    sxy / sxx
}

/// Solves the 2x2 system `a x = b` by Cramer's rule. Returns None when the
/// determinant is negligible relative to the matrix scale.
pub fn solve_2x2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a[0][0].abs().max(a[0][1].abs()).max(a[1][0].abs()).max(a[1][1].abs());
    if det.abs() <= 1e-14 * scale * scale {
        return None;
    }
    Some([
        (b[0] * a[1][1] - b[1] * a[0][1]) / det,
        (a[0][0] * b[1] - a[1][0] * b[0]) / det,
    ])
}
