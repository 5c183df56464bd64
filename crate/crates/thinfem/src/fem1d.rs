//! One-dimensional P1 solvers for the reduced oscillating-coefficient
//! problem and the homogenized limit problem, both with natural boundary
//! conditions on the interval.
//!
//! The reduced problem -(1/K)(K w')' + w = g is assembled in the weighted
//! weak form: K w' phi' + K w phi = K g phi. With the concentrated strip
//! forcing the weighted right-hand side collapses to H(x) times the strip
//! average of f, so no singular powers of eps appear anywhere in the
//! assembly.

use crate::error::{Error, Result};
use crate::geometry::{check_eps, ThinDomainSpec};
use crate::numeric::{gauss_rule, GAUSS_2, GAUSS_5};
use crate::qmean::HomogenizedCoefficients;

#[derive(Clone, Debug)]
pub struct Grid1D {
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn uniform(a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || !(a < b) {
            return Err(Error::InvalidSpec(format!("bad interval ({a}, {b})")));
        }
        if n_nodes < 2 {
            return Err(Error::InvalidSpec(format!("need at least 2 nodes, got {n_nodes}")));
        }
        let n = n_nodes - 1;
        let nodes = (0..=n)
            .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
            .collect();
        Ok(Grid1D { nodes })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidSpec("need at least 2 nodes".into()));
        }
        for pair in nodes.windows(2) {
            if !(pair[0] < pair[1]) || !pair[1].is_finite() {
                return Err(Error::InvalidSpec("nodes must be finite and strictly increasing".into()));
            }
        }
        Ok(Grid1D { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }
}

/// Piecewise-linear field over a grid.
#[derive(Clone, Debug)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::Contract(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        Ok(Field1D { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Field1D { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// P1 interpolation, clamped to the end values outside the span.
    pub fn eval(&self, x: f64) -> f64 {
        let nodes = self.grid.nodes();
        if x <= nodes[0] {
            return self.values[0];
        }
        if x >= *nodes.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let hi = nodes.partition_point(|&v| v < x).max(1);
        let lo = hi - 1;
        let t = (x - nodes[lo]) / (nodes[hi] - nodes[lo]);
        self.values[lo] * (1.0 - t) + self.values[hi] * t
    }
}

#[derive(Clone, Debug)]
pub struct Solution1D {
    pub field: Field1D,
    /// |u' A u - u' b| / max(|u' A u|, |u' b|) for the assembled system.
    pub energy_residual: f64,
    pub n_elements: usize,
}

/// Assembles and solves -(c u')' + m u = g with natural boundary
/// conditions, 2-point Gauss quadrature per element and a tridiagonal
/// direct solve. `diffusion` must be positive and `mass` nonnegative at
/// every quadrature point.
pub fn solve_1d(
    grid: &Grid1D,
    diffusion: impl Fn(f64) -> f64,
    mass: impl Fn(f64) -> f64,
    load: impl Fn(f64) -> f64,
) -> Result<Solution1D> {
    let nodes = grid.nodes();
    let n = nodes.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut rhs = vec![0.0; n];

    for e in 0..(n - 1) {
        let xl = nodes[e];
        let xr = nodes[e + 1];
        let h = xr - xl;
        for &(t, w) in &GAUSS_2 {
            let xg = 0.5 * (xl + xr) + 0.5 * h * t;
            let phi_r = 0.5 * (1.0 + t);
            let phi_l = 1.0 - phi_r;
            let c = diffusion(xg);
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::NonPositiveCoefficient { x: xg, value: c });
            }
            let m = mass(xg);
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::NonPositiveCoefficient { x: xg, value: m });
            }
            let g = load(xg);
            if !g.is_finite() {
                return Err(Error::NonFinite { context: "solve_1d load", at: xg });
            }
            let scale = 0.5 * h * w;
            let stiff = scale * c / (h * h);
            let mll = scale * m * phi_l * phi_l;
            let mrr = scale * m * phi_r * phi_r;
            let mlr = scale * m * phi_l * phi_r;
            diag[e] += stiff + mll;
            diag[e + 1] += stiff + mrr;
            off[e] += -stiff + mlr;
            rhs[e] += scale * g * phi_l;
            rhs[e + 1] += scale * g * phi_r;
        }
    }

    let values = thomas_solve(&diag, &off, &rhs)?;

    // energy identity of the discrete system
    let mut xax = 0.0;
    let mut xb = 0.0;
    for i in 0..n {
        let mut row = diag[i] * values[i];
        if i > 0 {
            row += off[i - 1] * values[i - 1];
        }
        if i + 1 < n {
            row += off[i] * values[i + 1];
        }
        xax += values[i] * row;
        xb += values[i] * rhs[i];
    }
    let energy_residual = (xax - xb).abs() / xax.abs().max(xb.abs()).max(f64::MIN_POSITIVE);

    Ok(Solution1D {
        field: Field1D::new(grid.clone(), values)?,
        energy_residual,
        n_elements: n - 1,
    })
}

/// Symmetric tridiagonal solve; errors on a non-positive pivot.
fn thomas_solve(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut b = rhs.to_vec();
    for i in 1..n {
        if !(d[i - 1] > 0.0) {
            return Err(Error::Contract(format!(
                "non-positive pivot {} at row {}",
                d[i - 1],
                i - 1
            )));
        }
        let m = off[i - 1] / d[i - 1];
        d[i] -= m * off[i - 1];
        b[i] -= m * b[i - 1];
    }
    if !(d[n - 1] > 0.0) {
        return Err(Error::Contract(format!("non-positive pivot {} at last row", d[n - 1])));
    }
    let mut x = vec![0.0; n];
    x[n - 1] = b[n - 1] / d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (b[i] - off[i] * x[i + 1]) / d[i];
    }
    Ok(x)
}

/// Strip average of the forcing at a station x: the mean of f(x, .) over
/// the strip cross-section, by Gauss quadrature with `n_quad_y` points.
fn strip_average(
    spec: &ThinDomainSpec,
    eps: f64,
    x: f64,
    n_quad_y: usize,
    f: &impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let depth = spec.strip_depth(x, eps);
    if !(depth > 0.0) {
        return Err(Error::InvalidSpec(format!("strip depth vanishes at x = {x}")));
    }
    let top = eps * spec.k2(x, eps);
    let rule = gauss_rule(n_quad_y);
    let mut acc = 0.0;
    for &(t, w) in rule {
        let y = top - 0.5 * depth + 0.5 * depth * t;
        acc += w * f(x, y);
    }
    Ok(0.5 * acc)
}

/// The transformed concentrated forcing fhat(x) = eps^gamma H(x) <f>(x) / K(x),
/// where <f> is the strip average. Singular only through the explicit
/// eps^gamma factor; see `reduced_load` for the cancellation-free product.
pub fn compute_fhat(
    spec: &ThinDomainSpec,
    eps: f64,
    grid: &Grid1D,
    n_quad_y: usize,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Field1D> {
    check_eps(eps)?;
    let scale = eps.powf(spec.strip.gamma);
    let mut values = Vec::with_capacity(grid.n_nodes());
    for &x in grid.nodes() {
        let avg = strip_average(spec, eps, x, n_quad_y, &f)?;
        let k = spec.thickness(x, eps);
        values.push(scale * spec.strip_height(x, eps) * avg / k);
    }
    Field1D::new(grid.clone(), values)
}

/// The rescaled load eps^(-gamma) fhat = H(x) <f>(x) / K(x). All eps powers
/// cancel algebraically, so this is evaluated without forming either the
/// large factor or the small one.
pub fn reduced_load(
    spec: &ThinDomainSpec,
    eps: f64,
    x: f64,
    n_quad_y: usize,
    f: &impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let avg = strip_average(spec, eps, x, n_quad_y, f)?;
    Ok(spec.strip_height(x, eps) * avg / spec.thickness(x, eps))
}

/// Solves the reduced problem -(1/K)(K w')' + w = eps^(-gamma) fhat on the
/// given grid. Testing against K phi turns the equation into
/// K w' phi' + K w phi = K eps^(-gamma) fhat phi, and the weighted load
/// K * eps^(-gamma) fhat is exactly H(x) <f>(x): every power of eps and
/// every division by K cancels before anything is evaluated.
pub fn solve_reduced(
    spec: &ThinDomainSpec,
    eps: f64,
    grid: &Grid1D,
    n_quad_y: usize,
    f: impl Fn(f64, f64) -> f64,
) -> Result<Solution1D> {
    check_eps(eps)?;
    spec.validate_at(eps)?;
    solve_1d(
        grid,
        |x| spec.thickness(x, eps),
        |x| spec.thickness(x, eps),
        |x| match strip_average(spec, eps, x, n_quad_y, &f) {
            Ok(avg) => spec.strip_height(x, eps) * avg,
            Err(_) => f64::NAN,
        },
    )
}

/// Solves the limit problem -q w'' + w = fhat with the homogenized data.
pub fn solve_limit(coeffs: &HomogenizedCoefficients, grid: &Grid1D) -> Result<Solution1D> {
    let q = coeffs.q;
    let fhat = coeffs.fhat.clone();
    solve_1d(grid, |_| q, |_| 1.0, |x| fhat.eval(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm1D {
    L2,
    H1,
}

/// Norm of the nodal difference u - v, exact for the P1 difference. When
/// the grids differ, v is sampled at u's nodes.
pub fn error_1d(u: &Field1D, v: &Field1D, kind: Norm1D) -> f64 {
    let nodes = u.grid.nodes();
    let same_grid = u.grid.n_nodes() == v.grid.n_nodes()
        && nodes
            .iter()
            .zip(v.grid.nodes())
            .all(|(a, b)| a == b);
    let diff: Vec<f64> = if same_grid {
        u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect()
    } else {
        nodes
            .iter()
            .zip(&u.values)
            .map(|(&x, &uv)| uv - v.eval(x))
            .collect()
    };
    norm_of_nodal(nodes, &diff, kind)
}

pub fn norm_1d(u: &Field1D, kind: Norm1D) -> f64 {
    norm_of_nodal(u.grid.nodes(), &u.values, kind)
}

fn norm_of_nodal(nodes: &[f64], values: &[f64], kind: Norm1D) -> f64 {
    let mut sq = 0.0;
    for e in 0..(nodes.len() - 1) {
        let h = nodes[e + 1] - nodes[e];
        let a = values[e];
        let b = values[e + 1];
        // exact integral of the linear interpolant squared
        sq += h * (a * a + a * b + b * b) / 3.0;
        if kind == Norm1D::H1 {
            let d = (b - a) / h;
            sq += h * d * d;
        }
    }
    sq.sqrt()
}

/// L2 distance between a P1 field and a smooth closed form, by 5-point
/// Gauss quadrature per element.
pub fn error_vs_function(u: &Field1D, v: impl Fn(f64) -> f64) -> f64 {
    let nodes = u.grid.nodes();
    let mut sq = 0.0;
    for e in 0..(nodes.len() - 1) {
        let xl = nodes[e];
        let xr = nodes[e + 1];
        let h = xr - xl;
        for &(t, w) in &GAUSS_5 {
            let xg = 0.5 * (xl + xr) + 0.5 * h * t;
            let phi_r = 0.5 * (1.0 + t);
            let ug = u.values[e] * (1.0 - phi_r) + u.values[e + 1] * phi_r;
            let d = ug - v(xg);
            sq += 0.5 * h * w * d * d;
        }
    }
    sq.sqrt()
}
