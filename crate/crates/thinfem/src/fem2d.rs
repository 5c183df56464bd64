//! P1 Galerkin solver for the concentrated-forcing Neumann problem in its
//! four formulations:
//!
//! * `Physical`: -Delta w + w = eps^(-gamma) chi f on the thin domain;
//! * `ShiftedRa`: the same equation posed on the flat-bottom domain (the
//!   two solutions differ by a boundary-oscillation term, which is exactly
//!   what the composition gap in the chain study measures);
//! * `QFullB`: the transplant of the shifted problem onto the unit-height
//!   rectangle, with tensor [[K, -yK'], [-yK', y^2 K'^2 / K + 1/(eps^2 K)]]
//!   and mass weight K;
//! * `QSimplified`: the rectangle problem with the off-diagonal advection
//!   dropped, tensor diag(K, 1/(eps^2 K)).
//!
//! Load closures always receive physical coordinates; each variant maps
//! its quadrature points back through the flattening before evaluating.
//! The overall factor eps that the rectangle change of variables puts in
//! front of both sides is cancelled before assembly.

use crate::error::{Error, Result};
use crate::fem1d::{Field1D, Grid1D};
use crate::geometry::{check_eps, ThinDomainSpec};
use crate::meshgen::{Lattice, MeshDomain, RegionTag, TriMesh};
use crate::numeric::pairwise_sum;
use crate::sparse::{solve_cg, CsrMatrix, SparseSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Physical,
    ShiftedRa,
    QFullB,
    QSimplified,
}

impl Variant {
    pub fn expected_domain(self) -> MeshDomain {
        match self {
            Variant::Physical => MeshDomain::Physical,
            Variant::ShiftedRa => MeshDomain::ShiftedRa,
            Variant::QFullB | Variant::QSimplified => MeshDomain::RectangleQ,
        }
    }

    /// Symmetric diffusion tensor (a11, a12, a22) at a point of this
    /// formulation's domain.
    pub fn tensor(self, spec: &ThinDomainSpec, eps: f64, x: f64, y: f64) -> [f64; 3] {
        match self {
            Variant::Physical | Variant::ShiftedRa => [1.0, 0.0, 1.0],
            Variant::QFullB => {
                let k = spec.thickness(x, eps);
                let kp = spec.thickness_deriv(x, eps);
                [k, -y * kp, y * y * kp * kp / k + 1.0 / (eps * eps * k)]
            }
            Variant::QSimplified => {
                let k = spec.thickness(x, eps);
                [k, 0.0, 1.0 / (eps * eps * k)]
            }
        }
    }

    /// Weight of the reaction and load terms.
    fn mass_weight(self, spec: &ThinDomainSpec, eps: f64, x: f64) -> f64 {
        match self {
            Variant::Physical | Variant::ShiftedRa => 1.0,
            Variant::QFullB | Variant::QSimplified => spec.thickness(x, eps),
        }
    }

    /// Physical image of a quadrature point of this variant's mesh.
    fn physical_point(self, spec: &ThinDomainSpec, eps: f64, x: f64, y: f64) -> (f64, f64) {
        match self {
            Variant::Physical => (x, y),
            Variant::ShiftedRa => (x, y - eps * spec.k1(x, eps)),
            Variant::QFullB | Variant::QSimplified => {
                (x, eps * (spec.thickness(x, eps) * y - spec.k1(x, eps)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadRegion {
    /// Concentrated forcing: strip cells only, scaled by eps^(-gamma).
    Strip,
    /// Distributed forcing over the whole domain, no scaling.
    Bulk,
}

/// Mid-edge quadrature: barycentric points and P1 shape values, exact for
/// quadratic integrands.
const MID_EDGE: [([f64; 3], [f64; 3]); 3] = [
    ([0.5, 0.5, 0.0], [0.5, 0.5, 0.0]),
    ([0.0, 0.5, 0.5], [0.0, 0.5, 0.5]),
    ([0.5, 0.0, 0.5], [0.5, 0.0, 0.5]),
];

/// Assembles the stiffness-plus-mass system and the load vector for one of
/// the problem formulations.
pub fn assemble(
    mesh: &TriMesh,
    variant: Variant,
    spec: &ThinDomainSpec,
    eps: f64,
    f: &dyn Fn(f64, f64) -> f64,
    region: LoadRegion,
) -> Result<SparseSystem> {
    check_eps(eps)?;
    if mesh.domain != variant.expected_domain() {
        return Err(Error::Contract(format!(
            "{variant:?} expects a {:?} mesh, got {:?}",
            variant.expected_domain(),
            mesh.domain
        )));
    }
    let n = mesh.n_vertices();
    if n == 0 || mesh.n_triangles() == 0 {
        return Err(Error::Contract("empty mesh".into()));
    }

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for tri in &mesh.triangles {
        for &i in tri {
            for &j in tri {
                adjacency[i].push(j);
            }
        }
    }
    for row in &mut adjacency {
        row.sort_unstable();
        row.dedup();
    }
    let mut matrix = CsrMatrix::from_pattern(&adjacency)?;
    let mut rhs = vec![0.0; n];

    let strip_scale = eps.powf(-spec.strip.gamma);

    for k in 0..mesh.n_triangles() {
        let [i0, i1, i2] = mesh.triangles[k];
        let p = [mesh.vertices[i0], mesh.vertices[i1], mesh.vertices[i2]];
        let area = mesh.triangle_area(k);
        if !(area > 0.0) {
            return Err(Error::Mesh(format!("triangle {k} has non-positive area")));
        }
        let inv2a = 1.0 / (2.0 * area);
        // constant P1 gradients: grad phi_i = (b_i, c_i)
        let b = [
            (p[1][1] - p[2][1]) * inv2a,
            (p[2][1] - p[0][1]) * inv2a,
            (p[0][1] - p[1][1]) * inv2a,
        ];
        let c = [
            (p[2][0] - p[1][0]) * inv2a,
            (p[0][0] - p[2][0]) * inv2a,
            (p[1][0] - p[0][0]) * inv2a,
        ];

        let in_load = match region {
            LoadRegion::Strip => mesh.tags[k] == RegionTag::Strip,
            LoadRegion::Bulk => true,
        };
        let load_scale = match region {
            LoadRegion::Strip => strip_scale,
            LoadRegion::Bulk => 1.0,
        };

        let idx = [i0, i1, i2];
        let w = area / 3.0;
        let mut local = [[0.0_f64; 3]; 3];
        let mut local_rhs = [0.0_f64; 3];
        for (bary, shape) in &MID_EDGE {
            let x = bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0];
            let y = bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1];
            let [a11, a12, a22] = variant.tensor(spec, eps, x, y);
            if !(a11 > 0.0) || !(a22 > 0.0) {
                return Err(Error::NonPositiveCoefficient { x, value: a11.min(a22) });
            }
            let rho = variant.mass_weight(spec, eps, x);
            for i in 0..3 {
                for j in 0..=i {
                    let stiff = a11 * b[i] * b[j]
                        + a12 * (b[i] * c[j] + c[i] * b[j])
                        + a22 * c[i] * c[j];
                    let mass = rho * shape[i] * shape[j];
                    local[i][j] += w * (stiff + mass);
                }
            }
            if in_load {
                let (px, py) = variant.physical_point(spec, eps, x, y);
                let fv = f(px, py);
                if !fv.is_finite() {
                    return Err(Error::NonFinite { context: "assemble load", at: px });
                }
                for i in 0..3 {
                    local_rhs[i] += w * load_scale * rho * fv * shape[i];
                }
            }
        }
        for i in 0..3 {
            for j in 0..=i {
                matrix.add(idx[i], idx[j], local[i][j]);
                if i != j {
                    matrix.add(idx[j], idx[i], local[i][j]);
                }
            }
            rhs[idx[i]] += local_rhs[i];
        }
    }

    Ok(SparseSystem { matrix, rhs })
}

#[derive(Clone, Debug)]
pub struct Solution2D {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub energy_residual: f64,
}

/// Assembles and solves one formulation with Jacobi-preconditioned CG.
pub fn solve(
    mesh: &TriMesh,
    variant: Variant,
    spec: &ThinDomainSpec,
    eps: f64,
    f: &dyn Fn(f64, f64) -> f64,
    region: LoadRegion,
    rel_tol: f64,
) -> Result<Solution2D> {
    let system = assemble(mesh, variant, spec, eps, f, region)?;
    let max_iter = 400 + 40 * (mesh.n_vertices() as f64).sqrt() as usize * 10;
    let cg = solve_cg(&system, rel_tol, max_iter.max(20_000))?;
    Ok(Solution2D {
        values: cg.solution,
        iterations: cg.iterations,
        relative_residual: cg.relative_residual,
        energy_residual: cg.energy_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L2,
    H1,
    /// L2 norm of the y derivative alone.
    SemiDy,
}

fn check_field(mesh: &TriMesh, values: &[f64]) -> Result<()> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::Contract(format!(
            "{} values for {} vertices",
            values.len(),
            mesh.n_vertices()
        )));
    }
    Ok(())
}

/// Norm of a P1 field, exact for piecewise-linear integrands, optionally
/// restricted to one region.
pub fn norm_region(
    mesh: &TriMesh,
    values: &[f64],
    kind: NormKind,
    region: Option<RegionTag>,
) -> Result<f64> {
    check_field(mesh, values)?;
    let (wx, wy, w0) = match kind {
        NormKind::L2 => (0.0, 0.0, 1.0),
        NormKind::H1 => (1.0, 1.0, 1.0),
        NormKind::SemiDy => (0.0, 1.0, 0.0),
    };
    weighted_norm_region(mesh, values, wx, wy, w0, region)
}

pub fn norm(mesh: &TriMesh, values: &[f64], kind: NormKind) -> Result<f64> {
    norm_region(mesh, values, kind, None)
}

/// sqrt(wx ||d_x u||^2 + wy ||d_y u||^2 + w0 ||u||^2), the building block
/// for the anisotropic rectangle norms.
pub fn weighted_norm(
    mesh: &TriMesh,
    values: &[f64],
    wx: f64,
    wy: f64,
    w0: f64,
) -> Result<f64> {
    check_field(mesh, values)?;
    weighted_norm_region(mesh, values, wx, wy, w0, None)
}

fn weighted_norm_region(
    mesh: &TriMesh,
    values: &[f64],
    wx: f64,
    wy: f64,
    w0: f64,
    region: Option<RegionTag>,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(mesh.n_triangles());
    for k in 0..mesh.n_triangles() {
        if let Some(tag) = region {
            if mesh.tags[k] != tag {
                continue;
            }
        }
        let [i0, i1, i2] = mesh.triangles[k];
        let p = [mesh.vertices[i0], mesh.vertices[i1], mesh.vertices[i2]];
        let v = [values[i0], values[i1], values[i2]];
        let area = mesh.triangle_area(k);
        let mut cell = 0.0;
        if w0 != 0.0 {
            let s = v[0] + v[1] + v[2];
            let sq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            cell += w0 * area / 12.0 * (s * s + sq);
        }
        if wx != 0.0 || wy != 0.0 {
            let inv2a = 1.0 / (2.0 * area);
            let gx = (v[0] * (p[1][1] - p[2][1])
                + v[1] * (p[2][1] - p[0][1])
                + v[2] * (p[0][1] - p[1][1]))
                * inv2a;
            let gy = (v[0] * (p[2][0] - p[1][0])
                + v[1] * (p[0][0] - p[2][0])
                + v[2] * (p[1][0] - p[0][0]))
                * inv2a;
            cell += area * (wx * gx * gx + wy * gy * gy);
        }
        terms.push(cell);
    }
    Ok(pairwise_sum(&terms).sqrt())
}

/// Degree-5 triangle quadrature (7 points), used when comparing a discrete
/// field against a smooth closed form.
const DEG5: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([0.059715871789770, 0.470142064105115, 0.470142064105115], 0.132394152788506),
    ([0.470142064105115, 0.059715871789770, 0.470142064105115], 0.132394152788506),
    ([0.470142064105115, 0.470142064105115, 0.059715871789770], 0.132394152788506),
    ([0.797426985353087, 0.101286507323456, 0.101286507323456], 0.125939180544827),
    ([0.101286507323456, 0.797426985353087, 0.101286507323456], 0.125939180544827),
    ([0.101286507323456, 0.101286507323456, 0.797426985353087], 0.125939180544827),
];

/// L2 distance between a P1 field and a smooth function of the mesh
/// coordinates.
pub fn error_vs_function(
    mesh: &TriMesh,
    values: &[f64],
    g: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    check_field(mesh, values)?;
    let mut terms = Vec::with_capacity(mesh.n_triangles());
    for k in 0..mesh.n_triangles() {
        let [i0, i1, i2] = mesh.triangles[k];
        let p = [mesh.vertices[i0], mesh.vertices[i1], mesh.vertices[i2]];
        let v = [values[i0], values[i1], values[i2]];
        let area = mesh.triangle_area(k);
        let mut cell = 0.0;
        for (bary, w) in &DEG5 {
            let x = bary[0] * p[0][0] + bary[1] * p[1][0] + bary[2] * p[2][0];
            let y = bary[0] * p[0][1] + bary[1] * p[1][1] + bary[2] * p[2][1];
            let uh = bary[0] * v[0] + bary[1] * v[1] + bary[2] * v[2];
            let d = uh - g(x, y);
            cell += w * d * d;
        }
        terms.push(area * cell);
    }
    Ok(pairwise_sum(&terms).sqrt())
}

/// Nodal difference between a 2D field and a 1D profile evaluated at the
/// vertex x coordinates.
pub fn diff_with_1d(mesh: &TriMesh, values: &[f64], profile: &Field1D) -> Result<Vec<f64>> {
    check_field(mesh, values)?;
    Ok(mesh
        .vertices
        .iter()
        .zip(values)
        .map(|(v, &u)| u - profile.eval(v[0]))
        .collect())
}

fn barycentric(p: &[[f64; 2]; 3], x: f64, y: f64) -> [f64; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
        - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l1 = ((p[1][0] - x) * (p[2][1] - y) - (p[2][0] - x) * (p[1][1] - y)) / det;
    let l2 = ((p[2][0] - x) * (p[0][1] - y) - (p[0][0] - x) * (p[2][1] - y)) / det;
    [l1, l2, 1.0 - l1 - l2]
}

/// Locates a point in a lattice mesh and returns the interpolated value.
fn sample_lattice(mesh: &TriMesh, lat: &Lattice, values: &[f64], x: f64, y: f64) -> Option<f64> {
    let nlev = lat.n_levels;
    let a = mesh.vertices[0][0];
    let b = mesh.vertices[lat.nx * nlev][0];
    let span = b - a;
    if x < a - 1e-12 * span || x > b + 1e-12 * span {
        return None;
    }
    let xc = x.clamp(a, b);
    let i = (((xc - a) / span * lat.nx as f64).floor() as usize).min(lat.nx - 1);
    let xl = mesh.vertices[i * nlev][0];
    let xr = mesh.vertices[(i + 1) * nlev][0];
    let frac = ((xc - xl) / (xr - xl)).clamp(0.0, 1.0);
    let edge = |j: usize| -> f64 {
        let yl = mesh.vertices[i * nlev + j][1];
        let yr = mesh.vertices[(i + 1) * nlev + j][1];
        yl + (yr - yl) * frac
    };
    let height = edge(nlev - 1) - edge(0);
    let tol = 1e-10 * (1.0 + height.abs());
    if y < edge(0) - tol || y > edge(nlev - 1) + tol {
        return None;
    }
    let mut j = nlev - 2;
    for jj in 0..(nlev - 1) {
        if y <= edge(jj + 1) {
            j = jj;
            break;
        }
    }
    let t_base = (i * (nlev - 1) + j) * 2;
    let mut best: Option<(f64, f64)> = None;
    for k in [t_base, t_base + 1] {
        let [i0, i1, i2] = mesh.triangles[k];
        let p = [mesh.vertices[i0], mesh.vertices[i1], mesh.vertices[i2]];
        let bc = barycentric(&p, xc, y);
        let worst = bc[0].min(bc[1]).min(bc[2]);
        let val = bc[0] * values[i0] + bc[1] * values[i1] + bc[2] * values[i2];
        match best {
            Some((w, _)) if w >= worst => {}
            _ => best = Some((worst, val)),
        }
    }
    let (worst, val) = best?;
    if worst < -1e-9 {
        return None;
    }
    Some(val)
}

/// Horizontal slice of a lattice field: n_samples uniform stations across
/// the interval at height y. Fails if the line leaves the domain.
pub fn slice_extract(
    mesh: &TriMesh,
    values: &[f64],
    y: f64,
    n_samples: usize,
) -> Result<Field1D> {
    check_field(mesh, values)?;
    let lat = mesh
        .lattice
        .ok_or_else(|| Error::Contract("slice extraction needs a lattice mesh".into()))?;
    if n_samples < 2 {
        return Err(Error::Contract("need at least 2 slice samples".into()));
    }
    let a = mesh.vertices[0][0];
    let b = mesh.vertices[lat.nx * lat.n_levels][0];
    let mut xs = Vec::with_capacity(n_samples);
    let mut vals = Vec::with_capacity(n_samples);
    let mut fail: Option<(f64, f64)> = None;
    for s in 0..n_samples {
        let x = if s == n_samples - 1 {
            b
        } else {
            a + (b - a) * s as f64 / (n_samples - 1) as f64
        };
        match sample_lattice(mesh, &lat, values, x, y) {
            Some(v) => {
                xs.push(x);
                vals.push(v);
            }
            None => {
                fail = Some(match fail {
                    None => (x, x),
                    Some((lo, _)) => (lo, x),
                });
            }
        }
    }
    if let Some((x_min, x_max)) = fail {
        return Err(Error::SliceOutsideDomain { y, x_min, x_max });
    }
    Field1D::new(Grid1D::from_nodes(xs)?, vals)
}

/// Uniform raster of a lattice field over its bounding box; cells outside
/// the domain are NaN.
#[derive(Clone, Debug)]
pub struct Raster {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, y varying slowest, NaN marks points outside the domain.
    pub values: Vec<f64>,
}

pub fn raster(mesh: &TriMesh, values: &[f64], nx: usize, ny: usize) -> Result<Raster> {
    check_field(mesh, values)?;
    let lat = mesh
        .lattice
        .ok_or_else(|| Error::Contract("rasterisation needs a lattice mesh".into()))?;
    if nx < 2 || ny < 2 {
        return Err(Error::Contract("raster needs at least 2x2 samples".into()));
    }
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for v in &mesh.vertices {
        x0 = x0.min(v[0]);
        x1 = x1.max(v[0]);
        y0 = y0.min(v[1]);
        y1 = y1.max(v[1]);
    }
    let mut grid = Vec::with_capacity(nx * ny);
    for jy in 0..ny {
        let y = y0 + (y1 - y0) * jy as f64 / (ny - 1) as f64;
        for jx in 0..nx {
            let x = x0 + (x1 - x0) * jx as f64 / (nx - 1) as f64;
            grid.push(sample_lattice(mesh, &lat, values, x, y).unwrap_or(f64::NAN));
        }
    }
    Ok(Raster { x0, x1, y0, y1, nx, ny, values: grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ScaledProfile, StripSpec};
    use crate::meshgen::{generate_mesh, MeshParams};
    use crate::trig::{SinTerm, TrigPoly};
    use std::f64::consts::PI;

    fn term(a: f64, w: f64) -> SinTerm {
        SinTerm { amplitude: a, frequency: w, phase: 0.0 }
    }

    /// Constant-thickness domain (0,1) x (-1/2, 1/2) at eps = 1.
    fn square_spec() -> ThinDomainSpec {
        ThinDomainSpec::new(
            (0.0, 1.0),
            ScaledProfile::constant(0.5),
            ScaledProfile::constant(0.5),
            StripSpec::new(1.0, ScaledProfile::constant(0.1)).unwrap(),
        )
        .unwrap()
    }

    fn bench_spec() -> ThinDomainSpec {
        let wall_lo = TrigPoly::new(8.0, vec![term(-1.0, 1.0), term(-1.0, PI / 8.0)]).unwrap();
        let wall_up = TrigPoly::new(8.0, vec![term(1.0, 1.0), term(1.0, PI / 8.0)]).unwrap();
        let height = ScaledProfile::new(
            TrigPoly::new(2.0, vec![term(1.0, 1.0)]).unwrap(),
            1.0 / 3.0,
        )
        .unwrap();
        ThinDomainSpec::new(
            (0.0, 20.0),
            ScaledProfile::new(wall_lo, 0.2).unwrap(),
            ScaledProfile::new(wall_up, 0.2).unwrap(),
            StripSpec::new(1.0 / 18.0, height).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn deg5_rule_integrates_quintics() {
        // reference triangle (0,0)-(1,0)-(0,1): int x^a y^b = a! b! / (a+b+2)!
        let cases = [
            ((4, 0), 1.0 / 30.0),
            ((5, 0), 1.0 / 42.0),
            ((2, 2), 1.0 / 180.0),
            ((3, 2), 2.0 / 840.0),
            ((0, 0), 0.5),
        ];
        for ((a, b), exact) in cases {
            let mut acc = 0.0;
            for (bary, w) in &DEG5 {
                let x = bary[1];
                let y = bary[2];
                acc += w * x.powi(a) * y.powi(b);
            }
            acc *= 0.5;
            assert!(
                (acc - exact).abs() < 1e-15,
                "x^{a} y^{b}: {acc} vs {exact}"
            );
        }
    }

    #[test]
    fn manufactured_solution_converges_quadratically() {
        // w = cos(pi x) cos(pi (y + 1/2)) solves -Delta w + w = (1 + 2 pi^2) w
        // on the unit square with natural boundary conditions on all sides.
        let spec = square_spec();
        let exact = |x: f64, y: f64| (PI * x).cos() * (PI * (y + 0.5)).cos();
        let f = move |x: f64, y: f64| (1.0 + 2.0 * PI * PI) * exact(x, y);
        let mut errors = Vec::new();
        for n in [8usize, 16, 32] {
            let params = MeshParams { nx: n, ny_bulk: n, ny_strip: 2, grading: 1.0 };
            let mesh = generate_mesh(&spec, 1.0, &params, MeshDomain::Physical).unwrap();
            let sol = solve(&mesh, Variant::Physical, &spec, 1.0, &f, LoadRegion::Bulk, 1e-11)
                .unwrap();
            assert!(sol.energy_residual < 1e-9, "energy {}", sol.energy_residual);
            errors.push(error_vs_function(&mesh, &sol.values, &exact).unwrap());
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((3.2..=4.8).contains(&ratio), "ratio {ratio} in {errors:?}");
        }
    }

    #[test]
    fn full_tensor_determinant_identity() {
        let spec = bench_spec();
        for &eps in &[0.1_f64, 0.05] {
            for i in 0..200 {
                let x = 20.0 * i as f64 / 199.0;
                let y = (i as f64 * 0.005) % 1.0;
                let [a11, a12, a22] = Variant::QFullB.tensor(&spec, eps, x, y);
                let det = a11 * a22 - a12 * a12;
                let rel = (det * eps * eps - 1.0).abs();
                assert!(rel < 1e-12, "x={x}, det*eps^2 - 1 = {rel:.3e}");
            }
        }
    }

    #[test]
    fn rectangle_variants_match_when_thickness_is_constant() {
        // On the benchmark the thickness is exactly constant, so the full
        // tensor has no off-diagonal part and both rectangle systems are
        // identical.
        let spec = bench_spec();
        let eps = 0.1;
        let params = MeshParams { nx: 60, ny_bulk: 5, ny_strip: 2, grading: 1.0 };
        let mesh = generate_mesh(&spec, eps, &params, MeshDomain::RectangleQ).unwrap();
        let f = |x: f64, _: f64| 1.0 + x.sin();
        let full = assemble(&mesh, Variant::QFullB, &spec, eps, &f, LoadRegion::Strip).unwrap();
        let simp = assemble(&mesh, Variant::QSimplified, &spec, eps, &f, LoadRegion::Strip)
            .unwrap();
        assert_eq!(full.rhs, simp.rhs);
        let u_full = solve_cg(&full, 1e-11, 50_000).unwrap();
        let u_simp = solve_cg(&simp, 1e-11, 50_000).unwrap();
        for (a, b) in u_full.solution.iter().zip(&u_simp.solution) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn variant_mesh_contract_is_enforced() {
        let spec = square_spec();
        let params = MeshParams { nx: 4, ny_bulk: 2, ny_strip: 1, grading: 1.0 };
        let mesh = generate_mesh(&spec, 1.0, &params, MeshDomain::Physical).unwrap();
        let f = |_: f64, _: f64| 1.0;
        assert!(assemble(&mesh, Variant::QFullB, &spec, 1.0, &f, LoadRegion::Bulk).is_err());
        let qmesh = generate_mesh(&spec, 1.0, &params, MeshDomain::RectangleQ).unwrap();
        assert!(assemble(&qmesh, Variant::Physical, &spec, 1.0, &f, LoadRegion::Bulk).is_err());
    }

    #[test]
    fn norms_of_simple_fields() {
        let spec = square_spec();
        let params = MeshParams { nx: 16, ny_bulk: 16, ny_strip: 2, grading: 1.0 };
        let mesh = generate_mesh(&spec, 1.0, &params, MeshDomain::Physical).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        assert!((norm(&mesh, &ones, NormKind::L2).unwrap() - 1.0).abs() < 1e-12);
        assert!(norm(&mesh, &ones, NormKind::SemiDy).unwrap() < 1e-12);
        let linear: Vec<f64> = mesh.vertices.iter().map(|v| 2.0 * v[1]).collect();
        assert!((norm(&mesh, &linear, NormKind::SemiDy).unwrap() - 2.0).abs() < 1e-12);
        let h1 = norm(&mesh, &linear, NormKind::H1).unwrap();
        // ||2y||^2 = 4 * int y^2 = 1/3 over the unit square centred at 0
        assert!((h1 * h1 - (4.0 + 1.0 / 3.0)).abs() < 1e-10);
        let weighted = weighted_norm(&mesh, &linear, 0.0, 0.25, 0.0).unwrap();
        assert!((weighted - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slice_and_raster_interpolate_linear_fields_exactly() {
        let spec = bench_spec();
        let eps = 0.1;
        let params = MeshParams { nx: 40, ny_bulk: 4, ny_strip: 2, grading: 1.0 };
        let mesh = generate_mesh(&spec, eps, &params, MeshDomain::Physical).unwrap();
        let field: Vec<f64> = mesh.vertices.iter().map(|v| 3.0 * v[0] + 7.0 * v[1]).collect();
        let slice = slice_extract(&mesh, &field, 0.0, 33).unwrap();
        for (&x, &v) in slice.grid().nodes().iter().zip(slice.values()) {
            assert!((v - 3.0 * x).abs() < 1e-10, "x={x}: {v}");
        }
        // y = 0 lies inside everywhere; far above the top it must fail
        assert!(slice_extract(&mesh, &field, 10.0, 9).is_err());
        let r = raster(&mesh, &field, 21, 9).unwrap();
        assert_eq!(r.values.len(), 21 * 9);
        let mut inside = 0;
        for jy in 0..9 {
            for jx in 0..21 {
                let v = r.values[jy * 21 + jx];
                if v.is_finite() {
                    let x = r.x0 + (r.x1 - r.x0) * jx as f64 / 20.0;
                    let y = r.y0 + (r.y1 - r.y0) * jy as f64 / 8.0;
                    assert!((v - (3.0 * x + 7.0 * y)).abs() < 1e-9);
                    inside += 1;
                }
            }
        }
        assert!(inside > 50, "only {inside} raster points landed inside");
    }

    #[test]
    fn diff_with_profile_subtracts_nodally() {
        let spec = square_spec();
        let params = MeshParams { nx: 4, ny_bulk: 2, ny_strip: 1, grading: 1.0 };
        let mesh = generate_mesh(&spec, 1.0, &params, MeshDomain::Physical).unwrap();
        let field: Vec<f64> = mesh.vertices.iter().map(|v| v[0] + 1.0).collect();
        let grid = crate::fem1d::Grid1D::uniform(0.0, 1.0, 5).unwrap();
        let profile = Field1D::from_fn(grid, |x| x);
        let diff = diff_with_1d(&mesh, &field, &profile).unwrap();
        for &d in &diff {
            assert!((d - 1.0).abs() < 1e-14);
        }
    }
}
