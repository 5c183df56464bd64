//! Experiment runner: TOML configuration, the mesh-resolution policy, and
//! the end-to-end pipelines (single 2D solves, the 1D reduced and limit
//! problems, eps sweeps, the verification chain, the means table) with
//! deterministic CSV and JSON reports.
//!
//! Reports are byte-reproducible: all summation orders are fixed, no
//! randomness is involved, and wall-clock timings go to the JSON summaries
//! only, never into CSV.

use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem1d::{
    error_1d, norm_1d, solve_limit, solve_reduced, Field1D, Grid1D, Norm1D, Solution1D,
};
use crate::fem2d::{
    diff_with_1d, norm, raster, slice_extract, solve, LoadRegion, NormKind, Solution2D, Variant,
    weighted_norm,
};
use crate::geometry::{ScaledProfile, StripSpec, ThinDomainSpec};
use crate::meshgen::{
    export_mesh, generate_mesh, quality_report, shift_to_ra, MeshDomain, MeshParams, TriMesh,
};
use crate::numeric::{gauss_panel, loglog_slope, pairwise_sum_by, GAUSS_8};
use crate::qmean::{homogenized_coefficients, HomogenizedCoefficients, PMethod};
use crate::trig::{SinTerm, TrigPoly};

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// One trigonometric profile: constant + sum of a sin(w s + p) terms,
/// evaluated at the stretched variable s = x / eps^scale_exponent.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub constant: f64,
    /// [amplitude, frequency, phase] triples.
    pub components: Vec<[f64; 3]>,
    pub scale_exponent: f64,
}

impl ProfileConfig {
    fn poly(&self) -> Result<TrigPoly> {
        let terms = self
            .components
            .iter()
            .map(|&[amplitude, frequency, phase]| SinTerm { amplitude, frequency, phase })
            .collect();
        TrigPoly::new(self.constant, terms)
    }

    fn profile(&self) -> Result<ScaledProfile> {
        ScaledProfile::new(self.poly()?, self.scale_exponent)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub interval: [f64; 2],
    pub lower: ProfileConfig,
    pub upper: ProfileConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StripConfig {
    pub gamma: f64,
    pub height: ProfileConfig,
}

fn default_region() -> String {
    "strip".into()
}

/// Forcing f(x): a trig polynomial of the slow variable, applied either as
/// the concentrated strip term (scaled by eps^{-gamma}) or as a plain bulk
/// load.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub components: Vec<[f64; 3]>,
    #[serde(default = "default_region")]
    pub region: String,
}

impl ForcingConfig {
    fn poly(&self) -> Result<TrigPoly> {
        let terms = self
            .components
            .iter()
            .map(|&[amplitude, frequency, phase]| SinTerm { amplitude, frequency, phase })
            .collect();
        TrigPoly::new(self.constant, terms)
    }

    fn load_region(&self) -> Result<LoadRegion> {
        match self.region.as_str() {
            "strip" => Ok(LoadRegion::Strip),
            "bulk" => Ok(LoadRegion::Bulk),
            other => Err(Error::Config(format!(
                "forcing region must be \"strip\" or \"bulk\", got \"{other}\""
            ))),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Positive, strictly decreasing list.
    pub eps: Vec<f64>,
    /// Base table pipelines plus optional extras ("chain", "means").
    pub pipelines: Vec<String>,
    /// 2D horizontal resolution: cells per period of the fastest scaled
    /// oscillation among the walls, the strip height and the forcing.
    pub cells_per_wavelength: usize,
    /// Explicit column-count override; bypasses the policy when set.
    pub nx: Option<usize>,
    pub max_nx: usize,
    pub ny_bulk: usize,
    pub ny_strip: usize,
    pub grading: f64,
    /// Node count for the 1D limit and reduced grids (raised automatically
    /// when the oscillations need more).
    pub grid1d: usize,
    pub cells_per_wavelength_1d: usize,
    /// Gauss points for vertical strip averages.
    pub n_quad_y: usize,
    pub cg_tol: f64,
    /// Height of the exported horizontal slice.
    pub slice_y: f64,
    pub raster_nx: usize,
    pub raster_ny: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            eps: Vec::new(),
            pipelines: vec!["solve2d".into(), "reduced".into(), "limit".into()],
            cells_per_wavelength: 64,
            nx: None,
            max_nx: 20_000,
            ny_bulk: 10,
            ny_strip: 3,
            grading: 1.0,
            grid1d: 4096,
            cells_per_wavelength_1d: 32,
            n_quad_y: 4,
            cg_tol: 1.0e-11,
            slice_y: 0.0,
            raster_nx: 201,
            raster_ny: 41,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub domain: DomainConfig,
    pub strip: StripConfig,
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub study: StudyConfig,
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Config> {
        let config: Config =
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path)?;
        Config::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        self.forcing.poly()?;
        self.forcing.load_region()?;
        for pair in self.study.eps.windows(2) {
            if !(pair[0] > pair[1]) {
                return Err(Error::Config(format!(
                    "eps list must be strictly decreasing, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(&last) = self.study.eps.last() {
            if !(last > 0.0) {
                return Err(Error::Config(format!("eps values must be positive, got {last}")));
            }
        }
        for name in &self.study.pipelines {
            match name.as_str() {
                "solve2d" | "reduced" | "limit" | "chain" | "means" => {}
                other => {
                    return Err(Error::Config(format!("unknown pipeline \"{other}\"")));
                }
            }
        }
        if let Some(nx) = self.study.nx {
            if nx < 8 {
                return Err(Error::Config(format!("nx override must be at least 8, got {nx}")));
            }
        }
        if self.study.n_quad_y == 0 || self.study.grid1d < 2 {
            return Err(Error::Config("n_quad_y must be >= 1 and grid1d >= 2".into()));
        }
        if !(self.study.cg_tol > 0.0) || self.study.cg_tol >= 1.0 {
            return Err(Error::Config(format!("cg_tol out of range: {}", self.study.cg_tol)));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ThinDomainSpec> {
        let [a, b] = self.domain.interval;
        ThinDomainSpec::new(
            (a, b),
            self.domain.lower.profile()?,
            self.domain.upper.profile()?,
            StripSpec::new(self.strip.gamma, self.strip.height.profile()?)?,
        )
    }

    pub fn forcing_poly(&self) -> Result<TrigPoly> {
        self.forcing.poly()
    }

    fn eps_list(&self) -> Result<&[f64]> {
        if self.study.eps.is_empty() {
            return Err(Error::Config("no eps values configured".into()));
        }
        Ok(&self.study.eps)
    }
}

// ---------------------------------------------------------------------------
// resolution policy
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Resolution {
    pub nx: usize,
    pub ny_bulk: usize,
    pub ny_strip: usize,
    pub grading: f64,
    pub n1d: usize,
}

/// Fastest oscillation frequency present in the problem at this eps.
fn max_frequency(spec: &ThinDomainSpec, forcing: &TrigPoly, eps: f64) -> f64 {
    let mut f_max = forcing.max_frequency().unwrap_or(0.0);
    for profile in [&spec.lower, &spec.upper, &spec.strip.height] {
        if let Some(w) = profile.max_frequency_at(eps) {
            f_max = f_max.max(w);
        }
    }
    f_max
}

/// Default resolutions: enough columns to put `cells_per_wavelength` cells
/// under the fastest oscillation, and a 1D grid that is at least as fine as
/// `grid1d` and also resolves the oscillating coefficients.
pub fn resolution(
    spec: &ThinDomainSpec,
    forcing: &TrigPoly,
    eps: f64,
    study: &StudyConfig,
) -> Resolution {
    let (a, b) = spec.interval;
    let len = b - a;
    let f_max = max_frequency(spec, forcing, eps);
    let nx = match study.nx {
        Some(n) => n,
        None => {
            let needed = (len * study.cells_per_wavelength as f64 * f_max
                / std::f64::consts::TAU)
                .ceil() as usize;
            needed.clamp(64, study.max_nx)
        }
    };
    let needed_1d = (len * study.cells_per_wavelength_1d as f64 * f_max
        / std::f64::consts::TAU)
        .ceil() as usize
        + 1;
    Resolution {
        nx,
        ny_bulk: study.ny_bulk,
        ny_strip: study.ny_strip,
        grading: study.grading,
        n1d: study.grid1d.max(needed_1d),
    }
}

fn mesh_params(res: &Resolution) -> MeshParams {
    MeshParams {
        nx: res.nx,
        ny_bulk: res.ny_bulk,
        ny_strip: res.ny_strip,
        grading: res.grading,
    }
}

// ---------------------------------------------------------------------------
// report writers
// ---------------------------------------------------------------------------

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("JSON serialization failed: {e}")))?;
    write_text(path, &(text + "\n"))
}

fn write_field_csv(path: &Path, mesh: &TriMesh, values: &[f64]) -> Result<()> {
    let mut text = String::from("x,y,value\n");
    for (v, &u) in mesh.vertices.iter().zip(values) {
        text.push_str(&format!("{},{},{}\n", fmt(v[0]), fmt(v[1]), fmt(u)));
    }
    write_text(path, &text)
}

fn write_profile_csv(path: &Path, field: &Field1D) -> Result<()> {
    let mut text = String::from("x,value\n");
    for (&x, &v) in field.grid().nodes().iter().zip(field.values()) {
        text.push_str(&format!("{},{}\n", fmt(x), fmt(v)));
    }
    write_text(path, &text)
}

fn write_mesh_file(path: &Path, mesh: &TriMesh) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buffer = Vec::new();
    export_mesh(mesh, &mut buffer)?;
    let mut file = fs::File::create(path)?;
    file.write_all(&buffer)?;
    Ok(())
}

fn eps_dir(out: &Path, eps: f64) -> std::path::PathBuf {
    out.join(format!("eps_{eps}"))
}

// ---------------------------------------------------------------------------
// single 2D solve
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct Solve2dReport {
    pub eps: f64,
    pub nx: usize,
    pub ny_bulk: usize,
    pub ny_strip: usize,
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub iterations: usize,
    pub relative_residual: f64,
    pub energy_residual: f64,
    pub l2: f64,
    pub h1: f64,
    pub l2_rescaled: f64,
    pub h1_rescaled: f64,
    pub wall_ms: u64,
}

struct PhysicalRun {
    mesh: TriMesh,
    solution: Solution2D,
    resolution: Resolution,
}

fn solve_physical(config: &Config, eps: f64) -> Result<PhysicalRun> {
    let spec = config.spec()?;
    let forcing = config.forcing_poly()?;
    let region = config.forcing.load_region()?;
    let res = resolution(&spec, &forcing, eps, &config.study);
    let mesh = generate_mesh(&spec, eps, &mesh_params(&res), MeshDomain::Physical)?;
    let f = move |x: f64, _: f64| forcing.eval(x);
    let solution = solve(&mesh, Variant::Physical, &spec, eps, &f, region, config.study.cg_tol)?;
    Ok(PhysicalRun { mesh, solution, resolution: res })
}

/// Solves the physical problem at one eps; with an output directory, also
/// exports the mesh, the nodal field, a horizontal slice and a raster.
pub fn run_solve2d(config: &Config, eps: f64, out: Option<&Path>) -> Result<Solve2dReport> {
    let start = Instant::now();
    let run = solve_physical(config, eps)?;
    let l2 = norm(&run.mesh, &run.solution.values, NormKind::L2)?;
    let h1 = norm(&run.mesh, &run.solution.values, NormKind::H1)?;
    let rescale = eps.powf(-0.5);
    let report = Solve2dReport {
        eps,
        nx: run.resolution.nx,
        ny_bulk: run.resolution.ny_bulk,
        ny_strip: run.resolution.ny_strip,
        n_vertices: run.mesh.n_vertices(),
        n_triangles: run.mesh.n_triangles(),
        iterations: run.solution.iterations,
        relative_residual: run.solution.relative_residual,
        energy_residual: run.solution.energy_residual,
        l2,
        h1,
        l2_rescaled: rescale * l2,
        h1_rescaled: rescale * h1,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    if let Some(out) = out {
        let dir = eps_dir(out, eps);
        write_mesh_file(&dir.join("mesh.txt"), &run.mesh)?;
        write_field_csv(&dir.join("field.csv"), &run.mesh, &run.solution.values)?;
        match slice_extract(
            &run.mesh,
            &run.solution.values,
            config.study.slice_y,
            (run.resolution.nx + 1).min(2048),
        ) {
            Ok(slice) => write_profile_csv(&dir.join("slice.csv"), &slice)?,
            Err(Error::SliceOutsideDomain { .. }) => {}
            Err(e) => return Err(e),
        }
        let r = raster(
            &run.mesh,
            &run.solution.values,
            config.study.raster_nx,
            config.study.raster_ny,
        )?;
        let mut text = String::from("x,y,value\n");
        for jy in 0..r.ny {
            let y = r.y0 + (r.y1 - r.y0) * jy as f64 / (r.ny - 1) as f64;
            for jx in 0..r.nx {
                let x = r.x0 + (r.x1 - r.x0) * jx as f64 / (r.nx - 1) as f64;
                text.push_str(&format!("{},{},{}\n", fmt(x), fmt(y), fmt(r.values[jy * r.nx + jx])));
            }
        }
        write_text(&dir.join("raster.csv"), &text)?;
        write_json(&dir.join("solve2d.json"), &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// 1D runners
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct OneDReport {
    pub label: String,
    pub eps: Option<f64>,
    pub n_nodes: usize,
    pub energy_residual: f64,
    pub l2: f64,
    pub h1: f64,
    /// Limit diffusion coefficient (limit runs only).
    pub q: Option<f64>,
}

fn one_d_report(label: &str, eps: Option<f64>, sol: &Solution1D, q: Option<f64>) -> OneDReport {
    OneDReport {
        label: label.into(),
        eps,
        n_nodes: sol.field.grid().n_nodes(),
        energy_residual: sol.energy_residual,
        l2: norm_1d(&sol.field, Norm1D::L2),
        h1: norm_1d(&sol.field, Norm1D::H1),
        q,
    }
}

fn reduced_solution(config: &Config, eps: f64) -> Result<Solution1D> {
    let spec = config.spec()?;
    let forcing = config.forcing_poly()?;
    let res = resolution(&spec, &forcing, eps, &config.study);
    let (a, b) = spec.interval;
    let grid = Grid1D::uniform(a, b, res.n1d)?;
    let f = move |x: f64, _: f64| forcing.eval(x);
    solve_reduced(&spec, eps, &grid, config.study.n_quad_y, f)
}

/// Solves the 1D reduced problem (oscillating coefficients at this eps).
pub fn run_reduced(config: &Config, eps: f64, out: Option<&Path>) -> Result<OneDReport> {
    let solution = reduced_solution(config, eps)?;
    let report = one_d_report("reduced", Some(eps), &solution, None);
    if let Some(out) = out {
        let dir = eps_dir(out, eps);
        write_profile_csv(&dir.join("reduced.csv"), &solution.field)?;
        write_json(&dir.join("reduced.json"), &report)?;
    }
    Ok(report)
}

fn limit_solution(config: &Config) -> Result<(HomogenizedCoefficients, Solution1D)> {
    let spec = config.spec()?;
    let forcing = config.forcing_poly()?;
    let coeffs = homogenized_coefficients(&spec, &forcing)?;
    let smallest = config.study.eps.last().copied().unwrap_or(1.0);
    let res = resolution(&spec, &forcing, smallest, &config.study);
    let (a, b) = spec.interval;
    let grid = Grid1D::uniform(a, b, res.n1d)?;
    let solution = solve_limit(&coeffs, &grid)?;
    Ok((coeffs, solution))
}

/// Solves the eps-independent limit problem.
pub fn run_limit(config: &Config, out: Option<&Path>) -> Result<OneDReport> {
    let (coeffs, solution) = limit_solution(config)?;
    let report = one_d_report("limit", None, &solution, Some(coeffs.q));
    if let Some(out) = out {
        write_profile_csv(&out.join("limit.csv"), &solution.field)?;
        write_json(&out.join("limit.json"), &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// eps sweep study
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub eps: f64,
    pub nx: usize,
    pub n_vertices: usize,
    pub iterations: usize,
    pub relative_residual: f64,
    pub energy_residual: f64,
    /// Rescaled L2 distance between the 2D solution and the limit profile.
    pub err_limit_l2_rescaled: f64,
    pub err_limit_h1_rescaled: f64,
    /// L2(I) distance between the reduced and limit profiles.
    pub reduced_vs_limit_l2: f64,
    pub reduced_energy_residual: f64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyFailure {
    pub eps: f64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyReport {
    pub version: String,
    pub q: f64,
    pub mu_k: f64,
    pub mu_h: f64,
    pub p: f64,
    /// Least-squares log-log slope of the rescaled L2 error against eps.
    pub slope_l2_rescaled: f64,
    pub rows: Vec<StudyRow>,
    pub failures: Vec<StudyFailure>,
}

/// Solves the physical, reduced and limit problems for every configured
/// eps and assembles the error table. Per-eps failures are recorded and the
/// sweep continues.
pub fn run_study(config: &Config, out: Option<&Path>) -> Result<StudyReport> {
    let eps_list = config.eps_list()?.to_vec();
    let (coeffs, limit) = limit_solution(config)?;
    if let Some(out) = out {
        write_profile_csv(&out.join("limit.csv"), &limit.field)?;
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &eps in &eps_list {
        let start = Instant::now();
        let outcome = (|| -> Result<StudyRow> {
            let run = solve_physical(config, eps)?;
            let reduced = reduced_solution(config, eps)?;
            let rescale = eps.powf(-0.5);
            let diff = diff_with_1d(&run.mesh, &run.solution.values, &limit.field)?;
            let err_l2 = rescale * norm(&run.mesh, &diff, NormKind::L2)?;
            let err_h1 = rescale * norm(&run.mesh, &diff, NormKind::H1)?;
            let red_vs_lim = error_1d(&reduced.field, &limit.field, Norm1D::L2);
            if let Some(out) = out {
                let dir = eps_dir(out, eps);
                write_mesh_file(&dir.join("mesh.txt"), &run.mesh)?;
                write_field_csv(&dir.join("field.csv"), &run.mesh, &run.solution.values)?;
                write_profile_csv(&dir.join("reduced.csv"), &reduced.field)?;
                match slice_extract(
                    &run.mesh,
                    &run.solution.values,
                    config.study.slice_y,
                    (run.resolution.nx + 1).min(2048),
                ) {
                    Ok(slice) => write_profile_csv(&dir.join("slice.csv"), &slice)?,
                    Err(Error::SliceOutsideDomain { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(StudyRow {
                eps,
                nx: run.resolution.nx,
                n_vertices: run.mesh.n_vertices(),
                iterations: run.solution.iterations,
                relative_residual: run.solution.relative_residual,
                energy_residual: run.solution.energy_residual,
                err_limit_l2_rescaled: err_l2,
                err_limit_h1_rescaled: err_h1,
                reduced_vs_limit_l2: red_vs_lim,
                reduced_energy_residual: reduced.energy_residual,
                wall_ms: start.elapsed().as_millis() as u64,
            })
        })();
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(StudyFailure { eps, message: e.to_string() }),
        }
    }

    let eps_ok: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let err_ok: Vec<f64> = rows.iter().map(|r| r.err_limit_l2_rescaled).collect();
    let report = StudyReport {
        version: env!("CARGO_PKG_VERSION").into(),
        q: coeffs.q,
        mu_k: coeffs.mu_k,
        mu_h: coeffs.mu_h,
        p: coeffs.p,
        slope_l2_rescaled: loglog_slope(&eps_ok, &err_ok),
        rows,
        failures,
    };

    if let Some(out) = out {
        let mut csv = String::from(
            "eps,nx,n_vertices,iterations,energy_residual,err_limit_l2_rescaled,\
             err_limit_h1_rescaled,reduced_vs_limit_l2\n",
        );
        for r in &report.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt(r.eps),
                r.nx,
                r.n_vertices,
                r.iterations,
                fmt(r.energy_residual),
                fmt(r.err_limit_l2_rescaled),
                fmt(r.err_limit_h1_rescaled),
                fmt(r.reduced_vs_limit_l2),
            ));
        }
        write_text(&out.join("study.csv"), &csv)?;
        write_json(&out.join("study.json"), &report)?;
    }

    for name in &config.study.pipelines {
        match name.as_str() {
            "chain" => {
                run_chain(config, out)?;
            }
            "means" => {
                run_means(config, out)?;
            }
            _ => {}
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// verification chain
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ChainRow {
    pub eps: f64,
    pub nx: usize,
    /// Rescaled H1 gap between the physical solution (composed with the
    /// shift) and the flat-bottom solution.
    pub gap_shift: f64,
    /// Anisotropic rectangle-norm gap between the full-tensor and
    /// simplified rectangle solutions.
    pub gap_simplify: f64,
    /// Anisotropic rectangle-norm gap between the simplified rectangle
    /// solution and the 1D reduced profile.
    pub gap_average: f64,
    /// Rescaled H1 distance between the physical solution and the reduced
    /// profile, the end-to-end reduction error.
    pub end_to_end: f64,
    /// Largest deviation of det(J L) from 1 over the columns.
    pub det_jl_dev: f64,
    /// Largest mismatch between shifted-mesh heights (normalised by the
    /// local thickness) and rectangle-mesh heights; a lattice-consistency
    /// diagnostic.
    pub lattice_alignment: f64,
    pub max_energy_residual: f64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub version: String,
    pub rows: Vec<ChainRow>,
    pub failures: Vec<StudyFailure>,
    pub slope_end_to_end: f64,
}

/// Runs the four-problem verification chain at every configured eps: the
/// physical solve, the flat-bottom solve, the two rectangle solves and the
/// 1D reduced solve, with the gap norms between consecutive stages.
pub fn run_chain(config: &Config, out: Option<&Path>) -> Result<ChainReport> {
    let eps_list = config.eps_list()?.to_vec();
    let spec = config.spec()?;
    let forcing = config.forcing_poly()?;
    let region = config.forcing.load_region()?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &eps in &eps_list {
        let start = Instant::now();
        let outcome = (|| -> Result<ChainRow> {
            let res = resolution(&spec, &forcing, eps, &config.study);
            let params = mesh_params(&res);
            let mesh_phys = generate_mesh(&spec, eps, &params, MeshDomain::Physical)?;
            let mesh_ra = shift_to_ra(&mesh_phys, &spec, eps)?;
            let mesh_q = generate_mesh(&spec, eps, &params, MeshDomain::RectangleQ)?;

            let mut alignment = 0.0_f64;
            for (ra_v, q_v) in mesh_ra.vertices.iter().zip(&mesh_q.vertices) {
                let k = spec.thickness(ra_v[0], eps);
                alignment = alignment.max((ra_v[1] / (eps * k) - q_v[1]).abs());
            }
            let mut det_jl_dev = 0.0_f64;
            for i in 0..=res.nx {
                let x = mesh_phys.column_x(i).unwrap();
                let j = spec.jacobian_l(x, eps);
                det_jl_dev = det_jl_dev.max((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs());
            }

            let fp = forcing.clone();
            let f = move |x: f64, _: f64| fp.eval(x);
            let tol = config.study.cg_tol;
            let w = solve(&mesh_phys, Variant::Physical, &spec, eps, &f, region, tol)?;
            let v = solve(&mesh_ra, Variant::ShiftedRa, &spec, eps, &f, region, tol)?;
            let u = solve(&mesh_q, Variant::QFullB, &spec, eps, &f, region, tol)?;
            let w1 = solve(&mesh_q, Variant::QSimplified, &spec, eps, &f, region, tol)?;
            let reduced = reduced_solution(config, eps)?;

            let rescale = eps.powf(-0.5);
            let wy = eps.powi(-2);
            let d_shift: Vec<f64> =
                w.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
            let gap_shift = rescale * norm(&mesh_ra, &d_shift, NormKind::H1)?;
            let d_simpl: Vec<f64> =
                u.values.iter().zip(&w1.values).map(|(a, b)| a - b).collect();
            let gap_simplify = weighted_norm(&mesh_q, &d_simpl, 1.0, wy, 1.0)?;
            let d_avg = diff_with_1d(&mesh_q, &w1.values, &reduced.field)?;
            let gap_average = weighted_norm(&mesh_q, &d_avg, 1.0, wy, 1.0)?;
            let d_end = diff_with_1d(&mesh_phys, &w.values, &reduced.field)?;
            let end_to_end = rescale * norm(&mesh_phys, &d_end, NormKind::H1)?;

            let max_energy_residual = w
                .energy_residual
                .max(v.energy_residual)
                .max(u.energy_residual)
                .max(w1.energy_residual)
                .max(reduced.energy_residual);

            Ok(ChainRow {
                eps,
                nx: res.nx,
                gap_shift,
                gap_simplify,
                gap_average,
                end_to_end,
                det_jl_dev,
                lattice_alignment: alignment,
                max_energy_residual,
                wall_ms: start.elapsed().as_millis() as u64,
            })
        })();
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(StudyFailure { eps, message: e.to_string() }),
        }
    }

    let eps_ok: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let end_ok: Vec<f64> = rows.iter().map(|r| r.end_to_end).collect();
    let report = ChainReport {
        version: env!("CARGO_PKG_VERSION").into(),
        rows,
        failures,
        slope_end_to_end: loglog_slope(&eps_ok, &end_ok),
    };

    if let Some(out) = out {
        let mut csv = String::from(
            "eps,nx,gap_shift,gap_simplify,gap_average,end_to_end,det_jl_dev,lattice_alignment\n",
        );
        for r in &report.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt(r.eps),
                r.nx,
                fmt(r.gap_shift),
                fmt(r.gap_simplify),
                fmt(r.gap_average),
                fmt(r.end_to_end),
                fmt(r.det_jl_dev),
                fmt(r.lattice_alignment),
            ));
        }
        write_text(&out.join("chain.csv"), &csv)?;
        write_json(&out.join("chain.json"), &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// means table
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct MeansReport {
    pub k1_mean: f64,
    pub k2_mean: f64,
    pub mu_k: f64,
    pub mu_h: f64,
    pub p: f64,
    pub q: f64,
    pub p_method: String,
    pub p_torus: Option<f64>,
    pub p_long: Option<f64>,
    /// |p_torus - p_long| when both routes are available.
    pub torus_long_dev: Option<f64>,
    /// p * mu_k, which the mean inequality bounds below by 1.
    pub jensen_product: f64,
}

/// Computes the homogenized means table with cross-method deviations.
pub fn run_means(config: &Config, out: Option<&Path>) -> Result<MeansReport> {
    let spec = config.spec()?;
    let forcing = config.forcing_poly()?;
    let coeffs = homogenized_coefficients(&spec, &forcing)?;
    let p_method = match coeffs.p_method {
        PMethod::ConstantExact => "exact".to_string(),
        PMethod::Torus { dim, n_per_axis } => format!("torus(dim={dim},n={n_per_axis})"),
        PMethod::LongInterval { t_max } => format!("long_interval(T={t_max})"),
    };
    let torus_long_dev = match (coeffs.p_torus, coeffs.p_long) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    let report = MeansReport {
        k1_mean: coeffs.k1_mean,
        k2_mean: coeffs.k2_mean,
        mu_k: coeffs.mu_k,
        mu_h: coeffs.mu_h,
        p: coeffs.p,
        q: coeffs.q,
        p_method,
        p_torus: coeffs.p_torus,
        p_long: coeffs.p_long,
        torus_long_dev,
        jensen_product: coeffs.p * coeffs.mu_k,
    };
    if let Some(out) = out {
        let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
        let csv = format!(
            "k1_mean,k2_mean,mu_k,mu_h,p,q,p_method,p_torus,p_long,torus_long_dev,jensen_product\n\
             {},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(report.k1_mean),
            fmt(report.k2_mean),
            fmt(report.mu_k),
            fmt(report.mu_h),
            fmt(report.p),
            fmt(report.q),
            report.p_method,
            opt(report.p_torus),
            opt(report.p_long),
            opt(report.torus_long_dev),
            fmt(report.jensen_product),
        );
        write_text(&out.join("means.csv"), &csv)?;
        write_json(&out.join("means.json"), &report)?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// mesh inspection
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct MeshReport {
    pub eps: f64,
    pub domain: String,
    pub nx: usize,
    pub ny_bulk: usize,
    pub ny_strip: usize,
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub n_strip_triangles: usize,
    pub min_angle_deg: f64,
    pub max_aspect: f64,
    pub min_area: f64,
    pub total_area: f64,
    pub strip_area: f64,
    pub expected_total_area: f64,
    pub expected_strip_area: f64,
    pub total_area_rel_dev: f64,
    pub strip_area_rel_dev: f64,
}

/// Integrates a smooth 1D function with Gauss panels no wider than half the
/// shortest oscillation period.
fn integrate_resolved(
    a: f64,
    b: f64,
    max_freq: f64,
    f: impl Fn(f64) -> f64,
) -> f64 {
    let period = if max_freq > 0.0 {
        std::f64::consts::TAU / max_freq
    } else {
        b - a
    };
    let n_panels = ((2.0 * (b - a) / period).ceil() as usize).max(4);
    let dx = (b - a) / n_panels as f64;
    pairwise_sum_by(n_panels, &|i| {
        let lo = a + dx * i as f64;
        gauss_panel(lo, lo + dx, &GAUSS_8, &f)
    })
}

pub fn parse_domain(name: &str) -> Result<MeshDomain> {
    match name {
        "physical" => Ok(MeshDomain::Physical),
        "shifted" => Ok(MeshDomain::ShiftedRa),
        "rectangle" => Ok(MeshDomain::RectangleQ),
        other => Err(Error::Config(format!(
            "unknown mesh domain \"{other}\" (expected physical, shifted or rectangle)"
        ))),
    }
}

/// Generates a mesh at the default resolution, writes it out and compares
/// measured areas against the exact domain and strip areas.
pub fn run_mesh(
    config: &Config,
    eps: f64,
    domain: MeshDomain,
    out: Option<&Path>,
) -> Result<MeshReport> {
    let spec = config.spec()?;
    let forcing = config.forcing_poly()?;
    let res = resolution(&spec, &forcing, eps, &config.study);
    let params = mesh_params(&res);
    let mesh = match domain {
        MeshDomain::ShiftedRa => {
            let physical = generate_mesh(&spec, eps, &params, MeshDomain::Physical)?;
            shift_to_ra(&physical, &spec, eps)?
        }
        other => generate_mesh(&spec, eps, &params, other)?,
    };
    let quality = quality_report(&mesh);
    let (a, b) = spec.interval;
    let f_max = max_frequency(&spec, &forcing, eps);
    let (expected_total, expected_strip) = match domain {
        MeshDomain::Physical | MeshDomain::ShiftedRa => (
            eps * integrate_resolved(a, b, f_max, |x| spec.thickness(x, eps)),
            eps.powf(1.0 + spec.strip.gamma)
                * integrate_resolved(a, b, f_max, |x| spec.strip_height(x, eps)),
        ),
        MeshDomain::RectangleQ => (
            b - a,
            eps.powf(spec.strip.gamma)
                * integrate_resolved(a, b, f_max, |x| {
                    spec.strip_height(x, eps) / spec.thickness(x, eps)
                }),
        ),
    };
    let report = MeshReport {
        eps,
        domain: format!("{domain:?}"),
        nx: res.nx,
        ny_bulk: res.ny_bulk,
        ny_strip: res.ny_strip,
        n_vertices: quality.n_vertices,
        n_triangles: quality.n_triangles,
        n_strip_triangles: quality.n_strip_triangles,
        min_angle_deg: quality.min_angle_deg,
        max_aspect: quality.max_aspect,
        min_area: quality.min_area,
        total_area: quality.total_area,
        strip_area: quality.strip_area,
        expected_total_area: expected_total,
        expected_strip_area: expected_strip,
        total_area_rel_dev: (quality.total_area - expected_total).abs() / expected_total,
        strip_area_rel_dev: (quality.strip_area - expected_strip).abs() / expected_strip,
    };
    if let Some(out) = out {
        let dir = eps_dir(out, eps);
        write_mesh_file(&dir.join("mesh.txt"), &mesh)?;
        write_json(&dir.join("mesh.json"), &report)?;
    }
    Ok(report)
}
