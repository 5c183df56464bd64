//! Strip-aligned triangulations of the thin domain and its flattened images.
//!
//! Meshes are built column by column on a shared lattice: the same x
//! stations and the same per-column level structure are used for the
//! physical domain, its shifted image (flat lower wall) and the unit-height
//! rectangle. Vertex `i * n_levels + j` is level j of column i, columns
//! have exactly vertical sides, and the strip face is an exact mesh line.
//! Because corresponding vertices of the three meshes are related by the
//! flattening maps exactly, fields can be compared across formulations
//! without interpolation.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{check_eps, ThinDomainSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshDomain {
    /// The physical thin domain, lower wall at -eps k1.
    Physical,
    /// The shifted domain with flat lower wall at 0.
    ShiftedRa,
    /// The unit-height rectangle.
    RectangleQ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionTag {
    Bulk,
    Strip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug)]
pub struct MeshParams {
    /// Number of columns.
    pub nx: usize,
    /// Cells below the strip face in each column.
    pub ny_bulk: usize,
    /// Cells inside the strip in each column.
    pub ny_strip: usize,
    /// Bulk grading exponent; 1 is uniform, larger values cluster levels
    /// toward the strip face.
    pub grading: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        MeshParams { nx: 256, ny_bulk: 10, ny_strip: 3, grading: 1.0 }
    }
}

/// Structured description of a generated mesh: vertex `i * n_levels + j`
/// is level j of column i, and levels at or above `strip_level` bound the
/// strip cells.
#[derive(Clone, Copy, Debug)]
pub struct Lattice {
    pub nx: usize,
    pub n_levels: usize,
    pub strip_level: usize,
}

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<RegionTag>,
    pub boundary_edges: Vec<([usize; 2], Side)>,
    pub domain: MeshDomain,
    /// Present on generated meshes; imported meshes carry no lattice.
    pub lattice: Option<Lattice>,
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, k: usize) -> f64 {
        let [a, b, c] = self.triangles[k];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    /// x coordinate of column i (lattice meshes only).
    pub fn column_x(&self, i: usize) -> Option<f64> {
        let lat = self.lattice?;
        if i > lat.nx {
            return None;
        }
        Some(self.vertices[i * lat.n_levels][0])
    }
}

fn graded(u: f64, p: f64) -> f64 {
    1.0 - (1.0 - u).powf(p)
}

fn check_params(params: &MeshParams) -> Result<()> {
    if params.nx == 0 || params.ny_bulk == 0 || params.ny_strip == 0 {
        return Err(Error::Mesh("mesh resolutions must all be at least 1".into()));
    }
    if !(params.grading >= 1.0) || !params.grading.is_finite() {
        return Err(Error::Mesh(format!(
            "grading exponent must be >= 1, got {}",
            params.grading
        )));
    }
    let n_levels = params.ny_bulk + params.ny_strip + 1;
    if (params.nx + 1).saturating_mul(n_levels) > 30_000_000 {
        return Err(Error::Mesh(format!(
            "mesh too large: {} columns x {} levels",
            params.nx + 1,
            n_levels
        )));
    }
    Ok(())
}

/// Builds the column mesh for the physical domain or the unit-height
/// rectangle. The strip occupies the top `ny_strip` cells of every column;
/// its lower face is an exact mesh line in both variants.
pub fn generate_mesh(
    spec: &ThinDomainSpec,
    eps: f64,
    params: &MeshParams,
    domain: MeshDomain,
) -> Result<TriMesh> {
    check_params(params)?;
    check_eps(eps)?;
    if domain == MeshDomain::ShiftedRa {
        return Err(Error::Mesh(
            "generate the physical mesh and apply shift_to_ra instead".into(),
        ));
    }
    spec.validate_at(eps)?;

    let (a, b) = spec.interval;
    let nx = params.nx;
    let nyb = params.ny_bulk;
    let nys = params.ny_strip;
    let n_levels = nyb + nys + 1;
    let gamma = spec.strip.gamma;

    let mut vertices = Vec::with_capacity((nx + 1) * n_levels);
    for i in 0..=nx {
        let x = if i == nx { b } else { a + (b - a) * i as f64 / nx as f64 };
        let (bot, top, depth) = match domain {
            MeshDomain::Physical => (
                -eps * spec.k1(x, eps),
                eps * spec.k2(x, eps),
                spec.strip_depth(x, eps),
            ),
            MeshDomain::RectangleQ => {
                let k = spec.thickness(x, eps);
                (0.0, 1.0, eps.powf(gamma) * spec.strip_height(x, eps) / k)
            }
            MeshDomain::ShiftedRa => unreachable!(),
        };
        if !(depth > 0.0) {
            return Err(Error::Mesh(format!("strip depth vanishes at x = {x}")));
        }
        let face = top - depth;
        if !(face > bot) {
            return Err(Error::Mesh(format!("strip reaches the lower wall at x = {x}")));
        }
        let mut prev = f64::NEG_INFINITY;
        for j in 0..n_levels {
            let y = if j == 0 {
                bot
            } else if j < nyb {
                bot + (face - bot) * graded(j as f64 / nyb as f64, params.grading)
            } else if j == nyb {
                face
            } else if j < n_levels - 1 {
                face + depth * (j - nyb) as f64 / nys as f64
            } else {
                top
            };
            if !(y > prev) || !y.is_finite() {
                return Err(Error::Mesh(format!(
                    "levels are not strictly increasing at x = {x} (level {j})"
                )));
            }
            prev = y;
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * nx * (n_levels - 1));
    let mut tags = Vec::with_capacity(triangles.capacity());
    for i in 0..nx {
        for j in 0..(n_levels - 1) {
            let v00 = i * n_levels + j;
            let v01 = v00 + 1;
            let v10 = v00 + n_levels;
            let v11 = v10 + 1;
            let tag = if j >= nyb { RegionTag::Strip } else { RegionTag::Bulk };
            triangles.push([v00, v10, v11]);
            tags.push(tag);
            triangles.push([v00, v11, v01]);
            tags.push(tag);
        }
    }

    let mut boundary_edges = Vec::with_capacity(2 * nx + 2 * (n_levels - 1));
    for i in 0..nx {
        boundary_edges.push(([i * n_levels, (i + 1) * n_levels], Side::Bottom));
    }
    for j in 0..(n_levels - 1) {
        boundary_edges.push(([nx * n_levels + j, nx * n_levels + j + 1], Side::Right));
    }
    for i in (0..nx).rev() {
        boundary_edges.push((
            [(i + 1) * n_levels + n_levels - 1, i * n_levels + n_levels - 1],
            Side::Top,
        ));
    }
    for j in (0..(n_levels - 1)).rev() {
        boundary_edges.push(([j + 1, j], Side::Left));
    }

    let mesh = TriMesh {
        vertices,
        triangles,
        tags,
        boundary_edges,
        domain,
        lattice: Some(Lattice { nx, n_levels, strip_level: nyb }),
    };
    for k in 0..mesh.n_triangles() {
        if !(mesh.triangle_area(k) > 0.0) {
            return Err(Error::Mesh(format!("degenerate triangle {k}")));
        }
    }
    Ok(mesh)
}

/// Shifts a physical mesh column-wise by eps * k1(x_i), producing the mesh
/// of the flat-bottom domain. Vertex numbering, triangles and tags are
/// unchanged, so fields transport between the two meshes by index.
pub fn shift_to_ra(mesh: &TriMesh, spec: &ThinDomainSpec, eps: f64) -> Result<TriMesh> {
    check_eps(eps)?;
    if mesh.domain != MeshDomain::Physical {
        return Err(Error::Contract("shift_to_ra expects a physical mesh".into()));
    }
    let lat = mesh
        .lattice
        .ok_or_else(|| Error::Contract("shift_to_ra needs a lattice mesh".into()))?;
    let mut shifted = mesh.clone();
    for i in 0..=lat.nx {
        let x = mesh.vertices[i * lat.n_levels][0];
        let shift = eps * spec.k1(x, eps);
        for j in 0..lat.n_levels {
            shifted.vertices[i * lat.n_levels + j][1] += shift;
        }
    }
    shifted.domain = MeshDomain::ShiftedRa;
    Ok(shifted)
}

#[derive(Clone, Copy, Debug)]
pub struct QualityReport {
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub n_strip_triangles: usize,
    pub min_angle_deg: f64,
    /// Longest edge over shortest edge, worst triangle.
    pub max_aspect: f64,
    pub min_area: f64,
    pub total_area: f64,
    pub strip_area: f64,
}

pub fn quality_report(mesh: &TriMesh) -> QualityReport {
    let mut min_angle = f64::INFINITY;
    let mut max_aspect = 0.0_f64;
    let mut min_area = f64::INFINITY;
    let mut total_terms = Vec::with_capacity(mesh.n_triangles());
    let mut strip_terms = Vec::with_capacity(mesh.n_triangles());
    let mut n_strip = 0;
    for k in 0..mesh.n_triangles() {
        let [a, b, c] = mesh.triangles[k];
        let pts = [mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]];
        let mut lens = [0.0_f64; 3];
        for e in 0..3 {
            let p = pts[(e + 1) % 3];
            let q = pts[(e + 2) % 3];
            lens[e] = (p[0] - q[0]).hypot(p[1] - q[1]);
        }
        let area = mesh.triangle_area(k);
        min_area = min_area.min(area);
        let longest = lens[0].max(lens[1]).max(lens[2]);
        let shortest = lens[0].min(lens[1]).min(lens[2]);
        if shortest > 0.0 {
            max_aspect = max_aspect.max(longest / shortest);
        }
        for v in 0..3 {
            // angle at vertex v is opposite edge v
            let l0 = lens[v];
            let l1 = lens[(v + 1) % 3];
            let l2 = lens[(v + 2) % 3];
            if l1 > 0.0 && l2 > 0.0 {
                let cos = ((l1 * l1 + l2 * l2 - l0 * l0) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
                min_angle = min_angle.min(cos.acos());
            }
        }
        total_terms.push(area);
        if mesh.tags[k] == RegionTag::Strip {
            strip_terms.push(area);
            n_strip += 1;
        }
    }
    QualityReport {
        n_vertices: mesh.n_vertices(),
        n_triangles: mesh.n_triangles(),
        n_strip_triangles: n_strip,
        min_angle_deg: min_angle.to_degrees(),
        max_aspect,
        min_area,
        total_area: crate::numeric::pairwise_sum(&total_terms),
        strip_area: crate::numeric::pairwise_sum(&strip_terms),
    }
}

/// Plain-text format: a `vertices N triangles M` header, N coordinate
/// lines, then M lines of three vertex indices and a region tag.
pub fn export_mesh(mesh: &TriMesh, w: &mut impl Write) -> Result<()> {
    writeln!(w, "vertices {} triangles {}", mesh.n_vertices(), mesh.n_triangles())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.16e} {:.16e}", v[0], v[1])?;
    }
    for (tri, tag) in mesh.triangles.iter().zip(&mesh.tags) {
        let tag = match tag {
            RegionTag::Bulk => "bulk",
            RegionTag::Strip => "strip",
        };
        writeln!(w, "{} {} {} {}", tri[0], tri[1], tri[2], tag)?;
    }
    Ok(())
}

/// Reads the `export_mesh` format. The caller declares which domain the
/// mesh discretises; imported meshes carry no lattice or boundary data.
pub fn import_mesh(r: &mut impl BufRead, domain: MeshDomain) -> Result<TriMesh> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Mesh("empty mesh file".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "vertices" || fields[2] != "triangles" {
        return Err(Error::Mesh(format!("bad mesh header: {header}")));
    }
    let n: usize = fields[1]
        .parse()
        .map_err(|_| Error::Mesh(format!("bad vertex count: {}", fields[1])))?;
    let m: usize = fields[3]
        .parse()
        .map_err(|_| Error::Mesh(format!("bad triangle count: {}", fields[3])))?;

    let mut vertices = Vec::with_capacity(n);
    for k in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Mesh(format!("missing vertex line {k}")))??;
        let mut it = line.split_whitespace();
        let x: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Mesh(format!("bad vertex line {k}: {line}")))?;
        let y: f64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Mesh(format!("bad vertex line {k}: {line}")))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Mesh(format!("non-finite vertex {k}")));
        }
        vertices.push([x, y]);
    }

    let mut triangles = Vec::with_capacity(m);
    let mut tags = Vec::with_capacity(m);
    for k in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Mesh(format!("missing triangle line {k}")))??;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Mesh(format!("bad triangle line {k}: {line}")));
        }
        let mut idx = [0usize; 3];
        for (slot, f) in idx.iter_mut().zip(&fields[..3]) {
            *slot = f
                .parse()
                .map_err(|_| Error::Mesh(format!("bad index on triangle line {k}: {line}")))?;
            if *slot >= n {
                return Err(Error::Mesh(format!("vertex index {slot} out of range on line {k}")));
            }
        }
        let tag = match fields[3] {
            "bulk" => RegionTag::Bulk,
            "strip" => RegionTag::Strip,
            other => return Err(Error::Mesh(format!("unknown region tag {other}"))),
        };
        triangles.push(idx);
        tags.push(tag);
    }

    let mesh = TriMesh {
        vertices,
        triangles,
        tags,
        boundary_edges: Vec::new(),
        domain,
        lattice: None,
    };
    for k in 0..mesh.n_triangles() {
        if !(mesh.triangle_area(k) > 0.0) {
            return Err(Error::Mesh(format!(
                "triangle {k} is degenerate or clockwise"
            )));
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ScaledProfile, StripSpec, ThinDomainSpec};
    use crate::trig::{SinTerm, TrigPoly};
    use std::f64::consts::PI;

    fn term(a: f64, w: f64) -> SinTerm {
        SinTerm { amplitude: a, frequency: w, phase: 0.0 }
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

    fn flat_spec(k: f64, h: f64, gamma: f64, interval: (f64, f64)) -> ThinDomainSpec {
        ThinDomainSpec::new(
            interval,
            ScaledProfile::constant(k / 2.0),
            ScaledProfile::constant(k / 2.0),
            StripSpec::new(gamma, ScaledProfile::constant(h)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn counts_and_lattice_layout() {
        let spec = bench_spec();
        let params = MeshParams { nx: 100, ny_bulk: 5, ny_strip: 2, grading: 1.5 };
        let mesh = generate_mesh(&spec, 0.1, &params, MeshDomain::Physical).unwrap();
        let lat = mesh.lattice.unwrap();
        assert_eq!(lat.n_levels, 8);
        assert_eq!(lat.strip_level, 5);
        assert_eq!(mesh.n_vertices(), 101 * 8);
        assert_eq!(mesh.n_triangles(), 100 * 7 * 2);
        let n_strip = mesh.tags.iter().filter(|&&t| t == RegionTag::Strip).count();
        assert_eq!(n_strip, 100 * 2 * 2);
        // all vertices of a column share the exact x station
        for i in 0..=100 {
            let x = mesh.column_x(i).unwrap();
            for j in 0..8 {
                assert_eq!(mesh.vertices[i * 8 + j][0], x);
            }
        }
        assert_eq!(mesh.column_x(0).unwrap(), 0.0);
        assert_eq!(mesh.column_x(100).unwrap(), 20.0);
    }

    #[test]
    fn areas_are_exact_for_constant_data() {
        // K = 2, H = 1, gamma = 1: area = eps*K*|I|, strip = eps^2*|I|.
        let spec = flat_spec(2.0, 1.0, 1.0, (0.0, 3.0));
        let eps = 0.5;
        let params = MeshParams { nx: 7, ny_bulk: 3, ny_strip: 2, grading: 2.0 };
        let mesh = generate_mesh(&spec, eps, &params, MeshDomain::Physical).unwrap();
        let q = quality_report(&mesh);
        assert!((q.total_area - eps * 2.0 * 3.0).abs() < 1e-13);
        assert!((q.strip_area - eps * eps * 3.0).abs() < 1e-13);
        assert!(q.min_area > 0.0);
    }

    #[test]
    fn unit_square_cells_have_45_degree_angles() {
        // eps = 1, gamma = 1/2, H = 1, K = 2: strip fraction 1/2, so with
        // one bulk and one strip cell the rectangle mesh is made of squares.
        let spec = flat_spec(2.0, 1.0, 0.5, (0.0, 1.0));
        let params = MeshParams { nx: 2, ny_bulk: 1, ny_strip: 1, grading: 1.0 };
        let mesh = generate_mesh(&spec, 1.0, &params, MeshDomain::RectangleQ).unwrap();
        let q = quality_report(&mesh);
        assert!((q.min_angle_deg - 45.0).abs() < 1e-12);
        assert!((q.max_aspect - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((q.total_area - 1.0).abs() < 1e-14);
        assert!((q.strip_area - 0.5).abs() < 1e-14);
    }

    #[test]
    fn strip_face_is_a_mesh_line() {
        let spec = bench_spec();
        let eps = 0.08;
        let params = MeshParams { nx: 50, ny_bulk: 4, ny_strip: 2, grading: 1.0 };
        let mesh = generate_mesh(&spec, eps, &params, MeshDomain::Physical).unwrap();
        let lat = mesh.lattice.unwrap();
        for i in 0..=lat.nx {
            let x = mesh.column_x(i).unwrap();
            let face = mesh.vertices[i * lat.n_levels + lat.strip_level][1];
            let expected = eps * spec.k2(x, eps) - spec.strip_depth(x, eps);
            assert!((face - expected).abs() < 1e-15 * (1.0 + expected.abs()));
            let top = mesh.vertices[i * lat.n_levels + lat.n_levels - 1][1];
            assert_eq!(top, eps * spec.k2(x, eps));
        }
    }

    #[test]
    fn shift_flattens_the_lower_wall() {
        let spec = bench_spec();
        let eps = 0.1;
        let params = MeshParams { nx: 40, ny_bulk: 4, ny_strip: 2, grading: 1.0 };
        let mesh = generate_mesh(&spec, eps, &params, MeshDomain::Physical).unwrap();
        let shifted = shift_to_ra(&mesh, &spec, eps).unwrap();
        assert_eq!(shifted.domain, MeshDomain::ShiftedRa);
        let lat = shifted.lattice.unwrap();
        for i in 0..=lat.nx {
            assert_eq!(shifted.vertices[i * lat.n_levels][1], 0.0);
            let x = shifted.column_x(i).unwrap();
            let top = shifted.vertices[i * lat.n_levels + lat.n_levels - 1][1];
            assert!((top - eps * spec.thickness(x, eps)).abs() < 1e-15);
        }
        assert_eq!(shifted.triangles, mesh.triangles);
        // shifting a rectangle mesh is a contract violation
        let qmesh = generate_mesh(&spec, eps, &params, MeshDomain::RectangleQ).unwrap();
        assert!(shift_to_ra(&qmesh, &spec, eps).is_err());
    }

    #[test]
    fn grading_clusters_toward_the_face() {
        let spec = flat_spec(2.0, 1.0, 1.0, (0.0, 1.0));
        let params = MeshParams { nx: 1, ny_bulk: 8, ny_strip: 1, grading: 2.5 };
        let mesh = generate_mesh(&spec, 0.25, &params, MeshDomain::Physical).unwrap();
        let lat = mesh.lattice.unwrap();
        let col: Vec<f64> = (0..lat.n_levels).map(|j| mesh.vertices[j][1]).collect();
        let first = col[1] - col[0];
        let last = col[lat.strip_level] - col[lat.strip_level - 1];
        assert!(last < first, "expected clustering toward the strip face");
    }

    #[test]
    fn export_import_roundtrip_is_bit_exact() {
        let spec = bench_spec();
        let params = MeshParams { nx: 12, ny_bulk: 3, ny_strip: 2, grading: 1.3 };
        let mesh = generate_mesh(&spec, 0.1, &params, MeshDomain::Physical).unwrap();
        let mut buf = Vec::new();
        export_mesh(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let back = import_mesh(&mut text.as_bytes(), MeshDomain::Physical).unwrap();
        assert_eq!(back.vertices, mesh.vertices);
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.tags, mesh.tags);
        let mut buf2 = Vec::new();
        export_mesh(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn import_rejects_malformed_input() {
        let bad_header = "points 3 cells 1\n";
        assert!(import_mesh(&mut bad_header.as_bytes(), MeshDomain::Physical).is_err());
        // clockwise triangle
        let cw = "vertices 3 triangles 1\n0 0\n1 0\n0 1\n0 2 1 bulk\n";
        assert!(import_mesh(&mut cw.as_bytes(), MeshDomain::Physical).is_err());
        // index out of range
        let oob = "vertices 3 triangles 1\n0 0\n1 0\n0 1\n0 1 7 bulk\n";
        assert!(import_mesh(&mut oob.as_bytes(), MeshDomain::Physical).is_err());
        let ok = "vertices 3 triangles 1\n0 0\n1 0\n0 1\n0 1 2 strip\n";
        let mesh = import_mesh(&mut ok.as_bytes(), MeshDomain::RectangleQ).unwrap();
        assert_eq!(mesh.tags[0], RegionTag::Strip);
        assert!(mesh.lattice.is_none());
    }

    #[test]
    fn zero_depth_strip_is_rejected() {
        let spec = ThinDomainSpec::new(
            (0.0, 1.0),
            ScaledProfile::constant(1.0),
            ScaledProfile::constant(1.0),
            StripSpec::new(0.5, ScaledProfile::constant(0.0)).unwrap(),
        )
        .unwrap();
        let params = MeshParams::default();
        assert!(generate_mesh(&spec, 0.1, &params, MeshDomain::Physical).is_err());
    }

    #[test]
    fn bad_params_are_rejected() {
        let spec = flat_spec(2.0, 1.0, 1.0, (0.0, 1.0));
        for params in [
            MeshParams { nx: 0, ..Default::default() },
            MeshParams { ny_bulk: 0, ..Default::default() },
            MeshParams { ny_strip: 0, ..Default::default() },
            MeshParams { grading: 0.5, ..Default::default() },
        ] {
            assert!(generate_mesh(&spec, 0.1, &params, MeshDomain::Physical).is_err());
        }
        assert!(generate_mesh(&spec, -0.1, &MeshParams::default(), MeshDomain::Physical).is_err());
    }
}
