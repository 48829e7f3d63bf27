//! File formats: the coefficients text format, Wavefront-style surface
//! meshes, hyperplane cuts of 4D domains, point lists, CSV logs, and run
//! manifests.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::HarmonicCoefficients;
use crate::harmonics::{BasisIndex, BasisTable, Dimension};
use crate::vecmath::Vec4;

const COEFFS_HEADER: &str = "steklov-coeffs v1";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Parses an index field; `lineno` is zero-based.
fn parse_field<T: std::str::FromStr>(path: &Path, lineno: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_err(path, lineno + 1, format!("bad index field {field}")))
}

/// Writes coefficients as a header line "steklov-coeffs v1 d=<3|4> N=<int>"
/// followed by one "<l> <m> <value>" (3D) or "<n> <l> <m> <value>" (4D) line
/// per basis index. Values round-trip bit-exactly through [`load_coefficients`].
pub fn save_coefficients(coeffs: &HarmonicCoefficients, path: &Path) -> Result<()> {
    let mut text = format!(
        "{COEFFS_HEADER} d={} N={}\n",
        coeffs.dimension().ambient(),
        coeffs.degree()
    );
    for (idx, value) in coeffs.table().indices().iter().zip(coeffs.coefficients()) {
        // Display of f64 is the shortest decimal form that parses back to
        // the same bits.
        match idx {
            BasisIndex::ThreeD { l, m } => writeln!(text, "{l} {m} {value}"),
            BasisIndex::FourD { n, l, m } => writeln!(text, "{n} {l} {m} {value}"),
        }
        .expect("string write");
    }
    std::fs::write(path, text).map_err(io_err(path))
}

/// Loads a coefficients file written by [`save_coefficients`]. The domain is
/// not validated here; a nonpositive radius surfaces on first evaluation.
pub fn load_coefficients(path: &Path) -> Result<HarmonicCoefficients> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let rest = header
        .strip_prefix(COEFFS_HEADER)
        .ok_or_else(|| parse_err(path, 1, format!("expected header \"{COEFFS_HEADER} ...\"")))?;
    let mut dimension = None;
    let mut degree = None;
    for field in rest.split_whitespace() {
        if let Some(d) = field.strip_prefix("d=") {
            dimension = Some(match d {
                "3" => Dimension::Three,
                "4" => Dimension::Four,
                other => {
                    return Err(parse_err(path, 1, format!("dimension must be 3 or 4, got {other}")))
                }
            });
        } else if let Some(n) = field.strip_prefix("N=") {
            degree = Some(
                n.parse::<u32>()
                    .map_err(|_| parse_err(path, 1, format!("bad truncation degree {n}")))?,
            );
        } else {
            return Err(parse_err(path, 1, format!("unexpected header field {field}")));
        }
    }
    let dimension = dimension.ok_or_else(|| parse_err(path, 1, "header is missing d="))?;
    let degree = degree.ok_or_else(|| parse_err(path, 1, "header is missing N="))?;

    let table = BasisTable::new(dimension, degree);
    let mut a = vec![0.0; table.len()];
    let mut seen = vec![false; table.len()];
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (idx, value) = match (dimension, fields.as_slice()) {
            (Dimension::Three, [l, m, v]) => (
                BasisIndex::three(
                    parse_field(path, lineno, l)?,
                    parse_field(path, lineno, m)?,
                ),
                v,
            ),
            (Dimension::Four, [n, l, m, v]) => (
                BasisIndex::four(
                    parse_field(path, lineno, n)?,
                    parse_field(path, lineno, l)?,
                    parse_field(path, lineno, m)?,
                ),
                v,
            ),
            _ => {
                return Err(parse_err(
                    path,
                    lineno + 1,
                    format!(
                        "expected {} fields, got {}",
                        dimension.angle_count() + 2,
                        fields.len()
                    ),
                ))
            }
        };
        let value: f64 = value
            .parse()
            .map_err(|_| parse_err(path, lineno + 1, format!("bad value {value}")))?;
        let position = table
            .position(idx)
            .ok_or_else(|| parse_err(path, lineno + 1, format!("index {idx} outside N={degree}")))?;
        if seen[position] {
            return Err(parse_err(path, lineno + 1, format!("duplicate index {idx}")));
        }
        seen[position] = true;
        a[position] = value;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(parse_err(
            path,
            text.lines().count(),
            format!(
                "file ends after {} of {} coefficients (first missing: {})",
                seen.iter().filter(|s| **s).count(),
                table.len(),
                table.index_at(missing)
            ),
        ));
    }
    HarmonicCoefficients::new(dimension, degree, a)
}

/// Triangulated closed surface, for export and mesh-level checks.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices, counterclockwise seen from outside.
    pub faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Closed sphere-topology grid: `rows` polar samples including both
    /// poles, `cols` azimuthal samples. Vertices are `position(theta, phi)`;
    /// each pole collapses to a single vertex, so the count is
    /// (rows - 2) * cols + 2.
    pub fn sphere_grid(
        rows: usize,
        cols: usize,
        mut position: impl FnMut(f64, f64) -> Result<[f64; 3]>,
    ) -> Result<TriMesh> {
        if rows < 3 || cols < 3 {
            return Err(Error::InvalidArgument {
                name: "resolution",
                value: format!("{rows}x{cols}"),
                reason: "sphere grid needs at least 3 rows and 3 columns".into(),
            });
        }
        let theta = |i: usize| std::f64::consts::PI * i as f64 / (rows - 1) as f64;
        let phi = |j: usize| 2.0 * std::f64::consts::PI * j as f64 / cols as f64;

        let mut vertices = Vec::with_capacity((rows - 2) * cols + 2);
        vertices.push(position(0.0, 0.0)?);
        for i in 1..rows - 1 {
            for j in 0..cols {
                vertices.push(position(theta(i), phi(j))?);
            }
        }
        vertices.push(position(std::f64::consts::PI, 0.0)?);

        let north = 0;
        let south = vertices.len() - 1;
        let ring = |i: usize, j: usize| 1 + (i - 1) * cols + (j % cols);

        let mut faces = Vec::with_capacity(2 * (rows - 2) * cols);
        for j in 0..cols {
            faces.push([north, ring(1, j), ring(1, j + 1)]);
        }
        for i in 1..rows - 2 {
            for j in 0..cols {
                faces.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
                faces.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
            }
        }
        for j in 0..cols {
            faces.push([ring(rows - 2, j + 1), ring(rows - 2, j), south]);
        }
        Ok(TriMesh { vertices, faces })
    }

    /// V - E + F with edges counted once per undirected pair.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Signed volume as the sum of origin tetrahedra; positive for a closed
    /// surface oriented counterclockwise from outside.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = [self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]];
                (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0]))
                    / 6.0
            })
            .sum()
    }

    /// Wavefront text: "v x y z" lines, then 1-indexed "f i j k" lines.
    pub fn write_obj(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(io_err(path))?;
        let mut out = std::io::BufWriter::new(file);
        (|| -> std::io::Result<()> {
            for v in &self.vertices {
                writeln!(out, "v {} {} {}", v[0], v[1], v[2])?;
            }
            for f in &self.faces {
                writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
            out.flush()
        })()
        .map_err(io_err(path))
    }
}

/// Triangulates a 3D star-shaped boundary on a rows x cols polar grid.
pub fn mesh3d(coeffs: &HarmonicCoefficients, rows: usize, cols: usize) -> Result<TriMesh> {
    if coeffs.dimension() != Dimension::Three {
        return Err(Error::InvalidArgument {
            name: "coeffs",
            value: coeffs.dimension().to_string(),
            reason: "surface meshes are for 3D domains".into(),
        });
    }
    TriMesh::sphere_grid(rows, cols, |theta, phi| {
        let r = coeffs.radius_at(&[theta, phi])?;
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Ok([r * st * cp, r * st * sp, r * ct])
    })
}

/// Writes the triangulated boundary of a 3D domain.
pub fn export_mesh3d(
    coeffs: &HarmonicCoefficients,
    rows: usize,
    cols: usize,
    path: &Path,
) -> Result<()> {
    mesh3d(coeffs, rows, cols)?.write_obj(path)
}

/// Cut of a 4D boundary by the hyperplane {x_axis = 0}: a closed surface in
/// the three remaining coordinates (kept in increasing order). The radial
/// map of the cut comes from evaluating the 4D radius along the great
/// 2-sphere of slice directions.
pub fn cut4d(
    coeffs: &HarmonicCoefficients,
    axis: usize,
    rows: usize,
    cols: usize,
) -> Result<TriMesh> {
    if coeffs.dimension() != Dimension::Four {
        return Err(Error::InvalidArgument {
            name: "coeffs",
            value: coeffs.dimension().to_string(),
            reason: "hyperplane cuts are for 4D domains".into(),
        });
    }
    if axis >= 4 {
        return Err(Error::InvalidArgument {
            name: "axis",
            value: axis.to_string(),
            reason: "coordinate axis must be 0..=3".into(),
        });
    }
    let kept: Vec<usize> = (0..4).filter(|&c| c != axis).collect();
    TriMesh::sphere_grid(rows, cols, |theta, phi| {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let eta = [st * cp, st * sp, ct];
        let mut u: Vec4 = [0.0; 4];
        for (slot, &coord) in kept.iter().enumerate() {
            u[coord] = eta[slot];
        }
        let r = coeffs.radius_at(&angles_of_direction(&u))?;
        Ok([r * eta[0], r * eta[1], r * eta[2]])
    })
}

/// Parameter angles (beta, theta, phi) of a 4D unit direction, inverting
/// u = (sb st cp, sb st sp, sb ct, cb). Angles degenerate at the poles are
/// set to zero; the radius is insensitive to them there.
fn angles_of_direction(u: &Vec4) -> Vec<f64> {
    let beta = u[3].clamp(-1.0, 1.0).acos();
    let sb = beta.sin();
    if sb < 1e-12 {
        return vec![beta, 0.0, 0.0];
    }
    let theta = (u[2] / sb).clamp(-1.0, 1.0).acos();
    let st = theta.sin();
    if st < 1e-12 {
        return vec![beta, theta, 0.0];
    }
    vec![beta, theta, u[1].atan2(u[0])]
}

/// Writes the four axis cuts of a 4D domain as `<stem>-cut-{x,y,z,w}.obj`
/// next to `stem`. Returns the written paths.
pub fn export_cuts4d(
    coeffs: &HarmonicCoefficients,
    rows: usize,
    cols: usize,
    stem: &Path,
) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(4);
    for (axis, label) in ["x", "y", "z", "w"].iter().enumerate() {
        let mesh = cut4d(coeffs, axis, rows, cols)?;
        let path = stem.with_file_name(format!(
            "{}-cut-{label}.obj",
            stem.file_name().and_then(|s| s.to_str()).unwrap_or("domain")
        ));
        mesh.write_obj(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes one point per line, d space-separated coordinates.
pub fn write_points(points: &[Vec4], dimension: Dimension, path: &Path) -> Result<()> {
    let mut text = String::new();
    for p in points {
        let coords: Vec<String> = p[..dimension.ambient()].iter().map(f64::to_string).collect();
        writeln!(text, "{}", coords.join(" ")).expect("string write");
    }
    std::fs::write(path, text).map_err(io_err(path))
}

/// CSV writer with a fixed header; one row per record, comma-delimited,
/// period decimal separator (the Display form of f64).
pub struct CsvLog {
    out: std::io::BufWriter<std::fs::File>,
    path: PathBuf,
    columns: usize,
}

impl CsvLog {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = std::fs::File::create(path).map_err(io_err(path))?;
        let mut out = std::io::BufWriter::new(file);
        writeln!(out, "{}", header.join(",")).map_err(io_err(path))?;
        Ok(Self { out, path: path.to_path_buf(), columns: header.len() })
    }

    /// Writes one row; missing trailing fields stay empty.
    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        debug_assert!(fields.len() <= self.columns);
        let mut padded = fields.to_vec();
        padded.resize(self.columns, String::new());
        writeln!(self.out, "{}", padded.join(",")).map_err(io_err(&self.path))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(io_err(&self.path))
    }
}

/// Writes the run manifest: configuration, code version, and wall-clock
/// seconds per stage.
pub fn write_manifest(
    path: &Path,
    config_block: &str,
    stages: &[(String, f64)],
) -> Result<()> {
    let mut text = String::new();
    writeln!(text, "tool=steklov {}", env!("CARGO_PKG_VERSION")).expect("string write");
    text.push_str(config_block);
    for (stage, seconds) in stages {
        writeln!(text, "wall_clock[{stage}]={seconds:.3}s").expect("string write");
    }
    std::fs::write(path, text).map_err(io_err(path))
}

/// Rounds down at two decimals; reported optima are lower bounds.
pub fn floor_two_decimals(x: f64) -> f64 {
    (x * 100.0).floor() / 100.0
}
