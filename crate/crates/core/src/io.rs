//! File formats: JSON point lists and reports, CSV tables and OBJ polylines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::darboux::DarbouxTransform;
use crate::error::{Error, Result};
use crate::holo::Immersion;
use crate::linalg::BivariatePoly;
use crate::mesh::{DerivedDecomposition, LatticeBasis, RegularTorus};
use crate::polygon::DiscreteCurve;
use crate::quatlin::{HPoint, QVec2, Quaternion, C64};
use crate::spectral::{LinearComponent, SpectralData, SpectrumSample};

/// A point of `HP^1` as an affine quaternion `[a,b,c,d]` or a homogeneous pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRecord {
    Affine([f64; 4]),
    Homogeneous([[f64; 4]; 2]),
}

impl PointRecord {
    pub fn to_point(self) -> Result<HPoint> {
        match self {
            PointRecord::Affine(x) => {
                let q = quaternion(x);
                if !q.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite value {x:?}")));
                }
                Ok(HPoint::from_affine(q))
            }
            PointRecord::Homogeneous([x0, x1]) => HPoint::new(QVec2::new(quaternion(x0), quaternion(x1)))
                .map_err(|_| Error::InvalidInput("homogeneous pair is zero".into())),
        }
    }

    /// Affine when finite, homogeneous otherwise.
    pub fn from_point(p: &HPoint) -> PointRecord {
        match p.affine() {
            Some(x) => PointRecord::Affine(x.to_array()),
            None => PointRecord::homogeneous(p),
        }
    }

    pub fn homogeneous(p: &HPoint) -> PointRecord {
        let v = p.rep();
        PointRecord::Homogeneous([v.x0.to_array(), v.x1.to_array()])
    }
}

fn quaternion(x: [f64; 4]) -> Quaternion {
    Quaternion::new(x[0], x[1], x[2], x[3])
}

pub fn points_from_records(records: &[PointRecord]) -> Result<Vec<HPoint>> {
    records.iter().map(|r| r.to_point()).collect()
}

/// An immersion file: a bare point list, or the points with their torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImmersionFile {
    WithTorus { torus: LatticeBasis, points: Vec<PointRecord> },
    Bare(Vec<PointRecord>),
}

impl ImmersionFile {
    pub fn new(torus: &RegularTorus, f: &Immersion) -> Self {
        ImmersionFile::WithTorus { torus: torus.basis, points: f.points.iter().map(PointRecord::from_point).collect() }
    }

    pub fn torus(&self) -> Option<LatticeBasis> {
        match self {
            ImmersionFile::WithTorus { torus, .. } => Some(*torus),
            ImmersionFile::Bare(_) => None,
        }
    }

    pub fn immersion(&self) -> Result<Immersion> {
        let records = match self {
            ImmersionFile::WithTorus { points, .. } | ImmersionFile::Bare(points) => points,
        };
        Ok(Immersion::new(points_from_records(records)?))
    }
}

/// A Darboux transform: one homogeneous pair per black triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformFile {
    pub torus: LatticeBasis,
    pub points: Vec<PointRecord>,
}

impl TransformFile {
    pub fn new(torus: &RegularTorus, t: &DarbouxTransform) -> Self {
        TransformFile { torus: torus.basis, points: t.points.iter().map(PointRecord::homogeneous).collect() }
    }
}

/// A polygon file: a bare point list (closed) or an object with `closed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolygonFile {
    Curve {
        points: Vec<PointRecord>,
        #[serde(default = "closed_default")]
        closed: bool,
    },
    Bare(Vec<PointRecord>),
}

fn closed_default() -> bool {
    true
}

impl PolygonFile {
    pub fn new(curve: &DiscreteCurve) -> Self {
        PolygonFile::Curve { points: curve.points.iter().map(PointRecord::from_point).collect(), closed: curve.closed }
    }

    pub fn curve(&self) -> Result<DiscreteCurve> {
        match self {
            PolygonFile::Curve { points, closed } => DiscreteCurve::new(points_from_records(points)?, *closed),
            PolygonFile::Bare(points) => DiscreteCurve::new(points_from_records(points)?, true),
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ends {
    pub dir0: Vec<[f64; 2]>,
    pub dir1: Vec<[f64; 2]>,
    pub dir2: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub slope: [f64; 2],
    pub intercept: [f64; 2],
    pub multiplicity: usize,
}

impl From<&LinearComponent> for LineRecord {
    fn from(l: &LinearComponent) -> Self {
        LineRecord { slope: pair(l.slope), intercept: pair(l.intercept), multiplicity: l.multiplicity }
    }
}

/// The JSON spectral report of a torus immersion; `coeffs[j][k]` multiplies
/// `lambda^j mu^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub length: usize,
    pub thickness: usize,
    pub lambda_degree: usize,
    pub mu_degree_bound: usize,
    pub coeffs: Vec<Vec<[f64; 2]>>,
    pub ends: Ends,
    pub end_count: usize,
    pub generic: bool,
    /// Lines `lambda = slope mu + intercept` contained in the spectral curve.
    pub lambda_lines: Vec<LineRecord>,
    pub splits: bool,
    pub conjugate_deviation: Option<f64>,
}

pub fn coeff_table(p: &BivariatePoly) -> Vec<Vec<[f64; 2]>> {
    p.coeffs.iter().map(|row| row.iter().map(|&c| pair(c)).collect()).collect()
}

impl SpectralReport {
    pub fn new(data: &SpectralData, lines: &[LinearComponent]) -> Self {
        let ends = |d: usize| data.genericity.ends[d].iter().map(|&z| pair(z)).collect();
        SpectralReport {
            length: data.length,
            thickness: data.thickness,
            lambda_degree: 2 * data.length,
            mu_degree_bound: 2 * data.length * data.thickness,
            coeffs: coeff_table(&data.poly),
            ends: Ends { dir0: ends(0), dir1: ends(1), dir2: ends(2) },
            end_count: data.genericity.end_count(),
            generic: data.genericity.generic,
            lambda_lines: lines.iter().map(LineRecord::from).collect(),
            splits: data.splits.is_some(),
            conjugate_deviation: data.splits.as_ref().map(|s| s.conjugate_deviation),
        }
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

fn to_csv<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

#[derive(Serialize)]
struct SampleRow {
    mu_re: f64,
    mu_im: f64,
    lambda_re: f64,
    lambda_im: f64,
    min_singular_value: f64,
}

pub fn samples_csv(samples: &[SpectrumSample]) -> Result<String> {
    to_csv(samples.iter().map(|s| SampleRow {
        mu_re: s.multiplier.mu.re,
        mu_im: s.multiplier.mu.im,
        lambda_re: s.multiplier.lambda.re,
        lambda_im: s.multiplier.lambda.im,
        min_singular_value: s.min_singular_value,
    }))
}

#[derive(Serialize)]
struct VertexRow {
    index: usize,
    a: i64,
    b: i64,
}

#[derive(Serialize)]
struct TriangleRow {
    index: usize,
    a: i64,
    b: i64,
    v0: usize,
    v1: usize,
    v2: usize,
}

#[derive(Serialize)]
struct DerivedRow {
    index: usize,
    vertex_parent_black: usize,
    black_parent_white: usize,
    white_parent_vertex: usize,
}

/// Vertex table: index and lattice coordinates.
pub fn vertices_csv(t: &RegularTorus) -> Result<String> {
    to_csv(t.vertices.iter().enumerate().map(|(index, &[a, b])| VertexRow { index, a, b }))
}

/// Triangle table; triangle `i` is anchored at the lattice point of vertex `i`.
pub fn triangles_csv(t: &RegularTorus, triangles: &[[usize; 3]]) -> Result<String> {
    to_csv(triangles.iter().enumerate().map(|(index, &[v0, v1, v2])| {
        let [a, b] = t.vertices[index];
        TriangleRow { index, a, b, v0, v1, v2 }
    }))
}

pub fn derived_csv(d: &DerivedDecomposition) -> Result<String> {
    to_csv((0..d.torus.len()).map(|index| DerivedRow {
        index,
        vertex_parent_black: d.vertex_to_parent_black[index],
        black_parent_white: d.black_to_parent_white[index],
        white_parent_vertex: d.white_to_parent_vertex[index],
    }))
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_g12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { format!("{x}") };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let s = format!("{:.*}", (11 - e).max(0) as usize, x);
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{:.11e}", x);
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

/// How points of `H = R^4` are placed in `R^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjProjection {
    /// Unit axis dropped when values do not all lie in `Im H`.
    pub axis: Quaternion,
}

impl Default for ObjProjection {
    fn default() -> Self {
        ObjProjection { axis: Quaternion::K }
    }
}

impl ObjProjection {
    /// Orthonormal basis of the complement of the axis, in the order of the
    /// remaining standard coordinates when the axis is a coordinate axis.
    fn frame(&self) -> [Quaternion; 3] {
        let n = self.axis.norm();
        let p = self.axis * (1.0 / n);
        let mut out = Vec::with_capacity(3);
        for e in [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K] {
            let mut v = e - p * dot(e, p);
            for &u in &out {
                v = v - u * dot(v, u);
            }
            if v.norm() > 1e-8 {
                out.push(v * (1.0 / v.norm()));
            }
        }
        [out[0], out[1], out[2]]
    }

    /// Drops the real part when every value is imaginary, otherwise the axis.
    pub fn project(&self, steps: &[Vec<Quaternion>]) -> Vec<Vec<[f64; 3]>> {
        let scale = steps.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
        let imaginary = steps.iter().flatten().all(|x| x.a.abs() <= 1e-12 * scale);
        let frame = if imaginary { [Quaternion::I, Quaternion::J, Quaternion::K] } else { self.frame() };
        steps.iter().map(|s| s.iter().map(|&x| frame.map(|u| dot(x, u))).collect()).collect()
    }
}

fn dot(x: Quaternion, y: Quaternion) -> f64 {
    x.a * y.a + x.b * y.b + x.c * y.c + x.d * y.d
}

/// One object per curve with `v` lines and an `l` polyline, closed curves
/// repeating their first vertex.
pub fn curves_obj(curves: &[DiscreteCurve], projection: &ObjProjection) -> Result<String> {
    let mut affine = Vec::with_capacity(curves.len());
    for (t, c) in curves.iter().enumerate() {
        let x: Option<Vec<Quaternion>> = c.points.iter().map(|p| p.affine()).collect();
        affine.push(x.ok_or_else(|| Error::InvalidInput(format!("curve {t} passes through infinity")))?);
    }
    let projected = projection.project(&affine);
    let mut out = String::new();
    let mut offset = 0;
    for (t, (pts, c)) in projected.iter().zip(curves.iter()).enumerate() {
        writeln!(out, "o step_{t}").expect("string write");
        for p in pts {
            writeln!(out, "v {} {} {}", format_g12(p[0]), format_g12(p[1]), format_g12(p[2])).expect("string write");
        }
        let mut idx: Vec<String> = (1..=pts.len()).map(|k| (k + offset).to_string()).collect();
        if c.closed {
            idx.push((offset + 1).to_string());
        }
        writeln!(out, "l {}", idx.join(" ")).expect("string write");
        offset += pts.len();
    }
    Ok(out)
}
