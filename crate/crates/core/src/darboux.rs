//! Darboux transforms: prolongation of holomorphic sections to black
//! triangles, the multi-ratio and connection conditions on white triangles,
//! Bianchi permutability and the cube condition on `Z^3`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holo::{prolong_triangle, AffineChart, HolomorphicStructure, Immersion, Section};
use crate::mesh::{add, rot120_pow, sub, FundamentalDomain, Lat, RegularTorus};
use crate::quatlin::{multi_ratio6, HPoint, QVec2, Quaternion, C64, INVERTIBILITY_TOL};
use crate::spectral::{MonodromySection, Multiplier};

/// Largest relative residual at the third vertex of a prolonged triangle.
pub const PROLONGATION_TOL: f64 = 1e-8;

/// Chordal distance below which a transform point meets a surface point.
pub const REGULARITY_TOL: f64 = 1e-8;

/// Relative disagreement allowed between the three pairwise solutions for `chi`.
pub const CHI_TOL: f64 = 1e-8;

/// Per-black-triangle lifts `psi_hat_b` of a holomorphic section.
#[derive(Clone, Debug, PartialEq)]
pub struct Prolongation {
    /// Lift per black triangle in the original frame. With a fundamental
    /// domain, the value belongs to the domain representative.
    pub values: Vec<QVec2>,
    pub triangles: Vec<[usize; 3]>,
    pub multiplier: Multiplier,
    pub fd: Option<FundamentalDomain>,
    pub max_residual: f64,
}

impl Prolongation {
    /// Lift at the black triangle with local lower-left corner `local`,
    /// continued by the multiplier.
    pub fn at_local(&self, local: Lat) -> QVec2 {
        let fd = self.fd.as_ref().expect("prolongation of a section with monodromy");
        let w = fd.locate(local);
        self.values[fd.black[w.slot]].scale_complex(self.multiplier.factor(w.mu_power, w.lambda_power))
    }

    /// Lift at the black triangle `up(global)` of the universal cover.
    pub fn at_global(&self, global: Lat) -> QVec2 {
        let fd = self.fd.as_ref().expect("prolongation of a section with monodromy");
        let corners = [global, add(global, [1, 0]), add(global, [0, 1])].map(|c| fd.to_local(c));
        let ll = *corners
            .iter()
            .find(|&&q| {
                let rel: Vec<Lat> = corners.iter().map(|&z| sub(z, q)).collect();
                rel.contains(&[1, 0]) && rel.contains(&[0, 1])
            })
            .expect("rotations preserve black triangles");
        self.at_local(ll)
    }

    /// The multiplier evaluated on a lattice translation given in global coordinates.
    pub fn translation_factor(&self, g: Lat) -> C64 {
        match &self.fd {
            Some(fd) => {
                let w = fd.locate(rot120_pow(g, (3 - fd.direction) % 3));
                self.multiplier.factor(w.mu_power, w.lambda_power)
            }
            None => C64::new(1.0, 0.0),
        }
    }
}

fn induced_chart<'a>(hs: &'a HolomorphicStructure, f: &Immersion) -> Result<&'a AffineChart> {
    let chart = hs.chart.as_ref().ok_or_else(|| Error::InvalidInput("structure has no immersion chart".into()))?;
    if f.len() != hs.vertex_count || AffineChart::for_points(&f.points) != *chart {
        return Err(Error::InvalidInput("structure is not induced by this immersion".into()));
    }
    Ok(chart)
}

/// Lifts a section with monodromy to every black triangle.
pub fn prolong(s: &MonodromySection, hs: &HolomorphicStructure, f: &Immersion) -> Result<Prolongation> {
    let chart = induced_chart(hs, f)?;
    if s.fd.vertices.len() != hs.vertex_count || s.fd.black.len() != hs.triangles.len() {
        return Err(Error::InvalidInput("section and structure live on different surfaces".into()));
    }
    let mut values = vec![QVec2::default(); hs.triangles.len()];
    let mut max_residual: f64 = 0.0;
    for (slot, &b) in s.fd.black.iter().enumerate() {
        let verts = s.fd.black_corners[slot].map(|w| s.fd.vertices[w.slot]);
        let (lift, residual) = prolong_triangle(chart, verts, s.corner_values(slot));
        if residual > PROLONGATION_TOL {
            return Err(Error::InconsistentSection { triangle: b, residual });
        }
        max_residual = max_residual.max(residual);
        values[b] = lift;
    }
    Ok(Prolongation {
        values,
        triangles: hs.triangles.clone(),
        multiplier: s.multiplier,
        fd: Some(s.fd.clone()),
        max_residual,
    })
}

/// Lifts a section without monodromy, given by its vertex values.
pub fn prolong_section(s: &Section, hs: &HolomorphicStructure, f: &Immersion) -> Result<Prolongation> {
    let chart = induced_chart(hs, f)?;
    let mut values = Vec::with_capacity(hs.triangles.len());
    let mut max_residual: f64 = 0.0;
    for (b, t) in hs.triangles.iter().enumerate() {
        let (lift, residual) = prolong_triangle(chart, *t, t.map(|v| s.values[v]));
        if residual > PROLONGATION_TOL {
            return Err(Error::InconsistentSection { triangle: b, residual });
        }
        max_residual = max_residual.max(residual);
        values.push(lift);
    }
    let one = C64::new(1.0, 0.0);
    Ok(Prolongation {
        values,
        triangles: hs.triangles.clone(),
        multiplier: Multiplier::new(one, one),
        fd: None,
        max_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Section { multiplier: Multiplier },
    Bianchi,
    External,
}

/// A map on the derived surface: one point per black triangle of the parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarbouxTransform {
    pub points: Vec<HPoint>,
    pub provenance: Provenance,
}

impl DarbouxTransform {
    pub fn external(points: Vec<HPoint>) -> Self {
        DarbouxTransform { points, provenance: Provenance::External }
    }

    /// The transform as an immersion of the derived surface, whose vertices
    /// carry the parent's black triangle indices.
    pub fn as_immersion(&self) -> Immersion {
        Immersion::new(self.points.clone())
    }
}

/// Pairs `(b, v)` with `v` a vertex of `b` and `ft(b) = f(v)`.
pub fn regularity_violations(triangles: &[[usize; 3]], f: &Immersion, ft: &[HPoint]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (b, t) in triangles.iter().enumerate() {
        for &v in t {
            if ft[b].distance(&f.points[v]) < REGULARITY_TOL && !out.contains(&(b, v)) {
                out.push((b, v));
            }
        }
    }
    out
}

/// The transform spanned by a prolongation.
pub fn darboux_from_section(p: &Prolongation, f: &Immersion) -> Result<DarbouxTransform> {
    let scale = p.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if let Some(b) = p.values.iter().position(|v| !(v.norm() > 1e-12 * scale)) {
        return Err(Error::ZeroProlongation { triangle: b });
    }
    let points: Vec<HPoint> = p.values.iter().map(|&v| HPoint::new(v)).collect::<Result<_>>()?;
    let pairs = regularity_violations(&p.triangles, f, &points);
    if !pairs.is_empty() {
        return Err(Error::RegularityViolation { pairs });
    }
    // the multiplier acts by complex scalars, so continued lifts span the same lines
    if let Some(fd) = &p.fd {
        for slot in 0..fd.black.len() {
            let here = fd.local(slot);
            let there = add(here, [fd.length as i64, 0]);
            let a = HPoint::new(p.at_local(here))?;
            let b = HPoint::new(p.at_local(there))?;
            if a.distance(&b) > 1e-10 {
                return Err(Error::InvalidInput("transform is not well defined on the quotient".into()));
            }
        }
    }
    Ok(DarbouxTransform { points, provenance: Provenance::Section { multiplier: p.multiplier } })
}

/// Hexagon around the white triangle `down(a,b)`: vertices `x1, x2, x3` and
/// black triangles `x12, x23, x13`, where `x_ij` shares the edge `x_i x_j`.
/// `x1, x2, x3` run clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WhiteHexagon {
    pub vertices: [usize; 3],
    pub blacks: [usize; 3],
}

pub fn white_hexagon(torus: &RegularTorus, w: usize) -> WhiteHexagon {
    // canonical white order is (a+1,b), (a+1,b+1), (a,b+1), counterclockwise
    let [a, b, c] = torus.white[w];
    let [up0, up_right, up_above] = torus.white_neighbors(w);
    WhiteHexagon { vertices: [a, c, b], blacks: [up0, up_above, up_right] }
}

/// Affine coordinates of `f` and `ft` in one common chart.
fn common_chart(f: &Immersion, ft: &[HPoint]) -> (Vec<Quaternion>, Vec<Quaternion>) {
    let all: Vec<HPoint> = f.points.iter().chain(ft.iter()).copied().collect();
    let mut values = AffineChart::for_points(&all).values;
    let tail = values.split_off(f.len());
    (values, tail)
}

fn hexagon_values(h: &WhiteHexagon, x: &[Quaternion], y: &[Quaternion]) -> [Quaternion; 6] {
    [x[h.vertices[0]], y[h.blacks[0]], x[h.vertices[1]], y[h.blacks[1]], x[h.vertices[2]], y[h.blacks[2]]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiRatioReport {
    pub max_multiratio_dev: f64,
    pub worst_white_triangle: usize,
    pub regularity_violations: Vec<(usize, usize)>,
}

fn check_sizes(torus: &RegularTorus, f: &Immersion, ft: &DarbouxTransform) -> Result<()> {
    if f.len() != torus.len() || ft.points.len() != torus.black.len() {
        return Err(Error::InvalidInput("transform and surface sizes differ".into()));
    }
    Ok(())
}

/// Largest `|M6 + 1|` over the hexagons around white triangles.
pub fn verify_multiratio(torus: &RegularTorus, f: &Immersion, ft: &DarbouxTransform) -> Result<MultiRatioReport> {
    check_sizes(torus, f, ft)?;
    let pairs = regularity_violations(&torus.black, f, &ft.points);
    if !pairs.is_empty() {
        return Err(Error::RegularityViolation { pairs });
    }
    let (x, y) = common_chart(f, &ft.points);
    let devs: Vec<f64> = (0..torus.white.len())
        .into_par_iter()
        .map(|w| {
            let h = white_hexagon(torus, w);
            let m = multi_ratio6(&hexagon_values(&h, &x, &y)).map_err(|_| Error::NonInvertibleOnWhite { white: w })?;
            Ok((m + Quaternion::ONE).norm())
        })
        .collect::<Result<_>>()?;
    let (worst, dev) = argmax(&devs);
    Ok(MultiRatioReport { max_multiratio_dev: dev, worst_white_triangle: worst, regularity_violations: pairs })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best })
}

/// Parallel transport `(y1, 1) -> (y2, 1) (y2 - x)^-1 (y1 - x)` along the
/// line `(x, 1) H` shared by two neighboring black triangles.
fn transport(y1: Quaternion, y2: Quaternion, x: Quaternion) -> Option<Quaternion> {
    let d1 = y1 - x;
    let d2 = y2 - x;
    let scale = y1.norm().max(y2.norm()).max(x.norm()).max(1.0);
    if d1.norm() <= INVERTIBILITY_TOL * scale || d2.norm() <= INVERTIBILITY_TOL * scale {
        return None;
    }
    Some(d2.inv() * d1)
}

/// Holonomy of the connection on the transform around white triangle `w`,
/// as the scale picked up by `(ft(x13), 1)` after transport through
/// `x3`, `x2` and `x1`.
pub fn connection_holonomy(torus: &RegularTorus, f: &Immersion, ft: &DarbouxTransform, w: usize) -> Result<Quaternion> {
    check_sizes(torus, f, ft)?;
    let (x, y) = common_chart(f, &ft.points);
    white_holonomy(torus, &x, &y, w)
}

fn white_holonomy(torus: &RegularTorus, x: &[Quaternion], y: &[Quaternion], w: usize) -> Result<Quaternion> {
    let h = white_hexagon(torus, w);
    let [x1, x2, x3] = h.vertices.map(|v| x[v]);
    let [y12, y23, y13] = h.blacks.map(|b| y[b]);
    let err = || Error::NonInvertibleOnWhite { white: w };
    let t3 = transport(y13, y23, x3).ok_or_else(err)?;
    let t2 = transport(y23, y12, x2).ok_or_else(err)?;
    let t1 = transport(y12, y13, x1).ok_or_else(err)?;
    Ok(t1 * t2 * t3)
}

/// Largest `|hol - 1|` over white triangles, with the worst triangle.
pub fn max_holonomy_deviation(torus: &RegularTorus, f: &Immersion, ft: &DarbouxTransform) -> Result<(f64, usize)> {
    check_sizes(torus, f, ft)?;
    let (x, y) = common_chart(f, &ft.points);
    let devs: Vec<f64> = (0..torus.white.len())
        .into_par_iter()
        .map(|w| white_holonomy(torus, &x, &y, w).map(|q| (q - Quaternion::ONE).norm()))
        .collect::<Result<_>>()?;
    let (w, d) = argmax(&devs);
    Ok((d, w))
}

/// Holonomy around the face of the derived surface formed by the three black
/// triangles at vertex `v`.
pub fn vertex_holonomy(torus: &RegularTorus, f: &Immersion, ft: &DarbouxTransform, v: usize) -> Result<Quaternion> {
    check_sizes(torus, f, ft)?;
    let (x, y) = common_chart(f, &ft.points);
    let star = torus.vertex_black_star(v).map(|b| y[b]);
    let err = || Error::NonInvertibleDifference { index: v };
    let t01 = transport(star[0], star[1], x[v]).ok_or_else(err)?;
    let t12 = transport(star[1], star[2], x[v]).ok_or_else(err)?;
    let t20 = transport(star[2], star[0], x[v]).ok_or_else(err)?;
    Ok(t20 * t12 * t01)
}

/// The common transform of two transforms, one point per white triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct BianchiTransform {
    pub transform: DarbouxTransform,
    pub chi: Vec<Quaternion>,
    pub phi: Vec<QVec2>,
    /// Largest relative disagreement of the three pairwise `chi`.
    pub chi_deviation: f64,
    /// Largest relative failure of `chi` to intertwine the two multipliers.
    pub monodromy_deviation: f64,
}

/// Least-squares solution of `v chi = u` for right quaternionic scaling.
fn solve_right(v: QVec2, u: QVec2) -> Option<Quaternion> {
    let n = v.norm_sqr();
    if !(n > 0.0) {
        return None;
    }
    Some(v.inner(u) * (1.0 / n))
}

struct ChiSolve {
    chi: Quaternion,
    deviation: f64,
}

fn solve_chi(sharp: &Prolongation, flat: &Prolongation, p: Lat, w: usize) -> Result<ChiSolve> {
    let corners = [p, add(p, [1, 0]), add(p, [0, 1])];
    let s = corners.map(|c| sharp.at_global(c));
    let b = corners.map(|c| flat.at_global(c));
    let pair = |i: usize, j: usize| -> Result<(Quaternion, f64)> {
        let v = s[j] - s[i];
        let u = b[i] - b[j];
        let chi = solve_right(v, u).ok_or(Error::TransformsCollide { triangle: w })?;
        let residual = (v.scale(chi) - u).norm() / u.norm().max(f64::MIN_POSITIVE);
        Ok((chi, residual))
    };
    let (chi, r12) = pair(0, 1)?;
    let mut deviation = r12;
    for (i, j) in [(0, 2), (1, 2)] {
        let (other, r) = pair(i, j)?;
        deviation = deviation.max(r).max((other - chi).norm() / chi.norm().max(f64::MIN_POSITIVE));
    }
    Ok(ChiSolve { chi, deviation })
}

/// Bianchi permutability: the transform spanned by `psi_flat + psi_sharp chi`.
pub fn bianchi(torus: &RegularTorus, sharp: &Prolongation, flat: &Prolongation) -> Result<BianchiTransform> {
    if sharp.fd.is_none() || flat.fd.is_none() {
        return Err(Error::InvalidInput("Bianchi permutability needs sections with monodromy".into()));
    }
    if sharp.values.len() != torus.len() || flat.values.len() != torus.len() {
        return Err(Error::InvalidInput("prolongations and torus sizes differ".into()));
    }
    for b in 0..torus.len() {
        let a = HPoint::new(sharp.values[b])?;
        let c = HPoint::new(flat.values[b])?;
        if a.distance(&c) < REGULARITY_TOL {
            return Err(Error::TransformsCollide { triangle: b });
        }
    }
    let gens = [torus.basis.gamma, torus.basis.eta];
    let factors = gens.map(|g| {
        (Quaternion::from_complex(sharp.translation_factor(g)), Quaternion::from_complex(flat.translation_factor(g)))
    });
    let per_white: Vec<(Quaternion, QVec2, f64, f64)> = (0..torus.white.len())
        .into_par_iter()
        .map(|w| {
            let p = torus.vertices[w];
            let here = solve_chi(sharp, flat, p, w)?;
            if here.deviation > CHI_TOL {
                return Err(Error::ChiInconsistent { white: w, deviation: here.deviation });
            }
            let phi = flat.at_global(p) + sharp.at_global(p).scale(here.chi);
            let mut mono: f64 = 0.0;
            for (g, (hs, hf)) in gens.iter().zip(factors.iter()) {
                let there = solve_chi(sharp, flat, add(p, *g), w)?;
                let expect = hs.inv() * here.chi * *hf;
                mono = mono.max((there.chi - expect).norm() / here.chi.norm());
            }
            Ok((here.chi, phi, here.deviation, mono))
        })
        .collect::<Result<_>>()?;
    let chi: Vec<Quaternion> = per_white.iter().map(|t| t.0).collect();
    let phi: Vec<QVec2> = per_white.iter().map(|t| t.1).collect();
    let chi_deviation = per_white.iter().map(|t| t.2).fold(0.0, f64::max);
    let monodromy_deviation = per_white.iter().map(|t| t.3).fold(0.0, f64::max);
    let points = phi.iter().map(|&v| HPoint::new(v)).collect::<Result<_>>()?;
    Ok(BianchiTransform {
        transform: DarbouxTransform { points, provenance: Provenance::Bianchi },
        chi,
        phi,
        chi_deviation,
        monodromy_deviation,
    })
}

/// Affine quaternions on a box `[0, dims)` of `Z^3`, possibly partial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Z3Field {
    pub dims: [usize; 3],
    pub values: Vec<Option<Quaternion>>,
}

impl Z3Field {
    pub fn new(dims: [usize; 3]) -> Self {
        Z3Field { dims, values: vec![None; dims[0] * dims[1] * dims[2]] }
    }

    fn index(&self, p: [usize; 3]) -> usize {
        (p[0] * self.dims[1] + p[1]) * self.dims[2] + p[2]
    }

    pub fn get(&self, p: [usize; 3]) -> Option<Quaternion> {
        self.values[self.index(p)]
    }

    pub fn set(&mut self, p: [usize; 3], q: Quaternion) {
        let i = self.index(p);
        self.values[i] = Some(q);
    }
}

/// Planar images of the unit vectors of `Z^3`, in lattice coordinates scaled
/// by three: vertex `v` sits at `3v`, `up(v)` at `3v + (1,1)` and `down(v)` at
/// `3v + (2,2)`.
pub const Z3_DIRECTIONS: [Lat; 3] = [[1, -2], [1, 1], [-2, 1]];

/// Stacks iterated transforms into a field on `Z^3`.
///
/// `levels[t]` lives on the vertices, black or white triangles of the torus
/// for `t = 0, 1, 2 (mod 3)` and fills the plane `i + j + k = first_level + t`.
/// All levels share one affine chart.
pub fn assemble_z3(torus: &RegularTorus, levels: &[&[HPoint]], dims: [usize; 3], first_level: i64) -> Result<Z3Field> {
    if levels.iter().any(|l| l.len() != torus.len()) {
        return Err(Error::InvalidInput("every level needs one point per vertex".into()));
    }
    let all: Vec<HPoint> = levels.iter().flat_map(|l| l.iter().copied()).collect();
    let affine = AffineChart::for_points(&all).values;
    let n = torus.len();
    let mut field = Z3Field::new(dims);
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let level = (i + j + k) as i64 - first_level;
                if level < 0 || level >= levels.len() as i64 {
                    continue;
                }
                let [u1, u2, u3] = Z3_DIRECTIONS;
                let (i, j, k) = (i as i64, j as i64, k as i64);
                let class = level % 3;
                let shift = first_level + class;
                let px = i * u1[0] + j * u2[0] + k * u3[0] - shift;
                let py = i * u1[1] + j * u2[1] + k * u3[1] - shift;
                let lattice = [px.div_euclid(3), py.div_euclid(3)];
                debug_assert!(px.rem_euclid(3) == 0 && py.rem_euclid(3) == 0);
                let idx = torus.index_of(lattice);
                field.set([i as usize, j as usize, k as usize], affine[level as usize * n + idx]);
            }
        }
    }
    Ok(field)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeReport {
    pub max_deviation: f64,
    pub worst_cube: [i64; 3],
    pub cubes_checked: usize,
}

/// Largest `|M6(x1, x12, x2, x23, x3, x13) + 1|` over the unit cubes whose six
/// middle corners are all present.
pub fn ds_cube_check(field: &Z3Field) -> Result<CubeReport> {
    if field.dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidInput("box needs at least two points per axis".into()));
    }
    let [d0, d1, d2] = field.dims;
    let mut report = CubeReport { max_deviation: 0.0, worst_cube: [0, 0, 0], cubes_checked: 0 };
    for i in 0..d0 - 1 {
        for j in 0..d1 - 1 {
            for k in 0..d2 - 1 {
                let corners = [
                    [i + 1, j, k],
                    [i + 1, j + 1, k],
                    [i, j + 1, k],
                    [i, j + 1, k + 1],
                    [i, j, k + 1],
                    [i + 1, j, k + 1],
                ];
                let vals: Option<Vec<Quaternion>> = corners.iter().map(|&c| field.get(c)).collect();
                let Some(vals) = vals else { continue };
                let cube = [i as i64, j as i64, k as i64];
                let hex: [Quaternion; 6] = vals.try_into().expect("six corners");
                let m = multi_ratio6(&hex).map_err(|_| Error::NonInvertibleOnCube { cube })?;
                let dev = (m + Quaternion::ONE).norm();
                report.cubes_checked += 1;
                if dev > report.max_deviation {
                    report.max_deviation = dev;
                    report.worst_cube = cube;
                }
            }
        }
    }
    if report.cubes_checked == 0 {
        return Err(Error::InvalidInput("no cube has all six middle corners".into()));
    }
    Ok(report)
}
