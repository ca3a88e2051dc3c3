//! Spectrum of a holomorphic line bundle over a torus: sections with monodromy,
//! row transfer operators and the characteristic polynomial of the holonomy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holo::{prolong_triangle, HolomorphicStructure};
use crate::linalg::{char_poly_family, cluster_root, eigenvalues, kernel, poly_roots, BivariatePoly, RANK_TOL};
use crate::mesh::{fundamental_domain, FundamentalDomain, Lat, RegularTorus};
use crate::quatlin::{complex_block, twistor_project, CMatrix, CPoint3, HPoint, QVec2, Quaternion, C64};

/// Largest relative singular value accepted for an eigen-section.
pub const EIGEN_TOL: f64 = 1e-7;

/// Relative distance below which two horizontal holonomies coincide.
pub const DISTINCT_TOL: f64 = 1e-8;

/// Coordinates `mu = h(gamma)`, `lambda = h(eta)` of a multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multiplier {
    pub mu: C64,
    pub lambda: C64,
}

impl Multiplier {
    pub fn new(mu: C64, lambda: C64) -> Self {
        Multiplier { mu, lambda }
    }

    pub fn conj(&self) -> Multiplier {
        Multiplier::new(self.mu.conj(), self.lambda.conj())
    }

    pub fn factor(&self, mu_power: i64, lambda_power: i64) -> C64 {
        self.mu.powi(mu_power as i32) * self.lambda.powi(lambda_power as i32)
    }
}

fn add_block(m: &mut CMatrix, row: usize, col: usize, q: Quaternion, factor: C64) {
    let b = complex_block(q);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 * row + i, 2 * col + j)] += b[i][j] * factor;
        }
    }
}

/// Coefficients of the black triangle in `slot` for its local corners
/// `(a,r), (a+1,r), (a,r+1)`.
fn local_coeffs(hs: &HolomorphicStructure, fd: &FundamentalDomain, slot: usize) -> [Quaternion; 3] {
    let b = fd.black[slot];
    let c = hs.coeffs[b];
    let pos = fd.black_positions[slot];
    debug_assert!((0..3).all(|k| hs.triangles[b][pos[k]] == fd.vertices[fd.black_corners[slot][k].slot]));
    pos.map(|p| c[p])
}

fn check_compatible(hs: &HolomorphicStructure, fd: &FundamentalDomain) {
    assert_eq!(hs.vertex_count, fd.vertices.len(), "structure and domain live on different tori");
}

/// Maps row `row` values to row `row + 1` values (complexified, `2n x 2n`).
pub fn transfer_row(hs: &HolomorphicStructure, fd: &FundamentalDomain, row: usize, mu: C64) -> CMatrix {
    check_compatible(hs, fd);
    let n = fd.length;
    let (s, s_next) = (fd.row_starts[row], fd.row_starts[row + 1]);
    let mut t = CMatrix::zeros(2 * n, 2 * n);
    let one = C64::new(1.0, 0.0);
    for out in 0..n {
        let a = s_next + out as i64;
        let (a_tri, wrap) = if a < s + n as i64 { (a, one) } else { (a - n as i64, mu) };
        let k = (a_tri - s) as usize;
        let c = local_coeffs(hs, fd, fd.slot(row, k));
        let inv_top = c[2].inv();
        add_block(&mut t, out, k, -(inv_top * c[0]), wrap);
        let (kr, wrap_r) = if k + 1 == n { (0, wrap * mu) } else { (k + 1, wrap) };
        add_block(&mut t, out, kr, -(inv_top * c[1]), wrap_r);
    }
    t
}

/// `H(mu) = T_{m-1}(mu) ... T_0(mu)`; `H(mu) psi_0 = lambda psi_0` for sections
/// with multiplier `(mu, lambda)`.
pub fn holonomy_h(hs: &HolomorphicStructure, fd: &FundamentalDomain, mu: C64) -> CMatrix {
    let n = fd.length;
    (0..fd.thickness).fold(CMatrix::identity(2 * n, 2 * n), |acc, r| transfer_row(hs, fd, r, mu) * acc)
}

/// The holomorphicity operator on sections with multiplier; square of size `2|V|`.
pub fn assemble_d(hs: &HolomorphicStructure, fd: &FundamentalDomain, m: Multiplier) -> CMatrix {
    check_compatible(hs, fd);
    let count = fd.vertices.len();
    let mut d = CMatrix::zeros(2 * count, 2 * count);
    for slot in 0..count {
        let c = local_coeffs(hs, fd, slot);
        for (k, w) in fd.black_corners[slot].iter().enumerate() {
            add_block(&mut d, slot, w.slot, c[k], m.factor(w.mu_power, w.lambda_power));
        }
    }
    d
}

/// `det(lambda Id - H(mu))` as a bivariate polynomial with `coeffs[j][k]` the
/// coefficient of `lambda^j mu^k`.
pub fn char_poly(hs: &HolomorphicStructure, fd: &FundamentalDomain) -> Result<BivariatePoly> {
    let n = fd.length;
    char_poly_family(2 * n, 2 * n * fd.thickness, |mu| holonomy_h(hs, fd, mu))
}

/// Whether `|P(mu, lambda)|` is small relative to the sum of term magnitudes.
pub fn on_spectrum(p: &BivariatePoly, m: Multiplier, tol: f64) -> bool {
    let mut scale = 0.0;
    for (j, row) in p.coeffs.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            scale += c.norm() * m.mu.norm().powi(k as i32) * m.lambda.norm().powi(j as i32);
        }
    }
    p.eval(m.mu, m.lambda).norm() <= tol * scale
}

/// Ordered product of the row connection `psi_{a+1} = -c_br^-1 c_bl psi_a`.
pub fn row_connection_holonomy(hs: &HolomorphicStructure, fd: &FundamentalDomain, row: usize) -> Quaternion {
    (0..fd.length).fold(Quaternion::ONE, |acc, t| {
        let c = local_coeffs(hs, fd, fd.slot(row, t));
        -(c[1].inv() * c[0]) * acc
    })
}

/// The complex eigenvalues `{mu, conj mu}` of the row connection holonomy.
pub fn horizontal_holonomies(hs: &HolomorphicStructure, fd: &FundamentalDomain, row: usize) -> [C64; 2] {
    let g = row_connection_holonomy(hs, fd, row);
    let im = g.imag_norm();
    [C64::new(g.a, im), C64::new(g.a, -im)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genericity {
    pub generic: bool,
    /// Horizontal holonomies per direction, two per row.
    pub ends: [Vec<C64>; 3],
    pub thickness: [usize; 3],
    /// `(direction, i, j)` of a coinciding pair.
    pub witness: Option<(usize, usize, usize)>,
}

impl Genericity {
    pub fn end_count(&self) -> usize {
        self.ends.iter().map(|e| e.len()).sum()
    }
}

pub fn genericity_check(hs: &HolomorphicStructure, torus: &RegularTorus) -> Result<Genericity> {
    let mut ends: [Vec<C64>; 3] = Default::default();
    let mut thickness = [0; 3];
    let mut witness = None;
    for d in 0..3 {
        let fd = fundamental_domain(torus, &torus.adapted_basis(d), 0)?;
        thickness[d] = fd.thickness;
        ends[d] = (0..fd.thickness).flat_map(|r| horizontal_holonomies(hs, &fd, r)).collect();
        let e = &ends[d];
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                if witness.is_none() && (e[i] - e[j]).norm() <= DISTINCT_TOL * e[i].norm().max(e[j].norm()) {
                    witness = Some((d, i, j));
                }
            }
        }
    }
    Ok(Genericity { generic: witness.is_none(), ends, thickness, witness })
}

/// A section with multiplier, stored on a fundamental domain in complexified
/// coordinates `(z1, z2)` per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromySection {
    pub multiplier: Multiplier,
    pub fd: FundamentalDomain,
    pub values: Vec<[C64; 2]>,
    /// Complex dimension of the kernel this section was taken from.
    pub kernel_dim: usize,
    pub sigma_rel: f64,
}

impl MonodromySection {
    pub fn slot_value(&self, slot: usize) -> Quaternion {
        Quaternion::from_pair(self.values[slot][0], self.values[slot][1])
    }

    /// Value at a local lattice point of the domain's frame.
    pub fn value_at(&self, local: Lat) -> Quaternion {
        let w = self.fd.locate(local);
        self.slot_value(w.slot).mul_complex(self.multiplier.factor(w.mu_power, w.lambda_power))
    }

    /// Values per canonical vertex, taken at the domain representatives.
    pub fn vertex_values(&self) -> Vec<Quaternion> {
        let mut out = vec![Quaternion::ZERO; self.values.len()];
        for (slot, &v) in self.fd.vertices.iter().enumerate() {
            out[v] = self.slot_value(slot);
        }
        out
    }

    /// Values at the local corners of the black triangle in `slot`.
    pub fn corner_values(&self, slot: usize) -> [Quaternion; 3] {
        self.fd.black_corners[slot]
            .map(|w| self.slot_value(w.slot).mul_complex(self.multiplier.factor(w.mu_power, w.lambda_power)))
    }

    /// `psi j`, a section with the conjugate multiplier.
    pub fn times_j(&self) -> MonodromySection {
        MonodromySection {
            multiplier: self.multiplier.conj(),
            fd: self.fd.clone(),
            values: self.values.iter().map(|&[z1, z2]| [-z2.conj(), z1.conj()]).collect(),
            kernel_dim: self.kernel_dim,
            sigma_rel: self.sigma_rel,
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Unit kernel vector of `D_{mu,lambda}` with its largest entry real positive.
pub fn eigen_section(hs: &HolomorphicStructure, fd: &FundamentalDomain, m: Multiplier) -> Result<MonodromySection> {
    if m.mu.norm() == 0.0 {
        return Err(Error::InvalidInput("mu must be nonzero".into()));
    }
    let d = assemble_d(hs, fd, m);
    let k = kernel(&d, RANK_TOL);
    let sigma_rel = k.sigma_min_rel();
    if sigma_rel > EIGEN_TOL {
        return Err(Error::EmptyKernel { sigma_rel });
    }
    let v = &k.smallest;
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let phase = v[best].conj() / v[best].norm();
    let count = fd.vertices.len();
    let values = (0..count).map(|s| [v[2 * s] * phase, v[2 * s + 1] * phase]).collect();
    Ok(MonodromySection { multiplier: m, fd: fd.clone(), values, kernel_dim: k.dim().max(1), sigma_rel })
}

/// Slot of the domain holding black triangle `b`.
pub fn slot_of_black(fd: &FundamentalDomain, b: usize) -> usize {
    fd.black.iter().position(|&x| x == b).expect("every black triangle has a slot")
}

/// The prolongation of an eigen-section at black triangle `b` as a point of
/// `CP^3`; its twistor projection is the Darboux transform at `b`.
pub fn f_hat(hs: &HolomorphicStructure, s: &MonodromySection, b: usize) -> Result<CPoint3> {
    let chart = hs.chart.as_ref().ok_or_else(|| Error::InvalidInput("structure has no immersion chart".into()))?;
    let slot = slot_of_black(&s.fd, b);
    let vals = s.corner_values(slot);
    let scale = s.norm();
    if vals.iter().all(|y| y.norm() <= 1e-12 * scale) {
        return Err(Error::SingularAtTriangle { triangle: b });
    }
    let verts = s.fd.black_corners[slot].map(|w| s.fd.vertices[w.slot]);
    let (lift, _) = prolong_triangle(chart, verts, vals);
    CPoint3::new(lift.to_c4())
}

/// `F_hat` at every black triangle.
pub fn f_hat_all(hs: &HolomorphicStructure, s: &MonodromySection) -> Result<Vec<CPoint3>> {
    (0..hs.triangles.len()).map(|b| f_hat(hs, s, b)).collect()
}

/// The two factors of the characteristic polynomial when all coefficients
/// are complex (values in a fixed `CP^1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFactors {
    pub first: BivariatePoly,
    pub second: BivariatePoly,
    /// Max coefficient deviation of `second` from the conjugate of `first`.
    pub conjugate_deviation: f64,
}

fn is_complex(q: &Quaternion, scale: f64) -> bool {
    q.c.abs() <= 1e-12 * scale && q.d.abs() <= 1e-12 * scale
}

/// Sub-block of a complexified matrix on coordinates `z1` (part 0) or `z2` (part 1).
pub fn coordinate_block(m: &CMatrix, part: usize) -> CMatrix {
    let n = m.nrows() / 2;
    CMatrix::from_fn(n, n, |r, c| m[(2 * r + part, 2 * c + part)])
}

/// Factors `det(lambda - H)` along the `z1`/`z2` block structure, if present.
pub fn split_factors(hs: &HolomorphicStructure, fd: &FundamentalDomain) -> Result<Option<SplitFactors>> {
    let scale = hs.coeffs.iter().flatten().map(|q| q.norm()).fold(0.0, f64::max);
    if !hs.coeffs.iter().flatten().all(|q| is_complex(q, scale)) {
        return Ok(None);
    }
    split_family(fd.length, fd.length * fd.thickness, |mu| holonomy_h(hs, fd, mu)).map(Some)
}

/// Characteristic polynomials of the two coordinate blocks of a family of
/// complexified quaternionic `dim x dim` matrices with complex entries.
pub fn split_family<F>(dim: usize, s_degree: usize, family: F) -> Result<SplitFactors>
where
    F: Fn(C64) -> CMatrix + Sync,
{
    let first = char_poly_family(dim, s_degree, |s| coordinate_block(&family(s), 0))?;
    let second = char_poly_family(dim, s_degree, |s| coordinate_block(&family(s), 1))?;
    let mut dev: f64 = 0.0;
    for (ra, rb) in first.coeffs.iter().zip(second.coeffs.iter()) {
        for k in 0..ra.len().max(rb.len()) {
            let a = ra.get(k).copied().unwrap_or_default();
            let b = rb.get(k).copied().unwrap_or_default();
            dev = dev.max((a.conj() - b).norm());
        }
    }
    let conjugate_deviation = dev / first.max_abs().max(1e-300);
    Ok(SplitFactors { first, second, conjugate_deviation })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub multiplier: Multiplier,
    pub min_singular_value: f64,
}

/// Eigenvalues of `H(mu)` for `count` values of `mu` on the unit circle.
pub fn sample_unit_circle(hs: &HolomorphicStructure, fd: &FundamentalDomain, count: usize) -> Vec<SpectrumSample> {
    (0..count)
        .into_par_iter()
        .flat_map_iter(|t| {
            let mu = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (t as f64 + 0.5) / count as f64);
            let h = holonomy_h(hs, fd, mu);
            let mut lams = eigenvalues(&h);
            lams.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            lams.into_iter()
                .map(|lambda| {
                    let m = Multiplier::new(mu, lambda);
                    let k = kernel(&assemble_d(hs, fd, m), RANK_TOL);
                    SpectrumSample { multiplier: m, min_singular_value: k.sigma_min_rel() }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Eigenvalues of `H(mu)` sorted by decreasing modulus, then argument.
pub fn lambda_branches(hs: &HolomorphicStructure, fd: &FundamentalDomain, mu: C64) -> Vec<C64> {
    let mut l = eigenvalues(&holonomy_h(hs, fd, mu));
    l.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
    l
}

/// `lambda` roots of `P(mu, .)`.
pub fn lambda_roots(p: &BivariatePoly, mu: C64) -> Vec<C64> {
    poly_roots(&p.at(mu))
}

/// Characteristic polynomial, ends and samples for direction-0 coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub length: usize,
    pub thickness: usize,
    pub poly: BivariatePoly,
    pub genericity: Genericity,
    pub samples: Vec<SpectrumSample>,
    pub splits: Option<SplitFactors>,
}

pub fn spectral_data(hs: &HolomorphicStructure, torus: &RegularTorus, sample_count: usize) -> Result<SpectralData> {
    let fd = fundamental_domain(torus, &torus.adapted_basis(0), 0)?;
    Ok(SpectralData {
        length: fd.length,
        thickness: fd.thickness,
        poly: char_poly(hs, &fd)?,
        genericity: genericity_check(hs, torus)?,
        samples: sample_unit_circle(hs, &fd, sample_count),
        splits: split_factors(hs, &fd)?,
    })
}

/// A component `y = slope * s + intercept` of the plane curve `P(s, y) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearComponent {
    pub slope: C64,
    pub intercept: C64,
    pub multiplicity: usize,
}

/// Lines contained in `{P = 0}`, each found as a root cluster followed across
/// two probes and accepted when `P(s, slope s + intercept)` vanishes at five more.
pub fn linear_components(p: &BivariatePoly) -> Vec<LinearComponent> {
    let probes = [C64::new(0.61, 0.37), C64::new(-0.45, 0.83)];
    let tests = [C64::new(1.3, -0.2), C64::new(-0.7, -0.9), C64::new(0.2, 1.4), C64::new(-1.1, 0.3), C64::new(0.9, 0.8)];
    let clusters = |s: C64| {
        let row = p.at(s);
        let roots = poly_roots(&row);
        let mut out: Vec<(C64, usize)> = Vec::new();
        for &r in &roots {
            let (z, m) = cluster_root(&row, &roots, r);
            if !out.iter().any(|(w, _)| (w - z).norm() <= 1e-6 * z.norm().max(1.0)) {
                out.push((z, m));
            }
        }
        out
    };
    let (first, second) = (clusters(probes[0]), clusters(probes[1]));
    let mut lines: Vec<LinearComponent> = Vec::new();
    for &(r0, m0) in &first {
        for &(r1, m1) in &second {
            if m0 != m1 {
                continue;
            }
            let slope = (r1 - r0) / (probes[1] - probes[0]);
            let intercept = r0 - slope * probes[0];
            let on_curve = tests.iter().all(|&s| {
                let y = slope * s + intercept;
                let scale: f64 = p.coeffs.iter().enumerate().flat_map(|(j, row)| {
                    row.iter().enumerate().map(move |(k, c)| c.norm() * s.norm().powi(k as i32) * y.norm().powi(j as i32))
                }).sum();
                p.eval(s, y).norm() <= 1e-8 * scale.max(1e-300)
            });
            let seen = lines.iter().any(|l| (l.slope - slope).norm() + (l.intercept - intercept).norm() <= 1e-6);
            if on_curve && !seen {
                lines.push(LinearComponent { slope, intercept, multiplicity: m0 });
            }
        }
    }
    lines.sort_by(|a, b| a.slope.re.total_cmp(&b.slope.re).then(a.intercept.re.total_cmp(&b.intercept.re)));
    lines
}

/// Four-point torus closed form for the double eigenvalue of `H(mu)`, with
/// `x` the values at `(0,0), (1,0), (0,1), (1,1)`.
pub fn four_point_lambda(x: [C64; 4], mu: C64) -> C64 {
    let [x1, x2, x3, x4] = x;
    ((x1 - x3) * (x2 - x4) * mu - (x2 - x3) * (x1 - x4)) / ((x1 - x2) * (x3 - x4))
}

/// Prolongation of an eigen-section on the black triangle in `slot` (original
/// frame) and the relative residual at the third corner.
pub fn prolongation_at(hs: &HolomorphicStructure, s: &MonodromySection, slot: usize) -> (QVec2, f64) {
    let chart = hs.chart.as_ref().expect("induced structure");
    let verts = s.fd.black_corners[slot].map(|w| s.fd.vertices[w.slot]);
    prolong_triangle(chart, verts, s.corner_values(slot))
}

/// The Darboux transform value `F(b)`, the twistor projection of `F_hat(b)`.
pub fn darboux_point(hs: &HolomorphicStructure, s: &MonodromySection, b: usize) -> Result<HPoint> {
    Ok(twistor_project(&f_hat(hs, s, b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::{induced_structure, Immersion};
    use crate::linalg::{det, poly_eval};
    use crate::mesh::{build_regular_torus, thin_torus, LatticeBasis};
    use crate::random::{random_immersion, rng, ValueKind};
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn nine_point(seed: u64, kind: ValueKind) -> (RegularTorus, Immersion, HolomorphicStructure, FundamentalDomain) {
        let t = build_regular_torus(LatticeBasis::new([3, 0], [0, 3])).unwrap();
        let f = random_immersion(&t, &mut rng(seed), kind);
        let hs = induced_structure(&t, &f).unwrap();
        let fd = fundamental_domain(&t, &t.adapted_basis(0), 0).unwrap();
        (t, f, hs, fd)
    }

    fn four_point(x: [C64; 4]) -> (HolomorphicStructure, FundamentalDomain) {
        let t = build_regular_torus(LatticeBasis::new([2, 0], [0, 2])).unwrap();
        assert_eq!(t.vertices, vec![[0, 0], [1, 0], [0, 1], [1, 1]]);
        let f = Immersion::from_affine(&x.map(Quaternion::from_complex));
        let hs = induced_structure(&t, &f).unwrap();
        let fd = fundamental_domain(&t, &t.adapted_basis(0), 0).unwrap();
        (hs, fd)
    }

    #[test]
    fn four_point_torus_holonomy_is_scalar() {
        let x = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let (hs, fd) = four_point(x);
        for mu in [c(1.0, 0.0), c(0.3, -0.7), c(-2.0, 1.5)] {
            let h = holonomy_h(&hs, &fd, mu);
            let want = mu * 4.0 - 3.0;
            assert!((four_point_lambda(x, mu) - want).norm() < 1e-14);
            let z1 = coordinate_block(&h, 0);
            let expect = CMatrix::identity(2, 2) * want;
            assert!((z1 - expect).norm() < 1e-12);
        }
        // both coordinate blocks carry the same scalar, so P = (lambda - (4 mu - 3))^4
        let p = char_poly(&hs, &fd).unwrap();
        assert_eq!((p.y_degree(), p.s_degree()), (4, 4));
        for (mu, lambda) in [(c(0.5, 0.5), c(0.1, -0.3)), (c(-1.0, 0.2), c(2.0, 1.0))] {
            let want = (lambda - (mu * 4.0 - 3.0)).powi(4);
            assert!((p.eval(mu, lambda) - want).norm() < 1e-10 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn four_point_lines() {
        let x = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let (hs, fd) = four_point(x);
        let lines = linear_components(&char_poly(&hs, &fd).unwrap());
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].multiplicity, 4);
        assert!((lines[0].slope - 4.0).norm() < 1e-9 && (lines[0].intercept + 3.0).norm() < 1e-9);
        // complex values: a double line from each coordinate block
        let x = [c(0.1, 0.3), c(0.9, -0.2), c(-0.4, 0.7), c(0.5, 0.8)];
        let (hs, fd) = four_point(x);
        let lines = linear_components(&char_poly(&hs, &fd).unwrap());
        assert_eq!(lines.iter().map(|l| l.multiplicity).collect::<Vec<_>>(), vec![2, 2]);
        let mu = c(0.3, -1.1);
        let want = four_point_lambda(x, mu);
        assert!(lines.iter().any(|l| (l.slope * mu + l.intercept - want).norm() < 1e-9));
        let (_, _, hq, fq) = nine_point(1, ValueKind::Quaternionic);
        assert!(linear_components(&char_poly(&hq, &fq).unwrap()).is_empty());
    }

    #[test]
    fn four_point_torus_random_quadruples() {
        let mut r = rng(11);
        for _ in 0..5 {
            let x = [0; 4].map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let (hs, fd) = four_point(x);
            let mu = c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let h = holonomy_h(&hs, &fd, mu);
            let want = four_point_lambda(x, mu);
            assert!((coordinate_block(&h, 0) - CMatrix::identity(2, 2) * want).norm() < 1e-10 * (1.0 + want.norm()));
            // lambda is a double eigenvalue: the kernel of D is two-dimensional
            let k = kernel(&assemble_d(&hs, &fd, Multiplier::new(mu, want)), 1e-9);
            assert_eq!(k.dim(), 2);
        }
    }

    #[test]
    fn transfer_rows_are_affine_in_mu() {
        let (_, _, hs, fd) = nine_point(1, ValueKind::Quaternionic);
        for r in 0..fd.thickness {
            let t0 = transfer_row(&hs, &fd, r, c(0.0, 0.0));
            let t1 = transfer_row(&hs, &fd, r, c(1.0, 0.0));
            let mu = c(0.4, -1.3);
            let tm = transfer_row(&hs, &fd, r, mu);
            assert!((tm - (t0.clone() + (t1 - t0) * mu)).norm() < 1e-10);
        }
    }

    #[test]
    fn thin_torus_transfer_matches_triangle_solves() {
        let n = 3;
        let t = thin_torus(n).unwrap();
        let f = random_immersion(&t, &mut rng(2), ValueKind::Quaternionic);
        let hs = induced_structure(&t, &f).unwrap();
        let fd = fundamental_domain(&t, &t.adapted_basis(0), 0).unwrap();
        assert_eq!((fd.shift, fd.thickness), (1, 1));
        let mu = c(0.7, 0.2);
        let tm = transfer_row(&hs, &fd, 0, mu);
        // Triangle k has corners k, k+1 and top (k,1) = (k-1,0) + eta, so
        // lambda psi_{k-1} = -c_top^-1 (c_bl psi_k + c_br psi_{k+1}) with
        // psi_n = mu psi_0.
        let mut oracle = CMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            let out = (k + n - 1) % n;
            let wrap_out = if k == 0 { mu } else { c(1.0, 0.0) };
            let [cb, cr, ct] = hs.coeffs[k];
            // the output row is the window [1, n+1): entry out holds point out+1
            let target = out;
            let _ = wrap_out;
            let pos = (k + n - 1) % n;
            assert_eq!(pos, target);
            let f0 = if k == 0 { mu } else { c(1.0, 0.0) };
            let f1 = if k + 1 >= n { f0 * mu } else { f0 };
            let m0 = -(ct.inv() * cb);
            let m1 = -(ct.inv() * cr);
            let b0 = complex_block(m0);
            let b1 = complex_block(m1);
            for i in 0..2 {
                for j in 0..2 {
                    oracle[(2 * target + i, 2 * k + j)] += b0[i][j] * f0;
                    oracle[(2 * target + i, 2 * ((k + 1) % n) + j)] += b1[i][j] * f1;
                }
            }
        }
        // point (1 + t, 1) = eta + (t, 0); triangle k = t + 1 with k = n wrapping to 0
        let mut permuted = CMatrix::zeros(2 * n, 2 * n);
        for out in 0..n {
            let k = (out + 1) % n;
            let src = (k + n - 1) % n;
            for i in 0..2 {
                for j in 0..2 * n {
                    permuted[(2 * out + i, j)] = oracle[(2 * src + i, j)];
                }
            }
        }
        assert!((tm.clone() - permuted).norm() < 1e-12 * tm.norm());
        assert!((holonomy_h(&hs, &fd, mu) - tm).norm() < 1e-14);
    }

    #[test]
    fn kernel_of_d_matches_eigenspaces_of_h() {
        let (_, _, hs, fd) = nine_point(3, ValueKind::Quaternionic);
        let mut r = rng(4);
        for _ in 0..10 {
            let mu = C64::from_polar(r.gen_range(0.5..2.0), r.gen_range(0.0..6.28));
            let h = holonomy_h(&hs, &fd, mu);
            let lams = eigenvalues(&h);
            let lambda = lams[r.gen_range(0..lams.len())];
            let kd = kernel(&assemble_d(&hs, &fd, Multiplier::new(mu, lambda)), 1e-8).dim();
            let shifted = h.clone() - CMatrix::identity(h.nrows(), h.nrows()) * lambda;
            let kh = kernel(&shifted, 1e-8).dim();
            assert_eq!(kd, kh);
            assert!(kd >= 1);
            // off the spectrum D is invertible
            let off = kernel(&assemble_d(&hs, &fd, Multiplier::new(mu, lambda + 0.1)), 1e-8).dim();
            assert_eq!(off, 0);
        }
        assert_eq!(assemble_d(&hs, &fd, Multiplier::new(c(1.0, 0.0), c(1.0, 0.0))).nrows(), 2 * 9);
    }

    #[test]
    fn trivial_multiplier_contains_the_linear_system() {
        let (_, _, hs, fd) = nine_point(5, ValueKind::Quaternionic);
        let d = assemble_d(&hs, &fd, Multiplier::new(c(1.0, 0.0), c(1.0, 0.0)));
        assert!(kernel(&d, 1e-9).dim() >= 4);
        let s = eigen_section(&hs, &fd, Multiplier::new(c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        let chart = hs.chart.as_ref().unwrap();
        // the section is the projection of the constant given by its prolongation
        let (v, _) = prolongation_at(&hs, &s, 0);
        let proj = chart.project(v);
        let vals = s.vertex_values();
        for (a, b) in proj.values.iter().zip(vals.iter()) {
            assert!((*a - *b).norm() < 1e-8);
        }
    }

    #[test]
    fn interpolated_polynomial_matches_determinants() {
        let (_, _, hs, fd) = nine_point(6, ValueKind::Quaternionic);
        let p = char_poly(&hs, &fd).unwrap();
        assert_eq!(p.y_degree(), 6);
        assert!(p.s_degree() <= 18);
        assert!(p.imag_ratio() < 1e-10, "coefficients are real: {}", p.imag_ratio());
        let mut r = rng(7);
        for _ in 0..50 {
            let mu = C64::from_polar(r.gen_range(0.3..2.0), r.gen_range(0.0..6.28));
            let lambda = C64::from_polar(r.gen_range(0.3..2.0), r.gen_range(0.0..6.28));
            let h = holonomy_h(&hs, &fd, mu);
            let direct = det(&(CMatrix::identity(6, 6) * lambda - h));
            let scale: f64 = p.coeffs.iter().enumerate().flat_map(|(j, row)| {
                row.iter().enumerate().map(move |(k, c)| c.norm() * mu.norm().powi(k as i32) * lambda.norm().powi(j as i32))
            }).sum();
            assert!((p.eval(mu, lambda) - direct).norm() < 1e-8 * scale);
            assert_eq!(lambda_roots(&p, mu).len(), 6);
        }
    }

    #[test]
    fn horizontal_holonomies_are_roots_at_lambda_zero() {
        let (t, _, hs, _) = nine_point(8, ValueKind::Quaternionic);
        let g = genericity_check(&hs, &t).unwrap();
        assert!(g.generic);
        assert_eq!(g.thickness, [3, 3, 3]);
        assert_eq!(g.end_count(), 18);
        for d in 0..3 {
            let fd = fundamental_domain(&t, &t.adapted_basis(d), 0).unwrap();
            let p = char_poly(&hs, &fd).unwrap();
            let at_zero = p.at_y(c(0.0, 0.0));
            let scale = at_zero.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for r in 0..fd.thickness {
                let [m1, m2] = horizontal_holonomies(&hs, &fd, r);
                assert!((m1 - m2.conj()).norm() < 1e-15);
                let mag: f64 = at_zero.iter().enumerate().map(|(k, c)| c.norm() * m1.norm().powi(k as i32)).sum();
                assert!(poly_eval(&at_zero, m1).norm() < 1e-8 * mag.max(scale));
            }
        }
    }

    #[test]
    fn row_symmetric_immersion_is_not_generic() {
        let t = build_regular_torus(LatticeBasis::new([3, 0], [0, 3])).unwrap();
        let mut r = rng(9);
        let g: Vec<Quaternion> = (0..3).map(|_| crate::random::random_quaternion(&mut r)).collect();
        let theta = 2.0 * std::f64::consts::PI / 3.0;
        let u = Quaternion::new(0.0, 0.6, 0.0, 0.8);
        let q = Quaternion::real(theta.cos()) + u * theta.sin();
        let values: Vec<Quaternion> = t.vertices.iter().map(|&[a, b]| {
            (0..b).fold(g[a as usize], |acc, _| q * acc)
        }).collect();
        let f = Immersion::from_affine(&values);
        let hs = induced_structure(&t, &f).unwrap();
        let gen = genericity_check(&hs, &t).unwrap();
        assert!(!gen.generic);
        assert_eq!(gen.witness.map(|w| w.0), Some(0));
    }

    #[test]
    fn eigen_sections_and_quaternionic_symmetry() {
        let (_, _, hs, fd) = nine_point(10, ValueKind::Quaternionic);
        let mu = C64::from_polar(1.3, 0.9);
        let lambda = lambda_branches(&hs, &fd, mu)[1];
        let s = eigen_section(&hs, &fd, Multiplier::new(mu, lambda)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let d = assemble_d(&hs, &fd, s.multiplier);
        let v = nalgebra::DVector::from_iterator(18, s.values.iter().flat_map(|p| [p[0], p[1]]));
        assert!((d.clone() * v).norm() < 1e-9 * d.norm());
        let sj = s.times_j();
        let dj = assemble_d(&hs, &fd, sj.multiplier);
        let vj = nalgebra::DVector::from_iterator(18, sj.values.iter().flat_map(|p| [p[0], p[1]]));
        assert!((dj * vj).norm() < 1e-9 * d.norm());
        // F_hat(b, rho sigma) = F_hat(b, sigma) j
        let s2 = eigen_section(&hs, &fd, s.multiplier.conj()).unwrap();
        for b in 0..9 {
            let a = f_hat(&hs, &s2, b).unwrap();
            let want = f_hat(&hs, &sj, b).unwrap();
            assert!(a.distance(&want) < 1e-8);
        }
        assert!(matches!(
            eigen_section(&hs, &fd, Multiplier::new(mu, lambda * 1.5)),
            Err(Error::EmptyKernel { .. })
        ));
    }

    #[test]
    fn sections_at_ends_vanish_above_their_row() {
        let (_, f, hs, fd) = nine_point(12, ValueKind::Quaternionic);
        for r in 0..fd.thickness {
            let [mu, _] = horizontal_holonomies(&hs, &fd, r);
            let s = eigen_section(&hs, &fd, Multiplier::new(mu, c(0.0, 0.0))).unwrap();
            for slot in 0..9 {
                let row = slot / fd.length;
                let v = s.slot_value(slot).norm();
                if row > r {
                    assert!(v < 1e-9, "row {row} above {r}: {v}");
                }
            }
            for t in 0..fd.length {
                let slot = fd.slot(r, t);
                let b = fd.black[slot];
                let top = fd.vertices[fd.black_corners[slot][2].slot];
                let p = darboux_point(&hs, &s, b).unwrap();
                assert!(p.distance(&f.points[top]) < 1e-8);
            }
        }
    }

    #[test]
    fn complex_immersions_split() {
        let (_, _, hs, fd) = nine_point(13, ValueKind::Complex);
        let sp = split_factors(&hs, &fd).unwrap().unwrap();
        assert!(sp.conjugate_deviation < 1e-9);
        let p = char_poly(&hs, &fd).unwrap();
        let mut r = rng(14);
        for _ in 0..5 {
            let mu = C64::from_polar(r.gen_range(0.5..1.5), r.gen_range(0.0..6.28));
            let lambda = C64::from_polar(r.gen_range(0.5..1.5), r.gen_range(0.0..6.28));
            let prod = sp.first.eval(mu, lambda) * sp.second.eval(mu, lambda);
            assert!((prod - p.eval(mu, lambda)).norm() < 1e-8 * (1.0 + prod.norm()));
        }
        let (_, _, hq, fq) = nine_point(13, ValueKind::Quaternionic);
        assert!(split_factors(&hq, &fq).unwrap().is_none());
    }

    #[test]
    fn unit_circle_samples_lie_on_the_spectrum() {
        let (_, _, hs, fd) = nine_point(15, ValueKind::Quaternionic);
        let p = char_poly(&hs, &fd).unwrap();
        let samples = sample_unit_circle(&hs, &fd, 4);
        assert_eq!(samples.len(), 4 * 6);
        for s in samples {
            assert!(on_spectrum(&p, s.multiplier, 1e-8));
            assert!(s.min_singular_value < 1e-9);
        }
    }
}
