//! Bi-colored triangulated tori obtained as lattice quotients of the
//! equilateral triangulation.
//!
//! Lattice points are integer pairs `(a, b)` embedded as `a (1,0) + b (1/2, sqrt3/2)`.
//! The black triangle `up(a,b)` has vertices `(a,b), (a+1,b), (a,b+1)` and the
//! white triangle `down(a,b)` has vertices `(a+1,b), (a+1,b+1), (a,b+1)`, both
//! listed counterclockwise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Lat = [i64; 2];

/// Edge directions in order `(1,0)`, `(0,1)`, `(-1,1)`.
pub const EDGE_DIRECTIONS: [Lat; 3] = [[1, 0], [0, 1], [-1, 1]];

/// Neighbor offsets around a vertex, counterclockwise from `(1,0)`.
pub const NEIGHBOR_OFFSETS: [Lat; 6] = [[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]];

pub fn add(p: Lat, q: Lat) -> Lat {
    [p[0] + q[0], p[1] + q[1]]
}

pub fn sub(p: Lat, q: Lat) -> Lat {
    [p[0] - q[0], p[1] - q[1]]
}

fn scale(p: Lat, k: i64) -> Lat {
    [p[0] * k, p[1] * k]
}

/// Rotation by 120 degrees, which maps black triangles to black triangles.
pub fn rot120(p: Lat) -> Lat {
    [-p[0] - p[1], p[0]]
}

/// `rot120` applied `k` times.
pub fn rot120_pow(p: Lat, k: usize) -> Lat {
    (0..k % 3).fold(p, |q, _| rot120(q))
}

/// Squared Euclidean length in the equilateral embedding.
pub fn quad(u: Lat) -> i64 {
    u[0] * u[0] + u[0] * u[1] + u[1] * u[1]
}

/// Twice the Euclidean inner product in the equilateral embedding.
pub fn dot2(u: Lat, v: Lat) -> i64 {
    2 * u[0] * v[0] + u[0] * v[1] + u[1] * v[0] + 2 * u[1] * v[1]
}

/// Exact test `angle(u, v) <= pi/3`.
pub fn angle_at_most_60(u: Lat, v: Lat) -> bool {
    let d = dot2(u, v);
    d >= 0 && (d as i128) * (d as i128) >= (quad(u) as i128) * (quad(v) as i128)
}

pub fn embed(p: Lat) -> Complex64 {
    Complex64::new(p[0] as f64 + 0.5 * p[1] as f64, 0.75f64.sqrt() * p[1] as f64)
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    ext_gcd(a, b).0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBasis {
    pub gamma: Lat,
    pub eta: Lat,
}

impl LatticeBasis {
    pub fn new(gamma: Lat, eta: Lat) -> Self {
        LatticeBasis { gamma, eta }
    }

    pub fn det(&self) -> i64 {
        self.gamma[0] * self.eta[1] - self.gamma[1] * self.eta[0]
    }

    fn rotated(&self, k: usize) -> LatticeBasis {
        LatticeBasis::new(rot120_pow(self.gamma, k), rot120_pow(self.eta, k))
    }
}

/// Hermite normal form `(p,0), (r,q)` with `0 <= r < p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Hnf {
    p: i64,
    r: i64,
    q: i64,
}

impl Hnf {
    fn of(basis: &LatticeBasis) -> Result<Hnf> {
        let det = basis.det();
        if det <= 0 {
            return Err(Error::NonPositiveBasis);
        }
        let (g, e) = (basis.gamma, basis.eta);
        let (q, u, v) = ext_gcd(g[1], e[1]);
        let p = det / q;
        let w = add(scale(g, u), scale(e, v));
        debug_assert_eq!(w[1], q);
        Ok(Hnf { p, r: w[0].rem_euclid(p), q })
    }

    fn reduce(&self, x: Lat) -> Lat {
        let k = x[1].div_euclid(self.q);
        let a = (x[0] - k * self.r).rem_euclid(self.p);
        [a, x[1] - k * self.q]
    }

    fn index(&self, x: Lat) -> usize {
        let y = self.reduce(x);
        (y[1] * self.p + y[0]) as usize
    }
}

/// Common view of a triangulated surface with black triangles.
pub trait Triangulation {
    fn vertex_count(&self) -> usize;
    /// Black triangles as counterclockwise vertex triples.
    fn black_triangles(&self) -> &[[usize; 3]];

    /// Every edge as an ordered pair; each edge lies in exactly one black triangle.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.black_triangles()
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .collect()
    }
}

/// A torus with regular combinatorics.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularTorus {
    pub basis: LatticeBasis,
    hnf: Hnf,
    /// Canonical lattice representative of each vertex.
    pub vertices: Vec<Lat>,
    /// `black[i]` is `up(vertices[i])`.
    pub black: Vec<[usize; 3]>,
    /// `white[i]` is `down(vertices[i])`.
    pub white: Vec<[usize; 3]>,
    /// Neighbors in the order of [`NEIGHBOR_OFFSETS`].
    pub neighbors: Vec<[usize; 6]>,
}

impl Triangulation for RegularTorus {
    fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn black_triangles(&self) -> &[[usize; 3]] {
        &self.black
    }
}

pub fn build_regular_torus(basis: LatticeBasis) -> Result<RegularTorus> {
    let hnf = Hnf::of(&basis)?;
    let zero = hnf.index([0, 0]);
    if EDGE_DIRECTIONS.iter().any(|&e| hnf.index(e) == zero) {
        return Err(Error::NonRegularQuotient);
    }
    let mut vertices = Vec::with_capacity((hnf.p * hnf.q) as usize);
    for b in 0..hnf.q {
        for a in 0..hnf.p {
            vertices.push([a, b]);
        }
    }
    let idx = |x: Lat| hnf.index(x);
    let black = vertices
        .iter()
        .map(|&v| [idx(v), idx(add(v, [1, 0])), idx(add(v, [0, 1]))])
        .collect();
    let white = vertices
        .iter()
        .map(|&v| [idx(add(v, [1, 0])), idx(add(v, [1, 1])), idx(add(v, [0, 1]))])
        .collect();
    let neighbors = vertices
        .iter()
        .map(|&v| NEIGHBOR_OFFSETS.map(|o| idx(add(v, o))))
        .collect();
    Ok(RegularTorus { basis, hnf, vertices, black, white, neighbors })
}

/// The thin torus of length `n`: black triangle `k` has lower-left vertex `k`,
/// and white triangle `k` has upper-right vertex `k`.
pub fn thin_torus(n: usize) -> Result<RegularTorus> {
    if n < 3 {
        return Err(Error::TooSmall { n });
    }
    build_regular_torus(LatticeBasis::new([n as i64, 0], [1, 1]))
}

impl RegularTorus {
    /// Canonical representative of a lattice point.
    pub fn reduce(&self, x: Lat) -> Lat {
        self.hnf.reduce(x)
    }

    /// Vertex index of a lattice point; also the index of `up(x)` and `down(x)`.
    pub fn index_of(&self, x: Lat) -> usize {
        self.hnf.index(x)
    }

    pub fn in_lattice(&self, x: Lat) -> bool {
        self.hnf.reduce(x) == [0, 0]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Black triangles sharing an edge with `down(a,b)`:
    /// `[up(a,b), up(a+1,b), up(a,b+1)]`.
    pub fn white_neighbors(&self, w: usize) -> [usize; 3] {
        let v = self.vertices[w];
        [self.index_of(v), self.index_of(add(v, [1, 0])), self.index_of(add(v, [0, 1]))]
    }

    /// The three black triangles containing vertex `v`.
    pub fn vertex_black_star(&self, v: usize) -> [usize; 3] {
        let p = self.vertices[v];
        [self.index_of(p), self.index_of(sub(p, [1, 0])), self.index_of(sub(p, [0, 1]))]
    }

    /// Normalized adapted basis whose `gamma` points along edge direction
    /// `rot120^d (1,0)`.
    pub fn adapted_basis(&self, direction: usize) -> LatticeBasis {
        let k = (3 - direction % 3) % 3;
        let local = Hnf::of(&self.basis.rotated(k)).expect("basis is positive");
        LatticeBasis::new(
            rot120_pow([local.p, 0], direction),
            rot120_pow([local.r, local.q], direction),
        )
    }
}

/// The direction `d` for which `gamma` is a positive multiple of `rot120^d (1,0)`.
pub fn basis_direction(basis: &LatticeBasis) -> Option<usize> {
    (0..3).find(|&d| {
        let g = rot120_pow(basis.gamma, (3 - d) % 3);
        g[1] == 0 && g[0] > 0
    })
}

/// Replaces `eta` by the unique `eta + k gamma` with
/// `angle(gamma, eta) <= pi/3 < angle(gamma, eta - gamma)`.
pub fn normalize_adapted_basis(basis: &LatticeBasis) -> Result<LatticeBasis> {
    if basis.det() <= 0 {
        return Err(Error::NonPositiveBasis);
    }
    let d = basis_direction(basis).ok_or(Error::NotAdapted)?;
    let k = (3 - d) % 3;
    let g = rot120_pow(basis.gamma, k);
    let e = rot120_pow(basis.eta, k);
    let x = e[0].rem_euclid(g[0]);
    Ok(LatticeBasis::new(basis.gamma, rot120_pow([x, e[1]], d)))
}

/// Location of a lattice point relative to a fundamental domain: the value of a
/// section with multipliers `(mu, lambda)` there is
/// `value[slot] * mu^mu_power * lambda^lambda_power`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wrap {
    pub slot: usize,
    pub mu_power: i64,
    pub lambda_power: i64,
}

/// A fundamental domain compatible with a normalized adapted basis.
///
/// Local coordinates are rotated so that `gamma = (n, 0)` and `eta = (x, m)`.
/// Row `r` holds the local points `(s_r + t, r)` with `0 <= t < n` and
/// `s_r = ceil(r x / m)`; slot `r n + t` refers to that point.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalDomain {
    pub direction: usize,
    pub basis: LatticeBasis,
    pub length: usize,
    pub thickness: usize,
    pub shift: i64,
    /// `s_r` for `r = 0..=m`; `s_m = x`.
    pub row_starts: Vec<i64>,
    pub base_vertex: usize,
    base: Lat,
    /// Canonical vertex index per slot.
    pub vertices: Vec<usize>,
    /// Canonical black triangle per slot; the triangle with local corners
    /// `(a,r), (a+1,r), (a,r+1)`.
    pub black: Vec<usize>,
    /// For each slot and local corner, the position of that corner in the
    /// canonical vertex order of `black[slot]`.
    pub black_positions: Vec<[usize; 3]>,
    /// Wrap data of the local corners of each black triangle.
    pub black_corners: Vec<[Wrap; 3]>,
}

impl FundamentalDomain {
    pub fn slot(&self, row: usize, t: usize) -> usize {
        row * self.length + t
    }

    /// Local coordinates of a slot.
    pub fn local(&self, slot: usize) -> Lat {
        let (r, t) = (slot / self.length, slot % self.length);
        [self.row_starts[r] + t as i64, r as i64]
    }

    pub fn to_global(&self, local: Lat) -> Lat {
        add(self.base, rot120_pow(local, self.direction))
    }

    pub fn to_local(&self, global: Lat) -> Lat {
        rot120_pow(sub(global, self.base), (3 - self.direction) % 3)
    }

    pub fn locate(&self, local: Lat) -> Wrap {
        let (n, m) = (self.length as i64, self.thickness as i64);
        let l = local[1].div_euclid(m);
        let r = local[1] - l * m;
        let a = local[0] - l * self.shift;
        let s = self.row_starts[r as usize];
        let k = (a - s).div_euclid(n);
        let t = a - s - k * n;
        Wrap { slot: (r * n + t) as usize, mu_power: k, lambda_power: l }
    }
}

pub fn fundamental_domain(
    torus: &RegularTorus,
    basis: &LatticeBasis,
    base_vertex: usize,
) -> Result<FundamentalDomain> {
    let normalized = normalize_adapted_basis(basis)?;
    if normalized != *basis || build_regular_torus(*basis).map(|t| t.hnf) != Ok(torus.hnf) {
        return Err(Error::InvalidInput("basis is not a normalized adapted basis of the torus".into()));
    }
    let direction = basis_direction(basis).ok_or(Error::NotAdapted)?;
    let k = (3 - direction) % 3;
    let g = rot120_pow(basis.gamma, k);
    let e = rot120_pow(basis.eta, k);
    let (n, x, m) = (g[0], e[0], e[1]);
    let row_starts: Vec<i64> = (0..=m).map(|r| (r * x + m - 1).div_euclid(m)).collect();
    let mut fd = FundamentalDomain {
        direction,
        basis: *basis,
        length: n as usize,
        thickness: m as usize,
        shift: x,
        row_starts,
        base_vertex,
        base: torus.vertices[base_vertex],
        vertices: Vec::new(),
        black: Vec::new(),
        black_positions: Vec::new(),
        black_corners: Vec::new(),
    };
    let count = (n * m) as usize;
    for slot in 0..count {
        let p = fd.local(slot);
        fd.vertices.push(torus.index_of(fd.to_global(p)));
        let corners = [p, add(p, [1, 0]), add(p, [0, 1])];
        let global = corners.map(|c| fd.to_global(c));
        let ll = *global
            .iter()
            .find(|&&q| {
                let rel: Vec<Lat> = global.iter().map(|&z| sub(z, q)).collect();
                rel.contains(&[1, 0]) && rel.contains(&[0, 1])
            })
            .expect("rotations preserve black triangles");
        let positions = global.map(|z| match sub(z, ll) {
            [0, 0] => 0,
            [1, 0] => 1,
            _ => 2,
        });
        fd.black.push(torus.index_of(ll));
        fd.black_positions.push(positions);
        fd.black_corners.push(corners.map(|c| fd.locate(c)));
    }
    Ok(fd)
}

/// Which generation of the cyclic derivation `M -> M' -> M'' -> M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generation {
    Original,
    Prime,
    DoublePrime,
}

impl Generation {
    pub fn next(self) -> Generation {
        match self {
            Generation::Original => Generation::Prime,
            Generation::Prime => Generation::DoublePrime,
            Generation::DoublePrime => Generation::Original,
        }
    }
}

/// The derived decomposition: vertices are the black triangles of the parent,
/// black triangles are the parent's white triangles and white triangles are the
/// parent's vertices.
///
/// For a lattice quotient the derived surface is the same lattice quotient,
/// shifted by the centroid of `up(0,0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedDecomposition {
    pub generation: Generation,
    pub torus: RegularTorus,
    pub vertex_to_parent_black: Vec<usize>,
    pub black_to_parent_white: Vec<usize>,
    pub white_to_parent_vertex: Vec<usize>,
}

pub fn derive(torus: &RegularTorus) -> DerivedDecomposition {
    derive_from(torus, Generation::Original)
}

fn derive_from(torus: &RegularTorus, parent: Generation) -> DerivedDecomposition {
    let n = torus.len();
    DerivedDecomposition {
        generation: parent.next(),
        torus: torus.clone(),
        vertex_to_parent_black: (0..n).collect(),
        black_to_parent_white: (0..n).collect(),
        white_to_parent_vertex: torus.vertices.iter().map(|&v| torus.index_of(add(v, [1, 1]))).collect(),
    }
}

impl DerivedDecomposition {
    pub fn derive(&self) -> DerivedDecomposition {
        derive_from(&self.torus, self.generation)
    }
}

fn same_cycle(a: [usize; 3], b: [usize; 3]) -> bool {
    (0..3).any(|s| (0..3).all(|k| a[(k + s) % 3] == b[k]))
}

/// Whether `vertex_map` is an isomorphism of bi-colored triangulations.
pub fn is_isomorphism(from: &RegularTorus, to: &RegularTorus, vertex_map: &[usize]) -> bool {
    if from.len() != to.len() || vertex_map.len() != from.len() {
        return false;
    }
    let mut seen = vec![false; to.len()];
    for &v in vertex_map {
        if v >= to.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let image = |t: &[usize; 3]| t.map(|v| vertex_map[v]);
    let covers = |src: &[[usize; 3]], dst: &[[usize; 3]]| {
        src.iter().all(|t| dst.iter().any(|&u| same_cycle(image(t), u)))
    };
    covers(&from.black, &to.black) && covers(&from.white, &to.white)
}

/// A parallelogram `[0,w] x [0,h]` of the planar triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarPatch {
    pub width: usize,
    pub height: usize,
    pub vertices: Vec<Lat>,
    pub black: Vec<[usize; 3]>,
}

impl PlanarPatch {
    pub fn parallelogram(width: usize, height: usize) -> PlanarPatch {
        let idx = |a: usize, b: usize| b * (width + 1) + a;
        let mut vertices = Vec::new();
        for b in 0..=height {
            for a in 0..=width {
                vertices.push([a as i64, b as i64]);
            }
        }
        let mut black = Vec::new();
        for b in 0..height {
            for a in 0..width {
                black.push([idx(a, b), idx(a + 1, b), idx(a, b + 1)]);
            }
        }
        PlanarPatch { width, height, vertices, black }
    }

    pub fn position(&self, v: usize) -> Complex64 {
        embed(self.vertices[v])
    }
}

impl Triangulation for PlanarPatch {
    fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn black_triangles(&self) -> &[[usize; 3]] {
        &self.black
    }
}
