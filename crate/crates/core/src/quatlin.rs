//! Quaternions, quaternionic 2-vectors and lines, and their complexification.
//!
//! A quaternion `q = a + b i + c j + d k` is written `q = z1 + j z2` with
//! `z1 = a + b i` and `z2 = c - d i`. The complex structure on `H^n` is right
//! multiplication by `i`, which acts diagonally in these coordinates.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix used for complexified operators.
pub type CMatrix = DMatrix<C64>;

/// Relative size below which a difference counts as zero.
pub const INVERTIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub const fn real(a: f64) -> Self {
        Quaternion::new(a, 0.0, 0.0, 0.0)
    }

    pub fn from_complex(z: C64) -> Self {
        Quaternion::new(z.re, z.im, 0.0, 0.0)
    }

    /// Builds `z1 + j z2`.
    pub fn from_pair(z1: C64, z2: C64) -> Self {
        Quaternion::new(z1.re, z1.im, z2.re, -z2.im)
    }

    /// Returns `(z1, z2)` with `self = z1 + j z2`.
    pub fn to_pair(self) -> (C64, C64) {
        (C64::new(self.a, self.b), C64::new(self.c, -self.d))
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse; infinite components for zero input.
    pub fn inv(self) -> Self {
        self.conj() * (1.0 / self.norm_sqr())
    }

    /// Norm of the imaginary part.
    pub fn imag_norm(self) -> f64 {
        (self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// The conjugacy class of `self` as `(real part, norm)`.
    pub fn conjugacy_pair(self) -> (f64, f64) {
        (self.a, self.norm())
    }

    /// Right multiplication by a complex number.
    pub fn mul_complex(self, z: C64) -> Self {
        self * Quaternion::from_complex(z)
    }

    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Quaternion::new(v[0], v[1], v[2], v[3])
    }
}

/// Hamilton product with `ij = k`.
pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self * (1.0 / s)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

/// The 2x2 complex block of left multiplication by `w`.
pub fn complex_block(w: Quaternion) -> [[C64; 2]; 2] {
    let (w1, w2) = w.to_pair();
    [[w1, -w2.conj()], [w2, w1.conj()]]
}

/// Complexifies an `n x n` quaternionic matrix given row-major.
pub fn complexify(entries: &[Quaternion], n: usize) -> CMatrix {
    assert_eq!(entries.len(), n * n, "expected {} entries", n * n);
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let blk = complex_block(entries[r * n + c]);
            for i in 0..2 {
                for j in 0..2 {
                    m[(2 * r + i, 2 * c + j)] = blk[i][j];
                }
            }
        }
    }
    m
}

/// Inverse of [`complexify`]. Fails if `m` does not commute with the
/// quaternionic structure.
pub fn decomplexify(m: &CMatrix) -> Result<Vec<Quaternion>> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
        return Err(Error::InvalidInput("matrix must be square of even size".into()));
    }
    let n = m.nrows() / 2;
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let w1 = m[(2 * r, 2 * c)];
            let w2 = m[(2 * r + 1, 2 * c)];
            let dev = (m[(2 * r, 2 * c + 1)] + w2.conj()).norm()
                + (m[(2 * r + 1, 2 * c + 1)] - w1.conj()).norm();
            if dev > 1e-9 * scale {
                return Err(Error::InvalidInput("matrix is not quaternionic".into()));
            }
            out.push(Quaternion::from_pair(w1, w2));
        }
    }
    Ok(out)
}

/// An element of `H^2`, scaled by quaternions from the right.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QVec2 {
    pub x0: Quaternion,
    pub x1: Quaternion,
}

impl QVec2 {
    pub const fn new(x0: Quaternion, x1: Quaternion) -> Self {
        QVec2 { x0, x1 }
    }

    pub fn scale(self, q: Quaternion) -> Self {
        QVec2::new(self.x0 * q, self.x1 * q)
    }

    pub fn scale_complex(self, z: C64) -> Self {
        self.scale(Quaternion::from_complex(z))
    }

    pub fn norm_sqr(self) -> f64 {
        self.x0.norm_sqr() + self.x1.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Quaternionic hermitian product `conj(v0) w0 + conj(v1) w1`.
    pub fn inner(self, w: QVec2) -> Quaternion {
        self.x0.conj() * w.x0 + self.x1.conj() * w.x1
    }

    /// Coordinates in `C^4 = (H^2, i)`.
    pub fn to_c4(self) -> [C64; 4] {
        let (a1, a2) = self.x0.to_pair();
        let (b1, b2) = self.x1.to_pair();
        [a1, a2, b1, b2]
    }

    pub fn from_c4(v: [C64; 4]) -> Self {
        QVec2::new(Quaternion::from_pair(v[0], v[1]), Quaternion::from_pair(v[2], v[3]))
    }

    pub fn is_finite(self) -> bool {
        self.x0.is_finite() && self.x1.is_finite()
    }
}

impl Add for QVec2 {
    type Output = QVec2;
    fn add(self, o: QVec2) -> QVec2 {
        QVec2::new(self.x0 + o.x0, self.x1 + o.x1)
    }
}

impl Sub for QVec2 {
    type Output = QVec2;
    fn sub(self, o: QVec2) -> QVec2 {
        QVec2::new(self.x0 - o.x0, self.x1 - o.x1)
    }
}

impl Neg for QVec2 {
    type Output = QVec2;
    fn neg(self) -> QVec2 {
        QVec2::new(-self.x0, -self.x1)
    }
}

/// A quaternionic-linear map of `H^2`, acting by left multiplication of entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QMat2 {
    pub m: [[Quaternion; 2]; 2],
}

impl QMat2 {
    pub const IDENTITY: QMat2 = QMat2 {
        m: [[Quaternion::ONE, Quaternion::ZERO], [Quaternion::ZERO, Quaternion::ONE]],
    };
    pub const ZERO: QMat2 = QMat2 { m: [[Quaternion::ZERO; 2]; 2] };

    pub fn new(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> Self {
        QMat2 { m: [[a, b], [c, d]] }
    }

    pub fn apply(&self, v: QVec2) -> QVec2 {
        QVec2::new(
            self.m[0][0] * v.x0 + self.m[0][1] * v.x1,
            self.m[1][0] * v.x0 + self.m[1][1] * v.x1,
        )
    }

    pub fn compose(&self, o: &QMat2) -> QMat2 {
        let mut out = QMat2::ZERO;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] = self.m[r][0] * o.m[0][c] + self.m[r][1] * o.m[1][c];
            }
        }
        out
    }

    pub fn add(&self, o: &QMat2) -> QMat2 {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] += o.m[r][c];
            }
        }
        out
    }

    pub fn entries(&self) -> [Quaternion; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn complexify(&self) -> CMatrix {
        complexify(&self.entries(), 2)
    }

    pub fn from_complex(m: &CMatrix) -> Result<QMat2> {
        if m.nrows() != 4 || m.ncols() != 4 {
            return Err(Error::InvalidInput("expected a 4x4 matrix".into()));
        }
        let e = decomplexify(m)?;
        Ok(QMat2::new(e[0], e[1], e[2], e[3]))
    }

    pub fn inverse(&self) -> Option<QMat2> {
        let inv = self.complexify().try_inverse()?;
        QMat2::from_complex(&inv).ok()
    }

    /// Fractional linear action `(a x + b)(c x + d)^-1` on the affine chart.
    pub fn mobius(&self, x: Quaternion) -> Quaternion {
        let num = self.m[0][0] * x + self.m[0][1];
        let den = self.m[1][0] * x + self.m[1][1];
        num * den.inv()
    }
}

/// A quaternionic line `v H` in `H^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    rep: QVec2,
}

impl HPoint {
    pub fn new(rep: QVec2) -> Result<Self> {
        let n = rep.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("representative must be nonzero and finite".into()));
        }
        Ok(HPoint { rep: rep.scale(Quaternion::real(1.0 / n)) })
    }

    /// The line through `(x, 1)`.
    pub fn from_affine(x: Quaternion) -> Self {
        HPoint::new(QVec2::new(x, Quaternion::ONE)).expect("(x,1) is nonzero")
    }

    /// The line `[1, 0]`.
    pub fn infinity() -> Self {
        HPoint { rep: QVec2::new(Quaternion::ONE, Quaternion::ZERO) }
    }

    /// Unit-norm representative.
    pub fn rep(&self) -> QVec2 {
        self.rep
    }

    /// `x0 x1^-1`, or `None` at infinity.
    pub fn affine(&self) -> Option<Quaternion> {
        if self.rep.x1.norm() < 1e-14 {
            None
        } else {
            Some(self.rep.x0 * self.rep.x1.inv())
        }
    }

    /// Chordal distance `sqrt(1 - |<v,w>|^2)` of unit representatives,
    /// evaluated as the norm of the orthogonal component.
    pub fn distance(&self, other: &HPoint) -> f64 {
        let h = self.rep.inner(other.rep);
        (other.rep - self.rep.scale(h)).norm()
    }

    pub fn transform(&self, m: &QMat2) -> Result<HPoint> {
        HPoint::new(m.apply(self.rep))
    }
}

/// A complex line in `C^4 = (H^2, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPoint3 {
    rep: [C64; 4],
}

impl CPoint3 {
    pub fn new(rep: [C64; 4]) -> Result<Self> {
        let n = rep.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("representative must be nonzero and finite".into()));
        }
        Ok(CPoint3 { rep: rep.map(|z| z / n) })
    }

    pub fn rep(&self) -> [C64; 4] {
        self.rep
    }

    /// Fubini-Study chordal distance.
    pub fn distance(&self, other: &CPoint3) -> f64 {
        let s: C64 = self.rep.iter().zip(other.rep.iter()).map(|(a, b)| a.conj() * b).sum();
        self.rep
            .iter()
            .zip(other.rep.iter())
            .map(|(a, b)| (b - a * s).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// The quaternionic span of a complex line.
pub fn twistor_project(p: &CPoint3) -> HPoint {
    HPoint::new(QVec2::from_c4(p.rep)).expect("nonzero by construction")
}

fn check_invertible(xs: &[Quaternion], diffs: &[Quaternion]) -> Result<()> {
    let scale = xs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    for (index, d) in diffs.iter().enumerate() {
        if d.norm() <= INVERTIBILITY_TOL * scale || scale == 0.0 {
            return Err(Error::NonInvertibleDifference { index });
        }
    }
    Ok(())
}

/// `(x1-x2)(x2-x3)^-1(x3-x4)(x4-x5)^-1(x5-x6)(x6-x1)^-1`.
pub fn multi_ratio6(x: &[Quaternion; 6]) -> Result<Quaternion> {
    let d: Vec<Quaternion> = (0..6).map(|k| x[k] - x[(k + 1) % 6]).collect();
    check_invertible(x, &d)?;
    Ok(d[0] * d[1].inv() * d[2] * d[3].inv() * d[4] * d[5].inv())
}

/// `(z1-z2)(z2-z3)^-1(z3-z4)(z4-z1)^-1`.
pub fn cross_ratio4(z: &[Quaternion; 4]) -> Result<Quaternion> {
    let d = [z[0] - z[1], z[1] - z[2], z[2] - z[3], z[3] - z[0]];
    check_invertible(z, &[d[1], d[3]]).map_err(|e| match e {
        Error::NonInvertibleDifference { index } => {
            Error::NonInvertibleDifference { index: 2 * index + 1 }
        }
        e => e,
    })?;
    Ok(d[0] * d[1].inv() * d[2] * d[3].inv())
}

/// Projections `P` onto `A` along `B` and `Q` onto `B` along `A`.
pub fn splitting_projections(a: &HPoint, b: &HPoint) -> Result<(QMat2, QMat2)> {
    if a.distance(b) < INVERTIBILITY_TOL {
        return Err(Error::DegenerateSplitting);
    }
    let (u, v) = (a.rep(), b.rep());
    let s = QMat2::new(u.x0, v.x0, u.x1, v.x1);
    let s_inv = s.inverse().ok_or(Error::DegenerateSplitting)?;
    let e0 = QMat2::new(Quaternion::ONE, Quaternion::ZERO, Quaternion::ZERO, Quaternion::ZERO);
    let e1 = QMat2::new(Quaternion::ZERO, Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE);
    Ok((s.compose(&e0).compose(&s_inv), s.compose(&e1).compose(&s_inv)))
}
