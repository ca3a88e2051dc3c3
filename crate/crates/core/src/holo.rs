//! Holomorphic structures on line bundles over discrete surfaces, handled in a
//! trivialization, and the Kodaira correspondence.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{PlanarPatch, Triangulation};
use crate::quatlin::{HPoint, QMat2, QVec2, Quaternion, INVERTIBILITY_TOL};

/// Holomorphicity threshold for relative residuals.
pub const HOLOMORPHIC_TOL: f64 = 1e-9;

/// Points closer than this to `[1,0]` trigger a Möbius normalization.
pub const INFINITY_TOL: f64 = 1e-6;

/// Per-vertex lines `f(p) = L_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Immersion {
    pub points: Vec<HPoint>,
}

impl Immersion {
    pub fn new(points: Vec<HPoint>) -> Self {
        Immersion { points }
    }

    pub fn from_affine(values: &[Quaternion]) -> Self {
        Immersion { points: values.iter().map(|&x| HPoint::from_affine(x)).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fails with the first edge whose endpoints have the same image.
    pub fn check_immersed<T: Triangulation + ?Sized>(&self, surface: &T) -> Result<()> {
        for (p, q) in surface.edges() {
            if self.points[p].distance(&self.points[q]) < INVERTIBILITY_TOL {
                return Err(Error::NotImmersed { p, q });
            }
        }
        Ok(())
    }

    pub fn transform(&self, m: &QMat2) -> Result<Immersion> {
        Ok(Immersion { points: self.points.iter().map(|p| p.transform(m)).collect::<Result<_>>()? })
    }

    /// Affine values, after a Möbius normalization if some point is near infinity.
    pub fn affine_chart(&self) -> AffineChart {
        AffineChart::for_points(&self.points)
    }
}

/// Affine coordinates `x_p` with `A L_p = (x_p, 1) H` for an optional
/// normalization `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineChart {
    pub normalization: Option<QMat2>,
    pub values: Vec<Quaternion>,
}

fn near_infinity(p: &HPoint) -> bool {
    p.distance(&HPoint::infinity()) < INFINITY_TOL
}

impl AffineChart {
    pub fn for_points(points: &[HPoint]) -> AffineChart {
        if !points.iter().any(near_infinity) {
            let values = points.iter().map(|p| p.affine().expect("finite")).collect();
            return AffineChart { normalization: None, values };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f6269);
        loop {
            let mut q = || Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let a = QMat2::new(q(), q(), q(), q());
            if a.complexify().singular_values().min() < 0.2 {
                continue;
            }
            let moved: Vec<HPoint> = points.iter().map(|p| p.transform(&a).expect("invertible")).collect();
            if moved.iter().all(|p| p.distance(&HPoint::infinity()) > 1e-3) {
                let values = moved.iter().map(|p| p.affine().expect("finite")).collect();
                return AffineChart { normalization: Some(a), values };
            }
        }
    }

    /// Maps a vector of the original frame into the chart frame.
    pub fn to_chart(&self, v: QVec2) -> QVec2 {
        match &self.normalization {
            Some(a) => a.apply(v),
            None => v,
        }
    }

    /// Maps a vector of the chart frame back to the original frame.
    pub fn from_chart(&self, v: QVec2) -> QVec2 {
        match &self.normalization {
            Some(a) => a.inverse().expect("normalization is invertible").apply(v),
            None => v,
        }
    }

    /// Coordinate of `v mod L_p` along the projection of the first chart basis vector.
    pub fn coordinate(&self, p: usize, v_chart: QVec2) -> Quaternion {
        v_chart.x0 - self.values[p] * v_chart.x1
    }

    /// The holomorphic section obtained by projecting a constant vector given
    /// in the original frame.
    pub fn project(&self, v: QVec2) -> Section {
        let w = self.to_chart(v);
        Section { values: (0..self.values.len()).map(|p| self.coordinate(p, w)).collect() }
    }
}

/// Per-vertex values of a section in a trivialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub values: Vec<Quaternion>,
}

/// A two-dimensional space of holomorphic sections, given by a basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub psi: Section,
    pub phi: Section,
}

/// Per-black-triangle forms `c_p y_p + c_q y_q + c_r y_r` whose kernels are the
/// local holomorphic sections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphicStructure {
    pub vertex_count: usize,
    pub triangles: Vec<[usize; 3]>,
    pub coeffs: Vec<[Quaternion; 3]>,
    /// The affine chart of the immersion for induced structures.
    pub chart: Option<AffineChart>,
}

impl HolomorphicStructure {
    pub fn new(vertex_count: usize, triangles: Vec<[usize; 3]>, coeffs: Vec<[Quaternion; 3]>) -> Result<Self> {
        if triangles.len() != coeffs.len() {
            return Err(Error::InvalidInput("one coefficient triple per triangle".into()));
        }
        for (t, c) in triangles.iter().zip(coeffs.iter()) {
            if t.iter().any(|&v| v >= vertex_count) {
                return Err(Error::InvalidInput("triangle vertex out of range".into()));
            }
            let scale = c.iter().map(|q| q.norm()).fold(0.0, f64::max);
            if c.iter().any(|q| q.norm() <= 1e-12 * scale) || scale == 0.0 {
                return Err(Error::InvalidInput("coefficients must be invertible".into()));
            }
        }
        Ok(HolomorphicStructure { vertex_count, triangles, coeffs, chart: None })
    }

    /// The value at the third vertex forced by holomorphicity on triangle `b`.
    pub fn solve_third(&self, b: usize, missing: usize, known: [Quaternion; 2]) -> Quaternion {
        let c = self.coeffs[b];
        let others: Vec<usize> = (0..3).filter(|&k| k != missing).collect();
        let s = c[others[0]] * known[0] + c[others[1]] * known[1];
        -(c[missing].inv() * s)
    }

    /// The linear system of projected constants `e1`, `e2` in the chart frame.
    pub fn linear_system(&self) -> Option<LinearSystem> {
        let chart = self.chart.as_ref()?;
        let n = chart.values.len();
        let psi = Section { values: vec![Quaternion::ONE; n] };
        let phi = Section { values: chart.values.iter().map(|&x| -x).collect() };
        Some(LinearSystem { psi, phi })
    }
}

/// The form annihilating the projections of constant sections on a triangle
/// with affine vertex values `x_p, x_q, x_r`.
pub fn annihilator_form(xp: Quaternion, xq: Quaternion, xr: Quaternion) -> Result<[Quaternion; 3]> {
    let scale = xp.norm().max(xq.norm()).max(xr.norm());
    let tiny = |d: Quaternion| d.norm() <= INVERTIBILITY_TOL * scale || scale == 0.0;
    if tiny(xp - xq) || tiny(xq - xr) || tiny(xr - xp) {
        return Err(Error::DegenerateTriangle);
    }
    Ok([(xr - xq) * (xp - xq).inv(), (xr - xp) * (xq - xp).inv(), -Quaternion::ONE])
}

/// The structure on `V/L` for which projected constants are holomorphic.
pub fn induced_structure<T: Triangulation + ?Sized>(surface: &T, f: &Immersion) -> Result<HolomorphicStructure> {
    if f.len() != surface.vertex_count() {
        return Err(Error::InvalidInput("immersion has the wrong number of vertices".into()));
    }
    let chart = f.affine_chart();
    let mut coeffs = Vec::with_capacity(surface.black_triangles().len());
    for (b, t) in surface.black_triangles().iter().enumerate() {
        let x = t.map(|v| chart.values[v]);
        let degenerate = (0..3).any(|k| f.points[t[k]].distance(&f.points[t[(k + 1) % 3]]) < INVERTIBILITY_TOL);
        if degenerate {
            return Err(Error::BlackTriangleDegenerate { triangle: b });
        }
        coeffs.push(annihilator_form(x[0], x[1], x[2]).map_err(|_| Error::BlackTriangleDegenerate { triangle: b })?);
    }
    Ok(HolomorphicStructure {
        vertex_count: surface.vertex_count(),
        triangles: surface.black_triangles().to_vec(),
        coeffs,
        chart: Some(chart),
    })
}

/// The lift `v` (original frame) with `coordinate_p(v) = y_p` at the three
/// vertices of a triangle, and the relative residual at the third vertex.
pub fn prolong_triangle(chart: &AffineChart, vertices: [usize; 3], values: [Quaternion; 3]) -> (QVec2, f64) {
    let x = vertices.map(|v| chart.values[v]);
    let b = (x[1] - x[0]).inv() * (values[0] - values[1]);
    let a = values[0] + x[0] * b;
    let lift = QVec2::new(a, b);
    let scale = values.iter().map(|y| y.norm()).fold(0.0, f64::max);
    let residual = if scale == 0.0 { 0.0 } else { (values[2] - chart.coordinate(vertices[2], lift)).norm() / scale };
    (chart.from_chart(lift), residual)
}

/// Max relative residual of the defining forms over all black triangles.
pub fn is_holomorphic(s: &Section, hs: &HolomorphicStructure) -> f64 {
    hs.triangles
        .iter()
        .zip(hs.coeffs.iter())
        .map(|(t, c)| {
            let terms: Vec<Quaternion> = (0..3).map(|k| c[k] * s.values[t[k]]).collect();
            let scale: f64 = terms.iter().map(|q| q.norm()).sum();
            if scale == 0.0 {
                0.0
            } else {
                (terms[0] + terms[1] + terms[2]).norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// `f = -psi^-1 phi` per vertex.
pub fn kodaira_inverse(h: &LinearSystem) -> Result<Immersion> {
    let scale = h.psi.values.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let mut values = Vec::with_capacity(h.psi.values.len());
    for (vertex, (&psi, &phi)) in h.psi.values.iter().zip(h.phi.values.iter()).enumerate() {
        if psi.norm() <= 1e-12 * scale || scale == 0.0 {
            return Err(Error::BasePoint { vertex });
        }
        values.push(-(psi.inv() * phi));
    }
    Ok(Immersion::from_affine(&values))
}

/// Complex structure whose holomorphic sections map black triangles to
/// positively oriented equilateral triangles.
pub fn vacuum_structure(patch: &PlanarPatch) -> HolomorphicStructure {
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let c = [Quaternion::ONE, Quaternion::from_complex(omega), Quaternion::from_complex(omega * omega)];
    HolomorphicStructure {
        vertex_count: patch.vertex_count(),
        triangles: patch.black.clone(),
        coeffs: vec![c; patch.black.len()],
        chart: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_regular_torus, LatticeBasis};
    use crate::quatlin::{cross_ratio4, C64};

    fn rq(rng: &mut ChaCha8Rng) -> Quaternion {
        Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_torus_immersion(seed: u64) -> (crate::mesh::RegularTorus, Immersion) {
        let t = build_regular_torus(LatticeBasis::new([3, 0], [1, 3])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<Quaternion> = (0..t.len()).map(|_| rq(&mut rng)).collect();
        (t, Immersion::from_affine(&vals))
    }

    #[test]
    fn annihilator_examples() {
        let r = Quaternion::real;
        let c = annihilator_form(r(0.0), r(1.0), r(2.0)).unwrap();
        assert_eq!(c, [r(-1.0), r(2.0), r(-1.0)]);
        assert_eq!(annihilator_form(r(0.0), r(1.0), r(1.0)), Err(Error::DegenerateTriangle));

        // complex inputs: ((xr-xq)/(xp-xq), (xr-xp)/(xq-xp), -1)
        let (xp, xq, xr) = (C64::new(0.3, 1.0), C64::new(-1.0, 0.2), C64::new(0.5, -0.7));
        let c = annihilator_form(Quaternion::from_complex(xp), Quaternion::from_complex(xq), Quaternion::from_complex(xr)).unwrap();
        let want = [(xr - xq) / (xp - xq), (xr - xp) / (xq - xp)];
        for k in 0..2 {
            assert!((c[k] - Quaternion::from_complex(want[k])).norm() < 1e-14);
        }
    }

    #[test]
    fn constants_project_to_holomorphic_sections() {
        let (t, f) = random_torus_immersion(1);
        let hs = induced_structure(&t, &f).unwrap();
        let chart = hs.chart.as_ref().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let s = chart.project(QVec2::new(rq(&mut rng), rq(&mut rng)));
            assert!(is_holomorphic(&s, &hs) < 1e-14);
        }
        let zero = Section { values: vec![Quaternion::ZERO; t.len()] };
        assert_eq!(is_holomorphic(&zero, &hs), 0.0);
        let random = Section { values: (0..t.len()).map(|_| rq(&mut rng)).collect() };
        assert!(is_holomorphic(&random, &hs) > 1e-3);
    }

    #[test]
    fn degenerate_black_triangle_is_rejected() {
        let (t, f) = random_torus_immersion(3);
        let mut pts = f.points.clone();
        let [p, q, _] = t.black[4];
        pts[q] = pts[p];
        let err = induced_structure(&t, &Immersion::new(pts)).unwrap_err();
        assert!(matches!(err, Error::BlackTriangleDegenerate { .. }));
    }

    #[test]
    fn vanishing_at_two_vertices_forces_the_third() {
        let (_, f) = random_torus_immersion(4);
        let t = build_regular_torus(LatticeBasis::new([3, 0], [1, 3])).unwrap();
        let hs = induced_structure(&t, &f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for b in 0..hs.triangles.len() {
            for missing in 0..3 {
                assert_eq!(hs.solve_third(b, missing, [Quaternion::ZERO; 2]).norm(), 0.0);
                let y = hs.solve_third(b, missing, [rq(&mut rng), rq(&mut rng)]);
                assert!(y.is_finite());
            }
        }
    }

    #[test]
    fn kodaira_round_trip_preserves_cross_ratios() {
        let (t, f) = random_torus_immersion(6);
        let hs = induced_structure(&t, &f).unwrap();
        let g = kodaira_inverse(&hs.linear_system().unwrap()).unwrap();
        let fx: Vec<Quaternion> = f.points.iter().map(|p| p.affine().unwrap()).collect();
        let gx: Vec<Quaternion> = g.points.iter().map(|p| p.affine().unwrap()).collect();
        let q = [0, 3, 5, 8];
        let a = cross_ratio4(&q.map(|k| fx[k])).unwrap().conjugacy_pair();
        let b = cross_ratio4(&q.map(|k| gx[k])).unwrap().conjugacy_pair();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);

        // swapping the basis inverts f pointwise, a Möbius transformation
        let h = hs.linear_system().unwrap();
        let swapped = kodaira_inverse(&LinearSystem { psi: h.phi.clone(), phi: h.psi.clone() }).unwrap();
        for (p, s) in f.points.iter().zip(swapped.points.iter()) {
            let x = p.affine().unwrap();
            assert!((s.affine().unwrap() - x.inv()).norm() < 1e-10 * (1.0 + x.inv().norm()));
        }
        let sx: Vec<Quaternion> = swapped.points.iter().map(|p| p.affine().unwrap()).collect();
        let c = cross_ratio4(&q.map(|k| sx[k])).unwrap().conjugacy_pair();
        assert!((a.0 - c.0).abs() < 1e-10 && (a.1 - c.1).abs() < 1e-10);
    }

    #[test]
    fn constant_linear_system_gives_constant_map() {
        let c = Quaternion::new(0.5, -1.0, 0.25, 2.0);
        let h = LinearSystem {
            psi: Section { values: vec![Quaternion::ONE; 4] },
            phi: Section { values: vec![-c; 4] },
        };
        let g = kodaira_inverse(&h).unwrap();
        assert!(g.points.iter().all(|p| (p.affine().unwrap() - c).norm() < 1e-15));
        let t = build_regular_torus(LatticeBasis::new([2, 0], [0, 2])).unwrap();
        assert!(g.check_immersed(&t).is_err());
        let bad = LinearSystem { psi: Section { values: vec![Quaternion::ONE, Quaternion::ZERO] }, phi: Section { values: vec![Quaternion::ONE; 2] } };
        assert_eq!(kodaira_inverse(&bad), Err(Error::BasePoint { vertex: 1 }));
    }

    #[test]
    fn points_at_infinity_are_normalized() {
        let (t, f) = random_torus_immersion(7);
        let mut pts = f.points.clone();
        pts[2] = HPoint::infinity();
        let f = Immersion::new(pts);
        let hs = induced_structure(&t, &f).unwrap();
        let chart = hs.chart.as_ref().unwrap();
        assert!(chart.normalization.is_some());
        assert!(chart.values.iter().all(|x| x.is_finite()));
        let s = chart.project(QVec2::new(Quaternion::I, Quaternion::K));
        assert!(is_holomorphic(&s, &hs) < 1e-12);
    }

    #[test]
    fn mobius_covariance() {
        let (t, f) = random_torus_immersion(8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = QMat2::new(rq(&mut rng), rq(&mut rng), rq(&mut rng), rq(&mut rng));
        let g = f.transform(&a).unwrap();
        let hf = induced_structure(&t, &f).unwrap();
        let hg = induced_structure(&t, &g).unwrap();
        let (cf, cg) = (hf.chart.as_ref().unwrap(), hg.chart.as_ref().unwrap());
        // A maps V/L to V/AL; in coordinates y'_p = g_p y_p with g_p the
        // coordinate of the image of the first chart basis vector.
        let e1 = cf.from_chart(QVec2::new(Quaternion::ONE, Quaternion::ZERO));
        let gauge = cg.project(a.apply(e1));
        for _ in 0..5 {
            let v = QVec2::new(rq(&mut rng), rq(&mut rng));
            let hol = cf.project(v);
            let moved = Section { values: hol.values.iter().zip(gauge.values.iter()).map(|(y, g)| *g * *y).collect() };
            assert!(is_holomorphic(&moved, &hg) < 1e-8);
        }
    }

    #[test]
    fn vacuum_examples() {
        let patch = PlanarPatch::parallelogram(4, 3);
        let hs = vacuum_structure(&patch);
        let id = Section { values: (0..patch.vertices.len()).map(|v| Quaternion::from_complex(patch.position(v))).collect() };
        assert!(is_holomorphic(&id, &hs) < 1e-15);
        let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let rotated = Section { values: id.values.iter().map(|q| Quaternion::from_complex(omega * C64::new(q.a, q.b))).collect() };
        assert!(is_holomorphic(&rotated, &hs) < 1e-15);
        let mut collapsed = id.clone();
        let [p, q, r] = patch.black[5];
        collapsed.values[r] = (collapsed.values[p] + collapsed.values[q]) * 0.5;
        let [cp, cq, cr] = hs.coeffs[5];
        let direct = cp * collapsed.values[p] + cq * collapsed.values[q] + cr * collapsed.values[r];
        assert!(direct.norm() > 0.1);
        assert!(is_holomorphic(&collapsed, &hs) > 0.1);
    }
}
