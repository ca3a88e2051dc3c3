//! Discrete curves in `HP^1`: the cross-ratio Darboux transformation with a
//! complex parameter, the holonomy of closed curves and its spectral curve,
//! thin cylinders and the flow by iterated closed transforms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holo::{AffineChart, Immersion};
use crate::linalg::{char_poly_family, eigenvalues, kernel, BivariatePoly, RANK_TOL};
use crate::mesh::{thin_torus, RegularTorus};
use crate::quatlin::{cross_ratio4, splitting_projections, CMatrix, HPoint, QVec2, Quaternion, C64, INVERTIBILITY_TOL};
use crate::spectral::{coordinate_block, split_family, SplitFactors, DISTINCT_TOL};

/// A discrete curve; closed curves have period `points.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCurve {
    pub points: Vec<HPoint>,
    pub closed: bool,
}

impl DiscreteCurve {
    /// Checks that consecutive points differ.
    pub fn new(points: Vec<HPoint>, closed: bool) -> Result<Self> {
        let c = DiscreteCurve { points, closed };
        if c.points.len() < 2 || (closed && c.points.len() < 3) {
            return Err(Error::TooSmall { n: c.points.len() });
        }
        if let Some(index) = c.first_coincidence(1) {
            return Err(Error::NotImmersed { p: index, q: c.wrap(index + 1) });
        }
        Ok(c)
    }

    pub fn from_affine(values: &[Quaternion], closed: bool) -> Result<Self> {
        DiscreteCurve::new(values.iter().map(|&x| HPoint::from_affine(x)).collect(), closed)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn wrap(&self, k: usize) -> usize {
        k % self.points.len()
    }

    fn first_coincidence(&self, offset: usize) -> Option<usize> {
        let n = self.points.len();
        let last = if self.closed { n } else { n.saturating_sub(offset) };
        (0..last).find(|&k| self.points[k].distance(&self.points[(k + offset) % n]) < INVERTIBILITY_TOL)
    }

    /// Whether `gamma != gamma_++` everywhere as well.
    pub fn check_polygon(&self) -> Result<()> {
        match self.first_coincidence(2) {
            Some(index) => Err(Error::NotAPolygon { index }),
            None => Ok(()),
        }
    }

    /// The projections `(P_k, Q_k)` of the splitting by `gamma_k` and `gamma_{k+1}`.
    pub fn projections(&self, k: usize) -> Result<(CMatrix, CMatrix)> {
        let (p, q) = splitting_projections(&self.points[k], &self.points[self.wrap(k + 1)])?;
        Ok((p.complexify(), q.complexify()))
    }
}

/// Lift of an affine-chart-free point in `(H^2, i)` as a column vector.
fn column(v: QVec2) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_row_slice(&v.to_c4())
}

fn from_column(c: &nalgebra::DVector<C64>) -> QVec2 {
    QVec2::from_c4([c[0], c[1], c[2], c[3]])
}

/// One step `eta_+ = P eta + (Q eta) lambda` of the transformation.
pub fn curve_darboux_step(g: &HPoint, g1: &HPoint, eta: QVec2, lambda: C64) -> Result<QVec2> {
    let (p, q) = splitting_projections(g, g1)?;
    Ok(p.apply(eta) + q.apply(eta).scale_complex(lambda))
}

/// Forward propagation of a twistor lift along the curve. For a closed curve
/// the result has `n + 1` entries, the last one being the lift after a full
/// period.
pub fn curve_darboux(curve: &DiscreteCurve, eta0: QVec2, lambda: C64) -> Result<Vec<QVec2>> {
    let n = curve.len();
    let steps = if curve.closed { n } else { n - 1 };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(eta0);
    for k in 0..steps {
        let next = curve_darboux_step(&curve.points[k], &curve.points[(k + 1) % n], out[k], lambda)?;
        out.push(next);
    }
    Ok(out)
}

/// Deviation of `M4(gamma, eta_+, gamma_+, eta)` from `lambda`, compared
/// through the conjugation invariants (real part, modulus).
pub fn curve_cross_ratio_check(g: &HPoint, g1: &HPoint, eta: &HPoint, eta1: &HPoint, lambda: C64) -> Result<f64> {
    let x = AffineChart::for_points(&[*g, *eta1, *g1, *eta]).values;
    let m = cross_ratio4(&[x[0], x[1], x[2], x[3]])?;
    let (re, abs) = m.conjugacy_pair();
    Ok((re - lambda.re).abs().max((abs - lambda.norm()).abs()))
}

/// Largest cross-ratio deviation along a transform given by its lifts.
pub fn transform_cross_ratio_deviation(curve: &DiscreteCurve, lifts: &[QVec2], lambda: C64) -> Result<f64> {
    let n = curve.len();
    let etas: Vec<HPoint> = lifts.iter().map(|&v| HPoint::new(v)).collect::<Result<_>>()?;
    let mut dev: f64 = 0.0;
    for k in 0..lifts.len() - 1 {
        let d = curve_cross_ratio_check(&curve.points[k], &curve.points[(k + 1) % n], &etas[k], &etas[k + 1], lambda)?;
        dev = dev.max(d);
    }
    Ok(dev)
}

/// Complexified holonomy `H(lambda) = (P_{n-1} + lambda Q_{n-1}) ... (P_0 + lambda Q_0)`.
pub fn curve_holonomy(curve: &DiscreteCurve, lambda: C64) -> Result<CMatrix> {
    closed_only(curve)?;
    let mut h = CMatrix::identity(4, 4);
    for k in 0..curve.len() {
        let (p, q) = curve.projections(k)?;
        h = (p + q * lambda) * h;
    }
    Ok(h)
}

fn closed_only(curve: &DiscreteCurve) -> Result<()> {
    if curve.closed {
        Ok(())
    } else {
        Err(Error::InvalidInput("holonomy needs a closed curve".into()))
    }
}

/// Coefficients of `H(lambda)` in ascending powers of `lambda`.
pub fn holonomy_coefficients(curve: &DiscreteCurve) -> Result<Vec<CMatrix>> {
    closed_only(curve)?;
    let n = curve.len();
    let mut coeffs = vec![CMatrix::identity(4, 4)];
    for k in 0..n {
        let (p, q) = curve.projections(k)?;
        let mut next = vec![CMatrix::zeros(4, 4); coeffs.len() + 1];
        for (d, c) in coeffs.iter().enumerate() {
            next[d] += &p * c;
            next[d + 1] += &q * c;
        }
        coeffs = next;
    }
    Ok(coeffs)
}

/// Degree of the top coefficient of `H(lambda)` for a closed polygon of length `n`.
pub fn hmax_degree(n: usize) -> usize {
    n.div_ceil(2)
}

/// Complex basis of the line `L` inside `(H^2, i)`: `v` and `v j`.
pub fn line_basis(p: &HPoint) -> CMatrix {
    let v = p.rep();
    let vj = v.scale(Quaternion::J);
    CMatrix::from_columns(&[column(v), column(vj)])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpectral {
    /// `det(mu - H(lambda))` with `s = lambda` and `y = mu`.
    pub poly: BivariatePoly,
    /// Whether `H(lambda)` had four simple eigenvalues at the probe parameters.
    pub simple_eigenvalues: bool,
    /// `|H(0) L_1| / |H(0)|`.
    pub h0_kernel_residual: f64,
    pub hmax_nilpotent: bool,
    /// Smallest over largest singular value of the top coefficient.
    pub hmax_condition: f64,
    pub splits: Option<SplitFactors>,
}

/// Parameters at which simplicity of the spectrum is probed.
pub const SIMPLICITY_PROBES: [(f64, f64); 3] = [(0.9, 0.61), (1.13, 2.37), (0.77, -1.9)];

fn simple(values: &[C64]) -> bool {
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    (0..values.len()).all(|a| (a + 1..values.len()).all(|b| (values[a] - values[b]).norm() > DISTINCT_TOL * scale))
}

/// The spectral polynomial of a closed polygon together with its asymptotic data.
pub fn polygon_spectral(curve: &DiscreteCurve) -> Result<PolygonSpectral> {
    closed_only(curve)?;
    curve.check_polygon()?;
    let n = curve.len();
    // each factor contributes degree one to every entry and the determinant has size four
    let bound = 4 * n;
    for k in 0..n {
        curve.projections(k)?;
    }
    let family = |lambda: C64| curve_holonomy(curve, lambda).expect("projections checked");
    let poly = char_poly_family(4, bound, family)?;
    let simple_eigenvalues = SIMPLICITY_PROBES
        .par_iter()
        .map(|&(r, t)| simple(&eigenvalues(&family(C64::from_polar(r, t)))))
        .collect::<Vec<_>>()
        .into_iter()
        .all(|b| b);
    let coeffs = holonomy_coefficients(curve)?;
    let h0 = &coeffs[0];
    let h0_kernel_residual = (h0 * line_basis(&curve.points[1])).norm() / h0.norm().max(1e-300);
    let hmax = &coeffs[hmax_degree(n)];
    let sq = hmax * hmax;
    let hmax_nilpotent = sq.norm() <= 1e-12 * hmax.norm().powi(2).max(1e-300);
    let sv = hmax.singular_values();
    let hmax_condition = sv.min() / sv.max().max(1e-300);
    let splits = if all_complex(curve) { Some(split_family(2, bound, family)?) } else { None };
    Ok(PolygonSpectral { poly, simple_eigenvalues, h0_kernel_residual, hmax_nilpotent, hmax_condition, splits })
}

/// Whether every point lies in the fixed `CP^1` of complex affine values.
fn all_complex(curve: &DiscreteCurve) -> bool {
    curve.points.iter().all(|p| match p.affine() {
        Some(x) => x.c.abs() <= 1e-12 * x.norm().max(1.0) && x.d.abs() <= 1e-12 * x.norm().max(1.0),
        None => true,
    })
}

/// The thin torus of a closed polygon: vertex `k` carries `gamma_k`.
pub fn thin_cylinder_bridge(curve: &DiscreteCurve) -> Result<(RegularTorus, Immersion)> {
    closed_only(curve)?;
    curve.check_polygon()?;
    let torus = thin_torus(curve.len())?;
    Ok((torus, Immersion::new(curve.points.clone())))
}

/// Eigenvalues of `H(lambda)` sorted by decreasing modulus, then by argument.
pub fn sorted_eigenvalues(h: &CMatrix) -> Vec<C64> {
    let mut ev = eigenvalues(h);
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
    ev
}

/// Eigenline for the `index`-th eigenvalue in [`sorted_eigenvalues`] order,
/// required to be simple.
///
/// For curves in the complex `CP^1` the holonomy is block diagonal with equal
/// blocks, so every eigenvalue is double; there the eigenline is taken inside
/// the `z1` block and `index` refers to the two eigenvalues of that block.
pub fn holonomy_eigenline(curve: &DiscreteCurve, lambda: C64, index: usize) -> Result<(C64, QVec2)> {
    let h = curve_holonomy(curve, lambda)?;
    let block = all_complex(curve);
    let m = if block { coordinate_block(&h, 0) } else { h };
    let ev = sorted_eigenvalues(&m);
    let mu = *ev.get(index).ok_or_else(|| Error::InvalidInput(format!("no eigenvalue {index}")))?;
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    if ev.iter().enumerate().any(|(k, z)| k != index && (z - mu).norm() <= DISTINCT_TOL * scale) {
        return Err(Error::EigenlineDegenerate { index });
    }
    let dim = m.nrows();
    let k = kernel(&(m - CMatrix::identity(dim, dim) * mu), RANK_TOL).smallest;
    let v = if block {
        QVec2 { x0: Quaternion::from_complex(k[0]), x1: Quaternion::from_complex(k[1]) }
    } else {
        from_column(&k)
    };
    Ok((mu, v))
}

/// The closed transform seeded by an eigenline of the holonomy.
pub fn closed_transform(curve: &DiscreteCurve, lambda: C64, index: usize) -> Result<(DiscreteCurve, Vec<QVec2>)> {
    let (mu, eta0) = holonomy_eigenline(curve, lambda, index)?;
    let lifts = curve_darboux(curve, eta0, lambda)?;
    let n = curve.len();
    let back = lifts[n];
    if (back - eta0.scale_complex(mu)).norm() > 1e-8 * back.norm().max(eta0.norm() * mu.norm()) {
        return Err(Error::NotClosed);
    }
    let points: Vec<HPoint> = lifts[..n].iter().map(|&v| HPoint::new(v)).collect::<Result<_>>()?;
    Ok((DiscreteCurve::new(points, true)?, lifts[..n].to_vec()))
}

/// Iterated closed transforms; entry `0` is the input polygon.
pub fn polygon_flow(curve: &DiscreteCurve, lambda: C64, steps: usize, index: usize) -> Result<Vec<DiscreteCurve>> {
    closed_only(curve)?;
    curve.check_polygon()?;
    let mut out = vec![curve.clone()];
    for _ in 0..steps {
        let (next, _) = closed_transform(out.last().expect("nonempty"), lambda, index)?;
        next.check_polygon()?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::{verify_multiratio, DarbouxTransform};
    use crate::holo::induced_structure;
    use crate::linalg::det;
    use crate::mesh::fundamental_domain;
    use crate::random::{random_polygon_values, random_quaternion, rng, ValueKind};
    use crate::spectral::char_poly;
    use rand::Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_polygon(n: usize, seed: u64, kind: ValueKind) -> DiscreteCurve {
        DiscreteCurve::new(random_polygon_values(n, &mut rng(seed), kind), true).unwrap()
    }

    fn regular(n: usize) -> DiscreteCurve {
        let vals: Vec<Quaternion> =
            (0..n).map(|k| Quaternion::from_complex(C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))).collect();
        DiscreteCurve::from_affine(&vals, true).unwrap()
    }

    #[test]
    fn step_on_the_standard_splitting() {
        let g = HPoint::infinity();
        let g1 = HPoint::new(QVec2::new(Quaternion::ZERO, Quaternion::ONE)).unwrap();
        let lambda = c(0.3, 1.1);
        let l = Quaternion::from_complex(lambda);
        let next = curve_darboux_step(&g, &g1, QVec2::new(l, Quaternion::ONE), lambda).unwrap();
        let want = HPoint::new(QVec2::new(Quaternion::ONE, Quaternion::ONE)).unwrap();
        assert!(HPoint::new(next).unwrap().distance(&want) < 1e-15);
        // lambda = 1 is the identity
        let mut r = rng(1);
        let (a, b) = (HPoint::from_affine(random_quaternion(&mut r)), HPoint::from_affine(random_quaternion(&mut r)));
        let eta = QVec2::new(random_quaternion(&mut r), random_quaternion(&mut r));
        assert!((curve_darboux_step(&a, &b, eta, c(1.0, 0.0)).unwrap() - eta).norm() < 1e-13);
        assert!(matches!(curve_darboux_step(&a, &a, eta, lambda), Err(Error::DegenerateSplitting)));
    }

    #[test]
    fn step_matches_the_complex_recursion() {
        let mut r = rng(2);
        for _ in 0..10 {
            let [g, g1, e] = [0; 3].map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
            let lambda = c(r.gen_range(-2.0..2.0), 0.0);
            // P + lambda Q = A diag(1, lambda) A^-1 with A = [[g, g1], [1, 1]]
            let det_a = g - g1;
            let a_inv = [[c(1.0, 0.0) / det_a, -g1 / det_a], [c(-1.0, 0.0) / det_a, g / det_a]];
            let y = [a_inv[0][0] * e + a_inv[0][1], a_inv[1][0] * e + a_inv[1][1]];
            let y = [y[0], y[1] * lambda];
            let out = [g * y[0] + g1 * y[1], y[0] + y[1]];
            let want = out[0] / out[1];
            let q = |z: C64| Quaternion::from_complex(z);
            let next = curve_darboux_step(
                &HPoint::from_affine(q(g)),
                &HPoint::from_affine(q(g1)),
                QVec2::new(q(e), Quaternion::ONE),
                lambda,
            )
            .unwrap();
            let got = HPoint::new(next).unwrap().affine().unwrap();
            assert!((got - q(want)).norm() < 1e-10 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn steps_realize_the_cross_ratio() {
        let mut r = rng(3);
        for _ in 0..20 {
            let g = HPoint::from_affine(random_quaternion(&mut r));
            let g1 = HPoint::from_affine(random_quaternion(&mut r));
            let eta = QVec2::new(random_quaternion(&mut r), random_quaternion(&mut r));
            let lambda = c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
            let next = curve_darboux_step(&g, &g1, eta, lambda).unwrap();
            let d = curve_cross_ratio_check(&g, &g1, &HPoint::new(eta).unwrap(), &HPoint::new(next).unwrap(), lambda).unwrap();
            assert!(d < 1e-9, "{d}");
        }
        let g = HPoint::from_affine(Quaternion::new(0.2, 1.0, -0.5, 0.1));
        let g1 = HPoint::from_affine(Quaternion::new(-1.0, 0.3, 0.5, 0.0));
        let eta = HPoint::from_affine(Quaternion::new(0.5, 0.5, 0.5, 0.5));
        assert!(curve_cross_ratio_check(&g, &g1, &eta, &eta, c(1.0, 0.0)).unwrap() < 1e-14);
        // M4(0, 1, 2, 2/3) = 2 as (gamma, eta_+, gamma_+, eta)
        let pt = |x: f64| HPoint::from_affine(Quaternion::real(x));
        assert!(curve_cross_ratio_check(&pt(0.0), &pt(2.0), &pt(2.0 / 3.0), &pt(1.0), c(2.0, 0.0)).unwrap() < 1e-14);
    }

    #[test]
    fn curves_and_polygons() {
        let p = |x: f64| HPoint::from_affine(Quaternion::real(x));
        assert!(matches!(DiscreteCurve::new(vec![p(0.0), p(0.0), p(1.0)], false), Err(Error::NotImmersed { .. })));
        let c3 = DiscreteCurve::new(vec![p(0.0), p(1.0), p(0.0), p(2.0)], true).unwrap();
        assert!(matches!(c3.check_polygon(), Err(Error::NotAPolygon { index: 0 })));
        assert!(matches!(thin_cylinder_bridge(&c3), Err(Error::NotAPolygon { .. })));
        let open = DiscreteCurve::new(vec![p(0.0), p(1.0), p(2.0)], false).unwrap();
        assert_eq!(curve_darboux(&open, QVec2::new(Quaternion::I, Quaternion::ONE), c(0.5, 0.5)).unwrap().len(), 3);
        assert!(curve_holonomy(&open, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn holonomy_coefficients_and_ends() {
        for (n, seed) in [(5, 4), (6, 5), (7, 6), (8, 7)] {
            let curve = random_polygon(n, seed, ValueKind::Quaternionic);
            let coeffs = holonomy_coefficients(&curve).unwrap();
            let lambda = c(0.7, -0.4);
            let sum = coeffs.iter().rev().fold(CMatrix::zeros(4, 4), |acc, m| acc * lambda + m);
            let h = curve_holonomy(&curve, lambda).unwrap();
            assert!((sum - &h).norm() < 1e-10 * h.norm());
            let top = hmax_degree(n);
            for m in &coeffs[top + 1..] {
                assert!(m.norm() < 1e-10 * coeffs[top].norm());
            }
            let pq: Vec<(CMatrix, CMatrix)> = (0..n).map(|k| curve.projections(k).unwrap()).collect();
            // top coefficient by brute force over all placements of Q among the factors
            let mut brute = CMatrix::zeros(4, 4);
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != top {
                    continue;
                }
                let mut m = CMatrix::identity(4, 4);
                for (k, (p, q)) in pq.iter().enumerate() {
                    m = if mask & (1 << k) != 0 { q * m } else { p * m };
                }
                brute += m;
            }
            assert!((&coeffs[top] - &brute).norm() < 1e-10 * coeffs[top].norm());
            if n % 2 == 1 {
                // only the alternating placement Q_{n-1} Q_{n-3} ... Q_0 survives
                let mut m = CMatrix::identity(4, 4);
                for k in (0..n).step_by(2) {
                    m = &pq[k].1 * m;
                }
                assert!((&coeffs[top] - m).norm() < 1e-10 * coeffs[top].norm());
            } else {
                // invertible and preserving L_0
                let basis = line_basis(&curve.points[0]);
                let image = &coeffs[top] * &basis;
                let pinv = basis.clone().pseudo_inverse(1e-12).unwrap();
                let off = &image - &basis * (pinv * &image);
                assert!(off.norm() < 1e-9 * image.norm(), "{}", off.norm());
            }
            let sp = polygon_spectral(&curve).unwrap();
            assert!(sp.h0_kernel_residual < 1e-12);
            let on_last = (&coeffs[0] * line_basis(&curve.points[n - 1])).norm();
            assert!(on_last > 1e-6 * coeffs[0].norm());
            assert_eq!(sp.hmax_nilpotent, n % 2 == 1);
            if n % 2 == 0 {
                assert!(sp.hmax_condition > 1e-6);
            } else {
                let m = &coeffs[top];
                assert!((m * m).norm() <= 1e-12 * m.norm().powi(2));
            }
        }
    }

    #[test]
    fn spectral_polynomial_matches_determinants_and_is_real() {
        let curve = random_polygon(5, 8, ValueKind::Quaternionic);
        let sp = polygon_spectral(&curve).unwrap();
        assert!(sp.simple_eigenvalues);
        assert!(sp.splits.is_none());
        assert_eq!(sp.poly.y_degree(), 4);
        assert!(sp.poly.imag_ratio() < 1e-10);
        let mut r = rng(9);
        for _ in 0..20 {
            let lambda = C64::from_polar(r.gen_range(0.3..2.0), r.gen_range(0.0..6.3));
            let mu = C64::from_polar(r.gen_range(0.3..2.0), r.gen_range(0.0..6.3));
            let h = curve_holonomy(&curve, lambda).unwrap();
            let direct = det(&(CMatrix::identity(4, 4) * mu - h));
            assert!((sp.poly.eval(lambda, mu) - direct).norm() < 1e-8 * (1.0 + direct.norm()));
            // H(conj lambda) = j^-1 H(lambda) j
            let conj = sp.poly.eval(lambda.conj(), mu.conj()).conj();
            assert!((conj - direct).norm() < 1e-8 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn complex_polygons_split() {
        let curve = random_polygon(5, 10, ValueKind::Complex);
        let sp = polygon_spectral(&curve).unwrap();
        let split = sp.splits.unwrap();
        assert!(split.conjugate_deviation < 1e-9);
        assert_eq!(split.first.y_degree(), 2);
        let mut r = rng(11);
        for _ in 0..5 {
            let lambda = C64::from_polar(r.gen_range(0.5..1.5), r.gen_range(0.0..6.3));
            let mu = C64::from_polar(r.gen_range(0.5..1.5), r.gen_range(0.0..6.3));
            let prod = split.first.eval(lambda, mu) * split.second.eval(lambda, mu);
            assert!((prod - sp.poly.eval(lambda, mu)).norm() < 1e-8 * (1.0 + prod.norm()));
        }
        // triangle: the z1 block of H is the product of the complex 2x2 factors
        let tri = random_polygon(3, 12, ValueKind::Complex);
        let split = polygon_spectral(&tri).unwrap().splits.unwrap();
        let x: Vec<C64> = tri.points.iter().map(|p| {
            let q = p.affine().unwrap();
            c(q.a, q.b)
        }).collect();
        let lambda = c(0.4, 0.9);
        let mut h = nalgebra::Matrix2::<C64>::identity();
        for k in 0..3 {
            let (g, g1) = (x[k], x[(k + 1) % 3]);
            let a = nalgebra::Matrix2::new(g, g1, c(1.0, 0.0), c(1.0, 0.0));
            let d = nalgebra::Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), lambda);
            h = a * d * a.try_inverse().unwrap() * h;
        }
        let at = split.first.at(lambda);
        assert_eq!(at.len(), 3);
        let want = [h.determinant(), -h.trace(), c(1.0, 0.0)];
        for (got, w) in at.iter().zip(want.iter()) {
            assert!((got - w).norm() < 1e-9 * (1.0 + w.norm()));
        }
    }

    #[test]
    fn thin_torus_has_the_polygon_spectral_curve() {
        let curve = random_polygon(5, 13, ValueKind::Quaternionic);
        let (torus, f) = thin_cylinder_bridge(&curve).unwrap();
        assert_eq!(f.points, curve.points);
        let hs = induced_structure(&torus, &f).unwrap();
        let fd = fundamental_domain(&torus, &torus.adapted_basis(0), 0).unwrap();
        assert_eq!((fd.length, fd.thickness), (5, 1));
        let torus_poly = char_poly(&hs, &fd).unwrap();
        let poly = polygon_spectral(&curve).unwrap().poly;
        let d = torus_poly.curve_distance(&poly.transpose());
        assert!(d < 1e-8, "{d}");
        // a polygon transform is a transform of the thin torus: black k carries eta_k
        let lambda = C64::from_polar(1.0, 0.8);
        let (eta, lifts) = closed_transform(&curve, lambda, 0).unwrap();
        assert!(transform_cross_ratio_deviation(&curve, &lifts, lambda).unwrap() < 1e-9);
        let ft = DarbouxTransform::external(eta.points.clone());
        let rep = verify_multiratio(&torus, &f, &ft).unwrap();
        assert!(rep.max_multiratio_dev < 1e-8, "{rep:?}");
    }

    #[test]
    fn regular_polygons_flow_by_rotation() {
        for n in [5, 6] {
            let curve = regular(n);
            let lambda = C64::from_polar(1.0, 0.7);
            let flow = polygon_flow(&curve, lambda, 4, 0).unwrap();
            assert_eq!(flow.len(), 5);
            let omega = C64::from_polar(1.0, 2.0 * PI / n as f64);
            for step in &flow {
                assert!(step.closed && step.len() == n);
                let x: Vec<Quaternion> = step.points.iter().map(|p| p.affine().unwrap()).collect();
                for k in 0..n {
                    let rotated = Quaternion::from_complex(omega) * x[k];
                    assert!((x[(k + 1) % n] - rotated).norm() < 1e-8 * (1.0 + x[k].norm()));
                }
            }
        }
    }

    #[test]
    fn flow_preserves_the_spectral_curve() {
        let curve = random_polygon(6, 14, ValueKind::Quaternionic);
        let base = polygon_spectral(&curve).unwrap().poly;
        let lambda = C64::from_polar(1.1, 1.3);
        let flow = polygon_flow(&curve, lambda, 3, 1).unwrap();
        for step in &flow[1..] {
            let p = polygon_spectral(step).unwrap().poly;
            assert!(p.curve_distance(&base) < 1e-6);
        }
        assert!(matches!(holonomy_eigenline(&curve, lambda, 7), Err(Error::InvalidInput(_))));
        // at lambda = 1 the holonomy is the identity
        assert!(matches!(holonomy_eigenline(&curve, c(1.0, 0.0), 0), Err(Error::EigenlineDegenerate { index: 0 })));
    }
}
