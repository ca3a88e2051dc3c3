//! Dense complex linear algebra helpers on top of nalgebra.

use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quatlin::{CMatrix, C64};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Singular values (descending) and an orthonormal kernel basis.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub singular_values: Vec<f64>,
    pub basis: Vec<DVector<C64>>,
    /// Right singular vector of the smallest singular value.
    pub smallest: DVector<C64>,
}

impl Kernel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value relative to the largest.
    pub fn sigma_min_rel(&self) -> f64 {
        let s = self.sigma_max();
        if s == 0.0 {
            0.0
        } else {
            self.singular_values.last().copied().unwrap_or(0.0) / s
        }
    }
}

/// Kernel of a square matrix: right singular vectors with
/// `sigma < rel_tol * sigma_max`.
pub fn kernel(m: &CMatrix, rel_tol: f64) -> Kernel {
    assert_eq!(m.nrows(), m.ncols(), "kernel expects a square matrix");
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = singular_values[0];
    let vec_of = |k: usize| -> DVector<C64> {
        DVector::from_iterator(n, v_t.row(k).iter().map(|z| z.conj()))
    };
    let basis = order
        .iter()
        .filter(|&&k| svd.singular_values[k] <= rel_tol * smax)
        .map(|&k| vec_of(k))
        .collect();
    let smallest = vec_of(*order.last().expect("nonempty"));
    Kernel { singular_values, basis, smallest }
}

/// Eigenvalues via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 0 {
        return Vec::new();
    }
    let n = m.nrows();
    let fm = faer::Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    match fm.eigenvalues() {
        Ok(ev) if consistent(m, &ev) => ev,
        // faer has returned all zeros for nearly diagonal input
        _ => {
            let (_, t) = m.clone().schur().unpack();
            (0..t.nrows()).map(|k| t[(k, k)]).collect()
        }
    }
}

/// Whether `ev` reproduces `tr A` and `tr A^2`.
fn consistent(m: &CMatrix, ev: &[C64]) -> bool {
    let scale = m.norm().max(1e-300);
    let tr: C64 = ev.iter().sum();
    let tr2: C64 = ev.iter().map(|l| l * l).sum();
    let n = m.nrows() as f64;
    (tr - m.trace()).norm() <= 1e-10 * n * scale && (tr2 - (m * m).trace()).norm() <= 1e-10 * n * scale * scale
}

/// Roots of `sum c_k z^k`; leading coefficients below `1e-14 * max|c|` are dropped.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if cmax == 0.0 {
        return Vec::new();
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * cmax {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = CMatrix::zeros(deg, deg);
    for k in 1..deg {
        comp[(k, k - 1)] = C64::new(1.0, 0.0);
    }
    for k in 0..deg {
        comp[(k, deg - 1)] = -coeffs[k] / lead;
    }
    eigenvalues(&comp)
}

/// Evaluates `sum c_k z^k` by Horner's rule.
pub fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(j, c)| c * j as f64).collect()
}

/// The root cluster of `coeffs` nearest `guess` and its size, refined as a
/// simple root of the derivative of order `size - 1`, which is well conditioned
/// where the individual roots of the cluster are not.
pub fn cluster_root(coeffs: &[C64], roots: &[C64], guess: C64) -> (C64, usize) {
    let Some(&nearest) = roots.iter().min_by(|a, b| (*a - guess).norm().total_cmp(&(*b - guess).norm())) else {
        return (C64::new(f64::NAN, 0.0), 0);
    };
    let radius = 1e-3 * nearest.norm().max(1.0);
    let cluster: Vec<C64> = roots.iter().copied().filter(|r| (r - nearest).norm() <= radius).collect();
    let m = cluster.len();
    let mut z = cluster.iter().sum::<C64>() / m as f64;
    let mut d = coeffs.to_vec();
    for _ in 1..m {
        d = poly_derivative(&d);
    }
    let dd = poly_derivative(&d);
    for _ in 0..8 {
        let slope = poly_eval(&dd, z);
        if slope.norm() == 0.0 {
            break;
        }
        z -= poly_eval(&d, z) / slope;
    }
    (z, m)
}

/// `K` points `r e^{2 pi i t/K}`.
pub fn circle_nodes(k: usize, radius: f64) -> Vec<C64> {
    (0..k).map(|t| C64::from_polar(radius, 2.0 * PI * t as f64 / k as f64)).collect()
}

/// Coefficients of the polynomial of degree `< K` through `values` at
/// [`circle_nodes`]`(K, radius)`.
pub fn interpolate_circle(values: &[C64], radius: f64) -> Vec<C64> {
    let k = values.len();
    (0..k)
        .map(|p| {
            let s: C64 = values
                .iter()
                .enumerate()
                .map(|(t, v)| v * C64::from_polar(1.0, -2.0 * PI * ((t * p) % k) as f64 / k as f64))
                .sum();
            s / (k as f64 * radius.powi(p as i32))
        })
        .collect()
}

/// Determinant by LU with partial pivoting.
pub fn det(m: &CMatrix) -> C64 {
    m.clone().determinant()
}

/// Characteristic polynomial `det(y I - A)` as ascending coefficients in `y`,
/// expanded from the Schur eigenvalues.
pub fn char_poly_coeffs(a: &CMatrix) -> Vec<C64> {
    let mut c = vec![C64::new(1.0, 0.0)];
    for l in eigenvalues(a) {
        let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
        for (j, &cj) in c.iter().enumerate() {
            next[j + 1] += cj;
            next[j] -= cj * l;
        }
        c = next;
    }
    c
}

/// `P(s, y) = sum_{j,k} coeffs[j][k] y^j s^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivariatePoly {
    pub coeffs: Vec<Vec<C64>>,
}

impl BivariatePoly {
    pub fn eval(&self, s: C64, y: C64) -> C64 {
        let rows: Vec<C64> = self.coeffs.iter().map(|row| poly_eval(row, s)).collect();
        poly_eval(&rows, y)
    }

    /// Coefficients in `y` at fixed `s`.
    pub fn at(&self, s: C64) -> Vec<C64> {
        self.coeffs.iter().map(|row| poly_eval(row, s)).collect()
    }

    /// Coefficients in `s` at fixed `y`.
    pub fn at_y(&self, y: C64) -> Vec<C64> {
        let width = self.coeffs.iter().map(|r| r.len()).max().unwrap_or(0);
        (0..width)
            .map(|k| {
                let col: Vec<C64> = self
                    .coeffs
                    .iter()
                    .map(|r| r.get(k).copied().unwrap_or_default())
                    .collect();
                poly_eval(&col, y)
            })
            .collect()
    }

    pub fn y_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn s_degree(&self) -> usize {
        let cmax = self.max_abs();
        self.coeffs
            .iter()
            .flat_map(|r| r.iter().enumerate().filter(|(_, c)| c.norm() > 1e-12 * cmax).map(|(k, _)| k))
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|Im c| / max|c|`, zero for coefficientwise real polynomials.
    pub fn imag_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        self.coeffs.iter().flatten().map(|c| c.im.abs()).fold(0.0, f64::max) / m
    }

    /// Swaps the roles of the two variables.
    pub fn transpose(&self) -> BivariatePoly {
        let width = self.coeffs.iter().map(|r| r.len()).max().unwrap_or(0);
        let coeffs = (0..width)
            .map(|k| {
                self.coeffs.iter().map(|r| r.get(k).copied().unwrap_or_default()).collect()
            })
            .collect();
        BivariatePoly { coeffs }
    }

    /// Removes monomial factors `s^a y^b` and scales so that the largest
    /// coefficient is real positive one.
    pub fn normalized(&self) -> BivariatePoly {
        let m = self.max_abs();
        let tiny = |c: &C64| c.norm() <= 1e-12 * m;
        let rows = self.coeffs.len();
        let width = self.coeffs.iter().map(|r| r.len()).max().unwrap_or(0);
        let get = |j: usize, k: usize| self.coeffs[j].get(k).copied().unwrap_or_default();
        let jmin = (0..rows).find(|&j| (0..width).any(|k| !tiny(&get(j, k)))).unwrap_or(0);
        let jmax = (0..rows).rev().find(|&j| (0..width).any(|k| !tiny(&get(j, k)))).unwrap_or(0);
        let kmin = (0..width).find(|&k| (0..rows).any(|j| !tiny(&get(j, k)))).unwrap_or(0);
        let kmax = (0..width).rev().find(|&k| (0..rows).any(|j| !tiny(&get(j, k)))).unwrap_or(0);
        let mut best = C64::new(0.0, 0.0);
        for j in jmin..=jmax {
            for k in kmin..=kmax {
                if get(j, k).norm() > best.norm() * (1.0 + 1e-9) {
                    best = get(j, k);
                }
            }
        }
        let coeffs = (jmin..=jmax)
            .map(|j| {
                (kmin..=kmax)
                    .map(|k| if tiny(&get(j, k)) { C64::default() } else { get(j, k) / best })
                    .collect()
            })
            .collect();
        BivariatePoly { coeffs }
    }

    /// Max coefficient difference of the normalized forms; infinite when the
    /// supports differ in shape.
    pub fn curve_distance(&self, other: &BivariatePoly) -> f64 {
        let a = self.normalized();
        let b = other.normalized();
        if a.coeffs.len() != b.coeffs.len() {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for (ra, rb) in a.coeffs.iter().zip(b.coeffs.iter()) {
            if ra.len() != rb.len() {
                return f64::INFINITY;
            }
            for (x, y) in ra.iter().zip(rb.iter()) {
                d = d.max((x - y).norm());
            }
        }
        d
    }
}

/// Interpolates `det(y I - A(s))` for a matrix family whose entries are
/// polynomials of degree `<= s_degree` in `s`. Nodes in `s` are doubled and the
/// fit re-validated at off-node probes until consistent.
pub fn char_poly_family<F>(dim: usize, s_degree: usize, family: F) -> Result<BivariatePoly>
where
    F: Fn(C64) -> CMatrix + Sync,
{
    let probes = [C64::from_polar(0.83, 0.4137), C64::from_polar(1.17, 2.291), C64::from_polar(0.97, -1.733)];
    let mut k = s_degree + 1;
    const ATTEMPTS: usize = 4;
    for _ in 0..ATTEMPTS {
        let nodes = circle_nodes(k, 1.0);
        let per_node: Vec<Vec<C64>> =
            nodes.par_iter().map(|&s| char_poly_coeffs(&family(s))).collect();
        let coeffs: Vec<Vec<C64>> = (0..=dim)
            .map(|j| {
                let vals: Vec<C64> = per_node.iter().map(|c| c[j]).collect();
                interpolate_circle(&vals, 1.0)
            })
            .collect();
        let poly = BivariatePoly { coeffs };
        let ok = probes.iter().all(|&s| {
            let direct = char_poly_coeffs(&family(s));
            let fit = poly.at(s);
            // rounding in the fit is bounded by the size of the summed terms
            let terms = poly.coeffs.iter().map(|row| row.iter().enumerate().map(|(k, c)| c.norm() * s.norm().powi(k as i32)).sum::<f64>());
            let scale = direct.iter().map(|c| c.norm()).chain(terms).fold(0.0, f64::max);
            direct.iter().zip(fit.iter()).all(|(a, b)| (a - b).norm() <= 1e-9 * scale.max(1e-300))
        });
        if ok {
            let mut poly = poly;
            let deg = poly.s_degree();
            for row in poly.coeffs.iter_mut() {
                row.truncate(deg + 1);
            }
            return Ok(poly);
        }
        k *= 2;
    }
    Err(Error::InterpolationIllConditioned { attempts: ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn eigenvalues_match_trace_and_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..8 {
            let a = random_matrix(&mut rng, n);
            let ev = eigenvalues(&a);
            let tr: C64 = ev.iter().sum();
            let pr: C64 = ev.iter().product();
            assert!((tr - a.trace()).norm() < 1e-10);
            assert!((pr - det(&a)).norm() < 1e-10);
            for &l in &ev {
                let shifted = a.clone() - CMatrix::identity(n, n) * l;
                assert!(kernel(&shifted, 1e-8).dim() >= 1);
            }
        }
    }

    #[test]
    fn nearly_diagonal_matrices_keep_their_spectrum() {
        let (a, b) = (C64::new(-2.1467359357861677, 1.365002760368647), C64::new(-1.9539154064208135, 1.7434343569781556));
        let t = C64::new(0.0, -2.220446049250313e-16);
        let e = C64::new(-5.551115123125783e-17, 0.0);
        let z = C64::new(0.0, 0.0);
        let m = CMatrix::from_row_slice(4, 4, &[a, z, e, z, z, b, z, e, t, z, a, z, z, t, z, b]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|x, y| x.im.total_cmp(&y.im));
        for (got, want) in ev.iter().zip([a, a, b, b]) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn clustered_roots_are_refined() {
        // (z - 1)^4 perturbed: single roots move by 1e-4, the cluster root does not
        let c = [1.0, -4.0, 6.0, -4.0, 1.0].map(|x| C64::new(x, 0.0));
        let roots = poly_roots(&c);
        let (z, m) = cluster_root(&c, &roots, C64::new(1.0, 0.0));
        assert_eq!(m, 4);
        assert!((z - 1.0).norm() < 1e-14);
        // (z - 2)^2 (z + 1)
        let c = [4.0, 0.0, -3.0, 1.0].map(|x| C64::new(x, 0.0));
        let roots = poly_roots(&c);
        assert_eq!(cluster_root(&c, &roots, C64::new(1.9, 0.1)).1, 2);
        assert!((cluster_root(&c, &roots, C64::new(1.9, 0.1)).0 - 2.0).norm() < 1e-13);
        assert_eq!(cluster_root(&c, &roots, C64::new(-1.2, 0.0)).1, 1);
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (z - 1)(z + 2)(z - i) = z^3 + (1 - i) z^2 + (-2 - i) z + 2i
        let c = [C64::new(0.0, 2.0), C64::new(-2.0, -1.0), C64::new(1.0, -1.0), C64::new(1.0, 0.0)];
        let mut r = poly_roots(&c);
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let want = [C64::new(-2.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)];
        for (x, y) in r.iter().zip(want.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn circle_interpolation_recovers_coefficients() {
        let c: Vec<C64> = (0..6).map(|k| C64::new(k as f64 - 2.5, 0.3 * k as f64)).collect();
        for radius in [1.0, 0.5, 3.0] {
            let vals: Vec<C64> = circle_nodes(6, radius).iter().map(|&z| poly_eval(&c, z)).collect();
            let back = interpolate_circle(&vals, radius);
            for (x, y) in back.iter().zip(c.iter()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn char_poly_of_companion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 5);
        let c = char_poly_coeffs(&a);
        for l in eigenvalues(&a) {
            assert!(poly_eval(&c, l).norm() < 1e-10);
        }
    }

    #[test]
    fn family_interpolation_matches_direct_determinants() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a0 = random_matrix(&mut rng, 4);
        let a1 = random_matrix(&mut rng, 4);
        let a2 = random_matrix(&mut rng, 4);
        let fam = |s: C64| a0.clone() + a1.clone() * s + a2.clone() * (s * s);
        let p = char_poly_family(4, 8, fam).unwrap();
        assert_eq!(p.y_degree(), 4);
        assert!(p.s_degree() <= 8);
        for _ in 0..20 {
            let s = C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let y = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let direct = det(&(CMatrix::identity(4, 4) * y - fam(s)));
            assert!((p.eval(s, y) - direct).norm() < 1e-8 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn underestimated_degree_is_retried() {
        let a1 = CMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]));
        let fam = |s: C64| a1.clone() * (s * s * s);
        let p = char_poly_family(2, 1, fam).unwrap();
        assert_eq!(p.s_degree(), 6);
    }

    #[test]
    fn normalization_strips_monomials() {
        let p = BivariatePoly {
            coeffs: vec![
                vec![C64::default(), C64::default(), C64::default()],
                vec![C64::default(), C64::new(2.0, 0.0), C64::new(-4.0, 0.0)],
            ],
        };
        let q = BivariatePoly { coeffs: vec![vec![C64::new(-1.0, 0.0), C64::new(2.0, 0.0)]] };
        assert!(p.curve_distance(&q) < 1e-15);
    }
}
