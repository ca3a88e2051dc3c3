//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::holo::Immersion;
use crate::mesh::Triangulation;
use crate::quatlin::{HPoint, Quaternion};

/// Minimum distance between the images of two vertices of a black triangle.
pub const MIN_SEPARATION: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[-1,1]^4`.
pub fn random_quaternion<R: Rng>(rng: &mut R) -> Quaternion {
    Quaternion::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Uniform in `[-1,1]^2` as a complex quaternion.
pub fn random_complex<R: Rng>(rng: &mut R) -> Quaternion {
    Quaternion::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), 0.0, 0.0)
}

/// Values in all of `HP^1` or only in the complex line `CP^1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueKind {
    Quaternionic,
    Complex,
}

fn sample<R: Rng>(rng: &mut R, kind: ValueKind) -> Quaternion {
    match kind {
        ValueKind::Quaternionic => random_quaternion(rng),
        ValueKind::Complex => random_complex(rng),
    }
}

/// I.i.d. affine values per vertex, redrawn until the vertices of every black
/// triangle are pairwise separated.
pub fn random_immersion<T: Triangulation + ?Sized, R: Rng>(surface: &T, rng: &mut R, kind: ValueKind) -> Immersion {
    loop {
        let values: Vec<Quaternion> = (0..surface.vertex_count()).map(|_| sample(rng, kind)).collect();
        let ok = surface.black_triangles().iter().all(|t| {
            (0..3).all(|k| (values[t[k]] - values[t[(k + 1) % 3]]).norm() >= MIN_SEPARATION)
        });
        if ok {
            return Immersion::from_affine(&values);
        }
    }
}

/// Affine values of a closed curve, redrawn until `x_k != x_{k+1}` and
/// `x_k != x_{k+2}` everywhere.
pub fn random_polygon_values<R: Rng>(n: usize, rng: &mut R, kind: ValueKind) -> Vec<HPoint> {
    loop {
        let values: Vec<Quaternion> = (0..n).map(|_| sample(rng, kind)).collect();
        let ok = (0..n).all(|k| {
            (values[k] - values[(k + 1) % n]).norm() >= MIN_SEPARATION
                && (values[k] - values[(k + 2) % n]).norm() >= MIN_SEPARATION
        });
        if ok {
            return values.into_iter().map(HPoint::from_affine).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::thin_torus;

    #[test]
    fn seeded_instances_are_reproducible() {
        let t = thin_torus(5).unwrap();
        let a = random_immersion(&t, &mut rng(7), ValueKind::Quaternionic);
        let b = random_immersion(&t, &mut rng(7), ValueKind::Quaternionic);
        assert_eq!(a, b);
        let c = random_immersion(&t, &mut rng(8), ValueKind::Complex);
        assert!(c.points.iter().all(|p| {
            let x = p.affine().unwrap();
            x.c == 0.0 && x.d == 0.0
        }));
    }
}
