//! Random instances: interior points, subspaces, and cone-compatible generators.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::cone::{ConeSpec, Matrix, RealVector};
use crate::moment::AffineGenerator;
use crate::seed::Rng;

pub fn gaussian_vector(n: usize, rng: &mut Rng) -> RealVector {
    RealVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_matrix(r: usize, c: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Random unit vector.
pub fn unit_vector(n: usize, rng: &mut Rng) -> RealVector {
    loop {
        let v = gaussian_vector(n, rng);
        let r = v.norm();
        if r > 1e-3 {
            return v / r;
        }
    }
}

/// Random interior point with margin in roughly [0.1, 3].
pub fn interior_point(cone: &ConeSpec, rng: &mut Rng) -> RealVector {
    let n = cone.ambient_dim();
    let mut w = RealVector::zeros(n);
    for (off, leaf) in cone.blocks() {
        let m = leaf.ambient_dim();
        match leaf {
            ConeSpec::Lorentz { .. } => {
                let tail = gaussian_vector(m - 1, rng);
                w[off] = tail.norm() + rng.random_range(0.1..3.0);
                w.rows_mut(off + 1, m - 1).copy_from(&tail);
            }
            ConeSpec::Orthant { .. } => {
                for i in 0..m {
                    w[off + i] = rng.random_range(0.1..3.0);
                }
            }
            ConeSpec::Product { .. } => unreachable!("blocks are leaves"),
        }
    }
    w
}

/// Interior point whose margin is exactly `margin` (up to rounding).
///
/// Shifts a random interior point onto the boundary along the unit point,
/// then back in by `margin`; the margin of every catalog cone is additive
/// along the unit point.
pub fn near_boundary_point(cone: &ConeSpec, margin: f64, rng: &mut Rng) -> RealVector {
    let w = interior_point(cone, rng);
    let m = cone.margin(&w).expect("dimension matches");
    w + cone.unit_point() * (margin - m)
}

/// Cone-compatible linear part: λI + Qₛ per Lorentz block (Qₛ in so(1,d)),
/// random diagonal per orthant block.
pub fn compatible_linear(cone: &ConeSpec, rng: &mut Rng) -> Matrix {
    let n = cone.ambient_dim();
    let mut a = Matrix::zeros(n, n);
    for (off, leaf) in cone.blocks() {
        let m = leaf.ambient_dim();
        match leaf {
            ConeSpec::Lorentz { .. } => {
                let lambda: f64 = StandardNormal.sample(rng);
                let s = gaussian_matrix(m, m, rng);
                let skew = &s - s.transpose();
                let q = Matrix::from_diagonal(&RealVector::from_fn(m, |i, _| if i == 0 { 1.0 } else { -1.0 }));
                let block = Matrix::identity(m, m) * lambda + q * skew * 0.5;
                a.view_mut((off, off), (m, m)).copy_from(&block);
            }
            ConeSpec::Orthant { .. } => {
                for i in 0..m {
                    a[(off + i, off + i)] = StandardNormal.sample(rng);
                }
            }
            ConeSpec::Product { .. } => unreachable!("blocks are leaves"),
        }
    }
    a
}

pub fn compatible_generator(cone: &ConeSpec, rng: &mut Rng) -> AffineGenerator {
    let n = cone.ambient_dim();
    AffineGenerator::new(compatible_linear(cone, rng), gaussian_vector(n, rng)).expect("square")
}

/// Cone drawn from lorentz(1..=max_d) and orthant(2..=max_d+1).
pub fn random_cone(max_d: usize, rng: &mut Rng) -> ConeSpec {
    if rng.random_bool(0.5) {
        ConeSpec::lorentz(rng.random_range(1..=max_d))
    } else {
        ConeSpec::orthant(rng.random_range(2..=max_d + 1))
    }
}

/// k columns spanning a random subspace orthogonal to a random interior
/// point of Ω* (every catalog cone is self-dual), hence admissible.
pub fn admissible_subspace(cone: &ConeSpec, k: usize, rng: &mut Rng) -> Matrix {
    let n = cone.ambient_dim();
    assert!(k < n, "an admissible subspace is proper");
    let y = interior_point(cone, rng).normalize();
    let g = gaussian_matrix(n, k, rng);
    &g - &y * (y.transpose() * &g)
}
