//! Affine generators, their vector fields, and momentum maps on the tube.
//!
//! For ξ = (A, a) acting by x ↦ Ax + a, the momentum at v + iω is
//! `μ^ξ(v + iω) = -g(ψ(ω), A v + a)`. It is well defined for every affine
//! generator; the defining relation `dμ^ξ = ω_B(ξ_X, ·)` additionally needs
//! A in the Lie algebra of the cone's linear automorphism group, which
//! [`AffineGenerator::compatibility_residual`] measures.

use serde::{Deserialize, Serialize};

use crate::cone::{ConeSpec, Matrix, RealVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::tube::{Tangent, TubePoint};

/// Tolerance for Lie-algebra membership and linear independence checks.
pub const ALGEBRA_TOL: f64 = 1e-10;

/// ξ = (ξ_Ω, ξ_V): a linear part and a translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorSchema", into = "GeneratorSchema")]
pub struct AffineGenerator {
    pub linear: Matrix,
    pub translation: RealVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorSchema {
    linear: Vec<Vec<f64>>,
    translation: Vec<f64>,
}

impl TryFrom<GeneratorSchema> for AffineGenerator {
    type Error = String;

    fn try_from(s: GeneratorSchema) -> std::result::Result<Self, String> {
        let n = s.translation.len();
        if s.linear.len() != n || s.linear.iter().any(|r| r.len() != n) {
            return Err(format!("linear part must be {n}x{n} to match the translation"));
        }
        let linear = Matrix::from_fn(n, n, |i, j| s.linear[i][j]);
        Ok(AffineGenerator { linear, translation: RealVector::from_vec(s.translation) })
    }
}

impl From<AffineGenerator> for GeneratorSchema {
    fn from(g: AffineGenerator) -> Self {
        let n = g.dim();
        GeneratorSchema {
            linear: (0..n).map(|i| (0..n).map(|j| g.linear[(i, j)]).collect()).collect(),
            translation: g.translation.as_slice().to_vec(),
        }
    }
}

impl AffineGenerator {
    pub fn new(linear: Matrix, translation: RealVector) -> Result<Self> {
        if !linear.is_square() || linear.nrows() != translation.len() {
            return Err(Error::DimensionMismatch { expected: translation.len(), found: linear.nrows() });
        }
        Ok(AffineGenerator { linear, translation })
    }

    pub fn translation(a: RealVector) -> Self {
        let n = a.len();
        AffineGenerator { linear: Matrix::zeros(n, n), translation: a }
    }

    pub fn linear(a: Matrix) -> Self {
        let n = a.nrows();
        AffineGenerator::new(a, RealVector::zeros(n)).expect("square matrix")
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// [(A, a), (B, b)] = (AB - BA, Ab - Ba).
    pub fn bracket(&self, other: &AffineGenerator) -> AffineGenerator {
        AffineGenerator {
            linear: &self.linear * &other.linear - &other.linear * &self.linear,
            translation: &self.linear * &other.translation - &other.linear * &self.translation,
        }
    }

    pub fn scale(&self, s: f64) -> AffineGenerator {
        AffineGenerator { linear: &self.linear * s, translation: &self.translation * s }
    }

    pub fn add(&self, other: &AffineGenerator) -> AffineGenerator {
        AffineGenerator { linear: &self.linear + &other.linear, translation: &self.translation + &other.translation }
    }

    /// Coordinates in matrix ⊕ vector space (row-major linear part, then translation).
    pub fn flatten(&self) -> RealVector {
        let n = self.dim();
        let mut out = RealVector::zeros(n * n + n);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.linear[(i, j)];
            }
        }
        out.rows_mut(n * n, n).copy_from(&self.translation);
        out
    }

    /// Distance of the linear part from the Lie algebra of the cone's linear
    /// automorphism group (0 for members).
    ///
    /// Lorentz blocks must have the form λI + M with MᵀQ + QM = 0,
    /// orthant blocks must be diagonal, and products block diagonal.
    pub fn compatibility_residual(&self, cone: &ConeSpec) -> Result<f64> {
        let n = cone.ambient_dim();
        if self.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.dim() });
        }
        let a = &self.linear;
        let mut res: f64 = 0.0;
        let blocks = cone.blocks();
        let block_of = |i: usize| blocks.iter().rposition(|(off, _)| *off <= i).expect("offset 0 exists");
        for i in 0..n {
            for j in 0..n {
                if block_of(i) != block_of(j) {
                    res = res.max(a[(i, j)].abs());
                }
            }
        }
        for (off, leaf) in &blocks {
            let m = leaf.ambient_dim();
            let b = a.view((*off, *off), (m, m));
            match leaf {
                ConeSpec::Orthant { .. } => {
                    for i in 0..m {
                        for j in 0..m {
                            if i != j {
                                res = res.max(b[(i, j)].abs());
                            }
                        }
                    }
                }
                ConeSpec::Lorentz { .. } => {
                    let q = Matrix::from_fn(m, m, |i, j| match (i, j) {
                        (0, 0) => 1.0,
                        (i, j) if i == j => -1.0,
                        _ => 0.0,
                    });
                    let s = b.transpose() * &q + &q * b;
                    let lambda = 0.5 * s[(0, 0)];
                    res = res.max((s - q * (2.0 * lambda)).abs().max());
                }
                ConeSpec::Product { .. } => unreachable!("blocks are leaves"),
            }
        }
        Ok(res / a.abs().max().max(1.0))
    }

    pub fn check_compatible(&self, cone: &ConeSpec) -> Result<()> {
        let r = self.compatibility_residual(cone)?;
        if r <= ALGEBRA_TOL {
            Ok(())
        } else {
            Err(Error::NotConeCompatible { residual: r })
        }
    }
}

/// A basis of a Lie algebra of affine generators.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSet {
    pub generators: Vec<AffineGenerator>,
}

impl GeneratorSet {
    /// Builds a set, rejecting linearly dependent generators.
    pub fn new(generators: Vec<AffineGenerator>) -> Result<Self> {
        let set = GeneratorSet { generators };
        set.validate()?;
        Ok(set)
    }

    pub fn empty() -> Self {
        GeneratorSet::default()
    }

    /// Translation generators for the columns of `basis`.
    pub fn from_translations(basis: &Matrix) -> Self {
        GeneratorSet {
            generators: basis.column_iter().map(|c| AffineGenerator::translation(c.clone_owned())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.generators.first() else {
            return Ok(());
        };
        let n = first.dim();
        if let Some(g) = self.generators.iter().find(|g| g.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
        }
        let flat = self.flattened();
        let sv = linalg::singular_values(&flat);
        let smax = sv.first().copied().unwrap_or(0.0);
        if sv.len() < self.len() || sv.iter().any(|&s| s <= ALGEBRA_TOL * smax) || smax == 0.0 {
            return Err(Error::RankDeficient);
        }
        Ok(())
    }

    /// Columns are the flattened generators.
    pub fn flattened(&self) -> Matrix {
        let cols: Vec<RealVector> = self.generators.iter().map(AffineGenerator::flatten).collect();
        if cols.is_empty() {
            Matrix::zeros(0, 0)
        } else {
            Matrix::from_columns(&cols)
        }
    }
}

/// An affine transformation x ↦ E x + b.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix,
    pub translation: RealVector,
}

impl AffineMap {
    pub fn identity(n: usize) -> Self {
        AffineMap { linear: Matrix::identity(n, n), translation: RealVector::zeros(n) }
    }

    /// self ∘ other.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            linear: &self.linear * &other.linear,
            translation: &self.linear * &other.translation + &self.translation,
        }
    }

    /// Acts real-linearly on both parts; the translation moves the real part.
    pub fn apply(&self, x: &TubePoint) -> TubePoint {
        TubePoint { re: &self.linear * &x.re + &self.translation, im: &self.linear * &x.im }
    }
}

/// exp(tξ) as the exponential of the augmented matrix [[tA, ta], [0, 0]].
pub fn exp_affine(xi: &AffineGenerator, t: f64) -> AffineMap {
    let n = xi.dim();
    let mut aug = Matrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&xi.linear * t));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&xi.translation * t));
    let e = aug.exp();
    AffineMap {
        linear: e.view((0, 0), (n, n)).clone_owned(),
        translation: e.view((0, n), (n, 1)).column(0).clone_owned(),
    }
}

fn check_generator(cone: &ConeSpec, xi: &AffineGenerator) -> Result<()> {
    let n = cone.ambient_dim();
    if xi.dim() != n || xi.linear.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: xi.dim() });
    }
    Ok(())
}

/// ξ_X(x) = d/dt exp(tξ)·x at t = 0.
pub fn vector_field(xi: &AffineGenerator, x: &TubePoint) -> Result<Tangent> {
    if xi.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: xi.dim() });
    }
    Ok(Tangent::new(&xi.linear * &x.re + &xi.translation, &xi.linear * &x.im))
}

/// μ^ξ(v + iω) = -g(ψ(ω), ξ_Ω v + ξ_V).
pub fn momentum(cone: &ConeSpec, xi: &AffineGenerator, x: &TubePoint) -> Result<f64> {
    check_generator(cone, xi)?;
    x.validate(cone)?;
    let dual = cone.dual_map(&x.im)?;
    Ok(-dual.dot(&(&xi.linear * &x.re + &xi.translation)))
}

/// Components of μ_H over the basis of 𝔥.
pub fn momentum_map(cone: &ConeSpec, h: &GeneratorSet, x: &TubePoint) -> Result<RealVector> {
    x.validate(cone)?;
    let dual = cone.dual_map(&x.im)?;
    let mut out = RealVector::zeros(h.len());
    for (j, xi) in h.generators.iter().enumerate() {
        check_generator(cone, xi)?;
        out[j] = -dual.dot(&(&xi.linear * &x.re + &xi.translation));
    }
    Ok(out)
}

/// (k × 2n) Jacobian of μ_H in (re, im) coordinates.
///
/// Row ξ is `[-ξ_Ωᵀ ψ(ω), ∇²log φ(ω) (ξ_Ω v + ξ_V)]`, using Dψ = -∇²log φ.
pub fn momentum_jacobian(cone: &ConeSpec, h: &GeneratorSet, x: &TubePoint) -> Result<Matrix> {
    x.validate(cone)?;
    let n = cone.ambient_dim();
    let dual = cone.dual_map(&x.im)?;
    let hess = cone.log_char_hessian(&x.im)?;
    let mut jac = Matrix::zeros(h.len(), 2 * n);
    for (j, xi) in h.generators.iter().enumerate() {
        check_generator(cone, xi)?;
        let dv = -(xi.linear.transpose() * &dual);
        let dw = &hess * (&xi.linear * &x.re + &xi.translation);
        jac.view_mut((j, 0), (1, n)).copy_from(&dv.transpose());
        jac.view_mut((j, n), (1, n)).copy_from(&dw.transpose());
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> RealVector {
        RealVector::from_column_slice(x)
    }

    fn worked() -> (ConeSpec, AffineGenerator) {
        (ConeSpec::lorentz(1), AffineGenerator::translation(v(&[0.0, 1.0])))
    }

    #[test]
    fn vector_field_examples() {
        let (c, xi) = worked();
        let x = TubePoint::new(&c, v(&[3.0, -1.0]), v(&[2.0, 1.0])).unwrap();
        assert_eq!(vector_field(&xi, &x).unwrap(), Tangent::new(v(&[0.0, 1.0]), v(&[0.0, 0.0])));
        let scale = AffineGenerator::linear(Matrix::identity(2, 2));
        let x = TubePoint::new(&c, v(&[0.0, 0.0]), v(&[2.0, 0.0])).unwrap();
        assert_eq!(vector_field(&scale, &x).unwrap(), Tangent::new(v(&[0.0, 0.0]), v(&[2.0, 0.0])));
    }

    #[test]
    fn momentum_examples() {
        let (c, xi) = worked();
        let x = TubePoint::new(&c, v(&[0.0, 0.0]), v(&[2.0, 1.0])).unwrap();
        assert_relative_eq!(momentum(&c, &xi, &x).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        // Lorentz-pairing form of the same momentum.
        let w = [2.0, 1.0];
        let lorentz = -(2.0 / crate::cone::lorentz_pairing(&w, &w)) * crate::cone::lorentz_pairing(&w, &[0.0, 1.0]);
        assert_relative_eq!(lorentz, 2.0 / 3.0, epsilon = 1e-15);

        let x = TubePoint::new(&c, v(&[0.0, 0.0]), v(&[2.0, 0.0])).unwrap();
        assert_eq!(momentum(&c, &xi, &x).unwrap(), 0.0);
        let lin = AffineGenerator::linear(Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        let x = TubePoint::new(&c, v(&[0.0, 0.0]), v(&[2.0, 1.0])).unwrap();
        assert_eq!(momentum(&c, &lin, &x).unwrap(), 0.0);
    }

    #[test]
    fn momentum_map_examples() {
        let (c, xi) = worked();
        let h = GeneratorSet::new(vec![xi]).unwrap();
        let x = TubePoint::new(&c, v(&[0.0, 0.0]), v(&[2.0, 0.0])).unwrap();
        assert_eq!(momentum_map(&c, &h, &x).unwrap(), v(&[0.0]));
        let x = TubePoint::new(&c, v(&[0.0, 0.0]), v(&[2.0, 1.0])).unwrap();
        assert_relative_eq!(momentum_map(&c, &h, &x).unwrap(), v(&[2.0 / 3.0]), epsilon = 1e-15);
        assert_eq!(momentum_map(&c, &GeneratorSet::empty(), &x).unwrap().len(), 0);
    }

    #[test]
    fn jacobian_worked_example() {
        let (c, xi) = worked();
        let h = GeneratorSet::new(vec![xi]).unwrap();
        let x = TubePoint::new(&c, v(&[0.0, 0.0]), v(&[2.0, 0.0])).unwrap();
        let jac = momentum_jacobian(&c, &h, &x).unwrap();
        assert_eq!(jac.shape(), (1, 4));
        assert_eq!(jac.view((0, 0), (1, 2)).abs().max(), 0.0);
        assert_eq!(linalg::singular_values(&jac).iter().filter(|&&s| s > 1e-12).count(), 1);
    }

    #[test]
    fn exp_examples() {
        let a = v(&[0.5, -2.0]);
        let e = exp_affine(&AffineGenerator::translation(a.clone()), 3.0);
        assert_relative_eq!(e.linear, Matrix::identity(2, 2), epsilon = 1e-14);
        assert_relative_eq!(e.translation, a * 3.0, epsilon = 1e-14);
        let e = exp_affine(&AffineGenerator::linear(Matrix::identity(3, 3)), 0.7);
        assert_relative_eq!(e.linear, Matrix::identity(3, 3) * 0.7_f64.exp(), epsilon = 1e-14);
        assert!(e.translation.norm() == 0.0);
    }

    #[test]
    fn compatibility() {
        let c = ConeSpec::lorentz(1);
        let boost = AffineGenerator::linear(Matrix::from_row_slice(2, 2, &[0.3, 1.0, 1.0, 0.3]));
        assert!(boost.check_compatible(&c).is_ok());
        let shear = AffineGenerator::linear(Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        assert!(matches!(shear.check_compatible(&c), Err(Error::NotConeCompatible { .. })));
        let o = ConeSpec::product(vec![ConeSpec::orthant(1), ConeSpec::orthant(1)]);
        let mix = AffineGenerator::linear(Matrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 2.0]));
        assert!(mix.check_compatible(&o).is_err());
    }

    #[test]
    fn dependent_generators_rejected() {
        let a = AffineGenerator::translation(v(&[1.0, 0.0]));
        assert_eq!(GeneratorSet::new(vec![a.clone(), a.scale(2.0)]), Err(Error::RankDeficient));
    }

    #[test]
    fn generator_schema() {
        let g: AffineGenerator = serde_json::from_str(r#"{"linear":[[1,0],[0,1]],"translation":[0,1]}"#).unwrap();
        assert_eq!(g.linear, Matrix::identity(2, 2));
        assert!(serde_json::from_str::<AffineGenerator>(r#"{"linear":[[1,0]],"translation":[0,1]}"#).is_err());
    }
}
