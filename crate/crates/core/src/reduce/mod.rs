//! Zero level sets of translation subgroups and the quotient domain.
//!
//! For a subspace H ⊂ V acting by real translations, the momentum vanishes
//! exactly on V + iC_H with C_H = ψ⁻¹(H⊥ ∩ Ω*). Each slice (ω + H) ∩ Ω meets
//! C_H in the unique minimizer of log φ on the slice, which is what
//! [`QuotientDomain::reduce_point`] computes. The quotient by H^ℂ is realized
//! in complement coordinates as H⊥ + i(H⊥ ∩ (Ω + H)).

mod admissible;
mod newton;
mod quotient;

pub use admissible::{check_admissible, max_margin_on_sphere, AdmissibilityCertificate, Verdict, ADMISSIBILITY_BAND};
pub use quotient::{Membership, MembershipStatus, MEMBERSHIP_BAND};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cone::{ConeSpec, Matrix, RealVector, INTERIOR_EPS};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling;
use crate::seed::rng_from_seed;
use crate::tube::TubePoint;
use newton::{NewtonOptions, NewtonStatus};

/// Gradient tolerance for the slice Newton solve.
pub const NEWTON_GRAD_TOL: f64 = 1e-10;
/// Newton iteration budget.
pub const NEWTON_BUDGET: usize = 200;

/// A linear subspace H ⊂ V with orthonormal bases for H and H⊥.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Matrix,
    complement: Matrix,
}

/// JSON form: `{"basis": [[column], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSchema {
    pub basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Orthonormalizes the columns (Gram–Schmidt at 1e-12).
    pub fn from_columns(cols: &Matrix) -> Result<Self> {
        let basis = linalg::orthonormalize(cols, 1e-12)?;
        let complement = linalg::orthogonal_complement(&basis);
        Ok(Subspace { basis, complement })
    }

    pub fn zero(n: usize) -> Self {
        Subspace { basis: Matrix::zeros(n, 0), complement: Matrix::identity(n, n) }
    }

    pub fn from_schema(s: &SubspaceSchema, n: usize) -> Result<Self> {
        if let Some(c) = s.basis.iter().find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: c.len() });
        }
        if s.basis.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if s.basis.is_empty() {
            return Ok(Subspace::zero(n));
        }
        Subspace::from_columns(&Matrix::from_fn(n, s.basis.len(), |i, j| s.basis[j][i]))
    }

    pub fn to_schema(&self) -> SubspaceSchema {
        SubspaceSchema { basis: self.basis.column_iter().map(|c| c.iter().copied().collect()).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn codim(&self) -> usize {
        self.complement.ncols()
    }

    /// n × k, orthonormal columns spanning H.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// n × (n − k), orthonormal columns spanning H⊥.
    pub fn complement(&self) -> &Matrix {
        &self.complement
    }
}

/// The zero-momentum representative of an H^ℂ-orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionResult {
    pub point: TubePoint,
    /// h₂ ∈ H with Im(point) = Im(x) + h₂.
    #[serde(serialize_with = "crate::cli::format::ser_vector")]
    pub shift: RealVector,
    /// ‖μ_H(point)‖∞ over the orthonormal basis of H.
    pub residual: f64,
    pub iterations: usize,
}

/// Quotient coordinates (C^T Re, C^T Im) in the complement basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientCoords {
    #[serde(serialize_with = "crate::cli::format::ser_vector")]
    pub re: RealVector,
    #[serde(serialize_with = "crate::cli::format::ser_vector")]
    pub im: RealVector,
}

/// Output of the split map: quotient and fiber coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCoordinates {
    pub quotient: QuotientCoords,
    pub fiber: QuotientCoords,
}

/// True iff ψ(ω) ⊥ H to `tol`, i.e. V + iω lies on the zero level set.
pub fn in_zero_cone(cone: &ConeSpec, h: &Subspace, omega: &RealVector, tol: f64) -> Result<bool> {
    let dual = cone.dual_map(omega)?;
    if h.dim() == 0 {
        return Ok(true);
    }
    Ok((h.basis().transpose() * dual).amax() <= tol)
}

/// Coordinate split without the Z-membership check.
pub fn split_coordinates(h: &Subspace, z: &TubePoint) -> SplitCoordinates {
    let ct = h.complement().transpose();
    let bt = h.basis().transpose();
    SplitCoordinates {
        quotient: QuotientCoords { re: &ct * &z.re, im: &ct * &z.im },
        fiber: QuotientCoords { re: &bt * &z.re, im: &bt * &z.im },
    }
}

/// Inverse of [`split_coordinates`]: C q + B f in both parts.
pub fn reconstruct(h: &Subspace, s: &SplitCoordinates) -> TubePoint {
    TubePoint {
        re: h.complement() * &s.quotient.re + h.basis() * &s.fiber.re,
        im: h.complement() * &s.quotient.im + h.basis() * &s.fiber.im,
    }
}

/// A tube domain together with an admissible translation subgroup.
#[derive(Debug, Clone)]
pub struct QuotientDomain {
    cone: ConeSpec,
    subspace: Subspace,
    certificate: AdmissibilityCertificate,
}

impl QuotientDomain {
    /// Certifies admissibility once; fails with `NotAdmissible` or `Undecided`.
    pub fn new(cone: ConeSpec, subspace: Subspace, seed: u64) -> Result<Self> {
        let certificate = check_admissible(&cone, &subspace, seed)?;
        match certificate.verdict {
            Verdict::Admissible => Ok(QuotientDomain { cone, subspace, certificate }),
            Verdict::Inadmissible => Err(Error::NotAdmissible),
            Verdict::Undecided => Err(Error::Undecided),
        }
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn certificate(&self) -> &AdmissibilityCertificate {
        &self.certificate
    }

    /// Unit y ∈ H⊥ ∩ Ω* from the admissibility certificate.
    pub fn dual_witness(&self) -> &RealVector {
        self.certificate.witness.as_ref().expect("admissible certificates carry a witness")
    }

    pub fn in_zero_cone(&self, omega: &RealVector, tol: f64) -> Result<bool> {
        in_zero_cone(&self.cone, &self.subspace, omega, tol)
    }

    /// ‖B^T ψ(ω)‖∞: the momentum of V + iω over the orthonormal basis of H.
    pub fn momentum_residual(&self, omega: &RealVector) -> Result<f64> {
        let dual = self.cone.dual_map(omega)?;
        Ok(if self.subspace.dim() == 0 { 0.0 } else { (self.subspace.basis().transpose() * dual).amax() })
    }

    /// Moves Im(x) along H to the minimizer of log φ on (Im x + H) ∩ Ω.
    ///
    /// The real part is kept; the result is the canonical point of
    /// H^ℂ·x ∩ M_H.
    pub fn reduce_point(&self, x: &TubePoint) -> Result<ReductionResult> {
        x.validate(&self.cone)?;
        let b = self.subspace.basis();
        let opts = NewtonOptions { max_iter: NEWTON_BUDGET, grad_tol: NEWTON_GRAD_TOL, ..NewtonOptions::default() };
        let out = admissible::minimize_slice(&self.cone, b, &x.im, &opts);
        match out.status {
            NewtonStatus::Converged => {}
            NewtonStatus::Diverged => return Err(Error::NotAdmissible),
            NewtonStatus::MaxIterations | NewtonStatus::Stalled => {
                return Err(Error::MaxIterations { iterations: out.iterations, residual: out.grad_inf })
            }
        }
        let shift = b * &out.x;
        let point = TubePoint { re: x.re.clone(), im: &x.im + &shift };
        let residual = self.momentum_residual(&point.im)?;
        Ok(ReductionResult { point, shift, residual, iterations: out.iterations })
    }

    /// Largest ‖Im(m_j) − Im(m_0)‖∞ over reductions of random H^ℂ-translates
    /// of x; trial 0 is x itself.
    pub fn orbit_agreement(&self, x: &TubePoint, trials: usize, seed: u64) -> Result<f64> {
        if trials == 0 {
            return Ok(0.0);
        }
        let base = self.reduce_point(x)?;
        let k = self.subspace.dim();
        let b = self.subspace.basis();
        let mut rng = rng_from_seed(seed);
        let scale = 1.0 + x.im.norm();
        let mut worst: f64 = 0.0;
        for _ in 1..trials {
            let h1 = b * sampling::gaussian_vector(k, &mut rng) * scale;
            let mut c2 = sampling::gaussian_vector(k, &mut rng) * scale;
            while self.cone.margin(&(&x.im + b * &c2))? <= INTERIOR_EPS {
                c2 *= 0.5;
            }
            let z = TubePoint { re: &x.re + h1, im: &x.im + b * c2 };
            let m = self.reduce_point(&z)?;
            worst = worst.max((&m.point.im - &base.point.im).amax());
        }
        Ok(worst)
    }

    /// Decides t ∈ H⊥ ∩ (Ω + H) for t given in complement coordinates.
    pub fn quotient_membership(&self, t: &RealVector) -> Result<Membership> {
        if t.len() != self.subspace.codim() {
            return Err(Error::DimensionMismatch { expected: self.subspace.codim(), found: t.len() });
        }
        quotient::decide(&self.cone, self.subspace.basis(), self.subspace.complement(), t)
    }

    /// τ: quotient and fiber coordinates of z ∈ Z = V + i(Ω + H).
    pub fn split_map(&self, z: &TubePoint) -> Result<SplitCoordinates> {
        self.cone.check_dim(&z.re)?;
        self.cone.check_dim(&z.im)?;
        let split = split_coordinates(&self.subspace, z);
        if !self.quotient_membership(&split.quotient.im)?.is_member() {
            return Err(Error::NotInZ);
        }
        Ok(split)
    }

    /// Quotient coordinates of the reduced representative of x.
    pub fn reduced_coordinates(&self, x: &TubePoint) -> Result<QuotientCoords> {
        let m = self.reduce_point(x)?;
        Ok(split_coordinates(&self.subspace, &m.point).quotient)
    }

    /// A point of the tube over the quotient point s, using the membership witness.
    pub fn lift(&self, s: &QuotientCoords) -> Result<TubePoint> {
        let mem = self.quotient_membership(&s.im)?;
        if !mem.is_member() {
            return Err(Error::NotInZ);
        }
        let b = self.subspace.basis();
        let c = self.subspace.complement();
        TubePoint::new(&self.cone, c * &s.re, c * &s.im + b * mem.witness)
    }

    /// Norm bound (K_radius / p)·‖y‖ on (K + H) ∩ Ω̄ for ‖K‖ ≤ K_radius.
    pub fn slice_bound(&self, k_radius: f64, y: &RealVector) -> Result<f64> {
        let p = self.witness_constant(y)?;
        if !(k_radius >= 0.0) {
            return Err(Error::InvalidWitness(format!("radius {k_radius} is negative")));
        }
        Ok(k_radius / p * y.norm())
    }

    /// Pointwise bound g(ω, y)/p on ‖ω + h‖ over (ω + H) ∩ Ω̄.
    pub fn slice_point_bound(&self, omega: &RealVector, y: &RealVector) -> Result<f64> {
        let p = self.witness_constant(y)?;
        self.cone.check_dim(omega)?;
        Ok(omega.dot(y) / p)
    }

    fn witness_constant(&self, y: &RealVector) -> Result<f64> {
        self.cone.check_dim(y)?;
        let off = if self.subspace.dim() == 0 { 0.0 } else { (self.subspace.basis().transpose() * y).amax() };
        if off > 1e-9 * y.norm() {
            return Err(Error::InvalidWitness(format!("not orthogonal to H (residual {off:e})")));
        }
        self.cone.lower_bound_constant(y).map_err(|_| Error::InvalidWitness("not in the open dual cone".into()))
    }

    /// Random quotient point: Gaussian real part, imaginary part projected
    /// from a random interior point of Ω (hence a member).
    pub fn sample_quotient_point(&self, rng: &mut crate::seed::Rng) -> QuotientCoords {
        let c = self.subspace.complement();
        let re = sampling::gaussian_vector(c.ncols(), rng);
        let im = c.transpose() * sampling::interior_point(&self.cone, rng);
        QuotientCoords { re, im }
    }

    /// Random point of (ω + H) ∩ Ω̄, including boundary points.
    pub fn sample_slice_point(&self, omega: &RealVector, rng: &mut crate::seed::Rng) -> Result<RealVector> {
        let k = self.subspace.dim();
        if k == 0 {
            return Ok(omega.clone());
        }
        let dir = self.subspace.basis() * sampling::unit_vector(k, rng);
        let extent = ray_extent(&self.cone, omega, &dir)?;
        let t = if rng.random_bool(0.2) { extent } else { extent * rng.random::<f64>() };
        let p = omega + dir * t;
        Ok(p)
    }
}

/// Largest t ≥ 0 with ω + t·dir ∈ Ω̄ (bisection on the margin), for ω ∈ Ω
/// and a direction leaving the closed cone.
pub fn ray_extent(cone: &ConeSpec, omega: &RealVector, dir: &RealVector) -> Result<f64> {
    let mut hi = 1.0;
    while cone.margin(&(omega + dir * hi))? >= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cone.margin(&(omega + dir * mid))? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(lo)
}
