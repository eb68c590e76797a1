//! Certificates for H⊥ ∩ Ω* ≠ ∅ versus H ∩ Ω̄ ≠ {0}.
//!
//! Exactly one of the two holds. The search first maximizes the concave gauge
//! over the unit sphere of each side by projected supergradient ascent with
//! seeded multi-start. When neither side clears the tolerance band, the
//! barrier is minimized over the slice e + H: a finite minimizer yields a
//! dual witness, an escaping iterate yields a direction in H ∩ Ω̄.

use serde::Serialize;

use super::newton::{self, Eval, NewtonOptions, NewtonStatus};
use super::Subspace;
use crate::cone::{ConeSpec, Matrix, RealVector};
use crate::error::Result;
use crate::sampling;
use crate::seed::rng_from_seed;

/// Witness band: dual witnesses need margin above it, primal ones above its negative.
pub const ADMISSIBILITY_BAND: f64 = 1e-9;

const ASCENT_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Admissible,
    Inadmissible,
    Undecided,
}

/// Outcome of the admissibility search with its witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityCertificate {
    pub verdict: Verdict,
    /// Unit y ∈ H⊥ ∩ Ω* when admissible, unit h ∈ H ∩ Ω̄ when inadmissible.
    #[serde(serialize_with = "crate::cli::format::ser_opt_vector")]
    pub witness: Option<RealVector>,
    /// Dual margin (admissible) or margin (inadmissible) of the witness.
    pub witness_margin: f64,
}

impl AdmissibilityCertificate {
    /// Re-checks the witness against its side of the alternative.
    pub fn verify(&self, cone: &ConeSpec, h: &Subspace, tol: f64) -> bool {
        let Some(w) = &self.witness else {
            return false;
        };
        if w.len() != cone.ambient_dim() || (w.norm() - 1.0).abs() > tol {
            return false;
        }
        match self.verdict {
            Verdict::Admissible => {
                let off = if h.dim() == 0 { 0.0 } else { (h.basis().transpose() * w).amax() };
                off <= tol && cone.dual_margin(w).is_ok_and(|m| m > tol)
            }
            Verdict::Inadmissible => {
                let off = if h.codim() == 0 { 0.0 } else { (h.complement().transpose() * w).amax() };
                off <= tol && cone.margin(w).is_ok_and(|m| m >= -tol)
            }
            Verdict::Undecided => false,
        }
    }
}

/// Largest gauge value over the unit sphere of span(`basis`) found by
/// multi-start projected supergradient ascent, with its maximizer.
///
/// `dual` selects the dual-cone margin. The first start is the projection of
/// the unit point; 8·dim seeded random starts follow.
pub fn max_margin_on_sphere(cone: &ConeSpec, basis: &Matrix, dual: bool, seed: u64) -> Result<(f64, RealVector)> {
    let m = basis.ncols();
    let n = cone.ambient_dim();
    if m == 0 {
        return Ok((f64::NEG_INFINITY, RealVector::zeros(n)));
    }
    let gauge = |v: &RealVector| if dual { cone.dual_margin(v) } else { cone.margin(v) };
    let mut rng = rng_from_seed(seed);
    let mut starts = Vec::with_capacity(8 * m + 1);
    let proj = basis.transpose() * cone.unit_point();
    if proj.norm() > 1e-12 {
        starts.push(proj.normalize());
    }
    starts.extend((0..8 * m).map(|_| sampling::unit_vector(m, &mut rng)));

    let mut best = (f64::NEG_INFINITY, RealVector::zeros(n));
    for z0 in starts {
        let mut z = z0;
        for step in 0..ASCENT_STEPS {
            let v = basis * &z;
            let val = gauge(&v)?;
            if val > best.0 {
                best = (val, v.clone());
            }
            let g = basis.transpose() * cone.margin_supergradient(&v)?;
            let tangent = &g - &z * g.dot(&z);
            let tn = tangent.norm();
            if tn < 1e-15 {
                break;
            }
            let alpha = 0.5 / ((step + 1) as f64).sqrt();
            z = (z + tangent * (alpha / tn)).normalize();
        }
        if best.0 > ADMISSIBILITY_BAND {
            break;
        }
    }
    Ok(best)
}

/// Decides H ∩ Ω̄ = {0} with a verifiable witness.
pub fn check_admissible(cone: &ConeSpec, h: &Subspace, seed: u64) -> Result<AdmissibilityCertificate> {
    let n = cone.ambient_dim();
    if h.ambient_dim() != n {
        return Err(crate::Error::DimensionMismatch { expected: n, found: h.ambient_dim() });
    }
    let e = cone.unit_point();
    let e_unit = e.normalize();
    if h.dim() == 0 {
        let m = cone.dual_margin(&e_unit)?;
        return Ok(certificate(Verdict::Admissible, e_unit, m));
    }
    if h.codim() == 0 {
        let m = cone.margin(&e_unit)?;
        return Ok(certificate(Verdict::Inadmissible, e_unit, m));
    }

    let (val, y) = max_margin_on_sphere(cone, h.complement(), true, seed)?;
    if val > ADMISSIBILITY_BAND {
        return Ok(certificate(Verdict::Admissible, y, val));
    }
    let (val, w) = max_margin_on_sphere(cone, h.basis(), false, crate::seed::splitmix64(seed))?;
    if val >= -ADMISSIBILITY_BAND {
        return Ok(certificate(Verdict::Inadmissible, w, val));
    }

    let opts = NewtonOptions { divergence_radius: 1e10 * (1.0 + e.norm()), ..NewtonOptions::default() };
    let out = minimize_slice(cone, h.basis(), &e, &opts);
    let point = &e + h.basis() * &out.x;
    match out.status {
        NewtonStatus::Converged => {
            let dual = cone.dual_map(&point)?;
            let y = h.complement() * (h.complement().transpose() * dual);
            if y.norm() > 0.0 {
                let y = y.normalize();
                let m = cone.dual_margin(&y)?;
                if m > ADMISSIBILITY_BAND {
                    return Ok(certificate(Verdict::Admissible, y, m));
                }
            }
        }
        NewtonStatus::Diverged => {
            let dir = h.basis() * &out.x;
            let w = h.basis() * (h.basis().transpose() * dir).normalize();
            let m = cone.margin(&w)?;
            if m >= -ADMISSIBILITY_BAND {
                return Ok(certificate(Verdict::Inadmissible, w, m));
            }
        }
        NewtonStatus::MaxIterations | NewtonStatus::Stalled => {}
    }
    Ok(AdmissibilityCertificate { verdict: Verdict::Undecided, witness: None, witness_margin: f64::NAN })
}

fn certificate(verdict: Verdict, witness: RealVector, margin: f64) -> AdmissibilityCertificate {
    AdmissibilityCertificate { verdict, witness: Some(witness), witness_margin: margin }
}

/// Minimizes c ↦ log φ(ω₀ + B c).
pub(crate) fn minimize_slice(
    cone: &ConeSpec,
    basis: &Matrix,
    omega0: &RealVector,
    opts: &NewtonOptions,
) -> newton::NewtonOutcome {
    let f = |c: &RealVector| -> Option<Eval> {
        let w = omega0 + basis * c;
        let value = cone.log_char(&w).ok()?;
        let dual = cone.dual_map(&w).ok()?;
        let hess = cone.log_char_hessian(&w).ok()?;
        Some(Eval { value, grad: -(basis.transpose() * dual), hess: basis.transpose() * hess * basis })
    };
    newton::minimize(f, RealVector::zeros(basis.ncols()), opts)
}
