//! Membership in the base H⊥ ∩ (Ω + H) of the quotient domain.
//!
//! Deciding t ∈ H⊥ ∩ (Ω + H) means deciding the sign of
//! `max_h margin(C t + B h)`. Since the margin of every catalog cone grows
//! by exactly s along s·e, this maximum equals `-min { s : C t + B h + s e ∈ Ω̄ }`,
//! a linear objective over a convex set that is solved by barrier path
//! following. Each centered iterate provides a primal point and a dual
//! point of Ω* orthogonal to H, so both outcomes come with certificates.

use serde::Serialize;

use super::newton::{self, Eval, NewtonOptions};
use crate::cone::{ConeSpec, Matrix, RealVector};
use crate::error::Result;

/// Boundary band for membership decisions.
pub const MEMBERSHIP_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipStatus {
    Member,
    NonMember,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub status: MembershipStatus,
    /// Fiber coordinates h of the best point C t + B h found.
    pub witness: RealVector,
    /// Margin achieved at the witness.
    pub margin: f64,
    /// Certified upper bound on the achievable margin (+∞ when none was proven).
    pub upper_bound: f64,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        self.status == MembershipStatus::Member
    }
}

pub(crate) fn decide(cone: &ConeSpec, basis: &Matrix, complement: &Matrix, t: &RealVector) -> Result<Membership> {
    let k = basis.ncols();
    let p = complement * t;
    cone.check_dim(&p)?;
    if t.iter().all(|&x| x == 0.0) {
        // The apex is never in the open cone Ω + H.
        return Ok(Membership {
            status: MembershipStatus::NonMember,
            witness: RealVector::zeros(k),
            margin: 0.0,
            upper_bound: 0.0,
        });
    }
    let e = cone.unit_point();
    let nu = cone.degree() as f64;
    let lift = |y: &RealVector| -> RealVector { &p + basis * y.rows(0, k) + &e * y[k] };

    let mut best_h = RealVector::zeros(k);
    let mut best_margin = cone.margin(&p)?;
    let mut upper = f64::INFINITY;
    if best_margin > MEMBERSHIP_BAND {
        return Ok(Membership {
            status: MembershipStatus::Member,
            witness: best_h,
            margin: best_margin,
            upper_bound: upper,
        });
    }

    let mut y = RealVector::zeros(k + 1);
    y[k] = 1.0 - best_margin;
    let mut tau = 1.0;
    let opts =
        NewtonOptions { max_iter: 100, grad_tol: f64::INFINITY, decrement_tol: 1e-3, ..NewtonOptions::default() };
    while tau < 1e16 {
        let f = |y: &RealVector| -> Option<Eval> {
            let z = lift(y);
            let value = tau * y[k] + cone.log_char(&z).ok()?;
            let dual = cone.dual_map(&z).ok()?;
            let hess = cone.log_char_hessian(&z).ok()?;
            let mut a = Matrix::zeros(z.len(), k + 1);
            a.view_mut((0, 0), (z.len(), k)).copy_from(basis);
            a.set_column(k, &e);
            let mut grad = -(a.transpose() * dual);
            grad[k] += tau;
            Some(Eval { value, grad, hess: a.transpose() * hess * &a })
        };
        y = newton::minimize(f, y, &opts).x;
        let h = y.rows(0, k).clone_owned();
        let m = cone.margin(&(&p + basis * &h))?;
        if m > best_margin {
            best_margin = m;
            best_h = h;
        }
        if best_margin > MEMBERSHIP_BAND {
            return Ok(Membership {
                status: MembershipStatus::Member,
                witness: best_h,
                margin: best_margin,
                upper_bound: upper,
            });
        }
        if let Some(bound) = dual_bound(cone, basis, &e, &p, &lift(&y))? {
            upper = upper.min(bound);
        }
        if upper < -MEMBERSHIP_BAND {
            return Ok(Membership {
                status: MembershipStatus::NonMember,
                witness: best_h,
                margin: best_margin,
                upper_bound: upper,
            });
        }
        if upper - best_margin < 1e-3 * MEMBERSHIP_BAND {
            break;
        }
        tau *= 4.0 * (1.0 + 1.0 / nu);
    }
    Ok(Membership { status: MembershipStatus::Undecided, witness: best_h, margin: best_margin, upper_bound: upper })
}

/// Upper bound on max_h margin(p + B h) from the dual point ψ(z).
///
/// After projecting ψ(z) onto H⊥ and scaling so that g(y, e) = 1, every
/// y ∈ Ω̄* ∩ H⊥ gives s ≥ -g(y, p) for all feasible (h, s), hence
/// margin ≤ g(y, p).
fn dual_bound(cone: &ConeSpec, basis: &Matrix, e: &RealVector, p: &RealVector, z: &RealVector) -> Result<Option<f64>> {
    let Ok(dual) = cone.dual_map(z) else {
        return Ok(None);
    };
    let y = &dual - basis * (basis.transpose() * &dual);
    let scale = y.dot(e);
    if scale <= 0.0 {
        return Ok(None);
    }
    let y = y / scale;
    if cone.dual_margin(&y)? < 0.0 {
        return Ok(None);
    }
    Ok(Some(y.dot(p)))
}
