//! Randomized invariant suite behind `siegel-reduce verify`.
//!
//! Every invariant runs `trials` times per cone. Trial `t` of invariant `i`
//! on cone `c` draws from its own stream seeded by
//! `derive_seed(derive_seed(derive_seed(seed, i), c), t)`, so results do
//! not depend on scheduling.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use super::config::Tolerances;
use crate::cone::{ConeSpec, Matrix, RealVector, INTERIOR_EPS};
use crate::error::Result;
use crate::liecond::{self, LieTolerances};
use crate::moment::{self, exp_affine, AffineGenerator, GeneratorSet};
use crate::reduce::{check_admissible, ray_extent, MembershipStatus, QuotientDomain, Subspace, Verdict};
use crate::seed::{derive_seed, rng_from_seed, Rng};
use crate::tube::{self, Tangent, TubePoint};
use crate::{linalg, numdiff, sampling};

/// Per-invariant tally.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantSummary {
    pub name: &'static str,
    pub checks: usize,
    pub passed: usize,
    /// Largest residual seen; `null` when a check errored.
    pub worst_residual: f64,
    /// `null` for invariants that are exact yes/no checks.
    pub tolerance: Option<f64>,
}

impl InvariantSummary {
    pub fn ok(&self) -> bool {
        self.passed == self.checks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub cones: Vec<ConeSpec>,
    pub tolerances: Tolerances,
    pub invariants: Vec<InvariantSummary>,
    pub passed: bool,
    pub first_failure: Option<&'static str>,
}

/// Cones checked when the configuration names none.
pub fn default_cones() -> Vec<ConeSpec> {
    (1..=4).map(ConeSpec::lorentz).collect()
}

struct Ctx<'a> {
    cone: &'a ConeSpec,
    tol: &'a Tolerances,
}

/// `Ok(None)` means the trial does not apply to this cone.
type Check = fn(&Ctx, &mut Rng) -> Result<Option<f64>>;

struct Invariant {
    name: &'static str,
    tolerance: Option<&'static str>,
    check: Check,
}

const fn inv(name: &'static str, tolerance: Option<&'static str>, check: Check) -> Invariant {
    Invariant { name, tolerance, check }
}

const INVARIANTS: &[Invariant] = &[
    inv("cone.homogeneity", Some("cone.homogeneity"), homogeneity),
    inv("cone.dual_identity", Some("cone.dual_identity"), dual_identity),
    inv("cone.dual_range", None, dual_range),
    inv("cone.dual_scaling", Some("cone.dual_scaling"), dual_scaling),
    inv("cone.gradient", Some("cone.gradient"), gradient_consistency),
    inv("cone.hessian", Some("cone.hessian"), hessian_consistency),
    inv("cone.boundary_blowup", None, boundary_blowup),
    inv("cone.projection", Some("cone.projection"), projection),
    inv("tube.potential", None, potential_shape),
    inv("tube.kahler_positivity", None, kahler_positivity),
    inv("tube.kahler_bilinearity", Some("tube.kahler_bilinearity"), kahler_bilinearity),
    inv("moment.defining_property", Some("moment.defining_property"), defining_property),
    inv("moment.linearity", Some("moment.linearity"), momentum_linearity),
    inv("moment.bracket", Some("moment.bracket"), bracket_identities),
    inv("moment.bracket_compatibility", Some("moment.bracket_compatibility"), bracket_compatibility),
    inv("moment.group_law", Some("moment.group_law"), group_law),
    inv("reduce.admissibility", Some("reduce.admissibility"), admissibility),
    inv("reduce.residual", Some("reduce.residual"), reduction_residual),
    inv("reduce.slice_uniqueness", Some("reduce.slice_uniqueness"), slice_uniqueness),
    inv("reduce.orbit_agreement", Some("reduce.orbit_agreement"), orbit_agreement),
    inv("reduce.cone_scaling", Some("reduce.cone_scaling"), zero_cone_scaling),
    inv("reduce.coercivity", None, coercivity),
    inv("reduce.slice_convexity", None, slice_convexity),
    inv("reduce.properness", None, properness),
    inv("reduce.roundtrip", Some("reduce.roundtrip"), roundtrip),
    inv("reduce.tau_invariance", Some("reduce.tau_invariance"), tau_invariance),
    inv("reduce.slice_bound", Some("reduce.slice_bound"), slice_bound),
    inv("liecond.dimensions", None, lie_dimensions),
    inv("liecond.j_invariance", Some("liecond.j_invariance"), lie_j_invariance),
    inv("liecond.analytic_w", Some("liecond.analytic_w"), lie_analytic_w),
    inv("liecond.monotone", None, lie_monotone),
];

/// Names of all invariants in report order.
pub fn invariant_names() -> Vec<&'static str> {
    INVARIANTS.iter().map(|i| i.name).collect()
}

pub fn run_verify(cones: &[ConeSpec], trials: usize, seed: u64, tol: &Tolerances) -> VerifyReport {
    let jobs: Vec<(usize, usize)> = (0..INVARIANTS.len()).flat_map(|i| (0..cones.len()).map(move |c| (i, c))).collect();
    let results: Vec<Vec<Option<f64>>> =
        jobs.par_iter().map(|&(i, c)| run_job(&INVARIANTS[i], i, &cones[c], c, trials, seed, tol)).collect();

    let mut invariants = Vec::with_capacity(INVARIANTS.len());
    for (i, inv) in INVARIANTS.iter().enumerate() {
        let tolerance = inv.tolerance.map(|n| tol.get(n));
        let limit = tolerance.unwrap_or(0.0);
        let mut s = InvariantSummary { name: inv.name, checks: 0, passed: 0, worst_residual: 0.0, tolerance };
        for r in results[i * cones.len()..(i + 1) * cones.len()].iter().flatten().copied().flatten() {
            s.checks += 1;
            if r <= limit {
                s.passed += 1;
            }
            // NaN (an error) dominates.
            if r.is_nan() || s.worst_residual.is_nan() {
                s.worst_residual = f64::NAN;
            } else {
                s.worst_residual = s.worst_residual.max(r);
            }
        }
        invariants.push(s);
    }
    let first_failure = invariants.iter().find(|s| !s.ok()).map(|s| s.name);
    VerifyReport {
        seed,
        trials,
        cones: cones.to_vec(),
        tolerances: tol.clone(),
        passed: first_failure.is_none(),
        first_failure,
        invariants,
    }
}

fn run_job(
    inv: &Invariant,
    i: usize,
    cone: &ConeSpec,
    c: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Vec<Option<f64>> {
    let ctx = Ctx { cone, tol };
    let base = derive_seed(derive_seed(seed, i as u64), c as u64);
    (0..trials)
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(base, t as u64));
            // Errors count as failed checks.
            (inv.check)(&ctx, &mut rng).unwrap_or(Some(f64::NAN))
        })
        .collect()
}

fn flag(ok: bool) -> Option<f64> {
    Some(if ok { 0.0 } else { 1.0 })
}

fn rel(a: &RealVector, b: &RealVector) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn random_point(cone: &ConeSpec, rng: &mut Rng) -> TubePoint {
    let n = cone.ambient_dim();
    TubePoint { re: sampling::gaussian_vector(n, rng), im: sampling::interior_point(cone, rng) }
}

fn random_tangent(n: usize, rng: &mut Rng) -> Tangent {
    Tangent::new(sampling::gaussian_vector(n, rng), sampling::gaussian_vector(n, rng))
}

/// A random admissible instance (None when the cone has dimension 1).
fn instance(cone: &ConeSpec, rng: &mut Rng) -> Result<Option<QuotientDomain>> {
    let n = cone.ambient_dim();
    if n < 2 {
        return Ok(None);
    }
    let k = rng.random_range(1..n);
    let h = Subspace::from_columns(&sampling::admissible_subspace(cone, k, rng))?;
    QuotientDomain::new(cone.clone(), h, rng.random()).map(Some)
}

/// Im(x) + B c with a Gaussian c halved until it stays in the cone.
fn feasible_shift(q: &QuotientDomain, omega: &RealVector, rng: &mut Rng) -> Result<RealVector> {
    let b = q.subspace().basis();
    let mut c = sampling::gaussian_vector(b.ncols(), rng) * (1.0 + omega.norm());
    while q.cone().margin(&(omega + b * &c))? <= INTERIOR_EPS {
        c *= 0.5;
    }
    Ok(b * c)
}

fn homogeneity(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let w = sampling::interior_point(ctx.cone, rng);
    let lambda: f64 = rng.random_range(0.1..10.0);
    let d = ctx.cone.log_char(&(&w * lambda))? - ctx.cone.log_char(&w)? + ctx.cone.degree() as f64 * lambda.ln();
    Ok(Some(d.abs()))
}

fn dual_identity(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let w = sampling::interior_point(ctx.cone, rng);
    Ok(Some((w.dot(&ctx.cone.dual_map(&w)?) - ctx.cone.ambient_dim() as f64).abs()))
}

/// ψ(ω) ∈ Ω*, and the Hessian is positive definite along a segment, so ψ
/// (a gradient of a strictly convex function) is injective on it.
fn dual_range(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let a = sampling::interior_point(ctx.cone, rng);
    let b = sampling::interior_point(ctx.cone, rng);
    if ctx.cone.dual_margin(&ctx.cone.dual_map(&a)?)? <= 0.0 {
        return Ok(flag(false));
    }
    for j in 0..=8 {
        let s = j as f64 / 8.0;
        let h = ctx.cone.log_char_hessian(&(&a * (1.0 - s) + &b * s))?;
        if h.symmetric_eigenvalues().min() <= 0.0 {
            return Ok(flag(false));
        }
    }
    let (pa, pb) = (ctx.cone.dual_map(&a)?, ctx.cone.dual_map(&b)?);
    // Monotonicity of ψ = -∇log φ: g(ψ(a) - ψ(b), a - b) < 0 for a ≠ b.
    Ok(flag((&pa - &pb).dot(&(&a - &b)) < 0.0))
}

fn dual_scaling(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let w = sampling::interior_point(ctx.cone, rng);
    let lambda: f64 = rng.random_range(0.1..10.0);
    Ok(Some(rel(&ctx.cone.dual_map(&(&w * lambda))?, &(ctx.cone.dual_map(&w)? / lambda))))
}

fn gradient_consistency(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let w = sampling::interior_point(ctx.cone, rng);
    let fd = numdiff::gradient(|p| ctx.cone.log_char(p), &w, 1e-6)?;
    Ok(Some(rel(&ctx.cone.dual_map(&w)?, &(-fd))))
}

fn hessian_consistency(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let w = sampling::interior_point(ctx.cone, rng);
    let fd = numdiff::jacobian(|p| ctx.cone.dual_map(p).map(|d| -d), &w, 1e-6)?;
    Ok(Some(numdiff::relative_error(&ctx.cone.log_char_hessian(&w)?, &fd)))
}

fn boundary_blowup(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let b = sampling::near_boundary_point(ctx.cone, 0.0, rng);
    let e = ctx.cone.unit_point();
    let vals = (3..=10).map(|k| ctx.cone.log_char(&(&b + &e * 10f64.powi(-k)))).collect::<Result<Vec<_>>>()?;
    let increasing = vals.windows(2).all(|p| p[1] > p[0]);
    Ok(flag(increasing && vals[vals.len() - 1] > vals[0] + 5.0))
}

fn projection(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let n = ctx.cone.ambient_dim();
    let x = sampling::gaussian_vector(n, rng) * 2.0;
    let p = ctx.cone.project_closure(&x)?;
    let idem = (ctx.cone.project_closure(&p)? - &p).amax();
    let below = (-ctx.cone.margin(&p)?).max(0.0);
    let dist = (&x - &p).norm();
    let mut nearest = f64::INFINITY;
    for j in 0..10_000 {
        let s = if j % 2 == 0 {
            sampling::interior_point(ctx.cone, rng)
        } else {
            sampling::near_boundary_point(ctx.cone, 0.0, rng)
        } * rng.random_range(0.0..2.0);
        nearest = nearest.min((&x - s).norm());
    }
    Ok(Some(idem.max(below).max(dist - nearest)))
}

fn potential_shape(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let n = ctx.cone.ambient_dim();
    let x = random_point(ctx.cone, rng);
    let moved = TubePoint { re: &x.re + sampling::gaussian_vector(n, rng), im: x.im.clone() };
    if tube::potential(ctx.cone, &moved)? != tube::potential(ctx.cone, &x)? {
        return Ok(flag(false));
    }
    let v = sampling::unit_vector(n, rng);
    let h = 0.1 * ctx.cone.margin(&x.im)?;
    let at = |t: f64| tube::potential(ctx.cone, &TubePoint { re: x.re.clone(), im: &x.im + &v * t });
    Ok(flag(at(h)? - 2.0 * at(0.0)? + at(-h)? > 0.0))
}

fn kahler_positivity(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let x = random_point(ctx.cone, rng);
    let u = random_tangent(ctx.cone.ambient_dim(), rng);
    Ok(flag(tube::kahler_form_oracle(ctx.cone, &x, &u, &tube::complex_mul_i(&u))? > 0.0))
}

fn kahler_bilinearity(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let n = ctx.cone.ambient_dim();
    let x = random_point(ctx.cone, rng);
    let (u1, u2, w) = (random_tangent(n, rng), random_tangent(n, rng), random_tangent(n, rng));
    let (a, b): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let lhs = tube::kahler_form_oracle(ctx.cone, &x, &u1.scale(a).add(&u2.scale(b)), &w)?;
    let (o1, o2) = (tube::kahler_form_oracle(ctx.cone, &x, &u1, &w)?, tube::kahler_form_oracle(ctx.cone, &x, &u2, &w)?);
    let scale = lhs.abs().max((a * o1).abs() + (b * o2).abs());
    Ok(Some(if scale == 0.0 { 0.0 } else { (lhs - a * o1 - b * o2).abs() / scale }))
}

/// Translation, linear, or mixed cone-compatible generator.
fn random_generator(cone: &ConeSpec, rng: &mut Rng) -> AffineGenerator {
    let n = cone.ambient_dim();
    match rng.random_range(0..3) {
        0 => AffineGenerator::translation(sampling::gaussian_vector(n, rng)),
        1 => AffineGenerator::linear(sampling::compatible_linear(cone, rng)),
        _ => sampling::compatible_generator(cone, rng),
    }
}

/// Central-difference dμ^ξ(u) against ω_B(ξ_X(x), u), relative error.
pub fn defining_property_error(cone: &ConeSpec, xi: &AffineGenerator, x: &TubePoint, u: &Tangent) -> Result<f64> {
    let h = 1e-6 * (1.0 + x.norm()) / u.norm();
    let fd = (moment::momentum(cone, xi, &x.offset(u, h))? - moment::momentum(cone, xi, &x.offset(u, -h))?) / (2.0 * h);
    let oracle = tube::kahler_form_oracle(cone, x, &moment::vector_field(xi, x)?, u)?;
    Ok(numdiff::relative_error_scalar(fd, oracle))
}

fn defining_property(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let xi = random_generator(ctx.cone, rng);
    let x = random_point(ctx.cone, rng);
    let u = random_tangent(ctx.cone.ambient_dim(), rng);
    defining_property_error(ctx.cone, &xi, &x, &u).map(Some)
}

fn momentum_linearity(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let (xi, eta) = (random_generator(ctx.cone, rng), random_generator(ctx.cone, rng));
    let x = random_point(ctx.cone, rng);
    let (a, b): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let lhs = moment::momentum(ctx.cone, &xi.scale(a).add(&eta.scale(b)), &x)?;
    let (m1, m2) = (moment::momentum(ctx.cone, &xi, &x)?, moment::momentum(ctx.cone, &eta, &x)?);
    let scale = lhs.abs().max((a * m1).abs() + (b * m2).abs());
    Ok(Some(if scale == 0.0 { 0.0 } else { (lhs - a * m1 - b * m2).abs() / scale }))
}

/// Antisymmetry and Jacobi residuals of the affine bracket, relative to the
/// size of the inputs.
pub fn bracket_identity_residual(a: &AffineGenerator, b: &AffineGenerator, c: &AffineGenerator) -> f64 {
    let size = |g: &AffineGenerator| g.flatten().norm().max(1.0);
    let anti = a.bracket(b).add(&b.bracket(a)).flatten().norm() / (size(a) * size(b));
    let jacobi =
        a.bracket(&b.bracket(c)).add(&b.bracket(&c.bracket(a))).add(&c.bracket(&a.bracket(b))).flatten().norm()
            / (size(a) * size(b) * size(c));
    anti.max(jacobi)
}

fn bracket_identities(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let n = ctx.cone.ambient_dim();
    let mut g = || AffineGenerator::new(sampling::gaussian_matrix(n, n, rng), sampling::gaussian_vector(n, rng));
    let (a, b, c) = (g()?, g()?, g()?);
    Ok(Some(bracket_identity_residual(&a, &b, &c)))
}

fn bracket_compatibility(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let a = sampling::compatible_generator(ctx.cone, rng);
    let b = sampling::compatible_generator(ctx.cone, rng);
    a.bracket(&b).compatibility_residual(ctx.cone).map(Some)
}

fn group_law(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let xi = sampling::compatible_generator(ctx.cone, rng);
    let (s, t): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let whole = exp_affine(&xi, s + t);
    let split = exp_affine(&xi, s).compose(&exp_affine(&xi, t));
    let scale = whole.linear.norm().max(whole.translation.norm()).max(1.0);
    let d = (&whole.linear - &split.linear).norm().max((&whole.translation - &split.translation).norm());
    Ok(Some(d / scale))
}

fn admissibility(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let n = ctx.cone.ambient_dim();
    if n < 2 {
        return Ok(None);
    }
    let k = rng.random_range(1..n);
    let h = Subspace::from_columns(&sampling::gaussian_matrix(n, k, rng))?;
    let cert = check_admissible(ctx.cone, &h, rng.random())?;
    let Some(w) = &cert.witness else {
        return Ok(Some(f64::INFINITY));
    };
    let (off, strict) = match cert.verdict {
        Verdict::Admissible => ((h.basis().transpose() * w).amax(), ctx.cone.dual_margin(w)? > 0.0),
        Verdict::Inadmissible => ((h.complement().transpose() * w).amax(), true),
        Verdict::Undecided => return Ok(Some(f64::INFINITY)),
    };
    let below = match cert.verdict {
        Verdict::Inadmissible => (-ctx.cone.margin(w)?).max(0.0),
        _ => 0.0,
    };
    Ok(Some(if strict { off.max(below).max((w.norm() - 1.0).abs()) } else { f64::INFINITY }))
}

fn reduction_residual(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let n = ctx.cone.ambient_dim();
    let im = if rng.random_bool(0.5) {
        sampling::near_boundary_point(ctx.cone, 10f64.powf(-rng.random_range(1.0..3.0)), rng)
    } else {
        sampling::interior_point(ctx.cone, rng)
    };
    let x = TubePoint::new(ctx.cone, sampling::gaussian_vector(n, rng), im)?;
    Ok(Some(q.reduce_point(&x)?.residual))
}

fn slice_uniqueness(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let x = random_point(ctx.cone, rng);
    let omega = q.reduce_point(&x)?.point.im;
    let other = &omega + feasible_shift(&q, &omega, rng)?;
    let y = TubePoint { re: x.re.clone(), im: other };
    let again = q.reduce_point(&y)?.point.im;
    if !q.in_zero_cone(&again, 1e-8)? {
        return Ok(Some(f64::INFINITY));
    }
    Ok(Some((again - omega).amax()))
}

fn orbit_agreement(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let x = random_point(ctx.cone, rng);
    q.orbit_agreement(&x, 10, rng.random()).map(Some)
}

fn zero_cone_scaling(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let omega = q.reduce_point(&random_point(ctx.cone, rng))?.point.im;
    let base = ctx.cone.dual_map(&omega)?;
    let mut worst: f64 = 0.0;
    for lambda in [0.5, 2.0, 7.0] {
        let w = &omega * lambda;
        if !q.in_zero_cone(&w, 1e-8)? {
            return Ok(Some(f64::INFINITY));
        }
        worst = worst.max(rel(&(ctx.cone.dual_map(&w)? * lambda), &base));
    }
    Ok(Some(worst))
}

fn coercivity(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let omega = q.reduce_point(&random_point(ctx.cone, rng))?.point.im;
    let b = q.subspace().basis();
    let dir = b * sampling::unit_vector(b.ncols(), rng);
    let t_max = ray_extent(ctx.cone, &omega, &dir)?;
    if !t_max.is_finite() {
        return Ok(flag(false));
    }
    let mut vals = Vec::new();
    for j in 0..30 {
        let p = &omega + &dir * (t_max * (1.0 - 0.1 * 0.5f64.powi(j)));
        if ctx.cone.margin(&p)? <= INTERIOR_EPS {
            break;
        }
        vals.push(ctx.cone.log_char(&p)?);
    }
    let increasing = vals.windows(2).all(|p| p[1] > p[0]);
    Ok(flag(vals.len() >= 10 && increasing && vals[vals.len() - 1] > vals[0] + 5.0))
}

fn slice_convexity(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let omega = sampling::interior_point(ctx.cone, rng);
    let a = feasible_shift(&q, &omega, rng)?;
    let b = feasible_shift(&q, &omega, rng)?;
    Ok(flag(ctx.cone.margin(&(&omega + (a + b) * 0.5))? > 0.0))
}

fn properness(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let s = q.sample_quotient_point(rng);
    let plus = q.quotient_membership(&s.im)?.status;
    let minus = q.quotient_membership(&(-&s.im))?.status;
    Ok(flag(plus == MembershipStatus::Member && minus == MembershipStatus::NonMember))
}

fn roundtrip(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let s = q.sample_quotient_point(rng);
    let z = q.lift(&s)?;
    let back = q.split_map(&z)?.quotient;
    let err = (&back.re - &s.re).amax().max((&back.im - &s.im).amax());
    Ok(Some(err / s.re.amax().max(s.im.amax()).max(1.0)))
}

fn tau_invariance(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let z = q.lift(&q.sample_quotient_point(rng))?;
    let b = q.subspace().basis();
    let moved = TubePoint {
        re: &z.re + b * sampling::gaussian_vector(b.ncols(), rng),
        im: &z.im + feasible_shift(&q, &z.im, rng)?,
    };
    let s0 = q.split_map(&z)?.quotient;
    let s1 = q.split_map(&moved)?.quotient;
    let s2 = q.reduced_coordinates(&z)?;
    let scale = 1.0 + z.norm() + moved.norm();
    let d = |a: &crate::reduce::QuotientCoords, c: &crate::reduce::QuotientCoords| {
        (&a.re - &c.re).amax().max((&a.im - &c.im).amax())
    };
    Ok(Some(d(&s0, &s1).max(d(&s0, &s2)) / scale))
}

fn slice_bound(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let y = q.dual_witness().clone();
    let omega = sampling::interior_point(ctx.cone, rng);
    let bound = q.slice_bound(omega.norm(), &y)?;
    let point_bound = q.slice_point_bound(&omega, &y)?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let p = q.sample_slice_point(&omega, rng)?;
        worst = worst.max(p.norm() - point_bound.min(bound));
    }
    Ok(Some(worst.max(point_bound - bound).max(0.0)))
}

/// A random instance with a point of M_H, as a translation generator set.
fn zero_set_instance(ctx: &Ctx, rng: &mut Rng) -> Result<Option<(QuotientDomain, GeneratorSet, TubePoint)>> {
    let Some(q) = instance(ctx.cone, rng)? else {
        return Ok(None);
    };
    let m = q.reduce_point(&random_point(ctx.cone, rng))?.point;
    let h = GeneratorSet::from_translations(q.subspace().basis());
    Ok(Some((q, h, m)))
}

fn lie_dimensions(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some((q, h, m)) = zero_set_instance(ctx, rng)? else {
        return Ok(None);
    };
    let (n, k) = (ctx.cone.ambient_dim(), q.subspace().dim());
    let kb = liecond::kernel_basis(ctx.cone, &h, &m)?;
    let w = liecond::w_space(ctx.cone, &h, &m)?;
    Ok(flag(kb.ncols() == 2 * n - k && w.ncols() == 2 * n - 2 * k))
}

fn lie_j_invariance(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some((_, h, m)) = zero_set_instance(ctx, rng)? else {
        return Ok(None);
    };
    let kb = liecond::kernel_basis(ctx.cone, &h, &m)?;
    let w = liecond::w_space(ctx.cone, &h, &m)?;
    Ok(Some(liecond::j_invariance_residual(&w).max(linalg::subspace_residual(&w, &kb))))
}

fn lie_analytic_w(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some((q, h, m)) = zero_set_instance(ctx, rng)? else {
        return Ok(None);
    };
    let w = liecond::w_space(ctx.cone, &h, &m)?;
    let analytic = liecond::translation_w_space(ctx.cone, q.subspace().basis(), &m.im)?;
    Ok(Some(liecond::span_distance(&w, &analytic)))
}

fn lie_monotone(ctx: &Ctx, rng: &mut Rng) -> Result<Option<f64>> {
    let Some((_, h, m)) = zero_set_instance(ctx, rng)? else {
        return Ok(None);
    };
    let n = ctx.cone.ambient_dim();
    // The dilation, sometimes with a random compatible generator.
    let mut gens = vec![AffineGenerator::linear(Matrix::identity(n, n))];
    if rng.random_bool(0.5) {
        gens.push(sampling::compatible_generator(ctx.cone, rng));
    }
    let Ok(s) = GeneratorSet::new(gens) else {
        return Ok(None);
    };
    let loose = LieTolerances {
        span: ctx.tol.get("liecond.span"),
        bracket: ctx.tol.get("liecond.bracket"),
        orbit: ctx.tol.get("liecond.orbit"),
    };
    let tight = LieTolerances { span: 1e-8, bracket: 1e-8, orbit: 1e-8 };
    let seed = rng.random();
    let strict = liecond::verify_lie_condition_with(ctx.cone, &h, &m, &s, 5, seed, &tight)?;
    let relaxed = liecond::verify_lie_condition_with(ctx.cone, &h, &m, &s, 5, seed, &loose)?;
    let residuals_match =
        strict.span_residual == relaxed.span_residual && strict.orbit_residual == relaxed.orbit_residual;
    let dominated = tight.span <= loose.span && tight.bracket <= loose.bracket && tight.orbit <= loose.orbit;
    Ok(flag(residuals_match && (!dominated || !strict.passed() || relaxed.passed())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let cones = vec![ConeSpec::lorentz(1), ConeSpec::lorentz(2), ConeSpec::orthant(3)];
        let tol = Tolerances::default();
        let a = run_verify(&cones, 4, 12, &tol);
        for s in &a.invariants {
            assert!(s.ok(), "{s:?}");
        }
        assert!(a.passed);
        let b = run_verify(&cones, 4, 12, &tol);
        assert_eq!(super::super::format::to_json(&a), super::super::format::to_json(&b));
    }

    #[test]
    fn zero_trials_pass_vacuously() {
        let r = run_verify(&default_cones(), 0, 0, &Tolerances::default());
        assert!(r.passed);
        assert!(r.invariants.iter().all(|s| s.checks == 0));
    }

    #[test]
    fn impossible_tolerance_fails() {
        let mut tol = Tolerances::default();
        tol.set("cone.gradient", 1e-20).unwrap();
        let r = run_verify(&[ConeSpec::lorentz(2)], 3, 1, &tol);
        assert!(!r.passed);
        assert_eq!(r.first_failure, Some("cone.gradient"));
    }
}
