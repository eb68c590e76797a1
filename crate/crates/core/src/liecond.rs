//! Numerical checks of the Lie condition for a candidate subalgebra 𝔰.
//!
//! At x ∈ M_H the tangent space is K = ker dμ_H(x) and its largest complex
//! subspace is W = K ∩ JK. A candidate passes when 𝔰·x₀ spans W, 𝔰 is closed
//! under brackets, and sampled points of exp(𝔰)·x₀ stay on the zero set.
//! Connectedness of M_H is recorded as an assumption, never tested.

use rand::Rng as _;
use serde::Serialize;

use crate::cone::{ConeSpec, Matrix, RealVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::moment::{exp_affine, momentum_jacobian, momentum_map, vector_field, AffineMap, GeneratorSet};
use crate::seed::rng_from_seed;
use crate::tube::TubePoint;

/// ‖μ_H(x)‖∞ above which x is not on the zero set.
pub const ZERO_SET_TOL: f64 = 1e-8;
/// Relative singular-value cutoff for kernels and spans.
pub const RANK_CUTOFF: f64 = 1e-9;
/// Longest word of one-parameter subgroups used for orbit sampling.
pub const MAX_WORD: usize = 3;
/// Orbit parameters are drawn uniformly from [-T_RANGE, T_RANGE].
pub const T_RANGE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LieTolerances {
    pub span: f64,
    pub bracket: f64,
    pub orbit: f64,
}

impl Default for LieTolerances {
    fn default() -> Self {
        LieTolerances { span: 1e-6, bracket: 1e-8, orbit: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LieVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FailReason {
    Span,
    Bracket,
    Orbit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieConditionReport {
    pub ambient_dim: usize,
    pub subgroup_dim: usize,
    pub dim_kernel: usize,
    #[serde(rename = "dim_W")]
    pub dim_w: usize,
    /// dim span(𝔰·x₀).
    pub dim_orbit_tangent: usize,
    /// Sine of the largest principal angle between span(𝔰·x₀) and W.
    pub span_residual: f64,
    /// Largest relative distance of a bracket [ξ_i, ξ_j] to span(𝔰).
    pub bracket_residual: f64,
    /// Largest ‖μ_H‖∞ over sampled orbit points.
    pub orbit_residual: f64,
    pub orbit_samples: usize,
    pub orbit_draws: usize,
    /// dim(𝔥·x₀ + 𝔰·x₀) = dim K.
    pub locally_saturated: bool,
    pub assumptions: Vec<String>,
    pub verdict: LieVerdict,
    /// Failed checks in the order span, bracket, orbit.
    pub reasons: Vec<FailReason>,
}

impl LieConditionReport {
    pub fn passed(&self) -> bool {
        self.verdict == LieVerdict::Pass
    }
}

fn check_zero_set(cone: &ConeSpec, h: &GeneratorSet, x: &TubePoint) -> Result<()> {
    let mu = momentum_map(cone, h, x)?;
    let r = mu.amax();
    if r > ZERO_SET_TOL {
        return Err(Error::NotOnZeroSet { residual: r });
    }
    Ok(())
}

/// Orthonormal basis (2n × (2n − k)) of ker dμ_H(x) in stacked (re, im) coordinates.
pub fn kernel_basis(cone: &ConeSpec, h: &GeneratorSet, x: &TubePoint) -> Result<Matrix> {
    check_zero_set(cone, h, x)?;
    let n = cone.ambient_dim();
    if h.is_empty() {
        return Ok(Matrix::identity(2 * n, 2 * n));
    }
    linalg::null_space(&momentum_jacobian(cone, h, x)?, RANK_CUTOFF)
}

/// The complex structure on stacked (re, im) coordinates: (u, v) ↦ (-v, u).
pub fn complex_structure(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// Orthonormal basis of W = K ∩ JK: the null space of [(I − KKᵀ); (I − KKᵀ)J].
pub fn w_space(cone: &ConeSpec, h: &GeneratorSet, x: &TubePoint) -> Result<Matrix> {
    let k = kernel_basis(cone, h, x)?;
    Ok(intersect_with_j(&k))
}

fn intersect_with_j(k: &Matrix) -> Matrix {
    let m = k.nrows();
    let p = Matrix::identity(m, m) - k * k.transpose();
    let j = complex_structure(m / 2);
    let mut stacked = Matrix::zeros(2 * m, m);
    stacked.view_mut((0, 0), (m, m)).copy_from(&p);
    stacked.view_mut((m, 0), (m, m)).copy_from(&(&p * j));
    // P has singular values 0 and 1 only, so the rank is never ambiguous
    // unless K and JK meet at a tiny angle; fall back to the cutoff then.
    linalg::null_space(&stacked, RANK_CUTOFF).unwrap_or_else(|_| {
        let svd = stacked.clone().svd(false, true);
        let vt = svd.v_t.expect("requested V");
        let smax = svd.singular_values.max();
        let cols: Vec<RealVector> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= RANK_CUTOFF * smax)
            .map(|i| vt.row(i).transpose())
            .collect();
        if cols.is_empty() {
            Matrix::zeros(m, 0)
        } else {
            Matrix::from_columns(&cols)
        }
    })
}

/// ‖(I − WWᵀ) J W‖₂: zero when span(W) is J-invariant.
pub fn j_invariance_residual(w: &Matrix) -> f64 {
    let j = complex_structure(w.nrows() / 2);
    linalg::subspace_residual(&(j * w), w)
}

/// T ⊕ iT with T = ker(Bᵀ ∇²log φ(ω)): the analytic W for translations by span(B).
pub fn translation_w_space(cone: &ConeSpec, basis: &Matrix, omega: &RealVector) -> Result<Matrix> {
    let n = cone.ambient_dim();
    let t = if basis.ncols() == 0 {
        Matrix::identity(n, n)
    } else {
        linalg::null_space(&(basis.transpose() * cone.log_char_hessian(omega)?), RANK_CUTOFF)?
    };
    let mut w = Matrix::zeros(2 * n, 2 * t.ncols());
    w.view_mut((0, 0), (n, t.ncols())).copy_from(&t);
    w.view_mut((n, t.ncols()), (n, t.ncols())).copy_from(&t);
    Ok(w)
}

/// Symmetric principal-angle residual between two orthonormal bases.
pub fn span_distance(a: &Matrix, b: &Matrix) -> f64 {
    linalg::subspace_residual(a, b).max(linalg::subspace_residual(b, a))
}

fn tangent_span(gens: &GeneratorSet, x: &TubePoint) -> Result<Matrix> {
    let n = x.dim();
    if gens.is_empty() {
        return Ok(Matrix::zeros(2 * n, 0));
    }
    let cols =
        gens.generators.iter().map(|g| vector_field(g, x).map(|t| t.to_stacked())).collect::<Result<Vec<_>>>()?;
    Ok(linalg::range_basis(&Matrix::from_columns(&cols), RANK_CUTOFF))
}

/// Largest ‖[ξ_i, ξ_j] − proj_𝔰[ξ_i, ξ_j]‖ / max(1, ‖[ξ_i, ξ_j]‖).
pub fn bracket_residual(s: &GeneratorSet) -> f64 {
    if s.len() < 2 {
        return 0.0;
    }
    let q = linalg::range_basis(&s.flattened(), RANK_CUTOFF);
    let mut worst: f64 = 0.0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let b = s.generators[i].bracket(&s.generators[j]).flatten();
            let r = &b - &q * (q.transpose() * &b);
            worst = worst.max(r.norm() / b.norm().max(1.0));
        }
    }
    worst
}

/// Checks 𝔰 against the Lie condition at x₀ with default tolerances.
pub fn verify_lie_condition(
    cone: &ConeSpec,
    h: &GeneratorSet,
    x0: &TubePoint,
    s: &GeneratorSet,
    samples: usize,
    seed: u64,
) -> Result<LieConditionReport> {
    verify_lie_condition_with(cone, h, x0, s, samples, seed, &LieTolerances::default())
}

pub fn verify_lie_condition_with(
    cone: &ConeSpec,
    h: &GeneratorSet,
    x0: &TubePoint,
    s: &GeneratorSet,
    samples: usize,
    seed: u64,
    tol: &LieTolerances,
) -> Result<LieConditionReport> {
    x0.validate(cone)?;
    h.validate()?;
    s.validate()?;
    for g in &s.generators {
        g.check_compatible(cone)?;
    }
    let n = cone.ambient_dim();
    let kernel = kernel_basis(cone, h, x0)?;
    let w = intersect_with_j(&kernel);
    let s_span = tangent_span(s, x0)?;
    let span_residual = span_distance(&s_span, &w);
    let bracket_residual = bracket_residual(s);
    let (orbit_residual, orbit_draws) = orbit_residual(cone, h, x0, s, samples, seed)?;

    let h_span = tangent_span(h, x0)?;
    let mut joined = Matrix::zeros(2 * n, h_span.ncols() + s_span.ncols());
    joined.view_mut((0, 0), (2 * n, h_span.ncols())).copy_from(&h_span);
    joined.view_mut((0, h_span.ncols()), (2 * n, s_span.ncols())).copy_from(&s_span);
    let locally_saturated = linalg::range_basis(&joined, RANK_CUTOFF).ncols() == kernel.ncols();

    let mut reasons = Vec::new();
    if s_span.ncols() != w.ncols() || !(span_residual <= tol.span) {
        reasons.push(FailReason::Span);
    }
    if !(bracket_residual <= tol.bracket) {
        reasons.push(FailReason::Bracket);
    }
    if !(orbit_residual <= tol.orbit) {
        reasons.push(FailReason::Orbit);
    }
    Ok(LieConditionReport {
        ambient_dim: n,
        subgroup_dim: h.len(),
        dim_kernel: kernel.ncols(),
        dim_w: w.ncols(),
        dim_orbit_tangent: s_span.ncols(),
        span_residual,
        bracket_residual,
        orbit_residual,
        orbit_samples: samples,
        orbit_draws,
        locally_saturated,
        assumptions: vec!["M_H connected".into()],
        verdict: if reasons.is_empty() { LieVerdict::Pass } else { LieVerdict::Fail },
        reasons,
    })
}

/// Largest ‖μ_H‖∞ over `samples` random points exp(t₁ξ_{i₁})···exp(t_mξ_{i_m})·x₀
/// inside the tube, with the number of draws used.
fn orbit_residual(
    cone: &ConeSpec,
    h: &GeneratorSet,
    x0: &TubePoint,
    s: &GeneratorSet,
    samples: usize,
    seed: u64,
) -> Result<(f64, usize)> {
    if samples == 0 {
        return Ok((0.0, 0));
    }
    let mut rng = rng_from_seed(seed);
    let budget = 100 * samples;
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    let mut draws = 0;
    while accepted < samples {
        if draws == budget {
            return Err(Error::SamplingExhausted { draws });
        }
        draws += 1;
        let mut map = AffineMap::identity(x0.dim());
        if !s.is_empty() {
            for _ in 0..rng.random_range(1..=MAX_WORD) {
                let xi = &s.generators[rng.random_range(0..s.len())];
                map = map.compose(&exp_affine(xi, rng.random_range(-T_RANGE..=T_RANGE)));
            }
        }
        let p = map.apply(x0);
        if p.validate(cone).is_err() {
            continue;
        }
        accepted += 1;
        worst = worst.max(momentum_map(cone, h, &p)?.amax());
    }
    Ok((worst, draws))
}
