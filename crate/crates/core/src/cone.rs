//! Proper open convex cones with closed-form characteristic-function calculus.
//!
//! Every cone in the catalog is self-dual for the Euclidean dot product on its
//! stored coordinates, which is the inner product used throughout the crate.
//! The characteristic function is only known up to a positive multiplicative
//! constant, so [`ConeSpec::log_char`] is defined up to an additive constant:
//!
//! ```text
//! orthant(d):   log φ(ω) = -Σ log ω_i                       (constant 0)
//! lorentz(d):   log φ(ω) = -((d+1)/2) log q(ω)              (constant dropped)
//!               q(ω) = ω_0² - ω_1² - … - ω_d²
//! product:      sum over factors
//! ```
//!
//! None of the derived quantities (dual map, Hessian, momentum) depend on the
//! dropped constant.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealVector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Points with margin at or below this are treated as outside the open cone.
pub const INTERIOR_EPS: f64 = 1e-12;

/// A proper open convex cone from the closed-form catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConeSpec {
    /// Lorentz (second-order) cone in R^{d+1}.
    Lorentz { d: usize },
    /// Nonnegative orthant R^d_{>0}.
    Orthant { d: usize },
    /// Cartesian product; coordinates are concatenated in factor order.
    Product { factors: Vec<ConeSpec> },
}

impl ConeSpec {
    pub fn lorentz(d: usize) -> Self {
        assert!(d >= 1, "lorentz cone needs d >= 1");
        ConeSpec::Lorentz { d }
    }

    pub fn orthant(d: usize) -> Self {
        assert!(d >= 1, "orthant needs d >= 1");
        ConeSpec::Orthant { d }
    }

    pub fn product(factors: Vec<ConeSpec>) -> Self {
        assert!(!factors.is_empty(), "product cone needs at least one factor");
        ConeSpec::Product { factors }
    }

    /// Checks the structural invariants; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            ConeSpec::Lorentz { d } if *d == 0 => Err(Error::InvalidCone("lorentz requires d >= 1".into())),
            ConeSpec::Orthant { d } if *d == 0 => Err(Error::InvalidCone("orthant requires d >= 1".into())),
            ConeSpec::Product { factors } if factors.is_empty() => {
                Err(Error::InvalidCone("product requires at least one factor".into()))
            }
            ConeSpec::Product { factors } => factors.iter().try_for_each(ConeSpec::validate),
            _ => Ok(()),
        }
    }

    /// dim_R V.
    pub fn ambient_dim(&self) -> usize {
        match self {
            ConeSpec::Lorentz { d } => d + 1,
            ConeSpec::Orthant { d } => *d,
            ConeSpec::Product { factors } => factors.iter().map(ConeSpec::ambient_dim).sum(),
        }
    }

    /// Homogeneity degree of the characteristic function (with a minus sign).
    pub fn degree(&self) -> usize {
        self.ambient_dim()
    }

    /// Interior point with margin 1: the Jordan identity of each factor.
    pub fn unit_point(&self) -> RealVector {
        let n = self.ambient_dim();
        let mut e = RealVector::zeros(n);
        self.fill_unit(e.as_mut_slice());
        e
    }

    fn fill_unit(&self, out: &mut [f64]) {
        match self {
            ConeSpec::Lorentz { .. } => {
                out.fill(0.0);
                out[0] = 1.0;
            }
            ConeSpec::Orthant { .. } => out.fill(1.0),
            ConeSpec::Product { factors } => {
                let mut off = 0;
                for f in factors {
                    let m = f.ambient_dim();
                    f.fill_unit(&mut out[off..off + m]);
                    off += m;
                }
            }
        }
    }

    /// Leaf factors with their coordinate offsets.
    pub fn blocks(&self) -> Vec<(usize, &ConeSpec)> {
        let mut out = Vec::new();
        self.collect_blocks(0, &mut out);
        out
    }

    fn collect_blocks<'a>(&'a self, offset: usize, out: &mut Vec<(usize, &'a ConeSpec)>) {
        match self {
            ConeSpec::Product { factors } => {
                let mut off = offset;
                for f in factors {
                    f.collect_blocks(off, out);
                    off += f.ambient_dim();
                }
            }
            leaf => out.push((offset, leaf)),
        }
    }

    pub(crate) fn check_dim(&self, v: &RealVector) -> Result<()> {
        let n = self.ambient_dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    fn require_interior(&self, omega: &RealVector) -> Result<()> {
        let m = self.margin(omega)?;
        if m > INTERIOR_EPS {
            Ok(())
        } else {
            Err(Error::NotInCone { margin: m })
        }
    }

    /// Concave, 1-homogeneous gauge with Ω = {margin > 0}.
    pub fn margin(&self, omega: &RealVector) -> Result<f64> {
        self.check_dim(omega)?;
        Ok(self.margin_unchecked(omega.as_slice()))
    }

    pub(crate) fn margin_unchecked(&self, w: &[f64]) -> f64 {
        self.blocks()
            .into_iter()
            .map(|(off, leaf)| {
                let m = leaf.ambient_dim();
                leaf_margin(leaf, &w[off..off + m])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Margin with respect to the dual cone. All catalog cones are self-dual.
    pub fn dual_margin(&self, y: &RealVector) -> Result<f64> {
        self.margin(y)
    }

    /// A supergradient of the margin at `omega` (gradient where it is smooth).
    pub fn margin_supergradient(&self, omega: &RealVector) -> Result<RealVector> {
        self.check_dim(omega)?;
        let w = omega.as_slice();
        let (off, leaf) = self
            .blocks()
            .into_iter()
            .map(|(off, leaf)| (off, leaf, leaf_margin(leaf, &w[off..off + leaf.ambient_dim()])))
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .map(|(off, leaf, _)| (off, leaf))
            .expect("cone has at least one block");
        let mut g = RealVector::zeros(w.len());
        let m = leaf.ambient_dim();
        let block = &w[off..off + m];
        match leaf {
            ConeSpec::Lorentz { .. } => {
                g[off] = 1.0;
                let r = norm(&block[1..]);
                if r > 0.0 {
                    for i in 1..m {
                        g[off + i] = -block[i] / r;
                    }
                }
            }
            ConeSpec::Orthant { .. } => {
                let i = argmin(block);
                g[off + i] = 1.0;
            }
            ConeSpec::Product { .. } => unreachable!("blocks are leaves"),
        }
        Ok(g)
    }

    /// log φ(ω), up to the per-kind additive constant documented above.
    pub fn log_char(&self, omega: &RealVector) -> Result<f64> {
        self.require_interior(omega)?;
        let w = omega.as_slice();
        Ok(self
            .blocks()
            .into_iter()
            .map(|(off, leaf)| {
                let b = &w[off..off + leaf.ambient_dim()];
                match leaf {
                    ConeSpec::Orthant { .. } => -b.iter().map(|x| x.ln()).sum::<f64>(),
                    ConeSpec::Lorentz { d } => -0.5 * (*d as f64 + 1.0) * lorentz_q(b).ln(),
                    ConeSpec::Product { .. } => unreachable!(),
                }
            })
            .sum())
    }

    /// ψ(ω) = -∇ log φ(ω).
    pub fn dual_map(&self, omega: &RealVector) -> Result<RealVector> {
        self.require_interior(omega)?;
        let w = omega.as_slice();
        let mut out = RealVector::zeros(w.len());
        for (off, leaf) in self.blocks() {
            let m = leaf.ambient_dim();
            let b = &w[off..off + m];
            match leaf {
                ConeSpec::Orthant { .. } => {
                    for i in 0..m {
                        out[off + i] = 1.0 / b[i];
                    }
                }
                ConeSpec::Lorentz { d } => {
                    let s = (*d as f64 + 1.0) / lorentz_q(b);
                    out[off] = s * b[0];
                    for i in 1..m {
                        out[off + i] = -s * b[i];
                    }
                }
                ConeSpec::Product { .. } => unreachable!(),
            }
        }
        Ok(out)
    }

    /// Second derivative of log φ; symmetric positive definite on Ω.
    pub fn log_char_hessian(&self, omega: &RealVector) -> Result<Matrix> {
        self.require_interior(omega)?;
        let w = omega.as_slice();
        let n = w.len();
        let mut h = Matrix::zeros(n, n);
        for (off, leaf) in self.blocks() {
            let m = leaf.ambient_dim();
            let b = &w[off..off + m];
            match leaf {
                ConeSpec::Orthant { .. } => {
                    for i in 0..m {
                        h[(off + i, off + i)] = 1.0 / (b[i] * b[i]);
                    }
                }
                ConeSpec::Lorentz { d } => {
                    // (d+1) [2 Qω (Qω)^T / q² - Q / q]
                    let c = *d as f64 + 1.0;
                    let q = lorentz_q(b);
                    let qw: Vec<f64> = (0..m).map(|i| if i == 0 { b[0] } else { -b[i] }).collect();
                    for i in 0..m {
                        for j in 0..m {
                            let mut v = 2.0 * qw[i] * qw[j] / (q * q);
                            if i == j {
                                let qii = if i == 0 { 1.0 } else { -1.0 };
                                v -= qii / q;
                            }
                            h[(off + i, off + j)] = c * v;
                        }
                    }
                }
                ConeSpec::Product { .. } => unreachable!(),
            }
        }
        Ok(h)
    }

    /// Euclidean projection onto the closed cone.
    pub fn project_closure(&self, x: &RealVector) -> Result<RealVector> {
        self.check_dim(x)?;
        if self.margin_unchecked(x.as_slice()) >= 0.0 {
            return Ok(x.clone());
        }
        let mut out = x.clone();
        for (off, leaf) in self.blocks() {
            let m = leaf.ambient_dim();
            let b = &mut out.as_mut_slice()[off..off + m];
            match leaf {
                ConeSpec::Orthant { .. } => b.iter_mut().for_each(|v| *v = v.max(0.0)),
                ConeSpec::Lorentz { .. } => project_soc(b),
                ConeSpec::Product { .. } => unreachable!(),
            }
        }
        Ok(out)
    }

    /// p = min { g(ω, y) : ω ∈ Ω̄, ‖ω‖ = 1 } for y in the open dual cone.
    ///
    /// Satisfies `p‖ω‖ ≤ g(ω, y)` on the closed cone. For products the minimum
    /// over the factor constants is attained on a single factor.
    pub fn lower_bound_constant(&self, y: &RealVector) -> Result<f64> {
        let dm = self.dual_margin(y)?;
        if dm <= INTERIOR_EPS {
            return Err(Error::NotInDualCone { margin: dm });
        }
        let w = y.as_slice();
        Ok(self
            .blocks()
            .into_iter()
            .map(|(off, leaf)| {
                let b = &w[off..off + leaf.ambient_dim()];
                match leaf {
                    ConeSpec::Orthant { .. } => b.iter().copied().fold(f64::INFINITY, f64::min),
                    ConeSpec::Lorentz { .. } => lorentz_lower_bound(b),
                    ConeSpec::Product { .. } => unreachable!(),
                }
            })
            .fold(f64::INFINITY, f64::min))
    }
}

fn leaf_margin(leaf: &ConeSpec, b: &[f64]) -> f64 {
    match leaf {
        ConeSpec::Lorentz { .. } => b[0] - norm(&b[1..]),
        ConeSpec::Orthant { .. } => b.iter().copied().fold(f64::INFINITY, f64::min),
        ConeSpec::Product { .. } => unreachable!("blocks are leaves"),
    }
}

/// Lorentz pairing ⟨v, w⟩_{1,d} = v_0 w_0 - v_1 w_1 - … - v_d w_d.
pub fn lorentz_pairing(v: &[f64], w: &[f64]) -> f64 {
    v[0] * w[0] - v[1..].iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>()
}

fn lorentz_q(b: &[f64]) -> f64 {
    // (ω_0 - r)(ω_0 + r) keeps relative accuracy near the boundary.
    let r = norm(&b[1..]);
    (b[0] - r) * (b[0] + r)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn argmin(v: &[f64]) -> usize {
    v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0)
}

fn project_soc(b: &mut [f64]) {
    let t = b[0];
    let r = norm(&b[1..]);
    if r <= t {
        return;
    }
    if r <= -t {
        b.fill(0.0);
        return;
    }
    let a = 0.5 * (t + r);
    b[0] = a;
    for v in &mut b[1..] {
        *v *= a / r;
    }
}

/// Minimizes θ ↦ y_0 cos θ - ‖y_r‖ sin θ over the generator arc θ ∈ [0, π/4].
///
/// Unit vectors of the closed Lorentz cone are (cos θ, sin θ·u) with ‖u‖ = 1;
/// the inner minimum over u is attained at u = -y_r/‖y_r‖.
fn lorentz_lower_bound(y: &[f64]) -> f64 {
    let y0 = y[0];
    let r = norm(&y[1..]);
    let f = |theta: f64| y0 * theta.cos() - r * theta.sin();
    let (mut a, mut b) = (0.0_f64, std::f64::consts::FRAC_PI_4);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // The objective is monotone on the arc, so the optimum sits on an endpoint;
    // evaluating them removes the bracket error.
    [f(0.5 * (a + b)), f(0.0), f(std::f64::consts::FRAC_PI_4)].into_iter().fold(f64::INFINITY, f64::min)
}
