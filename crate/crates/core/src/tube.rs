//! The tube domain V + iΩ, its Kähler potential and complex structure.

use serde::{Deserialize, Serialize};

use crate::cone::{ConeSpec, RealVector, INTERIOR_EPS};
use crate::error::{Error, Result};

/// A point v + iω of the tube domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PointSchema", into = "PointSchema")]
pub struct TubePoint {
    pub re: RealVector,
    pub im: RealVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSchema {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<PointSchema> for TubePoint {
    fn from(p: PointSchema) -> Self {
        TubePoint { re: RealVector::from_vec(p.re), im: RealVector::from_vec(p.im) }
    }
}

impl From<TubePoint> for PointSchema {
    fn from(p: TubePoint) -> Self {
        PointSchema { re: p.re.as_slice().to_vec(), im: p.im.as_slice().to_vec() }
    }
}

impl TubePoint {
    /// Builds a point, checking that the imaginary part lies in the open cone.
    pub fn new(cone: &ConeSpec, re: RealVector, im: RealVector) -> Result<Self> {
        let p = TubePoint { re, im };
        p.validate(cone)?;
        Ok(p)
    }

    pub fn validate(&self, cone: &ConeSpec) -> Result<()> {
        cone.check_dim(&self.re)?;
        let m = cone.margin(&self.im)?;
        if m > INTERIOR_EPS {
            Ok(())
        } else {
            Err(Error::NotInDomain { margin: m })
        }
    }

    pub fn dim(&self) -> usize {
        self.re.len()
    }

    pub fn norm(&self) -> f64 {
        (self.re.norm_squared() + self.im.norm_squared()).sqrt()
    }

    /// x + s·u, moving along a real tangent vector.
    pub fn offset(&self, u: &Tangent, s: f64) -> TubePoint {
        TubePoint { re: &self.re + &u.re * s, im: &self.im + &u.im * s }
    }
}

/// A real tangent vector at a tube point, identified with V + iV.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub re: RealVector,
    pub im: RealVector,
}

impl Tangent {
    pub fn new(re: RealVector, im: RealVector) -> Self {
        assert_eq!(re.len(), im.len(), "tangent parts must have equal length");
        Tangent { re, im }
    }

    pub fn zeros(n: usize) -> Self {
        Tangent::new(RealVector::zeros(n), RealVector::zeros(n))
    }

    /// Stacked real coordinates (re, im) of length 2n.
    pub fn to_stacked(&self) -> RealVector {
        let n = self.re.len();
        RealVector::from_fn(2 * n, |i, _| if i < n { self.re[i] } else { self.im[i - n] })
    }

    pub fn from_stacked(v: &RealVector) -> Self {
        let n = v.len() / 2;
        Tangent::new(v.rows(0, n).clone_owned(), v.rows(n, n).clone_owned())
    }

    pub fn norm(&self) -> f64 {
        (self.re.norm_squared() + self.im.norm_squared()).sqrt()
    }

    pub fn scale(&self, s: f64) -> Tangent {
        Tangent::new(&self.re * s, &self.im * s)
    }

    pub fn add(&self, other: &Tangent) -> Tangent {
        Tangent::new(&self.re + &other.re, &self.im + &other.im)
    }
}

/// ρ(x) = log φ(Im x).
pub fn potential(cone: &ConeSpec, x: &TubePoint) -> Result<f64> {
    x.validate(cone)?;
    cone.log_char(&x.im)
}

/// Multiplication by i: (re, im) ↦ (-im, re).
pub fn complex_mul_i(u: &Tangent) -> Tangent {
    Tangent::new(-&u.im, u.re.clone())
}

/// d^cρ_x(w) = dρ_x(Jw) = -g(ψ(Im x), Re w).
pub fn dc_potential(cone: &ConeSpec, x: &TubePoint, w: &Tangent) -> Result<f64> {
    x.validate(cone)?;
    let grad = cone.dual_map(&x.im)?;
    Ok(-grad.dot(&complex_mul_i(w).im))
}

/// Finite-difference value of the Kähler form -dd^cρ on constant fields u, w.
///
/// Evaluates -(D_u[d^cρ(w)] - D_w[d^cρ(u)]) by central differences with
/// displacement 1e-5·(1 + ‖x‖), shrinking the stencil up to three times when
/// it leaves the domain.
pub fn kahler_form_oracle(cone: &ConeSpec, x: &TubePoint, u: &Tangent, w: &Tangent) -> Result<f64> {
    x.validate(cone)?;
    let n = cone.ambient_dim();
    for t in [u, w] {
        if t.re.len() != n || t.im.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: t.re.len() });
        }
    }
    let mut h = 1e-5 * (1.0 + x.norm());
    for _ in 0..=3 {
        match directional(cone, x, u, w, h).and_then(|a| Ok(a - directional(cone, x, w, u, h)?)) {
            Ok(v) => return Ok(-v),
            Err(Error::NotInDomain { .. }) => h *= 0.1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotInDomain { margin: cone.margin(&x.im)? })
}

/// Central difference of t ↦ d^cρ_{x + t·dir}(arg) at t = 0.
fn directional(cone: &ConeSpec, x: &TubePoint, dir: &Tangent, arg: &Tangent, h: f64) -> Result<f64> {
    let len = dir.norm();
    if len == 0.0 {
        return Ok(0.0);
    }
    let tau = h / len;
    let plus = dc_potential(cone, &x.offset(dir, tau), arg)?;
    let minus = dc_potential(cone, &x.offset(dir, -tau), arg)?;
    Ok((plus - minus) / (2.0 * tau))
}
