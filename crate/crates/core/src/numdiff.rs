//! Central finite differences, used as independent oracles by the
//! verification suite.

use crate::cone::{Matrix, RealVector};

/// Central-difference gradient of `f` at `x` with coordinate step `h`.
pub fn gradient<F, E>(f: F, x: &RealVector, h: f64) -> Result<RealVector, E>
where
    F: Fn(&RealVector) -> Result<f64, E>,
{
    let mut g = RealVector::zeros(x.len());
    let mut p = x.clone();
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let fp = f(&p)?;
        p[i] = x[i] - h;
        let fm = f(&p)?;
        p[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Central-difference Jacobian (rows = outputs) of a vector function.
pub fn jacobian<F, E>(f: F, x: &RealVector, h: f64) -> Result<Matrix, E>
where
    F: Fn(&RealVector) -> Result<RealVector, E>,
{
    let mut cols = Vec::with_capacity(x.len());
    let mut p = x.clone();
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let fp = f(&p)?;
        p[i] = x[i] - h;
        let fm = f(&p)?;
        p[i] = x[i];
        cols.push((fp - fm) / (2.0 * h));
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(Matrix::from_fn(rows, x.len(), |r, c| cols[c][r]))
}

/// Central difference of t ↦ f(x + t·dir) at t = 0.
pub fn directional<F, E>(f: F, x: &RealVector, dir: &RealVector, h: f64) -> Result<f64, E>
where
    F: Fn(&RealVector) -> Result<f64, E>,
{
    Ok((f(&(x + dir * h))? - f(&(x - dir * h))?) / (2.0 * h))
}

/// ‖a - b‖ / max(‖a‖, ‖b‖), zero when both vanish.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

pub fn relative_error_scalar(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &RealVector| Ok::<_, ()>(x.dot(x));
        let x = RealVector::from_column_slice(&[1.0, -2.0]);
        let g = gradient(f, &x, 1e-4).unwrap();
        assert!((g - &x * 2.0).norm() < 1e-9);
    }
}
