//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Orthonormalizes the columns of `cols` by twice-iterated modified Gram–Schmidt.
///
/// Fails with [`Error::RankDeficient`] when a column keeps less than `tol` of
/// its original norm after removing the previous directions.
pub fn orthonormalize(cols: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let (n, k) = cols.shape();
    let mut q = DMatrix::zeros(n, k);
    for j in 0..k {
        let orig = cols.column(j).norm();
        let mut v = cols.column(j).clone_owned();
        for _ in 0..2 {
            for i in 0..j {
                let c = q.column(i).dot(&v);
                v.axpy(-c, &q.column(i), 1.0);
            }
        }
        let r = v.norm();
        if !(r > tol * orig.max(1.0)) {
            return Err(Error::RankDeficient);
        }
        q.set_column(j, &(v / r));
    }
    Ok(q)
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `basis`, built by greedily extending with standard basis vectors.
pub fn orthogonal_complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = basis.shape();
    let mut q: Vec<DVector<f64>> = (0..k).map(|j| basis.column(j).clone_owned()).collect();
    let mut out = Vec::with_capacity(n - k);
    let mut used = vec![false; n];
    while q.len() < n {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for i in (0..n).filter(|&i| !used[i]) {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            for _ in 0..2 {
                for b in &q {
                    let c = b.dot(&v);
                    v.axpy(-c, b, 1.0);
                }
            }
            let r = v.norm();
            if best.as_ref().is_none_or(|(_, _, br)| r > *br + 1e-12) {
                best = Some((i, v, r));
            }
        }
        let (i, v, r) = best.expect("complement not exhausted");
        used[i] = true;
        let v = v / r;
        q.push(v.clone());
        out.push(v);
    }
    if out.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

/// Singular values (descending) and right singular vectors as columns of V.
fn full_right_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    // Pad wide matrices with zero rows so the decomposition returns a full V.
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_columns(&idx.iter().map(|&i| v_t.row(i).transpose()).collect::<Vec<_>>());
    (sv, v)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal null-space basis of `m` with singular-value cutoff
/// `rel_cutoff · σ_max`. Values within a factor 100 of the cutoff make the
/// rank ambiguous and are reported instead of guessed.
pub fn null_space(m: &DMatrix<f64>, rel_cutoff: f64) -> Result<DMatrix<f64>> {
    let c = m.ncols();
    if m.nrows() == 0 || c == 0 {
        return Ok(DMatrix::identity(c, c));
    }
    let (sv, v) = full_right_svd(m);
    let smax = sv[0];
    if smax == 0.0 {
        return Ok(DMatrix::identity(c, c));
    }
    let cutoff = rel_cutoff * smax;
    if let Some(&s) = sv.iter().find(|&&s| s > cutoff * 1e-2 && s < cutoff * 1e2) {
        return Err(Error::RankAmbiguous { value: s, cutoff });
    }
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    Ok(v.columns(rank, c - rank).clone_owned())
}

/// Orthonormal basis of the column span of `m` (rank by relative cutoff).
pub fn range_basis(m: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    let (n, c) = m.shape();
    if c == 0 || n == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_cutoff * smax)
        .map(|i| u.column(i).clone_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// ‖(I - QQᵀ) A‖₂ for orthonormal Q: the sine of the largest principal angle
/// from span(A) to span(Q) when A is orthonormal.
pub fn subspace_residual(a: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    let r = a - q * (q.transpose() * a);
    spectral_norm(&r)
}

/// Solves a symmetric positive-definite system, falling back to LU.
pub fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = Cholesky::new(h.clone()) {
        return Some(ch.solve(rhs));
    }
    h.clone().lu().solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complement_of_axis_is_positive_axis() {
        let b = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let c = orthogonal_complement(&b);
        assert_eq!(c, DMatrix::from_column_slice(2, 1, &[1.0, 0.0]));
    }

    #[test]
    fn complement_is_orthonormal() {
        let raw = DMatrix::from_row_slice(4, 2, &[1.0, 0.5, 2.0, -1.0, 0.0, 3.0, 1.0, 1.0]);
        let b = orthonormalize(&raw, 1e-12).unwrap();
        let c = orthogonal_complement(&b);
        assert_eq!(c.shape(), (4, 2));
        assert_relative_eq!(b.transpose() * &b, DMatrix::identity(2, 2), epsilon = 1e-12);
        assert_relative_eq!(c.transpose() * &c, DMatrix::identity(2, 2), epsilon = 1e-12);
        assert!((b.transpose() * &c).abs().max() < 1e-12);
    }

    #[test]
    fn rank_deficient_columns_rejected() {
        let raw = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0]);
        assert_eq!(orthonormalize(&raw, 1e-12), Err(Error::RankDeficient));
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&m, 1e-9).unwrap();
        assert_eq!(k.ncols(), 2);
        assert!((m * &k).abs().max() < 1e-14);
    }

    #[test]
    fn null_space_flags_ambiguous_rank() {
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1e-9]));
        assert!(matches!(null_space(&m, 1e-9), Err(Error::RankAmbiguous { .. })));
    }
}
