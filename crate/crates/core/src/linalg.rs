//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Thin SVD with singular values sorted in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Left singular vectors, `rows × r`.
    pub u: CMat,
    pub singular_values: Vec<f64>,
    /// Right singular vectors as columns, `cols × r`.
    pub v: CMat,
}

impl Svd {
    /// Dense SVD of an arbitrary matrix.
    pub fn dense(m: &CMat) -> Self {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Svd {
                u: CMat::zeros(m.nrows(), 0),
                singular_values: Vec::new(),
                v: CMat::zeros(m.ncols(), 0),
            };
        }
        let svd = m.clone().svd(true, true);
        Svd {
            u: svd.u.expect("u requested"),
            singular_values: svd.singular_values.iter().copied().collect(),
            v: svd.v_t.expect("v_t requested").adjoint(),
        }
    }

    /// SVD of `left · core · rightᴴ` without forming the product.
    ///
    /// `left` is `rows × p`, `core` is `p × q` and `right` is `cols × q`, with
    /// `p, q` small. Both tall factors are reduced by QR first, so the cost is
    /// linear in `rows` and `cols`.
    pub fn low_rank(left: &CMat, core: &CMat, right: &CMat) -> Self {
        assert_eq!(left.ncols(), core.nrows());
        assert_eq!(right.ncols(), core.ncols());
        if left.ncols() == 0 || right.ncols() == 0 {
            return Svd {
                u: CMat::zeros(left.nrows(), 0),
                singular_values: Vec::new(),
                v: CMat::zeros(right.nrows(), 0),
            };
        }
        let (ql, rl) = thin_qr(left);
        let (qr, rr) = thin_qr(right);
        let small = &rl * core * rr.adjoint();
        let inner = Svd::dense(&small);
        Svd {
            u: ql * inner.u,
            singular_values: inner.singular_values,
            v: qr * inner.v,
        }
    }

    /// Number of singular values at or above `threshold · σ_max`.
    pub fn rank(&self, threshold: f64) -> usize {
        rank_of(&self.singular_values, threshold)
    }
}

fn thin_qr(m: &CMat) -> (CMat, CMat) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

pub(crate) fn rank_of(singular_values: &[f64], threshold: f64) -> usize {
    let max = singular_values.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return 0;
    }
    singular_values
        .iter()
        .filter(|&&s| s >= threshold * max)
        .count()
}

/// Count of singular values `≥ threshold · σ_max` of a dense matrix.
pub fn numerical_rank(m: &CMat, threshold: f64) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::invalid("numerical rank of an empty matrix"));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!(
            "rank threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let sv: Vec<f64> = m.singular_values().iter().copied().collect();
    Ok(rank_of(&sv, threshold))
}

/// Squared Frobenius norm.
pub fn frob_sq(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Least-squares solution `X = A⁺ B` through the SVD pseudo-inverse.
pub fn least_squares(a: &CMat, b: &CMat) -> CMat {
    if a.ncols() == 0 {
        return CMat::zeros(0, b.ncols());
    }
    let svd = Svd::dense(a);
    let smax = svd.singular_values.first().copied().unwrap_or(0.0);
    let tol = smax * 1e-12 * a.nrows().max(a.ncols()) as f64;
    // X = V Σ⁺ Uᴴ B
    let uhb = svd.u.adjoint() * b;
    let mut scaled = uhb;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > tol { 1.0 / s } else { 0.0 };
        scaled.row_mut(i).scale_mut(inv);
    }
    svd.v * scaled
}

/// `log2 det(M)` for a Hermitian positive-definite matrix.
pub fn log2_det_hpd(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    match m.clone().cholesky() {
        Some(ch) => {
            let l = ch.l_dirty();
            (0..m.nrows()).map(|i| 2.0 * l[(i, i)].re.log2()).sum()
        }
        None => {
            // Numerically semi-definite: fall back to eigenvalues.
            let eig = m.clone().symmetric_eigen();
            eig.eigenvalues.iter().map(|&l| l.max(f64::MIN_POSITIVE).log2()).sum()
        }
    }
}

/// Eigenvector of the largest eigenvalue of a Hermitian matrix.
pub fn dominant_eigenvector(m: &CMat) -> (f64, CVec) {
    let eig = m.clone().symmetric_eigen();
    let (idx, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("non-empty matrix");
    (val, eig.eigenvectors.column(idx).into_owned())
}

/// Unit-modulus projection `exp(j·arg z)`, with `arg 0 = 0`.
pub fn phase_of(z: C64) -> C64 {
    let r = z.norm();
    if r > 0.0 {
        z / r
    } else {
        C64::new(1.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rank_identity_and_outer_product() {
        let eye = CMat::identity(3, 3);
        assert_eq!(numerical_rank(&eye, 0.5).unwrap(), 3);
        let a = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let b = CVec::from_vec(vec![c(0.5, 0.5), c(3.0, 0.0)]);
        let outer = &a * b.adjoint();
        assert_eq!(numerical_rank(&outer, 1e-9).unwrap(), 1);
    }

    #[test]
    fn rank_rejects_bad_input() {
        assert!(numerical_rank(&CMat::zeros(0, 3), 0.5).is_err());
        assert!(numerical_rank(&CMat::identity(2, 2), 1.5).is_err());
        assert!(numerical_rank(&CMat::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn low_rank_svd_matches_dense() {
        let left = CMat::from_fn(12, 3, |i, j| c((i * 7 + j) as f64 * 0.1, (i as f64 - j as f64).sin()));
        let right = CMat::from_fn(9, 2, |i, j| c(((i + 2 * j) as f64).cos(), 0.3 * i as f64));
        let core = CMat::from_fn(3, 2, |i, j| c(1.0 + i as f64, -(j as f64)));
        let dense = &left * &core * right.adjoint();
        let a = Svd::dense(&dense);
        let b = Svd::low_rank(&left, &core, &right);
        for i in 0..2 {
            assert_relative_eq!(a.singular_values[i], b.singular_values[i], max_relative = 1e-10);
        }
        let rebuilt = &b.u * CMat::from_diagonal(&DVector::from_iterator(
            b.singular_values.len(),
            b.singular_values.iter().map(|&s| c(s, 0.0)),
        )) * b.v.adjoint();
        assert!(frob_sq(&(rebuilt - dense)).sqrt() < 1e-10);
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = CMat::from_fn(6, 2, |i, j| c(i as f64 + 1.0, (j * i) as f64));
        let x = CMat::from_fn(2, 3, |i, j| c(i as f64 - j as f64, 1.0));
        let b = &a * &x;
        let got = least_squares(&a, &b);
        assert!(frob_sq(&(got - x)).sqrt() < 1e-10);
    }

    #[test]
    fn log_det_matches_eigenvalues() {
        let a = CMat::from_fn(3, 3, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let m = CMat::identity(3, 3) + &a * a.adjoint();
        let eig: f64 = m.clone().symmetric_eigen().eigenvalues.iter().map(|l| l.log2()).sum();
        assert_relative_eq!(log2_det_hpd(&m), eig, max_relative = 1e-12);
    }

    #[test]
    fn phase_of_zero_is_one() {
        assert_eq!(phase_of(c(0.0, 0.0)), c(1.0, 0.0));
        assert_relative_eq!(phase_of(c(0.0, -3.0)).im, -1.0);
    }
}
