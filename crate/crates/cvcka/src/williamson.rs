//! Williamson normal form and Gaussian purification.
//!
//! Any physical covariance matrix decomposes as `Sigma = S D S^T` with `S`
//! symplectic and `D = ⊕ nu_i I_2`. Purifying each thermal eigenvalue with
//! a two-mode-squeezed partner then yields a pure state on twice the modes
//! whose reduction to the original modes is exactly `Sigma`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{psd_sqrt, symplectic_form_in_state_basis, CovMatrix};
use crate::scalar::{cst, Scalar};

/// Williamson normal form `Sigma = S D S^T`.
#[derive(Debug, Clone)]
pub struct Williamson<T: Scalar> {
    /// Symplectic congruence matrix.
    pub symplectic: DMatrix<T>,
    /// Symplectic eigenvalues, one per mode, descending.
    pub nus: Vec<T>,
}

/// Computes the Williamson decomposition of a (strictly positive)
/// covariance matrix.
///
/// Implementation: with `R = Sigma^{1/2}` the matrix `A = R Omega R` is
/// antisymmetric; an orthogonal pairing of the eigenvectors of
/// `A^T A = ⊕ nu_i^2` brings `A` to the canonical form `⊕ nu_i J`, and
/// `S = R Q (⊕ nu_i^{-1/2} I_2)` is the symplectic factor.
pub fn williamson<T: Scalar>(sigma: &CovMatrix<T>) -> Result<Williamson<T>> {
    let n = sigma.n_modes();
    let dim = 2 * n;
    let a = symplectic_form_in_state_basis(sigma)?;
    let e = a.transpose() * &a;
    let (vals, vecs) = crate::gaussian::sym_eig_desc(&e);
    let scale = vals[0].max(cst(1e-300));
    let group_tol = cst::<T>(1e-7) * scale;

    let mut nus: Vec<T> = Vec::with_capacity(n);
    let mut q_cols: Vec<DVector<T>> = Vec::with_capacity(dim);
    let mut i = 0;
    while i < dim {
        let mut j = i;
        while j < dim && (vals[j] - vals[i]).abs() <= group_tol {
            j += 1;
        }
        let mut group_mean = T::zero();
        for k in i..j {
            group_mean += vals[k];
        }
        group_mean /= cst((j - i) as f64);
        let nu = group_mean.max(T::zero()).sqrt();
        if nu <= T::zero() {
            return Err(Error::NonPhysical {
                nu_min: 0.0,
                tol: 0.0,
            });
        }
        // Pair the degenerate eigenspace: u together with v = -A u / nu
        // spans an invariant plane on which A acts as nu*J.
        let mut basis: Vec<DVector<T>> = (i..j).map(|c| vecs.column(c).into_owned()).collect();
        while let Some(mut u) = basis.pop() {
            let un = u.norm();
            if un <= cst(1e-12) {
                continue;
            }
            u /= un;
            let mut v = -(&a * &u) / nu;
            let uv = u.dot(&v);
            v -= &u * uv;
            let vn = v.norm();
            if vn <= cst(1e-12) {
                return Err(Error::NumericalRank(
                    "degenerate symplectic eigenspace pairing failed".into(),
                ));
            }
            v /= vn;
            // deflate the remaining basis off span{u, v}
            let mut next: Vec<DVector<T>> = Vec::with_capacity(basis.len());
            for mut b in basis {
                let bu = b.dot(&u);
                let bv = b.dot(&v);
                b -= &u * bu;
                b -= &v * bv;
                for c in &next {
                    let bc = b.dot(c);
                    b -= c * bc;
                }
                if b.norm() > cst(1e-8) {
                    let bn = b.norm();
                    next.push(b / bn);
                }
            }
            basis = next;
            nus.push(nu);
            q_cols.push(u);
            q_cols.push(v);
        }
        i = j;
    }
    if nus.len() != n {
        return Err(Error::NumericalRank(format!(
            "williamson pairing produced {} modes, expected {n}",
            nus.len()
        )));
    }
    let mut q = DMatrix::zeros(dim, dim);
    for (c, col) in q_cols.iter().enumerate() {
        q.set_column(c, col);
    }
    let root = psd_sqrt(sigma.matrix(), 1e-9)?;
    let mut d_inv_half = DMatrix::zeros(dim, dim);
    for (k, nu) in nus.iter().enumerate() {
        let s = T::one() / nu.sqrt();
        d_inv_half[(2 * k, 2 * k)] = s;
        d_inv_half[(2 * k + 1, 2 * k + 1)] = s;
    }
    Ok(Williamson {
        symplectic: root * q * d_inv_half,
        nus,
    })
}

/// Purifies a mixed N-mode state into a pure 2N-mode state whose first N
/// modes reduce to the input: each Williamson thermal mode `nu` is paired
/// with an ancilla through two-mode-squeezed correlations
/// `sqrt(nu^2 - 1) diag(1, -1)`; ancillas stay in the Williamson basis.
pub fn purify<T: Scalar>(sigma: &CovMatrix<T>) -> Result<CovMatrix<T>> {
    let n = sigma.n_modes();
    let dim = 2 * n;
    let w = williamson(sigma)?;
    let mut d = DMatrix::zeros(dim, dim);
    let mut c = DMatrix::zeros(dim, dim);
    for (k, nu) in w.nus.iter().enumerate() {
        d[(2 * k, 2 * k)] = *nu;
        d[(2 * k + 1, 2 * k + 1)] = *nu;
        let corr = (*nu * *nu - T::one()).max(T::zero()).sqrt();
        c[(2 * k, 2 * k)] = corr;
        c[(2 * k + 1, 2 * k + 1)] = -corr;
    }
    let s = &w.symplectic;
    let sys = s * &d * s.transpose();
    let cross = s * &c;
    let mut out = DMatrix::zeros(2 * dim, 2 * dim);
    out.view_mut((0, 0), (dim, dim)).copy_from(&sys);
    out.view_mut((0, dim), (dim, dim)).copy_from(&cross);
    out.view_mut((dim, 0), (dim, dim))
        .copy_from(&cross.transpose());
    out.view_mut((dim, dim), (dim, dim)).copy_from(&d);
    Ok(CovMatrix::from_symmetric_unchecked(out))
}
