//! Covariance-matrix calculus for Gaussian states in shot-noise units.
//!
//! Conventions used throughout:
//! - quadrature ordering `(x1, p1, x2, p2, ...)`,
//! - vacuum variance 1 (SNU), so a physical state has every symplectic
//!   eigenvalue `nu_i >= 1`,
//! - all measurements are homodyne detection of the x quadrature.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cst, log2, Scalar};

/// Tolerance on symmetry of covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Symplectic eigenvalues below `1 - PHYSICALITY_TOL` are rejected;
/// smaller deficits are clamped to 1.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Relative singular-value cutoff of the Moore-Penrose pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Quadrature covariance matrix of an N-mode Gaussian state, SNU.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix<T: Scalar> {
    n_modes: usize,
    data: DMatrix<T>,
}

impl<T: Scalar> CovMatrix<T> {
    /// Validates squareness, even dimension and symmetry (`<= 1e-12`),
    /// then stores the symmetrised matrix.
    pub fn new(data: DMatrix<T>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "not square: {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.nrows() == 0 || !data.nrows().is_multiple_of(2) {
            return Err(Error::InvalidMatrix(format!(
                "dimension {} is not a positive multiple of 2",
                data.nrows()
            )));
        }
        let tol = cst::<T>(SYMMETRY_TOL);
        for i in 0..data.nrows() {
            for j in (i + 1)..data.ncols() {
                if (data[(i, j)] - data[(j, i)]).abs() > tol {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric at ({i},{j}): {} vs {}",
                        data[(i, j)].to_subset().unwrap_or(f64::NAN),
                        data[(j, i)].to_subset().unwrap_or(f64::NAN)
                    )));
                }
            }
        }
        Ok(Self::from_symmetric_unchecked(data))
    }

    /// Wraps a matrix known to be symmetric by construction, symmetrising
    /// away floating-point residue.
    pub(crate) fn from_symmetric_unchecked(data: DMatrix<T>) -> Self {
        let half = cst::<T>(0.5);
        let sym = (&data + data.transpose()) * half;
        Self {
            n_modes: sym.nrows() / 2,
            data: sym,
        }
    }

    /// Identity covariance matrix: N vacuum modes.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            data: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single thermal mode of symplectic eigenvalue `nu >= 1`.
    pub fn thermal(nu: T) -> Self {
        Self {
            n_modes: 1,
            data: DMatrix::from_diagonal_element(2, 2, nu),
        }
    }

    /// Two-mode squeezed vacuum of quadrature variance `mu >= 1`:
    /// `[[mu I, c Z], [c Z, mu I]]` with `c = sqrt(mu^2 - 1)`,
    /// `Z = diag(1, -1)`.
    pub fn two_mode_squeezed(mu: T) -> Result<Self> {
        if !(mu >= T::one()) {
            return Err(Error::Domain(format!(
                "TMSV variance mu={} below 1",
                mu.to_subset().unwrap_or(f64::NAN)
            )));
        }
        let c = (mu * mu - T::one()).sqrt();
        let mut m = DMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = mu;
        }
        m[(0, 2)] = c;
        m[(2, 0)] = c;
        m[(1, 3)] = -c;
        m[(3, 1)] = -c;
        Ok(Self {
            n_modes: 2,
            data: m,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.data
    }

    /// The 2x2 block coupling modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<T> {
        self.data.view((2 * i, 2 * j), (2, 2)).into_owned()
    }

    /// x-quadrature sub-block over the given modes, in the given order.
    pub fn x_block(&self, modes: &[usize]) -> DMatrix<T> {
        let k = modes.len();
        DMatrix::from_fn(k, k, |r, c| self.data[(2 * modes[r], 2 * modes[c])])
    }

    /// Sub-state over `modes` (partial trace of the complement).
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        self.check_modes(modes)?;
        let idx = quad_indices(modes);
        Ok(Self::from_symmetric_unchecked(
            self.data.select_rows(&idx).select_columns(&idx),
        ))
    }

    /// Direct sum with another state (modes appended after `self`'s).
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.data.nrows();
        let m = other.data.nrows();
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.data);
        out.view_mut((n, n), (m, m)).copy_from(&other.data);
        Self {
            n_modes: self.n_modes + other.n_modes,
            data: out,
        }
    }

    /// Congruence transform `M . S . M^T` (for symplectic `M` this is the
    /// Gaussian unitary action on the state).
    pub fn congruence(&self, m: &DMatrix<T>) -> Self {
        Self::from_symmetric_unchecked(m * &self.data * m.transpose())
    }

    /// Errors unless every symplectic eigenvalue is `>= 1 - 1e-9`.
    ///
    /// Small states go through the symplectic spectrum; large ones (the
    /// lattices) use the equivalent positive-definiteness of the real
    /// embedding of `Sigma + i s Omega` with `s = 1 - tol`, which one
    /// Cholesky factorization decides.
    pub fn validate_physical(&self) -> Result<()> {
        if self.n_modes <= 64 {
            return symplectic_spectrum(self).map(|_| ());
        }
        let dim = 2 * self.n_modes;
        let s = T::one() - cst::<T>(PHYSICALITY_TOL);
        let jitter = cst::<T>(1e-10)
            * (0..dim)
                .map(|i| self.data[(i, i)])
                .fold(T::zero(), |a, b| if b > a { b } else { a });
        let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
        embed.view_mut((0, 0), (dim, dim)).copy_from(&self.data);
        embed.view_mut((dim, dim), (dim, dim)).copy_from(&self.data);
        for m in 0..self.n_modes {
            // -s*Omega in the top-right block, s*Omega bottom-left
            embed[(2 * m, dim + 2 * m + 1)] = -s;
            embed[(2 * m + 1, dim + 2 * m)] = s;
            embed[(dim + 2 * m, 2 * m + 1)] = s;
            embed[(dim + 2 * m + 1, 2 * m)] = -s;
        }
        for i in 0..2 * dim {
            embed[(i, i)] += jitter;
        }
        match embed.cholesky() {
            Some(_) => Ok(()),
            None => Err(Error::NonPhysical {
                nu_min: f64::NAN,
                tol: PHYSICALITY_TOL,
            }),
        }
    }

    pub(crate) fn check_modes(&self, modes: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.n_modes];
        for &m in modes {
            if m >= self.n_modes {
                return Err(Error::ModeOutOfRange {
                    index: m,
                    n_modes: self.n_modes,
                });
            }
            if seen[m] {
                return Err(Error::Domain(format!("duplicate mode index {m}")));
            }
            seen[m] = true;
        }
        Ok(())
    }
}

/// Symplectic eigenvalues, one per mode, descending, each `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum<T: Scalar> {
    pub values: Vec<T>,
}

impl<T: Scalar> SymplecticSpectrum<T> {
    /// Largest deviation `|nu_i - 1|`.
    pub fn max_deviation_from_one(&self) -> T {
        self.values
            .iter()
            .map(|nu| (*nu - T::one()).abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Pure within `tol` means every eigenvalue sits in `[1-tol, 1+tol]`.
    pub fn is_pure(&self, tol: T) -> bool {
        self.max_deviation_from_one() <= tol
    }

    /// `det Sigma = prod nu_i^2`.
    pub fn det(&self) -> T {
        self.values
            .iter()
            .fold(T::one(), |acc, nu| acc * *nu * *nu)
    }
}

/// Homodyne-x measurement of an ordered set of modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSpec {
    pub modes: Vec<usize>,
}

impl MeasurementSpec {
    pub fn new(modes: impl Into<Vec<usize>>) -> Self {
        Self {
            modes: modes.into(),
        }
    }
}

/// Lossy, noisy bosonic channel: transmission `t` and excess noise `eps`
/// referred to the channel input, both per transmitted mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T: Scalar> {
    pub t: T,
    pub eps: T,
}

impl<T: Scalar> ChannelParams<T> {
    pub fn new(t: T, eps: T) -> Result<Self> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::Domain(format!(
                "transmission t={} outside [0, 1]",
                t.to_subset().unwrap_or(f64::NAN)
            )));
        }
        if !(eps >= T::zero()) || !eps.is_finite() {
            return Err(Error::Domain(format!(
                "excess noise eps={} not finite and non-negative",
                eps.to_subset().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { t, eps })
    }

    /// Identity channel.
    pub fn lossless() -> Self {
        Self {
            t: T::one(),
            eps: T::zero(),
        }
    }
}

fn quad_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

/// Symmetric eigendecomposition returning (eigenvalues, eigenvectors)
/// sorted descending. Jacobi-based: the library's QL solver is not
/// accurate enough for the 1e-9 physicality tolerances used here.
pub(crate) fn sym_eig_desc<T: Scalar>(m: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    crate::linalg::jacobi_eigen_desc(m).expect("finite symmetric matrix")
}

/// Symmetric PSD square root; eigenvalues in `[-clamp_tol, 0)` are clamped
/// to zero, more negative ones are an error.
pub(crate) fn psd_sqrt<T: Scalar>(m: &DMatrix<T>, clamp_tol: f64) -> Result<DMatrix<T>> {
    let (vals, vecs) = sym_eig_desc(m);
    let tol = cst::<T>(clamp_tol);
    let mut roots = DVector::zeros(vals.len());
    for i in 0..vals.len() {
        if vals[i] < -tol {
            return Err(Error::InvalidMatrix(format!(
                "not positive semidefinite: eigenvalue {}",
                vals[i].to_subset().unwrap_or(f64::NAN)
            )));
        }
        roots[i] = if vals[i] > T::zero() {
            vals[i].sqrt()
        } else {
            T::zero()
        };
    }
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= roots[j];
    }
    Ok(&scaled * vecs.transpose())
}

/// Moore-Penrose pseudoinverse of a symmetric matrix via spectral
/// decomposition, singular values below `PINV_CUTOFF * max` dropped.
pub(crate) fn pseudo_inverse_sym<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let (vals, vecs) = sym_eig_desc(m);
    let max_abs = vals
        .iter()
        .map(|v| v.abs())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    let cut = cst::<T>(PINV_CUTOFF) * max_abs;
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let inv = if vals[j].abs() > cut {
            T::one() / vals[j]
        } else {
            T::zero()
        };
        col *= inv;
    }
    &scaled * vecs.transpose()
}

/// The antisymmetric matrix `A = S^{1/2} Omega S^{1/2}`; its singular
/// values are the symplectic eigenvalues, each doubled.
pub(crate) fn symplectic_form_in_state_basis<T: Scalar>(
    sigma: &CovMatrix<T>,
) -> Result<DMatrix<T>> {
    let root = psd_sqrt(sigma.matrix(), 1e-9)?;
    let n = sigma.n_modes();
    let dim = 2 * n;
    // a = root * Omega * root, with Omega = ⊕ [[0,1],[-1,0]]
    let mut omega_root = DMatrix::zeros(dim, dim);
    for m in 0..n {
        for c in 0..dim {
            omega_root[(2 * m, c)] = root[(2 * m + 1, c)];
            omega_root[(2 * m + 1, c)] = -root[(2 * m, c)];
        }
    }
    let a = &root * omega_root;
    let half = cst::<T>(0.5);
    Ok((&a - a.transpose()) * half)
}

/// Symplectic eigenvalues of a covariance matrix: the N moduli of the
/// eigenvalues of `i Omega Sigma`, deduplicated into pairs, descending.
///
/// Errors with a physicality failure if any eigenvalue falls below
/// `1 - 1e-9` (at `f64`; lower-precision scalars widen the gate in
/// proportion to their epsilon); deficits within tolerance are clamped
/// to 1.
pub fn symplectic_spectrum<T: Scalar>(sigma: &CovMatrix<T>) -> Result<SymplecticSpectrum<T>> {
    let a = symplectic_form_in_state_basis(sigma)?;
    // -A^2 = A^T A is symmetric PSD with eigenvalues nu_i^2, each twice.
    let e = a.transpose() * &a;
    let (vals, _) = sym_eig_desc(&e);
    let n = sigma.n_modes();
    let nus: Vec<T> = (0..n).map(|i| vals[2 * i].max(T::zero()).sqrt()).collect();
    let nu_max = nus[0].max(T::one());
    let tol = cst::<T>(PHYSICALITY_TOL).max(cst::<T>(100.0) * T::default_epsilon() * nu_max);
    let mut out = Vec::with_capacity(n);
    for nu in nus {
        if nu < T::one() - tol {
            return Err(Error::NonPhysical {
                nu_min: nu.to_subset().unwrap_or(f64::NAN),
                tol: tol.to_subset().unwrap_or(PHYSICALITY_TOL),
            });
        }
        out.push(if nu < T::one() { T::one() } else { nu });
    }
    Ok(SymplecticSpectrum { values: out })
}

/// Entropy contribution of one symplectic eigenvalue, evaluated at
/// `x = nu/2` so that pure SNU states (`nu = 1`) contribute zero.
fn entropy_term<T: Scalar>(nu: T) -> T {
    let x = nu * cst::<T>(0.5);
    let half = cst::<T>(0.5);
    let plus = x + half;
    let minus = x - half;
    let mut s = plus * log2(plus);
    if minus > T::zero() {
        s -= minus * log2(minus);
    }
    s
}

/// Von Neumann entropy in bits, from the symplectic spectrum.
pub fn von_neumann_entropy<T: Scalar>(sigma: &CovMatrix<T>) -> Result<T> {
    let spec = symplectic_spectrum(sigma)?;
    let mut s = T::zero();
    for nu in &spec.values {
        s += entropy_term(*nu);
    }
    Ok(if s < T::zero() { T::zero() } else { s })
}

/// Conditional state after homodyne-x detection of `meas.modes`:
/// `Sigma_p - Sigma_pq (X Sigma_q X)^MP Sigma_pq^T` over the unmeasured
/// modes, which keep their original relative order.
pub fn condition_on_homodyne<T: Scalar>(
    sigma: &CovMatrix<T>,
    meas: &MeasurementSpec,
) -> Result<CovMatrix<T>> {
    sigma.check_modes(&meas.modes)?;
    if meas.modes.is_empty() {
        return Ok(sigma.clone());
    }
    let measured: Vec<usize> = meas.modes.clone();
    let kept: Vec<usize> = (0..sigma.n_modes())
        .filter(|m| !measured.contains(m))
        .collect();
    if kept.is_empty() {
        return Err(Error::Domain(
            "conditioning would leave no remaining modes".into(),
        ));
    }
    let qi = quad_indices(&measured);
    let pi = quad_indices(&kept);
    let sp = sigma.matrix().select_rows(&pi).select_columns(&pi);
    let sq = sigma.matrix().select_rows(&qi).select_columns(&qi);
    let spq = sigma.matrix().select_rows(&pi).select_columns(&qi);
    // X Sigma_q X with X = ⊕ Diag(1, 0): zero out p rows/columns
    let mut xsx = sq;
    for k in 0..measured.len() {
        for c in 0..xsx.ncols() {
            xsx[(2 * k + 1, c)] = T::zero();
            xsx[(c, 2 * k + 1)] = T::zero();
        }
    }
    let pinv = pseudo_inverse_sym(&xsx);
    let cond = &sp - &spq * pinv * spq.transpose();
    Ok(CovMatrix::from_symmetric_unchecked(cond))
}

/// Lossy/noisy channel on `sent_modes`: diagonal blocks map as
/// `V -> t(V + eps I - I) + I`, sent-kept cross blocks scale by `sqrt(t)`
/// and sent-sent cross blocks by `t`.
pub fn apply_lossy_channel<T: Scalar>(
    sigma: &CovMatrix<T>,
    sent_modes: &[usize],
    ch: &ChannelParams<T>,
) -> Result<CovMatrix<T>> {
    sigma.check_modes(sent_modes)?;
    let dim = 2 * sigma.n_modes();
    let root_t = ch.t.sqrt();
    let mut scale = DVector::from_element(dim, T::one());
    for &m in sent_modes {
        scale[2 * m] = root_t;
        scale[2 * m + 1] = root_t;
    }
    let mut out = sigma.matrix().clone();
    for r in 0..dim {
        for c in 0..dim {
            out[(r, c)] *= scale[r] * scale[c];
        }
    }
    let added = T::one() - ch.t + ch.t * ch.eps;
    for &m in sent_modes {
        out[(2 * m, 2 * m)] += added;
        out[(2 * m + 1, 2 * m + 1)] += added;
    }
    Ok(CovMatrix::from_symmetric_unchecked(out))
}

fn x_det_checked<T: Scalar>(sigma: &CovMatrix<T>, modes: &[usize]) -> Result<T> {
    let det = sigma.x_block(modes).determinant();
    if !(det > T::zero()) || !det.is_finite() {
        return Err(Error::NumericalRank(format!(
            "singular x-quadrature block over modes {modes:?} (det = {})",
            det.to_subset().unwrap_or(f64::NAN)
        )));
    }
    Ok(det)
}

/// Gaussian mutual information between the x-quadrature data of two mode
/// groups: `I = 1/2 log2(det Sx_i det Sx_j / det Sx_ij)`, bits.
pub fn homodyne_mutual_information<T: Scalar>(
    sigma: &CovMatrix<T>,
    group_i: &[usize],
    group_j: &[usize],
) -> Result<T> {
    sigma.check_modes(group_i)?;
    sigma.check_modes(group_j)?;
    if group_i.iter().any(|m| group_j.contains(m)) {
        return Err(Error::Domain("mutual-information groups overlap".into()));
    }
    if group_i.is_empty() || group_j.is_empty() {
        return Err(Error::Domain("mutual-information group is empty".into()));
    }
    let joint: Vec<usize> = group_i.iter().chain(group_j).copied().collect();
    let di = x_det_checked(sigma, group_i)?;
    let dj = x_det_checked(sigma, group_j)?;
    let dij = x_det_checked(sigma, &joint)?;
    Ok(cst::<T>(0.5) * log2(di * dj / dij))
}

/// Differential entropy of the x-quadrature data of a mode group:
/// `H = 1/2 log2((2 pi e)^k det Sx)`, bits, variances in SNU.
pub fn homodyne_differential_entropy<T: Scalar>(
    sigma: &CovMatrix<T>,
    group: &[usize],
) -> Result<T> {
    sigma.check_modes(group)?;
    if group.is_empty() {
        return Err(Error::Domain("differential-entropy group is empty".into()));
    }
    let det = x_det_checked(sigma, group)?;
    let two_pi_e = T::two_pi() * T::e();
    let k = cst::<T>(group.len() as f64);
    Ok(cst::<T>(0.5) * (k * log2(two_pi_e) + log2(det)))
}

/// New indices of `modes` after the modes in `removed` have been dropped
/// from a state. Panics if a requested mode was itself removed.
pub fn remap_after_removal(removed: &[usize], modes: &[usize]) -> Vec<usize> {
    modes
        .iter()
        .map(|&m| {
            assert!(
                !removed.contains(&m),
                "mode {m} was removed and cannot be remapped"
            );
            m - removed.iter().filter(|&&r| r < m).count()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type M = DMatrix<f64>;

    pub(crate) fn tmsv(mu: f64) -> CovMatrix<f64> {
        let c = (mu * mu - 1.0).sqrt();
        let m = M::from_row_slice(
            4,
            4,
            &[
                mu, 0.0, c, 0.0, //
                0.0, mu, 0.0, -c, //
                c, 0.0, mu, 0.0, //
                0.0, -c, 0.0, mu,
            ],
        );
        CovMatrix::new(m).unwrap()
    }

    #[test]
    fn vacuum_spectrum_is_one() {
        let s = CovMatrix::<f64>::vacuum(1);
        let spec = symplectic_spectrum(&s).unwrap();
        assert_eq!(spec.values, vec![1.0]);
    }

    #[test]
    fn thermal_spectrum() {
        let s = CovMatrix::new(M::from_diagonal_element(2, 2, 3.0)).unwrap();
        let spec = symplectic_spectrum(&s).unwrap();
        assert_abs_diff_eq!(spec.values[0], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn tmsv_is_pure_and_det_matches() {
        let s = tmsv(5.0);
        let spec = symplectic_spectrum(&s).unwrap();
        assert!(spec.is_pure(1e-9), "{:?}", spec.values);
        assert_abs_diff_eq!(spec.det(), s.matrix().determinant(), epsilon = 1e-9);
    }

    #[test]
    fn non_physical_rejected() {
        let s = CovMatrix::new(M::from_diagonal_element(2, 2, 0.5)).unwrap();
        assert!(matches!(
            symplectic_spectrum(&s),
            Err(Error::NonPhysical { .. })
        ));
    }

    #[test]
    fn asymmetric_rejected() {
        let mut m = M::identity(2, 2);
        m[(0, 1)] = 1e-6;
        assert!(CovMatrix::new(m).is_err());
    }

    #[test]
    fn entropy_vacuum_zero_thermal_two_bits() {
        assert_abs_diff_eq!(
            von_neumann_entropy(&CovMatrix::<f64>::vacuum(3)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let s = CovMatrix::new(M::from_diagonal_element(2, 2, 3.0)).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&s).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn conditioning_uncorrelated_mode_is_noop() {
        let s = CovMatrix::new(M::from_diagonal(&DVector::from_vec(vec![
            2.0, 2.0, 5.0, 5.0,
        ])))
        .unwrap();
        let c = condition_on_homodyne(&s, &MeasurementSpec::new(vec![1])).unwrap();
        assert_abs_diff_eq!(c.matrix()[(0, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.matrix()[(1, 1)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn conditioning_tmsv_gives_inverse_variance() {
        let s = tmsv(5.0);
        let c = condition_on_homodyne(&s, &MeasurementSpec::new(vec![1])).unwrap();
        assert_abs_diff_eq!(c.matrix()[(0, 0)], 0.2, epsilon = 1e-12);
        // p-variance untouched by an x measurement of the partner
        assert_abs_diff_eq!(c.matrix()[(1, 1)], 5.0, epsilon = 1e-12);
        c.validate_physical().unwrap();
    }

    #[test]
    fn conditioning_all_modes_rejected() {
        let s = tmsv(5.0);
        assert!(condition_on_homodyne(&s, &MeasurementSpec::new(vec![0, 1])).is_err());
    }

    #[test]
    fn channel_identity_and_full_loss() {
        let s = tmsv(5.0);
        let id = apply_lossy_channel(&s, &[1], &ChannelParams::lossless()).unwrap();
        assert!((id.matrix() - s.matrix()).abs().max() <= 1e-12);

        let dead = apply_lossy_channel(&s, &[1], &ChannelParams::new(0.0, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(dead.matrix()[(2, 2)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dead.matrix()[(0, 2)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn channel_diagonal_formula() {
        let s = CovMatrix::new(M::from_diagonal_element(2, 2, 3.0)).unwrap();
        let out = apply_lossy_channel(&s, &[0], &ChannelParams::new(0.5, 0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)], 2.05, epsilon = 1e-12);
    }

    #[test]
    fn channel_cross_term_scaling() {
        // sent<->kept scales by sqrt(t), sent<->sent by t
        let s = tmsv(5.0);
        let c = (25.0f64 - 1.0).sqrt();
        let one = apply_lossy_channel(&s, &[1], &ChannelParams::new(0.36, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(one.matrix()[(0, 2)], 0.6 * c, epsilon = 1e-12);
        let both =
            apply_lossy_channel(&s, &[0, 1], &ChannelParams::new(0.36, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(both.matrix()[(0, 2)], 0.36 * c, epsilon = 1e-12);
    }

    #[test]
    fn mutual_information_tmsv() {
        let s = tmsv(5.0);
        let i = homodyne_mutual_information(&s, &[0], &[1]).unwrap();
        assert_abs_diff_eq!(i, 0.5 * 25.0f64.log2(), epsilon = 1e-9);
        // symmetric in arguments
        let j = homodyne_mutual_information(&s, &[1], &[0]).unwrap();
        assert_abs_diff_eq!(i, j, epsilon = 1e-12);
    }

    #[test]
    fn mutual_information_uncorrelated_zero() {
        let s = CovMatrix::<f64>::vacuum(2);
        assert_abs_diff_eq!(
            homodyne_mutual_information(&s, &[0], &[1]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn differential_entropy_vacuum() {
        let s = CovMatrix::<f64>::vacuum(2);
        let h1 = homodyne_differential_entropy(&s, &[0]).unwrap();
        assert_abs_diff_eq!(
            h1,
            0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).log2(),
            epsilon = 1e-9
        );
        let h2 = homodyne_differential_entropy(&s, &[0, 1]).unwrap();
        assert_abs_diff_eq!(h2, 2.0 * h1, epsilon = 1e-9);
    }

    #[test]
    fn entropy_identity_links_mi_and_differential_entropies() {
        // H(j,k) - H(j,k|i) = I(i : jk) on a correlated physical state
        let s = tmsv(3.0).direct_sum(&CovMatrix::vacuum(1));
        let h = homodyne_differential_entropy(&s, &[1, 2]).unwrap();
        let cond = condition_on_homodyne(&s, &MeasurementSpec::new(vec![0])).unwrap();
        let h_cond = homodyne_differential_entropy(&cond, &[0, 1]).unwrap();
        let i = homodyne_mutual_information(&s, &[0], &[1, 2]).unwrap();
        assert_abs_diff_eq!(h - h_cond, i, epsilon = 1e-9);
    }

    #[test]
    fn remap_indices() {
        assert_eq!(remap_after_removal(&[1], &[0, 2, 4]), vec![0, 1, 3]);
        assert_eq!(remap_after_removal(&[0, 3], &[1, 2, 4]), vec![0, 1, 2]);
    }

    #[test]
    fn single_precision_instantiation() {
        let s = CovMatrix::<f32>::two_mode_squeezed(5.0f32).unwrap();
        let spec = symplectic_spectrum(&s).unwrap();
        assert!(spec.is_pure(1e-3));
        let i = homodyne_mutual_information(&s, &[0], &[1]).unwrap();
        assert!((i - 0.5 * 25.0f32.log2()).abs() < 1e-3);
        let thermal = CovMatrix::<f32>::thermal(3.0);
        assert!((von_neumann_entropy(&thermal).unwrap() - 2.0).abs() < 1e-4);
    }
}
