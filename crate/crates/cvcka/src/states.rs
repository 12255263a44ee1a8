//! Construction of the three multipartite resources: the GHZ-like state,
//! the downstream-access-network (DAN) state, and the six-mode quotient
//! graph state, with support for trusted squeezer impurity and its
//! purification by ancilla modes.
//!
//! Six-mode ordering is `(a1, a2, b1, b2, c1, c2)`; tripartite ordering is
//! `(A, B, C)` with the dealer at mode 0.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::gaussian::CovMatrix;
use crate::scalar::{cst, Scalar};
use crate::williamson::purify;

/// Which multipartite resource to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    GhzLike,
    Dan,
    SixMode,
}

/// A single-mode squeezer: squeezed x-quadrature variance `v` (SNU) and
/// trusted anti-squeezing excess `v_n`, so the anti-squeezed variance is
/// `v_n + 1/v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezerSpec<T: Scalar> {
    pub v: T,
    pub v_n: T,
}

impl<T: Scalar> SqueezerSpec<T> {
    pub fn new(v: T, v_n: T) -> Result<Self> {
        if !(v > T::zero() && v <= T::one()) {
            return Err(Error::Domain(format!(
                "squeezed variance V={} outside (0, 1]",
                v.to_subset().unwrap_or(f64::NAN)
            )));
        }
        if !(v_n >= T::zero()) || !v_n.is_finite() {
            return Err(Error::Domain(format!(
                "anti-squeezing excess V_N={} not finite and non-negative",
                v_n.to_subset().unwrap_or(f64::NAN)
            )));
        }
        Ok(Self { v, v_n })
    }

    /// Anti-squeezed quadrature variance `V_N + 1/V`.
    pub fn anti_variance(&self) -> T {
        self.v_n + T::one() / self.v
    }
}

/// Two pure squeezers whose balanced-beamsplitter mix reproduces an impure
/// squeezer on its first output.
#[derive(Debug, Clone, PartialEq)]
pub struct PurifiedSqueezer<T: Scalar> {
    pub gamma1: T,
    pub gamma2: T,
    /// Two-mode pure state; mode 0 reduces to `Diag[V, V_N + 1/V]`.
    pub cm: CovMatrix<T>,
}

/// The 2x2 diagonal blocks of the six-mode graph state.
#[derive(Debug, Clone, PartialEq)]
pub struct SixModeBlocks<T: Scalar> {
    /// Per-mode variance block.
    pub v_block: Matrix2<T>,
    /// Edge covariance block (x positive, p negative).
    pub c_block: Matrix2<T>,
}

impl<T: Scalar> SixModeBlocks<T> {
    pub fn new(spec: &SqueezerSpec<T>) -> Self {
        let v = spec.v;
        let quarter = cst::<T>(0.25);
        let half = cst::<T>(0.5);
        let vd = (T::one() + v * v + v * spec.v_n) / v * half;
        let c = (T::one() - v * v + v * spec.v_n) / v * quarter;
        Self {
            v_block: Matrix2::new(vd, T::zero(), T::zero(), vd),
            c_block: Matrix2::new(c, T::zero(), T::zero(), -c),
        }
    }
}

/// Upper-triangle sign pattern of the six-mode graph state's C blocks over
/// `(a1, a2, b1, b2, c1, c2)`; absent pairs have a zero block.
pub const SIX_MODE_EDGE_SIGNS: [(usize, usize, i8); 12] = [
    (0, 2, 1),
    (0, 3, -1),
    (0, 4, 1),
    (0, 5, 1),
    (1, 2, 1),
    (1, 3, -1),
    (1, 4, -1),
    (1, 5, -1),
    (2, 4, 1),
    (2, 5, -1),
    (3, 4, 1),
    (3, 5, -1),
];

/// Single impure squeezed mode `Diag[V, V_N + 1/V]`.
pub fn squeezed_mode<T: Scalar>(spec: &SqueezerSpec<T>) -> CovMatrix<T> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = spec.v;
    m[(1, 1)] = spec.anti_variance();
    CovMatrix::from_symmetric_unchecked(m)
}

/// p-squeezed counterpart `Diag[V_N + 1/V, V]`.
fn squeezed_mode_p<T: Scalar>(spec: &SqueezerSpec<T>) -> CovMatrix<T> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = spec.anti_variance();
    m[(1, 1)] = spec.v;
    CovMatrix::from_symmetric_unchecked(m)
}

fn pure_x_squeezer<T: Scalar>(gamma: T) -> CovMatrix<T> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = gamma;
    m[(1, 1)] = T::one() / gamma;
    CovMatrix::from_symmetric_unchecked(m)
}

fn pure_p_squeezer<T: Scalar>(gamma: T) -> CovMatrix<T> {
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = T::one() / gamma;
    m[(1, 1)] = gamma;
    CovMatrix::from_symmetric_unchecked(m)
}

/// Beamsplitter of transmission `t` on modes `(i, j)`: the symplectic
/// `[[sqrt(t) I, sqrt(1-t) I], [-sqrt(1-t) I, sqrt(t) I]]`.
pub fn beamsplitter<T: Scalar>(
    sigma: &CovMatrix<T>,
    i: usize,
    j: usize,
    t: T,
) -> Result<CovMatrix<T>> {
    sigma.check_modes(&[i, j])?;
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::Domain(format!(
            "beamsplitter transmission {} outside [0, 1]",
            t.to_subset().unwrap_or(f64::NAN)
        )));
    }
    let dim = 2 * sigma.n_modes();
    let a = t.sqrt();
    let b = (T::one() - t).sqrt();
    let mut m = DMatrix::identity(dim, dim);
    for k in 0..2 {
        m[(2 * i + k, 2 * i + k)] = a;
        m[(2 * i + k, 2 * j + k)] = b;
        m[(2 * j + k, 2 * i + k)] = -b;
        m[(2 * j + k, 2 * j + k)] = a;
    }
    Ok(sigma.congruence(&m))
}

fn permute_modes<T: Scalar>(sigma: &CovMatrix<T>, order: &[usize]) -> CovMatrix<T> {
    let idx: Vec<usize> = order.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    CovMatrix::from_symmetric_unchecked(sigma.matrix().select_rows(&idx).select_columns(&idx))
}

fn assemble_blocks<T: Scalar>(
    n_modes: usize,
    diag: &Matrix2<T>,
    edges: &[(usize, usize, T)],
    c_block: &Matrix2<T>,
) -> CovMatrix<T> {
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m.view_mut((2 * k, 2 * k), (2, 2)).copy_from(diag);
    }
    for &(i, j, s) in edges {
        let blk = c_block * s;
        m.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&blk);
        m.view_mut((2 * j, 2 * i), (2, 2))
            .copy_from(&blk.transpose());
    }
    CovMatrix::from_symmetric_unchecked(m)
}

/// GHZ-like symmetric three-mode state (closed form).
///
/// Diagonal `Diag[(1+2V^2+V V_N)/(3V), (2+V^2+2V V_N)/(3V)]`, covariances
/// `C_AB = -C_AC = C_BC = Diag[(V^2-1-V V_N)/(3V), (1-V^2+V V_N)/(3V)]`.
/// The beamsplitter circuit reproducing this is exercised in tests.
pub fn build_ghz_like<T: Scalar>(spec: &SqueezerSpec<T>) -> CovMatrix<T> {
    let v = spec.v;
    let vn = spec.v_n;
    let third = T::one() / cst::<T>(3.0);
    let dx = (T::one() + cst::<T>(2.0) * v * v + v * vn) / v * third;
    let dp = (cst::<T>(2.0) + v * v + cst::<T>(2.0) * v * vn) / v * third;
    let cx = (v * v - T::one() - v * vn) / v * third;
    let cp = (T::one() - v * v + v * vn) / v * third;
    let diag = Matrix2::new(dx, T::zero(), T::zero(), dp);
    let c = Matrix2::new(cx, T::zero(), T::zero(), cp);
    let edges = [
        (0usize, 1usize, T::one()),
        (0, 2, -T::one()),
        (1, 2, T::one()),
    ];
    assemble_blocks(3, &diag, &edges, &c)
}

/// Beamsplitter-circuit construction of the GHZ-like state: inputs
/// `(Diag[W,V], Diag[V,W], Diag[V,W])` with `W = V_N + 1/V`, mixed by
/// BS(0,1; 2/3) then BS(2,0; 1/2). Exchanging the squeezer roles cannot
/// work under any passive network: the output x-variances must sum to
/// the input ones, and the closed form needs `2V + W`, not `V + 2W`.
pub fn build_ghz_like_circuit<T: Scalar>(spec: &SqueezerSpec<T>) -> Result<CovMatrix<T>> {
    let s0 = squeezed_mode_p(spec)
        .direct_sum(&squeezed_mode(spec))
        .direct_sum(&squeezed_mode(spec));
    let s1 = beamsplitter(&s0, 0, 1, cst::<T>(2.0) / cst::<T>(3.0))?;
    beamsplitter(&s1, 2, 0, cst::<T>(0.5))
}

/// Downstream-access-network three-mode state (closed form): a two-mode
/// squeezed vacuum split with a vacuum mode; dealer holds mode A.
pub fn build_dan<T: Scalar>(spec: &SqueezerSpec<T>) -> CovMatrix<T> {
    let v = spec.v;
    let vn = spec.v_n;
    let quarter = cst::<T>(0.25);
    let half = cst::<T>(0.5);
    let va = (T::one() + v * v + v * vn) / v * half;
    let one_plus = T::one() + v;
    let vb = (one_plus * one_plus + v * vn) / v * quarter;
    let root8 = cst::<T>(8.0).sqrt();
    let cab_x = (v * v - T::one() - v * vn) / (root8 * v) * cst::<T>(2.0);
    // (V^2-1-V V_N)/(2 sqrt(2) V): sqrt(8) = 2 sqrt(2)
    let cab_x = cab_x * half;
    let vm1 = v - T::one();
    let cbc = -(vm1 * vm1 + v * vn) / v * quarter;

    let mut m = DMatrix::zeros(6, 6);
    m[(0, 0)] = va;
    m[(1, 1)] = va;
    for k in (2..6).step_by(2) {
        m[(k, k)] = vb;
        m[(k + 1, k + 1)] = vb;
    }
    let cab = Matrix2::new(cab_x, T::zero(), T::zero(), -cab_x);
    let cbc_b = Matrix2::new(cbc, T::zero(), T::zero(), cbc);
    m.view_mut((0, 2), (2, 2)).copy_from(&cab);
    m.view_mut((2, 0), (2, 2)).copy_from(&cab.transpose());
    let neg = -cab;
    m.view_mut((0, 4), (2, 2)).copy_from(&neg);
    m.view_mut((4, 0), (2, 2)).copy_from(&neg.transpose());
    m.view_mut((2, 4), (2, 2)).copy_from(&cbc_b);
    m.view_mut((4, 2), (2, 2)).copy_from(&cbc_b.transpose());
    CovMatrix::from_symmetric_unchecked(m)
}

/// Beamsplitter-circuit construction of the DAN state: inputs
/// `(Diag[V,W], Diag[W,V], vacuum)`, BS(1,0; 1/2), BS(0,2; 1/2), output
/// labels `(A,B,C) = (mode1, mode0, mode2)`.
pub fn build_dan_circuit<T: Scalar>(spec: &SqueezerSpec<T>) -> Result<CovMatrix<T>> {
    let s0 = squeezed_mode(spec)
        .direct_sum(&squeezed_mode_p(spec))
        .direct_sum(&CovMatrix::vacuum(1));
    let s1 = beamsplitter(&s0, 1, 0, cst::<T>(0.5))?;
    let s2 = beamsplitter(&s1, 0, 2, cst::<T>(0.5))?;
    Ok(permute_modes(&s2, &[1, 0, 2]))
}

/// Six-mode quotient graph state (closed form of the infinite-lattice
/// limit), mode order `(a1, a2, b1, b2, c1, c2)`.
pub fn build_six_mode<T: Scalar>(spec: &SqueezerSpec<T>) -> CovMatrix<T> {
    let blocks = SixModeBlocks::new(spec);
    let edges: Vec<(usize, usize, T)> = SIX_MODE_EDGE_SIGNS
        .iter()
        .map(|&(i, j, s)| (i, j, cst::<T>(s as f64)))
        .collect();
    assemble_blocks(6, &blocks.v_block, &edges, &blocks.c_block)
}

/// Splits an impure squeezer into two pure ones meeting the moment
/// constraints `(G1+G2)/2 = V` and `(1/G1+1/G2)/2 = V_N + 1/V`, i.e.
/// `G_{1,2} = V (1 -/+ sqrt(V V_N / (V V_N + 1)))`, and returns the
/// balanced-beamsplitter two-mode purification.
pub fn purify_squeezer<T: Scalar>(spec: &SqueezerSpec<T>) -> Result<PurifiedSqueezer<T>> {
    if spec.v_n < T::zero() {
        return Err(Error::Domain("V_N must be non-negative".into()));
    }
    let vvn = spec.v * spec.v_n;
    let r = (vvn / (vvn + T::one())).sqrt();
    let gamma1 = spec.v * (T::one() - r);
    let gamma2 = spec.v * (T::one() + r);
    let s0 = pure_x_squeezer(gamma1).direct_sum(&pure_x_squeezer(gamma2));
    let cm = beamsplitter(&s0, 0, 1, cst::<T>(0.5))?;
    Ok(PurifiedSqueezer { gamma1, gamma2, cm })
}

/// p-squeezed variant: mode 0 reduces to `Diag[V_N + 1/V, V]`.
fn purify_squeezer_p<T: Scalar>(spec: &SqueezerSpec<T>) -> Result<PurifiedSqueezer<T>> {
    let p = purify_squeezer(spec)?;
    let s0 = pure_p_squeezer(p.gamma1).direct_sum(&pure_p_squeezer(p.gamma2));
    let cm = beamsplitter(&s0, 0, 1, cst::<T>(0.5))?;
    Ok(PurifiedSqueezer { cm, ..p })
}

/// Labels the layout of an ancilla-extended state: system modes first,
/// ancillas appended after.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeMap {
    pub n_system: usize,
    pub n_ancillas: usize,
}

impl ModeMap {
    pub fn system_modes(&self) -> Vec<usize> {
        (0..self.n_system).collect()
    }

    pub fn ancilla_modes(&self) -> Vec<usize> {
        (self.n_system..self.n_system + self.n_ancillas).collect()
    }
}

/// Rebuilds the requested state from purified squeezers so that the full
/// state is pure, tracing out the ancillas reproduces the impure builder,
/// and the impurity is trusted (held by the source, not the eavesdropper).
///
/// GHZ-like and DAN states are rebuilt from their beamsplitter circuits
/// with each squeezer replaced by its two-mode purification; the
/// six-mode state is purified through its Williamson normal form (one
/// thermal ancilla per mode). Any two Gaussian
/// purifications differ only by a symplectic on the ancillas, which no
/// entropy or conditioning result here can distinguish.
pub fn extend_with_trusted_ancillas<T: Scalar>(
    kind: StateKind,
    spec: &SqueezerSpec<T>,
) -> Result<(CovMatrix<T>, ModeMap)> {
    match kind {
        StateKind::GhzLike => {
            // pairs (s_i, anc_i) at modes (0,1), (2,3), (4,5); circuit on s modes
            let s0 = purify_squeezer_p(spec)?
                .cm
                .direct_sum(&purify_squeezer(spec)?.cm)
                .direct_sum(&purify_squeezer(spec)?.cm);
            let s1 = beamsplitter(&s0, 0, 2, cst::<T>(2.0) / cst::<T>(3.0))?;
            let s2 = beamsplitter(&s1, 4, 0, cst::<T>(0.5))?;
            let cm = permute_modes(&s2, &[0, 2, 4, 1, 3, 5]);
            Ok((
                cm,
                ModeMap {
                    n_system: 3,
                    n_ancillas: 3,
                },
            ))
        }
        StateKind::Dan => {
            // pairs (s1, anc1), (s2, anc2), vacuum at modes 0..4
            let s0 = purify_squeezer(spec)?
                .cm
                .direct_sum(&purify_squeezer_p(spec)?.cm)
                .direct_sum(&CovMatrix::vacuum(1));
            let s1 = beamsplitter(&s0, 2, 0, cst::<T>(0.5))?;
            let s2 = beamsplitter(&s1, 0, 4, cst::<T>(0.5))?;
            let cm = permute_modes(&s2, &[2, 0, 4, 1, 3]);
            Ok((
                cm,
                ModeMap {
                    n_system: 3,
                    n_ancillas: 2,
                },
            ))
        }
        StateKind::SixMode => {
            let cm = purify(&build_six_mode(spec))?;
            Ok((
                cm,
                ModeMap {
                    n_system: 6,
                    n_ancillas: 6,
                },
            ))
        }
    }
}

/// Impure builder dispatch.
pub fn build_state<T: Scalar>(kind: StateKind, spec: &SqueezerSpec<T>) -> CovMatrix<T> {
    match kind {
        StateKind::GhzLike => build_ghz_like(spec),
        StateKind::Dan => build_dan(spec),
        StateKind::SixMode => build_six_mode(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::symplectic_spectrum;
    use approx::assert_abs_diff_eq;

    fn spec(v: f64, v_n: f64) -> SqueezerSpec<f64> {
        SqueezerSpec::new(v, v_n).unwrap()
    }

    fn max_diff(a: &CovMatrix<f64>, b: &CovMatrix<f64>) -> f64 {
        (a.matrix() - b.matrix()).abs().max()
    }

    #[test]
    fn squeezed_mode_values() {
        let m = squeezed_mode(&spec(1.0, 0.0));
        assert!(max_diff(&m, &CovMatrix::vacuum(1)) < 1e-15);
        let m = squeezed_mode(&spec(0.1, 0.0));
        assert_abs_diff_eq!(m.matrix()[(1, 1)], 10.0, epsilon = 1e-12);
        let m = squeezed_mode(&spec(0.1, 10.0));
        assert_abs_diff_eq!(m.matrix()[(1, 1)], 20.0, epsilon = 1e-12);
    }

    #[test]
    fn beamsplitter_limits() {
        let s = squeezed_mode(&spec(0.2, 0.0)).direct_sum(&CovMatrix::vacuum(1));
        let id = beamsplitter(&s, 0, 1, 1.0).unwrap();
        assert!(max_diff(&id, &s) < 1e-15);
        let sw = beamsplitter(&s, 0, 1, 0.0).unwrap();
        assert_abs_diff_eq!(sw.matrix()[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sw.matrix()[(2, 2)], 0.2, epsilon = 1e-15);
    }

    #[test]
    fn balanced_beamsplitter_makes_tmsv() {
        let v: f64 = 0.2;
        let s0 = pure_x_squeezer(v).direct_sum(&pure_p_squeezer(v));
        let out = beamsplitter(&s0, 0, 1, 0.5).unwrap();
        let mu = (v + 1.0 / v) / 2.0;
        let c = (mu * mu - 1.0).sqrt();
        assert_abs_diff_eq!(out.matrix()[(0, 0)], mu, epsilon = 1e-12);
        assert_abs_diff_eq!(out.matrix()[(0, 2)].abs(), c, epsilon = 1e-12);
        assert_abs_diff_eq!(out.matrix()[(1, 3)].abs(), c, epsilon = 1e-12);
    }

    #[test]
    fn ghz_closed_form_values() {
        let g = build_ghz_like(&spec(1.0, 0.0));
        assert!(max_diff(&g, &CovMatrix::vacuum(3)) < 1e-12);
        let g = build_ghz_like(&spec(0.1, 0.0));
        assert_abs_diff_eq!(g.matrix()[(0, 0)], 3.4, epsilon = 1e-12);
    }

    #[test]
    fn ghz_circuit_matches_closed_form() {
        for (v, vn) in [(0.1, 0.0), (0.1, 10.0), (0.34, 2.7), (0.9, 0.3)] {
            let s = spec(v, vn);
            let d = max_diff(&build_ghz_like_circuit(&s).unwrap(), &build_ghz_like(&s));
            assert!(d < 1e-12, "V={v} VN={vn}: {d:e}");
        }
    }

    #[test]
    fn dan_closed_form_values() {
        let d = build_dan(&spec(1.0, 0.0));
        assert!(max_diff(&d, &CovMatrix::vacuum(3)) < 1e-12);
        let d = build_dan(&spec(0.1, 0.0));
        assert_abs_diff_eq!(d.matrix()[(0, 0)], 5.05, epsilon = 1e-12);
        assert_abs_diff_eq!(d.matrix()[(2, 4)], -2.025, epsilon = 1e-12);
    }

    #[test]
    fn dan_circuit_matches_closed_form() {
        for (v, vn) in [(0.1, 0.0), (0.1, 10.0), (0.55, 4.2), (1.0, 1.0)] {
            let s = spec(v, vn);
            let d = max_diff(&build_dan_circuit(&s).unwrap(), &build_dan(&s));
            assert!(d < 1e-12, "V={v} VN={vn}: {d:e}");
        }
    }

    #[test]
    fn six_mode_values_and_purity() {
        let s = build_six_mode(&spec(1.0, 0.0));
        assert!(max_diff(&s, &CovMatrix::vacuum(6)) < 1e-12);
        let s = build_six_mode(&spec(0.1, 0.0));
        assert_abs_diff_eq!(s.matrix()[(0, 0)], 5.05, epsilon = 1e-12);
        assert_abs_diff_eq!(s.matrix()[(0, 4)], 2.475, epsilon = 1e-12);
        for v in [0.05, 0.1, 0.5] {
            let spect = symplectic_spectrum(&build_six_mode(&spec(v, 0.0))).unwrap();
            assert!(spect.is_pure(1e-9), "V={v}: {:?}", spect.values);
        }
    }

    #[test]
    fn six_mode_d5_pair_has_zero_block() {
        let s = build_six_mode(&spec(0.1, 3.0));
        assert!(s.block(2, 3).abs().max() < 1e-15);
    }

    #[test]
    fn purify_squeezer_constraints() {
        let p = purify_squeezer(&spec(0.1, 0.0)).unwrap();
        assert_abs_diff_eq!(p.gamma1, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(p.gamma2, 0.1, epsilon = 1e-15);
        assert!(p.cm.block(0, 1).abs().max() < 1e-12);

        let p = purify_squeezer(&spec(0.1, 10.0)).unwrap();
        assert_abs_diff_eq!((p.gamma1 + p.gamma2) / 2.0, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(
            (1.0 / p.gamma1 + 1.0 / p.gamma2) / 2.0,
            20.0,
            epsilon = 1e-9
        );
        let red = p.cm.reduced(&[0]).unwrap();
        assert_abs_diff_eq!(red.matrix()[(0, 0)], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(red.matrix()[(1, 1)], 20.0, epsilon = 1e-12);
        assert!(symplectic_spectrum(&p.cm).unwrap().is_pure(1e-9));
    }

    #[test]
    fn extended_states_are_pure_and_reduce() {
        for kind in [StateKind::GhzLike, StateKind::Dan, StateKind::SixMode] {
            for vn in [0.0, 10.0] {
                let s = spec(0.1, vn);
                let (cm, map) = extend_with_trusted_ancillas(kind, &s).unwrap();
                assert_eq!(cm.n_modes(), map.n_system + map.n_ancillas);
                let spect = symplectic_spectrum(&cm).unwrap();
                assert!(
                    spect.is_pure(1e-8),
                    "{kind:?} VN={vn}: {:?}",
                    spect.values
                );
                let red = cm.reduced(&map.system_modes()).unwrap();
                let direct = build_state(kind, &s);
                assert!(
                    max_diff(&red, &direct) < 1e-9,
                    "{kind:?} VN={vn}: {:e}",
                    max_diff(&red, &direct)
                );
            }
        }
    }

    #[test]
    fn extended_ancillas_uncorrelated_when_pure() {
        let (cm, map) = extend_with_trusted_ancillas(StateKind::GhzLike, &spec(0.1, 0.0)).unwrap();
        for a in map.ancilla_modes() {
            for s in map.system_modes() {
                assert!(cm.block(s, a).abs().max() < 1e-12);
            }
        }
    }

    #[test]
    fn ghz_symmetry_under_user_swap_with_sign_flip() {
        // swap B<->C, then flip mode A's quadrature signs: CM invariant
        let g = build_ghz_like(&spec(0.17, 3.0));
        let swapped = permute_modes(&g, &[0, 2, 1]);
        let mut flip = DMatrix::identity(6, 6);
        flip[(0, 0)] = -1.0;
        flip[(1, 1)] = -1.0;
        let back = swapped.congruence(&flip);
        assert!(max_diff(&back, &g) < 1e-12);
    }
}
