//! Finite dual-rail cluster lattices and their quotient down to the
//! six-mode graph state.
//!
//! The lattice has `n` unit cells of six vertices `(a1, a2, b1, b2, c1,
//! c2)` (cell-major ordering). Vertex identification by cell position
//! (six color classes) turns the `12n x 12n` covariance matrix into the
//! `12 x 12` six-mode matrix via the congruence `(1/n) A Sigma A^T`; the
//! boundary leaves the a-c blocks scaled by `(n-1)/n`.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gaussian::{symplectic_spectrum, CovMatrix, SymplecticSpectrum};
use crate::scalar::{cst, Scalar};
use crate::states::{SixModeBlocks, SqueezerSpec, SIX_MODE_EDGE_SIGNS};

/// Finite dual-rail lattice of `n_cells` unit cells.
#[derive(Debug, Clone)]
pub struct DualRailLattice<T: Scalar> {
    pub n_cells: usize,
    pub spec: SqueezerSpec<T>,
    pub cm: CovMatrix<T>,
}

/// Which selector a 0/1 matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorKind {
    /// 12 x 12n quadrature selector (modulus 12).
    Covariance,
    /// 6 x 6n vertex selector (modulus 6).
    Adjacency,
}

/// 0/1 class-membership matrix: one 1 per column, `n` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorMatrix<T: Scalar> {
    pub kind: SelectorKind,
    pub data: DMatrix<T>,
}

/// Partition of the lattice vertices into color classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorPartition {
    pub classes: Vec<Vec<usize>>,
}

impl ColorPartition {
    /// Builds a partition from explicit classes, checking that they are
    /// disjoint and cover `0..n_vertices`.
    pub fn from_classes(classes: Vec<Vec<usize>>, n_vertices: usize) -> Result<Self> {
        let mut seen = vec![false; n_vertices];
        for class in &classes {
            for &v in class {
                if v >= n_vertices {
                    return Err(Error::ModeOutOfRange {
                        index: v,
                        n_modes: n_vertices,
                    });
                }
                if seen[v] {
                    return Err(Error::Domain(format!("vertex {v} in two classes")));
                }
                seen[v] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Domain("partition does not cover all vertices".into()));
        }
        Ok(Self { classes })
    }

    /// Color index of a vertex.
    pub fn color_of(&self, v: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&v))
    }
}

/// Signed vertex edges of the `n`-cell dual-rail lattice, cell-major
/// vertex order `(a1, a2, b1, b2, c1, c2)` per cell. Intra-cell edges tie
/// the a and c pairs to the b pair; inter-cell edges tie cell `m`'s c pair
/// to cell `m+1`'s a pair. This is the unique signed tiling whose quotient
/// reproduces the six-mode matrix row for row.
pub fn dual_rail_edges(n_cells: usize) -> Vec<(usize, usize, i8)> {
    let mut edges = Vec::with_capacity(12 * n_cells);
    for m in 0..n_cells {
        let b = 6 * m;
        edges.extend_from_slice(&[
            (b, b + 2, 1i8),
            (b, b + 3, -1),
            (b + 1, b + 2, 1),
            (b + 1, b + 3, -1),
            (b + 2, b + 4, 1),
            (b + 2, b + 5, -1),
            (b + 3, b + 4, 1),
            (b + 3, b + 5, -1),
        ]);
        if m + 1 < n_cells {
            let nb = 6 * (m + 1);
            edges.extend_from_slice(&[
                (b + 4, nb, 1),
                (b + 4, nb + 1, -1),
                (b + 5, nb, 1),
                (b + 5, nb + 1, -1),
            ]);
        }
    }
    edges
}

/// Builds the finite dual-rail lattice covariance matrix by tiling the
/// six-mode V and signed C blocks along the edge table.
pub fn build_dual_rail<T: Scalar>(
    n_cells: usize,
    spec: &SqueezerSpec<T>,
) -> Result<DualRailLattice<T>> {
    if n_cells == 0 {
        return Err(Error::Domain("lattice needs at least one cell".into()));
    }
    let blocks = SixModeBlocks::new(spec);
    let nv = 6 * n_cells;
    let mut m = DMatrix::zeros(2 * nv, 2 * nv);
    for v in 0..nv {
        m.view_mut((2 * v, 2 * v), (2, 2)).copy_from(&blocks.v_block);
    }
    for (i, j, s) in dual_rail_edges(n_cells) {
        let blk = blocks.c_block * cst::<T>(s as f64);
        m.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&blk);
        m.view_mut((2 * j, 2 * i), (2, 2))
            .copy_from(&blk.transpose());
    }
    let cm = CovMatrix::from_symmetric_unchecked(m);
    Ok(DualRailLattice {
        n_cells,
        spec: *spec,
        cm,
    })
}

/// 12 x 12n covariance selector: `A_ij = 1` iff `j = i (mod 12)`,
/// 0-based — one row per quadrature of the quotient state.
pub fn selector_covariance<T: Scalar>(n_cells: usize) -> SelectorMatrix<T> {
    let data = DMatrix::from_fn(12, 12 * n_cells, |i, j| {
        if j % 12 == i {
            T::one()
        } else {
            T::zero()
        }
    });
    SelectorMatrix {
        kind: SelectorKind::Covariance,
        data,
    }
}

/// 6 x 6n adjacency selector: `B_ij = 1` iff `j = i (mod 6)`, 0-based.
pub fn selector_adjacency<T: Scalar>(n_cells: usize) -> SelectorMatrix<T> {
    let data = DMatrix::from_fn(6, 6 * n_cells, |i, j| {
        if j % 6 == i {
            T::one()
        } else {
            T::zero()
        }
    });
    SelectorMatrix {
        kind: SelectorKind::Adjacency,
        data,
    }
}

/// Quotient covariance `(1/n) A Sigma A^T`, computed by class-pair
/// accumulation (equivalent to the selector product, without forming it).
pub fn quotient_covariance<T: Scalar>(lattice: &DualRailLattice<T>) -> CovMatrix<T> {
    let n = lattice.n_cells;
    let big = lattice.cm.matrix();
    let total = 12 * n;
    debug_assert_eq!(big.nrows(), total);
    let mut out = DMatrix::zeros(12, 12);
    for r in 0..total {
        let rr = r % 12;
        for c in 0..total {
            out[(rr, c % 12)] += big[(r, c)];
        }
    }
    let inv_n = T::one() / cst::<T>(n as f64);
    CovMatrix::from_symmetric_unchecked(out * inv_n)
}

/// Quotient of a complex-weighted vertex adjacency matrix:
/// `(1/n) B Z B^T` with the modulus-6 selector.
pub fn quotient_adjacency<T: Scalar>(
    z: &DMatrix<Complex<T>>,
    n_cells: usize,
) -> Result<DMatrix<Complex<T>>> {
    let total = 6 * n_cells;
    if z.nrows() != total || z.ncols() != total {
        return Err(Error::Domain(format!(
            "adjacency is {}x{}, expected {total}x{total}",
            z.nrows(),
            z.ncols()
        )));
    }
    let sym_tol = cst::<T>(1e-12);
    for i in 0..total {
        for j in (i + 1)..total {
            let d = z[(i, j)] - z[(j, i)];
            if d.re.abs() > sym_tol || d.im.abs() > sym_tol {
                return Err(Error::Domain(format!("adjacency asymmetric at ({i},{j})")));
            }
        }
    }
    let mut out = DMatrix::zeros(6, 6);
    for r in 0..total {
        for c in 0..total {
            out[(r % 6, c % 6)] += z[(r, c)];
        }
    }
    let inv_n = Complex::new(T::one() / cst::<T>(n_cells as f64), T::zero());
    Ok(out * inv_n)
}

/// The canonical six color classes: class `j` holds the vertices at cell
/// position `j` across all cells.
pub fn color_classes(n_cells: usize) -> ColorPartition {
    let classes = (0..6)
        .map(|j| (0..n_cells).map(|m| 6 * m + j).collect())
        .collect();
    ColorPartition { classes }
}

/// Neighbourhood preservation: for every vertex whose closed
/// neighbourhood is full (interior, degree 4), its color must differ from
/// all neighbours' and no two neighbours may share a color, so each
/// incident edge maps to a distinct quotient edge.
pub fn neighbourhood_preservation_check<T: Scalar>(
    lattice: &DualRailLattice<T>,
    partition: &ColorPartition,
) -> bool {
    let nv = 6 * lattice.n_cells;
    let mut adj = vec![Vec::new(); nv];
    for (i, j, _) in dual_rail_edges(lattice.n_cells) {
        adj[i].push(j);
        adj[j].push(i);
    }
    let color: Vec<Option<usize>> = (0..nv).map(|v| partition.color_of(v)).collect();
    for v in 0..nv {
        if adj[v].len() != 4 {
            continue;
        }
        let Some(cv) = color[v] else { return false };
        let mut seen = vec![cv];
        for &u in &adj[v] {
            let Some(cu) = color[u] else { return false };
            if seen.contains(&cu) {
                return false;
            }
            seen.push(cu);
        }
    }
    true
}

/// Purity diagnostics of the quotient state.
#[derive(Debug, Clone)]
pub struct QuotientPurityReport<T: Scalar> {
    pub det: T,
    pub spectrum: SymplecticSpectrum<T>,
}

/// Determinant and symplectic spectrum of the quotient covariance; both
/// approach the pure-state values (1 everywhere) as `n` grows, from above.
pub fn quotient_purity_report<T: Scalar>(
    lattice: &DualRailLattice<T>,
) -> Result<QuotientPurityReport<T>> {
    let q = quotient_covariance(lattice);
    let spectrum = symplectic_spectrum(&q)?;
    Ok(QuotientPurityReport {
        det: q.matrix().determinant(),
        spectrum,
    })
}

/// Closed form the quotient must equal: the six-mode matrix with the
/// a-c blocks scaled by `(n-1)/n`.
pub fn six_mode_with_boundary_factor<T: Scalar>(
    spec: &SqueezerSpec<T>,
    n_cells: usize,
) -> CovMatrix<T> {
    let blocks = SixModeBlocks::new(spec);
    let factor = cst::<T>((n_cells as f64 - 1.0) / n_cells as f64);
    let mut m = DMatrix::zeros(12, 12);
    for v in 0..6 {
        m.view_mut((2 * v, 2 * v), (2, 2)).copy_from(&blocks.v_block);
    }
    for &(i, j, s) in &SIX_MODE_EDGE_SIGNS {
        let ac = i < 2 && j >= 4;
        let mut blk = blocks.c_block * cst::<T>(s as f64);
        if ac {
            blk *= factor;
        }
        m.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&blk);
        m.view_mut((2 * j, 2 * i), (2, 2))
            .copy_from(&blk.transpose());
    }
    CovMatrix::from_symmetric_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(v: f64, v_n: f64) -> SqueezerSpec<f64> {
        SqueezerSpec::new(v, v_n).unwrap()
    }

    #[test]
    fn lattice_degrees() {
        let edges = dual_rail_edges(3);
        let mut deg = [0usize; 18];
        for (i, j, _) in edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        // boundary a modes of cell 1 and c modes of cell 3 have degree 2
        assert_eq!(deg[0], 2);
        assert_eq!(deg[1], 2);
        assert_eq!(deg[16], 2);
        assert_eq!(deg[17], 2);
        // interior modes have degree 4
        assert_eq!(deg[6], 4);
        assert_eq!(deg[2], 4);
    }

    #[test]
    fn lattice_n1_is_six_mode_without_ac() {
        let lat = build_dual_rail(1, &spec(0.1, 0.0)).unwrap();
        let tgt = six_mode_with_boundary_factor(&spec(0.1, 0.0), 1);
        assert!((lat.cm.matrix() - tgt.matrix()).abs().max() < 1e-15);
        // a-c blocks are exactly zero
        assert!(lat.cm.block(0, 4).abs().max() == 0.0);
    }

    #[test]
    fn lattice_n2_intercell_edges() {
        let lat = build_dual_rail(2, &spec(0.1, 0.0)).unwrap();
        // a1 of cell 2 (vertex 6) correlates with c1, c2 of cell 1 at +-Cxx
        assert_abs_diff_eq!(lat.cm.matrix()[(2 * 6, 2 * 4)], 2.475, epsilon = 1e-12);
        assert_abs_diff_eq!(lat.cm.matrix()[(2 * 6, 2 * 5)], 2.475, epsilon = 1e-12);
        assert_abs_diff_eq!(lat.cm.matrix()[(2 * 7, 2 * 4)], -2.475, epsilon = 1e-12);
    }

    #[test]
    fn lattice_physical() {
        for vn in [0.0, 10.0] {
            let lat = build_dual_rail(50, &spec(0.1, vn)).unwrap();
            lat.cm.validate_physical().unwrap();
        }
    }

    #[test]
    fn selector_structure_and_algebra() {
        let a = selector_covariance::<f64>(7);
        assert_eq!(a.data.nrows(), 12);
        assert_eq!(a.data.ncols(), 84);
        for c in 0..84 {
            assert_abs_diff_eq!(a.data.column(c).sum(), 1.0);
        }
        for r in 0..12 {
            assert_abs_diff_eq!(a.data.row(r).sum(), 7.0);
        }
        let aat = &a.data * a.data.transpose();
        assert!((aat - DMatrix::from_diagonal_element(12, 12, 7.0)).abs().max() < 1e-12);

        let b = selector_adjacency::<f64>(4);
        let bbt = &b.data * b.data.transpose();
        assert!((bbt - DMatrix::from_diagonal_element(6, 6, 4.0)).abs().max() < 1e-12);
    }

    #[test]
    fn quotient_equals_selector_product_and_closed_form() {
        for n in [1usize, 3, 10] {
            let s = spec(0.1, 0.0);
            let lat = build_dual_rail(n, &s).unwrap();
            let q = quotient_covariance(&lat);
            let a = selector_covariance::<f64>(n);
            let via_selector = (&a.data * lat.cm.matrix() * a.data.transpose()) / n as f64;
            assert!((q.matrix() - via_selector).abs().max() < 1e-12);
            let tgt = six_mode_with_boundary_factor(&s, n);
            assert!((q.matrix() - tgt.matrix()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn quotient_n50_ac_entry() {
        let lat = build_dual_rail(50, &spec(0.1, 0.0)).unwrap();
        let q = quotient_covariance(&lat);
        assert_abs_diff_eq!(q.matrix()[(0, 8)], 0.98 * 2.475, epsilon = 1e-12);
        assert_abs_diff_eq!(q.matrix()[(0, 8)], 2.4255, epsilon = 1e-12);
    }

    #[test]
    fn quotient_adjacency_basics() {
        let n = 3;
        let ones = DMatrix::from_element(18, 18, Complex::new(1.0f64, 0.0));
        let q = quotient_adjacency(&ones, n).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_abs_diff_eq!(q[(i, j)].re, 3.0, epsilon = 1e-12);
            }
        }
        // n = 1: Z itself
        let z1 = DMatrix::from_fn(6, 6, |i, j| Complex::new((i * j) as f64, 0.0));
        let z1s = (&z1 + z1.transpose()) * Complex::new(0.5, 0.0);
        let q1 = quotient_adjacency(&z1s, 1).unwrap();
        assert!((q1 - z1s).map(|c| c.re.abs()).max() < 1e-12);
    }

    #[test]
    fn signed_adjacency_quotients_to_six_vertex_pattern() {
        let n = 5;
        let mut z = DMatrix::zeros(6 * n, 6 * n);
        for (i, j, s) in dual_rail_edges(n) {
            z[(i, j)] = Complex::new(s as f64, 0.0);
            z[(j, i)] = Complex::new(s as f64, 0.0);
        }
        let q = quotient_adjacency(&z, n).unwrap();
        let f = (n as f64 - 1.0) / n as f64;
        for i in 0..6 {
            for j in 0..6 {
                let expected = SIX_MODE_EDGE_SIGNS
                    .iter()
                    .find(|&&(a, b, _)| (a, b) == (i.min(j), i.max(j)))
                    .map(|&(a, b, s)| {
                        let ac = a < 2 && b >= 4;
                        s as f64 * if ac { f } else { 1.0 }
                    })
                    .unwrap_or(0.0);
                if i == j {
                    continue;
                }
                assert_abs_diff_eq!(q[(i, j)].re, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn color_classes_structure() {
        let p = color_classes(1);
        assert_eq!(p.classes.len(), 6);
        assert!(p.classes.iter().all(|c| c.len() == 1));
        let p = color_classes(4);
        assert!(p.classes.iter().all(|c| c.len() == 4));
        // agrees with the covariance selector rows (vertex v <-> rows 2v, 2v+1)
        let a = selector_covariance::<f64>(9);
        let p9 = color_classes(9);
        for (j, class) in p9.classes.iter().enumerate() {
            for &v in class {
                assert_eq!(a.data[(2 * j, 2 * v)], 1.0);
                assert_eq!(a.data[(2 * j + 1, 2 * v + 1)], 1.0);
            }
        }
    }

    #[test]
    fn neighbourhood_preservation() {
        let lat = build_dual_rail(2, &spec(0.1, 0.0)).unwrap();
        assert!(neighbourhood_preservation_check(&lat, &color_classes(2)));
        // merging a-classes with c-classes breaks it
        let merged = ColorPartition::from_classes(
            vec![
                vec![0, 4, 6, 10],
                vec![1, 5, 7, 11],
                vec![2, 8],
                vec![3, 9],
            ],
            12,
        )
        .unwrap();
        assert!(!neighbourhood_preservation_check(&lat, &merged));
    }

    #[test]
    fn quotient_purity_trend() {
        // n = 1 carries the full boundary deficit: two symplectic
        // eigenvalues sit at the diagonal variance, the rest at 1
        let r1 = quotient_purity_report(&build_dual_rail(1, &spec(0.1, 0.0)).unwrap()).unwrap();
        assert_abs_diff_eq!(r1.spectrum.values[0], 5.05, epsilon = 1e-9);
        assert_abs_diff_eq!(r1.spectrum.values[1], 5.05, epsilon = 1e-9);
        assert_abs_diff_eq!(r1.spectrum.values[5], 1.0, epsilon = 1e-9);

        let r10 = quotient_purity_report(&build_dual_rail(10, &spec(0.1, 0.0)).unwrap()).unwrap();
        let r100 = quotient_purity_report(&build_dual_rail(100, &spec(0.1, 0.0)).unwrap()).unwrap();
        assert!(r10.spectrum.values[0] > 1.0);
        assert!(r100.spectrum.values[0] < r10.spectrum.values[0]);
        assert!(r100.det < r10.det);
        assert!(r100.det > 1.0);
        // frozen oracle values at V = 0.1
        assert_abs_diff_eq!(r10.spectrum.values[0], 2.378124, epsilon = 1e-5);
        assert_abs_diff_eq!(r100.det, 2.212953, epsilon = 1e-5);

        // n = 1000 through the (verified-identical) closed form: the
        // boundary impurity decays slowly, det only reaches ~1.10
        let q1000 = six_mode_with_boundary_factor(&spec(0.1, 0.0), 1000);
        let det1000 = symplectic_spectrum(&q1000).unwrap().det();
        assert!(det1000 < r100.det);
        assert_abs_diff_eq!(det1000, 1.100360, epsilon = 1e-5);
    }
}
