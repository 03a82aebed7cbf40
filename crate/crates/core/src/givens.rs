//! Angle parameterization of unitary matrices with a real nonnegative last
//! row.
//!
//! An `n_t x k` matrix of this form factors into diagonal phase matrices
//! and planar rotations, one group per column: phases `phi_{l,i}` on rows
//! `i..n_t-1` followed by rotations `G_{l,i}^T(psi_{l,i})` for
//! `l = i+1..n_t` (indices 1-based as in the usual notation). The angles
//! are a minimal description; [`gr_decompose`] extracts them and
//! [`gr_reconstruct`] rebuilds the matrix, exactly inverting each other up
//! to floating-point rounding.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::cxmat::{ComplexMatrix, MAX_DIM};
use crate::{Error, Result};

/// Shape of the parameterized matrix: `n_t` rows, `k` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GrDims {
    n_t: usize,
    k: usize,
}

impl GrDims {
    pub fn new(n_t: usize, k: usize) -> Result<Self> {
        if n_t == 0 || n_t > MAX_DIM {
            return Err(Error::Config(format!(
                "n_t must be 1..={MAX_DIM}, got {n_t}"
            )));
        }
        if k == 0 || k > n_t {
            return Err(Error::Config(format!("k must be 1..={n_t}, got {k}")));
        }
        Ok(Self { n_t, k })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of parameterized columns, `min(n_t - 1, k)`.
    pub fn column_count(&self) -> usize {
        (self.n_t - 1).min(self.k)
    }

    /// Phase angles in column `i` (0-based): rows `i..n_t-1`.
    pub fn phi_count_in(&self, i: usize) -> usize {
        self.n_t - 1 - i
    }

    /// Rotation angles in column `i` (0-based): rows `i+1..n_t`.
    pub fn psi_count_in(&self, i: usize) -> usize {
        self.n_t - 1 - i
    }

    pub fn phi_count(&self) -> usize {
        (0..self.column_count()).map(|i| self.phi_count_in(i)).sum()
    }

    pub fn psi_count(&self) -> usize {
        (0..self.column_count()).map(|i| self.psi_count_in(i)).sum()
    }

    /// Total angle count.
    pub fn param_count(&self) -> usize {
        self.phi_count() + self.psi_count()
    }

    /// Labels like `phi21` in canonical order (columns ascending, row index
    /// ascending within a column). Row/column digits are 1-based.
    pub fn phi_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.column_count() {
            for l in i..self.n_t - 1 {
                out.push(format!("phi{}{}", l + 1, i + 1));
            }
        }
        out
    }

    /// Labels like `psi31` in canonical order.
    pub fn psi_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.column_count() {
            for l in i + 1..self.n_t {
                out.push(format!("psi{}{}", l + 1, i + 1));
            }
        }
        out
    }
}

impl std::fmt::Display for GrDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.n_t, self.k)
    }
}

/// Angles for one parameterized column.
#[derive(Debug, Clone, PartialEq)]
pub struct GrColumn {
    /// `phi_{l,i}` for `l = i..n_t-1`, each in `[0, 2*pi)`.
    pub phis: Vec<f64>,
    /// `psi_{l,i}` for `l = i+1..n_t`, each in `[0, pi/2]`.
    pub psis: Vec<f64>,
}

/// Complete angle description of an `n_t x k` unitary-column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensParams {
    dims: GrDims,
    columns: Vec<GrColumn>,
}

impl GivensParams {
    /// Builds from per-column angles. Out-of-range values are made
    /// canonical: phases wrap mod 2*pi, rotations clamp to `[0, pi/2]`.
    pub fn new(dims: GrDims, columns: Vec<GrColumn>) -> Result<Self> {
        if columns.len() != dims.column_count() {
            return Err(Error::Validation(format!(
                "expected {} angle columns for {dims}, got {}",
                dims.column_count(),
                columns.len()
            )));
        }
        let mut canon = Vec::with_capacity(columns.len());
        for (i, col) in columns.into_iter().enumerate() {
            if col.phis.len() != dims.phi_count_in(i) || col.psis.len() != dims.psi_count_in(i) {
                return Err(Error::Validation(format!(
                    "column {i} of {dims} needs {} phis and {} psis",
                    dims.phi_count_in(i),
                    dims.psi_count_in(i)
                )));
            }
            if col.phis.iter().chain(&col.psis).any(|a| !a.is_finite()) {
                return Err(Error::Validation("non-finite angle".into()));
            }
            canon.push(GrColumn {
                phis: col.phis.iter().map(|&p| wrap_phi(p)).collect(),
                psis: col.psis.iter().map(|&p| p.clamp(0.0, FRAC_PI_2)).collect(),
            });
        }
        Ok(Self {
            dims,
            columns: canon,
        })
    }

    /// Rebuilds from flat angle lists in canonical order.
    pub fn from_flat(dims: GrDims, phis: &[f64], psis: &[f64]) -> Result<Self> {
        if phis.len() != dims.phi_count() || psis.len() != dims.psi_count() {
            return Err(Error::Validation(format!(
                "{dims} takes {} phis and {} psis, got {} and {}",
                dims.phi_count(),
                dims.psi_count(),
                phis.len(),
                psis.len()
            )));
        }
        let mut columns = Vec::new();
        let (mut fp, mut sp) = (0, 0);
        for i in 0..dims.column_count() {
            let (nf, ns) = (dims.phi_count_in(i), dims.psi_count_in(i));
            columns.push(GrColumn {
                phis: phis[fp..fp + nf].to_vec(),
                psis: psis[sp..sp + ns].to_vec(),
            });
            fp += nf;
            sp += ns;
        }
        Self::new(dims, columns)
    }

    pub fn dims(&self) -> GrDims {
        self.dims
    }

    pub fn columns(&self) -> &[GrColumn] {
        &self.columns
    }

    /// Phase angles flattened in canonical order.
    pub fn phi_flat(&self) -> Vec<f64> {
        self.columns
            .iter()
            .flat_map(|c| c.phis.iter().copied())
            .collect()
    }

    /// Rotation angles flattened in canonical order.
    pub fn psi_flat(&self) -> Vec<f64> {
        self.columns
            .iter()
            .flat_map(|c| c.psis.iter().copied())
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.dims.param_count()
    }
}

fn wrap_phi(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can return exactly 2*pi for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Planar rotation block `G_{l,i}(psi)` of order `n`: identity except
/// `(i,i) = (l,l) = cos`, `(i,l) = sin`, `(l,i) = -sin`. Indices are
/// 1-based and must satisfy `1 <= i < l <= n`.
pub fn givens_block(l: usize, i: usize, psi: f64, n: usize) -> Result<ComplexMatrix> {
    if i < 1 || l <= i || l > n {
        return Err(Error::Validation(format!(
            "givens_block indices must satisfy 1 <= i < l <= n, got i={i}, l={l}, n={n}"
        )));
    }
    let (c, s) = (psi.cos(), psi.sin());
    let (i0, l0) = (i - 1, l - 1);
    let mut g = ComplexMatrix::identity(n);
    g.set(i0, i0, Complex64::new(c, 0.0));
    g.set(l0, l0, Complex64::new(c, 0.0));
    g.set(i0, l0, Complex64::new(s, 0.0));
    g.set(l0, i0, Complex64::new(-s, 0.0));
    Ok(g)
}

/// Magnitude below which an entry's phase is unrecoverable; the angle is
/// set to zero (any value reconstructs the same matrix).
const SINGULAR_TOL: f64 = 1e-15;
/// Orthonormality tolerance for decomposition input.
const UNITARY_TOL: f64 = 1e-9;

/// Extracts the rotation angles of `w`, which must have orthonormal
/// columns and a real nonnegative last row (apply
/// [`crate::cxmat::phase_normalize`] first).
///
/// Peels one column at a time: the phases of column `i` are removed with
/// the inverse diagonal, then rotations zero its lower entries one row at
/// a time; the same transforms applied to the full matrix reduce the
/// remaining columns for the next step.
pub fn gr_decompose(w: &ComplexMatrix, dims: GrDims) -> Result<GivensParams> {
    if w.rows() != dims.n_t() || w.cols() != dims.k() {
        return Err(Error::Validation(format!(
            "matrix is {}x{}, dims say {dims}",
            w.rows(),
            w.cols()
        )));
    }
    let residual = w.gram_residual();
    if residual > UNITARY_TOL {
        return Err(Error::Validation(format!(
            "columns not orthonormal (Gram residual {residual:.3e})"
        )));
    }
    let last = dims.n_t() - 1;
    for j in 0..dims.k() {
        let z = w.get(last, j);
        if z.im.abs() > UNITARY_TOL || z.re < -UNITARY_TOL {
            return Err(Error::Validation(format!(
                "last row must be real and nonnegative, entry {j} is {z}"
            )));
        }
    }

    let n_t = dims.n_t();
    let mut work: Vec<Vec<Complex64>> = (0..n_t)
        .map(|i| (0..dims.k()).map(|j| w.get(i, j)).collect())
        .collect();
    let mut columns = Vec::with_capacity(dims.column_count());
    for i in 0..dims.column_count() {
        let mut phis = Vec::with_capacity(dims.phi_count_in(i));
        for l in i..n_t - 1 {
            let z = work[l][i];
            let phi = if z.norm() < SINGULAR_TOL {
                0.0
            } else {
                wrap_phi(z.arg())
            };
            phis.push(phi);
            let rot = Complex64::from_polar(1.0, -phi);
            for entry in &mut work[l] {
                *entry *= rot;
            }
        }
        let mut psis = Vec::with_capacity(dims.psi_count_in(i));
        for l in i + 1..n_t {
            let a = work[i][i].re;
            let b = work[l][i].re;
            let psi = b.atan2(a).clamp(0.0, FRAC_PI_2);
            psis.push(psi);
            let (c, s) = (psi.cos(), psi.sin());
            for j in 0..dims.k() {
                let top = work[i][j];
                let bot = work[l][j];
                work[i][j] = c * top + s * bot;
                work[l][j] = -s * top + c * bot;
            }
        }
        columns.push(GrColumn { phis, psis });
    }
    GivensParams::new(dims, columns)
}

/// Rebuilds the matrix described by `p`. The output has orthonormal
/// columns and a real nonnegative last row by construction, for any
/// in-range angles.
pub fn gr_reconstruct(p: &GivensParams) -> ComplexMatrix {
    let dims = p.dims();
    let n_t = dims.n_t();
    // Accumulate the product acting on the identity; every factor only
    // touches one or two columns, so apply them in place.
    let mut acc: Vec<Vec<Complex64>> = (0..n_t)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n_t];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    for (i, col) in p.columns().iter().enumerate() {
        // Right-multiply by the diagonal phase factor: scales columns
        // i..n_t-1 of the accumulator.
        for (offset, &phi) in col.phis.iter().enumerate() {
            let rot = Complex64::from_polar(1.0, phi);
            for entry in &mut acc[i + offset] {
                *entry *= rot;
            }
        }
        // Right-multiply by each transposed rotation block.
        for (offset, &psi) in col.psis.iter().enumerate() {
            let l = i + 1 + offset;
            let (c, s) = (psi.cos(), psi.sin());
            for row in 0..n_t {
                let ci = acc[i][row];
                let cl = acc[l][row];
                acc[i][row] = c * ci + s * cl;
                acc[l][row] = -s * ci + c * cl;
            }
        }
    }
    ComplexMatrix::from_fn(n_t, dims.k(), |i, j| acc[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxmat::{phase_normalize, svd};
    use crate::rng::{complex_gaussian_matrix, trial_rng};
    use proptest::prelude::*;

    fn random_unitary(dims: GrDims, seed: u64, index: u64) -> ComplexMatrix {
        let mut rng = trial_rng(seed, index);
        let h = complex_gaussian_matrix(&mut rng, dims.n_t(), dims.n_t());
        let v = svd(&h).unwrap().v;
        phase_normalize(&v).0.leading_columns(dims.k())
    }

    #[test]
    fn param_counts_match_reference_table() {
        let expect = [
            ((2, 1), 2),
            ((2, 2), 2),
            ((3, 1), 4),
            ((3, 2), 6),
            ((3, 3), 6),
            ((4, 1), 6),
            ((4, 2), 10),
            ((4, 3), 12),
            ((4, 4), 12),
        ];
        for ((n_t, k), count) in expect {
            let dims = GrDims::new(n_t, k).unwrap();
            assert_eq!(dims.param_count(), count, "{n_t}x{k}");
        }
        assert_eq!(
            GrDims::new(3, 2).unwrap().phi_labels(),
            vec!["phi11", "phi21", "phi22"]
        );
        assert_eq!(
            GrDims::new(3, 2).unwrap().psi_labels(),
            vec!["psi21", "psi31", "psi32"]
        );
    }

    #[test]
    fn dims_rejects_out_of_range() {
        assert!(GrDims::new(0, 1).is_err());
        assert!(GrDims::new(5, 1).is_err());
        assert!(GrDims::new(3, 4).is_err());
        assert!(GrDims::new(3, 0).is_err());
    }

    #[test]
    fn givens_block_cases() {
        let g = givens_block(2, 1, 0.0, 2).unwrap();
        assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let g = givens_block(2, 1, FRAC_PI_2, 2).unwrap();
        let want = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!(g.max_abs_diff(&want) < 1e-15);

        let mut rng = trial_rng(5, 0);
        for _ in 0..10 {
            let psi: f64 = rand::Rng::gen_range(&mut rng, 0.0..FRAC_PI_2);
            let g = givens_block(3, 1, psi, 3).unwrap();
            let prod = g.mul(&g.hermitian());
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        }

        assert!(givens_block(1, 1, 0.1, 2).is_err());
        assert!(givens_block(3, 1, 0.1, 2).is_err());
        assert!(givens_block(0, 1, 0.1, 2).is_err());
    }

    #[test]
    fn decompose_axis_vector() {
        let dims = GrDims::new(2, 1).unwrap();
        let w = ComplexMatrix::new(
            2,
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let p = gr_decompose(&w, dims).unwrap();
        assert_eq!(p.columns()[0].phis, vec![0.0]);
        assert_eq!(p.columns()[0].psis, vec![0.0]);
    }

    #[test]
    fn decompose_known_2x1() {
        let dims = GrDims::new(2, 1).unwrap();
        let w = ComplexMatrix::new(
            2,
            1,
            vec![
                Complex64::from_polar(0.3f64.cos(), 1.2),
                Complex64::new(0.3f64.sin(), 0.0),
            ],
        )
        .unwrap();
        let p = gr_decompose(&w, dims).unwrap();
        assert!((p.columns()[0].psis[0] - 0.3).abs() < 1e-12);
        assert!((p.columns()[0].phis[0] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn decompose_known_3x1() {
        let (psi21, psi31, phi11, phi21) = (0.4f64, 0.7f64, 2.0, 0.5);
        let dims = GrDims::new(3, 1).unwrap();
        let w = ComplexMatrix::new(
            3,
            1,
            vec![
                Complex64::from_polar(psi21.cos() * psi31.cos(), phi11),
                Complex64::from_polar(psi21.sin() * psi31.cos(), phi21),
                Complex64::new(psi31.sin(), 0.0),
            ],
        )
        .unwrap();
        let p = gr_decompose(&w, dims).unwrap();
        let col = &p.columns()[0];
        assert!((col.phis[0] - phi11).abs() < 1e-12);
        assert!((col.phis[1] - phi21).abs() < 1e-12);
        assert!((col.psis[0] - psi21).abs() < 1e-12);
        assert!((col.psis[1] - psi31).abs() < 1e-12);
    }

    #[test]
    fn reconstruct_zero_angles_gives_identity_columns() {
        let dims = GrDims::new(3, 2).unwrap();
        let p = GivensParams::from_flat(dims, &[0.0; 3], &[0.0; 3]).unwrap();
        let w = gr_reconstruct(&p);
        assert!(w.max_abs_diff(&ComplexMatrix::identity(3).leading_columns(2)) < 1e-15);
    }

    #[test]
    fn reconstruct_degenerate_top_entry() {
        // psi21 = pi/2 sends the vector to [0, 1] for any phase.
        let dims = GrDims::new(2, 1).unwrap();
        for phi in [0.0, 1.0, 3.0, 6.0] {
            let p = GivensParams::from_flat(dims, &[phi], &[FRAC_PI_2]).unwrap();
            let w = gr_reconstruct(&p);
            assert!(w.get(0, 0).norm() < 1e-15);
            assert!((w.get(1, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn reconstruct_matches_explicit_3x2_product() {
        // Entry-level closed form of the factor product, written out by
        // hand, pins the application order.
        let (p11, p21, p22) = (2.1f64, 0.6f64, 4.4f64);
        let (s21, s31, s32) = (0.5f64, 0.9f64, 1.1f64);
        let dims = GrDims::new(3, 2).unwrap();
        let p = GivensParams::from_flat(dims, &[p11, p21, p22], &[s21, s31, s32]).unwrap();
        let w = gr_reconstruct(&p);

        let e = |phi: f64| Complex64::from_polar(1.0, phi);
        let (c21, c31, c32) = (s21.cos(), s31.cos(), s32.cos());
        let (sn21, sn31, sn32) = (s21.sin(), s31.sin(), s32.sin());
        let want = ComplexMatrix::new(
            3,
            2,
            vec![
                e(p11) * (c21 * c31),
                e(p11) * (-c21 * sn31 * sn32 - sn21 * c32 * e(p22)),
                e(p21) * (sn21 * c31),
                e(p21) * (-sn21 * sn31 * sn32 + c21 * c32 * e(p22)),
                Complex64::new(sn31, 0.0),
                Complex64::new(c31 * sn32, 0.0),
            ],
        )
        .unwrap();
        assert!(
            w.max_abs_diff(&want) < 1e-14,
            "diff {}",
            w.max_abs_diff(&want)
        );

        // Swapping the rotation order changes the matrix.
        let swapped = GivensParams::from_flat(dims, &[p11, p21, p22], &[s31, s21, s32]).unwrap();
        assert!(gr_reconstruct(&swapped).max_abs_diff(&want) > 1e-3);
    }

    #[test]
    fn roundtrip_all_shapes() {
        for (n_t, k) in [
            (2, 1),
            (2, 2),
            (3, 1),
            (3, 2),
            (3, 3),
            (4, 1),
            (4, 2),
            (4, 3),
            (4, 4),
        ] {
            let dims = GrDims::new(n_t, k).unwrap();
            for idx in 0..50 {
                let w = random_unitary(dims, 11, idx);
                let p = gr_decompose(&w, dims).unwrap();
                let back = gr_reconstruct(&p);
                let err = back.max_abs_diff(&w);
                assert!(err <= 1e-9, "{n_t}x{k} idx {idx}: roundtrip error {err}");
                for col in p.columns() {
                    assert!(col.phis.iter().all(|&p| (0.0..TAU).contains(&p)));
                    assert!(col.psis.iter().all(|&p| (0.0..=FRAC_PI_2).contains(&p)));
                }
            }
        }
    }

    #[test]
    fn decompose_rejects_bad_input() {
        let dims = GrDims::new(2, 1).unwrap();
        let not_unit = ComplexMatrix::new(
            2,
            1,
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            gr_decompose(&not_unit, dims),
            Err(Error::Validation(_))
        ));

        let complex_last = ComplexMatrix::new(
            2,
            1,
            vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        )
        .unwrap();
        assert!(matches!(
            gr_decompose(&complex_last, dims),
            Err(Error::Validation(_))
        ));

        let wrong_shape = ComplexMatrix::identity(3);
        assert!(gr_decompose(&wrong_shape, dims).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn reconstruct_is_unitary_for_any_angles(
            raw_phis in prop::collection::vec(0.0f64..TAU, 3),
            raw_psis in prop::collection::vec(0.0f64..FRAC_PI_2, 3),
        ) {
            let dims = GrDims::new(3, 2).unwrap();
            let p = GivensParams::from_flat(dims, &raw_phis, &raw_psis).unwrap();
            let w = gr_reconstruct(&p);
            prop_assert!(w.gram_residual() < 1e-12);
            for j in 0..2 {
                prop_assert!(w.get(2, j).im.abs() < 1e-12);
                prop_assert!(w.get(2, j).re >= -1e-12);
            }
        }

        #[test]
        fn out_of_range_angles_are_canonicalized(
            phi in -20.0f64..20.0,
            psi in -3.0f64..3.0,
        ) {
            let dims = GrDims::new(2, 1).unwrap();
            let p = GivensParams::from_flat(dims, &[phi], &[psi]).unwrap();
            let col = &p.columns()[0];
            prop_assert!((0.0..TAU).contains(&col.phis[0]));
            prop_assert!((0.0..=FRAC_PI_2).contains(&col.psis[0]));
            // Wrapped phase reconstructs the same matrix.
            let q = GivensParams::from_flat(dims, &[col.phis[0]], &[col.psis[0]]).unwrap();
            prop_assert!(gr_reconstruct(&p).max_abs_diff(&gr_reconstruct(&q)) < 1e-12);
        }
    }

    #[test]
    fn wrap_phi_edge_cases() {
        assert_eq!(wrap_phi(0.0), 0.0);
        assert!(wrap_phi(-1e-20) < TAU);
        assert!((wrap_phi(TAU + 0.5) - 0.5).abs() < 1e-12);
        assert!((wrap_phi(-0.5) - (TAU - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn reconstruct_handles_half_turn_phase() {
        let dims = GrDims::new(2, 1).unwrap();
        let p = GivensParams::from_flat(dims, &[std::f64::consts::PI], &[0.25]).unwrap();
        let w = gr_reconstruct(&p);
        let q = gr_decompose(&w, dims).unwrap();
        assert!((q.columns()[0].phis[0] - std::f64::consts::PI).abs() < 1e-12);
    }
}
