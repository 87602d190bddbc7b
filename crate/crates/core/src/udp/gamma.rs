use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cross::CrossMatrices;
use crate::linalg::CMatrix;

/// Complex equations contributed by each Kronecker family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationCounts {
    /// From the off-diagonal blocks of `Q (x) P` (the `rho_AC` constraint).
    pub from_qp: usize,
    /// From the off-diagonal blocks of `L (x) M` (the `rho_BD` constraint).
    pub from_lm: usize,
}

impl EquationCounts {
    pub fn total(&self) -> usize {
        self.from_qp + self.from_lm
    }
}

/// Real homogeneous system in `(Re gamma_ij, Im gamma_ij)` for `i < j`.
///
/// Column `2k` is `Re gamma` and column `2k + 1` is `Im gamma` of `pairs[k]`.
/// Each complex equation `sum gamma c + conj(gamma) c' = 0` occupies two
/// consecutive rows (real part, imaginary part).
#[derive(Clone, Debug)]
pub struct GammaSystem {
    pub rank_r: usize,
    pub pairs: Vec<(usize, usize)>,
    pub coefficients: DMatrix<f64>,
    pub counts: EquationCounts,
}

impl GammaSystem {
    /// Number of complex unknowns, `r(r-1)/2`.
    pub fn complex_unknowns(&self) -> usize {
        self.pairs.len()
    }

    pub fn real_unknowns(&self) -> usize {
        2 * self.pairs.len()
    }

    /// Real image `G gamma` of a complex pair vector.
    pub fn apply(&self, gamma: &[Complex64]) -> Vec<f64> {
        let x: Vec<f64> = gamma.iter().flat_map(|g| [g.re, g.im]).collect();
        let v = nalgebra::DVector::from_vec(x);
        (&self.coefficients * v).iter().cloned().collect()
    }
}

/// Appends the equations from the off-diagonal outer blocks `(a, b)`, `a < b`,
/// of `X (x) Y`, keeping every inner entry except the last diagonal one.
fn push_family(
    rows: &mut Vec<Vec<f64>>,
    outer: &[&CMatrix],
    inner: &[&CMatrix],
    (dx, dy): (usize, usize),
) -> usize {
    let n_pairs = outer.len();
    let mut count = 0;
    for a in 0..dx {
        for b in a + 1..dx {
            for c in 0..dy {
                for e in 0..dy {
                    if c == dy - 1 && e == dy - 1 {
                        continue;
                    }
                    let mut re_row = vec![0.0; 2 * n_pairs];
                    let mut im_row = vec![0.0; 2 * n_pairs];
                    for k in 0..n_pairs {
                        // Entry ((a,c),(b,e)) of X (x) Y and of its adjoint.
                        let coef = outer[k][(a, b)] * inner[k][(c, e)];
                        let coef_adj = (outer[k][(b, a)] * inner[k][(e, c)]).conj();
                        let sum = coef + coef_adj;
                        let diff = coef - coef_adj;
                        re_row[2 * k] = sum.re;
                        re_row[2 * k + 1] = -diff.im;
                        im_row[2 * k] = sum.im;
                        im_row[2 * k + 1] = diff.re;
                    }
                    rows.push(re_row);
                    rows.push(im_row);
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn assemble_gamma_system(matrices: &CrossMatrices) -> GammaSystem {
    let n_pairs = matrices.pairs.len();
    let q: Vec<&CMatrix> = matrices.blocks.iter().map(|b| &b.q).collect();
    let p: Vec<&CMatrix> = matrices.blocks.iter().map(|b| &b.p).collect();
    let l: Vec<&CMatrix> = matrices.blocks.iter().map(|b| &b.l).collect();
    let m: Vec<&CMatrix> = matrices.blocks.iter().map(|b| &b.m).collect();

    let mut rows = Vec::new();
    let (da, db, dc, dd) = matrices.block_dims;
    let from_qp = push_family(&mut rows, &q, &p, (da, dc));
    let from_lm = push_family(&mut rows, &l, &m, (db, dd));

    let coefficients = DMatrix::from_fn(rows.len(), 2 * n_pairs, |i, j| rows[i][j]);
    GammaSystem {
        rank_r: matrices.rank,
        pairs: matrices.pairs.clone(),
        coefficients,
        counts: EquationCounts { from_qp, from_lm },
    }
}

/// Numerical null space of a [`GammaSystem`].
#[derive(Clone, Debug)]
pub struct NullSpace {
    pub null_dim: usize,
    /// Singular values, decreasing (zero-padded to the number of unknowns).
    pub singular_values: Vec<f64>,
    /// Orthonormal basis of the null space as columns, when nontrivial.
    pub basis: Option<DMatrix<f64>>,
}

/// Singular values at or below `svd_tol * sigma_max` count as zero.
pub fn decide_null_space(system: &GammaSystem, svd_tol: f64) -> NullSpace {
    let cols = system.real_unknowns();
    if cols == 0 {
        return NullSpace {
            null_dim: 0,
            singular_values: vec![],
            basis: None,
        };
    }
    let g = &system.coefficients;
    // Pad short systems so the SVD yields a full set of right vectors.
    let padded = if g.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (g.nrows(), cols)).copy_from(g);
        p
    } else {
        g.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let max = singular_values.first().copied().unwrap_or(0.0);

    let null_idx: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| max == 0.0 || svd.singular_values[i] <= svd_tol * max)
        .collect();
    let null_dim = null_idx.len();
    let basis =
        (null_dim > 0).then(|| DMatrix::from_fn(cols, null_dim, |r, k| v_t[(null_idx[k], r)]));
    NullSpace {
        null_dim,
        singular_values,
        basis,
    }
}
