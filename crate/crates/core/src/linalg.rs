//! Reshaping and rank utilities shared by the marginal, Schmidt and
//! certification code.

use nalgebra::{DMatrix, Dyn};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub(crate) type CMatrix = DMatrix<Complex64>;

/// Row/column coordinates of every entry of a tensor-product vector when the
/// factors at `row_positions` are fused into the row index and the rest into
/// the column index. Both groups keep ascending factor order.
fn split_indices(dims: &[usize], row_positions: &[usize]) -> (usize, usize, Vec<(usize, usize)>) {
    let is_row: Vec<bool> = (0..dims.len())
        .map(|p| row_positions.contains(&p))
        .collect();
    // Strides inside the row and column spaces, least significant last.
    let mut row_stride = vec![0; dims.len()];
    let mut col_stride = vec![0; dims.len()];
    let (mut rs, mut cs) = (1usize, 1usize);
    for p in (0..dims.len()).rev() {
        if is_row[p] {
            row_stride[p] = rs;
            rs *= dims[p];
        } else {
            col_stride[p] = cs;
            cs *= dims[p];
        }
    }
    let total: usize = dims.iter().product();
    let mut coords = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    let (mut r, mut c) = (0usize, 0usize);
    for _ in 0..total {
        coords.push((r, c));
        // Odometer increment, updating (r, c) incrementally.
        for p in (0..dims.len()).rev() {
            let stride = if is_row[p] {
                row_stride[p]
            } else {
                col_stride[p]
            };
            let acc = if is_row[p] { &mut r } else { &mut c };
            if digits[p] + 1 < dims[p] {
                digits[p] += 1;
                *acc += stride;
                break;
            }
            *acc -= stride * digits[p];
            digits[p] = 0;
        }
    }
    (rs, cs, coords)
}

/// Reshapes a vector on `prod(dims)` into a matrix whose rows run over the
/// factors at `row_positions`.
pub(crate) fn matricize(vector: &[Complex64], dims: &[usize], row_positions: &[usize]) -> CMatrix {
    let (rows, cols, coords) = split_indices(dims, row_positions);
    let mut m = CMatrix::zeros(rows, cols);
    for (&(r, c), &a) in coords.iter().zip(vector) {
        m[(r, c)] = a;
    }
    m
}

/// Inverse of [`matricize`].
pub(crate) fn unmatricize(
    matrix: &CMatrix,
    dims: &[usize],
    row_positions: &[usize],
) -> Vec<Complex64> {
    let (_, _, coords) = split_indices(dims, row_positions);
    coords.iter().map(|&(r, c)| matrix[(r, c)]).collect()
}

/// `Tr_rest |ket><bra|` over the factors not in `keep_positions`.
pub(crate) fn reduced_outer(
    ket: &[Complex64],
    bra: &[Complex64],
    dims: &[usize],
    keep_positions: &[usize],
) -> CMatrix {
    let k = matricize(ket, dims, keep_positions);
    let b = matricize(bra, dims, keep_positions);
    &k * b.adjoint()
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Number of singular values above `rel_tol * sigma_max`.
pub(crate) fn numerical_rank_complex(m: &CMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    count_above(sv.as_slice(), rel_tol)
}

pub(crate) fn count_above(singular_values: &[f64], rel_tol: f64) -> usize {
    let max = singular_values.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    singular_values
        .iter()
        .filter(|&&s| s > rel_tol * max)
        .count()
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal absorbed into `Q`.
pub(crate) fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn_generic(Dyn(dim), Dyn(dim), |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}
