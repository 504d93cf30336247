//! Dense complex tensors with row-major storage.
//!
//! Everything the simulator does numerically goes through three kernels:
//! [`permute`], [`contract`] (permute, matricize, one GEMM) and
//! [`svd_truncate`]. The dense factorizations themselves are delegated to
//! `faer`, always run sequentially so results are bitwise reproducible.

use faer::{Accum, Mat, MatMut, MatRef, Par, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Relative cutoff below which singular values are treated as zero.
pub const DEFAULT_FLOOR: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense tensor of complex numbers. The last index runs fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return invalid(format!("tensor dimensions must be positive, got {shape:?}"));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return invalid(format!(
                "shape {shape:?} needs {len} elements, got {}",
                data.len()
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "zero-sized dimension in {shape:?}");
        Self { shape: shape.to_vec(), data: vec![ZERO; shape.iter().product()] }
    }

    pub fn scalar(value: C64) -> Self {
        Self { shape: Vec::new(), data: vec![value] }
    }

    /// Builds a tensor by evaluating `f` on every multi-index in storage order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut out = Self::zeros(shape);
        let mut idx = vec![0usize; shape.len()];
        for slot in out.data.iter_mut() {
            *slot = f(&idx);
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        out
    }

    /// Identity matrix of size `n`.
    pub fn eye(n: usize) -> Self {
        Self::from_fn(&[n, n], |i| if i[0] == i[1] { ONE } else { ZERO })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        row_major_strides(&self.shape)
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: C64) {
        let off = self.offset(idx);
        self.data[off] = value;
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank(), "index rank mismatch");
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &d)| {
                assert!(i < d, "index {i} out of bounds for dimension {d}");
                acc * d + i
            })
    }

    /// Reinterprets the data under a new shape with the same element count.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    pub fn permute(&self, axes: &[usize]) -> Result<Self> {
        permute(self, axes)
    }

    pub fn conj(&self) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&mut self, factor: C64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }

    /// Multiplies every slice along `axis` by the matching entry of `weights`.
    pub fn scale_axis(&mut self, axis: usize, weights: &[f64]) {
        assert!(axis < self.rank(), "axis {axis} out of range");
        assert_eq!(weights.len(), self.shape[axis], "weight length mismatch");
        let inner: usize = self.shape[axis + 1..].iter().product();
        let dim = self.shape[axis];
        for (chunk_idx, chunk) in self.data.chunks_mut(inner).enumerate() {
            let w = weights[chunk_idx % dim];
            chunk.iter_mut().for_each(|z| *z *= w);
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest elementwise modulus of `self - other`; shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Matrix product of two rank-2 tensors.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        contract(self, rhs, &[(1, 0)])
    }

    /// Conjugate transpose of a rank-2 tensor.
    pub fn adjoint(&self) -> Result<Self> {
        if self.rank() != 2 {
            return invalid("adjoint needs a rank-2 tensor");
        }
        Ok(self.permute(&[1, 0])?.conj())
    }
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for ax in (0..shape.len().saturating_sub(1)).rev() {
        strides[ax] = strides[ax + 1] * shape[ax + 1];
    }
    strides
}

fn check_permutation(axes: &[usize], rank: usize) -> Result<()> {
    if axes.len() != rank {
        return invalid(format!("permutation {axes:?} has wrong length for rank {rank}"));
    }
    let mut seen = vec![false; rank];
    for &a in axes {
        if a >= rank || seen[a] {
            return invalid(format!("{axes:?} is not a permutation of 0..{rank}"));
        }
        seen[a] = true;
    }
    Ok(())
}

/// Reorders axes: output axis `i` is input axis `axes[i]`.
pub fn permute(t: &Tensor, axes: &[usize]) -> Result<Tensor> {
    let rank = t.rank();
    check_permutation(axes, rank)?;
    if axes.iter().enumerate().all(|(i, &a)| i == a) {
        return Ok(t.clone());
    }
    let src_strides = t.strides();
    let shape: Vec<usize> = axes.iter().map(|&a| t.shape[a]).collect();
    let strides: Vec<usize> = axes.iter().map(|&a| src_strides[a]).collect();

    let last = rank - 1;
    let inner = shape[last];
    let inner_stride = strides[last];
    let mut data = Vec::with_capacity(t.len());
    let mut idx = vec![0usize; rank];
    let mut base = 0usize;
    'outer: loop {
        let src = &t.data[base..];
        data.extend((0..inner).map(|j| src[j * inner_stride]));
        let mut ax = last;
        loop {
            if ax == 0 {
                break 'outer;
            }
            ax -= 1;
            idx[ax] += 1;
            base += strides[ax];
            if idx[ax] < shape[ax] {
                break;
            }
            base -= strides[ax] * shape[ax];
            idx[ax] = 0;
        }
    }
    Ok(Tensor { shape, data })
}

/// Sums over the paired axes. The result carries the free axes of `a`
/// followed by the free axes of `b`, each in their original order.
pub fn contract(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
    let mut used_a = vec![false; a.rank()];
    let mut used_b = vec![false; b.rank()];
    for &(ia, ib) in pairs {
        if ia >= a.rank() || ib >= b.rank() {
            return invalid(format!("contraction axes ({ia}, {ib}) out of range"));
        }
        if used_a[ia] || used_b[ib] {
            return invalid(format!("axis paired twice in {pairs:?}"));
        }
        if a.shape[ia] != b.shape[ib] {
            return invalid(format!(
                "dimension mismatch on pair ({ia}, {ib}): {} vs {}",
                a.shape[ia], b.shape[ib]
            ));
        }
        used_a[ia] = true;
        used_b[ib] = true;
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|&i| !used_a[i]).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|&i| !used_b[i]).collect();

    let perm_a: Vec<usize> = free_a.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
    let perm_b: Vec<usize> = pairs.iter().map(|p| p.1).chain(free_b.iter().copied()).collect();
    let pa = permute(a, &perm_a)?;
    let pb = permute(b, &perm_b)?;

    let m: usize = free_a.iter().map(|&i| a.shape[i]).product();
    let n: usize = free_b.iter().map(|&i| b.shape[i]).product();
    let k: usize = pairs.iter().map(|p| a.shape[p.0]).product();

    let data = gemm(&pa.data, &pb.data, m, k, n);
    let shape = free_a
        .iter()
        .map(|&i| a.shape[i])
        .chain(free_b.iter().map(|&i| b.shape[i]))
        .collect();
    Ok(Tensor { shape, data })
}

/// `out[.., j, ..] = Σ_i t[.., i, ..] m[i, j]` on `axis`, keeping axis order.
pub(crate) fn apply_on_axis(t: &Tensor, axis: usize, m: &Tensor) -> Result<Tensor> {
    let out = contract(t, m, &[(axis, 0)])?;
    let last = t.rank() - 1;
    if axis == last {
        return Ok(out);
    }
    let perm: Vec<usize> = (0..t.rank())
        .map(|i| match i.cmp(&axis) {
            std::cmp::Ordering::Less => i,
            std::cmp::Ordering::Equal => last,
            std::cmp::Ordering::Greater => i - 1,
        })
        .collect();
    out.permute(&perm)
}

/// Row-major `m×k` times `k×n`.
pub(crate) fn gemm(a: &[C64], b: &[C64], m: usize, k: usize, n: usize) -> Vec<C64> {
    let mut out = vec![ZERO; m * n];
    {
        let lhs = MatRef::from_row_major_slice(a, m, k);
        let rhs = MatRef::from_row_major_slice(b, k, n);
        let dst = MatMut::from_row_major_slice_mut(&mut out, m, n);
        faer::linalg::matmul::matmul(dst, Accum::Replace, lhs, rhs, ONE, Par::Seq);
    }
    out
}

fn as_mat(t: &Tensor) -> MatRef<'_, C64> {
    debug_assert_eq!(t.rank(), 2);
    MatRef::from_row_major_slice(&t.data, t.shape[0], t.shape[1])
}

fn from_mat(m: MatRef<'_, C64>) -> Tensor {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        data.extend((0..cols).map(|j| m[(i, j)]));
    }
    Tensor { shape: vec![rows, cols], data }
}

/// Outcome of a truncated singular value decomposition.
#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Shape `(left dims..., kept)`, isometric over the kept index.
    pub left: Tensor,
    /// Kept singular values, descending.
    pub singular_values: Vec<f64>,
    /// Shape `(kept, right dims...)`, isometric over the kept index.
    pub right: Tensor,
    /// `sqrt(sum discarded s^2) / sqrt(sum all s^2)`.
    pub truncation_error: f64,
}

/// Splits `t` into left axes (`left_axes`, in that order) and the remaining
/// axes (ascending), keeps at most `chi` singular values, and drops every
/// value below `floor * s_max`. At least one value always survives.
pub fn svd_truncate(t: &Tensor, left_axes: &[usize], chi: usize, floor: f64) -> Result<SvdResult> {
    if chi == 0 {
        return invalid("chi must be at least 1");
    }
    if !(floor >= 0.0) {
        return invalid(format!("floor must be nonnegative, got {floor}"));
    }
    let mut is_left = vec![false; t.rank()];
    for &ax in left_axes {
        if ax >= t.rank() || is_left[ax] {
            return invalid(format!("bad left axes {left_axes:?} for rank {}", t.rank()));
        }
        is_left[ax] = true;
    }
    let right_axes: Vec<usize> = (0..t.rank()).filter(|&i| !is_left[i]).collect();
    let perm: Vec<usize> = left_axes.iter().chain(&right_axes).copied().collect();
    let left_dims: Vec<usize> = left_axes.iter().map(|&i| t.shape[i]).collect();
    let right_dims: Vec<usize> = right_axes.iter().map(|&i| t.shape[i]).collect();
    let m: usize = left_dims.iter().product();
    let n: usize = right_dims.iter().product();

    let mat = permute(t, &perm)?.reshape(vec![m, n])?;
    let (u, s, v) = svd_matrix(&mat)?;

    let s_max = s.first().copied().unwrap_or(0.0);
    let cutoff = floor * s_max;
    let kept = s.iter().take_while(|&&x| x >= cutoff).count().clamp(1, chi.min(s.len()));
    let total: f64 = s.iter().map(|x| x * x).sum();
    let discarded: f64 = s[kept..].iter().map(|x| x * x).sum();
    let truncation_error = if total > 0.0 { (discarded / total).sqrt() } else { 0.0 };

    let left_data: Vec<C64> = (0..m)
        .flat_map(|i| (0..kept).map(move |j| (i, j)))
        .map(|(i, j)| u[(i, j)])
        .collect();
    let right_data: Vec<C64> = (0..kept)
        .flat_map(|j| (0..n).map(move |i| (j, i)))
        .map(|(j, i)| v[(i, j)].conj())
        .collect();

    let mut lshape = left_dims;
    lshape.push(kept);
    let mut rshape = vec![kept];
    rshape.extend(right_dims);
    Ok(SvdResult {
        left: Tensor { shape: lshape, data: left_data },
        singular_values: s[..kept].to_vec(),
        right: Tensor { shape: rshape, data: right_data },
        truncation_error,
    })
}

fn svd_matrix(mat: &Tensor) -> Result<(Mat<C64>, Vec<f64>, Mat<C64>)> {
    if !mat.is_finite() {
        return Err(Error::Numeric("non-finite entries in SVD input".into()));
    }
    let svd = as_mat(mat)
        .thin_svd()
        .map_err(|e| Error::Numeric(format!("SVD failed: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((svd.U().to_owned(), s, svd.V().to_owned()))
}

/// Thin QR of a rank-2 tensor: `m = q r` with `q` of shape `rows×r`,
/// `r` of shape `r×cols`, `r = min(rows, cols)`.
pub(crate) fn qr_thin(m: &Tensor) -> Result<(Tensor, Tensor)> {
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite entries in QR input".into()));
    }
    let qr = as_mat(m).qr();
    Ok((from_mat(qr.compute_thin_Q().as_ref()), from_mat(qr.thin_R())))
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending,
/// eigenvectors in the columns of the returned tensor.
pub(crate) fn eigh(m: &Tensor) -> Result<(Vec<f64>, Tensor)> {
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite entries in eigensolver input".into()));
    }
    let evd = as_mat(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigendecomposition failed: {e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, from_mat(evd.U())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: &[usize], seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor::from_fn(shape, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn permute_transposes_matrices() {
        let t = Tensor::new(vec![2, 3], (0..6).map(|i| c(i as f64)).collect()).unwrap();
        let p = t.permute(&[1, 0]).unwrap();
        assert_eq!(p.shape(), &[3, 2]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(p.get(&[j, i]), t.get(&[i, j]));
            }
        }
    }

    #[test]
    fn identity_permutation_is_noop() {
        let t = random(&[2, 3, 4], 1);
        assert_eq!(t.permute(&[0, 1, 2]).unwrap(), t);
    }

    #[test]
    fn permute_matches_indexed_loop() {
        let t = random(&[2, 3, 4], 2);
        let p = t.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.shape(), &[4, 2, 3]);
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..4 {
                    assert_eq!(p.get(&[k, i, j]), t.get(&[i, j, k]));
                }
            }
        }
    }

    #[test]
    fn permute_rejects_non_permutations() {
        let t = random(&[2, 3], 3);
        assert!(matches!(t.permute(&[0, 0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.permute(&[0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.permute(&[0, 2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn contract_identity_with_vector() {
        let alpha = C64::new(0.3, -0.2);
        let beta = C64::new(-0.1, 0.9);
        let v = Tensor::new(vec![2], vec![alpha, beta]).unwrap();
        let out = contract(&Tensor::eye(2), &v, &[(1, 0)]).unwrap();
        assert_eq!(out.data(), &[alpha, beta]);
    }

    #[test]
    fn contract_full_normalized_state_gives_one() {
        let mut v = random(&[2, 2, 2], 4);
        let n = v.norm();
        v.scale(c(1.0 / n));
        let out = contract(&v, &v.conj(), &[(0, 0), (1, 1), (2, 2)]).unwrap();
        assert_eq!(out.rank(), 0);
        assert!((out.data()[0] - ONE).norm() < 1e-14);
    }

    #[test]
    fn contract_matches_naive_triple_loop() {
        let a = random(&[3, 4], 5);
        let b = random(&[4, 5], 6);
        let out = contract(&a, &b, &[(1, 0)]).unwrap();
        for i in 0..3 {
            for j in 0..5 {
                let mut acc = ZERO;
                for k in 0..4 {
                    acc += a.get(&[i, k]) * b.get(&[k, j]);
                }
                assert!((out.get(&[i, j]) - acc).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn contract_keeps_free_axes_in_order() {
        let a = random(&[2, 3, 4], 7);
        let b = random(&[4, 5, 2], 8);
        let out = contract(&a, &b, &[(2, 0), (0, 2)]).unwrap();
        assert_eq!(out.shape(), &[3, 5]);
        let mut acc = ZERO;
        for i in 0..2 {
            for k in 0..4 {
                acc += a.get(&[i, 1, k]) * b.get(&[k, 3, i]);
            }
        }
        assert!((out.get(&[1, 3]) - acc).norm() < 1e-13);
    }

    #[test]
    fn contract_rejects_dimension_mismatch() {
        let a = random(&[2, 3], 9);
        let b = random(&[4, 2], 10);
        assert!(matches!(contract(&a, &b, &[(1, 0)]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn svd_of_diagonal() {
        let t = Tensor::new(vec![2, 2], vec![c(1.0), ZERO, ZERO, c(0.5)]).unwrap();
        let full = svd_truncate(&t, &[0], 2, DEFAULT_FLOOR).unwrap();
        assert_eq!(full.singular_values.len(), 2);
        assert!((full.singular_values[0] - 1.0).abs() < 1e-15);
        assert!((full.singular_values[1] - 0.5).abs() < 1e-15);
        assert_eq!(full.truncation_error, 0.0);

        let cut = svd_truncate(&t, &[0], 1, DEFAULT_FLOOR).unwrap();
        assert_eq!(cut.singular_values.len(), 1);
        assert!((cut.singular_values[0] - 1.0).abs() < 1e-15);
        let expected = 0.5 / 1.25f64.sqrt();
        assert!((cut.truncation_error - expected).abs() < 1e-15);
    }

    fn reconstruct(res: &SvdResult) -> Tensor {
        let mut left = res.left.clone();
        let last = left.rank() - 1;
        left.scale_axis(last, &res.singular_values);
        contract(&left, &res.right, &[(last, 0)]).unwrap()
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let t = random(&[8, 8], 11);
        let res = svd_truncate(&t, &[0], 8, 0.0).unwrap();
        assert!(reconstruct(&res).max_abs_diff(&t) <= 1e-12);
        assert_eq!(res.truncation_error, 0.0);
    }

    #[test]
    fn svd_factors_are_isometric() {
        let t = random(&[3, 2, 4], 12);
        let res = svd_truncate(&t, &[0, 2], 5, DEFAULT_FLOOR).unwrap();
        let k = res.singular_values.len();
        let ll = contract(&res.left.conj(), &res.left, &[(0, 0), (1, 1)]).unwrap();
        let rr = contract(&res.right, &res.right.conj(), &[(1, 1)]).unwrap();
        assert!(ll.max_abs_diff(&Tensor::eye(k)) < 1e-13);
        assert!(rr.max_abs_diff(&Tensor::eye(k)) < 1e-13);
        // left carries (axis0, axis2, k); right carries (k, axis1)
        assert_eq!(res.left.shape(), &[3, 4, k]);
        assert_eq!(res.right.shape(), &[k, 2]);
    }

    #[test]
    fn svd_truncation_error_matches_reconstruction() {
        let t = random(&[6, 6], 13);
        let res = svd_truncate(&t, &[0], 3, 0.0).unwrap();
        let err = reconstruct(&res);
        let mut diff = 0.0;
        for (a, b) in err.data().iter().zip(t.data()) {
            diff += (a - b).norm_sqr();
        }
        assert!((diff.sqrt() / t.norm() - res.truncation_error).abs() < 1e-12);
    }

    #[test]
    fn svd_floor_drops_null_directions() {
        // rank-1 outer product
        let u = random(&[4], 14);
        let v = random(&[5], 15);
        let t = Tensor::from_fn(&[4, 5], |i| u.get(&[i[0]]) * v.get(&[i[1]]));
        let res = svd_truncate(&t, &[0], 10, DEFAULT_FLOOR).unwrap();
        assert_eq!(res.singular_values.len(), 1);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut t = random(&[2, 2], 16);
        t.set(&[0, 1], C64::new(f64::NAN, 0.0));
        assert!(matches!(svd_truncate(&t, &[0], 2, 0.0), Err(Error::Numeric(_))));
    }

    #[test]
    fn qr_and_eigh_reconstruct() {
        let m = random(&[7, 3], 17);
        let (q, r) = qr_thin(&m).unwrap();
        assert_eq!(q.shape(), &[7, 3]);
        assert!(q.matmul(&r).unwrap().max_abs_diff(&m) < 1e-13);

        let h = m.adjoint().unwrap().matmul(&m).unwrap();
        let (vals, vecs) = eigh(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let mut scaled = vecs.clone();
        scaled.scale_axis(1, &vals);
        let back = scaled.matmul(&vecs.adjoint().unwrap()).unwrap();
        assert!(back.max_abs_diff(&h) < 1e-12);
    }

    fn shape_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..4, 1..5)
    }

    proptest! {
        #[test]
        fn permute_then_inverse_is_identity(shape in shape_strategy(), seed in any::<u64>(), rot in 0usize..4) {
            let t = random(&shape, seed);
            let rank = shape.len();
            let axes: Vec<usize> = (0..rank).map(|i| (i + rot) % rank).rev().collect();
            let mut inverse = vec![0; rank];
            for (i, &a) in axes.iter().enumerate() {
                inverse[a] = i;
            }
            let back = t.permute(&axes).unwrap().permute(&inverse).unwrap();
            prop_assert!(back.max_abs_diff(&t) <= 1e-15);
        }

        #[test]
        fn singular_values_carry_frobenius_weight(rows in 1usize..7, cols in 1usize..7, seed in any::<u64>()) {
            let t = random(&[rows, cols], seed);
            let res = svd_truncate(&t, &[0], usize::MAX, 0.0).unwrap();
            let s2: f64 = res.singular_values.iter().map(|s| s * s).sum();
            let f2 = t.norm().powi(2);
            prop_assert!((s2 - f2).abs() <= 1e-12 * f2);
            prop_assert!(res.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn contract_is_bilinear(seed in any::<u64>(), alpha in -2.0f64..2.0) {
            let a1 = random(&[2, 3], seed);
            let a2 = random(&[2, 3], seed ^ 0x5555);
            let b = random(&[3, 2], seed ^ 0xaaaa);
            let mut combo = a2.clone();
            combo.scale(c(alpha));
            let sum = Tensor::new(vec![2, 3], a1.data().iter().zip(combo.data()).map(|(x, y)| x + y).collect()).unwrap();
            let lhs = contract(&sum, &b, &[(1, 0)]).unwrap();
            let r1 = contract(&a1, &b, &[(1, 0)]).unwrap();
            let mut r2 = contract(&a2, &b, &[(1, 0)]).unwrap();
            r2.scale(c(alpha));
            let rhs = Tensor::new(vec![2, 2], r1.data().iter().zip(r2.data()).map(|(x, y)| x + y).collect()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}
