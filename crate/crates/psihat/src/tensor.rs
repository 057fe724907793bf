//! Dense complex tensors with row-major storage: leg permutation, per-leg
//! matrix action and pairwise contraction through matrix multiplication.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::matrix::CMat;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Advances a multi-index in row-major order; returns false after the last one.
fn next_index(idx: &mut [usize], dims: &[usize]) -> bool {
    for p in (0..idx.len()).rev() {
        idx[p] += 1;
        if idx[p] < dims[p] {
            return true;
        }
        idx[p] = 0;
    }
    false
}

impl Tensor {
    pub fn zeros(dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), data: vec![Complex64::zero(); dims.iter().product()] }
    }

    pub fn scalar(z: Complex64) -> Self {
        Self { dims: Vec::new(), data: vec![z] }
    }

    pub fn from_vec(dims: &[usize], data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dims.iter().product::<usize>(), "data length does not match shape");
        Self { dims: dims.to_vec(), data }
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        let mut idx = vec![0; dims.len()];
        if dims.iter().all(|&d| d > 0) {
            loop {
                data.push(f(&idx));
                if !next_index(&mut idx, dims) {
                    break;
                }
            }
        }
        Self { dims: dims.to_vec(), data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0;
        for (i, (&x, &d)) in idx.iter().zip(&self.dims).enumerate() {
            debug_assert!(x < d, "index {x} out of range on leg {i}");
            off = off * d + x;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], z: Complex64) {
        let o = self.offset(idx);
        self.data[o] = z;
    }

    /// The value of a rank-0 tensor.
    pub fn value(&self) -> Complex64 {
        assert!(self.dims.is_empty(), "value() on a tensor of rank {}", self.rank());
        self.data[0]
    }

    /// Moves leg `i` to position `sigma[i]`.
    pub fn permute(&self, sigma: &[usize]) -> Tensor {
        let r = self.rank();
        assert_eq!(sigma.len(), r, "permutation length must equal the rank");
        let mut seen = vec![false; r];
        for &s in sigma {
            assert!(s < r && !seen[s], "not a permutation");
            seen[s] = true;
        }
        let mut dims = vec![0; r];
        for i in 0..r {
            dims[sigma[i]] = self.dims[i];
        }
        let out_strides = strides(&dims);
        let mut data = vec![Complex64::zero(); self.data.len()];
        let mut idx = vec![0; r];
        if self.data.is_empty() {
            return Tensor { dims, data };
        }
        let mut k = 0;
        loop {
            let mut off = 0;
            for i in 0..r {
                off += idx[i] * out_strides[sigma[i]];
            }
            data[off] = self.data[k];
            k += 1;
            if !next_index(&mut idx, &self.dims) {
                break;
            }
        }
        Tensor { dims, data }
    }

    /// `new[.., b, ..] = sum_a m[b, a] old[.., a, ..]` on leg `leg`.
    pub fn apply(&self, leg: usize, m: &CMat) -> Tensor {
        self.apply_impl(leg, m, false)
    }

    /// `new[.., b, ..] = sum_a m[a, b] old[.., a, ..]` on leg `leg`.
    pub fn apply_transposed(&self, leg: usize, m: &CMat) -> Tensor {
        self.apply_impl(leg, m, true)
    }

    fn apply_impl(&self, leg: usize, m: &CMat, transposed: bool) -> Tensor {
        let d = self.dims[leg];
        let (rows, cols) = if transposed { (m.ncols(), m.nrows()) } else { (m.nrows(), m.ncols()) };
        assert_eq!(cols, d, "matrix does not act on leg {leg}");
        let outer: usize = self.dims[..leg].iter().product();
        let inner: usize = self.dims[leg + 1..].iter().product();
        let mut dims = self.dims.clone();
        dims[leg] = rows;
        let mut data = vec![Complex64::zero(); outer * rows * inner];
        for o in 0..outer {
            for b in 0..rows {
                for a in 0..d {
                    let coef = if transposed { m[(a, b)] } else { m[(b, a)] };
                    if coef.is_zero() {
                        continue;
                    }
                    let src = (o * d + a) * inner;
                    let dst = (o * rows + b) * inner;
                    for t in 0..inner {
                        data[dst + t] += coef * self.data[src + t];
                    }
                }
            }
        }
        Tensor { dims, data }
    }

    /// Contracts leg `p.0` of `self` with leg `p.1` of `other` for each pair.
    /// The result carries the free legs of `self` in order, then those of `other`.
    pub fn contract(&self, other: &Tensor, pairs: &[(usize, usize)]) -> Tensor {
        let (ra, rb) = (self.rank(), other.rank());
        for &(a, b) in pairs {
            assert_eq!(self.dims[a], other.dims[b], "contracted legs differ in dimension");
        }
        let ca: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let cb: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let fa: Vec<usize> = (0..ra).filter(|i| !ca.contains(i)).collect();
        let fb: Vec<usize> = (0..rb).filter(|i| !cb.contains(i)).collect();
        // Bring self to [free.., contracted..] and other to [contracted.., free..].
        let mut sa = vec![0; ra];
        for (pos, &l) in fa.iter().chain(&ca).enumerate() {
            sa[l] = pos;
        }
        let mut sb = vec![0; rb];
        for (pos, &l) in cb.iter().chain(&fb).enumerate() {
            sb[l] = pos;
        }
        let a = self.permute(&sa);
        let b = other.permute(&sb);
        let m: usize = fa.iter().map(|&l| self.dims[l]).product();
        let k: usize = ca.iter().map(|&l| self.dims[l]).product();
        let n: usize = fb.iter().map(|&l| other.dims[l]).product();
        // Row-major data of an (m x k) matrix is the column-major data of its transpose.
        let am = CMat::from_column_slice(k, m, &a.data);
        let bm = CMat::from_column_slice(n, k, &b.data);
        let cm = bm * am; // (n x m) column-major == (m x n) row-major
        let dims: Vec<usize> =
            fa.iter().map(|&l| self.dims[l]).chain(fb.iter().map(|&l| other.dims[l])).collect();
        Tensor { dims, data: cm.as_slice().to_vec() }
    }

    pub fn scale(&self, s: Complex64) -> Tensor {
        Tensor { dims: self.dims.clone(), data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|self - other| / max(1, |other|)` in the Frobenius norm.
    pub fn residual(&self, other: &Tensor) -> f64 {
        assert_eq!(self.dims, other.dims, "residual of tensors with different shapes");
        let diff: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        diff / other.frob().max(1.0)
    }
}
