//! Dense n-dimensional arrays and the axis-contraction kernels behind all
//! evaluation paths.
//!
//! Storage is row-major (last axis fastest) 64-bit floats. The two contraction
//! operators reduce to GEMM-shaped loops over contiguous slices: a leading-axis
//! contraction that appends the new axis last, and a batched form that
//! contracts the trailing matrix of each batch block.

use crate::error::{Error, Result};

/// Dense n-dimensional array of `f64`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NdArray {
    extents: Vec<usize>,
    data: Vec<f64>,
}

impl NdArray {
    /// Wraps `data` with the given per-axis sizes.
    pub fn new(extents: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if extents.contains(&0) {
            return Err(Error::Dimension(format!(
                "all axis sizes must be >= 1, got {extents:?}"
            )));
        }
        let expected: usize = extents.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "extents {extents:?} imply {expected} elements but data has {}",
                data.len()
            )));
        }
        Ok(Self { extents, data })
    }

    /// All-zero array with the given extents.
    pub fn zeros(extents: Vec<usize>) -> Self {
        let len = extents.iter().product();
        Self {
            extents,
            data: vec![0.0; len],
        }
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn ndim(&self) -> usize {
        self.extents.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat offset of a multi-index.
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.extents.len());
        let mut flat = 0;
        for (i, &k) in idx.iter().enumerate() {
            debug_assert!(k < self.extents[i]);
            flat = flat * self.extents[i] + k;
        }
        flat
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// Rotates axes left by one: `D(j_1,..,j_m,i) = a(i,j_1,..,j_m)`.
    ///
    /// The leading axis moves to the back; all other axes keep their order.
    pub fn permute_cycle(&self) -> Result<NdArray> {
        if self.ndim() < 2 {
            return Err(Error::Dimension(format!(
                "permute_cycle needs >= 2 axes, got {}",
                self.ndim()
            )));
        }
        let lead = self.extents[0];
        let rest: usize = self.extents[1..].iter().product();
        let mut out = vec![0.0; self.data.len()];
        // Transpose of the (lead x rest) matrix view.
        for i in 0..lead {
            let row = &self.data[i * rest..(i + 1) * rest];
            for (j, &v) in row.iter().enumerate() {
                out[j * lead + i] = v;
            }
        }
        let mut extents = self.extents[1..].to_vec();
        extents.push(lead);
        NdArray::new(extents, out)
    }

    /// Leading-axis contraction: for `a` of extents `[s, n_1..n_k]` and `b` of
    /// extents `[s, t]`, returns `C` of extents `[n_1..n_k, t]` with
    /// `C(j_1..j_k, :) = b' * a(:, j_1..j_k)`.
    pub fn tensor_contract(&self, b: &NdArray) -> Result<NdArray> {
        if b.ndim() != 2 {
            return Err(Error::Dimension(format!(
                "contraction matrix must be 2-d, got {} axes",
                b.ndim()
            )));
        }
        if self.ndim() < 1 || self.extents[0] != b.extents[0] {
            return Err(Error::Dimension(format!(
                "leading extents differ: {:?} vs {:?}",
                self.extents, b.extents
            )));
        }
        let s = self.extents[0];
        let t = b.extents[1];
        let rest: usize = self.extents[1..].iter().product();
        let mut out = vec![0.0; rest * t];
        for i in 0..s {
            let arow = &self.data[i * rest..(i + 1) * rest];
            let brow = &b.data[i * t..(i + 1) * t];
            for (j, &av) in arow.iter().enumerate() {
                let crow = &mut out[j * t..(j + 1) * t];
                for (cv, &bv) in crow.iter_mut().zip(brow) {
                    *cv += av * bv;
                }
            }
        }
        let mut extents = self.extents[1..].to_vec();
        extents.push(t);
        NdArray::new(extents, out)
    }

    /// Batched contraction: for `a` of extents `[m_1..m_{k-1}, m_k, t]` and
    /// `b` of extents `[m_1..m_{k-1}, m_k, b_1..b_s]`, returns `C` of extents
    /// `[m_1..m_{k-1}, t, b_1..b_s]` with, per batch block,
    /// `C(.., :, ..) = a(.., :, :)' * b(.., :, ..)`.
    pub fn tensor_contract_batched(&self, b: &NdArray) -> Result<NdArray> {
        if self.ndim() < 2 {
            return Err(Error::Dimension(format!(
                "batched contraction needs >= 2 axes on the left, got {}",
                self.ndim()
            )));
        }
        let k = self.ndim() - 1;
        if b.ndim() < k + 1 {
            return Err(Error::Dimension(format!(
                "right operand needs >= {} axes, got {}",
                k + 1,
                b.ndim()
            )));
        }
        if self.extents[..k] != b.extents[..k] {
            return Err(Error::Dimension(format!(
                "shared axes differ: {:?} vs {:?}",
                &self.extents[..k],
                &b.extents[..k]
            )));
        }
        let batch: usize = self.extents[..k - 1].iter().product();
        let m = self.extents[k - 1];
        let t = self.extents[k];
        let cols: usize = b.extents[k..].iter().product();
        let mut out = vec![0.0; batch * t * cols];
        for p in 0..batch {
            let ablock = &self.data[p * m * t..(p + 1) * m * t];
            let bblock = &b.data[p * m * cols..(p + 1) * m * cols];
            let cblock = &mut out[p * t * cols..(p + 1) * t * cols];
            // C = A' * B with A (m x t), B (m x cols), all row-major.
            for i in 0..m {
                let arow = &ablock[i * t..(i + 1) * t];
                let brow = &bblock[i * cols..(i + 1) * cols];
                for (tau, &av) in arow.iter().enumerate() {
                    let crow = &mut cblock[tau * cols..(tau + 1) * cols];
                    for (cv, &bv) in crow.iter_mut().zip(brow) {
                        *cv += av * bv;
                    }
                }
            }
        }
        let mut extents = self.extents[..k - 1].to_vec();
        extents.push(t);
        extents.extend_from_slice(&b.extents[k..]);
        NdArray::new(extents, out)
    }

    /// Contracts the last axis with the leading axis of a 2-d matrix:
    /// `C(.., tau) = sum_l a(.., l) m(l, tau)`.
    pub fn contract_last(&self, m: &NdArray) -> Result<NdArray> {
        if m.ndim() != 2 {
            return Err(Error::Dimension(format!(
                "contraction matrix must be 2-d, got {} axes",
                m.ndim()
            )));
        }
        let n = self.ndim();
        if n < 1 || self.extents[n - 1] != m.extents[0] {
            return Err(Error::Dimension(format!(
                "trailing extent {:?} does not match matrix rows {:?}",
                self.extents, m.extents
            )));
        }
        let l = m.extents[0];
        let t = m.extents[1];
        let rows = self.data.len() / l;
        let mut out = vec![0.0; rows * t];
        for j in 0..rows {
            let arow = &self.data[j * l..(j + 1) * l];
            let crow = &mut out[j * t..(j + 1) * t];
            for (i, &av) in arow.iter().enumerate() {
                let mrow = &m.data[i * t..(i + 1) * t];
                for (cv, &mv) in crow.iter_mut().zip(mrow) {
                    *cv += av * mv;
                }
            }
        }
        let mut extents = self.extents[..n - 1].to_vec();
        extents.push(t);
        NdArray::new(extents, out)
    }

    /// Moves the last axis to position `pos`, shifting later axes right.
    pub fn move_last_axis_to(&self, pos: usize) -> Result<NdArray> {
        let n = self.ndim();
        if pos >= n {
            return Err(Error::Dimension(format!(
                "axis position {pos} out of range for {n} axes"
            )));
        }
        if pos == n - 1 {
            return Ok(self.clone());
        }
        let last = self.extents[n - 1];
        // Block over the axes that end up after the moved one.
        let mid: usize = self.extents[pos..n - 1].iter().product();
        let outer: usize = self.extents[..pos].iter().product();
        let mut out = vec![0.0; self.data.len()];
        for o in 0..outer {
            let src = &self.data[o * mid * last..(o + 1) * mid * last];
            let dst = &mut out[o * mid * last..(o + 1) * mid * last];
            for j in 0..mid {
                for i in 0..last {
                    dst[i * mid + j] = src[j * last + i];
                }
            }
        }
        let mut extents = self.extents[..pos].to_vec();
        extents.push(last);
        extents.extend_from_slice(&self.extents[pos..n - 1]);
        NdArray::new(extents, out)
    }
}

/// Iterates all multi-indices of the given extents in row-major order.
pub fn for_each_index(extents: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; extents.len()];
    let total: usize = extents.iter().product();
    for _ in 0..total {
        f(&idx);
        for d in (0..extents.len()).rev() {
            idx[d] += 1;
            if idx[d] < extents[d] {
                break;
            }
            idx[d] = 0;
        }
    }
}
