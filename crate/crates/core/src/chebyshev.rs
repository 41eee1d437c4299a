//! Chebyshev polynomial kernels: node grids, recurrence evaluation, FFT-based
//! coefficient transforms in one and n dimensions, derivative coefficients and
//! the weighted inner product the reduced-basis procedure is built on.
//!
//! Conventions: nodes are the extrema grid in descending order (`k = 0` maps
//! to the upper bound), and every nodal value sequence is ordered by node
//! index, matching the even-extension layout of the coefficient transform.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::NdArray;

/// Coefficients `p_0..p_N` of a univariate Chebyshev series.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries1D {
    pub coeffs: Vec<f64>,
}

impl ChebSeries1D {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension(
                "a Chebyshev series needs at least one coefficient".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw evaluation at a reference coordinate.
    pub fn eval_at(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &ck in c.iter().skip(1).rev() {
            let b = ck + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b;
        }
        c[0] + x * b1 - b2
    }

    pub fn weighted_dot(&self, other: &ChebSeries1D) -> Result<f64> {
        weighted_dot_1d(&self.coeffs, &other.coeffs)
    }
}

/// Chebyshev extrema grid on `[a, b]`, descending (`nodes[0] = b`).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeGrid1D {
    bounds: (f64, f64),
    nodes: Vec<f64>,
}

impl NodeGrid1D {
    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// The `N+1` mapped Chebyshev extrema on `[a, b]`, descending.
pub fn nodes(n: usize, a: f64, b: f64) -> Result<NodeGrid1D> {
    if n == 0 {
        return Err(Error::Domain("node count N must be >= 1".into()));
    }
    if !(a < b) {
        return Err(Error::Domain(format!(
            "invalid interval [{a}, {b}]: lower bound must be below upper"
        )));
    }
    let nodes = (0..=n)
        .map(|k| {
            let c = reference_node(k, n);
            0.5 * (c * (b - a) + (b + a))
        })
        .collect();
    Ok(NodeGrid1D {
        bounds: (a, b),
        nodes,
    })
}

/// `cos(pi k / N)` written in sine form so the grid is exactly antisymmetric
/// about the midpoint (`k` and `N-k` give exact negatives, midpoint gives 0).
pub(crate) fn reference_node(k: usize, n: usize) -> f64 {
    let num = n as i64 - 2 * k as i64;
    (PI * num as f64 / (2 * n) as f64).sin()
}

/// Matrix `T_l(x_k)` for `l = 0..=degree_max` (rows) over the given points
/// (columns), by the three-term recurrence.
pub fn cheb_poly_values(degree_max: usize, points: &[f64]) -> Result<NdArray> {
    for &x in points {
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&x) {
            return Err(Error::Domain(format!(
                "point {x} outside the reference interval [-1, 1]"
            )));
        }
    }
    let q = points.len();
    let rows = degree_max + 1;
    let mut data = vec![0.0; rows * q];
    for (k, &x) in points.iter().enumerate() {
        data[k] = 1.0;
        if rows > 1 {
            data[q + k] = x;
        }
        for l in 2..rows {
            data[l * q + k] = 2.0 * x * data[(l - 1) * q + k] - data[(l - 2) * q + k];
        }
    }
    NdArray::new(vec![rows, q], data)
}

struct Transform1D {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Transform1D {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * n);
        Self { n, fft }
    }

    /// Nodal values (by node index) to series coefficients via the real even
    /// extension of length 2N and one forward FFT.
    fn apply(&self, values: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut z: Vec<Complex<f64>> = Vec::with_capacity(2 * n);
        z.extend(values.iter().map(|&v| Complex::new(v, 0.0)));
        z.extend(values[1..n].iter().rev().map(|&v| Complex::new(v, 0.0)));
        self.fft.process(&mut z);
        let scale = 1.0 / (2 * n) as f64;
        out[0] = z[0].re * scale;
        for l in 1..n {
            out[l] = (z[l].re + z[2 * n - l].re) * scale;
        }
        // The trailing coefficient is y_N of the 0-based FFT output; the
        // generate-then-recover tests pin this index down.
        out[n] = z[n].re * scale;
    }
}

/// Interpolation coefficients from the `N+1` values at the descending node
/// grid, so that `sum_l p_l T_l(x_k)` reproduces every input.
pub fn coeffs_1d(values_at_nodes: &[f64]) -> Result<ChebSeries1D> {
    if values_at_nodes.len() < 2 {
        return Err(Error::Domain(
            "coefficient transform needs at least 2 nodal values".into(),
        ));
    }
    let n = values_at_nodes.len() - 1;
    let plan = Transform1D::new(n);
    let mut out = vec![0.0; n + 1];
    plan.apply(values_at_nodes, &mut out);
    ChebSeries1D::new(out)
}

/// Applies the 1-d coefficient transform along the leading axis of a tensor
/// of nodal values, leaving the other axes untouched.
pub(crate) fn coeffs_leading_axis(values: &NdArray) -> Result<NdArray> {
    let s = values.extents()[0];
    if s < 2 {
        return Err(Error::Domain(format!(
            "leading axis needs >= 2 nodal values, got extents {:?}",
            values.extents()
        )));
    }
    let rest: usize = values.extents()[1..].iter().product();
    let plan = Transform1D::new(s - 1);
    let mut out = values.clone();
    let mut column = vec![0.0; s];
    let mut transformed = vec![0.0; s];
    let data = out.data_mut();
    for j in 0..rest {
        for i in 0..s {
            column[i] = data[i * rest + j];
        }
        plan.apply(&column, &mut transformed);
        for i in 0..s {
            data[i * rest + j] = transformed[i];
        }
    }
    Ok(out)
}

/// n-dimensional coefficient tensor from values on the full node grid:
/// one 1-d transform sweep along the leading axis per dimension, each
/// followed by a cyclic axis rotation.
pub fn coeffs_nd(values: &NdArray) -> Result<NdArray> {
    if values.extents().iter().any(|&e| e < 2) {
        return Err(Error::Domain(format!(
            "every axis needs >= 2 nodal values, got extents {:?}",
            values.extents()
        )));
    }
    if values.ndim() == 1 {
        return coeffs_leading_axis(values);
    }
    let mut b = values.clone();
    for _ in 0..values.ndim() {
        b = coeffs_leading_axis(&b)?.permute_cycle()?;
    }
    Ok(b)
}

/// Series coefficients of the derivative: for `l = 0..N-1`,
/// `q_l = (2/c_l) * sum_{j > l, j+l odd} j p_j` with `c_0 = 2`, `c_l = 1`.
/// The mapped-domain factor `2/(b-a)` is the caller's.
pub fn derivative_coeffs(s: &ChebSeries1D) -> Result<ChebSeries1D> {
    let p = &s.coeffs;
    if p.len() < 2 {
        return Err(Error::Domain(
            "derivative needs a series of degree >= 1".into(),
        ));
    }
    let n = p.len() - 1;
    let mut q = vec![0.0; n];
    for (l, ql) in q.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut j = l + 1;
        while j <= n {
            acc += j as f64 * p[j];
            j += 2;
        }
        let c = if l == 0 { 2.0 } else { 1.0 };
        *ql = 2.0 / c * acc;
    }
    ChebSeries1D::new(q)
}

fn axis_weight(l: usize) -> f64 {
    if l == 0 {
        PI
    } else {
        PI / 2.0
    }
}

/// Flat per-element weight vector for a coefficient tensor of the given
/// extents: the product over axes of `pi` (index 0) or `pi/2` (index >= 1).
pub(crate) fn weight_vector(extents: &[usize]) -> Vec<f64> {
    let mut w = vec![1.0];
    for &e in extents {
        let mut next = Vec::with_capacity(w.len() * e);
        for &base in &w {
            for l in 0..e {
                next.push(base * axis_weight(l));
            }
        }
        w = next;
    }
    w
}

/// Weighted inner product of two coefficient tensors, exact by Chebyshev
/// orthogonality: `sum_l w_l a_l b_l` with the per-axis weights above.
pub fn weighted_dot(a: &NdArray, b: &NdArray) -> Result<f64> {
    if a.extents() != b.extents() {
        return Err(Error::Dimension(format!(
            "weighted_dot extents differ: {:?} vs {:?}",
            a.extents(),
            b.extents()
        )));
    }
    let w = weight_vector(a.extents());
    Ok(a.data()
        .iter()
        .zip(b.data())
        .zip(&w)
        .map(|((x, y), wi)| wi * x * y)
        .sum())
}

/// 1-d convenience wrapper over [`weighted_dot`].
pub fn weighted_dot_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "weighted_dot lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .enumerate()
        .map(|(l, (x, y))| axis_weight(l) * x * y)
        .sum())
}

/// Gauss-Lobatto-Chebyshev quadrature of nodal values:
/// `(pi/N) [H_0/2 + H_1 + .. + H_{N-1} + H_N/2]`.
pub fn glc_quadrature(values_at_nodes: &[f64]) -> Result<f64> {
    if values_at_nodes.len() < 2 {
        return Err(Error::Domain(
            "quadrature needs at least 2 nodal values".into(),
        ));
    }
    let n = values_at_nodes.len() - 1;
    let mut sum = 0.5 * (values_at_nodes[0] + values_at_nodes[n]);
    sum += values_at_nodes[1..n].iter().sum::<f64>();
    Ok(PI / n as f64 * sum)
}
