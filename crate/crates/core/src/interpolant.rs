//! Tensor-product Chebyshev interpolants over box domains: construction from
//! an oracle, tensorial evaluation on product grids, pointwise evaluation,
//! finite-difference partials and slice-split storage for oversized tensors.

use rayon::prelude::*;

use crate::chebyshev::{self, cheb_poly_values, coeffs_1d, coeffs_nd, NodeGrid1D};
use crate::error::{Error, Result};
use crate::tensor::NdArray;

/// Default finite-difference step in reference coordinates.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Per-dimension closed bounds of the interpolation box.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Dimension(
                "domain needs at least one dimension".into(),
            ));
        }
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Domain(format!(
                    "dimension {d}: invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn slack(&self, dim: usize) -> f64 {
        let (lo, hi) = self.bounds[dim];
        1e-12 * (hi - lo).max(1.0)
    }

    /// Maps one physical coordinate to `[-1, 1]`.
    pub fn to_reference_coord(&self, dim: usize, value: f64) -> Result<f64> {
        let (lo, hi) = self.bounds[dim];
        let tol = self.slack(dim);
        if !(value >= lo - tol && value <= hi + tol) {
            return Err(Error::Domain(format!(
                "dimension {dim}: value {value} outside [{lo}, {hi}]"
            )));
        }
        let x = (2.0 * value - (hi + lo)) / (hi - lo);
        Ok(x.clamp(-1.0, 1.0))
    }

    /// Maps a physical point to the reference box, checking bounds.
    pub fn to_reference(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, domain has {}",
                point.len(),
                self.dim()
            )));
        }
        point
            .iter()
            .enumerate()
            .map(|(d, &v)| self.to_reference_coord(d, v))
            .collect()
    }

    /// Inverse map from `[-1, 1]^n` to the physical box.
    pub fn from_reference(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.bounds)
            .map(|(&xi, &(lo, hi))| 0.5 * (xi * (hi - lo) + (hi + lo)))
            .collect()
    }
}

/// Per-dimension value lists defining a product evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGrid {
    axes: Vec<Vec<f64>>,
}

impl ProductGrid {
    pub fn new(axes: Vec<Vec<f64>>, domain: &Domain) -> Result<Self> {
        if axes.len() != domain.dim() {
            return Err(Error::Dimension(format!(
                "grid has {} axes, domain has {}",
                axes.len(),
                domain.dim()
            )));
        }
        for (d, vals) in axes.iter().enumerate() {
            if vals.is_empty() {
                return Err(Error::Dimension(format!("dimension {d}: empty value list")));
            }
            for &v in vals {
                domain.to_reference_coord(d, v)?;
            }
        }
        Ok(Self { axes })
    }

    pub fn singleton(point: &[f64], domain: &Domain) -> Result<Self> {
        Self::new(point.iter().map(|&v| vec![v]).collect(), domain)
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn extents(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn total_points(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    /// Physical coordinates of the grid point with the given multi-index.
    pub fn point_at(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&k, axis)| axis[k])
            .collect()
    }
}

/// Pointwise evaluation shared by the full and reduced representations.
pub trait ChebEval {
    fn domain(&self) -> &Domain;

    /// Evaluates at a point already mapped to `[-1, 1]^n`.
    fn eval_reference(&self, x: &[f64]) -> Result<f64>;

    /// Evaluates at a physical point, checking bounds.
    fn eval_point(&self, point: &[f64]) -> Result<f64> {
        let x = self.domain().to_reference(point)?;
        self.eval_reference(&x)
    }
}

/// Product-grid evaluation shared by the full and reduced representations.
pub trait GridEval {
    fn eval_grid(&self, grid: &ProductGrid) -> Result<NdArray>;
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Full(NdArray),
    Split { axis: usize, slices: Vec<NdArray> },
}

/// A tensor-product Chebyshev interpolant over a box domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    domain: Domain,
    degrees: Vec<usize>,
    repr: Repr,
}

/// Folds a coefficient tensor with per-axis Chebyshev value matrices, one
/// leading-axis contraction per dimension in fixed left-to-right order.
fn fold_reference(coeffs: &NdArray, ref_axes: &[Vec<f64>]) -> Result<NdArray> {
    let mut out: Option<NdArray> = None;
    for vals in ref_axes {
        let current = out.as_ref().unwrap_or(coeffs);
        let t = cheb_poly_values(current.extents()[0] - 1, vals)?;
        out = Some(current.tensor_contract(&t)?);
    }
    Ok(out.unwrap_or_else(|| coeffs.clone()))
}

fn eval_reference_full(coeffs: &NdArray, x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Ok(coeffs.data()[0]);
    }
    let axes: Vec<Vec<f64>> = x.iter().map(|&xi| vec![xi]).collect();
    Ok(fold_reference(coeffs, &axes)?.data()[0])
}

impl Interpolant {
    /// Wraps an existing coefficient tensor.
    pub fn from_coeffs(domain: Domain, coeffs: NdArray) -> Result<Self> {
        if coeffs.ndim() != domain.dim() {
            return Err(Error::Dimension(format!(
                "coefficient tensor has {} axes, domain has {}",
                coeffs.ndim(),
                domain.dim()
            )));
        }
        if coeffs.extents().iter().any(|&e| e < 2) {
            return Err(Error::Dimension(format!(
                "coefficient extents must all be >= 2, got {:?}",
                coeffs.extents()
            )));
        }
        let degrees = coeffs.extents().iter().map(|&e| e - 1).collect();
        Ok(Self {
            domain,
            degrees,
            repr: Repr::Full(coeffs),
        })
    }

    /// Reassembles an interpolant from split parts.
    pub fn from_split_parts(
        domain: Domain,
        degrees: Vec<usize>,
        axis: usize,
        slices: Vec<NdArray>,
    ) -> Result<Self> {
        if degrees.len() != domain.dim() || axis >= degrees.len() {
            return Err(Error::Dimension(
                "split axis or degree list inconsistent with domain".into(),
            ));
        }
        if slices.len() != degrees[axis] + 1 {
            return Err(Error::Dimension(format!(
                "expected {} slices along axis {axis}, got {}",
                degrees[axis] + 1,
                slices.len()
            )));
        }
        let want: Vec<usize> = degrees
            .iter()
            .enumerate()
            .filter(|&(d, _)| d != axis)
            .map(|(_, &n)| n + 1)
            .collect();
        for s in &slices {
            if s.extents() != want.as_slice() {
                return Err(Error::Dimension(format!(
                    "slice extents {:?} do not match remaining dimensions {want:?}",
                    s.extents()
                )));
            }
        }
        Ok(Self {
            domain,
            degrees,
            repr: Repr::Split { axis, slices },
        })
    }

    /// Builds the interpolant of `oracle` by evaluating it at every tensor
    /// node. The oracle receives the flat row-major node index (for per-node
    /// seeding) and the physical coordinates; calls are dispatched to the
    /// rayon pool and assembled in index order.
    pub fn build<F>(oracle: F, domain: &Domain, degrees: &[usize]) -> Result<Self>
    where
        F: Fn(usize, &[f64]) -> Result<f64> + Sync,
    {
        if degrees.len() != domain.dim() {
            return Err(Error::Dimension(format!(
                "{} degrees for a {}-dimensional domain",
                degrees.len(),
                domain.dim()
            )));
        }
        if degrees.contains(&0) {
            return Err(Error::Domain("all degrees must be >= 1".into()));
        }
        let grids: Vec<NodeGrid1D> = degrees
            .iter()
            .zip(domain.bounds())
            .map(|(&n, &(lo, hi))| chebyshev::nodes(n, lo, hi))
            .collect::<Result<_>>()?;
        let extents: Vec<usize> = degrees.iter().map(|&n| n + 1).collect();
        let total: usize = extents.iter().product();
        let values: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut rem = flat;
                let mut coords = vec![0.0; extents.len()];
                for d in (0..extents.len()).rev() {
                    coords[d] = grids[d].nodes()[rem % extents[d]];
                    rem /= extents[d];
                }
                oracle(flat, &coords).map_err(|e| Error::Oracle {
                    node_index: flat,
                    node: coords,
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        let coeffs = coeffs_nd(&NdArray::new(extents, values)?)?;
        Self::from_coeffs(domain.clone(), coeffs)
    }

    /// [`Interpolant::build`] for pure deterministic oracles.
    pub fn build_fn<F>(oracle: F, domain: &Domain, degrees: &[usize]) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::build(|_, coords| Ok(oracle(coords)), domain, degrees)
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The coefficient tensor, absent on split interpolants.
    pub fn coeffs(&self) -> Option<&NdArray> {
        match &self.repr {
            Repr::Full(c) => Some(c),
            Repr::Split { .. } => None,
        }
    }

    pub fn split_parts(&self) -> Option<(usize, &[NdArray])> {
        match &self.repr {
            Repr::Full(_) => None,
            Repr::Split { axis, slices } => Some((*axis, slices)),
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self.repr, Repr::Split { .. })
    }

    /// Physical node lists per dimension.
    pub fn node_axes(&self) -> Result<Vec<Vec<f64>>> {
        self.degrees
            .iter()
            .zip(self.domain.bounds())
            .map(|(&n, &(lo, hi))| Ok(chebyshev::nodes(n, lo, hi)?.nodes().to_vec()))
            .collect()
    }

    /// The tensor node grid as a product grid.
    pub fn node_grid(&self) -> Result<ProductGrid> {
        ProductGrid::new(self.node_axes()?, &self.domain)
    }

    fn reference_axes(&self, grid: &ProductGrid) -> Result<Vec<Vec<f64>>> {
        if grid.axes().len() != self.dim() {
            return Err(Error::Dimension(format!(
                "grid has {} axes, interpolant has {}",
                grid.axes().len(),
                self.dim()
            )));
        }
        grid.axes()
            .iter()
            .enumerate()
            .map(|(d, vals)| {
                vals.iter()
                    .map(|&v| self.domain.to_reference_coord(d, v))
                    .collect()
            })
            .collect()
    }

    /// Decomposes the coefficient tensor into one slice interpolant per
    /// Chebyshev node of `axis`, replacing the monolithic tensor.
    pub fn split(self, axis: usize) -> Result<Self> {
        let n = self.dim();
        if axis >= n {
            return Err(Error::Dimension(format!(
                "split axis {axis} out of range for {n} dimensions"
            )));
        }
        let coeffs = match self.repr {
            Repr::Full(c) => c,
            Repr::Split { .. } => return Err(Error::Domain("interpolant is already split".into())),
        };
        let mut rot = coeffs;
        for _ in 0..axis {
            rot = rot.permute_cycle()?;
        }
        let n_axis = self.degrees[axis];
        let ref_nodes: Vec<f64> = (0..=n_axis)
            .map(|k| chebyshev::reference_node(k, n_axis))
            .collect();
        let tmat = cheb_poly_values(n_axis, &ref_nodes)?;
        let contracted = rot.tensor_contract(&tmat)?;
        let rest_extents = contracted.extents()[..contracted.ndim() - 1].to_vec();
        let rest_size: usize = rest_extents.iter().product();
        let mut slices = Vec::with_capacity(n_axis + 1);
        for k in 0..=n_axis {
            let data: Vec<f64> = (0..rest_size)
                .map(|j| contracted.data()[j * (n_axis + 1) + k])
                .collect();
            let mut s = NdArray::new(rest_extents.clone(), data)?;
            if s.ndim() >= 2 {
                // restore the remaining axes to their original relative order
                for _ in 0..(n - 1 - axis) % s.ndim() {
                    s = s.permute_cycle()?;
                }
            }
            slices.push(s);
        }
        Ok(Self {
            domain: self.domain,
            degrees: self.degrees,
            repr: Repr::Split { axis, slices },
        })
    }
}

impl ChebEval for Interpolant {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn eval_reference(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, interpolant has {}",
                x.len(),
                self.dim()
            )));
        }
        match &self.repr {
            Repr::Full(c) => eval_reference_full(c, x),
            Repr::Split { axis, slices } => {
                let rest: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .filter(|&(d, _)| d != *axis)
                    .map(|(_, &v)| v)
                    .collect();
                let nodal: Vec<f64> = slices
                    .iter()
                    .map(|s| eval_reference_full(s, &rest))
                    .collect::<Result<_>>()?;
                Ok(coeffs_1d(&nodal)?.eval_at(x[*axis]))
            }
        }
    }
}

impl GridEval for Interpolant {
    /// Tensorial evaluation: folds the coefficient tensor with the per-axis
    /// Chebyshev value matrices in fixed order, producing the whole grid at
    /// once with extents `[q_1, .., q_n]`.
    fn eval_grid(&self, grid: &ProductGrid) -> Result<NdArray> {
        let ref_axes = self.reference_axes(grid)?;
        match &self.repr {
            Repr::Full(c) => fold_reference(c, &ref_axes),
            Repr::Split { axis, slices } => {
                let sub_axes: Vec<Vec<f64>> = ref_axes
                    .iter()
                    .enumerate()
                    .filter(|&(d, _)| d != *axis)
                    .map(|(_, v)| v.clone())
                    .collect();
                let sub_extents: Vec<usize> = sub_axes.iter().map(Vec::len).collect();
                let sub_size: usize = sub_extents.iter().product();
                let mut buf_extents = vec![slices.len()];
                buf_extents.extend_from_slice(&sub_extents);
                let mut buffer = NdArray::zeros(buf_extents);
                for (k, slice) in slices.iter().enumerate() {
                    let vals = fold_reference(slice, &sub_axes)?;
                    buffer.data_mut()[k * sub_size..(k + 1) * sub_size]
                        .copy_from_slice(vals.data());
                }
                // interpolate across slices: nodal values back to a series
                // along the split axis, then contract with its point matrix
                let bhat = chebyshev::coeffs_leading_axis(&buffer)?;
                let t = cheb_poly_values(slices.len() - 1, &ref_axes[*axis])?;
                let folded = bhat.tensor_contract(&t)?;
                folded.move_last_axis_to(*axis)
            }
        }
    }
}

/// Forward difference `(2/(b-a)) [P(x + h e_dim) - P(x)] / h` in reference
/// coordinates, falling back to a backward difference when the step would
/// leave the reference box.
pub fn fd_partial<P: ChebEval>(p: &P, point: &[f64], dim: usize, h: f64) -> Result<f64> {
    if dim >= p.domain().dim() {
        return Err(Error::Dimension(format!(
            "derivative dimension {dim} out of range"
        )));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!(
            "finite-difference step {h} must be in (0, 1)"
        )));
    }
    let x = p.domain().to_reference(point)?;
    let (lo, hi) = p.domain().bounds()[dim];
    let scale = 2.0 / (hi - lo);
    let mut shifted = x.clone();
    if x[dim] + h <= 1.0 {
        shifted[dim] = x[dim] + h;
        Ok(scale * (p.eval_reference(&shifted)? - p.eval_reference(&x)?) / h)
    } else {
        shifted[dim] = x[dim] - h;
        Ok(scale * (p.eval_reference(&x)? - p.eval_reference(&shifted)?) / h)
    }
}

/// Mean squared difference between `p` on the grid and reference values.
pub fn mse_on_grid<P: GridEval>(
    p: &P,
    reference_values: &NdArray,
    grid: &ProductGrid,
) -> Result<f64> {
    let vals = p.eval_grid(grid)?;
    if vals.extents() != reference_values.extents() {
        return Err(Error::Dimension(format!(
            "reference extents {:?} do not match grid extents {:?}",
            reference_values.extents(),
            vals.extents()
        )));
    }
    let n = vals.len() as f64;
    Ok(vals
        .data()
        .iter()
        .zip(reference_values.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}
