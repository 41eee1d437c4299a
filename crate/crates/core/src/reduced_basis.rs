//! Hierarchical orthonormalization of a tensor-product interpolant into a
//! reduced polynomial, plus its tensorial evaluation.
//!
//! Working one variable at a time, the interpolant is rewritten over a greedy
//! orthonormal basis built from its nodal slice polynomials; bases are
//! ordered by how much of the current residual they explain, so truncating a
//! level at a shared retained count keeps the most informative terms. The
//! retained count per level is the smallest one whose truncated polynomial
//! still meets the MSE budget on the control point set. Everything is carried
//! out on coefficient tensors: inner products under the Chebyshev weight are
//! exact diagonal sums in coefficient space, so the procedure is free of
//! quadrature error.

use crate::chebyshev::{self, cheb_poly_values, weight_vector, ChebSeries1D};
use crate::error::{Error, Result};
use crate::interpolant::{ChebEval, Domain, GridEval, Interpolant, ProductGrid};
use crate::tensor::NdArray;

/// Candidates whose orthogonalized remainder falls below this fraction of the
/// parent norm are treated as fully explained and dropped from selection.
const DEGENERATE_REL_NORM: f64 = 1e-14;

/// Default residual target for greedy selection: stop once the residual falls
/// below this fraction of its starting norm.
pub const RESIDUAL_REL_TARGET: f64 = 1e-14;

/// The point set the MSE budget is enforced on.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PhiSet {
    /// The Chebyshev tensor nodes of the source interpolant.
    #[default]
    Nodes,
    /// An explicit set of physical points.
    Points(Vec<Vec<f64>>),
}

/// Truncation budget and control point set for [`compress`].
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSpec {
    pub epsilon: f64,
    pub phi: PhiSet,
}

impl TruncationSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Domain(format!("epsilon {epsilon} must be positive")));
        }
        Ok(Self {
            epsilon,
            phi: PhiSet::Nodes,
        })
    }

    pub fn with_points(epsilon: f64, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("control point set must be nonempty".into()));
        }
        let mut spec = Self::new(epsilon)?;
        spec.phi = PhiSet::Points(points);
        Ok(spec)
    }
}

/// Storage accounting for a reduced polynomial against its source tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageReport {
    pub full_bytes: u64,
    pub reduced_bytes: u64,
    pub savings_fraction: f64,
}

/// Bytes of the dense coefficient tensor with the given extents.
pub fn full_tensor_bytes(extents: &[usize]) -> u64 {
    8 * extents.iter().map(|&e| e as u64).product::<u64>()
}

/// Hierarchy of per-level coefficient arrays realizing the reduced
/// polynomial: level `j` holds the univariate Chebyshev coefficients of the
/// weight functions `A^j` over extents `[M_1+1, .., M_j+1, N_j+1]`, the
/// terminal array those of the last-variable basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPolynomial {
    domain: Domain,
    levels: Vec<NdArray>,
    terminal: NdArray,
    retained: Vec<usize>,
    degrees: Vec<usize>,
}

impl ReducedPolynomial {
    /// Reassembles a reduced polynomial from its parts (container parsing).
    pub fn from_parts(
        domain: Domain,
        degrees: Vec<usize>,
        retained: Vec<usize>,
        levels: Vec<NdArray>,
        terminal: NdArray,
    ) -> Result<Self> {
        let n = domain.dim();
        if degrees.len() != n || retained.len() != n || levels.len() + 1 != n {
            return Err(Error::Dimension(format!(
                "inconsistent reduced polynomial: {n} dims, {} degrees, {} retained, {} levels",
                degrees.len(),
                retained.len(),
                levels.len()
            )));
        }
        for (j, level) in levels.iter().enumerate() {
            let mut want: Vec<usize> = retained[..=j].iter().map(|&m| m + 1).collect();
            want.push(degrees[j] + 1);
            if level.extents() != want.as_slice() {
                return Err(Error::Dimension(format!(
                    "level {j} extents {:?} do not match expected {want:?}",
                    level.extents()
                )));
            }
        }
        let mut want: Vec<usize> = retained[..n - 1].iter().map(|&m| m + 1).collect();
        want.push(degrees[n - 1] + 1);
        if terminal.extents() != want.as_slice() {
            return Err(Error::Dimension(format!(
                "terminal extents {:?} do not match expected {want:?}",
                terminal.extents()
            )));
        }
        if retained[n - 1] != degrees[n - 1] {
            return Err(Error::Dimension(
                "last retained count must equal the last degree".into(),
            ));
        }
        Ok(Self {
            domain,
            levels,
            terminal,
            retained,
            degrees,
        })
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Retained counts `[M_1, .., M_{n-1}, N_n]`.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// Source degrees `[N_1, .., N_n]`.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Level arrays `A^1 .. A^{n-1}`.
    pub fn levels(&self) -> &[NdArray] {
        &self.levels
    }

    /// Terminal array holding the last-variable basis coefficients.
    pub fn terminal(&self) -> &NdArray {
        &self.terminal
    }

    /// Evaluates the per-level arrays at reference coordinates and folds them
    /// right-to-left with the batched contraction, in the fixed order the
    /// parenthesization prescribes.
    fn fold_reference(&self, ref_axes: &[Vec<f64>]) -> Result<NdArray> {
        let n = self.dim();
        if ref_axes.len() != n {
            return Err(Error::Dimension(format!(
                "grid has {} axes, reduced polynomial has {n}",
                ref_axes.len()
            )));
        }
        let tn = cheb_poly_values(self.degrees[n - 1], &ref_axes[n - 1])?;
        let mut acc = self.terminal.contract_last(&tn)?;
        for j in (0..n - 1).rev() {
            let tj = cheb_poly_values(self.degrees[j], &ref_axes[j])?;
            let level_vals = self.levels[j].contract_last(&tj)?;
            acc = level_vals.tensor_contract_batched(&acc)?;
        }
        Ok(acc)
    }

    /// Expands the hierarchy back to a dense coefficient tensor.
    pub fn expand_to_tensor(&self) -> Result<NdArray> {
        let n = self.dim();
        let mut acc = self.terminal.clone();
        for j in (0..n - 1).rev() {
            acc = self.levels[j].tensor_contract_batched(&acc)?;
        }
        Ok(acc)
    }

    pub fn storage_report(&self) -> StorageReport {
        let extents: Vec<usize> = self.degrees.iter().map(|&d| d + 1).collect();
        let full_bytes = full_tensor_bytes(&extents);
        let mut elems = self.terminal.len() as u64;
        for level in &self.levels {
            elems += level.len() as u64;
        }
        let reduced_bytes = 8 * elems;
        StorageReport {
            full_bytes,
            reduced_bytes,
            savings_fraction: 1.0 - reduced_bytes as f64 / full_bytes as f64,
        }
    }
}

impl ChebEval for ReducedPolynomial {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn eval_reference(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, reduced polynomial has {}",
                x.len(),
                self.dim()
            )));
        }
        let axes: Vec<Vec<f64>> = x.iter().map(|&xi| vec![xi]).collect();
        Ok(self.fold_reference(&axes)?.data()[0])
    }
}

impl GridEval for ReducedPolynomial {
    fn eval_grid(&self, grid: &ProductGrid) -> Result<NdArray> {
        let ref_axes: Vec<Vec<f64>> = grid
            .axes()
            .iter()
            .enumerate()
            .map(|(d, vals)| {
                vals.iter()
                    .map(|&v| self.domain.to_reference_coord(d, v))
                    .collect()
            })
            .collect::<Result<_>>()?;
        self.fold_reference(&ref_axes)
    }
}

/// Nodal slice polynomials of the leading variable: coefficient tensors of
/// `P(alpha^i, x_2, .., x_n)` for every Chebyshev node of axis 1.
pub fn nodal_slices(p: &Interpolant) -> Result<Vec<NdArray>> {
    let coeffs = p
        .coeffs()
        .ok_or_else(|| Error::Domain("nodal slices need an unsplit interpolant".into()))?;
    Ok(leading_axis_slices(coeffs))
}

/// Slices a coefficient tensor at the Chebyshev nodes of its leading axis by
/// contracting with the basis values `T_l(alpha^i)`.
fn leading_axis_slices(coeffs: &NdArray) -> Vec<NdArray> {
    let s = coeffs.extents()[0];
    let rest_extents = coeffs.extents()[1..].to_vec();
    let rest: usize = rest_extents.iter().product();
    let ref_nodes: Vec<f64> = (0..s)
        .map(|k| chebyshev::reference_node(k, s - 1))
        .collect();
    let tmat = cheb_poly_values(s - 1, &ref_nodes).expect("nodes lie in [-1, 1]");
    let mut out = vec![vec![0.0; rest]; s];
    for l in 0..s {
        let row = &coeffs.data()[l * rest..(l + 1) * rest];
        for (i, slice) in out.iter_mut().enumerate() {
            let t = tmat.data()[l * s + i];
            for (acc, &v) in slice.iter_mut().zip(row) {
                *acc += t * v;
            }
        }
    }
    out.into_iter()
        .map(|data| NdArray::new(rest_extents.clone(), data).expect("extents match data"))
        .collect()
}

/// One level of the greedy orthonormal decomposition.
#[derive(Debug, Clone)]
pub struct LevelDecomposition {
    /// Orthonormal basis tensors over the trailing variables, selection order.
    pub basis: Vec<NdArray>,
    /// Chebyshev coefficients of the univariate weight `A_k` of each basis
    /// element, length `N_level + 1`.
    pub coeff_series: Vec<ChebSeries1D>,
    /// Original slice index picked at each round.
    pub selected: Vec<usize>,
}

/// Greedy orthonormalization of the nodal slices of `parent` (a coefficient
/// tensor whose leading axis is the level variable). Each round
/// orthogonalizes the remaining candidates against everything selected so
/// far (with one re-orthogonalization pass), normalizes, and picks the
/// candidate that explains the most of the residual; ties go to the smallest
/// slice index. Selection stops when candidates are exhausted or the
/// residual is numerically zero.
pub fn greedy_orthonormal_level(
    parent: &NdArray,
    slices: &[NdArray],
    residual_target: f64,
) -> Result<LevelDecomposition> {
    let lead = parent.extents()[0];
    if slices.len() != lead {
        return Err(Error::Dimension(format!(
            "{} slices for a leading axis of {lead}",
            slices.len()
        )));
    }
    let rest_extents = parent.extents()[1..].to_vec();
    let rest: usize = rest_extents.iter().product();
    for s in slices {
        if s.extents() != rest_extents.as_slice() {
            return Err(Error::Dimension(format!(
                "slice extents {:?} do not match trailing extents {rest_extents:?}",
                s.extents()
            )));
        }
    }
    let w_rest = weight_vector(&rest_extents);
    let w_lead = weight_vector(&[lead]);
    let dot_rest = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&w_rest)
            .map(|((x, y), w)| w * x * y)
            .sum()
    };

    let parent_norm = {
        let w_full = weight_vector(parent.extents());
        parent
            .data()
            .iter()
            .zip(&w_full)
            .map(|(x, w)| w * x * x)
            .sum::<f64>()
            .sqrt()
    };

    // Residual rows over the trailing axes, one per leading coefficient.
    let mut residual: Vec<Vec<f64>> = (0..lead)
        .map(|l| parent.data()[l * rest..(l + 1) * rest].to_vec())
        .collect();
    let residual_norm = |r: &[Vec<f64>]| -> f64 {
        r.iter()
            .zip(&w_lead)
            .map(|(row, wl)| wl * dot_rest(row, row))
            .sum::<f64>()
            .sqrt()
    };
    let initial_res = residual_norm(&residual);

    let mut work: Vec<Option<Vec<f64>>> = slices.iter().map(|s| Some(s.data().to_vec())).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut coeff_series = Vec::new();
    let mut selected = Vec::new();

    while work.iter().any(Option::is_some) {
        if !basis.is_empty() && residual_norm(&residual) < residual_target * initial_res {
            break;
        }
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (i, cand) in work.iter_mut().enumerate() {
            let Some(v) = cand else { continue };
            let mut q = v.clone();
            for qb in &basis {
                let c = dot_rest(&q, qb);
                for (x, &y) in q.iter_mut().zip(qb) {
                    *x -= c * y;
                }
            }
            let norm = dot_rest(&q, &q).sqrt();
            if norm < DEGENERATE_REL_NORM * parent_norm.max(f64::MIN_POSITIVE) {
                *cand = None; // fully explained by the current basis
                continue;
            }
            for x in q.iter_mut() {
                *x /= norm;
            }
            // size of the residual component along q, the amount removed
            // from the residual norm if this candidate wins the round
            let score: f64 = residual
                .iter()
                .zip(&w_lead)
                .map(|(row, wl)| {
                    let b = dot_rest(row, &q);
                    wl * b * b
                })
                .sum();
            if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
                best = Some((i, score, q));
            }
        }
        let Some((pick, _, q)) = best else { break };
        for cand in work.iter_mut().flatten() {
            let c = dot_rest(cand, &q);
            for (x, &y) in cand.iter_mut().zip(&q) {
                *x -= c * y;
            }
        }
        work[pick] = None;
        // weight function A(x) = <P, q> over the trailing variables
        let mut a = vec![0.0; lead];
        for (l, al) in a.iter_mut().enumerate() {
            *al = dot_rest(&parent.data()[l * rest..(l + 1) * rest], &q);
        }
        for (row, &al) in residual.iter_mut().zip(&a) {
            for (x, &y) in row.iter_mut().zip(&q) {
                *x -= al * y;
            }
        }
        basis.push(q);
        coeff_series.push(ChebSeries1D::new(a)?);
        selected.push(pick);
    }

    Ok(LevelDecomposition {
        basis: basis
            .into_iter()
            .map(|data| NdArray::new(rest_extents.clone(), data).expect("extents match data"))
            .collect(),
        coeff_series,
        selected,
    })
}

/// One branch of the hierarchy during compression: the polynomial tail over
/// the remaining variables and the branch prefix (the product of its ancestor
/// weight functions) evaluated on the control set so far.
struct Branch {
    tail: Option<NdArray>,
    prefix: Vec<f64>,
}

enum ControlSet {
    /// Control points are the tensor nodes: errors live on the node grid and
    /// each increment is an outer product over contiguous grid blocks.
    Nodes,
    /// Explicit points with precomputed reference coordinates.
    Points { refs: Vec<Vec<f64>> },
}

/// Compresses an interpolant into a reduced polynomial whose MSE against the
/// source on the control point set stays below `spec.epsilon`.
pub fn compress(p: &Interpolant, spec: &TruncationSpec) -> Result<ReducedPolynomial> {
    if !(spec.epsilon > 0.0) {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    let coeffs = p
        .coeffs()
        .ok_or_else(|| Error::Domain("compress needs an unsplit interpolant".into()))?;
    let n = p.dim();
    let degrees = p.degrees().to_vec();

    let node_mats: Vec<NdArray> = degrees
        .iter()
        .map(|&d| {
            let pts: Vec<f64> = (0..=d).map(|k| chebyshev::reference_node(k, d)).collect();
            cheb_poly_values(d, &pts)
        })
        .collect::<Result<_>>()?;

    // Values of P on the control set.
    let (control, p_vals) = match &spec.phi {
        PhiSet::Nodes => {
            let mut vals: Option<NdArray> = None;
            for mat in &node_mats {
                let cur = vals.as_ref().unwrap_or(coeffs);
                vals = Some(cur.tensor_contract(mat)?);
            }
            (ControlSet::Nodes, vals.expect("n >= 1").into_data())
        }
        PhiSet::Points(points) => {
            let refs: Vec<Vec<f64>> = points
                .iter()
                .map(|pt| p.domain().to_reference(pt))
                .collect::<Result<_>>()?;
            let vals: Vec<f64> = refs
                .iter()
                .map(|x| p.eval_reference(x))
                .collect::<Result<_>>()?;
            (ControlSet::Points { refs }, vals)
        }
    };
    let m_phi = p_vals.len() as f64;

    let init_prefix = match &control {
        ControlSet::Nodes => vec![1.0],
        ControlSet::Points { refs } => vec![1.0; refs.len()],
    };
    let mut branches = vec![Branch {
        tail: Some(coeffs.clone()),
        prefix: init_prefix,
    }];
    let mut levels: Vec<NdArray> = Vec::new();
    let mut retained: Vec<usize> = Vec::new();

    for level in 0..n.saturating_sub(1) {
        let n_level = degrees[level];
        let level_mat = &node_mats[level];
        // Chebyshev series values A(alpha^k) at the level's own nodes.
        let series_at_nodes = |series: &ChebSeries1D| -> Vec<f64> {
            (0..=n_level)
                .map(|k| {
                    series
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(l, &c)| c * level_mat.data()[l * (n_level + 1) + k])
                        .sum()
                })
                .collect()
        };

        let decomps: Vec<Option<LevelDecomposition>> = branches
            .iter()
            .map(|b| match &b.tail {
                Some(tail) => {
                    let slices = leading_axis_slices(tail);
                    greedy_orthonormal_level(tail, &slices, RESIDUAL_REL_TARGET).map(Some)
                }
                None => Ok(None),
            })
            .collect::<Result<_>>()?;
        let avail = decomps
            .iter()
            .map(|d| d.as_ref().map_or(0, |d| d.basis.len()))
            .max()
            .unwrap_or(0);

        // Smallest retained count whose truncation meets the budget: the
        // error tensor starts at P and one rank-one increment per branch is
        // subtracted for each additional retained index.
        let mut err = p_vals.clone();
        let mut chosen: Option<usize> = None;
        let mut best_mse = f64::INFINITY;
        for m in 0..avail.max(1) {
            for (branch, decomp) in branches.iter().zip(&decomps) {
                let Some(decomp) = decomp else { continue };
                if m >= decomp.basis.len() {
                    continue;
                }
                let q = &decomp.basis[m];
                match &control {
                    ControlSet::Nodes => {
                        let a_vals = series_at_nodes(&decomp.coeff_series[m]);
                        let mut tail_vals: Option<NdArray> = None;
                        for mat in &node_mats[level + 1..] {
                            let cur = tail_vals.as_ref().unwrap_or(q);
                            tail_vals = Some(cur.tensor_contract(mat)?);
                        }
                        let tail_data = tail_vals.as_ref().map_or(q.data(), |t| t.data());
                        let tail_len = tail_data.len();
                        let block = (n_level + 1) * tail_len;
                        debug_assert_eq!(branch.prefix.len() * block, err.len());
                        for (pi, &pv) in branch.prefix.iter().enumerate() {
                            for (k, &av) in a_vals.iter().enumerate() {
                                let scale = pv * av;
                                let base = pi * block + k * tail_len;
                                for (e, &tv) in err[base..base + tail_len].iter_mut().zip(tail_data)
                                {
                                    *e -= scale * tv;
                                }
                            }
                        }
                    }
                    ControlSet::Points { refs } => {
                        let series = &decomp.coeff_series[m];
                        for (i, x) in refs.iter().enumerate() {
                            let a_val = series.eval_at(x[level]);
                            let tail_val = eval_tensor_at(q, &x[level + 1..]);
                            err[i] -= branch.prefix[i] * a_val * tail_val;
                        }
                    }
                }
            }
            let mse = err.iter().map(|e| e * e).sum::<f64>() / m_phi;
            best_mse = mse;
            if mse < spec.epsilon {
                chosen = Some(m);
                break;
            }
        }
        let m_level = chosen.ok_or(Error::ToleranceFloor {
            requested: spec.epsilon,
            floor: best_mse,
        })?;
        retained.push(m_level);

        // Emit the level array and advance the branch set, padding branches
        // whose decomposition terminated early with zero functions.
        let mut level_extents: Vec<usize> = retained.iter().map(|&m| m + 1).collect();
        level_extents.push(n_level + 1);
        let mut level_array = NdArray::zeros(level_extents);
        let mut next_branches = Vec::with_capacity(branches.len() * (m_level + 1));
        for (bi, (branch, decomp)) in branches.iter().zip(&decomps).enumerate() {
            for m in 0..=m_level {
                let element = decomp
                    .as_ref()
                    .filter(|d| m < d.basis.len())
                    .map(|d| (&d.basis[m], &d.coeff_series[m]));
                let prefix = match (&control, &element) {
                    (ControlSet::Nodes, Some((_, series))) => {
                        let a_vals = series_at_nodes(series);
                        let mut pref = vec![0.0; branch.prefix.len() * (n_level + 1)];
                        for (pi, &pv) in branch.prefix.iter().enumerate() {
                            for (k, &av) in a_vals.iter().enumerate() {
                                pref[pi * (n_level + 1) + k] = pv * av;
                            }
                        }
                        pref
                    }
                    (ControlSet::Nodes, None) => {
                        vec![0.0; branch.prefix.len() * (n_level + 1)]
                    }
                    (ControlSet::Points { refs }, Some((_, series))) => refs
                        .iter()
                        .zip(&branch.prefix)
                        .map(|(x, &pv)| pv * series.eval_at(x[level]))
                        .collect(),
                    (ControlSet::Points { .. }, None) => vec![0.0; branch.prefix.len()],
                };
                if let Some((_, series)) = &element {
                    let base = (bi * (m_level + 1) + m) * (n_level + 1);
                    level_array.data_mut()[base..base + n_level + 1]
                        .copy_from_slice(&series.coeffs);
                }
                next_branches.push(Branch {
                    tail: element.map(|(q, _)| q.clone()),
                    prefix,
                });
            }
        }
        levels.push(level_array);
        branches = next_branches;
    }

    // Terminal array: the univariate tails of the surviving branches.
    let n_last = degrees[n - 1];
    let mut term_extents: Vec<usize> = retained.iter().map(|&m| m + 1).collect();
    term_extents.push(n_last + 1);
    let mut terminal = NdArray::zeros(term_extents);
    for (bi, branch) in branches.iter().enumerate() {
        if let Some(tail) = &branch.tail {
            let base = bi * (n_last + 1);
            terminal.data_mut()[base..base + n_last + 1].copy_from_slice(tail.data());
        }
    }
    retained.push(n_last);

    let reduced = ReducedPolynomial {
        domain: p.domain().clone(),
        levels,
        terminal,
        retained,
        degrees,
    };

    // Contract check before returning, in exact reference coordinates.
    let final_mse = match &control {
        ControlSet::Nodes => {
            let ref_axes: Vec<Vec<f64>> = reduced
                .degrees
                .iter()
                .map(|&d| (0..=d).map(|k| chebyshev::reference_node(k, d)).collect())
                .collect();
            let vals = reduced.fold_reference(&ref_axes)?;
            vals.data()
                .iter()
                .zip(&p_vals)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                / m_phi
        }
        ControlSet::Points { refs } => {
            let mut acc = 0.0;
            for (x, &want) in refs.iter().zip(&p_vals) {
                let got = reduced.eval_reference(x)?;
                acc += (got - want) * (got - want);
            }
            acc / m_phi
        }
    };
    if final_mse >= spec.epsilon {
        return Err(Error::ToleranceFloor {
            requested: spec.epsilon,
            floor: final_mse,
        });
    }
    Ok(reduced)
}

/// Direct pointwise evaluation of a coefficient tensor, used on explicit
/// control points.
fn eval_tensor_at(coeffs: &NdArray, x: &[f64]) -> f64 {
    if x.is_empty() {
        return coeffs.data()[0];
    }
    let mut current = coeffs.clone();
    for &xi in x {
        let t = cheb_poly_values(current.extents()[0] - 1, &[xi]).expect("reference point");
        current = current.tensor_contract(&t).expect("matching extents");
    }
    current.data()[0]
}
