//! Least-squares parameter estimation against a quote set through any pricer
//! backend (direct Monte Carlo, full interpolant, reduced polynomial), plus
//! out-of-sample prediction scoring.
//!
//! The five free NGARCH parameters are optimized in box-normalized
//! coordinates with a projected Nelder-Mead search started from a fixed
//! low-discrepancy set of interior points, so runs are deterministic.
//! Quotes at arbitrary strikes are normalized to strike 1 through the
//! model's homogeneity in `S/K` before pricing.

use crate::error::{Error, Result};
use crate::interpolant::{ChebEval, Domain, GridEval, ProductGrid};
use crate::models::{self, McConfig, NgarchParams};

/// One market-style European call contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quote {
    pub spot: f64,
    pub strike: f64,
    pub maturity_days: f64,
    pub rate_annual: f64,
    pub price: f64,
}

/// A validated, nonempty collection of quotes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteSet {
    quotes: Vec<Quote>,
}

impl QuoteSet {
    pub fn new(quotes: Vec<Quote>) -> Result<Self> {
        if quotes.is_empty() {
            return Err(Error::Domain("quote set must be nonempty".into()));
        }
        for (i, q) in quotes.iter().enumerate() {
            if !(q.spot > 0.0) || !(q.strike > 0.0) {
                return Err(Error::Domain(format!(
                    "quote {i}: spot and strike must be positive"
                )));
            }
            if !(q.maturity_days >= 0.0) {
                return Err(Error::Domain(format!("quote {i}: negative maturity")));
            }
            if !(q.price >= 0.0) {
                return Err(Error::Domain(format!("quote {i}: negative price")));
            }
        }
        Ok(Self { quotes })
    }

    pub fn quotes(&self) -> &[Quote] {
        &self.quotes
    }

    pub fn len(&self) -> usize {
        self.quotes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotes.is_empty()
    }
}

/// The free parameter subset calibrated against quotes, ordered
/// `[sigma2_0, beta0, beta1, beta2, lambda_theta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParams {
    pub sigma2_0: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda_theta: f64,
}

impl FreeParams {
    pub const DIM: usize = 5;

    pub fn to_array(self) -> [f64; 5] {
        [
            self.sigma2_0,
            self.beta0,
            self.beta1,
            self.beta2,
            self.lambda_theta,
        ]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            sigma2_0: v[0],
            beta0: v[1],
            beta1: v[2],
            beta2: v[3],
            lambda_theta: v[4],
        }
    }
}

/// A pricing backend usable by the calibration objective.
pub trait Pricer: Sync {
    /// Prices one contract at the candidate parameters.
    fn price(
        &self,
        spot: f64,
        strike: f64,
        maturity_days: f64,
        rate_annual: f64,
        params: &FreeParams,
    ) -> Result<f64>;

    /// Prices a whole quote set; backends may batch.
    fn price_quotes(&self, quotes: &QuoteSet, params: &FreeParams) -> Result<Vec<f64>> {
        quotes
            .quotes()
            .iter()
            .map(|q| self.price(q.spot, q.strike, q.maturity_days, q.rate_annual, params))
            .collect()
    }
}

/// Direct Monte Carlo NGARCH backend. Maturities round to whole days and the
/// annual rate converts at 365 days per year.
#[derive(Debug, Clone)]
pub struct McNgarchPricer {
    pub cfg: McConfig,
}

impl Pricer for McNgarchPricer {
    fn price(
        &self,
        spot: f64,
        strike: f64,
        maturity_days: f64,
        rate_annual: f64,
        params: &FreeParams,
    ) -> Result<f64> {
        let p = NgarchParams {
            r: rate_annual / 365.0,
            beta0: params.beta0,
            beta1: params.beta1,
            beta2: params.beta2,
            lambda_theta: params.lambda_theta,
            sigma2_0: params.sigma2_0,
            s0: spot / strike,
            t_m: maturity_days.round() as u32,
        };
        Ok(strike * models::ngarch_price(&p, 1.0, &self.cfg)?.price)
    }
}

/// Unique spot and maturity axes plus each quote's cell in the grid.
type QuoteLayout = (Vec<f64>, Vec<f64>, Vec<(usize, usize)>);

/// Polynomial backend over a 7-variable pricing function laid out as
/// `[s0, t_m, sigma2_0, beta0, beta1, beta2, lambda_theta]` at strike 1,
/// with the rate fixed at build time. Works for both the full interpolant
/// and the reduced polynomial.
#[derive(Debug, Clone)]
pub struct PolyPricer<'a, P> {
    poly: &'a P,
}

impl<'a, P: ChebEval + GridEval + Sync> PolyPricer<'a, P> {
    pub fn new(poly: &'a P) -> Result<Self> {
        if poly.domain().dim() != 7 {
            return Err(Error::Dimension(format!(
                "calibration polynomial must have 7 dimensions, got {}",
                poly.domain().dim()
            )));
        }
        Ok(Self { poly })
    }

    fn point(spot: f64, strike: f64, maturity_days: f64, params: &FreeParams) -> [f64; 7] {
        [
            spot / strike,
            maturity_days,
            params.sigma2_0,
            params.beta0,
            params.beta1,
            params.beta2,
            params.lambda_theta,
        ]
    }

    /// Detects a product structure over `(normalized spot, maturity)` so the
    /// whole quote set evaluates as one tensorial grid call.
    fn product_layout(quotes: &QuoteSet) -> Option<QuoteLayout> {
        let mut spots: Vec<f64> = Vec::new();
        let mut mats: Vec<f64> = Vec::new();
        for q in quotes.quotes() {
            let s = q.spot / q.strike;
            if !spots.contains(&s) {
                spots.push(s);
            }
            if !mats.contains(&q.maturity_days) {
                mats.push(q.maturity_days);
            }
        }
        if spots.len() * mats.len() != quotes.len() {
            return None;
        }
        let mut seen = vec![false; spots.len() * mats.len()];
        let mut cells = Vec::with_capacity(quotes.len());
        for q in quotes.quotes() {
            let s = q.spot / q.strike;
            let i = spots.iter().position(|&v| v == s)?;
            let j = mats.iter().position(|&v| v == q.maturity_days)?;
            if seen[i * mats.len() + j] {
                return None;
            }
            seen[i * mats.len() + j] = true;
            cells.push((i, j));
        }
        Some((spots, mats, cells))
    }
}

impl<P: ChebEval + GridEval + Sync> Pricer for PolyPricer<'_, P> {
    fn price(
        &self,
        spot: f64,
        strike: f64,
        maturity_days: f64,
        _rate_annual: f64,
        params: &FreeParams,
    ) -> Result<f64> {
        let pt = Self::point(spot, strike, maturity_days, params);
        Ok(strike * self.poly.eval_point(&pt)?)
    }

    fn price_quotes(&self, quotes: &QuoteSet, params: &FreeParams) -> Result<Vec<f64>> {
        if let Some((spots, mats, cells)) = Self::product_layout(quotes) {
            let axes = vec![
                spots,
                mats.clone(),
                vec![params.sigma2_0],
                vec![params.beta0],
                vec![params.beta1],
                vec![params.beta2],
                vec![params.lambda_theta],
            ];
            let grid = ProductGrid::new(axes, self.poly.domain())?;
            let vals = self.poly.eval_grid(&grid)?;
            return Ok(quotes
                .quotes()
                .iter()
                .zip(&cells)
                .map(|(q, &(i, j))| q.strike * vals.data()[i * mats.len() + j])
                .collect());
        }
        quotes
            .quotes()
            .iter()
            .map(|q| self.price(q.spot, q.strike, q.maturity_days, q.rate_annual, params))
            .collect()
    }
}

/// Mean squared pricing error of `params` over the quote set.
pub fn in_mse(params: &FreeParams, quotes: &QuoteSet, pricer: &dyn Pricer) -> Result<f64> {
    let model = pricer.price_quotes(quotes, params)?;
    let n = quotes.len() as f64;
    Ok(quotes
        .quotes()
        .iter()
        .zip(&model)
        .map(|(q, &m)| (q.price - m) * (q.price - m))
        .sum::<f64>()
        / n)
}

/// Optimizer choice for [`calibrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    NelderMead,
    /// Projected finite-difference gradient descent with backtracking.
    GradientDescent,
}

/// Options for [`calibrate`].
#[derive(Debug, Clone)]
pub struct CalibrateOpts {
    pub strategy: Strategy,
    pub n_starts: usize,
    pub max_iters: usize,
    pub f_tol: f64,
}

impl Default for CalibrateOpts {
    fn default() -> Self {
        Self {
            strategy: Strategy::NelderMead,
            n_starts: 5,
            max_iters: 400,
            f_tol: 1e-18,
        }
    }
}

/// Calibration outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub params: FreeParams,
    pub in_mse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Infinity norm of the projected finite-difference gradient of the
    /// objective at the returned point, in box-normalized coordinates.
    pub stationarity: f64,
}

/// Out-of-sample prediction errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionScore {
    pub max_abs_err: f64,
    pub mean_abs_err: f64,
}

fn halton(index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

struct SearchOutcome {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    converged: bool,
}

/// Projected Nelder-Mead on the unit box.
fn nelder_mead<F>(
    objective: &mut F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    f_tol: f64,
) -> Result<SearchOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for v in x.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for d in 0..n {
        let mut v = x0.to_vec();
        v[d] += if v[d] + step <= 1.0 { step } else { -step };
        clamp(&mut v);
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex
        .iter()
        .map(|x| objective(x))
        .collect::<Result<_>>()?;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        // order: best first
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if fvals[worst] - fvals[best] <= f_tol * (1.0 + fvals[best].abs()) {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, &v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / n as f64;
            }
        }
        let shifted = |coef: f64| -> Vec<f64> {
            let mut v: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(&c, &w)| c + coef * (c - w))
                .collect();
            clamp(&mut v);
            v
        };
        let reflected = shifted(1.0);
        let f_r = objective(&reflected)?;
        if f_r < fvals[best] {
            let expanded = shifted(2.0);
            let f_e = objective(&expanded)?;
            if f_e < f_r {
                simplex[worst] = expanded;
                fvals[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                fvals[worst] = f_r;
            }
        } else if f_r < fvals[second_worst] {
            simplex[worst] = reflected;
            fvals[worst] = f_r;
        } else {
            let contracted = shifted(-0.5);
            let f_c = objective(&contracted)?;
            if f_c < fvals[worst].min(f_r) {
                simplex[worst] = contracted;
                fvals[worst] = f_c;
            } else {
                // shrink toward the best vertex
                let anchor = simplex[best].clone();
                for (i, vertex) in simplex.iter_mut().enumerate() {
                    if i == best {
                        continue;
                    }
                    for (v, &a) in vertex.iter_mut().zip(&anchor) {
                        *v = a + 0.5 * (*v - a);
                    }
                    fvals[i] = objective(vertex)?;
                }
            }
        }
    }
    let (mut bi, mut bf) = (0, fvals[0]);
    for (i, &f) in fvals.iter().enumerate() {
        if f < bf {
            bi = i;
            bf = f;
        }
    }
    Ok(SearchOutcome {
        x: simplex[bi].clone(),
        f: bf,
        iterations,
        converged,
    })
}

/// Projected gradient descent with forward differences and backtracking.
fn gradient_descent<F>(
    objective: &mut F,
    x0: &[f64],
    max_iters: usize,
    f_tol: f64,
) -> Result<SearchOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let h = 1e-6;
    let mut x = x0.to_vec();
    let mut fx = objective(&x)?;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let mut grad = vec![0.0; n];
        for d in 0..n {
            let mut xp = x.clone();
            if xp[d] + h <= 1.0 {
                xp[d] += h;
                grad[d] = (objective(&xp)? - fx) / h;
            } else {
                xp[d] -= h;
                grad[d] = (fx - objective(&xp)?) / h;
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            converged = true;
            break;
        }
        let mut alpha = 0.25 / gnorm.max(1.0);
        let mut improved = false;
        for _ in 0..25 {
            let mut xn: Vec<f64> = x
                .iter()
                .zip(&grad)
                .map(|(&v, &g)| (v - alpha * g).clamp(0.0, 1.0))
                .collect();
            let fn_ = objective(&xn)?;
            if fn_ < fx {
                std::mem::swap(&mut x, &mut xn);
                if fx - fn_ <= f_tol * (1.0 + fn_.abs()) {
                    converged = true;
                }
                fx = fn_;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved || converged {
            converged = converged || !improved;
            break;
        }
    }
    Ok(SearchOutcome {
        x,
        f: fx,
        iterations,
        converged,
    })
}

/// Minimizes [`in_mse`] over the box with a deterministic multi-start search.
pub fn calibrate(
    quotes: &QuoteSet,
    pricer: &dyn Pricer,
    bounds: &Domain,
    opts: &CalibrateOpts,
) -> Result<CalibrationResult> {
    if bounds.dim() != FreeParams::DIM {
        return Err(Error::Dimension(format!(
            "calibration box must have {} dimensions, got {}",
            FreeParams::DIM,
            bounds.dim()
        )));
    }
    let to_params = |u: &[f64]| -> FreeParams {
        let mut v = [0.0; FreeParams::DIM];
        for ((&ud, &(lo, hi)), vd) in u.iter().zip(bounds.bounds()).zip(v.iter_mut()) {
            *vd = lo + ud.clamp(0.0, 1.0) * (hi - lo);
        }
        FreeParams::from_array(v)
    };
    let mut objective = |u: &[f64]| -> Result<f64> { in_mse(&to_params(u), quotes, pricer) };

    // fixed low-discrepancy interior starts
    const BASES: [usize; 5] = [2, 3, 5, 7, 11];
    let starts: Vec<Vec<f64>> = (1..=opts.n_starts.max(1))
        .map(|i| BASES.iter().map(|&b| halton(i, b)).collect())
        .collect();

    let mut total_iterations = 0;
    let mut any_converged = false;
    let mut best: Option<SearchOutcome> = None;
    let initial_best = starts
        .iter()
        .map(|u| objective(u))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    for start in &starts {
        let outcome = match opts.strategy {
            Strategy::NelderMead => {
                nelder_mead(&mut objective, start, 0.15, opts.max_iters, opts.f_tol)?
            }
            Strategy::GradientDescent => {
                gradient_descent(&mut objective, start, opts.max_iters, opts.f_tol)?
            }
        };
        total_iterations += outcome.iterations;
        any_converged |= outcome.converged;
        if best.as_ref().is_none_or(|b| outcome.f < b.f) {
            best = Some(outcome);
        }
    }
    let mut best = best.expect("at least one start");

    // polish the winner with progressively tighter simplices
    if opts.strategy == Strategy::NelderMead {
        for &step in &[0.03, 0.006] {
            let polished = nelder_mead(
                &mut objective,
                &best.x,
                step,
                opts.max_iters + opts.max_iters / 2,
                opts.f_tol,
            )?;
            total_iterations += polished.iterations;
            any_converged |= polished.converged;
            if polished.f < best.f {
                best = polished;
            }
        }
    }

    // projected finite-difference gradient at the solution
    let h = 1e-6;
    let fx = best.f;
    let mut stationarity: f64 = 0.0;
    for d in 0..FreeParams::DIM {
        let mut xp = best.x.clone();
        let g = if xp[d] + h <= 1.0 {
            xp[d] += h;
            (objective(&xp)? - fx) / h
        } else {
            xp[d] -= h;
            (fx - objective(&xp)?) / h
        };
        // at an active bound only an inward descent direction counts
        let blocked_low = best.x[d] <= 0.0 && g > 0.0;
        let blocked_high = best.x[d] >= 1.0 && g < 0.0;
        if !(blocked_low || blocked_high) {
            stationarity = stationarity.max(g.abs());
        }
    }

    Ok(CalibrationResult {
        params: to_params(&best.x),
        in_mse: best.f,
        iterations: total_iterations,
        converged: any_converged && best.f <= initial_best,
        stationarity,
    })
}

/// Prices a new quote grid at calibrated parameters and scores the
/// prediction against the quoted prices.
pub fn predict_and_score(
    params: &FreeParams,
    new_quotes: &QuoteSet,
    pricer: &dyn Pricer,
) -> Result<PredictionScore> {
    let model = pricer.price_quotes(new_quotes, params)?;
    let mut max_abs: f64 = 0.0;
    let mut sum_abs = 0.0;
    for (q, &m) in new_quotes.quotes().iter().zip(&model) {
        let e = (q.price - m).abs();
        max_abs = max_abs.max(e);
        sum_abs += e;
    }
    Ok(PredictionScore {
        max_abs_err: max_abs,
        mean_abs_err: sum_abs / new_quotes.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interpolant::Interpolant;
    use crate::models::{self, ngarch_proxy_call};
    use crate::reduced_basis::{compress, TruncationSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const RATE_ANNUAL: f64 = 0.05;

    /// 7-variable pricing box: [s0, t_m, sigma2_0, beta0, beta1, beta2, l+t].
    /// Variance-rich so coarse-degree interpolants keep quote prices positive
    /// over the whole spot range.
    fn pricing_domain() -> Domain {
        Domain::new(vec![
            (0.75, 1.20),
            (20.0, 365.0),
            (3.0e-4, 6.0e-4),
            (2.0e-5, 5.0e-5),
            (0.90, 0.96),
            (0.015, 0.035),
            (0.20, 0.60),
        ])
        .unwrap()
    }

    fn free_param_box(d: &Domain) -> Domain {
        Domain::new(d.bounds()[2..7].to_vec()).unwrap()
    }

    fn proxy_interpolant(degrees: &[usize]) -> Interpolant {
        let d = pricing_domain();
        let r_day = RATE_ANNUAL / 365.0;
        Interpolant::build_fn(
            |x| ngarch_proxy_call(x[0], 1.0, x[1], r_day, x[2], x[3], x[4], x[5], x[6]).unwrap(),
            &d,
            degrees,
        )
        .unwrap()
    }

    fn true_params() -> FreeParams {
        FreeParams {
            sigma2_0: 4.2e-4,
            beta0: 3.0e-5,
            beta1: 0.93,
            beta2: 0.025,
            lambda_theta: 0.40,
        }
    }

    fn quotes_from_pricer(
        pricer: &dyn Pricer,
        params: &FreeParams,
        spots: &[f64],
        mats: &[f64],
    ) -> QuoteSet {
        let mut quotes = Vec::new();
        for &s in spots {
            for &t in mats {
                let price = pricer.price(s, 1.0, t, RATE_ANNUAL, params).unwrap();
                quotes.push(Quote {
                    spot: s,
                    strike: 1.0,
                    maturity_days: t,
                    rate_annual: RATE_ANNUAL,
                    price,
                });
            }
        }
        QuoteSet::new(quotes).unwrap()
    }

    #[test]
    fn in_mse_zero_on_self_generated_quotes() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let params = true_params();
        let quotes = quotes_from_pricer(&pricer, &params, &[0.92, 1.0, 1.1], &[90.0, 200.0]);
        let mse = in_mse(&params, &quotes, &pricer).unwrap();
        assert!(mse < 1e-24, "self-consistency mse {mse}");
    }

    #[test]
    fn in_mse_constant_offset_is_squared() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let params = true_params();
        let mut quotes = quotes_from_pricer(&pricer, &params, &[0.92, 1.0, 1.12], &[90.0, 240.0])
            .quotes()
            .to_vec();
        for q in quotes.iter_mut() {
            q.price += 0.01;
        }
        let quotes = QuoteSet::new(quotes).unwrap();
        let mse = in_mse(&params, &quotes, &pricer).unwrap();
        assert_relative_eq!(mse, 1e-4, max_relative = 1e-9);
    }

    #[test]
    fn in_mse_matches_scalar_loop_oracle() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let params = FreeParams {
            sigma2_0: 5.1e-4,
            beta0: 4.1e-5,
            beta1: 0.91,
            beta2: 0.03,
            lambda_theta: 0.52,
        };
        // deliberately non-grid quotes to exercise the pointwise path
        let quotes = QuoteSet::new(vec![
            Quote {
                spot: 0.93,
                strike: 1.0,
                maturity_days: 45.0,
                rate_annual: RATE_ANNUAL,
                price: 0.031,
            },
            Quote {
                spot: 1.07,
                strike: 1.0,
                maturity_days: 145.0,
                rate_annual: RATE_ANNUAL,
                price: 0.12,
            },
            Quote {
                spot: 0.88,
                strike: 1.1,
                maturity_days: 245.0,
                rate_annual: RATE_ANNUAL,
                price: 0.02,
            },
        ])
        .unwrap();
        let mse = in_mse(&params, &quotes, &pricer).unwrap();
        let mut want = 0.0;
        for q in quotes.quotes() {
            let model = pricer
                .price(q.spot, q.strike, q.maturity_days, q.rate_annual, &params)
                .unwrap();
            want += (q.price - model) * (q.price - model);
        }
        want /= quotes.len() as f64;
        assert_relative_eq!(mse, want, max_relative = 1e-15);
    }

    #[test]
    fn batched_grid_pricing_matches_pointwise() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let params = true_params();
        let quotes = quotes_from_pricer(
            &pricer,
            &params,
            &[0.9, 0.96, 1.04, 1.1],
            &[80.0, 160.0, 300.0],
        );
        let batched = pricer.price_quotes(&quotes, &params).unwrap();
        for (q, &b) in quotes.quotes().iter().zip(&batched) {
            let single = pricer
                .price(q.spot, q.strike, q.maturity_days, q.rate_annual, &params)
                .unwrap();
            assert_abs_diff_eq!(b, single, epsilon = 1e-13);
        }
    }

    #[test]
    fn calibrate_round_trip_small() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let truth = true_params();
        let spots: Vec<f64> = (0..8).map(|i| 0.88 + 0.04 * i as f64).collect();
        let mats: Vec<f64> = (0..6).map(|i| 60.0 + 55.0 * i as f64).collect();
        let quotes = quotes_from_pricer(&pricer, &truth, &spots, &mats);
        let bounds = free_param_box(p.domain());
        let result = calibrate(&quotes, &pricer, &bounds, &CalibrateOpts::default()).unwrap();
        assert!(result.converged);
        assert!(
            result.in_mse < 1e-12,
            "round-trip in_mse {} after {} iterations",
            result.in_mse,
            result.iterations
        );
        // prices reproduce the quotes
        let score = predict_and_score(&result.params, &quotes, &pricer).unwrap();
        assert!(score.max_abs_err < 1e-5, "max err {}", score.max_abs_err);
    }

    #[test]
    fn calibrate_single_quote_is_feasible() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let truth = true_params();
        let quotes = quotes_from_pricer(&pricer, &truth, &[1.0], &[150.0]);
        let bounds = free_param_box(p.domain());
        let result = calibrate(&quotes, &pricer, &bounds, &CalibrateOpts::default()).unwrap();
        assert!(
            result.in_mse < 1e-10,
            "single-quote in_mse {}",
            result.in_mse
        );
    }

    #[test]
    fn calibrate_stays_inside_box_and_is_deterministic() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let truth = true_params();
        let quotes = quotes_from_pricer(&pricer, &truth, &[0.92, 1.05], &[90.0, 220.0]);
        let bounds = free_param_box(p.domain());
        let opts = CalibrateOpts {
            max_iters: 120,
            ..CalibrateOpts::default()
        };
        let a = calibrate(&quotes, &pricer, &bounds, &opts).unwrap();
        let b = calibrate(&quotes, &pricer, &bounds, &opts).unwrap();
        assert_eq!(a, b);
        let arr = a.params.to_array();
        for (v, &(lo, hi)) in arr.iter().zip(bounds.bounds()) {
            assert!(*v >= lo && *v <= hi, "parameter {v} escaped [{lo}, {hi}]");
        }
        // objective at the result does not exceed the multi-start values
        for i in 1..=opts.n_starts {
            let u: Vec<f64> = [2usize, 3, 5, 7, 11]
                .iter()
                .map(|&bb| super::halton(i, bb))
                .collect();
            let mut arr5 = [0.0; 5];
            for ((&ud, &(lo, hi)), vd) in u.iter().zip(bounds.bounds()).zip(arr5.iter_mut()) {
                *vd = lo + ud * (hi - lo);
            }
            let start_mse = in_mse(&FreeParams::from_array(arr5), &quotes, &pricer).unwrap();
            assert!(a.in_mse <= start_mse + 1e-18);
        }
    }

    #[test]
    fn gradient_descent_strategy_improves_objective() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let truth = true_params();
        let quotes = quotes_from_pricer(&pricer, &truth, &[0.92, 1.0, 1.1], &[100.0, 270.0]);
        let bounds = free_param_box(p.domain());
        let opts = CalibrateOpts {
            strategy: Strategy::GradientDescent,
            max_iters: 60,
            ..CalibrateOpts::default()
        };
        let result = calibrate(&quotes, &pricer, &bounds, &opts).unwrap();
        assert!(
            result.in_mse < 1e-6,
            "descent left in_mse {}",
            result.in_mse
        );
    }

    #[test]
    fn predict_and_score_self_prediction() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        let params = true_params();
        let quotes = quotes_from_pricer(&pricer, &params, &[0.92, 1.0, 1.12], &[75.0, 190.0]);
        let score = predict_and_score(&params, &quotes, &pricer).unwrap();
        assert!(score.max_abs_err < 1e-12);
        assert!(score.mean_abs_err <= score.max_abs_err);
    }

    /// Quotes from the Monte Carlo pricer at known parameters; calibrating
    /// with the reduced polynomial should land within a factor of two of the
    /// in-sample error the full interpolant achieves.
    #[test]
    fn reduced_backend_matches_full_backend_quality() {
        let d = Domain::new(vec![
            (0.85, 1.15),
            (10.0, 60.0),
            (3.0e-4, 6.0e-4),
            (2.0e-5, 5.0e-5),
            (0.90, 0.96),
            (0.015, 0.035),
            (0.20, 0.60),
        ])
        .unwrap();
        let r_day = RATE_ANNUAL / 365.0;
        let p = Interpolant::build_fn(
            |x| ngarch_proxy_call(x[0], 1.0, x[1], r_day, x[2], x[3], x[4], x[5], x[6]).unwrap(),
            &d,
            &[3, 3, 2, 1, 2, 2, 2],
        )
        .unwrap();
        let q = compress(&p, &TruncationSpec::new(1e-12).unwrap()).unwrap();

        // market quotes from the Monte Carlo model at the same parameters
        let truth = FreeParams {
            sigma2_0: 4.0e-4,
            beta0: 3.0e-5,
            beta1: 0.92,
            beta2: 0.03,
            lambda_theta: 0.45,
        };
        let cfg = models::McConfig {
            paths: 20_000,
            seed: 2024,
            antithetic: true,
        };
        let mut quotes = Vec::new();
        for &s in &[0.9, 1.0, 1.1] {
            for &t in &[20.0, 40.0, 60.0] {
                let params = models::NgarchParams {
                    r: r_day,
                    beta0: truth.beta0,
                    beta1: truth.beta1,
                    beta2: truth.beta2,
                    lambda_theta: truth.lambda_theta,
                    sigma2_0: truth.sigma2_0,
                    s0: s,
                    t_m: t as u32,
                };
                quotes.push(Quote {
                    spot: s,
                    strike: 1.0,
                    maturity_days: t,
                    rate_annual: RATE_ANNUAL,
                    price: models::ngarch_price(&params, 1.0, &cfg).unwrap().price,
                });
            }
        }
        let quotes = QuoteSet::new(quotes).unwrap();
        let bounds = Domain::new(d.bounds()[2..7].to_vec()).unwrap();
        let opts = CalibrateOpts {
            max_iters: 200,
            ..CalibrateOpts::default()
        };
        let full_pricer = PolyPricer::new(&p).unwrap();
        let reduced_pricer = PolyPricer::new(&q).unwrap();
        let full = calibrate(&quotes, &full_pricer, &bounds, &opts).unwrap();
        let reduced = calibrate(&quotes, &reduced_pricer, &bounds, &opts).unwrap();
        assert!(
            reduced.in_mse <= 2.0 * full.in_mse,
            "reduced backend {} vs full {}",
            reduced.in_mse,
            full.in_mse
        );
    }

    /// Synthetic-market workflow: quotes from the Heston generator, NGARCH
    /// polynomial calibration, then prediction on a shifted grid. Prediction
    /// errors stay the size of the in-sample errors.
    #[test]
    fn heston_market_prediction_errors_match_in_sample() {
        let p = proxy_interpolant(&[3, 3, 2, 1, 2, 2, 2]);
        let pricer = PolyPricer::new(&p).unwrap();
        // annual-unit Heston parameters roughly matching the daily box
        let heston = models::HestonParams {
            r: RATE_ANNUAL,
            kappa: 3.0,
            theta_star: 0.16,
            sigma_star: 0.3,
            v0: 0.15,
            rho: -0.6,
        };
        let cfg = models::McConfig {
            paths: 40_000,
            seed: 77,
            antithetic: true,
        };
        let market = |spots: &[f64], mats: &[f64]| -> QuoteSet {
            let mut quotes = Vec::new();
            for &s in spots {
                for &t in mats {
                    quotes.push(Quote {
                        spot: s,
                        strike: 1.0,
                        maturity_days: t,
                        rate_annual: RATE_ANNUAL,
                        price: models::heston_price(&heston, s, 1.0, t, &cfg)
                            .unwrap()
                            .price,
                    });
                }
            }
            QuoteSet::new(quotes).unwrap()
        };
        let in_quotes = market(&[0.9, 1.0, 1.1], &[60.0, 150.0, 240.0]);
        let out_quotes = market(&[0.85, 0.95, 1.05], &[45.0, 135.0, 225.0]);
        let bounds = free_param_box(p.domain());
        let opts = CalibrateOpts {
            max_iters: 200,
            ..CalibrateOpts::default()
        };
        let fit = calibrate(&in_quotes, &pricer, &bounds, &opts).unwrap();
        let in_score = predict_and_score(&fit.params, &in_quotes, &pricer).unwrap();
        let out_score = predict_and_score(&fit.params, &out_quotes, &pricer).unwrap();
        assert!(
            out_score.mean_abs_err <= 3.0 * in_score.mean_abs_err,
            "prediction {} vs in-sample {}",
            out_score.mean_abs_err,
            in_score.mean_abs_err
        );
    }

    #[test]
    fn mc_pricer_backend_prices_through_homogeneity() {
        let cfg = models::McConfig {
            paths: 4_000,
            seed: 5,
            antithetic: true,
        };
        let pricer = McNgarchPricer { cfg };
        let params = true_params();
        let a = pricer.price(2.0, 2.0, 50.0, RATE_ANNUAL, &params).unwrap();
        let b = pricer.price(1.0, 1.0, 50.0, RATE_ANNUAL, &params).unwrap();
        assert_relative_eq!(a, 2.0 * b, max_relative = 1e-12);
    }
}
