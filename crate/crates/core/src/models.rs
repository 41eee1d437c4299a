//! Pricing oracles: Monte Carlo NGARCH(1,1) European calls under the
//! risk-neutral measure, a Heston stochastic-volatility generator for
//! synthetic market quotes, and closed-form lognormal prices for validation.
//!
//! Every simulation is deterministic for a fixed seed; parallel interpolant
//! builds derive per-node seeds with [`mix_seed`] so results do not depend on
//! scheduling. One GARCH step is one day; NGARCH rates are quoted per day,
//! Heston parameters per year with a daily Euler step.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::calibration::{Quote, QuoteSet};
use crate::error::{Error, Result};

/// NGARCH(1,1) parameters in the risk-neutral measure.
///
/// `r` is per day, `t_m` is the maturity in whole days, `sigma2_0` the
/// variance of the first daily return. The strike is normalised to 1 when
/// the parameters feed an interpolant build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgarchParams {
    pub r: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda_theta: f64,
    pub sigma2_0: f64,
    pub s0: f64,
    pub t_m: u32,
}

impl NgarchParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta0 < 0.0 || self.beta1 < 0.0 || self.beta2 < 0.0 {
            return Err(Error::Domain(
                "GARCH coefficients beta0, beta1, beta2 must be >= 0".into(),
            ));
        }
        if !(self.sigma2_0 > 0.0) {
            return Err(Error::Domain("initial variance must be positive".into()));
        }
        if !(self.s0 > 0.0) {
            return Err(Error::Domain("spot must be positive".into()));
        }
        Ok(())
    }
}

/// Heston stochastic-volatility parameters (annual units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub r: f64,
    pub kappa: f64,
    pub theta_star: f64,
    pub sigma_star: f64,
    pub v0: f64,
    pub rho: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa < 0.0 || self.theta_star < 0.0 || self.sigma_star < 0.0 || self.v0 < 0.0 {
            return Err(Error::Domain(
                "kappa, theta*, sigma*, v0 must all be >= 0".into(),
            ));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Domain(format!(
                "correlation rho = {} outside [-1, 1]",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Domain("path count must be positive".into()));
        }
        if self.antithetic && (self.paths < 2 || !self.paths.is_multiple_of(2)) {
            return Err(Error::Domain(
                "antithetic sampling needs an even path count >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// A Monte Carlo price with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
}

/// Derives a per-node seed from a base seed and a node index (splitmix64).
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mc_reduce(samples: impl Iterator<Item = f64>, discount: f64) -> McEstimate {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for s in samples {
        let d = discount * s;
        n += 1;
        sum += d;
        sumsq += d * d;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        price: mean,
        std_error: (var / nf).sqrt(),
    }
}

fn ngarch_path(p: &NgarchParams, shocks: &[f64], negate: bool) -> Result<f64> {
    let mut v = p.sigma2_0;
    let mut logret = 0.0;
    for (t, &raw) in shocks.iter().enumerate() {
        let z = if negate { -raw } else { raw };
        logret += p.r - 0.5 * v + v.sqrt() * z;
        let lev = z - p.lambda_theta;
        v = p.beta0 + p.beta1 * v + p.beta2 * v * lev * lev;
        if !v.is_finite() || !logret.is_finite() {
            return Err(Error::NonFinite {
                context: "ngarch path",
                step: t,
            });
        }
    }
    Ok(p.s0 * logret.exp())
}

/// Monte Carlo price of a European call under NGARCH(1,1) dynamics.
pub fn ngarch_price(p: &NgarchParams, strike: f64, cfg: &McConfig) -> Result<McEstimate> {
    p.validate()?;
    cfg.validate()?;
    if !(strike > 0.0) {
        return Err(Error::Domain("strike must be positive".into()));
    }
    if p.t_m == 0 {
        return Ok(McEstimate {
            price: (p.s0 - strike).max(0.0),
            std_error: 0.0,
        });
    }
    let discount = (-p.r * p.t_m as f64).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let steps = p.t_m as usize;
    let mut shocks = vec![0.0; steps];
    if cfg.antithetic {
        let pairs = cfg.paths / 2;
        let mut samples = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            for z in shocks.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
            let up = (ngarch_path(p, &shocks, false)? - strike).max(0.0);
            let dn = (ngarch_path(p, &shocks, true)? - strike).max(0.0);
            samples.push(0.5 * (up + dn));
        }
        Ok(mc_reduce(samples.into_iter(), discount))
    } else {
        let mut samples = Vec::with_capacity(cfg.paths);
        for _ in 0..cfg.paths {
            for z in shocks.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
            samples.push((ngarch_path(p, &shocks, false)? - strike).max(0.0));
        }
        Ok(mc_reduce(samples.into_iter(), discount))
    }
}

/// Relative gap of the homogeneity identity `price(c s0, c K) = c price(s0, K)`
/// at a common seed. The payoff is linear under a shared shock stream, so the
/// gap stays at rounding level.
pub fn ngarch_price_homogeneity_check(
    p: &NgarchParams,
    strike: f64,
    c: f64,
    cfg: &McConfig,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::Domain("scale factor must be positive".into()));
    }
    let base = ngarch_price(p, strike, cfg)?.price;
    let scaled_params = NgarchParams { s0: c * p.s0, ..*p };
    let scaled = ngarch_price(&scaled_params, c * strike, cfg)?.price;
    Ok((scaled - c * base).abs() / (c * base).abs().max(f64::MIN_POSITIVE))
}

/// Monte Carlo price of a European call under Heston dynamics, full-truncation
/// Euler at daily steps. `maturity_days` is rounded to whole days.
pub fn heston_price(
    p: &HestonParams,
    s0: f64,
    strike: f64,
    maturity_days: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    p.validate()?;
    cfg.validate()?;
    if !(s0 > 0.0) || !(strike > 0.0) {
        return Err(Error::Domain("spot and strike must be positive".into()));
    }
    if !(maturity_days >= 0.0) {
        return Err(Error::Domain("maturity must be >= 0".into()));
    }
    let steps = maturity_days.round() as usize;
    if steps == 0 {
        return Ok(McEstimate {
            price: (s0 - strike).max(0.0),
            std_error: 0.0,
        });
    }
    let dt = 1.0 / 365.0;
    let horizon = steps as f64 * dt;
    let discount = (-p.r * horizon).exp();
    let rho_c = (1.0 - p.rho * p.rho).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut shocks = vec![(0.0, 0.0); steps];

    let run_path = |shocks: &[(f64, f64)], negate: bool| -> Result<f64> {
        let mut v = p.v0;
        let mut logret = 0.0;
        for (t, &(e1, e2)) in shocks.iter().enumerate() {
            let (e1, e2) = if negate { (-e1, -e2) } else { (e1, e2) };
            let z1 = e1;
            let z2 = p.rho * e1 + rho_c * e2;
            let vp = v.max(0.0);
            logret += (p.r - 0.5 * vp) * dt + (vp * dt).sqrt() * z1;
            v += p.kappa * (p.theta_star - vp) * dt + p.sigma_star * (vp * dt).sqrt() * z2;
            if !v.is_finite() || !logret.is_finite() {
                return Err(Error::NonFinite {
                    context: "heston path",
                    step: t,
                });
            }
        }
        Ok(s0 * logret.exp())
    };

    let n_outer = if cfg.antithetic {
        cfg.paths / 2
    } else {
        cfg.paths
    };
    let mut samples = Vec::with_capacity(n_outer);
    for _ in 0..n_outer {
        for pair in shocks.iter_mut() {
            *pair = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        if cfg.antithetic {
            let up = (run_path(&shocks, false)? - strike).max(0.0);
            let dn = (run_path(&shocks, true)? - strike).max(0.0);
            samples.push(0.5 * (up + dn));
        } else {
            samples.push((run_path(&shocks, false)? - strike).max(0.0));
        }
    }
    Ok(mc_reduce(samples.into_iter(), discount))
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Closed-form European call with aggregate log-drift `rate_total` and
/// aggregate log-variance `variance_total`.
pub fn lognormal_call(s0: f64, strike: f64, rate_total: f64, variance_total: f64) -> Result<f64> {
    if !(s0 > 0.0) || !(strike > 0.0) {
        return Err(Error::Domain("spot and strike must be positive".into()));
    }
    if !(variance_total >= 0.0) {
        return Err(Error::Domain(format!(
            "total variance {variance_total} must be >= 0"
        )));
    }
    let df = (-rate_total).exp();
    if variance_total == 0.0 {
        return Ok((s0 - strike * df).max(0.0));
    }
    let sd = variance_total.sqrt();
    let d1 = ((s0 / strike).ln() + rate_total + 0.5 * variance_total) / sd;
    let d2 = d1 - sd;
    Ok(s0 * normal_cdf(d1) - strike * df * normal_cdf(d2))
}

/// Closed-form call under the expected NGARCH variance path: the variance
/// recursion is replaced by its conditional expectation, which follows
/// `E[v_{t+1}] = beta0 + g E[v_t]` with persistence
/// `g = beta1 + beta2 (1 + lambda_theta^2)`, integrated in continuous time
/// and priced lognormally. A smooth, cheap stand-in for the Monte Carlo
/// pricer in round-trip and convergence studies.
#[allow(clippy::too_many_arguments)]
pub fn ngarch_proxy_call(
    s0: f64,
    strike: f64,
    maturity_days: f64,
    r_day: f64,
    sigma2_0: f64,
    beta0: f64,
    beta1: f64,
    beta2: f64,
    lambda_theta: f64,
) -> Result<f64> {
    if !(maturity_days >= 0.0) {
        return Err(Error::Domain("maturity must be >= 0".into()));
    }
    let g = beta1 + beta2 * (1.0 + lambda_theta * lambda_theta);
    if !(g > 0.0) {
        return Err(Error::Domain(
            "variance persistence must be positive".into(),
        ));
    }
    let t = maturity_days;
    let lg = g.ln();
    // integral of E[v](tau) = g^tau sigma2_0 + beta0 (g^tau - 1)/(g - 1)
    let total_var = if lg.abs() < 1e-8 {
        sigma2_0 * t + 0.5 * beta0 * t * t
    } else {
        let geom = ((t * lg).exp() - 1.0) / lg;
        sigma2_0 * geom + beta0 / (g - 1.0) * (geom - t)
    };
    lognormal_call(s0, strike, r_day * t, total_var.max(0.0))
}

/// Prices every `(spot, maturity)` pair with the given oracle and packages
/// the results as a quote set at a common strike and annual rate.
pub fn make_quote_grid<F>(
    pricer: F,
    spots: &[f64],
    maturities: &[f64],
    strike: f64,
    rate_annual: f64,
) -> Result<QuoteSet>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if spots.is_empty() || maturities.is_empty() {
        return Err(Error::Domain(
            "quote grid needs at least one spot and one maturity".into(),
        ));
    }
    let mut quotes = Vec::with_capacity(spots.len() * maturities.len());
    for &spot in spots {
        for &maturity in maturities {
            quotes.push(Quote {
                spot,
                strike,
                maturity_days: maturity,
                rate_annual,
                price: pricer(spot, maturity)?,
            });
        }
    }
    QuoteSet::new(quotes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn base_params() -> NgarchParams {
        NgarchParams {
            r: 0.05 / 365.0,
            beta0: 1e-6,
            beta1: 0.8,
            beta2: 0.1,
            lambda_theta: 1.0,
            sigma2_0: 1e-4,
            s0: 1.0,
            t_m: 100,
        }
    }

    #[test]
    fn ngarch_zero_maturity_is_intrinsic() {
        let p = NgarchParams {
            t_m: 0,
            s0: 1.25,
            ..base_params()
        };
        let cfg = McConfig {
            paths: 10,
            seed: 1,
            antithetic: false,
        };
        let e = ngarch_price(&p, 1.0, &cfg).unwrap();
        assert_eq!(e.price, 0.25);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn ngarch_frozen_variance_matches_lognormal() {
        // beta0 = 0, beta1 = 1, beta2 = 0 keeps the variance at sigma2_0
        let p = NgarchParams {
            beta0: 0.0,
            beta1: 1.0,
            beta2: 0.0,
            sigma2_0: 1.5e-4,
            t_m: 120,
            ..base_params()
        };
        let cfg = McConfig {
            paths: 200_000,
            seed: 7,
            antithetic: true,
        };
        let e = ngarch_price(&p, 1.0, &cfg).unwrap();
        let total_var = p.sigma2_0 * p.t_m as f64;
        let want = lognormal_call(p.s0, 1.0, p.r * p.t_m as f64, total_var).unwrap();
        assert!(
            (e.price - want).abs() < 3.0 * e.std_error,
            "MC {} vs closed form {} (se {})",
            e.price,
            want,
            e.std_error
        );
    }

    /// Independent straight-loop simulator used once to pin the regression
    /// value below; kept so the constant can be re-derived.
    fn straight_loop_price(p: &NgarchParams, strike: f64, paths: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = 0.0;
        for _ in 0..paths {
            let mut s = p.s0;
            let mut v = p.sigma2_0;
            for _ in 0..p.t_m {
                let z: f64 = rng.sample(StandardNormal);
                s *= (p.r - 0.5 * v + v.sqrt() * z).exp();
                let lev = z - p.lambda_theta;
                v = p.beta0 + p.beta1 * v + p.beta2 * v * lev * lev;
            }
            acc += (s - strike).max(0.0);
        }
        (-p.r * p.t_m as f64).exp() * acc / paths as f64
    }

    #[test]
    fn ngarch_seed42_regression_value() {
        let p = base_params();
        let cfg = McConfig {
            paths: 20_000,
            seed: 42,
            antithetic: false,
        };
        let got = ngarch_price(&p, 1.0, &cfg).unwrap().price;
        let oracle = straight_loop_price(&p, 1.0, cfg.paths, cfg.seed);
        assert_relative_eq!(got, oracle, max_relative = 1e-10);
        // frozen from the straight-loop simulator at this seed
        assert_relative_eq!(got, 4.6809521556990e-2, max_relative = 1e-10);
    }

    #[test]
    fn ngarch_homogeneity() {
        let p = base_params();
        let cfg = McConfig {
            paths: 4_000,
            seed: 7,
            antithetic: false,
        };
        for c in [1.0, 2.0, 0.5, 3.0] {
            let gap = ngarch_price_homogeneity_check(&p, 1.0, c, &cfg).unwrap();
            assert!(gap < 1e-12, "homogeneity gap {gap} at c = {c}");
        }
    }

    #[test]
    fn ngarch_monotone_in_spot_and_strike() {
        let cfg = McConfig {
            paths: 8_000,
            seed: 11,
            antithetic: true,
        };
        let mut last = -1.0;
        for s0 in [0.8, 0.9, 1.0, 1.1, 1.2] {
            let p = NgarchParams {
                s0,
                ..base_params()
            };
            let price = ngarch_price(&p, 1.0, &cfg).unwrap().price;
            assert!(price >= last, "price not monotone in spot");
            last = price;
        }
        let p = base_params();
        let mut last = f64::INFINITY;
        for k in [0.8, 0.9, 1.0, 1.1, 1.2] {
            let price = ngarch_price(&p, k, &cfg).unwrap().price;
            assert!(price <= last, "price not monotone in strike");
            last = price;
        }
    }

    #[test]
    fn ngarch_same_seed_is_bitwise_deterministic() {
        let p = base_params();
        let cfg = McConfig {
            paths: 2_000,
            seed: 99,
            antithetic: true,
        };
        let a = ngarch_price(&p, 1.0, &cfg).unwrap();
        let b = ngarch_price(&p, 1.0, &cfg).unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn ngarch_std_error_scales_with_paths() {
        let p = base_params();
        let se = |paths| {
            let cfg = McConfig {
                paths,
                seed: 5,
                antithetic: false,
            };
            ngarch_price(&p, 1.0, &cfg).unwrap().std_error
        };
        let ratio = se(80_000) / se(20_000);
        assert!(
            (0.4..0.6).contains(&ratio),
            "quadrupling paths gave se ratio {ratio}"
        );
    }

    fn heston_base() -> HestonParams {
        HestonParams {
            r: 0.03,
            kappa: 1.5,
            theta_star: 0.04,
            sigma_star: 0.3,
            v0: 0.07,
            rho: -0.6,
        }
    }

    #[test]
    fn heston_zero_vol_of_vol_matches_ode_plus_lognormal() {
        let p = HestonParams {
            sigma_star: 0.0,
            ..heston_base()
        };
        let cfg = McConfig {
            paths: 200_000,
            seed: 3,
            antithetic: true,
        };
        let days = 180.0;
        let e = heston_price(&p, 1.0, 1.0, days, &cfg).unwrap();
        // v(t) = theta + (v0 - theta) exp(-kappa t); integrate to maturity
        let t = days / 365.0;
        let integrated =
            p.theta_star * t + (p.v0 - p.theta_star) * (1.0 - (-p.kappa * t).exp()) / p.kappa;
        let want = lognormal_call(1.0, 1.0, p.r * t, integrated).unwrap();
        assert!(
            (e.price - want).abs() < 3.0 * e.std_error,
            "MC {} vs ODE closed form {} (se {})",
            e.price,
            want,
            e.std_error
        );
    }

    #[test]
    fn heston_rho_irrelevant_without_vol_of_vol() {
        let cfg = McConfig {
            paths: 2_000,
            seed: 13,
            antithetic: false,
        };
        let a = heston_price(
            &HestonParams {
                sigma_star: 0.0,
                rho: -0.9,
                ..heston_base()
            },
            1.0,
            1.0,
            90.0,
            &cfg,
        )
        .unwrap();
        let b = heston_price(
            &HestonParams {
                sigma_star: 0.0,
                rho: 0.4,
                ..heston_base()
            },
            1.0,
            1.0,
            90.0,
            &cfg,
        )
        .unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
    }

    #[test]
    fn heston_zero_maturity_is_intrinsic() {
        let cfg = McConfig {
            paths: 10,
            seed: 1,
            antithetic: false,
        };
        let e = heston_price(&heston_base(), 1.5, 1.0, 0.0, &cfg).unwrap();
        assert_eq!(e.price, 0.5);
    }

    #[test]
    fn lognormal_degenerate_and_deep_itm() {
        assert_eq!(lognormal_call(1.25, 1.0, 0.0, 0.0).unwrap(), 0.25);
        let c = lognormal_call(10.0, 1.0, 0.04, 0.02).unwrap();
        assert_abs_diff_eq!(c, 10.0 - (-0.04f64).exp(), epsilon = 1e-10);
        assert!(lognormal_call(1.0, 1.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn lognormal_at_the_money_matches_quadrature_constant() {
        // int max(e^y - 1, 0) phi(y; -var/2, var) dy at var = 0.04, frozen
        // from a Simpson quadrature of the payoff against the density.
        let c = lognormal_call(1.0, 1.0, 0.0, 0.04).unwrap();
        assert_abs_diff_eq!(c, 0.079655674554058, epsilon = 1e-12);
    }

    #[test]
    fn lognormal_put_call_parity_bounds() {
        for (s, k, r, var) in [
            (1.0, 1.0, 0.02, 0.03),
            (0.8, 1.1, 0.0, 0.1),
            (1.3, 0.9, 0.05, 0.002),
        ] {
            let c = lognormal_call(s, k, r, var).unwrap();
            let kdf = k * f64::exp(-r);
            let put = c - (s - kdf);
            assert!(put >= -1e-12, "parity lower bound violated: {put}");
            assert!(put <= kdf + 1e-12, "parity upper bound violated: {put}");
        }
    }

    #[test]
    fn quote_grid_shapes() {
        let price = |s: f64, t: f64| Ok(0.1 * s + 1e-4 * t);
        let one = make_quote_grid(price, &[1.0], &[30.0], 1.0, 0.05).unwrap();
        assert_eq!(one.quotes().len(), 1);

        let spots: Vec<f64> = (0..20).map(|i| 0.8 + 0.02 * i as f64).collect();
        let mats: Vec<f64> = (0..12).map(|i| 10.0 + 30.0 * i as f64).collect();
        let grid = make_quote_grid(price, &spots, &mats, 1.0, 0.05).unwrap();
        assert_eq!(grid.quotes().len(), 240);
    }

    #[test]
    fn quote_grid_zero_variance_model_gives_intrinsic() {
        let r_day = 0.05 / 365.0;
        let price = |s: f64, t: f64| lognormal_call(s, 1.0, r_day * t, 0.0);
        let q = make_quote_grid(price, &[0.9, 1.0, 1.2], &[10.0, 100.0], 1.0, 0.05).unwrap();
        for quote in q.quotes() {
            let want = (quote.spot - (-r_day * quote.maturity_days).exp()).max(0.0);
            assert_abs_diff_eq!(quote.price, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn mix_seed_spreads_indices() {
        let a = mix_seed(42, 0);
        let b = mix_seed(42, 1);
        let c = mix_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_seed(42, 0));
    }
}
