//! `chebrb`: batch front end for building, compressing, evaluating and
//! calibrating Chebyshev reduced-basis pricing polynomials.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use chebrb_core::calibration::{calibrate, CalibrateOpts, PolyPricer, Strategy};
use chebrb_core::interpolant::{mse_on_grid, ChebEval, Domain, GridEval, Interpolant, ProductGrid};
use chebrb_core::models::{
    heston_price, lognormal_call, mix_seed, ngarch_price, HestonParams, McConfig, NgarchParams,
};
use chebrb_core::reduced_basis::{compress, full_tensor_bytes, TruncationSpec};
use chebrb_core::tensor::{for_each_index, NdArray};

use chebrb_cli::container::{self, Poly};
use chebrb_cli::csvio::{self, GridSpec};

#[derive(Parser)]
#[command(name = "chebrb", version, about)]
struct Cli {
    /// Worker threads for build and evaluation (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an interpolant of a pricing oracle and write it to a container.
    Build(BuildArgs),
    /// Compress a full interpolant into a reduced polynomial.
    Compress(CompressArgs),
    /// Evaluate a polynomial container on a grid CSV.
    Eval(EvalArgs),
    /// Calibrate the five free NGARCH parameters against a quotes CSV.
    Calibrate(CalibrateArgs),
    /// Run the node-doubling convergence study and emit CSV rows.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Closed-form lognormal call over [s0, sigma2_day, t_days] (3 dims,
    /// rate fixed by --rate) or [s0, sigma2_day, t_days, rate_annual] (4).
    Lognormal,
    /// Monte Carlo NGARCH(1,1) over the 7-dim layout
    /// [s0, t_m, sigma2_0, beta0, beta1, beta2, lambda_theta].
    Ngarch,
    /// Monte Carlo Heston over [s0, t_m, v0, kappa, theta_star, sigma_star, rho].
    Heston,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Per-dimension polynomial degrees, comma separated, e.g. `12,12,12`.
    #[arg(long)]
    degrees: String,
    /// Per-dimension bounds `min:max`, comma separated.
    #[arg(long)]
    bounds: String,
    /// Annual risk-free rate for models that fix it at build time.
    #[arg(long, default_value_t = 0.05)]
    rate: f64,
    /// Monte Carlo paths per node.
    #[arg(long, default_value_t = 400_000)]
    paths: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Antithetic variates for the Monte Carlo models.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    antithetic: bool,
    /// Store the polynomial as per-node slices along --split-axis.
    #[arg(long)]
    split: bool,
    #[arg(long, default_value_t = 0)]
    split_axis: usize,
    /// Refuse unsplit tensors above this size.
    #[arg(long, default_value_t = 1 << 30)]
    split_threshold: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompressArgs {
    /// Input kind-0 container.
    #[arg(long = "in")]
    input: PathBuf,
    /// MSE budget on the interpolation nodes.
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    poly: PathBuf,
    /// Grid CSV: `dim,values...` product rows or explicit point rows.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    poly: PathBuf,
    /// Quotes CSV with header spot,strike,maturity_days,rate_annual,price.
    #[arg(long)]
    quotes: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    starts: usize,
    #[arg(long, default_value_t = 400)]
    max_iters: usize,
    /// Use finite-difference gradient descent instead of Nelder-Mead.
    #[arg(long)]
    gradient: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Oracle for the study; only the closed-form lognormal keeps the
    /// doubling run free of Monte Carlo noise.
    #[arg(long, value_enum, default_value_t = Model::Lognormal)]
    model: Model,
    #[arg(long, default_value = "0.75:1.2,1e-4:2.25e-4,120:365")]
    bounds: String,
    #[arg(long, default_value_t = 0.05)]
    rate: f64,
    /// Control grid density: m-1 equally spaced interior points per axis.
    #[arg(long, default_value_t = 7)]
    control_m: usize,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Compress(args) => cmd_compress(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|part| {
            let d: usize = part
                .trim()
                .parse()
                .with_context(|| format!("bad degree '{part}'"))?;
            if d == 0 {
                bail!("degrees must be >= 1");
            }
            Ok(d)
        })
        .collect()
}

fn parse_bounds(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .trim()
                .split_once(':')
                .with_context(|| format!("bound '{part}' is not of the form min:max"))?;
            let lo: f64 = lo.parse().with_context(|| format!("bad bound '{lo}'"))?;
            let hi: f64 = hi.parse().with_context(|| format!("bad bound '{hi}'"))?;
            Ok((lo, hi))
        })
        .collect()
}

type Oracle = Box<dyn Fn(usize, &[f64]) -> chebrb_core::Result<f64> + Sync + Send>;

fn build_oracle(
    model: Model,
    dims: usize,
    rate_annual: f64,
    paths: usize,
    seed: u64,
    antithetic: bool,
) -> Result<Oracle> {
    match (model, dims) {
        (Model::Lognormal, 3) => {
            let r_day = rate_annual / 365.0;
            Ok(Box::new(move |_, x| {
                lognormal_call(x[0], 1.0, r_day * x[2], x[1] * x[2])
            }))
        }
        (Model::Lognormal, 4) => Ok(Box::new(move |_, x| {
            lognormal_call(x[0], 1.0, x[3] / 365.0 * x[2], x[1] * x[2])
        })),
        (Model::Lognormal, d) => {
            bail!("lognormal expects 3 or 4 dimensions, got {d}")
        }
        (Model::Ngarch, 7) => {
            let r_day = rate_annual / 365.0;
            Ok(Box::new(move |node, x| {
                let p = NgarchParams {
                    r: r_day,
                    s0: x[0],
                    t_m: x[1].round() as u32,
                    sigma2_0: x[2],
                    beta0: x[3],
                    beta1: x[4],
                    beta2: x[5],
                    lambda_theta: x[6],
                };
                let cfg = McConfig {
                    paths,
                    seed: mix_seed(seed, node as u64),
                    antithetic,
                };
                Ok(ngarch_price(&p, 1.0, &cfg)?.price)
            }))
        }
        (Model::Ngarch, d) => bail!(
            "ngarch expects the 7-dim layout [s0, t_m, sigma2_0, beta0, beta1, beta2, lambda_theta], got {d} dims"
        ),
        (Model::Heston, 7) => Ok(Box::new(move |node, x| {
            let p = HestonParams {
                r: rate_annual,
                v0: x[2],
                kappa: x[3],
                theta_star: x[4],
                sigma_star: x[5],
                rho: x[6],
            };
            let cfg = McConfig {
                paths,
                seed: mix_seed(seed, node as u64),
                antithetic,
            };
            Ok(heston_price(&p, x[0], 1.0, x[1], &cfg)?.price)
        })),
        (Model::Heston, d) => bail!(
            "heston expects the 7-dim layout [s0, t_m, v0, kappa, theta_star, sigma_star, rho], got {d} dims"
        ),
    }
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let degrees = parse_degrees(&args.degrees)?;
    let bounds = parse_bounds(&args.bounds)?;
    if degrees.len() != bounds.len() {
        bail!("{} degrees for {} bounds", degrees.len(), bounds.len());
    }
    let domain = Domain::new(bounds)?;
    let extents: Vec<usize> = degrees.iter().map(|&d| d + 1).collect();
    let full_bytes = full_tensor_bytes(&extents);
    if full_bytes > args.split_threshold && !args.split {
        bail!(
            "coefficient tensor needs {full_bytes} bytes, above the split threshold of {}; \
             pass --split to store one slice per Chebyshev node of --split-axis",
            args.split_threshold
        );
    }
    if args.split && args.split_axis >= degrees.len() {
        bail!("--split-axis {} out of range", args.split_axis);
    }
    let oracle = build_oracle(
        args.model,
        degrees.len(),
        args.rate,
        args.paths,
        args.seed,
        args.antithetic,
    )?;
    let nodes: usize = extents.iter().product();
    let t0 = Instant::now();
    let interp = Interpolant::build(|i, x| oracle(i, x), &domain, &degrees)?;
    let poly = if args.split {
        Poly::Split(interp.split(args.split_axis)?)
    } else {
        Poly::Full(interp)
    };
    let wall = t0.elapsed().as_secs_f64();
    container::write_poly(&args.out, &poly)?;
    println!(
        "nodes={nodes} oracle_calls={nodes} wall_s={wall:.3} kind={} out={}",
        poly.kind(),
        args.out.display()
    );
    Ok(())
}

fn cmd_compress(args: CompressArgs) -> Result<()> {
    let poly = container::read_poly(&args.input)?;
    let Poly::Full(p) = poly else {
        bail!("compress expects a kind-0 (full tensor) container");
    };
    let spec = TruncationSpec::new(args.epsilon)?;
    let t0 = Instant::now();
    let q = compress(&p, &spec)?;
    let wall = t0.elapsed().as_secs_f64();
    let report = q.storage_report();
    let grid = p.node_grid()?;
    let p_vals = p.eval_grid(&grid)?;
    let mse_phi = mse_on_grid(&q, &p_vals, &grid)?;
    let retained: Vec<String> = q.retained().iter().map(|m| m.to_string()).collect();
    container::write_poly(&args.out, &Poly::Reduced(q))?;
    println!(
        "retained=[{}] savings={:.3}% mse_phi={mse_phi:.3e} wall_s={wall:.3} out={}",
        retained.join(","),
        100.0 * report.savings_fraction,
        args.out.display()
    );
    Ok(())
}

fn eval_poly_grid(poly: &Poly, grid: &ProductGrid) -> Result<NdArray> {
    Ok(match poly {
        Poly::Full(p) | Poly::Split(p) => p.eval_grid(grid)?,
        Poly::Reduced(q) => q.eval_grid(grid)?,
    })
}

fn eval_poly_point(poly: &Poly, point: &[f64]) -> Result<f64> {
    Ok(match poly {
        Poly::Full(p) | Poly::Split(p) => p.eval_point(point)?,
        Poly::Reduced(q) => q.eval_point(point)?,
    })
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let poly = container::read_poly(&args.poly)?;
    let spec = csvio::read_grid(&args.grid, poly.dim())?;
    let t0 = Instant::now();
    let rows: Vec<(Vec<f64>, f64)> = match &spec {
        GridSpec::Product(axes) => {
            let grid = ProductGrid::new(axes.clone(), poly.domain())?;
            let vals = eval_poly_grid(&poly, &grid)?;
            let mut rows = Vec::with_capacity(vals.len());
            let mut flat = 0;
            for_each_index(&grid.extents(), |idx| {
                rows.push((grid.point_at(idx), vals.data()[flat]));
                flat += 1;
            });
            rows
        }
        GridSpec::Points(points) => points
            .iter()
            .map(|pt| Ok((pt.clone(), eval_poly_point(&poly, pt)?)))
            .collect::<Result<_>>()?,
    };
    let wall = t0.elapsed().as_secs_f64();
    csvio::write_prices(&args.out, poly.dim(), &rows)?;
    println!(
        "points={} wall_s={wall:.3} out={}",
        rows.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct CalibrationOutput {
    sigma2_0: f64,
    beta0: f64,
    beta1: f64,
    beta2: f64,
    lambda_theta: f64,
    in_mse: f64,
    iterations: usize,
    converged: bool,
    stationarity: f64,
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let poly = container::read_poly(&args.poly)?;
    if poly.dim() != 7 {
        bail!(
            "calibration expects the 7-variable layout \
             [s0, t_m, sigma2_0, beta0, beta1, beta2, lambda_theta], got {} dims",
            poly.dim()
        );
    }
    let quotes = csvio::read_quotes(&args.quotes)?;
    let bounds = Domain::new(poly.domain().bounds()[2..7].to_vec())?;
    let opts = CalibrateOpts {
        strategy: if args.gradient {
            Strategy::GradientDescent
        } else {
            Strategy::NelderMead
        },
        n_starts: args.starts,
        max_iters: args.max_iters,
        ..CalibrateOpts::default()
    };
    let t0 = Instant::now();
    let result = match &poly {
        Poly::Full(p) | Poly::Split(p) => calibrate(&quotes, &PolyPricer::new(p)?, &bounds, &opts)?,
        Poly::Reduced(q) => calibrate(&quotes, &PolyPricer::new(q)?, &bounds, &opts)?,
    };
    let wall = t0.elapsed().as_secs_f64();
    let output = CalibrationOutput {
        sigma2_0: result.params.sigma2_0,
        beta0: result.params.beta0,
        beta1: result.params.beta1,
        beta2: result.params.beta2,
        lambda_theta: result.params.lambda_theta,
        in_mse: result.in_mse,
        iterations: result.iterations,
        converged: result.converged,
        stationarity: result.stationarity,
    };
    std::fs::write(&args.out, serde_json::to_string_pretty(&output)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "in_mse={:.6e} iterations={} converged={} wall_s={wall:.3} out={}",
        result.in_mse,
        result.iterations,
        result.converged,
        args.out.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.model != Model::Lognormal {
        bail!("bench runs the doubling study on the closed-form lognormal oracle only");
    }
    let bounds = parse_bounds(&args.bounds)?;
    let dims = bounds.len();
    let domain = Domain::new(bounds)?;
    let oracle = build_oracle(args.model, dims, args.rate, 1, 0, false)?;
    if args.control_m < 2 {
        bail!("--control-m must be >= 2");
    }
    // uniform interior control grid, endpoints excluded
    let axes: Vec<Vec<f64>> = domain
        .bounds()
        .iter()
        .map(|&(lo, hi)| {
            (1..args.control_m)
                .map(|i| lo + (hi - lo) * i as f64 / args.control_m as f64)
                .collect()
        })
        .collect();
    let grid = ProductGrid::new(axes, &domain)?;
    let mut truth = NdArray::zeros(grid.extents());
    let mut flat = 0;
    let extents = grid.extents();
    let mut truth_err: Option<chebrb_core::Error> = None;
    for_each_index(&extents, |idx| {
        match oracle(0, &grid.point_at(idx)) {
            Ok(v) => truth.data_mut()[flat] = v,
            Err(e) => truth_err = Some(e),
        }
        flat += 1;
    });
    if let Some(e) = truth_err {
        return Err(e.into());
    }

    println!("n,storage_bytes,build_s,eval_s,control_mse");
    let mut log_points = Vec::new();
    for n in [3usize, 6, 12] {
        let degrees = vec![n; dims];
        let t0 = Instant::now();
        let p = Interpolant::build(|i, x| oracle(i, x), &domain, &degrees)?;
        let build_s = t0.elapsed().as_secs_f64();
        let storage = full_tensor_bytes(&degrees.iter().map(|&d| d + 1).collect::<Vec<usize>>());
        let t1 = Instant::now();
        let mse = mse_on_grid(&p, &truth, &grid)?;
        let eval_s = t1.elapsed().as_secs_f64();
        println!("{n},{storage},{build_s:.4},{eval_s:.4},{mse:.6e}");
        log_points.push(((storage as f64).ln(), mse.max(f64::MIN_POSITIVE).ln()));
    }
    let k = log_points.len() as f64;
    let mean_x = log_points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = log_points.iter().map(|p| p.1).sum::<f64>() / k;
    let cov: f64 = log_points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let var: f64 = log_points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.0 - mean_x))
        .sum();
    eprintln!("log-log slope (storage vs mse) = {:.4}", cov / var);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_degrees_and_bounds() {
        assert_eq!(parse_degrees("3, 6,12").unwrap(), vec![3, 6, 12]);
        assert!(parse_degrees("3,0").is_err());
        assert!(parse_degrees("3,x").is_err());
        assert_eq!(
            parse_bounds("0:1, -2.5:3e1").unwrap(),
            vec![(0.0, 1.0), (-2.5, 30.0)]
        );
        assert!(parse_bounds("0-1").is_err());
    }

    #[test]
    fn oracle_dimension_guards() {
        assert!(build_oracle(Model::Lognormal, 5, 0.05, 1, 0, false).is_err());
        assert!(build_oracle(Model::Ngarch, 3, 0.05, 1, 0, false).is_err());
        assert!(build_oracle(Model::Heston, 4, 0.05, 1, 0, false).is_err());
        assert!(build_oracle(Model::Ngarch, 7, 0.05, 100, 1, true).is_ok());
    }
}
