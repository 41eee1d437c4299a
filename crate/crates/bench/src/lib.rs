//! Shared fixtures for the kernel benchmarks.

use chebrb_core::interpolant::{Domain, Interpolant};
use chebrb_core::models::lognormal_call;
use chebrb_core::reduced_basis::{compress, ReducedPolynomial, TruncationSpec};

/// The 3-variable lognormal pricing surface used across benchmarks.
pub fn lognormal_domain() -> Domain {
    Domain::new(vec![(0.75, 1.20), (1.0e-4, 2.25e-4), (120.0, 365.0)]).unwrap()
}

pub fn lognormal_oracle(x: &[f64]) -> f64 {
    let r_day = 0.05 / 365.0;
    lognormal_call(x[0], 1.0, r_day * x[2], x[1] * x[2]).unwrap()
}

pub fn build_surface(n: usize) -> Interpolant {
    Interpolant::build_fn(lognormal_oracle, &lognormal_domain(), &[n, n, n]).unwrap()
}

/// A compressed anisotropic 4-variable polynomial for throughput runs.
pub fn compressed_anisotropic() -> ReducedPolynomial {
    let domain = Domain::new(vec![(-1.0, 1.0); 4]).unwrap();
    let oracle = |x: &[f64]| {
        (0.7 * x[0]).exp() * (3.0 * x[1] + 0.4 * x[0]).sin()
            + 0.01 * (x[2] + 0.3 * x[2] * x[2]) * (0.3 * x[0]).exp()
            + 0.002 * (2.0 * x[3]).cos() * (1.0 + 0.2 * x[1])
    };
    let p = Interpolant::build_fn(oracle, &domain, &[8, 8, 8, 8]).unwrap();
    compress(&p, &TruncationSpec::new(1e-8).unwrap()).unwrap()
}
