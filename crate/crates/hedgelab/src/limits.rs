//! Closed-form and quadrature evaluation of the limiting cost functionals.
//!
//! The building blocks are the mean and variance of `|Z + a|` for standard
//! normal `Z`, written `G(a)` and `Lambda(a)`. The total trading volume of the
//! discrete strategies converges to integrals of the form
//! `x int_0^inf lambda^(-1/2) phi_tilde(lambda, x) E|a Z + q(lambda, x)| dlambda`,
//! which this module evaluates with adaptive Gauss-Kronrod quadrature after
//! the substitution `lambda = u^2` removes the inverse square-root factor.

use crate::analytics::{norm_cdf, norm_pdf, phi_tilde, q_factor};
use crate::error::{Error, Result};

mod quad;

pub use quad::QuadratureConfig;

/// Mean of `|Z + a|`: `G(a) = 2 phi(a) + a (2 Phi(a) - 1)`.
#[inline]
pub fn g_func(a: f64) -> f64 {
    2.0 * norm_pdf(a) + a * (2.0 * norm_cdf(a) - 1.0)
}

/// Variance of `|Z + a|`: `Lambda(a) = 1 + a^2 - G(a)^2`, in `(0, 1]`.
#[inline]
pub fn lambda_func(a: f64) -> f64 {
    1.0 + a * a - g_func(a) * g_func(a)
}

/// `E |a Z + b|` for `a >= 0`; degenerates to `|b|` at `a = 0`.
#[inline]
pub fn expected_abs_linear(a: f64, b: f64) -> f64 {
    debug_assert!(a >= 0.0, "scale must be non-negative");
    if a == 0.0 {
        b.abs()
    } else {
        a * g_func(b / a)
    }
}

/// Coefficient `eta = 1 - kappa* sigma(y) rho^(-1) sqrt(8/pi)` of the
/// drift-corrected strategy's limiting error.
#[inline]
pub fn eta(sigma_y: f64, rho: f64, kappa_star: f64) -> f64 {
    1.0 - kappa_star * sigma_y / rho * (8.0 / std::f64::consts::PI).sqrt()
}

/// Constant-spread analog `eta_0 = sigma(y) rho^(-1) S_1^(-1) sqrt(8/pi)`.
///
/// No cost rate enters here; callers that want a cost-rate multiple apply it
/// themselves (see the correction modes in [`crate::hedging`]).
#[inline]
pub fn eta_zero(sigma_y: f64, rho: f64, s1: f64) -> f64 {
    sigma_y / (rho * s1) * (8.0 / std::f64::consts::PI).sqrt()
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "{name} must be positive, got {value}"
        )));
    }
    Ok(())
}

/// Integrates `lambda -> weight(lambda) * phi_tilde(lambda, x)` over
/// `(0, lambda_max)` where `weight` already contains the `lambda^(-1/2)`
/// factor absorbed by the substitution.
///
/// `kink` optionally marks an interior point where the integrand loses
/// smoothness, so the segment list starts split there. With the substitution
/// enabled the integrand in `u = sqrt(lambda)` is
/// `2 phi_tilde(u^2, x) inner(u^2)`.
fn cost_integral(
    x: f64,
    strike: f64,
    inner: impl Fn(f64) -> f64,
    quad_cfg: &QuadratureConfig,
) -> Result<f64> {
    let log_m = (x / strike).ln();
    // phi_tilde peaks at lambda = 2 |ln(x/K)|; for x > K the factor q changes
    // sign there as well, so always seed a split at that point.
    let lambda_peak = 2.0 * log_m.abs();

    if quad_cfg.sqrt_substitution {
        let u_max = quad_cfg.lambda_max.sqrt();
        let mut splits = vec![0.0, u_max];
        let u_peak = lambda_peak.sqrt();
        if u_peak > 0.0 && u_peak < u_max {
            splits.insert(1, u_peak);
        }
        let f = |u: f64| {
            let lambda = u * u;
            2.0 * phi_tilde(lambda, x, strike) * inner(lambda)
        };
        quad::adaptive_integrate(f, &splits, quad_cfg)
    } else {
        let mut splits = vec![0.0, quad_cfg.lambda_max];
        if lambda_peak > 0.0 && lambda_peak < quad_cfg.lambda_max {
            splits.insert(1, lambda_peak);
        }
        let f = |lambda: f64| phi_tilde(lambda, x, strike) * inner(lambda) / lambda.sqrt();
        quad::adaptive_integrate(f, &splits, quad_cfg)
    }
}

/// Limiting dollar trading volume
/// `J(x, y, rho) = x int lambda^(-1/2) phi_tilde E|sigma(y)/rho Z + q| dlambda`.
pub fn j_limit(
    x: f64,
    sigma_y: f64,
    rho: f64,
    strike: f64,
    quad_cfg: &QuadratureConfig,
) -> Result<f64> {
    check_positive("x", x)?;
    check_positive("sigma(y)", sigma_y)?;
    check_positive("rho", rho)?;
    check_positive("strike", strike)?;
    let a = sigma_y / rho;
    let inner = |lambda: f64| expected_abs_linear(a, q_factor(lambda, x, strike));
    Ok(x * cost_integral(x, strike, inner, quad_cfg)?)
}

/// Large-`rho` limit `J*(x) = x int lambda^(-1/2) phi_tilde |q| dlambda`,
/// independent of the volatility state.
pub fn j_star(x: f64, strike: f64, quad_cfg: &QuadratureConfig) -> Result<f64> {
    check_positive("x", x)?;
    check_positive("strike", strike)?;
    let inner = |lambda: f64| q_factor(lambda, x, strike).abs();
    Ok(x * cost_integral(x, strike, inner, quad_cfg)?)
}

/// Constant-spread volume limit: the same integral as [`j_limit`] without the
/// leading price factor.
pub fn j_zero(
    x: f64,
    sigma_y: f64,
    rho: f64,
    strike: f64,
    quad_cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(j_limit(x, sigma_y, rho, strike, quad_cfg)? / x)
}

/// Residual of the closed-form identity
/// `x int_0^inf lambda^(-1/2) phi_tilde(lambda, x) dlambda = 2 min(x, K)`;
/// vanishes to quadrature tolerance.
pub fn min_identity_residual(x: f64, strike: f64, quad_cfg: &QuadratureConfig) -> Result<f64> {
    check_positive("x", x)?;
    check_positive("strike", strike)?;
    let integral = x * cost_integral(x, strike, |_| 1.0, quad_cfg)?;
    Ok(integral - 2.0 * x.min(strike))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    const Q: QuadratureConfig = QuadratureConfig {
        rel_tol: 1e-9,
        lambda_max: 400.0,
        sqrt_substitution: true,
    };

    #[test]
    fn g_at_zero_is_sqrt_two_over_pi() {
        assert!((g_func(0.0) - 0.797_884_560_802_865_4).abs() < 1e-15);
    }

    #[test]
    fn g_is_even() {
        for a in [0.1, 0.7, 1.5, 3.0, 9.0] {
            assert!((g_func(a) - g_func(-a)).abs() < 1e-14, "a={a}");
        }
    }

    #[test]
    fn g_tail_asymptote() {
        assert!((g_func(10.0) - 10.0).abs() < 1e-20);
    }

    #[test]
    fn g_bracketed_by_tail_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(-8.0..8.0);
            let g = g_func(a);
            assert!(g >= a.abs() - 1e-14, "lower bound failed at a={a}");
            assert!(g <= a.abs() + 2.0 * norm_pdf(a) + 1e-14, "upper bound failed at a={a}");
        }
    }

    #[test]
    fn lambda_at_zero_and_range() {
        assert!((lambda_func(0.0) - 0.363_380_227_632_418_65).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(-10.0..10.0);
            let l = lambda_func(a);
            // slack covers the 1 + a^2 - G^2 cancellation at large |a|
            let slack = 1e-13 * (1.0 + a * a);
            assert!(l > 0.0 && l <= 1.0 + slack, "Lambda({a}) = {l}");
            // squaring |a| <= G(a) <= |a| + 2 phi(a) bounds the deviation by
            // 4 |a| phi(a) + 4 phi(a)^2, with equality at a = 0
            assert!(
                (l - 1.0).abs() <= 4.0 * a.abs() * norm_pdf(a) + 4.0 * norm_pdf(a).powi(2) + slack,
                "deviation bound failed at a={a}"
            );
        }
    }

    #[test]
    fn g_and_lambda_match_sampling_oracle() {
        let n = 1_000_000_usize;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for a in [0.0, 0.5, 2.0] {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            let mut sum4 = 0.0;
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                let w = (z + a).abs();
                sum += w;
                sum2 += w * w;
                sum4 += (w - g_func(a)).powi(4);
            }
            let mean = sum / n as f64;
            let var = sum2 / n as f64 - mean * mean;
            let se_mean = (lambda_func(a) / n as f64).sqrt();
            assert!(
                (mean - g_func(a)).abs() < 3.0 * se_mean,
                "G({a}): sample {mean} vs {}",
                g_func(a)
            );
            // standard error of the sample variance from the fourth moment
            let m4 = sum4 / n as f64;
            let se_var = ((m4 - var * var) / n as f64).sqrt();
            assert!(
                (var - lambda_func(a)).abs() < 3.0 * se_var,
                "Lambda({a}): sample {var} vs {}",
                lambda_func(a)
            );
        }
    }

    #[test]
    fn expected_abs_linear_cases() {
        assert!((expected_abs_linear(1.0, 0.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert_eq!(expected_abs_linear(0.0, -3.0), 3.0);

        let n = 1_000_000_usize;
        let (a, b) = (0.5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            let w = (a * z + b).abs();
            sum += w;
            sum2 += w * w;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - expected_abs_linear(a, b)).abs() < 3.0 * se,
            "sample {mean} vs {}",
            expected_abs_linear(a, b)
        );
    }

    #[test]
    fn eta_cases() {
        assert_eq!(eta(2.0, 1.5, 0.0), 1.0);
        let sq = (8.0 / std::f64::consts::PI).sqrt();
        assert!(eta(2.0, 0.01 * 2.0 * sq, 0.01).abs() < 1e-15);
        assert!((eta(2.27, 2.0, 0.01) - 0.981_888_020_469_775).abs() < 1e-12);
    }

    // At x = K the moneyness factor q is the constant -1/4, which collapses the
    // cost integrals to closed forms: J*(K) = K/2 and J(K, y, rho) = 2 K a G(1/(4a))
    // with a = sigma(y)/rho.
    #[test]
    fn at_the_money_closed_forms() {
        let js = j_star(1.0, 1.0, &Q).unwrap();
        assert!((js - 0.5).abs() < 1e-9, "J*(K) = {js}");

        let j = j_limit(1.0, 2.0, 2.0, 1.0, &Q).unwrap();
        let expected = 2.0 * g_func(0.25);
        assert!((j - expected).abs() / expected < 1e-9, "J = {j} vs {expected}");
    }

    #[test]
    fn j_star_reference_values() {
        // independently computed with 30-digit arithmetic
        let cases = [(2.0, 0.478_063_782_899_023_84), (0.5, 0.5)];
        for (x, want) in cases {
            let got = j_star(x, 1.0, &Q).unwrap();
            assert!((got - want).abs() / want < 1e-9, "J*({x}) = {got} vs {want}");
        }
    }

    #[test]
    fn j_limit_reference_values() {
        let cases = [
            (2.0, 2.0, 2.0, 1.704_647_639_996_052_8),
            (0.5, 4.0, 2.0, 1.674_576_751_943_282_3),
        ];
        for (x, sy, rho, want) in cases {
            let got = j_limit(x, sy, rho, 1.0, &Q).unwrap();
            assert!((got - want).abs() / want < 1e-8, "J({x},{sy},{rho}) = {got} vs {want}");
        }
    }

    #[test]
    fn j_zero_is_j_limit_over_x() {
        for (x, sy, rho) in [(1.5, 2.0, 3.0), (0.7, 1.0, 0.5)] {
            let j = j_limit(x, sy, rho, 1.0, &Q).unwrap();
            let j0 = j_zero(x, sy, rho, 1.0, &Q).unwrap();
            assert!((j0 * x - j).abs() < 1e-12);
        }
    }

    #[test]
    fn j_limit_approaches_j_star_for_large_rho() {
        for x in [0.5, 1.0, 2.0] {
            let js = j_star(x, 1.0, &Q).unwrap();
            let j = j_limit(x, 2.0, 1e4, 1.0, &Q).unwrap();
            assert!((j - js).abs() / js <= 1e-3, "x={x}: {j} vs {js}");
            // and from above: larger rho moves J down toward J*
            let j_mid = j_limit(x, 2.0, 10.0, 1.0, &Q).unwrap();
            assert!(j_mid >= j && j >= js - 1e-12, "monotonicity at x={x}");
        }
    }

    #[test]
    fn j_monotone_decreasing_in_rho() {
        let grid = [0.5, 0.9, 1.0, 1.3, 2.0];
        for &x in &grid {
            let mut prev = f64::INFINITY;
            for rho in [0.5, 1.0, 2.0, 5.0, 50.0] {
                let j = j_limit(x, 2.0, rho, 1.0, &Q).unwrap();
                assert!(j <= prev + 1e-12, "x={x}, rho={rho}");
                prev = j;
            }
        }
    }

    #[test]
    fn min_identity_residual_small_on_grid() {
        for i in 0..20 {
            let x = 0.2 + 4.8 * i as f64 / 19.0;
            let r = min_identity_residual(x, 1.0, &Q).unwrap();
            assert!(r.abs() <= 1e-8, "x={x}: residual {r}");
        }
    }

    #[test]
    fn under_hedging_inequality_at_leland_rho() {
        // with the classic cost-matched rho the limiting cost covers min(x, K)
        let kappa = 0.01;
        let sigma0 = 0.3;
        let rho_l = kappa * sigma0 * (8.0 / std::f64::consts::PI).sqrt();
        for x in [0.5, 0.9, 1.0, 1.1, 2.0] {
            let j = j_limit(x, sigma0, rho_l, 1.0, &Q).unwrap();
            assert!(
                kappa * j >= x.min(1.0) - 1e-9,
                "x={x}: kappa J = {} < min(x,K)",
                kappa * j
            );
        }
    }

    #[test]
    fn substitution_and_direct_quadrature_agree() {
        let direct = QuadratureConfig {
            rel_tol: 1e-7,
            sqrt_substitution: false,
            ..QuadratureConfig::default()
        };
        for (x, sy, rho) in [(1.0, 2.0, 2.0), (1.7, 1.0, 3.0)] {
            let a = j_limit(x, sy, rho, 1.0, &Q).unwrap();
            let b = j_limit(x, sy, rho, 1.0, &direct).unwrap();
            assert!((a - b).abs() / a < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn sampling_cross_check_of_inner_expectation() {
        // replace G by a 1e5-draw sample mean inside the integral
        let n = 100_000_usize;
        let (x, sy, rho) = (1.0, 2.0, 2.0);
        let a = sy / rho;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let inner = |lambda: f64| {
            let q = q_factor(lambda, x, 1.0);
            draws.iter().map(|z| (a * z + q).abs()).sum::<f64>() / n as f64
        };
        // coarse tolerance: the sampled integrand is noisy
        let cfg = QuadratureConfig {
            rel_tol: 1e-6,
            ..QuadratureConfig::default()
        };
        let sampled = x * super::cost_integral(x, 1.0, inner, &cfg).unwrap();
        let exact = j_limit(x, sy, rho, 1.0, &Q).unwrap();
        // 3 combined standard errors: SE of each inner mean is
        // sqrt(Lambda(q/a)) a / sqrt(n) <= a / sqrt(n); the outer integral has
        // total phi_tilde mass 2 min(x,K)/x.
        let se_bound = 3.0 * a / (n as f64).sqrt() * 2.0 * x.min(1.0);
        assert!(
            (sampled - exact).abs() < se_bound,
            "sampled {sampled} vs exact {exact} (bound {se_bound})"
        );
    }
}
