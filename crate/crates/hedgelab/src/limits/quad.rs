//! Adaptive Gauss-Kronrod quadrature used by the cost-limit integrals.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

/// Controls for the cost-limit quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Relative tolerance on the assembled integral.
    pub rel_tol: f64,
    /// Upper integration cutoff in the `lambda` variable; the integrand is
    /// below double-precision noise beyond the default for moneyness up to
    /// `|ln(x/K)| <= 10`.
    pub lambda_max: f64,
    /// Integrate in `u = sqrt(lambda)`, absorbing the `lambda^(-1/2)` factor
    /// analytically.
    pub sqrt_substitution: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            lambda_max: 400.0,
            sqrt_substitution: true,
        }
    }
}

// 15-point Kronrod abscissae (positive half, outermost first) and weights,
// with the embedded 7-point Gauss weights on the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_16,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 15(7) pass over `[a, b]`: returns the Kronrod estimate
/// and the |K15 - G7| error indicator. Endpoints are never evaluated.
fn qk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut result_gauss = fc * WG[3];
    let mut result_kronrod = fc * WGK[7];

    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        result_kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * fsum;
        }
    }

    let integral = result_kronrod * half;
    let err = ((result_kronrod - result_gauss) * half).abs();
    (integral, err)
}

#[derive(Debug)]
struct Segment {
    err: f64,
    value: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

const MAX_SEGMENTS: usize = 20_000;

/// Adaptively integrates `f` over the interval spanned by `splits`
/// (sorted; interior entries seed the initial subdivision).
pub(crate) fn adaptive_integrate(
    f: impl Fn(f64) -> f64,
    splits: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    debug_assert!(splits.len() >= 2);
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in splits.windows(2) {
        let (v, e) = qk15(&f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Segment {
            err: e,
            value: v,
            a: w[0],
            b: w[1],
        });
    }

    let mut n_segments = heap.len();
    while total_err > cfg.rel_tol * total.abs().max(1e-16) {
        if n_segments >= MAX_SEGMENTS {
            return Err(Error::Numerics(format!(
                "quadrature did not reach rel_tol={} after {n_segments} segments \
                 (value {total:.6e}, error {total_err:.6e})",
                cfg.rel_tol
            )));
        }
        let worst = heap.pop().expect("heap cannot be empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating-point resolution; accept its estimate
            continue;
        }
        total -= worst.value;
        total_err -= worst.err;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = qk15(&f, lo, hi);
            total += v;
            total_err += e;
            heap.push(Segment {
                err: e,
                value: v,
                a: lo,
                b: hi,
            });
        }
        n_segments += 1;
    }

    if !total.is_finite() {
        return Err(Error::Numerics(format!(
            "quadrature produced a non-finite value over [{}, {}]",
            splits[0],
            splits[splits.len() - 1]
        )));
    }
    Ok(total)
}
