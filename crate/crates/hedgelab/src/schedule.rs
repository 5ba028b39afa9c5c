//! Revision grids, fine simulation grids and deterministic volatility profiles.
//!
//! The rebalance dates follow the power law `t_i = 1 - (1 - i/n)^mu`, which
//! concentrates revisions near maturity for `mu > 1`. The enlarged volatility
//! is a deterministic schedule whose cumulated variance
//! `lambda_t = int_t^1 sigma_hat^2_s ds` is the natural clock for every
//! pricing kernel in [`crate::analytics`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default number of fine simulation substeps inside each revision interval.
///
/// The substep count only controls path-discretization error, which stays far
/// below Monte-Carlo noise at the sample sizes used by the experiment harness;
/// it is configurable everywhere it appears.
pub const DEFAULT_SUBSTEPS: usize = 5;

/// Rebalance dates `t_i = 1 - (1 - i/n)^mu` for `i = 0..=n`.
///
/// `mu` must lie in `[1, 2)`; `mu = 1` yields the uniform grid exactly.
pub fn revision_times(n: usize, mu: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::ParameterDomain("revision count n must be >= 1".into()));
    }
    if !(1.0..2.0).contains(&mu) {
        return Err(Error::ParameterDomain(format!(
            "grid exponent mu must satisfy 1 <= mu < 2, got {mu}"
        )));
    }
    let nf = n as f64;
    let times = (0..=n)
        .map(|i| {
            if mu == 1.0 {
                i as f64 / nf
            } else {
                1.0 - (1.0 - i as f64 / nf).powf(mu)
            }
        })
        .collect();
    Ok(times)
}

/// A revision grid together with its fine simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RevisionSchedule {
    n: usize,
    mu: f64,
    times: Vec<f64>,
    substeps_per_interval: usize,
    fine_times: Vec<f64>,
}

impl RevisionSchedule {
    pub fn new(n: usize, mu: f64, substeps_per_interval: usize) -> Result<Self> {
        if substeps_per_interval == 0 {
            return Err(Error::ParameterDomain(
                "substeps_per_interval must be >= 1".into(),
            ));
        }
        let times = revision_times(n, mu)?;
        let m = substeps_per_interval;
        let mut fine_times = Vec::with_capacity(n * m + 1);
        fine_times.push(0.0);
        for i in 1..=n {
            let (lo, hi) = (times[i - 1], times[i]);
            let dt = hi - lo;
            for k in 1..m {
                fine_times.push(lo + dt * k as f64 / m as f64);
            }
            // the revision date itself is a fine node, bit-exactly
            fine_times.push(hi);
        }
        Ok(Self {
            n,
            mu,
            times,
            substeps_per_interval: m,
            fine_times,
        })
    }

    /// Uniform grid with the default substep count.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(n, 1.0, DEFAULT_SUBSTEPS)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Rebalance dates `t_0 = 0 < t_1 < ... < t_n = 1`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn substeps_per_interval(&self) -> usize {
        self.substeps_per_interval
    }

    /// All simulation nodes; revision dates are the subsequence at stride
    /// [`Self::substeps_per_interval`].
    pub fn fine_times(&self) -> &[f64] {
        &self.fine_times
    }

    /// Index of revision date `i` inside [`Self::fine_times`].
    #[inline]
    pub fn fine_index(&self, i: usize) -> usize {
        i * self.substeps_per_interval
    }
}

/// Deterministic adjusted-volatility schedule.
///
/// `NewForm` enlarges the volatility as `sigma_hat_t^2 = rho sqrt(n f'(t))`
/// on the power-law grid; `Classic` uses the constant enlargement
/// `sigma_hat^2 = sigma_0^2 + rho n^(1/2 - alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum VolatilityProfile {
    NewForm { rho: f64, n: usize, mu: f64 },
    Classic { sigma0: f64, rho: f64, n: usize, alpha: f64 },
}

impl VolatilityProfile {
    pub fn new_form(rho: f64, n: usize, mu: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if n == 0 {
            return Err(Error::ParameterDomain("n must be >= 1".into()));
        }
        if !(1.0..2.0).contains(&mu) {
            return Err(Error::ParameterDomain(format!(
                "mu must satisfy 1 <= mu < 2, got {mu}"
            )));
        }
        Ok(Self::NewForm { rho, n, mu })
    }

    pub fn classic(sigma0: f64, rho: f64, n: usize, alpha: f64) -> Result<Self> {
        if !(sigma0 > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "sigma0 must be positive, got {sigma0}"
            )));
        }
        if !(rho >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "rho must be non-negative, got {rho}"
            )));
        }
        if n == 0 {
            return Err(Error::ParameterDomain("n must be >= 1".into()));
        }
        if !(0.0..=0.5).contains(&alpha) {
            return Err(Error::ParameterDomain(format!(
                "alpha must lie in [0, 1/2], got {alpha}"
            )));
        }
        Ok(Self::Classic {
            sigma0,
            rho,
            n,
            alpha,
        })
    }

    /// Grid exponent associated with the profile (`Classic` runs on the
    /// uniform grid, `mu = 1`).
    pub fn mu(&self) -> f64 {
        match *self {
            Self::NewForm { mu, .. } => mu,
            Self::Classic { .. } => 1.0,
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            Self::NewForm { rho, .. } | Self::Classic { rho, .. } => rho,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::NewForm { n, .. } | Self::Classic { n, .. } => n,
        }
    }

    /// Weak-convergence exponent `beta = mu / (2 (mu + 1))`.
    pub fn beta(&self) -> f64 {
        let mu = self.mu();
        mu / (2.0 * (mu + 1.0))
    }

    /// Normalization factor `theta_n = n^beta rho^(2 beta)`.
    pub fn theta_n(&self) -> f64 {
        let beta = self.beta();
        (self.n() as f64).powf(beta) * self.rho().powf(2.0 * beta)
    }

    /// Grid constant `mu_tilde = 2 sqrt(mu) / (mu + 1)`.
    pub fn mu_tilde(&self) -> f64 {
        let mu = self.mu();
        2.0 * mu.sqrt() / (mu + 1.0)
    }

    /// Initial cumulated variance `lambda_0`.
    pub fn lambda0(&self) -> f64 {
        match *self {
            Self::NewForm { rho, n, .. } => self.mu_tilde() * rho * (n as f64).sqrt(),
            Self::Classic { .. } => self.constant_sigma_hat_sq(),
        }
    }

    fn constant_sigma_hat_sq(&self) -> f64 {
        match *self {
            Self::Classic {
                sigma0,
                rho,
                n,
                alpha,
            } => sigma0 * sigma0 + rho * (n as f64).powf(0.5 - alpha),
            Self::NewForm { .. } => unreachable!(),
        }
    }

    /// Enlarged squared volatility `sigma_hat^2_t`; singular at maturity for
    /// `mu > 1`, hence the domain error at `t >= 1`.
    pub fn sigma_hat_sq(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::ParameterDomain(format!(
                "sigma_hat^2 requires 0 <= t < 1, got {t}"
            )));
        }
        Ok(match *self {
            Self::NewForm { rho, n, mu } => {
                rho * (n as f64).sqrt() / mu.sqrt() * (1.0 - t).powf((1.0 - mu) / (2.0 * mu))
            }
            Self::Classic { .. } => self.constant_sigma_hat_sq(),
        })
    }

    /// Cumulated variance `lambda_t = int_t^1 sigma_hat^2_s ds`, in closed
    /// form; exactly 0 at maturity.
    pub fn lambda(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        match *self {
            Self::NewForm { mu, .. } => {
                // exponent (mu + 1) / (2 mu) = 1 / (4 beta)
                self.lambda0() * (1.0 - t).powf((mu + 1.0) / (2.0 * mu))
            }
            Self::Classic { .. } => self.constant_sigma_hat_sq() * (1.0 - t),
        }
    }
}

/// Per-interval grid diagnostics around the asymptotic relation
/// `Delta lambda_j / sqrt(Delta t_j) -> rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDiagnostics {
    /// `Delta lambda_j (Delta t_j)^(-1/2)` for `j = 1..=n`.
    pub ratios: Vec<f64>,
    /// Last 1-based index counted as interior; the boundary layer of
    /// `ceil(sqrt(n))` intervals before maturity is excluded.
    pub interior_end: usize,
    /// `max_j |ratios[j]/rho - 1|` over the interior indices.
    pub max_interior_deviation: f64,
    /// Smallest and largest `Delta lambda_j` over all intervals.
    pub delta_lambda_extremes: (f64, f64),
}

/// Computes the ratio sequence of the grid asymptotics for a `NewForm`
/// profile on its own schedule.
pub fn grid_diagnostics(
    schedule: &RevisionSchedule,
    profile: &VolatilityProfile,
) -> Result<GridDiagnostics> {
    let VolatilityProfile::NewForm { rho, n, mu } = *profile else {
        return Err(Error::Config(
            "grid diagnostics are defined for the NewForm profile".into(),
        ));
    };
    if n != schedule.n() || mu != schedule.mu() {
        return Err(Error::Config(format!(
            "schedule (n={}, mu={}) does not match profile (n={n}, mu={mu})",
            schedule.n(),
            schedule.mu()
        )));
    }

    let times = schedule.times();
    let mut ratios = Vec::with_capacity(n);
    let mut lam_prev = profile.lambda(times[0]);
    let (mut dl_min, mut dl_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 1..=n {
        let lam = profile.lambda(times[i]);
        let d_lambda = lam_prev - lam;
        let d_t = times[i] - times[i - 1];
        ratios.push(d_lambda / d_t.sqrt());
        dl_min = dl_min.min(d_lambda);
        dl_max = dl_max.max(d_lambda);
        lam_prev = lam;
    }

    let boundary = (n as f64).sqrt().ceil() as usize;
    let interior_end = n.saturating_sub(boundary).max(1);
    let max_interior_deviation = ratios[..interior_end]
        .iter()
        .map(|r| (r / rho - 1.0).abs())
        .fold(0.0, f64::max);

    Ok(GridDiagnostics {
        ratios,
        interior_end,
        max_interior_deviation,
        delta_lambda_extremes: (dl_min, dl_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_grid_is_exact() {
        let t = revision_times(4, 1.0).unwrap();
        assert_eq!(t, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn domain_bounds_are_enforced() {
        assert!(revision_times(0, 1.0).is_err());
        assert!(revision_times(2, 2.0).is_err());
        assert!(revision_times(2, 0.99).is_err());
        assert!(revision_times(2, 2.0 - 1e-9).is_ok());
    }

    #[test]
    fn power_grid_value() {
        let t = revision_times(4, 1.5).unwrap();
        assert!((t[2] - 0.646_446_609_406_726_2).abs() < 1e-15);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[4], 1.0);
    }

    #[test]
    fn times_strictly_increasing_and_sum_to_one() {
        for (n, mu) in [(7, 1.0), (50, 1.3), (200, 1.9)] {
            let s = RevisionSchedule::new(n, mu, 3).unwrap();
            let t = s.times();
            let mut sum = 0.0;
            for w in t.windows(2) {
                assert!(w[1] > w[0]);
                sum += w[1] - w[0];
            }
            assert!((sum - 1.0).abs() < 1e-12, "n={n}, mu={mu}");
        }
    }

    #[test]
    fn fine_grid_contains_revision_dates_bit_exactly() {
        let s = RevisionSchedule::new(12, 1.7, 4).unwrap();
        for i in 0..=12 {
            assert_eq!(s.fine_times()[s.fine_index(i)], s.times()[i]);
        }
        assert_eq!(s.fine_times().len(), 12 * 4 + 1);
    }

    #[test]
    fn new_form_lambda0_values() {
        let p = VolatilityProfile::new_form(2.0, 1000, 1.0).unwrap();
        assert!((p.lambda0() - 63.245_553_203_367_59).abs() < 1e-12);
        let p = VolatilityProfile::new_form(1.0, 16, 1.5).unwrap();
        assert!((p.mu_tilde() - 0.979_795_897_113_271_2).abs() < 1e-15);
        assert!((p.lambda0() - 3.919_183_588_453_085).abs() < 1e-14);
    }

    #[test]
    fn adjusted_vol_cases() {
        let p = VolatilityProfile::new_form(2.0, 100, 1.0).unwrap();
        assert!((p.sigma_hat_sq(0.5).unwrap() - 20.0).abs() < 1e-12);
        // mu = 1 makes the schedule flat
        assert_eq!(p.sigma_hat_sq(0.1).unwrap(), p.sigma_hat_sq(0.9).unwrap());

        let c = VolatilityProfile::classic(0.3, 0.5, 100, 0.5).unwrap();
        for t in [0.0, 0.3, 0.99] {
            assert!((c.sigma_hat_sq(t).unwrap() - 0.59).abs() < 1e-15);
        }
    }

    #[test]
    fn sigma_hat_rejects_maturity() {
        let p = VolatilityProfile::new_form(2.0, 100, 1.5).unwrap();
        assert!(p.sigma_hat_sq(1.0).is_err());
        assert!(p.sigma_hat_sq(-0.1).is_err());
    }

    #[test]
    fn lambda_closed_form_and_monotone() {
        let p = VolatilityProfile::new_form(2.0, 50, 1.4).unwrap();
        assert_eq!(p.lambda(1.0), 0.0);
        // exponent identity: lambda_t = lambda_0 (1-t)^(1/(4 beta))
        let t: f64 = 0.37;
        let direct = p.lambda0() * (1.0 - t).powf(1.0 / (4.0 * p.beta()));
        assert!((p.lambda(t) - direct).abs() < 1e-12);

        let s = RevisionSchedule::new(50, 1.4, 2).unwrap();
        for w in s.times().windows(2) {
            assert!(p.lambda(w[0]) > p.lambda(w[1]));
        }

        let c = VolatilityProfile::classic(0.3, 0.5, 100, 0.0).unwrap();
        assert!((c.lambda(0.25) - (0.09 + 5.0) * 0.75).abs() < 1e-12);
        assert_eq!(c.lambda(1.0), 0.0);
    }

    #[test]
    fn lambda_derivative_matches_adjusted_vol() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for profile in [
            VolatilityProfile::new_form(2.0, 100, 1.0).unwrap(),
            VolatilityProfile::new_form(1.0, 400, 1.6).unwrap(),
            VolatilityProfile::classic(0.3, 0.5, 100, 0.0).unwrap(),
        ] {
            for _ in 0..10 {
                let t: f64 = rng.gen_range(0.05..0.9);
                let h = 1e-6;
                let fd = -(profile.lambda(t + h) - profile.lambda(t)) / h;
                let sig = profile.sigma_hat_sq(t).unwrap();
                assert!((fd - sig).abs() / sig < 1e-4, "t={t}, fd={fd}, sig={sig}");
            }
        }
    }

    #[test]
    fn diagnostics_uniform_grid_is_exact() {
        let s = RevisionSchedule::new(64, 1.0, 1).unwrap();
        let p = VolatilityProfile::new_form(2.0, 64, 1.0).unwrap();
        let d = grid_diagnostics(&s, &p).unwrap();
        for r in &d.ratios {
            assert!((r - 2.0).abs() < 1e-9);
        }
        assert!(d.max_interior_deviation < 1e-9);
    }

    #[test]
    fn diagnostics_interior_ratio_near_rho() {
        let s = RevisionSchedule::new(10_000, 1.5, 1).unwrap();
        let p = VolatilityProfile::new_form(2.0, 10_000, 1.5).unwrap();
        let d = grid_diagnostics(&s, &p).unwrap();
        assert!(
            d.max_interior_deviation < 0.05,
            "deviation {}",
            d.max_interior_deviation
        );
    }

    #[test]
    fn diagnostics_deviation_shrinks_with_n() {
        let mut prev = f64::INFINITY;
        for n in [100, 200, 400, 800, 1600] {
            let s = RevisionSchedule::new(n, 1.5, 1).unwrap();
            let p = VolatilityProfile::new_form(2.0, n, 1.5).unwrap();
            let d = grid_diagnostics(&s, &p).unwrap();
            assert!(
                d.max_interior_deviation < prev,
                "n={n}: {} !< {prev}",
                d.max_interior_deviation
            );
            prev = d.max_interior_deviation;
        }
    }

    #[test]
    fn diagnostics_reject_mismatched_inputs() {
        let s = RevisionSchedule::new(10, 1.5, 1).unwrap();
        let p = VolatilityProfile::new_form(2.0, 20, 1.5).unwrap();
        assert!(grid_diagnostics(&s, &p).is_err());
        let c = VolatilityProfile::classic(0.3, 0.5, 10, 0.0).unwrap();
        assert!(grid_diagnostics(&s, &c).is_err());
    }
}
