//! Finite-size key-rate machinery: the Delta(n) penalty, channel-parameter
//! estimator variances (closed-form and Monte-Carlo), conservative channel
//! parameters at the 6.5-sigma confidence level, and the two orderings of
//! error correction versus parameter estimation.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::ChannelParams;
use crate::keyrates::{assignment_for, key_rate, RateKind, ScenarioSpec};
use crate::scalar::{cst, log2, Scalar};
use crate::states::{build_state, SqueezerSpec, StateKind};

/// Default confidence factor: error probability 1e-10.
pub const DEFAULT_Z_CONF: f64 = 6.5;

/// Sample accounting for a finite-size run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSizeParams<T: Scalar> {
    /// Total signals exchanged.
    pub n_total: u64,
    /// Signals kept for key generation (equal to `n_total` when error
    /// correction precedes parameter estimation).
    pub n_key: u64,
    /// Number of retained-mode correlations usable for estimating the
    /// channel (the `k` in `Var[t] ~ 1/(k n)`).
    pub k: u32,
    /// Confidence factor on the estimator standard deviations.
    pub z_conf: T,
}

impl<T: Scalar> FiniteSizeParams<T> {
    pub fn new(n_total: u64, n_key: u64, k: u32) -> Result<Self> {
        let fs = Self {
            n_total,
            n_key,
            k,
            z_conf: cst(DEFAULT_Z_CONF),
        };
        fs.validate()?;
        Ok(fs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_key == 0 || self.n_key > self.n_total {
            return Err(Error::Domain(format!(
                "need 1 <= n_key <= n_total, got n_key={} n_total={}",
                self.n_key, self.n_total
            )));
        }
        if self.k == 0 {
            return Err(Error::Domain("correlation multiplicity k must be >= 1".into()));
        }
        if !(self.z_conf >= T::zero()) {
            return Err(Error::Domain("z_conf must be non-negative".into()));
        }
        Ok(())
    }
}

/// Standard deviations of the channel estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats<T: Scalar> {
    /// Std of the transmission estimator.
    pub sigma_t: T,
    /// Std of the excess-noise-variance (`V_eps = t eps`) estimator.
    pub sigma_eps: T,
    /// `Var[x_d x~_u]`, the product-moment variance driving both.
    pub var_xdxu: T,
}

/// Whether error correction runs before or after parameter estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcOrdering {
    /// Estimate first on disclosed signals, correct errors on the rest.
    EcAfterPe,
    /// Correct errors first; every signal serves both purposes.
    EcBeforePe,
}

/// Finite-size penalty on the mutual information:
/// `Delta(n) = 7 sqrt(log2(2e10) / n)` bits.
pub fn delta_n<T: Scalar>(n: u64) -> T {
    let log_term = log2(cst::<T>(2e10));
    cst::<T>(7.0) * (log_term / cst::<T>(n as f64)).sqrt()
}

/// Pre-channel second moments of the canonical dealer/user mode pair:
/// `(C, Var[x_d], Var[x_u])`.
fn pre_channel_moments<T: Scalar>(kind: StateKind, spec: &SqueezerSpec<T>) -> (T, T, T) {
    let v = spec.v;
    let w = spec.anti_variance();
    let half = cst::<T>(0.5);
    match kind {
        StateKind::SixMode => {
            let var = (w + v) * half;
            ((w - v) * cst::<T>(0.25), var, var)
        }
        StateKind::GhzLike => {
            let var = (w + v + v) / cst::<T>(3.0);
            ((w - v) / cst::<T>(3.0), var, var)
        }
        StateKind::Dan => (
            (w - v) / cst::<T>(8.0).sqrt(),
            (w + v) * half,
            (cst::<T>(2.0) + v + w) * cst::<T>(0.25),
        ),
    }
}

/// Closed-form `Var[x_d x~_u]` for the three states at channel
/// transmission `t` (excess noise enters the estimators separately).
///
/// The DAN expression, unlike the six-mode and GHZ forms, does not
/// factor as `Var[x_d] Var[x~_u] + Cov^2` and is not cross-validated by
/// the Monte-Carlo harness.
pub fn var_xdxu<T: Scalar>(kind: StateKind, spec: &SqueezerSpec<T>, t: T) -> T {
    let v = spec.v;
    let vn = spec.v_n;
    let w = spec.anti_variance();
    let one = T::one();
    match kind {
        StateKind::SixMode => {
            t / cst::<T>(16.0)
                * (cst::<T>(5.0) * w * w + cst::<T>(5.0) * v * v + cst::<T>(6.0) * w * v)
                + (one - t) * (one + v * (vn + v)) / (cst::<T>(2.0) * v)
        }
        StateKind::GhzLike => {
            t / cst::<T>(9.0)
                * (cst::<T>(2.0) * w * w + cst::<T>(5.0) * v * v + cst::<T>(2.0) * w * v)
                + (one - t) * (one + v * (vn + cst::<T>(2.0) * v)) / (cst::<T>(3.0) * v)
        }
        StateKind::Dan => {
            t / cst::<T>(8.0) * w * (w + one)
                + v * (one + v)
                + (one - t) * (one + v * (vn + v)) / (cst::<T>(2.0) * v)
        }
    }
}

/// Number of estimation samples available under an ordering.
pub fn estimation_samples<T: Scalar>(
    fs: &FiniteSizeParams<T>,
    ordering: EcOrdering,
) -> Result<u64> {
    match ordering {
        EcOrdering::EcBeforePe => Ok(fs.n_total),
        EcOrdering::EcAfterPe => {
            let n_est = fs.n_total - fs.n_key;
            if n_est == 0 {
                return Err(Error::Domain(
                    "EC-after-PE needs n_key < n_total (disclosed signals estimate the channel)"
                        .into(),
                ));
            }
            Ok(n_est)
        }
    }
}

/// Closed-form estimator standard deviations:
/// `Var[t] = 4 t Var[x_d x~_u] / (k n C^2)` and
/// `Var[V_eps] = (2/n) Var[x~_u]^2 + Var[t] (1 - Var[x_u])^2`,
/// with `n` the estimation samples of the chosen ordering.
pub fn estimator_variances<T: Scalar>(
    kind: StateKind,
    spec: &SqueezerSpec<T>,
    ch: &ChannelParams<T>,
    fs: &FiniteSizeParams<T>,
    ordering: EcOrdering,
) -> Result<EstimatorStats<T>> {
    fs.validate()?;
    let n_est = estimation_samples(fs, ordering)?;
    let (c, _var_d, var_u) = pre_channel_moments(kind, spec);
    if c.abs() <= cst(1e-12) {
        return Err(Error::EstimationImpossible(
            "dealer and user modes are uncorrelated (C = 0); the transmission cannot be estimated"
                .into(),
        ));
    }
    let n = cst::<T>(n_est as f64);
    let k = cst::<T>(fs.k as f64);
    let vx = var_xdxu(kind, spec, ch.t);
    let var_t = cst::<T>(4.0) * ch.t * vx / (k * n * c * c);
    let var_u_post = ch.t * (var_u + ch.eps - T::one()) + T::one();
    let one_minus = T::one() - var_u;
    let var_veps = cst::<T>(2.0) / n * var_u_post * var_u_post + var_t * one_minus * one_minus;
    Ok(EstimatorStats {
        sigma_t: var_t.sqrt(),
        sigma_eps: var_veps.sqrt(),
        var_xdxu: vx,
    })
}

/// Conservative channel parameters: `t_low = t - z sigma_t` and
/// `eps_up = (t eps + z sigma_eps) / t_low`. Fails when the confidence
/// interval reaches zero transmission.
pub fn conservative_channel<T: Scalar>(
    ch: &ChannelParams<T>,
    stats: &EstimatorStats<T>,
    z_conf: T,
) -> Result<ChannelParams<T>> {
    let t_low = ch.t - z_conf * stats.sigma_t;
    if !(t_low > T::zero()) {
        return Err(Error::EstimationFailure(format!(
            "t_low = {} <= 0 at z = {}",
            t_low.to_subset().unwrap_or(f64::NAN),
            z_conf.to_subset().unwrap_or(f64::NAN)
        )));
    }
    let t_low = t_low.min(ch.t);
    let veps_up = ch.t * ch.eps + z_conf * stats.sigma_eps;
    ChannelParams::new(t_low, veps_up / t_low)
}

/// Finite-size key rate for either protocol ordering:
/// EC-after-PE gives `(n/N) [K_inf(t_low, eps_up) - Delta(n)]` with
/// `n = n_key` and estimation on the other `N - n` signals; EC-before-PE
/// gives `K_inf(t_low, eps_up) - Delta(N)` with estimation over all `N`.
pub fn finite_key_rate<T: Scalar>(
    scenario: &ScenarioSpec<T>,
    rate: RateKind,
    ch: &ChannelParams<T>,
    fs: &FiniteSizeParams<T>,
    ordering: EcOrdering,
) -> Result<T> {
    let stats = estimator_variances(scenario.state_kind, &scenario.squeezer, ch, fs, ordering)?;
    let conservative = conservative_channel(ch, &stats, fs.z_conf)?;
    let k_inf = key_rate(scenario, rate, &conservative)?.rate_bits_per_use;
    Ok(match ordering {
        EcOrdering::EcBeforePe => k_inf - delta_n(fs.n_total),
        EcOrdering::EcAfterPe => {
            let frac = cst::<T>(fs.n_key as f64) / cst::<T>(fs.n_total as f64);
            frac * (k_inf - delta_n(fs.n_key))
        }
    })
}

/// Retained-mode correlation count of a scenario: the number of nonzero
/// x-covariances between the dealer's kept modes and one user's
/// transmitted modes. Errors when the dealer retains nothing correlated
/// (GHZ-Mid, D4), where estimation needs sacrificed rounds instead.
pub fn correlation_multiplicity<T: Scalar>(scenario: &ScenarioSpec<T>) -> Result<u32> {
    let assignment = assignment_for(scenario)?;
    if assignment.dealer.is_empty() {
        return Err(Error::EstimationImpossible(
            "no retained modes: the dealer must sacrifice rounds to estimate the channel".into(),
        ));
    }
    let cm = build_state(scenario.state_kind, &scenario.squeezer);
    let tol = cst::<T>(1e-12);
    let mut k = 0u32;
    for &d in &assignment.dealer {
        for &u in &assignment.user_b {
            if cm.matrix()[(2 * d, 2 * u)].abs() > tol {
                k += 1;
            }
        }
    }
    if k == 0 {
        return Err(Error::EstimationImpossible(
            "retained modes carry no correlation with the transmitted ones".into(),
        ));
    }
    Ok(k)
}

/// One estimation round: `n` samples of `k` independent dealer/user pair
/// streams, giving one `(t_hat, V_eps_hat)` draw.
fn estimation_round<T>(
    rng: &mut ChaCha12Rng,
    n: u64,
    k: u32,
    c: T,
    var_d: T,
    var_u: T,
    ch: &ChannelParams<T>,
) -> (T, T, T, T)
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    let l11 = var_d.sqrt();
    let l21 = c / l11;
    let l22 = (var_u - c * c / var_d).max(T::zero()).sqrt();
    let noise = (T::one() - ch.t + ch.t * ch.eps).max(T::zero()).sqrt();
    let root_t = ch.t.sqrt();

    let mut sum_du = T::zero();
    let mut sum_du_sq = T::zero();
    let mut sum_u_sq = T::zero();
    let total = n * k as u64;
    for i in 0..total {
        let z1: T = StandardNormal.sample(rng);
        let z2: T = StandardNormal.sample(rng);
        let z3: T = StandardNormal.sample(rng);
        let d = l11 * z1;
        let u = l21 * z1 + l22 * z2;
        let u_tilde = root_t * u + noise * z3;
        let prod = d * u_tilde;
        sum_du += prod;
        sum_du_sq += prod * prod;
        if i < n {
            sum_u_sq += u_tilde * u_tilde;
        }
    }
    let total_t = cst::<T>(total as f64);
    let c_du = sum_du / total_t;
    let t_hat = (c_du / c) * (c_du / c);
    let mean_u_sq = sum_u_sq / cst::<T>(n as f64);
    let veps_hat = mean_u_sq + t_hat * (T::one() - var_u) - T::one();
    let var_prod = (sum_du_sq / total_t - c_du * c_du).max(T::zero());
    (t_hat, veps_hat, var_prod, c_du)
}

/// Monte-Carlo validation of the estimator statistics: simulates `trials`
/// independent estimation rounds of `n` samples (times `k` correlation
/// streams) and returns the empirical standard deviations.
///
/// Deterministic contract: trial `i` uses ChaCha stream `i` of the given
/// seed, so results are bitwise reproducible and independent of the rayon
/// thread count.
pub fn simulate_estimation<T>(
    kind: StateKind,
    spec: &SqueezerSpec<T>,
    ch: &ChannelParams<T>,
    n: u64,
    k: u32,
    trials: u32,
    seed: u64,
) -> Result<EstimatorStats<T>>
where
    T: Scalar + Send + Sync,
    StandardNormal: Distribution<T>,
{
    if trials < 2 {
        return Err(Error::Domain("need at least 2 trials".into()));
    }
    if n == 0 || k == 0 {
        return Err(Error::Domain("need n >= 1 and k >= 1".into()));
    }
    let (c, var_d, var_u) = pre_channel_moments(kind, spec);
    if c.abs() <= cst(1e-12) {
        return Err(Error::EstimationImpossible("C = 0".into()));
    }
    let rounds: Vec<(T, T, T)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let (t_hat, veps_hat, var_prod, _) =
                estimation_round(&mut rng, n, k, c, var_d, var_u, ch);
            (t_hat, veps_hat, var_prod)
        })
        .collect();
    let m = cst::<T>(trials as f64);
    let mean = |f: &dyn Fn(&(T, T, T)) -> T| rounds.iter().map(f).fold(T::zero(), |a, b| a + b) / m;
    let mean_t = mean(&|r| r.0);
    let mean_e = mean(&|r| r.1);
    let var = |f: &dyn Fn(&(T, T, T)) -> T, mu: T| {
        rounds
            .iter()
            .map(|r| {
                let d = f(r) - mu;
                d * d
            })
            .fold(T::zero(), |a, b| a + b)
            / (m - T::one())
    };
    Ok(EstimatorStats {
        sigma_t: var(&|r| r.0, mean_t).sqrt(),
        sigma_eps: var(&|r| r.1, mean_e).sqrt(),
        var_xdxu: mean(&|r| r.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyrates::{Distribution, Scheme};
    use approx::assert_abs_diff_eq;

    fn spec(v: f64, v_n: f64) -> SqueezerSpec<f64> {
        SqueezerSpec::new(v, v_n).unwrap()
    }

    fn ch(t: f64, eps: f64) -> ChannelParams<f64> {
        ChannelParams::new(t, eps).unwrap()
    }

    #[test]
    fn delta_values_and_monotonicity() {
        // frozen from the formula itself
        assert_abs_diff_eq!(delta_n::<f64>(10_000_000), 0.0129489176, epsilon = 1e-9);
        assert_abs_diff_eq!(delta_n::<f64>(10_000), 0.4094807, epsilon = 1e-6);
        assert!(delta_n::<f64>(100_000_000_000_000) < 1e-3);
        let mut prev = f64::INFINITY;
        for n in [10u64, 100, 10_000, 1_000_000] {
            let d = delta_n::<f64>(n);
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn var_xdxu_six_mode_values() {
        let s = spec(0.1, 0.0);
        assert_abs_diff_eq!(
            var_xdxu(StateKind::SixMode, &s, 1.0),
            31.628125,
            epsilon = 1e-12
        );
        // t = 0 factorizes into Var[x_d] * Var[vacuum]
        assert_abs_diff_eq!(
            var_xdxu(StateKind::SixMode, &s, 0.0),
            (1.0 + 0.01) / 0.2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sigma_t_scaling_in_k_and_n() {
        let s = spec(0.1, 0.0);
        let base = FiniteSizeParams::<f64>::new(1_000_000, 1_000_000, 1).unwrap();
        let k4 = FiniteSizeParams::<f64>::new(1_000_000, 1_000_000, 4).unwrap();
        let n4 = FiniteSizeParams::<f64>::new(4_000_000, 4_000_000, 1).unwrap();
        let e1 =
            estimator_variances(StateKind::GhzLike, &s, &ch(0.9, 0.02), &base, EcOrdering::EcBeforePe)
                .unwrap();
        let e2 =
            estimator_variances(StateKind::GhzLike, &s, &ch(0.9, 0.02), &k4, EcOrdering::EcBeforePe)
                .unwrap();
        let e3 =
            estimator_variances(StateKind::GhzLike, &s, &ch(0.9, 0.02), &n4, EcOrdering::EcBeforePe)
                .unwrap();
        assert_abs_diff_eq!(e2.sigma_t, e1.sigma_t / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e3.sigma_t, e1.sigma_t / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn conservative_channel_arithmetic() {
        let stats = EstimatorStats {
            sigma_t: 0.0,
            sigma_eps: 0.0,
            var_xdxu: 1.0,
        };
        let c = conservative_channel(&ch(0.9, 0.02), &stats, 6.5).unwrap();
        assert_abs_diff_eq!(c.t, 0.9);
        assert_abs_diff_eq!(c.eps, 0.02, epsilon = 1e-12);

        let stats = EstimatorStats {
            sigma_t: 0.01,
            sigma_eps: 0.0,
            var_xdxu: 1.0,
        };
        let c = conservative_channel(&ch(0.9, 0.0), &stats, 6.5).unwrap();
        assert_abs_diff_eq!(c.t, 0.835, epsilon = 1e-12);

        let stats = EstimatorStats {
            sigma_t: 0.2,
            sigma_eps: 0.0,
            var_xdxu: 1.0,
        };
        assert!(conservative_channel(&ch(0.9, 0.0), &stats, 6.5).is_err());
    }

    #[test]
    fn finite_rate_recovers_asymptotic_in_the_limit() {
        let scenario = ScenarioSpec::new(
            StateKind::SixMode,
            Distribution::D1,
            Scheme::Dr,
            1.0,
            1.0,
            spec(0.1, 0.0),
        )
        .unwrap();
        let channel = ch(0.95, 0.005);
        let asymptotic = key_rate(&scenario, RateKind::Cka, &channel)
            .unwrap()
            .rate_bits_per_use;
        let fs = FiniteSizeParams::<f64>::new(u64::pow(10, 18), u64::pow(10, 18), 3).unwrap();
        let finite = finite_key_rate(&scenario, RateKind::Cka, &channel, &fs, EcOrdering::EcBeforePe)
            .unwrap();
        assert!(finite <= asymptotic);
        assert!((asymptotic - finite).abs() < 1e-6);
    }

    #[test]
    fn ec_after_pe_needs_spare_signals() {
        let fs = FiniteSizeParams::<f64>::new(1000, 1000, 1).unwrap();
        assert!(estimation_samples(&fs, EcOrdering::EcAfterPe).is_err());
        assert_eq!(estimation_samples(&fs, EcOrdering::EcBeforePe).unwrap(), 1000);
        let fs = FiniteSizeParams::<f64>::new(1000, 400, 1).unwrap();
        assert_eq!(estimation_samples(&fs, EcOrdering::EcAfterPe).unwrap(), 600);
    }

    #[test]
    fn correlation_multiplicities() {
        let make = |kind, dist| {
            ScenarioSpec::new(kind, dist, Scheme::Dr, 1.0, 1.0, spec(0.1, 0.0)).unwrap()
        };
        assert_eq!(
            correlation_multiplicity(&make(StateKind::GhzLike, Distribution::TripartiteDefault))
                .unwrap(),
            1
        );
        assert_eq!(
            correlation_multiplicity(&make(StateKind::Dan, Distribution::TripartiteDefault))
                .unwrap(),
            1
        );
        assert_eq!(
            correlation_multiplicity(&make(StateKind::SixMode, Distribution::D1)).unwrap(),
            3
        );
        assert_eq!(
            correlation_multiplicity(&make(StateKind::SixMode, Distribution::D2)).unwrap(),
            4
        );
        assert_eq!(
            correlation_multiplicity(&make(StateKind::SixMode, Distribution::D3)).unwrap(),
            2
        );
        // D4 retains nothing
        let d4 = ScenarioSpec::new(
            StateKind::SixMode,
            Distribution::D4,
            Scheme::Mid,
            1.0,
            1.0,
            spec(0.1, 0.0),
        )
        .unwrap();
        assert!(matches!(
            correlation_multiplicity(&d4),
            Err(Error::EstimationImpossible(_))
        ));
    }

    #[test]
    fn mid_scheme_half_split_workflow() {
        // all-modes-sent protocols sacrifice half the signals to
        // estimation rounds; k must then be given explicitly
        let sc = ScenarioSpec::new(
            StateKind::GhzLike,
            Distribution::TripartiteDefault,
            Scheme::Mid,
            0.95,
            1.0,
            spec(0.1, 10.0),
        )
        .unwrap();
        assert!(correlation_multiplicity(&sc).is_err());
        let n: u64 = 10_000_000;
        let fs = FiniteSizeParams::<f64>::new(n, n / 2, 1).unwrap();
        let channel = ch(0.95, 0.0);
        let finite = finite_key_rate(&sc, RateKind::Cka, &channel, &fs, EcOrdering::EcAfterPe)
            .unwrap();
        let asymptotic = key_rate(&sc, RateKind::Cka, &channel).unwrap().rate_bits_per_use;
        assert!(finite < asymptotic);
        assert!(finite > 0.0, "half-split Mid rate should survive here: {finite}");
    }

    #[test]
    fn simulation_is_deterministic_and_concentrates() {
        let s = spec(0.1, 0.0);
        let a = simulate_estimation(StateKind::GhzLike, &s, &ch(1.0, 0.0), 20_000, 1, 8, 7).unwrap();
        let b = simulate_estimation(StateKind::GhzLike, &s, &ch(1.0, 0.0), 20_000, 1, 8, 7).unwrap();
        assert_eq!(a, b);
        // t = 1, eps = 0: t_hat concentrates near 1
        assert!(a.sigma_t < 0.1);
        let c = simulate_estimation(StateKind::GhzLike, &s, &ch(1.0, 0.0), 20_000, 1, 8, 8).unwrap();
        assert_ne!(a, c);
    }
}
