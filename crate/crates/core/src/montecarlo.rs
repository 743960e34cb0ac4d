//! Adaptive Monte Carlo estimate of the average efficiency under a phase
//! deviation `δ`, over Haar-random pure or Hilbert–Schmidt-random mixed
//! targets.
//!
//! Sample `i` of batch `b` is drawn from the stream `child_rng(seed, b)`, so
//! every batch is reproducible in isolation. Batches are evaluated in
//! parallel in fixed-size rounds and merged strictly in batch order; the
//! stopping decision is taken after each merged batch. The report is
//! therefore identical for any thread count.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::eta_deviation;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DENSITY_TOL};
use crate::states::{check_dim, check_index, child_rng, ginibre_state, haar_vector, perturbed_matrix, Magnitudes};
use crate::teleport::{cjks_bob, coherence_l1_matrix};

pub const DEFAULT_SEM_TARGET: f64 = 1e-5;
pub const DEFAULT_MAX_SAMPLES: usize = 10_000_000;
pub const DEFAULT_BATCH_SIZE: usize = 1000;
pub const DEFAULT_SPOT_CHECK_EVERY: usize = 1000;
pub const SPOT_CHECK_TOL: f64 = 1e-9;

/// Batches evaluated per parallel round.
const ROUND_BATCHES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ensemble {
    #[serde(rename = "pure-haar")]
    PureHaar,
    #[serde(rename = "mixed-hs")]
    MixedHs,
}

impl Ensemble {
    pub fn label(self) -> &'static str {
        match self {
            Ensemble::PureHaar => "pure-haar",
            Ensemble::MixedHs => "mixed-hs",
        }
    }

    fn magnitudes(self, d: usize, rng: &mut impl Rng) -> Result<Magnitudes> {
        match self {
            Ensemble::PureHaar => {
                let psi = haar_vector(d, rng)?;
                let abs: Vec<f64> = psi.iter().map(|z| z.norm()).collect();
                let data = (0..d * d).map(|i| abs[i / d] * abs[i % d]).collect();
                Magnitudes::new(d, data)
            }
            Ensemble::MixedHs => Ok(Magnitudes::of(&ginibre_state(d, rng)?)),
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure-haar" | "pure" => Ok(Ensemble::PureHaar),
            "mixed-hs" | "mixed" => Ok(Ensemble::MixedHs),
            other => Err(Error::InvalidConfig(format!("unknown ensemble `{other}`"))),
        }
    }
}

/// What to do with perturbed samples that are not positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationPolicy {
    /// Average over every drawn sample; non-positive ones are counted.
    Keep,
    /// Discard non-positive samples and count them as rejected.
    Reject,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub d: usize,
    pub ensemble: Ensemble,
    pub delta_phi: f64,
    pub sem_target: f64,
    /// Cap on drawn samples (accepted or not).
    pub max_samples: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub basis_x: usize,
    /// Spot-check every basis and outcome instead of `(basis_x, 0)` only.
    pub sweep_outcomes: bool,
    pub policy: PerturbationPolicy,
    pub spot_check_every: usize,
}

impl EstimatorConfig {
    pub fn new(d: usize, ensemble: Ensemble, delta_phi: f64, seed: u64) -> Self {
        Self {
            d,
            ensemble,
            delta_phi,
            sem_target: DEFAULT_SEM_TARGET,
            max_samples: DEFAULT_MAX_SAMPLES,
            batch_size: DEFAULT_BATCH_SIZE,
            seed,
            basis_x: 0,
            sweep_outcomes: false,
            policy: PerturbationPolicy::Keep,
            spot_check_every: DEFAULT_SPOT_CHECK_EVERY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        check_index("x", self.basis_x, self.d)?;
        if !(self.sem_target > 0.0) {
            return Err(Error::InvalidConfig(format!("sem_target = {} must be positive", self.sem_target)));
        }
        if !self.delta_phi.is_finite() {
            return Err(Error::InvalidConfig(format!("delta_phi = {} is not finite", self.delta_phi)));
        }
        if self.batch_size == 0 || self.max_samples < self.batch_size {
            return Err(Error::InvalidConfig(format!(
                "max_samples = {} must be at least batch_size = {} > 0",
                self.max_samples, self.batch_size
            )));
        }
        if self.spot_check_every == 0 {
            return Err(Error::InvalidConfig("spot_check_every must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub d: usize,
    pub ensemble: Ensemble,
    pub delta_phi: f64,
    pub mean_eta: f64,
    pub sem: f64,
    /// Samples contributing to the mean.
    pub samples: usize,
    pub converged: bool,
    /// Samples discarded under [`PerturbationPolicy::Reject`].
    pub rejected: usize,
    /// Drawn samples whose perturbed matrix has a negative eigenvalue.
    pub non_positive: usize,
    pub seed: u64,
    pub sem_target: f64,
    pub policy: PerturbationPolicy,
    pub spot_checks: usize,
    pub max_spot_deviation: f64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Combines two accumulators (pairwise update).
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Sample standard deviation over `√n`.
    pub fn sem(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchStats {
    acc: Welford,
    rejected: usize,
    non_positive: usize,
    spot_checks: usize,
    max_spot_deviation: f64,
}

fn spot_check(mags: &Magnitudes, cfg: &EstimatorConfig, eta_fast: f64) -> Result<(usize, f64)> {
    let d = cfg.d;
    let pairs: Vec<(usize, usize)> = if cfg.sweep_outcomes {
        (0..d).flat_map(|x| (0..d).map(move |y| (x, y))).collect()
    } else {
        vec![(cfg.basis_x, 0)]
    };
    let mut worst = 0.0f64;
    for &(x, y) in &pairs {
        let raw = perturbed_matrix(mags, x, cfg.delta_phi);
        let bob = cjks_bob(&raw, None, x, y)?;
        let c_out = coherence_l1_matrix(&bob.scale(1.0 / bob.trace().re));
        let eta_engine = c_out / coherence_l1_matrix(&raw);
        worst = worst.max((eta_engine - eta_fast).abs());
    }
    Ok((pairs.len(), worst))
}

fn is_positive(m: &ComplexMatrix) -> bool {
    m.hermitian_eigenvalues().first().is_none_or(|&v| v >= -DENSITY_TOL)
}

fn run_batch(cfg: &EstimatorConfig, batch: usize, draws: usize) -> Result<BatchStats> {
    let mut rng = child_rng(cfg.seed, batch as u64);
    let mut stats = BatchStats::default();
    for i in 0..draws {
        let mags = cfg.ensemble.magnitudes(cfg.d, &mut rng)?;
        let positive = cfg.delta_phi == 0.0 || is_positive(&perturbed_matrix(&mags, cfg.basis_x, cfg.delta_phi));
        if !positive {
            stats.non_positive += 1;
            if cfg.policy == PerturbationPolicy::Reject {
                stats.rejected += 1;
                continue;
            }
        }
        let Some(eta) = eta_deviation(&mags, cfg.delta_phi).value() else {
            // Incoherent draws have measure zero; skip them like rejections.
            stats.rejected += 1;
            continue;
        };
        stats.acc.push(eta);
        let global = batch * cfg.batch_size + i;
        if global % cfg.spot_check_every == 0 {
            let (n, dev) = spot_check(&mags, cfg, eta)?;
            stats.spot_checks += n;
            stats.max_spot_deviation = stats.max_spot_deviation.max(dev);
        }
    }
    Ok(stats)
}

/// Runs batches until the SEM drops below the target or the sample cap is hit.
pub fn estimate_avg_efficiency(cfg: &EstimatorConfig) -> Result<EstimatorReport> {
    cfg.validate()?;
    let total_batches = cfg.max_samples.div_ceil(cfg.batch_size);
    let draws_in = |b: usize| (cfg.max_samples - b * cfg.batch_size).min(cfg.batch_size);

    let mut acc = Welford::default();
    let mut totals = BatchStats::default();
    let mut drawn = 0usize;
    let mut converged = false;
    let mut next = 0usize;
    'rounds: while next < total_batches {
        let end = (next + ROUND_BATCHES).min(total_batches);
        let results: Vec<Result<BatchStats>> = (next..end)
            .into_par_iter()
            .map(|b| run_batch(cfg, b, draws_in(b)))
            .collect();
        for (b, res) in (next..end).zip(results) {
            let s = res?;
            acc.merge(&s.acc);
            drawn += draws_in(b);
            totals.rejected += s.rejected;
            totals.non_positive += s.non_positive;
            totals.spot_checks += s.spot_checks;
            totals.max_spot_deviation = totals.max_spot_deviation.max(s.max_spot_deviation);
            if acc.n > 0 && acc.sem() < cfg.sem_target {
                converged = true;
                break 'rounds;
            }
        }
        next = end;
    }
    if acc.n == 0 {
        return Err(Error::NoAcceptedSamples { draws: drawn });
    }
    Ok(EstimatorReport {
        d: cfg.d,
        ensemble: cfg.ensemble,
        delta_phi: cfg.delta_phi,
        mean_eta: acc.mean,
        sem: acc.sem(),
        samples: acc.n,
        converged,
        rejected: totals.rejected,
        non_positive: totals.non_positive,
        seed: cfg.seed,
        sem_target: cfg.sem_target,
        policy: cfg.policy,
        spot_checks: totals.spot_checks,
        max_spot_deviation: totals.max_spot_deviation,
    })
}

pub const ROBUSTNESS_DIMS: [usize; 4] = [3, 4, 8, 16];
pub const ROBUSTNESS_DELTAS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessCell {
    pub d: usize,
    pub delta_phi: f64,
    pub pure: EstimatorReport,
    pub mixed: EstimatorReport,
}

/// Options shared by every cell of the robustness table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub seed: u64,
    pub sem_target: f64,
    pub max_samples: usize,
    pub policy: PerturbationPolicy,
    pub sweep_outcomes: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            sem_target: DEFAULT_SEM_TARGET,
            max_samples: DEFAULT_MAX_SAMPLES,
            policy: PerturbationPolicy::Keep,
            sweep_outcomes: false,
        }
    }
}

/// Estimates every `(d, δ)` cell for both ensembles.
pub fn robustness_table(dims: &[usize], deltas: &[f64], opts: &TableOptions) -> Result<Vec<RobustnessCell>> {
    let mut cells = Vec::with_capacity(dims.len() * deltas.len());
    for &d in dims {
        for &delta in deltas {
            let run = |ensemble| {
                let mut cfg = EstimatorConfig::new(d, ensemble, delta, opts.seed);
                cfg.sem_target = opts.sem_target;
                cfg.max_samples = opts.max_samples;
                cfg.policy = opts.policy;
                cfg.sweep_outcomes = opts.sweep_outcomes;
                estimate_avg_efficiency(&cfg)
            };
            cells.push(RobustnessCell {
                d,
                delta_phi: delta,
                pure: run(Ensemble::PureHaar)?,
                mixed: run(Ensemble::MixedHs)?,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn quick(d: usize, ensemble: Ensemble, delta: f64) -> EstimatorConfig {
        let mut cfg = EstimatorConfig::new(d, ensemble, delta, 7);
        cfg.sem_target = 1e-4;
        cfg.max_samples = 20_000;
        cfg
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [0.3, 1.7, -2.0, 4.5, 0.0, 0.25, 9.0];
        let mut w = Welford::default();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert_abs_diff_eq!(w.mean, mean, epsilon = 1e-14);
        assert_abs_diff_eq!(w.variance(), var, epsilon = 1e-13);
        assert_abs_diff_eq!(w.sem(), (var / xs.len() as f64).sqrt(), epsilon = 1e-14);

        let (mut a, mut b) = (Welford::default(), Welford::default());
        xs[..3].iter().for_each(|&x| a.push(x));
        xs[3..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_abs_diff_eq!(a.mean, w.mean, epsilon = 1e-14);
        assert_abs_diff_eq!(a.m2, w.m2, epsilon = 1e-12);
        assert_eq!(a.n, w.n);
    }

    #[test]
    fn identical_samples_have_zero_sem() {
        let mut w = Welford::default();
        for _ in 0..500 {
            w.push(0.73);
        }
        assert_eq!(w.sem(), 0.0);
        assert_abs_diff_eq!(w.mean, 0.73, epsilon = 1e-15);
    }

    #[test]
    fn zero_deviation_converges_in_one_batch() {
        for ensemble in [Ensemble::PureHaar, Ensemble::MixedHs] {
            for d in [2, 3, 8] {
                let r = estimate_avg_efficiency(&quick(d, ensemble, 0.0)).unwrap();
                assert_eq!(r.mean_eta, 1.0);
                assert_eq!(r.sem, 0.0);
                assert_eq!(r.samples, DEFAULT_BATCH_SIZE);
                assert!(r.converged);
                assert_eq!(r.non_positive, 0);
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = quick(4, Ensemble::MixedHs, 0.1);
        let a = estimate_avg_efficiency(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_avg_efficiency(&cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.mean_eta.to_bits(), b.mean_eta.to_bits());
    }

    #[test]
    fn spot_checks_agree_with_engine() {
        let mut cfg = quick(3, Ensemble::PureHaar, 0.05);
        cfg.spot_check_every = 50;
        cfg.sweep_outcomes = true;
        let r = estimate_avg_efficiency(&cfg).unwrap();
        assert!(r.spot_checks >= 9);
        assert!(r.max_spot_deviation <= SPOT_CHECK_TOL, "{}", r.max_spot_deviation);
    }

    #[test]
    fn pure_perturbed_states_are_never_positive() {
        // A rank-one state with every phase shifted by δ has a negative
        // eigenvalue once d ≥ 3, so Keep counts them and Reject drops them all.
        let r = estimate_avg_efficiency(&quick(3, Ensemble::PureHaar, 0.1)).unwrap();
        assert_eq!(r.non_positive, r.samples);
        let mut cfg = quick(3, Ensemble::PureHaar, 0.1);
        cfg.policy = PerturbationPolicy::Reject;
        cfg.max_samples = 2000;
        assert!(matches!(estimate_avg_efficiency(&cfg), Err(Error::NoAcceptedSamples { draws: 2000 })));
    }

    #[test]
    fn reject_policy_on_mixed_states() {
        let mut cfg = quick(3, Ensemble::MixedHs, 0.1);
        cfg.policy = PerturbationPolicy::Reject;
        let r = estimate_avg_efficiency(&cfg).unwrap();
        assert_eq!(r.rejected, r.non_positive);
        assert!(r.samples > 0);
        assert!(r.mean_eta <= 1.0);
    }

    #[test]
    fn cap_reached_is_not_an_error() {
        let mut cfg = quick(4, Ensemble::PureHaar, 0.1);
        cfg.sem_target = 1e-9;
        cfg.max_samples = 2500;
        let r = estimate_avg_efficiency(&cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.samples, 2500);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = quick(3, Ensemble::PureHaar, 0.1);
        cfg.sem_target = 0.0;
        assert!(estimate_avg_efficiency(&cfg).is_err());
        let mut cfg = quick(3, Ensemble::PureHaar, 0.1);
        cfg.max_samples = 10;
        assert!(estimate_avg_efficiency(&cfg).is_err());
        let mut cfg = quick(3, Ensemble::PureHaar, f64::NAN);
        cfg.delta_phi = f64::NAN;
        assert!(estimate_avg_efficiency(&cfg).is_err());
        assert!("gaussian".parse::<Ensemble>().is_err());
        assert_eq!("mixed-hs".parse::<Ensemble>().unwrap(), Ensemble::MixedHs);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn mean_within_bounds(seed in any::<u64>(), d in 2usize..6, delta in 0.0f64..0.5) {
            let mut cfg = EstimatorConfig::new(d, Ensemble::MixedHs, delta, seed);
            cfg.sem_target = 1e-3;
            cfg.max_samples = 3000;
            let r = estimate_avg_efficiency(&cfg).unwrap();
            prop_assert!(r.mean_eta >= 0.0 && r.mean_eta <= 1.0 + 3.0 * r.sem);
            prop_assert_eq!(r.converged, r.sem < cfg.sem_target);
        }
    }
}
