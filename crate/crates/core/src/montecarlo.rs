//! Ensemble simulation of the averaged horizontal survival.
//!
//! Each realization draws a sign sequence from the telegraph chain with its
//! own sub-seed and propagates `|H⟩` through the blocks. Realizations are
//! written into index-ordered slots and reduced sequentially, so results do
//! not depend on the number of worker threads.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::analytic::{check_tau, BlockTiming};
use crate::error::{Error, Result};
use crate::noise::{derive_seed, fill_signs, stream_rng, CorrelationParameter};
use crate::polarization::{BlockPropagator, MeasurementStrength};

/// Largest chain length [`exact_average`] will enumerate.
pub const MAX_EXACT_BLOCKS: usize = 20;

/// Covariance matrices are only kept up to this many blocks.
pub const MAX_COVARIANCE_BLOCKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    /// Jump modulus `Δφ`, radians.
    pub delta_phi: f64,
    pub theta: MeasurementStrength,
    pub c: CorrelationParameter,
    pub n_blocks: usize,
    pub tau: f64,
    pub n_realizations: usize,
    pub seed: u64,
    /// Detection events per sequence for the optional binomial layer.
    pub shots_per_sequence: Option<u64>,
}

impl ExperimentConfig {
    pub const DEFAULT_BLOCKS: usize = 7;
    pub const DEFAULT_TAU: f64 = 1.0;
    pub const DEFAULT_REALIZATIONS: usize = 100;

    /// Config with the default `N = 7`, `τ = 1`, `M = 100` and no shot layer.
    pub fn new(delta_phi: f64, theta: MeasurementStrength, c: CorrelationParameter, seed: u64) -> Self {
        Self {
            delta_phi,
            theta,
            c,
            n_blocks: Self::DEFAULT_BLOCKS,
            tau: Self::DEFAULT_TAU,
            n_realizations: Self::DEFAULT_REALIZATIONS,
            seed,
            shots_per_sequence: None,
        }
    }

    pub fn with_realizations(mut self, m: usize) -> Self {
        self.n_realizations = m;
        self
    }

    pub fn with_blocks(mut self, n: usize) -> Self {
        self.n_blocks = n;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_theta(mut self, theta: MeasurementStrength) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_phi > 0.0 && self.delta_phi.is_finite()) {
            return Err(Error::domain("delta_phi", self.delta_phi, "0 < delta_phi < inf"));
        }
        check_tau(self.tau)?;
        if self.n_blocks == 0 {
            return Err(Error::domain("n_blocks", 0.0, "n_blocks >= 1"));
        }
        if self.n_realizations == 0 {
            return Err(Error::domain("n_realizations", 0.0, "n_realizations >= 1"));
        }
        if self.shots_per_sequence == Some(0) {
            return Err(Error::domain("shots_per_sequence", 0.0, "shots_per_sequence >= 1"));
        }
        Ok(())
    }

    pub fn timing(&self) -> BlockTiming {
        BlockTiming {
            tau: self.tau,
            n_blocks: self.n_blocks,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    /// `t_1, …, t_N`.
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Sample standard deviation across realizations (not of the mean).
    pub std: Vec<f64>,
    /// 0 for an exact expectation.
    pub n_realizations: usize,
    /// Row-major `N × N` sample covariance of per-realization values.
    pub covariance: Option<Vec<f64>>,
}

impl SurvivalCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Standard error of the mean at block `k` (1-based index `k + 1`).
    pub fn sem(&self, k: usize) -> f64 {
        if self.n_realizations == 0 {
            0.0
        } else {
            self.std[k] / (self.n_realizations as f64).sqrt()
        }
    }

    pub fn last(&self) -> Option<(f64, f64, f64)> {
        let k = self.len().checked_sub(1)?;
        Some((self.times[k], self.mean[k], self.std[k]))
    }
}

/// Survival values of realization `index`, written into `out`.
///
/// Pure in `(config, index)`: any realization can be regenerated alone.
pub fn simulate_realization(config: &ExperimentConfig, index: u64, out: &mut [f64]) {
    let mut rng = stream_rng(derive_seed(config.seed, index));
    let mut signs = vec![false; out.len()];
    fill_signs(&mut rng, config.c.repeat_probability(), &mut signs);
    BlockPropagator::new(config.delta_phi, config.theta).survival_into(&signs, out);
    if let Some(shots) = config.shots_per_sequence {
        for p in out.iter_mut() {
            // Binomial::new only fails for p outside [0, 1]
            let draw = Binomial::new(shots, p.clamp(0.0, 1.0)).map(|b| b.sample(&mut rng));
            *p = draw.map_or(*p, |k| k as f64 / shots as f64);
        }
    }
}

/// Mean, sample std and covariance of an `m × n` row-major table.
///
/// Deviations are taken from the first row before averaging, so identical
/// rows give their common value and a std of exactly 0.
fn summarise(values: &[f64], m: usize, n: usize, with_cov: bool) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let first = &values[..n];
    let mut shift = vec![0.0; n];
    for row in values.chunks_exact(n) {
        for ((s, &x), &x0) in shift.iter_mut().zip(row).zip(first) {
            *s += x - x0;
        }
    }
    let mf = m as f64;
    let mean: Vec<f64> = first.iter().zip(&shift).map(|(&x0, &s)| x0 + s / mf).collect();
    let denom = if m > 1 { mf - 1.0 } else { 1.0 };

    let mut cov = vec![0.0; if with_cov { n * n } else { n }];
    let mut dev = vec![0.0; n];
    for row in values.chunks_exact(n) {
        for ((d, &x), &mu) in dev.iter_mut().zip(row).zip(&mean) {
            *d = x - mu;
        }
        if with_cov {
            for i in 0..n {
                for j in i..n {
                    cov[i * n + j] += dev[i] * dev[j];
                }
            }
        } else {
            for (acc, d) in cov.iter_mut().zip(&dev) {
                *acc += d * d;
            }
        }
    }
    if m == 1 {
        cov.iter_mut().for_each(|c| *c = 0.0);
    }
    if with_cov {
        for i in 0..n {
            for j in i..n {
                let v = cov[i * n + j] / denom;
                cov[i * n + j] = v;
                cov[j * n + i] = v;
            }
        }
        let std = (0..n).map(|i| cov[i * n + i].sqrt()).collect();
        (mean, std, Some(cov))
    } else {
        let std = cov.iter().map(|s| (s / denom).sqrt()).collect();
        (mean, std, None)
    }
}

/// Monte Carlo estimate of `P̄_H(t_k)` on the current rayon pool.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<SurvivalCurve> {
    config.validate()?;
    let n = config.n_blocks;
    let m = config.n_realizations;
    let len = m
        .checked_mul(n)
        .ok_or_else(|| Error::Resource(format!("{m} x {n} ensemble does not fit in memory")))?;
    let mut values = vec![0.0; len];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| simulate_realization(config, i as u64, row));

    let (mean, std, covariance) = summarise(&values, m, n, n <= MAX_COVARIANCE_BLOCKS);
    Ok(SurvivalCurve {
        times: config.timing().times(),
        mean,
        std,
        n_realizations: m,
        covariance,
    })
}

/// [`run_ensemble`] on a dedicated pool of `workers` threads.
pub fn run_ensemble_with_workers(config: &ExperimentConfig, workers: usize) -> Result<SurvivalCurve> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    pool.install(|| run_ensemble(config))
}

/// Final-block result of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub theta: f64,
    pub mean: f64,
    pub std: f64,
    pub n_realizations: usize,
}

impl SweepPoint {
    pub fn sem(&self) -> f64 {
        self.std / (self.n_realizations as f64).sqrt()
    }
}

/// Ensemble seed used for sweep point `theta` under `master`.
pub fn sweep_seed(master: u64, theta: MeasurementStrength) -> u64 {
    derive_seed(master, theta.value().to_bits())
}

/// Full curves for every `θ`, sorted by `θ`, each with its own sub-seed.
pub fn theta_sweep_curves(
    base: &ExperimentConfig,
    thetas: &[MeasurementStrength],
) -> Result<Vec<(MeasurementStrength, SurvivalCurve)>> {
    if thetas.is_empty() {
        return Err(Error::Invalid("theta sweep needs at least one theta".into()));
    }
    let mut sorted = thetas.to_vec();
    sorted.sort_by(|a, b| a.value().total_cmp(&b.value()));
    sorted
        .into_iter()
        .map(|th| {
            let cfg = base.with_theta(th).with_seed(sweep_seed(base.seed, th));
            Ok((th, run_ensemble(&cfg)?))
        })
        .collect()
}

/// `P̄_H(t_N)` with its spread for every `θ`, sorted by `θ`.
pub fn theta_sweep(base: &ExperimentConfig, thetas: &[MeasurementStrength]) -> Result<Vec<SweepPoint>> {
    Ok(theta_sweep_curves(base, thetas)?
        .into_iter()
        .map(|(th, curve)| {
            let (_, mean, std) = curve.last().expect("n_blocks >= 1");
            SweepPoint {
                theta: th.value(),
                mean,
                std,
                n_realizations: curve.n_realizations,
            }
        })
        .collect())
}

/// Exact expectation by enumerating all `2^N` sign sequences.
///
/// Each sequence is weighted by its chain probability
/// `½ p^{repeats} (1-p)^{flips}`. `n_realizations` and the std fields are 0.
pub fn exact_average(config: &ExperimentConfig) -> Result<SurvivalCurve> {
    let n = config.n_blocks;
    if n > MAX_EXACT_BLOCKS {
        return Err(Error::Resource(format!(
            "exact enumeration needs 2^{n} sequences; at most {MAX_EXACT_BLOCKS} blocks are supported"
        )));
    }
    ExperimentConfig {
        n_realizations: 1,
        ..*config
    }
    .validate()?;

    let p = config.c.repeat_probability();
    let prop = BlockPropagator::new(config.delta_phi, config.theta);
    let mut mean = vec![0.0; n];
    let mut signs = vec![false; n];
    let mut buf = vec![0.0; n];
    for mask in 0u32..(1 << n) {
        let mut weight = 0.5;
        for (k, s) in signs.iter_mut().enumerate() {
            *s = mask >> k & 1 == 1;
            if k > 0 {
                weight *= if *s == (mask >> (k - 1) & 1 == 1) { p } else { 1.0 - p };
            }
        }
        if weight == 0.0 {
            continue;
        }
        prop.survival_into(&signs, &mut buf);
        for (acc, v) in mean.iter_mut().zip(&buf) {
            *acc += weight * v;
        }
    }
    Ok(SurvivalCurve {
        times: config.timing().times(),
        mean,
        std: vec![0.0; n],
        n_realizations: 0,
        covariance: None,
    })
}

/// Second moments `(⟨a_H²⟩, ⟨a_H a_V⟩, ⟨a_V²⟩)` restricted to one last sign.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    hh: f64,
    hv: f64,
    vv: f64,
}

impl Moments {
    fn mix(a: Moments, b: Moments, wa: f64) -> Moments {
        let wb = 1.0 - wa;
        Moments {
            hh: wa * a.hh + wb * b.hh,
            hv: wa * a.hv + wb * b.hv,
            vv: wa * a.vv + wb * b.vv,
        }
    }

    fn block(self, cos: f64, sin: f64, theta: f64) -> Moments {
        let (c2, s2, cs) = (cos * cos, sin * sin, cos * sin);
        Moments {
            hh: c2 * self.hh - 2.0 * cs * self.hv + s2 * self.vv,
            hv: theta * (cs * self.hh + (c2 - s2) * self.hv - cs * self.vv),
            vv: theta * theta * (s2 * self.hh + 2.0 * cs * self.hv + c2 * self.vv),
        }
    }
}

/// Exact `P̄_H(t_k)`, `k = 1..=n_blocks`, in `O(N)` operations.
///
/// Propagates the second moments of `(a_H, a_V)` jointly with the sign of
/// the last jump, which is all the chain remembers. Agrees with
/// [`exact_average`] to rounding and has no length limit.
pub fn chain_average(delta_phi: f64, c: CorrelationParameter, theta: MeasurementStrength, n_blocks: usize) -> Vec<f64> {
    let p = c.repeat_probability();
    let (sin, cos) = delta_phi.sin_cos();
    let th = theta.value();
    let half = Moments {
        hh: 0.5,
        ..Moments::default()
    };
    // index 0: last jump positive, 1: negative
    let mut mom = [half, half];
    let mut out = Vec::with_capacity(n_blocks);
    for k in 0..n_blocks {
        let prior = if k == 0 {
            mom
        } else {
            [Moments::mix(mom[0], mom[1], p), Moments::mix(mom[1], mom[0], p)]
        };
        mom = [prior[0].block(cos, sin, th), prior[1].block(cos, -sin, th)];
        out.push(mom[0].hh + mom[1].hh);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{averaged_survival, validity_check, AbsorptionConvention, RateSet, DEFAULT_VALIDITY_EPSILON};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FOUR_DEG: f64 = 4.0 * std::f64::consts::PI / 180.0;

    fn th(t: f64) -> MeasurementStrength {
        MeasurementStrength::new(t).unwrap()
    }

    fn corr(c: f64) -> CorrelationParameter {
        CorrelationParameter::new(c).unwrap()
    }

    fn cfg(c: f64, t: f64, m: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig::new(FOUR_DEG, th(t), corr(c), seed).with_realizations(m)
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.0, 0.5, 0, 1).validate().is_err());
        assert!(cfg(0.0, 0.5, 10, 1).with_blocks(0).validate().is_err());
        assert!(cfg(0.0, 0.5, 10, 1).with_tau(0.0).validate().is_err());
        assert!(ExperimentConfig { delta_phi: -0.1, ..cfg(0.0, 0.5, 10, 1) }.validate().is_err());
        assert!(cfg(0.0, 0.5, 10, 1).validate().is_ok());
    }

    #[test]
    fn rabi_limit_is_exact_with_zero_spread() {
        let curve = run_ensemble(&cfg(1.0, 1.0, 1000, 5)).unwrap();
        for k in 0..7 {
            let expect = ((k + 1) as f64 * FOUR_DEG).cos().powi(2);
            assert_abs_diff_eq!(curve.mean[k], expect, epsilon = 1e-12);
            assert_eq!(curve.std[k], 0.0);
        }
    }

    #[test]
    fn projective_limit_is_exact_with_zero_spread() {
        for c in [-0.6, 0.0, 0.4] {
            let curve = run_ensemble(&cfg(c, 0.0, 500, 11)).unwrap();
            for k in 0..7 {
                assert_abs_diff_eq!(curve.mean[k], FOUR_DEG.cos().powi(2 * (k as i32 + 1)), epsilon = 1e-12);
                assert_eq!(curve.std[k], 0.0);
            }
        }
    }

    #[test]
    fn white_noise_unmeasured_matches_iid_average() {
        let curve = run_ensemble(&cfg(0.0, 1.0, 100_000, 2024)).unwrap();
        let (_, mean, std) = curve.last().unwrap();
        let expect = 0.5 * (1.0 + (2.0 * FOUR_DEG).cos().powi(7));
        assert_abs_diff_eq!(expect, 0.9669167267324468, epsilon = 1e-13);
        assert!((mean - expect).abs() < 3.0 * std / (1e5f64).sqrt(), "{mean} vs {expect}");
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let config = cfg(0.4, 0.5, 5000, 99);
        let one = run_ensemble_with_workers(&config, 1).unwrap();
        for w in [2, 8] {
            let other = run_ensemble_with_workers(&config, w).unwrap();
            assert_eq!(one, other);
        }
    }

    #[test]
    fn realization_reproducible_in_isolation() {
        let config = cfg(0.4, 0.5, 3, 77).with_blocks(5);
        let mut a = [0.0; 5];
        let mut b = [0.0; 5];
        simulate_realization(&config, 2, &mut a);
        simulate_realization(&config, 2, &mut b);
        assert_eq!(a, b);
        let single = run_ensemble(&config.with_realizations(1)).unwrap();
        let mut first = [0.0; 5];
        simulate_realization(&config, 0, &mut first);
        assert_eq!(single.mean, first.to_vec());
        assert!(single.std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn exact_average_examples() {
        for c in [-0.6, 0.0, 0.4, 1.0] {
            for t in [0.0, 0.5, 1.0] {
                let one = exact_average(&cfg(c, t, 1, 0).with_blocks(1)).unwrap();
                assert_abs_diff_eq!(one.mean[0], FOUR_DEG.cos().powi(2), epsilon = 1e-15);
            }
        }
        let iid = exact_average(&cfg(0.0, 1.0, 1, 0)).unwrap();
        assert_abs_diff_eq!(iid.mean[6], 0.9669167267324468, epsilon = 1e-14);
        for t in [0.0, 0.3, 0.5, 0.9, 1.0] {
            let curve = exact_average(&cfg(1.0, t, 1, 0).with_blocks(12)).unwrap();
            for k in 0..12 {
                let expect = crate::analytic::nonrandom_survival(k + 1, FOUR_DEG, th(t));
                assert_abs_diff_eq!(curve.mean[k], expect, epsilon = 1e-13);
            }
        }
        let frozen = [0.99513403, 0.99029767, 0.98548627, 0.98069863, 0.97593433, 0.9711932, 0.96647511];
        let curve = exact_average(&cfg(0.0, 0.5, 1, 0)).unwrap();
        for (a, b) in curve.mean.iter().zip(frozen) {
            assert_abs_diff_eq!(*a, b, epsilon = 5e-9);
        }
        assert!(matches!(exact_average(&cfg(0.0, 0.5, 1, 0).with_blocks(21)), Err(Error::Resource(_))));
    }

    #[test]
    fn exact_values_at_final_block() {
        let table = [
            (0.4, 0.0, 0.96643146),
            (0.4, 0.25, 0.96027315),
            (0.4, 0.5, 0.95298872),
            (0.4, 0.75, 0.94437607),
            (0.4, 1.0, 0.93458873),
            (-0.6, 0.25, 0.97401602),
            (-0.6, 0.5, 0.98010918),
            (-0.6, 0.75, 0.98510210),
            (-0.6, 1.0, 0.98924468),
        ];
        for (c, t, v) in table {
            assert_abs_diff_eq!(exact_average(&cfg(c, t, 1, 0)).unwrap().mean[6], v, epsilon = 5e-9);
        }
    }

    #[test]
    fn monte_carlo_converges_to_enumeration() {
        for (c, t) in [(0.4, 1.0), (-0.6, 0.5), (0.0, 0.25), (0.8, 0.75)] {
            let config = cfg(c, t, 100_000, 31);
            let mc = run_ensemble(&config).unwrap();
            let exact = exact_average(&config).unwrap();
            for k in 0..7 {
                let tol = 4.0 * mc.sem(k) + 1e-12;
                assert!((mc.mean[k] - exact.mean[k]).abs() <= tol, "C={c} theta={t} k={k}");
            }
        }
    }

    #[test]
    fn covariance_diagonal_is_variance() {
        let curve = run_ensemble(&cfg(0.2, 0.6, 2000, 4)).unwrap();
        let cov = curve.covariance.as_ref().unwrap();
        for k in 0..7 {
            assert_abs_diff_eq!(cov[k * 7 + k].sqrt(), curve.std[k], epsilon = 1e-15);
            for j in 0..7 {
                assert_eq!(cov[k * 7 + j], cov[j * 7 + k]);
            }
        }
    }

    #[test]
    fn analytic_agreement_inside_validity() {
        // The small-angle formula carries a finite-N transient of order
        // Δφ²·C/(1-C)²; for C = 0.4 at strong θ it exceeds the 5e-3 allowance.
        for c in [-0.6, 0.0, 0.4] {
            for t in [0.25, 0.5, 0.75, 1.0] {
                assert!(validity_check(FOUR_DEG, corr(c), th(t), DEFAULT_VALIDITY_EPSILON).valid);
                let exact = exact_average(&cfg(c, t, 1, 0)).unwrap();
                let rates = RateSet::from_parameters(FOUR_DEG, 1.0, corr(c), th(t), AbsorptionConvention::PerBlock).unwrap();
                let worst = exact
                    .times
                    .iter()
                    .zip(&exact.mean)
                    .map(|(&tk, &m)| (m - averaged_survival(tk, &rates)).abs())
                    .fold(0.0, f64::max);
                if c == 0.4 && t >= 0.75 {
                    assert!(worst > 5e-3 && worst < 1e-2, "C={c} theta={t}: {worst}");
                } else {
                    assert!(worst <= 5e-3, "C={c} theta={t}: {worst}");
                }
            }
        }
    }

    #[test]
    fn sweep_orders_and_seeds() {
        let base = cfg(0.4, 1.0, 2000, 8);
        let pts = theta_sweep(&base, &[th(1.0), th(0.0), th(0.5)]).unwrap();
        let thetas: Vec<f64> = pts.iter().map(|p| p.theta).collect();
        assert_eq!(thetas, vec![0.0, 0.5, 1.0]);
        let direct = run_ensemble(&base.with_seed(sweep_seed(8, th(1.0)))).unwrap();
        assert_eq!(pts[2].mean, direct.mean[6]);
        assert!(theta_sweep(&base, &[]).is_err());
    }

    #[test]
    fn sweep_orderings() {
        let at = |c: f64| theta_sweep(&cfg(c, 0.0, 100_000, 3), &[th(0.0), th(1.0)]).unwrap();
        let combined = |p: &[SweepPoint]| 3.0 * p[0].sem().hypot(p[1].sem());
        let qze = at(0.4);
        assert!(qze[1].mean + combined(&qze) < qze[0].mean);
        let aze = at(-0.6);
        assert!(aze[1].mean - combined(&aze) > aze[0].mean);
    }

    #[test]
    fn binomial_layer() {
        let config = ExperimentConfig {
            shots_per_sequence: Some(50),
            ..cfg(0.0, 0.5, 2000, 6)
        };
        let curve = run_ensemble(&config).unwrap();
        assert!(curve.mean.iter().all(|m| (0.0..=1.0).contains(m)));
        let exact = exact_average(&config).unwrap();
        for k in 0..7 {
            assert!((curve.mean[k] - exact.mean[k]).abs() < 4.0 * curve.sem(k) + 1e-12);
        }
        assert!(ExperimentConfig { shots_per_sequence: Some(0), ..config }.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chain_recursion_equals_enumeration(c in -1.0f64..=1.0, t in 0.0f64..=1.0, d in 0.01f64..0.8, n in 1usize..10) {
            let config = ExperimentConfig::new(d, th(t), corr(c), 0).with_blocks(n);
            let exact = exact_average(&config).unwrap();
            let fast = chain_average(d, corr(c), th(t), n);
            for (a, b) in exact.mean.iter().zip(&fast) {
                prop_assert!((a - b).abs() < 1e-13, "{a} vs {b}");
            }
        }

        #[test]
        fn curve_is_bounded(c in -1.0f64..=1.0, t in 0.0f64..=1.0, seed in any::<u64>()) {
            let curve = run_ensemble(&cfg(c, t, 50, seed)).unwrap();
            prop_assert!(curve.mean.iter().all(|m| (0.0..=1.0).contains(m)));
            prop_assert!(curve.std.iter().all(|s| *s >= 0.0));
            prop_assert_eq!(curve.mean.len(), 7);
        }
    }
}
