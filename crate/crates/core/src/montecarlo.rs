//! Seeded Monte Carlo drivers.
//!
//! Every trial owns a ChaCha stream selected by its index, and draws the
//! same layout whatever the scheme: the message, `N` forward noise samples,
//! `N − 1` feedback noise samples and `N − 1` dither values. Trials are
//! grouped into fixed-size chunks, chunks run on a rayon pool, and chunk
//! tallies are merged in chunk order. Results therefore depend only on the
//! configuration, the trial count and the master seed, never on the
//! number of workers.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pam::Message;
use crate::schemes::{
    derive_params, run_trial_coupled, run_trial_proposed, run_trial_sk, run_trial_uncoded, DerivedParams,
    SystemConfig, TrialRecord,
};

const CHUNK: u64 = 4096;

/// Errors needed before a rate estimate takes part in a pass/fail check.
pub const MIN_ERRORS_FOR_COMPARISON: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Uncoded,
    Sk,
    Proposed,
    Coupled,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Uncoded, Scheme::Sk, Scheme::Proposed, Scheme::Coupled];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Uncoded => "uncoded",
            Scheme::Sk => "sk",
            Scheme::Proposed => "proposed",
            Scheme::Coupled => "coupled",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown scheme '{s}' (expected uncoded, sk, proposed or coupled)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        RngSpec { master_seed }
    }

    /// The stream owned by `trial`.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }
}

/// Random inputs of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialInputs {
    pub message: Message,
    pub noise_fwd: Vec<f64>,
    pub noise_fb: Vec<f64>,
    pub dither: Vec<f64>,
}

impl TrialInputs {
    fn with_rounds(n: usize) -> Self {
        TrialInputs {
            message: Message(0),
            noise_fwd: vec![0.0; n],
            noise_fb: vec![0.0; n - 1],
            dither: vec![0.0; n - 1],
        }
    }

    /// Draws trial `trial`'s inputs in the fixed layout.
    pub fn draw(cfg: &SystemConfig, scheme: Scheme, rng: &RngSpec, trial: u64) -> Self {
        let mut inputs = TrialInputs::with_rounds(cfg.rounds as usize);
        inputs.fill(cfg, scheme, rng, trial);
        inputs
    }

    fn fill(&mut self, cfg: &SystemConfig, scheme: Scheme, spec: &RngSpec, trial: u64) {
        let mut rng = spec.trial_rng(trial);
        let bits = match scheme {
            Scheme::Uncoded => u64::from(cfg.rate_bits),
            _ => cfg.total_bits(),
        };
        self.message = Message(rng.random_range(0..1u64 << bits));
        let sigma = cfg.noise_var_fwd.sqrt();
        for z in &mut self.noise_fwd {
            *z = sigma * rng.sample::<f64, _>(StandardNormal);
        }
        let sigma_fb = cfg.noise_var_fb.sqrt();
        for z in &mut self.noise_fb {
            *z = sigma_fb * rng.sample::<f64, _>(StandardNormal);
        }
        let half = 0.5 * (12.0 * cfg.power_fb).sqrt();
        for v in &mut self.dither {
            *v = rng.random_range(-half..half);
        }
    }
}

fn run_one(scheme: Scheme, cfg: &SystemConfig, params: &DerivedParams, x: &TrialInputs) -> Result<TrialRecord> {
    match scheme {
        Scheme::Uncoded => run_trial_uncoded(cfg, x.message, x.noise_fwd[0]),
        Scheme::Sk => run_trial_sk(cfg, params, x.message, &x.noise_fwd),
        Scheme::Proposed => run_trial_proposed(cfg, params, x.message, &x.noise_fwd, &x.noise_fb, &x.dither),
        Scheme::Coupled => run_trial_coupled(cfg, params, x.message, &x.noise_fwd, &x.noise_fb),
    }
}

fn check_run(trials: u64, workers: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::usage("at least one trial is required"));
    }
    if workers == 0 {
        return Err(Error::usage("at least one worker is required"));
    }
    Ok(())
}

/// Runs `per_chunk` over consecutive trial ranges on a pool of `workers`
/// threads and returns the chunk results in trial order.
fn chunked<T, F>(trials: u64, workers: usize, per_chunk: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
    let chunks = trials.div_ceil(CHUNK);
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| per_chunk(c * CHUNK..((c + 1) * CHUNK).min(trials)))
            .collect()
    })
}

/// Sum and sum of squares, for means with standard errors.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    s1: f64,
    s2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.s1 += x;
        self.s2 += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.s1 += o.s1;
        self.s2 += o.s2;
    }

    fn mean_se(&self, n: f64) -> (f64, f64) {
        let mean = self.s1 / n;
        let var = ((self.s2 - self.s1 * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// An empirical rate with its normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub count: u64,
    pub total: u64,
    pub rate: f64,
    pub ci95: f64,
}

impl Proportion {
    pub fn new(count: u64, total: u64) -> Self {
        let rate = count as f64 / total as f64;
        let se = (rate * (1.0 - rate) / total as f64).sqrt();
        Proportion { count, total, rate, ci95: 1.96 * se }
    }

    /// Binomial standard error `sqrt(p̂ (1 − p̂) / n)`.
    pub fn se(&self) -> f64 {
        self.ci95 / 1.96
    }

    /// Enough errors observed for the normal approximation to be trusted.
    pub fn comparable(&self) -> bool {
        self.count >= MIN_ERRORS_FOR_COMPARISON
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    trials: u64,
    symbol_errors: u64,
    bit_errors: u64,
    aliasing: Vec<u64>,
    first_aliasing: Vec<u64>,
    power_fwd: Vec<Moments>,
    power_fb: Vec<Moments>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            aliasing: vec![0; n - 1],
            first_aliasing: vec![0; n - 1],
            power_fwd: vec![Moments::default(); n],
            power_fb: vec![Moments::default(); n - 1],
            ..Tally::default()
        }
    }

    fn record(&mut self, r: &TrialRecord) {
        self.trials += 1;
        self.symbol_errors += u64::from(r.decode_error);
        self.bit_errors += u64::from(r.bit_errors);
        for (c, &a) in self.aliasing.iter_mut().zip(&r.aliasing) {
            *c += u64::from(a);
        }
        if let Some(k) = r.first_aliasing() {
            self.first_aliasing[k] += 1;
        }
        for (m, &p) in self.power_fwd.iter_mut().zip(&r.tx_power_fwd) {
            m.push(p);
        }
        for (m, &p) in self.power_fb.iter_mut().zip(&r.tx_power_fb) {
            m.push(p);
        }
    }

    fn merge(&mut self, o: &Tally) {
        self.trials += o.trials;
        self.symbol_errors += o.symbol_errors;
        self.bit_errors += o.bit_errors;
        add_counts(&mut self.aliasing, &o.aliasing);
        add_counts(&mut self.first_aliasing, &o.first_aliasing);
        for (a, b) in self.power_fwd.iter_mut().zip(&o.power_fwd) {
            a.merge(b);
        }
        for (a, b) in self.power_fb.iter_mut().zip(&o.power_fb) {
            a.merge(b);
        }
    }
}

fn add_counts(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Aggregated outcome of [`estimate`].
///
/// Round-indexed vectors are zero-based. Feedback-round vectors have
/// `N − 1` entries; the forward power vectors have `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scheme: Scheme,
    pub config: SystemConfig,
    pub seed: RngSpec,
    pub trials: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub ser: Proportion,
    /// Bit errors over `trials · bits per message`.
    pub ber: Proportion,
    /// Trials in which the feedback round aliased.
    pub aliasing_by_round: Vec<u64>,
    /// Trials whose first aliasing happened in the round. After one
    /// aliasing the modulo system usually keeps aliasing, so this is the
    /// count that estimates the per-round aliasing probability.
    pub first_aliasing_by_round: Vec<u64>,
    pub mean_power_fwd: Vec<f64>,
    pub mean_power_fwd_se: Vec<f64>,
    pub mean_power_fb: Vec<f64>,
    pub mean_power_fb_se: Vec<f64>,
}

impl SimResult {
    pub fn first_aliasing_rate(&self, round: usize) -> Proportion {
        Proportion::new(self.first_aliasing_by_round[round], self.trials)
    }

    pub fn aliasing_rate(&self, round: usize) -> Proportion {
        Proportion::new(self.aliasing_by_round[round], self.trials)
    }

    pub fn trials_with_aliasing(&self) -> u64 {
        self.first_aliasing_by_round.iter().sum()
    }
}

fn prepare(scheme: Scheme, cfg: &SystemConfig) -> Result<DerivedParams> {
    match scheme {
        // Parameters are only needed for the feedback schemes, but validate
        // the configuration the same way for all of them.
        Scheme::Uncoded => {
            cfg.validate()?;
            let mut lossless = cfg.clone();
            lossless.noise_var_fb = 0.0;
            derive_params(&lossless)
        }
        _ => derive_params(cfg),
    }
}

/// Monte Carlo estimate of error, aliasing and power statistics.
pub fn estimate(scheme: Scheme, cfg: &SystemConfig, trials: u64, rng: RngSpec, workers: usize) -> Result<SimResult> {
    check_run(trials, workers)?;
    let params = prepare(scheme, cfg)?;
    let n = cfg.rounds as usize;
    let tallies = chunked(trials, workers, |range| {
        let mut t = Tally::new(n);
        let mut x = TrialInputs::with_rounds(n);
        for trial in range {
            x.fill(cfg, scheme, &rng, trial);
            t.record(&run_one(scheme, cfg, &params, &x)?);
        }
        Ok(t)
    })?;
    let mut total = Tally::new(n);
    for t in &tallies {
        total.merge(t);
    }

    let bits = match scheme {
        Scheme::Uncoded => u64::from(cfg.rate_bits),
        _ => cfg.total_bits(),
    };
    let nt = trials as f64;
    let (mean_power_fwd, mean_power_fwd_se) = total.power_fwd.iter().map(|m| m.mean_se(nt)).unzip();
    let (mean_power_fb, mean_power_fb_se) = total.power_fb.iter().map(|m| m.mean_se(nt)).unzip();
    Ok(SimResult {
        scheme,
        config: cfg.clone(),
        seed: rng,
        trials,
        symbol_errors: total.symbol_errors,
        bit_errors: total.bit_errors,
        ser: Proportion::new(total.symbol_errors, trials),
        ber: Proportion::new(total.bit_errors, trials * bits),
        aliasing_by_round: total.aliasing,
        first_aliasing_by_round: total.first_aliasing,
        mean_power_fwd,
        mean_power_fwd_se,
        mean_power_fb,
        mean_power_fb_se,
    })
}

/// Sample variance of one round's estimation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundVariance {
    /// One-based round index.
    pub round: u32,
    pub variance: f64,
    pub se: f64,
    /// `σ_n²` predicted by the closed-form recursion.
    pub predicted: f64,
}

impl RoundVariance {
    /// `|variance − predicted|` in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.variance - self.predicted).abs() / self.se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub scheme: Scheme,
    pub trials: u64,
    pub seed: RngSpec,
    pub rounds: Vec<RoundVariance>,
}

#[derive(Debug, Clone, Copy, Default)]
struct RawMoments([f64; 4]);

impl RawMoments {
    fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.0[0] += x;
        self.0[1] += x2;
        self.0[2] += x2 * x;
        self.0[3] += x2 * x2;
    }

    /// Unbiased variance and its large-sample standard error
    /// `sqrt((m4 − σ⁴) / n)`.
    fn variance_se(&self, n: f64) -> (f64, f64) {
        let [e1, e2, e3, e4] = self.0.map(|s| s / n);
        let m2 = e2 - e1 * e1;
        let m4 = e4 - 4.0 * e1 * e3 + 6.0 * e1 * e1 * e2 - 3.0 * e1.powi(4);
        let var = m2 * n / (n - 1.0);
        (var, ((m4 - m2 * m2).max(0.0) / n).sqrt())
    }
}

/// Per-round sample variance of `ε_n` with standard errors.
pub fn variance_profile(
    scheme: Scheme,
    cfg: &SystemConfig,
    trials: u64,
    rng: RngSpec,
    workers: usize,
) -> Result<VarianceProfile> {
    check_run(trials, workers)?;
    if trials < 2 {
        return Err(Error::usage("a variance needs at least two trials"));
    }
    let params = prepare(scheme, cfg)?;
    let n = match scheme {
        Scheme::Uncoded => 1,
        _ => cfg.rounds as usize,
    };
    let chunks = chunked(trials, workers, |range| {
        let mut acc = vec![RawMoments::default(); n];
        let mut x = TrialInputs::with_rounds(cfg.rounds as usize);
        for trial in range {
            x.fill(cfg, scheme, &rng, trial);
            let r = run_one(scheme, cfg, &params, &x)?;
            for (m, &e) in acc.iter_mut().zip(&r.eps) {
                m.push(e);
            }
        }
        Ok(acc)
    })?;
    let mut total = vec![RawMoments::default(); n];
    for c in &chunks {
        for (a, b) in total.iter_mut().zip(c) {
            for k in 0..4 {
                a.0[k] += b.0[k];
            }
        }
    }
    let rounds = total
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (variance, se) = m.variance_se(trials as f64);
            RoundVariance { round: i as u32 + 1, variance, se, predicted: params.sigma_n2[i] }
        })
        .collect();
    Ok(VarianceProfile { scheme, trials, seed: rng, rounds })
}

/// First trial at which the two systems disagreed before aliasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingViolation {
    pub trial: u64,
    pub master_seed: u64,
    /// One-based round whose estimation error differed.
    pub round: u32,
    pub eps_proposed: f64,
    pub eps_coupled: f64,
}

/// Union-bound check: the proposed system's failure rate (any aliasing or
/// a decoding error) against the summed per-event rates of the coupled
/// system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionAudit {
    pub failure_rate: f64,
    pub failure_se: f64,
    pub coupled_event_sum: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub config: SystemConfig,
    pub seed: RngSpec,
    pub trials: u64,
    pub violations: u64,
    pub first_violation: Option<CouplingViolation>,
    /// Entry `k` counts trials whose first aliasing happened in feedback
    /// round `k + 1`.
    pub first_aliasing_histogram: Vec<u64>,
    pub trials_without_aliasing: u64,
    /// Per-round aliasing counts of the coupled system, then its decoding
    /// errors as the last entry.
    pub coupled_event_counts: Vec<u64>,
    pub union_audit: UnionAudit,
}

#[derive(Debug, Clone, Default)]
struct CouplingTally {
    violations: u64,
    first_violation: Option<CouplingViolation>,
    first_aliasing: Vec<u64>,
    coupled_events: Vec<u64>,
    proposed_failures: u64,
}

/// Runs both systems on shared inputs and checks that their estimation
/// errors agree bit for bit up to and including the first aliasing round.
pub fn verify_coupling(cfg: &SystemConfig, trials: u64, rng: RngSpec, workers: usize) -> Result<CouplingReport> {
    check_run(trials, workers)?;
    let params = derive_params(cfg)?;
    let n = cfg.rounds as usize;
    let chunks = chunked(trials, workers, |range| {
        let mut t = CouplingTally {
            first_aliasing: vec![0; n - 1],
            coupled_events: vec![0; n],
            ..CouplingTally::default()
        };
        let mut x = TrialInputs::with_rounds(n);
        for trial in range {
            x.fill(cfg, Scheme::Proposed, &rng, trial);
            let a = run_trial_proposed(cfg, &params, x.message, &x.noise_fwd, &x.noise_fb, &x.dither)?;
            let b = run_trial_coupled(cfg, &params, x.message, &x.noise_fwd, &x.noise_fb)?;
            let first = a.first_aliasing();
            let stop = first.map_or(n, |k| k + 1);
            let eps_mismatch = (0..stop).find(|&i| a.eps[i].to_bits() != b.eps[i].to_bits());
            let flag_mismatch = a.aliasing[..stop.min(n - 1)] != b.aliasing[..stop.min(n - 1)];
            let decode_mismatch = first.is_none() && a.w_decoded != b.w_decoded;
            if eps_mismatch.is_some() || flag_mismatch || decode_mismatch {
                t.violations += 1;
                if t.first_violation.is_none() {
                    let i = eps_mismatch.unwrap_or(stop - 1);
                    t.first_violation = Some(CouplingViolation {
                        trial,
                        master_seed: rng.master_seed,
                        round: i as u32 + 1,
                        eps_proposed: a.eps[i],
                        eps_coupled: b.eps[i],
                    });
                }
            }
            if let Some(k) = first {
                t.first_aliasing[k] += 1;
            }
            add_counts(&mut t.coupled_events[..n - 1], &b.aliasing.iter().map(|&f| u64::from(f)).collect::<Vec<_>>());
            t.coupled_events[n - 1] += u64::from(b.decode_error);
            t.proposed_failures += u64::from(first.is_some() || a.decode_error);
        }
        Ok(t)
    })?;

    let mut violations = 0;
    let mut first_violation = None;
    let mut first_aliasing = vec![0u64; n - 1];
    let mut coupled_events = vec![0u64; n];
    let mut failures = 0u64;
    for c in chunks {
        violations += c.violations;
        if first_violation.is_none() {
            first_violation = c.first_violation;
        }
        add_counts(&mut first_aliasing, &c.first_aliasing);
        add_counts(&mut coupled_events, &c.coupled_events);
        failures += c.proposed_failures;
    }
    let nt = trials as f64;
    let failure = Proportion::new(failures, trials);
    let coupled_event_sum = coupled_events.iter().sum::<u64>() as f64 / nt;
    let aliased: u64 = first_aliasing.iter().sum();
    Ok(CouplingReport {
        config: cfg.clone(),
        seed: rng,
        trials,
        violations,
        first_violation,
        trials_without_aliasing: trials - aliased,
        first_aliasing_histogram: first_aliasing,
        coupled_event_counts: coupled_events,
        union_audit: UnionAudit {
            failure_rate: failure.rate,
            failure_se: failure.se(),
            coupled_event_sum,
            holds: failure.rate <= coupled_event_sum + 3.0 * failure.se(),
        },
    })
}
