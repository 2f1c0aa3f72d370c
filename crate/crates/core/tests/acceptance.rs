//! Acceptance runner. Prints one PASS/FAIL line per criterion followed by
//! the measurements behind it.
//!
//! The process exits with status 0 after reporting, so the remaining test
//! targets still run under `cargo test`. Set `SKMOD_ACCEPTANCE_STRICT=1`
//! to turn any FAIL into a nonzero exit status.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skmod::analysis::{gap_curve, high_snr_gap, pe_budget, required_snr, snr_after_n, theorem1_gap, SearchPolicy};
use skmod::montecarlo::{estimate, variance_profile, RngSpec, Scheme, SimResult};
use skmod::numerics::from_db;
use skmod::pam::gamma0;
use skmod::schemes::{derive_params, Feedback, SystemConfig};

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, summary: String::new(), details: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn info(&mut self, line: String) {
        self.details.push(format!("info {line}"));
    }

    fn failed(err: impl std::fmt::Display) -> Self {
        Outcome { pass: false, summary: format!("error: {err}"), details: Vec::new() }
    }
}

fn c1() -> Outcome {
    let mut o = Outcome::new();
    let g = gamma0(1e-6).unwrap();
    o.check((g - 9.01787449938529).abs() <= 1e-6, format!("gamma0(1e-6) = {g:.14} dB"));
    o.summary = format!("gamma0(1e-6) = {g:.12} dB");
    o
}

// Round counts shown on the published gap figures.
const FIGURE_N_MAX: u32 = 36;

fn c2() -> Outcome {
    let mut o = Outcome::new();
    let pe = 1e-6;
    let noisy = [(4.0, 20.0, 19, 0.8545), (4.0, 10.0, 11, 3.4961), (1.0, 20.0, 22, 1.0889), (1.0, 10.0, 12, 4.2383)];
    let mut worst: f64 = 0.0;
    for (rate, dsnr_db, n, want) in noisy {
        let curve = match gap_curve(rate, pe, Feedback::from_dsnr_db(dsnr_db), FIGURE_N_MAX) {
            Ok(c) => c,
            Err(e) => return Outcome::failed(e),
        };
        let got = curve.point(n).map_or(f64::NAN, |p| p.gap_db);
        worst = worst.max((got - want).abs());
        o.check(
            (got - want).abs() <= 0.05,
            format!("R={rate} dsnr={dsnr_db} dB: gap({n}) = {got:.4} dB, figure {want:.4} dB, diff {:+.4}", got - want),
        );
        let n_opt = curve.n_opt.unwrap_or(0);
        o.check(n_opt.abs_diff(n) <= 1, format!("R={rate} dsnr={dsnr_db} dB: n_opt = {n_opt}, figure {n}"));
    }
    let dashed = [
        (1.0, [(2, 5.107421875), (10, 1.2158203125), (20, 0.625)]),
        (4.0, [(2, 4.228515625), (10, 0.849609375), (20, 0.4248046875)]),
    ];
    for (rate, pts) in dashed {
        let curve = match gap_curve(rate, pe, Feedback::Noiseless, FIGURE_N_MAX) {
            Ok(c) => c,
            Err(e) => return Outcome::failed(e),
        };
        for (n, want) in pts {
            let got = curve.point(n).map_or(f64::NAN, |p| p.gap_db);
            worst = worst.max((got - want).abs());
            o.check(
                (got - want).abs() <= 0.05,
                format!("R={rate} noiseless: gap({n}) = {got:.4} dB, figure {want:.4} dB, diff {:+.4}", got - want),
            );
        }
    }
    let misses = o.details.iter().filter(|l| l.starts_with("MISS")).count();
    o.summary = format!("{misses} of {} checks outside tolerance, worst diff {worst:.4} dB", o.details.len());
    o
}

fn c3() -> Outcome {
    let mut o = Outcome::new();
    let (pe, snr) = (1e-6, from_db(60.0));
    let mut worst: f64 = 0.0;
    for dsnr_db in [10.0, 20.0, 30.0] {
        let fb = Feedback::from_dsnr_db(dsnr_db);
        for n in [5, 10, 20] {
            let (full, approx) = match (theorem1_gap(pe, n, snr, fb), high_snr_gap(pe, n, fb)) {
                (Ok(t), Ok(a)) => (t.gap_db, a),
                (Err(e), _) | (_, Err(e)) => return Outcome::failed(e),
            };
            worst = worst.max((full - approx).abs());
            o.check(
                (full - approx).abs() <= 0.01,
                format!("dsnr={dsnr_db} dB N={n}: bound {full:.5} dB, high-SNR form {approx:.5} dB"),
            );
        }
    }
    o.summary = format!("worst difference {worst:.2e} dB over 9 configurations");
    o
}

fn c4() -> Outcome {
    let mut o = Outcome::new();
    let cfg = SystemConfig::from_snr_db(10.0, f64::INFINITY, 8, 1, 1e-2);
    let prof = match variance_profile(Scheme::Sk, &cfg, 100_000, RngSpec::new(1), 4) {
        Ok(p) => p,
        Err(e) => return Outcome::failed(e),
    };
    let snr = from_db(10.0);
    let mut worst: f64 = 0.0;
    for r in &prof.rounds {
        let law = 1.0 / (snr * (1.0 + snr).powi(r.round as i32 - 1));
        let z = (r.variance - law).abs() / r.se;
        worst = worst.max(z);
        o.check(z <= 3.0, format!("round {}: var {:.5e}, law {law:.5e}, z = {z:.2}", r.round, r.variance));
    }
    o.summary = format!("8 rounds, 1e5 trials, max z = {worst:.2}");
    o
}

fn c5() -> Outcome {
    let mut o = Outcome::new();
    let (n, p_m) = (6, 1e-2);
    let cfg = SystemConfig::from_snr_db(10.0, 10.0, n, 1, 1e-2).with_aliasing_budget(p_m);
    let result = derive_params(&cfg).and_then(|p| {
        let closed = 1.0 / snr_after_n(cfg.snr(), cfg.feedback(), p.lambda, n)?;
        let prof = variance_profile(Scheme::Coupled, &cfg, 100_000, RngSpec::new(5), 4)?;
        Ok((closed, prof))
    });
    let (closed, prof) = match result {
        Ok(v) => v,
        Err(e) => return Outcome::failed(e),
    };
    let last = prof.rounds.last().unwrap();
    let z = (last.variance - closed).abs() / last.se;
    o.check(z <= 3.0, format!("Var(eps_{n}) = {:.5e} +- {:.1e}, closed form {closed:.5e}, z = {z:.2}", last.variance, last.se));
    for r in &prof.rounds[..prof.rounds.len() - 1] {
        o.info(format!("round {}: var {:.5e}, recursion {:.5e}, z = {:.2}", r.round, r.variance, r.predicted, r.z_score()));
    }
    o.summary = format!("Var(eps_{n}) z = {z:.2}");
    o
}

fn c6() -> Outcome {
    let mut o = Outcome::new();
    let cfg = SystemConfig::from_snr_db(10.0, 10.0, 6, 1, 1e-2).with_aliasing_budget(0.2);
    let r = match skmod::montecarlo::verify_coupling(&cfg, 10_000, RngSpec::new(17), 4) {
        Ok(r) => r,
        Err(e) => return Outcome::failed(e),
    };
    let aliased = r.trials - r.trials_without_aliasing;
    o.check(r.violations == 0, format!("{} violations in {} trials", r.violations, r.trials));
    o.check(aliased > 0, format!("{aliased} trials aliased, histogram {:?}", r.first_aliasing_histogram));
    o.summary = format!("{} violations over 1e4 trials with p_m = 0.2 ({aliased} aliased)", r.violations);
    o
}

struct BudgetRun {
    n: u32,
    cfg: SystemConfig,
    budget: f64,
    by_workers: Vec<(usize, SimResult)>,
}

const C7_TRIALS: u64 = 1_000_000;
const C7_ROUNDS: [u32; 3] = [2, 4, 6];
const C7_RATE: u32 = 2;

fn budget_runs() -> skmod::Result<Vec<BudgetRun>> {
    let (pe, dsnr_db) = (1e-2, 10.0);
    let fb = Feedback::from_dsnr_db(dsnr_db);
    let mut runs = Vec::new();
    for n in C7_ROUNDS {
        let snr_db = required_snr(f64::from(C7_RATE), pe, n, fb, SearchPolicy::THEOREM)?;
        let cfg = SystemConfig::from_snr_db(snr_db, dsnr_db, n, C7_RATE, pe);
        let budget = pe_budget(from_db(snr_db), fb, n, f64::from(C7_RATE), cfg.p_m())?;
        let mut by_workers = Vec::new();
        for workers in [1, 4, 8] {
            by_workers.push((workers, estimate(Scheme::Proposed, &cfg, C7_TRIALS, RngSpec::new(2024), workers)?));
        }
        runs.push(BudgetRun { n, cfg, budget, by_workers });
    }
    Ok(runs)
}

fn c7(runs: &[BudgetRun]) -> Outcome {
    let mut o = Outcome::new();
    for run in runs {
        let r = &run.by_workers[0].1;
        let (n, p_m) = (run.n, run.cfg.p_m());
        o.check(
            r.ser.rate <= run.budget + 3.0 * r.ser.se(),
            format!(
                "N={n} snr={:.3} dB: SER {:.4e} +- {:.1e} ({} errors), budget {:.4e}",
                10.0 * run.cfg.snr().log10(),
                r.ser.rate,
                r.ser.se(),
                r.symbol_errors,
                run.budget
            ),
        );
        for k in 0..r.first_aliasing_by_round.len() {
            let a = r.first_aliasing_rate(k);
            let z = (a.rate - p_m) / a.se();
            o.check(
                z.abs() <= 3.0,
                format!("N={n} round {}: first-aliasing rate {:.4e}, p_m {p_m:.4e}, z = {z:+.2}", k + 1, a.rate),
            );
            o.info(format!("N={n} round {}: any-aliasing rate {:.4e}", k + 1, r.aliasing_rate(k).rate));
        }
    }
    o.summary = format!("R={C7_RATE}, 1e6 trials per N in {C7_ROUNDS:?}");
    o
}

fn c8(runs: &[BudgetRun]) -> Outcome {
    let mut o = Outcome::new();
    let mut worst_fwd: f64 = 0.0;
    for run in runs {
        let r = &run.by_workers[0].1;
        let (p, p_fb) = (run.cfg.power_fwd, run.cfg.power_fb);
        for (k, (&m, &se)) in r.mean_power_fb.iter().zip(&r.mean_power_fb_se).enumerate() {
            o.check(
                (m - p_fb).abs() <= 3.0 * se,
                format!("N={} feedback round {}: {m:.5} +- {se:.1e}, target {p_fb:.5}", run.n, k + 1),
            );
        }
        for (k, (&m, &se)) in r.mean_power_fwd.iter().zip(&r.mean_power_fwd_se).enumerate() {
            let rel = m / p - 1.0;
            worst_fwd = worst_fwd.max(rel.abs());
            o.check(
                (m - p).abs() <= 1e-3 * p + 3.0 * se,
                format!("N={} forward round {}: {m:.5} +- {se:.1e} ({:+.3}% of P)", run.n, k + 1, 100.0 * rel),
            );
            if m > p * (1.0 + 1e-3) + 3.0 * se {
                o.info(format!("N={} forward round {} exceeds P", run.n, k + 1));
            }
        }
    }
    o.summary = format!("largest forward deviation {:.3}% of P", 100.0 * worst_fwd);
    o
}

fn c9(runs: &[BudgetRun]) -> Outcome {
    let mut o = Outcome::new();
    for run in runs {
        let json: Vec<(usize, String)> =
            run.by_workers.iter().map(|(w, r)| (*w, serde_json::to_string(r).unwrap())).collect();
        for (w, s) in &json[1..] {
            o.check(
                *s == json[0].1,
                format!("N={}: {w} workers vs 1 worker ({} bytes)", run.n, s.len()),
            );
        }
    }
    o.summary = "SimResult JSON compared across 1, 4 and 8 workers".into();
    o
}

fn c10() -> Outcome {
    const CASES: usize = 100_000;
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut range, mut identity, mut inside, mut aliased) = (0, 0, 0, 0);
    let mut failures = Vec::new();
    for _ in 0..CASES {
        let d = 10f64.powf(rng.random_range(-3.0..3.0));
        let x = common::wide_value(&mut rng);
        let u = rng.random_range(-0.5..0.5) * d;
        let (d1, d2) = (rng.random_range(-d..d), rng.random_range(-d..d));
        match common::check_range(x, d) {
            Ok(()) => range += 1,
            Err(e) => failures.push(e),
        }
        match common::check_identity(u, d) {
            Ok(()) => identity += 1,
            Err(e) => failures.push(e),
        }
        match common::check_modrel(x, d1, d2, d) {
            Ok(common::Branch::Inside) => inside += 1,
            Ok(common::Branch::Aliased) => aliased += 1,
            Err(e) => failures.push(e),
        }
    }
    o.check(range == CASES, format!("range: {range}/{CASES}"));
    o.check(identity == CASES, format!("identity inside the interval: {identity}/{CASES}"));
    o.check(
        inside + aliased == CASES && inside > 0 && aliased > 0,
        format!("nested relation: {inside} inside, {aliased} aliased by a multiple of d"),
    );
    for (x, d) in [(0.0, 1.0), (0.71, 12f64.sqrt()), (-4321.5, 0.05)] {
        let (stat, crit) = common::dither_ks(x, d, CASES, &mut rng);
        o.check(stat < crit, format!("dither uniformity x={x} d={d}: KS {stat:.5}, critical {crit:.5}"));
        let (mean, se) = common::dither_power(x, d, CASES, &mut rng);
        let target = d * d / 12.0;
        o.check(
            (mean - target).abs() <= 3.0 * se,
            format!("dither power x={x} d={d}: {mean:.6} +- {se:.1e}, d^2/12 = {target:.6}"),
        );
    }
    for f in failures.iter().take(5) {
        o.details.push(format!("MISS {f}"));
    }
    o.summary = format!("{} failures in {CASES} cases per property", failures.len());
    o
}

fn report(id: u32, start: Instant, o: &Outcome) -> bool {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {id}: {verdict} - {} [{:.1} s]", o.summary, start.elapsed().as_secs_f64());
    for line in &o.details {
        println!("    {line}");
    }
    o.pass
}

fn main() {
    let mut results = Vec::new();
    let simple: [(u32, fn() -> Outcome); 6] = [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6)];
    for (id, f) in simple {
        let t = Instant::now();
        results.push((id, report(id, t, &f())));
    }

    let t = Instant::now();
    match budget_runs() {
        Ok(runs) => {
            results.push((7, report(7, t, &c7(&runs))));
            results.push((8, report(8, t, &c8(&runs))));
            results.push((9, report(9, t, &c9(&runs))));
        }
        Err(e) => {
            for id in 7..=9 {
                results.push((id, report(id, t, &Outcome::failed(&e))));
            }
        }
    }

    let t = Instant::now();
    results.push((10, report(10, t, &c10())));

    let failed: Vec<u32> = results.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    println!(
        "acceptance: {} of {} criteria PASS{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!(", FAIL: {failed:?}") }
    );
    let strict = std::env::var("SKMOD_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
