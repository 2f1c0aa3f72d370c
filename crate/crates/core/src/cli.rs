//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 when
//! the target is infeasible or the feedback link is below the error floor,
//! 3 when `verify-coupling` finds a violation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{gap_curve_with, theorem1_gap, GapCurve, SearchPolicy};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate, variance_profile, verify_coupling, RngSpec, Scheme};
use crate::numerics::from_db;
use crate::schemes::{Feedback, SystemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Column order of `gap-curve --format csv`.
pub const GAP_CSV_HEADER: [&str; 5] = ["dsnr_db", "n", "snr_db", "gap_db", "feasible"];

#[derive(Debug, Parser)]
#[command(name = "skmod", version, about = "Modulo-feedback interactive coding: capacity gaps and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity gap against the number of rounds, one curve per feedback SNR excess.
    GapCurve(GapCurveArgs),
    /// Terms of the closed-form capacity-gap bound.
    Theorem(TheoremArgs),
    /// Monte Carlo error, aliasing and power statistics.
    Simulate(SimulateArgs),
    /// Check that the modulo and modulo-free systems agree until aliasing.
    VerifyCoupling(CouplingArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PolicyArg {
    /// Rate equation with the aliasing budget spread over feedback rounds.
    Figure,
    /// Exact error-budget inversion with p_m = pe / (2N).
    Theorem,
}

impl PolicyArg {
    fn policy(self) -> SearchPolicy {
        match self {
            PolicyArg::Figure => SearchPolicy::FIGURE,
            PolicyArg::Theorem => SearchPolicy::THEOREM,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct GapCurveArgs {
    /// Bits per forward channel use.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long, default_value_t = 1e-6)]
    pe: f64,
    /// Feedback SNR excess in dB; repeat for several curves, `inf` for noiseless feedback.
    #[arg(long = "dsnr-db", num_args = 1, default_value = "20", allow_negative_numbers = true)]
    dsnr_db: Vec<f64>,
    #[arg(long, default_value_t = 36)]
    n_max: u32,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_enum, default_value_t = PolicyArg::Figure)]
    policy: PolicyArg,
    /// Write to this file instead of stdout
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct TheoremArgs {
    #[arg(long, default_value_t = 1e-6)]
    pe: f64,
    #[arg(long, default_value_t = 10)]
    rounds: u32,
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long = "dsnr-db", default_value_t = 20.0, allow_negative_numbers = true)]
    dsnr_db: f64,
    /// Write to this file instead of stdout
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct LinkArgs {
    #[arg(long = "snr-db", default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Defaults to 10 dB for the feedback schemes and `inf` otherwise.
    #[arg(long = "dsnr-db", allow_negative_numbers = true)]
    dsnr_db: Option<f64>,
    #[arg(long, default_value_t = 1)]
    rate: u32,
    #[arg(long, default_value_t = 4)]
    rounds: u32,
    /// Target error probability; sets the default aliasing budget pe / (2N).
    #[arg(long, default_value_t = 1e-2)]
    pe: f64,
    /// Per-round aliasing budget.
    #[arg(long)]
    pm: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// One of uncoded, sk, proposed, coupled
    #[arg(long, value_parser = parse_scheme)]
    scheme: Scheme,
    #[command(flatten)]
    #[serde(flatten)]
    link: LinkArgs,
    /// Also report the per-round variance of the estimation error.
    #[arg(long)]
    variance_profile: bool,
    /// Write to this file instead of stdout
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CouplingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    link: LinkArgs,
    /// Write to this file instead of stdout
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl LinkArgs {
    fn config(&self, scheme: Scheme) -> SystemConfig {
        let dsnr_db = self.dsnr_db.unwrap_or(match scheme {
            Scheme::Proposed | Scheme::Coupled => 10.0,
            Scheme::Uncoded | Scheme::Sk => f64::INFINITY,
        });
        let cfg = SystemConfig::from_snr_db(self.snr_db, dsnr_db, self.rounds, self.rate, self.pe);
        match self.pm {
            Some(p) => cfg.with_aliasing_budget(p),
            None => cfg,
        }
    }
}

/// Provenance block embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str, params: &impl Serialize, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_infeasible() {
        EXIT_INFEASIBLE
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (program name first) and runs the command, writing
/// results to `out` (or the `--out` file) and diagnostics to `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::GapCurve(a) => {
            let text = gap_curve_output(&a)?;
            emit(out, a.out.as_ref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Theorem(a) => {
            let terms = theorem1_gap(a.pe, a.rounds, from_db(a.snr_db), Feedback::from_dsnr_db(a.dsnr_db))?;
            let doc = json!({ "manifest": RunManifest::new("theorem", &a, None), "result": terms });
            emit(out, a.out.as_ref(), &to_json(&doc))?;
            Ok(EXIT_OK)
        }
        Command::Simulate(a) => {
            let cfg = a.link.config(a.scheme);
            let rng = RngSpec::new(a.link.seed);
            let result = estimate(a.scheme, &cfg, a.link.trials, rng, a.link.workers)?;
            let mut doc = json!({
                "manifest": RunManifest::new("simulate", &a, Some(a.link.seed)),
                "result": result,
            });
            if a.variance_profile {
                let vp = variance_profile(a.scheme, &cfg, a.link.trials, rng, a.link.workers)?;
                doc["variance_profile"] = serde_json::to_value(vp).map_err(json_err)?;
            }
            emit(out, a.out.as_ref(), &to_json(&doc))?;
            Ok(EXIT_OK)
        }
        Command::VerifyCoupling(a) => {
            let cfg = a.link.config(Scheme::Proposed);
            let report = verify_coupling(&cfg, a.link.trials, RngSpec::new(a.link.seed), a.link.workers)?;
            let code = if report.violations == 0 { EXIT_OK } else { EXIT_VIOLATION };
            let doc = json!({
                "manifest": RunManifest::new("verify-coupling", &a, Some(a.link.seed)),
                "result": report,
            });
            emit(out, a.out.as_ref(), &to_json(&doc))?;
            Ok(code)
        }
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::usage(format!("cannot serialize output: {e}"))
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::usage(format!("cannot write output: {e}"));
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(io)?);
            f.write_all(text.as_bytes()).map_err(io)?;
            f.flush().map_err(io)
        }
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn format_dsnr(dsnr_db: f64) -> String {
    if dsnr_db.is_infinite() && dsnr_db > 0.0 {
        "inf".to_string()
    } else {
        format!("{dsnr_db}")
    }
}

fn gap_curve_output(a: &GapCurveArgs) -> Result<String> {
    let curves = a
        .dsnr_db
        .iter()
        .map(|&db| Ok((db, gap_curve_with(a.rate, a.pe, Feedback::from_dsnr_db(db), a.n_max, a.policy.policy())?)))
        .collect::<Result<Vec<(f64, GapCurve)>>>()?;
    let manifest = RunManifest::new("gap-curve", a, None);
    match a.format {
        Format::Json => {
            let curves: Vec<Value> = curves
                .iter()
                .map(|(db, c)| {
                    let points: Vec<Value> = (1..=a.n_max)
                        .map(|n| match c.point(n) {
                            Some(p) => json!({"n": n, "snr_db": p.snr_db, "gap_db": p.gap_db, "feasible": true}),
                            None => json!({"n": n, "snr_db": null, "gap_db": null, "feasible": false}),
                        })
                        .collect();
                    json!({
                        "dsnr_db": if db.is_finite() { json!(db) } else { Value::Null },
                        "n_opt": c.n_opt,
                        "points": points,
                    })
                })
                .collect();
            Ok(to_json(&json!({ "manifest": manifest, "curves": curves })))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::usage(format!("cannot write CSV: {e}"));
            w.write_record(GAP_CSV_HEADER).map_err(csv_err)?;
            for (db, c) in &curves {
                let dsnr = format_dsnr(*db);
                for n in 1..=a.n_max {
                    let row = match c.point(n) {
                        Some(p) => [dsnr.clone(), n.to_string(), format!("{:.6}", p.snr_db), format!("{:.6}", p.gap_db), "true".into()],
                        None => [dsnr.clone(), n.to_string(), String::new(), String::new(), "false".into()],
                    };
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
            let mut text = String::from_utf8(w.into_inner().map_err(|e| Error::usage(e.to_string()))?)
                .expect("CSV output is UTF-8");
            for (db, c) in &curves {
                let n_opt = c.n_opt.map_or_else(|| "none".to_string(), |n| n.to_string());
                text.push_str(&format!("# n_opt dsnr_db={} n_opt={n_opt}\n", format_dsnr(*db)));
            }
            let m = serde_json::to_string(&manifest).map_err(json_err)?;
            text.push_str(&format!("# manifest {m}\n"));
            Ok(text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("skmod").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn single_round_csv() {
        let (code, out, _) = run_str(&["gap-curve", "--rate", "1", "--pe", "1e-6", "--n-max", "1"]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("dsnr_db,n,snr_db,gap_db,feasible"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1], "1");
        assert!((row[3].parse::<f64>().unwrap() - 9.017874).abs() < 1e-3);
        assert!(out.contains("# n_opt dsnr_db=20 n_opt=1"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["simulate", "--scheme", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["verify-coupling", "--trials", "0"]).0, EXIT_USAGE);
        let (code, _, err) = run_str(&["theorem", "--snr-db", "0", "--dsnr-db", "3", "--rounds", "10"]);
        assert_eq!(code, EXIT_INFEASIBLE);
        assert!(err.contains("error floor"));
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
        assert_eq!(run_str(&["--version"]).0, EXIT_OK);
    }
}
