//! The modulo system and its modulo-free twin, driven by the same noise,
//! agree exactly until the first aliasing event.

use skmod::montecarlo::{verify_coupling, CouplingReport, RngSpec};
use skmod::schemes::SystemConfig;

pub fn run_example() -> skmod::Result<CouplingReport> {
    // A deliberately large aliasing budget so that aliasing is common.
    let cfg = SystemConfig::from_snr_db(10.0, 10.0, 6, 1, 1e-2).with_aliasing_budget(0.2);
    let r = verify_coupling(&cfg, 10_000, RngSpec::new(17), 4)?;
    println!("violations: {}", r.violations);
    println!("first aliasing by round: {:?}", r.first_aliasing_histogram);
    println!(
        "union bound: failure rate {:.4} <= coupled event sum {:.4}: {}",
        r.union_audit.failure_rate, r.union_audit.coupled_event_sum, r.union_audit.holds
    );
    Ok(r)
}

#[allow(dead_code)]
fn main() -> skmod::Result<()> {
    run_example().map(|_| ())
}
