//! Uncoded PAM: constellation geometry, Gray labels, and a Monte Carlo
//! symbol error rate against the analytic bound.

use skmod::montecarlo::{estimate, RngSpec, Scheme};
use skmod::numerics::to_db;
use skmod::pam::{binary_to_gray, gamma0_linear, pam_symbol_error_bound, PamConstellation};
use skmod::schemes::SystemConfig;

pub struct Summary {
    pub snr_db: f64,
    pub bound: f64,
    pub ser: f64,
    pub se: f64,
}

pub fn run_example() -> skmod::Result<Summary> {
    let c = PamConstellation::new(2)?;
    println!("4-PAM, eta = {:.9}", c.eta());
    for pos in 0..c.levels() {
        println!("  position {pos}: amplitude {:+.9}  label {:02b}", c.point(pos), binary_to_gray(pos));
    }

    // Pick the SNR at which the bound is 1e-2. For binary PAM the exact
    // error rate is half the bound, since only one neighbour exists.
    let target = 1e-2;
    let snr = 3.0 * gamma0_linear(target)?;
    let cfg = SystemConfig::from_snr_db(to_db(snr), f64::INFINITY, 1, 1, target);
    let r = estimate(Scheme::Uncoded, &cfg, 200_000, RngSpec::new(2024), 4)?;
    let bound = pam_symbol_error_bound(snr, 1.0)?;
    println!(
        "binary PAM at {:.3} dB: bound {bound:.5e}, exact {:.5e}, simulated {:.5e} ± {:.1e}",
        to_db(snr),
        bound / 2.0,
        r.ser.rate,
        r.ser.ci95
    );
    Ok(Summary { snr_db: to_db(snr), bound, ser: r.ser.rate, se: r.ser.se() })
}

#[allow(dead_code)]
fn main() -> skmod::Result<()> {
    run_example().map(|_| ())
}
