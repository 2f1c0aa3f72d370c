//! One execution of the modulo-feedback protocol, traced round by round.

use skmod::montecarlo::{RngSpec, Scheme, TrialInputs};
use skmod::schemes::{derive_params, run_trial_proposed, SystemConfig, TrialRecord};

pub fn run_example() -> skmod::Result<TrialRecord> {
    let cfg = SystemConfig::from_snr_db(10.0, 20.0, 6, 1, 1e-3);
    let p = derive_params(&cfg)?;
    println!("lambda = {:.6}, d = {:.6}, alpha = {:.6}", p.lambda, p.d, p.alpha);

    let x = TrialInputs::draw(&cfg, Scheme::Proposed, &RngSpec::new(7), 0);
    let r = run_trial_proposed(&cfg, &p, x.message, &x.noise_fwd, &x.noise_fb, &x.dither)?;
    println!("message {} ({} bits)", x.message.0, cfg.total_bits());
    for (i, eps) in r.eps.iter().enumerate() {
        print!("round {}: eps = {eps:+.3e}  X^2 = {:.3}", i + 1, r.tx_power_fwd[i]);
        if let (Some(g), Some(a)) = (p.gamma.get(i), r.aliasing.get(i)) {
            print!("  gamma = {g:.3e}  feedback X^2 = {:.3}  aliased = {a}", r.tx_power_fb[i]);
        }
        println!();
    }
    println!("decoded {} -> error = {}", r.w_decoded.0, r.decode_error);
    Ok(r)
}

#[allow(dead_code)]
fn main() -> skmod::Result<()> {
    run_example().map(|_| ())
}
