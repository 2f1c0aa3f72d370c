//! The classical scheme over a noiseless feedback link: the estimation
//! error variance shrinks by `1 + snr` every round.

use skmod::montecarlo::{variance_profile, RngSpec, Scheme, VarianceProfile};
use skmod::schemes::SystemConfig;

pub fn run_example() -> skmod::Result<VarianceProfile> {
    let cfg = SystemConfig::from_snr_db(10.0, f64::INFINITY, 8, 1, 1e-3);
    let snr = cfg.snr();
    let profile = variance_profile(Scheme::Sk, &cfg, 100_000, RngSpec::new(1), 4)?;
    println!("round  var(eps)       1/(snr(1+snr)^(n-1))  z");
    for r in &profile.rounds {
        let law = 1.0 / (snr * (1.0 + snr).powi(r.round as i32 - 1));
        println!("{:>5}  {:.6e}   {law:.6e}          {:.2}", r.round, r.variance, r.z_score());
    }
    Ok(profile)
}

#[allow(dead_code)]
fn main() -> skmod::Result<()> {
    run_example().map(|_| ())
}
