//! Half-bandwidth interaction against full-bandwidth one-way signaling.

use skmod::analysis::{gap_curve, tradeoff_crossover_db};
use skmod::pam::gamma0;
use skmod::schemes::Feedback;

pub struct Crossovers {
    pub gap_star_db: f64,
    pub versus_uncoded_db: f64,
    pub versus_fec_db: f64,
}

pub fn run_example() -> skmod::Result<Crossovers> {
    let pe = 1e-6;
    let curve = gap_curve(4.0, pe, Feedback::from_dsnr_db(30.0), 36)?;
    let gap_star_db = curve.min_gap_db().expect("curve has feasible points");
    let uncoded = gamma0(pe)?;
    let versus_uncoded_db = tradeoff_crossover_db(gap_star_db, uncoded).expect("crossover exists");
    let versus_fec_db = tradeoff_crossover_db(gap_star_db, 3.0).expect("crossover exists");
    println!("interactive gap {gap_star_db:.3} dB (feedback 30 dB above forward link)");
    println!("beats full-band uncoded PAM ({uncoded:.2} dB gap) below {versus_uncoded_db:.2} dB");
    println!("beats full-band FEC with a 3 dB gap below {versus_fec_db:.2} dB");
    Ok(Crossovers { gap_star_db, versus_uncoded_db, versus_fec_db })
}

#[allow(dead_code)]
fn main() -> skmod::Result<()> {
    run_example().map(|_| ())
}
