//! The closed-form capacity-gap bound, its high-SNR limit, and how it
//! compares with the searched gap.

use skmod::analysis::{high_snr_gap, required_snr, shannon_snr_db, theorem1_gap, SearchPolicy};
use skmod::numerics::from_db;
use skmod::schemes::Feedback;

pub fn run_example() -> skmod::Result<Vec<(u32, f64, f64)>> {
    let pe = 1e-6;
    let fb = Feedback::from_dsnr_db(20.0);
    let t = theorem1_gap(pe, 19, from_db(60.0), fb)?;
    println!(
        "N = 19 at 60 dB: lambda {:.6}, psi1 {:.4} dB, psi2 {:.2e} dB, psi3 {:.2e}, bound {:.4} dB, high-SNR form {:.4} dB",
        t.lambda, t.psi1_db, t.psi2_db, t.psi3_db, t.gap_db, t.approx_db
    );

    let mut rows = Vec::new();
    println!("N   searched gap  bound");
    for n in [1, 2, 5, 10, 19, 30] {
        let snr_db = required_snr(2.0, pe, n, fb, SearchPolicy::THEOREM)?;
        let searched = snr_db - shannon_snr_db(2.0);
        let bound = theorem1_gap(pe, n, from_db(snr_db), fb)?.gap_db;
        println!("{n:<3} {searched:>12.4}  {bound:.4}");
        rows.push((n, searched, bound));
    }
    println!("high-SNR gap for N = 19: {:.4} dB", high_snr_gap(pe, 19, fb)?);
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> skmod::Result<()> {
    run_example().map(|_| ())
}
