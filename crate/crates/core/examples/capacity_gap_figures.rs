//! Capacity gap against the number of rounds at pe = 1e-6, for 1 and 4
//! bits per channel use, with feedback 10 dB and 20 dB above the forward
//! link and with noiseless feedback.

use skmod::analysis::{gap_curve, GapCurve};
use skmod::schemes::Feedback;

pub fn run_example() -> skmod::Result<Vec<(f64, f64, GapCurve)>> {
    let mut curves = Vec::new();
    for rate in [1.0, 4.0] {
        for dsnr_db in [10.0, 20.0, f64::INFINITY] {
            let c = gap_curve(rate, 1e-6, Feedback::from_dsnr_db(dsnr_db), 36)?;
            curves.push((rate, dsnr_db, c));
        }
    }
    println!("R  dsnr   n_opt  gap(n_opt)  gap(2)  gap(10)  gap(20)");
    for (rate, dsnr_db, c) in &curves {
        let g = |n| c.point(n).map_or(f64::NAN, |p| p.gap_db);
        let n_opt = c.n_opt.unwrap_or(0);
        println!(
            "{rate}  {dsnr_db:>4}   {n_opt:>5}  {:>10.4}  {:>6.4}  {:>7.4}  {:>7.4}",
            g(n_opt),
            g(2),
            g(10),
            g(20)
        );
    }
    Ok(curves)
}

#[allow(dead_code)]
fn main() -> skmod::Result<()> {
    run_example().map(|_| ())
}
