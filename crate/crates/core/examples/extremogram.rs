//! Empirical extremogram of an MMA field next to the model value.

use extremal_whittle::extremal::{choose_threshold, empirical_extremogram};
use extremal_whittle::model::{Family, SpectralModel};
use extremal_whittle::simulate::{simulate_mma, WeightKernel};
use extremal_whittle::stats::RandomStream;

fn main() -> extremal_whittle::Result<()> {
    let n = 120;
    let field = simulate_mma(n, &WeightKernel::diamond(0.5, 5)?, &mut RandomStream::new(3))?;
    let m = (n as f64).powf(0.7).ceil() as u32;
    let est = empirical_extremogram(&field, &choose_threshold(&field, m)?, 3)?;
    let model = SpectralModel::new(Family::mma(0.5, 5))?;
    println!("   h      gamma_hat  gamma");
    for h in [[0, 0], [1, 0], [0, 1], [1, 1], [2, 0], [3, 0]] {
        println!("{:>2},{:<2}  {:>10.4}  {:.4}", h[0], h[1], est.get(h).unwrap_or(f64::NAN), model.extremogram(h));
    }
    Ok(())
}
