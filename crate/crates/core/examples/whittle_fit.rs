//! Whittle estimates for MMA and Brown–Resnick fields.

use extremal_whittle::gaussian::VariogramSpec;
use extremal_whittle::model::Family;
use extremal_whittle::simulate::{simulate_mma, BrSimConfig, BrSimulator, WeightKernel};
use extremal_whittle::stats::RandomStream;
use extremal_whittle::whittle::whittle_estimate;

fn main() -> extremal_whittle::Result<()> {
    let field = simulate_mma(50, &WeightKernel::diamond(0.5, 5)?, &mut RandomStream::new(5))?;
    let fit = whittle_estimate(&field, 20, Family::mma(0.5, 5), None)?;
    println!("mma  phi0=0.5 phi_hat={:.4} bounds={:?} evals={}", fit.theta_hat, fit.bounds, fit.evaluations);

    let spec = VariogramSpec::isotropic(0.5, 2.0)?;
    let field = BrSimulator::new(20, BrSimConfig::truncated(spec, 1000))?.simulate(&mut RandomStream::new(6))?;
    let fit = whittle_estimate(&field, 3, Family::brown_resnick(0.5, 2.0), None)?;
    println!("br   H0=0.5   H_hat={:.4} flag={:?}", fit.theta_hat, fit.flag());
    Ok(())
}
