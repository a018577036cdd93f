//! Pairwise likelihood versus Whittle on one exactly simulated Brown–Resnick field.

use std::time::Instant;

use extremal_whittle::gaussian::VariogramSpec;
use extremal_whittle::model::Family;
use extremal_whittle::pairwise::{pairwise_estimate, DEFAULT_DMAX};
use extremal_whittle::simulate::{BrSimConfig, BrSimulator};
use extremal_whittle::stats::RandomStream;
use extremal_whittle::whittle::whittle_estimate;

fn main() -> extremal_whittle::Result<()> {
    let spec = VariogramSpec::isotropic(0.5, 2.0)?;
    let field = BrSimulator::new(25, BrSimConfig::exact(spec))?.simulate(&mut RandomStream::new(7))?;
    let family = Family::brown_resnick(0.5, 2.0);

    let t = Instant::now();
    let w = whittle_estimate(&field, 5, family, None)?;
    println!("whittle  H_hat={:.4} {:?}", w.theta_hat, t.elapsed());
    let t = Instant::now();
    let p = pairwise_estimate(&field, family, None, DEFAULT_DMAX)?;
    println!("pairwise H_hat={:.4} loglik={:.2} {:?}", p.theta_hat, p.loglik, t.elapsed());
    Ok(())
}
