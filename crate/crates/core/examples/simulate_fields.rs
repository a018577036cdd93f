//! Simulate an MMA field and a truncated Brown–Resnick field and write both as CSV.

use extremal_whittle::gaussian::VariogramSpec;
use extremal_whittle::simulate::{simulate_mma, BrSimConfig, BrSimulator, WeightKernel};
use extremal_whittle::stats::RandomStream;

fn main() -> extremal_whittle::Result<()> {
    let dir = std::env::temp_dir();
    let mma = simulate_mma(30, &WeightKernel::diamond(0.5, 5)?, &mut RandomStream::new(1))?;
    mma.save(&dir.join("mma.csv"))?;

    let spec = VariogramSpec::isotropic(0.5, 2.0)?;
    let br = BrSimulator::new(20, BrSimConfig::truncated(spec, 1000))?.simulate(&mut RandomStream::new(2))?;
    br.save(&dir.join("br.csv"))?;

    let max = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max);
    println!("mma: n={} max={:.3}", mma.n(), max(mma.values()));
    println!("br:  n={} max={:.3}", br.n(), max(br.values()));
    println!("written to {}", dir.display());
    Ok(())
}
