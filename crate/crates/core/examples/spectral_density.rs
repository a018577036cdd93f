//! Brown–Resnick spectral density: positivity across Hurst indices.

use extremal_whittle::model::{Family, SpectralModel};

fn main() -> extremal_whittle::Result<()> {
    for k in 1..=9 {
        let h = k as f64 / 10.0;
        let model = SpectralModel::new(Family::brown_resnick(h, 2.0))?;
        let report = model.positivity_check(128)?;
        println!(
            "H={h:.1} min={:.6e} at ({:.3}, {:.3}) truncation={:?}",
            report.min, report.argmin[0], report.argmin[1], model.truncation()
        );
    }
    Ok(())
}
