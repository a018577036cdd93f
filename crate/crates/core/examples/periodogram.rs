//! Extremal periodogram against the model spectral density, averaged over
//! blocks of Fourier frequencies.

use extremal_whittle::extremal::{choose_threshold, extremal_periodogram, fourier_frequencies, indicators};
use extremal_whittle::model::{Family, SpectralModel};
use extremal_whittle::simulate::{simulate_mma, WeightKernel};
use extremal_whittle::stats::RandomStream;

fn main() -> extremal_whittle::Result<()> {
    let (n, m) = (64, 16);
    let field = simulate_mma(n, &WeightKernel::diamond(0.5, 5)?, &mut RandomStream::new(4))?;
    let grid = indicators(&field, &choose_threshold(&field, m)?)?;
    let p = extremal_periodogram(&grid, m);
    let f = SpectralModel::new(Family::mma(0.5, 5))?.spectral_density_grid(n)?;
    let freqs = fourier_frequencies(n);
    let mean = p.values.iter().sum::<f64>() / p.values.len() as f64;
    println!("mean periodogram {mean:.4}");

    let block = 8;
    println!("block (w1, w2)       periodogram  model");
    for b in 0..n / block {
        let (mut sp, mut sf) = (0.0, 0.0);
        for j1 in b * block..(b + 1) * block {
            for j2 in b * block..(b + 1) * block {
                sp += p.values[j1 * n + j2];
                sf += f[j1 * n + j2];
            }
        }
        let k = (block * block) as f64;
        let w = freqs[(b * block + block / 2) * n + b * block + block / 2];
        println!("({:.2}, {:.2})        {:>10.4}  {:.4}", w[0], w[1], sp / k, sf / k);
    }
    Ok(())
}
