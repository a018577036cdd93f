//! Square 2-D discrete Fourier transforms on row-major buffers.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Unnormalised forward transform of an `n × n` real array:
/// `out[k] = Σ_t x[t] e^{−2πi k·t / n}`.
pub fn fft2_real(input: &[f64], n: usize) -> Vec<Complex64> {
    assert_eq!(input.len(), n * n, "input is not n × n");
    let mut data: Vec<Complex64> = input.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    // rows
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    // columns, via transpose
    let mut t = transpose(&data, n);
    for row in t.chunks_exact_mut(n) {
        fft.process(row);
    }
    transpose(&t, n)
}

fn transpose(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}
