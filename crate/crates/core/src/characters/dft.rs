//! Discrete Fourier transforms of arbitrary length with the e(+jk/n) kernel.
//!
//! The transform itself is delegated to rustfft, which handles every length
//! (mixed radix for smooth lengths, Rader/Bluestein for large prime factors).

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// exp(sign · 2πi · num / den) with num reduced modulo den first.
#[inline]
pub fn unit_root(num: u64, den: u64, sign: f64) -> Complex64 {
    let r = num % den;
    let theta = sign * 2.0 * PI * (r as f64 / den as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// X_k = Σ_j x_j exp(+2πi jk/n), unscaled.
pub fn dft_plus(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    if buf.len() > 1 {
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    }
    buf
}

/// The O(n²) definition with exact index reduction; test oracle.
pub fn direct_dft(input: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = input.len() as u64;
    (0..n)
        .map(|k| input.iter().enumerate().map(|(j, &x)| x * unit_root(j as u64 * k, n, sign)).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n).map(|j| Complex64::new((j as f64 * 0.37).sin() + 0.1 * j as f64, (j as f64 * 1.3).cos())).collect()
    }

    #[test]
    fn matches_direct_on_awkward_lengths() {
        for n in [1usize, 2, 5, 12, 17, 100, 127, 1000, 2002, 10_006] {
            let x = signal(n);
            let got = dft_plus(&x);
            let want = direct_dft(&x, 1.0);
            let dev = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(dev < 1e-10 * n as f64, "n = {n}: {dev}");
        }
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![Complex64::new(0.0, 0.0); 30];
        x[0] = Complex64::new(1.0, 0.0);
        assert!(dft_plus(&x).iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn exact_root_reduction() {
        let w = unit_root(3 * 1_000_002 + 1, 1_000_002, 1.0);
        let v = unit_root(1, 1_000_002, 1.0);
        assert!((w - v).norm() < 1e-15);
    }
}
