//! In-place iterative radix-2 FFT. Lengths must be powers of two.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// Forward transform, `X_k = sum_n x_n exp(-2 pi i k n / N)`.
pub(crate) fn forward(buf: &mut [Complex64]) {
    transform(buf, -1.0);
}

/// Inverse transform including the `1/N` normalization.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    transform(buf, 1.0);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

fn transform(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }

    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let theta = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        // computed directly per index; repeated multiplication drifts at 2^16+
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, theta * k as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for (k, w) in twiddles.iter().enumerate() {
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}
