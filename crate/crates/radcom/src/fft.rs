//! Minimal in-place radix-2 FFT over the generic scalar. The transforms here
//! are 64-point, so a planner library would be overkill; keeping it local
//! also keeps results bit-reproducible across dependency upgrades.

use num_complex::Complex;

use crate::scalar::Real;

/// In-place Cooley-Tukey FFT. Length must be a power of two. The inverse
/// transform includes the 1/N scaling.
pub fn fft_in_place<T: Real>(data: &mut [Complex<T>], inverse: bool) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    assert!(n.is_power_of_two(), "FFT length must be a power of two");

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            data.swap(i, j);
        }
    }

    let sign = if inverse { T::one() } else { -T::one() };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let angle = sign * T::TAU() / T::of(len as f64);
        let wn = Complex::new(angle.cos(), angle.sin());
        let mut start = 0;
        while start < n {
            let mut w = Complex::new(T::one(), T::zero());
            for k in 0..half {
                let u = data[start + k];
                let t = w * data[start + k + half];
                data[start + k] = u + t;
                data[start + k + half] = u - t;
                w = w * wn;
            }
            start += len;
        }
        len <<= 1;
    }

    if inverse {
        let scale = T::one() / T::of(n as f64);
        for v in data.iter_mut() {
            *v = Complex::new(v.re * scale, v.im * scale);
        }
    }
}
