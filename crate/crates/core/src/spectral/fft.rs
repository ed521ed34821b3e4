//! Multi-dimensional complex FFTs over row-major buffers.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Plan cache owned by one execution context.
pub struct PlanCache {
    planner: Mutex<FftPlanner<f64>>,
}

impl Default for PlanCache {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for PlanCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PlanCache")
    }
}

impl PlanCache {
    pub fn new() -> Self {
        Self { planner: Mutex::new(FftPlanner::new()) }
    }

    fn plan(&self, n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        let mut p = self.planner.lock().expect("fft planner poisoned");
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    }

    /// Unnormalised in-place transform over every axis of `shape`.
    /// The forward direction uses `e^{-2πi jk/n}`.
    pub fn fft_nd(&self, buf: &mut [Complex64], shape: &[usize], inverse: bool) {
        let total: usize = shape.iter().product();
        assert_eq!(buf.len(), total, "buffer does not match shape");
        let mut tmp = Vec::new();
        for axis in 0..shape.len() {
            let n = shape[axis];
            if n <= 1 {
                continue;
            }
            let plan = self.plan(n, inverse);
            let stride: usize = shape[axis + 1..].iter().product();
            if stride == 1 {
                plan.process(buf);
                continue;
            }
            let outer = total / (n * stride);
            tmp.resize(total, Complex64::new(0.0, 0.0));
            for o in 0..outer {
                let base = o * n * stride;
                for i in 0..stride {
                    let line = (o * stride + i) * n;
                    for j in 0..n {
                        tmp[line + j] = buf[base + j * stride + i];
                    }
                }
            }
            plan.process(&mut tmp);
            for o in 0..outer {
                let base = o * n * stride;
                for i in 0..stride {
                    let line = (o * stride + i) * n;
                    for j in 0..n {
                        buf[base + j * stride + i] = tmp[line + j];
                    }
                }
            }
        }
    }
}

/// Signed mode number stored at FFT index `i` of an axis of length `n`.
#[inline]
pub fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index holding signed mode `m`, if representable.
#[inline]
pub fn mode_index(m: i64, n: usize) -> Option<usize> {
    let h = (n / 2) as i64;
    if m < -h || m >= h {
        None
    } else if m >= 0 {
        Some(m as usize)
    } else {
        Some((m + n as i64) as usize)
    }
}

/// Smallest length ≥ `n` whose only prime factors are 2, 3 and 5, rounded to even.
pub fn fft_friendly(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        if m.is_multiple_of(2) {
            let mut r = m;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_3d() {
        let shape = [4usize, 6, 8];
        let n: usize = shape.iter().product();
        let orig: Vec<Complex64> =
            (0..n).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut buf = orig.clone();
        let cache = PlanCache::new();
        cache.fft_nd(&mut buf, &shape, false);
        cache.fft_nd(&mut buf, &shape, true);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a / n as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn axis_order_matches_naive_dft() {
        let shape = [3usize, 4];
        let data: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let mut buf = data.clone();
        PlanCache::new().fft_nd(&mut buf, &shape, false);
        for k0 in 0..3 {
            for k1 in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..3 {
                    for j1 in 0..4 {
                        let ph = -2.0 * std::f64::consts::PI * ((k0 * j0) as f64 / 3.0 + (k1 * j1) as f64 / 4.0);
                        acc += data[j0 * 4 + j1] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((acc - buf[k0 * 4 + k1]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn mode_indexing() {
        assert_eq!(signed_mode(0, 8), 0);
        assert_eq!(signed_mode(3, 8), 3);
        assert_eq!(signed_mode(4, 8), -4);
        assert_eq!(signed_mode(7, 8), -1);
        for i in 0..8 {
            assert_eq!(mode_index(signed_mode(i, 8), 8), Some(i));
        }
        assert_eq!(mode_index(4, 8), None);
        assert_eq!(fft_friendly(33), 36);
        assert_eq!(fft_friendly(64), 64);
        assert_eq!(fft_friendly(7), 8);
    }
}
