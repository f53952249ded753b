//! Multi-dimensional FFTs on row-major (last axis fastest) buffers.
//!
//! Plans come from a process-wide `FftPlanner` guarded by a mutex; the plans
//! themselves are `Sync` and are executed outside the lock.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    /// Inverse transform, normalised by 1/n per transformed axis.
    Inverse,
}

type PlanCache = Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)>;

fn plan(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let forward = dir == Direction::Forward;
    if let Some(p) = guard.1.get(&(len, forward)) {
        return Arc::clone(p);
    }
    let p = if forward {
        guard.0.plan_fft(len, FftDirection::Forward)
    } else {
        guard.0.plan_fft(len, FftDirection::Inverse)
    };
    guard.1.insert((len, forward), Arc::clone(&p));
    p
}

thread_local! {
    /// Transpose buffer and FFT scratch, reused across calls on this thread.
    static BUFFERS: RefCell<(Vec<Complex64>, Vec<Complex64>)> = const { RefCell::new((Vec::new(), Vec::new())) };
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// `dst[j * rows + k] = src[k * cols + j]`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    // consecutive columns reuse the same cache lines of `src`
    for (j, out) in dst[..rows * cols].chunks_exact_mut(rows).enumerate() {
        for (d, s) in out.iter_mut().zip(src[j..].iter().step_by(cols)) {
            *d = *s;
        }
    }
}

/// Transforms `data` (row-major with the given `shape`) along each axis in `axes`.
pub fn transform(data: &mut [Complex64], shape: &[usize], axes: &[usize], dir: Direction) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "buffer does not match shape");
    let st = strides(shape);
    for &axis in axes {
        let n = shape[axis];
        if n <= 1 {
            continue;
        }
        let fft = plan(n, dir);
        let stride = st[axis];
        BUFFERS.with(|b| {
            let (line, scratch) = &mut *b.borrow_mut();
            scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
            if stride == 1 {
                fft.process_with_scratch(data, scratch);
            } else {
                // Lines along `axis`: outer blocks of size n*stride, `stride` lines per block.
                let block = n * stride;
                line.resize(block, Complex64::default());
                for chunk in data.chunks_mut(block) {
                    transpose(chunk, line, n, stride);
                    fft.process_with_scratch(line, scratch);
                    transpose(line, chunk, stride, n);
                }
            }
        });
    }
    if dir == Direction::Inverse {
        let norm: usize = axes.iter().map(|&a| shape[a]).product();
        let scale = 1.0 / norm as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Full forward transform over every axis.
pub fn forward(data: &mut [Complex64], shape: &[usize]) {
    let axes: Vec<usize> = (0..shape.len()).collect();
    transform(data, shape, &axes, Direction::Forward);
}

/// Full inverse transform over every axis (normalised).
pub fn inverse(data: &mut [Complex64], shape: &[usize]) {
    let axes: Vec<usize> = (0..shape.len()).collect();
    transform(data, shape, &axes, Direction::Inverse);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn strided_axis_matches_naive() {
        let shape = [4, 6];
        let data: Vec<Complex64> = (0..24)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut out = data.clone();
        transform(&mut out, &shape, &[0], Direction::Forward);
        for col in 0..6 {
            let line: Vec<Complex64> = (0..4).map(|r| data[r * 6 + col]).collect();
            let expect = naive_dft(&line);
            for r in 0..4 {
                assert!((out[r * 6 + col] - expect[r]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn roundtrip_3d() {
        let shape = [8, 4, 6];
        let data: Vec<Complex64> = (0..192)
            .map(|i| Complex64::new((i as f64).sqrt(), -(i as f64 * 0.3).sin()))
            .collect();
        let mut buf = data.clone();
        forward(&mut buf, &shape);
        inverse(&mut buf, &shape);
        for (a, b) in buf.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
