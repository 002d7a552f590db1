//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use pgist::transforms::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_reals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Unitary DFT by direct summation, `O(n^2)`.
pub fn direct_dft1(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let phase = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    v * Complex64::from_polar(1.0, phase)
                })
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Unitary 2D DFT by direct summation over both indices, `O(n^4)`.
pub fn direct_dft2(x: &[Complex64], rows: usize, cols: usize, inverse: bool) -> Vec<Complex64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = 1.0 / ((rows * cols) as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for kr in 0..rows {
        for kc in 0..cols {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..rows {
                for c in 0..cols {
                    let phase = sign
                        * 2.0
                        * PI
                        * (((r * kr) % rows) as f64 / rows as f64
                            + ((c * kc) % cols) as f64 / cols as f64);
                    acc += x[r * cols + c] * Complex64::from_polar(1.0, phase);
                }
            }
            out[kr * cols + kc] = acc * scale;
        }
    }
    out
}

pub fn max_abs_diff_c(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn energy_c(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// Real inner product `Re <a, b>` of complex vectors.
pub fn re_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cells within half a cell of a line through the origin at angle `theta`,
/// measured across the line's dominant axis, in centered `(u, v)`
/// coordinates.
pub fn line_cells(n: usize, theta: f64) -> Vec<(i64, i64)> {
    let half = (n / 2) as i64;
    let (s, c) = theta.sin_cos();
    let mut out = Vec::new();
    for v in -half..half {
        for u in -half..half {
            let on = if c.abs() >= s.abs() {
                (v as f64 - u as f64 * s / c).abs() < 0.5
            } else {
                (u as f64 - v as f64 * c / s).abs() < 0.5
            };
            if on {
                out.push((u, v));
            }
        }
    }
    out
}

/// Brute-force radial mask: union of the line cells, closed under
/// negation modulo `n`, plus DC; returned as a DFT-indexed cell grid.
pub fn brute_force_mask(n: usize, k: usize) -> Vec<bool> {
    let ni = n as i64;
    let mut cells = vec![false; n * n];
    for j in 0..k {
        for (u, v) in line_cells(n, j as f64 * PI / k as f64) {
            for (uu, vv) in [(u, v), (-u, -v)] {
                cells[(vv.rem_euclid(ni) * ni + uu.rem_euclid(ni)) as usize] = true;
            }
        }
    }
    cells[0] = true;
    cells
}
