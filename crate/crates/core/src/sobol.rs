//! Unscrambled base-2 Sobol points with Joe–Kuo direction numbers.
//!
//! The all-zeros first point is skipped, so every coordinate lies strictly
//! inside the unit interval.

use crate::linalg::Matrix;
use thiserror::Error;

const BITS: usize = 32;

/// `(s, a, m_1..m_s)` rows of `new-joe-kuo-6.21201` for dimensions 2..=10.
const JOE_KUO: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

pub const MAX_DIM: usize = JOE_KUO.len() + 1;

#[derive(Debug, Error, PartialEq)]
pub enum SobolError {
    #[error("dimension {0} is outside the supported range 1..={MAX_DIM}")]
    Dimension(usize),
    #[error("requested {0} points; at least one is required and at most 2^32 - 1 are available")]
    Count(usize),
    #[error("domain has {domain} bounds but dimension is {dim}")]
    DomainMismatch { domain: usize, dim: usize },
    #[error("invalid bounds [{lo}, {hi}] in dimension {axis}")]
    Bounds { axis: usize, lo: f64, hi: f64 },
}

fn direction_numbers(axis: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if axis == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[axis - 1];
    let s = s as usize;
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// Generates `n` Sobol points in the unit cube `[0, 1)^dim`, skipping the origin.
pub fn unit_points(n: usize, dim: usize) -> Result<Matrix, SobolError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(SobolError::Dimension(dim));
    }
    if n == 0 || n as u64 >= (1u64 << BITS) {
        return Err(SobolError::Count(n));
    }
    let dirs: Vec<[u32; BITS]> = (0..dim).map(direction_numbers).collect();
    let scale = 1.0 / (1u64 << BITS) as f64;
    let mut state = vec![0u32; dim];
    let mut data = Vec::with_capacity(n * dim);
    for i in 1..=n as u64 {
        // Gray-code order: point i flips the direction number at the lowest set bit of i.
        let c = i.trailing_zeros() as usize;
        for (x, v) in state.iter_mut().zip(&dirs) {
            *x ^= v[c];
            data.push(*x as f64 * scale);
        }
    }
    Ok(Matrix::from_row_major(n, dim, data))
}

/// `n` Sobol points affinely mapped onto the box `domain`.
pub fn sobol_grid(domain: &[(f64, f64)], n: usize, dim: usize) -> Result<Matrix, SobolError> {
    if domain.len() != dim {
        return Err(SobolError::DomainMismatch { domain: domain.len(), dim });
    }
    for (axis, &(lo, hi)) in domain.iter().enumerate() {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(SobolError::Bounds { axis, lo, hi });
        }
    }
    let unit = unit_points(n, dim)?;
    let data = unit
        .as_slice()
        .chunks(dim)
        .flat_map(|row| row.iter().zip(domain).map(|(&u, &(lo, hi))| lo + (hi - lo) * u))
        .collect();
    Ok(Matrix::from_row_major(n, dim, data))
}
