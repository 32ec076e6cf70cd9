use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF.
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub(crate) fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Normal density with the given location and scale.
pub(crate) fn norm_pdf_loc_scale(x: f64, loc: f64, scale: f64) -> f64 {
    norm_pdf((x - loc) / scale) / scale
}

/// CDF of a standard normal truncated to `[lo, hi]`.
pub(crate) fn truncnorm_cdf(x: f64, lo: f64, hi: f64) -> f64 {
    if x.is_nan() || lo.is_nan() || hi.is_nan() || lo >= hi {
        return f64::NAN;
    }
    if x <= lo {
        return 0.0;
    }
    if x >= hi {
        return 1.0;
    }
    let (clo, chi) = (norm_cdf(lo), norm_cdf(hi));
    ((norm_cdf(x) - clo) / (chi - clo)).clamp(0.0, 1.0)
}

/// Index of the first maximal entry, ignoring NaN.
pub(crate) fn argmax_skip_nan(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in v.iter().enumerate() {
        if x.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if x <= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the first minimal entry, ignoring NaN.
pub(crate) fn argmin_skip_nan(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in v.iter().enumerate() {
        if x.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if x >= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

/// numpy's `argmax`: the first NaN wins, otherwise the first maximum.
pub(crate) fn np_argmax(v: &[f64]) -> usize {
    v.iter()
        .position(|x| x.is_nan())
        .or_else(|| argmax_skip_nan(v))
        .unwrap_or(0)
}

/// numpy's `argmin`: the first NaN wins, otherwise the first minimum.
#[cfg(test)]
pub(crate) fn np_argmin(v: &[f64]) -> usize {
    v.iter()
        .position(|x| x.is_nan())
        .or_else(|| argmin_skip_nan(v))
        .unwrap_or(0)
}
