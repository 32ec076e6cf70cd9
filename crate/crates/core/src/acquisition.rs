//! Acquisition policies over a grid posterior.
//!
//! Every policy maps `(mean, variance, incumbent, beta)` on the grid to one
//! grid index. The ported policies keep the exact arithmetic order of their
//! reference listings, including in-place overwrites and loops.

use crate::gp::Posterior;
use crate::seeds;
use crate::stats::{
    argmax_skip_nan, argmin_skip_nan, norm_cdf, norm_pdf, norm_pdf_loc_scale, np_argmax,
    truncnorm_cdf,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Lower bound applied to the predictive variance before any policy runs.
pub const VARIANCE_FLOOR: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AfError {
    #[error("invalid acquisition input: {0}")]
    Input(String),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfInput {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub incumbent: f64,
    pub beta: f64,
}

impl AfInput {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>, incumbent: f64) -> Result<Self, AfError> {
        let input = Self { mean, variance, incumbent, beta: 1.0 };
        input.validate()?;
        Ok(input)
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn from_posterior(post: &Posterior, incumbent: f64) -> Self {
        Self { mean: post.mean.clone(), variance: post.variance.clone(), incumbent, beta: 1.0 }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn validate(&self) -> Result<(), AfError> {
        if self.mean.is_empty() {
            return Err(AfError::Input("empty grid".into()));
        }
        if self.mean.len() != self.variance.len() {
            return Err(AfError::Input(format!(
                "{} means but {} variances",
                self.mean.len(),
                self.variance.len()
            )));
        }
        if self.variance.iter().any(|v| *v < 0.0) {
            return Err(AfError::Input("negative variance".into()));
        }
        Ok(())
    }

    /// Copy with every variance raised to at least [`VARIANCE_FLOOR`].
    pub fn floored(&self) -> Self {
        Self {
            variance: self.variance.iter().map(|v| v.max(VARIANCE_FLOOR)).collect(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfId {
    Ei,
    Ucb,
    Pofi,
    Mean,
    Random,
    FunboOod,
    FunboBranin,
    FunboGprice,
    FunboHartmann3,
    FunboAdaboost,
    FunboSvm,
    FunboGps,
    FunboFewshot,
}

impl AfId {
    pub const ALL: [AfId; 13] = [
        AfId::Ei,
        AfId::Ucb,
        AfId::Pofi,
        AfId::Mean,
        AfId::Random,
        AfId::FunboOod,
        AfId::FunboBranin,
        AfId::FunboGprice,
        AfId::FunboHartmann3,
        AfId::FunboAdaboost,
        AfId::FunboSvm,
        AfId::FunboGps,
        AfId::FunboFewshot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AfId::Ei => "ei",
            AfId::Ucb => "ucb",
            AfId::Pofi => "pofi",
            AfId::Mean => "mean",
            AfId::Random => "random",
            AfId::FunboOod => "funbo_ood",
            AfId::FunboBranin => "funbo_branin",
            AfId::FunboGprice => "funbo_gprice",
            AfId::FunboHartmann3 => "funbo_hartmann3",
            AfId::FunboAdaboost => "funbo_adaboost",
            AfId::FunboSvm => "funbo_svm",
            AfId::FunboGps => "funbo_gps",
            AfId::FunboFewshot => "funbo_fewshot",
        }
    }

    pub fn is_discovered(self) -> bool {
        !matches!(self, AfId::Ei | AfId::Ucb | AfId::Pofi | AfId::Mean | AfId::Random)
    }

    /// Where the policy comes from.
    pub fn origin(self) -> &'static str {
        match self {
            AfId::Ei | AfId::Ucb | AfId::Pofi | AfId::Mean => "general-purpose closed form",
            AfId::Random => "uniform random baseline",
            AfId::FunboOod => "discovered on 1D Ackley/Levy/Schwefel, transferred across classes",
            AfId::FunboBranin => "discovered on scaled/translated Branin",
            AfId::FunboGprice => "discovered on scaled/translated Goldstein-Price",
            AfId::FunboHartmann3 => "discovered on scaled/translated Hartmann-3",
            AfId::FunboAdaboost => "discovered on AdaBoost hyperparameter surfaces",
            AfId::FunboSvm => "discovered on SVM hyperparameter surfaces",
            AfId::FunboGps => "discovered on 3D GP prior samples",
            AfId::FunboFewshot => "few-shot adaptation to 2D Ackley",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            AfId::Ei => "argmax (y*-m)Φ(z) + σφ(z), z = (y*-m)/σ",
            AfId::Ucb => "argmin m - βσ",
            AfId::Pofi => "argmax Φ((y*-m)/σ)",
            AfId::Mean => "argmin m",
            AfId::Random => "uniform grid index",
            AfId::FunboOod => "EI with the improvement shifted by βσ",
            AfId::FunboBranin => "EI-like score on m + 2σ², then iterative zeroing of maxima",
            AfId::FunboGprice => "first index maximising σ² Φ(z - 0.5)",
            AfId::FunboHartmann3 => "truncated-normal CDF of a cubic EI variant",
            AfId::FunboAdaboost => "second-smallest of a Gaussian-bump score",
            AfId::FunboSvm => "rational transform of EI and zφ(z)",
            AfId::FunboGps => "squared EI damped by (z/β)²σ",
            AfId::FunboFewshot => "rational variance score, first half of the grid masked",
        }
    }
}

impl fmt::Display for AfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AfId {
    type Err = AfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AfId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| AfError::Input(format!("unknown acquisition function `{s}`")))
    }
}

/// The value vector a policy reduced over and the index it chose.
#[derive(Clone, Debug, PartialEq)]
pub struct AfOutput {
    pub index: usize,
    pub values: Vec<f64>,
}

pub(crate) fn finish_max(values: Vec<f64>) -> Result<AfOutput, AfError> {
    let index = argmax_skip_nan(&values).ok_or_else(|| all_nan())?;
    checked(index, values)
}

pub(crate) fn finish_min(values: Vec<f64>) -> Result<AfOutput, AfError> {
    let index = argmin_skip_nan(&values).ok_or_else(|| all_nan())?;
    checked(index, values)
}

fn all_nan() -> AfError {
    AfError::InvalidProgram("every acquisition value is NaN".into())
}

fn checked(index: usize, values: Vec<f64>) -> Result<AfOutput, AfError> {
    if !values[index].is_finite() {
        return Err(AfError::InvalidProgram(format!(
            "selected value {} at index {index} is not finite",
            values[index]
        )));
    }
    Ok(AfOutput { index, values })
}

fn map2(input: &AfInput, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    input.mean.iter().zip(&input.variance).map(|(&m, &v)| f(m, v)).collect()
}

/// Expected improvement on every grid point.
pub fn ei_values(input: &AfInput) -> Vec<f64> {
    let inc = input.incumbent;
    map2(&input.floored(), |m, var| {
        let z = (inc - m) / var.sqrt();
        let std = var.sqrt();
        // far in the tail both terms are subnormal and can cancel below zero
        ((inc - m) * norm_cdf(z) + std * norm_pdf(z)).max(0.0)
    })
}

/// Probability of improvement on every grid point.
pub fn pofi_values(input: &AfInput) -> Vec<f64> {
    let inc = input.incumbent;
    map2(&input.floored(), |m, var| norm_cdf((inc - m) / var.sqrt()))
}

/// Lower confidence bound `m - βσ`.
pub fn ucb_values(input: &AfInput) -> Vec<f64> {
    let beta = input.beta;
    map2(&input.floored(), |m, var| m - beta * var.sqrt())
}

/// Runs `af`, returning the chosen index.
pub fn select(af: AfId, input: &AfInput, rng_seed: u64) -> Result<usize, AfError> {
    evaluate(af, input, rng_seed).map(|o| o.index)
}

/// Runs `af`, returning the value vector and the chosen index.
pub fn evaluate(af: AfId, input: &AfInput, rng_seed: u64) -> Result<AfOutput, AfError> {
    input.validate()?;
    let input = input.floored();
    match af {
        AfId::Ei => finish_max(ei_values(&input)),
        AfId::Pofi => finish_max(pofi_values(&input)),
        AfId::Ucb => finish_min(ucb_values(&input)),
        AfId::Mean => finish_min(input.mean.clone()),
        AfId::Random => {
            let index = seeds::rng(rng_seed).random_range(0..input.len());
            Ok(AfOutput { index, values: vec![0.0; input.len()] })
        }
        _ => discovered_values(af, &input),
    }
}

/// Runs one of the ported discovered policies.
pub fn discovered_values(id: AfId, input: &AfInput) -> Result<AfOutput, AfError> {
    input.validate()?;
    let input = input.floored();
    let inc = input.incumbent;
    let beta = input.beta;
    match id {
        AfId::FunboOod => finish_max(map2(&input, |m, var| {
            let std = var.sqrt();
            let diff = inc - m + beta * std;
            let z = diff / std;
            diff * norm_cdf(z) + std * norm_pdf(z)
        })),
        AfId::FunboBranin => funbo_branin(&input),
        AfId::FunboGprice => funbo_gprice(&input),
        AfId::FunboHartmann3 => finish_max(map2(&input, |m, var| {
            let diff = inc - m;
            let std = var.sqrt();
            let z = diff / std;
            let c = norm_cdf(z);
            let vals = diff * c.powi(3) + (c.powi(2) + c + 1.0) * norm_pdf(z);
            truncnorm_cdf(vals, -0.1, 0.1)
        })),
        AfId::FunboAdaboost => {
            let c1 = (-beta).exp();
            let c2 = 2.0 * beta * (-beta).exp();
            let vals = map2(&input, |m, var| {
                let alpha = 2f64.sqrt() * beta * var.sqrt();
                let z = (inc - m) / alpha;
                let v = -(c1 * (-z.powi(2)).exp() - 1.0 + c1 + inc).abs()
                    + 2.0 * beta * (z + c2).powi(2);
                v - alpha.powi(2).ln()
            });
            overwrite_min_then_argmin(vals)
        }
        AfId::FunboSvm => finish_max(map2(&input, |m, var| {
            let z = (inc - m) / var.sqrt();
            let ei = (inc - m) * norm_cdf(z) + var.sqrt() * norm_pdf(z);
            let t0 = norm_pdf_loc_scale(inc, inc, var.sqrt());
            let t1 = z * norm_pdf(z);
            (ei * t1 - t0) / (1.0 - 2.0 * t1) + t1 * (ei / (1.0 - 2.0 * t1))
                - ei / (1.0 - 2.0 * t1).powi(2)
                + t1 * (t1 - z) / beta
        })),
        AfId::FunboGps => finish_max(map2(&input, |m, var| {
            let z = (inc - m) / var.sqrt();
            let ei = ((inc - m) * norm_cdf(z) + var.sqrt() * norm_pdf(z)).powi(2);
            ei / (1.0 + (z / beta).powi(2) * var.sqrt()).powi(2)
        })),
        AfId::FunboFewshot => {
            let n = input.len();
            let a = 10.0;
            let mut vals = map2(&input, |m, var| {
                let z = (m + 0.000001 - inc) / var.sqrt();
                let mut v = 1.0 / (1.0 + (z / beta).powi(2) * (a * var + 0.00001).sqrt()).powi(2);
                let bz = beta.sqrt() * z;
                let r = bz / var.sqrt();
                v *= (1.0 + (z / beta).powi(2)) * var / ((1.0 + r.powi(2) * var) * (1.0 + r.powi(2)));
                v += (1.0 - r).powi(2) * var / (1.0 + r.powi(2) * var).powi(2);
                v = (1.0 + (z / beta).powi(2)) * v - (1.0 - (z / beta).powi(2)) * (-1f64).exp().powi(2);
                v = (a * var).sqrt() * v / (a * var + 0.00001).sqrt();
                v *= ((a * var).sqrt() * var).sqrt();
                v * var.powi(2)
            });
            vals[..n / 2].iter_mut().for_each(|v| *v = 0.0);
            finish_max(vals)
        }
        other => Err(AfError::Input(format!("{other} is not a discovered policy"))),
    }
}

/// Overwrites the first minimum with 1.0, then takes the argmin again.
pub fn overwrite_min_then_argmin(mut vals: Vec<f64>) -> Result<AfOutput, AfError> {
    let first = argmin_skip_nan(&vals).ok_or_else(all_nan)?;
    vals[first] = 1.0;
    finish_min(vals)
}

fn funbo_branin(input: &AfInput) -> Result<AfOutput, AfError> {
    let inc = input.incumbent;
    let y_pred: Vec<f64> = map2(input, |m, var| m + 2.0 * var);
    let diff: Vec<f64> = y_pred.iter().map(|y| inc - y).collect();
    let bsd: Vec<f64> = input.variance.iter().map(|v| v.sqrt().max(1e-15)).collect();
    let mut vals: Vec<f64> = (0..input.len())
        .map(|i| {
            let z = diff[i] / bsd[i];
            let var = input.variance[i];
            diff[i] * norm_cdf(z)
                + var.sqrt() * norm_cdf(z + 0.5)
                + (norm_cdf(z) - norm_cdf(z + 0.5)) * var / 2.0
        })
        .collect();
    let a: Vec<f64> = diff.iter().map(|d| d.max(inc)).collect();
    // With a non-positive incumbent the scalar -inf turns every y_val into NaN.
    let y_vals: Vec<f64> = (0..input.len())
        .map(|i| {
            let alpha = if inc > 0.0 { diff[i] } else { f64::NEG_INFINITY };
            let alpha = alpha.max(0.0) * (-alpha + 0.5 * a[i]) - y_pred[i];
            let mask = if a[i] >= 0.0 { 1.0 } else { 0.0 };
            (alpha + a[i] + y_pred[i].abs()).abs() * mask
        })
        .collect();
    let mut scratch = vec![0.0; input.len()];
    for y_val in y_vals {
        for (j, s) in scratch.iter_mut().enumerate() {
            *s = vals[j] - (y_val - y_pred[j]) / bsd[j];
        }
        let idx = np_argmax(&scratch);
        vals[idx] = 0.0;
    }
    finish_max(vals)
}

/// Minimum grid size accepted by `funbo_gprice`.
pub const GPRICE_MIN_POINTS: usize = 10;

fn funbo_gprice(input: &AfInput) -> Result<AfOutput, AfError> {
    let n = input.len();
    if n < GPRICE_MIN_POINTS {
        return Err(AfError::Input(format!(
            "funbo_gprice needs at least {GPRICE_MIN_POINTS} grid points, got {n}"
        )));
    }
    // The posterior arrays are column vectors, so `dim` is 1.
    let dim = 1.0;
    let mut var = input.variance.clone();
    var[(n - 10) / 2] *= dim;
    var.iter_mut().filter(|v| !v.is_finite()).for_each(|v| *v = 1.0);
    let mut best_score = 0.0;
    let mut g_i = 0;
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let curr_z = (input.incumbent - input.mean[i]) / var[i].sqrt();
        let new_score = var[i] * norm_cdf(curr_z - 0.5);
        if new_score > best_score {
            best_score = new_score;
            g_i = i;
        }
        scores.push(new_score);
    }
    checked(g_i, scores)
}
