//! The grid BO evaluation loop, the two-term fitness score and regret curves.
//!
//! Convergence is detected with exact floating equality between the best
//! observed value and the grid minimum. Both come from the same cached grid
//! values, so equality is exact whenever the policy selects the grid argmin.

use crate::acquisition::{self, AfError, AfId, AfInput, AfOutput};
use crate::afdsl::{self, DslError, Program};
use crate::gp::{GpError, GpSession};
use crate::objectives::ObjectiveInstance;
use crate::seeds;
use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Acquisition(#[from] AfError),
    #[error("trial {trial}: grid point {index} selected again with zero observation noise")]
    Reselected { trial: usize, index: usize },
    #[error("GP failure: {0}")]
    Gp(#[from] GpError),
    #[error("evaluation exceeded its deadline at trial {trial}")]
    Timeout { trial: usize },
    #[error("initial value equals the optimum; the score is undefined")]
    ZeroDenominator,
    #[error("no results to aggregate")]
    Empty,
}

impl BoError {
    /// Whether the error is attributable to the policy rather than the setup.
    pub fn is_program_fault(&self) -> bool {
        matches!(
            self,
            BoError::Acquisition(AfError::InvalidProgram(_)) | BoError::Reselected { .. } | BoError::Timeout { .. }
        )
    }
}

/// An acquisition policy: a builtin or a DSL program.
#[derive(Clone, Debug, PartialEq)]
pub enum AfProgram {
    Builtin(AfId),
    Dsl(Program),
}

impl AfProgram {
    /// A builtin name or DSL program text.
    pub fn parse(text: &str) -> Result<Self, DslError> {
        match text.trim().parse::<AfId>() {
            Ok(id) => Ok(AfProgram::Builtin(id)),
            Err(_) => afdsl::parse(text).map(AfProgram::Dsl),
        }
    }

    pub fn text(&self) -> String {
        match self {
            AfProgram::Builtin(id) => id.name().to_string(),
            AfProgram::Dsl(p) => p.render(),
        }
    }

    pub fn evaluate(&self, input: &AfInput, rng_seed: u64) -> Result<AfOutput, AfError> {
        match self {
            AfProgram::Builtin(id) => acquisition::evaluate(*id, input, rng_seed),
            AfProgram::Dsl(p) => p.evaluate(input),
        }
    }

    fn is_random(&self) -> bool {
        matches!(self, AfProgram::Builtin(AfId::Random))
    }
}

impl fmt::Display for AfProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// The outcome of one BO run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoRunResult {
    pub found_min: f64,
    pub true_min: f64,
    pub initial_min_y: f64,
    pub fraction_steps: f64,
    /// Best-so-far value after each trial, starting with the initial design.
    pub trajectory: Vec<f64>,
    /// Grid indices chosen at each trial.
    pub selections: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoOptions {
    pub beta: f64,
    /// Makes the `random` policy sample grid points without replacement.
    pub random_without_replacement: bool,
    pub deadline: Option<Instant>,
}

impl Default for BoOptions {
    fn default() -> Self {
        Self { beta: 1.0, random_without_replacement: false, deadline: None }
    }
}

/// Runs `trials` BO steps on `inst` with default options.
pub fn run_bo(
    inst: &ObjectiveInstance,
    af: &AfProgram,
    trials: usize,
    seed: u64,
) -> Result<BoRunResult, BoError> {
    run_bo_with(inst, af, trials, seed, &BoOptions::default())
}

pub fn run_bo_with(
    inst: &ObjectiveInstance,
    af: &AfProgram,
    trials: usize,
    seed: u64,
    opts: &BoOptions,
) -> Result<BoRunResult, BoError> {
    if trials == 0 {
        return Err(BoError::NoTrials);
    }
    let grid = inst.grid();
    let values = inst.values();
    let hp = inst.gp_hyperparams().clone();
    let zero_noise = hp.noise_variance == 0.0;
    let mut session = GpSession::new(grid, hp)?;

    let start = inst.initial_index();
    session.push(grid.row(start), values[start])?;
    let mut observed = vec![false; values.len()];
    observed[start] = true;
    let mut ys = vec![values[start]];
    let initial_min_y = values[start];
    let true_min = inst.true_min();
    let mut found_min = initial_min_y;
    let mut trajectory = Vec::with_capacity(trials + 1);
    trajectory.push(found_min);
    let mut selections = Vec::with_capacity(trials);
    let mut rng = seeds::rng(seeds::derive(seed, &[0]));

    for trial in 0..trials {
        if opts.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(BoError::Timeout { trial });
        }
        let index = if af.is_random() && opts.random_without_replacement {
            let free: Vec<usize> = (0..values.len()).filter(|&i| !observed[i]).collect();
            match free.choose(&mut rng) {
                Some(&i) => i,
                None => start,
            }
        } else {
            let post = session.posterior();
            let input = AfInput {
                mean: post.mean,
                variance: post.variance,
                incumbent: found_min,
                beta: opts.beta,
            };
            af.evaluate(&input, seeds::derive(seed, &[1, trial as u64]))?.index
        };
        if observed[index] && zero_noise {
            return Err(BoError::Reselected { trial, index });
        }
        observed[index] = true;
        let y = values[index];
        ys.push(y);
        selections.push(index);
        // The posterior after the final trial is never used.
        if trial + 1 < trials {
            session.push(grid.row(index), y)?;
        }
        found_min = found_min.min(y);
        trajectory.push(found_min);
    }

    let fraction_steps = if found_min == true_min {
        let first = ys.iter().position(|&y| y == found_min).expect("minimum is observed");
        (first as f64 - 1.0) / trials as f64
    } else {
        1.0
    };
    Ok(BoRunResult { found_min, true_min, initial_min_y, fraction_steps, trajectory, selections })
}

/// `(1 - (found - true)/(initial - true)) + (1 - fraction)`.
pub fn score(result: &BoRunResult) -> Result<f64, BoError> {
    let denom = result.initial_min_y - result.true_min;
    if denom == 0.0 {
        return Err(BoError::ZeroDenominator);
    }
    let reached = 1.0 - (result.found_min - result.true_min).abs() / denom;
    let speed = 1.0 - result.fraction_steps;
    Ok(reached + speed)
}

/// Mean score and the per-result score vector.
pub fn aggregate_score(results: &[BoRunResult]) -> Result<(f64, Vec<f64>), BoError> {
    if results.is_empty() {
        return Err(BoError::Empty);
    }
    let scores = results.iter().map(score).collect::<Result<Vec<_>, _>>()?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok((mean, scores))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub values: Vec<f64>,
}

/// Regret normalised by the initial regret, clamped to `[0, 1]`.
pub fn regret_curve(result: &BoRunResult) -> Result<RegretCurve, BoError> {
    let denom = result.initial_min_y - result.true_min;
    if denom == 0.0 {
        return Err(BoError::ZeroDenominator);
    }
    Ok(RegretCurve {
        values: result
            .trajectory
            .iter()
            .map(|y| ((y - result.true_min) / denom).clamp(0.0, 1.0))
            .collect(),
    })
}

/// One row of the per-run regret CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub experiment: String,
    pub af: String,
    pub instance_seed: u64,
    pub trial: usize,
    pub normalized_regret: f64,
}

impl CurveRow {
    pub fn from_curve(experiment: &str, af: &str, instance_seed: u64, curve: &RegretCurve) -> Vec<Self> {
        curve
            .values
            .iter()
            .enumerate()
            .map(|(trial, &v)| CurveRow {
                experiment: experiment.to_string(),
                af: af.to_string(),
                instance_seed,
                trial,
                normalized_regret: v,
            })
            .collect()
    }
}

/// Mean regret with a band of half a standard deviation either side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub af: String,
    pub trial: usize,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn write_curves<W: io::Write>(out: W, rows: &[CurveRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves<R: io::Read>(input: R) -> Result<Vec<CurveRow>, csv::Error> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input).deserialize().collect()
}

/// Groups rows by `(experiment, af, trial)`; the std is the population one.
pub fn summarize(rows: &[CurveRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(&str, &str, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.experiment, &r.af, r.trial)).or_default().push(r.normalized_regret);
    }
    groups
        .into_iter()
        .map(|((experiment, af, trial), v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            SummaryRow {
                experiment: experiment.to_string(),
                af: af.to_string(),
                trial,
                runs: v.len(),
                mean,
                std,
                lower: mean - std / 2.0,
                upper: mean + std / 2.0,
            }
        })
        .collect()
}

pub fn write_summary<W: io::Write>(out: W, rows: &[SummaryRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
