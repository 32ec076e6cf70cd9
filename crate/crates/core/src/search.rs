//! The evolutionary outer loop: sample two programs from an island, prompt
//! the mutator, score each candidate by full BO runs on the training
//! functions and insert the correct ones.

use crate::afdsl::{self, Program};
use crate::bo::{self, AfProgram, BoError, BoOptions};
use crate::mutation::{build_prompt, Mutator, MutatorConfig};
use crate::objectives::presets::{NamedInstance, PresetFile};
use crate::objectives::{ObjectiveError, ObjectiveInstance};
use crate::programs_db::{self, DbError, IslandStore, ScoredProgram, DEFAULT_TAU_LEN, DEFAULT_TAU_SCORE};
use crate::seeds;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("seed program failed on the training functions: {0}")]
    SeedFailed(BoError),
    #[error(transparent)]
    Mutation(#[from] crate::mutation::MutationError),
    #[error(transparent)]
    Db(#[from] DbError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budget {
    pub iterations: Option<u64>,
    pub wall_clock_secs: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self { iterations: Some(1000), wall_clock_secs: None }
    }
}

/// A fully resolved search.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub train: Vec<NamedInstance>,
    pub validation: Vec<NamedInstance>,
    pub n_islands: usize,
    /// Candidates requested per iteration.
    pub batch: usize,
    pub budget: Budget,
    pub trials: usize,
    pub percentile: f64,
    pub seed: u64,
    /// Iterations between island resets; 0 disables resets.
    pub reset_every: u64,
    pub candidate_timeout: Option<Duration>,
    pub tau_score: f64,
    pub tau_len: f64,
    pub seed_program: Program,
    /// Directory for `archive.jsonl` and `report.json`.
    pub output_dir: Option<PathBuf>,
}

impl SearchConfig {
    /// Defaults for everything but the function sets.
    pub fn new(train: Vec<NamedInstance>, validation: Vec<NamedInstance>) -> Self {
        Self {
            train,
            validation,
            n_islands: 10,
            batch: 12,
            budget: Budget::default(),
            trials: 30,
            percentile: 0.2,
            seed: 0,
            reset_every: 500,
            candidate_timeout: Some(Duration::from_secs(60)),
            tau_score: DEFAULT_TAU_SCORE,
            tau_len: DEFAULT_TAU_LEN,
            seed_program: Program::expected_improvement(),
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::Config(m.to_string()));
        if self.train.is_empty() {
            return bad("the training set is empty");
        }
        for t in &self.train {
            if self.validation.iter().any(|v| v.label == t.label) {
                return Err(SearchError::Config(format!("{} is both a training and a validation function", t.label)));
            }
        }
        if self.batch == 0 {
            return bad("batch must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(self.percentile > 0.0 && self.percentile <= 1.0) {
            return bad("percentile must lie in (0, 1]");
        }
        if self.budget.iterations.is_none() && self.budget.wall_clock_secs.is_none() {
            return bad("budget needs iterations or wall_clock_secs");
        }
        if self.budget.wall_clock_secs.is_some_and(|s| !(s >= 0.0)) {
            return bad("wall_clock_secs must be non-negative");
        }
        if !(self.tau_score > 0.0 && self.tau_len > 0.0) {
            return bad("temperatures must be positive");
        }
        if self.n_islands < 2 || self.n_islands % 2 != 0 {
            return bad("islands must be an even number of at least 2");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub program: String,
    pub program_id: String,
    pub train_aggregate: f64,
    pub validation_aggregate: Option<f64>,
    pub iterations: u64,
    pub proposed: u64,
    pub correct: u64,
    pub incorrect: u64,
    pub resets: u64,
    /// Best aggregate in the store after each iteration.
    pub best_series: Vec<f64>,
    pub archive: Option<PathBuf>,
}

/// Per-function scores and their mean. Any failing run fails the candidate.
pub fn score_candidate(
    prog: &AfProgram,
    functions: &[ObjectiveInstance],
    trials: usize,
    seed: u64,
    timeout: Option<Duration>,
) -> Result<(Vec<f64>, f64), BoError> {
    if functions.is_empty() {
        return Err(BoError::Empty);
    }
    let opts = BoOptions { deadline: timeout.map(|t| Instant::now() + t), ..BoOptions::default() };
    let run = |(j, g): (usize, &ObjectiveInstance)| {
        bo::run_bo_with(g, prog, trials, seeds::derive(seed, &[j as u64]), &opts)
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<_> = {
        use rayon::prelude::*;
        functions.par_iter().enumerate().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = functions.iter().enumerate().map(run).collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    bo::aggregate_score(&runs).map(|(mean, scores)| (scores, mean))
}

const TAG_SAMPLE: u64 = 1;
const TAG_PROPOSE: u64 = 2;
const TAG_RESET: u64 = 3;
const TAG_SCORE: u64 = 4;

struct Archive {
    out: Option<BufWriter<File>>,
    path: Option<PathBuf>,
}

impl Archive {
    fn open(dir: Option<&Path>) -> io::Result<Self> {
        let Some(dir) = dir else {
            return Ok(Self { out: None, path: None });
        };
        fs::create_dir_all(dir)?;
        let path = dir.join("archive.jsonl");
        Ok(Self { out: Some(BufWriter::new(File::create(&path)?)), path: Some(path) })
    }

    fn flush(&mut self, store: &mut IslandStore) -> io::Result<()> {
        let records = store.take_log();
        if let Some(out) = &mut self.out {
            programs_db::write_archive(&mut *out, &records)?;
            out.flush()?;
        }
        Ok(())
    }
}

fn instances(v: &[NamedInstance]) -> Vec<ObjectiveInstance> {
    v.iter().map(|n| n.instance.clone()).collect()
}

/// Runs the search with `mutator` until the budget is spent, then returns
/// the qualified program with the best validation score.
pub fn run_search(cfg: &SearchConfig, mutator: &dyn Mutator) -> Result<SearchReport, SearchError> {
    cfg.validate()?;
    let started = Instant::now();
    let train = instances(&cfg.train);
    let score_seed = seeds::derive(cfg.seed, &[TAG_SCORE]);

    let seed_af = AfProgram::Dsl(cfg.seed_program.clone());
    let (signature, _) = score_candidate(&seed_af, &train, cfg.trials, score_seed, None)
        .map_err(SearchError::SeedFailed)?;
    let seed_sp = ScoredProgram::new(cfg.seed_program.clone(), signature, 0, Vec::new())?;
    let mut store = IslandStore::init(cfg.n_islands, seed_sp)?;
    store.tau_score = cfg.tau_score;
    store.tau_len = cfg.tau_len;
    let mut archive = Archive::open(cfg.output_dir.as_deref())?;
    archive.flush(&mut store)?;

    let mut report = SearchReport {
        program: String::new(),
        program_id: String::new(),
        train_aggregate: f64::NAN,
        validation_aggregate: None,
        iterations: 0,
        proposed: 0,
        correct: 0,
        incorrect: 0,
        resets: 0,
        best_series: Vec::new(),
        archive: archive.path.clone(),
    };

    let out_of_budget = |iter: u64| {
        cfg.budget.iterations.is_some_and(|n| iter >= n)
            || cfg.budget.wall_clock_secs.is_some_and(|s| started.elapsed().as_secs_f64() >= s)
    };

    let mut iter = 0u64;
    while !out_of_budget(iter) {
        let (a, b, island) = store.sample_pair(seeds::derive(cfg.seed, &[TAG_SAMPLE, iter]))?;
        let prompt = build_prompt(&a, &b);
        let mut texts = match mutator.propose(&prompt, seeds::derive(cfg.seed, &[TAG_PROPOSE, iter]), cfg.batch) {
            Ok(t) => t,
            Err(e) if e.is_fatal() => return Err(e.into()),
            Err(e) => {
                log::error!("iteration {iter}: batch skipped: {e}");
                Vec::new()
            }
        };
        texts.truncate(cfg.batch);
        let parents = if a.id == b.id { vec![a.id.clone()] } else { vec![a.id.clone(), b.id.clone()] };

        let evaluate = |text: &String| -> Option<ScoredProgram> {
            let prog = afdsl::parse(text).ok()?;
            let af = AfProgram::Dsl(prog.clone());
            match score_candidate(&af, &train, cfg.trials, score_seed, cfg.candidate_timeout) {
                Ok((sig, _)) => ScoredProgram::new(prog, sig, iter + 1, parents.clone()).ok(),
                Err(e) => {
                    log::debug!("candidate rejected: {e}");
                    None
                }
            }
        };
        #[cfg(feature = "parallel")]
        let scored: Vec<Option<ScoredProgram>> = {
            use rayon::prelude::*;
            texts.par_iter().map(evaluate).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let scored: Vec<Option<ScoredProgram>> = texts.iter().map(evaluate).collect();

        let mut correct = 0u64;
        for sp in scored.iter().flatten() {
            store.insert(sp.clone(), island)?;
            correct += 1;
        }
        report.proposed += texts.len() as u64;
        report.correct += correct;
        report.incorrect += texts.len() as u64 - correct;
        iter += 1;

        if cfg.reset_every > 0 && iter % cfg.reset_every == 0 {
            store.reset(seeds::derive(cfg.seed, &[TAG_RESET, iter]));
            report.resets += 1;
        }
        let best = store.best().map_or(f64::NAN, |p| p.aggregate);
        report.best_series.push(best);
        archive.flush(&mut store)?;
        log::info!(
            "iter={iter} proposed={} correct={correct} best_aggregate={best:.6}",
            texts.len()
        );
    }
    report.iterations = iter;

    let validation = instances(&cfg.validation);
    let mut val_scores: HashMap<String, f64> = HashMap::new();
    if !validation.is_empty() {
        for p in store.qualified(cfg.percentile)? {
            let af = AfProgram::Dsl(p.program.clone());
            match score_candidate(&af, &validation, cfg.trials, score_seed, cfg.candidate_timeout) {
                Ok((_, mean)) => {
                    val_scores.insert(p.id.clone(), mean);
                }
                Err(e) => log::warn!("program {} failed validation: {e}", p.id),
            }
        }
    }
    let chosen = store.best_by_rule(&val_scores, cfg.percentile)?;
    report.program = chosen.program.render();
    report.validation_aggregate = val_scores.get(&chosen.id).copied();
    report.program_id = chosen.id;
    report.train_aggregate = chosen.aggregate;

    if let Some(dir) = &cfg.output_dir {
        let text = serde_json::to_string_pretty(&report).map_err(io::Error::other)?;
        fs::write(dir.join("report.json"), text + "\n")?;
    }
    Ok(report)
}

/// The on-disk form of a search, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchFile {
    pub preset: String,
    /// TOML file with extra `[[preset]]` tables, relative to the config file.
    #[serde(default)]
    pub preset_file: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_islands")]
    pub islands: usize,
    /// Defaults to the preset's trial count.
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    #[serde(default = "default_reset_every")]
    pub reset_every: u64,
    #[serde(default = "default_timeout")]
    pub candidate_timeout_secs: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub mutator: MutatorConfig,
}

fn default_islands() -> usize {
    10
}
fn default_percentile() -> f64 {
    0.2
}
fn default_reset_every() -> u64 {
    500
}
fn default_timeout() -> f64 {
    60.0
}

impl SearchFile {
    /// Parses TOML, reporting the field path of any error.
    pub fn parse(text: &str) -> Result<Self, SearchError> {
        let de = toml::Deserializer::parse(text).map_err(|e| SearchError::Config(e.to_string()))?;
        serde_path_to_error::deserialize(de)
            .map_err(|e| SearchError::Config(format!("{}: {}", e.path(), e.inner())))
    }

    pub fn load(path: &Path) -> Result<Self, SearchError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SearchError::Config(format!("{}: {e}", path.display())))?;
        let mut file = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(p) = &file.preset_file {
            file.preset_file = Some(base.join(p));
        }
        Ok(file)
    }

    /// Builds the instances and checks every field.
    pub fn resolve(&self) -> Result<SearchConfig, SearchError> {
        self.mutator.validate()?;
        let presets = match &self.preset_file {
            Some(p) => PresetFile::parse(
                &fs::read_to_string(p).map_err(|e| SearchError::Config(format!("{}: {e}", p.display())))?,
            )?,
            None => PresetFile::default(),
        };
        let preset = presets.resolve(&self.preset)?;
        preset.validate()?;
        let (train, validation) = preset.search_split(self.seed)?;
        if !(self.candidate_timeout_secs > 0.0) {
            return Err(SearchError::Config("candidate_timeout_secs must be positive".into()));
        }
        let cfg = SearchConfig {
            n_islands: self.islands,
            batch: self.mutator.samples_per_prompt,
            budget: self.budget.clone(),
            trials: self.trials.unwrap_or(preset.trials),
            percentile: self.percentile,
            seed: self.seed,
            reset_every: self.reset_every,
            candidate_timeout: Some(Duration::from_secs_f64(self.candidate_timeout_secs)),
            output_dir: self.output_dir.clone(),
            ..SearchConfig::new(train, validation)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
