//! Island-model program population.
//!
//! Each island groups its programs into clusters of identical score
//! signatures. Sampling picks an island uniformly, a cluster by a softmax over
//! cluster scores and a program by a softmax favouring short programs.

use crate::afdsl::Program;
use crate::seeds;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::{self, BufRead};
use thiserror::Error;

pub const DEFAULT_TAU_SCORE: f64 = 0.1;
pub const DEFAULT_TAU_LEN: f64 = 1.0;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("island count must be even and at least 2, got {0}")]
    IslandCount(usize),
    #[error("unknown island {0}")]
    UnknownIsland(usize),
    #[error("the store holds no programs")]
    Empty,
    #[error("empty score signature")]
    EmptySignature,
    #[error("percentile must lie in (0, 1], got {0}")]
    Percentile(f64),
    #[error("archive line {line}: {msg}")]
    Archive { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Content hash of canonical program text.
pub fn program_id(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredProgram {
    pub id: String,
    pub program: Program,
    pub signature: Vec<f64>,
    pub aggregate: f64,
    pub length: usize,
    pub birth_iteration: u64,
    pub parent_ids: Vec<String>,
}

impl ScoredProgram {
    pub fn new(
        program: Program,
        signature: Vec<f64>,
        birth_iteration: u64,
        parent_ids: Vec<String>,
    ) -> Result<Self, DbError> {
        if signature.is_empty() {
            return Err(DbError::EmptySignature);
        }
        let text = program.render();
        let aggregate = signature.iter().sum::<f64>() / signature.len() as f64;
        Ok(Self {
            id: program_id(&text),
            length: text.chars().count(),
            program,
            signature,
            aggregate,
            birth_iteration,
            parent_ids,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Cluster {
    pub signature: Vec<f64>,
    pub aggregate: f64,
    pub programs: Vec<ScoredProgram>,
}

#[derive(Clone, Debug, Default)]
pub struct Island {
    pub clusters: Vec<Cluster>,
    best: Option<ScoredProgram>,
}

impl Island {
    pub fn best(&self) -> Option<&ScoredProgram> {
        self.best.as_ref()
    }

    pub fn len(&self) -> usize {
        self.clusters.iter().map(|c| c.programs.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    fn add(&mut self, prog: ScoredProgram) {
        if self.best.as_ref().is_none_or(|b| prog.aggregate > b.aggregate) {
            self.best = Some(prog.clone());
        }
        match self.clusters.iter_mut().find(|c| c.signature == prog.signature) {
            Some(c) => c.programs.push(prog),
            None => self.clusters.push(Cluster {
                signature: prog.signature.clone(),
                aggregate: prog.aggregate,
                programs: vec![prog],
            }),
        }
    }
}

/// One line of the append-only archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ArchiveRecord {
    Insert {
        id: String,
        dsl_text: String,
        signature: Vec<f64>,
        aggregate: f64,
        island: usize,
        birth_iteration: u64,
        parent_ids: Vec<String>,
    },
    Clear {
        island: usize,
    },
}

impl ArchiveRecord {
    fn insert(p: &ScoredProgram, island: usize) -> Self {
        ArchiveRecord::Insert {
            id: p.id.clone(),
            dsl_text: p.program.render(),
            signature: p.signature.clone(),
            aggregate: p.aggregate,
            island,
            birth_iteration: p.birth_iteration,
            parent_ids: p.parent_ids.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IslandStore {
    islands: Vec<Island>,
    pub tau_score: f64,
    pub tau_len: f64,
    log: Vec<ArchiveRecord>,
}

impl IslandStore {
    /// `n_islands` islands, each holding `seed`.
    pub fn init(n_islands: usize, seed: ScoredProgram) -> Result<Self, DbError> {
        let mut store = Self::empty(n_islands)?;
        for i in 0..n_islands {
            store.insert(seed.clone(), i)?;
        }
        Ok(store)
    }

    fn empty(n_islands: usize) -> Result<Self, DbError> {
        if n_islands < 2 || n_islands % 2 != 0 {
            return Err(DbError::IslandCount(n_islands));
        }
        Ok(Self {
            islands: vec![Island::default(); n_islands],
            tau_score: DEFAULT_TAU_SCORE,
            tau_len: DEFAULT_TAU_LEN,
            log: Vec::new(),
        })
    }

    pub fn islands(&self) -> &[Island] {
        &self.islands
    }

    pub fn len(&self) -> usize {
        self.islands.iter().map(Island::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every mutation since construction, in order.
    pub fn log(&self) -> &[ArchiveRecord] {
        &self.log
    }

    /// Drains the mutation log.
    pub fn take_log(&mut self) -> Vec<ArchiveRecord> {
        std::mem::take(&mut self.log)
    }

    pub fn programs(&self) -> impl Iterator<Item = (usize, &ScoredProgram)> {
        self.islands
            .iter()
            .enumerate()
            .flat_map(|(i, isl)| isl.clusters.iter().flat_map(move |c| c.programs.iter().map(move |p| (i, p))))
    }

    /// Highest aggregate across islands (lowest island index on ties).
    pub fn best(&self) -> Option<&ScoredProgram> {
        let mut best: Option<&ScoredProgram> = None;
        for b in self.islands.iter().filter_map(Island::best) {
            if best.is_none_or(|x| b.aggregate > x.aggregate) {
                best = Some(b);
            }
        }
        best
    }

    pub fn insert(&mut self, prog: ScoredProgram, island: usize) -> Result<(), DbError> {
        let isl = self.islands.get_mut(island).ok_or(DbError::UnknownIsland(island))?;
        self.log.push(ArchiveRecord::insert(&prog, island));
        isl.add(prog);
        Ok(())
    }

    /// Two independent draws from one uniformly chosen island.
    pub fn sample_pair(&self, rng_seed: u64) -> Result<(ScoredProgram, ScoredProgram, usize), DbError> {
        let mut rng = seeds::rng(rng_seed);
        let candidates: Vec<usize> = (0..self.islands.len()).filter(|&i| !self.islands[i].is_empty()).collect();
        if candidates.is_empty() {
            return Err(DbError::Empty);
        }
        let island = candidates[rng.random_range(0..candidates.len())];
        let a = self.sample_from(island, &mut rng);
        let b = self.sample_from(island, &mut rng);
        Ok((a, b, island))
    }

    /// Probabilities with which each cluster of `island` is drawn.
    pub fn cluster_probabilities(&self, island: usize) -> Vec<f64> {
        let scores: Vec<f64> = self.islands[island].clusters.iter().map(|c| c.aggregate).collect();
        softmax(&scores, self.tau_score)
    }

    fn sample_from<R: Rng>(&self, island: usize, rng: &mut R) -> ScoredProgram {
        let isl = &self.islands[island];
        let c = &isl.clusters[draw(&self.cluster_probabilities(island), rng)];
        let lens: Vec<f64> = c.programs.iter().map(|p| p.length as f64).collect();
        let (lo, hi) = lens.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        let neg_norm: Vec<f64> =
            lens.iter().map(|l| if hi > lo { -(l - lo) / (hi - lo) } else { 0.0 }).collect();
        c.programs[draw(&softmax(&neg_norm, self.tau_len), rng)].clone()
    }

    /// Empties the worse half of the islands and reseeds each with the best
    /// program of a uniformly chosen survivor.
    pub fn reset(&mut self, rng_seed: u64) {
        let mut rng = seeds::rng(rng_seed);
        let mut order: Vec<usize> = (0..self.islands.len()).collect();
        let key = |i: usize| self.islands[i].best().map_or(f64::NEG_INFINITY, |b| b.aggregate);
        // Stable sort keeps the lower index ahead on ties.
        order.sort_by(|&a, &b| key(b).total_cmp(&key(a)));
        let half = self.islands.len() / 2;
        let (survivors, doomed) = order.split_at(half);
        let survivors = survivors.to_vec();
        let mut doomed = doomed.to_vec();
        doomed.sort_unstable();
        for island in doomed {
            let donor = survivors[rng.random_range(0..survivors.len())];
            let seed = self.islands[donor].best().cloned();
            self.islands[island] = Island::default();
            self.log.push(ArchiveRecord::Clear { island });
            if let Some(seed) = seed {
                self.log.push(ArchiveRecord::insert(&seed, island));
                self.islands[island].add(seed);
            }
        }
    }

    /// Distinct programs whose aggregate reaches the `(1 - percentile)`
    /// quantile (lower interpolation).
    pub fn qualified(&self, percentile: f64) -> Result<Vec<&ScoredProgram>, DbError> {
        if !(percentile > 0.0 && percentile <= 1.0) {
            return Err(DbError::Percentile(percentile));
        }
        let mut seen = std::collections::HashSet::new();
        let unique: Vec<&ScoredProgram> =
            self.programs().map(|(_, p)| p).filter(|p| seen.insert(p.id.as_str())).collect();
        if unique.is_empty() {
            return Err(DbError::Empty);
        }
        let mut sorted: Vec<f64> = unique.iter().map(|p| p.aggregate).collect();
        sorted.sort_by(f64::total_cmp);
        let pos = ((1.0 - percentile) * (sorted.len() - 1) as f64).floor() as usize;
        let threshold = sorted[pos];
        Ok(unique.into_iter().filter(|p| p.aggregate >= threshold).collect())
    }

    /// Qualified program with the best validation score, or the best training
    /// aggregate when no qualified program has one.
    pub fn best_by_rule(
        &self,
        validation: &HashMap<String, f64>,
        percentile: f64,
    ) -> Result<ScoredProgram, DbError> {
        let qualified = self.qualified(percentile)?;
        let mut pick: Option<(&ScoredProgram, f64)> = None;
        for p in &qualified {
            if let Some(&v) = validation.get(&p.id) {
                if pick.is_none_or(|(_, b)| v > b) {
                    pick = Some((p, v));
                }
            }
        }
        if let Some((p, _)) = pick {
            return Ok(p.clone());
        }
        let mut best = qualified[0];
        for p in &qualified[1..] {
            if p.aggregate > best.aggregate {
                best = p;
            }
        }
        Ok(best.clone())
    }

    /// Rebuilds a store by replaying archive records.
    pub fn replay(n_islands: usize, records: &[ArchiveRecord]) -> Result<Self, DbError> {
        let mut store = Self::empty(n_islands)?;
        for (line, rec) in records.iter().enumerate() {
            match rec {
                ArchiveRecord::Clear { island } => {
                    let isl = store.islands.get_mut(*island).ok_or(DbError::UnknownIsland(*island))?;
                    *isl = Island::default();
                    store.log.push(rec.clone());
                }
                ArchiveRecord::Insert { dsl_text, signature, island, birth_iteration, parent_ids, .. } => {
                    let program = crate::afdsl::parse(dsl_text)
                        .map_err(|e| DbError::Archive { line: line + 1, msg: e.to_string() })?;
                    let p = ScoredProgram::new(program, signature.clone(), *birth_iteration, parent_ids.clone())?;
                    store.insert(p, *island)?;
                }
            }
        }
        Ok(store)
    }
}

/// Writes records as JSON lines.
pub fn write_archive<W: io::Write>(mut out: W, records: &[ArchiveRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_archive<R: BufRead>(input: R) -> Result<Vec<ArchiveRecord>, DbError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| DbError::Archive { line: i + 1, msg: e.to_string() })?,
        );
    }
    Ok(out)
}

/// `exp((x_i - max x) / tau)`, normalised.
pub fn softmax(xs: &[f64], tau: f64) -> Vec<f64> {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = xs.iter().map(|x| ((x - m) / tau).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn draw<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    WeightedIndex::new(weights).expect("softmax weights are positive").sample(rng)
}
