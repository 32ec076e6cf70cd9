//! Browser demo: run BO on a 1D benchmark with any acquisition function,
//! check a program, and generate local mutations of it.
//!
//! Every export returns a JSON string so the page needs no generated types.

use afsearch::bo::{self, AfProgram};
use afsearch::gp;
use afsearch::mutation::{build_prompt, LocalMutator, Mutator};
use afsearch::objectives::{preset, ObjectiveInstance, ObjectiveSpec, Transform};
use afsearch::programs_db::ScoredProgram;
use afsearch::{afdsl, Dataset, Matrix};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const DEMO_GRID: usize = 300;

#[derive(Serialize)]
struct BoTrace {
    x: Vec<f64>,
    y: Vec<f64>,
    selections: Vec<usize>,
    initial: usize,
    regret: Vec<f64>,
    mean: Vec<f64>,
    std: Vec<f64>,
    found_min: f64,
    true_min: f64,
}

#[derive(Serialize)]
struct ProgramInfo {
    canonical: String,
    nodes: usize,
    depth: usize,
    length: usize,
}

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json(v: &impl Serialize) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(err)
}

fn one_d_specs() -> Vec<ObjectiveSpec> {
    preset("ood-bench")
        .map(|p| p.functions.into_iter().map(|f| f.spec).filter(|s| s.dim == 1).collect())
        .unwrap_or_default()
}

/// Names of the 1D objectives offered by the page.
#[wasm_bindgen]
pub fn objectives() -> String {
    let names: Vec<String> = one_d_specs().iter().map(|s| s.id.to_string()).collect();
    serde_json::to_string(&names).unwrap_or_default()
}

fn instance(name: &str) -> Result<ObjectiveInstance, JsValue> {
    let mut spec = one_d_specs()
        .into_iter()
        .find(|s| s.id.to_string() == name)
        .ok_or_else(|| err(format!("unknown objective `{name}`")))?;
    spec.grid_size = DEMO_GRID;
    ObjectiveInstance::new(spec, Transform::identity(1), 0).map_err(err)
}

/// Runs BO and returns the grid, the observations, the regret curve and
/// the posterior after the last observation.
#[wasm_bindgen]
pub fn run_bo(objective: &str, af: &str, trials: u32, seed: u64) -> Result<String, JsValue> {
    let inst = instance(objective)?;
    let prog = AfProgram::parse(af).map_err(err)?;
    let result = bo::run_bo(&inst, &prog, trials as usize, seed).map_err(err)?;
    let regret = bo::regret_curve(&result).map_err(err)?.values;

    let grid = inst.grid();
    let mut picked = vec![inst.initial_index()];
    picked.extend(&result.selections);
    let rows: Vec<&[f64]> = picked.iter().map(|&i| grid.row(i)).collect();
    let ys = picked.iter().map(|&i| inst.values()[i]).collect();
    let data = Dataset::new(Matrix::from_rows(&rows), ys).map_err(err)?;
    let post = gp::fit_predict(&data, grid, inst.gp_hyperparams()).map_err(err)?;

    to_json(&BoTrace {
        x: (0..grid.rows()).map(|i| grid.get(i, 0)).collect(),
        y: inst.values().to_vec(),
        selections: result.selections.clone(),
        initial: inst.initial_index(),
        regret,
        mean: post.mean,
        std: post.variance.iter().map(|v| v.sqrt()).collect(),
        found_min: result.found_min,
        true_min: result.true_min,
    })
}

/// Parses a program and returns its canonical form and size.
#[wasm_bindgen]
pub fn check_program(text: &str) -> Result<String, JsValue> {
    let p = afdsl::parse(text).map_err(err)?;
    to_json(&ProgramInfo { canonical: p.render(), nodes: p.node_count(), depth: p.depth(), length: p.length() })
}

/// `n` local mutations of `text`, deterministic in `seed`.
#[wasm_bindgen]
pub fn mutate(text: &str, seed: u64, n: u32) -> Result<String, JsValue> {
    let p = afdsl::parse(text).map_err(err)?;
    let sp = ScoredProgram::new(p, vec![0.0], 0, Vec::new()).map_err(err)?;
    let prompt = build_prompt(&sp, &sp);
    let out = LocalMutator::default().propose(&prompt, seed, n as usize).map_err(err)?;
    to_json(&out)
}
