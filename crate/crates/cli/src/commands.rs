use afsearch::acquisition::AfId;
use afsearch::bo::{self, AfProgram, BoOptions, CurveRow};
use afsearch::mutation::MutatorKind;
use afsearch::objectives::presets::{NamedInstance, PresetFile};
use afsearch::search::{self, SearchFile};
use afsearch::seeds;
use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub struct EvalArgs {
    pub af: String,
    pub preset: String,
    pub preset_file: Option<PathBuf>,
    pub trials: Option<usize>,
    pub instances: usize,
    pub seed: u64,
    pub beta: f64,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'a str,
    command: &'a str,
    af: String,
    preset: &'a str,
    trials: usize,
    instances: usize,
    seed: u64,
    beta: f64,
    runs: usize,
    curves: &'a str,
    summary: &'a str,
    elapsed_secs: f64,
}

/// A builtin name, a path to a program file, or inline program text.
pub fn resolve_af(spec: &str) -> Result<AfProgram> {
    let path = Path::new(spec);
    let text = if path.is_file() {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else {
        spec.to_string()
    };
    AfProgram::parse(&text).map_err(|e| {
        anyhow!("`{spec}` is neither a builtin acquisition function nor a valid program: {e}")
    })
}

fn load_presets(path: Option<&Path>) -> Result<PresetFile> {
    match path {
        None => Ok(PresetFile::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(PresetFile::parse(&text)?)
        }
    }
}

fn experiment_name(preset: &str, inst: &NamedInstance) -> String {
    let class = inst.label.split('#').next().unwrap_or(&inst.label);
    format!("{preset}/{class}")
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let started = Instant::now();
    let af = resolve_af(&args.af)?;
    let preset = load_presets(args.preset_file.as_deref())?.resolve(&args.preset)?;
    preset.validate()?;
    let trials = args.trials.unwrap_or(preset.trials);
    let instances = preset.test_instances(args.instances, args.seed)?;
    let opts = BoOptions { beta: args.beta, ..BoOptions::default() };
    let af_name = af.text();

    let rows: Vec<Vec<CurveRow>> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| -> Result<Vec<CurveRow>> {
            let run_seed = seeds::derive(args.seed, &[k as u64]);
            let result = bo::run_bo_with(&inst.instance, &af, trials, run_seed, &opts)
                .with_context(|| format!("BO run on {}", inst.label))?;
            let curve = bo::regret_curve(&result).with_context(|| format!("regret on {}", inst.label))?;
            Ok(CurveRow::from_curve(&experiment_name(&preset.name, inst), &af_name, k as u64, &curve))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<CurveRow> = rows.into_iter().flatten().collect();

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let curves = args.out.join("curves.csv");
    let summary = args.out.join("summary.csv");
    bo::write_curves(BufWriter::new(File::create(&curves)?), &rows)?;
    bo::write_summary(BufWriter::new(File::create(&summary)?), &bo::summarize(&rows))?;

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        command: "eval",
        af: af_name,
        preset: &preset.name,
        trials,
        instances: args.instances,
        seed: args.seed,
        beta: args.beta,
        runs: instances.len(),
        curves: "curves.csv",
        summary: "summary.csv",
        elapsed_secs: started.elapsed().as_secs_f64(),
    };
    fs::write(args.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    println!("{} runs written to {}", instances.len(), args.out.display());
    Ok(())
}

pub fn list_afs(out: &mut impl Write) -> std::io::Result<()> {
    let w = AfId::ALL.iter().map(|id| id.origin().chars().count()).max().unwrap_or(0);
    writeln!(out, "{:<16} {:<w$}  summary", "name", "origin")?;
    for id in AfId::ALL {
        writeln!(out, "{:<16} {:<w$}  {}", id.name(), id.origin(), id.summary())?;
    }
    Ok(())
}

pub fn export_curves(input: &Path, out: &Path) -> Result<()> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let rows = bo::read_curves(BufReader::new(file)).with_context(|| format!("parsing {}", input.display()))?;
    let summary = bo::summarize(&rows);
    bo::write_summary(BufWriter::new(File::create(out)?), &summary)?;
    println!("{} summary rows written to {}", summary.len(), out.display());
    Ok(())
}

fn load_search(path: &Path) -> Result<(SearchFile, search::SearchConfig)> {
    let file = SearchFile::load(path)?;
    let cfg = file.resolve()?;
    Ok((file, cfg))
}

pub fn validate_config(path: &Path) -> Result<()> {
    let (file, cfg) = load_search(path)?;
    if file.mutator.kind == MutatorKind::Remote {
        file.mutator.build()?;
    }
    println!(
        "ok: preset {} with {} training and {} validation functions, {} islands, batch {}, T = {}",
        file.preset,
        cfg.train.len(),
        cfg.validation.len(),
        cfg.n_islands,
        cfg.batch,
        cfg.trials
    );
    Ok(())
}

pub fn search(path: &Path, out: Option<PathBuf>) -> Result<()> {
    let (file, mut cfg) = load_search(path)?;
    if out.is_some() {
        cfg.output_dir = out;
    }
    let mutator = file.mutator.build()?;
    let report = search::run_search(&cfg, mutator.as_ref())?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
