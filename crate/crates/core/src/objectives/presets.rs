//! Built-in experiment presets and the instance sets they expand to.

use super::{sample_gp_objective, ObjectiveError, ObjectiveId, ObjectiveInstance, ObjectiveSpec, Transform};
use crate::gp::GpHyperparams;
use crate::seeds;
use crate::sobol;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Train,
    Validation,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformRanges {
    pub scale: (f64, f64),
    pub translation: (f64, f64),
}

impl TransformRanges {
    pub const IN_DISTRIBUTION: TransformRanges =
        TransformRanges { scale: (0.9, 1.1), translation: (-0.1, 0.1) };
    pub const FEW_SHOT_TEST: TransformRanges =
        TransformRanges { scale: (0.7, 1.3), translation: (-0.3, 0.3) };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetFunction {
    pub spec: ObjectiveSpec,
    pub role: Role,
}

/// Functions drawn from a GP prior on the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpPrior {
    pub dim: usize,
    pub grid_size: usize,
    pub lengthscale_range: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    #[serde(default)]
    pub functions: Vec<PresetFunction>,
    #[serde(default)]
    pub gp_prior: Option<GpPrior>,
    pub trials: usize,
    /// Ranges for the search-time instances of a single function class.
    #[serde(default)]
    pub train_ranges: Option<TransformRanges>,
    pub test_ranges: TransformRanges,
    /// Whether test instance 0 of every function is the untransformed one.
    #[serde(default)]
    pub identity_first: bool,
    #[serde(default)]
    pub train_count: usize,
    #[serde(default)]
    pub validation_count: usize,
}

/// An instance together with a label such as `branin#3`.
#[derive(Clone, Debug)]
pub struct NamedInstance {
    pub label: String,
    pub instance: ObjectiveInstance,
}

const TAG_TEST: u64 = 1;
const TAG_SEARCH: u64 = 2;

impl Preset {
    pub fn validate(&self) -> Result<(), ObjectiveError> {
        if self.trials == 0 {
            return Err(ObjectiveError::Spec(format!("preset {}: trials must be positive", self.name)));
        }
        if self.functions.is_empty() && self.gp_prior.is_none() {
            return Err(ObjectiveError::Spec(format!("preset {} defines no functions", self.name)));
        }
        for f in &self.functions {
            f.spec.validate()?;
        }
        Ok(())
    }

    fn with_role(&self, role: Role) -> impl Iterator<Item = (usize, &PresetFunction)> {
        self.functions.iter().enumerate().filter(move |(_, f)| f.role == role)
    }

    fn transformed(
        &self,
        fi: usize,
        f: &PresetFunction,
        ranges: &TransformRanges,
        seed: u64,
        tag: u64,
        i: usize,
        identity: bool,
    ) -> Result<NamedInstance, ObjectiveError> {
        let transform = if identity {
            Transform::identity(f.spec.dim)
        } else {
            let mut rng = seeds::rng(seeds::derive(seed, &[tag, fi as u64, i as u64]));
            Transform::sample(ranges, f.spec.dim, &mut rng)
        };
        let instance = ObjectiveInstance::new(f.spec.clone(), transform, seed)?;
        Ok(NamedInstance { label: format!("{}#{i}", f.spec.id), instance })
    }

    fn gp_samples(
        &self,
        prior: &GpPrior,
        n: usize,
        seed: u64,
        tag: u64,
    ) -> Result<Vec<NamedInstance>, ObjectiveError> {
        let grid = sobol::sobol_grid(&vec![(0.0, 1.0); prior.dim], prior.grid_size, prior.dim)?;
        (0..n)
            .map(|i| {
                let s = seeds::derive(seed, &[tag, i as u64]);
                Ok(NamedInstance {
                    label: format!("gp_sample#{i}"),
                    instance: sample_gp_objective(prior.dim, prior.lengthscale_range, s, &grid)?,
                })
            })
            .collect()
    }

    /// `n` evaluation instances of every test function.
    pub fn test_instances(&self, n: usize, seed: u64) -> Result<Vec<NamedInstance>, ObjectiveError> {
        if let Some(prior) = &self.gp_prior {
            return self.gp_samples(prior, n, seed, TAG_TEST);
        }
        let mut out = Vec::new();
        for (fi, f) in self.with_role(Role::Test) {
            for i in 0..n {
                let identity = self.identity_first && i == 0;
                out.push(self.transformed(fi, f, &self.test_ranges, seed, TAG_TEST, i, identity)?);
            }
        }
        Ok(out)
    }

    /// Training and validation instances for a search.
    pub fn search_split(
        &self,
        seed: u64,
    ) -> Result<(Vec<NamedInstance>, Vec<NamedInstance>), ObjectiveError> {
        if let Some(prior) = &self.gp_prior {
            let mut all = self.gp_samples(prior, self.train_count + self.validation_count, seed, TAG_SEARCH)?;
            let val = all.split_off(self.train_count);
            return Ok((all, val));
        }
        if let Some(ranges) = &self.train_ranges {
            let (fi, f) = self
                .with_role(Role::Test)
                .next()
                .ok_or_else(|| ObjectiveError::Spec(format!("preset {} has no function class", self.name)))?;
            let total = self.train_count + self.validation_count;
            let mut all = (0..total)
                .map(|i| self.transformed(fi, f, ranges, seed, TAG_SEARCH, i, false))
                .collect::<Result<Vec<_>, _>>()?;
            let val = all.split_off(self.train_count);
            return Ok((all, val));
        }
        let pick = |role| {
            self.with_role(role)
                .map(|(fi, f)| self.transformed(fi, f, &self.test_ranges, seed, TAG_SEARCH, 0, true))
                .collect::<Result<Vec<_>, _>>()
        };
        Ok((pick(Role::Train)?, pick(Role::Validation)?))
    }
}

fn iso(ls: f64, sf2: f64) -> GpHyperparams {
    GpHyperparams::isotropic(ls, sf2, 1e-5)
}

fn hartmann3_gp() -> GpHyperparams {
    GpHyperparams::ard(vec![0.716, 0.298, 0.186], 0.83, 1.688e-11)
}

fn ood_bench() -> Preset {
    use ObjectiveId::*;
    let rows: [(ObjectiveId, usize, GpHyperparams, Role); 13] = [
        (Ackley1d, 1000, iso(0.21, 28.19), Role::Train),
        (Levy1d, 1000, iso(1.05, 83.32), Role::Train),
        (Schwefel1d, 1000, iso(18.46, 76868.65), Role::Train),
        (Rosenbrock1d, 1000, iso(1.20, 87328.20), Role::Validation),
        (Sphere1d, 1000, iso(18.46, 924202.43), Role::Test),
        (StyblinskiTang1d, 1000, iso(7.34, 119522207.86), Role::Test),
        (Weierstrass1d, 1000, iso(0.01, 0.39), Role::Test),
        (Beale, 10000, iso(0.46, 546837.32), Role::Test),
        (Branin, 10000, iso(4.65, 155233.52), Role::Test),
        (Michalewicz, 10000, iso(0.22, 0.10), Role::Test),
        (GoldsteinPrice, 10000, iso(0.27, 117903.96), Role::Test),
        (Hartmann3, 1728, hartmann3_gp(), Role::Test),
        (Hartmann6, 729, iso(1.0, 1.0), Role::Test),
    ];
    Preset {
        name: "ood-bench".into(),
        functions: rows
            .into_iter()
            .map(|(id, n, gp, role)| PresetFunction { spec: ObjectiveSpec::native(id, n, gp), role })
            .collect(),
        gp_prior: None,
        trials: 30,
        train_ranges: None,
        test_ranges: TransformRanges::IN_DISTRIBUTION,
        identity_first: true,
        train_count: 0,
        validation_count: 0,
    }
}

fn single_class(name: &str, spec: ObjectiveSpec, train: TransformRanges, test: TransformRanges, train_count: usize, validation_count: usize) -> Preset {
    Preset {
        name: name.into(),
        functions: vec![PresetFunction { spec, role: Role::Test }],
        gp_prior: None,
        trials: 30,
        train_ranges: Some(train),
        test_ranges: test,
        identity_first: false,
        train_count,
        validation_count,
    }
}

fn id_bench(name: &str, id: ObjectiveId, n: usize, gp: GpHyperparams) -> Preset {
    single_class(
        name,
        ObjectiveSpec::unit_cube(id, n, gp),
        TransformRanges::IN_DISTRIBUTION,
        TransformRanges::IN_DISTRIBUTION,
        20,
        5,
    )
}

/// Names of the built-in presets.
pub fn preset_names() -> [&'static str; 6] {
    ["ood-bench", "id-bench-branin", "id-bench-gprice", "id-bench-hartmann3", "gps-id", "few-shot-ackley2d"]
}

/// Looks up a built-in preset by experiment name.
pub fn preset(name: &str) -> Result<Preset, ObjectiveError> {
    Ok(match name {
        "ood-bench" => ood_bench(),
        "id-bench-branin" => id_bench(
            name,
            ObjectiveId::Branin,
            961,
            GpHyperparams::ard(vec![0.235, 0.578], 2.0, 8.9e-16),
        ),
        "id-bench-gprice" => id_bench(
            name,
            ObjectiveId::GoldsteinPrice,
            961,
            GpHyperparams::ard(vec![0.130, 0.07], 0.616, 1e-6),
        ),
        "id-bench-hartmann3" => id_bench(name, ObjectiveId::Hartmann3, 1728, hartmann3_gp()),
        "gps-id" => Preset {
            name: name.into(),
            functions: Vec::new(),
            gp_prior: Some(GpPrior { dim: 3, grid_size: 1728, lengthscale_range: (0.05, 0.5) }),
            trials: 20,
            train_ranges: None,
            test_ranges: TransformRanges::IN_DISTRIBUTION,
            identity_first: false,
            train_count: 25,
            validation_count: 0,
        },
        "few-shot-ackley2d" => single_class(
            name,
            ObjectiveSpec::unit_cube(
                ObjectiveId::Ackley2d,
                1000,
                GpHyperparams::ard(vec![0.07, 0.018], 1.0, 8.9e-16),
            ),
            TransformRanges::IN_DISTRIBUTION,
            TransformRanges::FEW_SHOT_TEST,
            5,
            0,
        ),
        _ => return Err(ObjectiveError::UnknownPreset(name.to_string())),
    })
}

/// User-supplied presets, read from TOML as `[[preset]]` tables.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PresetFile {
    #[serde(default, rename = "preset")]
    pub presets: Vec<Preset>,
}

impl PresetFile {
    pub fn parse(text: &str) -> Result<Self, ObjectiveError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ObjectiveError::Spec(e.to_string()))?;
        let file: PresetFile = serde_path_to_error::deserialize(de)
            .map_err(|e| ObjectiveError::Spec(format!("{}: {}", e.path(), e.inner())))?;
        for p in &file.presets {
            p.validate()?;
        }
        Ok(file)
    }

    /// Resolves `name`, preferring user presets over the built-in ones.
    pub fn resolve(&self, name: &str) -> Result<Preset, ObjectiveError> {
        match self.presets.iter().find(|p| p.name == name) {
            Some(p) => Ok(p.clone()),
            None => preset(name),
        }
    }
}
