//! Benchmark objectives, their scale/translation instances, GP-prior samples
//! and lookup tables, all materialised on a Sobol grid.

pub mod functions;
pub mod presets;

use crate::gp::{Dataset, GpError, GpHyperparams};
use crate::linalg::{GrowingCholesky, Matrix};
use crate::seeds;
use crate::sobol::{self, SobolError};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use presets::{preset, preset_names, Preset, PresetFunction, Role, TransformRanges};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("expected a {expected}-dimensional point, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid objective spec: {0}")]
    Spec(String),
    #[error("empty value table")]
    EmptyTable,
    #[error("non-finite table value at index {0}")]
    NonFinite(usize),
    #[error("unknown objective `{0}`")]
    UnknownId(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Sobol(#[from] SobolError),
    #[error("GP prior sampling failed: {0}")]
    Gp(#[from] GpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveId {
    Ackley1d,
    Levy1d,
    Schwefel1d,
    Rosenbrock1d,
    Sphere1d,
    StyblinskiTang1d,
    Weierstrass1d,
    Ackley2d,
    Beale,
    Branin,
    Michalewicz,
    GoldsteinPrice,
    Hartmann3,
    Hartmann6,
    GpSample,
    TableLookup,
}

impl ObjectiveId {
    pub const ALL: [ObjectiveId; 16] = [
        ObjectiveId::Ackley1d,
        ObjectiveId::Levy1d,
        ObjectiveId::Schwefel1d,
        ObjectiveId::Rosenbrock1d,
        ObjectiveId::Sphere1d,
        ObjectiveId::StyblinskiTang1d,
        ObjectiveId::Weierstrass1d,
        ObjectiveId::Ackley2d,
        ObjectiveId::Beale,
        ObjectiveId::Branin,
        ObjectiveId::Michalewicz,
        ObjectiveId::GoldsteinPrice,
        ObjectiveId::Hartmann3,
        ObjectiveId::Hartmann6,
        ObjectiveId::GpSample,
        ObjectiveId::TableLookup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveId::Ackley1d => "ackley1d",
            ObjectiveId::Levy1d => "levy1d",
            ObjectiveId::Schwefel1d => "schwefel1d",
            ObjectiveId::Rosenbrock1d => "rosenbrock1d",
            ObjectiveId::Sphere1d => "sphere1d",
            ObjectiveId::StyblinskiTang1d => "styblinski_tang1d",
            ObjectiveId::Weierstrass1d => "weierstrass1d",
            ObjectiveId::Ackley2d => "ackley2d",
            ObjectiveId::Beale => "beale",
            ObjectiveId::Branin => "branin",
            ObjectiveId::Michalewicz => "michalewicz",
            ObjectiveId::GoldsteinPrice => "goldstein_price",
            ObjectiveId::Hartmann3 => "hartmann3",
            ObjectiveId::Hartmann6 => "hartmann6",
            ObjectiveId::GpSample => "gp_sample",
            ObjectiveId::TableLookup => "table_lookup",
        }
    }

    /// Canonical dimensionality; `None` for the data-defined objectives.
    pub fn canonical_dim(self) -> Option<usize> {
        use ObjectiveId::*;
        match self {
            Ackley1d | Levy1d | Schwefel1d | Rosenbrock1d | Sphere1d | StyblinskiTang1d
            | Weierstrass1d => Some(1),
            Ackley2d | Beale | Branin | Michalewicz | GoldsteinPrice => Some(2),
            Hartmann3 => Some(3),
            Hartmann6 => Some(6),
            GpSample | TableLookup => None,
        }
    }

    /// Box on which the analytic function is defined.
    pub fn native_domain(self) -> Option<Vec<(f64, f64)>> {
        use std::f64::consts::PI;
        use ObjectiveId::*;
        Some(match self {
            Ackley1d => vec![(-4.0, 4.0)],
            Levy1d => vec![(-10.0, 10.0)],
            Schwefel1d => vec![(-500.0, 500.0)],
            Rosenbrock1d => vec![(-5.0, 10.0)],
            Sphere1d => vec![(-5.0, 5.0)],
            StyblinskiTang1d => vec![(-5.0, 5.0)],
            Weierstrass1d => vec![(-0.5, 0.5)],
            Ackley2d => vec![(-32.768, 32.768); 2],
            Beale => vec![(-4.0, 5.0); 2],
            Branin => vec![(-5.0, 10.0), (0.0, 15.0)],
            Michalewicz => vec![(0.0, PI); 2],
            GoldsteinPrice => vec![(-2.0, 2.0); 2],
            Hartmann3 => vec![(0.0, 1.0); 3],
            Hartmann6 => vec![(0.0, 1.0); 6],
            GpSample | TableLookup => return None,
        })
    }

    fn analytic(self) -> Option<fn(&[f64]) -> f64> {
        use functions::*;
        use ObjectiveId::*;
        Some(match self {
            Ackley1d | Ackley2d => ackley,
            Levy1d => levy,
            Schwefel1d => schwefel,
            Rosenbrock1d => rosenbrock_1d,
            Sphere1d => sphere,
            StyblinskiTang1d => styblinski_tang,
            Weierstrass1d => weierstrass,
            Beale => beale,
            Branin => branin,
            Michalewicz => michalewicz,
            GoldsteinPrice => goldstein_price,
            Hartmann3 => hartmann3,
            Hartmann6 => hartmann6,
            GpSample | TableLookup => return None,
        })
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveId {
    type Err = ObjectiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObjectiveId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| ObjectiveError::UnknownId(s.to_string()))
    }
}

/// A benchmark function together with its grid and GP hyperparameters.
///
/// `domain` is the box the grid lives on. For analytic objectives it maps
/// affinely onto the function's native box, which lets unit-cube variants
/// share one definition with the native-coordinate ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub id: ObjectiveId,
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    pub grid_size: usize,
    pub gp: GpHyperparams,
}

impl ObjectiveSpec {
    /// Spec on the function's native box.
    pub fn native(id: ObjectiveId, grid_size: usize, gp: GpHyperparams) -> Self {
        let domain = id.native_domain().expect("analytic objective");
        Self { id, dim: domain.len(), domain, grid_size, gp }
    }

    /// Spec on the unit cube, mapped onto the function's native box.
    pub fn unit_cube(id: ObjectiveId, grid_size: usize, gp: GpHyperparams) -> Self {
        let dim = id.canonical_dim().expect("analytic objective");
        Self { id, dim, domain: vec![(0.0, 1.0); dim], grid_size, gp }
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        if let Some(d) = self.id.canonical_dim() {
            if d != self.dim {
                return Err(ObjectiveError::Spec(format!(
                    "{} is {d}-dimensional, spec says {}",
                    self.id, self.dim
                )));
            }
        }
        if self.dim == 0 || self.domain.len() != self.dim {
            return Err(ObjectiveError::Spec(format!(
                "domain has {} bounds for dimension {}",
                self.domain.len(),
                self.dim
            )));
        }
        if let Some((axis, _)) = self.domain.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            return Err(ObjectiveError::Spec(format!("empty interval on axis {axis}")));
        }
        if self.grid_size == 0 {
            return Err(ObjectiveError::Spec("grid size must be positive".into()));
        }
        self.gp.check_dim(self.dim).map_err(|e| ObjectiveError::Spec(e.to_string()))
    }
}

/// Output scaling and input translation: `g(x) = scale · f(x - translation)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub scale: f64,
    pub translation: Vec<f64>,
}

impl Transform {
    pub fn identity(dim: usize) -> Self {
        Self { scale: 1.0, translation: vec![0.0; dim] }
    }

    /// Draws a transform from `ranges` using `rng`.
    pub fn sample<R: Rng>(ranges: &TransformRanges, dim: usize, rng: &mut R) -> Self {
        let scale = rng.random_range(ranges.scale.0..=ranges.scale.1);
        let translation =
            (0..dim).map(|_| rng.random_range(ranges.translation.0..=ranges.translation.1)).collect();
        Self { scale, translation }
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.translation.iter().all(|&t| t == 0.0)
    }
}

/// A fully materialised objective: grid, values on it, optimum and the
/// worst grid point that seeds every run.
#[derive(Clone, Debug)]
pub struct ObjectiveInstance {
    spec: ObjectiveSpec,
    transform: Transform,
    seed: u64,
    grid: Matrix,
    values: Vec<f64>,
    /// Underlying lookup values for table-defined objectives.
    table: Option<Vec<f64>>,
    true_min: f64,
    argmin: usize,
    initial_index: usize,
}

impl ObjectiveInstance {
    /// Materialises an analytic objective (or rebuilds a GP sample from its
    /// stored lengthscale and seed).
    pub fn new(spec: ObjectiveSpec, transform: Transform, seed: u64) -> Result<Self, ObjectiveError> {
        spec.validate()?;
        if transform.translation.len() != spec.dim {
            return Err(ObjectiveError::Spec(format!(
                "translation has {} entries for dimension {}",
                transform.translation.len(),
                spec.dim
            )));
        }
        if transform.scale == 0.0 || !transform.scale.is_finite() {
            return Err(ObjectiveError::Spec("scale must be finite and non-zero".into()));
        }
        let grid = sobol::sobol_grid(&spec.domain, spec.grid_size, spec.dim)?;
        match spec.id {
            ObjectiveId::TableLookup => Err(ObjectiveError::Spec(
                "table objectives are built with make_table_objective".into(),
            )),
            ObjectiveId::GpSample => {
                let table = gp_prior_draw(&grid, &spec.gp, seeds::derive(seed, &[1]))?;
                Self::from_table(spec, transform, seed, grid, table)
            }
            _ => {
                let mut inst = Self::empty(spec, transform, seed, grid, None);
                let values: Vec<f64> = inst
                    .grid
                    .iter_rows()
                    .map(|x| inst.eval_unchecked(x))
                    .collect();
                inst.set_values(values)?;
                Ok(inst)
            }
        }
    }

    fn empty(
        spec: ObjectiveSpec,
        transform: Transform,
        seed: u64,
        grid: Matrix,
        table: Option<Vec<f64>>,
    ) -> Self {
        Self {
            spec,
            transform,
            seed,
            grid,
            values: Vec::new(),
            table,
            true_min: f64::NAN,
            argmin: 0,
            initial_index: 0,
        }
    }

    fn from_table(
        spec: ObjectiveSpec,
        transform: Transform,
        seed: u64,
        grid: Matrix,
        table: Vec<f64>,
    ) -> Result<Self, ObjectiveError> {
        if table.is_empty() {
            return Err(ObjectiveError::EmptyTable);
        }
        if let Some(i) = table.iter().position(|v| !v.is_finite()) {
            return Err(ObjectiveError::NonFinite(i));
        }
        if table.len() != grid.rows() {
            return Err(ObjectiveError::Spec(format!(
                "{} table values for {} grid points",
                table.len(),
                grid.rows()
            )));
        }
        let mut inst = Self::empty(spec, transform, seed, grid, Some(table));
        let values: Vec<f64> = inst.grid.iter_rows().map(|x| inst.eval_unchecked(x)).collect();
        inst.set_values(values)?;
        Ok(inst)
    }

    fn set_values(&mut self, values: Vec<f64>) -> Result<(), ObjectiveError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ObjectiveError::NonFinite(i));
        }
        let (mut argmin, mut argmax) = (0, 0);
        for (i, &v) in values.iter().enumerate() {
            if v < values[argmin] {
                argmin = i;
            }
            if v > values[argmax] {
                argmax = i;
            }
        }
        self.true_min = values[argmin];
        self.argmin = argmin;
        self.initial_index = argmax;
        self.values = values;
        Ok(())
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &Matrix {
        &self.grid
    }

    /// Objective values on every grid point.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn true_min(&self) -> f64 {
        self.true_min
    }

    /// First grid index attaining the minimum.
    pub fn argmin_index(&self) -> usize {
        self.argmin
    }

    /// First grid index attaining the maximum (the initial design point).
    pub fn initial_index(&self) -> usize {
        self.initial_index
    }

    pub fn gp_hyperparams(&self) -> &GpHyperparams {
        &self.spec.gp
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.spec.dim
            && x.iter().zip(&self.spec.domain).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Evaluates the transformed objective at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, ObjectiveError> {
        if x.len() != self.spec.dim {
            return Err(ObjectiveError::Dimension { expected: self.spec.dim, got: x.len() });
        }
        if !self.contains(x) {
            return Err(ObjectiveError::OutOfDomain { point: x.to_vec() });
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let shifted: Vec<f64> = x
            .iter()
            .zip(&self.transform.translation)
            .zip(&self.spec.domain)
            .map(|((v, t), (lo, hi))| (v - t).clamp(*lo, *hi))
            .collect();
        let raw = match (&self.table, self.spec.id.analytic()) {
            (Some(table), _) => table[nearest_row(&self.grid, &shifted)],
            (None, Some(f)) => {
                let native = self.spec.id.native_domain().expect("analytic objective");
                let mapped: Vec<f64> = shifted
                    .iter()
                    .zip(&self.spec.domain)
                    .zip(&native)
                    .map(|((u, (lo, hi)), (nlo, nhi))| {
                        if lo == nlo && hi == nhi {
                            *u
                        } else {
                            nlo + (nhi - nlo) * (u - lo) / (hi - lo)
                        }
                    })
                    .collect();
                f(&mapped)
            }
            (None, None) => unreachable!("data-defined objective without a table"),
        };
        self.transform.scale * raw
    }

    /// Structured description sufficient to rebuild the instance.
    pub fn record(&self) -> InstanceRecord {
        InstanceRecord {
            id: self.spec.id,
            dim: self.spec.dim,
            domain: self.spec.domain.clone(),
            transform: self.transform.clone(),
            seed: self.seed,
            grid_size: self.spec.grid_size,
            hyperparams: self.spec.gp.clone(),
            values: match self.spec.id {
                ObjectiveId::TableLookup => self.table.clone(),
                _ => None,
            },
        }
    }
}

fn nearest_row(grid: &Matrix, x: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, row) in grid.iter_rows().enumerate() {
        let d: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Serializable description of an [`ObjectiveInstance`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: ObjectiveId,
    pub dim: usize,
    pub domain: Vec<(f64, f64)>,
    pub transform: Transform,
    pub seed: u64,
    pub grid_size: usize,
    pub hyperparams: GpHyperparams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl InstanceRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn build(&self) -> Result<ObjectiveInstance, ObjectiveError> {
        let spec = ObjectiveSpec {
            id: self.id,
            dim: self.dim,
            domain: self.domain.clone(),
            grid_size: self.grid_size,
            gp: self.hyperparams.clone(),
        };
        match (&self.values, self.id) {
            (Some(values), ObjectiveId::TableLookup) => {
                let grid = sobol::sobol_grid(&spec.domain, spec.grid_size, spec.dim)?;
                let mut inst = make_table_objective(values, &grid, &spec.domain, spec.gp)?;
                inst.transform = self.transform.clone();
                inst.seed = self.seed;
                let table = inst.table.take().expect("table objective");
                ObjectiveInstance::from_table(inst.spec, inst.transform, inst.seed, inst.grid, table)
            }
            _ => ObjectiveInstance::new(spec, self.transform.clone(), self.seed),
        }
    }
}

/// One joint draw of a zero-mean GP prior over the rows of `grid`.
fn gp_prior_draw(grid: &Matrix, hp: &GpHyperparams, seed: u64) -> Result<Vec<f64>, ObjectiveError> {
    let k = crate::gp::kernel_matrix(grid, grid, hp)?;
    let n = grid.rows();
    let mut jitter = crate::gp::JITTER_START;
    let chol = loop {
        let mut chol = GrowingCholesky::new();
        let diag = hp.noise_variance + jitter * hp.signal_variance;
        let ok = (0..n).all(|i| {
            let mut row: Vec<f64> = k.row(i)[..=i].to_vec();
            row[i] += diag;
            chol.push(&row)
        });
        if ok {
            break chol;
        }
        jitter *= 10.0;
        if jitter > crate::gp::JITTER_MAX * (1.0 + 1e-9) {
            return Err(GpError::Factorization { jitter: jitter / 10.0 }.into());
        }
    };
    let mut rng = seeds::rng(seed);
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Ok((0..n).map(|i| crate::linalg::dot(chol.row(i), &z[..=i])).collect())
}

/// Draws a function from a zero-mean GP prior on the unit cube, with an RBF
/// lengthscale drawn uniformly from `lengthscale_range`.
///
/// The returned instance is a lookup table on `grid` whose GP hyperparameters
/// use the drawn lengthscale, unit signal variance and noise `1e-20`.
pub fn sample_gp_objective(
    dim: usize,
    lengthscale_range: (f64, f64),
    seed: u64,
    grid: &Matrix,
) -> Result<ObjectiveInstance, ObjectiveError> {
    if grid.rows() == 0 {
        return Err(ObjectiveError::EmptyTable);
    }
    if grid.cols() != dim {
        return Err(ObjectiveError::Dimension { expected: dim, got: grid.cols() });
    }
    let (lo, hi) = lengthscale_range;
    if !(lo > 0.0 && lo <= hi) {
        return Err(ObjectiveError::Spec(format!("invalid lengthscale range [{lo}, {hi}]")));
    }
    let ls = seeds::rng(seeds::derive(seed, &[0])).random_range(lo..=hi);
    let gp = GpHyperparams::isotropic(ls, 1.0, 1e-20);
    let table = gp_prior_draw(grid, &gp, seeds::derive(seed, &[1]))?;
    let spec = ObjectiveSpec {
        id: ObjectiveId::GpSample,
        dim,
        domain: vec![(0.0, 1.0); dim],
        grid_size: grid.rows(),
        gp,
    };
    ObjectiveInstance::from_table(spec, Transform::identity(dim), seed, grid.clone(), table)
}

/// Objective defined by nearest-grid-point lookup into `values`.
pub fn make_table_objective(
    values: &[f64],
    grid: &Matrix,
    domain: &[(f64, f64)],
    hp: GpHyperparams,
) -> Result<ObjectiveInstance, ObjectiveError> {
    if values.is_empty() {
        return Err(ObjectiveError::EmptyTable);
    }
    let dim = grid.cols();
    let spec = ObjectiveSpec {
        id: ObjectiveId::TableLookup,
        dim,
        domain: domain.to_vec(),
        grid_size: grid.rows(),
        gp: hp,
    };
    spec.validate()?;
    ObjectiveInstance::from_table(spec, Transform::identity(dim), 0, grid.clone(), values.to_vec())
}

/// Single-point dataset at the worst grid point (first index on ties).
pub fn initial_design(inst: &ObjectiveInstance) -> Dataset {
    let i = inst.initial_index();
    Dataset::single(inst.grid().row(i), inst.values()[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp() -> GpHyperparams {
        GpHyperparams::isotropic(1.0, 1.0, 1e-5)
    }

    #[test]
    fn evaluate_examples() {
        let sphere = ObjectiveInstance::new(
            ObjectiveSpec::native(ObjectiveId::Sphere1d, 16, hp()),
            Transform::identity(1),
            0,
        )
        .unwrap();
        assert_eq!(sphere.evaluate(&[0.0]).unwrap(), 0.0);

        let shifted = ObjectiveInstance::new(
            ObjectiveSpec::native(ObjectiveId::Sphere1d, 16, hp()),
            Transform { scale: 2.0, translation: vec![0.1] },
            0,
        )
        .unwrap();
        assert_eq!(shifted.evaluate(&[0.1]).unwrap(), 0.0);
        assert!((shifted.evaluate(&[1.1]).unwrap() - 2.0).abs() < 1e-12);

        let branin = ObjectiveInstance::new(
            ObjectiveSpec::native(ObjectiveId::Branin, 16, GpHyperparams::isotropic(1.0, 1.0, 1e-5)),
            Transform::identity(2),
            0,
        )
        .unwrap();
        let v = branin.evaluate(&[std::f64::consts::PI, 2.275]).unwrap();
        assert!((v - 0.397887).abs() < 1e-5);
    }

    #[test]
    fn evaluate_rejects_outside_points() {
        let inst = ObjectiveInstance::new(
            ObjectiveSpec::native(ObjectiveId::Sphere1d, 8, hp()),
            Transform::identity(1),
            0,
        )
        .unwrap();
        assert!(matches!(inst.evaluate(&[5.5]), Err(ObjectiveError::OutOfDomain { .. })));
        assert!(matches!(inst.evaluate(&[0.0, 0.0]), Err(ObjectiveError::Dimension { .. })));
    }

    #[test]
    fn translation_is_clamped_to_the_box() {
        let inst = ObjectiveInstance::new(
            ObjectiveSpec::native(ObjectiveId::Sphere1d, 8, hp()),
            Transform { scale: 1.0, translation: vec![0.5] },
            0,
        )
        .unwrap();
        // -5 - 0.5 clamps to -5.
        assert_eq!(inst.evaluate(&[-5.0]).unwrap(), 25.0);
    }

    #[test]
    fn unit_cube_maps_to_native_box() {
        let inst = ObjectiveInstance::new(
            ObjectiveSpec::unit_cube(ObjectiveId::Branin, 16, GpHyperparams::ard(vec![0.2, 0.5], 2.0, 1e-5)),
            Transform::identity(2),
            0,
        )
        .unwrap();
        let u = [(std::f64::consts::PI + 5.0) / 15.0, 2.275 / 15.0];
        assert!((inst.evaluate(&u).unwrap() - 0.397887).abs() < 1e-5);
    }

    #[test]
    fn table_objective_examples() {
        let grid = Matrix::from_rows(&[[0.1], [0.5], [0.9]]);
        let t = make_table_objective(&[3.0, 1.0, 2.0], &grid, &[(0.0, 1.0)], hp()).unwrap();
        assert_eq!(t.true_min(), 1.0);
        assert_eq!(t.initial_index(), 0);
        assert_eq!(t.evaluate(&[0.9]).unwrap(), 2.0);
        assert_eq!(t.evaluate(&[0.45]).unwrap(), 1.0);

        let flat = make_table_objective(&[4.0, 4.0, 4.0], &grid, &[(0.0, 1.0)], hp()).unwrap();
        assert_eq!(flat.initial_index(), 0);
        assert_eq!(flat.true_min(), 4.0);

        assert!(matches!(
            make_table_objective(&[], &grid, &[(0.0, 1.0)], hp()),
            Err(ObjectiveError::EmptyTable)
        ));
    }

    #[test]
    fn initial_design_examples() {
        let grid = Matrix::from_rows(&[[0.1], [0.5], [0.9]]);
        let t = make_table_objective(&[3.0, 1.0, 2.0], &grid, &[(0.0, 1.0)], hp()).unwrap();
        let d = initial_design(&t);
        assert_eq!(d.len(), 1);
        assert_eq!(d.inputs.row(0), &[0.1]);
        assert_eq!(d.outputs, vec![3.0]);

        let t = make_table_objective(&[1.0, 5.0, 5.0], &grid, &[(0.0, 1.0)], hp()).unwrap();
        assert_eq!(initial_design(&t).inputs.row(0), &[0.5]);
    }

    #[test]
    fn gp_samples_are_deterministic() {
        let grid = sobol::sobol_grid(&[(0.0, 1.0); 2], 32, 2).unwrap();
        let a = sample_gp_objective(2, (0.05, 0.5), 11, &grid).unwrap();
        let b = sample_gp_objective(2, (0.05, 0.5), 11, &grid).unwrap();
        let c = sample_gp_objective(2, (0.05, 0.5), 12, &grid).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        let ls = a.gp_hyperparams().lengthscales[0];
        assert!((0.05..=0.5).contains(&ls));
    }

    #[test]
    fn records_rebuild_instances() {
        let inst = ObjectiveInstance::new(
            ObjectiveSpec::unit_cube(ObjectiveId::Branin, 32, GpHyperparams::ard(vec![0.2, 0.5], 2.0, 1e-5)),
            Transform { scale: 0.95, translation: vec![0.05, -0.02] },
            3,
        )
        .unwrap();
        let rec = InstanceRecord::from_json(&inst.record().to_json()).unwrap();
        let again = rec.build().unwrap();
        assert_eq!(again.values(), inst.values());

        let grid = sobol::sobol_grid(&[(0.0, 1.0)], 8, 1).unwrap();
        let g = sample_gp_objective(1, (0.1, 0.3), 5, &grid).unwrap();
        let rebuilt = g.record().build().unwrap();
        assert_eq!(rebuilt.values(), g.values());

        let t = make_table_objective(&[3.0, 1.0, 2.0, 0.5, 1.5, 2.5, 3.5, 4.5], &grid, &[(0.0, 1.0)], hp())
            .unwrap();
        assert_eq!(t.record().build().unwrap().values(), t.values());
    }

    #[test]
    fn spec_validation() {
        let mut s = ObjectiveSpec::native(ObjectiveId::Branin, 16, hp());
        s.dim = 3;
        assert!(s.validate().is_err());
        let s = ObjectiveSpec::native(ObjectiveId::Hartmann3, 16, GpHyperparams::ard(vec![1.0; 2], 1.0, 0.0));
        assert!(s.validate().is_err());
        assert_eq!("goldstein_price".parse::<ObjectiveId>().unwrap(), ObjectiveId::GoldsteinPrice);
        assert!("nope".parse::<ObjectiveId>().is_err());
    }
}
