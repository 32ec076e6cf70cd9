//! Exact Gaussian-process regression with zero prior mean and an RBF/ARD
//! kernel, predicted on a fixed grid.
//!
//! Hyperparameters are consumed as given; nothing here learns them.
//! [`GpSession`] grows the dataset one observation at a time, and
//! [`fit_predict`] is defined as pushing every row of a dataset through a
//! fresh session, so the incremental and batch paths are the same code.

use crate::linalg::{GrowingCholesky, Matrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Jitter added to the kernel diagonal, relative to the signal variance.
pub const JITTER_START: f64 = 1e-10;
/// Largest relative jitter tried before giving up.
pub const JITTER_MAX: f64 = 1e-4;
/// Relative noise level at or above which the diagonal needs no jitter.
pub const NOISE_REGULARIZES: f64 = 1e-14;

/// Relative jitter a fresh factorization starts from. Noise that already
/// keeps the kernel matrix well conditioned gets none, so the jitter never
/// swamps a configured noise level (σ_f² can be ~1e8).
pub fn initial_jitter(hp: &GpHyperparams) -> f64 {
    if hp.noise_variance >= NOISE_REGULARIZES * hp.signal_variance {
        0.0
    } else {
        JITTER_START
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid hyperparameters: {0}")]
    Hyperparams(String),
    #[error("duplicate input row {row:?} with zero noise variance")]
    DuplicateRow { row: Vec<f64> },
    #[error("kernel matrix not positive definite even with relative jitter {jitter:e}")]
    Factorization { jitter: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparams {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub ard: bool,
}

impl GpHyperparams {
    /// One lengthscale shared by every input dimension.
    pub fn isotropic(lengthscale: f64, signal_variance: f64, noise_variance: f64) -> Self {
        Self { lengthscales: vec![lengthscale], signal_variance, noise_variance, ard: false }
    }

    /// One lengthscale per input dimension.
    pub fn ard(lengthscales: Vec<f64>, signal_variance: f64, noise_variance: f64) -> Self {
        Self { lengthscales, signal_variance, noise_variance, ard: true }
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if self.lengthscales.is_empty() {
            return Err(GpError::Hyperparams("no lengthscale given".into()));
        }
        if !self.ard && self.lengthscales.len() != 1 {
            return Err(GpError::Hyperparams(format!(
                "isotropic kernel needs exactly one lengthscale, got {}",
                self.lengthscales.len()
            )));
        }
        if self.lengthscales.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(GpError::Hyperparams("lengthscales must be positive and finite".into()));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(GpError::Hyperparams("signal variance must be positive".into()));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(GpError::Hyperparams("noise variance must be non-negative".into()));
        }
        Ok(())
    }

    /// Validates and checks the lengthscale count against `dim` input columns.
    pub fn check_dim(&self, dim: usize) -> Result<(), GpError> {
        self.validate()?;
        if self.ard && self.lengthscales.len() != dim {
            return Err(GpError::Dimension(format!(
                "{} ARD lengthscales for {dim}-dimensional inputs",
                self.lengthscales.len()
            )));
        }
        Ok(())
    }

    /// Squared inverse lengthscales expanded to `dim` entries.
    fn inv_sq_lengthscales(&self, dim: usize) -> Vec<f64> {
        if self.ard {
            self.lengthscales.iter().map(|l| 1.0 / (l * l)).collect()
        } else {
            vec![1.0 / (self.lengthscales[0] * self.lengthscales[0]); dim]
        }
    }
}

/// Observed inputs (one row per point) and their function values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub inputs: Matrix,
    pub outputs: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Matrix, outputs: Vec<f64>) -> Result<Self, GpError> {
        if inputs.rows() != outputs.len() {
            return Err(GpError::Dimension(format!(
                "{} input rows but {} outputs",
                inputs.rows(),
                outputs.len()
            )));
        }
        Ok(Self { inputs, outputs })
    }

    pub fn single(x: &[f64], y: f64) -> Self {
        Self { inputs: Matrix::from_rows(&[x]), outputs: vec![y] }
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.cols()
    }
}

/// Predictive mean and latent variance on every grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl Posterior {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

struct Kernel {
    signal_variance: f64,
    inv_sq: Vec<f64>,
}

impl Kernel {
    fn new(hp: &GpHyperparams, dim: usize) -> Self {
        Self { signal_variance: hp.signal_variance, inv_sq: hp.inv_sq_lengthscales(dim) }
    }

    #[inline]
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.inv_sq)
            .map(|((x, y), w)| (x - y) * (x - y) * w)
            .sum();
        self.signal_variance * (-0.5 * r2).exp()
    }
}

/// `K(a, b)` with entries `σ_f² exp(-½ Σ_k (a_ik - b_jk)² / ℓ_k²)`.
pub fn kernel_matrix(a: &Matrix, b: &Matrix, hp: &GpHyperparams) -> Result<Matrix, GpError> {
    if a.cols() != b.cols() {
        return Err(GpError::Dimension(format!(
            "left has {} columns, right has {}",
            a.cols(),
            b.cols()
        )));
    }
    hp.check_dim(a.cols())?;
    let k = Kernel::new(hp, a.cols());
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for (i, ai) in a.iter_rows().enumerate() {
        for (j, bj) in b.iter_rows().enumerate() {
            out.set(i, j, k.eval(ai, bj));
        }
    }
    Ok(out)
}

/// Posterior of a GP conditioned on `data`, evaluated on `grid`.
pub fn fit_predict(data: &Dataset, grid: &Matrix, hp: &GpHyperparams) -> Result<Posterior, GpError> {
    let mut session = GpSession::new(grid, hp.clone())?;
    for (x, &y) in data.inputs.iter_rows().zip(&data.outputs) {
        session.push(x, y)?;
    }
    Ok(session.posterior())
}

/// Returns `data` with one more observation; the input is left untouched.
pub fn append_observation(
    data: &Dataset,
    x: &[f64],
    y: f64,
    noise_variance: f64,
) -> Result<Dataset, GpError> {
    if !data.is_empty() && x.len() != data.dim() {
        return Err(GpError::Dimension(format!(
            "point has {} coordinates, dataset has {}",
            x.len(),
            data.dim()
        )));
    }
    if noise_variance == 0.0 && data.inputs.iter_rows().any(|r| r == x) {
        return Err(GpError::DuplicateRow { row: x.to_vec() });
    }
    let mut next = data.clone();
    next.inputs.push_row(x);
    next.outputs.push(y);
    Ok(next)
}

/// Incrementally conditioned GP over a fixed grid.
///
/// Keeps the Cholesky factor `L` of `K(X,X) + (σ² + jitter) I`, the rows of
/// `V = L⁻¹ K(X, grid)` and `w = L⁻¹ y`; then `mean = Vᵀ w` and
/// `var = σ_f² - diag(Vᵀ V)`. Each push costs `O(n·N)`.
pub struct GpSession<'g> {
    grid: &'g Matrix,
    hp: GpHyperparams,
    kernel: Kernel,
    jitter: f64,
    data: Dataset,
    chol: GrowingCholesky,
    v_rows: Vec<Vec<f64>>,
    w: Vec<f64>,
    mean: Vec<f64>,
    explained: Vec<f64>,
}

impl<'g> GpSession<'g> {
    pub fn new(grid: &'g Matrix, hp: GpHyperparams) -> Result<Self, GpError> {
        hp.check_dim(grid.cols())?;
        let kernel = Kernel::new(&hp, grid.cols());
        let n = grid.rows();
        Ok(Self {
            grid,
            jitter: initial_jitter(&hp),
            kernel,
            hp,
            data: Dataset { inputs: Matrix::zeros(0, grid.cols()), outputs: Vec::new() },
            chol: GrowingCholesky::new(),
            v_rows: Vec::new(),
            w: Vec::new(),
            mean: vec![0.0; n],
            explained: vec![0.0; n],
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn hyperparams(&self) -> &GpHyperparams {
        &self.hp
    }

    /// Relative jitter currently applied to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Conditions on one more observation, escalating jitter if needed.
    pub fn push(&mut self, x: &[f64], y: f64) -> Result<(), GpError> {
        if x.len() != self.grid.cols() {
            return Err(GpError::Dimension(format!(
                "point has {} coordinates, grid has {}",
                x.len(),
                self.grid.cols()
            )));
        }
        if self.hp.noise_variance == 0.0 && self.data.inputs.iter_rows().any(|r| r == x) {
            return Err(GpError::DuplicateRow { row: x.to_vec() });
        }
        self.data.inputs.push_row(x);
        self.data.outputs.push(y);
        let n = self.data.len() - 1;
        if !self.absorb(n) {
            self.escalate(self.jitter)?;
        }
        Ok(())
    }

    pub fn posterior(&self) -> Posterior {
        let sf2 = self.hp.signal_variance;
        Posterior {
            mean: self.mean.clone(),
            variance: self.explained.iter().map(|e| (sf2 - e).max(0.0)).collect(),
        }
    }

    /// Factorizes row `n` of the stored data into the running state.
    fn absorb(&mut self, n: usize) -> bool {
        let xn = self.data.inputs.row(n);
        let diag = self.hp.noise_variance + self.jitter * self.hp.signal_variance;
        let mut a: Vec<f64> =
            (0..n).map(|i| self.kernel.eval(self.data.inputs.row(i), xn)).collect();
        a.push(self.kernel.eval(xn, xn) + diag);
        if !self.chol.push(&a) {
            return false;
        }
        let l = self.chol.row(n);
        let lnn = l[n];

        let mut v: Vec<f64> = self.grid.iter_rows().map(|g| self.kernel.eval(xn, g)).collect();
        for (li, vi) in l[..n].iter().zip(&self.v_rows) {
            for (vj, &vij) in v.iter_mut().zip(vi) {
                *vj -= li * vij;
            }
        }
        for vj in &mut v {
            *vj /= lnn;
        }
        let s: f64 = l[..n].iter().zip(&self.w).map(|(a, b)| a * b).sum();
        let wn = (self.data.outputs[n] - s) / lnn;

        for ((m, e), &vj) in self.mean.iter_mut().zip(&mut self.explained).zip(&v) {
            *m += vj * wn;
            *e += vj * vj;
        }
        self.v_rows.push(v);
        self.w.push(wn);
        true
    }

    fn escalate(&mut self, previous: f64) -> Result<(), GpError> {
        loop {
            let next = if self.jitter == 0.0 { JITTER_START } else { self.jitter * 10.0 };
            if next > JITTER_MAX * (1.0 + 1e-9) {
                let failed = self.jitter;
                // Drop the offending observation so the session stays usable.
                let keep = self.data.len() - 1;
                self.truncate_data(keep);
                self.rebuild_at(previous);
                return Err(GpError::Factorization { jitter: failed });
            }
            if self.rebuild_at(next) {
                return Ok(());
            }
        }
    }

    fn truncate_data(&mut self, keep: usize) {
        let dim = self.grid.cols();
        let data = self.data.inputs.as_slice()[..keep * dim].to_vec();
        self.data.inputs = Matrix::from_row_major(keep, dim, data);
        self.data.outputs.truncate(keep);
    }

    /// Refactorizes every stored row at relative jitter `jitter`.
    fn rebuild_at(&mut self, jitter: f64) -> bool {
        self.jitter = jitter;
        self.chol = GrowingCholesky::new();
        self.v_rows.clear();
        self.w.clear();
        self.mean.iter_mut().for_each(|m| *m = 0.0);
        self.explained.iter_mut().for_each(|e| *e = 0.0);
        (0..self.data.len()).all(|i| self.absorb(i))
    }
}
