#![allow(dead_code)]

use afsearch::afdsl::{BinOp, Expr, Func, Program, Reduce, Var};
use afsearch::gp::{self, GpHyperparams};
use afsearch::Matrix;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense-inverse GP posterior: `m = k*ᵀ K⁻¹ y`, `v = k** - k*ᵀ K⁻¹ k*`, with
/// `K = k(X,X) + (σ² + jitter·σf²) I`. Written from the textbook formulas.
/// The jitter is the session's starting level, which the inputs here never
/// push past.
pub fn dense_posterior(
    x: &[Vec<f64>],
    y: &[f64],
    grid: &[Vec<f64>],
    ls: &[f64],
    sf2: f64,
    noise: f64,
) -> (Vec<f64>, Vec<f64>) {
    let k = |a: &[f64], b: &[f64]| {
        let r2: f64 = a.iter().zip(b).zip(ls).map(|((p, q), l)| ((p - q) / l).powi(2)).sum();
        sf2 * (-0.5 * r2).exp()
    };
    let n = x.len();
    let diag = noise + gp::initial_jitter(&hyperparams(ls, sf2, noise)) * sf2;
    let kxx = DMatrix::from_fn(n, n, |i, j| k(&x[i], &x[j]) + if i == j { diag } else { 0.0 });
    let inv = kxx.try_inverse().expect("invertible kernel matrix");
    let alpha = &inv * DVector::from_column_slice(y);
    let mut mean = Vec::with_capacity(grid.len());
    let mut var = Vec::with_capacity(grid.len());
    for g in grid {
        let ks = DVector::from_fn(n, |i, _| k(&x[i], g));
        mean.push(ks.dot(&alpha));
        var.push((k(g, g) - ks.dot(&(&inv * &ks))).max(0.0));
    }
    (mean, var)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

pub fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows)
}

pub fn hyperparams(ls: &[f64], sf2: f64, noise: f64) -> GpHyperparams {
    GpHyperparams::ard(ls.to_vec(), sf2, noise)
}

const NAMES: [&str; 4] = ["u", "w0", "gap", "z_2"];
const VARS: [Var; 5] = [Var::Mean, Var::Var, Var::Incumbent, Var::Beta, Var::NPoints];

fn literal(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => rng.random_range(0..10) as f64,
        1 => rng.random::<f64>(),
        2 => rng.random_range(0.0..1e6),
        _ => rng.random::<f64>() * 10f64.powi(rng.random_range(-12..12)),
    }
}

/// A random expression over the variables and the first `bound` let names.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize, bound: usize) -> Expr {
    let leaf = depth == 0 || rng.random_range(0..10) < 3;
    if leaf {
        return match rng.random_range(0..3) {
            0 => Expr::Lit(literal(rng)),
            1 if bound > 0 => Expr::Ident(NAMES[rng.random_range(0..bound)].to_string()),
            _ => Expr::Var(VARS[rng.random_range(0..VARS.len())]),
        };
    }
    match rng.random_range(0..3) {
        0 => Expr::neg(random_expr(rng, depth - 1, bound)),
        1 => {
            let op = BinOp::ALL[rng.random_range(0..BinOp::ALL.len())];
            Expr::bin(op, random_expr(rng, depth - 1, bound), random_expr(rng, depth - 1, bound))
        }
        _ => {
            let f = Func::ALL[rng.random_range(0..Func::ALL.len())];
            Expr::call(f, (0..f.arity()).map(|_| random_expr(rng, depth - 1, bound)).collect())
        }
    }
}

/// A random well-formed program within the size bounds.
pub fn random_program(rng: &mut ChaCha8Rng) -> Program {
    loop {
        let n_lets = rng.random_range(0..=2);
        let lets = (0..n_lets)
            .map(|i| (NAMES[i].to_string(), random_expr(rng, 3, i)))
            .collect();
        let reduce = if rng.random() { Reduce::Argmax } else { Reduce::Argmin };
        let p = Program { lets, reduce, body: random_expr(rng, 5, n_lets) };
        if p.check().is_ok() {
            return p;
        }
    }
}

/// Posterior-like inputs: means in [-3, 3], variances in [1e-6, 4].
pub fn random_af_input(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let mean: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let var: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-6.0..0.6))).collect();
    let inc = rng.random_range(-3.0..3.0);
    (mean, var, inc)
}
