//! Benchmark functions in their native coordinates.

use std::f64::consts::{E, PI};

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
}

pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let d = w.len();
    let first = (PI * w[0]).sin().powi(2);
    let middle: f64 = w[..d - 1]
        .iter()
        .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
        .sum();
    let last = (w[d - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[d - 1]).sin().powi(2));
    first + middle + last
}

pub fn schwefel(x: &[f64]) -> f64 {
    418.9829 * x.len() as f64 - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
}

/// One-dimensional Rosenbrock: the two-dimensional valley restricted to the
/// diagonal, `100 (x - x²)² + (1 - x)²`, minimised at `x = 1`.
pub fn rosenbrock_1d(x: &[f64]) -> f64 {
    let v = x[0];
    100.0 * (v - v * v).powi(2) + (1.0 - v).powi(2)
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn styblinski_tang(x: &[f64]) -> f64 {
    0.5 * x.iter().map(|v| v.powi(4) - 16.0 * v * v + 5.0 * v).sum::<f64>()
}

pub const WEIERSTRASS_A: f64 = 0.5;
pub const WEIERSTRASS_B: f64 = 3.0;
pub const WEIERSTRASS_KMAX: i32 = 20;

pub fn weierstrass(x: &[f64]) -> f64 {
    let terms = |arg: &dyn Fn(f64) -> f64| -> f64 {
        (0..=WEIERSTRASS_KMAX)
            .map(|k| WEIERSTRASS_A.powi(k) * arg(WEIERSTRASS_B.powi(k)).cos())
            .sum()
    };
    let body: f64 = x.iter().map(|&v| terms(&|bk| 2.0 * PI * bk * (v + 0.5))).sum();
    body - x.len() as f64 * terms(&|bk| PI * bk)
}

pub fn beale(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    (1.5 - a + a * b).powi(2) + (2.25 - a + a * b * b).powi(2) + (2.625 - a + a * b.powi(3)).powi(2)
}

pub fn branin(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

pub const MICHALEWICZ_M: i32 = 10;

pub fn michalewicz(x: &[f64]) -> f64 {
    -x.iter()
        .enumerate()
        .map(|(i, v)| v.sin() * ((i as f64 + 1.0) * v * v / PI).sin().powi(2 * MICHALEWICZ_M))
        .sum::<f64>()
}

pub fn goldstein_price(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let t1 = 1.0
        + (a + b + 1.0).powi(2)
            * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b);
    let t2 = 30.0
        + (2.0 * a - 3.0 * b).powi(2)
            * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b);
    t1 * t2
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

const HARTMANN3_A: [[f64; 3]; 4] =
    [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]];
const HARTMANN3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];

const HARTMANN6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

fn hartmann<const D: usize>(x: &[f64], a: &[[f64; D]; 4], p: &[[f64; D]; 4]) -> f64 {
    -(0..4)
        .map(|i| {
            let inner: f64 = (0..D).map(|j| a[i][j] * (x[j] - p[i][j]).powi(2)).sum();
            HARTMANN_ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>()
}

pub fn hartmann3(x: &[f64]) -> f64 {
    hartmann(x, &HARTMANN3_A, &HARTMANN3_P)
}

pub fn hartmann6(x: &[f64]) -> f64 {
    hartmann(x, &HARTMANN6_A, &HARTMANN6_P)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn known_minima() {
        assert!(close(ackley(&[0.0]), 0.0, 1e-12));
        assert!(close(ackley(&[0.0, 0.0]), 0.0, 1e-12));
        assert!(close(levy(&[1.0]), 0.0, 1e-12));
        assert!(close(schwefel(&[420.9687]), 0.0, 1e-4));
        assert!(close(rosenbrock_1d(&[1.0]), 0.0, 0.0));
        assert_eq!(sphere(&[0.0]), 0.0);
        assert!(close(styblinski_tang(&[-2.903534]), -39.16616570377142, 1e-8));
        assert!(close(weierstrass(&[0.0]), 0.0, 1e-9));
        assert!(close(beale(&[3.0, 0.5]), 0.0, 1e-12));
        for p in [[-PI, 12.275], [PI, 2.275], [9.42478, 2.475]] {
            assert!(close(branin(&p), 0.397887, 1e-5));
        }
        assert!(close(michalewicz(&[2.20290552, 1.57079633]), -1.8013034, 1e-6));
        assert!(close(goldstein_price(&[0.0, -1.0]), 3.0, 1e-9));
        assert!(close(hartmann3(&[0.114614, 0.555649, 0.852547]), -3.86278, 1e-5));
        assert!(close(
            hartmann6(&[0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]),
            -3.32237,
            1e-5
        ));
    }

    #[test]
    fn levy_multi_dim_matches_formula() {
        // Hand evaluation at x = (1, 5): w = (1, 2).
        let w2: f64 = 2.0;
        let expected = 0.0 + (w2 - 1.0).powi(2) * (1.0 + (2.0 * PI * w2).sin().powi(2));
        assert!(close(levy(&[1.0, 5.0]), expected, 1e-12));
    }
}
