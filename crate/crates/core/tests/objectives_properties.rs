use afsearch::gp::GpHyperparams;
use afsearch::objectives::functions as f;
use afsearch::objectives::{self, preset, ObjectiveId, ObjectiveInstance, ObjectiveSpec, Transform};
use afsearch::{seeds, sobol};
use proptest::prelude::*;
use rand::Rng;

/// Minimum of `func` over a regular lattice with `per_axis` points per axis.
fn lattice_min(func: fn(&[f64]) -> f64, domain: &[(f64, f64)], per_axis: usize) -> (f64, Vec<f64>) {
    let d = domain.len();
    let mut best = (f64::INFINITY, vec![]);
    let total = per_axis.pow(d as u32);
    let mut x = vec![0.0; d];
    for mut k in 0..total {
        for (j, (lo, hi)) in domain.iter().enumerate() {
            x[j] = lo + (hi - lo) * (k % per_axis) as f64 / (per_axis - 1) as f64;
            k /= per_axis;
        }
        let v = func(&x);
        if v < best.0 {
            best = (v, x.clone());
        }
    }
    best
}

#[test]
fn branin_minimum_on_a_million_points() {
    let (v, _) = lattice_min(f::branin, &[(-5.0, 10.0), (0.0, 15.0)], 1000);
    assert!((v - 0.397887).abs() < 1e-3, "{v}");
    assert!((f::branin(&[std::f64::consts::PI, 2.275]) - 0.397887).abs() < 1e-5);
}

#[test]
fn known_minima_at_canonical_locations() {
    let close = |a: f64, b: f64, tol: f64| assert!((a - b).abs() < tol, "{a} vs {b}");
    close(f::sphere(&[0.0]), 0.0, 1e-15);
    close(f::ackley(&[0.0]), 0.0, 1e-12);
    close(f::levy(&[1.0]), 0.0, 1e-12);
    close(f::schwefel(&[420.9687]), 0.0, 1e-3);
    close(f::styblinski_tang(&[-2.903534]), -39.16617, 1e-4);
    close(f::weierstrass(&[0.0]), 0.0, 1e-9);
    close(f::rosenbrock_1d(&[1.0]), 0.0, 1e-15);
    close(f::beale(&[3.0, 0.5]), 0.0, 1e-12);
    close(f::goldstein_price(&[0.0, -1.0]), 3.0, 1e-9);
    close(f::hartmann3(&[0.114614, 0.555649, 0.852547]), -3.86278, 1e-4);
    close(f::hartmann6(&[0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]), -3.32237, 1e-4);
    close(f::michalewicz(&[2.20, 1.57]), -1.8013, 1e-3);
}

#[test]
fn one_d_minima_by_brute_force() {
    let cases: [(fn(&[f64]) -> f64, (f64, f64), f64, f64); 6] = [
        (f::sphere, (-5.0, 5.0), 0.0, 0.0),
        (f::ackley, (-4.0, 4.0), 0.0, 0.0),
        (f::levy, (-10.0, 10.0), 1.0, 0.0),
        (f::styblinski_tang, (-5.0, 5.0), -2.903534, -39.16617),
        (f::weierstrass, (-0.5, 0.5), 0.0, 0.0),
        (f::schwefel, (-500.0, 500.0), 420.9687, 0.0),
    ];
    for (func, dom, xmin, fmin) in cases {
        let (v, x) = lattice_min(func, &[dom], 200_001);
        assert!((v - fmin).abs() < 1e-3, "{v} vs {fmin}");
        assert!((x[0] - xmin).abs() < 1e-3 * (dom.1 - dom.0), "{} vs {xmin}", x[0]);
    }
}

fn native(id: ObjectiveId, n: usize) -> ObjectiveSpec {
    ObjectiveSpec::native(id, n, GpHyperparams::isotropic(1.0, 1.0, 1e-5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transforms_scale_values_and_shift_inputs(seed in any::<u64>(), k in 0usize..4) {
        let (id, func): (ObjectiveId, fn(&[f64]) -> f64) =
            [(ObjectiveId::Sphere1d, f::sphere as fn(&[f64]) -> f64), (ObjectiveId::Ackley1d, f::ackley), (ObjectiveId::Branin, f::branin), (ObjectiveId::GoldsteinPrice, f::goldstein_price)][k];
        let spec = native(id, 300);
        let mut rng = seeds::rng(seed);
        let t = Transform {
            scale: rng.random_range(0.9..1.1),
            translation: (0..spec.dim).map(|_| rng.random_range(-0.1..0.1)).collect(),
        };
        let inst = ObjectiveInstance::new(spec.clone(), t.clone(), 0).unwrap();
        let plain = ObjectiveInstance::new(spec.clone(), Transform::identity(spec.dim), 0).unwrap();
        let shifted: Vec<f64> = (0..inst.grid().rows())
            .map(|i| {
                let x: Vec<f64> = inst.grid().row(i).iter().zip(&t.translation).zip(&spec.domain)
                    .map(|((v, s), (lo, hi))| (v - s).clamp(*lo, *hi)).collect();
                func(&x)
            })
            .collect();
        for (i, &raw) in shifted.iter().enumerate() {
            prop_assert!((inst.values()[i] - t.scale * raw).abs() <= 1e-12 * (1.0 + raw.abs()));
        }
        let argmin = shifted.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        prop_assert_eq!(inst.argmin_index(), argmin);
        prop_assert_eq!(inst.grid().as_slice(), plain.grid().as_slice());
    }

    #[test]
    fn sobol_points_are_interior_and_balanced(k in 1u32..11, dim in 1usize..7) {
        let n = (1usize << k) - 1;
        let pts = sobol::unit_points(n, dim).unwrap();
        for j in 0..dim {
            let low = (0..n).filter(|&i| pts.get(i, j) < 0.5).count();
            let high = n - low;
            prop_assert!(low.abs_diff(high) <= 1, "axis {j}: {low} vs {high}");
            prop_assert!((0..n).all(|i| pts.get(i, j) > 0.0 && pts.get(i, j) < 1.0));
        }
    }

    #[test]
    fn initial_design_is_the_worst_point(seed in any::<u64>()) {
        let mut rng = seeds::rng(seed);
        let n = rng.random_range(1..50);
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
        let grid = sobol::unit_points(n, 1).unwrap();
        let inst = objectives::make_table_objective(&values, &grid, &[(0.0, 1.0)], GpHyperparams::isotropic(0.1, 1.0, 1e-5)).unwrap();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let design = objectives::initial_design(&inst);
        prop_assert_eq!(design.outputs[0], max);
        prop_assert_eq!(inst.initial_index(), values.iter().position(|v| *v == max).unwrap());
        prop_assert_eq!(inst.true_min(), values.iter().cloned().fold(f64::MAX, f64::min));
    }
}

#[test]
fn sobol_grid_maps_onto_the_box() {
    let g = sobol::sobol_grid(&[(-4.0, 4.0)], 1, 1).unwrap();
    assert_eq!(g.get(0, 0), 0.0);
    let a = sobol::sobol_grid(&[(-1.0, 2.0), (5.0, 6.0)], 100, 2).unwrap();
    let b = sobol::sobol_grid(&[(-1.0, 2.0), (5.0, 6.0)], 100, 2).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
}

#[test]
fn gp_samples_have_prior_moments() {
    let grid = sobol::unit_points(8, 3).unwrap();
    let draws: Vec<Vec<f64>> = (0..200)
        .map(|s| objectives::sample_gp_objective(3, (0.05, 0.5), s, &grid).unwrap().values().to_vec())
        .collect();
    for i in 0..grid.rows() {
        let col: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let mean = col.iter().sum::<f64>() / 200.0;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 199.0;
        assert!(mean.abs() < 3.0 / 200f64.sqrt(), "point {i}: mean {mean}");
        assert!((var - 1.0).abs() < 0.3, "point {i}: variance {var}");
    }
}

#[test]
fn every_preset_builds() {
    for name in objectives::presets::preset_names() {
        let p = preset(name).unwrap();
        p.validate().unwrap();
        let insts = p.test_instances(2, 1).unwrap();
        let tests = p.functions.iter().filter(|f| f.role == objectives::presets::Role::Test).count();
        let expected = if p.gp_prior.is_some() { 2 } else { 2 * tests };
        assert_eq!(insts.len(), expected, "{name}");
        for i in &insts {
            assert_ne!(i.instance.initial_index(), i.instance.argmin_index(), "{}", i.label);
        }
    }
}

#[test]
fn instance_records_rebuild_identically() {
    let p = preset("id-bench-hartmann3").unwrap();
    for inst in p.test_instances(3, 9).unwrap() {
        let rec = inst.instance.record();
        let back = objectives::InstanceRecord::from_json(&rec.to_json()).unwrap().build().unwrap();
        assert_eq!(back.values(), inst.instance.values());
        assert_eq!(back.grid().as_slice(), inst.instance.grid().as_slice());
    }
}
