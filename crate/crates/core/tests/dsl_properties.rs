mod common;

use afsearch::acquisition::AfInput;
use afsearch::afdsl::{self, BinOp, Expr, Func, Program, Reduce, Var};
use afsearch::seeds;
use proptest::prelude::*;
use rand::Rng;
use std::time::{Duration, Instant};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let p = common::random_program(&mut seeds::rng(seed));
        let text = p.render();
        prop_assert_eq!(afdsl::parse(&text).unwrap(), p, "{}", text);
    }

    #[test]
    fn evaluation_is_total_and_deterministic(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = seeds::rng(seed);
        let p = common::random_program(&mut rng);
        let (m, v, inc) = common::random_af_input(&mut rng, n);
        let inp = AfInput::new(m, v, inc).unwrap().with_beta(rng.random_range(0.0..3.0));
        let a = p.evaluate(&inp);
        let b = p.evaluate(&inp);
        match (&a, &b) {
            (Ok(x), Ok(y)) => {
                prop_assert!(x.index < n);
                prop_assert_eq!(x.index, y.index);
                prop_assert_eq!(
                    x.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                    y.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
                );
            }
            (Err(x), Err(y)) => prop_assert_eq!(x.to_string(), y.to_string()),
            _ => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,80}") {
        let _ = afdsl::parse(&text);
    }

    #[test]
    fn parser_survives_mangled_programs(seed in any::<u64>(), cut in 0usize..200, junk in "[()+*/,;=a-zA-Z0-9 ._-]{0,6}") {
        let text = common::random_program(&mut seeds::rng(seed)).render();
        let cut = cut.min(text.len());
        let cut = (0..=cut).rev().find(|&i| text.is_char_boundary(i)).unwrap();
        let _ = afdsl::parse(&format!("{}{}{}", &text[..cut], junk, &text[cut..]));
    }
}

/// Calls of every function joined by a balanced tree of binary operators,
/// sized close to the node bound.
fn large_program() -> Program {
    let mut layer: Vec<Expr> = Func::ALL
        .iter()
        .map(|&f| {
            let args = (0..f.arity())
                .map(|i| if i == 0 { Expr::Var(Var::Var) } else { Expr::lit(0.5 + i as f64) })
                .collect();
            Expr::call(f, args)
        })
        .collect();
    while layer.iter().map(Expr::node_count).sum::<usize>() * 2 < afdsl::MAX_NODES - 10 {
        layer = layer.iter().cloned().chain(layer.iter().cloned()).collect();
    }
    while layer.len() > 1 {
        layer = layer
            .chunks(2)
            .enumerate()
            .map(|(k, pair)| match pair {
                [a, b] => Expr::bin(BinOp::ALL[k % BinOp::ALL.len()], a.clone(), b.clone()),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    Program::new(Reduce::Argmax, layer.pop().unwrap())
}

#[test]
fn large_program_on_ten_thousand_points_is_fast() {
    let p = large_program();
    p.check().unwrap();
    let mut rng = seeds::rng(3);
    let (m, v, inc) = common::random_af_input(&mut rng, 10_000);
    let inp = AfInput::new(m, v, inc).unwrap();
    let ei = Program::expected_improvement();
    assert!(p.node_count() > afdsl::MAX_NODES / 2);
    for prog in [&ei, &p] {
        let _ = prog.evaluate(&inp);
        let start = Instant::now();
        let _ = prog.evaluate(&inp);
        let took = start.elapsed();
        assert!(took < Duration::from_millis(50), "{} nodes took {took:?}", prog.node_count());
    }
}

#[test]
fn ei_program_text_is_canonical() {
    let p = afdsl::parse(afdsl::EI_TEXT).unwrap();
    assert_eq!(p, Program::expected_improvement());
    assert_eq!(p.render(), afdsl::EI_TEXT);
}

#[test]
fn size_bounds_are_enforced() {
    let mut deep = Expr::Var(Var::Mean);
    for _ in 0..afdsl::MAX_DEPTH + 1 {
        deep = Expr::neg(deep);
    }
    assert!(Program::new(Reduce::Argmax, deep).check().is_err());
    let text = format!("argmax({})", vec!["MEAN"; afdsl::MAX_NODES].join(" + "));
    assert!(matches!(afdsl::parse(&text), Err(afdsl::DslError::TooLarge(_))));
}
