//! Differential test of the expression evaluator against a separately
//! written tree evaluator, plus model-file round trips.

mod common;

use proptest::prelude::*;
use transs_core::catalog::{c_space, c_space_spec, standard_s_space, standard_s_space_spec};
use transs_core::expr::Expression;
use transs_core::model_file::{parse_model, serialize_model};

#[derive(Debug, Clone)]
enum Tree {
    Num(f64),
    Var(usize),
    Neg(Box<Tree>),
    Fun(&'static str, Box<Tree>),
    Op(char, Box<Tree>, Box<Tree>),
}

fn render(t: &Tree) -> String {
    match t {
        Tree::Num(v) => format!("{v:?}"),
        Tree::Var(i) => format!("x{}", i + 1),
        Tree::Neg(a) => format!("-({})", render(a)),
        Tree::Fun(f, a) => format!("{f}({})", render(a)),
        Tree::Op(op, a, b) => format!("({}) {op} ({})", render(a), render(b)),
    }
}

/// `None` marks a domain error.
fn reference(t: &Tree, x: &[f64]) -> Option<f64> {
    let v = match t {
        Tree::Num(v) => *v,
        Tree::Var(i) => x[*i],
        Tree::Neg(a) => -reference(a, x)?,
        Tree::Fun(f, a) => {
            let a = reference(a, x)?;
            match *f {
                "sin" => a.sin(),
                "cos" => a.cos(),
                "exp" => a.exp(),
                _ if a < 0.0 => return None,
                _ => a.sqrt(),
            }
        }
        Tree::Op(op, a, b) => {
            let (a, b) = (reference(a, x)?, reference(b, x)?);
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' if b == 0.0 => return None,
                '/' => a / b,
                _ if b == b.trunc() && b.abs() < 2.0e9 => a.powi(b as i32),
                _ if a < 0.0 => return None,
                _ => a.powf(b),
            }
        }
    };
    v.is_finite().then_some(v)
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (-5.0..5.0f64).prop_map(|v| Tree::Num((v * 100.0).round() / 100.0)),
        (0usize..3).prop_map(Tree::Var),
        (0i32..4).prop_map(|v| Tree::Num(v as f64)),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Tree::Neg(Box::new(a))),
            (prop::sample::select(vec!["sin", "cos", "exp", "sqrt"]), inner.clone())
                .prop_map(|(f, a)| Tree::Fun(f, Box::new(a))),
            (
                prop::sample::select(vec!['+', '-', '*', '/', '^']),
                inner.clone(),
                inner
            )
                .prop_map(|(op, a, b)| Tree::Op(op, Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn evaluator_matches_reference(t in tree(), x in prop::collection::vec(-3.0..3.0f64, 3)) {
        let text = render(&t);
        let e = Expression::parse(&text).unwrap();
        match (e.eval(&x).ok(), reference(&t, &x)) {
            (Some(a), Some(b)) => prop_assert!(a == b || (a - b).abs() <= 1e-12 * b.abs(), "{text}: {a} vs {b}"),
            (None, None) => {}
            (a, b) => prop_assert!(false, "{text}: {a:?} vs {b:?}"),
        }
    }

    /// Unparenthesized chains exercise precedence and associativity.
    #[test]
    fn chains_follow_precedence(
        nums in prop::collection::vec(1.0..4.0f64, 4),
        ops in prop::collection::vec(prop::sample::select(vec!['+', '-', '*', '/']), 3),
    ) {
        let nums: Vec<f64> = nums.iter().map(|v| (v * 10.0).round() / 10.0).collect();
        let text = format!("{:?} {} {:?} {} {:?} {} {:?}", nums[0], ops[0], nums[1], ops[1], nums[2], ops[2], nums[3]);
        // reference: fold multiplicative runs first, then additive left to right
        let mut terms = vec![nums[0]];
        let mut signs = vec![1.0];
        for (op, v) in ops.iter().zip(&nums[1..]) {
            match op {
                '*' => *terms.last_mut().unwrap() *= v,
                '/' => *terms.last_mut().unwrap() /= v,
                '+' => { terms.push(*v); signs.push(1.0) }
                _ => { terms.push(*v); signs.push(-1.0) }
            }
        }
        let expected: f64 = terms.iter().zip(&signs).map(|(t, s)| t * s).sum();
        let got = Expression::parse(&text).unwrap().eval(&[]).unwrap();
        prop_assert!((got - expected).abs() < 1e-12, "{text}");
    }
}

#[test]
fn power_is_right_associative_and_binds_tighter_than_unary_minus_base() {
    let e = Expression::parse("2^3^2").unwrap();
    assert_eq!(e.eval(&[]).unwrap(), 512.0);
    assert_eq!(Expression::parse("-2^2").unwrap().eval(&[]).unwrap(), 4.0);
}

#[test]
fn model_files_round_trip() {
    let mut rng = common::rng(7);
    for (spec, builtin) in [
        (c_space_spec(1, 1).unwrap(), c_space(1, 1).unwrap()),
        (standard_s_space_spec(1, 2).unwrap(), standard_s_space(1, 2).unwrap()),
    ] {
        let text = serialize_model(&spec);
        let parsed = parse_model(&text).unwrap();
        assert_eq!(serialize_model(&spec), text);
        for _ in 0..50 {
            let p = builtin.domain.sample(&mut rng, 0.9);
            let close = |a: nalgebra::DMatrix<f64>, b: nalgebra::DMatrix<f64>| (a - b).amax() < 1e-12;
            assert!(close(parsed.metric(&p).unwrap(), builtin.metric(&p).unwrap()));
            assert!(close(parsed.f_tensor(&p).unwrap(), builtin.f_tensor(&p).unwrap()));
            assert!(close(parsed.xi(&p).unwrap(), builtin.xi(&p).unwrap()));
            assert!(close(parsed.eta(&p).unwrap(), builtin.eta(&p).unwrap()));
        }
    }
}
