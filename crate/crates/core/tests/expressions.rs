mod common;

use common::{field, params, CORPUS};
use proptest::prelude::*;
use zmc_core::expr::{BinOp, Constant, Expr, Func};
use zmc_core::{parse, Expression, Lattice, Point2};

#[test]
fn corpus_round_trips_through_printer() {
    assert!(CORPUS.len() >= 30);
    for (text, _) in CORPUS {
        let e = parse(text, &params()).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, &params()).unwrap();
        assert_eq!(again.tree(), e.tree(), "{text} printed as {printed}");
    }
}

/// Central differences of field values against the exact jets, at every
/// interior node of a 41×41 lattice.
fn ad_fd_defects(text: &str, d: [f64; 4]) -> (f64, f64) {
    let f = field(text, d);
    let lat = Lattice::new(f.domain(), 41, 41).unwrap();
    let v = |x: f64, y: f64| f.expression().unwrap().value_at(&[x, y]).unwrap();
    let h = 1e-5;
    let (mut first, mut second) = (0.0f64, 0.0f64);
    for p in lat.interior_points() {
        let j = f.jet2(p).unwrap();
        let (x, y) = (p.x, p.y);
        let fx = (v(x + h, y) - v(x - h, y)) / (2.0 * h);
        let fy = (v(x, y + h) - v(x, y - h)) / (2.0 * h);
        let fxx = (v(x + h, y) - 2.0 * v(x, y) + v(x - h, y)) / (h * h);
        let fyy = (v(x, y + h) - 2.0 * v(x, y) + v(x, y - h)) / (h * h);
        let fxy = (v(x + h, y + h) - v(x + h, y - h) - v(x - h, y + h) + v(x - h, y - h)) / (4.0 * h * h);
        let rel = |fd: f64, ad: f64| (fd - ad).abs() / ad.abs().max(1.0);
        first = first.max(rel(fx, j.gx)).max(rel(fy, j.gy));
        second = second.max(rel(fxx, j.hxx)).max(rel(fxy, j.hxy)).max(rel(fyy, j.hyy));
    }
    (first, second)
}

#[test]
fn ad_matches_finite_differences_on_corpus() {
    for (text, d) in CORPUS {
        let (first, second) = ad_fd_defects(text, *d);
        assert!(first < 1e-6, "{text}: first partials off by {first:e}");
        assert!(second < 1e-4, "{text}: second partials off by {second:e}");
    }
}

#[test]
fn jets_agree_with_evaluation() {
    for (text, d) in CORPUS {
        let f = field(text, *d);
        let p = Point2::new(0.5 * (d[0] + d[1]), 0.5 * (d[2] + d[3]) + 0.01);
        assert_eq!(f.jet2(p).unwrap().value, f.value(p).unwrap(), "{text}");
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..1000, 0u32..4).prop_map(|(m, s)| Expr::Num(m as f64 / 10f64.powi(s as i32))),
        (0usize..2).prop_map(Expr::Var),
        prop_oneof![Just(Constant::Pi), Just(Constant::E)].prop_map(Expr::Const),
        prop_oneof![Just(("a", 0.5)), Just(("b", -1.25))]
            .prop_map(|(n, v)| Expr::Param { name: n.to_string(), value: v }),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        let ops = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (ops, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            (0usize..Func::ALL.len(), inner.clone()).prop_map(|(k, a)| Expr::Call(Func::ALL[k], Box::new(a))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Atan2(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #[test]
    fn printed_trees_parse_back(tree in arb_expr()) {
        let e = Expression::new(tree, &["x", "y"]).unwrap();
        let printed = e.to_string();
        let back = parse(&printed, &params()).unwrap();
        prop_assert_eq!(back.tree(), e.tree(), "printed as {}", printed);
    }
}
