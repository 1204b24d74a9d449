#![allow(dead_code)]

use zmc_core::{GraphField, Params, Rect};

/// Expressions exercised by the parser, printer and derivative checks,
/// each with a rectangle on which it is smooth.
pub const CORPUS: &[(&str, [f64; 4])] = &[
    ("x", [-2.0, 2.0, -2.0, 2.0]),
    ("y", [-2.0, 2.0, -2.0, 2.0]),
    ("0.3*x + 0.4*y - 1", [-2.0, 2.0, -2.0, 2.0]),
    ("x*cos(0.7) + y*sin(0.7) + 0.2", [-2.0, 2.0, -2.0, 2.0]),
    ("x^2 + y^2", [-2.0, 2.0, -2.0, 2.0]),
    ("x*y", [-2.0, 2.0, -2.0, 2.0]),
    ("y + x^2", [-2.0, 2.0, -2.0, 2.0]),
    ("y + x^3", [-2.0, 2.0, -2.0, 2.0]),
    ("y + exp(x)", [-2.0, 2.0, -2.0, 2.0]),
    ("y + exp(-x)", [-2.0, 2.0, -2.0, 2.0]),
    ("y + sin(x)", [0.0, 6.4, -1.0, 1.0]),
    ("atan2(y, x)", [1.0, 2.0, 1.0, 2.0]),
    ("-asinh(sqrt(x^2 + y^2))", [1.0, 2.0, 1.0, 2.0]),
    ("sqrt(x^2 + y^2)", [0.5, 2.0, 0.5, 2.0]),
    ("y + log(tan(x))", [0.1, 1.4, -1.0, 1.0]),
    ("log(cos(y)/cos(x))", [-1.0, 1.0, -1.0, 1.0]),
    ("x - sqrt(1 - y^2)", [-2.0, 2.0, -0.9, 0.9]),
    ("x + sqrt(1 - y^2)", [-2.0, 2.0, -0.9, 0.9]),
    ("sinh(x)*cosh(y)", [-1.0, 1.0, -1.0, 1.0]),
    ("tanh(x - y)", [-2.0, 2.0, -2.0, 2.0]),
    ("atan(x*y)", [-2.0, 2.0, -2.0, 2.0]),
    ("acosh(2 + x^2 + y^2)", [-2.0, 2.0, -2.0, 2.0]),
    ("abs(x) + y", [0.5, 2.0, -1.0, 1.0]),
    ("exp(-(x^2 + y^2)/2)", [-2.0, 2.0, -2.0, 2.0]),
    ("x^y", [0.5, 2.0, 0.5, 2.0]),
    ("(x^2 - y^2)/(1 + x^2 + y^2)", [-2.0, 2.0, -2.0, 2.0]),
    ("tan(x/3)*y", [-2.0, 2.0, -2.0, 2.0]),
    ("2^x + pi*y - e", [-2.0, 2.0, -2.0, 2.0]),
    ("-x^2 + 3*x*y - y^3/7", [-2.0, 2.0, -2.0, 2.0]),
    ("sqrt(1 + x^2)*sin(y)", [-2.0, 2.0, -2.0, 2.0]),
    ("x^1.5 + y^-2", [0.5, 2.0, 0.5, 2.0]),
    ("cos(x)^2 + sin(y)^2", [-2.0, 2.0, -2.0, 2.0]),
    ("1/(x^2 + y^2)", [0.5, 2.0, 0.5, 2.0]),
    ("a*x^2 - b*y", [-2.0, 2.0, -2.0, 2.0]),
    ("1.5e-1*x - 2E2*y^2/1e3", [-2.0, 2.0, -2.0, 2.0]),
];

pub fn params() -> Params {
    Params::from([("a".to_string(), 0.5), ("b".to_string(), -1.25)])
}

pub fn field(text: &str, d: [f64; 4]) -> GraphField {
    GraphField::parse(text, &params(), Rect::new(d[0], d[1], d[2], d[3]).unwrap()).unwrap()
}

pub fn rect(d: [f64; 4]) -> Rect {
    Rect::new(d[0], d[1], d[2], d[3]).unwrap()
}
