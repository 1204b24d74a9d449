//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations, each returning a JSON document with a row-major grid
//! (`nx`, `ny`, `values`) that the page paints as a heat map:
//!
//! - [`classify`]: the causal function `B = 1 - |grad psi|^2` and the causal class per node;
//! - [`dualize`]: the dual potential or stream function;
//! - [`solve`]: a Dirichlet solve of the minimal or maximal equation.
//!
//! The `*_json` functions are plain Rust so they can be tested natively;
//! errors come back as `{"error": {"kind", "message"}}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;
use zmc_core::duality::{dualize as integrate, Direction, DualizeOptions, Epsilon};
use zmc_core::geometry::{classify_lattice, TAU_GRAD};
use zmc_core::solver::{solve as newton, BoundaryData, DirichletProblem, Equation};
use zmc_core::{parse, Error, GraphField, Lattice, Params, Rect};

/// Largest lattice side accepted from the page; keeps the tab responsive.
pub const MAX_SIDE: usize = 129;

fn lattice(domain: &[f64], n: usize) -> Result<Lattice, Error> {
    if domain.len() != 4 {
        return Err(Error::InvalidInput(format!("domain needs 4 numbers, got {}", domain.len())));
    }
    if !(3..=MAX_SIDE).contains(&n) {
        return Err(Error::InvalidInput(format!("resolution must be in 3..={MAX_SIDE}, got {n}")));
    }
    Lattice::new(Rect::new(domain[0], domain[1], domain[2], domain[3])?, n, n)
}

fn error_json(e: &Error) -> Value {
    json!({ "error": { "kind": e.code(), "message": e.to_string() } })
}

fn grid_json(lat: &Lattice, values: &[f64]) -> Value {
    json!({
        "nx": lat.nx,
        "ny": lat.ny,
        "domain": [lat.rect.x0, lat.rect.x1, lat.rect.y0, lat.rect.y1],
        "values": values,
    })
}

fn finish(r: Result<Value, Error>) -> Value {
    r.unwrap_or_else(|e| error_json(&e))
}

/// `B` and causal class at every node of an `n × n` lattice.
pub fn classify_json(field: &str, domain: &[f64], n: usize) -> Value {
    finish((|| {
        let lat = lattice(domain, n)?;
        let f = GraphField::parse(field, &Params::new(), lat.rect)?;
        let samples = classify_lattice(&f, &lat, f.default_tau_light(), TAU_GRAD)?;
        let b: Vec<f64> = samples.iter().map(|s| s.b).collect();
        let mut doc = grid_json(&lat, &b);
        doc["classes"] = samples.iter().map(|s| s.class.as_str()).collect();
        Ok(doc)
    })())
}

/// Dual field from the lower-left corner with value `base_value` there.
pub fn dualize_json(field: &str, domain: &[f64], n: usize, to_potential: bool, epsilon: i32, base_value: f64) -> Value {
    finish((|| {
        let lat = lattice(domain, n)?;
        let f = GraphField::parse(field, &Params::new(), lat.rect)?;
        let epsilon = match epsilon {
            1 => Epsilon::Plus,
            -1 => Epsilon::Minus,
            e => return Err(Error::InvalidInput(format!("epsilon must be +1 or -1, got {e}"))),
        };
        let direction = if to_potential { Direction::ToPotential } else { Direction::ToStream };
        let d = integrate(&f, &lat, lat.node(0, 0), base_value, direction, epsilon, &DualizeOptions::default())?;
        let mut doc = grid_json(&lat, d.phi.grid().expect("dualize returns a grid").values());
        doc["path_defect"] = json!(d.path_defect);
        Ok(doc)
    })())
}

/// Newton solve of the Dirichlet problem with boundary values from `boundary`.
pub fn solve_json(equation: &str, boundary: &str, domain: &[f64], n: usize) -> Value {
    finish((|| {
        let lat = lattice(domain, n)?;
        let equation: Equation = equation.parse()?;
        let boundary = parse(boundary, &Params::new())?;
        let sol = newton(&DirichletProblem::new(equation, lat, BoundaryData::Function(boundary)))?;
        let mut doc = grid_json(&lat, sol.grid.values());
        doc["iterations"] = json!(sol.report.iterations);
        doc["residual_history"] = json!(sol.report.residual_history);
        doc["min_b"] = json!(sol.report.min_b);
        Ok(doc)
    })())
}

#[wasm_bindgen]
pub fn classify(field: &str, domain: &[f64], n: usize) -> String {
    classify_json(field, domain, n).to_string()
}

#[wasm_bindgen]
pub fn dualize(field: &str, domain: &[f64], n: usize, to_potential: bool, epsilon: i32, base_value: f64) -> String {
    dualize_json(field, domain, n, to_potential, epsilon, base_value).to_string()
}

#[wasm_bindgen]
pub fn solve(equation: &str, boundary: &str, domain: &[f64], n: usize) -> String {
    solve_json(equation, boundary, domain, n).to_string()
}
