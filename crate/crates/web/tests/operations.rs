use zmc_web::{classify_json, dualize_json, solve_json};

#[test]
fn classify_marks_the_degenerate_line() {
    let doc = classify_json("y + x^2", &[-1.0, 1.0, -1.0, 1.0], 5);
    assert_eq!(doc["nx"], 5);
    let classes = doc["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 25);
    assert_eq!(classes[2], "light-degenerate");
    assert_eq!(classes[0], "time-like");
    assert!(doc["values"][2].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn dualize_helicoid_matches_catenoid() {
    let base = -(2f64.sqrt().asinh());
    let doc = dualize_json("atan2(y, x)", &[1.0, 2.0, 1.0, 2.0], 33, false, 1, base);
    let values = doc["values"].as_array().unwrap();
    let h = 1.0 / 32.0;
    for (k, v) in values.iter().enumerate() {
        let (x, y) = (1.0 + h * (k % 33) as f64, 1.0 + h * (k / 33) as f64);
        assert!((v.as_f64().unwrap() + x.hypot(y).asinh()).abs() < 1e-7);
    }
}

#[test]
fn solve_reports_convergence() {
    let doc = solve_json("maximal", "-asinh(sqrt(x^2 + y^2))", &[1.0, 2.0, 1.0, 2.0], 17);
    assert!(doc["iterations"].as_u64().unwrap() >= 1);
    assert!(doc["residual_history"].as_array().unwrap().last().unwrap().as_f64().unwrap() < 1e-10);
    assert!(doc["min_b"].as_f64().unwrap() > 0.0);
}

#[test]
fn errors_come_back_as_json() {
    assert_eq!(classify_json("x +", &[-1.0, 1.0, -1.0, 1.0], 5)["error"]["kind"], "syntax_error");
    assert_eq!(classify_json("x", &[-1.0, 1.0, -1.0, 1.0], 1000)["error"]["kind"], "invalid_input");
    assert_eq!(dualize_json("x", &[-1.0, 1.0, -1.0, 1.0], 9, true, 1, 0.0)["error"]["kind"], "sonic_point");
    assert_eq!(solve_json("maximal", "3*x", &[0.0, 1.0, 0.0, 1.0], 9)["error"]["kind"], "causal_type_violation");
}
