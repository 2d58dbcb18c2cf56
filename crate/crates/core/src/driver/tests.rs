use super::*;
use crate::callset::tests::{DER, DER_QUERY, DIV};
use crate::frontend::{parse_program, parse_query_spec};
use crate::polyalg::{concrete, Var};

fn setup(src: &str, ann: &[&str]) -> (Program, QuerySpec) {
    let p = parse_program(src).unwrap();
    let q = parse_query_spec(ann, &p).unwrap();
    (p, q)
}

const ACK: &str = "
    ack(0, N, s(N)).
    ack(s(M), 0, R) :- ack(M, s(0), R).
    ack(s(M), s(N), R) :- ack(s(M), N, R1), ack(M, R1, R).
";

fn cp(text: &str) -> VPoly {
    VPoly::parse_concrete(text).unwrap()
}

fn reference_witness(o: &str) -> Witness {
    let mut i = Interpretation::new();
    for (s, n, poly) in [
        ("+", 2, "X1 + X2 + 2"),
        ("*", 2, "X1 + X2 + 2"),
        ("der", 1, "X1^2 + 2*X1 + 2"),
        ("u", 0, "1"),
        ("1", 0, "1"),
        ("d", 2, "X1"),
    ] {
        i.insert(s.into(), n, cp(poly));
    }
    Witness {
        shape: Shape::SimpleMixed,
        interpretation: i,
        interargs: [("d".into(), (cp("X1"), cp(o)))].into_iter().collect(),
        premconc: Vec::new(),
    }
}

#[test]
fn der_needs_simple_mixed() {
    let (p, q) = setup(DER, DER_QUERY);
    let v = prove(&p, &q, &Config::default());
    let Outcome::Yes(w) = &v.outcome else { panic!("{:?}", v.outcome) };
    assert_eq!(w.shape, Shape::SimpleMixed);
    assert_eq!(v.stages[1].name, "linear");
    assert_eq!(v.stages[1].result, StageResult::Unsat);
    assert_eq!(v.stages[2].result, StageResult::Sat);
    verify_witness(&p, &q, w, 5).unwrap();
}

#[test]
fn div_is_linear() {
    let (p, q) = setup(DIV, &["%% query: div(g,g,a)"]);
    let v = prove(&p, &q, &Config::default());
    let Outcome::Yes(w) = &v.outcome else { panic!("{:?}", v.outcome) };
    assert_eq!(w.shape, Shape::Linear);
    // the simple-mixed stage is never attempted
    assert_eq!(v.stages.len(), 2);
}

#[test]
fn ackermann_is_maybe() {
    let (p, q) = setup(ACK, &["%% query: ack(g,g,a)"]);
    let v = prove(&p, &q, &Config::default());
    assert!(matches!(v.outcome, Outcome::Maybe(_)), "{:?}", v.outcome);
}

#[test]
fn strict_relation_verifies() {
    let (p, q) = setup(DER, DER_QUERY);
    let s = verify_witness(&p, &q, &reference_witness("X2 + 1"), 5).unwrap();
    assert_eq!(s.conditions, 10);
    assert_eq!(s.critical_paths, 1);
    assert!(!s.sampled);
}

#[test]
fn non_strict_relation_fails_the_last_decrease() {
    let (p, q) = setup(DER, DER_QUERY);
    let err = verify_witness(&p, &q, &reference_witness("X2"), 5).unwrap_err();
    let VerifyFailure::Condition { condition, valuation } = err else { panic!("{err}") };
    assert_eq!(condition, "decrease for body atom 2 of clause 4");
    // DX equals |der(X)|
    let x = valuation.0[&Var::new("X")];
    assert_eq!(valuation.0[&Var::new("DX")], x * x + 2 * x + 2);
}

#[test]
fn zero_interpretation_fails_first_decrease() {
    let (p, q) = setup(DER, DER_QUERY);
    let mut w = reference_witness("X2");
    let zero = w.interpretation.iter().map(|(s, n, _)| (s.clone(), n)).collect::<Vec<_>>();
    for (s, n) in zero {
        w.interpretation.insert(s, n, VPoly::zero());
    }
    w.interargs = [("d".into(), (VPoly::zero(), VPoly::zero()))].into_iter().collect();
    let err = verify_witness(&p, &q, &w, 5).unwrap_err();
    assert_eq!(
        err.to_string(),
        "decrease for body atom 1 of clause 2 fails at every valuation"
    );
}

#[test]
fn relevant_variable_breaks_rigidity() {
    let (p, q) = setup(DER, DER_QUERY);
    let mut w = reference_witness("X2 + 1");
    w.interpretation.insert("d".into(), 2, concrete(&[(1, &[("X1", 1)]), (1, &[("X2", 1)])]));
    let err = verify_witness(&p, &q, &w, 5).unwrap_err();
    assert!(matches!(err, VerifyFailure::NotRigid { .. }), "{err}");
}

#[test]
fn forced_linear_der_is_maybe() {
    let (p, q) = setup(DER, DER_QUERY);
    let config = Config { shape: ShapeChoice::Only(Shape::Linear), ..Config::default() };
    let v = prove(&p, &q, &config);
    let Outcome::Maybe(why) = &v.outcome else { panic!("{:?}", v.outcome) };
    assert!(why.starts_with("linear"), "{why}");
    let text = report(&v, Format::Text);
    assert!(text.starts_with("MAYBE\nreason: linear"), "{text}");
}

#[test]
fn zero_budget_is_timeout() {
    let (p, q) = setup(DER, DER_QUERY);
    let config = Config { timeout: Duration::ZERO, ..Config::default() };
    let v = prove(&p, &q, &config);
    assert!(matches!(v.outcome, Outcome::Timeout));
    assert_eq!(report(&v, Format::Text).lines().next(), Some("TIMEOUT"));
}

#[test]
fn yes_report() {
    let (p, q) = setup(DER, DER_QUERY);
    let v = prove(&p, &q, &Config::default());
    let text = report(&v, Format::Text);
    assert_eq!(text.lines().next(), Some("YES"));
    let der = text.lines().find(|l| l.starts_with("I(der) = ")).unwrap();
    assert!(!der.contains('-'), "{der}");
    assert!(text.contains("R(d): "));
    let json: serde_json::Value = serde_json::from_str(&report(&v, Format::Json)).unwrap();
    assert_eq!(json["verdict"], "YES");
    assert_eq!(json["shape"], "simple-mixed");
    assert_eq!(json["interpretation"]["der"]["arity"], 1);
    assert_eq!(json["stages"][1]["result"], "unsat");
}
