use std::f64::consts::FRAC_PI_4;

use hmorph::hermitian::classify_structure;
use hmorph::{DiffConfig, SamplePlan};
use hmorph_geodsl::*;

const SPHERE: &str = "\
# unit sphere in polar coordinates, with its rotation structure
dim = 2
domain x1 in [0.2, 2.9]
domain x2 in [-3, 3]
g = [[1, 0],
     [0, sin(x1)^2]]
J = [[0, -sin(x1)], [1 / sin(x1), 0]]
map height : R1 = [cos(x1)]
map stereo : CP1 = [cos(x2) * sin(x1) / (1 - cos(x1)), -sin(x2) * sin(x1) / (1 - cos(x1))]
";

fn eval(src: &str, x: &[f64]) -> Result<f64> {
    parse_expr(src, x.len().max(1))?.eval(x)
}

#[test]
fn precedence_and_associativity() {
    assert_eq!(eval("2+3*4^2", &[]).unwrap(), 50.0);
    assert_eq!(eval("-x1^2", &[3.0]).unwrap(), -9.0);
    assert_eq!(eval("2^3^2", &[]).unwrap(), 512.0);
    assert_eq!(eval("2^-1", &[]).unwrap(), 0.5);
    assert_eq!(eval("8/4/2", &[]).unwrap(), 1.0);
    assert_eq!(eval("1-2-3", &[]).unwrap(), -4.0);
    assert_eq!(eval("(-2)^2", &[]).unwrap(), 4.0);
    assert_eq!(eval("- -x1", &[2.0]).unwrap(), 2.0);
}

#[test]
fn evaluation_examples() {
    assert_eq!(eval("x1*x2", &[2.0, 3.0]).unwrap(), 6.0);
    assert_eq!(eval("atan2(x2, x1)", &[1.0, 1.0]).unwrap(), FRAC_PI_4);
    assert_eq!(eval("exp(log(x1))", &[2.5]).unwrap(), 2.5_f64.ln().exp());
    for bad in ["sqrt(x1)", "log(x1)", "1/(x1+1)", "exp(-x1 * 1000)"] {
        let e = eval(bad, &[-1.0]).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::Evaluation, "{bad}: {e}");
    }
}

#[test]
fn syntax_errors_carry_positions() {
    let e = parse("dim = 2\ng = [[1,]").unwrap_err();
    assert!(matches!(e, DslError::Syntax { pos: Pos { line: 2, col: 9 }, .. }), "{e:?}");
    let e = parse_expr("sin(x1", 1).unwrap_err();
    assert!(matches!(e, DslError::Syntax { .. }));
    let e = parse_expr("atan2(x1)", 1).unwrap_err();
    assert!(matches!(e, DslError::Syntax { .. }));
    let e = parse_expr("1 $ 2", 1).unwrap_err();
    assert_eq!(e.pos(), Some(Pos { line: 1, col: 3 }));
}

#[test]
fn symbols_are_checked_against_dimension() {
    let e = parse("dim = 2\ndomain x1 in [0, 1]\ndomain x2 in [0, 1]\ng[1][1] = x3").unwrap_err();
    assert!(matches!(e, DslError::UnknownSymbol { ref symbol, pos: Pos { line: 4, col: 11 } } if symbol == "x3"), "{e:?}");
    assert!(matches!(parse_expr("x0", 2), Err(DslError::UnknownSymbol { .. })));
    assert!(matches!(parse_expr("y", 2), Err(DslError::UnknownSymbol { .. })));
}

#[test]
fn dimension_mismatches() {
    let e = parse("dim = 2\ng = [[1, 0]]").unwrap_err();
    assert!(matches!(e, DslError::DimensionMismatch { expected: 2, found: 1, .. }), "{e:?}");
    let e = parse("dim = 2\ng[3][1] = 1").unwrap_err();
    assert!(matches!(e, DslError::DimensionMismatch { expected: 2, found: 3, .. }), "{e:?}");
    let e = parse("dim = 2\ndomain x1 in [0, 1]\ndomain x2 in [0, 1]\nmap f : CP1 = [x1]").unwrap_err();
    assert!(matches!(e, DslError::DimensionMismatch { expected: 2, found: 1, .. }), "{e:?}");
}

#[test]
fn semantic_errors() {
    for (src, what) in [
        ("g = [[1]]", "dim first"),
        ("dim = 1\ndim = 1", "duplicate dim"),
        ("dim = 0", "zero dim"),
        ("dim = 1", "missing domain"),
        ("dim = 1\ndomain x1 in [1, 0]", "empty domain"),
        ("dim = 1\ndomain x1 in [0, x1]", "non-constant bound"),
        ("dim = 1\ndomain x1 in [0, 1]\nmap f : R1 = [x1]\nmap f : R1 = [x1]", "duplicate map"),
    ] {
        let e = parse(src).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::Syntax, "{what}: {e}");
    }
}

#[test]
fn load_checks_reject_bad_structures() {
    let base = "dim = 2\ndomain x1 in [0.5, 1]\ndomain x2 in [0, 1]\n";
    let e = parse(&format!("{base}J = [[0, 1], [1, 0]]")).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Evaluation, "{e}");
    // J² = −I but not orthogonal for the identity metric
    let e = parse(&format!("{base}J = [[0, -2], [0.5, 0]]")).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Evaluation, "{e}");
    let e = parse(&format!("{base}g = [[1, 0], [0, -1]]")).unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Evaluation, "{e}");
    let e = parse("dim = 1\ndomain x1 in [0, 1]\nJ[1][1] = 0").unwrap_err();
    assert_eq!(e.kind(), ErrorKind::Evaluation, "{e}");
}

#[test]
fn asymmetric_metric_is_symmetrized_with_warning() {
    let c = parse("dim = 2\ndomain x1 in [0, 1]\ndomain x2 in [0, 1]\ng[1][2] = 0.2").unwrap();
    assert_eq!(c.warnings.len(), 1);
    let g = c.metric_at(&[0.5, 0.5]).unwrap();
    assert_eq!(g[(0, 1)], 0.1);
    assert_eq!(g[(1, 0)], 0.1);
    let c = parse("dim = 2\ndomain x1 in [0, 1]\ndomain x2 in [0, 1]").unwrap();
    assert!(c.warnings.is_empty());
}

#[test]
fn entry_statement_matches_direct_computation() {
    let c = parse("dim = 2\ndomain x1 in [0.1, 3]\ndomain x2 in [-3, 3]\ng[2][2] = sin(x1)^2").unwrap();
    for x in c.probes() {
        let g = c.metric_at(x.as_slice()).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], x[0].sin().powf(2.0));
        assert_eq!(g[(0, 1)], 0.0);
    }
}

#[test]
fn sphere_config_builds_a_kahler_surface() {
    let c = parse(SPHERE).unwrap();
    assert_eq!(c.dim, 2);
    assert_eq!(c.maps.len(), 2);
    let model = c.model();
    let cfg = DiffConfig::default();
    let plan = SamplePlan::for_config(1, 10, &cfg);
    let rep = classify_structure(model.structure.as_ref().unwrap(), &plan, &cfg).unwrap();
    assert!(rep.verdicts.kahler && rep.verdicts.integrable, "{rep:?}");
    let stereo = model.map("stereo").unwrap();
    assert_eq!(stereo.target.dim, 2);
    let x = c.probes().remove(0);
    assert!(hmorph::maps::holomorphy_residual(stereo, &x).unwrap() < 1e-6);
    assert!(model.map("missing").is_none());
}

#[test]
fn canonical_printing() {
    let c = parse(SPHERE).unwrap();
    let printed = c.to_string();
    assert!(printed.starts_with("dim = 2\ndomain x1 in [0.2, 2.9]\n"));
    assert!(printed.contains("g = [[1, 0], [0, sin(x1)^2]]"));
    assert!(!printed.contains('#'));
    assert_eq!(parse(&printed).unwrap().statements, c.statements);
    let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    let no_comments: String = SPHERE.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&printed), strip(&no_comments));
}

#[test]
fn invalid_utf8_is_a_syntax_error() {
    let e = parse_bytes(b"dim = 1\n\xff").unwrap_err();
    assert!(matches!(e, DslError::Syntax { pos: Pos { line: 2, col: 1 }, .. }), "{e:?}");
}

#[test]
fn nesting_is_bounded() {
    let deep = format!("{}x1{}", "(".repeat(10_000), ")".repeat(10_000));
    assert!(matches!(parse_expr(&deep, 1), Err(DslError::Syntax { .. })));
    let negs = format!("{}x1", "-".repeat(10_000));
    assert!(matches!(parse_expr(&negs, 1), Err(DslError::Syntax { .. })));
    let pows = vec!["x1"; 10_000].join("^");
    assert!(matches!(parse_expr(&pows, 1), Err(DslError::Syntax { .. })));
    let ok = format!("{}x1{}", "(".repeat(20), ")".repeat(20));
    assert_eq!(parse_expr(&ok, 1).unwrap(), Expr::Var(0));
}
