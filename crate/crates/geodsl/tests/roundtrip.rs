use hmorph_geodsl::*;
use proptest::prelude::*;

const DIM: usize = 3;

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..1000).prop_map(f64::from),
        (0.0f64..100.0),
        Just(1e-7),
        Just(2.5e20),
        Just(0.1),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![number().prop_map(Expr::Num), (0..DIM).prop_map(Expr::Var)];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::negate),
            (
                prop_oneof![
                    Just(BinOp::Add),
                    Just(BinOp::Sub),
                    Just(BinOp::Mul),
                    Just(BinOp::Div),
                    Just(BinOp::Pow)
                ],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            (0..6usize, inner.clone()).prop_map(|(k, a)| Expr::Call(Func::ALL[k], vec![a])),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Atan2, vec![a, b])),
        ]
    })
}

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Metric), Just(Field::Structure)]
}

fn statement() -> impl Strategy<Value = Statement> {
    prop_oneof![
        (0..DIM, expr(), expr()).prop_map(|(axis, lo, hi)| Statement::Domain { axis, lo, hi }),
        (field(), proptest::collection::vec(proptest::collection::vec(expr(), DIM), DIM))
            .prop_map(|(field, rows)| Statement::Matrix { field, rows }),
        (field(), 0..DIM, 0..DIM, expr()).prop_map(|(field, i, j, expr)| Statement::Entry { field, i, j, expr }),
        (
            "[a-z_][a-z0-9_]{0,8}",
            prop_oneof![Just(Target::SelfChart), Just(Target::Euclidean(2)), Just(Target::Projective(1))],
            proptest::collection::vec(expr(), 3)
        )
            .prop_map(|(name, target, mut components)| {
                components.truncate(target.dim(DIM));
                Statement::Map {
                    name,
                    target,
                    components,
                }
            }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(e in expr()) {
        let printed = e.to_string();
        let back = parse_expr(&printed, DIM).unwrap();
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn statements_round_trip(body in proptest::collection::vec(statement(), 0..6)) {
        let mut stmts = vec![Statement::Dim(DIM)];
        stmts.extend(body);
        let src: String = stmts.iter().map(|s| format!("{s}\n")).collect();
        let back = parse_statements(&src).unwrap();
        prop_assert_eq!(&back, &stmts);
        let reprinted: String = back.iter().map(|s| format!("{s}\n")).collect();
        prop_assert_eq!(reprinted, src);
    }

    #[test]
    fn parser_never_panics(src in "\\PC{0,200}") {
        let _ = parse(&src);
    }

    #[test]
    fn parser_never_panics_on_near_valid_input(
        tokens in proptest::collection::vec(
            prop_oneof![
                Just("dim"), Just("="), Just("2"), Just("domain"), Just("x1"), Just("x2"), Just("in"),
                Just("["), Just("]"), Just(","), Just("g"), Just("J"), Just("map"), Just(":"), Just("R2"),
                Just("CP1"), Just("sin"), Just("("), Just(")"), Just("^"), Just("-"), Just("*"), Just("\n"),
                Just("0.5"), Just("atan2"), Just("self"), Just("/"), Just("#"),
            ],
            0..60,
        )
    ) {
        let src = tokens.join(" ");
        if let Err(e) = parse(&src) {
            prop_assert!(matches!(e.kind(), ErrorKind::Syntax | ErrorKind::Evaluation));
        }
    }
}
