//! Replays the checked-in fuzz seeds through the same assertions the fuzz
//! targets make.

use std::fs;
use std::path::Path;

use hmorph_geodsl::*;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn parse_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("parse") {
        match parse_bytes(&data) {
            Ok(config) => {
                accepted += 1;
                assert_eq!(parse_statements(&config.to_string()).unwrap(), config.statements, "{name}");
            }
            Err(e) => assert!(matches!(e.kind(), ErrorKind::Syntax | ErrorKind::Evaluation), "{name}"),
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn evaluate_seeds() {
    for (name, data) in seeds("evaluate") {
        let (&count, rest) = data.split_first().unwrap();
        let n = (count as usize % 5).min(rest.len() / 8);
        let point: Vec<f64> = rest[..8 * n]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let src = std::str::from_utf8(&rest[8 * n..]).unwrap();
        let expr = parse_expr(src, 4).unwrap_or_else(|e| panic!("{name}: {e}"));
        match expr.eval(&point) {
            Ok(v) => assert!(v.is_finite()),
            Err(e) => assert_eq!(e.kind(), ErrorKind::Evaluation, "{name}"),
        }
        assert_eq!(parse_expr(&expr.to_string(), 4).unwrap(), expr);
    }
}
