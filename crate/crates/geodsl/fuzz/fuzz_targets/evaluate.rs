#![no_main]

use libfuzzer_sys::fuzz_target;

// Layout: a count byte, that many (mod 5) little-endian f64 coordinates,
// then the expression text.
fuzz_target!(|data: &[u8]| {
    let Some((&count, data)) = data.split_first() else {
        return;
    };
    let n = (count as usize % 5).min(data.len() / 8);
    let point: Vec<f64> = data[..8 * n]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let Ok(src) = std::str::from_utf8(&data[8 * n..]) else {
        return;
    };
    if let Ok(expr) = hmorph_geodsl::parse_expr(src, 4) {
        match expr.eval(&point) {
            Ok(v) => assert!(v.is_finite()),
            Err(e) => assert_eq!(e.kind(), hmorph_geodsl::ErrorKind::Evaluation),
        }
        let again = hmorph_geodsl::parse_expr(&expr.to_string(), 4).expect("printed form parses");
        assert_eq!(again, expr);
    }
});
