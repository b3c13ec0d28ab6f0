#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(config) = hmorph_geodsl::parse_bytes(data) {
        // canonical output must parse back to the same statements
        let printed = config.to_string();
        let again = hmorph_geodsl::parse_statements(&printed).expect("canonical form parses");
        assert_eq!(again, config.statements);
    }
});
