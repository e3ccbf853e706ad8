#![no_main]

use libfuzzer_sys::fuzz_target;
use monothresh::io::{parse_family, to_canonical_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = parse_family(text) {
        let again = parse_family(&to_canonical_json(&f)).expect("canonical output reparses");
        assert_eq!(again, f);
    }
});
