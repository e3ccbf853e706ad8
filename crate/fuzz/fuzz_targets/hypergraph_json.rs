#![no_main]

use libfuzzer_sys::fuzz_target;
use monothresh::io::{parse_hypergraph, to_canonical_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(h) = parse_hypergraph(text) {
        let again = parse_hypergraph(&to_canonical_json(&h)).expect("canonical output reparses");
        assert_eq!(again, h);
    }
});
