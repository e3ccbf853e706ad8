#![no_main]

use libfuzzer_sys::fuzz_target;
use monothresh::io::{parse_graph, to_canonical_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = parse_graph(text) {
        let again = parse_graph(&to_canonical_json(&g)).expect("canonical output reparses");
        assert_eq!(again, g);
    }
});
