#![no_main]

use bethe_core::Graph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = Graph::from_json_str(text) {
        let back = Graph::from_json_str(&g.to_json_string()).expect("serialized graph parses");
        assert_eq!(back.edges(), g.edges());
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.num_edges());
    }
});
