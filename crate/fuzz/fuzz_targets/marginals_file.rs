#![no_main]

use bethe_core::io::parse_marginals;
use bethe_core::model::POLYTOPE_TOL;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(mu) = parse_marginals(text) else { return };
    let n = mu.node.len();
    if n >= 2 && mu.edge.len() == n - 1 && n <= 64 {
        let g = bethe_core::Graph::chain(n).unwrap();
        if mu.check(&g, POLYTOPE_TOL).is_ok() {
            let t = mu.to_table(&g).expect("checked marginals convert");
            assert_eq!(t.to_minimal(&g).expect("table converts back"), mu);
        }
    }
});
