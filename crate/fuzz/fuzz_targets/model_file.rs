#![no_main]

use bethe_core::io::{model_to_json, parse_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(model) = parse_model(text) else { return };
    // inline graphs only; specs and paths would reach the filesystem
    if let Some(bethe_core::io::GraphSource::Inline(g)) = &model.graph {
        if model.theta.validate(g).is_ok() {
            let again = parse_model(&model_to_json(g, &model.theta)).expect("written model parses");
            assert_eq!(again.theta, model.theta);
        }
    }
});
