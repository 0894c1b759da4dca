#![no_main]

use bethe_core::GraphKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(kind) = text.parse::<GraphKind>() else { return };
    let small = match &kind {
        GraphKind::Torus { rows, cols } => rows.saturating_mul(*cols) <= 4096,
        GraphKind::Cycle(n) | GraphKind::Chain(n) => *n <= 4096,
        GraphKind::Complete(n) => *n <= 128,
        GraphKind::File(_) => false,
    };
    if small {
        let _ = kind.build();
    }
});
