#![no_main]

use bethe_cli::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = Config::parse(text) {
        let _ = cfg.get::<f64>("resolution");
        let _ = cfg.get::<u64>("seed");
        let _ = cfg.flag("empirical");
    }
});
