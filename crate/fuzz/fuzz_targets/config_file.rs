#![no_main]

use libfuzzer_sys::fuzz_target;
use markerlab_cli::config::{ExperimentConfig, Suite};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 4096 {
        return;
    }
    // Parsing must never panic; accepted configs must satisfy their own
    // validation invariants.
    if let Ok(cfg) = ExperimentConfig::from_sources(Suite::Rok2d, Some(text), &[]) {
        assert!(cfg.window >= 0);
        assert!(cfg.samples > 0 && cfg.len > 0 && cfg.starts > 0);
        let sys = cfg.system;
        assert!(cfg.horizon_for(sys) > 0);
    }
});
