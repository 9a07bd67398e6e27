#![no_main]

use libfuzzer_sys::fuzz_target;
use qsg_core::config::parse_artifact_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_artifact_config(text) {
        // a parsed header must survive a write/read cycle
        let again = parse_artifact_config(&cfg.header_line()).expect("header parses");
        assert_eq!(cfg.command, again.command);
        if let Some(g) = &cfg.graph {
            let _ = g.build();
        }
    }
});
