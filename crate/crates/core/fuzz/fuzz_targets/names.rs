#![no_main]

use libfuzzer_sys::fuzz_target;
use qsg_core::{CouplingDistribution, LimitLaw};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(law) = text.parse::<LimitLaw>() {
        assert_eq!(law.name().parse::<LimitLaw>().unwrap(), law);
    }
    if let Ok(d) = text.parse::<CouplingDistribution>() {
        assert_eq!(d.name(), text);
    }
});
