#![no_main]

use libfuzzer_sys::fuzz_target;
use qsg_core::config::RangeSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(r) = text.parse::<RangeSpec>() {
        let v = r.values();
        assert!(!v.is_empty());
        assert_eq!(r.to_string().parse::<RangeSpec>().unwrap(), r);
    }
});
