#![no_main]

use libfuzzer_sys::fuzz_target;
use qsg_core::PairPartition;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = PairPartition::new(data) {
        assert_eq!(p.pairs().len() * 2, p.k());
        let _ = p.crossing_number();
        if p.k() <= 12 {
            let _ = p.pattern_trace_sum();
        }
    }
});
