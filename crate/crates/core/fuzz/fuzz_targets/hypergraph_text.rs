#![no_main]

use libfuzzer_sys::fuzz_target;
use qsg_core::Hypergraph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = Hypergraph::parse(text) {
        let again = Hypergraph::parse(&g.to_text()).expect("canonical text parses");
        assert_eq!(g, again);
        let _ = g.max_hyperedge_degree();
    }
});
