#![no_main]

use libfuzzer_sys::fuzz_target;
use markerlab::expr::parse_set_expr;
use markerlab::{Point, SystemSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Cap pathological nesting so the fuzzer explores the grammar
    // instead of the allocator.
    if text.len() > 512 {
        return;
    }
    for sys in [
        SystemSpec::IntegerLine { labels: 1 },
        SystemSpec::DyadicOdometer,
        SystemSpec::LabeledLattice { labels: 2 },
    ] {
        if let Ok(handle) = parse_set_expr(text, sys) {
            // Whatever parsed must evaluate without panicking, and
            // complements must stay coherent.
            let x = markerlab::system::base_point(&sys, 0);
            let m = handle.eval(&x, 64);
            let n = handle.not().eval(&x, 64);
            if m.is_resolved() {
                assert_eq!(m.not(), n);
            }
            let _ = Point::parse("line:0:0");
        }
    }
});
