#![no_main]

use libfuzzer_sys::fuzz_target;
use markerlab::Point;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(point) = Point::parse(text) {
        // Canonical display must re-parse to the same point.
        let shown = point.to_string();
        let again = Point::parse(&shown).expect("display output parses");
        assert_eq!(again, point, "literal roundtrip broke for {shown}");
    }
});
