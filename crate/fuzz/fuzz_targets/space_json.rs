//! Metric-space documents: arbitrary text must parse or error, never panic.
//! Accepted spaces must survive a serialize/parse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use lochardy::space::Space;

fuzz_target!(|data: &[u8]| {
    // Distance matrices are quadratic in the point count.
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(space) = Space::from_json(text) else { return };
    let once = space.to_json();
    let back = Space::from_json(&once).expect("emitted space parses");
    assert_eq!(back.to_json(), once);
});
