//! Function expressions. Parsed functions are also evaluated at a few points,
//! which must return a value or an error.

#![no_main]

use libfuzzer_sys::fuzz_target;
use lochardy::holo::HoloFn;
use lochardy::C64;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = HoloFn::from_json(text) else { return };
    for z in [C64::new(0.0, 0.0), C64::new(1.0, 0.25), C64::new(3.0, -1.0)] {
        let _ = f.eval(z);
    }
    let once = f.to_json();
    let back = HoloFn::from_json(&once).expect("emitted function parses");
    assert_eq!(back.to_json(), once);
});
