#![no_main]

use libfuzzer_sys::fuzz_target;
use lochardy::complex::WeightedComplex;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    // Short inputs double as generator names like `grid:3x4`.
    if text.len() < 32 {
        let _ = WeightedComplex::generate(text);
    }
    let Ok(k) = WeightedComplex::from_json(text) else { return };
    let once = k.to_json();
    let back = WeightedComplex::from_json(&once).expect("emitted complex parses");
    assert_eq!(back.to_json(), once);
});
