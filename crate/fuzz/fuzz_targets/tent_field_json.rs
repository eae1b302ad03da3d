#![no_main]

use libfuzzer_sys::fuzz_target;
use lochardy::tent::TentField;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(field) = TentField::from_json(text) else { return };
    let once = field.to_json();
    let back = TentField::from_json(&once).expect("emitted field parses");
    assert_eq!(back.to_json(), once);
});
