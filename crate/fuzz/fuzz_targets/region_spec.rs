#![no_main]

use libfuzzer_sys::fuzz_target;
use lochardy::tent::RegionSpec;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = RegionSpec::from_json(text) else { return };
    let once = serde_json::to_string(&spec).expect("region serializes");
    assert_eq!(RegionSpec::from_json(&once).expect("emitted region parses"), spec);
});
