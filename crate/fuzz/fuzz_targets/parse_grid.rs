#![no_main]

use libfuzzer_sys::fuzz_target;
use mastruct::json::parse_sample_spec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_sample_spec(text) {
        assert!(spec.points().iter().all(|p| p.iter().all(|x| x.is_finite())));
    }
});
