#![no_main]

use libfuzzer_sys::fuzz_target;
use mastruct::json::{parse_solution_manifest, parse_surface_manifest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_solution_manifest(text);
    let _ = parse_surface_manifest(text);
});
