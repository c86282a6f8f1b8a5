#![no_main]

use libfuzzer_sys::fuzz_target;
use mastruct::json::{form_from_value, form_to_value, parse_form};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(form) = parse_form(text) {
        let again = form_from_value(&form_to_value(&form)).expect("serialized form reparses");
        assert_eq!(again.degree(), form.degree());
        assert_eq!(again.mode(), form.mode());
    }
});
