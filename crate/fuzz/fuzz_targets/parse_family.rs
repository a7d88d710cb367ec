#![no_main]

use fc_core::setfam::parse_family;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = parse_family(text, None) {
            assert_eq!(parse_family(&f.to_text(), None).as_ref(), Ok(&f));
        }
    }
});
