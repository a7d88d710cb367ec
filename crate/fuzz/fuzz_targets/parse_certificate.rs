#![no_main]

use fc_core::fcsolve::{certificate_to_json, parse_certificate};
use fc_core::verify::verify_certificate;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cert) = parse_certificate(text) {
            let again = parse_certificate(&certificate_to_json(&cert)).expect("re-parse");
            assert_eq!(again, cert);
            let _ = verify_certificate(&cert);
        }
    }
});
