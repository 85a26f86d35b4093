#![no_main]

use libfuzzer_sys::fuzz_target;
use mhd_dg::io::Manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = Manifest::from_text(text) {
        let again = Manifest::from_text(&m.to_text()).expect("rendered manifest parses");
        assert_eq!(m.to_text(), again.to_text());
    }
});
