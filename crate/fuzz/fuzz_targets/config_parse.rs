#![no_main]

use libfuzzer_sys::fuzz_target;
use mhd_dg::io::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = RunConfig::from_text(text) else {
        return;
    };
    // Whatever parses must survive a round trip through its own text form.
    let again = RunConfig::from_text(&config.to_text()).expect("rendered config parses");
    assert_eq!(config.to_text(), again.to_text());
    let _ = config.validate();
});
