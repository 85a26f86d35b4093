#![no_main]

use libfuzzer_sys::fuzz_target;
use mhd_dg::io::{dump_to_field, parse_field_dump, Manifest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = parse_field_dump(text) else {
        return;
    };
    // A 1x1 k=1 grid has four nodes; anything else must be rejected cleanly.
    let manifest = Manifest {
        config_hash: String::new(),
        case: "fuzz".into(),
        k: 1,
        nx: 1,
        ny: 1,
        gamma: 1.4,
        domain: [0.0, 1.0, 0.0, 1.0],
        time: 0.0,
        steps: 0,
        wall_time_s: 0.0,
        stride: 1,
    };
    let _ = dump_to_field(&table, &manifest);
});
