#![no_main]

use libfuzzer_sys::fuzz_target;
use pargbfs::engine::{parse_schedule, serialize_schedule};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(steps) = parse_schedule(text) else {
        return;
    };
    let canon = serialize_schedule(&steps);
    assert_eq!(
        parse_schedule(&canon).expect("canonical form must parse"),
        steps
    );
});
