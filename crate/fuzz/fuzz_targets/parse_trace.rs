#![no_main]

use libfuzzer_sys::fuzz_target;
use pargbfs::engine::{parse_trace, serialize_trace};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(events) = parse_trace(text) else {
        return;
    };
    let canon = serialize_trace(&events);
    let again = parse_trace(&canon).expect("canonical form must parse");
    assert_eq!(serialize_trace(&again), canon);
});
