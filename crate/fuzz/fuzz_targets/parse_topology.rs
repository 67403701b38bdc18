#![no_main]

use libfuzzer_sys::fuzz_target;
use pargbfs::topology::{parse_topology, serialize_topology};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(space) = parse_topology(text) else {
        return;
    };
    // Accepted documents must survive a serialize/parse round trip.
    let canon = serialize_topology(&space);
    let again = parse_topology(&canon).expect("canonical form must parse");
    assert_eq!(canon, serialize_topology(&again));
});
