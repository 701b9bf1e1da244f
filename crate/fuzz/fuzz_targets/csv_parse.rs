#![no_main]

use isoexplain::data::{read_csv, write_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for label in [None, Some("label")] {
        let Ok(ds) = read_csv(data, label, "fuzz") else {
            continue;
        };
        assert_eq!(ds.features().as_slice().len(), ds.n() * ds.p());
        assert!(ds.features().as_slice().iter().all(|v| v.is_finite()));
        // every accepted table must serialise again
        let mut out = Vec::new();
        write_csv(&ds, &mut out).unwrap();
    }
});
