#![no_main]

use isoexplain::Forest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(forest) = Forest::from_json_slice(data) else {
        return;
    };
    // a validated model must route any point without panicking
    if forest.n_features <= 1024 {
        let x = vec![0.0; forest.n_features];
        let s = forest.anomaly_score(&x).unwrap();
        assert!(s.is_finite());
        let _ = isoexplain::explain::exiffi_lfi(&forest, &x).unwrap();
    }
});
