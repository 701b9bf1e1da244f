#![no_main]

use isoexplain_cli::parse_run_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = parse_run_config(data) {
        // a resolved config must reparse to itself
        let text = serde_json::to_vec(&cfg).unwrap();
        assert_eq!(parse_run_config(&text).unwrap(), cfg);
    }
});
