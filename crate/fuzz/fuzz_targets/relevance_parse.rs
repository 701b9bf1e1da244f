#![no_main]

use isoexplain::eval::{ndcg, parse_relevance_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rel) = parse_relevance_csv(data) else {
        return;
    };
    if rel.len() <= 4096 {
        let order: Vec<usize> = (0..rel.len()).collect();
        let v = ndcg(&order, &rel).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&v));
    }
});
