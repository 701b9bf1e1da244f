//! Seed derivation and order-independent reductions shared by the fitting,
//! explanation and evaluation code.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere a seeded stream is needed.
pub type SeededRng = ChaCha8Rng;

/// SplitMix64 finalizer. Bijective on `u64`, so distinct stream indices
/// never collide for a fixed master seed.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent sub-stream: `seed ^ mix64(index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ mix64(index)
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum whose result depends only on the multiset of inputs.
///
/// Values are sorted with `total_cmp` and then added with Neumaier
/// compensation, so any permutation of `values` gives the same bits.
pub fn stable_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for &v in values.iter() {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Column-wise [`stable_sum`] over a row-major buffer of `width`-long rows.
pub fn stable_sum_columns(flat: &[f64], width: usize) -> Vec<f64> {
    let mut column = Vec::with_capacity(flat.len() / width.max(1));
    (0..width)
        .map(|j| {
            column.clear();
            column.extend(flat.iter().skip(j).step_by(width));
            stable_sum(&mut column)
        })
        .collect()
}

/// Quotient with the convention `x / 0 = 0`.
pub fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Indices sorted by value descending, ties broken by index ascending.
pub fn argsort_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn derived_seeds_differ_per_index() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(42, 0));
    }

    #[test]
    fn argsort_breaks_ties_by_index() {
        assert_eq!(argsort_desc(&[1.0, 3.0, 3.0, 0.5]), vec![1, 2, 0, 3]);
    }

    #[test]
    fn safe_div_zero_denominator() {
        assert_eq!(safe_div(0.0, 0.0), 0.0);
        assert_eq!(safe_div(2.0, 0.0), 0.0);
        assert_eq!(safe_div(2.0, 4.0), 0.5);
    }

    proptest! {
        #[test]
        fn stable_sum_is_permutation_invariant(
            mut v in proptest::collection::vec(-1e6f64..1e6, 0..40),
            rot in 0usize..40,
        ) {
            let mut w = v.clone();
            if !w.is_empty() {
                let k = rot % w.len();
                w.rotate_left(k);
                w.reverse();
            }
            prop_assert_eq!(stable_sum(&mut v).to_bits(), stable_sum(&mut w).to_bits());
        }
    }
}
