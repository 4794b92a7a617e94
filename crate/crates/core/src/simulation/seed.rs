//! Stable child-seed derivation.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the bytes of `tag`.
fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed for the sub-stream `(base, tag, index)`; stable across platforms and releases.
pub fn child_seed(base: u64, tag: &str, index: u64) -> u64 {
    mix64(mix64(base ^ tag_hash(tag)) ^ mix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn known_values_are_stable() {
        // Reference output of SplitMix64 seeded with 0.
        assert_eq!(mix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(child_seed(1, "samples", 0), child_seed(1, "samples", 0));
    }

    #[test]
    fn distinct_streams() {
        let mut seen = HashSet::new();
        for tag in ["samples", "adversary", "blocks"] {
            for i in 0..1000 {
                assert!(seen.insert(child_seed(42, tag, i)));
            }
        }
        assert_ne!(child_seed(1, "a", 0), child_seed(2, "a", 0));
    }
}
