use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photonlab_timetag::{
    from_bytes, hbt_split, merge_streams, to_bytes, validate, AcquisitionMeta, TimeTag,
    TimeTagStream,
};

fn random_sorted_stream(n: usize, span_ps: u64, seed: u64) -> TimeTagStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tags: Vec<TimeTag> = (0..n)
        .map(|_| TimeTag::new(rng.random_range(0..span_ps), rng.random_range(0..2u8)))
        .collect();
    // Sorted by (t, channel) so equal-timestamp runs have a canonical order
    // and merge output is comparable against a full sort.
    tags.sort_unstable();
    TimeTagStream::new(tags, span_ps, AcquisitionMeta::default()).unwrap()
}

/// Oracle: merging two sorted streams must equal sorting the concatenation,
/// with the merge tie-break (t, channel, source order) applied.
#[test]
fn merge_of_large_streams_matches_full_sort_oracle() {
    let n = 1_000_000;
    let a = random_sorted_stream(n, 60_000_000_000, 11);
    let b = random_sorted_stream(n, 60_000_000_000, 22);
    let merged = merge_streams(&a, &b).unwrap();
    assert_eq!(merged.len(), 2 * n);

    let mut oracle: Vec<(u64, u8, u8)> = a
        .tags()
        .iter()
        .map(|t| (t.t_ps, t.channel, 0u8))
        .chain(b.tags().iter().map(|t| (t.t_ps, t.channel, 1u8)))
        .collect();
    oracle.sort();

    for (got, want) in merged.tags().iter().zip(&oracle) {
        assert_eq!((got.t_ps, got.channel), (want.0, want.1));
    }
}

#[test]
fn split_at_half_is_within_five_sigma_of_binomial() {
    let n: usize = 1_000_000;
    let stream = random_sorted_stream(n, 60_000_000_000, 5);
    let (ch0, _ch1) = hbt_split(&stream, 0.5, 99);
    let mean = n as f64 * 0.5;
    let sigma = (n as f64 * 0.25).sqrt();
    let deviation = (ch0.len() as f64 - mean).abs();
    assert!(
        deviation < 5.0 * sigma,
        "channel-0 count {} deviates {deviation:.0} from {mean} (5 sigma = {:.0})",
        ch0.len(),
        5.0 * sigma
    );
}

#[test]
fn merge_is_commutative_and_associative_up_to_tag_equality() {
    let a = random_sorted_stream(5_000, 1_000_000, 1);
    let b = random_sorted_stream(5_000, 1_000_000, 2);
    let c = random_sorted_stream(5_000, 1_000_000, 3);

    let ab = merge_streams(&a, &b).unwrap();
    let ba = merge_streams(&b, &a).unwrap();
    assert_eq!(ab.tags(), ba.tags());

    let ab_c = merge_streams(&ab, &c).unwrap();
    let bc = merge_streams(&b, &c).unwrap();
    let a_bc = merge_streams(&a, &bc).unwrap();
    assert_eq!(ab_c.tags(), a_bc.tags());
}

proptest! {
    /// Any valid stream survives the binary format unchanged: tags and rep
    /// period are restored and a second encode is byte-identical.
    #[test]
    fn binary_roundtrip_is_lossless(
        times in proptest::collection::vec(0u64..10_000_000, 0..200),
        channels in proptest::collection::vec(0u8..2, 200),
        rep_period in 0u64..1_000_000,
    ) {
        let mut times = times;
        times.sort_unstable();
        let tags: Vec<TimeTag> = times
            .iter()
            .zip(&channels)
            .map(|(&t, &c)| TimeTag::new(t, c))
            .collect();
        let duration = tags.last().map_or(0, |t| t.t_ps);
        let meta = AcquisitionMeta { rep_period_ps: rep_period, ..AcquisitionMeta::default() };
        let stream = TimeTagStream::new(tags, duration, meta).unwrap();

        let bytes = to_bytes(&stream);
        let decoded = from_bytes(&bytes).unwrap();
        prop_assert_eq!(decoded.tags(), stream.tags());
        prop_assert_eq!(decoded.meta().rep_period_ps, rep_period);
        prop_assert_eq!(to_bytes(&decoded), bytes);
    }

    /// Splitting preserves the multiset of timestamps and total count for
    /// any transmittance and seed.
    #[test]
    fn split_conserves_tags(
        n in 0usize..2_000,
        transmittance in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let stream = random_sorted_stream(n, 1_000_000, 777);
        let (ch0, ch1) = hbt_split(&stream, transmittance, seed);
        prop_assert_eq!(ch0.len() + ch1.len(), stream.len());
        prop_assert!(validate(&ch0).is_valid());
        prop_assert!(validate(&ch1).is_valid());
        let mut all: Vec<u64> = ch0.tags().iter().chain(ch1.tags()).map(|t| t.t_ps).collect();
        all.sort_unstable();
        let original: Vec<u64> = stream.tags().iter().map(|t| t.t_ps).collect();
        prop_assert_eq!(all, original);
    }
}
