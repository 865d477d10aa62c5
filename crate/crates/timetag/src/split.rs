//! Beamsplitter model: routes one stream onto two detectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{TimeTag, TimeTagStream};

/// Splits a stream across the two arms of an HBT beamsplitter.
///
/// Each tag is routed independently to detector 0 with probability
/// `transmittance`, otherwise to detector 1. Timestamps are preserved
/// exactly; output tags carry the detector index as their channel. The same
/// seed always produces bit-identical outputs.
///
/// # Panics
///
/// Panics if `transmittance` is not within `[0, 1]`.
pub fn hbt_split(
    stream: &TimeTagStream,
    transmittance: f64,
    seed: u64,
) -> (TimeTagStream, TimeTagStream) {
    assert!(
        (0.0..=1.0).contains(&transmittance),
        "transmittance must be in [0, 1], got {transmittance}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ch0 = Vec::new();
    let mut ch1 = Vec::new();
    for tag in stream.tags() {
        if rng.random::<f64>() < transmittance {
            ch0.push(TimeTag::new(tag.t_ps, 0));
        } else {
            ch1.push(TimeTag::new(tag.t_ps, 1));
        }
    }
    let make = |tags| TimeTagStream::new_unchecked(tags, stream.duration_ps(), *stream.meta());
    (make(ch0), make(ch1))
}
