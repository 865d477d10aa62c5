//! Time-tag event streams and their exchange formats.
//!
//! A [`TimeTagStream`] is the universal data structure of the workbench: a
//! time-ordered sequence of photon detection events, each carrying an integer
//! picosecond timestamp and a detector channel. Streams are immutable after
//! construction and safely shareable across threads; every operation returns
//! a new stream.
//!
//! Timestamps are integer picoseconds rather than floats so that a 60 s trace
//! (6e13 ps) accumulates no rounding error; the full range fits comfortably
//! in 64 bits.

mod io;
mod split;
mod stream;

pub use io::{
    from_bytes, read_binary, read_csv, to_bytes, write_binary, write_csv, BINARY_MAGIC,
    BINARY_VERSION,
};
pub use split::hbt_split;
pub use stream::{merge_streams, validate, ValidationIssue, ValidationReport};

use thiserror::Error;

/// Errors produced by stream construction, algebra, and file I/O.
#[derive(Debug, Error)]
pub enum TimeTagError {
    /// Two streams with differing acquisition metadata were combined.
    #[error("acquisition metadata mismatch: {0}")]
    MetaMismatch(String),
    /// Tags handed to a constructor were not sorted by timestamp.
    #[error("tags not sorted non-decreasing at index {index}")]
    NotSorted { index: usize },
    /// A tag timestamp exceeds the declared acquisition duration.
    #[error("tag at index {index} has t={t_ps} ps beyond duration {duration_ps} ps")]
    BeyondDuration {
        index: usize,
        t_ps: u64,
        duration_ps: u64,
    },
    #[error("malformed time-tag file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One photon detection event: timestamp in integer picoseconds since
/// acquisition start plus the detector channel that fired.
///
/// Channels 0 and 1 are the two HBT detectors; other values are stored
/// but are flagged by [`validate`] and rejected by correlation analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeTag {
    /// Picoseconds since acquisition start.
    pub t_ps: u64,
    /// Detector channel.
    pub channel: u8,
}

impl TimeTag {
    pub fn new(t_ps: u64, channel: u8) -> Self {
        Self { t_ps, channel }
    }
}

/// Acquisition descriptor shared by every tag in a stream.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcquisitionMeta {
    /// Laser repetition period in ps; 0 means not pulsed / unknown.
    pub rep_period_ps: u64,
    /// Excitation wavelength in nm, when known.
    pub laser_wavelength_nm: Option<f64>,
    /// Excitation power in microwatts, when known.
    pub excitation_power_uw: Option<f64>,
}

impl AcquisitionMeta {
    pub fn pulsed(rep_period_ps: u64) -> Self {
        Self {
            rep_period_ps,
            ..Self::default()
        }
    }

    pub fn is_pulsed(&self) -> bool {
        self.rep_period_ps > 0
    }
}

/// A sorted, immutable sequence of time tags spanning one acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    tags: Vec<TimeTag>,
    duration_ps: u64,
    meta: AcquisitionMeta,
}

impl TimeTagStream {
    /// Builds a stream, checking the sortedness and duration invariants.
    pub fn new(
        tags: Vec<TimeTag>,
        duration_ps: u64,
        meta: AcquisitionMeta,
    ) -> Result<Self, TimeTagError> {
        for (index, pair) in tags.windows(2).enumerate() {
            if pair[1].t_ps < pair[0].t_ps {
                return Err(TimeTagError::NotSorted { index: index + 1 });
            }
        }
        if let Some((index, tag)) = tags
            .iter()
            .enumerate()
            .find(|(_, tag)| tag.t_ps > duration_ps)
        {
            return Err(TimeTagError::BeyondDuration {
                index,
                t_ps: tag.t_ps,
                duration_ps,
            });
        }
        Ok(Self {
            tags,
            duration_ps,
            meta,
        })
    }

    /// Builds a stream without checking invariants.
    ///
    /// Intended for file import and for [`validate`], which must be able to
    /// inspect malformed data instead of refusing to represent it.
    pub fn new_unchecked(tags: Vec<TimeTag>, duration_ps: u64, meta: AcquisitionMeta) -> Self {
        Self {
            tags,
            duration_ps,
            meta,
        }
    }

    /// Empty stream of a given span.
    pub fn empty(duration_ps: u64, meta: AcquisitionMeta) -> Self {
        Self {
            tags: Vec::new(),
            duration_ps,
            meta,
        }
    }

    pub fn tags(&self) -> &[TimeTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn duration_ps(&self) -> u64 {
        self.duration_ps
    }

    pub fn meta(&self) -> &AcquisitionMeta {
        &self.meta
    }

    /// Mean detected count rate in Hz over the acquisition span.
    pub fn mean_rate_hz(&self) -> f64 {
        if self.duration_ps == 0 {
            return 0.0;
        }
        self.tags.len() as f64 / (self.duration_ps as f64 * 1e-12)
    }

    /// New stream containing only tags from `channel`, other fields unchanged.
    pub fn filter_channel(&self, channel: u8) -> Self {
        Self {
            tags: self
                .tags
                .iter()
                .copied()
                .filter(|tag| tag.channel == channel)
                .collect(),
            duration_ps: self.duration_ps,
            meta: self.meta,
        }
    }

    /// Consumes the stream, returning its tags.
    pub fn into_tags(self) -> Vec<TimeTag> {
        self.tags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_unsorted() {
        let tags = vec![TimeTag::new(5, 0), TimeTag::new(3, 0)];
        match TimeTagStream::new(tags, 10, AcquisitionMeta::default()) {
            Err(TimeTagError::NotSorted { index }) => assert_eq!(index, 1),
            other => panic!("expected NotSorted, got {other:?}"),
        }
    }

    #[test]
    fn new_rejects_tags_beyond_duration() {
        let tags = vec![TimeTag::new(5, 0), TimeTag::new(11, 0)];
        match TimeTagStream::new(tags, 10, AcquisitionMeta::default()) {
            Err(TimeTagError::BeyondDuration { index, t_ps, .. }) => {
                assert_eq!((index, t_ps), (1, 11));
            }
            other => panic!("expected BeyondDuration, got {other:?}"),
        }
    }

    #[test]
    fn ties_in_timestamp_are_allowed() {
        let tags = vec![TimeTag::new(5, 1), TimeTag::new(5, 0)];
        assert!(TimeTagStream::new(tags, 10, AcquisitionMeta::default()).is_ok());
    }
}
