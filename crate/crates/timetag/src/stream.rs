//! Stream algebra: merge and validation.

use crate::{TimeTag, TimeTagError, TimeTagStream};

/// Merges two streams sharing identical acquisition metadata.
///
/// The output is sorted, contains every tag of both inputs, and spans the
/// longer of the two durations. Ties are broken by (t, channel, source
/// order) with stream `a` first, so merged output is deterministic.
pub fn merge_streams(
    a: &TimeTagStream,
    b: &TimeTagStream,
) -> Result<TimeTagStream, TimeTagError> {
    if a.meta() != b.meta() {
        return Err(TimeTagError::MetaMismatch(format!(
            "{:?} vs {:?}",
            a.meta(),
            b.meta()
        )));
    }
    let (ta, tb) = (a.tags(), b.tags());
    let mut merged = Vec::with_capacity(ta.len() + tb.len());
    let (mut i, mut j) = (0, 0);
    while i < ta.len() && j < tb.len() {
        // (t, channel, source) order; a wins ties.
        if (ta[i].t_ps, ta[i].channel) <= (tb[j].t_ps, tb[j].channel) {
            merged.push(ta[i]);
            i += 1;
        } else {
            merged.push(tb[j]);
            j += 1;
        }
    }
    merged.extend_from_slice(&ta[i..]);
    merged.extend_from_slice(&tb[j..]);

    Ok(TimeTagStream::new_unchecked(
        merged,
        a.duration_ps().max(b.duration_ps()),
        *a.meta(),
    ))
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    /// Tag at `index` has a smaller timestamp than its predecessor.
    OutOfOrder { index: usize },
    /// Tag at `index` has a channel outside {0, 1}.
    ChannelOutOfRange { index: usize, channel: u8 },
    /// Tag at `index` lies beyond the declared acquisition duration.
    BeyondDuration { index: usize, t_ps: u64 },
}

/// Everything [`validate`] found wrong with a stream; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn out_of_order_indices(&self) -> Vec<usize> {
        self.issues
            .iter()
            .filter_map(|issue| match issue {
                ValidationIssue::OutOfOrder { index } => Some(*index),
                _ => None,
            })
            .collect()
    }

    pub fn channel_issue_indices(&self) -> Vec<usize> {
        self.issues
            .iter()
            .filter_map(|issue| match issue {
                ValidationIssue::ChannelOutOfRange { index, .. } => Some(*index),
                _ => None,
            })
            .collect()
    }
}

/// Checks a stream against the sortedness, channel-range, and duration
/// invariants. Reports every violation; never aborts.
pub fn validate(stream: &TimeTagStream) -> ValidationReport {
    let mut report = ValidationReport::default();
    let tags: &[TimeTag] = stream.tags();
    for (index, tag) in tags.iter().enumerate() {
        if index > 0 && tag.t_ps < tags[index - 1].t_ps {
            report.issues.push(ValidationIssue::OutOfOrder { index });
        }
        if tag.channel > 1 {
            report.issues.push(ValidationIssue::ChannelOutOfRange {
                index,
                channel: tag.channel,
            });
        }
        if tag.t_ps > stream.duration_ps() {
            report.issues.push(ValidationIssue::BeyondDuration {
                index,
                t_ps: tag.t_ps,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::AcquisitionMeta;

    fn stream(tags: Vec<(u64, u8)>) -> TimeTagStream {
        let tags = tags
            .into_iter()
            .map(|(t_ps, channel)| TimeTag { t_ps, channel })
            .collect();
        TimeTagStream::new_unchecked(tags, 1_000, AcquisitionMeta::default())
    }

    #[test]
    fn merge_of_empties_is_empty() {
        let a = TimeTagStream::empty(10, AcquisitionMeta::default());
        let b = TimeTagStream::empty(20, AcquisitionMeta::default());
        let merged = merge_streams(&a, &b).unwrap();
        assert!(merged.is_empty());
        assert_eq!(merged.duration_ps(), 20);
    }

    #[test]
    fn merge_two_element_sort() {
        let a = stream(vec![(5, 0)]);
        let b = stream(vec![(3, 1)]);
        let merged = merge_streams(&a, &b).unwrap();
        assert_eq!(
            merged.tags(),
            &[TimeTag::new(3, 1), TimeTag::new(5, 0)],
        );
    }

    #[test]
    fn merge_rejects_meta_mismatch() {
        let a = TimeTagStream::empty(10, AcquisitionMeta::pulsed(50_000));
        let b = TimeTagStream::empty(10, AcquisitionMeta::pulsed(25_000));
        assert!(matches!(
            merge_streams(&a, &b),
            Err(TimeTagError::MetaMismatch(_))
        ));
    }

    #[test]
    fn validate_accepts_sorted_stream() {
        let report = validate(&stream(vec![(1, 0), (2, 1), (2, 0)]));
        assert!(report.is_valid());
    }

    #[test]
    fn validate_reports_out_of_order_index() {
        let report = validate(&stream(vec![(5, 0), (3, 0), (7, 0)]));
        assert_eq!(report.out_of_order_indices(), vec![1]);
    }

    #[test]
    fn validate_flags_channel_range() {
        let report = validate(&stream(vec![(1, 0), (2, 7)]));
        assert_eq!(report.channel_issue_indices(), vec![1]);
    }

    #[test]
    fn validate_flags_tags_beyond_duration() {
        let tags = vec![TimeTag::new(2_000, 0)];
        let s = TimeTagStream::new_unchecked(tags, 1_000, AcquisitionMeta::default());
        let report = validate(&s);
        assert_eq!(
            report.issues,
            vec![ValidationIssue::BeyondDuration { index: 0, t_ps: 2_000 }]
        );
    }
}
