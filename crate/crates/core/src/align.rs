//! Assignment of transcript cues to slide segments by time overlap.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segment::SlideSegment;
use crate::subtitle::Transcript;

/// For each segment, the transcript indices of the cues assigned to it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Alignment {
    pub mapping: Vec<Vec<usize>>,
}

impl Alignment {
    pub fn segment_count(&self) -> usize {
        self.mapping.len()
    }

    pub fn cues_of(&self, segment: usize) -> &[usize] {
        self.mapping.get(segment).map_or(&[], Vec::as_slice)
    }

    /// Segment owning each cue, indexed by cue.
    pub fn owners(&self, cue_count: usize) -> Vec<Option<usize>> {
        let mut owners = vec![None; cue_count];
        for (seg, cues) in self.mapping.iter().enumerate() {
            for &c in cues {
                if let Some(slot) = owners.get_mut(c) {
                    *slot = Some(seg);
                }
            }
        }
        owners
    }
}

fn overlap(a0: u64, a1: u64, b0: u64, b1: u64) -> u64 {
    a1.min(b1).saturating_sub(a0.max(b0))
}

/// Assigns each cue to exactly one segment.
///
/// The winner is the segment with the largest overlap with the cue; ties go
/// to the earlier segment. A cue overlapping no segment goes to the segment
/// whose midpoint is nearest the cue's midpoint, again preferring the earlier
/// one on ties. Segments must be sorted and disjoint but need not start at 0.
pub fn align_cues(segments: &[SlideSegment], transcript: &Transcript) -> Result<Alignment> {
    if segments.is_empty() {
        return Err(Error::invalid("cannot align cues to an empty segment list"));
    }
    let mut mapping = vec![Vec::new(); segments.len()];
    for (ci, cue) in transcript.cues.iter().enumerate() {
        mapping[owner(segments, cue.start_ms, cue.end_ms)].push(ci);
    }
    Ok(Alignment { mapping })
}

fn owner(segments: &[SlideSegment], start: u64, end: u64) -> usize {
    // Candidates are the segments ending after `start` and beginning before `end`.
    let lo = segments.partition_point(|s| s.end_ms <= start);
    let hi = segments.partition_point(|s| s.start_ms < end);
    let mut best: Option<(usize, u64)> = None;
    for (i, s) in segments.iter().enumerate().take(hi).skip(lo) {
        let ov = overlap(start, end, s.start_ms, s.end_ms);
        if ov > 0 && best.is_none_or(|(_, b)| ov > b) {
            best = Some((i, ov));
        }
    }
    if let Some((i, _)) = best {
        return i;
    }

    // Midpoints increase with the index, so only the neighbours of the
    // insertion point can be nearest.
    let mid2 = start as u128 + end as u128;
    let seg_mid2 = |s: &SlideSegment| s.start_ms as u128 + s.end_ms as u128;
    let at = segments.partition_point(|s| seg_mid2(s) < mid2);
    match (at.checked_sub(1), segments.get(at)) {
        (Some(prev), Some(next)) => {
            let dp = mid2 - seg_mid2(&segments[prev]);
            let dn = seg_mid2(next) - mid2;
            if dp <= dn {
                prev
            } else {
                at
            }
        }
        (Some(prev), None) => prev,
        (None, _) => 0,
    }
}
