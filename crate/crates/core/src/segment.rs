//! Slide boundary detection from per-frame perceptual hashes.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::hamming;

/// One sampled frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSample {
    pub timestamp_ms: u64,
    pub hash: u64,
    /// Where the raster lives, if the caller wants to retrieve it later.
    pub frame_ref: Option<String>,
}

impl FrameSample {
    pub fn new(timestamp_ms: u64, hash: u64) -> Self {
        Self {
            timestamp_ms,
            hash,
            frame_ref: None,
        }
    }
}

/// A contiguous half-open time range `[start_ms, end_ms)` showing one slide.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideSegment {
    pub index: usize,
    pub start_ms: u64,
    pub end_ms: u64,
    /// Timestamp of the representative sample.
    pub keyframe_ms: u64,
    pub keyframe_ref: Option<String>,
    pub hash: u64,
}

impl SlideSegment {
    #[inline]
    pub fn duration_ms(&self) -> u64 {
        self.end_ms - self.start_ms
    }

    #[inline]
    pub fn contains(&self, t: u64) -> bool {
        self.start_ms <= t && t < self.end_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestParams {
    pub sample_rate_hz: f64,
    /// A cut is placed where consecutive hashes differ in more than this many bits.
    pub hash_threshold: u32,
    pub min_segment_ms: u64,
}

impl Default for IngestParams {
    fn default() -> Self {
        Self {
            sample_rate_hz: 1.0,
            hash_threshold: 10,
            min_segment_ms: 3000,
        }
    }
}

impl IngestParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if self.hash_threshold > 64 {
            return Err(Error::invalid("hash threshold must be at most 64"));
        }
        Ok(())
    }

    /// Sampling period in milliseconds, at least 1.
    pub fn sample_period_ms(&self) -> u64 {
        let p = 1000.0 / self.sample_rate_hz;
        if p < 1.0 {
            1
        } else {
            p as u64
        }
    }
}

/// Splits a sampled video into slide segments.
///
/// A cut goes before sample `i` whenever the Hamming distance to sample
/// `i - 1` exceeds `hash_threshold`. Segments shorter than `min_segment_ms`
/// merge into the following segment; a short trailing segment merges into
/// its predecessor. The first segment starts at 0 and the last ends at
/// `duration_ms`.
pub fn detect_boundaries(
    samples: &[FrameSample],
    params: &IngestParams,
    duration_ms: u64,
) -> Result<Vec<SlideSegment>> {
    params.validate()?;
    let Some(last) = samples.last() else {
        return Err(Error::invalid("no frame samples"));
    };
    if samples
        .windows(2)
        .any(|w| w[0].timestamp_ms >= w[1].timestamp_ms)
    {
        return Err(Error::invalid("sample timestamps must strictly increase"));
    }
    if duration_ms <= last.timestamp_ms {
        return Err(Error::invalid(
            "duration must exceed the last sample timestamp",
        ));
    }

    // Sample indices where a new slide begins (index 0 is implicit).
    let cuts = samples
        .windows(2)
        .enumerate()
        .filter(|(_, w)| hamming(w[0].hash, w[1].hash) > params.hash_threshold)
        .map(|(i, _)| i + 1);

    // Raw spans as [first sample, one-past-last sample) plus time bounds.
    let mut spans: Vec<(usize, u64)> = Vec::new(); // (first sample, start_ms)
    spans.push((0, 0));
    spans.extend(cuts.map(|i| (i, samples[i].timestamp_ms)));

    let min = params.min_segment_ms;
    let mut merged: Vec<(usize, u64)> = Vec::with_capacity(spans.len());
    let mut pending: Option<(usize, u64)> = None;
    for (k, &span) in spans.iter().enumerate() {
        let head = pending.take().unwrap_or(span);
        let end = spans.get(k + 1).map_or(duration_ms, |s| s.1);
        let is_last = k + 1 == spans.len();
        if end - head.1 < min {
            if !is_last {
                pending = Some(head);
                continue;
            }
            // Short tail: fold into the predecessor when there is one.
            if !merged.is_empty() {
                continue;
            }
        }
        merged.push(head);
    }

    let segments = merged
        .iter()
        .enumerate()
        .map(|(index, &(first, start_ms))| {
            let (next_first, end_ms) = merged
                .get(index + 1)
                .map_or((samples.len(), duration_ms), |&(f, s)| (f, s));
            let key = keyframe_sample(&samples[first..next_first], start_ms, end_ms);
            SlideSegment {
                index,
                start_ms,
                end_ms,
                keyframe_ms: key.timestamp_ms,
                keyframe_ref: key.frame_ref.clone(),
                hash: key.hash,
            }
        })
        .collect();
    Ok(segments)
}

/// Sample closest to the segment midpoint; earlier sample on ties.
fn keyframe_sample(samples: &[FrameSample], start_ms: u64, end_ms: u64) -> &FrameSample {
    // Doubled coordinates keep the midpoint integral.
    let mid2 = start_ms as u128 + end_ms as u128;
    samples
        .iter()
        .min_by_key(|s| (2 * s.timestamp_ms as u128).abs_diff(mid2))
        .expect("every segment owns at least one sample")
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn seq(hashes: &[u64], period: u64) -> Vec<FrameSample> {
        hashes
            .iter()
            .enumerate()
            .map(|(i, &h)| FrameSample::new(i as u64 * period, h))
            .collect()
    }

    const A: u64 = 0;
    const B: u64 = 0x0000_0000_FFFF_FFFF;
    const C: u64 = 0xFFFF_0000_FFFF_0000;

    #[test]
    fn identical_hashes_give_one_segment() {
        let s = seq(&[42; 10], 1000);
        let segs = detect_boundaries(&s, &IngestParams::default(), 10_000).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].start_ms, segs[0].end_ms), (0, 10_000));
    }

    #[test]
    fn three_planted_slides() {
        assert_eq!(hamming(A, B), 32);
        assert_eq!(hamming(B, C), 32);
        let mut hashes = vec![A; 7];
        hashes.extend([B; 7]);
        hashes.extend([C; 6]);
        let segs =
            detect_boundaries(&seq(&hashes, 1000), &IngestParams::default(), 20_000).unwrap();
        let bounds: Vec<_> = segs.iter().map(|s| (s.start_ms, s.end_ms)).collect();
        assert_eq!(bounds, vec![(0, 7000), (7000, 14000), (14000, 20000)]);
    }

    #[test]
    fn transitional_frame_merges_forward() {
        let t = A ^ 0xFFFFF; // 20 bits from A
        let mut hashes = vec![A; 7];
        hashes.push(t);
        hashes.extend([B; 6]);
        hashes.extend([C; 6]);
        // make the transitional frame 20 bits from B as well
        let b = t ^ 0x00FF_FFF0_0000;
        for h in hashes.iter_mut().skip(8).take(6) {
            *h = b;
        }
        assert_eq!(hamming(t, A), 20);
        assert_eq!(hamming(t, b), 20);
        let c = b ^ 0xFFFF_FFFF_0000_0000;
        for h in hashes.iter_mut().skip(14) {
            *h = c;
        }
        let segs =
            detect_boundaries(&seq(&hashes, 1000), &IngestParams::default(), 20_000).unwrap();
        let bounds: Vec<_> = segs.iter().map(|s| (s.start_ms, s.end_ms)).collect();
        assert_eq!(bounds, vec![(0, 7000), (7000, 14000), (14000, 20000)]);
        // keyframe avoids the transition: midpoint of [7000,14000) is 10500
        assert_eq!(segs[1].keyframe_ms, 10_000);
        assert_eq!(segs[1].hash, b);
    }

    #[test]
    fn short_tail_merges_backward() {
        let mut hashes = vec![A; 10];
        hashes.push(B);
        let segs =
            detect_boundaries(&seq(&hashes, 1000), &IngestParams::default(), 11_500).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].end_ms, 11_500);
    }

    #[test]
    fn all_short_segments_collapse_to_one() {
        let hashes = [A, B, A, B];
        let segs = detect_boundaries(&seq(&hashes, 500), &IngestParams::default(), 2000).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].start_ms, segs[0].end_ms), (0, 2000));
    }

    #[test]
    fn first_segment_starts_at_zero() {
        let s = vec![FrameSample::new(400, A), FrameSample::new(1400, A)];
        let segs = detect_boundaries(&s, &IngestParams::default(), 2400).unwrap();
        assert_eq!(segs[0].start_ms, 0);
    }

    #[test]
    fn rejects_bad_input() {
        let p = IngestParams::default();
        assert!(detect_boundaries(&[], &p, 10).is_err());
        assert!(detect_boundaries(&seq(&[A, A], 1000), &p, 1000).is_err());
        let unsorted = vec![FrameSample::new(5, A), FrameSample::new(5, A)];
        assert!(detect_boundaries(&unsorted, &p, 10).is_err());
        let bad = IngestParams {
            hash_threshold: 65,
            ..p
        };
        assert!(detect_boundaries(&seq(&[A], 1000), &bad, 10).is_err());
    }
}
