use std::collections::{BTreeMap, BTreeSet};

use lecturedeck_core::{FrameSample, VideoDocument};

/// Segment bounds `(start, end, keyframe_ms)` from cutting wherever the bit
/// distance exceeds `threshold`, with no minimum duration.
pub fn cut_segments(
    samples: &[FrameSample],
    threshold: u32,
    duration: u64,
) -> Vec<(u64, u64, u64)> {
    let mut starts = vec![0usize];
    for i in 1..samples.len() {
        let mut diff = 0;
        for bit in 0..64 {
            if (samples[i - 1].hash >> bit) & 1 != (samples[i].hash >> bit) & 1 {
                diff += 1;
            }
        }
        if diff > threshold {
            starts.push(i);
        }
    }
    let mut out = Vec::new();
    for k in 0..starts.len() {
        let start = if k == 0 {
            0
        } else {
            samples[starts[k]].timestamp_ms
        };
        let end = if k + 1 < starts.len() {
            samples[starts[k + 1]].timestamp_ms
        } else {
            duration
        };
        let members = &samples[starts[k]..starts.get(k + 1).copied().unwrap_or(samples.len())];
        // nearest to midpoint, earlier on ties; compare 2t against start+end
        let mut best = members[0].timestamp_ms;
        let mut best_d = f64::INFINITY;
        for s in members {
            let d = (s.timestamp_ms as f64 - (start as f64 + end as f64) / 2.0).abs();
            if d < best_d {
                best_d = d;
                best = s.timestamp_ms;
            }
        }
        out.push((start, end, best));
    }
    out
}

/// Scores every (cue, segment) pair and picks the owner of each cue.
pub fn overlap_owner(segments: &[(u64, u64)], cues: &[(u64, u64)]) -> Vec<usize> {
    cues.iter()
        .map(|&(cs, ce)| {
            let overlaps: Vec<i64> = segments
                .iter()
                .map(|&(ss, se)| (ce.min(se) as i64 - cs.max(ss) as i64).max(0))
                .collect();
            let best = *overlaps.iter().max().unwrap();
            if best > 0 {
                return overlaps.iter().position(|&o| o == best).unwrap();
            }
            let mid = (cs + ce) as f64 / 2.0;
            let dists: Vec<f64> = segments
                .iter()
                .map(|&(ss, se)| ((ss + se) as f64 / 2.0 - mid).abs())
                .collect();
            let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            dists.iter().position(|&d| d == min).unwrap()
        })
        .collect()
}

/// Number of maximal runs of equal normalized titles.
pub fn title_runs(titles: &[&str]) -> usize {
    let norm: Vec<String> = titles
        .iter()
        .map(|t| {
            t.split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase()
        })
        .collect();
    let mut runs = 0;
    for i in 0..norm.len() {
        if i == 0 || norm[i] != norm[i - 1] {
            runs += 1;
        }
    }
    runs
}

fn ref_tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(String::from)
        .collect()
}

/// Plain BM25 over per-video field texts, recomputed from scratch per query.
pub struct Bm25Reference {
    /// video id -> [title tokens, slide-title tokens, speech tokens]
    docs: BTreeMap<String, [Vec<String>; 3]>,
}

const K1: f64 = 1.2;
const B: f64 = 0.75;
const BOOSTS: [f64; 3] = [2.0, 1.5, 1.0];

impl Bm25Reference {
    pub fn new(docs: &[VideoDocument]) -> Self {
        let docs = docs
            .iter()
            .map(|d| {
                let slide_titles: Vec<String> = d
                    .segments
                    .iter()
                    .flat_map(|s| ref_tokens(&s.title))
                    .collect();
                let speech: Vec<String> = d
                    .segments
                    .iter()
                    .flat_map(|s| ref_tokens(&s.speech))
                    .collect();
                (
                    d.video_id.clone(),
                    [ref_tokens(&d.title), slide_titles, speech],
                )
            })
            .collect();
        Self { docs }
    }

    pub fn scores(&self, query: &str) -> BTreeMap<String, f64> {
        let n = self.docs.len() as f64;
        let mut out = BTreeMap::new();
        for term in ref_tokens(query) {
            for f in 0..3 {
                let df = self.docs.values().filter(|d| d[f].contains(&term)).count() as f64;
                let avgdl = self.docs.values().map(|d| d[f].len() as f64).sum::<f64>() / n;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                for (id, d) in &self.docs {
                    let tf = d[f].iter().filter(|t| **t == term).count() as f64;
                    if tf == 0.0 {
                        continue;
                    }
                    let dl = d[f].len() as f64;
                    let s = idf * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * dl / avgdl));
                    *out.entry(id.clone()).or_insert(0.0) += BOOSTS[f] * s;
                }
            }
        }
        out
    }

    /// Ranking as groups of ids sharing a score (within `eps`), best first.
    pub fn ranking(&self, query: &str, eps: f64) -> Vec<BTreeSet<String>> {
        let mut v: Vec<(String, f64)> = self.scores(query).into_iter().collect();
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let mut groups: Vec<(f64, BTreeSet<String>)> = Vec::new();
        for (id, s) in v {
            match groups.last_mut() {
                Some((gs, g)) if (*gs - s).abs() <= eps => {
                    g.insert(id);
                }
                _ => groups.push((s, [id].into_iter().collect())),
            }
        }
        groups.into_iter().map(|(_, g)| g).collect()
    }
}
