//! Inverted index with field-boosted BM25 ranking.
//!
//! Each video contributes three field texts: its title, the concatenation of
//! its slide titles and the concatenation of its speech. Scores sum BM25 over
//! query terms and fields, weighted by a per-field boost. Postings keep the
//! segment they came from so hits can point at timestamps.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::document::VideoDocument;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;
pub const SNIPPET_CHARS: usize = 160;
pub const DEFAULT_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    VideoTitle,
    SlideTitle,
    Speech,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::VideoTitle, Field::SlideTitle, Field::Speech];

    pub fn boost(self) -> f64 {
        match self {
            Field::VideoTitle => 2.0,
            Field::SlideTitle => 1.5,
            Field::Speech => 1.0,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Lowercases and splits on anything that is not alphanumeric. Tokens
/// shorter than two characters are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text).into_iter().map(|t| t.token).collect()
}

struct Span {
    token: String,
    /// Char offsets into the source text.
    start: usize,
    end: usize,
}

fn token_spans(text: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut pos = 0;
    let mut flush = |cur: &mut String, start: usize, end: usize| {
        if cur.chars().count() >= 2 {
            out.push(Span {
                token: core::mem::take(cur),
                start,
                end,
            });
        } else {
            cur.clear();
        }
    };
    for c in text.chars() {
        if c.is_alphanumeric() {
            if cur.is_empty() {
                start = pos;
            }
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            flush(&mut cur, start, pos);
        }
        pos += 1;
    }
    if !cur.is_empty() {
        flush(&mut cur, start, pos);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub video_id: String,
    pub field: Field,
    /// -1 for [`Field::VideoTitle`].
    pub segment_index: i64,
    pub term_frequency: u32,
}

/// Corpus statistics. Lengths are token counts summed over videos.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IndexStats {
    pub document_count: u64,
    pub total_video_title_len: u64,
    pub total_slide_title_len: u64,
    pub total_speech_len: u64,
}

impl IndexStats {
    fn total(&self, f: Field) -> u64 {
        match f {
            Field::VideoTitle => self.total_video_title_len,
            Field::SlideTitle => self.total_slide_title_len,
            Field::Speech => self.total_speech_len,
        }
    }

    fn total_mut(&mut self, f: Field) -> &mut u64 {
        match f {
            Field::VideoTitle => &mut self.total_video_title_len,
            Field::SlideTitle => &mut self.total_slide_title_len,
            Field::Speech => &mut self.total_speech_len,
        }
    }

    pub fn average_len(&self, f: Field) -> f64 {
        if self.document_count == 0 {
            0.0
        } else {
            self.total(f) as f64 / self.document_count as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct IndexedSegment {
    start_ms: u64,
    title: String,
    speech: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct IndexedVideo {
    title: String,
    /// Token counts per field, in [`Field::ALL`] order.
    lengths: [u64; 3],
    segments: Vec<IndexedSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitMatch {
    pub segment_index: i64,
    pub start_ms: u64,
    pub field: Field,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub video_id: String,
    pub score: f64,
    pub matches: Vec<HitMatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchIndex {
    pub format_version: u32,
    stats: IndexStats,
    postings: BTreeMap<String, Vec<Posting>>,
    videos: BTreeMap<String, IndexedVideo>,
}

impl Default for SearchIndex {
    fn default() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            stats: IndexStats::default(),
            postings: BTreeMap::new(),
            videos: BTreeMap::new(),
        }
    }
}

fn term_counts(text: &str) -> (BTreeMap<String, u32>, u64) {
    let mut counts = BTreeMap::new();
    let mut len = 0;
    for t in tokenize(text) {
        *counts.entry(t).or_insert(0) += 1;
        len += 1;
    }
    (counts, len)
}

fn idf(n: f64, df: f64) -> f64 {
    libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
}

impl SearchIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> IndexStats {
        self.stats
    }

    pub fn contains(&self, video_id: &str) -> bool {
        self.videos.contains_key(video_id)
    }

    pub fn video_ids(&self) -> impl Iterator<Item = &str> {
        self.videos.keys().map(String::as_str)
    }

    pub fn index_document(&mut self, doc: &VideoDocument) -> Result<IndexStats> {
        if self.videos.contains_key(&doc.video_id) {
            return Err(Error::Conflict(alloc::format!(
                "video {} is already indexed",
                doc.video_id
            )));
        }
        let mut lengths = [0u64; 3];
        let mut add = |field: Field, segment_index: i64, text: &str| {
            let (counts, len) = term_counts(text);
            lengths[field.slot()] += len;
            for (term, tf) in counts {
                self.postings.entry(term).or_default().push(Posting {
                    video_id: doc.video_id.clone(),
                    field,
                    segment_index,
                    term_frequency: tf,
                });
            }
        };
        add(Field::VideoTitle, -1, &doc.title);
        for s in &doc.segments {
            add(Field::SlideTitle, s.index as i64, &s.title);
            add(Field::Speech, s.index as i64, &s.speech);
        }
        self.stats.document_count += 1;
        for f in Field::ALL {
            *self.stats.total_mut(f) += lengths[f.slot()];
        }
        self.videos.insert(
            doc.video_id.clone(),
            IndexedVideo {
                title: doc.title.clone(),
                lengths,
                segments: doc
                    .segments
                    .iter()
                    .map(|s| IndexedSegment {
                        start_ms: s.start_ms,
                        title: s.title.clone(),
                        speech: s.speech.clone(),
                    })
                    .collect(),
            },
        );
        Ok(self.stats)
    }

    /// Drops a video and its postings. Returns false when it was not indexed.
    pub fn remove_document(&mut self, video_id: &str) -> bool {
        let Some(video) = self.videos.remove(video_id) else {
            return false;
        };
        self.stats.document_count -= 1;
        for f in Field::ALL {
            *self.stats.total_mut(f) -= video.lengths[f.slot()];
        }
        self.postings.retain(|_, list| {
            list.retain(|p| p.video_id != video_id);
            !list.is_empty()
        });
        true
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    /// Ranked hits, best first; equal scores order by video id.
    pub fn search(&self, query: &str, limit: usize) -> Result<Vec<Hit>> {
        if limit < 1 {
            return Err(Error::invalid("limit must be at least 1"));
        }
        let terms = tokenize(query);
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let n = self.stats.document_count as f64;
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for term in &terms {
            // term frequency per (video, field)
            let mut tf: BTreeMap<(&str, Field), u64> = BTreeMap::new();
            for p in self.postings(term) {
                *tf.entry((p.video_id.as_str(), p.field)).or_insert(0) += p.term_frequency as u64;
            }
            let mut df = [0u64; 3];
            for (_, f) in tf.keys() {
                df[f.slot()] += 1;
            }
            for (&(vid, field), &f) in &tf {
                let dl = self.videos[vid].lengths[field.slot()] as f64;
                let avg = self.stats.average_len(field);
                let norm = if avg > 0.0 {
                    1.0 - BM25_B + BM25_B * dl / avg
                } else {
                    1.0
                };
                let f = f as f64;
                let part =
                    idf(n, df[field.slot()] as f64) * f * (BM25_K1 + 1.0) / (f + BM25_K1 * norm);
                *scores.entry(vid).or_insert(0.0) += field.boost() * part;
            }
        }

        let mut ranked: Vec<(&str, f64)> = scores.into_iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(limit);

        let query_terms: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
        Ok(ranked
            .into_iter()
            .map(|(vid, score)| Hit {
                video_id: vid.into(),
                score,
                matches: self.matches(vid, &query_terms),
            })
            .collect())
    }

    fn matches(&self, video_id: &str, terms: &BTreeSet<&str>) -> Vec<HitMatch> {
        let video = &self.videos[video_id];
        // segment index -> best field seen (SlideTitle sorts before Speech)
        let mut fields: BTreeMap<i64, Field> = BTreeMap::new();
        for term in terms {
            for p in self
                .postings(term)
                .iter()
                .filter(|p| p.video_id == video_id)
            {
                fields
                    .entry(p.segment_index)
                    .and_modify(|f| *f = (*f).min(p.field))
                    .or_insert(p.field);
            }
        }
        let first_start = video.segments.first().map_or(0, |s| s.start_ms);
        let mut out: Vec<HitMatch> = fields
            .into_iter()
            .map(|(seg, field)| {
                let (start_ms, text) = match field {
                    Field::VideoTitle => (first_start, video.title.as_str()),
                    Field::SlideTitle => {
                        let s = &video.segments[seg as usize];
                        (s.start_ms, s.title.as_str())
                    }
                    Field::Speech => {
                        let s = &video.segments[seg as usize];
                        (s.start_ms, s.speech.as_str())
                    }
                };
                HitMatch {
                    segment_index: seg,
                    start_ms,
                    field,
                    snippet: snippet(text, terms),
                }
            })
            .collect();
        out.sort_by_key(|m| (m.start_ms, m.segment_index));
        out
    }
}

/// Up to [`SNIPPET_CHARS`] characters centred on the first query term.
fn snippet(text: &str, terms: &BTreeSet<&str>) -> String {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() <= SNIPPET_CHARS {
        return String::from(text.trim());
    }
    let centre = token_spans(text)
        .into_iter()
        .find(|s| terms.contains(s.token.as_str()))
        .map_or(0, |s| (s.start + s.end) / 2);
    let start = centre
        .saturating_sub(SNIPPET_CHARS / 2)
        .min(chars.len() - SNIPPET_CHARS);
    let window: String = chars[start..start + SNIPPET_CHARS].iter().collect();
    String::from(window.trim())
}
