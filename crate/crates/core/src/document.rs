//! The per-video document and its poster summary.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::align::Alignment;
use crate::error::{Error, Result};
use crate::layout::{Region, RegionKind, SlideLayout};
use crate::segment::SlideSegment;
use crate::subtitle::{Cue, Transcript};

pub const DEFAULT_SUMMARY_CHARS: usize = 400;
pub const MAX_VIDEO_ID_LEN: usize = 64;

/// Field order here is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoDocument {
    pub video_id: String,
    pub title: String,
    pub duration_ms: u64,
    pub source_ref: Option<String>,
    pub segments: Vec<DocumentSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSegment {
    pub index: usize,
    pub start_ms: u64,
    pub end_ms: u64,
    pub keyframe: Option<String>,
    pub title: String,
    pub regions: Vec<Region>,
    pub speech: String,
    pub cues: Vec<Cue>,
}

impl DocumentSegment {
    /// Figure and table assets in region order.
    pub fn figure_refs(&self) -> impl Iterator<Item = &str> {
        self.regions
            .iter()
            .filter(|r| r.kind.is_imagery())
            .filter_map(|r| r.asset_ref.as_deref())
    }
}

pub fn is_valid_video_id(id: &str) -> bool {
    (1..=MAX_VIDEO_ID_LEN).contains(&id.len())
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

impl VideoDocument {
    /// Segment index containing `time_ms`, clamped to the first/last segment.
    pub fn segment_at(&self, time_ms: u64) -> Option<usize> {
        if self.segments.is_empty() {
            return None;
        }
        let i = self.segments.partition_point(|s| s.start_ms <= time_ms);
        Some(i.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !is_valid_video_id(&self.video_id) {
            return bad(format!(
                "video id {:?} must match [a-z0-9-]{{1,64}}",
                self.video_id
            ));
        }
        let mut expected_start = 0;
        for (i, s) in self.segments.iter().enumerate() {
            if s.index != i {
                return bad(format!("segment at position {i} has index {}", s.index));
            }
            if s.start_ms != expected_start || s.start_ms >= s.end_ms {
                return bad(format!(
                    "segment {i} spans [{}, {}) but should start at {expected_start}",
                    s.start_ms, s.end_ms
                ));
            }
            expected_start = s.end_ms;
            if s.title.is_empty() {
                return bad(format!("segment {i} has an empty title"));
            }
            if s.regions
                .iter()
                .filter(|r| r.kind == RegionKind::Title)
                .count()
                > 1
            {
                return bad(format!("segment {i} has more than one title region"));
            }
            for r in &s.regions {
                if r.bbox.width == 0 || r.bbox.height == 0 {
                    return bad(format!("segment {i} has a degenerate region"));
                }
                if r.kind.is_imagery() && r.asset_ref.is_none() {
                    return bad(format!("segment {i} has an imagery region without asset"));
                }
                if r.kind == RegionKind::Title && r.text.is_none() {
                    return bad(format!("segment {i} has a title region without text"));
                }
            }
            if let Some(c) = s.cues.iter().find(|c| c.start_ms >= c.end_ms) {
                return bad(format!("segment {i} has inverted cue at {}", c.start_ms));
            }
        }
        if !self.segments.is_empty() && expected_start != self.duration_ms {
            return bad(format!(
                "segments end at {expected_start} but duration is {}",
                self.duration_ms
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub video_id: String,
    pub title: String,
    pub duration_ms: u64,
    pub source_ref: Option<String>,
}

/// Joins segments, layouts and the aligned transcript into one document.
pub fn build_document(
    segments: &[SlideSegment],
    alignment: &Alignment,
    layouts: &[SlideLayout],
    transcript: &Transcript,
    meta: DocumentMeta,
) -> Result<VideoDocument> {
    let (ns, nl, na) = (segments.len(), layouts.len(), alignment.segment_count());
    if ns != nl || ns != na {
        return Err(Error::Consistency(format!(
            "{ns} segments, {nl} layouts, {na} alignment entries"
        )));
    }
    if let Some((i, l)) = layouts
        .iter()
        .enumerate()
        .find(|(i, l)| l.segment_index != *i)
    {
        return Err(Error::Consistency(format!(
            "layout at position {i} belongs to segment {}",
            l.segment_index
        )));
    }
    let mut seen = alloc::vec![false; transcript.len()];
    for &c in alignment.mapping.iter().flatten() {
        match seen.get_mut(c) {
            None => {
                return Err(Error::Consistency(format!(
                    "alignment references cue {c} of {}",
                    transcript.len()
                )))
            }
            Some(true) => {
                return Err(Error::Consistency(format!("cue {c} assigned twice")));
            }
            Some(slot) => *slot = true,
        }
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::Consistency(format!("cue {c} is not assigned")));
    }

    let segments = segments
        .iter()
        .zip(layouts)
        .zip(&alignment.mapping)
        .map(|((seg, layout), cue_ids)| {
            let cues: Vec<Cue> = cue_ids
                .iter()
                .map(|&c| transcript.cues[c].clone())
                .collect();
            let speech = cues
                .iter()
                .map(|c| c.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            DocumentSegment {
                index: seg.index,
                start_ms: seg.start_ms,
                end_ms: seg.end_ms,
                keyframe: seg.keyframe_ref.clone(),
                title: layout.title.clone(),
                regions: layout.regions.clone(),
                speech,
                cues,
            }
        })
        .collect();
    let doc = VideoDocument {
        video_id: meta.video_id,
        title: meta.title,
        duration_ms: meta.duration_ms,
        source_ref: meta.source_ref,
        segments,
    };
    doc.validate()?;
    Ok(doc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosterChapter {
    pub title: String,
    pub start_ms: u64,
    #[serde(rename = "figures")]
    pub figure_refs: Vec<String>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poster {
    pub video_id: String,
    pub chapters: Vec<PosterChapter>,
}

/// Lowercased, whitespace-collapsed title used to detect slide builds.
pub fn normalize_title(title: &str) -> String {
    title
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// One chapter per run of consecutive segments with equal normalized titles.
pub fn build_poster(doc: &VideoDocument, max_summary_chars: usize) -> Poster {
    let mut chapters = Vec::new();
    let mut segs = doc.segments.iter().peekable();
    while let Some(first) = segs.next() {
        let key = normalize_title(&first.title);
        let mut run = alloc::vec![first];
        while let Some(next) = segs.next_if(|s| normalize_title(&s.title) == key) {
            run.push(next);
        }
        let speech = run
            .iter()
            .map(|s| s.speech.trim())
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join(" ");
        chapters.push(PosterChapter {
            title: first.title.clone(),
            start_ms: first.start_ms,
            figure_refs: run
                .iter()
                .flat_map(|s| s.figure_refs())
                .map(String::from)
                .collect(),
            summary: summarize_text(&speech, max_summary_chars),
        });
    }
    Poster {
        video_id: doc.video_id.clone(),
        chapters,
    }
}

fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '?' | '!') && chars.peek().is_none_or(|&(_, n)| n.is_whitespace()) {
            let end = i + c.len_utf8();
            out.push(text[start..end].trim());
            start = end;
        }
    }
    out.push(text[start..].trim());
    out.retain(|s| !s.is_empty());
    out
}

/// Extractive summary: the longest run of leading whole sentences that fits
/// in `max_chars` characters, joined by single spaces. When even the first
/// sentence is too long it is cut at a word boundary and ends with `…`; the
/// result then still fits in `max_chars`, so summarizing a summary is a no-op.
pub fn summarize_text(text: &str, max_chars: usize) -> String {
    if max_chars == 0 {
        return String::new();
    }
    let mut out = String::new();
    let mut used = 0;
    for s in sentences(text) {
        let len = s.chars().count();
        let sep = usize::from(used > 0);
        if used + sep + len > max_chars {
            break;
        }
        if sep == 1 {
            out.push(' ');
        }
        out.push_str(s);
        used += sep + len;
    }
    if used > 0 || text.trim().is_empty() {
        return out;
    }

    let first = sentences(text)[0];
    let budget = max_chars - 1;
    let chars: Vec<char> = first.chars().collect();
    let at_boundary = chars.get(budget).is_none_or(|c| c.is_whitespace());
    let mut cut = budget;
    if !at_boundary {
        if let Some(ws) = chars[..budget].iter().rposition(|c| c.is_whitespace()) {
            cut = ws;
        }
    }
    let mut out: String = chars[..cut].iter().collect();
    out.truncate(out.trim_end().len());
    out.push('…');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::align_cues;
    use crate::layout::BBox;
    use crate::subtitle::TranscriptSource;
    use alloc::vec;

    fn seg(index: usize, start_ms: u64, end_ms: u64) -> SlideSegment {
        SlideSegment {
            index,
            start_ms,
            end_ms,
            keyframe_ms: start_ms,
            keyframe_ref: Some(format!("v/slide-{index}.png")),
            hash: 0,
        }
    }

    fn meta(duration_ms: u64) -> DocumentMeta {
        DocumentMeta {
            video_id: "talk-1".into(),
            title: "Talk".into(),
            duration_ms,
            source_ref: None,
        }
    }

    fn cues(items: &[(u64, u64, &str)]) -> Transcript {
        Transcript::new(
            items
                .iter()
                .map(|&(s, e, t)| Cue::new(s, e, t).unwrap())
                .collect(),
            TranscriptSource::SubtitleFile,
        )
    }

    #[test]
    fn speech_is_space_joined() {
        let segs = [seg(0, 0, 10_000)];
        let t = cues(&[(0, 1000, "a"), (2000, 3000, "b")]);
        let a = align_cues(&segs, &t).unwrap();
        let doc = build_document(&segs, &a, &[SlideLayout::untitled(0)], &t, meta(10_000)).unwrap();
        assert_eq!(doc.segments[0].speech, "a b");
        assert_eq!(doc.segments[0].cues.len(), 2);
        assert_eq!(doc.segments[0].keyframe.as_deref(), Some("v/slide-0.png"));
    }

    #[test]
    fn no_cues_is_valid() {
        let segs = [seg(0, 0, 5000), seg(1, 5000, 9000)];
        let t = cues(&[]);
        let a = align_cues(&segs, &t).unwrap();
        let layouts = [SlideLayout::untitled(0), SlideLayout::untitled(1)];
        let doc = build_document(&segs, &a, &layouts, &t, meta(9000)).unwrap();
        assert!(doc.segments.iter().all(|s| s.speech.is_empty()));
        doc.validate().unwrap();
    }

    #[test]
    fn alignment_past_segments_is_inconsistent() {
        let segs = [seg(0, 0, 5000)];
        let t = cues(&[(0, 1000, "a")]);
        let a = Alignment {
            mapping: vec![vec![], vec![0]],
        };
        let err =
            build_document(&segs, &a, &[SlideLayout::untitled(0)], &t, meta(5000)).unwrap_err();
        assert_eq!(
            err,
            Error::Consistency("1 segments, 1 layouts, 2 alignment entries".into())
        );
    }

    #[test]
    fn non_total_alignment_is_inconsistent() {
        let segs = [seg(0, 0, 5000)];
        let t = cues(&[(0, 1000, "a"), (1000, 2000, "b")]);
        let l = [SlideLayout::untitled(0)];
        let missing = Alignment {
            mapping: vec![vec![0]],
        };
        assert!(matches!(
            build_document(&segs, &missing, &l, &t, meta(5000)),
            Err(Error::Consistency(_))
        ));
        let dup = Alignment {
            mapping: vec![vec![0, 0, 1]],
        };
        assert!(build_document(&segs, &dup, &l, &t, meta(5000)).is_err());
        let oob = Alignment {
            mapping: vec![vec![0, 1, 2]],
        };
        assert!(build_document(&segs, &oob, &l, &t, meta(5000)).is_err());
    }

    #[test]
    fn bad_video_id_rejected() {
        let segs = [seg(0, 0, 5000)];
        let t = cues(&[]);
        let a = align_cues(&segs, &t).unwrap();
        let mut m = meta(5000);
        m.video_id = "Has Spaces".into();
        assert!(build_document(&segs, &a, &[SlideLayout::untitled(0)], &t, m).is_err());
        assert!(is_valid_video_id("a-0"));
        assert!(!is_valid_video_id(""));
        assert!(!is_valid_video_id(&"a".repeat(65)));
    }

    fn titled_doc(titles: &[&str]) -> VideoDocument {
        let segments = titles
            .iter()
            .enumerate()
            .map(|(i, t)| DocumentSegment {
                index: i,
                start_ms: i as u64 * 10_000,
                end_ms: (i as u64 + 1) * 10_000,
                keyframe: None,
                title: (*t).into(),
                regions: vec![Region {
                    kind: RegionKind::Figure,
                    bbox: BBox {
                        x: 0,
                        y: 0,
                        width: 5,
                        height: 5,
                    },
                    text: None,
                    asset_ref: Some(format!("talk-1/fig-{i}.png")),
                }],
                speech: format!("Point {i}."),
                cues: vec![],
            })
            .collect();
        VideoDocument {
            video_id: "talk-1".into(),
            title: "Talk".into(),
            duration_ms: titles.len() as u64 * 10_000,
            source_ref: None,
            segments,
        }
    }

    #[test]
    fn poster_single_chapter() {
        let p = build_poster(&titled_doc(&["Intro"]), DEFAULT_SUMMARY_CHARS);
        assert_eq!(p.chapters.len(), 1);
        assert_eq!(p.chapters[0].title, "Intro");
        assert_eq!(p.chapters[0].start_ms, 0);
    }

    #[test]
    fn poster_merges_builds() {
        let p = build_poster(
            &titled_doc(&["Method", "method ", "Results"]),
            DEFAULT_SUMMARY_CHARS,
        );
        let heads: Vec<_> = p
            .chapters
            .iter()
            .map(|c| (c.title.as_str(), c.start_ms))
            .collect();
        assert_eq!(heads, [("Method", 0), ("Results", 20_000)]);
        assert_eq!(
            p.chapters[0].figure_refs,
            ["talk-1/fig-0.png", "talk-1/fig-1.png"]
        );
        assert_eq!(p.chapters[0].summary, "Point 0. Point 1.");
    }

    #[test]
    fn fallback_titles_never_merge() {
        let p = build_poster(&titled_doc(&["Slide 1", "Slide 2"]), DEFAULT_SUMMARY_CHARS);
        assert_eq!(p.chapters.len(), 2);
    }

    #[test]
    fn empty_doc_empty_poster() {
        let p = build_poster(&titled_doc(&[]), DEFAULT_SUMMARY_CHARS);
        assert!(p.chapters.is_empty());
    }

    #[test]
    fn summary_rules() {
        assert_eq!(summarize_text("Short.", 400), "Short.");
        assert_eq!(summarize_text("A. B. C.", 4), "A.");
        assert_eq!(summarize_text("", 400), "");
        assert_eq!(summarize_text("   ", 400), "");
        assert_eq!(summarize_text("Is it? Yes! Fine.", 11), "Is it? Yes!");
        assert_eq!(
            summarize_text("no terminator here", 400),
            "no terminator here"
        );
        assert_eq!(
            summarize_text("version 3.5 works", 400),
            "version 3.5 works"
        );
    }

    #[test]
    fn long_first_sentence_is_cut_at_word() {
        assert_eq!(summarize_text("alpha beta gamma delta.", 12), "alpha beta…");
        assert_eq!(summarize_text("alpha beta gamma.", 11), "alpha beta…");
        assert_eq!(summarize_text("abcdefghijkl.", 5), "abcd…");
        assert_eq!(summarize_text("abc def.", 1), "…");
        let once = summarize_text("alpha beta gamma delta.", 12);
        assert_eq!(summarize_text(&once, 12), once);
    }

    #[test]
    fn segment_lookup() {
        let d = titled_doc(&["a", "b", "c"]);
        assert_eq!(d.segment_at(0), Some(0));
        assert_eq!(d.segment_at(10_000), Some(1));
        assert_eq!(d.segment_at(99_999), Some(2));
        assert_eq!(titled_doc(&[]).segment_at(5), None);
    }
}
