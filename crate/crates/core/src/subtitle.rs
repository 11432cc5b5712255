//! SRT and WebVTT cue parsing.
//!
//! Both parsers are lenient: blocks that cannot be parsed, or whose times
//! are inverted, are skipped and reported as warnings. Input that has text
//! but yields no cue at all is a format error.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timed unit of speech.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cue {
    pub start_ms: u64,
    pub end_ms: u64,
    pub text: String,
}

impl Cue {
    /// Builds a cue, collapsing line breaks and rejecting empty or inverted cues.
    pub fn new(start_ms: u64, end_ms: u64, text: &str) -> Result<Self> {
        if start_ms >= end_ms {
            return Err(Error::invalid(format!(
                "cue start {start_ms} is not before end {end_ms}"
            )));
        }
        let text = collapse_lines(text);
        if text.is_empty() {
            return Err(Error::invalid("cue text is empty"));
        }
        Ok(Self {
            start_ms,
            end_ms,
            text,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptSource {
    SubtitleFile,
    AsrClient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub cues: Vec<Cue>,
    pub source: TranscriptSource,
}

impl Transcript {
    /// Sorts by start, then end. The sort is stable.
    pub fn new(mut cues: Vec<Cue>, source: TranscriptSource) -> Self {
        cues.sort_by_key(|c| (c.start_ms, c.end_ms));
        Self { cues, source }
    }

    pub fn empty(source: TranscriptSource) -> Self {
        Self {
            cues: Vec::new(),
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.cues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }
}

/// Parser output: the transcript plus any skipped-block warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub transcript: Transcript,
    pub warnings: Vec<String>,
}

fn collapse_lines(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(line);
    }
    out
}

fn normalize(text: &str) -> String {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Parses `[HH:]MM:SS(,|.)mmm`. Hours may have any number of digits.
fn parse_timestamp(s: &str) -> Option<u64> {
    let s = s.trim();
    let (clock, frac) = s.rsplit_once([',', '.'])?;
    if frac.len() != 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let millis: u64 = frac.parse().ok()?;
    let parts: Vec<&str> = clock.split(':').collect();
    let (h, m, sec) = match parts.as_slice() {
        [h, m, s] => (*h, *m, *s),
        [m, s] => ("0", *m, *s),
        _ => return None,
    };
    let num = |p: &str, max_len: Option<usize>| -> Option<u64> {
        if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if max_len.is_some_and(|n| p.len() != n) {
            return None;
        }
        p.parse().ok()
    };
    let h = num(h, None)?;
    let m = num(m, Some(2))?;
    let sec = num(sec, Some(2))?;
    if m > 59 || sec > 59 {
        return None;
    }
    Some(((h * 60 + m) * 60 + sec) * 1000 + millis)
}

/// Parses `start --> end [settings]`.
fn parse_time_line(line: &str) -> Option<(u64, u64)> {
    let (start, rest) = line.split_once("-->")?;
    let end = rest.split_whitespace().next()?;
    Some((parse_timestamp(start)?, parse_timestamp(end)?))
}

struct Block<'a> {
    first_line: usize,
    lines: Vec<&'a str>,
}

fn blocks(text: &str) -> Vec<Block<'_>> {
    let mut out = Vec::new();
    let mut cur: Option<Block<'_>> = None;
    for (i, line) in text.split('\n').enumerate() {
        if line.trim().is_empty() {
            if let Some(b) = cur.take() {
                out.push(b);
            }
        } else {
            cur.get_or_insert_with(|| Block {
                first_line: i + 1,
                lines: Vec::new(),
            })
            .lines
            .push(line);
        }
    }
    out.extend(cur);
    out
}

#[derive(Default)]
struct Collector {
    cues: Vec<Cue>,
    warnings: Vec<String>,
    first_bad: Option<(usize, String)>,
}

impl Collector {
    fn reject(&mut self, line: usize, content: &str, why: &str) {
        self.warnings
            .push(format!("line {line}: skipped block ({why}): {content}"));
        if self.first_bad.is_none() {
            self.first_bad = Some((line, content.to_string()));
        }
    }

    /// Parses a cue block whose time line sits at `time_idx`.
    fn cue_block(&mut self, block: &Block<'_>, time_idx: usize) {
        let line_no = block.first_line + time_idx;
        let time_line = block.lines[time_idx];
        let Some((start, end)) = parse_time_line(time_line) else {
            self.reject(line_no, time_line, "malformed time line");
            return;
        };
        let body = block.lines[time_idx + 1..].join("\n");
        match Cue::new(start, end, &body) {
            Ok(cue) => self.cues.push(cue),
            Err(Error::InvalidInput(why)) => self.reject(line_no, time_line, &why),
            Err(e) => self.reject(line_no, time_line, &e.to_string()),
        }
    }

    fn finish(self, had_content: bool) -> Result<Parsed> {
        if self.cues.is_empty() && had_content {
            let (line, content) = self.first_bad.unwrap_or((1, String::new()));
            return Err(Error::Format { line, content });
        }
        Ok(Parsed {
            transcript: Transcript::new(self.cues, TranscriptSource::SubtitleFile),
            warnings: self.warnings,
        })
    }
}

/// Parses SubRip text.
pub fn parse_srt(text: &str) -> Result<Parsed> {
    let text = normalize(text);
    let blocks = blocks(&text);
    let mut col = Collector::default();
    for block in &blocks {
        match block.lines.iter().position(|l| l.contains("-->")) {
            // Either "N / time / text" or, in sloppy files, "time / text".
            Some(idx @ (0 | 1)) => col.cue_block(block, idx),
            _ => col.reject(block.first_line, block.lines[0], "no time line"),
        }
    }
    col.finish(!blocks.is_empty())
}

/// Parses WebVTT text. The `WEBVTT` header is mandatory.
pub fn parse_vtt(text: &str) -> Result<Parsed> {
    let text = normalize(text);
    let header = text.lines().next().unwrap_or("");
    let valid_header = header
        .strip_prefix("WEBVTT")
        .is_some_and(|rest| rest.is_empty() || rest.starts_with([' ', '\t']));
    if !valid_header {
        return Err(Error::Format {
            line: 1,
            content: header.to_string(),
        });
    }
    let blocks = blocks(&text);
    let mut col = Collector::default();
    let mut had_content = false;
    // The first block is the header (plus optional metadata lines).
    for block in blocks.iter().skip(1) {
        let first = block.lines[0];
        let keyword = first.split([' ', '\t']).next().unwrap_or("");
        if matches!(keyword, "NOTE" | "STYLE" | "REGION") && !first.contains("-->") {
            continue;
        }
        had_content = true;
        match block.lines.iter().position(|l| l.contains("-->")) {
            Some(idx @ (0 | 1)) => col.cue_block(block, idx),
            _ => col.reject(block.first_line, first, "no time line"),
        }
    }
    col.finish(had_content)
}

fn format_srt_time(out: &mut String, ms: u64) {
    let (h, rem) = (ms / 3_600_000, ms % 3_600_000);
    let (m, rem) = (rem / 60_000, rem % 60_000);
    let (s, ms) = (rem / 1000, rem % 1000);
    let _ = write!(out, "{h:02}:{m:02}:{s:02},{ms:03}");
}

/// Serializes cues as SubRip.
pub fn write_srt(transcript: &Transcript) -> String {
    let mut out = String::new();
    for (i, cue) in transcript.cues.iter().enumerate() {
        let _ = writeln!(out, "{}", i + 1);
        format_srt_time(&mut out, cue.start_ms);
        out.push_str(" --> ");
        format_srt_time(&mut out, cue.end_ms);
        let _ = write!(out, "\n{}\n\n", cue.text);
    }
    out
}
