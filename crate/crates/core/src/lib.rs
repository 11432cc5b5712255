//! Core algorithms for turning slide-based lecture videos into searchable,
//! navigable documents.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds without `std` (an allocator is required). Frame decoding, file
//! formats, persistence and serving live in the `lecturedeck` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod align;
pub mod document;
pub mod error;
pub mod hash;
pub mod layout;
pub mod raster;
pub mod search;
pub mod segment;
pub mod subtitle;

pub use align::{align_cues, Alignment};
pub use document::{
    build_document, build_poster, summarize_text, DocumentMeta, DocumentSegment, Poster,
    PosterChapter, VideoDocument, DEFAULT_SUMMARY_CHARS,
};
pub use error::{Error, Result};
pub use hash::{dhash64, hamming};
pub use layout::{
    attach_text, extract_title, segment_regions, AssetSink, BBox, LayoutParams, OcrClient, Region,
    RegionKind, SlideLayout, StubOcr,
};
pub use raster::GrayImage;
pub use search::{tokenize, Field, Hit, HitMatch, IndexStats, SearchIndex};
pub use segment::{detect_boundaries, FrameSample, IngestParams, SlideSegment};
pub use subtitle::{parse_srt, parse_vtt, write_srt, Cue, Parsed, Transcript, TranscriptSource};
