//! The offline ingest pipeline:
//! sample → detect → layout → transcript → align → document → poster → index → save.

use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lecturedeck_core::document::{is_valid_video_id, MAX_VIDEO_ID_LEN};
use lecturedeck_core::{
    align_cues, attach_text, build_document, build_poster, detect_boundaries, segment_regions,
    AssetSink, DocumentMeta, Error as CoreError, FrameSample, GrayImage, IngestParams,
    LayoutParams, OcrClient, RegionKind, SlideLayout, DEFAULT_SUMMARY_CHARS,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{
    load_gray, sample_frames, DecodedVideo, FrameDir, FrameProvider, DEFAULT_DECODER,
};
use crate::speech::{acquire_transcript, AsrClient};
use crate::store::{asset_ref, Asset, SaveFaults, Store};
use crate::vision::encode_png_gray;

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// A frame directory, or a video file handed to the decoder.
    pub source: PathBuf,
    pub subtitles: Option<PathBuf>,
    pub params: IngestParams,
    pub layout: LayoutParams,
    pub title: Option<String>,
    pub video_id: Option<String>,
    /// Command template with `{input}`, `{outdir}` and `{fps}` placeholders.
    pub decoder: String,
    /// Overrides the duration inferred from the last frame.
    pub duration_ms: Option<u64>,
    pub language: Option<String>,
    pub summary_chars: usize,
}

impl IngestOptions {
    pub fn new(source: impl Into<PathBuf>) -> Self {
        Self {
            source: source.into(),
            subtitles: None,
            params: IngestParams::default(),
            layout: LayoutParams::default(),
            title: None,
            video_id: None,
            decoder: DEFAULT_DECODER.to_string(),
            duration_ms: None,
            language: None,
            summary_chars: DEFAULT_SUMMARY_CHARS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub video_id: String,
    pub segment_count: usize,
    pub cue_count: usize,
    pub warnings: Vec<String>,
    pub elapsed_ms: u64,
}

/// Lowercase ASCII slug of `text`, at most 64 characters; `video` if nothing survives.
pub fn slugify(text: &str) -> String {
    let mut slug = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            slug.push(c);
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    slug.truncate(MAX_VIDEO_ID_LEN);
    let slug = slug.trim_end_matches('-');
    if slug.is_empty() {
        "video".to_string()
    } else {
        slug.to_string()
    }
}

fn source_stem(source: &Path) -> String {
    source
        .file_stem()
        .or_else(|| source.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "video".to_string())
}

/// Collects figure and table crops as PNG assets for one slide.
struct CropSink<'a> {
    video_id: &'a str,
    segment_index: usize,
    assets: &'a mut Vec<Asset>,
}

impl AssetSink for CropSink<'_> {
    fn store_crop(
        &mut self,
        region_index: usize,
        kind: RegionKind,
        crop: &GrayImage,
    ) -> std::result::Result<String, String> {
        let kind = match kind {
            RegionKind::Table => "table",
            _ => "figure",
        };
        let name = format!(
            "slide-{:04}-{kind}-{region_index:02}.png",
            self.segment_index
        );
        let bytes = encode_png_gray(crop).map_err(|e| e.to_string())?;
        self.assets.push(Asset {
            name: name.clone(),
            bytes,
        });
        Ok(asset_ref(self.video_id, &name))
    }
}

fn keyframe_png(path: &Path) -> Result<Vec<u8>> {
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        return std::fs::read(path).map_err(|e| Error::io(path, e));
    }
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    Ok(out.into_inner())
}

fn open_source(opts: &IngestOptions) -> Result<Box<dyn FrameProvider>> {
    let meta = std::fs::metadata(&opts.source).map_err(|e| Error::io(&opts.source, e))?;
    if meta.is_dir() {
        Ok(Box::new(FrameDir::new(&opts.source)))
    } else {
        Ok(Box::new(DecodedVideo::decode(
            &opts.decoder,
            &opts.source,
            opts.params.sample_rate_hz,
        )?))
    }
}

pub fn ingest(
    store: &Store,
    opts: &IngestOptions,
    ocr: &mut dyn OcrClient,
    asr: &mut dyn AsrClient,
) -> Result<IngestReport> {
    ingest_with(store, opts, ocr, asr, SaveFaults::default())
}

pub fn ingest_with(
    store: &Store,
    opts: &IngestOptions,
    ocr: &mut dyn OcrClient,
    asr: &mut dyn AsrClient,
    faults: SaveFaults,
) -> Result<IngestReport> {
    let started = Instant::now();
    opts.params.validate()?;
    let title = opts
        .title
        .clone()
        .unwrap_or_else(|| source_stem(&opts.source));
    let video_id = match &opts.video_id {
        Some(id) if is_valid_video_id(id) => id.clone(),
        Some(id) => {
            return Err(Error::Usage(format!(
                "video id {id:?} must match [a-z0-9-]{{1,64}}"
            )))
        }
        None => slugify(&title),
    };
    if store.contains(&video_id)? {
        return Err(Error::Conflict(format!("video {video_id} already exists")));
    }
    let mut warnings = Vec::new();

    let provider = open_source(opts)?;
    let samples = sample_frames(provider.as_ref(), &opts.params)?;
    let last = samples.last().expect("sample_frames never returns empty");
    let duration_ms = opts
        .duration_ms
        .unwrap_or(last.timestamp_ms + opts.params.sample_period_ms());
    let mut segments = detect_boundaries(&samples, &opts.params, duration_ms)?;

    let frame_paths: BTreeMap<u64, &FrameSample> =
        samples.iter().map(|s| (s.timestamp_ms, s)).collect();
    let mut assets = Vec::new();
    let mut layouts = Vec::with_capacity(segments.len());
    for seg in &mut segments {
        let path = frame_paths
            .get(&seg.keyframe_ms)
            .and_then(|s| s.frame_ref.as_deref())
            .map(PathBuf::from)
            .expect("keyframes are sample timestamps");
        let name = format!("slide-{:04}.png", seg.index);
        assets.push(Asset {
            name: name.clone(),
            bytes: keyframe_png(&path)?,
        });
        seg.keyframe_ref = Some(asset_ref(&video_id, &name));

        let image = load_gray(&path)?;
        let regions = match segment_regions(&image, &opts.layout) {
            Ok(r) => r,
            Err(CoreError::InvalidInput(msg)) => {
                warnings.push(format!("slide {}: layout skipped: {msg}", seg.index));
                layouts.push(SlideLayout::untitled(seg.index));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mut sink = CropSink {
            video_id: &video_id,
            segment_index: seg.index,
            assets: &mut assets,
        };
        let regions = attach_text(regions, &image, ocr, &mut sink)?;
        layouts.push(SlideLayout::new(seg.index, regions)?);
    }

    let audio_ref = opts.source.to_string_lossy();
    let acquired = acquire_transcript(
        opts.subtitles.as_deref(),
        asr,
        Some(&audio_ref),
        opts.language.as_deref(),
    )?;
    warnings.extend(acquired.warnings);
    let transcript = acquired.transcript;
    let alignment = align_cues(&segments, &transcript)?;
    let doc = build_document(
        &segments,
        &alignment,
        &layouts,
        &transcript,
        DocumentMeta {
            video_id: video_id.clone(),
            title,
            duration_ms,
            source_ref: Some(opts.source.to_string_lossy().into_owned()),
        },
    )?;
    let poster = build_poster(&doc, opts.summary_chars);

    let mut index = store.load_index()?;
    index.remove_document(&video_id);
    index.index_document(&doc)?;
    store.save_document_with(&doc, &poster, &assets, Some(&index), faults)?;

    Ok(IngestReport {
        video_id,
        segment_count: doc.segments.len(),
        cue_count: transcript.len(),
        warnings,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}
