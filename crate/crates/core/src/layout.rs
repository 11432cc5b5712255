//! Heuristic slide layout analysis.
//!
//! A keyframe is binarized, foreground is grouped into blocks with a
//! morphological closing plus connected components, and each block is
//! classified as title, body text, table or figure from its ink density,
//! size, position and ruling lines. Text recognition is delegated to an
//! [`OcrClient`]; figure and table crops go to an [`AssetSink`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

pub const MIN_LAYOUT_SIDE: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Title,
    BodyText,
    Figure,
    Table,
}

impl RegionKind {
    pub fn is_text(self) -> bool {
        matches!(self, RegionKind::Title | RegionKind::BodyText)
    }

    pub fn is_imagery(self) -> bool {
        !self.is_text()
    }
}

/// Pixel rectangle, serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl From<[u32; 4]> for BBox {
    fn from([x, y, width, height]: [u32; 4]) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }
}

impl From<BBox> for [u32; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.width, b.height]
    }
}

impl BBox {
    #[inline]
    pub fn right(&self) -> u32 {
        self.x + self.width
    }

    #[inline]
    pub fn bottom(&self) -> u32 {
        self.y + self.height
    }

    #[inline]
    pub fn area(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    pub fn union(&self, other: &BBox) -> BBox {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        BBox {
            x,
            y,
            width: self.right().max(other.right()) - x,
            height: self.bottom().max(other.bottom()) - y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub bbox: BBox,
    pub text: Option<String>,
    #[serde(rename = "asset")]
    pub asset_ref: Option<String>,
}

impl Region {
    pub fn new(kind: RegionKind, bbox: BBox) -> Self {
        Self {
            kind,
            bbox,
            text: None,
            asset_ref: None,
        }
    }
}

/// Tunables for [`segment_regions`]. Fractions are relative to the image
/// (or, for `grid_span`, to the block).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    /// A pixel is ink when it is this much darker than its local mean.
    pub adaptive_offset: u8,
    /// ... or this much darker than the page background (the median).
    pub background_gap: u8,
    pub title_band: f64,
    pub text_density_min: f64,
    pub text_density_max: f64,
    pub text_max_height: f64,
    pub grid_span: f64,
    pub min_grid_lines: usize,
    pub min_figure_area: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            adaptive_offset: 10,
            background_gap: 64,
            title_band: 0.25,
            text_density_min: 0.05,
            text_density_max: 0.45,
            text_max_height: 0.15,
            grid_span: 0.60,
            min_grid_lines: 2,
            min_figure_area: 0.02,
        }
    }
}

/// Binary foreground mask with a summed-area table for box counts.
struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    fn count_in(&self, b: &BBox) -> u64 {
        let mut n = 0;
        for y in b.y as usize..b.bottom() as usize {
            let row = &self.bits[y * self.width..(y + 1) * self.width];
            n += row[b.x as usize..b.right() as usize]
                .iter()
                .filter(|&&v| v)
                .count() as u64;
        }
        n
    }
}

fn median(image: &GrayImage) -> u8 {
    let mut hist = [0u64; 256];
    for &p in image.as_raw() {
        hist[p as usize] += 1;
    }
    let half = (image.as_raw().len() as u64).div_ceil(2);
    let mut acc = 0;
    for (v, &n) in hist.iter().enumerate() {
        acc += n;
        if acc >= half {
            return v as u8;
        }
    }
    255
}

/// Adaptive mean threshold with a global background floor. Light-on-dark
/// slides are inverted first so ink is always darker than the page.
fn binarize(image: &GrayImage, params: &LayoutParams) -> Mask {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let med = median(image);
    let invert = med < 128;
    let px = |x: usize, y: usize| {
        let v = image.get(x as u32, y as u32);
        if invert {
            255 - v
        } else {
            v
        }
    };
    let background = if invert { 255 - med } else { med } as u64;

    let mut sat = vec![0u64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += px(x, y) as u64;
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }

    let radius = (w.min(h) / 16).max(7);
    let offset = params.adaptive_offset as u64;
    let gap = params.background_gap as u64;
    let mut mask = Mask::new(w, h);
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(radius), (y + radius + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(radius), (x + radius + 1).min(w));
            let sum = sat[y1 * (w + 1) + x1] + sat[y0 * (w + 1) + x0]
                - sat[y0 * (w + 1) + x1]
                - sat[y1 * (w + 1) + x0];
            let count = ((x1 - x0) * (y1 - y0)) as u64;
            let p = px(x, y) as u64;
            mask.bits[y * w + x] = (p + offset) * count < sum || p + gap < background;
        }
    }
    mask
}

/// One separable pass of a box dilation (`all = false`) or erosion
/// (`all = true`) along rows or columns. Out-of-range pixels count as
/// background for dilation and foreground for erosion.
fn box_pass(mask: &Mask, radius: usize, horizontal: bool, all: bool) -> Mask {
    let (w, h) = (mask.width, mask.height);
    let (lines, len) = if horizontal { (h, w) } else { (w, h) };
    let mut out = Mask::new(w, h);
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        let get = |i: usize| {
            if horizontal {
                mask.at(i, line)
            } else {
                mask.at(line, i)
            }
        };
        for i in 0..len {
            prefix[i + 1] = prefix[i] + get(i) as usize;
        }
        for i in 0..len {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(len);
            let ones = prefix[hi] - prefix[lo];
            let v = if all { ones == hi - lo } else { ones > 0 };
            let idx = if horizontal {
                line * w + i
            } else {
                i * w + line
            };
            out.bits[idx] = v;
        }
    }
    out
}

fn close(mask: &Mask, rx: usize, ry: usize) -> Mask {
    let d = box_pass(&box_pass(mask, rx, true, false), ry, false, false);
    box_pass(&box_pass(&d, rx, true, true), ry, false, true)
}

/// Bounding boxes of 8-connected foreground components.
fn components(mask: &Mask) -> Vec<BBox> {
    let (w, h) = (mask.width, mask.height);
    let mut seen = vec![false; w * h];
    let mut boxes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0, 0);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if mask.bits[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        boxes.push(BBox {
            x: x0 as u32,
            y: y0 as u32,
            width: (x1 - x0 + 1) as u32,
            height: (y1 - y0 + 1) as u32,
        });
    }
    boxes
}

/// Unions intersecting boxes until no two intersect.
fn merge_overlapping(mut boxes: Vec<BBox>) -> Vec<BBox> {
    loop {
        let mut merged = false;
        let mut out: Vec<BBox> = Vec::with_capacity(boxes.len());
        for b in boxes {
            let mut b = b;
            let mut i = 0;
            while i < out.len() {
                if out[i].intersects(&b) {
                    b = b.union(&out.swap_remove(i));
                    merged = true;
                } else {
                    i += 1;
                }
            }
            out.push(b);
        }
        boxes = out;
        if !merged {
            return boxes;
        }
    }
}

/// Counts maximal groups of adjacent rows (or columns) whose longest ink run
/// covers at least `span` of the block extent.
fn ruling_lines(mask: &Mask, b: &BBox, span: f64, horizontal: bool) -> usize {
    let (outer, inner) = if horizontal {
        (b.y..b.bottom(), b.x..b.right())
    } else {
        (b.x..b.right(), b.y..b.bottom())
    };
    let need = span * inner.len() as f64;
    let mut groups = 0;
    let mut in_line = false;
    for o in outer {
        let mut run = 0usize;
        let mut best = 0usize;
        for i in inner.clone() {
            let on = if horizontal {
                mask.at(i as usize, o as usize)
            } else {
                mask.at(o as usize, i as usize)
            };
            run = if on { run + 1 } else { 0 };
            best = best.max(run);
        }
        let is_line = best as f64 >= need;
        if is_line && !in_line {
            groups += 1;
        }
        in_line = is_line;
    }
    groups
}

/// Finds and classifies layout regions. Returned regions carry no text.
pub fn segment_regions(image: &GrayImage, params: &LayoutParams) -> Result<Vec<Region>> {
    let (w, h) = (image.width(), image.height());
    if w < MIN_LAYOUT_SIDE || h < MIN_LAYOUT_SIDE {
        return Err(Error::invalid(format!(
            "layout needs at least {MIN_LAYOUT_SIDE}x{MIN_LAYOUT_SIDE} pixels, got {w}x{h}"
        )));
    }
    let ink = binarize(image, params);
    let closed = close(&ink, (w as usize / 80).max(2), (h as usize / 120).max(1));
    let mut blocks = merge_overlapping(components(&closed));
    blocks.sort_by_key(|b| (b.y, b.x));

    let image_area = w as f64 * h as f64;
    let text_like = |b: &BBox| {
        let density = ink.count_in(b) as f64 / b.area() as f64;
        density >= params.text_density_min
            && density <= params.text_density_max
            && b.height as f64 <= params.text_max_height * h as f64
    };

    let mut regions = Vec::new();
    let mut title: Option<(usize, u32)> = None;
    for b in &blocks {
        let kind = if text_like(b) {
            if b.bottom() as f64 <= params.title_band * h as f64
                && title.is_none_or(|(_, th)| b.height > th)
            {
                title = Some((regions.len(), b.height));
            }
            RegionKind::BodyText
        } else if ruling_lines(&ink, b, params.grid_span, true) >= params.min_grid_lines
            && ruling_lines(&ink, b, params.grid_span, false) >= params.min_grid_lines
        {
            RegionKind::Table
        } else if b.area() as f64 >= params.min_figure_area * image_area {
            RegionKind::Figure
        } else {
            continue;
        };
        regions.push(Region::new(kind, *b));
    }
    if let Some((i, _)) = title {
        regions[i].kind = RegionKind::Title;
    }
    Ok(regions)
}

/// Text recognition backend.
pub trait OcrClient {
    fn recognize(&mut self, crop: &GrayImage) -> core::result::Result<String, String>;
}

/// OCR that recognizes nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubOcr;

impl OcrClient for StubOcr {
    fn recognize(&mut self, _crop: &GrayImage) -> core::result::Result<String, String> {
        Ok(String::new())
    }
}

/// Destination for figure and table crops. Returns the stored asset reference.
pub trait AssetSink {
    fn store_crop(
        &mut self,
        region_index: usize,
        kind: RegionKind,
        crop: &GrayImage,
    ) -> core::result::Result<String, String>;
}

/// Runs OCR over text regions and stores imagery crops.
pub fn attach_text(
    mut regions: Vec<Region>,
    image: &GrayImage,
    ocr: &mut dyn OcrClient,
    assets: &mut dyn AssetSink,
) -> Result<Vec<Region>> {
    for (i, region) in regions.iter_mut().enumerate() {
        let b = region.bbox;
        let crop = image.crop(b.x, b.y, b.width, b.height);
        if region.kind.is_text() {
            let text = ocr.recognize(&crop).map_err(|message| Error::Ocr {
                region_index: i,
                message,
            })?;
            region.text = Some(text);
        } else {
            let r = assets
                .store_crop(i, region.kind, &crop)
                .map_err(|message| Error::Asset {
                    region_index: i,
                    message,
                })?;
            region.asset_ref = Some(r);
        }
    }
    Ok(regions)
}

/// The slide's title: the trimmed Title text, or `Slide N` (1-based).
pub fn extract_title(regions: &[Region], segment_index: usize) -> String {
    regions
        .iter()
        .find(|r| r.kind == RegionKind::Title)
        .and_then(|r| r.text.as_deref())
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .unwrap_or_else(|| format!("Slide {}", segment_index + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideLayout {
    pub segment_index: usize,
    pub regions: Vec<Region>,
    pub title: String,
}

impl SlideLayout {
    /// Resolves the title and writes it back into an untitled Title region.
    pub fn new(segment_index: usize, mut regions: Vec<Region>) -> Result<Self> {
        let titles = regions
            .iter()
            .filter(|r| r.kind == RegionKind::Title)
            .count();
        if titles > 1 {
            return Err(Error::invalid(format!(
                "slide {segment_index} has {titles} title regions"
            )));
        }
        let title = extract_title(&regions, segment_index);
        for r in regions.iter_mut().filter(|r| r.kind == RegionKind::Title) {
            if r.text.as_deref().is_none_or(|t| t.trim().is_empty()) {
                r.text = Some(title.clone());
            }
        }
        Ok(Self {
            segment_index,
            regions,
            title,
        })
    }

    /// A layout with no regions and the fallback title.
    pub fn untitled(segment_index: usize) -> Self {
        Self {
            segment_index,
            regions: Vec::new(),
            title: extract_title(&[], segment_index),
        }
    }
}
