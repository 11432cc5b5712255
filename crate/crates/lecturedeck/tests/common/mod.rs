//! Synthetic lectures and stores shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lecturedeck::core::{build_poster, SearchIndex, VideoDocument, DEFAULT_SUMMARY_CHARS};
use lecturedeck::store::{Asset, SaveFaults, Store};
use lecturedeck::vision::encode_png_gray;
use lecturedeck_testkit::fixtures::{flip_bits, image_with_hash, planted_hashes, simple_document};
use rand::Rng;

pub struct Lecture {
    pub frames: PathBuf,
    pub subtitles: PathBuf,
    /// Planted slide intervals, in ms.
    pub slides: Vec<(u64, u64)>,
    pub cues: Vec<(u64, u64, String)>,
    pub duration_ms: u64,
}

fn srt_time(ms: u64) -> String {
    format!(
        "{:02}:{:02}:{:02},{:03}",
        ms / 3_600_000,
        ms / 60_000 % 60,
        ms / 1000 % 60,
        ms % 1000
    )
}

/// Writes a 1 Hz frame directory with one planted hash per slide (consecutive
/// slides `distance` bits apart, each frame perturbed by up to `noise` bits),
/// plus an SRT with two cues inside each slide and one straddling each cut.
pub fn write_lecture(
    root: &Path,
    rng: &mut impl Rng,
    slide_secs: &[u64],
    distance: u32,
    noise: u32,
) -> Lecture {
    let frames = root.join("frames");
    fs::create_dir_all(&frames).unwrap();
    let bases = planted_hashes(rng, slide_secs.len(), distance);
    let mut slides = Vec::new();
    let mut t = 0u64;
    for (k, &secs) in slide_secs.iter().enumerate() {
        slides.push((t * 1000, (t + secs) * 1000));
        for _ in 0..secs {
            let bits = rng.random_range(0..=noise);
            let img = image_with_hash(flip_bits(rng, bases[k], bits), 8, 8);
            fs::write(
                frames.join(format!("{:06}.png", t * 1000)),
                encode_png_gray(&img).unwrap(),
            )
            .unwrap();
            t += 1;
        }
    }
    let duration_ms = t * 1000;

    let mut cues = Vec::new();
    for (k, &(s, e)) in slides.iter().enumerate() {
        let mid = (s + e) / 2;
        cues.push((s + 100, mid, format!("slide {k} opening remark")));
        cues.push((mid, e - 700, format!("slide {k} closing remark")));
        if e < duration_ms {
            // overlaps this slide by 600 ms and the next by 400 ms
            cues.push((e - 600, e + 400, format!("bridge after slide {k}")));
        }
    }
    let mut srt = String::new();
    for (i, (s, e, text)) in cues.iter().enumerate() {
        srt.push_str(&format!(
            "{}\n{} --> {}\n{text}\n\n",
            i + 1,
            srt_time(*s),
            srt_time(*e)
        ));
    }
    let subtitles = root.join("talk.srt");
    fs::write(&subtitles, srt).unwrap();
    Lecture {
        frames,
        subtitles,
        slides,
        cues,
        duration_ms,
    }
}

pub fn fixture_documents() -> Vec<VideoDocument> {
    let mut gan = simple_document(
        "gan-talk",
        "Image Synthesis with GANs",
        &[
            (
                "Introduction",
                "Welcome. Today we talk about generative models.",
            ),
            (
                "Method",
                "The generator maps noise to an image. The discriminator judges it.",
            ),
            ("Method", "Training alternates between the two networks."),
            ("Results", "Samples look realistic."),
        ],
    );
    gan.segments[1].keyframe = Some("gan-talk/slide-0001.png".into());
    let graph = simple_document(
        "graph-talk",
        "Graph Neural Networks",
        &[
            ("Overview", "Message passing on graphs."),
            ("Applications", "Molecules and social networks."),
        ],
    );
    vec![gan, graph]
}

/// A store holding [`fixture_documents`], their posters, one keyframe asset and the index.
pub fn fixture_store(root: &Path) -> Store {
    let store = Store::create(root).unwrap();
    let mut index = SearchIndex::new();
    for doc in fixture_documents() {
        index.index_document(&doc).unwrap();
        let assets: Vec<Asset> = doc
            .segments
            .iter()
            .filter_map(|s| s.keyframe.as_ref())
            .map(|k| Asset {
                name: k.rsplit('/').next().unwrap().to_string(),
                bytes: encode_png_gray(&image_with_hash(0x0123_4567_89ab_cdef, 4, 4)).unwrap(),
            })
            .collect();
        store
            .save_document_with(
                &doc,
                &build_poster(&doc, DEFAULT_SUMMARY_CHARS),
                &assets,
                Some(&index),
                SaveFaults::default(),
            )
            .unwrap();
    }
    store
}

/// Relative path → contents of every file under `root`.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}
