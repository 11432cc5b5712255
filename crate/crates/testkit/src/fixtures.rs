use lecturedeck_core::{BBox, Cue, DocumentSegment, GrayImage, Region, RegionKind, VideoDocument};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Flips exactly `bits` distinct random bits of `h`.
pub fn flip_bits(rng: &mut impl Rng, h: u64, bits: u32) -> u64 {
    let idx = rand::seq::index::sample(rng, 64, bits as usize);
    idx.iter().fold(h, |acc, i| acc ^ (1u64 << i))
}

/// `n` slide hashes where each consecutive pair differs in exactly `distance` bits.
pub fn planted_hashes(rng: &mut impl Rng, n: usize, distance: u32) -> Vec<u64> {
    let mut out = vec![rng.random::<u64>()];
    while out.len() < n {
        let prev = *out.last().unwrap();
        out.push(flip_bits(rng, prev, distance));
    }
    out
}

/// A raster whose 9×8 dHash is exactly `hash`: each cell is a uniform
/// `cell_w`×`cell_h` block, and each row walks ±12 gray levels per column.
pub fn image_with_hash(hash: u64, cell_w: u32, cell_h: u32) -> GrayImage {
    let mut cells = [[0u8; 9]; 8];
    for (r, row) in cells.iter_mut().enumerate() {
        let mut v: i32 = 128;
        row[0] = v as u8;
        for c in 0..8 {
            let bit = (hash >> (63 - (r * 8 + c))) & 1;
            v += if bit == 1 { -12 } else { 12 };
            row[c + 1] = v as u8;
        }
    }
    GrayImage::from_fn(9 * cell_w, 8 * cell_h, |x, y| {
        cells[(y / cell_h) as usize][(x / cell_w) as usize]
    })
}

const WORDS: &[&str] = &[
    "image",
    "synthesis",
    "network",
    "layer",
    "graph",
    "model",
    "video",
    "slide",
    "result",
    "method",
    "partial",
    "editing",
    "lecture",
    "search",
    "poster",
    "frame",
    "data",
    "speech",
];

/// Between `range.start` and `range.end - 1` vocabulary words.
pub fn words(rng: &mut impl Rng, range: std::ops::Range<usize>) -> String {
    let n = if range.len() > 1 {
        rng.random_range(range)
    } else {
        range.start
    };
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn text(rng: &mut impl Rng) -> String {
    const ODD: &[&str] = &[
        "café",
        "naïve",
        "\"quoted\"",
        "a\\b",
        "日本語",
        "emoji 🎓",
        "tab\there",
    ];
    let mut s = words(rng, 1..6);
    if rng.random_bool(0.3) {
        s.push(' ');
        s.push_str(ODD.choose(rng).unwrap());
    }
    s
}

fn video_id(rng: &mut impl Rng) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789-";
    let len = rng.random_range(1..=24);
    (0..len)
        .map(|_| *ALPHABET.choose(rng).unwrap() as char)
        .collect()
}

/// A random document that satisfies every `VideoDocument` invariant.
pub fn random_document(rng: &mut impl Rng) -> VideoDocument {
    let id = video_id(rng);
    let n = rng.random_range(1..8);
    let mut start = 0u64;
    let mut segments = Vec::with_capacity(n);
    for index in 0..n {
        let end = start + rng.random_range(1000..60_000);
        let mut regions = Vec::new();
        let title = text(rng);
        if rng.random_bool(0.7) {
            let mut r = Region::new(RegionKind::Title, bbox(rng));
            r.text = Some(title.clone());
            regions.push(r);
        }
        for k in 0..rng.random_range(0..4) {
            let kind = *[RegionKind::BodyText, RegionKind::Figure, RegionKind::Table]
                .choose(rng)
                .unwrap();
            let mut r = Region::new(kind, bbox(rng));
            if kind.is_text() {
                r.text = rng.random_bool(0.8).then(|| text(rng));
            } else {
                r.asset_ref = Some(format!("{id}/slide-{index:04}-region-{k}.png"));
            }
            regions.push(r);
        }
        let mut cues = Vec::new();
        let mut t = start;
        for _ in 0..rng.random_range(0..5) {
            let len = rng.random_range(1..5000);
            cues.push(Cue::new(t, t + len, &text(rng)).unwrap());
            t += rng.random_range(0..3000);
        }
        let speech = cues
            .iter()
            .map(|c| c.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        segments.push(DocumentSegment {
            index,
            start_ms: start,
            end_ms: end,
            keyframe: rng
                .random_bool(0.9)
                .then(|| format!("{id}/slide-{index:04}.png")),
            title,
            regions,
            speech,
            cues,
        });
        start = end;
    }
    VideoDocument {
        video_id: id,
        title: text(rng),
        duration_ms: start,
        source_ref: rng.random_bool(0.5).then(|| "/videos/talk.mp4".to_string()),
        segments,
    }
}

fn bbox(rng: &mut impl Rng) -> BBox {
    BBox {
        x: rng.random_range(0..600),
        y: rng.random_range(0..400),
        width: rng.random_range(1..200),
        height: rng.random_range(1..100),
    }
}

/// Document with one segment per `(slide title, speech)` pair, 10 s each.
pub fn simple_document(id: &str, title: &str, slides: &[(&str, &str)]) -> VideoDocument {
    VideoDocument {
        video_id: id.into(),
        title: title.into(),
        duration_ms: slides.len() as u64 * 10_000,
        source_ref: None,
        segments: slides
            .iter()
            .enumerate()
            .map(|(i, (t, s))| DocumentSegment {
                index: i,
                start_ms: i as u64 * 10_000,
                end_ms: (i as u64 + 1) * 10_000,
                keyframe: None,
                title: (*t).into(),
                regions: vec![],
                speech: (*s).into(),
                cues: vec![],
            })
            .collect(),
    }
}

/// Three videos with hand-controlled frequencies of "image".
pub fn bm25_fixture() -> Vec<VideoDocument> {
    vec![
        simple_document(
            "gan-talk",
            "Image Synthesis with GANs",
            &[
                ("Image synthesis", "we synthesize an image from noise"),
                ("Results", "image quality image diversity and speed"),
            ],
        ),
        simple_document(
            "graph-talk",
            "Graph Neural Networks",
            &[
                ("Message passing", "nodes exchange messages along edges"),
                (
                    "Applications",
                    "molecules social networks and one image dataset",
                ),
            ],
        ),
        simple_document(
            "editing-talk",
            "Partial Editing Layers",
            &[
                ("Input", "the input is an image and a mask"),
                (
                    "Partial editing layer",
                    "the layer edits only masked image regions",
                ),
                ("Summary", "editing is fast"),
            ],
        ),
    ]
}

/// `n` documents drawn from the shared small vocabulary.
pub fn random_corpus(rng: &mut impl Rng, n: usize) -> Vec<VideoDocument> {
    (0..n)
        .map(|i| {
            let slides: Vec<(String, String)> = (0..rng.random_range(1..5))
                .map(|_| {
                    let t = words(rng, 1..4);
                    let s = words(rng, 0..30);
                    (t, s)
                })
                .collect();
            let refs: Vec<(&str, &str)> = slides
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect();
            simple_document(&format!("video-{i:02}"), &words(rng, 3..4), &refs)
        })
        .collect()
}

/// A random query of 1–3 vocabulary words, sometimes with an unknown word.
pub fn random_query(rng: &mut impl Rng) -> String {
    let mut q = words(rng, 1..4);
    if rng.random_bool(0.2) {
        q.push_str(" unknownword");
    }
    q
}
