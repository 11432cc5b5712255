mod common;

use std::fs;

use common::{snapshot, write_lecture};
use lecturedeck::core::{Field, StubOcr};
use lecturedeck::pipeline::{ingest, ingest_with, IngestOptions};
use lecturedeck::speech::StubAsr;
use lecturedeck::store::{SaveFaults, Store};
use lecturedeck_testkit::oracle::overlap_owner;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn options(lecture: &common::Lecture, id: &str) -> IngestOptions {
    let mut opts = IngestOptions::new(&lecture.frames);
    opts.subtitles = Some(lecture.subtitles.clone());
    opts.video_id = Some(id.into());
    opts.title = Some("Synthetic Lecture".into());
    opts
}

#[test]
fn three_slides_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let lecture = write_lecture(tmp.path(), &mut StdRng::seed_from_u64(3), &[7, 7, 6], 32, 2);
    let store = Store::create(tmp.path().join("store")).unwrap();
    let report = ingest(
        &store,
        &options(&lecture, "synthetic"),
        &mut StubOcr,
        &mut StubAsr,
    )
    .unwrap();
    assert_eq!(report.segment_count, 3);
    assert_eq!(report.cue_count, lecture.cues.len());
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);

    let doc = store.load_document("synthetic").unwrap();
    assert_eq!(doc.duration_ms, lecture.duration_ms);
    let spans: Vec<_> = doc
        .segments
        .iter()
        .map(|s| (s.start_ms, s.end_ms))
        .collect();
    assert_eq!(spans, lecture.slides);

    let cue_spans: Vec<_> = lecture.cues.iter().map(|c| (c.0, c.1)).collect();
    let owners = overlap_owner(&spans, &cue_spans);
    for (cue, owner) in lecture.cues.iter().zip(owners) {
        assert!(
            doc.segments[owner].cues.iter().any(|c| c.text == cue.2),
            "{cue:?}"
        );
    }

    for seg in &doc.segments {
        let key = seg.keyframe.as_deref().unwrap();
        assert_eq!(key, format!("synthetic/slide-{:04}.png", seg.index));
        assert!(store.asset_path(key).unwrap().is_file());
        assert!(
            seg.title.starts_with("Slide "),
            "stub OCR leaves fallback titles"
        );
        for r in &seg.regions {
            if let Some(a) = &r.asset_ref {
                assert!(store.asset_path(a).is_ok());
            }
        }
    }

    let poster = store.load_poster("synthetic").unwrap();
    assert_eq!(poster.chapters.len(), 3);
    let hits = store.load_index().unwrap().search("bridge", 10).unwrap();
    assert_eq!(hits.len(), 1);
    assert!(hits[0].matches.iter().all(|m| m.field == Field::Speech));
}

#[test]
fn ingest_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let lecture = write_lecture(
        tmp.path(),
        &mut StdRng::seed_from_u64(9),
        &[4, 5, 4, 6],
        32,
        2,
    );
    let mut stores = Vec::new();
    for name in ["a", "b"] {
        let store = Store::create(tmp.path().join(name)).unwrap();
        ingest(
            &store,
            &options(&lecture, "same"),
            &mut StubOcr,
            &mut StubAsr,
        )
        .unwrap();
        let mut snap = snapshot(store.root());
        snap.remove(std::path::Path::new("manifest.json")); // carries the ingest time
        stores.push(snap);
    }
    assert_eq!(stores[0], stores[1]);
}

#[test]
fn missing_source_is_io() {
    let tmp = tempfile::tempdir().unwrap();
    let store = Store::create(tmp.path()).unwrap();
    let err = ingest(
        &store,
        &IngestOptions::new(tmp.path().join("nope")),
        &mut StubOcr,
        &mut StubAsr,
    )
    .unwrap_err();
    assert_eq!(err.code(), "io");
    assert!(err.to_string().contains("nope"));
}

#[test]
fn empty_frame_dir_is_ingest_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("frames")).unwrap();
    fs::write(tmp.path().join("frames/readme.txt"), "x").unwrap();
    let store = Store::create(tmp.path().join("store")).unwrap();
    let err = ingest(
        &store,
        &IngestOptions::new(tmp.path().join("frames")),
        &mut StubOcr,
        &mut StubAsr,
    )
    .unwrap_err();
    assert_eq!(err.code(), "ingest");
}

#[test]
fn duplicate_id_conflicts_and_keeps_first() {
    let tmp = tempfile::tempdir().unwrap();
    let lecture = write_lecture(tmp.path(), &mut StdRng::seed_from_u64(1), &[4, 4], 32, 0);
    let store = Store::create(tmp.path().join("store")).unwrap();
    ingest(
        &store,
        &options(&lecture, "dup"),
        &mut StubOcr,
        &mut StubAsr,
    )
    .unwrap();
    let before = snapshot(store.root());
    let err = ingest(
        &store,
        &options(&lecture, "dup"),
        &mut StubOcr,
        &mut StubAsr,
    )
    .unwrap_err();
    assert_eq!(err.code(), "conflict");
    assert_eq!(snapshot(store.root()), before);
}

#[test]
fn without_subtitles_the_stub_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let lecture = write_lecture(tmp.path(), &mut StdRng::seed_from_u64(2), &[4, 4], 32, 0);
    let store = Store::create(tmp.path().join("store")).unwrap();
    let report = ingest(
        &store,
        &IngestOptions::new(&lecture.frames),
        &mut StubOcr,
        &mut StubAsr,
    )
    .unwrap();
    assert_eq!(report.video_id, "frames");
    assert_eq!(report.cue_count, 0);
    assert!(report
        .warnings
        .iter()
        .any(|w| w.starts_with("no transcript")));
    let doc = store.load_document("frames").unwrap();
    assert!(doc.segments.iter().all(|s| s.speech.is_empty()));
}

#[test]
fn interrupted_ingest_can_be_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let lecture = write_lecture(tmp.path(), &mut StdRng::seed_from_u64(4), &[4, 4], 32, 0);
    let store = Store::create(tmp.path().join("store")).unwrap();
    let faults = SaveFaults {
        fail_before_manifest_rename: true,
    };
    let err = ingest_with(
        &store,
        &options(&lecture, "retry"),
        &mut StubOcr,
        &mut StubAsr,
        faults,
    )
    .unwrap_err();
    assert_eq!(err.code(), "io");
    assert!(store.list_videos().unwrap().is_empty());
    assert!(store.load_index().unwrap().video_ids().next().is_none());
    ingest(
        &store,
        &options(&lecture, "retry"),
        &mut StubOcr,
        &mut StubAsr,
    )
    .unwrap();
    assert_eq!(store.list_videos().unwrap().len(), 1);
}

#[test]
fn video_files_go_through_the_decoder() {
    let tmp = tempfile::tempdir().unwrap();
    let lecture = write_lecture(tmp.path(), &mut StdRng::seed_from_u64(5), &[4, 5], 32, 0);
    let video = tmp.path().join("talk.mp4");
    fs::write(&video, b"not really a video").unwrap();
    let store = Store::create(tmp.path().join("store")).unwrap();

    let mut opts = IngestOptions::new(&video);
    opts.subtitles = Some(lecture.subtitles.clone());
    opts.decoder = format!(
        "test -f {{input}} && test {{fps}} = 1 && cp '{}'/*.png {{outdir}}/",
        lecture.frames.display()
    );
    let report = ingest(&store, &opts, &mut StubOcr, &mut StubAsr).unwrap();
    assert_eq!(
        (report.video_id.as_str(), report.segment_count),
        ("talk", 2)
    );

    opts.video_id = Some("other".into());
    opts.decoder = "echo decoder exploded >&2; exit 3".into();
    let err = ingest(&store, &opts, &mut StubOcr, &mut StubAsr).unwrap_err();
    assert_eq!(err.code(), "ingest");
    assert!(err.to_string().contains("decoder exploded"), "{err}");
}

#[test]
fn bad_subtitles_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let lecture = write_lecture(tmp.path(), &mut StdRng::seed_from_u64(6), &[4], 32, 0);
    let store = Store::create(tmp.path().join("store")).unwrap();
    let mut opts = options(&lecture, "bad-subs");
    opts.subtitles = Some(tmp.path().join("missing.srt"));
    assert_eq!(
        ingest(&store, &opts, &mut StubOcr, &mut StubAsr)
            .unwrap_err()
            .code(),
        "io"
    );
    fs::write(
        tmp.path().join("garbage.srt"),
        "this is not\na subtitle file\n",
    )
    .unwrap();
    opts.subtitles = Some(tmp.path().join("garbage.srt"));
    assert_eq!(
        ingest(&store, &opts, &mut StubOcr, &mut StubAsr)
            .unwrap_err()
            .code(),
        "format"
    );
}
