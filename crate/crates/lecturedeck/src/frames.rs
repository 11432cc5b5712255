//! Frame acquisition and hashing.
//!
//! Frames come from a directory of images named by their timestamp in
//! milliseconds (`000000.png`, `001000.jpg`, ...), either prepared by the
//! caller or produced by an external decoder command.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lecturedeck_core::{dhash64, FrameSample, GrayImage, IngestParams};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default decoder invocation. Any tool works as long as it fills `{outdir}`
/// with timestamp-named frames.
pub const DEFAULT_DECODER: &str = "ffmpeg -hide_banner -loglevel error -i {input} \
    -vf fps={fps},settb=1/1000,setpts=PTS -fps_mode passthrough -enc_time_base 1/1000 \
    -frame_pts 1 {outdir}/%06d.png";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameFile {
    pub timestamp_ms: u64,
    pub path: PathBuf,
}

pub trait FrameProvider {
    /// All frames in chronological order.
    fn frames(&self) -> Result<Vec<FrameFile>>;

    /// Human-readable origin for error messages.
    fn describe(&self) -> String;
}

/// Parses `<digits>.png|jpg|jpeg` with at least six digits.
fn frame_timestamp(name: &str) -> Option<u64> {
    let (stem, ext) = name.rsplit_once('.')?;
    let ext = ext.to_ascii_lowercase();
    if !matches!(ext.as_str(), "png" | "jpg" | "jpeg") {
        return None;
    }
    if stem.len() < 6 || !stem.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    stem.parse().ok()
}

#[derive(Debug, Clone)]
pub struct FrameDir {
    path: PathBuf,
}

impl FrameDir {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl FrameProvider for FrameDir {
    fn frames(&self) -> Result<Vec<FrameFile>> {
        let entries = fs::read_dir(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let mut frames = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.path, e))?;
            let name = entry.file_name();
            if let Some(timestamp_ms) = name.to_str().and_then(frame_timestamp) {
                frames.push(FrameFile {
                    timestamp_ms,
                    path: entry.path(),
                });
            }
        }
        frames.sort_by_key(|f| f.timestamp_ms);
        frames.dedup_by_key(|f| f.timestamp_ms);
        Ok(frames)
    }

    fn describe(&self) -> String {
        self.path.display().to_string()
    }
}

/// Runs a decoder command into a temporary frame directory.
pub struct DecodedVideo {
    dir: tempfile::TempDir,
    command: String,
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

impl DecodedVideo {
    /// Expands `{input}`, `{outdir}` and `{fps}` in `template` and runs it
    /// through `sh -c`.
    pub fn decode(template: &str, input: &Path, fps: f64) -> Result<Self> {
        if !input.exists() {
            return Err(Error::io(
                input,
                std::io::Error::new(std::io::ErrorKind::NotFound, "source does not exist"),
            ));
        }
        let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
        let command = template
            .replace("{input}", &shell_quote(&input.to_string_lossy()))
            .replace("{outdir}", &shell_quote(&dir.path().to_string_lossy()))
            .replace("{fps}", &fps.to_string());
        let out = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .output()
            .map_err(|e| Error::Decoder {
                command: command.clone(),
                detail: e.to_string(),
            })?;
        if !out.status.success() {
            return Err(Error::Decoder {
                command,
                detail: format!(
                    "{}: {}",
                    out.status,
                    String::from_utf8_lossy(&out.stderr).trim()
                ),
            });
        }
        Ok(Self { dir, command })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl FrameProvider for DecodedVideo {
    fn frames(&self) -> Result<Vec<FrameFile>> {
        FrameDir::new(self.dir.path()).frames()
    }

    fn describe(&self) -> String {
        self.command.clone()
    }
}

/// Keeps frames on a grid of one per sampling period, starting at the first frame.
pub fn select_by_rate(frames: Vec<FrameFile>, params: &IngestParams) -> Vec<FrameFile> {
    let period = params.sample_period_ms();
    let mut next_due: Option<u64> = None;
    frames
        .into_iter()
        .filter(|f| {
            let due = *next_due.get_or_insert(f.timestamp_ms);
            if f.timestamp_ms < due {
                return false;
            }
            let steps = (f.timestamp_ms - due) / period + 1;
            next_due = Some(due + steps * period);
            true
        })
        .collect()
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = img.into_luma8();
    let (w, h) = luma.dimensions();
    Ok(GrayImage::new(w, h, luma.into_raw())?)
}

/// Samples and hashes frames. Hashing runs in parallel; output order is
/// chronological regardless.
pub fn sample_frames(
    provider: &dyn FrameProvider,
    params: &IngestParams,
) -> Result<Vec<FrameSample>> {
    params.validate()?;
    let frames = select_by_rate(provider.frames()?, params);
    if frames.is_empty() {
        return Err(Error::NoFrames {
            path: PathBuf::from(provider.describe()),
        });
    }
    frames
        .par_iter()
        .map(|f| {
            let hash = dhash64(&load_gray(&f.path)?)?;
            Ok(FrameSample {
                timestamp_ms: f.timestamp_ms,
                hash,
                frame_ref: Some(f.path.to_string_lossy().into_owned()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_png(dir: &Path, name: &str, value: u8) {
        image::GrayImage::from_pixel(18, 16, image::Luma([value]))
            .save(dir.join(name))
            .unwrap();
    }

    #[test]
    fn timestamps_from_names() {
        assert_eq!(frame_timestamp("000000.png"), Some(0));
        assert_eq!(frame_timestamp("001000.jpg"), Some(1000));
        assert_eq!(frame_timestamp("1234567.JPEG"), Some(1_234_567));
        assert_eq!(frame_timestamp("1000.png"), None);
        assert_eq!(frame_timestamp("000100.gif"), None);
        assert_eq!(frame_timestamp("frame1.png"), None);
    }

    #[test]
    fn directory_provider_follows_convention() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "001000.png", 10);
        write_png(dir.path(), "000000.png", 20);
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let samples = sample_frames(&FrameDir::new(dir.path()), &IngestParams::default()).unwrap();
        let ts: Vec<_> = samples.iter().map(|s| s.timestamp_ms).collect();
        assert_eq!(ts, [0, 1000]);
        assert!(samples[0]
            .frame_ref
            .as_deref()
            .unwrap()
            .ends_with("000000.png"));
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = sample_frames(&FrameDir::new(dir.path()), &IngestParams::default()).unwrap_err();
        assert!(matches!(err, Error::NoFrames { .. }));
        assert_eq!(err.code(), "ingest");
    }

    #[test]
    fn missing_directory_is_io() {
        let err = FrameDir::new("/definitely/not/here").frames().unwrap_err();
        assert_eq!(err.code(), "io");
    }

    #[test]
    fn rate_selection_keeps_grid() {
        let frames: Vec<_> = (0..10)
            .map(|i| FrameFile {
                timestamp_ms: i * 400,
                path: PathBuf::new(),
            })
            .collect();
        let kept: Vec<_> = select_by_rate(frames, &IngestParams::default())
            .into_iter()
            .map(|f| f.timestamp_ms)
            .collect();
        assert_eq!(kept, [0, 1200, 2000, 3200]);
    }

    #[test]
    fn three_frames_three_samples() {
        let dir = tempfile::tempdir().unwrap();
        for (i, v) in [0u8, 50, 100].into_iter().enumerate() {
            write_png(dir.path(), &format!("{:06}.png", i * 1000), v);
        }
        let samples = sample_frames(&FrameDir::new(dir.path()), &IngestParams::default()).unwrap();
        assert_eq!(samples.len(), 3);
    }

    #[test]
    fn decoder_command_populates_frames() {
        let src = tempfile::tempdir().unwrap();
        write_png(src.path(), "000000.png", 1);
        write_png(src.path(), "002000.png", 2);
        let video = src.path().join("talk.mp4");
        fs::write(&video, b"not really a video").unwrap();
        let template = format!(
            "cp {}/*.png {{outdir}}/ && test -f {{input}} && test {{fps}} = 0.5",
            src.path().display()
        );
        let decoded = DecodedVideo::decode(&template, &video, 0.5).unwrap();
        let frames = decoded.frames().unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[1].timestamp_ms, 2000);
    }

    #[test]
    fn decoder_failure_is_surfaced() {
        let src = tempfile::tempdir().unwrap();
        let video = src.path().join("talk.mp4");
        fs::write(&video, b"x").unwrap();
        let err = DecodedVideo::decode("echo boom >&2; exit 3", &video, 1.0)
            .err()
            .unwrap();
        match err {
            Error::Decoder { command, detail } => {
                assert_eq!(command, "echo boom >&2; exit 3");
                assert!(detail.contains("boom"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
