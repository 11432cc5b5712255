//! Transcript acquisition: subtitle files first, speech recognition otherwise.

use std::fs;
use std::path::Path;

use lecturedeck_core::{parse_srt, parse_vtt, Cue, Transcript, TranscriptSource};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Body of a recognition request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsrRequest {
    pub audio_ref: String,
    pub language: Option<String>,
}

/// One recognized unit. A response body is a JSON array of these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedText {
    pub start_ms: u64,
    pub end_ms: u64,
    pub text: String,
}

/// Speech recognition backend. One request at a time per instance.
pub trait AsrClient {
    fn transcribe(&mut self, request: &AsrRequest) -> Result<Vec<TimedText>>;

    /// True for the built-in placeholder that never recognizes anything.
    fn is_stub(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StubAsr;

impl AsrClient for StubAsr {
    fn transcribe(&mut self, _request: &AsrRequest) -> Result<Vec<TimedText>> {
        Ok(Vec::new())
    }

    fn is_stub(&self) -> bool {
        true
    }
}

/// Posts [`AsrRequest`] as JSON to `endpoint` and reads a [`TimedText`] array.
#[derive(Debug, Clone)]
pub struct HttpAsrClient {
    endpoint: String,
}

impl HttpAsrClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
        }
    }
}

impl AsrClient for HttpAsrClient {
    fn transcribe(&mut self, request: &AsrRequest) -> Result<Vec<TimedText>> {
        let transport = |e: ureq::Error| Error::Transport(format!("asr {}: {e}", self.endpoint));
        ureq::post(&self.endpoint)
            .send_json(request)
            .map_err(transport)?
            .body_mut()
            .read_json()
            .map_err(transport)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcquiredTranscript {
    pub transcript: Transcript,
    pub warnings: Vec<String>,
}

fn is_vtt(path: &Path, text: &str) -> bool {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
    {
        Some(ext) if ext == "vtt" => true,
        Some(ext) if ext == "srt" => false,
        _ => text.trim_start_matches('\u{feff}').starts_with("WEBVTT"),
    }
}

/// Loads the subtitle file when given, otherwise asks `asr` to transcribe
/// `audio_ref`. The stub client yields an empty transcript plus a warning.
pub fn acquire_transcript(
    subtitle_file: Option<&Path>,
    asr: &mut dyn AsrClient,
    audio_ref: Option<&str>,
    language: Option<&str>,
) -> Result<AcquiredTranscript> {
    if let Some(path) = subtitle_file {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if is_vtt(path, &text) {
            parse_vtt(&text)?
        } else {
            parse_srt(&text)?
        };
        let warnings = parsed
            .warnings
            .into_iter()
            .map(|w| format!("{}: {w}", path.display()))
            .collect();
        return Ok(AcquiredTranscript {
            transcript: parsed.transcript,
            warnings,
        });
    }
    let Some(audio_ref) = audio_ref else {
        return Err(Error::Usage(
            "a subtitle file or an audio reference is required".into(),
        ));
    };
    let units = asr.transcribe(&AsrRequest {
        audio_ref: audio_ref.to_string(),
        language: language.map(String::from),
    })?;
    let mut warnings = Vec::new();
    if asr.is_stub() {
        warnings.push(format!(
            "no transcript: no subtitles for {audio_ref} and no speech recognizer configured"
        ));
    }
    let cues = units
        .into_iter()
        .filter_map(|u| match Cue::new(u.start_ms, u.end_ms, &u.text) {
            Ok(c) => Some(c),
            Err(e) => {
                warnings.push(format!("asr unit at {} ms dropped: {e}", u.start_ms));
                None
            }
        })
        .collect();
    Ok(AcquiredTranscript {
        transcript: Transcript::new(cues, TranscriptSource::AsrClient),
        warnings,
    })
}
