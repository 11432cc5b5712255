//! File-tree document store.
//!
//! ```text
//! root/manifest.json
//! root/index.json
//! root/videos/<id>/document.json
//! root/videos/<id>/poster.json
//! root/assets/<id>/*.png
//! ```
//!
//! Every JSON file is replaced by write-to-temp then rename, and the manifest
//! is written last, so a save that dies midway leaves the previous manifest
//! intact. Writers hold `root/.lock` for the duration of a save.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Component, Path, PathBuf};

use chrono::{DateTime, Utc};
use lecturedeck_core::document::is_valid_video_id;
use lecturedeck_core::search::FORMAT_VERSION;
use lecturedeck_core::{Poster, SearchIndex, VideoDocument};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub video_id: String,
    pub title: String,
    pub ingested_at: DateTime<Utc>,
    pub duration_ms: u64,
}

/// A binary asset to be written under `assets/<video_id>/`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Asset {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Reference an asset as `<video_id>/<name>`, relative to `root/assets`.
pub fn asset_ref(video_id: &str, name: &str) -> String {
    format!("{video_id}/{name}")
}

/// Relative path with only normal components.
pub fn is_safe_relative(path: &str) -> bool {
    !path.is_empty()
        && !path.contains('\\')
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_)))
}

/// Fault injection for crash-safety tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct SaveFaults {
    /// Abort after staging the new manifest but before renaming it into place.
    pub fail_before_manifest_rename: bool,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

struct WriteLock {
    path: PathBuf,
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn write_atomic(path: &Path, bytes: &[u8], fail_before_rename: bool) -> Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", std::process::id()));
    let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    if fail_before_rename {
        return Err(Error::io(
            path,
            std::io::Error::other("injected failure before rename"),
        ));
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("store types serialize");
    v.push(b'\n');
    v
}

impl Store {
    /// Opens an existing store directory.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        match fs::metadata(&root) {
            Ok(m) if m.is_dir() => Ok(Self { root }),
            Ok(_) => Err(Error::io(
                &root,
                std::io::Error::new(
                    std::io::ErrorKind::NotADirectory,
                    "store root is not a directory",
                ),
            )),
            Err(e) => Err(Error::io(&root, e)),
        }
    }

    /// Opens the store, creating its directories when missing.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for dir in [root.join("videos"), root.join("assets")] {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.json")
    }

    fn video_dir(&self, id: &str) -> PathBuf {
        self.root.join("videos").join(id)
    }

    fn lock(&self) -> Result<WriteLock> {
        let path = self.root.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(WriteLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked {
                root: self.root.clone(),
                lock: path,
            }),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    fn read_json<T: DeserializeOwned>(&self, path: &Path) -> Result<T> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::CorruptStore {
            file: path.to_path_buf(),
            detail: e.to_string(),
        })
    }

    fn read_manifest(&self) -> Result<Vec<ManifestEntry>> {
        let path = self.manifest_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let entries: Vec<ManifestEntry> = self.read_json(&path)?;
        let mut ids: Vec<&str> = entries.iter().map(|e| e.video_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::CorruptStore {
                file: path,
                detail: format!("duplicate video id {}", w[0]),
            });
        }
        Ok(entries)
    }

    /// Manifest entries sorted by title, then id.
    pub fn list_videos(&self) -> Result<Vec<ManifestEntry>> {
        let mut entries = self.read_manifest()?;
        for e in &entries {
            let doc = self.video_dir(&e.video_id).join("document.json");
            if !doc.is_file() {
                return Err(Error::CorruptStore {
                    file: self.manifest_path(),
                    detail: format!("{} is listed but {} is missing", e.video_id, doc.display()),
                });
            }
        }
        entries.sort_by(|a, b| {
            a.title
                .cmp(&b.title)
                .then_with(|| a.video_id.cmp(&b.video_id))
        });
        Ok(entries)
    }

    pub fn contains(&self, video_id: &str) -> Result<bool> {
        Ok(self.read_manifest()?.iter().any(|e| e.video_id == video_id))
    }

    fn existing_file(&self, video_id: &str, file: &str) -> Result<PathBuf> {
        let path = self.video_dir(video_id).join(file);
        if !is_valid_video_id(video_id) || !path.is_file() {
            return Err(Error::NotFound(format!("video {video_id}")));
        }
        Ok(path)
    }

    pub fn load_document(&self, video_id: &str) -> Result<VideoDocument> {
        let path = self.existing_file(video_id, "document.json")?;
        let doc: VideoDocument = self.read_json(&path)?;
        doc.validate().map_err(|e| Error::CorruptStore {
            file: path.clone(),
            detail: e.to_string(),
        })?;
        if doc.video_id != video_id {
            return Err(Error::CorruptStore {
                file: path,
                detail: format!("document belongs to {}", doc.video_id),
            });
        }
        Ok(doc)
    }

    pub fn load_poster(&self, video_id: &str) -> Result<Poster> {
        let path = self.existing_file(video_id, "poster.json")?;
        let poster: Poster = self.read_json(&path)?;
        let ordered = poster
            .chapters
            .windows(2)
            .all(|w| w[0].start_ms <= w[1].start_ms);
        if poster.video_id != video_id || !ordered {
            return Err(Error::CorruptStore {
                file: path,
                detail: "poster does not match its video or chapters are unordered".into(),
            });
        }
        Ok(poster)
    }

    /// Filesystem path of an asset reference, refusing anything that could
    /// escape `root/assets`.
    pub fn asset_path(&self, reference: &str) -> Result<PathBuf> {
        if !is_safe_relative(reference) {
            return Err(Error::Usage(format!(
                "invalid asset reference {reference:?}"
            )));
        }
        let path = self.root.join("assets").join(reference);
        if !path.is_file() {
            return Err(Error::NotFound(format!("asset {reference}")));
        }
        Ok(path)
    }

    pub fn save_document(
        &self,
        doc: &VideoDocument,
        poster: &Poster,
        assets: &[Asset],
    ) -> Result<Vec<String>> {
        self.save_document_with(doc, poster, assets, None, SaveFaults::default())
    }

    /// Writes assets, document and poster, then publishes the manifest entry.
    /// When `index` is given it replaces index.json after the manifest, under
    /// the same lock.
    pub fn save_document_with(
        &self,
        doc: &VideoDocument,
        poster: &Poster,
        assets: &[Asset],
        index: Option<&SearchIndex>,
        faults: SaveFaults,
    ) -> Result<Vec<String>> {
        doc.validate()?;
        let _lock = self.lock()?;
        let mut manifest = self.read_manifest()?;
        if manifest.iter().any(|e| e.video_id == doc.video_id) {
            return Err(Error::Conflict(format!(
                "video {} already exists",
                doc.video_id
            )));
        }

        let asset_dir = self.root.join("assets").join(&doc.video_id);
        fs::create_dir_all(&asset_dir).map_err(|e| Error::io(&asset_dir, e))?;
        let mut refs = Vec::with_capacity(assets.len());
        for a in assets {
            if !is_safe_relative(&a.name) || a.name.contains('/') {
                return Err(Error::Usage(format!("invalid asset name {:?}", a.name)));
            }
            write_atomic(&asset_dir.join(&a.name), &a.bytes, false)?;
            refs.push(asset_ref(&doc.video_id, &a.name));
        }

        let dir = self.video_dir(&doc.video_id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_atomic(&dir.join("document.json"), &to_json(doc), false)?;
        write_atomic(&dir.join("poster.json"), &to_json(poster), false)?;

        manifest.push(ManifestEntry {
            video_id: doc.video_id.clone(),
            title: doc.title.clone(),
            ingested_at: Utc::now(),
            duration_ms: doc.duration_ms,
        });
        write_atomic(
            &self.manifest_path(),
            &to_json(&manifest),
            faults.fail_before_manifest_rename,
        )?;
        if let Some(index) = index {
            write_atomic(&self.index_path(), &to_json(index), false)?;
        }
        Ok(refs)
    }

    /// The persisted search index, or an empty one when none was written yet.
    pub fn load_index(&self) -> Result<SearchIndex> {
        let path = self.index_path();
        if !path.exists() {
            return Ok(SearchIndex::new());
        }
        let index: SearchIndex = self.read_json(&path)?;
        if index.format_version != FORMAT_VERSION {
            return Err(Error::CorruptStore {
                file: path,
                detail: format!(
                    "index format {} is not the supported {FORMAT_VERSION}",
                    index.format_version
                ),
            });
        }
        Ok(index)
    }

    pub fn save_index(&self, index: &SearchIndex) -> Result<()> {
        let _lock = self.lock()?;
        write_atomic(&self.index_path(), &to_json(index), false)
    }
}
