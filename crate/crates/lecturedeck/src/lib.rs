//! Lecture video ingestion, storage and serving.
//!
//! The offline side turns a frame directory (or a video run through an
//! external decoder) plus optional subtitles into a stored document, poster
//! and search index entry. The online side is a read-only JSON API over that
//! store. Algorithms live in [`lecturedeck_core`].

pub mod api;
pub mod cli;
pub mod error;
pub mod frames;
pub mod pipeline;
pub mod render;
pub mod speech;
pub mod store;
pub mod vision;

pub use error::{Error, Result};
pub use lecturedeck_core as core;
