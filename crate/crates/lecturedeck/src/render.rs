//! Plain-text rendering for terminal output.

use std::fmt::Write;

use lecturedeck_core::Poster;

/// `mm:ss`, with minutes growing past 59 rather than adding an hour field.
pub fn format_timestamp(ms: u64) -> String {
    let secs = ms / 1000;
    format!("{:02}:{:02}", secs / 60, secs % 60)
}

/// Markdown view of a poster: one `## title [mm:ss]` heading per chapter.
pub fn poster_markdown(title: &str, poster: &Poster) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {title}");
    for ch in &poster.chapters {
        let _ = writeln!(out, "\n## {} [{}]", ch.title, format_timestamp(ch.start_ms));
        if !ch.figure_refs.is_empty() {
            out.push('\n');
            for fig in &ch.figure_refs {
                let _ = writeln!(out, "![figure](/assets/{fig})");
            }
        }
        if !ch.summary.is_empty() {
            let _ = writeln!(out, "\n{}", ch.summary);
        }
    }
    out
}
