//! Command-line entry points.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lecturedeck_core::{IngestParams, OcrClient, StubOcr, DEFAULT_SUMMARY_CHARS};

use crate::api::{self, ApiConfig};
use crate::error::{Error, Result};
use crate::frames::DEFAULT_DECODER;
use crate::pipeline::{ingest, IngestOptions};
use crate::render::poster_markdown;
use crate::speech::{AsrClient, HttpAsrClient, StubAsr};
use crate::store::Store;
use crate::vision::HttpOcrClient;

#[derive(Debug, Parser)]
#[command(
    name = "lecturedeck",
    version,
    about = "Turn slide-based lecture videos into searchable documents"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct StoreArg {
    /// Store directory.
    #[arg(long, env = "LECTUREDECK_STORE")]
    pub store: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a video file or frame directory into the store.
    Ingest(IngestArgs),
    /// Serve the JSON API and web UI.
    Serve(ServeArgs),
    /// Search the store; prints one JSON hit per line.
    Search(SearchArgs),
    /// Print a video's poster as Markdown.
    Poster(PosterArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Video file or directory of `<timestamp_ms>.png` frames.
    pub source: PathBuf,
    #[command(flatten)]
    pub store: StoreArg,
    /// SRT or WebVTT subtitles.
    #[arg(long)]
    pub subtitles: Option<PathBuf>,
    /// Frame sampling rate in Hz.
    #[arg(long, default_value_t = IngestParams::default().sample_rate_hz)]
    pub fps: f64,
    /// Hamming distance above which a slide change is detected.
    #[arg(long, default_value_t = IngestParams::default().hash_threshold)]
    pub threshold: u32,
    /// Shorter segments are merged into a neighbour.
    #[arg(long = "min-duration", value_name = "MS", default_value_t = IngestParams::default().min_segment_ms)]
    pub min_duration: u64,
    /// Video title; defaults to the source file name.
    #[arg(long)]
    pub title: Option<String>,
    /// Video id; defaults to a slug of the title.
    #[arg(long)]
    pub id: Option<String>,
    /// Decoder command template for video files.
    #[arg(long, default_value = DEFAULT_DECODER)]
    pub decoder: String,
    /// Video duration; defaults to the last frame plus one sampling period.
    #[arg(long, value_name = "MS")]
    pub duration: Option<u64>,
    /// Speech recognition service URL; without one, missing subtitles yield an empty transcript.
    #[arg(long, env = "LECTUREDECK_ASR_ENDPOINT")]
    pub asr_endpoint: Option<String>,
    /// Text recognition service URL; without one, slide text is left empty.
    #[arg(long, env = "LECTUREDECK_OCR_ENDPOINT")]
    pub ocr_endpoint: Option<String>,
    /// Language hint passed to the speech recognizer.
    #[arg(long)]
    pub language: Option<String>,
    /// Maximum poster summary length in characters.
    #[arg(long, default_value_t = DEFAULT_SUMMARY_CHARS)]
    pub summary_chars: usize,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub store: StoreArg,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Built web UI to serve for non-API paths.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    /// Origin allowed to call the API cross-origin (repeatable, `*` for any).
    #[arg(long)]
    pub cors_origin: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub store: StoreArg,
    pub query: String,
    #[arg(long, default_value_t = lecturedeck_core::search::DEFAULT_LIMIT)]
    pub limit: usize,
}

#[derive(Debug, Args)]
pub struct PosterArgs {
    #[command(flatten)]
    pub store: StoreArg,
    pub video_id: String,
}

fn run_ingest(args: IngestArgs, out: &mut dyn Write) -> Result<()> {
    let store = Store::create(&args.store.store)?;
    let mut opts = IngestOptions::new(&args.source);
    opts.subtitles = args.subtitles;
    opts.params = IngestParams {
        sample_rate_hz: args.fps,
        hash_threshold: args.threshold,
        min_segment_ms: args.min_duration,
    };
    opts.title = args.title;
    opts.video_id = args.id;
    opts.decoder = args.decoder;
    opts.duration_ms = args.duration;
    opts.language = args.language;
    opts.summary_chars = args.summary_chars.max(1);
    let mut ocr: Box<dyn OcrClient> = match args.ocr_endpoint {
        Some(url) => Box::new(HttpOcrClient::new(url)),
        None => Box::new(StubOcr),
    };
    let mut asr: Box<dyn AsrClient> = match args.asr_endpoint {
        Some(url) => Box::new(HttpAsrClient::new(url)),
        None => Box::new(StubAsr),
    };
    let report = ingest(&store, &opts, ocr.as_mut(), asr.as_mut())?;
    for w in &report.warnings {
        tracing::warn!("{w}");
    }
    print_json_line(out, &report)
}

fn print_json_line<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let line = serde_json::to_string(value).expect("report types serialize");
    writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
}

fn run_search(args: SearchArgs, out: &mut dyn Write) -> Result<()> {
    let store = Store::open(&args.store.store)?;
    let index = store.load_index()?;
    for hit in index.search(&args.query, args.limit)? {
        print_json_line(out, &hit)?;
    }
    Ok(())
}

fn run_poster(args: PosterArgs, out: &mut dyn Write) -> Result<()> {
    let store = Store::open(&args.store.store)?;
    let doc = store.load_document(&args.video_id)?;
    let poster = store.load_poster(&args.video_id)?;
    out.write_all(poster_markdown(&doc.title, &poster).as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn run_serve(args: ServeArgs) -> Result<()> {
    let store = Store::open(&args.store.store)?;
    let addr = format!("{}:{}", args.bind, args.port);
    let sock: SocketAddr = addr
        .parse()
        .map_err(|e| Error::Usage(format!("invalid bind address {addr}: {e}")))?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("<runtime>", e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(sock)
            .await
            .map_err(|source| Error::Bind {
                addr: addr.clone(),
                source,
            })?;
        let app = api::router(
            store,
            ApiConfig {
                ui_dir: args.ui_dir,
                cors_origins: args.cors_origin,
            },
        );
        tracing::info!("listening on http://{addr}");
        api::serve(listener, app)
            .await
            .map_err(|e| Error::io("<server>", e))
    })
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => run_ingest(a, out),
        Command::Serve(a) => run_serve(a),
        Command::Search(a) => run_search(a, out),
        Command::Poster(a) => run_poster(a, out),
    }
}

/// Parses `args`, runs the command and returns the process exit status.
/// Failures print an error report as JSON on stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = Error::Usage(e.render().to_string().trim_end().to_string());
            eprintln!(
                "{}",
                serde_json::to_string(&err.report()).expect("report serializes")
            );
            return err.exit_code();
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::to_string(&err.report()).expect("report serializes")
            );
            err.exit_code()
        }
    }
}
