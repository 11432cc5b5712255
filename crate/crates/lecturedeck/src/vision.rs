//! Image encoding and the remote OCR client.

use std::io::Cursor;

use image::{ImageFormat, Luma};
use lecturedeck_core::{GrayImage, OcrClient};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn encode_png_gray(image: &GrayImage) -> Result<Vec<u8>> {
    let buf = image::ImageBuffer::<Luma<u8>, _>::from_raw(
        image.width(),
        image.height(),
        image.as_raw().to_vec(),
    )
    .expect("raster dimensions match its buffer");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Transport(format!("png encoding failed: {e}")))?;
    Ok(out.into_inner())
}

/// Response body of the OCR service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrResponse {
    pub text: String,
}

/// POSTs each crop as `image/png` to `endpoint`, expecting `{"text": ...}`.
#[derive(Debug, Clone)]
pub struct HttpOcrClient {
    endpoint: String,
}

impl HttpOcrClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
        }
    }
}

impl OcrClient for HttpOcrClient {
    fn recognize(&mut self, crop: &GrayImage) -> std::result::Result<String, String> {
        let png = encode_png_gray(crop).map_err(|e| e.to_string())?;
        let resp: OcrResponse = ureq::post(&self.endpoint)
            .header("Content-Type", "image/png")
            .send(&png[..])
            .map_err(|e| format!("ocr {}: {e}", self.endpoint))?
            .body_mut()
            .read_json()
            .map_err(|e| format!("ocr {}: {e}", self.endpoint))?;
        Ok(resp.text)
    }
}
