use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::invalid(
                "raster buffer length does not match dimensions",
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = value;
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Copies out a sub-rectangle. The rectangle is clipped to the image.
    pub fn crop(&self, x: u32, y: u32, width: u32, height: u32) -> GrayImage {
        let x1 = (x.saturating_add(width)).min(self.width);
        let y1 = (y.saturating_add(height)).min(self.height);
        let x0 = x.min(x1);
        let y0 = y.min(y1);
        let mut data = Vec::with_capacity(((x1 - x0) * (y1 - y0)) as usize);
        for yy in y0..y1 {
            let row = yy as usize * self.width as usize;
            data.extend_from_slice(&self.data[row + x0 as usize..row + x1 as usize]);
        }
        GrayImage {
            width: x1 - x0,
            height: y1 - y0,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_clips_to_bounds() {
        let img = GrayImage::from_fn(4, 3, |x, y| (y * 4 + x) as u8);
        let c = img.crop(2, 1, 10, 10);
        assert_eq!((c.width(), c.height()), (2, 2));
        assert_eq!(c.as_raw(), &[6, 7, 10, 11]);
    }

    #[test]
    fn rejects_bad_buffer() {
        assert!(GrayImage::new(3, 3, alloc::vec![0; 8]).is_err());
    }
}
