//! Difference hash (dHash) over a 9×8 box-averaged reduction.

use crate::error::{Error, Result};
use crate::raster::GrayImage;

const COLS: u32 = 9;
const ROWS: u32 = 8;

/// Half-open source span covered by output cell `i` of `cells` along an axis
/// of length `len`. Never empty, even when `len < cells`.
fn span(i: u32, cells: u32, len: u32) -> (u32, u32) {
    let lo = (i as u64 * len as u64 / cells as u64) as u32;
    let hi = ((i as u64 + 1) * len as u64 / cells as u64) as u32;
    let lo = lo.min(len - 1);
    (lo, hi.max(lo + 1).min(len))
}

/// Box-averaged 9×8 reduction kept as exact (sum, count) pairs.
fn reduce(image: &GrayImage) -> [[(u64, u64); COLS as usize]; ROWS as usize] {
    let mut cells = [[(0u64, 0u64); COLS as usize]; ROWS as usize];
    for (r, row) in cells.iter_mut().enumerate() {
        let (y0, y1) = span(r as u32, ROWS, image.height());
        for (c, cell) in row.iter_mut().enumerate() {
            let (x0, x1) = span(c as u32, COLS, image.width());
            let mut sum = 0u64;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += image.get(x, y) as u64;
                }
            }
            *cell = (sum, ((x1 - x0) * (y1 - y0)) as u64);
        }
    }
    cells
}

/// 64-bit difference hash.
///
/// The image is reduced to 9×8 cells by box averaging; bit (r, c) is set iff
/// cell (r, c) is strictly brighter than cell (r, c + 1). Bits are packed
/// row-major with row 0 / column 0 in the most significant bit.
pub fn dhash64(image: &GrayImage) -> Result<u64> {
    if image.is_empty() {
        return Err(Error::invalid("cannot hash an empty image"));
    }
    let cells = reduce(image);
    let mut hash = 0u64;
    for row in &cells {
        for pair in row.windows(2) {
            let (ls, ln) = pair[0];
            let (rs, rn) = pair[1];
            // Compare means without rounding.
            let brighter = (ls as u128) * (rn as u128) > (rs as u128) * (ln as u128);
            hash = (hash << 1) | brighter as u64;
        }
    }
    Ok(hash)
}

/// Number of differing bits.
#[inline]
pub fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(seed: u64) -> GrayImage {
        let mut state = seed;
        GrayImage::from_fn(9, 8, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 56) as u8
        })
    }

    // Straight 64-comparison loop over a 9×8 matrix, no reduction involved.
    fn reference_hash(img: &GrayImage) -> u64 {
        let mut bits = [false; 64];
        for r in 0..8u32 {
            for c in 0..8u32 {
                bits[(r * 8 + c) as usize] = img.get(c, r) > img.get(c + 1, r);
            }
        }
        bits.iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << (63 - i)))
    }

    #[test]
    fn uniform_is_zero() {
        let img = GrayImage::filled(64, 48, 128);
        assert_eq!(dhash64(&img).unwrap(), 0);
    }

    #[test]
    fn decreasing_rows_are_all_ones() {
        let img = GrayImage::from_fn(9, 8, |x, _| 200 - x as u8 * 10);
        assert_eq!(dhash64(&img).unwrap(), u64::MAX);
    }

    #[test]
    fn seeded_matrix_matches_reference_loop() {
        // seed 0x5EED, LCG constants above
        let img = lcg_matrix(0x5EED);
        let expected = reference_hash(&img);
        assert_eq!(expected, 0xFB52_52DA_E6A4_3922);
        assert_eq!(dhash64(&img).unwrap(), expected);
    }

    #[test]
    fn box_average_of_upscaled_matrix_is_exact() {
        let small = lcg_matrix(7);
        let big = GrayImage::from_fn(9 * 5, 8 * 3, |x, y| small.get(x / 5, y / 3));
        assert_eq!(dhash64(&big).unwrap(), dhash64(&small).unwrap());
    }

    #[test]
    fn tiny_images_still_hash() {
        let img = GrayImage::from_fn(3, 2, |x, _| 100 - x as u8);
        assert!(dhash64(&img).is_ok());
    }

    #[test]
    fn empty_image_is_rejected() {
        let img = GrayImage::filled(0, 0, 0);
        assert!(matches!(dhash64(&img), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn hamming_cases() {
        assert_eq!(hamming(0, 0), 0);
        assert_eq!(hamming(0, u64::MAX), 64);
        assert_eq!(hamming(0b1010, 0b0110), 2);
    }
}
