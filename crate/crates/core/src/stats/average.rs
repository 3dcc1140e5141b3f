use std::io::Cursor;

use image::imageops::{self, FilterType};
use image::{ImageFormat, Rgb, RgbImage};
use serde::Serialize;

use super::StatsError;

pub const AVERAGE_SIZE: u32 = 128;

/// Per-pixel RGB means in `[0, 1]`, row-major and channel-interleaved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageImage {
    pub width: u32,
    pub height: u32,
    pub n: usize,
    pub data: Vec<f64>,
}

impl AverageImage {
    pub fn pixel(&self, x: u32, y: u32) -> [f64; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn to_rgb8(&self) -> RgbImage {
        RgbImage::from_fn(self.width, self.height, |x, y| {
            Rgb(self.pixel(x, y).map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
        })
    }

    pub fn to_png(&self) -> Result<Vec<u8>, StatsError> {
        let mut out = Cursor::new(Vec::new());
        self.to_rgb8()
            .write_to(&mut out, ImageFormat::Png)
            .map_err(|e| StatsError::Encode(e.to_string()))?;
        Ok(out.into_inner())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageOutcome {
    pub image: AverageImage,
    /// `(source, reason)` for every input that could not be decoded.
    pub skipped: Vec<(String, String)>,
}

/// Decodes `bytes` and resizes to `width`x`height` RGB floats in `[0, 1]`
/// with bilinear (triangle) filtering.
pub fn resized_pixels(bytes: &[u8], width: u32, height: u32) -> Result<Vec<f32>, String> {
    let img = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    Ok(imageops::resize(&img.to_rgb32f(), width, height, FilterType::Triangle).into_raw())
}

/// Pixel-wise mean of every decodable source after resizing. Sources that
/// fail to decode are skipped with a warning.
pub fn average_image<S: AsRef<str>, B: AsRef<[u8]>>(
    sources: &[(S, B)],
    width: u32,
    height: u32,
) -> Result<AverageOutcome, StatsError> {
    if width == 0 || height == 0 {
        return Err(StatsError::InvalidSize { width, height });
    }
    let mut sum = vec![0f64; 3 * width as usize * height as usize];
    let mut n = 0;
    let mut skipped = Vec::new();
    for (name, bytes) in sources {
        match resized_pixels(bytes.as_ref(), width, height) {
            Ok(px) => {
                for (s, v) in sum.iter_mut().zip(px) {
                    *s += f64::from(v);
                }
                n += 1;
            }
            Err(reason) => {
                tracing::warn!(source = name.as_ref(), %reason, "skipping undecodable image");
                skipped.push((name.as_ref().to_string(), reason));
            }
        }
    }
    if n == 0 {
        return Err(StatsError::NoDecodableImages { skipped: skipped.len() });
    }
    let data = sum.into_iter().map(|s| s / n as f64).collect();
    Ok(AverageOutcome { image: AverageImage { width, height, n, data }, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn png(w: u32, h: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Vec<u8> {
        let img = RgbImage::from_fn(w, h, |x, y| Rgb(f(x, y)));
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn black_and_white_average_to_grey() {
        let srcs = [("black", png(40, 30, |_, _| [0; 3])), ("white", png(20, 50, |_, _| [255; 3]))];
        let out = average_image(&srcs, 16, 16).unwrap();
        assert_eq!(out.image.n, 2);
        assert!(out.image.data.iter().all(|v| (v - 0.5).abs() < 1e-6));
    }

    #[test]
    fn identical_inputs_reproduce_the_resize() {
        let bytes = png(9, 7, |x, y| [(x * 20) as u8, (y * 30) as u8, 77]);
        let direct = resized_pixels(&bytes, 5, 5).unwrap();
        let srcs = vec![("a", bytes.clone()), ("b", bytes.clone()), ("c", bytes)];
        let out = average_image(&srcs, 5, 5).unwrap();
        for (a, b) in out.image.data.iter().zip(direct) {
            assert!((a - f64::from(b)).abs() < 1e-6);
        }
    }

    #[test]
    fn undecodable_inputs_are_skipped() {
        let srcs = vec![("bad", b"not an image".to_vec()), ("ok", png(4, 4, |_, _| [255, 0, 0]))];
        let out = average_image(&srcs, 2, 2).unwrap();
        assert_eq!(out.image.n, 1);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.image.pixel(1, 1), [1.0, 0.0, 0.0]);
        let none: Vec<(&str, Vec<u8>)> = vec![("bad", vec![1, 2, 3])];
        assert_eq!(average_image(&none, 2, 2), Err(StatsError::NoDecodableImages { skipped: 1 }));
    }

    #[test]
    fn png_output_decodes() {
        let srcs = [("w", png(3, 3, |_, _| [255; 3]))];
        let out = average_image(&srcs, 8, 4).unwrap();
        let back = image::load_from_memory(&out.image.to_png().unwrap()).unwrap();
        assert_eq!((back.width(), back.height()), (8, 4));
    }
}
