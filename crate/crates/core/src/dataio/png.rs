use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::{Error, Image, Result};

/// Loads a PNG as values in `[0, 1]`: grayscale stays single-channel,
/// everything else becomes RGB. Alpha is dropped.
pub fn load_png(path: &Path) -> Result<Image> {
    let dynimg = image::open(path).map_err(|source| Error::Image { path: path.to_path_buf(), source })?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    let gray = matches!(
        dynimg,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
    );
    let (channels, raw) = if gray {
        (1, dynimg.into_luma8().into_raw())
    } else {
        (3, dynimg.into_rgb8().into_raw())
    };
    Image::new(w, h, channels, raw.into_iter().map(|b| b as f64 / 255.0).collect())
}

/// Writes 8-bit PNG, quantizing with `floor(v * 255 + 0.5)`.
pub fn save_png(path: &Path, img: &Image) -> Result<()> {
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|v| (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8)
        .collect();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let err = |source| Error::Image { path: path.to_path_buf(), source };
    match img.channels() {
        1 => ImageBuffer::<Luma<u8>, _>::from_raw(w, h, bytes)
            .expect("buffer length matches shape")
            .save(path)
            .map_err(err),
        _ => ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, bytes)
            .expect("buffer length matches shape")
            .save(path)
            .map_err(err),
    }
}
