//! Image ingestion: center crop, bilinear resize, directory loading.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{zscore_normalize, PreprocessConfig, SpaceTag, VectorDataset};

/// Center-crop to the largest square and bilinearly resample to
/// `target x target`. Input and output are HWC row-major with values
/// in [0, 255].
///
/// The crop side is `min(w, h)` with top-left offset
/// `(floor((w - s) / 2), floor((h - s) / 2))`.
pub fn center_crop_resize(
    pixels: &[f32],
    w: usize,
    h: usize,
    c: usize,
    target: usize,
) -> Result<Vec<f32>> {
    if w == 0 || h == 0 || pixels.is_empty() {
        return Err(Error::InvalidInput("empty image".into()));
    }
    if c != 1 && c != 3 {
        return Err(Error::InvalidInput(format!("unsupported channel count {c}")));
    }
    if target == 0 {
        return Err(Error::InvalidInput("target resolution must be >= 1".into()));
    }
    if pixels.len() != w * h * c {
        return Err(Error::InvalidInput(format!(
            "pixel buffer length {} does not match {w} x {h} x {c}",
            pixels.len()
        )));
    }

    let s = w.min(h);
    let x0 = (w - s) / 2;
    let y0 = (h - s) / 2;

    if s == target {
        // crop only, no resampling
        let mut out = Vec::with_capacity(target * target * c);
        for y in 0..s {
            let row = ((y0 + y) * w + x0) * c;
            out.extend_from_slice(&pixels[row..row + s * c]);
        }
        return Ok(out);
    }

    let scale = s as f64 / target as f64;
    let mut out = Vec::with_capacity(target * target * c);
    for dy in 0..target {
        let sy = ((dy as f64 + 0.5) * scale - 0.5).clamp(0.0, (s - 1) as f64);
        let y_lo = sy.floor() as usize;
        let y_hi = (y_lo + 1).min(s - 1);
        let fy = sy - y_lo as f64;
        for dx in 0..target {
            let sx = ((dx as f64 + 0.5) * scale - 0.5).clamp(0.0, (s - 1) as f64);
            let x_lo = sx.floor() as usize;
            let x_hi = (x_lo + 1).min(s - 1);
            let fx = sx - x_lo as f64;
            for ch in 0..c {
                let at = |x: usize, y: usize| {
                    pixels[((y0 + y) * w + x0 + x) * c + ch] as f64
                };
                let top = at(x_lo, y_lo) * (1.0 - fx) + at(x_hi, y_lo) * fx;
                let bot = at(x_lo, y_hi) * (1.0 - fx) + at(x_hi, y_hi) * fx;
                let v = top * (1.0 - fy) + bot * fy;
                out.push(v.clamp(0.0, 255.0) as f32);
            }
        }
    }
    Ok(out)
}

/// Bilinearly downscale every row of a square-image dataset from
/// `from_res` to `to_res`, preserving ids and space tag.
pub fn downscale_rows<F: Real>(
    ds: &VectorDataset<F>,
    from_res: usize,
    to_res: usize,
    channels: usize,
) -> Result<VectorDataset<F>> {
    if from_res * from_res * channels != ds.dim() {
        return Err(Error::InvalidInput(format!(
            "dim {} is not {from_res}^2 x {channels}",
            ds.dim()
        )));
    }
    let mut values = Vec::with_capacity(ds.count() * to_res * to_res * channels);
    for i in 0..ds.count() {
        let row: Vec<f32> = ds.row(i).iter().map(|v| v.as_f64() as f32).collect();
        let scaled = center_crop_resize(&row, from_res, from_res, channels, to_res)?;
        values.extend(scaled.into_iter().map(|v| F::from_f64_lossy(v as f64)));
    }
    VectorDataset::new(
        ds.count(),
        to_res * to_res * channels,
        values,
        ds.source_ids().map(|ids| ids.to_vec()),
        ds.space_tag(),
    )
}

/// Load every decodable PNG/JPEG under `dir` (recursively), in
/// lexicographic order of relative path, into one dataset row each.
/// Images are converted to RGB, center-cropped and resized to
/// `cfg.target_resolution`. Returns the dataset and the relative paths
/// of files that failed to decode.
pub fn load_image_dir(
    dir: &Path,
    cfg: &PreprocessConfig,
) -> Result<(VectorDataset<f32>, Vec<String>)> {
    cfg.validate()?;
    let mut files = Vec::new();
    collect_images(dir, dir, &mut files)?;
    files.sort_by(|a, b| a.1.cmp(&b.1));
    if files.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no PNG/JPEG files under {}",
            dir.display()
        )));
    }

    let target = cfg.target_resolution;
    let decoded: Vec<(String, Option<Vec<f32>>)> = files
        .par_iter()
        .map(|(abs, rel)| {
            let row = image::open(abs).ok().and_then(|img| {
                let rgb = img.to_rgb8();
                let (w, h) = (rgb.width() as usize, rgb.height() as usize);
                let pixels: Vec<f32> = rgb.as_raw().iter().map(|&p| p as f32).collect();
                center_crop_resize(&pixels, w, h, 3, target).ok()
            });
            (rel.clone(), row)
        })
        .collect();

    let dim = target * target * 3;
    let mut values = Vec::new();
    let mut ids = Vec::new();
    let mut skipped = Vec::new();
    for (rel, row) in decoded {
        match row {
            Some(r) => {
                values.extend_from_slice(&r);
                ids.push(rel);
            }
            None => skipped.push(rel),
        }
    }
    if ids.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no decodable images under {} ({} skipped)",
            dir.display(),
            skipped.len()
        )));
    }

    let ds = VectorDataset::new(ids.len(), dim, values, Some(ids), SpaceTag::PixelRaw0255)?;
    if cfg.zscore {
        let (zds, _, _) = zscore_normalize(&ds, 3)?;
        Ok((zds, skipped))
    } else {
        Ok((ds, skipped))
    }
}

fn collect_images(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, String)>) -> Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_images(root, &path, out)?;
        } else if is_image_ext(&path) {
            let rel = path
                .strip_prefix(root)
                .unwrap_or(&path)
                .to_string_lossy()
                .replace('\\', "/");
            out.push((path, rel));
        }
    }
    Ok(())
}

fn is_image_ext(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let e = e.to_ascii_lowercase();
            e == "png" || e == "jpg" || e == "jpeg"
        })
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_target_matches() {
        let pixels: Vec<f32> = (0..4 * 4 * 3).map(|i| (i % 256) as f32).collect();
        let out = center_crop_resize(&pixels, 4, 4, 3, 4).unwrap();
        assert_eq!(out, pixels);
    }

    #[test]
    fn wide_image_crops_center_columns() {
        // 200x100, target 64: columns [50, 150) survive the crop
        let w = 200;
        let h = 100;
        let mut pixels = vec![0f32; w * h];
        for y in 0..h {
            for x in 50..150 {
                pixels[y * w + x] = 200.0;
            }
        }
        let out = center_crop_resize(&pixels, w, h, 1, 64).unwrap();
        assert_eq!(out.len(), 64 * 64);
        // crop region is uniform, so resampling keeps the value
        assert!(out.iter().all(|&v| (v - 200.0).abs() < 1e-4));
    }

    #[test]
    fn floor_tie_break_selects_left_pixel() {
        // 2x1 image (w=2, h=1), values (0, 255), target 1:
        // crop offset floor((2-1)/2) = 0 selects value 0
        let out = center_crop_resize(&[0.0, 255.0], 2, 1, 1, 1).unwrap();
        assert_eq!(out, vec![0.0]);
    }

    #[test]
    fn empty_image_is_an_error() {
        assert!(center_crop_resize(&[], 0, 0, 1, 4).is_err());
    }

    #[test]
    fn downscale_uniform_rows_stays_uniform() {
        let ds = VectorDataset::<f32>::new(
            2,
            4 * 4 * 3,
            vec![100.0; 2 * 4 * 4 * 3],
            None,
            SpaceTag::PixelRaw0255,
        )
        .unwrap();
        let small = downscale_rows(&ds, 4, 2, 3).unwrap();
        assert_eq!(small.dim(), 2 * 2 * 3);
        assert!(small.values().iter().all(|&v| (v - 100.0).abs() < 1e-4));
    }
}
