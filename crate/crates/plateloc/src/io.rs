//! Loading and saving the on-disk formats: floor plans, calibrations and
//! raster images.

use std::fs;
use std::path::{Path, PathBuf};

use plateloc_core::{CameraError, CameraIntrinsics, FloorPlan, FloorPlanError, GrayImage};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{}: {source}", path.display())]
    InvalidFloorPlan {
        path: PathBuf,
        #[source]
        source: FloorPlanError,
    },
    #[error("{}: {source}", path.display())]
    InvalidCalibration {
        path: PathBuf,
        #[source]
        source: CameraError,
    },
}

pub fn read_text(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads any JSON document.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, LoadError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| LoadError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a floor plan without validating it.
pub fn read_floorplan_unchecked(path: &Path) -> Result<FloorPlan, LoadError> {
    read_json(path)
}

/// Parses and validates a floor plan.
pub fn load_floorplan(path: &Path) -> Result<FloorPlan, LoadError> {
    read_floorplan_unchecked(path)?
        .validated()
        .map_err(|source| LoadError::InvalidFloorPlan {
            path: path.to_path_buf(),
            source,
        })
}

pub fn save_floorplan(plan: &FloorPlan, path: &Path) -> std::io::Result<()> {
    write_json(plan, path)
}

/// Reads `{"fx", "fy", "cx", "cy"}` and checks it.
pub fn load_calibration(path: &Path) -> Result<CameraIntrinsics, LoadError> {
    let k: CameraIntrinsics = read_json(path)?;
    k.validate().map_err(|source| LoadError::InvalidCalibration {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(k)
}

pub fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Luma of an 8-bit RGB pixel with weights 0.299, 0.587, 0.114.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
}

pub fn to_gray(img: &image::DynamicImage) -> GrayImage {
    let rgb = img.to_rgb8();
    let pixels = rgb.pixels().map(|p| luma(p[0], p[1], p[2])).collect();
    GrayImage::new(rgb.width(), rgb.height(), pixels).expect("decoder returned a consistent buffer")
}

/// Decodes an image file and converts it to grayscale.
pub fn load_image(path: &Path) -> Result<GrayImage, LoadError> {
    let img = image::open(path).map_err(|source| LoadError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(to_gray(&img))
}

pub fn save_png(img: &GrayImage, path: &Path) -> image::ImageResult<()> {
    let buf = image::GrayImage::from_raw(img.width(), img.height(), img.pixels().to_vec())
        .expect("GrayImage buffer matches its size");
    buf.save_with_format(path, image::ImageFormat::Png)
}
