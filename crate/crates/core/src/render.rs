//! Domain-coloring phase portraits written as binary PPM.
//!
//! Hue is `(phase + π)/(2π)·360°` with full saturation and the standard
//! HSV to RGB conversion, so a phase of 0 is cyan. The phase is quantized
//! to 2⁻²⁰ of a turn first: two renders whose phases agree to rounding
//! error (for instance a cell and its translate by a period) then produce
//! identical bytes.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::{LogValue, PointValue};
use crate::verify::PhaseFunction;

const HUE_STEPS: f64 = (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Coloring {
    #[default]
    PhaseHue,
    /// Brightness follows the fractional part of `ln|f|`, from 0.7 to 1.
    PhaseHueWithModulusContours,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
    pub px_width: usize,
    pub px_height: usize,
    pub coloring: Coloring,
}

impl RenderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.px_width == 0 || self.px_height == 0 {
            return Err(Error::InvalidInput("image dimensions must be at least 1".into()));
        }
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            return Err(Error::InvalidInput("region width and height must be positive".into()));
        }
        Ok(())
    }

    /// Point sampled by pixel `(x, y)`; row 0 is the top of the region.
    pub fn pixel_center(&self, x: usize, y: usize) -> Complex64 {
        let dx = ((x as f64 + 0.5) / self.px_width as f64 - 0.5) * self.width;
        let dy = (0.5 - (y as f64 + 0.5) / self.px_height as f64) * self.height;
        self.center + Complex64::new(dx, dy)
    }
}

/// Row-major RGB pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.to_ppm())?;
        Ok(())
    }
}

/// Standard HSV to RGB with `h` in degrees.
pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|u| (255.0 * (u + m)).round().clamp(0.0, 255.0) as u8)
}

/// Hue in degrees for a phase in `(-π, π]`, after quantization.
pub fn phase_hue(phase: f64) -> f64 {
    let turn = (phase + PI) / (2.0 * PI);
    let k = (turn * HUE_STEPS).round().rem_euclid(HUE_STEPS);
    k / HUE_STEPS * 360.0
}

pub fn pixel_color(value: PointValue, coloring: Coloring) -> [u8; 3] {
    match value {
        PointValue::Zero(_) => [0, 0, 0],
        PointValue::Pole(_) => [255, 255, 255],
        PointValue::Finite(v) => finite_color(v, coloring),
    }
}

fn finite_color(v: LogValue, coloring: Coloring) -> [u8; 3] {
    if v.is_zero() {
        return [0, 0, 0];
    }
    if v.is_pole() {
        return [255, 255, 255];
    }
    let value = match coloring {
        Coloring::PhaseHue => 1.0,
        Coloring::PhaseHueWithModulusContours => 0.7 + 0.3 * v.log_mag().rem_euclid(1.0),
    };
    hsv_to_rgb(phase_hue(v.phase()), 1.0, value)
}

/// Evaluates `f` at every pixel center; rows are split across threads.
pub fn render(f: &(impl PhaseFunction + Sync), spec: &RenderSpec) -> Result<Image> {
    spec.validate()?;
    let (w, h) = (spec.px_width, spec.px_height);
    let mut rgb = vec![0u8; w * h * 3];
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(h);
    let rows_per = h.div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = rgb
            .chunks_mut(rows_per * w * 3)
            .enumerate()
            .map(|(chunk, buf)| {
                scope.spawn(move || -> Result<()> {
                    for (r, row) in buf.chunks_mut(w * 3).enumerate() {
                        let y = chunk * rows_per + r;
                        for (x, px) in row.chunks_mut(3).enumerate() {
                            px.copy_from_slice(&pixel_color(f.eval(spec.pixel_center(x, y))?, spec.coloring));
                        }
                    }
                    Ok(())
                })
            })
            .collect();
        handles.into_iter().try_for_each(|h| h.join().expect("render worker panicked"))
    })?;
    Ok(Image { width: w, height: h, rgb })
}

pub fn render_phase_portrait(f: &(impl PhaseFunction + Sync), spec: &RenderSpec, path: &Path) -> Result<Image> {
    let image = render(f, spec)?;
    image.write_ppm(path)?;
    Ok(image)
}
