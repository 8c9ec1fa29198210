use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of grid cells per side used for pixel counting.
pub const GRID: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[repr(u8)]
pub enum PixelClass {
    #[default]
    Background = 0,
    Target = 1,
    Other = 2,
}

/// Offscreen render target: per-pixel class plus view depth.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskBuffer {
    size: usize,
    pixels: Vec<PixelClass>,
    depth: Vec<f64>,
}

impl MaskBuffer {
    /// Blank square buffer; `size` must be a positive multiple of [`GRID`].
    pub fn new(size: usize) -> Result<Self> {
        check_resolution(size)?;
        Ok(MaskBuffer {
            size,
            pixels: vec![PixelClass::Background; size * size],
            depth: vec![f64::INFINITY; size * size],
        })
    }

    pub(crate) fn from_parts(size: usize, pixels: Vec<PixelClass>, depth: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), size * size);
        debug_assert_eq!(depth.len(), size * size);
        MaskBuffer { size, pixels, depth }
    }

    pub fn width(&self) -> usize {
        self.size
    }

    pub fn height(&self) -> usize {
        self.size
    }

    pub fn pixels(&self) -> &[PixelClass] {
        &self.pixels
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn get(&self, x: usize, y: usize) -> PixelClass {
        self.pixels[y * self.size + x]
    }

    /// Writes a class and depth directly; used to build synthetic masks.
    pub fn set(&mut self, x: usize, y: usize, class: PixelClass, depth: f64) {
        let i = y * self.size + x;
        self.pixels[i] = class;
        self.depth[i] = if class == PixelClass::Background {
            f64::INFINITY
        } else {
            depth
        };
    }

    pub fn count(&self, class: PixelClass) -> u64 {
        self.pixels.iter().filter(|&&p| p == class).count() as u64
    }

    /// Binary PPM: target blue, other red, background black.
    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.pixels.len() * 3 + 32);
        write!(out, "P6\n{} {}\n255\n", self.size, self.size).expect("write to vec");
        for p in &self.pixels {
            out.extend_from_slice(match p {
                PixelClass::Background => &[0, 0, 0],
                PixelClass::Target => &[0, 0, 255],
                PixelClass::Other => &[255, 0, 0],
            });
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn check_resolution(size: usize) -> Result<()> {
    if size == 0 || !size.is_multiple_of(GRID) {
        return Err(Error::Validation(format!(
            "resolution {size} must be a positive multiple of {GRID}"
        )));
    }
    Ok(())
}

/// Target-pixel counts of the isolated (`target_only`) and full-scene
/// (`target_in_scene`) renders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelCounts {
    pub target_only: u64,
    pub target_in_scene: u64,
    /// Row-major `GRID x GRID` cells of `[target_only, target_in_scene]`.
    pub per_cell: Vec<[u64; 2]>,
}

/// Counts target pixels of both buffers over a 10x10 grid. Cells are
/// counted independently in parallel; totals are their sums.
pub fn count_pixels(b1: &MaskBuffer, b2: &MaskBuffer) -> Result<PixelCounts> {
    if b1.size != b2.size {
        return Err(Error::Dimension(format!(
            "buffer sizes differ: {} vs {}",
            b1.size, b2.size
        )));
    }
    let cell = b1.size / GRID;
    let count_cell = |buf: &MaskBuffer, cx: usize, cy: usize| -> u64 {
        (cy * cell..(cy + 1) * cell)
            .map(|y| {
                let row = &buf.pixels[y * buf.size + cx * cell..y * buf.size + (cx + 1) * cell];
                row.iter().filter(|&&p| p == PixelClass::Target).count() as u64
            })
            .sum()
    };
    let per_cell: Vec<[u64; 2]> = (0..GRID * GRID)
        .into_par_iter()
        .map(|i| {
            let (cx, cy) = (i % GRID, i / GRID);
            [count_cell(b1, cx, cy), count_cell(b2, cx, cy)]
        })
        .collect();
    let (target_only, target_in_scene) = per_cell.iter().fold((0, 0), |(a, b), c| (a + c[0], b + c[1]));
    Ok(PixelCounts {
        target_only,
        target_in_scene,
        per_cell,
    })
}
