//! Normalized pixel-center coordinates.
//!
//! A side with `n` cells places cell `i`'s center at `-1 + (2i + 1) / n`,
//! so every axis spans (-1, 1) symmetrically regardless of resolution.
//! Points are `[y, x]`, row-major.

use alloc::vec::Vec;

use crate::error::{invalid_arg, CoreResult};
use crate::real::Real;

/// Center coordinate of cell `i` on an axis of `n` cells.
pub fn axis_coord<T: Real>(n: usize, i: usize) -> T {
    debug_assert!(i < n);
    -T::one() + (T::two() * T::of_usize(i) + T::one()) / T::of_usize(n)
}

/// Index of the cell containing coordinate `c` (ties between two centers go
/// to the lower index); clamped to the axis.
pub fn axis_index<T: Real>(n: usize, c: T) -> usize {
    let t = (c + T::one()) * T::half() * T::of_usize(n) - T::half();
    // round-half-down, then clamp
    let i = (t - T::half()).ceil().to_f64_lossy();
    (i.max(0.0) as usize).min(n - 1)
}

/// Continuous cell position of coordinate `c`: 0 at the first center,
/// `n - 1` at the last, fractional in between (may exceed either end by up
/// to half a cell).
pub fn axis_position<T: Real>(n: usize, c: T) -> T {
    (c + T::one()) * T::half() * T::of_usize(n) - T::half()
}

/// Grid of normalized pixel centers for an `h x w` image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordGrid {
    height: usize,
    width: usize,
}

impl CoordGrid {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center of cell (row, col) as `[y, x]`.
    pub fn point<T: Real>(&self, row: usize, col: usize) -> [T; 2] {
        [axis_coord(self.height, row), axis_coord(self.width, col)]
    }

    /// All centers, row-major.
    pub fn points<T: Real>(&self) -> Vec<[T; 2]> {
        let mut out = Vec::with_capacity(self.len());
        for r in 0..self.height {
            let y = axis_coord::<T>(self.height, r);
            for c in 0..self.width {
                out.push([y, axis_coord::<T>(self.width, c)]);
            }
        }
        out
    }

    /// Cell containing `q`, clamped to the grid.
    pub fn cell_of<T: Real>(&self, q: [T; 2]) -> (usize, usize) {
        (axis_index(self.height, q[0]), axis_index(self.width, q[1]))
    }
}

/// Builds the grid of `h * w` pixel centers.
pub fn make_coord_grid(h: usize, w: usize) -> CoreResult<CoordGrid> {
    if h == 0 || w == 0 {
        return Err(invalid_arg!("coordinate grid needs positive dims, got {h}x{w}"));
    }
    Ok(CoordGrid { height: h, width: w })
}
