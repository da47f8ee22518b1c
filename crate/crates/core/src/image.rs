//! Persistence images: a diagram mapped to (birth, persistence) coordinates,
//! smoothed by persistence-weighted Gaussians and sampled on a fixed grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagram::PersistenceDiagram;
use crate::error::{invalid, Result};

/// How `(birth, death)` becomes `(birth, persistence)`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// `(b, |d - b|)`. Loops, whose death precedes their birth, keep a
    /// positive persistence.
    #[default]
    Absolute,
    /// `(b, d - b)` verbatim; loops land below the axis and get zero weight.
    Literal,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Grid, kernel width and window of a persistence image.
///
/// The output vector is row-major: row `r` covers the `r`-th persistence
/// band counted from `y_min`, column `c` the `c`-th birth band from `x_min`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub rows: usize,
    pub cols: usize,
    pub sigma: f64,
    pub bounds: Bounds,
    pub transform: Transform,
}

pub const DEFAULT_RESOLUTION: (usize, usize) = (5, 5);
const BOUNDS_MARGIN: f64 = 0.05;
const SIGMA_FRACTION: f64 = 0.2;

impl ImageSpec {
    pub fn new(
        rows: usize,
        cols: usize,
        sigma: f64,
        bounds: Bounds,
        transform: Transform,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!(
                "resolution {rows}x{cols} must be positive"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma {sigma} must be positive")));
        }
        let Bounds {
            x_min,
            x_max,
            y_min,
            y_max,
        } = bounds;
        if !(x_min < x_max && y_min < y_max)
            || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
        {
            return Err(invalid(format!("degenerate bounds {bounds:?}")));
        }
        Ok(ImageSpec {
            rows,
            cols,
            sigma,
            bounds,
            transform,
        })
    }

    /// Window covering every transformed point of `diagrams`, widened by 5%
    /// on each side; sigma is a fifth of the longer side. An empty input or
    /// a zero-width side falls back to a unit-wide window.
    pub fn fit<'a>(
        diagrams: impl IntoIterator<Item = &'a PersistenceDiagram>,
        rows: usize,
        cols: usize,
        transform: Transform,
    ) -> Result<Self> {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for d in diagrams {
            for (x, y) in transform_diagram(d, transform) {
                lo = (lo.0.min(x), lo.1.min(y));
                hi = (hi.0.max(x), hi.1.max(y));
            }
        }
        if !lo.0.is_finite() {
            lo = (0.0, 0.0);
            hi = (1.0, 1.0);
        }
        let widen = |a: f64, b: f64| {
            let side = b - a;
            if side > 0.0 {
                (a - BOUNDS_MARGIN * side, b + BOUNDS_MARGIN * side)
            } else {
                (a - 0.5, b + 0.5)
            }
        };
        let (x_min, x_max) = widen(lo.0, hi.0);
        let (y_min, y_max) = widen(lo.1, hi.1);
        let sigma = SIGMA_FRACTION * (x_max - x_min).max(y_max - y_min);
        ImageSpec::new(
            rows,
            cols,
            sigma,
            Bounds {
                x_min,
                x_max,
                y_min,
                y_max,
            },
            transform,
        )
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        let b = &self.bounds;
        (
            (b.x_max - b.x_min) / self.cols as f64,
            (b.y_max - b.y_min) / self.rows as f64,
        )
    }

    /// Center of pixel `(row, col)` in (birth, persistence) coordinates.
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let (dx, dy) = self.pixel_size();
        (
            self.bounds.x_min + (col as f64 + 0.5) * dx,
            self.bounds.y_min + (row as f64 + 0.5) * dy,
        )
    }
}

pub fn transform_diagram(d: &PersistenceDiagram, transform: Transform) -> Vec<(f64, f64)> {
    d.points
        .iter()
        .map(|p| match transform {
            Transform::Absolute => (p.birth, (p.death - p.birth).abs()),
            Transform::Literal => (p.birth, p.death - p.birth),
        })
        .collect()
}

/// Piecewise-linear weight on persistence: 0 below zero, ramps to 1 at 1.
pub fn persistence_weight(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y <= 1.0 {
        y
    } else {
        1.0
    }
}

pub fn persistence_image(d: &PersistenceDiagram, spec: &ImageSpec) -> Vec<f64> {
    let points = transform_diagram(d, spec.transform);
    let (dx, dy) = spec.pixel_size();
    let area = dx * dy;
    let two_var = 2.0 * spec.sigma * spec.sigma;
    let norm = 1.0 / (PI * two_var);
    let mut out = vec![0.0; spec.len()];
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            let (cx, cy) = spec.pixel_center(row, col);
            let surface: f64 = points
                .iter()
                .map(|&(x, y)| {
                    let r2 = (cx - x).powi(2) + (cy - y).powi(2);
                    persistence_weight(y) * norm * (-r2 / two_var).exp()
                })
                .sum();
            out[row * spec.cols + col] = surface * area;
        }
    }
    out
}
