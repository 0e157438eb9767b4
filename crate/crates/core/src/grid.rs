//! Regular Cartesian sampling grids and real 3-vector fields sampled on them.
//!
//! Axes with a single point are inactive: they carry no extent and no
//! derivative. A z-only grid is the 1D case used by the cavity module.

use serde::{Deserialize, Serialize};

use crate::error::FieldError;

pub const AXIS_X: usize = 0;
pub const AXIS_Y: usize = 1;
pub const AXIS_Z: usize = 2;

/// Axis-aligned grid anchored at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    extents: [f64; 3],
    points: [usize; 3],
}

impl GridSpec {
    pub fn new(extents: [f64; 3], points: [usize; 3]) -> Result<Self, FieldError> {
        let mut extents = extents;
        let mut active = 0;
        for axis in 0..3 {
            match points[axis] {
                0 => return Err(FieldError::InvalidGrid(format!("axis {axis} has zero points"))),
                1 => extents[axis] = 0.0,
                _ => {
                    if !(extents[axis].is_finite() && extents[axis] > 0.0) {
                        return Err(FieldError::InvalidGrid(format!(
                            "axis {axis} extent {} must be positive and finite",
                            extents[axis]
                        )));
                    }
                    active += 1;
                }
            }
        }
        if active == 0 {
            return Err(FieldError::InvalidGrid("grid has no active axis".into()));
        }
        Ok(Self { extents, points })
    }

    /// Grid along z only, spanning `[0, length]` with `points` samples.
    pub fn line(length: f64, points: usize) -> Result<Self, FieldError> {
        Self::new([0.0, 0.0, length], [1, 1, points])
    }

    pub fn extents(&self) -> [f64; 3] {
        self.extents
    }

    pub fn points(&self) -> [usize; 3] {
        self.points
    }

    pub fn is_active(&self, axis: usize) -> bool {
        self.points[axis] > 1
    }

    /// `extent / (points - 1)` per active axis, zero for inactive ones.
    pub fn spacing(&self) -> [f64; 3] {
        let mut h = [0.0; 3];
        for (axis, h) in h.iter_mut().enumerate() {
            if self.is_active(axis) {
                *h = self.extents[axis] / (self.points[axis] - 1) as f64;
            }
        }
        h
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.points[1] + j) * self.points[2] + k
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.points[2];
        let rest = idx / self.points[2];
        [rest / self.points[1], rest % self.points[1], k]
    }

    /// Stride in the flat buffer between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            AXIS_X => self.points[1] * self.points[2],
            AXIS_Y => self.points[2],
            _ => 1,
        }
    }

    /// Position of sample `i` along `axis` as a fraction of the extent, `i / (n - 1)`.
    ///
    /// The last sample maps to exactly 1.0.
    pub fn fraction(&self, axis: usize, i: usize) -> f64 {
        if self.is_active(axis) {
            i as f64 / (self.points[axis] - 1) as f64
        } else {
            0.0
        }
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.extents[axis] * self.fraction(axis, i)
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let ijk = self.unravel(idx);
        [self.coordinate(AXIS_X, ijk[0]), self.coordinate(AXIS_Y, ijk[1]), self.coordinate(AXIS_Z, ijk[2])]
    }

    /// True when the point is away from the boundary on every active axis.
    pub fn is_interior(&self, idx: usize) -> bool {
        let ijk = self.unravel(idx);
        (0..3).all(|axis| !self.is_active(axis) || (ijk[axis] > 0 && ijk[axis] + 1 < self.points[axis]))
    }

    /// Tensor-product trapezoidal weights over the active axes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let axis_weight = |axis: usize, i: usize| -> f64 {
            if !self.is_active(axis) {
                1.0
            } else if i == 0 || i + 1 == self.points[axis] {
                0.5 * h[axis]
            } else {
                h[axis]
            }
        };
        (0..self.len())
            .map(|idx| {
                let ijk = self.unravel(idx);
                (0..3).map(|axis| axis_weight(axis, ijk[axis])).product()
            })
            .collect()
    }

    /// Trapezoidal integral of a scalar sampled on this grid.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64, FieldError> {
        if samples.len() != self.len() {
            return Err(FieldError::ShapeMismatch { expected: self.len(), found: samples.len() });
        }
        Ok(self.trapezoid_weights().iter().zip(samples).map(|(w, f)| w * f).sum())
    }
}

/// Real 3-vector samples on a grid, flat in x-major, z-minor order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    values: Vec<[f64; 3]>,
}

impl VectorField {
    pub fn new(grid: GridSpec, values: Vec<[f64; 3]>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::ShapeMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![[0.0; 3]; grid.len()] }
    }

    /// Samples `f(position)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<[f64; 3]> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let values = self.values.iter().map(|v| [v[0] * factor, v[1] * factor, v[2] * factor]).collect();
        Self { grid: self.grid, values }
    }
}

/// The complex field U = U1 + i U2 as two real vector fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldPair {
    pub u1: VectorField,
    pub u2: VectorField,
    pub time: f64,
}

impl VectorFieldPair {
    pub fn new(u1: VectorField, u2: VectorField, time: f64) -> Result<Self, FieldError> {
        if u1.grid != u2.grid {
            return Err(FieldError::GridMismatch);
        }
        if !(u1.is_finite() && u2.is_finite() && time.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(Self { u1, u2, time })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u1.grid()
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm_sq(a: &[f64; 3]) -> f64 {
    dot(a, a)
}
