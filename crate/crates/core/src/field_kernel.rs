//! Discrete curl and the Maxwell-form field-equation residual.
//!
//! The free field obeys
//!
//! ```text
//! ∇ × U1 = -∂U2/∂t
//! ∇ × U2 =  ∂U1/∂t
//! ```
//!
//! Spatial derivatives use second-order central differences on interior
//! points and second-order one-sided stencils on the boundary. Residual norms
//! are taken over interior points only.

use rayon::prelude::*;

use crate::error::FieldError;
use crate::grid::{norm_sq, GridSpec, VectorField, VectorFieldPair};

/// Curl samples plus a per-point flag marking one-sided boundary stencils.
#[derive(Debug, Clone)]
pub struct CurlField {
    pub field: VectorField,
    pub boundary: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// RMS of |∇×U1 + ∂U2/∂t| over interior points.
    pub r1_norm: f64,
    /// RMS of |∇×U2 - ∂U1/∂t| over interior points.
    pub r2_norm: f64,
    pub spacing: [f64; 3],
    pub interior_points: usize,
}

fn check_curl_grid(grid: &GridSpec) -> Result<(), FieldError> {
    for axis in 0..3 {
        let n = grid.points()[axis];
        if grid.is_active(axis) && n < 3 {
            return Err(FieldError::GridTooSmall { axis, points: n, required: 3 });
        }
    }
    Ok(())
}

fn partial(values: &[[f64; 3]], grid: &GridSpec, axis: usize, comp: usize, idx: usize) -> f64 {
    if !grid.is_active(axis) {
        return 0.0;
    }
    let n = grid.points()[axis];
    let h = grid.spacing()[axis];
    let s = grid.stride(axis);
    let i = grid.unravel(idx)[axis];
    let f = |offset: isize| values[(idx as isize + offset * s as isize) as usize][comp];
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i + 1 == n {
        (3.0 * f(0) - 4.0 * f(-1) + f(-2)) / (2.0 * h)
    } else {
        (f(1) - f(-1)) / (2.0 * h)
    }
}

/// Second-order finite-difference curl of a sampled vector field.
pub fn curl(field: &VectorField) -> Result<CurlField, FieldError> {
    let grid = *field.grid();
    check_curl_grid(&grid)?;
    let v = field.values();
    let values: Vec<[f64; 3]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let d = |axis, comp| partial(v, &grid, axis, comp, idx);
            [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
        })
        .collect();
    let boundary = (0..grid.len()).map(|idx| !grid.is_interior(idx)).collect();
    Ok(CurlField { field: VectorField::new(grid, values)?, boundary })
}

/// Residuals of both Maxwell-form equations given the time derivatives of U1, U2.
pub fn maxwell_form_residual(
    fields: &VectorFieldPair,
    du1_dt: &VectorField,
    du2_dt: &VectorField,
) -> Result<ResidualReport, FieldError> {
    let grid = *fields.grid();
    if du1_dt.grid() != &grid || du2_dt.grid() != &grid {
        return Err(FieldError::GridMismatch);
    }
    if !(fields.u1.is_finite() && fields.u2.is_finite() && du1_dt.is_finite() && du2_dt.is_finite()) {
        return Err(FieldError::NonFinite);
    }
    let curl1 = curl(&fields.u1)?;
    let curl2 = curl(&fields.u2)?;

    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    let mut count = 0usize;
    for idx in (0..grid.len()).filter(|&idx| grid.is_interior(idx)) {
        let c1 = curl1.field.values()[idx];
        let c2 = curl2.field.values()[idx];
        let d1 = du1_dt.values()[idx];
        let d2 = du2_dt.values()[idx];
        sum1 += norm_sq(&[c1[0] + d2[0], c1[1] + d2[1], c1[2] + d2[2]]);
        sum2 += norm_sq(&[c2[0] - d1[0], c2[1] - d1[1], c2[2] - d1[2]]);
        count += 1;
    }
    if count == 0 {
        return Err(FieldError::InvalidGrid("no interior points".into()));
    }
    Ok(ResidualReport {
        r1_norm: (sum1 / count as f64).sqrt(),
        r2_norm: (sum2 / count as f64).sqrt(),
        spacing: grid.spacing(),
        interior_points: count,
    })
}

/// Symmetric two-point time derivative `(after - before) / (t_after - t_before)`.
///
/// Second-order accurate at the midpoint time.
pub fn central_time_derivative(
    before: &VectorFieldPair,
    after: &VectorFieldPair,
) -> Result<(VectorField, VectorField), FieldError> {
    if before.grid() != after.grid() {
        return Err(FieldError::GridMismatch);
    }
    let dt = after.time - before.time;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FieldError::TimeStencil(format!("need t_after > t_before, got dt = {dt}")));
    }
    let diff = |a: &VectorField, b: &VectorField| {
        let values = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| [(x[0] - y[0]) / dt, (x[1] - y[1]) / dt, (x[2] - y[2]) / dt])
            .collect();
        VectorField::new(*a.grid(), values)
    };
    Ok((diff(&after.u1, &before.u1)?, diff(&after.u2, &before.u2)?))
}
