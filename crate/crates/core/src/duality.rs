//! Dual rotations of the field pair and the quadratic field invariants.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::FieldError;
use crate::grid::{dot, norm_sq, VectorField, VectorFieldPair};

/// Rotation angle in `[0, 2π]`; anything outside is reduced mod 2π.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DualAngle(f64);

impl DualAngle {
    pub fn new(theta: f64) -> Self {
        if (0.0..=TAU).contains(&theta) {
            DualAngle(theta)
        } else {
            DualAngle(theta.rem_euclid(TAU))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// `I1 = |U1|² - |U2|²`, `I2 = U1·U2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantPair {
    pub i1: f64,
    pub i2: f64,
}

/// The rotated pair of the rotation law, evaluated on the unrotated fields.
///
/// Note `i2` here carries the factor two, `2 U1·U2 cos2θ - ...`, so it is not
/// comparable with [`InvariantPair::i2`] at θ = 0 without halving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotatedInvariantPair {
    pub i1: f64,
    pub i2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMap {
    pub pointwise: Vec<InvariantPair>,
    /// Trapezoidal integrals over the active grid axes.
    pub integrated: InvariantPair,
}

/// Pointwise `U1' = cosθ U1 + sinθ U2`, `U2' = -sinθ U1 + cosθ U2`.
pub fn dual_rotate(fields: &VectorFieldPair, theta: DualAngle) -> Result<VectorFieldPair, FieldError> {
    let (s, c) = theta.radians().sin_cos();
    let grid = *fields.grid();
    let mut u1 = Vec::with_capacity(grid.len());
    let mut u2 = Vec::with_capacity(grid.len());
    for (a, b) in fields.u1.values().iter().zip(fields.u2.values()) {
        u1.push([c * a[0] + s * b[0], c * a[1] + s * b[1], c * a[2] + s * b[2]]);
        u2.push([-s * a[0] + c * b[0], -s * a[1] + c * b[1], -s * a[2] + c * b[2]]);
    }
    VectorFieldPair::new(VectorField::new(grid, u1)?, VectorField::new(grid, u2)?, fields.time)
}

fn pointwise(fields: &VectorFieldPair) -> impl Iterator<Item = InvariantPair> + '_ {
    fields
        .u1
        .values()
        .iter()
        .zip(fields.u2.values())
        .map(|(a, b)| InvariantPair { i1: norm_sq(a) - norm_sq(b), i2: dot(a, b) })
}

pub fn invariants(fields: &VectorFieldPair) -> Result<InvariantMap, FieldError> {
    let pointwise: Vec<InvariantPair> = pointwise(fields).collect();
    let grid = fields.grid();
    let i1: Vec<f64> = pointwise.iter().map(|p| p.i1).collect();
    let i2: Vec<f64> = pointwise.iter().map(|p| p.i2).collect();
    let integrated = InvariantPair { i1: grid.integrate(&i1)?, i2: grid.integrate(&i2)? };
    Ok(InvariantMap { pointwise, integrated })
}

/// `I1' = I1 cos2θ + 2 I2 sin2θ`, `I2' = 2 I2 cos2θ - I1 sin2θ`, pointwise.
pub fn rotated_invariants(fields: &VectorFieldPair, theta: DualAngle) -> Vec<RotatedInvariantPair> {
    let (s2, c2) = (2.0 * theta.radians()).sin_cos();
    pointwise(fields)
        .map(|p| RotatedInvariantPair { i1: p.i1 * c2 + 2.0 * p.i2 * s2, i2: 2.0 * p.i2 * c2 - p.i1 * s2 })
        .collect()
}

/// `C = (|U1|² - |U2|²) + 2i U1·U2`; rotates as `C -> e^{-2iθ} C`.
pub fn complex_invariant(fields: &VectorFieldPair) -> Vec<Complex64> {
    pointwise(fields).map(|p| Complex64::new(p.i1, 2.0 * p.i2)).collect()
}

/// Pointwise `|U1|² + |U2|²`, unchanged by any dual rotation.
pub fn energy_density(fields: &VectorFieldPair) -> Vec<f64> {
    fields.u1.values().iter().zip(fields.u2.values()).map(|(a, b)| norm_sq(a) + norm_sq(b)).collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use proptest::prelude::*;

    use super::*;
    use crate::grid::GridSpec;

    fn uniform(u1: [f64; 3], u2: [f64; 3]) -> VectorFieldPair {
        let g = GridSpec::line(1.0, 3).unwrap();
        VectorFieldPair::new(VectorField::from_fn(g, |_| u1), VectorField::from_fn(g, |_| u2), 0.0).unwrap()
    }

    fn sample_pair(seed: f64) -> VectorFieldPair {
        let g = GridSpec::line(2.0, 9).unwrap();
        let u1 = VectorField::from_fn(g, |[_, _, z]| [(z + seed).sin(), z * seed, 0.3]);
        let u2 = VectorField::from_fn(g, |[_, _, z]| [seed.cos(), -z, (2.0 * z).cos()]);
        VectorFieldPair::new(u1, u2, 0.1).unwrap()
    }

    #[test]
    fn angle_reduction() {
        assert_eq!(DualAngle::new(TAU).radians(), TAU);
        assert!((DualAngle::new(-FRAC_PI_2).radians() - 1.5 * PI).abs() < 1e-15);
        assert!((DualAngle::new(3.0 * PI).radians() - PI).abs() < 1e-15);
    }

    #[test]
    fn special_angles() {
        let f = sample_pair(0.7);
        assert_eq!(dual_rotate(&f, DualAngle::new(0.0)).unwrap(), f);

        let quarter = dual_rotate(&f, DualAngle::new(FRAC_PI_2)).unwrap();
        let half = dual_rotate(&f, DualAngle::new(PI)).unwrap();
        for i in 0..f.grid().len() {
            for c in 0..3 {
                assert!((quarter.u1.values()[i][c] - f.u2.values()[i][c]).abs() < 1e-15);
                assert!((quarter.u2.values()[i][c] + f.u1.values()[i][c]).abs() < 1e-15);
                assert!((half.u1.values()[i][c] + f.u1.values()[i][c]).abs() < 1e-15);
                assert!((half.u2.values()[i][c] + f.u2.values()[i][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn invariant_arithmetic() {
        let inv = |a, b| invariants(&uniform(a, b)).unwrap().pointwise[0];
        assert_eq!(inv([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), InvariantPair { i1: 0.0, i2: 0.0 });
        assert_eq!(inv([2.0, 0.0, 0.0], [0.0, 1.0, 0.0]), InvariantPair { i1: 3.0, i2: 0.0 });
        assert_eq!(inv([1.0, 1.0, 0.0], [1.0, 0.0, 0.0]), InvariantPair { i1: 1.0, i2: 1.0 });
    }

    #[test]
    fn integrated_invariants_use_trapezoid() {
        // uniform I1 = 3 on a unit line
        let m = invariants(&uniform([2.0, 0.0, 0.0], [0.0, 1.0, 0.0])).unwrap();
        assert!((m.integrated.i1 - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rotated_invariants_examples() {
        let f = uniform([2.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let r = rotated_invariants(&f, DualAngle::new(FRAC_PI_4))[0];
        assert!(r.i1.abs() < 1e-15 && (r.i2 + 3.0).abs() < 1e-15);

        let f = sample_pair(0.3);
        let plain = invariants(&f).unwrap().pointwise;
        for (r, p) in rotated_invariants(&f, DualAngle::new(0.0)).iter().zip(&plain) {
            assert_eq!((r.i1, r.i2), (p.i1, 2.0 * p.i2));
        }
    }

    #[test]
    fn rotated_invariants_have_period_pi() {
        let f = sample_pair(1.1);
        let a = rotated_invariants(&f, DualAngle::new(0.4));
        let b = rotated_invariants(&f, DualAngle::new(0.4 + PI));
        for (x, y) in a.iter().zip(&b) {
            assert!((x.i1 - y.i1).abs() < 1e-13 && (x.i2 - y.i2).abs() < 1e-13);
        }
    }

    #[test]
    fn reflection_parity_mixes_under_rotation() {
        // odd U1, even U2 about z = L/2; a generic rotation mixes both parities into U1'
        let l = 2.0;
        let g = GridSpec::line(l, 41).unwrap();
        let u1 = VectorField::from_fn(g, |[_, _, z]| [(z - l / 2.0).sin(), 0.0, 0.0]);
        let u2 = VectorField::from_fn(g, |[_, _, z]| [(z - l / 2.0).cos(), 0.0, 0.0]);
        let f = VectorFieldPair::new(u1, u2, 0.0).unwrap();
        let parity_norms = |field: &VectorField| {
            let v = field.values();
            let n = v.len();
            let (mut even, mut odd) = (0.0f64, 0.0f64);
            for i in 0..n {
                let (a, b) = (v[i][0], v[n - 1 - i][0]);
                even = even.max(((a + b) / 2.0).abs());
                odd = odd.max(((a - b) / 2.0).abs());
            }
            (even, odd)
        };
        let (e0, o0) = parity_norms(&f.u1);
        assert!(e0 < 1e-14 && o0 > 0.1);
        let r = dual_rotate(&f, DualAngle::new(0.6)).unwrap();
        let (e, o) = parity_norms(&r.u1);
        assert!(e > 0.1 && o > 0.1);
    }

    fn arb_pair() -> impl Strategy<Value = VectorFieldPair> {
        prop::collection::vec(-10.0f64..10.0, 6 * 5).prop_map(|raw| {
            let g = GridSpec::line(1.0, 5).unwrap();
            let u1 = (0..5).map(|i| [raw[6 * i], raw[6 * i + 1], raw[6 * i + 2]]).collect();
            let u2 = (0..5).map(|i| [raw[6 * i + 3], raw[6 * i + 4], raw[6 * i + 5]]).collect();
            VectorFieldPair::new(VectorField::new(g, u1).unwrap(), VectorField::new(g, u2).unwrap(), 0.0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn complex_invariant_rotates_with_double_angle(f in arb_pair(), theta in 0.0f64..TAU) {
            let rotated = dual_rotate(&f, DualAngle::new(theta)).unwrap();
            let phase = Complex64::from_polar(1.0, -2.0 * theta);
            for (c_rot, c) in complex_invariant(&rotated).iter().zip(complex_invariant(&f)) {
                let expected = phase * c;
                prop_assert!((c_rot - expected).norm() <= 1e-12 * (1.0 + c.norm()));
                prop_assert!((c_rot.norm() - c.norm()).abs() <= 1e-12 * (1.0 + c.norm()));
            }
            for (a, b) in energy_density(&rotated).iter().zip(energy_density(&f)) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
            }
        }

        #[test]
        fn rotations_compose(f in arb_pair(), t1 in 0.0f64..TAU, t2 in 0.0f64..TAU) {
            let twice = dual_rotate(&dual_rotate(&f, DualAngle::new(t1)).unwrap(), DualAngle::new(t2)).unwrap();
            let once = dual_rotate(&f, DualAngle::new(t1 + t2)).unwrap();
            for (a, b) in twice.u1.values().iter().chain(twice.u2.values())
                .zip(once.u1.values().iter().chain(once.u2.values())) {
                for c in 0..3 {
                    prop_assert!((a[c] - b[c]).abs() <= 1e-12 * (1.0 + b[c].abs()));
                }
            }
        }

        #[test]
        fn rotated_invariants_match_invariants_of_rotated_fields(f in arb_pair(), theta in 0.0f64..TAU) {
            // (I1', I2') are Re and Im of e^{-2iθ} C, i.e. of C on the rotated fields
            let r = rotated_invariants(&f, DualAngle::new(theta));
            let c = complex_invariant(&dual_rotate(&f, DualAngle::new(theta)).unwrap());
            for (ri, ci) in r.iter().zip(&c) {
                prop_assert!((ri.i1 - ci.re).abs() <= 1e-10 * (1.0 + ci.norm()));
                prop_assert!((ri.i2 - ci.im).abs() <= 1e-10 * (1.0 + ci.norm()));
            }
        }
    }
}
