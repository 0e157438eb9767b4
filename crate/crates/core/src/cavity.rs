//! Rectangular-cavity standing-wave modes, their oscillator dynamics, and the
//! closed-form field solutions built from them.
//!
//! Dynamics run in units where the sound speed is 1, so `ω_α = k_α`. A
//! physical `c` is carried by [`CavitySpec`] and only enters through
//! [`CavitySpec::nondimensional`] and the reported frequencies.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::CavityError;
use crate::grid::{norm_sq, GridSpec, VectorField, VectorFieldPair, AXIS_Z};

/// Minimum samples per shortest wavelength before the field-route energy is trusted.
pub const MIN_POINTS_PER_WAVELENGTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    /// Extent along z.
    pub length: f64,
    pub volume: f64,
    pub sound_speed: f64,
    /// Number of retained modes.
    pub modes: usize,
}

impl CavitySpec {
    pub fn new(length: f64, volume: f64, sound_speed: f64, modes: usize) -> Result<Self, CavityError> {
        for (name, value) in [("length", length), ("volume", volume), ("sound_speed", sound_speed)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CavityError::InvalidParameter { name, value });
            }
        }
        if modes == 0 {
            return Err(CavityError::NoModes);
        }
        Ok(Self { length, volume, sound_speed, modes })
    }

    /// Same cavity with `c = 1`; times measured in the original units must be
    /// multiplied by the original `c` (lengths unchanged).
    pub fn nondimensional(&self) -> Self {
        Self { sound_speed: 1.0, ..*self }
    }

    pub fn cross_section(&self) -> f64 {
        self.volume / self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// α ≥ 1.
    pub index: usize,
    /// `απ / L`.
    pub k: f64,
    /// `απc / L`.
    pub omega: f64,
    pub mass: f64,
    /// `sqrt(2 ω² m / V)`, shared by U1 and U2.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    spec: CavitySpec,
    modes: Vec<Mode>,
}

impl ModeSet {
    pub fn spec(&self) -> &CavitySpec {
        &self.spec
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn shortest_wavelength(&self) -> f64 {
        2.0 * self.spec.length / self.spec.modes as f64
    }
}

pub fn mode_spectrum(spec: &CavitySpec, masses: &[f64]) -> Result<ModeSet, CavityError> {
    if masses.len() != spec.modes {
        return Err(CavityError::ModeCount { expected: spec.modes, found: masses.len() });
    }
    let modes = masses
        .iter()
        .enumerate()
        .map(|(i, &mass)| {
            if !(mass.is_finite() && mass > 0.0) {
                return Err(CavityError::InvalidParameter { name: "mass", value: mass });
            }
            let alpha = (i + 1) as f64;
            let k = alpha * PI / spec.length;
            let omega = alpha * PI * spec.sound_speed / spec.length;
            Ok(Mode { index: i + 1, k, omega, mass, amplitude: (2.0 * omega * omega * mass / spec.volume).sqrt() })
        })
        .collect::<Result<_, _>>()?;
    Ok(ModeSet { spec: *spec, modes })
}

/// Mode spectrum with every `m_α = 1`.
pub fn unit_mass_spectrum(spec: &CavitySpec) -> Result<ModeSet, CavityError> {
    mode_spectrum(spec, &vec![1.0; spec.modes])
}

/// Canonical pair of one mode plus the constants of `q(s) = B cos(ωs + φ)`,
/// with `s` measured from this snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub q: f64,
    /// `m dq/dt`.
    pub p: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl ModeState {
    pub fn from_canonical(q: f64, p: f64, mode: &Mode) -> Self {
        let scaled = -p / (mode.mass * mode.omega);
        Self { q, p, amplitude: q.hypot(scaled), phase: scaled.atan2(q) }
    }

    pub fn from_amplitude_phase(amplitude: f64, phase: f64, mode: &Mode) -> Self {
        let (s, c) = phase.sin_cos();
        Self { q: amplitude * c, p: -mode.mass * mode.omega * amplitude * s, amplitude, phase }
    }

    pub fn rest() -> Self {
        Self { q: 0.0, p: 0.0, amplitude: 0.0, phase: 0.0 }
    }

    pub fn velocity(&self, mode: &Mode) -> f64 {
        self.p / mode.mass
    }

    pub fn energy(&self, mode: &Mode) -> f64 {
        0.5 * (mode.mass * mode.omega * mode.omega * self.q * self.q + self.p * self.p / mode.mass)
    }
}

/// Exact free evolution by `t`: `q = B cos(ωt + φ)`, `p = -mωB sin(ωt + φ)`.
pub fn oscillator_evolve(state: &ModeState, mode: &Mode, t: f64) -> ModeState {
    let phase = state.phase + mode.omega * t;
    let (s, c) = phase.sin_cos();
    ModeState {
        q: state.amplitude * c,
        p: -mode.mass * mode.omega * state.amplitude * s,
        amplitude: state.amplitude,
        phase: phase.rem_euclid(TAU),
    }
}

/// `(1/2) Σ [m ω² q² + p²/m]`.
pub fn modal_energy(states: &[ModeState], modes: &ModeSet) -> Result<f64, CavityError> {
    check_states(states, modes)?;
    Ok(states.iter().zip(modes.modes()).map(|(s, m)| s.energy(m)).sum())
}

/// `q(t) = C1 e^{iωt} + C2 e^{-iωt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexOscillator {
    pub c1: Complex64,
    pub c2: Complex64,
    pub omega: f64,
}

impl ComplexOscillator {
    /// Constants reproducing `B cos(ωt + φ)`: `C1 = (B/2) e^{iφ}`, `C2 = conj(C1)`.
    pub fn from_real(amplitude: f64, phase: f64, omega: f64) -> Self {
        let c1 = Complex64::from_polar(0.5 * amplitude, phase);
        Self { c1, c2: c1.conj(), omega }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.c1 * Complex64::from_polar(1.0, self.omega * t) + self.c2 * Complex64::from_polar(1.0, -self.omega * t)
    }
}

/// `q'(t) = ω ∫₀ᵗ q` and `q''(t) = ω ∫₀ᵗ q'` for `q(τ) = B cos(ωτ + φ)`.
///
/// `q'' + q = B cos φ - B ω t sin φ`, constant in time only when `sin φ = 0`.
pub fn integrated_coordinates(state: &ModeState, mode: &Mode, t: f64) -> (f64, f64) {
    let (b, phi, w) = (state.amplitude, state.phase, mode.omega);
    let (s0, c0) = phi.sin_cos();
    let (st, ct) = (w * t + phi).sin_cos();
    let q1 = b * (st - s0);
    let q2 = b * (c0 - ct) - b * w * t * s0;
    (q1, q2)
}

/// Field samples together with their analytic time derivatives.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub fields: VectorFieldPair,
    pub du1_dt: VectorField,
    pub du2_dt: VectorField,
}

fn check_states(states: &[ModeState], modes: &ModeSet) -> Result<(), CavityError> {
    if states.len() != modes.len() {
        return Err(CavityError::ModeCount { expected: modes.len(), found: states.len() });
    }
    Ok(())
}

fn check_grid(grid: &GridSpec, spec: &CavitySpec) -> Result<(), CavityError> {
    let e = grid.extents();
    let z_only = !grid.is_active(0) && !grid.is_active(1) && grid.is_active(AXIS_Z);
    if !z_only || (e[AXIS_Z] - spec.length).abs() > 1e-12 * spec.length {
        return Err(CavityError::GridExtent { length: spec.length, extents: e });
    }
    Ok(())
}

/// `sin(πx)`, exactly zero at integer `x`.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

pub(crate) fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Per-mode coefficients for U1 (sine profile) and U2 (cosine profile).
struct ModalCoefficients {
    u1: Vec<f64>,
    u2: Vec<f64>,
    du1: Vec<f64>,
    du2: Vec<f64>,
}

fn assemble(modes: &ModeSet, grid: &GridSpec, t: f64, coeffs: ModalCoefficients) -> Result<Synthesis, CavityError> {
    let n = grid.points()[AXIS_Z];
    let mut u1 = vec![[0.0; 3]; n];
    let mut u2 = vec![[0.0; 3]; n];
    let mut d1 = vec![[0.0; 3]; n];
    let mut d2 = vec![[0.0; 3]; n];
    for i in 0..n {
        let s = grid.fraction(AXIS_Z, i);
        for (a, mode) in modes.modes().iter().enumerate() {
            let x = mode.index as f64 * s;
            let (sin, cos) = (sin_pi(x), cos_pi(x));
            u1[i][0] += coeffs.u1[a] * sin;
            d1[i][0] += coeffs.du1[a] * sin;
            u2[i][1] += coeffs.u2[a] * cos;
            d2[i][1] += coeffs.du2[a] * cos;
        }
    }
    let fields = VectorFieldPair::new(VectorField::new(*grid, u1)?, VectorField::new(*grid, u2)?, t)?;
    Ok(Synthesis { fields, du1_dt: VectorField::new(*grid, d1)?, du2_dt: VectorField::new(*grid, d2)? })
}

/// `U1 = Σ A q(t) sin(kz) e_x`, `U2 = Σ (A/k) dq/dt cos(kz) e_y`.
///
/// `states` are the mode states at time zero.
pub fn synthesize_first_solution(
    modes: &ModeSet,
    states: &[ModeState],
    grid: &GridSpec,
    t: f64,
) -> Result<Synthesis, CavityError> {
    check_states(states, modes)?;
    check_grid(grid, modes.spec())?;
    let m = modes.len();
    let mut c = ModalCoefficients { u1: vec![0.0; m], u2: vec![0.0; m], du1: vec![0.0; m], du2: vec![0.0; m] };
    for (a, (state, mode)) in states.iter().zip(modes.modes()).enumerate() {
        let now = oscillator_evolve(state, mode, t);
        let q_dot = now.velocity(mode);
        let q_ddot = -mode.omega * mode.omega * now.q;
        c.u1[a] = mode.amplitude * now.q;
        c.du1[a] = mode.amplitude * q_dot;
        c.u2[a] = mode.amplitude / mode.k * q_dot;
        c.du2[a] = mode.amplitude / mode.k * q_ddot;
    }
    assemble(modes, grid, t, c)
}

/// `U2 = -Σ A q'(t) cos(kz) e_y`, `U1 = Σ A q''(t) sin(kz) e_x`.
pub fn synthesize_second_solution(
    modes: &ModeSet,
    states: &[ModeState],
    grid: &GridSpec,
    t: f64,
) -> Result<Synthesis, CavityError> {
    check_states(states, modes)?;
    check_grid(grid, modes.spec())?;
    let m = modes.len();
    let mut c = ModalCoefficients { u1: vec![0.0; m], u2: vec![0.0; m], du1: vec![0.0; m], du2: vec![0.0; m] };
    for (a, (state, mode)) in states.iter().zip(modes.modes()).enumerate() {
        let (q1, q2) = integrated_coordinates(state, mode, t);
        let q = oscillator_evolve(state, mode, t).q;
        c.u1[a] = mode.amplitude * q2;
        c.du1[a] = mode.amplitude * mode.omega * q1;
        c.u2[a] = -mode.amplitude * q1;
        c.du2[a] = -mode.amplitude * mode.omega * q;
    }
    assemble(modes, grid, t, c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEnergy {
    pub energy: f64,
    pub points_per_wavelength: f64,
    /// False when fewer than [`MIN_POINTS_PER_WAVELENGTH`] samples cover the shortest wavelength.
    pub resolved: bool,
}

/// `(1/2) ∫ (|U1|² + |U2|²) dV` with cross-section `V / L`, by the trapezoidal rule.
pub fn field_energy(fields: &VectorFieldPair, modes: &ModeSet) -> Result<FieldEnergy, CavityError> {
    let grid = fields.grid();
    check_grid(grid, modes.spec())?;
    let density: Vec<f64> =
        fields.u1.values().iter().zip(fields.u2.values()).map(|(a, b)| norm_sq(a) + norm_sq(b)).collect();
    let energy = 0.5 * modes.spec().cross_section() * grid.integrate(&density)?;
    let points_per_wavelength = modes.shortest_wavelength() / grid.spacing()[AXIS_Z];
    let resolved = points_per_wavelength >= MIN_POINTS_PER_WAVELENGTH;
    if !resolved {
        log::warn!(
            "field energy grid resolves the shortest wavelength with {points_per_wavelength:.2} points (< {MIN_POINTS_PER_WAVELENGTH})"
        );
    }
    Ok(FieldEnergy { energy, points_per_wavelength, resolved })
}
